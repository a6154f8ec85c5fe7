# -*- coding: utf-8 -*-
#
# This file is part of wavelife.
# Copyright (C) 2024-2026 University of Oslo, Norway
#
# This program is free software: you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation, either version 3 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE.  See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <https://www.gnu.org/licenses/>.
"""
Resource lookup and logging setup for wavelife.

Run parameters are never read from the environment.  They come from the
command line or from a config file given with ``--config`` (see
:py:mod:`wavelife.parser` and :py:mod:`wavelife.cli`).  What remains here is
where to find tabulated initial data, and how to log.

Tabulated data
--------------
Initial data given by table name (``--data quartic-bump``) rather than by
path is looked up in

.. py:data:: DEFAULT_CONFIG_PATH

    1. ~/.config/wavelife/
    2. /etc/wavelife/
    3. <prefix>/local/share/wavelife
    4. <prefix>/share/wavelife

The package installs its example tables to the last one.  A source checkout
also finds the tables in its ``data/`` directory.


Logging
-------
Log messages go to stderr.  Verbosity counts from the command line map to
levels through

.. py:data:: LOGGING_VERBOSITY

    0. :py:const:`logging.ERROR`
    1. :py:const:`logging.WARNING`
    2. :py:const:`logging.INFO`
    3. :py:const:`logging.DEBUG`

Python warnings (including numpy floating point and scipy quadrature
warnings that are not turned into errors) are routed to the ``py.warnings``
logger.
"""
import logging
import os
import sys

logger = logging.getLogger(__name__)


DEFAULT_CONFIG_PATH = tuple((
    os.path.expanduser('~/.config/wavelife'),
    '/etc/wavelife',
    os.path.join(sys.prefix, 'local/share/wavelife'),
    # setup.py data_files
    os.path.join(sys.prefix, 'share/wavelife'),
    # source checkout
    os.path.join(os.path.dirname(__file__), '../data'),
))

DATA_SUFFIX = '.csv'

LOGGING_FORMAT = "%(levelname)s - %(name)s - %(message)s"

LOGGING_VERBOSITY = tuple((
    logging.ERROR,
    logging.WARNING,
    logging.INFO,
    logging.DEBUG,
))

# Third party loggers that are only interesting when debugging
NOISY_LOGGERS = ('matplotlib', 'PIL')


def get_verbosity(verbosity):
    """
    Translate a verbosity count to a logging level.

    Counts beyond the last entry of :py:const:`LOGGING_VERBOSITY` give the
    last level.

    :param int verbosity: verbosity count

    :rtype: int
    """
    index = max(0, min(verbosity, len(LOGGING_VERBOSITY) - 1))
    return LOGGING_VERBOSITY[index]


def configure_logging(level):
    """
    Log to stderr at a given level.

    :param int level: logging level
    """
    logging.basicConfig(level=level, format=LOGGING_FORMAT)
    logging.captureWarnings(True)
    for name in NOISY_LOGGERS:
        logging.getLogger(name).setLevel(max(level, logging.WARNING))


def iter_config_files(basename):
    """
    Files named basename in :py:const:`DEFAULT_CONFIG_PATH`, in order.

    :rtype: generator
    """
    directories = (d for d in DEFAULT_CONFIG_PATH if os.path.isdir(d))
    for directory in directories:
        candidate = os.path.join(directory, basename)
        logger.debug('trying %r', os.path.abspath(candidate))
        if os.path.isfile(candidate):
            yield candidate


def get_config_file(basename):
    """
    :return: the first match from :py:func:`iter_config_files`, or None
    """
    filename = next(iter_config_files(basename), None)
    if filename is None:
        logger.debug('no %r in %r', basename, DEFAULT_CONFIG_PATH)
    else:
        logger.info('using %r', filename)
    return filename


def get_data_file(name):
    """
    Find a tabulated initial data file by table name.

    :param str name: a table name ('quartic-bump') or file name

    :return: path to the table, or None
    """
    if not name.endswith(DATA_SUFFIX):
        name += DATA_SUFFIX
    return get_config_file(name)
