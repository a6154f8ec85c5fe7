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
Result formatting and export.

Tabular results (sweep records, fits, audit reports) are formatted by
:py:class:`ResultFormatter` implementations, selected with
:py:func:`get_formatter`:

csv
    A header line and one line per result, restricted to a field list.

json
    A single JSON array, keys sorted.

jsonl
    One JSON object per line, keys sorted.

Output is deterministic: repeated runs with identical input produce
identical bytes.


Lattice dumps
-------------
:py:func:`export_grid_binary` writes a :py:class:`wavelife.picard.GridFunction`
as

::

    magic     7 bytes   b"WAVE1D\\0"
    version   u16       1
    h         f64
    x_min     f64
    x_max     f64
    t_max     f64
    values    f64 * rows * nodes, row-major

All numbers are little-endian.
"""
import abc
import csv
import io
import json
import logging
import math
import struct
import sys

import matplotlib
matplotlib.use('Agg')
import matplotlib.pyplot as plt  # noqa: E402
import numpy as np  # noqa: E402

from .harness import PHI_LAW  # noqa: E402
from .picard import GridFunction  # noqa: E402
from .problem import phi  # noqa: E402

logger = logging.getLogger(__name__)


SWEEP_FIELDS = ('eps', 'T_numeric', 'T_extrapolated', 'h', 'threshold',
                'censored')

FIT_FIELDS = ('slope', 'stderr', 'r_squared', 'theory_slope')

GRID_MAGIC = b'WAVE1D\0'
GRID_VERSION = 1
GRID_HEADER = struct.Struct('<7sH4d')

# Element ids in SVG plots
SVG_POINTS_ID = 'data-points'
SVG_FIT_ID = 'fit-line'
SVG_THEORY_ID = 'theory-line'


def as_dict(result):
    """Get a dict from a namedtuple or mapping result."""
    if hasattr(result, '_asdict'):
        return dict(result._asdict())
    return dict(result)


def _json_value(value):
    if isinstance(value, (np.floating, np.integer, np.bool_)):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    return value


def _json_ready(result):
    return dict((k, _json_value(v)) for k, v in as_dict(result).items())


class ResultFormatter(abc.ABC):
    """ Abstract result formatter. """

    def __init__(self, fields=None):
        self.fields = tuple(fields) if fields else None

    def select(self, result):
        data = _json_ready(result)
        if self.fields:
            return dict((f, data.get(f)) for f in self.fields)
        return data

    @abc.abstractmethod
    def __call__(self, results):
        """
        Format results

        :param results: a sequence of namedtuples or dicts

        :rtype: str
        """
        raise NotImplementedError()


class CsvFormatter(ResultFormatter):
    """Header plus one row per result."""

    def __call__(self, results):
        rows = [self.select(r) for r in results]
        fields = self.fields or (tuple(rows[0]) if rows else ())
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=fields, lineterminator='\n',
                                extrasaction='ignore')
        writer.writeheader()
        for row in rows:
            writer.writerow(row)
        return buf.getvalue()


class JsonFormatter(ResultFormatter):

    def __call__(self, results):
        return json.dumps([self.select(r) for r in results],
                          sort_keys=True, indent=2) + '\n'


class JsonLinesFormatter(ResultFormatter):

    def __call__(self, results):
        return ''.join(json.dumps(self.select(r), sort_keys=True) + '\n'
                       for r in results)


FORMATTERS = {
    'csv': CsvFormatter,
    'json': JsonFormatter,
    'jsonl': JsonLinesFormatter,
}


def get_formatter(fmt, fields=None):
    """
    Get a formatter by name.

    :raises ValueError: for unknown formats
    """
    logger.debug('get_formatter(%r, %r)', fmt, fields)
    try:
        cls = FORMATTERS[fmt]
    except KeyError:
        raise ValueError("unknown output format %r" % (fmt, ))
    return cls(fields=fields)


def write_text(text, filename):
    """Write text to a file, or to stdout for '-'."""
    if filename in (None, '-'):
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with io.open(filename, mode='wt', encoding='utf-8', newline='') as f:
        f.write(text)
    logger.info('wrote %r', filename)


def emit_results(results, fmt, filename, fields=None):
    """
    Format results and write them to a file.

    :raises OSError: if the file cannot be written
    """
    write_text(get_formatter(fmt, fields)(results), filename)


def _json_document(value):
    if hasattr(value, '_asdict') or isinstance(value, dict):
        return dict((k, _json_document(v)) for k, v in as_dict(value).items())
    if isinstance(value, (list, tuple)):
        return [_json_document(v) for v in value]
    return _json_value(value)


def emit_document(document, filename):
    """
    Write one (possibly nested) result as a JSON document.

    Non-finite numbers are written as null, at any depth.

    :raises OSError: if the file cannot be written
    """
    text = json.dumps(_json_document(document), sort_keys=True, indent=2)
    write_text(text + '\n', filename)


def plot_sweep_svg(records, fit, a, p, filename):
    """
    Log-log scatter of (eps, T) with the fit and theory lines.

    For a = 0 the vertical axis is phi(T).  Markers are grouped under the
    element id ``data-points``, lines under ``fit-line`` and
    ``theory-line``.
    """
    usable = [r for r in records if not r.censored]
    eps = np.array([r.eps for r in usable])
    T = np.array([r.T_extrapolated for r in usable])
    y = phi(T) if fit.regime == PHI_LAW else T
    line_eps = np.geomspace(eps.min(), eps.max(), 50)

    matplotlib.rcParams['svg.hashsalt'] = 'wavelife'
    fig, ax = plt.subplots(figsize=(6, 4.5))
    try:
        ax.loglog(eps, y, 'o', color='black', gid=SVG_POINTS_ID,
                  label='measured')
        ax.loglog(line_eps,
                  np.exp(fit.intercept) * line_eps ** fit.slope,
                  '-', color='tab:blue', gid=SVG_FIT_ID,
                  label='fit, slope %.3f' % fit.slope)
        # theory line through the geometric mean of the data
        anchor = np.exp(np.mean(np.log(y)) -
                        fit.theory_slope * np.mean(np.log(eps)))
        ax.loglog(line_eps, anchor * line_eps ** fit.theory_slope,
                  '--', color='tab:red', gid=SVG_THEORY_ID,
                  label='theory, slope %.3f' % fit.theory_slope)
        ax.set_xlabel('eps')
        ax.set_ylabel('phi(T)' if fit.regime == PHI_LAW else 'T')
        ax.set_title('a = %g, p = %g' % (a, p))
        ax.legend()
        fig.savefig(filename, format='svg', metadata={'Date': None})
    finally:
        plt.close(fig)
    logger.info('wrote %r', filename)


def export_grid_csv(grid, filename):
    """Write a grid function as (x, t, u) rows."""
    xs, times = grid.xs, grid.times
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator='\n')
    writer.writerow(('x', 't', 'u'))
    for k, t in enumerate(times):
        for x, u in zip(xs, grid.rows[k]):
            writer.writerow((repr(float(x)), repr(float(t)), repr(float(u))))
    write_text(buf.getvalue(), filename)


def export_grid_binary(grid, filename):
    """Write a grid function in the binary lattice format."""
    header = GRID_HEADER.pack(GRID_MAGIC, GRID_VERSION, grid.h, grid.x_min,
                              grid.x_max, grid.t_max)
    with io.open(filename, mode='wb') as f:
        f.write(header)
        f.write(np.ascontiguousarray(grid.rows, dtype='<f8').tobytes())
    logger.info('wrote %r', filename)


def read_grid_binary(filename):
    """
    Read a grid function written by :py:func:`export_grid_binary`.

    :raises ValueError: on a bad header or truncated data
    """
    with io.open(filename, mode='rb') as f:
        header = f.read(GRID_HEADER.size)
        payload = f.read()
    if len(header) != GRID_HEADER.size:
        raise ValueError("%s: truncated header" % (filename, ))
    magic, version, h, x_min, x_max, t_max = GRID_HEADER.unpack(header)
    if magic != GRID_MAGIC:
        raise ValueError("%s: not a lattice dump" % (filename, ))
    if version != GRID_VERSION:
        raise ValueError("%s: unsupported version %d" % (filename, version))
    nodes = int(round((x_max - x_min) / h)) + 1
    rows = int(round(t_max / h)) + 1
    values = np.frombuffer(payload, dtype='<f8')
    if values.size != nodes * rows:
        raise ValueError("%s: expected %d values, got %d" %
                         (filename, nodes * rows, values.size))
    return GridFunction(h, x_min, values.reshape(rows, nodes))
