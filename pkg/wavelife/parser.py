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
Parsing of wavelife config files.

A config file is flat ``key = value`` text:

::

    # comments run to the end of the line
    a = 1
    p = 2
    data = "my table.csv"
    eps-list = (0.5 0.35 0.25 0.18)

Keys are the long option names of the command line (``_`` may be used
instead of ``-``).  Values are single tokens, quoted strings, or
parenthesized lists of tokens.  Type conversion and validation of the values
are left to :py:mod:`wavelife.cli`.
"""
import io
import logging

logger = logging.getLogger(__name__)


class ConfigSyntaxError(Exception):
    """Base class for all config file syntax errors."""

    def __init__(self, msg, lineno=None, filename=None):
        super(ConfigSyntaxError, self).__init__(msg)
        self.msg = msg
        self.lineno = lineno
        self.filename = filename

    def __str__(self):
        where = ':'.join(str(x) for x in (self.filename, self.lineno)
                         if x is not None)
        if where:
            return "{}: {}".format(where, self.msg)
        return "Syntax error: {}".format(self.msg)


class DuplicateKey(ConfigSyntaxError):
    """The same key was given twice."""

    def __init__(self, key, lineno=None, filename=None):
        super(DuplicateKey, self).__init__(
            "duplicate key %r" % (key, ), lineno, filename)
        self.key = key


def lexer(text):
    """
    Generates tokens from the text

    Separators ``=``, ``(`` and ``)`` are tokens of their own, ``#`` starts a
    comment.  An unterminated quote or trailing backslash is reported as a
    ``('"', -1)`` or ``('\\\\', -1)`` token.

    :type text: str
    :param text: The text to tokenize.

    :rtype: generator
    :returns:
        A generator that yields (token, offset) pairs.

    >>> list(lexer('h = 0.01'))
    [('h', 0), ('=', 2), ('0.01', 4)]
    """
    if not isinstance(text, str):
        raise TypeError("invalid type %s, expected %s" %
                        (type(text).__name__, str.__name__))
    ret = []
    start = 0
    inquotes = False
    internalquotes = False
    backslash = False
    for i, cur in enumerate(text):
        if backslash:
            if not ret:
                start = i - 1
            ret.append(cur)
            backslash = False
        elif inquotes:
            if cur == '"':
                inquotes = False
                if not internalquotes:
                    yield ''.join(ret), start
                    ret = []
            else:
                ret.append(cur)
        elif cur == '#':
            break
        elif cur in '()=':
            if ret:
                yield ''.join(ret), start
                ret = []
            yield cur, i
        elif cur == '"':
            inquotes = True
            internalquotes = bool(ret)
            if not internalquotes:
                start = i
        elif cur.isspace():
            if ret:
                yield ''.join(ret), start
                ret = []
        elif cur == '\\':
            backslash = True
        else:
            if not ret:
                start = i
            ret.append(cur)
    if backslash:
        yield '\\', -1
    if inquotes:
        yield '"', -1
    if ret:
        yield ''.join(ret), start


def normalize_key(key):
    return key.strip().replace('_', '-')


def parse_line(line, lineno=None):
    """
    Parse one line of a config file.

    :return: (key, value) or None for blank and comment lines; value is a
             string or a list of strings
    """
    tokens = list(lexer(line))
    if not tokens:
        return None
    for token, offset in tokens:
        if offset == -1:
            raise ConfigSyntaxError("unterminated %s" %
                                    ('quote' if token == '"' else 'escape'),
                                    lineno)
    words = [t for t, _ in tokens]
    if len(words) < 3 or words[1] != '=':
        raise ConfigSyntaxError("expected 'key = value'", lineno)
    key, rest = normalize_key(words[0]), words[2:]
    if rest[0] == '(':
        if rest[-1] != ')' or len(rest) < 2:
            raise ConfigSyntaxError("unbalanced parenthesis", lineno)
        values = rest[1:-1]
        if any(v in '()=' for v in values):
            raise ConfigSyntaxError("unexpected separator in list", lineno)
        return key, values
    if len(rest) != 1 or rest[0] in '()=':
        raise ConfigSyntaxError("expected a single value for %r" % (key, ),
                                lineno)
    return key, rest[0]


def parse_config_text(text, filename=None):
    """
    Parse config file contents.

    :rtype: dict
    :raises ConfigSyntaxError: on syntax errors or duplicate keys
    """
    values = {}
    for lineno, line in enumerate(text.splitlines(), 1):
        try:
            item = parse_line(line, lineno)
        except ConfigSyntaxError as e:
            e.filename = filename
            raise
        if item is None:
            continue
        key, value = item
        if key in values:
            raise DuplicateKey(key, lineno, filename)
        values[key] = value
    logger.debug('parsed %d key(s) from %r', len(values), filename)
    return values


def parse_config_file(filename):
    """
    Read and parse a config file.

    :rtype: dict
    """
    with io.open(filename, mode='rt', encoding='utf-8') as f:
        return parse_config_text(f.read(), filename=filename)
