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
The wavelife command line interface.

Usage::

    pywavelife <command> [options]

Commands:

solve
    March one blow-up run (or solve the integral equation in existence mode)
    and write a summary, optionally dumping the lattice with ``--dump``.

sweep
    Blow-up runs for a list of amplitudes, a log-log scaling fit, and the
    sandwich check of every run against the lifespan bounds.

envelope
    Audit a blow-up run against the envelope lower bounds and the linear
    seed bound.  Audit reports are always written as JSON lines.

certify
    Run the Picard iteration and issue an existence certificate.

constants
    Dump the blow-up ledger and the lifespan constants as one JSON document.

Every run parameter can also be set in a config file given with
``--config``.  Command line flags override the file, which overrides the
built-in defaults.  The resolved configuration is echoed to stderr as JSON.

Exit codes: 0 if all checks passed, 1 if a check failed, 2 for usage errors
and 3 for I/O errors.
"""
import argparse
import collections
import json
import logging
import math
import os
import sys

import wavelife.config
import wavelife.formatting
import wavelife.harness
import wavelife.parser
import wavelife.version
from wavelife.blowup import (
    initial_state,
    limit_S,
    seq_closed_form,
    seq_next,
    threshold_constants,
    upper_lifespan_bound,
)
from wavelife.picard import (
    PicardError,
    measured_horizon,
    picard_solve,
    sup_norm,
)
from wavelife.problem import (
    DATA_LIBRARY,
    Nonlinearity,
    ProblemSpec,
    named_data,
    validate_spec,
)


logger = logging.getLogger(__name__)

COMMANDS = ('solve', 'sweep', 'envelope', 'certify', 'constants')

EXIT_CHECK_FAILED = 1
EXIT_IO_ERROR = 3

# Largest number of rows kept in memory for audits and dumps
MAX_STORED_ROWS = 400

# Envelope, seed and sandwich reports are written in this format
AUDIT_FORMAT = 'jsonl'


def positive_float(value):
    number = float(value)
    if not number > 0 or not math.isfinite(number):
        raise argparse.ArgumentTypeError("%r is not a positive number" %
                                         (value, ))
    return number


def positive_int(value):
    number = int(value)
    if number < 1:
        raise argparse.ArgumentTypeError("%r is not a positive integer" %
                                         (value, ))
    return number


def unit_ratio(value):
    number = float(value)
    if not 0 < number < 1:
        raise argparse.ArgumentTypeError("%r is not in (0, 1)" % (value, ))
    return number


def choice(*choices):
    def convert(value):
        if value not in choices:
            raise argparse.ArgumentTypeError(
                "invalid choice %r (choose from %s)" %
                (value, ', '.join(choices)))
        return value
    convert.__name__ = 'choice'
    return convert


ConfigKey = collections.namedtuple(
    'ConfigKey', ('name', 'type', 'default', 'help', 'many', 'metavar'))


def _key(name, type, default, help, many=False, metavar=None):
    return ConfigKey(name, type, default, help, many, metavar)


CONFIG_KEYS = collections.OrderedDict((k.name, k) for k in (
    # problem
    _key('a', float, 1.0, "weight exponent (default: %(default)s)"),
    _key('p', float, 2.0, "nonlinearity exponent (default: %(default)s)"),
    _key('nonlinearity', choice(Nonlinearity.ABS_POW,
                                Nonlinearity.SIGNED_POW),
         Nonlinearity.ABS_POW, "nonlinear term (default: %(default)s)"),
    _key('data', str, 'cos2-bump',
         "initial data, a library name (%s), table name or CSV path"
         " (default: %%(default)s)" % ', '.join(DATA_LIBRARY),
         metavar='NAME'),
    _key('mode', choice(*ProblemSpec.MODES), None,
         "problem mode (default: existence for certify, else blowup)"),
    _key('eps', positive_float, 0.1, "data amplitude (default: %(default)s)"),
    _key('eps-list', positive_float, None, "amplitudes of a sweep",
         many=True),
    _key('eps-start', positive_float, None,
         "largest sweep amplitude (default: %s for a <= -1, else %s)" % (
             wavelife.harness.EPS_START_SHORT,
             wavelife.harness.EPS_START_LONG)),
    _key('eps-count', positive_int, 8,
         "number of sweep amplitudes (default: %(default)s)"),
    _key('eps-ratio', unit_ratio, 2 ** -0.5,
         "ratio of successive sweep amplitudes (default: %(default).4f)"),
    _key('c0', positive_float, None,
         "seed constant used by audits (default: computed from the data)"),
    # numerics
    _key('h', positive_float, 0.01, "lattice spacing (default: %(default)s)"),
    _key('t-max', positive_float, None,
         "time horizon (default: derived from the lifespan bounds)"),
    _key('threshold', positive_float, wavelife.harness.DEFAULT_THRESHOLD,
         "blow-up threshold (default: %(default)g)"),
    _key('budget', positive_float, wavelife.harness.BUDGET_FACTOR,
         "sweep time budget relative to the upper lifespan bound"
         " (default: %(default)s)"),
    _key('order', choice('1', '2'), str(wavelife.harness.BLOWUP_ORDER),
         "blow-up rate order used by the extrapolation"
         " (default: %(default)s)"),
    _key('tol', positive_float, None,
         "Picard stopping tolerance (default: 1e-8 * M * eps)"),
    _key('safety', positive_float, 2.0,
         "safety factor on measured constants (default: %(default)s)"),
    _key('j-max', positive_int, 3,
         "largest envelope or ledger index (default: %(default)s)"),
    _key('store-every', positive_int, None,
         "keep every n-th lattice row (default: at most %d rows)" %
         MAX_STORED_ROWS),
    _key('slope-tol', positive_float, None,
         "fail if the fitted slope is further from theory than this"),
    _key('jobs', positive_int, os.cpu_count() or 1,
         "number of worker processes (default: %(default)s)"),
    # output
    _key('output', str, '-', "write results to FILE (default: stdout)",
         metavar='FILE'),
    _key('format', choice(*sorted(wavelife.formatting.FORMATTERS)), 'csv',
         "result format (default: %(default)s)"),
    _key('fit-output', str, None, "write the scaling fit to FILE",
         metavar='FILE'),
    _key('audit-output', str, None,
         "write sandwich or seed reports to FILE, as JSON lines",
         metavar='FILE'),
    _key('plot', str, None, "write an SVG plot of the sweep to FILE",
         metavar='FILE'),
    _key('dump', str, None,
         "dump the lattice to FILE (.csv for text, binary otherwise)",
         metavar='FILE'),
))


def _dest(name):
    return name.replace('-', '_')


class RunConfig(collections.namedtuple('RunConfig',
                                       ('command', 'values'))):
    """
    A fully resolved run configuration.

    :ivar command: one of :py:const:`COMMANDS`
    :ivar values: dict of every key in :py:const:`CONFIG_KEYS`
    """
    __slots__ = ()

    def __getitem__(self, key):
        if isinstance(key, str):
            return self.values[key]
        return super(RunConfig, self).__getitem__(key)

    @property
    def order(self):
        return int(self.values['order'])

    def build_spec(self, eps=None):
        """
        :rtype: wavelife.problem.ProblemSpec
        """
        v = self.values
        return ProblemSpec(
            a=v['a'],
            eps=v['eps'] if eps is None else eps,
            nonlinearity=Nonlinearity.from_name(v['nonlinearity'], v['p']),
            data=named_data(v['data']),
            mode=v['mode'])

    def eps_values(self):
        v = self.values
        if v['eps-list']:
            return list(v['eps-list'])
        start = v['eps-start']
        if start is None:
            start = wavelife.harness.default_eps_start(v['a'])
        return wavelife.harness.geometric_eps(start, v['eps-count'],
                                              v['eps-ratio'])

    def as_json(self):
        data = dict(self.values)
        data['command'] = self.command
        return json.dumps(data, sort_keys=True)


def _add_config_options(group):
    for key in CONFIG_KEYS.values():
        kwargs = {
            'dest': _dest(key.name),
            'type': key.type,
            'default': argparse.SUPPRESS,
            'help': (key.help % {'default': key.default}).replace('%', '%%'),
            'metavar': key.metavar or key.name.upper(),
        }
        if key.many:
            kwargs['nargs'] = '+'
        group.add_argument('--' + key.name, **kwargs)


def make_parser():
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument(
        '--config',
        default=None,
        help="read run parameters from %(metavar)s",
        metavar='FILE',
    )
    problem_args = common.add_argument_group('run parameters')
    _add_config_options(problem_args)

    log_args = common.add_argument_group('logging')
    log_verbosity = log_args.add_mutually_exclusive_group()
    log_verbosity.add_argument(
        '-v',
        dest='verbosity',
        action='count',
        help="increase verbosity of log messages (warning, info, debug)",
    )
    log_verbosity.add_argument(
        '--verbosity',
        dest='verbosity',
        type=int,
        help="set verbosity of log messages to %(metavar)s",
        metavar='N',
    )
    log_verbosity.add_argument(
        '-q', '--quiet',
        dest='verbosity',
        action='store_const',
        const=-1,
        help="silence all log messages",
    )
    log_verbosity.set_defaults(verbosity=0)

    parser = argparse.ArgumentParser(
        prog='pywavelife',
        description="Lifespan experiments for the weighted semilinear"
                    " wave equation",
    )
    parser.add_argument(
        '--version',
        action='version',
        version=wavelife.version.get_version_string())
    commands = parser.add_subparsers(dest='command', metavar='COMMAND')
    commands.required = True
    for name, help in (
            ('solve', "march one run and write a summary"),
            ('sweep', "sweep amplitudes and fit the lifespan law"),
            ('envelope', "audit a run against the envelope bounds"),
            ('certify', "issue a Picard existence certificate"),
            ('constants', "dump the blow-up ledger")):
        commands.add_parser(name, parents=[common], help=help,
                            description=help)
    return parser


def _convert_file_value(key, value):
    spec = CONFIG_KEYS[key]
    if spec.many:
        if not isinstance(value, list):
            value = [value]
        return [spec.type(v) for v in value]
    if isinstance(value, list):
        raise ValueError("%s takes a single value" % (key, ))
    return spec.type(value)


def read_config_values(filename):
    """
    Read and convert the values of a config file.

    :rtype: dict
    :raises ValueError: for unknown keys and invalid values
    :raises wavelife.parser.ConfigSyntaxError: for syntax errors
    """
    raw = wavelife.parser.parse_config_file(filename)
    values = {}
    for key, value in raw.items():
        if key not in CONFIG_KEYS:
            raise ValueError("%s: unknown key %r" % (filename, key))
        try:
            values[key] = _convert_file_value(key, value)
        except (ValueError, argparse.ArgumentTypeError) as e:
            raise ValueError("%s: invalid value for %r: %s" %
                             (filename, key, e))
    return values


def _check_values(command, values):
    problems = []
    if not values['p'] > 1:
        problems.append("p must exceed 1")
    if not values['a'] >= -1:
        problems.append("a must be at least -1")
    if command == 'certify' and values['mode'] == ProblemSpec.BLOWUP:
        problems.append("certify needs existence mode")
    return problems


def parse_config(inargs=None, parser=None):
    """
    Parse command line arguments and an optional config file.

    Exits with status 2 on any usage error.

    :rtype: tuple
    :return: (RunConfig, verbosity)
    """
    parser = parser or make_parser()
    args = parser.parse_args(inargs)
    values = dict((k.name, k.default) for k in CONFIG_KEYS.values())
    if args.config:
        if not os.path.isfile(args.config):
            parser.error("config file %r does not exist" % (args.config, ))
        try:
            values.update(read_config_values(args.config))
        except (wavelife.parser.ConfigSyntaxError, ValueError, OSError) as e:
            parser.error(str(e))
    for key in CONFIG_KEYS:
        if hasattr(args, _dest(key)):
            values[key] = getattr(args, _dest(key))
    if values['mode'] is None:
        values['mode'] = (ProblemSpec.EXISTENCE if args.command == 'certify'
                          else ProblemSpec.BLOWUP)

    problems = _check_values(args.command, values)
    if problems:
        parser.error('; '.join(problems))
    config = RunConfig(args.command, values)
    try:
        spec = config.build_spec()
    except LookupError as e:
        parser.error(str(e))
    except ValueError as e:
        parser.error("invalid data %r: %s" % (values['data'], e))
    problems = validate_spec(spec)
    if problems:
        parser.error('; '.join(problems))

    print(config.as_json(), file=sys.stderr)
    return config, args.verbosity


def setup_logging(verbosity):
    """ configure logging. """
    if verbosity < 0:
        root = logging.getLogger()
        root.addHandler(logging.NullHandler())
    else:
        level = wavelife.config.get_verbosity(int(verbosity))
        wavelife.config.configure_logging(level)


def _store_every(config, T):
    if config['store-every']:
        return config['store-every']
    steps = int(T / config['h'])
    return max(1, int(math.ceil(steps / float(MAX_STORED_ROWS))))


def _dump(grid, filename):
    if filename.lower().endswith('.csv'):
        wavelife.formatting.export_grid_csv(grid, filename)
    else:
        wavelife.formatting.export_grid_binary(grid, filename)


def _emit(config, results, filename=None, fields=None):
    wavelife.formatting.emit_results(results, config['format'],
                                     filename or config['output'], fields)


def _emit_audit(results, filename):
    wavelife.formatting.emit_results(results, AUDIT_FORMAT, filename)


def run_solve(config):
    spec = config.build_spec()
    h = config['h']
    if spec.mode == ProblemSpec.EXISTENCE:
        T = config['t-max'] or measured_horizon(spec, config['safety']).value
        u, certificate = picard_solve(spec, h, T, tol=config['tol'],
                                      safety=config['safety'])
        summary = {'eps': spec.eps, 'T': u.t_max, 'h': h,
                   'max_norm': sup_norm(u),
                   'certified': certificate is not None}
        _emit(config, [summary])
        if config['dump']:
            _dump(u, config['dump'])
        return True

    T = config['t-max'] or wavelife.harness.sweep_budget(spec,
                                                          config['budget'])
    store = 1 if config['dump'] else None
    try:
        solution, row = wavelife.harness.march(
            spec, h, T, threshold=config['threshold'], store_every=store)
        history = solution.history
    except wavelife.harness.NumericalOverflow as e:
        logger.warning('overflow in row %d, no lattice to dump', e.row)
        solution, row, history = None, e.row, e.history
    record = wavelife.harness.blowup_record(spec, h, config['threshold'],
                                            row, history, config.order)
    _emit(config, [record], fields=wavelife.formatting.SWEEP_FIELDS)
    if config['dump'] and solution is not None:
        _dump(solution.as_grid_function(), config['dump'])
    return True


def run_sweep(config):
    template = config.build_spec()
    a, p = template.a, template.p
    records = wavelife.harness.epsilon_sweep(
        template, config.eps_values(), config['h'],
        threshold=config['threshold'],
        jobs=config['jobs'],
        budget_factor=config['budget'],
        order=config.order)
    _emit(config, records, fields=wavelife.formatting.SWEEP_FIELDS)
    passed = True

    try:
        fit = wavelife.harness.fit_scaling(records, a, p)
    except wavelife.harness.InsufficientData as e:
        logger.warning('no scaling fit: %s', e)
        fit = None
        if config['slope-tol']:
            passed = False
    if fit is not None:
        if config['fit-output']:
            _emit(config, [fit], config['fit-output'],
                  wavelife.formatting.FIT_FIELDS)
        if config['plot']:
            wavelife.formatting.plot_sweep_svg(records, fit, a, p,
                                               config['plot'])
        if config['slope-tol'] and \
                abs(fit.slope - fit.theory_slope) > config['slope-tol']:
            logger.error('fitted slope %r is not within %r of %r',
                         fit.slope, config['slope-tol'], fit.theory_slope)
            passed = False

    entries = wavelife.harness.sandwich_check(records, template,
                                              safety=config['safety'])
    if config['audit-output']:
        _emit_audit(entries, config['audit-output'])
    failed = [e for e in entries if e.passed is False]
    for entry in failed:
        logger.error('eps=%r: T=%r outside [%r, %r]', entry.eps,
                     entry.T_extrapolated, entry.lower, entry.upper)
    return passed and not failed


def run_envelope(config):
    spec = config.build_spec()
    if spec.mode != ProblemSpec.BLOWUP:
        logger.warning('envelope audit of a %r mode problem', spec.mode)
    T = config['t-max'] or wavelife.harness.sweep_budget(spec,
                                                          config['budget'])
    solution, _ = wavelife.harness.march(
        spec, config['h'], T, threshold=config['threshold'],
        store_every=_store_every(config, T))
    consts = wavelife.harness.audit_constants(spec, config['c0'])
    reports = wavelife.harness.envelope_audit(solution, spec, consts,
                                              config['j-max'])
    seed = wavelife.harness.seed_audit(solution, spec, c0=config['c0'])
    _emit_audit(reports, config['output'])
    if config['audit-output']:
        _emit_audit([seed], config['audit-output'])
    violations = sum(r.violations for r in reports) + seed.violations
    if violations:
        logger.error('%d envelope or seed violation(s)', violations)
    return not violations


def run_certify(config):
    spec = config.build_spec()
    T = config['t-max']
    if T is None:
        T = 0.5 * measured_horizon(spec, config['safety']).value
        logger.info('certifying up to half the measured horizon, T=%r', T)
    if not T > 0:
        logger.error('no certified horizon for eps=%r', spec.eps)
        return False
    try:
        u, certificate = picard_solve(spec, config['h'], T,
                                      tol=config['tol'],
                                      safety=config['safety'])
    except PicardError as e:
        logger.error('picard iteration failed: %s', e)
        return False
    if certificate is None:
        logger.error('certificate withheld for eps=%r, T=%r', spec.eps, T)
        return False
    _emit(config, [certificate])
    if config['dump']:
        _dump(u, config['dump'])
    return True


def run_constants(config):
    spec = config.build_spec()
    consts = wavelife.harness.audit_constants(spec, config['c0'])
    p = spec.p
    state = initial_state(consts)
    ledger = []
    passed = True
    for j in range(1, config['j-max'] + 1):
        closed = seq_closed_form(j, consts, p)
        # log C_j grows like p**(j-1), so scale the allowed error with it
        scale = max(1.0, p ** (j - 1))
        consistent = abs(closed - state.log_C_j) <= 1e-9 * j * scale
        if not consistent:
            logger.error('ledger j=%d: recursion %r vs closed form %r',
                         j, state.log_C_j, closed)
            passed = False
        row = state._asdict()
        row['log_C_closed_form'] = closed
        ledger.append(row)
        state = seq_next(state, consts, p)

    B, eps_cap = threshold_constants(p, spec.a, consts.c0)
    bound = upper_lifespan_bound(spec)
    document = consts._asdict()
    document.update({
        'B': B,
        'eps_cap': eps_cap,
        'S_inf': limit_S(p),
        'upper_bound': bound.value,
        'small_eps': bound.small_eps,
        'measured_horizon': measured_horizon(spec, config['safety']).value,
        'ledger': ledger,
    })
    wavelife.formatting.emit_document(document, config['output'])
    return passed


RUNNERS = {
    'solve': run_solve,
    'sweep': run_sweep,
    'envelope': run_envelope,
    'certify': run_certify,
    'constants': run_constants,
}


def main(inargs=None):
    config, verbosity = parse_config(inargs)
    setup_logging(verbosity)
    logger.debug('config: %r', config)

    try:
        passed = RUNNERS[config.command](config)
    except OSError as e:
        logger.error('I/O error: %s', e)
        raise SystemExit(EXIT_IO_ERROR)
    if not passed:
        raise SystemExit(EXIT_CHECK_FAILED)


if __name__ == '__main__':
    main()
