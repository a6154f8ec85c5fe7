import csv
import json

import pytest

from wavelife import cli
from wavelife.formatting import SWEEP_FIELDS, read_grid_binary
from wavelife.problem import ProblemSpec

SWEEP_ARGS = ['sweep', '--a', '1', '--p', '2', '--eps-start', '0.5',
              '--eps-count', '8', '--h', '0.01']


def _write(tmp_path, text, name='run.conf'):
    filename = tmp_path / name
    filename.write_text(text)
    return str(filename)


def _exit_code(excinfo):
    return excinfo.value.code


def test_parse_sweep():
    config, verbosity = cli.parse_config(SWEEP_ARGS)
    assert config.command == 'sweep'
    assert verbosity == 0
    assert config['a'] == 1.0
    assert config['p'] == 2.0
    assert config['h'] == 0.01
    assert config['mode'] == ProblemSpec.BLOWUP
    assert len(config.eps_values()) == 8
    assert config.eps_values()[0] == 0.5


def test_parse_echoes_json(capsys):
    config, _ = cli.parse_config(SWEEP_ARGS)
    data = json.loads(capsys.readouterr().err)
    assert data['command'] == 'sweep'
    assert data['eps-count'] == 8
    assert data['h'] == config['h']


@pytest.mark.parametrize('args', (
    ['sweep', '--p', '0.9'],
    ['sweep', '--p', '1'],
    ['solve', '--a', '-2'],
    ['solve', '--h', '0'],
    ['solve', '--eps-ratio', '1.5'],
    ['solve', '--order', '3'],
    ['solve', '--data', 'no-such-data'],
    ['certify', '--mode', 'blowup'],
    ['solve', '-v', '-q'],
    [],
))
def test_usage_errors(args):
    with pytest.raises(SystemExit) as excinfo:
        cli.parse_config(args)
    assert _exit_code(excinfo) == 2


@pytest.mark.parametrize('command,mode', (
    ('certify', ProblemSpec.EXISTENCE),
    ('solve', ProblemSpec.BLOWUP),
    ('constants', ProblemSpec.BLOWUP),
))
def test_default_mode(command, mode):
    config, _ = cli.parse_config([command])
    assert config['mode'] == mode


@pytest.mark.parametrize('args,verbosity', (
    ([], 0),
    (['-vv'], 2),
    (['--verbosity', '3'], 3),
    (['-q'], -1),
))
def test_verbosity(args, verbosity):
    assert cli.parse_config(['solve'] + args)[1] == verbosity


def test_config_file(tmp_path):
    filename = _write(tmp_path, 'h = 0.02\neps_list = (0.5 0.25)\n')
    config, _ = cli.parse_config(['sweep', '--config', filename])
    assert config['h'] == 0.02
    assert config.eps_values() == [0.5, 0.25]


def test_flags_override_config_file(tmp_path):
    filename = _write(tmp_path, 'h = 0.02\n')
    config, _ = cli.parse_config(['solve', '--config', filename,
                                  '--h', '0.01'])
    assert config['h'] == 0.01


@pytest.mark.parametrize('text', (
    'no-such-key = 1\n',
    'h = -1\n',
    'h = (0.1 0.2)\n',
    'h 0.1\n',
    'h = 1\nh = 2\n',
))
def test_bad_config_file(tmp_path, text):
    filename = _write(tmp_path, text)
    with pytest.raises(SystemExit) as excinfo:
        cli.parse_config(['solve', '--config', filename])
    assert _exit_code(excinfo) == 2


def test_missing_config_file(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        cli.parse_config(['solve', '--config', str(tmp_path / 'missing')])
    assert _exit_code(excinfo) == 2


def test_main_constants(tmp_path):
    output = tmp_path / 'constants.json'
    cli.main(['constants', '--a', '1', '--p', '2', '--eps', '0.1',
              '--j-max', '4', '--format', 'csv', '--output', str(output),
              '-q'])
    document = json.loads(output.read_text())
    for key in ('E', 'F', 'k', 'B', 'eps_cap', 'S_inf', 'upper_bound'):
        assert key in document
    assert document['S_inf'] == pytest.approx(2.0)
    assert document['B'] > 0
    ledger = document['ledger']
    assert [row['j'] for row in ledger] == [1, 2, 3, 4]
    for row in ledger:
        assert row['log_C_j'] == pytest.approx(row['log_C_closed_form'])


def test_main_constants_deterministic(tmp_path):
    first, second = tmp_path / 'first.csv', tmp_path / 'second.csv'
    for output in (first, second):
        cli.main(['constants', '--output', str(output), '-q'])
    assert first.read_bytes() == second.read_bytes()


def test_main_unwritable_output(tmp_path):
    with pytest.raises(SystemExit) as excinfo:
        cli.main(['constants', '--output', str(tmp_path / 'no' / 'x.csv'),
                  '-q'])
    assert _exit_code(excinfo) == cli.EXIT_IO_ERROR


def test_main_certify(tmp_path):
    output = tmp_path / 'certificate.json'
    cli.main(['certify', '--a', '1', '--p', '2', '--eps', '0.05',
              '--h', '0.025', '--format', 'json', '--output', str(output),
              '-q'])
    certificate = json.loads(output.read_text())[0]
    assert certificate['eps'] == 0.05
    assert certificate['contraction_ratio'] <= 0.55


def test_main_certify_withheld():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(['certify', '--a', '1', '--p', '2', '--eps', '0.05',
                  '--h', '0.1', '--t-max', '3', '-q'])
    assert _exit_code(excinfo) == cli.EXIT_CHECK_FAILED


def test_main_solve_dump(tmp_path):
    output = tmp_path / 'run.csv'
    dump = tmp_path / 'run.bin'
    cli.main(['solve', '--a', '1', '--p', '2', '--eps', '0.5',
              '--h', '0.05', '--output', str(output), '--dump', str(dump),
              '-q'])
    with output.open() as f:
        rows = list(csv.DictReader(f))
    assert len(rows) == 1
    assert list(rows[0]) == list(SWEEP_FIELDS)
    assert rows[0]['censored'] == 'False'
    grid = read_grid_binary(str(dump))
    assert grid.h == 0.05
    assert grid.t_max <= float(rows[0]['T_numeric']) + 1e-9


def test_main_sweep_without_fit():
    with pytest.raises(SystemExit) as excinfo:
        cli.main(['sweep', '--a', '1', '--p', '2', '--eps-list', '0.5',
                  '0.4', '--h', '0.05', '--slope-tol', '0.1', '--jobs', '1',
                  '--output', '-', '-q'])
    assert _exit_code(excinfo) == cli.EXIT_CHECK_FAILED


def test_version(capsys):
    with pytest.raises(SystemExit) as excinfo:
        cli.parse_config(['--version'])
    assert _exit_code(excinfo) == 0
    out = capsys.readouterr().out
    assert out.startswith('wavelife ')
    assert 'numpy' in out


def test_parse_sweep_default_eps_start():
    config, _ = cli.parse_config(['sweep', '--a', '1'])
    assert config['eps-start'] is None
    assert config.eps_values()[0] == 0.01
    config, _ = cli.parse_config(['sweep', '--a', '-1'])
    assert config.eps_values()[0] == 0.5


def test_main_sweep_audit_jsonl(tmp_path):
    audit = tmp_path / 'sandwich.txt'
    with pytest.raises(SystemExit) as excinfo:
        cli.main(['sweep', '--a', '1', '--p', '2', '--eps-list', '0.5',
                  '0.4', '--h', '0.05', '--slope-tol', '0.1', '--jobs', '1',
                  '--format', 'csv', '--output', str(tmp_path / 'sweep.csv'),
                  '--audit-output', str(audit), '-q'])
    assert _exit_code(excinfo) == cli.EXIT_CHECK_FAILED
    entries = [json.loads(line) for line in audit.read_text().splitlines()]
    assert sorted(entry['eps'] for entry in entries) == [0.4, 0.5]
    assert all('passed' in entry for entry in entries)


def test_main_envelope_jsonl(tmp_path):
    output = tmp_path / 'envelope.txt'
    seed = tmp_path / 'seed.txt'
    cli.main(['envelope', '--a', '1', '--p', '2', '--eps', '0.5',
              '--h', '0.05', '--j-max', '3', '--format', 'csv',
              '--output', str(output), '--audit-output', str(seed), '-q'])
    reports = [json.loads(line) for line in output.read_text().splitlines()]
    assert [report['j'] for report in reports] == [1, 2, 3]
    assert json.loads(seed.read_text())['violations'] == 0
