# This file is a part of hamflow.
#
# Copyright (c) 2024-2026 hamflow contributors
# This file is licensed under The MIT License (MIT).
# You can find the full license text in LICENSE in the root of this project.

import pytest

from hamflow import __version__
from hamflow.cmd.__main__ import main
from hamflow.cmd.runconfig import SEED_VARIABLE, ConfigError, RunConfig
from hamflow.domination import SCAN_COLUMNS
from hamflow.fileio import read_checkpoint, read_table
from hamflow.flow import ORBIT_COLUMNS

EXACT_FLAGS = ['--method', 'exact', '--dt', '0.5']


def test_version(capsys):
    assert main(['--version']) == 0
    assert capsys.readouterr().out == f'hamflow {__version__}\n'


def test_no_command(capsys):
    assert main([]) == 2
    assert 'usage:' in capsys.readouterr().out


def test_catalog(capsys):
    assert main(['catalog']) == 0
    out = capsys.readouterr().out
    assert 'hyperbolic-drift' in out
    assert 'bump-rotation' in out


usage_params = (
    ['bogus'],
    ['integrate', '--y0', '1,2'],
    ['integrate', '--y0', 'a,b,c,d'],
    ['integrate', '--method', 'euler'],
    ['integrate', '--dt', '-1'],
    ['surface-scan', '--m-max', '0'],
)


@pytest.mark.parametrize('args', usage_params)
def test_usage_errors(args):
    assert main(args) == 2


def test_integrate_writes_outputs(tmp_path, capsys):
    table = tmp_path / 'orbit.csv'
    checkpoint = tmp_path / 'orbit.bin'
    args = ['integrate', '--system', 'translation', '--T', '2', '-o', str(table), '--checkpoint', str(checkpoint)]
    assert main(args + EXACT_FLAGS) == 0
    assert 'to t=2.0 in 4 steps' in capsys.readouterr().out
    header, rows = read_table(str(table))
    assert header == list(ORBIT_COLUMNS)
    assert len(rows) == 5
    assert read_checkpoint(str(checkpoint)).shape == (5, len(ORBIT_COLUMNS))


def test_config_file_under_flags(tmp_path, capsys):
    config = tmp_path / 'run.conf'
    config.write_text('# translation run\nsystem=translation\nmethod=exact\ndt=0.5\nT=1\n')
    assert main(['integrate', '--config', str(config), '--T', '2']) == 0
    assert 'to t=2.0 in 4 steps' in capsys.readouterr().out


def test_missing_config_file(tmp_path, capsys):
    assert main(['integrate', '--config', str(tmp_path / 'missing.conf')]) == 2
    assert 'cannot read config' in capsys.readouterr().err


def test_exponents(capsys):
    assert main(['exponents', '--system', 'hyperbolic-drift', '--method', 'exact', '--dt', '1', '--T', '5']) == 0
    out = capsys.readouterr().out
    assert out.startswith('lambda_plus=')
    assert float(out.split()[0].split('=')[1]) == pytest.approx(1.0)


def test_unknown_system_fails(capsys):
    assert main(['exponents', '--system', 'no-such-system', '--T', '1']) == 1
    assert 'hamflow: CatalogError' in capsys.readouterr().err


def test_bad_seed_variable(monkeypatch, capsys):
    monkeypatch.setenv(SEED_VARIABLE, 'abc')
    assert main(['splitting', '--system', 'hyperbolic-drift']) == 2
    assert SEED_VARIABLE in capsys.readouterr().err


def test_perturb_verify_without_rotation(capsys):
    assert main(['perturb-verify', '--alpha', '0', '--grid', '2000']) == 0
    out = capsys.readouterr().out
    assert 'certified alpha=0.0' in out
    assert 'c2_bound=' in out


def test_perturb_verify_rejects_large_rotation(capsys):
    assert main(['perturb-verify', '--alpha', '0.5', '--grid', '2000']) == 1
    assert 'certificate failed' in capsys.readouterr().err


def test_run_config_from_text():
    config = RunConfig.from_text('y0=0.1,0,0,0\ntimestamp=false\nn=7\n')
    assert config.y0 == (0.1, 0.0, 0.0, 0.0)
    assert config.timestamp is False
    assert config.n == 7
    assert config.system == RunConfig().system
    assert RunConfig.from_text(config.to_text()) == config


run_config_error_params = (
    ('colour=blue\n', 'unknown keys: colour'),
    ('n=many\n', 'n:'),
    ('timestamp=yes\n', 'expected true or false'),
)


@pytest.mark.parametrize('text,message', run_config_error_params)
def test_run_config_errors(text, message):
    with pytest.raises(ConfigError) as excinfo:
        RunConfig.from_text(text)
    assert message in str(excinfo.value)


validate_params = (
    (dict(y0=(0.0,)), 'y0 needs 4 coordinates'),
    (dict(format='xlsx'), 'unknown format'),
    (dict(jobs=0), 'jobs must be at least 1'),
)


@pytest.mark.parametrize('values,message', validate_params)
def test_run_config_validate(values, message):
    with pytest.raises(ConfigError) as excinfo:
        RunConfig()._replace(**values).validate()
    assert message in str(excinfo.value)


def test_surface_scan_on_a_rotation(tmp_path, capsys):
    table = tmp_path / 'scan.csv'
    args = ['surface-scan', '--system', 'elliptic-drift', '--patch', '0.5', '--n', '3', '--T', '2', '--m-max', '1',
            '--no-timestamp', '-o', str(table)]
    assert main(args + ['--method', 'exact', '--dt', '1']) == 0
    assert 'Z-candidate 3' in capsys.readouterr().out
    header, rows = read_table(str(table))
    assert header[6] == 'classification'
    assert [row[6] for row in rows] == ['Z-candidate'] * 3


def test_surface_scan_of_an_empty_region(tmp_path, capsys):
    table = tmp_path / 'scan.csv'
    args = ['surface-scan', '--system', 'elliptic-drift', '--patch', '0.5', '--energy', '100', '--n', '1',
            '--no-timestamp', '-o', str(table)]
    assert main(args) == 0
    assert 'empty' in capsys.readouterr().out
    assert table.read_text().splitlines() == [','.join(SCAN_COLUMNS)]


def test_surface_scan_keeps_failed_points(tmp_path):
    table = tmp_path / 'scan.csv'
    args = ['surface-scan', '--system', 'bump-rotation', '--patch', '0.1', '--n', '20', '--T', '2', '--m-max', '1',
            '--no-timestamp', '-o', str(table)]
    assert main(args + ['--method', 'exact', '--dt', '1']) == 0
    _, rows = read_table(str(table))
    assert len(rows) == 20
    assert {row[6] for row in rows} == {'escaped', 'Z-candidate'}
    assert all(row[8] == 'true' for row in rows if row[6] == 'escaped')


scan_repeat_params = (
    (['--jobs', '1'], ['--jobs', '1']),
    (['--jobs', '3'], ['--jobs', '1']),
)


@pytest.mark.parametrize('first,second', scan_repeat_params)
def test_surface_scan_is_reproducible(tmp_path, first, second):
    args = ['surface-scan', '--system', 'hyperbolic-drift', '--patch', '0.5', '--n', '6', '--T', '3', '--m-max', '2',
            '--seed', '11', '--no-timestamp', '--method', 'exact', '--dt', '1']
    a = tmp_path / 'a.csv'
    b = tmp_path / 'b.csv'
    assert main(args + first + ['-o', str(a)]) == 0
    assert main(args + second + ['-o', str(b)]) == 0
    assert a.read_bytes() == b.read_bytes()
    assert len(a.read_text().splitlines()) == 7
