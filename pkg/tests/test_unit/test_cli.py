"""Command line tests."""

import logging

import pytest
from click.testing import CliRunner

from adhoc_energy_routing.cli import main
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.scenario import (
    load_scenario,
    parse_config,
    print_config,
)
from adhoc_energy_routing.simulation import run_scenario
from testing_helpers import SMALL_SCENARIO


@pytest.fixture(autouse=True)
def _cli_logging():
    level = logger.level
    yield
    logger.setLevel(level)
    for handler in list(logger.handlers):
        if getattr(handler, '_adhoc_cli', False):
            logger.removeHandler(handler)


@pytest.fixture
def small(tmp_path):
    path = tmp_path / 'small.scn'
    path.write_text(SMALL_SCENARIO)
    return path


def invoke(*args):
    return CliRunner().invoke(main, args, catch_exceptions=False)


def test_run_prints_report(small):
    result = invoke('-q', 'run', '-c', str(small))
    assert result.exit_code == 0
    expected = run_scenario(parse_config(SMALL_SCENARIO, str(small)), 1)
    assert result.output == expected.report


def test_run_seed_and_protocol(small):
    result = invoke('-q', 'run', '-c', str(small), '-s', '2', '-p', 'mdr')
    assert result.exit_code == 0
    assert 'protocol=mdr\nseed=2\n' in result.output


def test_run_writes_trace_and_report(small, tmp_path):
    trace = tmp_path / 'run.tr'
    report = tmp_path / 'run.txt'
    result = invoke(
        '-q', 'run', '-c', str(small),
        '--trace', str(trace), '--report', str(report),
    )
    assert result.exit_code == 0
    assert result.output == ''
    assert report.read_text().startswith('scenario=small\n')
    assert trace.read_text()

    result = invoke('validate-trace', str(trace))
    assert result.exit_code == 0


def test_invalid_scenario_exits_with_1(tmp_path):
    path = tmp_path / 'broken.scn'
    path.write_text(SMALL_SCENARIO.replace('pkts_per_s = 2', 'pkts_per_s = 0'))
    result = CliRunner().invoke(main, ('run', '-c', str(path)))
    assert result.exit_code == 1
    assert '1 error(s) in scenario configuration:' in result.output
    assert f'{path}:16:' in result.output


def test_missing_scenario_exits_with_1():
    result = CliRunner().invoke(main, ('print-config', '-c', 'nonexistent'))
    assert result.exit_code == 1
    assert 'nonexistent: no such file or bundled scenario' in result.output


def test_batch(small, tmp_path):
    out_dir = tmp_path / 'out'
    result = invoke('-q', 'batch', '-c', str(small), '-o', str(out_dir))
    assert result.exit_code == 0
    assert sorted(p.name for p in out_dir.iterdir()) == [
        'seed-1.txt', 'seed-2.txt', 'summary.csv',
    ]


def test_batch_rate_sweep(small, tmp_path):
    out_dir = tmp_path / 'sweep'
    result = invoke(
        '-q', 'batch', '-c', str(small), '-o', str(out_dir), '--seeds', '3',
        '--rate-kbps', '10', '--rate-kbps', '12.5',
    )
    assert result.exit_code == 0
    assert sorted(p.name for p in out_dir.iterdir()) == [
        'rate-10', 'rate-12.5',
    ]
    assert (out_dir / 'rate-12.5' / 'seed-3.txt').is_file()


def test_batch_with_cache(small, tmp_path, caplog):
    args = (
        'batch', '-c', str(small), '--seeds', '1',
        '--cache', '600', '--cache-dir', str(tmp_path / 'cache'),
    )
    assert invoke(*args, '-o', str(tmp_path / 'a')).exit_code == 0
    assert (tmp_path / 'cache' / '.gitignore').is_file()

    caplog.clear()
    assert invoke(*args, '-o', str(tmp_path / 'b')).exit_code == 0
    assert 'Seed 1: report found in cache' in caplog.text


def test_batch_duplicate_seeds_exit_with_2(small, tmp_path):
    result = CliRunner().invoke(main, (
        'batch', '-c', str(small), '-o', str(tmp_path), '--seeds', '1,2,1',
    ))
    assert result.exit_code == 2
    assert 'Duplicate seed(s) in batch: 1' in result.output


def test_batch_invalid_seeds(small, tmp_path):
    result = CliRunner().invoke(main, (
        'batch', '-c', str(small), '-o', str(tmp_path), '--seeds', '5..2',
    ))
    assert result.exit_code == 2
    assert "Empty seed range '5..2'" in result.output


def test_gen_grid_prints_scenario():
    result = invoke(
        'gen-grid', '--n', '9', '--area', '400x400', '--name', 'g9',
        '--energy', '50',
    )
    assert result.exit_code == 0
    config = parse_config(result.output, '<stdout>')
    assert config.name == 'g9'
    assert config.positions()[5] == (200.0, 200.0)
    assert config.energy_of(9).lo == 50


def test_gen_grid_writes_file(tmp_path, caplog):
    path = tmp_path / 'grid.scn'
    result = invoke(
        'gen-grid', '--n', '4', '--area', '100x100', '-o', str(path),
    )
    assert result.exit_code == 0
    assert load_scenario(str(path)).name == 'grid-4'
    assert f'Wrote 4 nodes to {path}' in caplog.text


@pytest.mark.parametrize(
    ('args', 'exit_code'),
    (
        pytest.param(('--n', '8', '--area', '100x100'), 1, id='not-square'),
        pytest.param(('--n', '4', '--area', '100'), 2, id='bad-area'),
        pytest.param(
            ('--n', '4', '--area', '100x100', '--energy', 'uniform 5'),
            2,
            id='bad-energy',
        ),
    ),
)
def test_gen_grid_errors(args, exit_code):
    result = CliRunner().invoke(main, ('gen-grid', *args))
    assert result.exit_code == exit_code


def test_validate_trace_reports_problems(tmp_path):
    good = tmp_path / 'good.tr'
    good.write_text('')
    bad = tmp_path / 'bad.tr'
    bad.write_text('garbage\n')
    result = CliRunner().invoke(
        main, ('validate-trace', str(tmp_path / '*.tr')),
    )
    assert result.exit_code == 1
    assert f"{bad}:1: Malformed trace line: 'garbage'" in result.output


def test_validate_trace_without_match(tmp_path):
    result = CliRunner().invoke(
        main, ('validate-trace', str(tmp_path / '*.tr')),
    )
    assert result.exit_code == 2
    assert 'no trace file matches' in result.output


@pytest.mark.parametrize(
    ('pattern', 'expected'),
    (
        pytest.param('set*', 'setA1\nsetA2\nsetB\n', id='glob'),
        pytest.param('expt[12]', 'expt1\nexpt2\n', id='class'),
        pytest.param('nothing*', '', id='empty'),
    ),
)
def test_list_scenarios(pattern, expected):
    result = invoke('list-scenarios', pattern)
    assert result.exit_code == 0
    assert result.output == expected


def test_print_config_bundled():
    result = invoke('print-config', '-c', 'expt1')
    assert result.exit_code == 0
    assert result.output == print_config(load_scenario('expt1'))


@pytest.mark.parametrize(
    ('flags', 'level'),
    (
        pytest.param((), logging.INFO, id='default'),
        pytest.param(('-v',), logging.DEBUG, id='verbose'),
        pytest.param(('-q',), logging.WARNING, id='quiet'),
    ),
)
def test_verbosity(flags, level):
    assert invoke(*flags, 'list-scenarios').exit_code == 0
    assert logger.level == level
    assert sum(
        getattr(handler, '_adhoc_cli', False) for handler in logger.handlers
    ) == 1
