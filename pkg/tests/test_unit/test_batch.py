import math
import re

import pytest

import adhoc_energy_routing.batch
from adhoc_energy_routing.batch import (
    SUMMARY_FILE,
    BatchResult,
    check_seeds,
    run_batch,
)
from adhoc_energy_routing.cache import ReportCache
from adhoc_energy_routing.exceptions import BatchError, ContractViolation
from adhoc_energy_routing.scenario import parse_config
from adhoc_energy_routing.simulation import run_scenario
from testing_helpers import SMALL_SCENARIO


SUMMARY_HEADER = (
    'seed,pdr,coh,pd,hops,injected,delivered,dropped,routing_tx,'
    'energy_rejects,alive_end'
)


def test_mean_and_std():
    result = BatchResult('aodv', None, reports={
        1: 'pdr=0.500000000\ncoh=absent\n',
        2: 'pdr=0.700000000\ncoh=absent\n',
    })
    assert result.values('pdr') == {1: 0.5, 2: 0.7}
    assert result.mean('pdr') == pytest.approx(0.6)
    assert result.std('pdr') == pytest.approx(math.sqrt(0.02))
    assert result.mean('coh') is None
    assert result.std('coh') is None


def test_std_needs_two_values():
    result = BatchResult('aodv', None, reports={3: 'pdr=0.250000000\n'})
    assert result.mean('pdr') == 0.25
    assert result.std('pdr') is None


def test_failed_statuses():
    result = BatchResult('mdr', None, statuses={1: 'ok', 2: 'ValueError: x'})
    assert result.failed == {2: 'ValueError: x'}


@pytest.mark.parametrize(
    ('seeds', 'message'),
    (
        pytest.param((), 'A batch needs at least one seed', id='empty'),
        pytest.param(
            (1, 2, 2, 3, 1),
            'Duplicate seed(s) in batch: 1, 2',
            id='duplicates',
        ),
    ),
)
def test_check_seeds_errors(seeds, message):
    with pytest.raises(
            ContractViolation, match=re.escape(message),
    ) as exc_info:
        check_seeds(seeds)
    assert exc_info.value.exit_code == 2


def test_check_seeds_keeps_order():
    assert check_seeds(iter((5, 1, 3))) == [5, 1, 3]


def test_run_batch_writes_reports_and_summary(tmp_path):
    out_dir = tmp_path / 'out'
    result = run_batch(SMALL_SCENARIO, 'small.scn', (1, 2), str(out_dir))

    assert sorted(result.reports) == [1, 2]
    assert result.statuses == {1: 'ok', 2: 'ok'}
    assert result.cached == set()

    config = parse_config(SMALL_SCENARIO, 'small.scn')
    for seed in (1, 2):
        report = (out_dir / f'seed-{seed}.txt').read_text()
        assert report == run_scenario(config, seed).report

    summary = (out_dir / SUMMARY_FILE).read_text().splitlines()
    assert summary[0] == SUMMARY_HEADER
    assert [row.split(',')[0] for row in summary[1:]] == [
        '1', '2', 'mean', 'std',
    ]
    assert all(len(row.split(',')) == 11 for row in summary)


def test_single_seed_has_absent_std(tmp_path):
    run_batch(SMALL_SCENARIO, 'small.scn', (7,), str(tmp_path))
    summary = (tmp_path / SUMMARY_FILE).read_text().splitlines()
    assert summary[-1] == 'std' + ',absent' * 10


def test_protocol_override(tmp_path):
    result = run_batch(
        SMALL_SCENARIO, 'small.scn', (1,), str(tmp_path), protocol='sqaodv',
    )
    assert result.protocol == 'sqaodv'
    assert 'protocol=sqaodv\n' in (tmp_path / 'seed-1.txt').read_text()


def test_reports_come_from_cache(tmp_path):
    cache = ReportCache(str(tmp_path / 'cache'), 600)
    (tmp_path / 'cache').mkdir()

    first = run_batch(
        SMALL_SCENARIO, 'small.scn', (1, 2), str(tmp_path / 'a'), cache=cache,
    )
    assert first.cached == set()

    second = run_batch(
        SMALL_SCENARIO, 'small.scn', (1, 2), str(tmp_path / 'b'), cache=cache,
    )
    assert second.cached == {1, 2}
    assert second.reports == first.reports
    assert (tmp_path / 'b' / SUMMARY_FILE).read_text() == (
        tmp_path / 'a' / SUMMARY_FILE
    ).read_text()


def test_failed_seed_raises_after_writing_the_others(monkeypatch, tmp_path):
    run_seed = adhoc_energy_routing.batch.run_seed

    def flaky(config_text, source, protocol, seed, rate_kbps=None):
        if seed == 2:
            raise RuntimeError('boom')
        return run_seed(config_text, source, protocol, seed, rate_kbps)

    monkeypatch.setattr(adhoc_energy_routing.batch, 'run_seed', flaky)

    with pytest.raises(BatchError) as exc_info:
        run_batch(SMALL_SCENARIO, 'small.scn', (1, 2), str(tmp_path))

    assert exc_info.value.statuses == {1: 'ok', 2: 'RuntimeError: boom'}
    assert str(exc_info.value) == (
        '1 of 2 seed(s) failed: seed 2: RuntimeError: boom'
    )
    assert exc_info.value.exit_code == 2
    assert (tmp_path / 'seed-1.txt').is_file()
    assert not (tmp_path / 'seed-2.txt').exists()
    assert (tmp_path / SUMMARY_FILE).is_file()
