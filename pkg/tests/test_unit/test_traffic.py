"""Session generators and their runners."""

import pytest

from adhoc_energy_routing.engine import RngStream
from adhoc_energy_routing.exceptions import ContractViolation
from adhoc_energy_routing.metrics import DropCause
from adhoc_energy_routing.packets import FlowKey
from adhoc_energy_routing.traffic import (
    FULL_LOAD_BPS,
    Session,
    SessionKind,
    SessionState,
    network_load,
)
from testing_helpers import cbr, poisson


FLOW = FlowKey(1, 2, 0)


def cbr_session(pkts_per_s=3.0, **kwargs):
    return Session(FLOW, SessionKind.CBR, 0.0, pkts_per_s=pkts_per_s, **kwargs)


def poisson_session(rate_bps, **kwargs):
    return Session(FLOW, SessionKind.POISSON, 0.0, rate_bps=rate_bps, **kwargs)


@pytest.mark.parametrize(
    ('session', 'expected'),
    (
        pytest.param(cbr_session(), 1 / 3, id='cbr-3pps'),
        pytest.param(poisson_session(15_000.0), 4096 / 15_000, id='15kbps'),
        pytest.param(poisson_session(65_000.0), 4096 / 65_000, id='65kbps'),
    ),
)
def test_mean_interarrival(session, expected):
    assert session.mean_interarrival == pytest.approx(expected)


def test_cbr_arrivals_are_periodic():
    rng = RngStream(1, 'session-a')
    assert cbr_session().next_arrival(2.0, rng) == pytest.approx(2.0 + 1 / 3)
    assert rng.draws == 0


def test_poisson_arrivals_mean():
    session = poisson_session(15_000.0)
    rng = RngStream(7, 'session-a')
    gaps = [session.next_arrival(0.0, rng) for _ in range(20_000)]
    assert min(gaps) > 0
    assert sum(gaps) / len(gaps) == pytest.approx(4096 / 15_000, rel=0.03)


@pytest.mark.parametrize(
    ('kind', 'kwargs'),
    (
        pytest.param(SessionKind.CBR, {}, id='cbr-missing'),
        pytest.param(SessionKind.CBR, {'pkts_per_s': 0.0}, id='cbr-zero'),
        pytest.param(
            SessionKind.POISSON, {'rate_bps': -1.0}, id='poisson-negative',
        ),
        pytest.param(
            SessionKind.POISSON, {'pkts_per_s': 3.0}, id='poisson-no-rate',
        ),
    ),
)
def test_session_needs_positive_rate(kind, kwargs):
    with pytest.raises(ContractViolation, match='needs a positive rate'):
        Session(FLOW, kind, 0.0, **kwargs)


@pytest.mark.parametrize(
    ('session', 'horizon', 'expected'),
    (
        pytest.param(cbr_session(packet_count=30), 800.0, 10.0, id='finite'),
        pytest.param(cbr_session(), 800.0, 800.0, id='open'),
        pytest.param(
            poisson_session(65_000.0, packet_count=3000), 800.0,
            3000 * 4096 / 65_000, id='poisson-finite',
        ),
    ),
)
def test_expected_duration(session, horizon, expected):
    assert session.expected_duration(horizon) == pytest.approx(expected)


def test_network_load():
    sessions = [cbr_session()] * 3 + [poisson_session(45_000.0)]
    expected = (3 * 8 * 512 * 3 + 45_000) / FULL_LOAD_BPS
    assert network_load(sessions) == pytest.approx(expected)
    assert network_load([poisson_session(FULL_LOAD_BPS)]) == pytest.approx(1)


def test_runner_completes_after_its_packets(network):
    sim = network(sessions=[cbr(1, 3, packets=5)])
    runner = sim.runners[0]
    runner.begin()
    assert sim.agents[1].sessions == {runner.session.flow: runner}
    assert runner.state is SessionState.PENDING

    sim.scheduler.run_until(10.0)
    assert runner.state is SessionState.COMPLETED
    assert runner.sent == 5
    assert sim.ledger.injected == 5
    assert sim.ledger.delivered == 5
    assert runner.unsent(10.0) == 0
    assert sim.ledger.flow(runner.session.flow).completed


def test_runner_starts_late(network):
    sim = network(sessions=[poisson(1, 3, start=4.0, packets=10)])
    runner = sim.runners[0]
    runner.begin()
    sim.scheduler.run_until(3.9)
    assert runner.state is SessionState.PENDING
    assert runner.sent == 0
    sim.scheduler.run_until(4.0)
    assert runner.state is SessionState.ACTIVE
    assert runner.sent == 1


def test_stopped_session(network):
    sim = network(
        {1: (0, 0), 2: (1000, 0)}, sessions=[cbr(1, 2)], sim_until=100.0,
    )
    runner = sim.runners[0]
    runner.begin()
    sim.scheduler.run_until(0.9)
    assert runner.sent == 3

    assert runner.stop(0.9) is True
    assert runner.stop(0.9) is False
    stats = sim.ledger.flows[FLOW]
    assert stats.dropped == {DropCause.SESSION_STOPPED: 3}
    assert stats.suppressed == 297
    assert stats.cet == pytest.approx(0.9)
    assert runner.state is SessionState.STOPPED

    sim.scheduler.run_until(5.0)
    assert runner.sent == 3


def test_remaining_duration(network):
    sim = network(sessions=[cbr(1, 3, packets=30, start=2.0)])
    runner = sim.runners[0]
    assert runner.remaining_duration(0.0) == pytest.approx(10.0)
    assert runner.remaining_duration(7.0) == pytest.approx(5.0)
    assert runner.remaining_duration(20.0) == 0.0


def test_undeclared_duration(network):
    sim = network(sessions=[cbr(1, 3, duration=None)])
    assert sim.runners[0].remaining_duration(1.0) is None
