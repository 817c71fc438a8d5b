"""Ledger accounting, metric formulas and the run report."""

import pytest

from adhoc_energy_routing.exceptions import ContractViolation
from adhoc_energy_routing.metrics import (
    DropCause,
    MetricsLedger,
    alive_at,
    avg_delay,
    avg_hops,
    cet_list,
    coh,
    format_report,
    net_curve,
    parse_report,
    pdr,
    report_value,
)
from adhoc_energy_routing.packets import DataPacket, FlowKey, PacketKind


FLOW = FlowKey(1, 3, 0)


def packet(uid, created_at=0.0, hops=0, flow=FLOW):
    return DataPacket(uid=uid, flow=flow, created_at=created_at, hops=hops)


@pytest.fixture
def ledger():
    """Ten injected packets: eight delivered, two dropped."""
    ledger = MetricsLedger(node_count=4)
    for uid in range(10):
        ledger.inject(packet(uid, created_at=uid, hops=2 + uid % 2))
    for uid in range(8):
        ledger.deliver(packet(uid, created_at=uid, hops=2 + uid % 2), uid + 0.5)
    ledger.drop(packet(8), DropCause.QUEUE_FULL)
    ledger.drop(packet(9), DropCause.NODE_DEAD)
    for _ in range(20):
        ledger.routing_tx(PacketKind.RREQ)
    return ledger


def test_metrics(ledger):
    assert pdr(ledger) == pytest.approx(0.8)
    assert coh(ledger) == pytest.approx(2.5)
    assert avg_delay(ledger) == pytest.approx(0.5)
    assert avg_hops(ledger) == pytest.approx(2.5)
    assert ledger.in_flight == {}


def test_strict_delivery_ratio(ledger):
    ledger.flows[FLOW].suppressed = 10
    assert pdr(ledger) == pytest.approx(0.8)
    assert pdr(ledger, strict=True) == pytest.approx(0.4)


def test_metrics_undefined_without_traffic():
    empty = MetricsLedger(node_count=2)
    assert pdr(empty) is None
    assert coh(empty) is None
    assert avg_delay(empty) is None
    assert avg_hops(empty) is None


def test_packet_settled_once(ledger):
    with pytest.raises(ContractViolation, match='settled twice'):
        ledger.deliver(packet(0), 20.0)
    with pytest.raises(ContractViolation, match='settled twice'):
        ledger.drop(packet(99), DropCause.NO_ROUTE)


def test_packet_injected_once():
    ledger = MetricsLedger()
    ledger.inject(packet(1))
    with pytest.raises(ContractViolation, match='injected twice'):
        ledger.inject(packet(1))


def test_conservation(ledger):
    ledger.inject(packet(10))
    stats = ledger.flows[FLOW]
    assert stats.injected == (
        stats.delivered + stats.dropped_total + len(ledger.in_flight)
    )


@pytest.mark.parametrize(
    ('t', 'alive'),
    (
        pytest.param(0.0, 3, id='start'),
        pytest.param(99.0, 3, id='before-death'),
        pytest.param(100.0, 2, id='at-death'),
        pytest.param(200.0, 1, id='second-death'),
    ),
)
def test_alive_at(t, alive):
    ledger = MetricsLedger(node_count=3)
    ledger.node_died(2, 100.0)
    ledger.node_died(3, 150.0)
    ledger.node_died(3, 190.0)
    assert alive_at(ledger, t) == alive


def test_net_curve():
    ledger = MetricsLedger(node_count=3)
    ledger.node_died(1, 1.5)
    assert net_curve(ledger, 3.0) == [(0, 3), (1, 3), (2, 2), (3, 2)]
    assert net_curve(ledger, 2.9, step=0.5)[-1] == (2.5, 2)


def test_connection_expiration():
    ledger = MetricsLedger()
    stopped, lost, fine = FlowKey(1, 2, 0), FlowKey(3, 4, 0), FlowKey(5, 6, 0)
    ledger.session_ended(stopped, 12.0)
    ledger.session_ended(stopped, 30.0)
    ledger.inject(packet(1, flow=lost))
    ledger.deliver(packet(1, flow=lost), 5.0)
    ledger.route_failure(lost, 4.0)
    ledger.route_failure(lost, 9.0)
    ledger.route_failure(fine, 3.0)
    ledger.inject(packet(2, flow=fine))
    ledger.deliver(packet(2, flow=fine), 8.0)

    ledger.finalize()

    assert ledger.flows[stopped].cet == 12.0
    # failures before the last delivery were recovered from
    assert ledger.flows[lost].cet == 9.0
    assert ledger.flows[fine].cet is None
    assert cet_list(ledger) == [9.0, 12.0]


def test_completed_session_has_no_expiration():
    ledger = MetricsLedger()
    ledger.inject(packet(1))
    ledger.deliver(packet(1), 2.0)
    ledger.flow(FLOW).completed = True
    # the route broke after the last packet had already arrived
    ledger.route_failure(FLOW, 7.0)

    ledger.finalize()

    assert ledger.flows[FLOW].cet is None
    assert cet_list(ledger) == []


def test_report(ledger):
    ledger.session_ended(FLOW, 7.25)
    ledger.node_died(4, 1.0)
    report = format_report(
        ledger, {'scenario': 'unit', 'seed': '3'}, 2.0,
    )
    lines = report.splitlines()
    assert lines[:4] == [
        'scenario=unit',
        'seed=3',
        'pdr=0.800000000',
        'coh=2.500000000',
    ]
    assert 'drop.queue_full=1' in lines
    assert 'drop.node_dead=1' in lines
    assert 'drop.no_route=0' in lines
    assert 'alive_end=3' in lines
    curve = lines.index('[net_curve]')
    assert lines[curve + 1:curve + 5] == ['time,alive', '0,4', '1,3', '2,3']
    assert lines[-2:] == ['flow,time', '1:3:0,7.250000000']
    assert report.endswith('\n')

    values = parse_report(report)
    assert values['scenario'] == 'unit'
    assert report_value(values, 'pd') == pytest.approx(0.5)
    assert report_value(values, 'dropped') == 2
    assert 'time' not in values


def test_report_without_deliveries():
    ledger = MetricsLedger(node_count=1)
    values = parse_report(format_report(ledger, {}, 0.0))
    assert values['pdr'] == 'absent'
    assert report_value(values, 'pdr') is None
    assert report_value(values, 'missing') is None
    assert report_value(values, 'injected') == 0
