"""Run ledger, the six performance metrics and the run report."""

from __future__ import annotations

import enum
from collections import Counter
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

from adhoc_energy_routing.exceptions import ContractViolation


if TYPE_CHECKING:  # pragma: no cover
    from adhoc_energy_routing.packets import (
        DataPacket,
        FlowKey,
        NodeId,
        PacketKind,
    )


REPORT_DECIMALS = 9
REPORT_METRICS = ('pdr', 'coh', 'pd', 'hops')


@dataclass(frozen=True)
class MetricsSettings:  # noqa: D101
    strict_pdr: bool = False
    net_step: float = 1.0


class DropCause(str, enum.Enum):  # noqa: D101
    QUEUE_FULL = 'QUEUE_FULL'
    NODE_DEAD = 'NODE_DEAD'
    NO_ROUTE = 'NO_ROUTE'
    RETRIES_EXHAUSTED = 'RETRIES_EXHAUSTED'
    LINK_BROKEN = 'LINK_BROKEN'
    BUFFER_FULL = 'BUFFER_FULL'
    SESSION_STOPPED = 'SESSION_STOPPED'


@dataclass
class FlowStats:
    """Per-flow counters."""

    injected: int = 0
    delivered: int = 0
    dropped: Counter[DropCause] = field(default_factory=Counter)
    delay_sum: float = 0.0
    hop_sum: int = 0
    last_delivery: float | None = None
    route_failures: list[float] = field(default_factory=list)
    suppressed: int = 0
    cet: float | None = None
    completed: bool = False

    @property
    def dropped_total(self) -> int:  # noqa: D102
        return sum(self.dropped.values())


@dataclass
class MetricsLedger:
    """Accumulators of one run.

    Every injected data packet stays in ``in_flight`` until it is delivered
    or dropped, exactly once.
    """

    node_count: int = 0
    flows: dict[FlowKey, FlowStats] = field(default_factory=dict)
    in_flight: dict[int, FlowKey] = field(default_factory=dict)
    routing_tx_hopwise: int = 0
    routing_tx_by_kind: Counter[str] = field(default_factory=Counter)
    energy_rejects: int = 0
    death_times: dict[NodeId, float] = field(default_factory=dict)

    def flow(self, flow: FlowKey) -> FlowStats:  # noqa: D102
        try:
            return self.flows[flow]
        except KeyError:
            stats = FlowStats()
            self.flows[flow] = stats
            return stats

    def inject(self, packet: DataPacket) -> None:  # noqa: D102
        if packet.uid in self.in_flight:
            raise ContractViolation(f'Data packet {packet.uid} injected twice')
        self.flow(packet.flow).injected += 1
        self.in_flight[packet.uid] = packet.flow

    def _settle(self, packet: DataPacket) -> FlowStats:
        try:
            flow = self.in_flight.pop(packet.uid)
        except KeyError:
            raise ContractViolation(
                f'Data packet {packet.uid} settled twice or never injected',
            ) from None
        return self.flows[flow]

    def deliver(self, packet: DataPacket, now: float) -> None:  # noqa: D102
        stats = self._settle(packet)
        stats.delivered += 1
        stats.delay_sum += now - packet.created_at
        stats.hop_sum += packet.hops
        stats.last_delivery = now

    def drop(self, packet: DataPacket, cause: DropCause) -> None:  # noqa: D102
        self._settle(packet).dropped[cause] += 1

    def routing_tx(self, kind: PacketKind) -> None:
        """Count one routing-frame transmission over one hop."""
        self.routing_tx_hopwise += 1
        self.routing_tx_by_kind[kind.value] += 1

    def node_died(self, node: NodeId, now: float) -> None:  # noqa: D102
        self.death_times.setdefault(node, now)

    def session_ended(self, flow: FlowKey, now: float) -> None:
        """Record the expiration of a connection, first one wins."""
        stats = self.flow(flow)
        if stats.cet is None:
            stats.cet = now

    def route_failure(self, flow: FlowKey, now: float) -> None:
        """A discovery for ``flow`` exhausted its retries."""
        self.flow(flow).route_failures.append(now)

    def finalize(self) -> None:
        """Assign a CET to sessions that silently lost their route.

        Sessions that sent their whole packet count never get one.
        """
        for stats in self.flows.values():
            if stats.cet is not None or stats.completed:
                continue
            since = stats.last_delivery
            for t in stats.route_failures:
                if since is None or t >= since:
                    stats.cet = t
                    break

    def in_flight_by_flow(self) -> Counter[FlowKey]:  # noqa: D102
        return Counter(self.in_flight.values())

    @property
    def injected(self) -> int:  # noqa: D102
        return sum(stats.injected for stats in self.flows.values())

    @property
    def delivered(self) -> int:  # noqa: D102
        return sum(stats.delivered for stats in self.flows.values())


def pdr(ledger: MetricsLedger, *, strict: bool = False) -> float | None:
    """Packet delivery ratio, ``None`` when nothing was injected.

    With ``strict`` the packets a stopped session never generated count in
    the denominator too.
    """
    injected = ledger.injected
    if strict:
        injected += sum(stats.suppressed for stats in ledger.flows.values())
    if injected == 0:
        return None
    return ledger.delivered / injected


def coh(ledger: MetricsLedger) -> float | None:
    """Routing transmissions (hop wise) per delivered packet."""
    delivered = ledger.delivered
    if delivered == 0:
        return None
    return ledger.routing_tx_hopwise / delivered


def avg_delay(ledger: MetricsLedger) -> float | None:  # noqa: D103
    delivered = ledger.delivered
    if delivered == 0:
        return None
    return sum(s.delay_sum for s in ledger.flows.values()) / delivered


def avg_hops(ledger: MetricsLedger) -> float | None:  # noqa: D103
    delivered = ledger.delivered
    if delivered == 0:
        return None
    return sum(s.hop_sum for s in ledger.flows.values()) / delivered


def alive_at(ledger: MetricsLedger, t: float) -> int:
    """Nodes still alive at time ``t``; a node dying at ``t`` is not."""
    return ledger.node_count - sum(
        1 for death in ledger.death_times.values() if death <= t
    )


def net_curve(
        ledger: MetricsLedger,
        horizon: float,
        step: float = 1.0,
) -> list[tuple[float, int]]:
    """Nodes alive sampled every ``step`` seconds from 0 to ``horizon``."""
    samples = int(horizon // step)
    return [(i * step, alive_at(ledger, i * step)) for i in range(samples + 1)]


def cet_list(ledger: MetricsLedger) -> list[float]:
    """Connection expiration times, sorted."""
    return sorted(
        stats.cet for stats in ledger.flows.values() if stats.cet is not None
    )


def _num(value: float | None) -> str:
    return 'absent' if value is None else f'{value:.{REPORT_DECIMALS}f}'


def format_report(
        ledger: MetricsLedger,
        header: dict[str, str],
        horizon: float,
        *,
        strict_pdr: bool = False,
        net_step: float = 1.0,
) -> str:
    """Render the key=value report with its CSV blocks."""
    lines = [f'{key}={value}' for key, value in header.items()]
    lines.extend((
        f'pdr={_num(pdr(ledger, strict=strict_pdr))}',
        f'coh={_num(coh(ledger))}',
        f'pd={_num(avg_delay(ledger))}',
        f'hops={_num(avg_hops(ledger))}',
        f'injected={ledger.injected}',
        f'delivered={ledger.delivered}',
        f'dropped={sum(s.dropped_total for s in ledger.flows.values())}',
        f'in_flight={len(ledger.in_flight)}',
        f'routing_tx={ledger.routing_tx_hopwise}',
        f'energy_rejects={ledger.energy_rejects}',
        f'alive_end={alive_at(ledger, horizon)}',
    ))
    causes: Counter[DropCause] = Counter()
    for stats in ledger.flows.values():
        causes.update(stats.dropped)
    lines.extend(
        f'drop.{cause.value.lower()}={causes[cause]}' for cause in DropCause
    )
    lines.extend(('[net_curve]', 'time,alive'))
    lines.extend(
        f'{t:.0f},{alive}' if float(t).is_integer() else f'{t},{alive}'
        for t, alive in net_curve(ledger, horizon, net_step)
    )
    lines.extend(('[cet]', 'flow,time'))
    lines.extend(
        f'{flow},{_num(stats.cet)}'
        for flow, stats in sorted(ledger.flows.items())
        if stats.cet is not None
    )
    return '\n'.join(lines) + '\n'


def parse_report(text: str) -> dict[str, str]:
    """Read the scalar ``key=value`` lines of a report."""
    values: dict[str, str] = {}
    for line in text.splitlines():
        if line.startswith('['):
            break
        key, sep, value = line.partition('=')
        if sep:
            values[key] = value
    return values


def report_value(values: dict[str, str], key: str) -> float | None:
    """Numeric value of ``key`` in a parsed report, ``None`` if absent."""
    raw = values.get(key, 'absent')
    return None if raw == 'absent' else float(raw)
