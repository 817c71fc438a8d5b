"""Bottleneck-lifetime route selection shared by SQ-AODV and MDR.

Both protocols key routes per flow, carry the smallest predicted lifetime of
the relays in their requests and let the destination pick the reply path
after a short collection window.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from adhoc_energy_routing.aodv import (
    AodvAgent,
    RequestOutcome,
    RouteEntry,
    RouteState,
)
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.packets import SqRerr, SqRrep


if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Iterable

    from adhoc_energy_routing.aodv import (
        AodvSettings,
        RouteKey,
        RoutingContext,
    )
    from adhoc_energy_routing.energy import Battery
    from adhoc_energy_routing.engine import EventHandle, RngStream, SimTime
    from adhoc_energy_routing.packets import (
        FlowKey,
        MdrRreq,
        NodeId,
        Rerr,
        SqRreq,
    )

    LifetimeRreq = SqRreq | MdrRreq


@dataclass(frozen=True)
class Candidate:
    """One request copy retained by a destination."""

    prev_hop: NodeId
    bottleneck_lifetime: float
    hop_count: int
    arrival: SimTime
    order: int


def select_candidate(candidates: Iterable[Candidate]) -> Candidate:
    """Largest bottleneck lifetime, then fewer hops, then earliest arrival."""
    return max(
        candidates,
        key=lambda c: (c.bottleneck_lifetime, -c.hop_count, -c.order),
    )


@dataclass
class DestCollector:
    """Request copies of one discovery gathered at its destination."""

    flow: FlowKey
    broadcast_id: int
    src_seq: int
    dst_seq: int
    first_arrival: SimTime
    max_candidates: int = 3
    candidates: list[Candidate] = field(default_factory=list)
    timer: EventHandle | None = None
    replied: bool = False

    def offer(
            self,
            prev_hop: NodeId,
            bottleneck_lifetime: float,
            hop_count: int,
            now: SimTime,
    ) -> bool:
        """Retain a copy unless its previous hop was already seen."""
        if self.replied or len(self.candidates) >= self.max_candidates:
            return False
        if any(c.prev_hop == prev_hop for c in self.candidates):
            return False
        self.candidates.append(Candidate(
            prev_hop, bottleneck_lifetime, hop_count, now, len(self.candidates),
        ))
        return True

    @property
    def full(self) -> bool:  # noqa: D102
        return len(self.candidates) >= self.max_candidates


class LifetimeAgent(AodvAgent):
    """Per-flow AODV where the destination chooses among request copies.

    Intermediate nodes never answer requests and never repair locally: a
    per-flow route can only be rebuilt by its source.
    """

    replies_from_intermediates = False
    supports_local_repair = False

    def __init__(  # noqa: D107
            self,
            node: NodeId,
            ctx: RoutingContext,
            battery: Battery,
            rng: RngStream,
            settings: AodvSettings | None = None,
            *,
            dest_wait: float = 0.25,
            dest_max_candidates: int = 3,
    ) -> None:
        super().__init__(node, ctx, battery, rng, settings)
        self.dest_wait = dest_wait
        self.dest_max_candidates = dest_max_candidates
        self.collectors: dict[FlowKey, DestCollector] = {}

    def start(self) -> None:  # noqa: D102
        super().start()
        self.ctx.every(self.battery.sample_interval_s, self._sample)

    def _sample(self) -> bool:
        if not self.alive:
            return False
        self.battery.sample(self.now)
        return True

    def on_death(self) -> None:  # noqa: D102
        for collector in self.collectors.values():
            self.scheduler.cancel(collector.timer)
        super().on_death()

    def route_key(self, flow: FlowKey) -> RouteKey:  # noqa: D102
        return (flow.dst, flow)

    def reverse_key(self, flow: FlowKey) -> RouteKey:  # noqa: D102
        return (flow.src, flow)

    def relay_copy(self, rreq: LifetimeRreq) -> LifetimeRreq:  # type: ignore[override]
        """Fold the lifetime of this node into the bottleneck field."""
        return replace(
            rreq,
            hop_count=rreq.hop_count + 1,
            bottleneck_lifetime=min(
                rreq.bottleneck_lifetime, self.battery.lifetime(),
            ),
        )

    def recv_request(  # type: ignore[override]
            self,
            rreq: LifetimeRreq,
            prev_hop: NodeId,
    ) -> RequestOutcome:
        """Route a request copy to the collector when it reached its target."""
        if rreq.dst == self.node:
            self.dest_collect(rreq, prev_hop)
            return RequestOutcome.COLLECT
        return super().recv_request(rreq, prev_hop)

    def dest_collect(
            self,
            rreq: LifetimeRreq,
            prev_hop: NodeId,
    ) -> SqRrep | None:
        """Retain a copy and reply once the wait rule is satisfied.

        The reply goes out when the third distinct previous hop shows up or
        ``dest_wait`` seconds after the first copy, whichever comes first.
        A newer discovery of the same flow replaces the older collector.
        """
        flow = rreq.flow
        collector = self.collectors.get(flow)
        if collector is not None and collector.broadcast_id > rreq.broadcast_id:
            return None
        if collector is None or collector.broadcast_id < rreq.broadcast_id:
            if collector is not None:
                self.scheduler.cancel(collector.timer)
            collector = DestCollector(
                flow=flow,
                broadcast_id=rreq.broadcast_id,
                src_seq=rreq.src_seq,
                dst_seq=rreq.dst_seq,
                first_arrival=self.now,
                max_candidates=self.dest_max_candidates,
            )
            collector.timer = self.scheduler.schedule_in(
                self.dest_wait, self._collection_closed, collector,
            )
            self.collectors[flow] = collector
        collector.offer(
            prev_hop, rreq.bottleneck_lifetime, rreq.hop_count + 1, self.now,
        )
        if collector.full and not collector.replied:
            return self.reply_to_best(collector)
        return None

    def _collection_closed(self, collector: DestCollector) -> None:
        if self.alive and not collector.replied and collector.candidates:
            self.reply_to_best(collector)

    def reply_to_best(self, collector: DestCollector) -> SqRrep:
        """Answer along the reverse path of the winning candidate."""
        self.scheduler.cancel(collector.timer)
        collector.replied = True
        winner = select_candidate(collector.candidates)
        flow = collector.flow
        self.routes[(flow.src, flow)] = RouteEntry(
            dst=flow.src,
            next_hop=winner.prev_hop,
            hop_count=winner.hop_count,
            dst_seq=collector.src_seq,
            expiry=self.now + self.settings.active_route_timeout,
            flow=flow,
        )
        self.seq = max(self.seq, collector.dst_seq) + 1
        rrep = SqRrep(
            uid=self.ctx.next_uid(),
            hop_count=0,
            dst=self.node,
            dst_seq=self.seq,
            src=flow.src,
            lifetime=self.settings.active_route_timeout,
            timestamp=self.now,
            flow_id=flow.flow_id,
        )
        logger.debug(
            f'Node {self.node} replies for {flow} via {winner.prev_hop}'
            f' (bottleneck {winner.bottleneck_lifetime:.3f} s,'
            f' {winner.hop_count} hop(s), {len(collector.candidates)}'
            ' candidate(s))',
        )
        self.unicast(winner.prev_hop, rrep)
        return rrep

    def error_packets(self, entries: list[RouteEntry]) -> list[Rerr]:
        """One flow-qualified RERR per broken forward route."""
        return [
            SqRerr(
                uid=self.ctx.next_uid(),
                unreachable=((entry.dst, entry.dst_seq),),
                unreachable_src=entry.flow.src,
                unreachable_flow_id=entry.flow.flow_id,
            )
            for entry in entries
            if entry.flow is not None and entry.dst == entry.flow.dst
        ]

    def active_flows(self) -> list[FlowKey]:
        """Flows whose active route goes through, starts or ends here."""
        flows = set()
        for entry in self.routes.values():
            if entry.flow is None or not entry.usable(self.now):
                continue
            if entry.dst == entry.flow.dst or entry.flow.dst == self.node:
                flows.add(entry.flow)
        return sorted(flows)

    def forward_entry(self, flow: FlowKey) -> RouteEntry | None:  # noqa: D102
        entry = self.routes.get(self.route_key(flow))
        if entry is not None and entry.state is RouteState.UP:
            return entry
        return None
