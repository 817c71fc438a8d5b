"""SQ-AODV: energy-aware admission and make-before-break re-routing.

On top of the per-flow lifetime selection, an intermediate node only relays
a request if its residual energy outlives the session at its current drain
rate, and a node about to run dry announces it with a Route Change Request
so that sources can move their flows before the route breaks.
"""

from __future__ import annotations

from dataclasses import dataclass, replace
from typing import TYPE_CHECKING

from adhoc_energy_routing.energy import LIFETIME_CAP
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.packets import SqRreq, SqRrep, StopTraffic
from adhoc_energy_routing.selection import LifetimeAgent


if TYPE_CHECKING:  # pragma: no cover
    from adhoc_energy_routing.aodv import (
        AodvSettings,
        PendingDiscovery,
        RoutingContext,
    )
    from adhoc_energy_routing.energy import Battery
    from adhoc_energy_routing.engine import RngStream
    from adhoc_energy_routing.packets import FlowKey, NodeId, Rreq


@dataclass(frozen=True)
class SqAodvSettings:  # noqa: D101
    alpha: float = 0.5
    sample_interval: float = 1.0
    rcr_interval: float = 0.1
    admission_horizon: float = 5.0
    alarm_horizon: float = 1.0
    dest_wait: float = 0.25
    dest_max_candidates: int = 3
    rcr_max_attempts: int = 3


class SqAodvAgent(LifetimeAgent):
    """SQ-AODV routing for one node."""

    protocol = 'sqaodv'

    def __init__(  # noqa: D107
            self,
            node: NodeId,
            ctx: RoutingContext,
            battery: Battery,
            rng: RngStream,
            settings: AodvSettings | None = None,
            sq_settings: SqAodvSettings | None = None,
    ) -> None:
        self.sq_settings = sq_settings or SqAodvSettings()
        super().__init__(
            node, ctx, battery, rng, settings,
            dest_wait=self.sq_settings.dest_wait,
            dest_max_candidates=self.sq_settings.dest_max_candidates,
        )
        self.rcr_sent = False

    def start(self) -> None:  # noqa: D102
        super().start()
        self.ctx.every(self.sq_settings.rcr_interval, self._rcr_timer)

    # admission

    def session_duration(self, flow: FlowKey) -> float | None:
        """Remaining expected duration of a local session, if declared."""
        runner = self.sessions.get(flow)
        if runner is None:
            return None
        return runner.remaining_duration(self.now)

    def build_request(self, pending: PendingDiscovery) -> SqRreq:  # noqa: D102
        dst, flow = pending.key
        known = self.routes.get(pending.key)
        return SqRreq(
            uid=self.ctx.next_uid(),
            hop_count=0,
            broadcast_id=pending.broadcast_id,
            dst=dst,
            dst_seq=known.dst_seq if known is not None else 0,
            src=self.node,
            src_seq=self.seq,
            flow_id=flow.flow_id,  # type: ignore[union-attr]
            session_duration=self.session_duration(flow),  # type: ignore[arg-type]
            bottleneck_lifetime=LIFETIME_CAP,
        )

    def admit(self, rreq: Rreq) -> bool:
        """Whether the residual energy outlasts the requested session.

        With a declared duration the node must survive it at its current
        drain rate, otherwise it must survive the admission horizon.
        """
        duration = getattr(rreq, 'session_duration', None)
        battery = self.battery
        if duration is not None:
            return battery.residual_j > duration * battery.aedr_w
        return battery.residual_j > battery.threshold1()

    def reject(self, rreq: Rreq) -> None:  # noqa: D102
        self.ctx.ledger.energy_rejects += 1
        self.ctx.tracer.packet(
            'DROP', self.now, self.node, rreq, 'ENERGY_REJECT',
        )
        logger.debug(
            f'Node {self.node} rejected RREQ {rreq.uid} for {rreq.flow}'
            f' (residual {self.battery.residual_j:.6f} J,'
            f' AEDR {self.battery.aedr_w:.6f} W)',
        )

    # make-before-break

    def _rcr_timer(self) -> bool:
        if not self.alive:
            return False
        self.rcr_tick()
        return True

    def rcr_tick(self) -> SqRrep | None:
        """Announce once per drain episode that this node is running dry.

        Besides the broadcast RCR, a drained destination asks the source of
        each of its flows to stop with a StopTraffic frame.
        """
        battery = self.battery
        if not battery.residual_j < battery.threshold2():
            self.rcr_sent = False
            return None
        if self.rcr_sent:
            return None
        flows = self.active_flows()
        if not flows:
            return None
        self.rcr_sent = True
        first = flows[0]
        rcr = SqRrep(
            uid=self.ctx.next_uid(),
            hop_count=0,
            dst=first.dst,
            dst_seq=0,
            src=first.src,
            lifetime=0.0,
            timestamp=self.now,
            flow_id=first.flow_id,
            rcr_flag=True,
            drained_node=self.node,
        )
        logger.debug(
            f'Node {self.node} is draining (residual'
            f' {battery.residual_j:.6f} J < {battery.threshold2():.6f} J),'
            f' announcing it for {len(flows)} flow(s)',
        )
        self.broadcast(rcr)
        for flow in flows:
            if flow.dst == self.node:
                reverse = self.usable_route(self.reverse_key(flow))
                if reverse is not None:
                    self.unicast(
                        reverse.next_hop,
                        StopTraffic(uid=self.ctx.next_uid(), flow=flow),
                    )
        return rcr

    def recv_rcr(
            self,
            rcr: SqRrep,
            prev_hop: NodeId,  # noqa: ARG002
            *,
            broadcast: bool,
    ) -> None:
        """Act on a Route Change Request according to the role of the node.

        A broadcast RCR concerns the flows this node forwards to the drained
        node; a unicast one names its flow in its own fields.
        """
        drained = rcr.drained_node
        if drained is None:
            return
        if broadcast:
            flows = [
                entry.flow for entry in self.routes.values()
                if entry.flow is not None
                and entry.dst == entry.flow.dst
                and entry.next_hop == drained
                and entry.usable(self.now)
            ]
        else:
            flows = [rcr.flow]
        for flow in sorted(flows):
            self._handle_rcr(rcr, flow, drained, relay=not broadcast)

    def _handle_rcr(
            self,
            rcr: SqRrep,
            flow: FlowKey,
            drained: NodeId,
            *,
            relay: bool,
    ) -> None:
        if drained == flow.src:
            return
        if self.node == flow.src:
            if drained == flow.dst:
                self.stop_traffic(flow)
            else:
                self.make_before_break(flow)
            return
        entry = self.forward_entry(flow)
        if entry is not None and entry.rcr_pending:
            return
        reverse = self.usable_route(self.reverse_key(flow))
        if reverse is None:
            logger.debug(
                f'Node {self.node} cannot relay RCR for {flow}:'
                ' no reverse route',
            )
            return
        if entry is not None:
            entry.rcr_pending = True
        notice = rcr if relay else replace(
            rcr,
            uid=self.ctx.next_uid(),
            src=flow.src,
            dst=flow.dst,
            flow_id=flow.flow_id,
        )
        self.unicast(reverse.next_hop, notice)

    def make_before_break(self, flow: FlowKey) -> bool:
        """Look for a new route while data keeps using the current one."""
        runner = self.sessions.get(flow)
        key = self.route_key(flow)
        if runner is None or not runner.active or key in self.pending:
            return False
        logger.debug(f'Node {self.node} re-routing {flow} before it breaks')
        self.start_discovery(
            key,
            make_before_break=True,
            max_attempts=self.sq_settings.rcr_max_attempts,
        )
        return True

    def discovery_failed(self, pending: PendingDiscovery) -> None:
        """End the session a source could not find an admitting route for.

        Unlike AODV, which keeps injecting and retrying, SQ-AODV takes an
        exhausted discovery as the network refusing the session.
        """
        super().discovery_failed(pending)
        flow = pending.key[1]
        if flow is not None:
            self.stop_traffic(
                flow,
                reason=(
                    'REROUTE_FAILED' if pending.make_before_break
                    else 'REJECTED'
                ),
            )

    # stop traffic

    def recv_stop(self, stop: StopTraffic, prev_hop: NodeId) -> None:  # noqa: D102
        flow = stop.flow
        if flow.src == self.node:
            self.stop_traffic(flow)
            return
        reverse = self.usable_route(self.reverse_key(flow))
        if reverse is None:
            logger.debug(
                f'Node {self.node} dropped StopTraffic {stop.uid}'
                f' from {prev_hop}: no reverse route',
            )
            return
        self.unicast(reverse.next_hop, stop)

    def stop_traffic(self, flow: FlowKey, reason: str = 'STOPPED') -> bool:
        """Stop the local session of ``flow``; unknown flows are ignored."""
        runner = self.sessions.get(flow)
        if runner is None:
            return False
        return runner.stop(self.now, reason)
