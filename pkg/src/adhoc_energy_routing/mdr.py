"""Minimum Drain Rate routing over AODV.

No admission control and no route change requests: sources simply flood a
fresh request for each active flow every refresh period, and destinations
keep answering along the path with the largest bottleneck lifetime.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import TYPE_CHECKING

from adhoc_energy_routing.energy import LIFETIME_CAP
from adhoc_energy_routing.packets import MdrRreq
from adhoc_energy_routing.selection import LifetimeAgent


if TYPE_CHECKING:  # pragma: no cover
    from adhoc_energy_routing.aodv import (
        AodvSettings,
        PendingDiscovery,
        RouteKey,
        RoutingContext,
    )
    from adhoc_energy_routing.energy import Battery
    from adhoc_energy_routing.engine import EventHandle, RngStream
    from adhoc_energy_routing.packets import FlowKey, NodeId


@dataclass(frozen=True)
class MdrSettings:  # noqa: D101
    alpha: float = 0.3
    sample_interval: float = 6.0
    refresh_period: float = 10.0
    dest_wait: float = 0.25
    dest_max_candidates: int = 3


class MdrAgent(LifetimeAgent):
    """MDR routing for one node."""

    protocol = 'mdr'

    def __init__(  # noqa: D107
            self,
            node: NodeId,
            ctx: RoutingContext,
            battery: Battery,
            rng: RngStream,
            settings: AodvSettings | None = None,
            mdr_settings: MdrSettings | None = None,
    ) -> None:
        self.mdr_settings = mdr_settings or MdrSettings()
        super().__init__(
            node, ctx, battery, rng, settings,
            dest_wait=self.mdr_settings.dest_wait,
            dest_max_candidates=self.mdr_settings.dest_max_candidates,
        )
        self.refresh_timers: dict[FlowKey, EventHandle] = {}
        self.refreshes = 0

    def build_request(self, pending: PendingDiscovery) -> MdrRreq:  # noqa: D102
        dst, flow = pending.key
        known = self.routes.get(pending.key)
        return MdrRreq(
            uid=self.ctx.next_uid(),
            hop_count=0,
            broadcast_id=pending.broadcast_id,
            dst=dst,
            dst_seq=known.dst_seq if known is not None else 0,
            src=self.node,
            src_seq=self.seq,
            flow_id=flow.flow_id,  # type: ignore[union-attr]
            bottleneck_lifetime=LIFETIME_CAP,
        )

    def route_established(self, key: RouteKey) -> None:
        """Anchor the refresh timer of a flow at its first route."""
        super().route_established(key)
        flow = key[1]
        if (
            flow is not None
            and flow.src == self.node
            and flow not in self.refresh_timers
            and flow in self.sessions
            and self.sessions[flow].active
        ):
            self.refresh_timers[flow] = self.scheduler.schedule_in(
                self.mdr_settings.refresh_period, self.periodic_refresh, flow,
            )

    def periodic_refresh(self, flow: FlowKey) -> bool:
        """Flood a new request for ``flow`` whatever the state of its route.

        A refresh still unanswered is superseded by the new one. Returns
        ``False`` once the session is over, which ends the refresh cycle.
        """
        runner = self.sessions.get(flow)
        if not self.alive or runner is None or not runner.active:
            self.refresh_timers.pop(flow, None)
            return False
        self.refreshes += 1
        self.start_discovery(self.route_key(flow), replace_pending=True)
        self.refresh_timers[flow] = self.scheduler.schedule_in(
            self.mdr_settings.refresh_period, self.periodic_refresh, flow,
        )
        return True

    def on_death(self) -> None:  # noqa: D102
        for handle in self.refresh_timers.values():
            self.scheduler.cancel(handle)
        self.refresh_timers.clear()
        super().on_death()
