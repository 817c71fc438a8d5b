"""Ad hoc On-demand Distance Vector routing agent.

Each node runs one :class:`AodvAgent`. Agents only talk to each other through
frames handed to the :class:`~adhoc_energy_routing.medium.Medium`; timers go
through the run scheduler.
"""

from __future__ import annotations

import enum
import itertools
from collections import deque
from dataclasses import dataclass, field, replace
from typing import TYPE_CHECKING

from adhoc_energy_routing.engine import Ticker
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.medium import Frame
from adhoc_energy_routing.metrics import DropCause
from adhoc_energy_routing.packets import (
    BROADCAST,
    DataPacket,
    Hello,
    Rerr,
    Rrep,
    Rreq,
    SqRrep,
    StopTraffic,
)


if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable, Iterator

    from adhoc_energy_routing.energy import Battery
    from adhoc_energy_routing.engine import (
        EventHandle,
        RngStream,
        Scheduler,
        SimTime,
    )
    from adhoc_energy_routing.medium import Medium
    from adhoc_energy_routing.metrics import MetricsLedger
    from adhoc_energy_routing.packets import FlowKey, NodeId, Packet
    from adhoc_energy_routing.trace import Tracer
    from adhoc_energy_routing.traffic import SessionRunner

    # destination node, plus the flow for per-flow routes
    RouteKey = tuple[NodeId, FlowKey | None]


class RouteState(str, enum.Enum):  # noqa: D101
    UP = 'UP'
    DOWN = 'DOWN'
    IN_REPAIR = 'IN_REPAIR'


class Resolution(str, enum.Enum):  # noqa: D101
    FORWARD = 'FORWARD'
    BUFFER_AND_DISCOVER = 'BUFFER_AND_DISCOVER'
    DROP = 'DROP'


class RequestOutcome(str, enum.Enum):  # noqa: D101
    REPLY = 'REPLY'
    REBROADCAST = 'REBROADCAST'
    DISCARD = 'DISCARD'
    COLLECT = 'COLLECT'
    REJECT = 'REJECT'


class ReplyOutcome(str, enum.Enum):  # noqa: D101
    CONSUMED = 'CONSUMED'
    FORWARDED = 'FORWARDED'
    DISCARDED = 'DISCARDED'


@dataclass(frozen=True)
class AodvSettings:
    """Protocol constants, all overridable from the scenario."""

    rreq_retries: int = 3
    rreq_timeout: float = 2.0
    active_route_timeout: float = 10.0
    reverse_route_lifetime: float = 3.0
    local_repair_max_hops: int = 2
    rreq_jitter: float = 0.01
    hello_interval: float = 0.0
    allowed_hello_loss: int = 2
    discovery_buffer: int = 50


@dataclass
class RouteEntry:  # noqa: D101
    dst: NodeId
    next_hop: NodeId
    hop_count: int
    dst_seq: int
    state: RouteState = RouteState.UP
    expiry: SimTime = 0.0
    precursors: set[NodeId] = field(default_factory=set)
    flow: FlowKey | None = None
    rcr_pending: bool = False

    @property
    def key(self) -> RouteKey:  # noqa: D102
        return (self.dst, self.flow)

    def usable(self, now: SimTime) -> bool:
        """Whether data may be forwarded over this entry."""
        return self.state is RouteState.UP and self.expiry > now


def better_route(
        incumbent: RouteEntry | None,
        candidate: RouteEntry,
        now: SimTime | None = None,
) -> RouteEntry:
    """Pick between the installed route and a newly learned one.

    Higher destination sequence number wins, then fewer hops; a full tie keeps
    the incumbent. When ``now`` is given, an incumbent that is down or expired
    also yields to a candidate with the same sequence number.
    """
    if incumbent is None:
        return candidate
    if candidate.dst_seq != incumbent.dst_seq:
        return candidate if candidate.dst_seq > incumbent.dst_seq else incumbent
    if now is not None and not incumbent.usable(now):
        return candidate
    if candidate.hop_count < incumbent.hop_count:
        return candidate
    return incumbent


@dataclass
class PendingDiscovery:
    """An outstanding route discovery and the data waiting for it."""

    key: RouteKey
    max_attempts: int
    attempts: int = 0
    buffer: deque[DataPacket] = field(default_factory=deque)
    timer: EventHandle | None = None
    broadcast_id: int = 0
    make_before_break: bool = False
    local_repair: bool = False

    @property
    def retries_used(self) -> int:  # noqa: D102
        return max(self.attempts - 1, 0)


@dataclass
class RoutingContext:
    """Run services shared by every agent."""

    scheduler: Scheduler
    medium: Medium
    ledger: MetricsLedger
    tracer: Tracer
    uids: Iterator[int] = field(default_factory=lambda: itertools.count(1))
    tickers: dict[SimTime, Ticker] = field(default_factory=dict)

    def next_uid(self) -> int:  # noqa: D102
        return next(self.uids)

    def every(
            self,
            period: SimTime,
            callback: Callable[[], bool | None],
    ) -> None:
        """Call ``callback`` every ``period`` seconds until it returns False.

        Callbacks of equal period share one scheduler event per tick.
        """
        ticker = self.tickers.get(period)
        if ticker is None:
            ticker = self.tickers[period] = Ticker(self.scheduler, period)
        ticker.subscribe(callback)


class AodvAgent:
    """Destination-keyed AODV for one node."""

    protocol = 'aodv'
    replies_from_intermediates = True
    supports_local_repair = True

    def __init__(  # noqa: D107
            self,
            node: NodeId,
            ctx: RoutingContext,
            battery: Battery,
            rng: RngStream,
            settings: AodvSettings | None = None,
    ) -> None:
        self.node = node
        self.ctx = ctx
        self.battery = battery
        self.rng = rng
        self.settings = settings or AodvSettings()
        self.seq = 0
        self.broadcast_id = 0
        self.routes: dict[RouteKey, RouteEntry] = {}
        self.pending: dict[RouteKey, PendingDiscovery] = {}
        self.seen: set[tuple[NodeId, int]] = set()
        self.sessions: dict[FlowKey, SessionRunner] = {}
        self.timers: dict[str, EventHandle] = {}
        self.last_heard: dict[NodeId, SimTime] = {}

    @property
    def scheduler(self) -> Scheduler:  # noqa: D102
        return self.ctx.scheduler

    @property
    def medium(self) -> Medium:  # noqa: D102
        return self.ctx.medium

    @property
    def now(self) -> SimTime:  # noqa: D102
        return self.ctx.scheduler.now

    @property
    def alive(self) -> bool:  # noqa: D102
        return self.ctx.medium.alive(self.node)

    def start(self) -> None:
        """Arm the recurring timers of the node."""
        interval = self.settings.hello_interval
        if interval > 0:
            self.timers['hello'] = self.scheduler.schedule_in(
                self.rng.draw_uniform(0, interval), self._hello_tick,
            )

    # keys

    def route_key(self, flow: FlowKey) -> RouteKey:
        """Key of the route data of ``flow`` travels on."""
        return (flow.dst, None)

    def reverse_key(self, flow: FlowKey) -> RouteKey:
        """Key of the route back to the source of ``flow``."""
        return (flow.src, None)

    def usable_route(self, key: RouteKey) -> RouteEntry | None:  # noqa: D102
        entry = self.routes.get(key)
        if entry is not None and entry.usable(self.now):
            return entry
        return None

    def install(self, candidate: RouteEntry) -> bool:
        """Install ``candidate`` if it beats the current entry."""
        incumbent = self.routes.get(candidate.key)
        if better_route(incumbent, candidate, self.now) is not candidate:
            return False
        if incumbent is not None:
            candidate.precursors |= incumbent.precursors
        self.routes[candidate.key] = candidate
        return True

    # transmission helpers

    def broadcast(self, packet: Packet) -> None:  # noqa: D102
        self.medium.enqueue(self.node, Frame(self.node, BROADCAST, packet))

    def unicast(self, next_hop: NodeId, packet: Packet) -> None:  # noqa: D102
        self.medium.enqueue(self.node, Frame(self.node, next_hop, packet))

    # medium callbacks

    def receive(self, frame: Frame) -> None:
        """Dispatch a frame delivered by the medium."""
        if not self.alive:
            return
        packet = frame.payload
        if isinstance(packet, DataPacket):
            self.recv_data(packet, frame.sender)
        elif isinstance(packet, Rreq):
            self.recv_request(packet, frame.sender)
        elif isinstance(packet, SqRrep) and packet.rcr_flag:
            self.recv_rcr(packet, frame.sender, broadcast=frame.is_broadcast)
        elif isinstance(packet, Rrep):
            self.recv_reply(packet, frame.sender)
        elif isinstance(packet, Rerr):
            self.recv_error(packet, frame.sender)
        elif isinstance(packet, StopTraffic):
            self.recv_stop(packet, frame.sender)
        elif isinstance(packet, Hello):
            self.last_heard[packet.node] = self.now

    def link_failed(self, frame: Frame) -> None:
        """The unicast ``frame`` could not reach its addressee."""
        if not self.alive:
            return
        packet = frame.payload
        self.handle_link_failure(
            frame.addressee,
            packet if isinstance(packet, DataPacket) else None,
        )

    def on_death(self) -> None:
        """Release everything the node holds once it has died."""
        for handle in self.timers.values():
            self.scheduler.cancel(handle)
        self.timers.clear()
        for pending in self.pending.values():
            self.scheduler.cancel(pending.timer)
            for packet in pending.buffer:
                self.medium.drop_data(self.node, packet, DropCause.NODE_DEAD)
        self.pending.clear()
        for flow in sorted(self.sessions):
            self.sessions[flow].stop(self.now, 'SOURCE_DEAD')

    # data

    def send_data(self, packet: DataPacket) -> Resolution:
        """Route a packet the local application just originated."""
        return self.resolve(packet)

    def recv_data(self, packet: DataPacket, prev_hop: NodeId) -> None:  # noqa: D102
        # data keeps the way back to its source alive, at the destination too
        reverse = self.routes.get(self.reverse_key(packet.flow))
        if (
            reverse is not None
            and reverse.state is RouteState.UP
            and reverse.next_hop == prev_hop
        ):
            reverse.expiry = max(
                reverse.expiry, self.now + self.settings.active_route_timeout,
            )
        if packet.flow.dst == self.node:
            self.ctx.ledger.deliver(packet, self.now)
            return
        self.resolve(packet)

    def resolve(self, packet: DataPacket) -> Resolution:
        """Forward, buffer or drop a data packet held by this node."""
        key = self.route_key(packet.flow)
        entry = self.usable_route(key)
        if entry is not None:
            entry.expiry = max(
                entry.expiry, self.now + self.settings.active_route_timeout,
            )
            if packet.flow.src != self.node:
                self.ctx.tracer.packet(
                    'FWD', self.now, self.node, packet, str(entry.next_hop),
                )
            self.unicast(entry.next_hop, packet)
            return Resolution.FORWARD
        pending = self.pending.get(key)
        if pending is None and packet.flow.src == self.node:
            pending = self.start_discovery(key)
        if pending is not None:
            self._buffer(pending, packet)
            return Resolution.BUFFER_AND_DISCOVER
        self.medium.drop_data(self.node, packet, DropCause.NO_ROUTE)
        known = self.routes.get(key)
        self.send_error([known or RouteEntry(
            key[0], self.node, 1, 0, RouteState.DOWN, flow=key[1],
        )])
        return Resolution.DROP

    def _buffer(self, pending: PendingDiscovery, packet: DataPacket) -> None:
        if len(pending.buffer) >= self.settings.discovery_buffer:
            self.medium.drop_data(self.node, packet, DropCause.BUFFER_FULL)
        else:
            pending.buffer.append(packet)

    # discovery

    def start_discovery(
            self,
            key: RouteKey,
            *,
            make_before_break: bool = False,
            local_repair: bool = False,
            max_attempts: int | None = None,
            replace_pending: bool = False,
    ) -> PendingDiscovery:
        """Open a discovery for ``key`` unless one is already running."""
        existing = self.pending.get(key)
        if existing is not None and not replace_pending:
            return existing
        pending = PendingDiscovery(
            key,
            max_attempts or 1 + self.settings.rreq_retries,
            make_before_break=make_before_break,
            local_repair=local_repair,
        )
        if existing is not None:
            self.scheduler.cancel(existing.timer)
            pending.buffer = existing.buffer
        self.pending[key] = pending
        self.send_request(pending)
        return pending

    def send_request(self, pending: PendingDiscovery) -> Rreq:
        """Flood one RREQ attempt for ``pending`` and arm its retry timer."""
        self.seq += 1
        self.broadcast_id += 1
        pending.broadcast_id = self.broadcast_id
        pending.attempts += 1
        self.seen.add((self.node, self.broadcast_id))
        rreq = self.build_request(pending)
        self.broadcast(rreq)
        pending.timer = self.scheduler.schedule_in(
            self.settings.rreq_timeout, self._request_timeout, pending,
        )
        return rreq

    def build_request(self, pending: PendingDiscovery) -> Rreq:  # noqa: D102
        dst = pending.key[0]
        known = self.routes.get(pending.key)
        return Rreq(
            uid=self.ctx.next_uid(),
            hop_count=0,
            broadcast_id=pending.broadcast_id,
            dst=dst,
            dst_seq=known.dst_seq if known is not None else 0,
            src=self.node,
            src_seq=self.seq,
        )

    def _request_timeout(self, pending: PendingDiscovery) -> None:
        if not self.alive or self.pending.get(pending.key) is not pending:
            return
        if pending.attempts < pending.max_attempts:
            self.send_request(pending)
            return
        del self.pending[pending.key]
        self.discovery_failed(pending)

    def discovery_failed(self, pending: PendingDiscovery) -> None:
        """Give up on ``pending``: drop its buffer, report the failure."""
        now = self.now
        logger.debug(
            f'Node {self.node} gave up discovery of {pending.key[0]}'
            f' after {pending.attempts} attempt(s)',
        )
        cause = (
            DropCause.LINK_BROKEN if pending.local_repair
            else DropCause.RETRIES_EXHAUSTED
        )
        flows = {
            packet.flow for packet in pending.buffer
            if packet.flow.src == self.node
        }
        flows.update(runner.session.flow for runner in self.sessions_for(
            pending.key,
        ))
        for packet in pending.buffer:
            self.medium.drop_data(self.node, packet, cause)
        pending.buffer.clear()
        for flow in sorted(flows):
            self.ctx.ledger.route_failure(flow, now)
        if pending.local_repair:
            entry = self.routes.get(pending.key)
            if entry is not None and entry.state is RouteState.IN_REPAIR:
                entry.state = RouteState.DOWN
                self.send_error([entry])

    def route_established(self, key: RouteKey) -> None:
        """A reply for ``key`` reached this node, its originator."""
        pending = self.pending.pop(key, None)
        if pending is None:
            return
        self.scheduler.cancel(pending.timer)
        buffered, pending.buffer = pending.buffer, deque()
        for packet in buffered:
            self.resolve(packet)

    def discard_buffered(self, flow: FlowKey) -> int:
        """Drop the packets of a stopped session still waiting for a route."""
        pending = self.pending.get(self.route_key(flow))
        if pending is None:
            return 0
        lost = [packet for packet in pending.buffer if packet.flow == flow]
        pending.buffer = deque(
            packet for packet in pending.buffer if packet.flow != flow
        )
        for packet in lost:
            self.medium.drop_data(
                self.node, packet, DropCause.SESSION_STOPPED,
            )
        return len(lost)

    def sessions_for(self, key: RouteKey) -> list[SessionRunner]:
        """Active local sessions whose data uses route ``key``."""
        return [
            self.sessions[flow] for flow in sorted(self.sessions)
            if self.route_key(flow) == key and self.sessions[flow].active
        ]

    def rediscover_if_active(self, key: RouteKey) -> None:
        """Restart discovery at a source that still has traffic to send."""
        if key not in self.pending and self.sessions_for(key):
            self.start_discovery(key)

    # requests

    def admit(self, rreq: Rreq) -> bool:  # noqa: ARG002
        """Whether this intermediate node accepts to route the session."""
        return True

    def reject(self, rreq: Rreq) -> None:
        """Account for a request refused by :meth:`admit`."""

    def install_reverse(self, rreq: Rreq, prev_hop: NodeId) -> RouteEntry:
        """Learn the way back to the originator of ``rreq``.

        An incumbent that keeps the table slot only because invalidation
        bumped its sequence number is brought back up through ``prev_hop``.
        Returns the entry now in the table.
        """
        candidate = RouteEntry(
            dst=rreq.src,
            next_hop=prev_hop,
            hop_count=rreq.hop_count + 1,
            dst_seq=rreq.src_seq,
            expiry=self.now + self.settings.reverse_route_lifetime,
            flow=rreq.flow,
        )
        if self.install(candidate):
            return candidate
        incumbent = self.routes[candidate.key]
        if not incumbent.usable(self.now):
            incumbent.next_hop = candidate.next_hop
            incumbent.hop_count = candidate.hop_count
            incumbent.expiry = candidate.expiry
            incumbent.state = RouteState.UP
        return incumbent

    def recv_request(self, rreq: Rreq, prev_hop: NodeId) -> RequestOutcome:
        """Handle one received copy of a route request."""
        ident = (rreq.src, rreq.broadcast_id)
        if rreq.src == self.node or ident in self.seen:
            return RequestOutcome.DISCARD
        self.seen.add(ident)
        if self.node != rreq.dst and not self.admit(rreq):
            self.reject(rreq)
            return RequestOutcome.REJECT
        reverse = self.install_reverse(rreq, prev_hop)
        if self.node == rreq.dst:
            self.answer_as_destination(rreq, prev_hop)
            return RequestOutcome.REPLY
        if self.replies_from_intermediates:
            entry = self.usable_route((rreq.dst, None))
            if entry is not None and entry.dst_seq >= rreq.dst_seq:
                self.reply_from_intermediate(rreq, reverse, entry)
                return RequestOutcome.REPLY
        relay = self.relay_copy(rreq)
        self.scheduler.schedule_in(
            self.rng.draw_uniform(0, self.settings.rreq_jitter),
            self._relay, relay,
        )
        return RequestOutcome.REBROADCAST

    def relay_copy(self, rreq: Rreq) -> Rreq:  # noqa: D102
        return replace(rreq, hop_count=rreq.hop_count + 1)

    def _relay(self, rreq: Rreq) -> None:
        if self.alive:
            self.broadcast(rreq)

    def answer_as_destination(self, rreq: Rreq, prev_hop: NodeId) -> None:  # noqa: D102
        self.seq = max(self.seq, rreq.dst_seq) + 1
        self.unicast(prev_hop, Rrep(
            uid=self.ctx.next_uid(),
            hop_count=0,
            dst=self.node,
            dst_seq=self.seq,
            src=rreq.src,
            lifetime=self.settings.active_route_timeout,
            timestamp=self.now,
        ))

    def reply_from_intermediate(  # noqa: D102
            self,
            rreq: Rreq,
            reverse: RouteEntry,
            entry: RouteEntry,
    ) -> None:
        entry.precursors.add(reverse.next_hop)
        reverse.precursors.add(entry.next_hop)
        self.unicast(reverse.next_hop, Rrep(
            uid=self.ctx.next_uid(),
            hop_count=entry.hop_count,
            dst=entry.dst,
            dst_seq=entry.dst_seq,
            src=rreq.src,
            lifetime=entry.expiry - self.now,
            timestamp=self.now,
        ))

    # replies

    def recv_reply(self, rrep: Rrep, prev_hop: NodeId) -> ReplyOutcome:
        """Install the forward route and relay the reply to its originator."""
        reverse = None
        if rrep.src != self.node:
            reverse = self.usable_route((rrep.src, rrep.flow))
            if reverse is None:
                logger.debug(
                    f'Node {self.node} discarded RREP {rrep.uid}:'
                    f' no reverse route to {rrep.src}',
                )
                return ReplyOutcome.DISCARDED
        forward = RouteEntry(
            dst=rrep.dst,
            next_hop=prev_hop,
            hop_count=rrep.hop_count + 1,
            dst_seq=rrep.dst_seq,
            expiry=self.now + rrep.lifetime,
            flow=rrep.flow,
        )
        if not self.install(forward):
            logger.debug(
                f'Node {self.node} ignored stale RREP {rrep.uid}'
                f' for {rrep.dst} (seq {rrep.dst_seq})',
            )
            return ReplyOutcome.DISCARDED
        if reverse is None:
            self.route_established(forward.key)
            return ReplyOutcome.CONSUMED
        forward.precursors.add(reverse.next_hop)
        reverse.precursors.add(prev_hop)
        reverse.expiry = max(
            reverse.expiry, self.now + self.settings.active_route_timeout,
        )
        self.unicast(
            reverse.next_hop, replace(rrep, hop_count=rrep.hop_count + 1),
        )
        return ReplyOutcome.FORWARDED

    # failures

    def invalidate_via(self, lost: NodeId) -> list[RouteEntry]:
        """Mark down every route whose next hop is ``lost``."""
        broken = []
        for entry in self.routes.values():
            if entry.next_hop == lost and entry.state is not RouteState.DOWN:
                entry.state = RouteState.DOWN
                entry.dst_seq += 1
                broken.append(entry)
        return broken

    def handle_link_failure(
            self,
            lost: NodeId,
            packet: DataPacket | None = None,
    ) -> list[RouteEntry]:
        """React to a broken link towards ``lost``.

        Data that was heading there is salvaged by a local repair or a new
        discovery at its source, or dropped. Routes not being repaired are
        reported upstream with a RERR. Returns the routes marked down.
        """
        broken = self.invalidate_via(lost)
        stranded = [
            frame.payload for frame in self.medium.purge(
                self.node, lambda frame: frame.addressee == lost,
            )
            if isinstance(frame.payload, DataPacket)
        ]
        if packet is not None:
            stranded.insert(0, packet)
        for data in stranded:
            self.salvage(data, repair=True)
        logger.debug(
            f'Node {self.node} lost link to {lost}:'
            f' {len(broken)} route(s) down',
        )
        self.send_error([
            entry for entry in broken
            if entry.state is RouteState.DOWN and entry.precursors
        ])
        for entry in broken:
            if entry.state is RouteState.DOWN:
                self.rediscover_if_active(entry.key)
        return broken

    def salvage(self, packet: DataPacket, *, repair: bool) -> None:
        """Find a new way for a packet whose next hop became unreachable."""
        key = self.route_key(packet.flow)
        pending = self.pending.get(key)
        if pending is None and packet.flow.src == self.node:
            pending = self.start_discovery(key)
        if pending is None and repair and self.supports_local_repair:
            entry = self.routes.get(key)
            if (
                entry is not None
                and entry.hop_count <= self.settings.local_repair_max_hops
            ):
                entry.state = RouteState.IN_REPAIR
                logger.debug(
                    f'Node {self.node} repairing route to {entry.dst}'
                    f' ({entry.hop_count} hop(s) left)',
                )
                pending = self.start_discovery(
                    key, local_repair=True, max_attempts=1,
                )
        if pending is not None:
            self._buffer(pending, packet)
        else:
            self.medium.drop_data(self.node, packet, DropCause.LINK_BROKEN)

    def error_packets(self, entries: list[RouteEntry]) -> list[Rerr]:
        """RERR frames reporting ``entries`` as unreachable."""
        return [Rerr(
            uid=self.ctx.next_uid(),
            unreachable=tuple((entry.dst, entry.dst_seq) for entry in entries),
        )]

    def send_error(self, entries: list[RouteEntry]) -> None:  # noqa: D102
        if entries:
            for rerr in self.error_packets(entries):
                self.broadcast(rerr)

    def recv_error(self, rerr: Rerr, sender: NodeId) -> bool:
        """Take down routes through ``sender``; ``False`` if absorbed."""
        broken = []
        for dst, dst_seq in rerr.unreachable:
            entry = self.routes.get((dst, rerr.flow))
            if (
                entry is None
                or entry.next_hop != sender
                or entry.state is RouteState.DOWN
            ):
                continue
            entry.state = RouteState.DOWN
            entry.dst_seq = max(entry.dst_seq, dst_seq)
            broken.append(entry)
        if not broken:
            return False
        keys = {entry.key for entry in broken}
        for frame in self.medium.purge(
                self.node,
                lambda frame: (
                    frame.addressee == sender
                    and isinstance(frame.payload, DataPacket)
                    and self.route_key(frame.payload.flow) in keys
                ),
        ):
            self.salvage(frame.payload, repair=False)  # type: ignore[arg-type]
        self.send_error([entry for entry in broken if entry.precursors])
        for key in sorted(keys, key=str):
            self.rediscover_if_active(key)
        return True

    # hooks implemented by the energy-aware variants

    def recv_rcr(  # noqa: D102
            self,
            rcr: SqRrep,
            prev_hop: NodeId,
            *,
            broadcast: bool,
    ) -> None:
        logger.debug(f'Node {self.node} ignored RCR {rcr.uid} from {prev_hop}')

    def recv_stop(self, stop: StopTraffic, prev_hop: NodeId) -> None:  # noqa: D102
        logger.debug(
            f'Node {self.node} ignored StopTraffic {stop.uid} from {prev_hop}',
        )

    # proactive maintenance

    def _hello_tick(self) -> None:
        if not self.alive:
            return
        interval = self.settings.hello_interval
        self.broadcast(Hello(uid=self.ctx.next_uid(), node=self.node))
        silence = self.settings.allowed_hello_loss * interval
        for neighbor, heard in sorted(self.last_heard.items()):
            if self.now - heard > silence:
                del self.last_heard[neighbor]
                self.handle_link_failure(neighbor)
        self.timers['hello'] = self.scheduler.schedule_in(
            interval, self._hello_tick,
        )
