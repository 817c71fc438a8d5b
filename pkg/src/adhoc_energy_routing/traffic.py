"""Session traffic: CBR and Poisson packet generators."""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import TYPE_CHECKING

from adhoc_energy_routing.exceptions import ContractViolation
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.packets import (
    DATA_HEADER_BYTES,
    PAYLOAD_BYTES,
    DataPacket,
)


if TYPE_CHECKING:  # pragma: no cover
    from adhoc_energy_routing.aodv import AodvAgent, RoutingContext
    from adhoc_energy_routing.engine import EventHandle, RngStream, SimTime
    from adhoc_energy_routing.packets import FlowKey


FULL_LOAD_BPS = 225_000.0
"""Aggregate offered load taken as 100% network load."""


class SessionKind(str, enum.Enum):  # noqa: D101
    CBR = 'cbr'
    POISSON = 'poisson'


class SessionState(str, enum.Enum):  # noqa: D101
    PENDING = 'PENDING'
    ACTIVE = 'ACTIVE'
    COMPLETED = 'COMPLETED'
    STOPPED = 'STOPPED'


@dataclass(frozen=True)
class Session:
    """Traffic of one flow.

    ``packet_count`` is ``None`` for open sessions, which send until the end
    of the run. ``declared_duration`` is what the application announces to
    the routing layer; ``None`` means unknown.
    """

    flow: FlowKey
    kind: SessionKind
    start: SimTime
    pkts_per_s: float | None = None
    rate_bps: float | None = None
    packet_count: int | None = None
    payload_bytes: int = PAYLOAD_BYTES
    declared_duration: float | None = None

    def __post_init__(self) -> None:  # noqa: D105
        rate = (
            self.pkts_per_s if self.kind is SessionKind.CBR else self.rate_bps
        )
        if rate is None or not rate > 0:
            raise ContractViolation(
                f'Session {self.flow} needs a positive rate, got {rate}',
            )

    @property
    def mean_interarrival(self) -> float:
        """Mean seconds between two packets of the session."""
        if self.kind is SessionKind.CBR:
            return 1 / self.pkts_per_s  # type: ignore[operator]
        return 8 * self.payload_bytes / self.rate_bps  # type: ignore[operator]

    @property
    def offered_bps(self) -> float:  # noqa: D102
        return 8 * self.payload_bytes / self.mean_interarrival

    def next_arrival(self, now: SimTime, rng: RngStream) -> SimTime:
        """Time of the packet following one sent at ``now``."""
        if self.kind is SessionKind.CBR:
            return now + self.mean_interarrival
        return now + rng.draw_exponential(self.mean_interarrival)

    def expected_duration(self, horizon: SimTime) -> float:
        """Expected length of the session when it runs to its end."""
        if self.packet_count is None:
            return max(horizon - self.start, 0.0)
        return self.packet_count * self.mean_interarrival


def network_load(sessions: list[Session]) -> float:
    """Aggregate offered load as a fraction of full network load."""
    return sum(s.offered_bps for s in sessions) / FULL_LOAD_BPS


class SessionRunner:
    """Drives the packets of a session into its source agent."""

    def __init__(  # noqa: D107
            self,
            session: Session,
            agent: AodvAgent,
            ctx: RoutingContext,
            rng: RngStream,
            horizon: SimTime,
            header_bytes: int = DATA_HEADER_BYTES,
    ) -> None:
        self.session = session
        self.agent = agent
        self.ctx = ctx
        self.rng = rng
        self.horizon = horizon
        self.header_bytes = header_bytes
        self.state = SessionState.PENDING
        self.sent = 0
        self._next: EventHandle | None = None

    @property
    def active(self) -> bool:
        """Whether the session still has packets to send."""
        return self.state in (SessionState.PENDING, SessionState.ACTIVE)

    @property
    def finished(self) -> bool:  # noqa: D102
        return not self.active

    def begin(self) -> None:
        """Register with the source agent and schedule the first packet."""
        self.agent.sessions[self.session.flow] = self
        self._next = self.ctx.scheduler.schedule(self.session.start, self._emit)

    def remaining_duration(self, now: SimTime) -> float | None:
        """Declared duration still ahead at ``now``, if any was declared."""
        declared = self.session.declared_duration
        if declared is None:
            return None
        elapsed = max(now - self.session.start, 0.0)
        return max(declared - elapsed, 0.0)

    def _emit(self) -> None:
        if not self.active:
            return
        now = self.ctx.scheduler.now
        if self.state is SessionState.PENDING:
            self.state = SessionState.ACTIVE
            logger.debug(f'Session {self.session.flow} started at {now:.6f} s')
        packet = DataPacket(
            uid=self.ctx.next_uid(),
            flow=self.session.flow,
            created_at=now,
            size_bytes=self.session.payload_bytes + self.header_bytes,
            path=[self.session.flow.src],
        )
        self.ctx.tracer.packet('SEND', now, self.session.flow.src, packet)
        self.ctx.ledger.inject(packet)
        self.sent += 1
        self.agent.send_data(packet)
        if not self.active:
            return
        count = self.session.packet_count
        if count is not None and self.sent >= count:
            self.state = SessionState.COMPLETED
            self._next = None
            self.ctx.ledger.flow(self.session.flow).completed = True
            self.ctx.tracer.session_end(
                now, self.session.flow.src, self.session.flow, 'COMPLETED',
            )
            return
        self._next = self.ctx.scheduler.schedule(
            self.session.next_arrival(now, self.rng), self._emit,
        )

    def unsent(self, now: SimTime) -> int:
        """Packets the session would still have generated after ``now``."""
        count = self.session.packet_count
        if count is not None:
            return count - self.sent
        remaining = self.horizon - max(now, self.session.start)
        return max(math.floor(remaining / self.session.mean_interarrival), 0)

    def stop(self, now: SimTime, reason: str = 'STOPPED') -> bool:
        """End the session early; returns ``False`` if it was already over."""
        if not self.active:
            return False
        self.ctx.scheduler.cancel(self._next)
        self._next = None
        self.state = SessionState.STOPPED
        flow = self.session.flow
        stats = self.ctx.ledger.flow(flow)
        stats.suppressed += self.unsent(now)
        self.ctx.ledger.session_ended(flow, now)
        self.agent.discard_buffered(flow)
        self.ctx.tracer.session_end(now, flow.src, flow, reason)
        logger.debug(f'Session {flow} ended at {now:.6f} s: {reason}')
        return True
