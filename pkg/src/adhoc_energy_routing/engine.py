"""Deterministic discrete-event scheduler and seeded random streams."""

from __future__ import annotations

import heapq
import math
import zlib
from dataclasses import dataclass
from typing import TYPE_CHECKING

import numpy as np

from adhoc_energy_routing.exceptions import ContractViolation


if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable
    from typing import Any


SimTime = float
"""Simulation time in seconds."""

TIME_DECIMALS = 9
"""Decimals used whenever a simulation time is rendered."""

SEED_LIMIT = 2 ** 64


def format_time(t: SimTime) -> str:
    """Render a simulation time with the trace precision."""
    return f'{t:.{TIME_DECIMALS}f}'


@dataclass
class Event:
    """A command for some module, to be dispatched at ``fire_at``.

    The scheduler orders events by ``(fire_at, seq)``, ``seq`` being its
    insertion counter, so simultaneous events dispatch in FIFO order.
    """

    fire_at: SimTime
    seq: int
    action: Callable[..., Any]
    args: tuple[Any, ...] = ()
    cancelled: bool = False
    fired: bool = False

    @property
    def pending(self) -> bool:  # noqa: D102
        return not (self.cancelled or self.fired)


EventHandle = Event


class Scheduler:
    """Single-threaded event queue owning the simulation clock."""

    def __init__(self, *, keep_log: bool = False) -> None:  # noqa: D107
        self.now: SimTime = 0.0
        self._queue: list[tuple[SimTime, int, Event]] = []
        self._seq = 0
        self.dispatched = 0
        self.log: list[tuple[SimTime, int]] | None = [] if keep_log else None

    def __len__(self) -> int:
        return sum(1 for *_, event in self._queue if event.pending)

    def schedule(
            self,
            fire_at: SimTime,
            action: Callable[..., Any],
            *args: Any,
    ) -> EventHandle:
        """Queue ``action(*args)`` to run at ``fire_at``."""
        if fire_at < self.now or math.isnan(fire_at):
            raise ContractViolation(
                f'Event scheduled in the past: fire_at={format_time(fire_at)}'
                f' while clock={format_time(self.now)}',
            )
        event = Event(fire_at, self._seq, action, args)
        self._seq += 1
        heapq.heappush(self._queue, (fire_at, event.seq, event))
        return event

    def schedule_in(
            self,
            delay: SimTime,
            action: Callable[..., Any],
            *args: Any,
    ) -> EventHandle:
        """Queue ``action(*args)`` to run ``delay`` seconds from now."""
        return self.schedule(self.now + delay, action, *args)

    def cancel(self, handle: EventHandle | None) -> bool:
        """Cancel a pending event.

        Returns ``True`` only if the event was pending, so cancelling twice
        or cancelling a fired event returns ``False``.
        """
        if handle is None or not handle.pending:
            return False
        handle.cancelled = True
        return True

    def run_until(self, t_end: SimTime) -> int:
        """Dispatch every event with ``fire_at <= t_end`` in order.

        Events scheduled while dispatching are honored as long as they fall
        inside the window. Leaves the clock at ``t_end``.
        """
        if t_end < self.now:
            raise ContractViolation(
                f'Cannot run backwards to {format_time(t_end)}'
                f' from {format_time(self.now)}',
            )
        count = 0
        queue = self._queue
        while queue and queue[0][0] <= t_end:
            event = heapq.heappop(queue)[2]
            if event.cancelled:
                continue
            self.now = event.fire_at
            event.fired = True
            if self.log is not None:
                self.log.append((event.fire_at, event.seq))
            event.action(*event.args)
            count += 1
        self.now = t_end
        self.dispatched += count
        return count


class Ticker:
    """Recurring callbacks sharing one period, dispatched by a single event.

    Subscribers run in subscription order at every tick, and one returning
    ``False`` is dropped. The first subscription sets the phase.
    """

    def __init__(self, scheduler: Scheduler, period: SimTime) -> None:  # noqa: D107
        if not period > 0:
            raise ContractViolation(
                f'Ticker period must be positive, got {period}',
            )
        self.scheduler = scheduler
        self.period = period
        self.callbacks: list[Callable[[], bool | None]] = []
        self.handle: EventHandle | None = None

    def subscribe(self, callback: Callable[[], bool | None]) -> None:  # noqa: D102
        self.callbacks.append(callback)
        if self.handle is None:
            self.handle = self.scheduler.schedule_in(self.period, self._tick)

    def _tick(self) -> None:
        self.callbacks = [
            callback for callback in self.callbacks if callback() is not False
        ]
        self.handle = (
            self.scheduler.schedule_in(self.period, self._tick)
            if self.callbacks else None
        )


class RngStream:
    """Independent PCG64 stream identified by ``(seed, stream_id)``.

    The stream label is folded into the seed sequence spawn key with CRC-32,
    which is stable across runs and platforms.
    """

    def __init__(self, seed: int, stream_id: str) -> None:  # noqa: D107
        if not 0 <= seed < SEED_LIMIT:
            raise ContractViolation(f'Seed out of 64-bit range: {seed}')
        self.seed = seed
        self.stream_id = stream_id
        self.draws = 0
        sequence = np.random.SeedSequence(
            seed, spawn_key=(zlib.crc32(stream_id.encode('utf-8')),),
        )
        self._generator = np.random.Generator(np.random.PCG64(sequence))

    def _next(self) -> float:
        self.draws += 1
        return float(self._generator.random())

    def draw_uniform(self, lo: float, hi: float) -> float:
        """Draw from ``U[lo, hi)``."""
        if lo > hi:
            raise ContractViolation(
                f'Empty uniform interval [{lo}, {hi}] on {self.stream_id}',
            )
        return lo + (hi - lo) * self._next()

    def draw_exponential(self, mean: float) -> float:
        """Draw an exponential variate by inverting its CDF."""
        if not mean > 0:
            raise ContractViolation(
                f'Exponential mean must be positive, got {mean}'
                f' on {self.stream_id}',
            )
        return -mean * math.log1p(-self._next())


class RngStreams:
    """Lazily created streams of one run, one per label."""

    def __init__(self, seed: int) -> None:  # noqa: D107
        self.seed = seed
        self._streams: dict[str, RngStream] = {}

    def get(self, stream_id: str) -> RngStream:  # noqa: D102
        try:
            return self._streams[stream_id]
        except KeyError:
            stream = RngStream(self.seed, stream_id)
            self._streams[stream_id] = stream
            return stream

    def node(self, node_id: int) -> RngStream:  # noqa: D102
        return self.get(f'node-{node_id}')

    def session(self, label: str) -> RngStream:  # noqa: D102
        return self.get(f'session-{label}')
