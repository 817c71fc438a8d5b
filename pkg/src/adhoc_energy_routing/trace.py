"""Trace records, their writer and the trace-file validator.

One record per line, tab separated::

    time  event  node  pkt_kind  pkt_uid  flow  size_bytes  aux

Times carry 9 decimals and energies 6; ``-`` marks a field that does not
apply to the event.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING

from adhoc_energy_routing.engine import format_time


if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Iterable
    from typing import TextIO

    from adhoc_energy_routing.packets import FlowKey, NodeId, Packet


EVENTS = ('SEND', 'RECV', 'DROP', 'FWD', 'DIE', 'SESS_END')
KINDS = ('DATA', 'RREQ', 'RREP', 'RERR', 'RCR', 'STOP', 'HELLO')

TRACE_LINE_RE = re.compile(
    r'^(?P<time>\d+\.\d{9})'
    rf'\t(?P<event>{"|".join(EVENTS)})'
    r'\t(?P<node>\d+)'
    rf'\t(?P<kind>{"|".join(KINDS)}|-)'
    r'\t(?P<uid>\d+|-)'
    r'\t(?P<flow>\d+:\d+:\d+|-)'
    r'\t(?P<size>\d+|-)'
    r'\t(?P<aux>[^\t\s]+)$',
)


def format_energy(joules: float) -> str:  # noqa: D103
    return f'{joules:.6f}'


@dataclass(frozen=True)
class TraceRecord:  # noqa: D101
    time: float
    event: str
    node: NodeId
    pkt_kind: str | None = None
    pkt_uid: int | None = None
    flow: FlowKey | None = None
    size_bytes: int | None = None
    aux: str | None = None

    def format(self) -> str:
        """Render the record as one trace line, without newline."""
        return '\t'.join((
            format_time(self.time),
            self.event,
            str(self.node),
            self.pkt_kind or '-',
            '-' if self.pkt_uid is None else str(self.pkt_uid),
            '-' if self.flow is None else str(self.flow),
            '-' if self.size_bytes is None else str(self.size_bytes),
            self.aux or '-',
        ))


class Tracer:
    """Writes trace records to a text stream, or nowhere."""

    def __init__(self, stream: TextIO | None = None) -> None:  # noqa: D107
        self._stream = stream

    @property
    def enabled(self) -> bool:  # noqa: D102
        return self._stream is not None

    def emit(self, record: TraceRecord) -> None:  # noqa: D102
        if self._stream is not None:
            self._stream.write(record.format() + '\n')

    def packet(
            self,
            event: str,
            now: float,
            node: NodeId,
            packet: Packet,
            aux: str | None = None,
    ) -> None:
        """Trace a packet event."""
        if self._stream is None:
            return
        self.emit(TraceRecord(
            now, event, node, packet.kind.value, packet.uid,
            packet.flow, packet.size_bytes, aux,
        ))

    def die(self, now: float, node: NodeId, residual_j: float) -> None:
        """Trace a node death with its final residual energy."""
        self.emit(TraceRecord(now, 'DIE', node, aux=format_energy(residual_j)))

    def session_end(
            self,
            now: float,
            node: NodeId,
            flow: FlowKey,
            reason: str,
    ) -> None:
        """Trace the end of a session at its source."""
        self.emit(TraceRecord(now, 'SESS_END', node, flow=flow, aux=reason))


def validate_trace(lines: Iterable[str]) -> list[tuple[int, str]]:
    """Check trace lines, returning ``(lineno, problem)`` pairs.

    Besides the line grammar, checks that time never decreases and that
    every packet's lifecycle starts with a ``SEND``.
    """
    problems: list[tuple[int, str]] = []
    last_time = 0.0
    seen_uids: set[int] = set()
    for lineno, raw_line in enumerate(lines, start=1):
        line = raw_line.rstrip('\n')
        match = TRACE_LINE_RE.match(line)
        if match is None:
            problems.append((lineno, f'Malformed trace line: {line!r}'))
            continue
        time = float(match['time'])
        if time < last_time:
            problems.append((
                lineno,
                f'Time goes backwards: {match["time"]} after'
                f' {format_time(last_time)}',
            ))
        last_time = max(last_time, time)
        if match['uid'] != '-':
            uid = int(match['uid'])
            if uid not in seen_uids:
                if match['event'] != 'SEND':
                    problems.append((
                        lineno,
                        f'Packet {uid} first seen with {match["event"]},'
                        ' expected SEND',
                    ))
                seen_uids.add(uid)
    return problems
