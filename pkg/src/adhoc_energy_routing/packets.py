"""Packet types carried by the medium.

Control packets are immutable: a relay builds its own copy with
``dataclasses.replace`` before retransmitting, so the receivers of one
broadcast never share mutable state. Octet counts are fixed per type.
"""

from __future__ import annotations

import enum
from dataclasses import dataclass, field
from typing import ClassVar, Union


NodeId = int
BROADCAST: NodeId = -1

PAYLOAD_BYTES = 512
DATA_HEADER_BYTES = 20
RREQ_BYTES = 24
SQ_RREQ_BYTES = 32
MDR_RREQ_BYTES = 28
RREP_BYTES = 24
RERR_BYTES = 24
RCR_BYTES = 24
STOP_BYTES = 16
HELLO_BYTES = 20


class PacketKind(str, enum.Enum):  # noqa: D101
    DATA = 'DATA'
    RREQ = 'RREQ'
    RREP = 'RREP'
    RERR = 'RERR'
    RCR = 'RCR'
    STOP = 'STOP'
    HELLO = 'HELLO'


@dataclass(frozen=True, order=True)
class FlowKey:
    """Identity of a session route: ``(src, dst, flow_id)``."""

    src: NodeId
    dst: NodeId
    flow_id: int

    def __str__(self) -> str:
        return f'{self.src}:{self.dst}:{self.flow_id}'


@dataclass
class DataPacket:
    """Application payload plus the bookkeeping needed by the metrics."""

    uid: int
    flow: FlowKey
    created_at: float
    size_bytes: int = PAYLOAD_BYTES + DATA_HEADER_BYTES
    hops: int = 0
    path: list[NodeId] = field(default_factory=list)

    kind: ClassVar[PacketKind] = PacketKind.DATA
    is_control: ClassVar[bool] = False


@dataclass(frozen=True)
class Rreq:  # noqa: D101
    uid: int
    hop_count: int
    broadcast_id: int
    dst: NodeId
    dst_seq: int
    src: NodeId
    src_seq: int

    kind: ClassVar[PacketKind] = PacketKind.RREQ
    is_control: ClassVar[bool] = True
    size_bytes: ClassVar[int] = RREQ_BYTES

    @property
    def flow(self) -> FlowKey | None:
        """Flow the request is for, ``None`` for destination routing."""
        return None


@dataclass(frozen=True)
class SqRreq(Rreq):
    """Request carrying admission and bottleneck information.

    ``session_duration`` is ``None`` when the application did not declare
    one.
    """

    flow_id: int
    session_duration: float | None
    bottleneck_lifetime: float

    size_bytes: ClassVar[int] = SQ_RREQ_BYTES

    @property
    def flow(self) -> FlowKey:  # noqa: D102
        return FlowKey(self.src, self.dst, self.flow_id)


@dataclass(frozen=True)
class MdrRreq(Rreq):  # noqa: D101
    flow_id: int
    bottleneck_lifetime: float

    size_bytes: ClassVar[int] = MDR_RREQ_BYTES

    @property
    def flow(self) -> FlowKey:  # noqa: D102
        return FlowKey(self.src, self.dst, self.flow_id)


@dataclass(frozen=True)
class Rrep:
    """Route reply travelling back to ``src``, the originator."""

    uid: int
    hop_count: int
    dst: NodeId
    dst_seq: int
    src: NodeId
    lifetime: float
    timestamp: float

    is_control: ClassVar[bool] = True
    size_bytes: ClassVar[int] = RREP_BYTES

    @property
    def kind(self) -> PacketKind:  # noqa: D102
        return PacketKind.RREP

    @property
    def flow(self) -> FlowKey | None:  # noqa: D102
        return None


@dataclass(frozen=True)
class SqRrep(Rrep):
    """Per-flow reply, doubling as Route Change Request when flagged.

    A route change request names the ``drained_node`` and never installs a
    forward route.
    """

    flow_id: int
    rcr_flag: bool = False
    drained_node: NodeId | None = None

    @property
    def kind(self) -> PacketKind:  # noqa: D102
        return PacketKind.RCR if self.rcr_flag else PacketKind.RREP

    @property
    def flow(self) -> FlowKey:  # noqa: D102
        return FlowKey(self.src, self.dst, self.flow_id)


@dataclass(frozen=True)
class Rerr:
    """Unreachable destinations as ``(dst, dst_seq)`` pairs."""

    uid: int
    unreachable: tuple[tuple[NodeId, int], ...]

    kind: ClassVar[PacketKind] = PacketKind.RERR
    is_control: ClassVar[bool] = True
    size_bytes: ClassVar[int] = RERR_BYTES

    @property
    def dest_count(self) -> int:  # noqa: D102
        return len(self.unreachable)

    @property
    def flow(self) -> FlowKey | None:  # noqa: D102
        return None


@dataclass(frozen=True)
class SqRerr(Rerr):  # noqa: D101
    unreachable_src: NodeId
    unreachable_flow_id: int

    @property
    def flow(self) -> FlowKey:  # noqa: D102
        dst, _ = self.unreachable[0]
        return FlowKey(self.unreachable_src, dst, self.unreachable_flow_id)


@dataclass(frozen=True)
class StopTraffic:
    """Request from a drained destination to the source of ``flow``."""

    uid: int
    flow: FlowKey

    kind: ClassVar[PacketKind] = PacketKind.STOP
    is_control: ClassVar[bool] = True
    size_bytes: ClassVar[int] = STOP_BYTES


@dataclass(frozen=True)
class Hello:  # noqa: D101
    uid: int
    node: NodeId

    kind: ClassVar[PacketKind] = PacketKind.HELLO
    is_control: ClassVar[bool] = True
    size_bytes: ClassVar[int] = HELLO_BYTES

    @property
    def flow(self) -> FlowKey | None:  # noqa: D102
        return None


ControlPacket = Union[Rreq, Rrep, Rerr, StopTraffic, Hello]  # noqa: UP007
Packet = Union[DataPacket, ControlPacket]  # noqa: UP007
