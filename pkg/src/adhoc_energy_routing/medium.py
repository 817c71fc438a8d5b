"""Static unit-disk topology and the shared half-duplex medium.

The medium has no collisions and no carrier sense. Each node owns one
interface that transmits its FIFO queue one frame at a time; every alive
neighbour of the sender pays reception energy for every frame, addressed to
it or not.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property
from typing import TYPE_CHECKING, Protocol

import networkx as nx
import numpy as np

from adhoc_energy_routing.exceptions import ContractViolation
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.metrics import DropCause
from adhoc_energy_routing.packets import (
    BROADCAST,
    DATA_HEADER_BYTES,
    PAYLOAD_BYTES,
    DataPacket,
)


if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable

    from adhoc_energy_routing.energy import Battery
    from adhoc_energy_routing.engine import Scheduler, SimTime
    from adhoc_energy_routing.metrics import MetricsLedger
    from adhoc_energy_routing.packets import NodeId, Packet
    from adhoc_energy_routing.trace import Tracer


class EnqueueResult(str, enum.Enum):  # noqa: D101
    ACCEPTED = 'ACCEPTED'
    DROPPED_QUEUE_FULL = 'DROPPED_QUEUE_FULL'
    DROPPED_NODE_DEAD = 'DROPPED_NODE_DEAD'


@dataclass
class Topology:
    """Node positions in metres with symmetric unit-disk links."""

    positions: dict[NodeId, tuple[float, float]]
    comm_range: float = 250.0
    area: tuple[float, float] | None = None

    def __post_init__(self) -> None:  # noqa: D105
        if not self.comm_range > 0:
            raise ContractViolation(
                f'Communication range must be positive, got {self.comm_range}',
            )
        if self.area is not None:
            width, height = self.area
            for node, (x, y) in self.positions.items():
                if not (0 <= x <= width and 0 <= y <= height):
                    raise ContractViolation(
                        f'Node {node} at ({x}, {y}) lies outside the'
                        f' {width}x{height} area',
                    )

    @cached_property
    def nodes(self) -> tuple[NodeId, ...]:  # noqa: D102
        return tuple(sorted(self.positions))

    @cached_property
    def _index(self) -> dict[NodeId, int]:
        return {node: i for i, node in enumerate(self.nodes)}

    @cached_property
    def _distances(self) -> np.ndarray:
        coords = np.array([self.positions[n] for n in self.nodes], dtype=float)
        deltas = coords[:, np.newaxis, :] - coords[np.newaxis, :, :]
        return np.hypot(deltas[..., 0], deltas[..., 1])

    @cached_property
    def _neighbors(self) -> dict[NodeId, frozenset[NodeId]]:
        in_range = self._distances <= self.comm_range
        np.fill_diagonal(in_range, False)
        return {
            node: frozenset(self.nodes[j] for j in np.flatnonzero(row))
            for node, row in zip(self.nodes, in_range)
        }

    def neighbors(self, node: NodeId) -> frozenset[NodeId]:
        """Nodes within ``comm_range`` of ``node``, boundary included."""
        try:
            return self._neighbors[node]
        except KeyError:
            raise ContractViolation(f'Unknown node {node}') from None

    @cached_property
    def _ordered_neighbors(self) -> dict[NodeId, tuple[NodeId, ...]]:
        return {
            node: tuple(sorted(others))
            for node, others in self._neighbors.items()
        }

    def ordered_neighbors(self, node: NodeId) -> tuple[NodeId, ...]:
        """Neighbours of ``node`` in ascending id order."""
        try:
            return self._ordered_neighbors[node]
        except KeyError:
            raise ContractViolation(f'Unknown node {node}') from None

    def distance(self, a: NodeId, b: NodeId) -> float:  # noqa: D102
        try:
            return float(self._distances[self._index[a], self._index[b]])
        except KeyError as exc:
            raise ContractViolation(f'Unknown node {exc.args[0]}') from None

    def graph(self) -> nx.Graph:
        """Connectivity graph, edges weighted by distance."""
        graph = nx.Graph()
        graph.add_nodes_from(self.nodes)
        for node in self.nodes:
            for other in self.neighbors(node):
                if node < other:
                    graph.add_edge(
                        node, other, distance=self.distance(node, other),
                    )
        return graph

    def is_connected(self) -> bool:  # noqa: D102
        return len(self.nodes) < 2 or nx.is_connected(self.graph())


@dataclass(frozen=True)
class Frame:
    """Link-level envelope of a packet."""

    sender: NodeId
    addressee: NodeId
    payload: Packet

    def __post_init__(self) -> None:  # noqa: D105
        if not self.payload.size_bytes > 0:
            raise ContractViolation(
                f'Frame size must be positive, got {self.payload.size_bytes}',
            )

    @property
    def size_bytes(self) -> int:  # noqa: D102
        return self.payload.size_bytes

    @property
    def is_broadcast(self) -> bool:  # noqa: D102
        return self.addressee == BROADCAST


@dataclass
class Interface:
    """Outbound side of a node's radio.

    ``queue`` holds the frames waiting for the air; the frame being
    transmitted is kept apart in ``on_air``.
    """

    node: NodeId
    capacity: int = 50
    queue: deque[Frame] = field(default_factory=deque)
    busy_until: float = 0.0
    alive: bool = True
    on_air: Frame | None = None


class FrameHandler(Protocol):
    """What the medium expects from the routing agent of a node."""

    def receive(self, frame: Frame) -> None: ...  # noqa: D102

    def link_failed(self, frame: Frame) -> None: ...  # noqa: D102

    def on_death(self) -> None: ...  # noqa: D102


@dataclass(frozen=True)
class MediumSettings:  # noqa: D101
    rate_bps: float = 1e6
    queue_capacity: int = 50
    tx_power_w: float = 0.2818
    rx_power_w: float = 0.2818
    data_header_bytes: int = DATA_HEADER_BYTES
    payload_bytes: int = PAYLOAD_BYTES


def tx_duration(size_bytes: int, rate_bps: float = 1e6) -> SimTime:
    """Seconds needed to put ``size_bytes`` on the air."""
    if not size_bytes > 0:
        raise ContractViolation(
            f'Frame size must be positive, got {size_bytes}',
        )
    return 8 * size_bytes / rate_bps


class Medium:
    """Serializes transmissions, debits energy and delivers frames."""

    def __init__(  # noqa: D107
            self,
            scheduler: Scheduler,
            topology: Topology,
            batteries: dict[NodeId, Battery],
            ledger: MetricsLedger,
            tracer: Tracer,
            settings: MediumSettings | None = None,
    ) -> None:
        self.scheduler = scheduler
        self.topology = topology
        self.batteries = batteries
        self.ledger = ledger
        self.tracer = tracer
        self.settings = settings or MediumSettings()
        self.interfaces = {
            node: Interface(node, self.settings.queue_capacity)
            for node in topology.nodes
        }
        self.handlers: dict[NodeId, FrameHandler] = {}
        self.busy_log: dict[NodeId, list[tuple[SimTime, SimTime]]] = {
            node: [] for node in topology.nodes
        }

    def attach(self, node: NodeId, handler: FrameHandler) -> None:  # noqa: D102
        self.handlers[node] = handler

    def interface(self, node: NodeId) -> Interface:  # noqa: D102
        try:
            return self.interfaces[node]
        except KeyError:
            raise ContractViolation(f'Unknown node {node}') from None

    def alive(self, node: NodeId) -> bool:  # noqa: D102
        return self.interface(node).alive

    def drop_data(
            self,
            node: NodeId,
            packet: DataPacket,
            cause: DropCause,
    ) -> None:
        """Account and trace the loss of a data packet at ``node``."""
        self.ledger.drop(packet, cause)
        self.tracer.packet(
            'DROP', self.scheduler.now, node, packet, cause.value,
        )

    def enqueue(self, node: NodeId, frame: Frame) -> EnqueueResult:
        """Queue a frame for transmission by ``node``.

        Dropped data packets are accounted here; dropped control frames
        are only logged.
        """
        iface = self.interface(node)
        if not iface.alive:
            result, cause = EnqueueResult.DROPPED_NODE_DEAD, DropCause.NODE_DEAD
        elif len(iface.queue) >= iface.capacity:
            result, cause = (
                EnqueueResult.DROPPED_QUEUE_FULL, DropCause.QUEUE_FULL,
            )
        else:
            iface.queue.append(frame)
            if iface.on_air is None:
                self._start(iface)
            return EnqueueResult.ACCEPTED
        self._discard(node, frame, cause)
        return result

    def _discard(self, node: NodeId, frame: Frame, cause: DropCause) -> None:
        if isinstance(frame.payload, DataPacket):
            self.drop_data(node, frame.payload, cause)
        else:
            logger.debug(
                f'Node {node} dropped {frame.payload.kind.value}'
                f' {frame.payload.uid}: {cause.value}',
            )

    def purge(
            self,
            node: NodeId,
            predicate: Callable[[Frame], bool],
    ) -> list[Frame]:
        """Remove and return the queued frames matching ``predicate``."""
        iface = self.interface(node)
        removed = [frame for frame in iface.queue if predicate(frame)]
        if removed:
            iface.queue = deque(
                frame for frame in iface.queue if not predicate(frame)
            )
        return removed

    def _start(self, iface: Interface) -> None:
        frame = iface.queue.popleft()
        now = self.scheduler.now
        duration = tx_duration(frame.size_bytes, self.settings.rate_bps)
        iface.on_air = frame
        iface.busy_until = now + duration
        self.busy_log[iface.node].append((now, iface.busy_until))

        payload = frame.payload
        if payload.is_control:
            self.ledger.routing_tx(payload.kind)
            self.tracer.packet('SEND', now, iface.node, payload)

        dying: list[NodeId] = []
        if not self.batteries[iface.node].debit(
                self.settings.tx_power_w * duration, now,
        ):
            dying.append(iface.node)
        interfaces = self.interfaces
        listeners = tuple(
            neighbor
            for neighbor in self.topology.ordered_neighbors(iface.node)
            if interfaces[neighbor].alive
        )
        rx_energy = self.settings.rx_power_w * duration
        batteries = self.batteries
        for neighbor in listeners:
            if not batteries[neighbor].debit(rx_energy, now):
                dying.append(neighbor)
        for node in dying:
            self.kill(node)

        self.scheduler.schedule(
            iface.busy_until, self._complete, iface, frame, listeners,
        )

    def _complete(
            self,
            iface: Interface,
            frame: Frame,
            listeners: tuple[NodeId, ...],
    ) -> None:
        iface.on_air = None
        if not iface.alive:
            # the sender ran dry while transmitting: the frame never finishes
            self._discard(iface.node, frame, DropCause.NODE_DEAD)
            return
        if frame.is_broadcast:
            for node in listeners:
                if self.interfaces[node].alive:
                    self._deliver(node, frame)
        elif (
            frame.addressee in listeners
            and self.interfaces[frame.addressee].alive
        ):
            self._deliver(frame.addressee, frame)
        else:
            self.handlers[iface.node].link_failed(frame)
        if iface.alive and iface.queue and iface.on_air is None:
            self._start(iface)

    def _deliver(self, node: NodeId, frame: Frame) -> None:
        payload = frame.payload
        now = self.scheduler.now
        if isinstance(payload, DataPacket):
            payload.hops += 1
            payload.path.append(node)
            self.tracer.packet('RECV', now, node, payload, str(payload.hops))
        else:
            self.tracer.packet('RECV', now, node, payload)
        self.handlers[node].receive(frame)

    def kill(self, node: NodeId) -> None:
        """Switch a drained node off; its queued data is lost."""
        iface = self.interface(node)
        if not iface.alive:
            return
        now = self.scheduler.now
        iface.alive = False
        queued, iface.queue = iface.queue, deque()
        for frame in queued:
            if isinstance(frame.payload, DataPacket):
                self.drop_data(node, frame.payload, DropCause.NODE_DEAD)
        self.ledger.node_died(node, now)
        self.tracer.die(now, node, self.batteries[node].residual_j)
        logger.debug(f'Node {node} died at {now:.6f} s')
        handler = self.handlers.get(node)
        if handler is not None:
            handler.on_death()

    def held_data_uids(self) -> set[int]:
        """Uids of the data packets sitting in interfaces."""
        uids = set()
        for iface in self.interfaces.values():
            frames = list(iface.queue)
            if iface.on_air is not None:
                frames.append(iface.on_air)
            uids.update(
                frame.payload.uid for frame in frames
                if isinstance(frame.payload, DataPacket)
            )
        return uids
