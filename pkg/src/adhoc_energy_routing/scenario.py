"""Scenario files: reading, canonical writing and bundled scenarios.

A scenario file is a sequence of ``[section]`` or ``[section label]``
headers, each followed by ``key = value`` lines. ``#`` starts a comment and
blank lines are ignored. Every problem of a file is collected and reported
at once by :class:`~adhoc_energy_routing.exceptions.ScenarioError`.
"""

from __future__ import annotations

import dataclasses
import enum
import math
import os
import re
from dataclasses import dataclass, field
from importlib import resources
from typing import TYPE_CHECKING, Optional

from wcmatch import fnmatch

from adhoc_energy_routing.aodv import AodvSettings
from adhoc_energy_routing.config import (
    AUTO,
    COMPLETION,
    LABELLED_SECTIONS,
    OPEN,
    SECTIONS,
    UNKNOWN,
    Distribution,
    SessionDuration,
    format_area,
    format_number,
    format_seeds,
    schema_keys,
    validate_section,
)
from adhoc_energy_routing.exceptions import ScenarioError
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.mdr import MdrSettings
from adhoc_energy_routing.medium import MediumSettings
from adhoc_energy_routing.metrics import MetricsSettings
from adhoc_energy_routing.packets import FlowKey
from adhoc_energy_routing.sqaodv import SqAodvSettings
from adhoc_energy_routing.traffic import SessionKind


if TYPE_CHECKING:  # pragma: no cover
    from importlib.abc import Traversable

    from mkdocs.config.base import Config

    from adhoc_energy_routing.packets import NodeId


SCENARIO_SUFFIX = '.scn'
MATCH_FLAGS = fnmatch.BRACE | fnmatch.EXTMATCH

HEADER_RE = re.compile(
    r'^\[\s*([A-Za-z_][A-Za-z0-9_]*)(?:\s+([^\s\]]+))?\s*\]$',
)
ENTRY_RE = re.compile(r'^([A-Za-z_][A-Za-z0-9_]*)\s*=\s*(.*)$')

Problems = list[tuple[Optional[int], str]]


@dataclass
class RawSection:
    """Text of one section before validation."""

    name: str
    label: str | None
    line: int
    values: dict[str, str] = field(default_factory=dict)
    lines: dict[str, int] = field(default_factory=dict)

    @property
    def title(self) -> str:  # noqa: D102
        return self.name if self.label is None else f'{self.name} {self.label}'

    def line_of(self, key: str | None) -> int:  # noqa: D102
        if key is None:
            return self.line
        return self.lines.get(key, self.line)


def read_sections(text: str) -> tuple[list[RawSection], Problems]:
    """Split scenario text into raw sections, checking the grammar only."""
    sections: list[RawSection] = []
    seen: set[tuple[str, str | None]] = set()
    problems: Problems = []
    current: RawSection | None = None
    started = False
    for lineno, raw_line in enumerate(text.splitlines(), start=1):
        line = raw_line.split('#', 1)[0].strip()
        if not line:
            continue
        header = HEADER_RE.match(line)
        if header is not None:
            started = True
            name, label = header.group(1), header.group(2)
            current = RawSection(name, label, lineno)
            if name not in SECTIONS:
                problems.append((lineno, f'unknown section [{name}]'))
                current = None
            elif name in LABELLED_SECTIONS and label is None:
                problems.append((lineno, f'section [{name}] needs a label'))
                current = None
            elif name not in LABELLED_SECTIONS and label is not None:
                problems.append(
                    (lineno, f'section [{name}] does not take a label'),
                )
                current = None
            elif (name, label) in seen:
                problems.append(
                    (lineno, f'duplicate section [{current.title}]'),
                )
                current = None
            else:
                seen.add((name, label))
                sections.append(current)
            continue
        entry = ENTRY_RE.match(line)
        if entry is None:
            problems.append((lineno, f'cannot parse line {raw_line.strip()!r}'))
            continue
        key, value = entry.group(1), entry.group(2).strip()
        if current is None:
            if not started:
                problems.append((lineno, f'key {key!r} outside any section'))
            continue
        if not value:
            problems.append((lineno, f'empty value for {key!r}'))
        elif key in current.values:
            problems.append((
                lineno,
                f'duplicate key {key!r} in [{current.title}], first set on'
                f' line {current.lines[key]}',
            ))
        else:
            current.values[key] = value
            current.lines[key] = lineno
    return sections, problems


@dataclass(frozen=True)
class TopologySpec:
    """Where the nodes are and how far they reach."""

    generator: str = 'inline'
    nodes: int | None = None
    area: tuple[float, float] | None = None
    comm_range: float = 250.0
    energy: Distribution | None = None
    endpoint_energy: Distribution | None = None


@dataclass(frozen=True)
class NodeSpec:
    """A ``[node ID]`` section. Positions are absent for generated grids."""

    node: NodeId
    x: float | None = None
    y: float | None = None
    energy: float | None = None


@dataclass(frozen=True)
class SessionSpec:
    """A ``[session N]`` section."""

    label: str
    src: NodeId
    dst: NodeId
    kind: SessionKind
    flow_id: int = 0
    pkts_per_s: float | None = None
    rate_kbps: float | None = None
    packets: int | None = None
    start: Distribution = field(default_factory=lambda: Distribution(0, 0))
    duration: SessionDuration = AUTO

    @property
    def flow(self) -> FlowKey:  # noqa: D102
        return FlowKey(self.src, self.dst, self.flow_id)


@dataclass(frozen=True)
class ScenarioConfig:
    """A fully validated scenario.

    ``sim_until`` is ``None`` in completion mode, where the run lasts until
    every session has sent its packets, plus ``drain_time``, and never
    beyond ``max_time``.
    """

    name: str
    protocol: str = 'aodv'
    sim_until: float | None = 800.0
    max_time: float = 20000.0
    drain_time: float = 5.0
    seeds: tuple[int, ...] = (1,)
    topology: TopologySpec = field(default_factory=TopologySpec)
    nodes: tuple[NodeSpec, ...] = ()
    sessions: tuple[SessionSpec, ...] = ()
    medium: MediumSettings = field(default_factory=MediumSettings)
    aodv: AodvSettings = field(default_factory=AodvSettings)
    sqaodv: SqAodvSettings = field(default_factory=SqAodvSettings)
    mdr: MdrSettings = field(default_factory=MdrSettings)
    metrics: MetricsSettings = field(default_factory=MetricsSettings)

    def positions(self) -> dict[NodeId, tuple[float, float]]:
        """Coordinates of every node, generated or inline."""
        if self.topology.generator == 'grid':
            return gen_grid(
                self.topology.nodes,  # type: ignore[arg-type]
                self.topology.area,  # type: ignore[arg-type]
            )
        return {
            spec.node: (spec.x, spec.y)  # type: ignore[misc]
            for spec in self.nodes
        }

    def endpoints(self) -> frozenset[NodeId]:  # noqa: D102
        return frozenset(
            node for s in self.sessions for node in (s.src, s.dst)
        )

    def energy_of(self, node: NodeId) -> Distribution:
        """Initial energy distribution of a node.

        An explicit ``[node]`` energy wins over ``endpoint_energy`` for
        session endpoints, which wins over the topology ``energy``.
        """
        for spec in self.nodes:
            if spec.node == node and spec.energy is not None:
                return Distribution(spec.energy, spec.energy)
        topology = self.topology
        if topology.endpoint_energy is not None and node in self.endpoints():
            return topology.endpoint_energy
        if topology.energy is None:
            raise ScenarioError([(None, f'node {node} has no energy')])
        return topology.energy

    def with_rate(self, rate_kbps: float) -> ScenarioConfig:
        """Same scenario with every Poisson session at ``rate_kbps``."""
        return dataclasses.replace(self, sessions=tuple(
            dataclasses.replace(s, rate_kbps=rate_kbps)
            if s.kind is SessionKind.POISSON else s
            for s in self.sessions
        ))


def grid_problem(n: int) -> str | None:
    """Why ``n`` nodes cannot form a square lattice, if they cannot."""
    k = math.isqrt(n) if n >= 0 else 0
    if k * k != n:
        return f'grid size {n} is not a perfect square'
    if k < 2:
        return f'grid size {n} needs at least 2 nodes per side'
    return None


def gen_grid(
        n: int,
        area: tuple[float, float],
) -> dict[NodeId, tuple[float, float]]:
    """Square lattice of ``n`` nodes spanning ``area``, row-major from 1."""
    problem = grid_problem(n)
    if problem is not None:
        raise ScenarioError([(None, problem)], '<grid>')
    k = math.isqrt(n)
    width, height = area
    return {
        row * k + col + 1: (width * col / (k - 1), height * row / (k - 1))
        for row in range(k)
        for col in range(k)
    }


def _settings(cls: type, section: Config | None) -> object:
    if section is None:
        return cls()
    return cls(**{key: section[key] for key in schema_keys(_NAMES[cls])})


_NAMES: dict[type, str] = {
    MediumSettings: 'medium',
    AodvSettings: 'aodv',
    SqAodvSettings: 'sqaodv',
    MdrSettings: 'mdr',
    MetricsSettings: 'metrics',
}


def _check_nodes(
        topology: TopologySpec,
        topology_raw: RawSection,
        nodes: list[tuple[RawSection, NodeSpec]],
        problems: Problems,
) -> set[NodeId] | None:
    if topology.generator == 'grid':
        missing = [
            key for key in ('nodes', 'area')
            if getattr(topology, key) is None
        ]
        if missing:
            problems.extend(
                (topology_raw.line, f'grid topology needs {key!r}')
                for key in missing
            )
            return None
        problem = grid_problem(topology.nodes)  # type: ignore[arg-type]
        if problem is not None:
            problems.append((topology_raw.line_of('nodes'), problem))
            return None
        ids = set(range(1, topology.nodes + 1))  # type: ignore[operator]
        for raw, spec in nodes:
            if spec.node not in ids:
                problems.append(
                    (raw.line, f'node {spec.node} is not part of the grid'),
                )
            for key in ('x', 'y'):
                if getattr(spec, key) is not None:
                    problems.append((
                        raw.line_of(key),
                        f'node {spec.node}: {key!r} is set by the grid',
                    ))
        return ids

    if not nodes:
        problems.append((topology_raw.line, 'inline topology has no nodes'))
        return None
    if topology.nodes is not None and topology.nodes != len(nodes):
        problems.append((
            topology_raw.line_of('nodes'),
            f'nodes = {topology.nodes} but {len(nodes)} [node] section(s)',
        ))
    for raw, spec in nodes:
        for key in ('x', 'y'):
            if getattr(spec, key) is None:
                problems.append(
                    (raw.line, f'node {spec.node}: missing key {key!r}'),
                )
        if topology.area is not None and spec.x is not None and (
                spec.y is not None
        ):
            width, height = topology.area
            if spec.x > width or spec.y > height:
                problems.append((
                    raw.line,
                    f'node {spec.node} at ({format_number(spec.x)},'
                    f' {format_number(spec.y)}) lies outside the'
                    f' {format_area(topology.area)} area',
                ))
    return {spec.node for _, spec in nodes}


def _check_sessions(
        sessions: list[tuple[RawSection, SessionSpec]],
        node_ids: set[NodeId] | None,
        sim_until: float | None,
        problems: Problems,
) -> None:
    flows: dict[FlowKey, RawSection] = {}
    for raw, spec in sessions:
        if node_ids is not None:
            for key in ('src', 'dst'):
                node = getattr(spec, key)
                if node not in node_ids:
                    problems.append((
                        raw.line_of(key),
                        f'session {spec.label}: {key} node {node}'
                        ' does not exist',
                    ))
        if spec.src == spec.dst:
            problems.append((
                raw.line_of('dst'),
                f'session {spec.label}: source and destination are both'
                f' node {spec.src}',
            ))
        first = flows.get(spec.flow)
        if first is not None:
            problems.append((
                raw.line_of('flow_id'),
                f'session {spec.label}: flow {spec.flow} already used by'
                f' session {first.label}',
            ))
        else:
            flows[spec.flow] = raw
        if spec.kind is SessionKind.CBR:
            needed, foreign = 'pkts_per_s', 'rate_kbps'
        else:
            needed, foreign = 'rate_kbps', 'pkts_per_s'
        if getattr(spec, needed) is None:
            problems.append((
                raw.line,
                f'session {spec.label}: {spec.kind.value} sessions need'
                f' {needed!r}',
            ))
        if getattr(spec, foreign) is not None:
            problems.append((
                raw.line_of(foreign),
                f'session {spec.label}: {foreign!r} does not apply to'
                f' {spec.kind.value} sessions',
            ))
        if sim_until is None and spec.packets is None:
            problems.append((
                raw.line_of('packets'),
                f'session {spec.label}: open sessions need a finite'
                ' sim_until',
            ))


def _check_energy(
        config: ScenarioConfig,
        node_ids: set[NodeId],
        node_lines: dict[NodeId, int],
        topology_line: int,
        problems: Problems,
) -> None:
    for node in sorted(node_ids):
        try:
            energy = config.energy_of(node)
        except ScenarioError:
            problems.append((
                node_lines.get(node, topology_line),
                f'node {node} has no energy: set it in its [node] section'
                ' or give the topology an energy distribution',
            ))
            continue
        if not energy.lo > 0:
            problems.append((
                node_lines.get(node, topology_line),
                f'node {node}: initial energy must be positive, got {energy}',
            ))


def parse_config(text: str, source: str = '<config>') -> ScenarioConfig:
    """Validate scenario text, raising ``ScenarioError`` with every problem."""
    raw_sections, problems = read_sections(text)
    singles: dict[str, tuple[RawSection, Config]] = {}
    nodes: list[tuple[RawSection, NodeSpec]] = []
    sessions: list[tuple[RawSection, SessionSpec]] = []
    for raw in raw_sections:
        section, section_problems = validate_section(raw.name, raw.values)
        if raw.name == 'node' and not (
                raw.label.isdigit() and int(raw.label) >= 1  # type: ignore[union-attr]
        ):
            section_problems.append(
                (None, f'node id must be a positive integer, got {raw.label}'),
            )
        if section_problems:
            problems.extend(
                (raw.line_of(key), f'[{raw.title}] {message}')
                for key, message in section_problems
            )
            continue
        if raw.name == 'node':
            nodes.append((raw, NodeSpec(
                node=int(raw.label),  # type: ignore[arg-type]
                x=section['x'],
                y=section['y'],
                energy=section['energy'],
            )))
        elif raw.name == 'session':
            sessions.append((raw, SessionSpec(
                label=raw.label,  # type: ignore[arg-type]
                src=section['src'],
                dst=section['dst'],
                kind=SessionKind(section['kind']),
                flow_id=section['flow_id'],
                pkts_per_s=section['pkts_per_s'],
                rate_kbps=section['rate_kbps'],
                packets=section['packets'],
                start=section['start'],
                duration=section['duration'],
            )))
        else:
            singles[raw.name] = (raw, section)

    present = {raw.name for raw in raw_sections}
    for name in ('scenario', 'topology'):
        if name not in present:
            problems.append((None, f'missing section [{name}]'))

    node_ids: set[NodeId] | None = None
    topology: TopologySpec | None = None
    if 'topology' in singles:
        topology_raw, section = singles['topology']
        topology = TopologySpec(**{
            key: section[key] for key in schema_keys('topology')
        })
        node_ids = _check_nodes(topology, topology_raw, nodes, problems)
    scenario = singles.get('scenario')
    sim_until = scenario[1]['sim_until'] if scenario is not None else 0.0
    _check_sessions(sessions, node_ids, sim_until, problems)

    config: ScenarioConfig | None = None
    if scenario is not None and topology is not None:
        section = scenario[1]
        config = ScenarioConfig(
            name=section['name'],
            protocol=section['protocol'],
            sim_until=section['sim_until'],
            max_time=section['max_time'],
            drain_time=section['drain_time'],
            seeds=section['seeds'],
            topology=topology,
            nodes=tuple(sorted(
                (spec for _, spec in nodes), key=lambda spec: spec.node,
            )),
            sessions=tuple(spec for _, spec in sessions),
            medium=_settings(  # type: ignore[arg-type]
                MediumSettings, singles.get('medium', (None, None))[1],
            ),
            aodv=_settings(  # type: ignore[arg-type]
                AodvSettings, singles.get('aodv', (None, None))[1],
            ),
            sqaodv=_settings(  # type: ignore[arg-type]
                SqAodvSettings, singles.get('sqaodv', (None, None))[1],
            ),
            mdr=_settings(  # type: ignore[arg-type]
                MdrSettings, singles.get('mdr', (None, None))[1],
            ),
            metrics=_settings(  # type: ignore[arg-type]
                MetricsSettings, singles.get('metrics', (None, None))[1],
            ),
        )
        if node_ids is not None:
            _check_energy(
                config,
                node_ids,
                {spec.node: raw.line for raw, spec in nodes},
                singles['topology'][0].line,
                problems,
            )
    if problems or config is None:
        raise ScenarioError(
            sorted(problems, key=lambda p: (p[0] is not None, p[0] or 0)),
            source,
        )
    return config


def format_value(value: object) -> str:
    """Canonical text of a configuration value."""
    if isinstance(value, bool):
        return 'true' if value else 'false'
    if isinstance(value, enum.Enum):
        return str(value.value)
    if isinstance(value, (int, float)):
        return format_number(value)
    return str(value)


def _block(header: str, items: list[tuple[str, object]]) -> list[str]:
    lines = [f'[{header}]']
    lines.extend(
        f'{key} = {format_value(value)}'
        for key, value in items if value is not None
    )
    lines.append('')
    return lines


def _duration_text(duration: SessionDuration) -> str:
    if duration is None:
        return UNKNOWN
    if duration == AUTO:
        return AUTO
    return format_number(duration)  # type: ignore[arg-type]


def print_config(config: ScenarioConfig) -> str:
    """Canonical text of ``config``; :func:`parse_config` reads it back."""
    topology = config.topology
    lines = _block('scenario', [
        ('name', config.name),
        ('protocol', config.protocol),
        (
            'sim_until',
            COMPLETION if config.sim_until is None else config.sim_until,
        ),
        ('max_time', config.max_time),
        ('drain_time', config.drain_time),
        ('seeds', format_seeds(config.seeds)),
    ])
    lines += _block('topology', [
        ('generator', topology.generator),
        ('nodes', topology.nodes),
        ('area', None if topology.area is None else format_area(topology.area)),
        ('comm_range', topology.comm_range),
        ('energy', topology.energy),
        ('endpoint_energy', topology.endpoint_energy),
    ])
    for spec in config.nodes:
        lines += _block(f'node {spec.node}', [
            ('x', spec.x), ('y', spec.y), ('energy', spec.energy),
        ])
    for session in config.sessions:
        lines += _block(f'session {session.label}', [
            ('src', session.src),
            ('dst', session.dst),
            ('flow_id', session.flow_id),
            ('kind', session.kind),
            ('pkts_per_s', session.pkts_per_s),
            ('rate_kbps', session.rate_kbps),
            ('packets', OPEN if session.packets is None else session.packets),
            ('start', session.start),
            ('duration', _duration_text(session.duration)),
        ])
    for name, settings in (
            ('medium', config.medium),
            ('aodv', config.aodv),
            ('sqaodv', config.sqaodv),
            ('mdr', config.mdr),
            ('metrics', config.metrics),
    ):
        lines += _block(name, [
            (f.name, getattr(settings, f.name))
            for f in dataclasses.fields(settings)
        ])
    return '\n'.join(lines)


# bundled scenarios

def _bundled_dir() -> Traversable:
    return resources.files('adhoc_energy_routing') / 'scenarios'


def bundled_scenarios() -> dict[str, Traversable]:
    """Scenario files shipped with the package, by name."""
    return {
        entry.name[:-len(SCENARIO_SUFFIX)]: entry
        for entry in _bundled_dir().iterdir()
        if entry.name.endswith(SCENARIO_SUFFIX)
    }


def list_scenarios(pattern: str = '*') -> list[str]:
    """Names of the bundled scenarios matching a glob ``pattern``."""
    return sorted(
        name for name in bundled_scenarios()
        if fnmatch.fnmatch(name, pattern, flags=MATCH_FLAGS)
    )


def read_scenario_text(name_or_path: str) -> tuple[str, str]:
    """Text and display name of a scenario file or bundled scenario.

    A local file shadows a bundled scenario of the same name.
    """
    bundled = bundled_scenarios()
    if os.path.isfile(name_or_path):
        if name_or_path in bundled:
            logger.warning(
                f"Local file '{name_or_path}' overrides the bundled scenario"
                ' of the same name',
            )
        with open(name_or_path, encoding='utf-8') as f:
            return f.read(), name_or_path
    if name_or_path in bundled:
        return (
            bundled[name_or_path].read_text(encoding='utf-8'),
            f'<bundled:{name_or_path}>',
        )
    raise ScenarioError(
        [(None, 'no such file or bundled scenario')], name_or_path,
    )


def load_scenario(name_or_path: str) -> ScenarioConfig:
    """Read and validate a scenario file or bundled scenario."""
    text, source = read_scenario_text(name_or_path)
    return parse_config(text, source)
