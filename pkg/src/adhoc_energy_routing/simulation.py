"""Single simulation run."""

from __future__ import annotations

import dataclasses
from dataclasses import dataclass
from typing import TYPE_CHECKING

from adhoc_energy_routing.aodv import AodvAgent, RoutingContext
from adhoc_energy_routing.config import AUTO, PROTOCOLS
from adhoc_energy_routing.energy import Battery
from adhoc_energy_routing.engine import RngStreams, Scheduler, format_time
from adhoc_energy_routing.exceptions import ScenarioError
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.mdr import MdrAgent
from adhoc_energy_routing.medium import Medium, Topology
from adhoc_energy_routing.metrics import MetricsLedger, format_report
from adhoc_energy_routing.sqaodv import SqAodvAgent
from adhoc_energy_routing.trace import Tracer
from adhoc_energy_routing.traffic import (
    Session,
    SessionRunner,
    network_load,
)


if TYPE_CHECKING:  # pragma: no cover
    from typing import TextIO

    from adhoc_energy_routing.engine import SimTime
    from adhoc_energy_routing.packets import NodeId
    from adhoc_energy_routing.scenario import ScenarioConfig, SessionSpec


COMPLETION_STEP = 1.0
"""Seconds simulated between two checks for session completion."""


@dataclass
class RunResult:
    """Everything a finished run leaves behind."""

    config: ScenarioConfig
    protocol: str
    seed: int
    horizon: SimTime
    report: str
    ledger: MetricsLedger
    scheduler: Scheduler
    medium: Medium
    batteries: dict[NodeId, Battery]
    agents: dict[NodeId, AodvAgent]
    runners: list[SessionRunner]


class Simulation:
    """A scenario instantiated for one protocol and one seed.

    Initial energies are the first draw of each node stream; session start
    times are the first draw of each session stream.
    """

    def __init__(  # noqa: D107, PLR0913
            self,
            config: ScenarioConfig,
            seed: int,
            *,
            protocol: str | None = None,
            rate_kbps: float | None = None,
            trace: TextIO | None = None,
            keep_log: bool = False,
    ) -> None:
        protocol = protocol or config.protocol
        if protocol not in PROTOCOLS:
            raise ScenarioError(
                [(None, f'unknown protocol {protocol!r}')], config.name,
            )
        if rate_kbps is not None:
            config = config.with_rate(rate_kbps)
        self.config = config
        self.protocol = protocol
        self.seed = seed
        self.horizon: SimTime = (
            config.max_time if config.sim_until is None else config.sim_until
        )
        self.streams = RngStreams(seed)
        self.scheduler = Scheduler(keep_log=keep_log)
        self.tracer = Tracer(trace)
        self.topology = Topology(
            config.positions(),
            config.topology.comm_range,
            config.topology.area,
        )
        self.ledger = MetricsLedger(node_count=len(self.topology.nodes))
        self.batteries = {
            node: self._battery(node) for node in self.topology.nodes
        }
        self.medium = Medium(
            self.scheduler,
            self.topology,
            self.batteries,
            self.ledger,
            self.tracer,
            config.medium,
        )
        self.ctx = RoutingContext(
            self.scheduler, self.medium, self.ledger, self.tracer,
        )
        self.agents = {node: self._agent(node) for node in self.topology.nodes}
        for node, agent in self.agents.items():
            self.medium.attach(node, agent)
        self.runners = [self._runner(spec) for spec in config.sessions]

    def _battery(self, node: NodeId) -> Battery:
        initial = self.config.energy_of(node).sample(self.streams.node(node))
        if self.protocol == 'sqaodv':
            sq = self.config.sqaodv
            return Battery(
                initial,
                alpha=sq.alpha,
                sample_interval_s=sq.sample_interval,
                admission_horizon_s=sq.admission_horizon,
                alarm_horizon_s=sq.alarm_horizon,
            )
        if self.protocol == 'mdr':
            mdr = self.config.mdr
            return Battery(
                initial,
                alpha=mdr.alpha,
                sample_interval_s=mdr.sample_interval,
            )
        return Battery(initial)

    def _agent(self, node: NodeId) -> AodvAgent:
        battery = self.batteries[node]
        rng = self.streams.node(node)
        if self.protocol == 'sqaodv':
            return SqAodvAgent(
                node, self.ctx, battery, rng,
                self.config.aodv, self.config.sqaodv,
            )
        if self.protocol == 'mdr':
            return MdrAgent(
                node, self.ctx, battery, rng,
                self.config.aodv, self.config.mdr,
            )
        return AodvAgent(node, self.ctx, battery, rng, self.config.aodv)

    def _runner(self, spec: SessionSpec) -> SessionRunner:
        rng = self.streams.session(spec.label)
        session = Session(
            flow=spec.flow,
            kind=spec.kind,
            start=spec.start.sample(rng),
            pkts_per_s=spec.pkts_per_s,
            rate_bps=(
                None if spec.rate_kbps is None else spec.rate_kbps * 1000
            ),
            packet_count=spec.packets,
            payload_bytes=self.config.medium.payload_bytes,
        )
        if spec.duration == AUTO:
            declared = session.expected_duration(self.horizon)
        else:
            declared = spec.duration  # type: ignore[assignment]
        return SessionRunner(
            dataclasses.replace(session, declared_duration=declared),
            self.agents[spec.src],
            self.ctx,
            rng,
            self.horizon,
            self.config.medium.data_header_bytes,
        )

    @property
    def load(self) -> float:
        """Offered load as a fraction of full network load."""
        return network_load([runner.session for runner in self.runners])

    def run(self) -> RunResult:
        """Simulate up to the horizon and build the report."""
        config = self.config
        logger.info(
            f"Running '{config.name}' with {self.protocol}, seed {self.seed}"
            f' ({len(self.topology.nodes)} nodes,'
            f' {len(self.runners)} session(s))',
        )
        if not self.topology.is_connected():
            logger.warning(
                f"Topology of '{config.name}' is not connected at range"
                f' {config.topology.comm_range} m',
            )
        for agent in self.agents.values():
            agent.start()
        for runner in self.runners:
            runner.begin()
        if config.sim_until is not None:
            self.scheduler.run_until(config.sim_until)
        else:
            self._run_to_completion()
        horizon = self.scheduler.now
        self.ledger.finalize()
        header = {
            'scenario': config.name,
            'protocol': self.protocol,
            'seed': str(self.seed),
            'load': f'{self.load:.6f}',
            'horizon': format_time(horizon),
        }
        report = format_report(
            self.ledger,
            header,
            horizon,
            strict_pdr=config.metrics.strict_pdr,
            net_step=config.metrics.net_step,
        )
        logger.info(
            f"Finished '{config.name}' seed {self.seed} at"
            f' {horizon:.3f} s: {self.ledger.delivered} of'
            f' {self.ledger.injected} packet(s) delivered,'
            f' {self.scheduler.dispatched} event(s)',
        )
        return RunResult(
            config=config,
            protocol=self.protocol,
            seed=self.seed,
            horizon=horizon,
            report=report,
            ledger=self.ledger,
            scheduler=self.scheduler,
            medium=self.medium,
            batteries=self.batteries,
            agents=self.agents,
            runners=self.runners,
        )

    def _run_to_completion(self) -> None:
        max_time = self.config.max_time
        scheduler = self.scheduler
        while scheduler.now < max_time and not all(
                runner.finished for runner in self.runners
        ):
            scheduler.run_until(min(scheduler.now + COMPLETION_STEP, max_time))
        scheduler.run_until(
            min(scheduler.now + self.config.drain_time, max_time),
        )


def run_scenario(  # noqa: PLR0913
        config: ScenarioConfig,
        seed: int,
        *,
        protocol: str | None = None,
        rate_kbps: float | None = None,
        trace: TextIO | None = None,
        keep_log: bool = False,
) -> RunResult:
    """Build and run a :class:`Simulation`."""
    return Simulation(
        config,
        seed,
        protocol=protocol,
        rate_kbps=rate_kbps,
        trace=trace,
        keep_log=keep_log,
    ).run()
