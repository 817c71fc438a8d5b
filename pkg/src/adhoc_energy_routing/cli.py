"""Command line interface."""

from __future__ import annotations

import logging
import os
import sys

import click
from mkdocs.config.base import ValidationError
from wcmatch import glob

from adhoc_energy_routing.batch import run_batch
from adhoc_energy_routing.cache import initialize_cache
from adhoc_energy_routing.config import (
    PROTOCOLS,
    Area,
    Distribution,
    DistributionOption,
    format_number,
    parse_seeds,
)
from adhoc_energy_routing.exceptions import ScenarioError
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.scenario import (
    NodeSpec,
    ScenarioConfig,
    TopologySpec,
    gen_grid,
    list_scenarios,
    parse_config,
    print_config,
    read_scenario_text,
)
from adhoc_energy_routing.simulation import run_scenario
from adhoc_energy_routing.trace import validate_trace


GLOB_FLAGS = glob.GLOBSTAR | glob.BRACE | glob.EXTGLOB


def _configure_logging(verbose: bool, quiet: bool) -> None:  # noqa: FBT001
    level = logging.DEBUG if verbose else (
        logging.WARNING if quiet else logging.INFO
    )
    logger.setLevel(level)
    for handler in logger.handlers:
        if getattr(handler, '_adhoc_cli', False):
            # stderr may have been swapped since the last invocation
            handler.stream = sys.stderr  # type: ignore[attr-defined]
            return
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter('%(levelname)s: %(message)s'))
    handler._adhoc_cli = True  # type: ignore[attr-defined]
    logger.addHandler(handler)


def _seeds(
        ctx: click.Context,  # noqa: ARG001
        param: click.Parameter,  # noqa: ARG001
        value: str | None,
) -> tuple[int, ...] | None:
    if value is None:
        return None
    try:
        return parse_seeds(value)
    except ValidationError as exc:
        raise click.BadParameter(str(exc)) from None


def _option_value(
        option: object,
        value: str,
) -> object:
    try:
        return option.run_validation(value)  # type: ignore[attr-defined]
    except ValidationError as exc:
        raise click.BadParameter(str(exc)) from None


config_option = click.option(
    '--config', '-c', 'config_name', required=True,
    help='Scenario file, or the name of a bundled scenario.',
)
protocol_option = click.option(
    '--protocol', '-p', type=click.Choice(PROTOCOLS),
    help='Routing protocol; defaults to the one of the scenario.',
)


@click.group()
@click.option('--verbose', '-v', is_flag=True, help='Log protocol decisions.')
@click.option('--quiet', '-q', is_flag=True, help='Only log warnings.')
@click.version_option(package_name='adhoc-energy-routing')
def main(verbose: bool, quiet: bool) -> None:  # noqa: FBT001
    """Energy-aware ad hoc routing simulator."""
    _configure_logging(verbose, quiet)


@main.command()
@config_option
@protocol_option
@click.option('--seed', '-s', type=int, help='Defaults to the first seed.')
@click.option(
    '--rate-kbps', type=float,
    help='Rate of every Poisson session, in Kbps.',
)
@click.option(
    '--trace', 'trace_path', type=click.Path(dir_okay=False),
    help='Write the event trace to this file.',
)
@click.option(
    '--report', 'report_path', type=click.Path(dir_okay=False),
    help='Write the report to this file instead of standard output.',
)
def run(  # noqa: PLR0913
        config_name: str,
        protocol: str | None,
        seed: int | None,
        rate_kbps: float | None,
        trace_path: str | None,
        report_path: str | None,
) -> None:
    """Run one scenario with one seed."""
    text, source = read_scenario_text(config_name)
    config = parse_config(text, source)
    seed = config.seeds[0] if seed is None else seed
    if trace_path is None:
        result = run_scenario(
            config, seed, protocol=protocol, rate_kbps=rate_kbps,
        )
    else:
        with open(trace_path, 'w', encoding='utf-8') as trace:
            result = run_scenario(
                config, seed,
                protocol=protocol, rate_kbps=rate_kbps, trace=trace,
            )
    if report_path is None:
        click.echo(result.report, nl=False)
    else:
        with open(report_path, 'w', encoding='utf-8') as f:
            f.write(result.report)


@main.command()
@config_option
@protocol_option
@click.option(
    '--seeds', callback=_seeds,
    help="'A..B' or a comma separated list; defaults to the scenario seeds.",
)
@click.option(
    '--out', '-o', 'out_dir', required=True,
    type=click.Path(file_okay=False),
    help='Directory receiving per-seed reports and summary.csv.',
)
@click.option(
    '--rate-kbps', type=float, multiple=True,
    help='Poisson session rate; repeat for a load sweep.',
)
@click.option('--jobs', '-j', type=click.IntRange(min=1), default=1)
@click.option(
    '--cache', 'cache_seconds', type=click.IntRange(min=0), default=0,
    help='Reuse reports younger than this many seconds.',
)
@click.option('--cache-dir', default='', help='Where cached reports live.')
def batch(  # noqa: PLR0913
        config_name: str,
        protocol: str | None,
        seeds: tuple[int, ...] | None,
        out_dir: str,
        rate_kbps: tuple[float, ...],
        jobs: int,
        cache_seconds: int,
        cache_dir: str,
) -> None:
    """Run one scenario over many seeds and summarize."""
    text, source = read_scenario_text(config_name)
    config = parse_config(text, source)
    cache = None
    if cache_seconds:
        cache = initialize_cache(cache_seconds, cache_dir)
        if cache is None:
            logger.warning(
                'No cache directory: pass --cache-dir or install platformdirs',
            )
    rates: tuple[float | None, ...] = rate_kbps or (None,)
    for rate in rates:
        target = out_dir if len(rates) == 1 else os.path.join(
            out_dir, f'rate-{format_number(rate)}',  # type: ignore[arg-type]
        )
        run_batch(
            text,
            source,
            seeds or config.seeds,
            target,
            protocol=protocol,
            rate_kbps=rate,
            jobs=jobs,
            cache=cache,
        )


@main.command('gen-grid')
@click.option('--n', 'n', type=int, required=True, help='Number of nodes.')
@click.option('--area', required=True, help="Area as 'WIDTHxHEIGHT'.")
@click.option('--out', '-o', 'out_path', type=click.Path(dir_okay=False))
@click.option('--name', default=None, help='Scenario name.')
@click.option('--comm-range', type=float, default=250.0)
@click.option(
    '--energy', default='uniform 25 100',
    help="Initial energy, 'uniform LO HI' or a constant.",
)
def gen_grid_command(  # noqa: PLR0913
        n: int,
        area: str,
        out_path: str | None,
        name: str | None,
        comm_range: float,
        energy: str,
) -> None:
    """Write an inline scenario with a square grid of nodes."""
    size: tuple[float, float] = _option_value(Area(), area)  # type: ignore[assignment]
    distribution: Distribution = _option_value(  # type: ignore[assignment]
        DistributionOption(), energy,
    )
    positions = gen_grid(n, size)
    config = ScenarioConfig(
        name=name or f'grid-{n}',
        topology=TopologySpec(
            generator='inline',
            nodes=n,
            area=size,
            comm_range=comm_range,
            energy=distribution,
        ),
        nodes=tuple(
            NodeSpec(node, x, y) for node, (x, y) in sorted(positions.items())
        ),
    )
    text = print_config(config)
    if out_path is None:
        click.echo(text, nl=False)
    else:
        with open(out_path, 'w', encoding='utf-8') as f:
            f.write(text)
        logger.info(f'Wrote {n} nodes to {out_path}')


@main.command('validate-trace')
@click.argument('patterns', nargs=-1, required=True)
@click.pass_context
def validate_trace_command(
        ctx: click.Context,
        patterns: tuple[str, ...],
) -> None:
    """Check trace files against the trace grammar."""
    paths: list[str] = []
    for pattern in patterns:
        if os.path.isfile(pattern):
            paths.append(pattern)
            continue
        matched = sorted(glob.glob(pattern, flags=GLOB_FLAGS))
        if not matched:
            raise click.BadParameter(
                f'no trace file matches {pattern!r}', param_hint='PATTERNS',
            )
        paths.extend(matched)
    failed = 0
    for path in paths:
        with open(path, encoding='utf-8') as f:
            problems = validate_trace(f)
        for lineno, message in problems:
            click.echo(f'{path}:{lineno}: {message}', err=True)
        if problems:
            failed += 1
        else:
            logger.info(f'{path}: ok')
    if failed:
        ctx.exit(1)


@main.command('list-scenarios')
@click.argument('pattern', default='*')
def list_scenarios_command(pattern: str) -> None:
    """List the bundled scenarios matching PATTERN."""
    for name in list_scenarios(pattern):
        click.echo(name)


@main.command('print-config')
@config_option
def print_config_command(config_name: str) -> None:
    """Print a scenario in canonical form."""
    text, source = read_scenario_text(config_name)
    try:
        click.echo(print_config(parse_config(text, source)), nl=False)
    except ScenarioError:
        logger.debug(f'{source} is invalid')
        raise
