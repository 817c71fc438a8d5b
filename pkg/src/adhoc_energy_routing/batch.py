"""Multi-seed runs and their aggregation."""

from __future__ import annotations

import csv
import functools
import os
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from typing import TYPE_CHECKING

import numpy as np

from adhoc_energy_routing.config import format_number
from adhoc_energy_routing.exceptions import BatchError, ContractViolation
from adhoc_energy_routing.logger import logger
from adhoc_energy_routing.metrics import (
    REPORT_DECIMALS,
    REPORT_METRICS,
    parse_report,
    report_value,
)
from adhoc_energy_routing.scenario import parse_config
from adhoc_energy_routing.simulation import run_scenario


if TYPE_CHECKING:  # pragma: no cover
    from collections.abc import Callable, Iterable

    from adhoc_energy_routing.cache import ReportCache


SUMMARY_COLUMNS = REPORT_METRICS + (
    'injected',
    'delivered',
    'dropped',
    'routing_tx',
    'energy_rejects',
    'alive_end',
)
SUMMARY_FILE = 'summary.csv'
OK = 'ok'


def run_seed(
        config_text: str,
        source: str,
        protocol: str | None,
        seed: int,
        rate_kbps: float | None = None,
) -> str:
    """Report of one seed; runs in worker processes."""
    config = parse_config(config_text, source)
    return run_scenario(
        config, seed, protocol=protocol, rate_kbps=rate_kbps,
    ).report


@dataclass
class BatchResult:
    """Per-seed reports of a batch and their statistics."""

    protocol: str
    rate_kbps: float | None
    reports: dict[int, str] = field(default_factory=dict)
    statuses: dict[int, str] = field(default_factory=dict)
    cached: set[int] = field(default_factory=set)

    def values(self, column: str) -> dict[int, float | None]:
        """Value of ``column`` in every successful seed."""
        return {
            seed: report_value(parse_report(report), column)
            for seed, report in sorted(self.reports.items())
        }

    def mean(self, column: str) -> float | None:
        """Arithmetic mean over the seeds where ``column`` is defined."""
        present = [v for v in self.values(column).values() if v is not None]
        if not present:
            return None
        return float(np.mean(present))

    def std(self, column: str) -> float | None:
        """Sample standard deviation; undefined below two values."""
        present = [v for v in self.values(column).values() if v is not None]
        if len(present) < 2:
            return None
        return float(np.std(present, ddof=1))

    @property
    def failed(self) -> dict[int, str]:  # noqa: D102
        return {s: st for s, st in self.statuses.items() if st != OK}


def check_seeds(seeds: Iterable[int]) -> list[int]:
    """Seeds as a list, rejecting duplicates and empty batches."""
    seed_list = list(seeds)
    if not seed_list:
        raise ContractViolation('A batch needs at least one seed')
    duplicates = sorted({s for s in seed_list if seed_list.count(s) > 1})
    if duplicates:
        raise ContractViolation(
            'Duplicate seed(s) in batch: '
            + ', '.join(str(s) for s in duplicates),
        )
    return seed_list


def _cell(value: float | None) -> str:
    return 'absent' if value is None else f'{value:.{REPORT_DECIMALS}f}'


def write_summary(result: BatchResult, path: str) -> None:
    """Per-seed rows followed by the ``mean`` and ``std`` rows."""
    with open(path, 'w', encoding='utf-8', newline='') as f:
        writer = csv.writer(f, lineterminator='\n')
        writer.writerow(('seed',) + SUMMARY_COLUMNS)
        columns = {column: result.values(column) for column in SUMMARY_COLUMNS}
        for seed in sorted(result.reports):
            writer.writerow(
                (str(seed),)
                + tuple(_cell(columns[c][seed]) for c in SUMMARY_COLUMNS),
            )
        writer.writerow(
            ('mean',) + tuple(_cell(result.mean(c)) for c in SUMMARY_COLUMNS),
        )
        writer.writerow(
            ('std',) + tuple(_cell(result.std(c)) for c in SUMMARY_COLUMNS),
        )


def run_batch(  # noqa: PLR0913
        config_text: str,
        source: str,
        seeds: Iterable[int],
        out_dir: str,
        *,
        protocol: str | None = None,
        rate_kbps: float | None = None,
        jobs: int = 1,
        cache: ReportCache | None = None,
) -> BatchResult:
    """Run every seed, write their reports and the summary to ``out_dir``.

    Raises:
        BatchError: At least one seed failed. Reports of the seeds that
            succeeded are written anyway.
    """
    seed_list = check_seeds(seeds)
    config = parse_config(config_text, source)
    result = BatchResult(protocol or config.protocol, rate_kbps)

    todo: list[int] = []
    for seed in seed_list:
        if cache is not None:
            key = cache.run_key(config_text, result.protocol, seed, rate_kbps)
            report = cache.get_(key)
            if report is not None:
                logger.info(f'Seed {seed}: report found in cache')
                result.reports[seed] = report
                result.statuses[seed] = OK
                result.cached.add(seed)
                continue
        todo.append(seed)

    args = (config_text, source, result.protocol)
    if jobs > 1 and len(todo) > 1:
        with ProcessPoolExecutor(max_workers=jobs) as pool:
            futures = {
                seed: pool.submit(run_seed, *args, seed, rate_kbps)
                for seed in todo
            }
            for seed, future in futures.items():
                _collect(result, seed, future.result, cache, config_text)
    else:
        for seed in todo:
            _collect(
                result,
                seed,
                functools.partial(run_seed, *args, seed, rate_kbps),
                cache,
                config_text,
            )

    os.makedirs(out_dir, exist_ok=True)
    for seed, report in sorted(result.reports.items()):
        path = os.path.join(out_dir, f'seed-{seed}.txt')
        with open(path, 'w', encoding='utf-8') as f:
            f.write(report)
    write_summary(result, os.path.join(out_dir, SUMMARY_FILE))
    rate = '' if rate_kbps is None else f' at {format_number(rate_kbps)} Kbps'
    logger.info(
        f'Batch of {len(seed_list)} seed(s){rate} written to {out_dir}'
        f' ({len(result.cached)} from cache, {len(result.failed)} failed)',
    )
    if result.failed:
        raise BatchError(dict(sorted(result.statuses.items())))
    return result


def _collect(
        result: BatchResult,
        seed: int,
        compute: Callable[[], str],
        cache: ReportCache | None,
        config_text: str,
) -> None:
    try:
        report = compute()
    except Exception as exc:  # noqa: BLE001
        logger.error(f'Seed {seed} failed: {exc}')
        result.statuses[seed] = f'{type(exc).__name__}: {exc}'
        return
    result.reports[seed] = report
    result.statuses[seed] = OK
    logger.info(f'Seed {seed} done')
    if cache is not None:
        cache.set_(
            cache.run_key(config_text, result.protocol, seed, result.rate_kbps),
            report,
        )
