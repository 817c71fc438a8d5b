"""Scenario section schemas.

Every section of a scenario file is validated by a
:class:`mkdocs.config.base.Config` subclass. Values arrive as text from the
scenario reader and are coerced by the option types below; defaults are
already typed, so options accept both.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from typing import TYPE_CHECKING, Any, Union

from mkdocs.config.base import Config, ValidationError
from mkdocs.config.config_options import (
    BaseConfigOption,
    Choice,
    OptionallyRequired,
    Optional,
    Type as MkType,
)

from adhoc_energy_routing.aodv import AodvSettings
from adhoc_energy_routing.mdr import MdrSettings
from adhoc_energy_routing.medium import MediumSettings
from adhoc_energy_routing.metrics import MetricsSettings
from adhoc_energy_routing.sqaodv import SqAodvSettings


if TYPE_CHECKING:  # pragma: no cover
    from adhoc_energy_routing.engine import RngStream


PROTOCOLS = ('aodv', 'sqaodv', 'mdr')
GENERATORS = ('grid', 'inline')
SESSION_KINDS = ('cbr', 'poisson')

COMPLETION = 'completion'
OPEN = 'open'
AUTO = 'auto'
UNKNOWN = 'unknown'

SessionDuration = Union[float, str, None]
"""Seconds, ``'auto'``, or ``None`` when the duration is not announced."""

_UNIFORM_PARTS = 3


def format_number(value: float) -> str:
    """Shortest text that reads back as the same number."""
    if isinstance(value, int) or (
            float(value).is_integer() and abs(value) < 1e15
    ):
        return str(int(value))
    return repr(float(value))


def _to_number(value: Any, *, integer: bool) -> float:
    if isinstance(value, bool):
        raise ValidationError(f'Expected a number, got {value!r}')
    if isinstance(value, (int, float)):
        number = value
    else:
        text = str(value).strip()
        try:
            number = int(text) if integer else float(text)
        except ValueError:
            kind = 'an integer' if integer else 'a number'
            raise ValidationError(
                f'Expected {kind}, got {text!r}',
            ) from None
    if integer:
        if float(number) != int(number):
            raise ValidationError(f'Expected an integer, got {value!r}')
        return int(number)
    if number != number or number in (float('inf'), float('-inf')):
        raise ValidationError(f'Expected a finite number, got {value!r}')
    return float(number)


class Number(OptionallyRequired[float]):
    """Integer or real value with optional bounds."""

    def __init__(  # noqa: D107
            self,
            *,
            integer: bool = False,
            minimum: float | None = None,
            maximum: float | None = None,
            exclusive_minimum: bool = False,
            default: float | None = None,
    ) -> None:
        super().__init__(default=default)
        self.integer = integer
        self.minimum = minimum
        self.maximum = maximum
        self.exclusive_minimum = exclusive_minimum

    def run_validation(self, value: object) -> float:  # noqa: D102
        number = _to_number(value, integer=self.integer)
        if self.minimum is not None:
            if self.exclusive_minimum and not number > self.minimum:
                raise ValidationError(
                    f'Expected a value greater than'
                    f' {format_number(self.minimum)}, got {value}',
                )
            if number < self.minimum:
                raise ValidationError(
                    f'Expected a value of at least'
                    f' {format_number(self.minimum)}, got {value}',
                )
        if self.maximum is not None and number > self.maximum:
            raise ValidationError(
                f'Expected a value of at most {format_number(self.maximum)},'
                f' got {value}',
            )
        return number


def Positive(**kwargs: Any) -> Number:
    """Real value strictly greater than zero."""
    return Number(minimum=0, exclusive_minimum=True, **kwargs)


def Count(minimum: int = 0, **kwargs: Any) -> Number:
    """Integer value of at least ``minimum``."""
    return Number(integer=True, minimum=minimum, **kwargs)


class Flag(OptionallyRequired[bool]):
    """``true`` or ``false``."""

    def run_validation(self, value: object) -> bool:  # noqa: D102
        if isinstance(value, bool):
            return value
        text = str(value).strip().lower()
        if text in ('true', 'yes', 'on', '1'):
            return True
        if text in ('false', 'no', 'off', '0'):
            return False
        raise ValidationError(f'Expected true or false, got {value!r}')


@dataclass(frozen=True)
class Distribution:
    """Constant value or uniform ``[lo, hi]`` draw."""

    lo: float
    hi: float

    @property
    def constant(self) -> bool:  # noqa: D102
        return self.lo == self.hi

    def sample(self, rng: RngStream) -> float:
        """Draw a value; constants still consume one draw of the stream."""
        return rng.draw_uniform(self.lo, self.hi)

    def __str__(self) -> str:
        if self.constant:
            return format_number(self.lo)
        return f'uniform {format_number(self.lo)} {format_number(self.hi)}'


class DistributionOption(OptionallyRequired[Distribution]):
    """``uniform LO HI`` or a single non-negative number."""

    def run_validation(self, value: object) -> Distribution:  # noqa: D102
        if isinstance(value, Distribution):
            return value
        parts = str(value).split()
        if len(parts) == _UNIFORM_PARTS and parts[0] == 'uniform':
            lo = _to_number(parts[1], integer=False)
            hi = _to_number(parts[2], integer=False)
        elif len(parts) == 1:
            lo = hi = _to_number(parts[0], integer=False)
        else:
            raise ValidationError(
                f"Expected 'uniform LO HI' or a number, got {value!r}",
            )
        if lo < 0 or hi < lo:
            raise ValidationError(
                f'Expected 0 <= LO <= HI, got {lo} and {hi}',
            )
        return Distribution(lo, hi)


class Area(OptionallyRequired[tuple]):  # type: ignore[type-arg]
    """Rectangle ``WIDTHxHEIGHT`` in metres."""

    _re = re.compile(r'^\s*([^xX\s]+)\s*[xX]\s*([^xX\s]+)\s*$')

    def run_validation(self, value: object) -> tuple[float, float]:  # noqa: D102
        if isinstance(value, tuple):
            width, height = value
        else:
            match = self._re.match(str(value))
            if match is None:
                raise ValidationError(
                    f"Expected 'WIDTHxHEIGHT', got {value!r}",
                )
            width = _to_number(match.group(1), integer=False)
            height = _to_number(match.group(2), integer=False)
        if not (width > 0 and height > 0):
            raise ValidationError(
                f'Area sides must be positive, got {value!r}',
            )
        return (float(width), float(height))


def format_area(area: tuple[float, float]) -> str:  # noqa: D103
    return f'{format_number(area[0])}x{format_number(area[1])}'


class SeedList(OptionallyRequired[tuple]):  # type: ignore[type-arg]
    """Seeds as ``A..B`` or a comma separated list, without duplicates."""

    def run_validation(self, value: object) -> tuple[int, ...]:  # noqa: D102
        if isinstance(value, tuple):
            seeds = value
        else:
            seeds = parse_seeds(str(value))
        if not seeds:
            raise ValidationError('At least one seed is required')
        duplicates = sorted({s for s in seeds if seeds.count(s) > 1})
        if duplicates:
            raise ValidationError(
                'Duplicate seed(s): '
                + ', '.join(str(s) for s in duplicates),
            )
        return tuple(seeds)


def parse_seeds(text: str) -> tuple[int, ...]:
    """Read ``A..B`` or ``A,B,C``; raises ``ValidationError``."""
    seeds: list[int] = []
    for part in text.split(','):
        part = part.strip()
        first, sep, last = part.partition('..')
        try:
            if sep:
                lo, hi = int(first), int(last)
                if hi < lo:
                    raise ValidationError(f'Empty seed range {part!r}')
                seeds.extend(range(lo, hi + 1))
            else:
                seeds.append(int(part))
        except ValueError:
            raise ValidationError(f'Invalid seed {part!r}') from None
    if any(seed < 0 for seed in seeds):
        raise ValidationError('Seeds must be non-negative')
    return tuple(seeds)


def format_seeds(seeds: tuple[int, ...]) -> str:
    """``A..B`` for a contiguous run, a comma list otherwise."""
    if len(seeds) > 1 and list(seeds) == list(
            range(seeds[0], seeds[0] + len(seeds)),
    ):
        return f'{seeds[0]}..{seeds[-1]}'
    return ','.join(str(seed) for seed in seeds)


class Horizon(OptionallyRequired[Union[float, None]]):
    """Seconds to simulate, or ``completion`` (``None``)."""

    def run_validation(self, value: object) -> float | None:  # noqa: D102
        if str(value).strip() == COMPLETION:
            return None
        number = _to_number(value, integer=False)
        if not number > 0:
            raise ValidationError(
                f'Expected a positive time or {COMPLETION!r}, got {value}',
            )
        return number


class PacketCount(OptionallyRequired[Union[int, None]]):
    """Packets of a session, or ``open`` (``None``)."""

    def run_validation(self, value: object) -> int | None:  # noqa: D102
        if str(value).strip() == OPEN:
            return None
        count = int(_to_number(value, integer=True))
        if count < 1:
            raise ValidationError(
                f'Expected at least one packet or {OPEN!r}, got {value}',
            )
        return count


class DurationOption(OptionallyRequired[SessionDuration]):
    """``auto``, ``unknown`` (``None``) or seconds."""

    def run_validation(self, value: object) -> SessionDuration:  # noqa: D102
        text = str(value).strip()
        if text == AUTO:
            return AUTO
        if text == UNKNOWN:
            return None
        number = _to_number(value, integer=False)
        if number < 0:
            raise ValidationError(
                f'Expected a non-negative duration, got {value}',
            )
        return number


class ScenarioSection(Config):  # noqa: D101
    name = MkType(str)
    protocol = Choice(PROTOCOLS, default='aodv')
    sim_until = Horizon()
    max_time = Positive(default=20000.0)
    drain_time = Number(minimum=0, default=5.0)
    seeds = SeedList(default=(1,))


class TopologySection(Config):  # noqa: D101
    generator = Choice(GENERATORS, default='inline')
    nodes = Optional(Count(minimum=1))
    area = Optional(Area())
    comm_range = Positive(default=250.0)
    energy = Optional(DistributionOption())
    endpoint_energy = Optional(DistributionOption())


class NodeSection(Config):  # noqa: D101
    x = Optional(Number(minimum=0))
    y = Optional(Number(minimum=0))
    energy = Optional(Positive())


class SessionSection(Config):  # noqa: D101
    src = Count(minimum=1)
    dst = Count(minimum=1)
    flow_id = Count(default=0)
    kind = Choice(SESSION_KINDS)
    pkts_per_s = Optional(Positive())
    rate_kbps = Optional(Positive())
    packets = PacketCount(default=OPEN)
    start = DistributionOption(default=Distribution(0.0, 0.0))
    duration = DurationOption(default=AUTO)


_medium = MediumSettings()
_aodv = AodvSettings()
_sqaodv = SqAodvSettings()
_mdr = MdrSettings()
_metrics = MetricsSettings()


class MediumSection(Config):  # noqa: D101
    rate_bps = Positive(default=_medium.rate_bps)
    queue_capacity = Count(minimum=1, default=_medium.queue_capacity)
    tx_power_w = Number(minimum=0, default=_medium.tx_power_w)
    rx_power_w = Number(minimum=0, default=_medium.rx_power_w)
    data_header_bytes = Count(default=_medium.data_header_bytes)
    payload_bytes = Count(minimum=1, default=_medium.payload_bytes)


class AodvSection(Config):  # noqa: D101
    rreq_retries = Count(default=_aodv.rreq_retries)
    rreq_timeout = Positive(default=_aodv.rreq_timeout)
    active_route_timeout = Positive(default=_aodv.active_route_timeout)
    reverse_route_lifetime = Positive(default=_aodv.reverse_route_lifetime)
    local_repair_max_hops = Count(default=_aodv.local_repair_max_hops)
    rreq_jitter = Number(minimum=0, default=_aodv.rreq_jitter)
    hello_interval = Number(minimum=0, default=_aodv.hello_interval)
    allowed_hello_loss = Count(minimum=1, default=_aodv.allowed_hello_loss)
    discovery_buffer = Count(minimum=1, default=_aodv.discovery_buffer)


class SqAodvSection(Config):  # noqa: D101
    alpha = Positive(maximum=1, default=_sqaodv.alpha)
    sample_interval = Positive(default=_sqaodv.sample_interval)
    rcr_interval = Positive(default=_sqaodv.rcr_interval)
    admission_horizon = Number(minimum=0, default=_sqaodv.admission_horizon)
    alarm_horizon = Number(minimum=0, default=_sqaodv.alarm_horizon)
    dest_wait = Number(minimum=0, default=_sqaodv.dest_wait)
    dest_max_candidates = Count(
        minimum=1, default=_sqaodv.dest_max_candidates,
    )
    rcr_max_attempts = Count(minimum=1, default=_sqaodv.rcr_max_attempts)


class MdrSection(Config):  # noqa: D101
    alpha = Positive(maximum=1, default=_mdr.alpha)
    sample_interval = Positive(default=_mdr.sample_interval)
    refresh_period = Positive(default=_mdr.refresh_period)
    dest_wait = Number(minimum=0, default=_mdr.dest_wait)
    dest_max_candidates = Count(minimum=1, default=_mdr.dest_max_candidates)


class MetricsSection(Config):  # noqa: D101
    strict_pdr = Flag(default=_metrics.strict_pdr)
    net_step = Positive(default=_metrics.net_step)


SECTIONS: dict[str, type[Config]] = {
    'scenario': ScenarioSection,
    'topology': TopologySection,
    'node': NodeSection,
    'session': SessionSection,
    'medium': MediumSection,
    'aodv': AodvSection,
    'sqaodv': SqAodvSection,
    'mdr': MdrSection,
    'metrics': MetricsSection,
}
"""Schema of each section, in canonical output order."""

LABELLED_SECTIONS = frozenset(('node', 'session'))


def validate_section(
        name: str,
        values: dict[str, str],
) -> tuple[Config, list[tuple[str | None, str]]]:
    """Validate the raw values of one section.

    Returns the validated section and ``(key, message)`` problems, ``key``
    being ``None`` for problems of the section as a whole. Unknown keys are
    problems, not warnings.
    """
    section = SECTIONS[name]()
    section.load_dict(dict(values))
    failed, warnings = section.validate()
    problems: list[tuple[str | None, str]] = []
    for key, error in failed:
        if key in values:
            problems.append((key, f'{key}: {error}'))
        else:
            problems.append((None, f'missing key {key!r}: {error}'))
    for key, message in warnings:
        if key not in schema_keys(name):
            problems.append((key, f'unknown key {key!r} in [{name}]'))
        else:
            problems.append((key, f'{key}: {message}'))
    return section, problems


def schema_keys(name: str) -> tuple[str, ...]:
    """Keys of a section in declaration order."""
    return tuple(
        key for key, value in vars(SECTIONS[name]).items()
        if isinstance(value, BaseConfigOption)
    )
