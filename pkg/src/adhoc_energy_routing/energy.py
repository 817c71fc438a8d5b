"""Node battery: residual energy, drain-rate sampling and lifetime."""

from __future__ import annotations

from dataclasses import dataclass

from adhoc_energy_routing.engine import SimTime
from adhoc_energy_routing.exceptions import ContractViolation


AEDR_FLOOR = 1e-9
"""Drain rate (W) below which lifetime is reported as ``LIFETIME_CAP``."""

LIFETIME_CAP = 1e9
"""Lifetime (s) reported for nodes that have not drained yet."""

SAMPLE_TOLERANCE = 1e-9


@dataclass
class Battery:
    """Energy store of a node with an exponentially averaged drain rate.

    ``aedr_w`` starts at 0 and only moves at sampling instants.
    """

    initial_j: float
    alpha: float = 0.5
    sample_interval_s: float = 1.0
    admission_horizon_s: float = 5.0
    alarm_horizon_s: float = 1.0

    def __post_init__(self) -> None:  # noqa: D105
        if not self.initial_j > 0:
            raise ContractViolation(
                f'Initial energy must be positive, got {self.initial_j}',
            )
        if not 0 < self.alpha <= 1:
            raise ContractViolation(
                f'alpha must be in (0, 1], got {self.alpha}',
            )
        if not self.sample_interval_s > 0:
            raise ContractViolation(
                'Sampling interval must be positive,'
                f' got {self.sample_interval_s}',
            )
        self.residual_j = self.initial_j
        self.aedr_w = 0.0
        self.last_sample_energy_j = self.initial_j
        self.last_sample_time: SimTime = 0.0
        self.debited_j = 0.0

    @property
    def alive(self) -> bool:  # noqa: D102
        return self.residual_j > 0

    def debit(self, joules: float, now: SimTime) -> bool:  # noqa: ARG002
        """Consume energy; return ``False`` once the node has died.

        The final debit is clamped to the residual, so the recorded debits
        always add up to ``initial_j - residual_j``.
        """
        if joules < 0:
            raise ContractViolation(f'Negative energy debit: {joules}')
        applied = min(joules, self.residual_j)
        self.residual_j -= applied
        self.debited_j += applied
        if joules > applied or self.residual_j <= 0:
            self.residual_j = 0.0
            return False
        return True

    def sample_edr(self, now: SimTime) -> float:
        """Energy drain rate over the last sampling interval, in watts.

        At least one ``sample_interval_s`` must have passed since the
        previous sample.
        """
        elapsed = now - self.last_sample_time
        if not elapsed > 0:
            raise ContractViolation(
                f'EDR sampled over a non-positive interval ({elapsed} s)',
            )
        # periodic timers accumulate rounding error
        if elapsed < self.sample_interval_s * (1 - SAMPLE_TOLERANCE):
            raise ContractViolation(
                f'EDR sampled {elapsed} s after the previous sample,'
                f' before the {self.sample_interval_s} s interval elapsed',
            )
        edr = (self.last_sample_energy_j - self.residual_j) / elapsed
        self.last_sample_energy_j = self.residual_j
        self.last_sample_time = now
        return edr

    def update_aedr(self, edr_w: float) -> float:
        """Fold an EDR sample into the exponential average."""
        if edr_w < 0:
            raise ContractViolation(f'Negative drain rate sample: {edr_w}')
        self.aedr_w = self.alpha * edr_w + (1 - self.alpha) * self.aedr_w
        return self.aedr_w

    def sample(self, now: SimTime) -> float:
        """Take one periodic sample and return the new AEDR."""
        return self.update_aedr(self.sample_edr(now))

    def lifetime(self) -> float:
        """Predicted remaining lifetime in seconds at the current AEDR."""
        return min(self.residual_j / max(self.aedr_w, AEDR_FLOOR), LIFETIME_CAP)

    def threshold1(self) -> float:
        """Energy needed to survive the admission horizon (5 s)."""
        return self.admission_horizon_s * self.aedr_w

    def threshold2(self) -> float:
        """Energy needed to survive the alarm horizon (1 s)."""
        return self.alarm_horizon_s * self.aedr_w
