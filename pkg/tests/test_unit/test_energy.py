"""Battery, drain rate and lifetime tests."""

import pytest

from adhoc_energy_routing.energy import AEDR_FLOOR, LIFETIME_CAP, Battery
from adhoc_energy_routing.exceptions import ContractViolation


def battery_with(residual=None, aedr=0.0, **kwargs):
    battery = Battery(kwargs.pop('initial_j', 100.0), **kwargs)
    if residual is not None:
        battery.residual_j = residual
    battery.aedr_w = aedr
    return battery


@pytest.mark.parametrize(
    ('residual', 'joules', 'expected_residual', 'expected_alive'),
    (
        pytest.param(1.0, 0.4, 0.6, True, id='partial'),
        pytest.param(0.1, 0.2, 0.0, False, id='clamped'),
        pytest.param(1.0, 0.0, 1.0, True, id='zero'),
    ),
)
def test_debit(residual, joules, expected_residual, expected_alive):
    battery = Battery(residual)
    assert battery.debit(joules, 0.0) is expected_alive
    assert battery.residual_j == pytest.approx(expected_residual, rel=1e-12)
    assert battery.alive is expected_alive
    assert battery.initial_j - battery.residual_j == pytest.approx(
        battery.debited_j, rel=1e-12,
    )


def test_debit_negative():
    with pytest.raises(ContractViolation, match='Negative energy debit'):
        Battery(1.0).debit(-0.1, 0.0)


@pytest.mark.parametrize(
    ('initial', 'consumed', 'elapsed', 'expected'),
    (
        pytest.param(50.0, 0.6, 2.0, 0.3, id='formula'),
        pytest.param(50.0, 0.0, 2.0, 0.0, id='idle'),
        pytest.param(100.0, 0.6, 6.0, 0.1, id='six-second-window'),
    ),
)
def test_sample_edr(initial, consumed, elapsed, expected):
    battery = Battery(initial, sample_interval_s=elapsed)
    battery.debit(consumed, elapsed / 2)
    assert battery.sample_edr(elapsed) == pytest.approx(expected, rel=1e-12)
    assert battery.last_sample_time == elapsed
    assert battery.last_sample_energy_j == battery.residual_j


def test_sample_edr_zero_interval():
    with pytest.raises(ContractViolation, match='non-positive interval'):
        Battery(10.0).sample_edr(0.0)


@pytest.mark.parametrize(
    'now',
    (
        pytest.param(0.5, id='half-interval'),
        pytest.param(0.999, id='just-short'),
    ),
)
def test_sample_edr_before_interval(now):
    battery = Battery(10.0, sample_interval_s=1.0)
    with pytest.raises(ContractViolation, match='before the 1.0 s interval'):
        battery.sample_edr(now)
    assert battery.last_sample_time == 0.0


def test_sample_edr_tolerates_accumulated_timer_error():
    battery = Battery(10.0, sample_interval_s=0.1)
    now = 0.0
    for _ in range(3):
        now += 0.1
    assert now != 0.3
    battery.sample_edr(now)
    assert battery.sample_edr(now + 0.1 - 1e-15) == 0.0


@pytest.mark.parametrize(
    ('alpha', 'previous', 'edr', 'expected'),
    (
        pytest.param(0.5, 0.2, 0.4, 0.3, id='alpha-0.5'),
        pytest.param(0.3, 0.2, 0.4, 0.26, id='alpha-0.3'),
        pytest.param(0.5, 0.0, 0.0, 0.0, id='idle'),
    ),
)
def test_update_aedr(alpha, previous, edr, expected):
    battery = battery_with(aedr=previous, alpha=alpha)
    assert battery.update_aedr(edr) == pytest.approx(expected, rel=1e-12)
    assert min(previous, edr) <= battery.aedr_w <= max(previous, edr)


def test_update_aedr_negative_sample():
    with pytest.raises(ContractViolation):
        Battery(1.0).update_aedr(-1e-3)


@pytest.mark.parametrize('alpha', (0.5, 0.3))
def test_aedr_converges_to_constant_drain(alpha):
    battery = Battery(1000.0, alpha=alpha)
    for t in range(1, 21):
        battery.debit(0.2, t - 0.5)
        battery.sample(float(t))
    assert battery.aedr_w == pytest.approx(0.2, rel=0.01)


@pytest.mark.parametrize(
    ('residual', 'aedr', 'expected'),
    (
        pytest.param(30.0, 0.5, 60.0, id='formula'),
        pytest.param(30.0, 0.0, LIFETIME_CAP, id='before-first-sample'),
        pytest.param(0.0, 0.5, 0.0, id='drained'),
    ),
)
def test_lifetime(residual, aedr, expected):
    battery = battery_with(residual, aedr)
    assert battery.lifetime() == pytest.approx(expected, rel=1e-12)


@pytest.mark.parametrize('aedr', (0.013, 0.5, 2.75))
def test_lifetime_times_aedr_is_residual(aedr):
    battery = battery_with(37.5, aedr)
    assert battery.lifetime() * aedr == pytest.approx(37.5, rel=1e-12)


@pytest.mark.parametrize(
    'aedr',
    (
        pytest.param(AEDR_FLOOR, id='at-floor'),
        pytest.param(AEDR_FLOOR / 10, id='below-floor'),
        pytest.param(1e-8, id='above-floor'),
    ),
)
def test_lifetime_capped_near_floor(aedr):
    assert battery_with(37.5, aedr).lifetime() == LIFETIME_CAP


@pytest.mark.parametrize(
    ('aedr', 'threshold1', 'threshold2'),
    (
        pytest.param(0.3, 1.5, 0.3, id='0.3W'),
        pytest.param(0.0, 0.0, 0.0, id='idle'),
        pytest.param(1.0, 5.0, 1.0, id='1W'),
        pytest.param(2.5, 12.5, 2.5, id='2.5W'),
    ),
)
def test_thresholds(aedr, threshold1, threshold2):
    battery = battery_with(aedr=aedr)
    assert battery.threshold1() == pytest.approx(threshold1, rel=1e-12)
    assert battery.threshold2() == pytest.approx(threshold2, rel=1e-12)


@pytest.mark.parametrize(
    'kwargs',
    (
        pytest.param({'initial_j': 0.0}, id='no-energy'),
        pytest.param({'initial_j': 1.0, 'alpha': 0.0}, id='alpha-zero'),
        pytest.param({'initial_j': 1.0, 'alpha': 1.5}, id='alpha-above-one'),
        pytest.param(
            {'initial_j': 1.0, 'sample_interval_s': 0.0}, id='no-interval',
        ),
    ),
)
def test_invalid_battery(kwargs):
    with pytest.raises(ContractViolation):
        Battery(**kwargs)
