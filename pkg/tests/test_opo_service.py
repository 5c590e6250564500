import math

import numpy as np
import pytest

from src.common import AboveThresholdError, DomainError, NonPhysicalPairError
from src.models import SqueezerState
from src.services.cavity_service import decay_rates
from src.services.opo_service import (
    OpoService,
    db_from_linear,
    infer_from_pair,
    linear_from_db,
    parametric_gain,
    squeezing_spectrum,
    variances,
)

PUMP_GRID = np.linspace(0.0, 0.99, 34)
IDENTITY_GRID = np.linspace(0.0, 0.999, 1000)
ETA_GRID = np.linspace(0.05, 0.95, 10)


def test_gain_examples():
    assert parametric_gain(0.0) == {"g_plus": 1.0, "g_minus": 1.0}
    gain = parametric_gain(0.25)
    assert gain["g_plus"] == pytest.approx(4.0, rel=1e-14)
    assert gain["g_minus"] == pytest.approx(4.0 / 9.0, rel=1e-14)


def test_gain_identity():
    for pump_ratio in IDENTITY_GRID:
        gain = parametric_gain(float(pump_ratio))
        assert gain["g_plus"] * gain["g_minus"] == pytest.approx(1.0 / (1.0 - pump_ratio) ** 2, rel=1e-12)
        assert gain["g_plus"] >= 1.0 >= gain["g_minus"]


@pytest.mark.parametrize("pump_ratio", [1.0, 1.5])
def test_above_threshold_rejected(pump_ratio):
    with pytest.raises(AboveThresholdError):
        parametric_gain(pump_ratio)


@pytest.mark.parametrize("pump_ratio", [-0.1, float("nan")])
def test_negative_pump_rejected(pump_ratio):
    with pytest.raises(DomainError):
        OpoService.check_pump_ratio(pump_ratio)


def test_no_pump_is_shot_noise():
    pair = variances(SqueezerState(pump_ratio=0.0, eta_esc=0.81, eta_det=0.72))
    assert pair.v_minus == 1.0 and pair.v_plus == 1.0
    assert pair.sqz_db == 0.0 and pair.antisqz_db == 0.0


def test_reference_detected_pair():
    pair = variances(SqueezerState(pump_ratio=0.18, eta_esc=0.81, eta_det=0.72))
    assert pair.sqz_db == pytest.approx(-2.9, abs=0.1)
    assert pair.antisqz_db == pytest.approx(6.0, abs=0.1)
    assert pair.sqz_magnitude_db == pytest.approx(-pair.sqz_db)


def test_reference_produced_level():
    pair = variances(SqueezerState(pump_ratio=0.18, eta_esc=0.81, eta_det=1.0))
    assert pair.sqz_db == pytest.approx(-4.9, abs=0.1)


def test_lossless_minimum_uncertainty():
    pairs = [variances(SqueezerState(pump_ratio=float(p), eta_esc=1.0, eta_det=1.0)) for p in IDENTITY_GRID]
    products = np.array([pair.v_minus * pair.v_plus for pair in pairs])
    assert np.max(np.abs(products - 1.0)) < 1e-12


def test_lossless_spectrum_minimum_uncertainty(ref_spec):
    rates = decay_rates(ref_spec)
    for p in IDENTITY_GRID[::50]:
        state = SqueezerState(pump_ratio=float(p), eta_esc=1.0, eta_det=1.0)
        pair = squeezing_spectrum(state, rates, 0.3 * rates.fwhm_bandwidth)
        assert abs(pair.v_minus * pair.v_plus - 1.0) < 1e-12


@pytest.mark.parametrize("eta", ETA_GRID)
def test_lossy_uncertainty_excess(eta):
    for pump_ratio in PUMP_GRID[1:]:
        pair = variances(SqueezerState(pump_ratio=float(pump_ratio), eta_esc=float(eta), eta_det=1.0))
        assert pair.v_minus * pair.v_plus > 1.0


def test_monotone_in_pump():
    pairs = [variances(SqueezerState(pump_ratio=float(p), eta_esc=0.81, eta_det=0.73)) for p in PUMP_GRID]
    v_minus = np.array([pair.v_minus for pair in pairs])
    v_plus = np.array([pair.v_plus for pair in pairs])
    assert np.all(np.diff(v_minus) < 0)
    assert np.all(np.diff(v_plus) > 0)


def test_monotone_in_detection_efficiency():
    levels = [variances(SqueezerState(pump_ratio=0.3, eta_esc=0.81, eta_det=float(eta))).sqz_db for eta in ETA_GRID]
    assert np.all(np.diff(levels) < 0)


def test_infer_reference_pair():
    inferred = infer_from_pair(-2.9, 6.0)
    assert inferred["eta_total"] == pytest.approx(0.582, abs=0.01)
    assert inferred["pump_ratio"] == pytest.approx(0.180, abs=0.01)
    assert inferred["eta_total"] / 0.81 == pytest.approx(0.72, abs=0.01)


def test_infer_lossless_round_trip():
    pair = variances(SqueezerState(pump_ratio=0.25, eta_esc=1.0, eta_det=1.0))
    inferred = infer_from_pair(pair.sqz_db, pair.antisqz_db)
    assert inferred["eta_total"] == pytest.approx(1.0, rel=1e-9)
    assert inferred["pump_ratio"] == pytest.approx(0.25, rel=1e-9)


rng = np.random.default_rng(7)
RANDOM_STATES = [(float(rng.uniform(0.01, 0.95)), float(rng.uniform(0.05, 1.0))) for _ in range(25)]


@pytest.mark.parametrize("pump_ratio,eta", RANDOM_STATES)
def test_infer_inverts_variances(pump_ratio, eta):
    pair = variances(SqueezerState(pump_ratio=pump_ratio, eta_esc=eta, eta_det=1.0))
    inferred = infer_from_pair(pair.sqz_db, pair.antisqz_db)
    assert inferred["pump_ratio"] == pytest.approx(pump_ratio, rel=1e-8)
    assert inferred["eta_total"] == pytest.approx(eta, rel=1e-8)


@pytest.mark.parametrize(
    "sqz_db,antisqz_db,code",
    [
        (0.5, 6.0, "no_squeezing"),
        (-2.9, -0.1, "no_antisqueezing"),
        (-3.0, 1.0, "asymmetry"),
        (-9.0, 3.0, "efficiency"),
    ],
)
def test_nonphysical_pairs(sqz_db, antisqz_db, code):
    with pytest.raises(NonPhysicalPairError) as info:
        infer_from_pair(sqz_db, antisqz_db)
    assert info.value.code == code


def test_spectrum_reduces_to_variances(ref_spec):
    rates = decay_rates(ref_spec)
    state = SqueezerState(pump_ratio=0.18, eta_esc=rates.eta_esc, eta_det=0.73)
    assert squeezing_spectrum(state, rates, 0.0) == variances(state)


def test_spectrum_halves_at_corner(ref_spec):
    rates = decay_rates(ref_spec)
    state = SqueezerState(pump_ratio=0.18, eta_esc=rates.eta_esc, eta_det=0.73)
    x = math.sqrt(state.pump_ratio)
    corner_hz = rates.gamma_tot * (1 + x) / (2 * math.pi)
    at_zero = squeezing_spectrum(state, rates, 0.0)
    at_corner = squeezing_spectrum(state, rates, corner_hz)
    assert 1 - at_corner.v_minus == pytest.approx((1 - at_zero.v_minus) / 2, rel=1e-12)


def test_spectrum_decays_to_shot_noise(ref_spec):
    rates = decay_rates(ref_spec)
    state = SqueezerState(pump_ratio=0.5, eta_esc=rates.eta_esc, eta_det=0.73)
    far = squeezing_spectrum(state, rates, 1e6 * rates.gamma_tot)
    assert abs(far.v_minus - 1) < 1e-9 and abs(far.v_plus - 1) < 1e-9
    previous = squeezing_spectrum(state, rates, 0.0)
    for f in np.geomspace(1e3, 1e10, 15):
        current = squeezing_spectrum(state, rates, float(f))
        assert abs(current.v_minus - 1) <= abs(previous.v_minus - 1)
        assert abs(current.v_plus - 1) <= abs(previous.v_plus - 1)
        previous = current


def test_db_conversion_examples():
    assert db_from_linear(1.0) == 0.0
    assert db_from_linear(0.5) == pytest.approx(-3.0103, abs=1e-4)
    assert db_from_linear(3.9811) == pytest.approx(6.000, abs=1e-4)
    for value in (1e-6, 0.37, 2.0, 1e4):
        assert linear_from_db(db_from_linear(value)) == pytest.approx(value, rel=1e-12)


@pytest.mark.parametrize("value", [0.0, -1.0])
def test_db_conversion_domain(value):
    with pytest.raises(DomainError):
        db_from_linear(value)


def test_produced_limit_and_target():
    assert OpoService.produced_limit(0.81) == pytest.approx(10 * math.log10(0.19), rel=1e-12)
    ratio = OpoService.pump_ratio_for_target(-2.9, 0.5832)
    pair = variances(SqueezerState(pump_ratio=ratio, eta_esc=0.81, eta_det=0.72))
    assert pair.sqz_db == pytest.approx(-2.9, abs=1e-10)
    with pytest.raises(DomainError):
        OpoService.pump_ratio_for_target(-8.0, 0.5832)
