import math

import numpy as np
import pytest
from pydantic import ValidationError

from src.common import DomainError
from src.models import CavitySpec
from src.services.cavity_service import CavityService, airy_response, decay_rates, round_trip_time


def test_round_trip_time_examples():
    assert round_trip_time(CavitySpec(length_mm=25.0, ref_index=2.138, loss_db_per_cm=0, r_out=0.9, r_hr=0.99)) == pytest.approx(
        3.563e-10, rel=1e-3
    )
    vacuum = CavitySpec(length_mm=149.896, ref_index=1.0, loss_db_per_cm=0, r_out=0.9, r_hr=0.99)
    assert round_trip_time(vacuum) == pytest.approx(1.0e-9, rel=1e-5)


def test_round_trip_time_linear_in_length(ref_spec):
    doubled = ref_spec.replace(length=2 * ref_spec.length)
    assert round_trip_time(doubled) == pytest.approx(2 * round_trip_time(ref_spec), rel=1e-14)


def test_reference_escape_efficiency(ref_spec):
    rates = decay_rates(ref_spec)
    assert rates.gamma_coup * rates.tau == pytest.approx(1 - math.sqrt(0.77), abs=1e-12)
    assert rates.gamma_coup * rates.tau == pytest.approx(0.12250, abs=1e-5)
    assert rates.eta_esc == pytest.approx(0.81, abs=0.01)


def test_decay_rates_consistent(ref_spec):
    rates = decay_rates(ref_spec)
    assert rates.gamma_tot == pytest.approx(rates.gamma_coup + rates.gamma_hr + rates.gamma_loss, rel=1e-14)
    assert rates.eta_esc == pytest.approx(rates.gamma_coup / rates.gamma_tot, rel=1e-14)
    assert rates.fwhm_bandwidth * math.pi == pytest.approx(rates.gamma_tot, rel=1e-14)
    assert rates.fsr == pytest.approx(1 / rates.tau, rel=1e-14)
    assert 0 < rates.eta_esc <= 1


def test_finesse_matches_coupling_sum(ref_spec):
    loss_amplitude = CavityService.round_trip_amplitude(ref_spec)
    total = (1 - math.sqrt(0.77)) + (1 - math.sqrt(0.99)) + (1 - loss_amplitude)
    assert CavityService.finesse(ref_spec) == pytest.approx(math.pi / total, rel=1e-12)


def test_escape_efficiency_is_one_without_parasitic_loss():
    spec = CavitySpec(length_mm=8.0, loss_db_per_cm=0.0, r_out=0.77, r_hr=1.0)
    assert decay_rates(spec).eta_esc == pytest.approx(1.0, abs=1e-15)


def test_lossless_single_port_reflects_everything():
    spec = CavitySpec(length_mm=8.0, loss_db_per_cm=0.0, r_out=0.77, r_hr=1.0)
    response = airy_response(spec, "coupler", on_resonance=True)
    assert response.reflection == pytest.approx(1.0, abs=1e-12)
    assert response.transmission == pytest.approx(0.0, abs=1e-15)


def test_reference_cavity_on_resonance(ref_spec):
    response = airy_response(ref_spec, "coupler", on_resonance=True)
    assert response.transmission == pytest.approx(0.1030, abs=2e-3)
    assert response.reflection == pytest.approx(0.4042, abs=2e-3)


def test_reference_cavity_against_airy_formulas(ref_spec):
    r1, r2 = math.sqrt(0.77), math.sqrt(0.99)
    a2 = 10 ** (-0.104 / 10)
    g = a2
    t_on = (1 - 0.77) * (1 - 0.99) * a2 / (1 - r1 * r2 * g) ** 2
    r_on = (r1 - r2 * g) ** 2 / (1 - r1 * r2 * g) ** 2
    t_off = (1 - 0.77) * (1 - 0.99) * a2 / (1 + r1 * r2 * g) ** 2
    r_off = (r1 + r2 * g) ** 2 / (1 + r1 * r2 * g) ** 2

    on = airy_response(ref_spec, "coupler", on_resonance=True)
    off = airy_response(ref_spec, "coupler", on_resonance=False)
    assert on.transmission == pytest.approx(t_on, rel=1e-12)
    assert on.reflection == pytest.approx(r_on, rel=1e-12)
    assert off.transmission == pytest.approx(t_off, rel=1e-12)
    assert off.reflection == pytest.approx(r_off, rel=1e-12)
    assert on.transmission == pytest.approx(0.1031289, abs=1e-6)
    assert on.reflection == pytest.approx(0.4053407, abs=1e-6)


def test_probe_side_swaps_reflection_not_transmission(ref_spec):
    coupler = airy_response(ref_spec, "coupler")
    hr = airy_response(ref_spec, "hr")
    assert hr.transmission == pytest.approx(coupler.transmission, rel=1e-12)
    assert hr.reflection != pytest.approx(coupler.reflection, abs=1e-3)


@pytest.mark.parametrize("detuning", [0.0, 0.3, 1.0, math.pi / 2, math.pi, 4.0])
@pytest.mark.parametrize("side", ["coupler", "hr"])
def test_lossless_cavity_conserves_power(detuning, side):
    spec = CavitySpec(length_mm=8.0, loss_db_per_cm=0.0, r_out=0.77, r_hr=0.9)
    response = airy_response(spec, side, detuning_rad=detuning)
    assert response.transmission + response.reflection == pytest.approx(1.0, abs=1e-12)


@pytest.mark.parametrize("detuning", np.linspace(0.0, 2 * math.pi, 9))
def test_lossy_cavity_loses_power(ref_spec, detuning):
    response = airy_response(ref_spec, detuning_rad=float(detuning))
    assert response.transmission + response.reflection < 1.0


def _random_specs(seed: int, count: int, r_hr_low: float = 0.9):
    rng = np.random.default_rng(seed)
    for _ in range(count):
        yield CavitySpec(
            length_mm=rng.uniform(1.0, 30.0),
            ref_index=rng.uniform(1.0, 2.5),
            loss_db_per_cm=rng.uniform(0.0, 1.0),
            r_out=rng.uniform(0.05, 0.99),
            r_hr=rng.uniform(r_hr_low, 0.9999),
        )


def test_escape_efficiency_falls_with_loss():
    losses = np.linspace(0.0, 2.0, 41)
    for spec in _random_specs(seed=5, count=50):
        etas = np.array([decay_rates(spec.replace(loss=float(loss))).eta_esc for loss in losses])
        assert np.all(np.diff(etas) < 0.0)


def test_escape_efficiency_rises_with_coupler_transmission():
    reflectivities = np.linspace(0.99, 0.05, 48)
    for spec in _random_specs(seed=6, count=50):
        etas = np.array([decay_rates(spec.replace(r_out=float(r))).eta_esc for r in reflectivities])
        assert np.all(np.diff(etas) > 0.0)


@pytest.mark.parametrize("side", ["coupler", "hr"])
def test_resonance_transmits_at_least_off_resonance(side):
    for spec in _random_specs(seed=7, count=200, r_hr_low=0.3):
        on = airy_response(spec, side, on_resonance=True)
        off = airy_response(spec, side, on_resonance=False)
        assert on.transmission >= off.transmission


def test_solve_length_for_escape(ref_spec):
    target = decay_rates(ref_spec).eta_esc
    length = CavityService.solve_length_for_escape(ref_spec, target)
    assert 5.0 <= length <= 15.0
    assert length == pytest.approx(8.0, rel=1e-8)


def test_shorter_cavity_has_higher_escape(ref_spec):
    length = CavityService.solve_length_for_escape(ref_spec, 0.85)
    assert length < ref_spec.length


def test_solve_length_unreachable_target(ref_spec):
    with pytest.raises(DomainError):
        CavityService.solve_length_for_escape(ref_spec, 0.999)


@pytest.mark.parametrize(
    "field,value",
    [("r_out", 1.0), ("r_out", 0.0), ("r_hr", 1.2), ("length_mm", -1.0), ("loss_db_per_cm", -0.1)],
)
def test_invalid_cavity_spec(field, value):
    data = dict(length_mm=8.0, loss_db_per_cm=0.13, r_out=0.77, r_hr=0.99)
    data[field] = value
    with pytest.raises(ValidationError):
        CavitySpec(**data)
