import numpy as np
import pytest

from src.common import DataFormatError, DomainError
from src.models import CavitySpec, DataSet, FitOptions, FpRow, GainRow, SqueezeRow, SqueezerState
from src.services.cavity_service import airy_response
from src.services.estimate import (
    ParamSpec,
    characterize_cavity,
    fit_squeeze_sweep,
    fit_threshold_from_gain,
    least_squares,
    load_dataset,
)
from src.services.opo_service import infer_from_pair, parametric_gain, variances

P_TH = 135.0


def _gain_data(pumps, p_th=P_TH, noise=0.0, seed=0) -> DataSet:
    rng = np.random.default_rng(seed)
    rows = []
    for pump in pumps:
        gain = parametric_gain(pump / p_th)
        plus = gain["g_plus"] * (1 + noise * rng.normal())
        minus = gain["g_minus"] * (1 + noise * rng.normal())
        rows.append(GainRow(pump_mw=pump, g_plus=max(plus, minus), g_minus=min(plus, minus)))
    return DataSet(kind="gain", rows=rows)


def _squeeze_data(pumps, p_th=P_TH, eta_esc=0.81, eta_det=0.72) -> DataSet:
    rows = []
    for pump in pumps:
        pair = variances(SqueezerState(pump_ratio=pump / p_th, eta_esc=eta_esc, eta_det=eta_det))
        rows.append(SqueezeRow(pump_mw=pump, rel_noise_db_min=pair.sqz_db, rel_noise_db_max=pair.antisqz_db))
    return DataSet(kind="squeeze", rows=rows)


def _fp_data(spec, quantities=("t_on", "r_on", "t_off", "r_off"), noise=0.0, seed=0, side="coupler") -> DataSet:
    rng = np.random.default_rng(seed)
    on = airy_response(spec, side, on_resonance=True)
    off = airy_response(spec, side, on_resonance=False)
    lookup = {"t_on": on.transmission, "r_on": on.reflection, "t_off": off.transmission, "r_off": off.reflection}
    rows = [FpRow(quantity=q, value=lookup[q] * (1 + noise * rng.normal())) for q in quantities]
    return DataSet(kind="fp_response", rows=rows)


# --- решатель ---


def test_linear_model_exact():
    t = np.linspace(0.0, 1.0, 11)
    y = 2.5 * t
    fit = least_squares(lambda p: p["p"] * t - y, [ParamSpec(name="p", init=1.0)], FitOptions(starts=1))
    assert fit.converged
    assert fit.params["p"] == pytest.approx(2.5, abs=1e-10)


def test_known_minimum():
    def residuals(p):
        return np.array([1.0 - p["a"], 10.0 * (p["b"] - p["a"] ** 2 - 1.0)])

    specs = [ParamSpec(name="a", init=0.5), ParamSpec(name="b", init=0.5)]
    fit = least_squares(residuals, specs, FitOptions(starts=3))
    assert fit.converged
    assert fit.params["a"] == pytest.approx(1.0, abs=1e-8)
    assert fit.params["b"] == pytest.approx(2.0, abs=1e-8)


def test_log_transform_keeps_threshold_above_pumps():
    pumps = np.linspace(5.0, 0.97 * P_TH, 8)
    gain = np.array([parametric_gain(p / P_TH)["g_plus"] for p in pumps])

    def residuals(p):
        x = np.sqrt(pumps / p["p_th"])
        return (1.0 / (1.0 - x) ** 2) / gain - 1.0

    spec = ParamSpec(name="p_th", init=300.0, transform="log", lower=float(pumps.max()))
    fit = least_squares(residuals, [spec], FitOptions(starts=4))
    assert fit.converged
    assert fit.params["p_th"] > pumps.max()
    assert fit.params["p_th"] == pytest.approx(P_TH, rel=1e-6)


@pytest.mark.parametrize("transform,lower,upper,value", [
    ("log", 10.0, 1.0, 12.5),
    ("logit", 0.0, 1.0, 0.73),
    ("square", 0.0, 1.0, 0.13),
    ("none", 0.0, 1.0, -4.0),
])
def test_param_transform_inverse(transform, lower, upper, value):
    spec = ParamSpec(name="p", init=value, transform=transform, lower=lower, upper=upper)
    assert spec.to_physical(spec.to_internal(value)) == pytest.approx(value, rel=1e-12)
    assert spec.in_domain(value)


def test_rss_history_never_increases():
    fit = fit_threshold_from_gain(_gain_data(np.linspace(5, 60, 12), noise=0.03, seed=3), FitOptions(starts=4))
    history = np.array(fit.rss_history)
    assert len(history) >= 1
    assert np.all(np.diff(history) <= 0.0)


def test_stderr_scales_with_sample_size():
    def mean_stderr(n: int) -> float:
        t = np.linspace(0.1, 1.0, n)
        values = []
        for seed in range(50):
            y = 2.0 * t + 0.1 * np.random.default_rng(seed).normal(size=n)
            fit = least_squares(lambda p: p["p"] * t - y, [ParamSpec(name="p", init=1.0)], FitOptions(starts=1))
            values.append(fit.stderr["p"])
        return float(np.mean(values))

    ratio = mean_stderr(10) / mean_stderr(40)
    assert 2.0 / 1.5 < ratio < 2.0 * 1.5


# --- порог по усилению ---


def test_gain_fixture_recovers_threshold(data_dir, fit_options):
    fit = fit_threshold_from_gain(load_dataset(data_dir / "gain_threshold.csv"), fit_options)
    assert fit.converged
    assert fit.params["p_th_mw"] == pytest.approx(P_TH, rel=1e-6)
    assert fit.stderr["p_th_mw"] < 1.0
    assert set(fit.curves) == {"pump_mw", "g_plus", "g_minus"}
    assert len(fit.curves["pump_mw"]) == 101


ROUND_TRIP_SEEDS = range(100)


@pytest.mark.parametrize("seed", ROUND_TRIP_SEEDS)
def test_gain_round_trip(seed, fit_options):
    p_th = float(np.random.default_rng(seed).uniform(50.0, 300.0))
    fit = fit_threshold_from_gain(_gain_data(np.linspace(0.05, 0.6, 6) * p_th, p_th=p_th), fit_options)
    assert fit.converged
    assert fit.params["p_th_mw"] == pytest.approx(p_th, rel=1e-6)


def test_gain_with_noise_within_ten_percent(fit_options):
    errors = []
    for seed in range(100):
        data = _gain_data(np.linspace(5, 60, 12), noise=0.03, seed=seed)
        fit = fit_threshold_from_gain(data, fit_options)
        errors.append(abs(fit.params["p_th_mw"] / P_TH - 1.0))
    assert np.percentile(errors, 90) < 0.10


def test_gain_single_row_rejected():
    with pytest.raises(DomainError):
        fit_threshold_from_gain(_gain_data([10.0]))


def test_gain_inconsistent_with_any_threshold():
    rows = [GainRow(pump_mw=p, g_plus=1.0 + 0.01 * p, g_minus=1.0 + 0.005 * p) for p in (5.0, 10.0, 20.0)]
    fit = fit_threshold_from_gain(DataSet(kind="gain", rows=rows))
    assert not fit.converged
    assert fit.diagnostic


# --- порог по сжатию ---


@pytest.mark.parametrize("seed", ROUND_TRIP_SEEDS)
def test_squeeze_round_trip(seed, fit_options):
    rng = np.random.default_rng(1000 + seed)
    p_th = float(rng.uniform(50.0, 300.0))
    eta_esc, eta_det = (float(v) for v in rng.uniform(0.5, 0.98, 2))
    data = _squeeze_data(np.linspace(0.05, 0.4, 6) * p_th, p_th=p_th, eta_esc=eta_esc, eta_det=eta_det)
    fit = fit_squeeze_sweep(data, eta_esc, eta_det, options=fit_options)
    assert fit.converged
    assert fit.params["p_th_mw"] == pytest.approx(p_th, rel=1e-6)


def test_squeeze_round_trip_with_free_detection(fit_options):
    data = _squeeze_data([5.0, 10.0, 15.0, 20.0, 25.0, 30.0], eta_det=0.65)
    fit = fit_squeeze_sweep(data, 0.81, 0.72, free_eta_det=True, options=fit_options)
    assert fit.converged
    assert fit.params["p_th_mw"] == pytest.approx(P_TH, rel=1e-6)
    assert fit.params["eta_det"] == pytest.approx(0.65, rel=1e-6)


def test_measured_pair_implies_threshold(fit_options):
    assert 23.0 / infer_from_pair(-2.9, 6.0)["pump_ratio"] == pytest.approx(128.0, abs=1.5)

    rows = [SqueezeRow(pump_mw=23.0, rel_noise_db_min=-2.9, rel_noise_db_max=6.0)] * 3
    fit = fit_squeeze_sweep(DataSet(kind="squeeze", rows=rows), 0.81, 0.72, free_eta_det=True, options=fit_options)
    assert fit.params["p_th_mw"] == pytest.approx(128.0, abs=1.5)


def test_produced_curve_below_detected(fit_options):
    fit = fit_squeeze_sweep(_squeeze_data([5.0, 10.0, 20.0]), 0.81, 0.72, options=fit_options)
    detected = np.array(fit.curves["sqz_db"])
    produced = np.array(fit.curves["produced_sqz_db"])
    assert np.all(produced <= detected)
    assert produced[-1] < detected[-1]


def test_squeeze_pair_beyond_unit_efficiency():
    rows = [SqueezeRow(pump_mw=p, rel_noise_db_min=-9.0, rel_noise_db_max=3.0) for p in (5.0, 10.0, 15.0)]
    fit = fit_squeeze_sweep(DataSet(kind="squeeze", rows=rows), 0.81, 0.72)
    assert not fit.converged
    assert "eta_total" in fit.diagnostic


def test_squeeze_rejects_bad_efficiency():
    with pytest.raises(DomainError):
        fit_squeeze_sweep(_squeeze_data([5.0, 10.0, 20.0]), 1.2, 0.72)


# --- характеризация резонатора ---


def test_characterize_exact_recovery(ref_spec, fit_options):
    fit = characterize_cavity(_fp_data(ref_spec), ref_spec.replace(r_hr=0.95, loss=0.3), options=fit_options)
    assert fit.converged
    assert fit.params["r_hr"] == pytest.approx(0.99, abs=1e-9)
    assert fit.params["loss_db_per_cm"] == pytest.approx(0.13, rel=1e-7)


@pytest.mark.parametrize("seed", ROUND_TRIP_SEEDS)
def test_characterize_round_trip(seed, fit_options):
    rng = np.random.default_rng(2000 + seed)
    spec = CavitySpec(
        length_mm=rng.uniform(4.0, 20.0),
        ref_index=2.138,
        loss_db_per_cm=rng.uniform(0.02, 0.5),
        r_out=rng.uniform(0.6, 0.95),
        r_hr=rng.uniform(0.9, 0.995),
    )
    fit = characterize_cavity(_fp_data(spec), spec.replace(r_hr=0.95, loss=0.3), options=fit_options)
    assert fit.converged
    assert fit.params["r_hr"] == pytest.approx(spec.r_hr, rel=1e-6)
    assert fit.params["loss_db_per_cm"] == pytest.approx(spec.loss, rel=1e-6)


def test_characterize_fixture(data_dir, ref_spec, fit_options):
    fit = characterize_cavity(load_dataset(data_dir / "fp_response.csv"), ref_spec, options=fit_options)
    assert fit.converged
    assert fit.params["r_hr"] == pytest.approx(0.99, abs=1e-4)
    assert fit.params["loss_db_per_cm"] == pytest.approx(0.13, abs=5e-3)


def test_characterize_lossless(ref_spec, fit_options):
    lossless = ref_spec.replace(loss=0.0)
    fit = characterize_cavity(_fp_data(lossless), lossless, options=fit_options)
    assert fit.converged
    assert fit.params["r_hr"] == pytest.approx(0.99, abs=1e-6)
    assert fit.params["loss_db_per_cm"] < 1e-6


def test_characterize_from_high_reflector_side(ref_spec, fit_options):
    fit = characterize_cavity(_fp_data(ref_spec, side="hr"), ref_spec, "hr", fit_options)
    assert fit.converged
    assert fit.params["r_hr"] == pytest.approx(0.99, abs=1e-8)


def test_characterize_noisy(ref_spec, fit_options):
    deviations = []
    for seed in range(100):
        fit = characterize_cavity(_fp_data(ref_spec, noise=0.05, seed=seed), ref_spec, options=fit_options)
        deviations.append(abs(fit.params["r_hr"] - 0.99))
    assert max(deviations) < 0.002


def test_characterize_reflection_only_is_degenerate(ref_spec, fit_options):
    fit = characterize_cavity(_fp_data(ref_spec, quantities=("r_on", "r_off")), ref_spec, options=fit_options)
    assert not fit.converged
    assert "параметр" in fit.diagnostic


def test_characterize_needs_two_quantities(ref_spec):
    with pytest.raises(DomainError):
        characterize_cavity(_fp_data(ref_spec, quantities=("t_on", "t_on")), ref_spec)


# --- загрузка таблиц ---


def test_fixtures_load(data_dir):
    gain = load_dataset(data_dir / "gain_threshold.csv")
    assert gain.kind == "gain" and len(gain) == 10
    assert gain.rows[0].g_plus_err == pytest.approx(0.022)
    fp = load_dataset(data_dir / "fp_response.csv", "fp_response")
    assert [row.quantity for row in fp.rows] == ["t_on", "r_on", "t_off", "r_off"]


def test_optional_column_may_be_blank(tmp_path):
    path = tmp_path / "sqz.csv"
    path.write_text("pump_mw,rel_noise_db_min,rel_noise_db_max,err_db\n10,-1.5,3.0,\n20,-2.5,5.0,0.1\n", encoding="utf-8")
    data = load_dataset(path)
    assert data.kind == "squeeze"
    assert data.rows[0].err_db is None and data.rows[1].err_db == pytest.approx(0.1)


@pytest.mark.parametrize(
    "text,line,column",
    [
        ("pump_mw,g_plus,g_minus\n1.0,1.1,0.9\n2.0,abc,0.8\n", 3, 2),
        ("# comment\npump_mw,g_plus,g_minus\n1.0,1.1,0.9\n\n2.0,nan,0.8\n", 5, 2),
        ("pump_mw,g_plus,g_minus\n1.0,1.1,0.9\n2.0,1.2\n", 3, 3),
        ("pump_mw,g_plus,g_minus,extra\n1.0,1.1,0.9,1\n", 1, 4),
        ("pump_mw,g_plus,g_plus\n1.0,1.1,0.9\n", 1, 3),
        ("pump_mw,g_plus,g_minus\n-1.0,1.1,0.9\n", 2, 1),
        ("pump_mw,g_plus,g_minus\n1.0,,0.9\n", 2, 2),
    ],
)
def test_malformed_csv_reports_position(tmp_path, text, line, column):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(DataFormatError) as info:
        load_dataset(path, "gain")
    assert info.value.line == line
    assert info.value.column == column
    assert f"строка {line}" in info.value.message


def test_row_rule_violation_reports_line(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text("pump_mw,g_plus,g_minus\n1.0,1.1,0.9\n2.0,0.8,0.9\n", encoding="utf-8")
    with pytest.raises(DataFormatError) as info:
        load_dataset(path)
    assert info.value.line == 3


@pytest.mark.parametrize("text", ["a,b\n1,2\n", "pump_mw,g_plus\n1,2\n", ""])
def test_unrecognized_tables(tmp_path, text):
    path = tmp_path / "bad.csv"
    path.write_text(text, encoding="utf-8")
    with pytest.raises(DataFormatError):
        load_dataset(path)


def test_missing_file(tmp_path):
    with pytest.raises(DataFormatError):
        load_dataset(tmp_path / "absent.csv")


def test_quoted_fields_and_trailing_comments(tmp_path):
    path = tmp_path / "quoted.csv"
    path.write_text(
        '# source: "bench, run 2"\n"pump_mw", "g_plus", "g_minus"\n"10", 1.20, 0.85  # first\n20,"1.45",0.74\n',
        encoding="utf-8",
    )
    data = load_dataset(path)
    assert data.kind == "gain" and len(data) == 2
    assert data.rows[0].pump_mw == pytest.approx(10.0)
    assert data.rows[0].g_minus == pytest.approx(0.85)
    assert data.rows[1].g_plus == pytest.approx(1.45)


def test_quoted_comma_counts_as_one_field(tmp_path):
    path = tmp_path / "bad.csv"
    path.write_text('pump_mw,g_plus,g_minus\n1.0,1.1,0.9\n"2,5",1.2,0.8\n', encoding="utf-8")
    with pytest.raises(DataFormatError) as info:
        load_dataset(path)
    assert (info.value.line, info.value.column) == (3, 1)


def test_non_utf8_bytes_report_position(tmp_path):
    path = tmp_path / "latin.csv"
    path.write_bytes(b"pump_mw,g_plus,g_minus\n1.0,1.1,0.9\n2.0,\xff\xfe,0.8\n")
    with pytest.raises(DataFormatError) as info:
        load_dataset(path)
    assert (info.value.line, info.value.column) == (3, 5)
    assert "строка 3" in info.value.message
