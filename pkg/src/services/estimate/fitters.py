"""
Подгонки: порог по усилению затравки, порог (и eta_det) по зависимости
сжатия от накачки, характеризация резонатора по откликам Фабри-Перо
"""
import math
from typing import Dict, Optional, Sequence

import numpy as np

from ...common.errors import DomainError, NonPhysicalPairError
from ...models import CavitySpec, DataSet, FitOptions, FitResult
from ..cavity_service import CavityService, ProbeSide
from ..logger_service import logger
from ..opo_service import OpoService
from .solver import ParamSpec, least_squares, residual_vector

MIN_ROWS = 3


def _require(data: DataSet, kind: str, min_rows: int = MIN_ROWS):
    if data.kind != kind:
        raise DomainError(f"Ожидается таблица {kind}, получено {data.kind}", kind=data.kind)
    if len(data) < min_rows:
        raise DomainError(f"Слишком мало строк: {len(data)} < {min_rows}", rows=len(data))


def _sigma(errors: np.ndarray) -> np.ndarray:
    """Веса 1/σ, только если погрешности заданы для всех строк"""
    if np.all(np.isfinite(errors)):
        return errors
    return np.ones_like(errors)


def _not_converged(specs: Sequence[ParamSpec], diagnostic: str) -> FitResult:
    logger.warning(f"Подгонка отклонена: {diagnostic}")
    return FitResult(
        params={spec.name: spec.init for spec in specs},
        stderr={spec.name: math.inf for spec in specs},
        rss=math.inf,
        converged=False,
        iterations=0,
        diagnostic=diagnostic,
    )


def _gain_curves(pump: np.ndarray, p_th: float) -> Dict[str, np.ndarray]:
    x = np.sqrt(pump / p_th)
    return {"g_plus": 1.0 / (1.0 - x) ** 2, "g_minus": 1.0 / (1.0 + x) ** 2}


def fit_threshold_from_gain(data: DataSet, options: Optional[FitOptions] = None) -> FitResult:
    """
    Порог P_th по зависимости усиления затравки от накачки.

    Параметр: P_th = P_max + exp(u), поэтому P_th > max(pump) всегда.
    Начальное приближение из точки с максимальной накачкой:
    G₊·G₋ = 1/(1-p)² -> p = 1 - 1/√(G₊G₋).
    """
    _require(data, "gain")
    pump = data.column("pump_mw")
    g_plus, g_minus = data.column("g_plus"), data.column("g_minus")
    sigma_plus = _sigma(data.column("g_plus_err"))
    sigma_minus = _sigma(data.column("g_minus_err"))
    p_max = float(np.max(pump))

    pumped = pump > 0
    init = 2.0 * p_max if p_max > 0 else 1.0
    product = g_plus[np.argmax(pump)] * g_minus[np.argmax(pump)]
    if product > 1.0:
        ratio = 1.0 - 1.0 / math.sqrt(product)
        init = max(p_max / ratio, p_max * 1.001)
    specs = [ParamSpec(name="p_th_mw", init=init, transform="log", lower=p_max)]

    if p_max <= 0.0 or not np.any(pumped):
        return _not_converged(specs, "нет строк с накачкой > 0")
    if np.all(g_minus[pumped] >= 1.0) or np.all(g_plus[pumped] <= 1.0):
        return _not_converged(specs, "деусиление выше 1 или усиление ниже 1: данные не согласуются ни с каким P_th")

    def residuals(params: Dict[str, float]) -> np.ndarray:
        model = _gain_curves(pump, params["p_th_mw"])
        return residual_vector([
            (model["g_plus"] - g_plus, sigma_plus),
            (model["g_minus"] - g_minus, sigma_minus),
        ])

    fit = least_squares(residuals, specs, options)
    logger.fit("порог по усилению", fit.rss, fit.iterations)

    grid = np.linspace(0.0, p_max, 101)
    curves = _gain_curves(grid, fit.params["p_th_mw"])
    return fit.model_copy(update={"curves": {
        "pump_mw": grid.tolist(),
        "g_plus": curves["g_plus"].tolist(),
        "g_minus": curves["g_minus"].tolist(),
    }})


def _pair_db(pump: np.ndarray, p_th: float, eta: float):
    x = np.sqrt(pump / p_th)
    lost = 4.0 * x * (1.0 - eta)
    outer, inner = (1.0 + x) ** 2, (1.0 - x) ** 2
    v_minus = (inner + lost) / outer
    v_plus = (outer - lost) / inner
    return 10.0 * np.log10(v_minus), 10.0 * np.log10(v_plus)


def fit_squeeze_sweep(
    data: DataSet,
    eta_esc: float,
    eta_det: float,
    free_eta_det: bool = False,
    options: Optional[FitOptions] = None,
) -> FitResult:
    """
    Порог (и при free_eta_det - eta_det) по зависимости сжатия/антисжатия
    от накачки. Невязки в дБ; eta_esc фиксирована.

    Кривые в результате: детектируемые и произведённые (eta_det = 1) уровни.
    """
    _require(data, "squeeze")
    for name, value in (("eta_esc", eta_esc), ("eta_det", eta_det)):
        if not 0.0 < value <= 1.0:
            raise DomainError(f"{name} должна быть в (0, 1], получено {value!r}", **{name: value})

    pump = data.column("pump_mw")
    db_min, db_max = data.column("rel_noise_db_min"), data.column("rel_noise_db_max")
    sigma = _sigma(data.column("err_db"))
    p_max = float(np.max(pump))

    specs = [ParamSpec(name="p_th_mw", init=max(3.0 * p_max, 1.0), transform="log", lower=p_max)]
    if free_eta_det:
        specs.append(ParamSpec(name="eta_det", init=eta_det, transform="logit", lower=0.0, upper=1.0))
    if p_max <= 0.0:
        return _not_converged(specs, "нет строк с накачкой > 0")

    top = int(np.argmax(pump))
    init = None
    try:
        inferred = OpoService.infer_from_pair(db_min[top], db_max[top])
        init = p_max / inferred["pump_ratio"]
    except NonPhysicalPairError:
        try:
            init = p_max / OpoService.pump_ratio_for_target(db_min[top], eta_esc * eta_det)
        except DomainError:
            pass
    if init is not None and init > p_max:
        specs[0] = specs[0].model_copy(update={"init": init})

    for p, lo, hi in zip(pump, db_min, db_max):
        if p <= 0.0:
            continue
        try:
            OpoService.infer_from_pair(lo, hi)
        except NonPhysicalPairError as e:
            if e.code == "efficiency":
                return _not_converged(specs, f"при накачке {p:g} мВт пара требует eta_total > 1")

    def efficiency(params: Dict[str, float]) -> float:
        return eta_esc * params.get("eta_det", eta_det)

    def residuals(params: Dict[str, float]) -> np.ndarray:
        model_min, model_max = _pair_db(pump, params["p_th_mw"], efficiency(params))
        return residual_vector([(model_min - db_min, sigma), (model_max - db_max, sigma)])

    fit = least_squares(residuals, specs, options)
    logger.fit("порог по сжатию", fit.rss, fit.iterations)

    p_th = fit.params["p_th_mw"]
    grid = np.linspace(0.0, p_max, 101)
    detected = _pair_db(grid, p_th, efficiency(fit.params))
    produced = _pair_db(grid, p_th, eta_esc)
    return fit.model_copy(update={"curves": {
        "pump_mw": grid.tolist(),
        "sqz_db": detected[0].tolist(),
        "antisqz_db": detected[1].tolist(),
        "produced_sqz_db": produced[0].tolist(),
        "produced_antisqz_db": produced[1].tolist(),
    }})


def characterize_cavity(
    data: DataSet,
    known: CavitySpec,
    probe_side: ProbeSide = "coupler",
    options: Optional[FitOptions] = None,
) -> FitResult:
    """
    R_hr и потери (дБ/см) по измеренным T/R на резонансе и в антирезонансе.

    r_out, длина и показатель преломления берутся из known; его r_hr и loss -
    только начальное приближение. Нужно не меньше двух разных величин.
    Если якобиан вырожден, результат помечается несошедшимся с диагностикой.
    """
    if data.kind != "fp_response":
        raise DomainError(f"Ожидается таблица fp_response, получено {data.kind}", kind=data.kind)
    quantities = [row.quantity for row in data.rows]
    if len(set(quantities)) < 2:
        raise DomainError(
            f"Нужно не меньше двух разных величин, получено {sorted(set(quantities))}",
            quantities=sorted(set(quantities)),
        )

    values = data.column("value")
    sigma = _sigma(data.column("err"))
    specs = [
        ParamSpec(name="r_hr", init=min(known.r_hr, 0.999), transform="logit", lower=0.0, upper=1.0),
        ParamSpec(name="loss_db_per_cm", init=max(known.loss, 0.01), transform="square", lower=0.0),
    ]

    def model(params: Dict[str, float]) -> np.ndarray:
        spec = known.replace(r_hr=params["r_hr"], loss=params["loss_db_per_cm"])
        on = CavityService.airy_response(spec, probe_side, on_resonance=True)
        off = CavityService.airy_response(spec, probe_side, on_resonance=False)
        lookup = {
            "t_on": on.transmission,
            "r_on": on.reflection,
            "t_off": off.transmission,
            "r_off": off.reflection,
        }
        return np.array([lookup[q] for q in quantities])

    def residuals(params: Dict[str, float]) -> np.ndarray:
        return residual_vector([(model(params) - values, sigma)])

    fit = least_squares(residuals, specs, options, sensitivity_check=True)
    logger.fit("характеризация резонатора", fit.rss, fit.iterations)
    return fit.model_copy(update={"curves": {
        "quantity_index": list(range(len(quantities))),
        "value_model": model(fit.params).tolist(),
    }})
