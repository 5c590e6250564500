"""
Нелинейный МНК Левенберга-Марквардта с преобразованием параметров,
детерминированным мультистартом и стандартными ошибками
"""
import math
from typing import Callable, Dict, List, Literal, Optional, Sequence, Tuple

import numpy as np
from pydantic import BaseModel, ConfigDict, Field

from ...common.errors import SqzkitError
from ...models import FitOptions, FitResult
from ..logger_service import logger

Transform = Literal["none", "log", "logit", "square"]
ResidualFn = Callable[[Dict[str, float]], np.ndarray]

# Разброс стартов во внутренних координатах
START_SPREAD = 1.0
# Относительный шаг центральной разности
JACOBIAN_STEP = np.cbrt(np.finfo(float).eps)


class ParamSpec(BaseModel):
    """Свободный параметр подгонки и его отображение во внутреннюю координату.

    log:    p = lower + exp(u)                  (p > lower)
    logit:  p = lower + (upper-lower)·σ(u)      (lower < p < upper)
    square: p = lower + u²                      (p >= lower, допускает границу)
    """

    model_config = ConfigDict(frozen=True)

    name: str
    init: float
    transform: Transform = "none"
    lower: float = 0.0
    upper: float = 1.0

    def to_internal(self, value: float) -> float:
        if self.transform == "log":
            return math.log(max(value - self.lower, 1e-300))
        if self.transform == "logit":
            frac = (value - self.lower) / (self.upper - self.lower)
            frac = min(max(frac, 1e-12), 1.0 - 1e-12)
            return math.log(frac / (1.0 - frac))
        if self.transform == "square":
            return math.sqrt(max(value - self.lower, 0.0))
        return value

    def to_physical(self, u: float) -> float:
        if self.transform == "log":
            return self.lower + math.exp(min(u, 700.0))
        if self.transform == "logit":
            return self.lower + (self.upper - self.lower) * _sigmoid(u)
        if self.transform == "square":
            return self.lower + u * u
        return u

    def in_domain(self, value: float) -> bool:
        if self.transform == "log":
            return value > self.lower
        if self.transform == "logit":
            return self.lower < value < self.upper
        if self.transform == "square":
            return value >= self.lower
        return True


class _Run(BaseModel):
    """Итог одного старта"""

    u: List[float]
    rss: float
    iterations: int
    converged: bool
    gradient_norm: float
    history: List[float] = Field(default_factory=list)
    reason: str = ""


def _sigmoid(u: float) -> float:
    if u >= 0:
        return 1.0 / (1.0 + math.exp(-u))
    e = math.exp(u)
    return e / (1.0 + e)


def _safe_residuals(fun: Callable[[np.ndarray], np.ndarray], u: np.ndarray) -> Optional[np.ndarray]:
    """Невязки или None, если модель вне области определения"""
    try:
        r = np.asarray(fun(u), dtype=float)
    except (SqzkitError, ValueError, ZeroDivisionError, OverflowError, FloatingPointError):
        return None
    if not np.all(np.isfinite(r)):
        return None
    return r


def _jacobian(fun: Callable[[np.ndarray], np.ndarray], u: np.ndarray, r0: np.ndarray) -> np.ndarray:
    """Центральные разности; односторонние, если одна из точек вне области"""
    jac = np.empty((len(r0), len(u)))
    for j in range(len(u)):
        h = JACOBIAN_STEP * max(1.0, abs(u[j]))
        up, down = u.copy(), u.copy()
        up[j] += h
        down[j] -= h
        r_up, r_down = _safe_residuals(fun, up), _safe_residuals(fun, down)
        if r_up is not None and r_down is not None:
            jac[:, j] = (r_up - r_down) / (2.0 * h)
        elif r_up is not None:
            jac[:, j] = (r_up - r0) / h
        elif r_down is not None:
            jac[:, j] = (r0 - r_down) / h
        else:
            jac[:, j] = 0.0
    return jac


def _levenberg_marquardt(fun: Callable[[np.ndarray], np.ndarray], u0: np.ndarray, options: FitOptions) -> _Run:
    """
    Один старт LM с демпфированием Нильсена:
    μ ← μ·max(1/3, 1 - (2ρ - 1)³) при успехе, иначе μ ← μ·ν, ν ← 2ν.

    Остановка: ||JᵀR||∞ < grad_tol или ||δ|| <= step_tol·(||u|| + step_tol).
    """
    u = np.array(u0, dtype=float)
    r = _safe_residuals(fun, u)
    if r is None:
        return _Run(u=list(u), rss=math.inf, iterations=0, converged=False, gradient_norm=math.inf, reason="domain")

    rss = float(r @ r)
    jac = _jacobian(fun, u, r)
    hess = jac.T @ jac
    grad = jac.T @ r
    mu = 1e-3 * max(float(np.max(np.diag(hess))), 1e-12)
    nu = 2.0
    history = [rss]

    for iteration in range(1, options.max_iter + 1):
        gradient_norm = float(np.max(np.abs(grad))) if len(grad) else 0.0
        if gradient_norm < options.grad_tol:
            return _Run(u=list(u), rss=rss, iterations=iteration - 1, converged=True,
                        gradient_norm=gradient_norm, history=history, reason="gradient")

        damped = hess + mu * np.eye(len(u))
        try:
            step = np.linalg.solve(damped, -grad)
        except np.linalg.LinAlgError:
            step = np.linalg.lstsq(damped, -grad, rcond=None)[0]

        if np.linalg.norm(step) <= options.step_tol * (np.linalg.norm(u) + options.step_tol):
            return _Run(u=list(u), rss=rss, iterations=iteration - 1, converged=True,
                        gradient_norm=gradient_norm, history=history, reason="step")

        u_new = u + step
        r_new = _safe_residuals(fun, u_new)
        rss_new = float(r_new @ r_new) if r_new is not None else math.inf
        linear = r + jac @ step
        predicted = rss - float(linear @ linear)
        rho = (rss - rss_new) / predicted if predicted > 0.0 else -1.0

        if r_new is not None and rho > 0.0:
            u, r, rss = u_new, r_new, rss_new
            jac = _jacobian(fun, u, r)
            hess = jac.T @ jac
            grad = jac.T @ r
            mu *= max(1.0 / 3.0, 1.0 - (2.0 * rho - 1.0) ** 3)
            nu = 2.0
            history.append(rss)
        else:
            mu *= nu
            nu *= 2.0

    gradient_norm = float(np.max(np.abs(grad))) if len(grad) else 0.0
    return _Run(u=list(u), rss=rss, iterations=options.max_iter, converged=False,
                gradient_norm=gradient_norm, history=history, reason="max_iter")


def physical_jacobian(
    residual_fn: ResidualFn,
    specs: Sequence[ParamSpec],
    params: Dict[str, float],
) -> np.ndarray:
    """Якобиан невязок по физическим параметрам (шаг внутрь области у границ)"""
    base = np.asarray(residual_fn(params), dtype=float)
    jac = np.empty((len(base), len(specs)))
    for j, spec in enumerate(specs):
        value = params[spec.name]
        h = 1e-6 * max(abs(value), 1e-3)
        up, down = dict(params), dict(params)
        up[spec.name] = value + h
        down[spec.name] = value - h
        if spec.in_domain(up[spec.name]) and spec.in_domain(down[spec.name]):
            jac[:, j] = (np.asarray(residual_fn(up)) - np.asarray(residual_fn(down))) / (2.0 * h)
        elif spec.in_domain(up[spec.name]):
            jac[:, j] = (np.asarray(residual_fn(up)) - base) / h
        else:
            jac[:, j] = (base - np.asarray(residual_fn(down))) / h
    return jac


def _start_points(specs: Sequence[ParamSpec], options: FitOptions) -> List[np.ndarray]:
    """Старт 0 - из начального приближения, остальные - его детерминированные сдвиги"""
    u0 = np.array([spec.to_internal(spec.init) for spec in specs])
    rng = np.random.default_rng(options.seed)
    starts = [u0]
    for _ in range(options.starts - 1):
        starts.append(u0 + rng.normal(0.0, START_SPREAD, size=len(u0)))
    return starts


def least_squares(
    residual_fn: ResidualFn,
    specs: Sequence[ParamSpec],
    options: Optional[FitOptions] = None,
    sensitivity_check: bool = False,
) -> FitResult:
    """
    Минимизация Σ rᵢ(θ)² по физическим параметрам specs.

    Выбирается сошедшийся старт с наименьшим RSS; если ни один не сошёлся,
    возвращается лучший с converged=False. Стандартные ошибки:
    sqrt(diag(s²·(JᵀJ)⁻¹)), s² = RSS/dof (при dof = 0 веса считаются абсолютными).

    :param residual_fn: dict параметров -> вектор взвешенных невязок
    :param sensitivity_check: проверять вырожденность якобиана
    """
    options = options or FitOptions.from_env()
    names = [spec.name for spec in specs]

    def to_params(u: np.ndarray) -> Dict[str, float]:
        return {spec.name: spec.to_physical(float(ui)) for spec, ui in zip(specs, u)}

    def internal_fn(u: np.ndarray) -> np.ndarray:
        return residual_fn(to_params(u))

    runs: List[_Run] = []
    for k, u_start in enumerate(_start_points(specs, options)):
        run = _levenberg_marquardt(internal_fn, u_start, options)
        logger.debug(f"старт {k}: rss={run.rss:.6g}, iter={run.iterations}, причина={run.reason}")
        runs.append(run)

    converged_runs = [run for run in runs if run.converged and math.isfinite(run.rss)]
    pool = converged_runs or [run for run in runs if math.isfinite(run.rss)]
    if not pool:
        return FitResult(
            params={spec.name: spec.init for spec in specs},
            stderr={name: math.inf for name in names},
            rss=math.inf,
            converged=False,
            iterations=0,
            starts=len(runs),
            diagnostic="модель не вычислима ни в одной стартовой точке",
        )

    best = min(pool, key=lambda run: run.rss)
    params = to_params(np.array(best.u))
    residuals = np.asarray(residual_fn(params), dtype=float)
    dof = len(residuals) - len(specs)

    jac = physical_jacobian(residual_fn, specs, params)
    scale = best.rss / dof if dof > 0 else 1.0
    covariance = scale * np.linalg.pinv(jac.T @ jac)
    stderr = {name: float(math.sqrt(max(covariance[j, j], 0.0))) for j, name in enumerate(names)}

    converged = best.converged
    diagnostic = None if converged else f"нет сходимости за {options.max_iter} итераций"
    if sensitivity_check:
        weak = _insensitive_parameter(jac, names)
        if weak is not None:
            converged = False
            diagnostic = f"данные не чувствительны к параметру {weak}: параметры не разделяются"

    logger.debug(f"лучший старт: rss={best.rss:.6g}, dof={dof}, converged={converged}")
    return FitResult(
        params=params,
        stderr=stderr,
        rss=best.rss,
        converged=converged,
        iterations=best.iterations,
        gradient_norm=best.gradient_norm,
        dof=dof,
        starts=len(runs),
        diagnostic=diagnostic,
        rss_history=best.history,
        residuals=list(residuals),
    )


def _insensitive_parameter(jac: np.ndarray, names: Sequence[str]) -> Optional[str]:
    """Имя параметра, к которому невязки не чувствительны, либо None"""
    norms = np.linalg.norm(jac, axis=0)
    if not np.all(np.isfinite(norms)) or np.max(norms) == 0.0:
        return names[0]
    weakest = int(np.argmin(norms))
    if norms[weakest] <= 1e-9 * np.max(norms):
        return names[weakest]
    if len(names) > 1:
        normalized = jac / norms
        singular = np.linalg.svd(normalized, compute_uv=False)
        if singular[-1] <= 1e-6 * singular[0]:
            return names[weakest]
    return None


def residual_vector(parts: Sequence[Tuple[np.ndarray, np.ndarray]]) -> np.ndarray:
    """Склейка блоков (модель - данные)/σ в один вектор"""
    return np.concatenate([np.asarray(diff, dtype=float) / np.asarray(sigma, dtype=float) for diff, sigma in parts])
