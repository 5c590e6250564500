"""
Симулятор гомодинных трасс анализатора спектра в нулевой полосе обзора:
дробовой шум, трасса сжатия с движением фазы гетеродина, коррекция
темнового шума и извлечение уровней сжатия/антисжатия
"""
import math
from typing import Iterable, Optional

import numpy as np

from ..common.errors import AboveThresholdError, DomainError
from ..models import (
    CavityRates,
    DataSet,
    DriftPhase,
    FixedPhase,
    MeasuredLevels,
    QuadraturePair,
    ScannedPhase,
    SimulationResult,
    SqueezeRow,
    Trace,
    TraceConfig,
)
from ..models.trace import TRACE_SCHEMA_VERSION
from .logger_service import logger
from .opo_service import OpoService


class TraceSimulator:
    """
    Генератор трасс с хи-квадрат статистикой оценщика мощности.

    Каждая точка - среднее N_eff = rbw/vbw независимых квадратов отсчёта,
    поэтому мощность ~ уровень · χ²(N_eff)/N_eff. Дробовая трасса усредняется
    ещё в shot_averages раз. Случайность только из np.random.default_rng(seed).
    """

    def __init__(self, rates: Optional[CavityRates] = None):
        """
        :param rates: Скорости резонатора; нужны только для sideband_hz > 0
        """
        self.rates = rates

    @staticmethod
    def variance_at_phase(pair: QuadraturePair, theta):
        """V(θ) = V₋·cos²θ + V₊·sin²θ"""
        theta = np.asarray(theta, dtype=float)
        return pair.v_minus * np.cos(theta) ** 2 + pair.v_plus * np.sin(theta) ** 2

    def quadrature_pair(self, config: TraceConfig) -> QuadraturePair:
        """Пара дисперсий рабочей точки (со спектральным спадом при sideband_hz > 0)"""
        if config.sideband_hz > 0.0:
            if self.rates is None:
                raise DomainError("Для sideband_hz > 0 нужны скорости резонатора", sideband_hz=config.sideband_hz)
            return OpoService.squeezing_spectrum(config.state, self.rates, config.sideband_hz)
        return OpoService.variances(config.state)

    def expected_variance(self, config: TraceConfig, theta) -> np.ndarray:
        """
        Ожидаемая дисперсия при фазе θ с учётом гауссова джиттера σ:
        <V> = (V₋+V₊)/2 + (V₋-V₊)/2 · cos2θ · exp(-2σ²)
        """
        pair = self.quadrature_pair(config)
        theta = np.asarray(theta, dtype=float)
        mean = 0.5 * (pair.v_minus + pair.v_plus)
        half_diff = 0.5 * (pair.v_minus - pair.v_plus)
        contrast = math.exp(-2.0 * config.phase_jitter_rad ** 2)
        return mean + half_diff * np.cos(2.0 * theta) * contrast

    @staticmethod
    def phase_track(config: TraceConfig, time: np.ndarray, rng: np.random.Generator) -> np.ndarray:
        """Фаза гетеродина по времени для выбранного режима"""
        mode = config.phase_mode
        if isinstance(mode, ScannedPhase):
            frac = np.mod(time / mode.period, 1.0)
            if mode.waveform == "triangle":
                return mode.span * (1.0 - np.abs(2.0 * frac - 1.0))
            return mode.span * frac
        if isinstance(mode, DriftPhase):
            diffusion = mode.diffusion if mode.diffusion is not None else math.pi ** 2 / config.duration
            steps = rng.normal(0.0, math.sqrt(diffusion / config.sample_rate), size=len(time))
            steps[0] = 0.0
            return mode.theta0 + np.cumsum(steps)
        if isinstance(mode, FixedPhase):
            return np.full(len(time), mode.theta)
        raise DomainError(f"Неизвестный режим фазы: {mode!r}")

    def simulate(self, config: TraceConfig) -> SimulationResult:
        """
        Одна пара трасс: дробовой шум (усреднённый) и трасса сжатия.

        Порядок розыгрыша: фаза (для дрейфа), дробовая трасса, трасса сжатия.
        Одинаковый config (включая seed) даёт побитно одинаковый результат.
        """
        rng = np.random.default_rng(config.seed)
        n = config.n_points
        time = np.arange(n) / config.sample_rate
        dark = config.dark_level
        n_eff = config.n_eff

        phase = self.phase_track(config, time, rng)

        shot_dof = n_eff * config.shot_averages
        shot_power = (1.0 + dark) * rng.chisquare(shot_dof, size=n) / shot_dof

        level = self.expected_variance(config, phase) + dark
        sqz_power = level * rng.chisquare(n_eff, size=n) / n_eff

        metadata = {
            "schema": TRACE_SCHEMA_VERSION,
            "seed": config.seed,
            "n_eff": n_eff,
            "config": config.model_dump(mode="json"),
        }

        shot_raw = _raw_trace(time, None, shot_power, dark, {**metadata, "role": "shot"})
        sqz_raw = _raw_trace(time, phase, sqz_power, dark, {**metadata, "role": "squeeze"})

        logger.sim("трассы сгенерированы", seed=config.seed, points=n)
        return SimulationResult(
            shot=TraceSimulator.dark_correct(shot_raw, shot_raw),
            squeeze=TraceSimulator.dark_correct(sqz_raw, shot_raw),
        )

    @staticmethod
    def dark_correct(raw: Trace, shot_raw: Trace) -> Trace:
        """
        Вычитание темнового шума в линейной мощности:
        V = (P - d)/(P_shot - d), P_shot - среднее дробовой трассы.

        Точки с P <= d помечаются невалидными (nan), а не обрезаются.

        :raises DomainError: если средний дробовой уровень не выше темнового
        """
        dark = raw.dark_level
        shot_reference = float(np.mean(shot_raw.raw_power))
        if not shot_reference > dark:
            raise DomainError(
                f"Дробовой уровень {shot_reference:.4g} не выше темнового {dark:.4g}",
                shot_reference=shot_reference,
                dark_level=dark,
            )

        corrected = (raw.raw_power - dark) / (shot_reference - dark)
        valid = corrected > 0.0
        corrected_db = np.full(len(corrected), np.nan)
        corrected_db[valid] = 10.0 * np.log10(corrected[valid])

        invalid = int(np.count_nonzero(~valid))
        if invalid:
            logger.warning(f"Невалидных точек после вычитания темнового шума: {invalid}")

        return raw.model_copy(
            update={
                "raw_db": 10.0 * np.log10(raw.raw_power / shot_reference),
                "corrected_db": corrected_db,
                "metadata": {**raw.metadata, "shot_reference": shot_reference, "invalid_points": invalid},
            }
        )

    @staticmethod
    def extract_levels(trace: Trace) -> MeasuredLevels:
        """
        Уровни V₋, V₊ по скорректированной трассе с известной фазой.

        Взвешенная регрессия V = V₋·cos²θ + V₊·sin²θ: сначала обычный МНК,
        затем веса 1/V̂² (разброс оценщика пропорционален уровню).

        :raises DomainError: без фазы или если фаза не меняется
        """
        if trace.phase is None:
            raise DomainError("Для извлечения уровней нужна фаза гетеродина")
        valid = trace.valid
        theta = trace.phase[valid]
        y = trace.corrected_linear[valid]
        design = np.column_stack([np.cos(theta) ** 2, np.sin(theta) ** 2])
        if len(y) < 3 or np.linalg.matrix_rank(design) < 2:
            raise DomainError("Фаза не покрывает обе квадратуры: уровни не определены")

        beta, *_ = np.linalg.lstsq(design, y, rcond=None)
        fitted = design @ beta
        if np.any(fitted <= 0.0):
            raise DomainError("Регрессия дала неположительную дисперсию")

        weights = 1.0 / fitted ** 2
        weighted = design * np.sqrt(weights)[:, None]
        beta, *_ = np.linalg.lstsq(weighted, y * np.sqrt(weights), rcond=None)
        v_minus, v_plus = float(beta[0]), float(beta[1])
        if v_minus <= 0.0 or v_plus <= 0.0:
            raise DomainError(f"Неположительный уровень: V₋={v_minus:.4g}, V₊={v_plus:.4g}")

        residuals = (y - design @ beta) * np.sqrt(weights)
        dof = max(1, len(y) - 2)
        scale = float(residuals @ residuals) / dof
        covariance = scale * np.linalg.inv(weighted.T @ weighted)
        rel_minus = math.sqrt(covariance[0, 0]) / v_minus
        rel_plus = math.sqrt(covariance[1, 1]) / v_plus
        err_db = 10.0 / math.log(10.0) * math.sqrt(0.5 * (rel_minus ** 2 + rel_plus ** 2))

        return MeasuredLevels(
            sqz_db=10.0 * math.log10(v_minus),
            antisqz_db=10.0 * math.log10(v_plus),
            err_db=err_db,
            v_minus=v_minus,
            v_plus=v_plus,
        )

    def simulate_sweep(self, config: TraceConfig, pumps_mw: Iterable[float], p_th_mw: float) -> DataSet:
        """
        Серия трасс по накачке -> таблица squeeze для подгонки.

        Точка i использует seed + i; P/P_th = pump/p_th_mw.

        :raises AboveThresholdError: если какая-то накачка не ниже порога
        """
        rows = []
        for i, pump_mw in enumerate(pumps_mw):
            ratio = pump_mw / p_th_mw
            if ratio >= 1.0:
                raise AboveThresholdError(ratio)
            state = config.state.model_copy(update={"pump_ratio": ratio})
            point_config = config.model_copy(update={"state": state, "seed": config.seed + i})
            levels = self.extract_levels(self.simulate(point_config).squeeze)
            rows.append(
                SqueezeRow(
                    pump_mw=pump_mw,
                    rel_noise_db_min=levels.sqz_db,
                    rel_noise_db_max=levels.antisqz_db,
                    err_db=levels.err_db,
                )
            )
        logger.sim(f"серия из {len(rows)} накачек", seed=config.seed)
        return DataSet(kind="squeeze", rows=rows, source="simulation")


def _raw_trace(time, phase, power, dark: float, metadata: dict) -> Trace:
    """Сырая трасса до коррекции; дБ заполняются в dark_correct"""
    empty = np.full(len(power), np.nan)
    return Trace(
        time=time,
        phase=phase,
        raw_power=power,
        raw_db=empty,
        corrected_db=empty,
        dark_level=dark,
        metadata=metadata,
    )


def simulate(config: TraceConfig, rates: Optional[CavityRates] = None) -> SimulationResult:
    return TraceSimulator(rates).simulate(config)


def dark_correct(raw: Trace, shot_raw: Trace) -> Trace:
    return TraceSimulator.dark_correct(raw, shot_raw)
