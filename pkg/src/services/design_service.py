"""
Проектирование выходного зеркала: порог генерации, калибровка нелинейности
и перебор отражения с предсказанием детектируемого сжатия
"""
import math
from typing import List, Optional

from ..common.errors import AboveThresholdError, DomainError, InfeasibleDesignError
from ..models import CavitySpec, CouplerSweep, DesignPoint, DesignSpace, SqueezerState
from .cavity_service import CavityService
from .logger_service import logger
from .opo_service import OpoService


class DesignService:
    """Порог и перебор выходного зеркала при фиксированной нелинейности e_nl"""

    @staticmethod
    def round_trip_loss(spec: CavitySpec) -> float:
        """Паразитные потери за обход по мощности: (1 - R_hr) + (1 - 10^(-passes·αL/10))"""
        internal = 1.0 - CavityService.round_trip_amplitude(spec) ** 2
        return (1.0 - spec.r_hr) + internal

    @staticmethod
    def threshold_power(spec: CavitySpec, e_nl: float) -> float:
        """
        Порог генерации: P_th = (T_c + ℓ_rt)² / (4·e_nl)

        :param e_nl: Эффективная нелинейность за проход, 1/Вт
        :return: Порог, Вт
        """
        t_c = 1.0 - spec.r_out
        return (t_c + DesignService.round_trip_loss(spec)) ** 2 / (4.0 * e_nl)

    @staticmethod
    def calibrate_enl(spec: CavitySpec, p_th_observed: float) -> float:
        """Обратная формула порога: e_nl по наблюдаемому порогу (Вт)"""
        if not p_th_observed > 0.0:
            raise DomainError(f"p_th_observed должен быть > 0, получено {p_th_observed!r}", p_th_observed=p_th_observed)
        t_c = 1.0 - spec.r_out
        return (t_c + DesignService.round_trip_loss(spec)) ** 2 / (4.0 * p_th_observed)

    @staticmethod
    def predict_detected_sqz(space: DesignSpace, r_out: Optional[float] = None) -> DesignPoint:
        """
        Предсказание сжатия для одного выходного зеркала.

        Без strict отношение P/P_th ограничивается clip_ratio (флаг clipped),
        в строгом режиме P/P_th >= 1 даёт AboveThresholdError.
        """
        spec = space.base if r_out is None else space.base.replace(r_out=r_out)
        rates = CavityService.decay_rates(spec)
        p_th = DesignService.threshold_power(spec, space.e_nl)
        pump_ratio = space.pump_available / p_th

        clipped = False
        if space.strict:
            if pump_ratio >= 1.0:
                raise AboveThresholdError(pump_ratio)
        elif pump_ratio > space.clip_ratio:
            pump_ratio = space.clip_ratio
            clipped = True

        state = SqueezerState(pump_ratio=pump_ratio, eta_esc=rates.eta_esc, eta_det=space.chain.eta_det)
        detected = OpoService.variances(state)
        produced = OpoService.variances(state.model_copy(update={"eta_det": 1.0}))

        return DesignPoint(
            r_out=spec.r_out,
            eta_esc=rates.eta_esc,
            p_th=p_th,
            pump_ratio=pump_ratio,
            sqz_db=detected.sqz_db,
            antisqz_db=detected.antisqz_db,
            produced_sqz_db=produced.sqz_db,
            produced_antisqz_db=produced.antisqz_db,
            clipped=clipped,
        )

    @staticmethod
    def sweep_grid(space: DesignSpace) -> List[float]:
        """Сетка r_i = lo + i·step, i = 0..n-1, без накопления ошибки шага"""
        n = int(math.floor((space.r_out_hi - space.r_out_lo) / space.r_out_step + 1e-9)) + 1
        return [space.r_out_lo + i * space.r_out_step for i in range(n)]

    @staticmethod
    def optimize_coupler(space: DesignSpace) -> CouplerSweep:
        """
        Перебор отражения выходного зеркала.

        Лучшая точка - минимальный детектируемый sqz_db; при равенстве берётся
        первая по сетке. В строгом режиме точки выше порога исключаются.

        :raises InfeasibleDesignError: если допустимых точек нет
        """
        rows: List[DesignPoint] = []
        skipped = 0
        for r_out in DesignService.sweep_grid(space):
            try:
                rows.append(DesignService.predict_detected_sqz(space, r_out))
            except AboveThresholdError:
                skipped += 1

        if not rows:
            raise InfeasibleDesignError(
                f"Все {skipped} точек сетки [{space.r_out_lo}, {space.r_out_hi}] выше порога",
                skipped=skipped,
            )
        if skipped:
            logger.warning(f"Исключено точек выше порога: {skipped}")

        best = min(rows, key=lambda row: row.sqz_db)
        logger.debug(f"Лучшее R_out={best.r_out:.4f}: {best.sqz_db:.3f} дБ из {len(rows)} точек")
        return CouplerSweep(r_out_best=best.r_out, best=best, rows=rows)

    @staticmethod
    def improvement_projection(space: DesignSpace, loss_db_per_cm: float) -> DesignPoint:
        """Прогноз при сниженных потерях в среде и том же выходном зеркале (e_nl фиксирована)"""
        improved = space.model_copy(update={"base": space.base.replace(loss=loss_db_per_cm)})
        return DesignService.predict_detected_sqz(improved)


def threshold_power(spec: CavitySpec, e_nl: float) -> float:
    return DesignService.threshold_power(spec, e_nl)


def calibrate_enl(spec: CavitySpec, p_th_observed: float) -> float:
    return DesignService.calibrate_enl(spec, p_th_observed)


def predict_detected_sqz(space: DesignSpace, r_out: Optional[float] = None) -> DesignPoint:
    return DesignService.predict_detected_sqz(space, r_out)


def optimize_coupler(space: DesignSpace) -> CouplerSweep:
    return DesignService.optimize_coupler(space)
