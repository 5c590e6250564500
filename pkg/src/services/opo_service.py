"""
Модель вырожденного параметрического генератора ниже порога:
усиление затравки, дисперсии квадратур с потерями, спектр сжатия,
пересчёт дБ и обратная задача по паре сжатие/антисжатие
"""
import math
from typing import Dict

from ..common.errors import AboveThresholdError, DomainError, NonPhysicalPairError
from ..models import CavityRates, QuadraturePair, SqueezerState


class OpoService:
    """Формулы ниже порога без истощения накачки"""

    @staticmethod
    def check_pump_ratio(pump_ratio: float) -> float:
        """
        Проверка области определения P/P_th.

        :raises DomainError: для отрицательных значений и nan
        :raises AboveThresholdError: для P/P_th >= 1
        """
        if not pump_ratio >= 0.0:
            raise DomainError(f"pump_ratio должен быть >= 0, получено {pump_ratio!r}", pump_ratio=pump_ratio)
        if pump_ratio >= 1.0:
            raise AboveThresholdError(pump_ratio)
        return pump_ratio

    @staticmethod
    def parametric_gain(pump_ratio: float) -> Dict[str, float]:
        """
        Усиление затравки ниже порога: G± = (1 ± x)² / (1 - x²)² = 1 / (1 ∓ x)², x = √(P/P_th)

        :return: {"g_plus": ..., "g_minus": ...}
        """
        OpoService.check_pump_ratio(pump_ratio)
        x = math.sqrt(pump_ratio)
        return {"g_plus": 1.0 / (1.0 - x) ** 2, "g_minus": 1.0 / (1.0 + x) ** 2}

    @staticmethod
    def variances(state: SqueezerState) -> QuadraturePair:
        """
        Детектируемые дисперсии: V± = 1 ± η_esc·η_det·4x/(1 ∓ x)²

        V₋ сжата (знаменатель (1+x)²), V₊ растянута (знаменатель (1-x)²).
        """
        return OpoService._lorentzian_pair(state.pump_ratio, state.eta_total, 0.0)

    @staticmethod
    def squeezing_spectrum(state: SqueezerState, rates: CavityRates, sideband_hz: float) -> QuadraturePair:
        """
        Лоренцев спад сжатия по частоте боковой полосы:
        V±(Ω) = 1 ± η·4x/((1 ∓ x)² + (Ω/γ_tot)²), Ω = 2π·f.

        Расширение модели; при f = 0 совпадает с variances().
        """
        if not sideband_hz >= 0.0:
            raise DomainError(f"sideband_hz должен быть >= 0, получено {sideband_hz!r}", sideband_hz=sideband_hz)
        omega_rel = 2.0 * math.pi * sideband_hz / rates.gamma_tot
        return OpoService._lorentzian_pair(state.pump_ratio, state.eta_total, omega_rel)

    @staticmethod
    def _lorentzian_pair(pump_ratio: float, eta: float, omega_rel: float) -> QuadraturePair:
        OpoService.check_pump_ratio(pump_ratio)
        x = math.sqrt(pump_ratio)
        w2 = omega_rel ** 2
        # V± = 1 ∓ η·4x/D± в факторизованном виде; при η = 1 V₊V₋ = 1 до ulp
        lost = 4.0 * x * (1.0 - eta)
        outer, inner = (1.0 + x) ** 2 + w2, (1.0 - x) ** 2 + w2
        v_minus = (inner + lost) / outer
        v_plus = (outer - lost) / inner
        return QuadraturePair.from_linear(v_minus, v_plus)

    @staticmethod
    def infer_from_pair(sqz_db: float, antisqz_db: float) -> Dict[str, float]:
        """
        Обратная задача в замкнутом виде.

        A = 1 - V₋, B = V₊ - 1, r = B/A, x = (√r - 1)/(√r + 1),
        η_total = A(1 + x)²/(4x), P/P_th = x².

        :raises NonPhysicalPairError: с указанием нарушенного условия
        """
        v_minus = linear_from_db(sqz_db)
        v_plus = linear_from_db(antisqz_db)
        a = 1.0 - v_minus
        b = v_plus - 1.0

        if v_minus >= 1.0:
            raise NonPhysicalPairError("V₋ >= 1 (нет сжатия)", sqz_db, antisqz_db, code="no_squeezing")
        if v_plus <= 1.0:
            raise NonPhysicalPairError("V₊ <= 1 (нет антисжатия)", sqz_db, antisqz_db, code="no_antisqueezing")
        if b <= a:
            raise NonPhysicalPairError("V₊ - 1 <= 1 - V₋ (антисжатие должно превышать сжатие)", sqz_db, antisqz_db, code="asymmetry")

        root = math.sqrt(b / a)
        x = (root - 1.0) / (root + 1.0)
        eta_total = a * (1.0 + x) ** 2 / (4.0 * x)
        if eta_total > 1.0 + 1e-9:
            raise NonPhysicalPairError(f"требуемая эффективность {eta_total:.6g} > 1", sqz_db, antisqz_db, code="efficiency")
        eta_total = min(eta_total, 1.0)

        return {"eta_total": eta_total, "pump_ratio": x * x}

    @staticmethod
    def produced_limit(eta: float) -> float:
        """
        Предел сжатия при P → P_th: V₋ → 1 - η (антисжатие расходится)

        :return: sqz_db предельного уровня (-inf при η = 1)
        """
        if not 0.0 < eta <= 1.0:
            raise DomainError(f"eta должна быть в (0, 1], получено {eta!r}", eta=eta)
        if eta == 1.0:
            return float("-inf")
        return 10.0 * math.log10(1.0 - eta)

    @staticmethod
    def pump_ratio_for_target(sqz_db: float, eta_total: float) -> float:
        """
        Накачка P/P_th, дающая целевое сжатие при заданной эффективности.

        k = (1 - V₋)/η, x = ((2 - k) - 2√(1 - k))/k.

        :raises DomainError: если цель недостижима (k >= 1) или sqz_db >= 0
        """
        if not 0.0 < eta_total <= 1.0:
            raise DomainError(f"eta_total должна быть в (0, 1], получено {eta_total!r}", eta_total=eta_total)
        v_minus = linear_from_db(sqz_db)
        if v_minus >= 1.0:
            raise DomainError("Целевой уровень должен быть ниже дробового шума (sqz_db < 0)", sqz_db=sqz_db)
        k = (1.0 - v_minus) / eta_total
        if k >= 1.0:
            limit_db = OpoService.produced_limit(eta_total)
            raise DomainError(
                f"Сжатие {sqz_db:.4g} дБ недостижимо при eta={eta_total:.4g} (предел {limit_db:.4g} дБ)",
                sqz_db=sqz_db,
                eta_total=eta_total,
            )
        x = ((2.0 - k) - 2.0 * math.sqrt(1.0 - k)) / k
        return x * x


def db_from_linear(v: float) -> float:
    """
    Линейная дисперсия -> дБ (10·log10)

    :raises DomainError: для v <= 0
    """
    if not v > 0.0:
        raise DomainError(f"Дисперсия должна быть > 0, получено {v!r}", value=v)
    return 10.0 * math.log10(v)


def linear_from_db(d: float) -> float:
    """дБ -> линейная дисперсия"""
    return 10.0 ** (d / 10.0)


def parametric_gain(pump_ratio: float) -> Dict[str, float]:
    return OpoService.parametric_gain(pump_ratio)


def variances(state: SqueezerState) -> QuadraturePair:
    return OpoService.variances(state)


def infer_from_pair(sqz_db: float, antisqz_db: float) -> Dict[str, float]:
    return OpoService.infer_from_pair(sqz_db, antisqz_db)


def squeezing_spectrum(state: SqueezerState, rates: CavityRates, sideband_hz: float) -> QuadraturePair:
    return OpoService.squeezing_spectrum(state, rates, sideband_hz)
