"""
Линейная оптика резонатора без усиления: время обхода, скорости затухания,
эффективность выхода и отклик Эйри двухзеркального резонатора с потерями
"""
import math
from typing import Literal, Optional

from scipy.optimize import brentq

from ..common.errors import DomainError
from ..models import AiryResponse, CavityRates, CavitySpec

SPEED_OF_LIGHT = 2.99792458e8  # м/с

ProbeSide = Literal["coupler", "hr"]


class CavityService:
    """Расчёт линейных свойств резонатора со стоячей волной"""

    @staticmethod
    def round_trip_time(spec: CavitySpec) -> float:
        """
        Время обхода резонатора со стоячей волной: tau = 2·n·L/c

        :param spec: Параметры резонатора (длина в мм)
        :return: Время обхода, с
        """
        return 2.0 * spec.ref_index * spec.length * 1e-3 / SPEED_OF_LIGHT

    @staticmethod
    def single_pass_amplitude(spec: CavitySpec) -> float:
        """Амплитудное пропускание среды за один проход: 10^(-αL/20)"""
        return 10.0 ** (-spec.loss * spec.length * 0.1 / 20.0)

    @staticmethod
    def round_trip_amplitude(spec: CavitySpec) -> float:
        """
        Амплитудный множитель потерь за обход.

        При двух проходах за обход равен 10^(-αL/10).

        :raises DomainError: если αL настолько велико, что множитель обнуляется
        """
        exponent = spec.loss * spec.length * 0.1 * spec.passes_per_round_trip / 20.0
        factor = 10.0 ** (-exponent)
        if not factor > 0.0:
            raise DomainError(
                f"Потери αL = {spec.loss * spec.length * 0.1:.6g} дБ слишком велики: "
                "множитель за обход численно равен нулю",
                loss_db_per_cm=spec.loss,
                length_mm=spec.length,
            )
        return factor

    @staticmethod
    def decay_rates(spec: CavitySpec) -> CavityRates:
        """
        Скорости затухания по каналам: γ_i = (1 - √R_i)/τ.

        Потери в среде сводятся к эквивалентному зеркалу с амплитудой
        round_trip_amplitude(spec).

        :param spec: Параметры резонатора
        :return: CavityRates с согласованными полями
        """
        tau = CavityService.round_trip_time(spec)
        loss_amplitude = CavityService.round_trip_amplitude(spec)

        gamma_coup = (1.0 - math.sqrt(spec.r_out)) / tau
        gamma_hr = (1.0 - math.sqrt(spec.r_hr)) / tau
        gamma_loss = (1.0 - loss_amplitude) / tau
        gamma_tot = gamma_coup + gamma_hr + gamma_loss

        return CavityRates(
            tau=tau,
            gamma_coup=gamma_coup,
            gamma_hr=gamma_hr,
            gamma_loss=gamma_loss,
            gamma_tot=gamma_tot,
            eta_esc=gamma_coup / gamma_tot,
            fwhm_bandwidth=gamma_tot / math.pi,
            fsr=1.0 / tau,
        )

    @staticmethod
    def finesse(spec: CavitySpec) -> float:
        """Резкость: FSR / FWHM = π / Σ(1 - √R_i)"""
        rates = CavityService.decay_rates(spec)
        return rates.fsr / rates.fwhm_bandwidth

    @staticmethod
    def airy_response(
        spec: CavitySpec,
        probe_side: ProbeSide = "coupler",
        on_resonance: bool = True,
        detuning_rad: Optional[float] = None,
    ) -> AiryResponse:
        """
        Пропускание и отражение резонатора с потерями (формулы Эйри).

        Вне резонанса отклик берётся в антирезонансе (φ = π), если явная
        расстройка за обход detuning_rad не задана.

        :param probe_side: Сторона, с которой заводится пробный пучок
        :param on_resonance: Резонанс (φ = 0) или антирезонанс (φ = π)
        :param detuning_rad: Произвольная фаза за обход, перекрывает on_resonance
        """
        if detuning_rad is None:
            detuning_rad = 0.0 if on_resonance else math.pi

        r_in, r_far = math.sqrt(spec.r_out), math.sqrt(spec.r_hr)
        t_in_sq, t_far_sq = 1.0 - spec.r_out, 1.0 - spec.r_hr
        if probe_side == "hr":
            r_in, r_far = r_far, r_in
            t_in_sq, t_far_sq = t_far_sq, t_in_sq

        a = CavityService.single_pass_amplitude(spec)
        g = CavityService.round_trip_amplitude(spec)
        loop = r_in * r_far * g
        cos_phi, sin_phi = math.cos(detuning_rad), math.sin(detuning_rad)

        # |1 - r1 r2 g e^{iφ}|² и |r1 - r2 g e^{iφ}|² в неотрицательной форме
        denominator = (1.0 - loop * cos_phi) ** 2 + (loop * sin_phi) ** 2
        transmission = t_in_sq * t_far_sq * a ** 2 / denominator
        reflection = ((r_in - r_far * g * cos_phi) ** 2 + (r_far * g * sin_phi) ** 2) / denominator

        return AiryResponse(transmission=transmission, reflection=reflection)

    @staticmethod
    def solve_length_for_escape(spec: CavitySpec, target_eta_esc: float) -> float:
        """
        Длина резонатора (мм), при которой эффективность выхода равна целевой.

        :raises DomainError: если цель недостижима при данных зеркалах и потерях
        """
        eta_max = CavityService.decay_rates(spec.replace(loss=0.0)).eta_esc
        if not 0.0 < target_eta_esc < eta_max:
            raise DomainError(
                f"eta_esc={target_eta_esc:.6g} недостижима: допустимо (0, {eta_max:.6g})",
                target_eta_esc=target_eta_esc,
            )
        if spec.loss == 0.0:
            raise DomainError("Без потерь eta_esc не зависит от длины", target_eta_esc=target_eta_esc)

        def mismatch(length_mm: float) -> float:
            return CavityService.decay_rates(spec.replace(length=length_mm)).eta_esc - target_eta_esc

        lo, hi = 1e-9, max(spec.length, 1.0)
        while mismatch(hi) > 0.0:
            hi *= 2.0
            if hi > 1e9:
                raise DomainError("Не удалось ограничить корень по длине", target_eta_esc=target_eta_esc)
        return brentq(mismatch, lo, hi, xtol=1e-12, rtol=1e-14)


def round_trip_time(spec: CavitySpec) -> float:
    """Время обхода резонатора, с"""
    return CavityService.round_trip_time(spec)


def decay_rates(spec: CavitySpec) -> CavityRates:
    """Скорости затухания и эффективность выхода"""
    return CavityService.decay_rates(spec)


def airy_response(
    spec: CavitySpec,
    probe_side: ProbeSide = "coupler",
    on_resonance: bool = True,
    detuning_rad: Optional[float] = None,
) -> AiryResponse:
    """Отклик Эйри резонатора"""
    return CavityService.airy_response(spec, probe_side, on_resonance, detuning_rad)
