"""
Команды прямых расчётов: резонатор, бюджет, предсказание, обратная задача
"""
from typing import ClassVar, Literal, Optional

import pandas as pd
from pydantic import BaseModel, Field, model_validator

from ..common.errors import DomainError
from ..models import SqueezerState
from ..services.budget_service import BudgetService
from ..services.cavity_service import CavityService
from ..services.logger_service import logger
from ..services.opo_service import OpoService
from .context import CommandContext, CommandReport, TableOut


def _below_shot(magnitude: float) -> float:
    """--sqz-db задаётся модулем: 2.9 означает -2.9 дБ"""
    return -abs(magnitude)


class CavityCommand(BaseModel):
    """Время обхода, скорости затухания, eta_esc и отклик Эйри резонатора"""

    name: ClassVar[str] = "cavity"

    length_mm: Optional[float] = Field(None, description="Длина резонатора, мм")
    r_out: Optional[float] = Field(None, description="Отражение выходного зеркала")
    r_hr: Optional[float] = Field(None, description="Отражение глухого зеркала")
    loss_db_per_cm: Optional[float] = Field(None, description="Потери, дБ/см")
    probe_side: Literal["coupler", "hr"] = Field("coupler", description="Сторона ввода пробного пучка")
    target_eta_esc: Optional[float] = Field(None, description="Найти длину для заданной eta_esc")

    def process(self, ctx: CommandContext) -> CommandReport:
        spec = ctx.cavity_spec(
            length_mm=self.length_mm, r_out=self.r_out, r_hr=self.r_hr, loss_db_per_cm=self.loss_db_per_cm
        )
        rates = CavityService.decay_rates(spec)
        on = CavityService.airy_response(spec, self.probe_side, on_resonance=True)
        off = CavityService.airy_response(spec, self.probe_side, on_resonance=False)

        values = {
            "tau_s": rates.tau,
            "gamma_coup_per_s": rates.gamma_coup,
            "gamma_hr_per_s": rates.gamma_hr,
            "gamma_loss_per_s": rates.gamma_loss,
            "gamma_tot_per_s": rates.gamma_tot,
            "eta_esc": rates.eta_esc,
            "fwhm_hz": rates.fwhm_bandwidth,
            "fsr_hz": rates.fsr,
            "finesse": rates.fsr / rates.fwhm_bandwidth,
            "transmission_on": on.transmission,
            "reflection_on": on.reflection,
            "transmission_off": off.transmission,
            "reflection_off": off.reflection,
        }
        if self.target_eta_esc is not None:
            values["length_for_target_mm"] = CavityService.solve_length_for_escape(spec, self.target_eta_esc)
        return CommandReport(command=self.name, values=values)


class BudgetCommand(BaseModel):
    """Бюджет эффективности по стадиям; с измеренной парой - выведенные значения"""

    name: ClassVar[str] = "budget"

    sqz_db: Optional[float] = Field(None, description="Измеренное сжатие, дБ (модуль)")
    antisqz_db: Optional[float] = Field(None, description="Измеренное антисжатие, дБ")

    @model_validator(mode="after")
    def _check_pair(self) -> "BudgetCommand":
        if (self.sqz_db is None) != (self.antisqz_db is None):
            raise ValueError("sqz_db и antisqz_db задаются вместе")
        return self

    def process(self, ctx: CommandContext) -> CommandReport:
        spec = ctx.cavity_spec()
        chain = ctx.detection_chain()
        rates = CavityService.decay_rates(spec)
        pair = None if self.sqz_db is None else (_below_shot(self.sqz_db), self.antisqz_db)
        report = BudgetService.budget_report(chain, rates, pair)

        ledger = pd.DataFrame([stage.model_dump() for stage in report.stages])
        values = report.model_dump(exclude={"stages"}, exclude_none=True)
        values["eta_esc"] = rates.eta_esc
        if report.residual is not None and report.residual < 1.0:
            logger.warning(f"Выведенная эффективность ниже модельной: остаток {report.residual:.3f}")
        return CommandReport(
            command=self.name,
            values=values,
            tables={"main": TableOut(frame=ledger, show=True)},
        )


class PredictCommand(BaseModel):
    """Детектируемые и произведённые уровни при заданной накачке"""

    name: ClassVar[str] = "predict"

    pump_mw: Optional[float] = Field(None, description="Накачка, мВт (по умолчанию pump.power_mw)")
    p_th_mw: Optional[float] = Field(None, description="Порог, мВт (по умолчанию из конфигурации)")
    sideband_hz: Optional[float] = Field(None, description="Частота боковой полосы, Гц")

    def process(self, ctx: CommandContext) -> CommandReport:
        spec = ctx.cavity_spec()
        chain = ctx.detection_chain()
        rates = CavityService.decay_rates(spec)
        pump = ctx.pump_mw(self.pump_mw)
        p_th = ctx.threshold_mw(spec, self.p_th_mw)

        ratio = OpoService.check_pump_ratio(pump / p_th)
        state = SqueezerState(pump_ratio=ratio, eta_esc=rates.eta_esc, eta_det=chain.eta_det)
        produced_state = state.model_copy(update={"eta_det": 1.0})
        if self.sideband_hz:
            detected = OpoService.squeezing_spectrum(state, rates, self.sideband_hz)
            produced = OpoService.squeezing_spectrum(produced_state, rates, self.sideband_hz)
        else:
            detected = OpoService.variances(state)
            produced = OpoService.variances(produced_state)
        gain = OpoService.parametric_gain(ratio)

        values = {
            "pump_mw": pump,
            "p_th_mw": p_th,
            "pump_ratio": ratio,
            "eta_esc": rates.eta_esc,
            "eta_det": chain.eta_det,
            "eta_total": state.eta_total,
            "sqz_db": detected.sqz_db,
            "sqz_magnitude_db": detected.sqz_magnitude_db,
            "antisqz_db": detected.antisqz_db,
            "produced_sqz_db": produced.sqz_db,
            "produced_sqz_magnitude_db": produced.sqz_magnitude_db,
            "produced_antisqz_db": produced.antisqz_db,
            "produced_limit_db": OpoService.produced_limit(rates.eta_esc),
            "g_plus": gain["g_plus"],
            "g_minus": gain["g_minus"],
        }
        return CommandReport(command=self.name, values=values)


class InferPairCommand(BaseModel):
    """eta_total и P/P_th по паре сжатие/антисжатие"""

    name: ClassVar[str] = "infer-pair"

    sqz_db: float = Field(..., description="Сжатие, дБ (модуль: 2.9 = -2.9 дБ)")
    antisqz_db: float = Field(..., description="Антисжатие, дБ")
    eta_esc: Optional[float] = Field(None, description="eta_esc для выведения eta_det (по умолчанию из cavity)")

    def process(self, ctx: CommandContext) -> CommandReport:
        inferred = OpoService.infer_from_pair(_below_shot(self.sqz_db), self.antisqz_db)
        values = dict(inferred)

        config = ctx.config
        eta_esc = self.eta_esc
        if eta_esc is None and config is not None and config.cavity is not None:
            eta_esc = CavityService.decay_rates(config.cavity).eta_esc
        if eta_esc is not None:
            if not 0.0 < eta_esc <= 1.0:
                raise DomainError(f"eta_esc должна быть в (0, 1], получено {eta_esc!r}", eta_esc=eta_esc)
            values["eta_esc"] = eta_esc
            values["eta_det_inferred"] = inferred["eta_total"] / eta_esc
        if config is not None and config.pump is not None and config.pump.power_mw > 0:
            values["p_th_mw_inferred"] = config.pump.power_mw / inferred["pump_ratio"]
        return CommandReport(command=self.name, values=values)
