"""
Команды подгонки по измерительным таблицам
"""
from pathlib import Path
from typing import ClassVar, Dict, Literal, Optional

import pandas as pd
from pydantic import BaseModel, Field

from ..common.errors import FitConvergenceError
from ..models import FitResult
from ..services.cavity_service import CavityService
from ..services.estimate import characterize_cavity, fit_squeeze_sweep, fit_threshold_from_gain, load_dataset
from .context import CommandContext, CommandReport, TableOut


def _fit_values(fit: FitResult) -> Dict[str, object]:
    """Параметры, их ошибки и сводка решателя"""
    values: Dict[str, object] = {}
    for name, value in fit.params.items():
        values[name] = value
        values[f"{name}_stderr"] = fit.stderr[name]
    values.update(rss=fit.rss, dof=fit.dof, iterations=fit.iterations, starts=fit.starts, converged=fit.converged)
    return values


def _check(fit: FitResult) -> FitResult:
    if not fit.converged:
        raise FitConvergenceError(fit)
    return fit


class FitGainCommand(BaseModel):
    """Порог P_th по таблице усиления затравки"""

    name: ClassVar[str] = "fit-gain"

    data: Path = Field(..., description="CSV: pump_mw,g_plus,g_minus[,g_plus_err,g_minus_err]")

    def process(self, ctx: CommandContext) -> CommandReport:
        fit = _check(fit_threshold_from_gain(load_dataset(self.data, "gain"), ctx.options()))
        return CommandReport(
            command=self.name,
            values=_fit_values(fit),
            tables={"main": TableOut(frame=pd.DataFrame(fit.curves), metadata={"source": str(self.data)})},
        )


class FitSqzCommand(BaseModel):
    """Порог (и при --free-eta-det эффективность детектирования) по зависимости сжатия от накачки"""

    name: ClassVar[str] = "fit-sqz"

    data: Path = Field(..., description="CSV: pump_mw,rel_noise_db_min,rel_noise_db_max[,err_db]")
    free_eta_det: bool = Field(False, description="Подгонять eta_det вместе с порогом")
    eta_esc: Optional[float] = Field(None, description="eta_esc (по умолчанию из секции cavity)")
    eta_det: Optional[float] = Field(None, description="eta_det или начальное приближение")

    def process(self, ctx: CommandContext) -> CommandReport:
        eta_esc = self.eta_esc
        if eta_esc is None:
            eta_esc = CavityService.decay_rates(ctx.cavity_spec()).eta_esc
        eta_det = self.eta_det if self.eta_det is not None else ctx.detection_chain().eta_det

        dataset = load_dataset(self.data, "squeeze")
        fit = _check(fit_squeeze_sweep(dataset, eta_esc, eta_det, self.free_eta_det, ctx.options()))

        values = _fit_values(fit)
        values.setdefault("eta_det", eta_det)
        values["eta_esc"] = eta_esc
        values["eta_total"] = eta_esc * values["eta_det"]
        return CommandReport(
            command=self.name,
            values=values,
            tables={"main": TableOut(frame=pd.DataFrame(fit.curves), metadata={"source": str(self.data)})},
        )


class CharacterizeCommand(BaseModel):
    """R_hr и потери по измеренным T/R резонатора"""

    name: ClassVar[str] = "characterize"

    data: Path = Field(..., description="CSV: quantity,value[,err]; quantity из t_on,t_off,r_on,r_off")
    probe_side: Literal["coupler", "hr"] = Field("coupler", description="Сторона ввода пробного пучка")
    r_out: Optional[float] = Field(None, description="Отражение выходного зеркала")
    length_mm: Optional[float] = Field(None, description="Длина резонатора, мм")

    def process(self, ctx: CommandContext) -> CommandReport:
        known = ctx.cavity_spec(r_out=self.r_out, length_mm=self.length_mm)
        fit = _check(characterize_cavity(load_dataset(self.data, "fp_response"), known, self.probe_side, ctx.options()))

        fitted = known.replace(r_hr=fit.params["r_hr"], loss=fit.params["loss_db_per_cm"])
        rates = CavityService.decay_rates(fitted)
        values = _fit_values(fit)
        values.update(eta_esc=rates.eta_esc, finesse=rates.fsr / rates.fwhm_bandwidth)
        return CommandReport(
            command=self.name,
            values=values,
            tables={"main": TableOut(frame=pd.DataFrame(fit.curves), metadata={"source": str(self.data)})},
        )
