"""
Команда перебора выходного зеркала
"""
from typing import ClassVar, Optional

import pandas as pd
from pydantic import BaseModel, Field

from ..common.errors import AboveThresholdError, ConfigError
from ..config import settings
from ..config.run_config import DesignConfig
from ..models import CavitySpec, DesignSpace
from ..services.design_service import DesignService
from ..services.logger_service import logger
from .context import CommandContext, CommandReport, TableOut


def design_nonlinearity(ctx: CommandContext, spec: CavitySpec, design: DesignConfig) -> float:
    """
    e_nl (1/Вт): design.e_nl_per_w, калибровка по design.p_th_design_mw,
    иначе по данным секции pump.
    """
    if design.e_nl_per_w is not None:
        return design.e_nl_per_w
    if design.p_th_design_mw is not None:
        return DesignService.calibrate_enl(spec, design.p_th_design_mw * 1e-3)

    pump = ctx.require_config().require("pump")
    if pump.e_nl_per_w is not None:
        return pump.e_nl_per_w
    if pump.p_th_mw is not None:
        logger.warning("e_nl калибруется по порогу из pump.p_th_mw: задайте design.p_th_design_mw")
        return DesignService.calibrate_enl(spec, pump.p_th_mw * 1e-3)
    raise ConfigError("нужно одно из p_th_design_mw и e_nl_per_w", path="design")


class OptimizeCommand(BaseModel):
    """Перебор R_out: лучшее детектируемое сжатие и таблица по сетке"""

    name: ClassVar[str] = "optimize"

    r_out_lo: Optional[float] = Field(None, description="Нижняя граница R_out")
    r_out_hi: Optional[float] = Field(None, description="Верхняя граница R_out")
    r_out_step: Optional[float] = Field(None, description="Шаг сетки R_out")
    pump_mw: Optional[float] = Field(None, description="Доступная накачка, мВт")
    target_loss_db_per_cm: Optional[float] = Field(None, description="Прогноз при сниженных потерях, дБ/см")

    def process(self, ctx: CommandContext) -> CommandReport:
        config = ctx.require_config()
        spec = ctx.cavity_spec()
        design = config.design or DesignConfig()
        pump_mw = self.pump_mw
        if pump_mw is None:
            pump_mw = design.pump_mw if design.pump_mw is not None else ctx.pump_mw()

        e_nl = design_nonlinearity(ctx, spec, design)
        space = DesignSpace(
            base=spec,
            chain=ctx.detection_chain(),
            pump_available=pump_mw * 1e-3,
            e_nl=e_nl,
            r_out_lo=self.r_out_lo if self.r_out_lo is not None else design.r_out_range[0],
            r_out_hi=self.r_out_hi if self.r_out_hi is not None else design.r_out_range[1],
            r_out_step=self.r_out_step or design.r_out_step,
            strict=ctx.strict,
            clip_ratio=settings.get_clip_ratio(),
        )

        sweep = DesignService.optimize_coupler(space)
        best = sweep.best

        values = {
            "e_nl_per_w": e_nl,
            "pump_mw": pump_mw,
            "r_out_best": sweep.r_out_best,
            "sqz_db": best.sqz_db,
            "sqz_magnitude_db": best.sqz_magnitude_db,
            "antisqz_db": best.antisqz_db,
            "produced_sqz_db": best.produced_sqz_db,
            "produced_sqz_magnitude_db": best.produced_sqz_magnitude_db,
            "eta_esc": best.eta_esc,
            "p_th_mw": best.p_th_mw,
            "pump_ratio": best.pump_ratio,
            "clipped": best.clipped,
            "base_r_out": spec.r_out,
        }
        try:
            base = DesignService.predict_detected_sqz(space)
        except AboveThresholdError as e:
            # текущее зеркало выше порога: сравнение с ним не выводится
            logger.warning(f"Текущее R_out={spec.r_out} выше порога при {pump_mw} мВт", f"P/P_th={e.pump_ratio:.3g}")
            values["base_feasible"] = False
        else:
            values.update(base_feasible=True, base_sqz_db=base.sqz_db, base_p_th_mw=base.p_th_mw)

        target_loss = self.target_loss_db_per_cm
        if target_loss is None:
            target_loss = design.target_loss_db_per_cm
        if target_loss is not None:
            values["projected_loss_db_per_cm"] = target_loss
            try:
                projected = DesignService.improvement_projection(space, target_loss)
            except AboveThresholdError as e:
                logger.warning(f"Прогноз при {target_loss} дБ/см выше порога", f"P/P_th={e.pump_ratio:.3g}")
                values["projected_feasible"] = False
            else:
                values.update(
                    projected_feasible=True,
                    projected_eta_esc=projected.eta_esc,
                    projected_p_th_mw=projected.p_th_mw,
                    projected_pump_ratio=projected.pump_ratio,
                    projected_sqz_db=projected.sqz_db,
                    projected_sqz_magnitude_db=projected.sqz_magnitude_db,
                    projected_produced_sqz_db=projected.produced_sqz_db,
                )

        rows = pd.DataFrame([
            {
                "r_out": row.r_out,
                "eta_esc": row.eta_esc,
                "p_th_mw": row.p_th_mw,
                "pump_ratio": row.pump_ratio,
                "sqz_db": row.sqz_db,
                "antisqz_db": row.antisqz_db,
                "clipped": row.clipped,
                "produced_sqz_db": row.produced_sqz_db,
                "produced_antisqz_db": row.produced_antisqz_db,
            }
            for row in sweep.rows
        ])
        if rows["clipped"].any():
            logger.warning(f"P/P_th ограничено {space.clip_ratio} в {int(rows['clipped'].sum())} точках")
        return CommandReport(
            command=self.name,
            values=values,
            tables={"main": TableOut(frame=rows, metadata={"e_nl_per_w": e_nl, "pump_mw": pump_mw})},
        )
