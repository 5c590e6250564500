"""
Команда симуляции трасс
"""
from typing import ClassVar, Literal, Optional

import numpy as np
import pandas as pd
from pydantic import BaseModel, Field

from ..common.errors import DomainError
from ..config.run_config import SimConfig
from ..models import DriftPhase, FixedPhase, ScannedPhase, SqueezerState, TraceConfig
from ..models.trace import TRACE_SCHEMA_VERSION
from ..services.cavity_service import CavityService
from ..services.opo_service import db_from_linear
from ..services.simtrace_service import TraceSimulator
from ..storage.table_storage import trace_frame, trace_metadata
from .context import CommandContext, CommandReport, TableOut


class SimulateCommand(BaseModel):
    """Трассы дробового шума и сжатия; с sim.pumps_mw - серия для fit-sqz"""

    name: ClassVar[str] = "simulate"

    mode: Optional[Literal["scanned", "drift", "fixed"]] = Field(None, description="Режим фазы гетеродина")
    pump_mw: Optional[float] = Field(None, description="Накачка, мВт (по умолчанию pump.power_mw)")
    theta: Optional[float] = Field(None, description="Фаза для режима fixed, рад")
    duration_s: Optional[float] = Field(None, description="Длительность трассы, с")

    def _phase_mode(self, sim: SimConfig):
        current = sim.phase_mode
        kind = self.mode or current.kind
        if kind == "fixed":
            theta = self.theta if self.theta is not None else getattr(current, "theta", 0.0)
            return FixedPhase(theta=theta)
        if kind == current.kind:
            return current
        return ScannedPhase(period=0.5) if kind == "scanned" else DriftPhase()

    def process(self, ctx: CommandContext) -> CommandReport:
        config = ctx.require_config()
        spec = ctx.cavity_spec()
        chain = ctx.detection_chain()
        rates = CavityService.decay_rates(spec)
        sim = config.sim or SimConfig()
        p_th = ctx.threshold_mw(spec)
        pump = ctx.pump_mw(self.pump_mw)
        seed = ctx.resolved_seed()

        trace_config = TraceConfig(
            state=SqueezerState(pump_ratio=0.0, eta_esc=rates.eta_esc, eta_det=chain.eta_det),
            duration=self.duration_s or sim.duration_s,
            sample_rate=sim.sample_rate,
            phase_mode=self._phase_mode(sim),
            rbw=sim.rbw_hz,
            vbw=sim.vbw_hz,
            dark_clearance_db=sim.dark_clearance_db,
            shot_averages=sim.shot_averages,
            seed=seed,
            phase_jitter_rad=sim.phase_jitter_rad,
            sideband_hz=sim.sideband_hz,
        )
        simulator = TraceSimulator(rates)

        if sim.pumps_mw and self.pump_mw is None:
            dataset = simulator.simulate_sweep(trace_config, sim.pumps_mw, p_th)
            frame = pd.DataFrame([row.model_dump() for row in dataset.rows])
            metadata = {"schema": TRACE_SCHEMA_VERSION, "seed": seed, "p_th_mw": p_th}
            return CommandReport(
                command=self.name,
                values={"points": len(dataset), "seed": seed, "p_th_mw": p_th},
                tables={"main": TableOut(frame=frame, metadata=metadata, show=True)},
            )

        if pump >= p_th:
            raise DomainError(f"Накачка {pump:g} мВт не ниже порога {p_th:g} мВт", pump_mw=pump, p_th_mw=p_th)
        trace_config = trace_config.model_copy(
            update={"state": trace_config.state.model_copy(update={"pump_ratio": pump / p_th})}
        )
        result = simulator.simulate(trace_config)
        expected = simulator.quadrature_pair(trace_config)

        values = {
            "seed": seed,
            "points": len(result.squeeze),
            "pump_ratio": pump / p_th,
            "expected_sqz_db": expected.sqz_db,
            "expected_sqz_magnitude_db": expected.sqz_magnitude_db,
            "expected_antisqz_db": expected.antisqz_db,
            "invalid_points": result.squeeze.metadata.get("invalid_points", 0),
        }
        if isinstance(trace_config.phase_mode, FixedPhase):
            values["mean_corrected_db"] = db_from_linear(float(np.nanmean(result.squeeze.corrected_linear)))
        else:
            levels = simulator.extract_levels(result.squeeze)
            values.update(
                sqz_db=levels.sqz_db,
                sqz_magnitude_db=-levels.sqz_db,
                antisqz_db=levels.antisqz_db,
                err_db=levels.err_db,
            )

        return CommandReport(
            command=self.name,
            values=values,
            tables={
                "main": TableOut(frame=trace_frame(result.squeeze), metadata=trace_metadata(result.squeeze), in_json=False),
                "shot": TableOut(frame=trace_frame(result.shot), metadata=trace_metadata(result.shot), in_json=False),
            },
        )
