"""
Модели симуляции гомодинных трасс
"""
from typing import Any, Dict, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from .optics import SqueezerState

TRACE_SCHEMA_VERSION = 1


class ScannedPhase(BaseModel):
    """Фаза гетеродина сканируется пьезоактюатором"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["scanned"] = "scanned"
    period: float = Field(..., gt=0, description="Период скана, с")
    waveform: Literal["triangle", "sawtooth"] = "triangle"
    span: float = Field(2 * np.pi, gt=0, description="Размах фазы за период, рад")


class DriftPhase(BaseModel):
    """Свободный дрейф фазы (винеровский процесс)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["drift"] = "drift"
    diffusion: Optional[float] = Field(
        None, gt=0, description="рад²/с; None -> дрейф порядка π за трассу"
    )
    theta0: float = 0.0


class FixedPhase(BaseModel):
    """Фиксированная квадратура"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    kind: Literal["fixed"] = "fixed"
    theta: float = 0.0


PhaseMode = Union[ScannedPhase, DriftPhase, FixedPhase]


class TraceConfig(BaseModel):
    """Параметры одной пары трасс (дробовой шум + сжатие)"""

    model_config = ConfigDict(frozen=True)

    state: SqueezerState
    duration: float = Field(1.0, gt=0, description="с")
    sample_rate: float = Field(1000.0, gt=0, description="точек/с")
    phase_mode: PhaseMode = Field(default_factory=lambda: ScannedPhase(period=0.5), discriminator="kind")
    rbw: float = Field(20e3, gt=0, description="Гц")
    vbw: float = Field(10.0, gt=0, description="Гц")
    dark_clearance_db: float = Field(12.0, gt=0, description="дБ ниже дробового шума")
    shot_averages: int = Field(20, ge=1)
    seed: int = 0
    phase_jitter_rad: float = Field(0.0, ge=0, description="СКО фазового джиттера, рад")
    sideband_hz: float = Field(0.0, ge=0, description="Частота боковой полосы, Гц")

    @model_validator(mode="after")
    def _check_bandwidths(self) -> "TraceConfig":
        if self.vbw > self.rbw:
            raise ValueError(f"vbw ({self.vbw}) > rbw ({self.rbw})")
        return self

    @property
    def n_points(self) -> int:
        return max(1, int(round(self.duration * self.sample_rate)))

    @property
    def n_eff(self) -> float:
        """Эффективное число независимых отсчётов на точку"""
        return max(1.0, self.rbw / self.vbw)

    @property
    def dark_level(self) -> float:
        """Мощность темнового шума в единицах дробового"""
        return 10.0 ** (-self.dark_clearance_db / 10.0)


class Trace(BaseModel):
    """Трасса анализатора спектра в нулевой полосе обзора"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    time: np.ndarray
    phase: Optional[np.ndarray] = None
    raw_power: np.ndarray = Field(..., description="Мощность (шум+темновой) в единицах дробового")
    raw_db: np.ndarray = Field(..., description="дБ относительно дробового шума с темновым")
    corrected_db: np.ndarray = Field(..., description="дБ относительно дробового; nan где невалидно")
    dark_level: float
    metadata: Dict[str, Any] = Field(default_factory=dict)

    @property
    def valid(self) -> np.ndarray:
        return np.isfinite(self.corrected_db)

    @property
    def corrected_linear(self) -> np.ndarray:
        return 10.0 ** (self.corrected_db / 10.0)

    def __len__(self) -> int:
        return len(self.time)


class SimulationResult(BaseModel):
    """Пара трасс одного прогона"""

    model_config = ConfigDict(frozen=True, arbitrary_types_allowed=True)

    shot: Trace
    squeeze: Trace


class MeasuredLevels(BaseModel):
    """Уровни, извлечённые из скорректированной трассы"""

    model_config = ConfigDict(frozen=True)

    sqz_db: float
    antisqz_db: float
    err_db: float
    v_minus: float
    v_plus: float
