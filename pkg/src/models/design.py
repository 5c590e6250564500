"""
Модели проектирования выходного зеркала
"""
from typing import List

from pydantic import BaseModel, ConfigDict, Field, model_validator

from .optics import CavitySpec, DetectionChain


class DesignSpace(BaseModel):
    """Пространство перебора отражения выходного зеркала"""

    model_config = ConfigDict(frozen=True)

    base: CavitySpec
    chain: DetectionChain
    pump_available: float = Field(..., ge=0, description="Падающая накачка, Вт")
    e_nl: float = Field(..., gt=0, description="Эффективная нелинейность за проход, 1/Вт")
    r_out_lo: float = Field(0.5, gt=0, lt=1)
    r_out_hi: float = Field(0.98, gt=0, lt=1)
    r_out_step: float = Field(0.01, gt=0)
    strict: bool = False
    clip_ratio: float = Field(0.99, gt=0, lt=1)

    @model_validator(mode="after")
    def _check_range(self) -> "DesignSpace":
        if not self.r_out_lo < self.r_out_hi:
            raise ValueError(f"r_out_lo ({self.r_out_lo}) должен быть < r_out_hi ({self.r_out_hi})")
        return self


class DesignPoint(BaseModel):
    """Предсказание для одного выходного зеркала"""

    model_config = ConfigDict(frozen=True)

    r_out: float
    eta_esc: float
    p_th: float = Field(..., description="Порог, Вт")
    pump_ratio: float
    sqz_db: float
    antisqz_db: float
    produced_sqz_db: float
    produced_antisqz_db: float
    clipped: bool = False

    @property
    def p_th_mw(self) -> float:
        return self.p_th * 1e3

    @property
    def sqz_magnitude_db(self) -> float:
        """Модуль сжатия, дБ (положителен ниже дробового шума)"""
        return -self.sqz_db

    @property
    def produced_sqz_magnitude_db(self) -> float:
        return -self.produced_sqz_db


class CouplerSweep(BaseModel):
    """Результат перебора выходного зеркала"""

    model_config = ConfigDict(frozen=True)

    r_out_best: float
    best: DesignPoint
    rows: List[DesignPoint]
