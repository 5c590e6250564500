"""
Модели оптики: резонатор, состояние сжатия, цепочка детектирования
"""
import math
from typing import Optional

from pydantic import BaseModel, ConfigDict, Field, model_validator


class CavitySpec(BaseModel):
    """Геометрия и потери двухзеркального волноводного резонатора (стоячая волна)"""

    model_config = ConfigDict(frozen=True, populate_by_name=True, extra="forbid")

    length: float = Field(..., gt=0, alias="length_mm", description="Физическая длина, мм")
    ref_index: float = Field(2.138, ge=1, description="Фазовый показатель преломления")
    loss: float = Field(..., ge=0, alias="loss_db_per_cm", description="Потери распространения, дБ/см")
    r_out: float = Field(..., gt=0, lt=1, description="Отражение выходного зеркала по мощности")
    r_hr: float = Field(..., gt=0, le=1, description="Отражение глухого зеркала по мощности")
    passes_per_round_trip: int = Field(
        2, ge=1, description="Число проходов среды за обход (2 для стоячей волны)"
    )

    def replace(self, **changes) -> "CavitySpec":
        """Копия с изменёнными полями (с повторной валидацией)"""
        data = self.model_dump()
        data.update(changes)
        return CavitySpec.model_validate(data)


class CavityRates(BaseModel):
    """Производные параметры резонатора: время обхода и скорости затухания"""

    model_config = ConfigDict(frozen=True)

    tau: float = Field(..., description="Время обхода, с")
    gamma_coup: float = Field(..., description="Затухание через выходное зеркало, 1/с")
    gamma_hr: float = Field(..., description="Затухание через глухое зеркало, 1/с")
    gamma_loss: float = Field(..., description="Затухание из-за потерь в среде, 1/с")
    gamma_tot: float = Field(..., description="Полное затухание, 1/с")
    eta_esc: float = Field(..., gt=0, le=1, description="Эффективность выхода")
    fwhm_bandwidth: float = Field(..., description="Ширина линии FWHM, Гц")
    fsr: float = Field(..., description="Область свободной дисперсии, Гц")


class SqueezerState(BaseModel):
    """Рабочая точка источника сжатия ниже порога"""

    model_config = ConfigDict(frozen=True)

    pump_ratio: float = Field(..., ge=0, lt=1, description="P/P_th")
    eta_esc: float = Field(..., gt=0, le=1)
    eta_det: float = Field(..., gt=0, le=1)

    @property
    def eta_total(self) -> float:
        return self.eta_esc * self.eta_det


class QuadraturePair(BaseModel):
    """Дисперсии сжатой и растянутой квадратур (шум дробовой = 1)"""

    model_config = ConfigDict(frozen=True)

    v_minus: float = Field(..., gt=0)
    v_plus: float = Field(..., gt=0)
    sqz_db: float
    antisqz_db: float

    @classmethod
    def from_linear(cls, v_minus: float, v_plus: float) -> "QuadraturePair":
        return cls(
            v_minus=v_minus,
            v_plus=v_plus,
            sqz_db=10.0 * math.log10(v_minus),
            antisqz_db=10.0 * math.log10(v_plus),
        )

    @property
    def sqz_magnitude_db(self) -> float:
        """Сжатие как положительное число дБ"""
        return -self.sqz_db


class DetectionChain(BaseModel):
    """Цепочка гомодинного детектирования.

    Видность входит квадратом: eta_det = visibility² · eta_prop · eta_pd.
    """

    model_config = ConfigDict(frozen=True, extra="forbid")

    visibility: float = Field(..., ge=0, le=1, description="Видность интерференции с гетеродином")
    eta_prop: float = Field(..., gt=0, le=1, description="Эффективность распространения")
    eta_pd: float = Field(..., gt=0, le=1, description="Квантовая эффективность фотодиодов")

    @model_validator(mode="after")
    def _check_nonzero(self) -> "DetectionChain":
        if self.visibility <= 0:
            raise ValueError("visibility должна быть > 0, иначе eta_det = 0")
        return self

    @property
    def eta_det(self) -> float:
        return self.visibility ** 2 * self.eta_prop * self.eta_pd


class LedgerStage(BaseModel):
    """Строка бюджета потерь"""

    model_config = ConfigDict(frozen=True)

    stage: str
    transmission: float
    cumulative: float


class BudgetReport(BaseModel):
    """Упорядоченный бюджет эффективности"""

    model_config = ConfigDict(frozen=True)

    stages: list[LedgerStage]
    eta_det: float
    eta_total: float
    inferred_eta_total: Optional[float] = None
    inferred_eta_det: Optional[float] = None
    inferred_pump_ratio: Optional[float] = None
    residual: Optional[float] = Field(
        None, description="Необъяснённая эффективность: inferred / modeled"
    )


class AiryResponse(BaseModel):
    """Стационарное пропускание и отражение резонатора"""

    model_config = ConfigDict(frozen=True)

    transmission: float = Field(..., ge=0)
    reflection: float = Field(..., ge=0)
