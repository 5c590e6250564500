"""
Модели измерительных таблиц и результатов подгонки
"""
from typing import Dict, List, Literal, Optional, Union

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, model_validator

from ..config import settings

DataKind = Literal["gain", "squeeze", "fp_response"]
FpQuantity = Literal["t_on", "t_off", "r_on", "r_off"]


class GainRow(BaseModel):
    """Строка таблицы параметрического усиления"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    pump_mw: float = Field(..., ge=0)
    g_plus: float = Field(..., gt=0)
    g_minus: float = Field(..., gt=0)
    g_plus_err: Optional[float] = Field(None, gt=0)
    g_minus_err: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_branches(self) -> "GainRow":
        if self.g_plus < self.g_minus:
            raise ValueError(f"g_plus ({self.g_plus}) < g_minus ({self.g_minus})")
        return self


class SqueezeRow(BaseModel):
    """Строка зависимости сжатия от накачки (дБ относительно дробового шума)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    pump_mw: float = Field(..., ge=0)
    rel_noise_db_min: float
    rel_noise_db_max: float
    err_db: Optional[float] = Field(None, gt=0)


class FpRow(BaseModel):
    """Измерение отклика Фабри-Перо (доля мощности)"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    quantity: FpQuantity
    value: float = Field(..., ge=0)
    err: Optional[float] = Field(None, gt=0)


_ROW_TYPES = {"gain": GainRow, "squeeze": SqueezeRow, "fp_response": FpRow}


class DataSet(BaseModel):
    """Таблица измерений одного типа"""

    model_config = ConfigDict(frozen=True)

    kind: DataKind
    rows: List[Union[GainRow, SqueezeRow, FpRow]]
    source: Optional[str] = None

    @model_validator(mode="after")
    def _check_rows(self) -> "DataSet":
        expected = _ROW_TYPES[self.kind]
        for i, row in enumerate(self.rows):
            if not isinstance(row, expected):
                raise ValueError(f"строка {i}: ожидается {expected.__name__} для kind={self.kind}")
        return self

    def column(self, name: str) -> np.ndarray:
        """Столбец как массив; отсутствующие значения -> nan"""
        values = [getattr(row, name) for row in self.rows]
        return np.array([np.nan if v is None else v for v in values], dtype=float)

    def __len__(self) -> int:
        return len(self.rows)


class FitOptions(BaseModel):
    """Допуски и мультистарт решателя"""

    model_config = ConfigDict(frozen=True)

    grad_tol: float = Field(1e-12, gt=0)
    step_tol: float = Field(1e-10, gt=0)
    max_iter: int = Field(500, ge=1)
    starts: int = Field(8, ge=1)
    seed: int = 0

    @classmethod
    def from_env(cls, **overrides) -> "FitOptions":
        """Опции из переменных окружения (SQZKIT_*) с явными переопределениями"""
        values = dict(
            grad_tol=settings.get_gradient_tolerance(),
            step_tol=settings.get_step_tolerance(),
            max_iter=settings.get_max_iterations(),
            starts=settings.get_multistart_count(),
            seed=settings.get_default_seed(),
        )
        values.update({k: v for k, v in overrides.items() if v is not None})
        return cls(**values)


class FitResult(BaseModel):
    """Результат нелинейного МНК"""

    model_config = ConfigDict(frozen=True)

    params: Dict[str, float]
    stderr: Dict[str, float]
    rss: float
    converged: bool
    iterations: int
    gradient_norm: float = 0.0
    dof: int = 0
    starts: int = 1
    diagnostic: Optional[str] = None
    rss_history: List[float] = Field(default_factory=list)
    residuals: List[float] = Field(default_factory=list)
    curves: Dict[str, List[float]] = Field(
        default_factory=dict, description="Модельные кривые на сетке данных"
    )
