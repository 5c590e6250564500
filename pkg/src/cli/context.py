"""
Контекст выполнения команды и её отчёт
"""
from pathlib import Path
from typing import Any, Dict, Optional

import pandas as pd
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from ..common.errors import ConfigError
from ..config import settings
from ..config.run_config import RunConfig
from ..models import CavitySpec, DetectionChain, FitOptions
from ..services.design_service import DesignService
from ..services.error_checker import ErrorChecker


class CommandContext(BaseModel):
    """Общие параметры запуска: конфигурация, вывод, seed, режимы"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    config: Optional[RunConfig] = None
    config_path: Optional[Path] = None
    out: Optional[Path] = None
    seed: Optional[int] = None
    strict: bool = False
    json_output: bool = False
    fit_options: Optional[FitOptions] = None

    def require_config(self) -> RunConfig:
        if self.config is None:
            raise ConfigError("команде нужен файл запуска (--config)")
        return self.config

    def resolved_seed(self) -> int:
        return self.seed if self.seed is not None else settings.get_default_seed()

    def options(self) -> FitOptions:
        """Опции решателя; --seed переопределяет seed мультистарта"""
        base = self.fit_options or FitOptions.from_env()
        if self.seed is not None:
            return base.model_copy(update={"seed": self.seed})
        return base

    def cavity_spec(self, **overrides: Any) -> CavitySpec:
        """Резонатор из секции cavity с переопределениями из флагов (имена как в JSON)"""
        base = self.config.cavity if self.config is not None else None
        data: Dict[str, Any] = base.model_dump(by_alias=True) if base is not None else {}
        data.update({key: value for key, value in overrides.items() if value is not None})
        try:
            return CavitySpec.model_validate(data)
        except ValidationError as e:
            raise ErrorChecker.as_config_error(e, prefix="cavity") from e

    def detection_chain(self) -> DetectionChain:
        return self.require_config().require("detection")

    def threshold_mw(self, spec: CavitySpec, override: Optional[float] = None) -> float:
        """Порог P_th (мВт): флаг, pump.p_th_mw или пересчёт из pump.e_nl_per_w"""
        if override is not None:
            return override
        pump = self.require_config().require("pump")
        if pump.p_th_mw is not None:
            return pump.p_th_mw
        if pump.e_nl_per_w is not None:
            return DesignService.threshold_power(spec, pump.e_nl_per_w) * 1e3
        raise ConfigError("нужно одно из p_th_mw и e_nl_per_w", path="pump")

    def pump_mw(self, override: Optional[float] = None) -> float:
        if override is not None:
            return override
        return self.require_config().require("pump").power_mw


class TableOut(BaseModel):
    """Таблица результата: main пишется в --out, остальные рядом (<stem>.<имя>.csv)"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    frame: pd.DataFrame
    metadata: Dict[str, Any] = Field(default_factory=dict)
    in_json: bool = True
    show: bool = False


class CommandReport(BaseModel):
    """Результат команды: числа и таблицы"""

    model_config = ConfigDict(arbitrary_types_allowed=True)

    command: str
    values: Dict[str, Any] = Field(default_factory=dict)
    tables: Dict[str, TableOut] = Field(default_factory=dict)
