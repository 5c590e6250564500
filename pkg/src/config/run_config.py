"""
Файл запуска (JSON): резонатор, детектирование, накачка, симуляция, проектирование
"""
import json
from pathlib import Path
from typing import List, Optional, Tuple, Union

from pydantic import BaseModel, ConfigDict, Field, ValidationError, model_validator

from ..common.errors import ConfigError, DataFormatError, SchemaVersionError
from ..models import CavitySpec, DetectionChain
from ..models.trace import PhaseMode, ScannedPhase
from ..services.error_checker import ErrorChecker

SCHEMA_VERSION = 1


class PumpConfig(BaseModel):
    """Накачка и её порог; p_th_mw и e_nl_per_w взаимоисключающие"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    power_mw: float = Field(0.0, ge=0)
    p_th_mw: Optional[float] = Field(None, gt=0)
    e_nl_per_w: Optional[float] = Field(None, gt=0)

    @model_validator(mode="after")
    def _check_exclusive(self) -> "PumpConfig":
        if self.p_th_mw is not None and self.e_nl_per_w is not None:
            raise ValueError("задайте только одно из p_th_mw и e_nl_per_w")
        return self


class SimConfig(BaseModel):
    """Параметры анализатора спектра и сканирования фазы"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    duration_s: float = Field(1.0, gt=0)
    sample_rate: float = Field(1000.0, gt=0)
    phase_mode: PhaseMode = Field(default_factory=lambda: ScannedPhase(period=0.5), discriminator="kind")
    rbw_hz: float = Field(20e3, gt=0)
    vbw_hz: float = Field(10.0, gt=0)
    dark_clearance_db: float = Field(12.0, gt=0)
    shot_averages: int = Field(20, ge=1)
    phase_jitter_rad: float = Field(0.0, ge=0)
    sideband_hz: float = Field(0.0, ge=0)
    pumps_mw: Optional[List[float]] = Field(None, description="Серия накачек для simulate")


class DesignConfig(BaseModel):
    """Перебор выходного зеркала"""

    model_config = ConfigDict(frozen=True, extra="forbid")

    p_th_design_mw: Optional[float] = Field(None, gt=0, description="Порог калибровки e_nl при базовом зеркале")
    e_nl_per_w: Optional[float] = Field(None, gt=0)
    pump_mw: Optional[float] = Field(None, ge=0, description="По умолчанию pump.power_mw")
    r_out_range: Tuple[float, float] = (0.5, 0.98)
    r_out_step: float = Field(0.01, gt=0)
    target_loss_db_per_cm: Optional[float] = Field(None, ge=0, description="Прогноз при сниженных потерях")

    @model_validator(mode="after")
    def _check_exclusive(self) -> "DesignConfig":
        if self.p_th_design_mw is not None and self.e_nl_per_w is not None:
            raise ValueError("задайте только одно из p_th_design_mw и e_nl_per_w")
        return self


class RunConfig(BaseModel):
    """Корневая модель файла запуска"""

    model_config = ConfigDict(frozen=True, extra="forbid", populate_by_name=True)

    schema_version: int = Field(SCHEMA_VERSION, alias="schema")
    cavity: Optional[CavitySpec] = None
    detection: Optional[DetectionChain] = None
    pump: Optional[PumpConfig] = None
    sim: Optional[SimConfig] = None
    design: Optional[DesignConfig] = None

    def require(self, section: str):
        """Секция конфигурации или ConfigError, если её нет"""
        value = getattr(self, section)
        if value is None:
            raise ConfigError("секция обязательна для этой команды", path=section)
        return value


class RunConfigLoader:
    """Загрузчик файла запуска с позиционными ошибками"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def load(self) -> RunConfig:
        """
        :raises DataFormatError: синтаксическая ошибка JSON (строка/столбец)
        :raises SchemaVersionError: schema отсутствует или не равна 1
        :raises ConfigError: ошибка поля с путём (cavity.r_out)
        """
        if not self.path.exists():
            raise ConfigError(f"файл {self.path} не найден")
        data = self.path.read_bytes()
        try:
            raw = json.loads(data.decode("utf-8"))
        except UnicodeDecodeError as e:
            raise DataFormatError.from_decode_error(e, data, str(self.path)) from e
        except json.JSONDecodeError as e:
            raise DataFormatError(e.msg, source=str(self.path), line=e.lineno, column=e.colno) from e

        if not isinstance(raw, dict):
            raise ConfigError("корень файла должен быть объектом")
        if raw.get("schema") != SCHEMA_VERSION:
            raise SchemaVersionError(raw.get("schema"), SCHEMA_VERSION)

        try:
            return RunConfig.model_validate(raw)
        except ValidationError as e:
            raise ErrorChecker.as_config_error(e) from e


def load_run_config(path: Union[str, Path]) -> RunConfig:
    """Чтение и валидация файла запуска"""
    return RunConfigLoader(path).load()
