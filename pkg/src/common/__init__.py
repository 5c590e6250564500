"""
Общие классы и утилиты
"""
from .errors import (
    SqzkitError,
    DomainError,
    AboveThresholdError,
    NonPhysicalPairError,
    ConfigError,
    SchemaVersionError,
    DataFormatError,
    FitConvergenceError,
    InfeasibleDesignError,
    UsageError,
)

__all__ = [
    "SqzkitError",
    "DomainError",
    "AboveThresholdError",
    "NonPhysicalPairError",
    "ConfigError",
    "SchemaVersionError",
    "DataFormatError",
    "FitConvergenceError",
    "InfeasibleDesignError",
    "UsageError",
]
