"""
Модели предметной области (pydantic)
"""
from .optics import (
    CavitySpec,
    CavityRates,
    SqueezerState,
    QuadraturePair,
    DetectionChain,
    LedgerStage,
    BudgetReport,
    AiryResponse,
)
from .data import DataSet, GainRow, SqueezeRow, FpRow, FitOptions, FitResult
from .trace import (
    TraceConfig,
    Trace,
    ScannedPhase,
    DriftPhase,
    FixedPhase,
    SimulationResult,
    MeasuredLevels,
)
from .design import DesignSpace, DesignPoint, CouplerSweep

__all__ = [
    "CavitySpec",
    "CavityRates",
    "SqueezerState",
    "QuadraturePair",
    "DetectionChain",
    "LedgerStage",
    "BudgetReport",
    "AiryResponse",
    "DataSet",
    "GainRow",
    "SqueezeRow",
    "FpRow",
    "FitOptions",
    "FitResult",
    "TraceConfig",
    "Trace",
    "ScannedPhase",
    "DriftPhase",
    "FixedPhase",
    "SimulationResult",
    "MeasuredLevels",
    "DesignSpace",
    "DesignPoint",
    "CouplerSweep",
]
