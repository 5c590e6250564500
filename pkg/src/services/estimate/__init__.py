"""
Оценка параметров по измерениям: решатель МНК, подгонки и загрузка таблиц
"""
from .solver import ParamSpec, least_squares
from .fitters import characterize_cavity, fit_squeeze_sweep, fit_threshold_from_gain
from .dataset_loader import DatasetLoader, load_dataset

__all__ = [
    "ParamSpec",
    "least_squares",
    "fit_threshold_from_gain",
    "fit_squeeze_sweep",
    "characterize_cavity",
    "DatasetLoader",
    "load_dataset",
]
