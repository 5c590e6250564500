"""Модуль для записи результатов на диск."""

from src.storage.table_storage import CsvTableStorage, sibling_path, trace_frame, trace_metadata

__all__ = [
    "CsvTableStorage",
    "sibling_path",
    "trace_frame",
    "trace_metadata",
]
