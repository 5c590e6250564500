"""Запись таблиц и трасс в CSV с метаданными в строках-комментариях."""

import json
import logging
from pathlib import Path
from typing import Any, Dict, Mapping, Optional, Sequence, Union

import pandas as pd

from src.models import Trace
from src.models.trace import TRACE_SCHEMA_VERSION

logger = logging.getLogger(__name__)

PathLike = Union[str, Path]


class CsvTableStorage:
    """CSV в UTF-8 с окончаниями строк LF; метаданные - строки '# ключ: значение'."""

    def write_table(
        self,
        path: PathLike,
        rows: Union[pd.DataFrame, Sequence[Mapping[str, Any]]],
        metadata: Optional[Dict[str, Any]] = None,
    ) -> Path:
        """
        Записывает таблицу.

        Args:
            path: Путь к файлу
            rows: DataFrame или последовательность словарей с одинаковыми ключами
            metadata: Значения для строк-комментариев (не-строки сериализуются в JSON)

        Returns:
            Путь к записанному файлу
        """
        path = Path(path)
        frame = rows if isinstance(rows, pd.DataFrame) else pd.DataFrame(list(rows))
        with open(path, "w", encoding="utf-8", newline="\n") as f:
            for key, value in (metadata or {}).items():
                text = value if isinstance(value, str) else json.dumps(value, ensure_ascii=False)
                f.write(f"# {key}: {text}\n")
            frame.to_csv(f, index=False, lineterminator="\n", float_format="%.10g")
        logger.debug("Записано %d строк в %s", len(frame), path)
        return path

    def write_trace(self, path: PathLike, trace: Trace) -> Path:
        """Записывает трассу; невалидные точки остаются пустыми ячейками."""
        return self.write_table(path, trace_frame(trace), trace_metadata(trace))

    def read_metadata(self, path: PathLike) -> Dict[str, Any]:
        """
        Читает метаданные из начальных строк-комментариев.

        Returns:
            Словарь ключ -> значение (JSON-значения разбираются, остальное - строки)
        """
        metadata: Dict[str, Any] = {}
        with open(path, "r", encoding="utf-8") as f:
            for line in f:
                if not line.startswith("#"):
                    break
                key, _, value = line[1:].strip().partition(":")
                value = value.strip()
                try:
                    metadata[key.strip()] = json.loads(value)
                except json.JSONDecodeError:
                    metadata[key.strip()] = value
        return metadata


def sibling_path(path: PathLike, tag: str) -> Path:
    """trace.csv -> trace.<tag>.csv"""
    path = Path(path)
    return path.with_name(f"{path.stem}.{tag}{path.suffix or '.csv'}")


def trace_frame(trace: Trace) -> pd.DataFrame:
    """Столбцы трассы: time_s, phase_rad, raw_db, corrected_db"""
    return pd.DataFrame({
        "time_s": trace.time,
        "phase_rad": trace.phase if trace.phase is not None else float("nan"),
        "raw_db": trace.raw_db,
        "corrected_db": trace.corrected_db,
    })


def trace_metadata(trace: Trace) -> Dict[str, Any]:
    """Метаданные трассы: schema, seed, роль, уровни и конфигурация"""
    meta = trace.metadata
    return {
        "schema": meta.get("schema", TRACE_SCHEMA_VERSION),
        "seed": meta.get("seed"),
        "role": meta.get("role"),
        "dark_level": trace.dark_level,
        "shot_reference": meta.get("shot_reference"),
        "config": meta.get("config"),
    }
