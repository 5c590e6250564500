"""
Загрузка измерительных таблиц из CSV (UTF-8, запятая, точка в числах,
строки-комментарии с '#')
"""
import io
from pathlib import Path
from typing import Dict, List, Optional, Tuple, Union

import numpy as np
import pandas as pd
from pydantic import ValidationError

from ...common.errors import DataFormatError
from ...models import DataSet, FpRow, GainRow, SqueezeRow
from ..logger_service import logger

REQUIRED_COLUMNS: Dict[str, List[str]] = {
    "gain": ["pump_mw", "g_plus", "g_minus"],
    "squeeze": ["pump_mw", "rel_noise_db_min", "rel_noise_db_max"],
    "fp_response": ["quantity", "value"],
}
OPTIONAL_COLUMNS: Dict[str, List[str]] = {
    "gain": ["g_plus_err", "g_minus_err"],
    "squeeze": ["err_db"],
    "fp_response": ["err"],
}
TEXT_COLUMNS = {"quantity"}
ROW_MODELS = {"gain": GainRow, "squeeze": SqueezeRow, "fp_response": FpRow}


class DatasetLoader:
    """Загрузчик CSV-таблиц с позиционными сообщениями об ошибках"""

    def __init__(self, path: Union[str, Path]):
        self.path = Path(path)

    def load(self, kind: Optional[str] = None) -> DataSet:
        """
        Чтение таблицы.

        :param kind: gain | squeeze | fp_response; None - определить по заголовку
        :raises DataFormatError: с номером строки и столбца (нумерация с 1)
        """
        if not self.path.exists():
            raise DataFormatError("файл не найден", source=str(self.path))

        data = self.path.read_bytes()
        try:
            text = data.decode("utf-8")
        except UnicodeDecodeError as e:
            raise DataFormatError.from_decode_error(e, data, str(self.path)) from e

        header_line, header, line_numbers, frame = self._parse(text)
        kind = kind or self._detect_kind(header, header_line)
        self._check_header(kind, header, header_line)

        values = {}
        for position, column in enumerate(header, start=1):
            raw = frame[column].str.strip()
            if column in TEXT_COLUMNS:
                values[column] = raw.tolist()
                continue
            numeric = pd.to_numeric(raw, errors="coerce")
            bad = (raw != "") & ~np.isfinite(numeric.astype(float))
            if bad.any():
                index = int(np.flatnonzero(bad.to_numpy())[0])
                raise DataFormatError(
                    f"'{raw.iloc[index]}' не является конечным числом ({column})",
                    source=str(self.path), line=line_numbers[index], column=position,
                )
            values[column] = [None if cell == "" else float(num) for cell, num in zip(raw, numeric)]

        model = ROW_MODELS[kind]
        parsed = []
        for index, line_number in enumerate(line_numbers):
            record = {column: values[column][index] for column in header}
            record = {key: value for key, value in record.items() if value is not None}
            try:
                parsed.append(model(**record))
            except ValidationError as e:
                error = e.errors()[0]
                field = str(error["loc"][0]) if error["loc"] else None
                column = header.index(field) + 1 if field in header else None
                raise DataFormatError(error["msg"], source=str(self.path), line=line_number, column=column) from e

        logger.info(f"Загружена таблица {kind}: {len(parsed)} строк", str(self.path))
        return DataSet(kind=kind, rows=parsed, source=str(self.path))

    def _parse(self, text: str) -> Tuple[int, List[str], List[int], pd.DataFrame]:
        """
        Разбор CSV средствами pandas с исходными номерами строк.

        :return: (строка заголовка, заголовок, номера строк данных, таблица данных)
        """
        # запись - строка, непустая до '#'
        records = [number for number, line in enumerate(text.split("\n"), start=1) if line.split("#", 1)[0].strip()]
        if not records:
            raise DataFormatError("нет заголовка", source=str(self.path))

        # запятые в кавычках только завышают оценку ширины
        width = max(line.count(",") for line in text.split("\n")) + 1
        try:
            table = pd.read_csv(
                io.StringIO(text),
                header=None,
                names=list(range(width)),
                comment="#",
                dtype=object,
                keep_default_na=False,
                skipinitialspace=True,
                engine="python",
            )
        except pd.errors.ParserError as e:
            raise DataFormatError(str(e), source=str(self.path)) from e
        if len(table) != len(records):
            raise DataFormatError("перевод строки внутри поля в кавычках не поддерживается", source=str(self.path))

        # ячейки - строки; короткие строки дополняются NA справа
        fields = table.notna().sum(axis=1).to_numpy()
        header_line = records[0]
        header = [str(name).strip() for name in table.iloc[0, :fields[0]]]
        for number, count in zip(records[1:], fields[1:]):
            if count != len(header):
                raise DataFormatError(
                    f"ожидается {len(header)} полей, найдено {count}",
                    source=str(self.path), line=number, column=min(count, len(header)) + 1,
                )

        frame = table.iloc[1:, :len(header)].reset_index(drop=True)
        frame.columns = header
        return header_line, header, records[1:], frame

    def _detect_kind(self, header: List[str], header_line: int) -> str:
        for kind, required in REQUIRED_COLUMNS.items():
            if all(column in header for column in required):
                return kind
        raise DataFormatError(
            f"не удалось определить тип таблицы по заголовку {header}",
            source=str(self.path), line=header_line,
        )

    def _check_header(self, kind: str, header: List[str], header_line: int):
        allowed = REQUIRED_COLUMNS[kind] + OPTIONAL_COLUMNS[kind]
        for position, column in enumerate(header, start=1):
            if column not in allowed:
                raise DataFormatError(
                    f"неизвестный столбец '{column}' для {kind}",
                    source=str(self.path), line=header_line, column=position,
                )
            if header.index(column) != position - 1:
                raise DataFormatError(
                    f"повтор столбца '{column}'", source=str(self.path), line=header_line, column=position
                )
        for column in REQUIRED_COLUMNS[kind]:
            if column not in header:
                raise DataFormatError(f"нет обязательного столбца '{column}'", source=str(self.path), line=header_line)


def load_dataset(path: Union[str, Path], kind: Optional[str] = None) -> DataSet:
    """Загрузка CSV-таблицы измерений"""
    return DatasetLoader(path).load(kind)
