"""
Точка входа командной строки: разбор аргументов, запуск команды, вывод
"""
import argparse
import json
import math
import sys
from pathlib import Path
from typing import Any, Dict, List, Literal, Optional, Sequence, Union, get_args, get_origin

import numpy as np
import pandas as pd
from pydantic import BaseModel, ValidationError
from pydantic.fields import FieldInfo

from ..common.errors import FitConvergenceError, SqzkitError, UsageError
from ..config.run_config import load_run_config
from ..models import FitOptions
from ..services.error_checker import EXIT_INPUT_ERROR, EXIT_OK, ErrorChecker
from ..services.logger_service import logger
from ..storage.table_storage import CsvTableStorage, sibling_path
from .context import CommandContext, CommandReport
from .registry import CommandRegistry


_FRACTION_PARTS = {"eta", "ratio", "transmission", "reflection", "residual", "cumulative", "visibility"}


class _Parser(argparse.ArgumentParser):
    """argparse без sys.exit(2) на ошибках: неверные флаги - ошибка ввода (код 1)"""

    def error(self, message: str):
        raise UsageError(f"{self.prog}: {message}")


def _unwrap_optional(annotation: Any) -> Any:
    if get_origin(annotation) is Union:
        args = [arg for arg in get_args(annotation) if arg is not type(None)]
        if len(args) == 1:
            return args[0]
    return annotation


def _add_field(parser: argparse.ArgumentParser, name: str, field: FieldInfo):
    """Поле модели команды -> флаг --имя-через-дефис"""
    annotation = _unwrap_optional(field.annotation)
    kwargs: Dict[str, Any] = {"dest": name, "default": None, "help": field.description}
    if annotation is bool:
        kwargs["action"] = "store_true"
    elif get_origin(annotation) is Literal:
        kwargs["choices"] = list(get_args(annotation))
    elif annotation in (int, float):
        kwargs["type"] = annotation
    elif annotation is Path:
        kwargs["type"] = Path
    if field.is_required():
        kwargs["required"] = True
    parser.add_argument("--" + name.replace("_", "-"), **kwargs)


def build_parser(registry: CommandRegistry) -> argparse.ArgumentParser:
    """Парсер с подкомандами из реестра; общие флаги доступны в каждой подкоманде"""
    common = _Parser(add_help=False)
    common.add_argument("--config", type=Path, help="Файл запуска (JSON, schema 1)")
    common.add_argument("--out", type=Path, help="CSV для основной таблицы результата")
    common.add_argument("--seed", type=int, help="Seed симуляции и мультистарта")
    common.add_argument("--strict", action="store_true", help="Не ограничивать P/P_th вблизи порога")
    common.add_argument("--json", dest="json_output", action="store_true", help="Вывод в JSON")

    parser = _Parser(prog="sqzkit", description="Моделирование и оценка источника сжатого света")
    subparsers = parser.add_subparsers(dest="command", metavar="command")
    for command_class in registry.get_all_commands():
        doc = (command_class.__doc__ or "").strip()
        sub = subparsers.add_parser(command_class.name, parents=[common], help=doc, description=doc)
        for name, field in command_class.model_fields.items():
            _add_field(sub, name, field)
    return parser


def format_value(key: str, value: Any) -> str:
    """дБ - 2 знака, эффективности и коэффициенты - 3, остальное - 6 значащих"""
    if value is None or isinstance(value, (bool, str, int)):
        return str(value)
    value = float(value)
    if key.endswith("_stderr"):
        return f"{value:.3g}"
    if key.endswith("_db") or "_db_" in key:
        return f"{value:.2f}"
    parts = set(key.split("_"))
    if parts & _FRACTION_PARTS or key.startswith(("r_out", "r_hr", "base_r_out")):
        return f"{value:.3f}"
    return f"{value:.6g}"


def _jsonable(value: Any) -> Any:
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    if isinstance(value, np.generic):
        value = value.item()
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, Path):
        return str(value)
    return value


def _write_tables(report: CommandReport, out: Optional[Path], storage: CsvTableStorage) -> List[Path]:
    if out is None:
        return []
    if not report.tables:
        return [storage.write_table(out, pd.DataFrame([report.values]), {"command": report.command})]
    written = []
    for name, table in report.tables.items():
        path = out if name == "main" else sibling_path(out, name)
        written.append(storage.write_table(path, table.frame, table.metadata))
    return written


def _render(report: CommandReport, json_output: bool, written: Sequence[Path]):
    if json_output:
        payload = {
            "command": report.command,
            "values": report.values,
            "tables": {
                name: table.frame.to_dict(orient="records")
                for name, table in report.tables.items()
                if table.in_json
            },
            "written": [str(path) for path in written],
        }
        print(json.dumps(_jsonable(payload), ensure_ascii=False, indent=2))
        return

    width = max((len(key) for key in report.values), default=0)
    print(report.command)
    for key, value in report.values.items():
        print(f"  {key.ljust(width)} = {format_value(key, value)}")
    for name, table in report.tables.items():
        if table.show:
            formatters = {column: (lambda v, c=column: format_value(c, v)) for column in table.frame.columns}
            print(table.frame.to_string(index=False, formatters=formatters))
    for path in written:
        logger.success("Записан файл", str(path))


def _render_failure(command: str, error: BaseException, json_output: bool):
    message = ErrorChecker.describe(error)
    logger.error(message)
    if json_output:
        payload: Dict[str, Any] = {"command": command, "error": message}
        if isinstance(error, FitConvergenceError):
            fit = error.fit_result
            payload.update(converged=False, diagnostic=fit.diagnostic, params=fit.params, rss=fit.rss)
        print(json.dumps(_jsonable(payload), ensure_ascii=False, indent=2))


def run(
    argv: Optional[Sequence[str]] = None,
    fit_options: Optional[FitOptions] = None,
    registry: Optional[CommandRegistry] = None,
    storage: Optional[CsvTableStorage] = None,
) -> int:
    """
    Запуск CLI.

    :param argv: Аргументы без имени программы
    :param fit_options: Опции решателя (по умолчанию из окружения)
    :param registry: Реестр команд (по умолчанию все команды пакета)
    :param storage: Запись CSV
    :return: 0 - успех, 1 - ошибка ввода, 2 - подгонка не сошлась
    """
    registry = registry or CommandRegistry()
    storage = storage or CsvTableStorage()
    parser = build_parser(registry)
    try:
        args = parser.parse_args(list(argv) if argv is not None else None)
    except SystemExit as e:
        return int(e.code or 0)
    except UsageError as e:
        logger.error(e.message)
        return EXIT_INPUT_ERROR

    if not args.command:
        parser.print_usage(sys.stderr)
        logger.error(f"Укажите команду: {', '.join(registry.get_command_names())}")
        return EXIT_INPUT_ERROR

    command_class = registry.get_command(args.command)
    try:
        config = None
        if args.config is not None:
            config = load_run_config(args.config)
            logger.config("загружена", str(args.config))
        ctx = CommandContext(
            config=config,
            config_path=args.config,
            out=args.out,
            seed=args.seed,
            strict=args.strict,
            json_output=args.json_output,
            fit_options=fit_options,
        )
        fields = {
            name: getattr(args, name)
            for name in command_class.model_fields
            if getattr(args, name, None) is not None
        }
        command: BaseModel = command_class(**fields)
        report = command.process(ctx)
        written = _write_tables(report, ctx.out, storage)
        _render(report, ctx.json_output, written)
        return EXIT_OK
    except (SqzkitError, ValidationError, OSError) as e:
        _render_failure(args.command, e, args.json_output)
        return ErrorChecker.exit_code(e)
    except Exception as e:
        logger.error(f"Непредвиденная ошибка в команде {args.command}: {e}", exc_info=True)
        return EXIT_INPUT_ERROR
