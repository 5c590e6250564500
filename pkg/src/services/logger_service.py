"""
Цветной логгер sqzkit: сообщения в stderr, stdout остаётся для отчётов и --json
"""
import os
import sys
import traceback
from datetime import datetime
from typing import Any, Dict, Optional, Tuple


class Colors:
    """ANSI цветовые коды для терминала"""
    RESET = '\033[0m'
    DIM = '\033[2m'

    RED = '\033[31m'
    GREEN = '\033[32m'
    YELLOW = '\033[33m'
    BLUE = '\033[34m'
    MAGENTA = '\033[35m'
    CYAN = '\033[36m'


# уровень -> (эмодзи, цвет)
LEVELS: Dict[str, Tuple[str, str]] = {
    "INFO": ("ℹ️", Colors.BLUE),
    "SUCCESS": ("✅", Colors.GREEN),
    "WARNING": ("⚠️", Colors.YELLOW),
    "ERROR": ("❌", Colors.RED),
    "DEBUG": ("🐛", Colors.MAGENTA),
    "FIT": ("📈", Colors.CYAN),
    "SIM": ("🎲", Colors.CYAN),
}


def format_details(**fields: Any) -> Optional[str]:
    """
    Пары ключ=значение для хвоста сообщения; None пропускаются

    :return: Строка "rss=1.2e-05, iter=14" или None, если полей нет
    """
    parts = []
    for key, value in fields.items():
        if value is None:
            continue
        if isinstance(value, float):
            value = f"{value:.3e}"
        parts.append(f"{key}={value}")
    return ", ".join(parts) or None


class Logger:
    """Логгер командной строки"""

    def __init__(self, name: str = "sqzkit", stream=None):
        self.name = name
        self.stream = stream
        self.enable_colors = self._should_enable_colors()

    @property
    def _out(self):
        return self.stream or sys.stderr

    def _should_enable_colors(self) -> bool:
        """Цвета только для терминала и без NO_COLOR"""
        if os.getenv("NO_COLOR"):
            return False
        out = self._out
        if not hasattr(out, "isatty") or not out.isatty():
            return False
        if os.name == 'nt':
            return 'ANSICON' in os.environ or 'WT_SESSION' in os.environ
        return True

    def _paint(self, text: str, color: str) -> str:
        return f"{color}{text}{Colors.RESET}" if self.enable_colors else text

    def _log(self, level: str, message: str, details: Optional[str] = None):
        emoji, color = LEVELS[level]
        line = f"{datetime.now():%H:%M:%S} {self._paint(f'[{level}]', color)} {self._paint(emoji, color)} {message}"
        if details:
            line += " " + self._paint(f"({details})", Colors.DIM)
        print(line, file=self._out, flush=True)

    def info(self, message: str, details: Optional[str] = None):
        self._log("INFO", message, details)

    def success(self, message: str, details: Optional[str] = None):
        self._log("SUCCESS", message, details)

    def warning(self, message: str, details: Optional[str] = None):
        self._log("WARNING", message, details)

    def error(self, message: str, details: Optional[str] = None, exc_info: bool = False):
        """Ошибка; exc_info=True печатает трассировку текущего исключения"""
        self._log("ERROR", message, details)
        if exc_info:
            traceback.print_exc(file=self._out)

    def debug(self, message: str, details: Optional[str] = None):
        """Только при DEBUG=true"""
        if os.getenv("DEBUG", "false").lower() == "true":
            self._log("DEBUG", message, details)

    def fit(self, action: str, rss: Optional[float] = None, iterations: Optional[int] = None):
        """Итог подгонки: остаточная сумма квадратов и число итераций"""
        self._log("FIT", action, format_details(rss=rss, iter=iterations))

    def sim(self, action: str, seed: Optional[int] = None, points: Optional[int] = None):
        """Симуляция трасс: seed и число точек"""
        self._log("SIM", action, format_details(seed=seed, points=points))

    def config(self, action: str, path: Optional[str] = None):
        self._log("INFO", f"Конфигурация {action}", format_details(path=path))


logger = Logger("sqzkit")
