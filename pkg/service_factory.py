"""
Фабрика для создания и инициализации сервисов
"""
from src.cli.registry import CommandRegistry
from src.models import FitOptions
from src.storage import CsvTableStorage


class ServiceFactory:
    """Фабрика для ленивого создания общих объектов командной строки"""

    def __init__(self):
        self._fit_options = None
        self._command_registry = None
        self._table_storage = None

    def get_fit_options(self) -> FitOptions:
        """Опции решателя из переменных окружения SQZKIT_*"""
        if self._fit_options is None:
            self._fit_options = FitOptions.from_env()
        return self._fit_options

    def get_command_registry(self) -> CommandRegistry:
        """Получить экземпляр CommandRegistry"""
        if self._command_registry is None:
            self._command_registry = CommandRegistry()
        return self._command_registry

    def get_table_storage(self) -> CsvTableStorage:
        """Получить экземпляр CsvTableStorage"""
        if self._table_storage is None:
            self._table_storage = CsvTableStorage()
        return self._table_storage


# Глобальный экземпляр фабрики
service_factory = ServiceFactory()
