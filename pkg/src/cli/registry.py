"""
Реестр команд командной строки.

Команда - pydantic-модель с атрибутом name и методом process(ctx);
поля модели становятся флагами подкоманды.
"""

from typing import Dict, List, Optional, Type

from pydantic import BaseModel

from ..services.logger_service import logger


class CommandRegistry:
    """Реестр команд."""

    def __init__(self):
        """Инициализация реестра."""
        self._commands: Dict[str, Type[BaseModel]] = {}
        self._load_commands()

    def _load_commands(self) -> None:
        """Загружает все команды из модулей."""
        from .cavity_commands import BudgetCommand, CavityCommand, InferPairCommand, PredictCommand
        from .design_commands import OptimizeCommand
        from .fit_commands import CharacterizeCommand, FitGainCommand, FitSqzCommand
        from .sim_commands import SimulateCommand

        commands_list = [
            CavityCommand,
            BudgetCommand,
            PredictCommand,
            InferPairCommand,
            FitGainCommand,
            FitSqzCommand,
            CharacterizeCommand,
            SimulateCommand,
            OptimizeCommand,
        ]

        for command_class in commands_list:
            self.register(command_class)

    def register(self, command_class: Type[BaseModel]) -> None:
        """
        Регистрирует команду.

        Args:
            command_class: Pydantic-модель с name и process
        """
        if not (isinstance(command_class, type) and issubclass(command_class, BaseModel)):
            raise ValueError(f"Команда {command_class!r} должна быть наследником BaseModel")
        if not callable(getattr(command_class, "process", None)):
            raise ValueError(f"Команда {command_class.__name__} должна иметь метод process")

        name = getattr(command_class, "name", None) or command_class.__name__
        self._commands[name] = command_class
        logger.debug(f"Зарегистрирована команда: {name}")

    def get_command(self, name: str) -> Optional[Type[BaseModel]]:
        """
        Получить команду по имени.

        Returns:
            Класс команды или None
        """
        return self._commands.get(name)

    def get_all_commands(self) -> List[Type[BaseModel]]:
        """Список всех зарегистрированных команд."""
        return list(self._commands.values())

    def get_command_names(self) -> List[str]:
        """Список имен всех команд."""
        return list(self._commands.keys())
