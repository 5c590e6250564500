"""
Командная строка sqzkit
"""
from .app import build_parser, run
from .registry import CommandRegistry

__all__ = ["run", "build_parser", "CommandRegistry"]
