"""Модуль конфигурации."""
