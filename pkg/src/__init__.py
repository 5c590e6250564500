"""
Основной пакет приложения
"""
