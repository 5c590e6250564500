"""
Пакет физических сервисов sqzkit
"""
from .cavity_service import CavityService
from .opo_service import OpoService
from .budget_service import BudgetService
from .simtrace_service import TraceSimulator
from .design_service import DesignService

__all__ = ['CavityService', 'OpoService', 'BudgetService', 'TraceSimulator', 'DesignService']
