"""
Бюджет эффективности: цепочка детектирования и полная эффективность состояния
"""
from typing import Optional, Tuple

from ..models import BudgetReport, CavityRates, DetectionChain, LedgerStage
from .opo_service import OpoService


class BudgetService:
    """Сборка и разбор бюджета потерь.

    Видность входит квадратом (перекрытие мод по мощности),
    остаток между выведенной и модельной эффективностью не подгоняется к 1.
    """

    @staticmethod
    def eta_det(chain: DetectionChain) -> float:
        """eta_det = visibility² · eta_prop · eta_pd"""
        return chain.eta_det

    @staticmethod
    def eta_total(chain: DetectionChain, rates: CavityRates) -> float:
        """Полная эффективность состояния: eta_esc · eta_det"""
        return rates.eta_esc * chain.eta_det

    @staticmethod
    def budget_report(
        chain: DetectionChain,
        rates: CavityRates,
        measured_pair: Optional[Tuple[float, float]] = None,
    ) -> BudgetReport:
        """
        Упорядоченный бюджет: выход резонатора, распространение,
        согласование мод гомодина, фотодиоды.

        :param measured_pair: (sqz_db, antisqz_db) измеренной пары, опционально
        :return: BudgetReport с накопленной эффективностью по стадиям
        """
        transmissions = [
            ("escape", rates.eta_esc),
            ("propagation", chain.eta_prop),
            ("mode_matching", chain.visibility ** 2),
            ("photodiode", chain.eta_pd),
        ]

        stages = []
        cumulative = 1.0
        for name, transmission in transmissions:
            cumulative *= transmission
            stages.append(LedgerStage(stage=name, transmission=transmission, cumulative=cumulative))

        modeled = BudgetService.eta_total(chain, rates)
        report = dict(stages=stages, eta_det=chain.eta_det, eta_total=modeled)

        if measured_pair is not None:
            inferred = OpoService.infer_from_pair(*measured_pair)
            report.update(
                inferred_eta_total=inferred["eta_total"],
                inferred_eta_det=inferred["eta_total"] / rates.eta_esc,
                inferred_pump_ratio=inferred["pump_ratio"],
                residual=inferred["eta_total"] / modeled,
            )

        return BudgetReport(**report)


def eta_det(chain: DetectionChain) -> float:
    return BudgetService.eta_det(chain)


def eta_total(chain: DetectionChain, rates: CavityRates) -> float:
    return BudgetService.eta_total(chain, rates)


def budget_report(
    chain: DetectionChain,
    rates: CavityRates,
    measured_pair: Optional[Tuple[float, float]] = None,
) -> BudgetReport:
    return BudgetService.budget_report(chain, rates, measured_pair)
