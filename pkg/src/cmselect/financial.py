"""Financial metrics: ALE, ARC and AIV ledgers, RORI, plus ROI/ROSI."""

from __future__ import annotations

from dataclasses import dataclass, fields

from .model import Diagnostic, Severity

__all__ = [
    "LOSS_FIELDS",
    "LossBreakdown",
    "ArcLedger",
    "AivLedger",
    "NonPositiveInfrastructureValue",
    "ZeroCost",
    "ale",
    "ale_with_diagnostics",
    "arc",
    "aiv",
    "rori",
    "roi",
    "rosi",
]


class NonPositiveInfrastructureValue(ValueError):
    """AIV must be strictly positive."""


class ZeroCost(ValueError):
    """Return ratio requested against a non-positive cost."""


@dataclass(frozen=True)
class LossBreakdown:
    """Per-incident losses; ``ci`` (contracted insurance) is subtracted."""

    la: float = 0.0  # assets
    ld: float = 0.0  # data
    lr: float = 0.0  # reputation
    lp: float = 0.0  # legal procedures
    lrec: float = 0.0  # revenue, existing clients
    lrpc: float = 0.0  # revenue, potential clients
    ol: float = 0.0  # other
    ci: float = 0.0  # contracted insurance

    def gross(self) -> float:
        return self.la + self.ld + self.lr + self.lp + self.lrec + self.lrpc + self.ol


LOSS_FIELDS = tuple(f.name for f in fields(LossBreakdown))


@dataclass(frozen=True)
class ArcLedger:
    ci: float = 0.0  # implementation
    cm: float = 0.0  # maintenance
    odc: float = 0.0  # other direct
    ic: float = 0.0  # indirect / collateral

    @property
    def total(self) -> float:
        return arc(self)


@dataclass(frozen=True)
class AivLedger:
    ec: float = 0.0  # equipment
    pc: float = 0.0  # personnel
    sc: float = 0.0  # services
    oc: float = 0.0  # other
    rv: float = 0.0  # resell value, subtracted


def ale_with_diagnostics(losses: LossBreakdown, aro: float) -> tuple[float, list[Diagnostic]]:
    net = losses.gross() - losses.ci
    if net < 0:
        diag = Diagnostic(
            Severity.WARNING,
            "financials.ale",
            f"insurance ({losses.ci:g}) exceeds losses ({losses.gross():g}); ALE clamped to 0",
        )
        return 0.0, [diag]
    return net * aro, []


def ale(losses: LossBreakdown, aro: float) -> float:
    """Annual loss expectancy, clamped at zero when over-insured."""
    return ale_with_diagnostics(losses, aro)[0]


def arc(ledger: ArcLedger) -> float:
    return ledger.ci + ledger.cm + ledger.odc + ledger.ic


def aiv(ledger: AivLedger) -> float:
    total = ledger.ec + ledger.pc + ledger.sc + ledger.oc - ledger.rv
    if total <= 0:
        raise NonPositiveInfrastructureValue(f"AIV must be > 0, got {total:g}")
    return total


def rori(ale: float, rm: float, arc: float, aiv: float) -> float:
    """Return on response investment, in percent.

    ``rm`` is a fraction, not percentage points. The do-nothing baseline
    (rm = 0, arc = 0) evaluates to exactly zero.
    """
    if aiv <= 0:
        raise NonPositiveInfrastructureValue(f"AIV must be > 0, got {aiv:g}")
    if arc < 0:
        raise ValueError(f"ARC must be >= 0, got {arc:g}")
    return (ale * rm - arc) / (arc + aiv) * 100


def roi(benefits: float, costs: float) -> float:
    if costs <= 0:
        raise ZeroCost(f"costs must be > 0, got {costs:g}")
    return (benefits - costs) / costs * 100


def rosi(ale_before: float, ale_after: float, cm_cost: float) -> float:
    if cm_cost <= 0:
        raise ZeroCost(f"countermeasure cost must be > 0, got {cm_cost:g}")
    return ((ale_before - ale_after) - cm_cost) / cm_cost * 100
