"""Technical impact: assessed danger, protection levels and risk mitigation.

All arithmetic is unrounded. Rounding is a display concern, with the one
exception of :data:`RmMode.PAPER_ROUNDED`, which reproduces hand-computed
chains that round the protection figures to integers and the mitigation to
two decimals.
"""

from __future__ import annotations

from dataclasses import dataclass
from decimal import ROUND_HALF_UP, Decimal
from enum import Enum
from typing import TYPE_CHECKING, Iterator, Mapping, Optional

from .model import CiaVector, Pair, ProtectionAssignment

if TYPE_CHECKING:
    from .scenario_io import Scenario

__all__ = [
    "MAX_DOT",
    "RmMode",
    "DangerMatrix",
    "round_half_away",
    "assessed_danger",
    "assessed_protection",
    "protection_level",
    "actual_danger",
    "security_impact",
    "risk_mitigation",
    "effectiveness_from_factors",
    "danger_matrices",
    "protection_matrix",
]

# 5*5 + 5*5 + 5*5
MAX_DOT = 75


class RmMode(str, Enum):
    EXACT = "exact"
    PAPER_ROUNDED = "paper-rounded"


def round_half_away(x: float, ndigits: int = 0) -> float:
    """Round to ``ndigits`` decimals, halves away from zero (27 for 26.5)."""
    q = Decimal(1).scaleb(-ndigits)
    return float(Decimal(repr(x)).quantize(q, rounding=ROUND_HALF_UP))


def assessed_danger(d: CiaVector, v: CiaVector) -> float:
    """Threat-on-service danger as a percentage of the worst case (75)."""
    return d.dot(v) * 100 / MAX_DOT


def assessed_protection(pa: Optional[ProtectionAssignment]) -> float:
    if pa is None or not pa.deployed:
        return 0.0
    return pa.effectiveness * pa.coverage


def protection_level(ad: float, ap: float) -> float:
    return 100 - max(0.0, ad - ap)


def actual_danger(ad: float, ap: float) -> float:
    # negative means protection exceeds the danger
    return ad - ap


def security_impact(pl_current: float, pl_potential: float) -> float:
    return pl_potential - pl_current


def risk_mitigation(pl_current: float, pl_potential: float) -> float:
    """Share of the residual risk removed by moving from current to potential.

    Negative for a candidate that lowers protection. Zero when the current
    level is already 100, since there is nothing left to mitigate.
    """
    headroom = 100 - pl_current
    if headroom <= 0:
        return 0.0
    return (pl_potential - pl_current) / headroom


def effectiveness_from_factors(reliability: float, update_policy: float, resilience: float) -> float:
    for name, f in (("reliability", reliability), ("update_policy", update_policy), ("resilience", resilience)):
        if not 0 <= f <= 1:
            raise ValueError(f"{name} factor {f!r} outside [0, 1]")
    return reliability * update_policy * resilience


@dataclass(frozen=True)
class DangerMatrix:
    """Threat rows by service columns; ``None`` marks an N/A cell."""

    threats: tuple[str, ...]
    services: tuple[str, ...]
    cells: Mapping[Pair, Optional[float]]

    def get(self, threat: str, service: str) -> Optional[float]:
        return self.cells[(threat, service)]

    def rows(self) -> Iterator[tuple[str, list[Optional[float]]]]:
        for t in self.threats:
            yield t, [self.cells[(t, s)] for s in self.services]


def _axes(scenario: Scenario) -> tuple[tuple[str, ...], tuple[str, ...]]:
    return tuple(t.id for t in scenario.threats), tuple(s.id for s in scenario.services)


def danger_matrices(scenario: Scenario) -> tuple[DangerMatrix, DangerMatrix]:
    """Return the (assessed, actual) danger matrices for a scenario."""
    threats, services = _axes(scenario)
    applicable = set(scenario.applicability)
    assessed: dict[Pair, Optional[float]] = {}
    actual: dict[Pair, Optional[float]] = {}
    for threat in scenario.threats:
        for service in scenario.services:
            key = (threat.id, service.id)
            if key not in applicable:
                assessed[key] = actual[key] = None
                continue
            ad = assessed_danger(threat.dangerousness, service.value)
            assessed[key] = ad
            actual[key] = actual_danger(ad, assessed_protection(scenario.protections.get(key)))
    return DangerMatrix(threats, services, assessed), DangerMatrix(threats, services, actual)


def protection_matrix(scenario: Scenario) -> DangerMatrix:
    """Assessed protection per cell; N/A where no protection exists."""
    threats, services = _axes(scenario)
    cells: dict[Pair, Optional[float]] = {}
    for t in threats:
        for s in services:
            pa = scenario.protections.get((t, s))
            cells[(t, s)] = None if pa is None else assessed_protection(pa)
    return DangerMatrix(threats, services, cells)
