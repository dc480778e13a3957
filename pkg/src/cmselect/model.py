"""Domain types for services, threats and deployed protections.

Types are plain frozen dataclasses and accept out-of-range values on
construction; :func:`validate_model` is the single place that checks the
invariants and reports every violation as a :class:`Diagnostic`.
"""

from __future__ import annotations

from dataclasses import dataclass
from enum import Enum
from typing import Iterable, Mapping

__all__ = [
    "CiaVector",
    "Service",
    "Threat",
    "Pair",
    "ProtectionAssignment",
    "Severity",
    "Diagnostic",
    "validate_model",
    "has_errors",
]

CIA_MAX = 5

# (threat-id, service-id)
Pair = tuple[str, str]


class Severity(str, Enum):
    ERROR = "error"
    WARNING = "warning"


@dataclass(frozen=True)
class Diagnostic:
    severity: Severity
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.severity.value}: {self.location}: {self.message}"

    def to_dict(self) -> dict:
        return {"severity": self.severity.value, "location": self.location, "message": self.message}


@dataclass(frozen=True)
class CiaVector:
    """Confidentiality / integrity / availability scores, each 0..5."""

    c: int
    i: int
    a: int

    def as_tuple(self) -> tuple[int, int, int]:
        return (self.c, self.i, self.a)

    def dot(self, other: CiaVector) -> int:
        return self.c * other.c + self.i * other.i + self.a * other.a


@dataclass(frozen=True)
class Service:
    id: str
    value: CiaVector


@dataclass(frozen=True)
class Threat:
    id: str
    dangerousness: CiaVector


@dataclass(frozen=True)
class ProtectionAssignment:
    """Protection deployed against one threat on one service.

    ``effectiveness`` is in percentage points. Coverage is kept as the two
    instance counts so that files written as "900 of 2700" round-trip
    exactly; :attr:`coverage` gives the fraction.
    """

    effectiveness: float
    deployed_instances: int = 1
    total_instances: int = 1
    deployed: bool = True

    @property
    def coverage(self) -> float:
        if self.total_instances <= 0:
            return 0.0
        return self.deployed_instances / self.total_instances

    def problems(self) -> list[str]:
        out = []
        if not 0 <= self.effectiveness <= 100:
            out.append(f"effectiveness {self.effectiveness!r} outside [0, 100]")
        if self.total_instances <= 0:
            out.append(f"total_instances must be positive, got {self.total_instances}")
        elif not 0 <= self.deployed_instances <= self.total_instances:
            out.append(
                f"deployed_instances {self.deployed_instances} outside [0, {self.total_instances}]"
            )
        return out


def _check_cia(vec: CiaVector, where: str) -> list[Diagnostic]:
    out = []
    for name, val in zip("cia", vec.as_tuple()):
        if isinstance(val, bool) or not isinstance(val, int) or not 0 <= val <= CIA_MAX:
            out.append(
                Diagnostic(Severity.ERROR, f"{where}.{name}", f"score {val!r} is not an integer in [0, {CIA_MAX}]")
            )
    return out


def _check_unique(ids: Iterable[str], kind: str) -> list[Diagnostic]:
    seen: set[str] = set()
    out = []
    for ident in ids:
        if ident in seen:
            out.append(Diagnostic(Severity.ERROR, f"{kind}[{ident}]", f"duplicate {kind} id"))
        seen.add(ident)
    return out


def validate_model(
    services: Iterable[Service],
    threats: Iterable[Threat],
    applicability: Iterable[Pair],
    protections: Mapping[Pair, ProtectionAssignment],
) -> list[Diagnostic]:
    """Check every model invariant; an empty list means the model is valid."""
    services = list(services)
    threats = list(threats)
    applicability = list(applicability)

    diags: list[Diagnostic] = []
    diags += _check_unique((s.id for s in services), "service")
    diags += _check_unique((t.id for t in threats), "threat")
    for s in services:
        diags += _check_cia(s.value, f"services[{s.id}].value")
    for t in threats:
        diags += _check_cia(t.dangerousness, f"threats[{t.id}].dangerousness")

    service_ids = {s.id for s in services}
    threat_ids = {t.id for t in threats}

    def unknown_refs(pair: Pair, where: str) -> list[Diagnostic]:
        out = []
        if pair[0] not in threat_ids:
            out.append(Diagnostic(Severity.ERROR, where, f"unknown threat {pair[0]!r}"))
        if pair[1] not in service_ids:
            out.append(Diagnostic(Severity.ERROR, where, f"unknown service {pair[1]!r}"))
        return out

    applicable = set()
    for pair in applicability:
        diags += unknown_refs(pair, f"applicability[{pair[0]}/{pair[1]}]")
        applicable.add(pair)

    for pair, pa in protections.items():
        where = f"protections[{pair[0]}/{pair[1]}]"
        refs = unknown_refs(pair, where)
        diags += refs
        for problem in pa.problems():
            diags.append(Diagnostic(Severity.ERROR, where, problem))
        if not refs and pair not in applicable:
            diags.append(Diagnostic(Severity.WARNING, where, "protection on a pair where the threat is N/A"))
    return diags


def has_errors(diags: Iterable[Diagnostic]) -> bool:
    return any(d.severity is Severity.ERROR for d in diags)
