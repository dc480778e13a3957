"""Candidate countermeasures: apply, evaluate with RORI, rank."""

from __future__ import annotations

import dataclasses
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import TYPE_CHECKING, Any, Iterable, Mapping, Optional, Sequence

from . import financial
from .financial import ArcLedger
from .model import Diagnostic, Pair, ProtectionAssignment, Severity
from .protection import (
    RmMode,
    assessed_danger,
    assessed_protection,
    protection_level,
    risk_mitigation,
    round_half_away,
)

if TYPE_CHECKING:
    from .scenario_io import Scenario

__all__ = [
    "MutationAction",
    "ProtectionMutation",
    "Candidate",
    "Evaluation",
    "InvalidMutation",
    "InvalidTarget",
    "apply_candidate",
    "evaluate_candidate",
    "evaluate_all",
    "rank_candidates",
]


class InvalidMutation(ValueError):
    pass


class InvalidTarget(ValueError):
    pass


class MutationAction(str, Enum):
    SET_EFFECTIVENESS = "set_effectiveness"
    SET_COVERAGE = "set_coverage"
    SET_DEPLOYED = "set_deployed"
    REMOVE = "remove"


@dataclass(frozen=True)
class ProtectionMutation:
    """One change to the protection on a (threat, service) pair.

    ``value`` depends on the action: a number for set_effectiveness, a
    ``(deployed_instances, total_instances)`` pair for set_coverage, a bool
    for set_deployed and ``None`` for remove.
    """

    threat: str
    service: str
    action: MutationAction
    value: Any = None

    @property
    def pair(self) -> Pair:
        return (self.threat, self.service)


@dataclass(frozen=True)
class Candidate:
    id: str
    description: str = ""
    mutations: tuple[ProtectionMutation, ...] = ()
    arc: ArcLedger = field(default_factory=ArcLedger)
    # analyst-stated mitigation that replaces the computed one
    rm_override: Optional[float] = None


@dataclass(frozen=True)
class Evaluation:
    candidate_id: str
    target: Pair
    pl_current: float
    pl_potential: float
    rm: float
    rm_computed: float
    arc: float
    rori: float
    flags: tuple[str, ...] = ()
    diagnostics: tuple[Diagnostic, ...] = ()


def _mutate(current: Optional[ProtectionAssignment], m: ProtectionMutation) -> Optional[ProtectionAssignment]:
    if m.action is MutationAction.REMOVE:
        return None
    if m.action is MutationAction.SET_EFFECTIVENESS:
        if current is None:
            return ProtectionAssignment(effectiveness=m.value)
        return dataclasses.replace(current, effectiveness=m.value)
    if current is None:
        raise InvalidMutation(f"{m.action.value} on {m.threat}/{m.service}: no protection exists to modify")
    if m.action is MutationAction.SET_COVERAGE:
        deployed, total = m.value
        return dataclasses.replace(current, deployed_instances=deployed, total_instances=total)
    if m.action is MutationAction.SET_DEPLOYED:
        return dataclasses.replace(current, deployed=bool(m.value))
    raise InvalidMutation(f"unknown action {m.action!r}")


def apply_candidate(
    state: Mapping[Pair, ProtectionAssignment], candidate: Candidate
) -> dict[Pair, ProtectionAssignment]:
    """Return a new protection state with the candidate's mutations applied in order."""
    new = dict(state)
    for m in candidate.mutations:
        pa = _mutate(new.get(m.pair), m)
        if pa is None:
            new.pop(m.pair, None)
            continue
        problems = pa.problems()
        if problems:
            raise InvalidMutation(f"candidate {candidate.id}: {m.threat}/{m.service}: " + "; ".join(problems))
        new[m.pair] = pa
    return new


def _levels(ad: float, ap_cur: float, ap_pot: float, mode: RmMode) -> tuple[float, float, float]:
    if mode is RmMode.PAPER_ROUNDED:
        ad, ap_cur, ap_pot = (round_half_away(x) for x in (ad, ap_cur, ap_pot))
    pl_cur = protection_level(ad, ap_cur)
    pl_pot = protection_level(ad, ap_pot)
    rm = risk_mitigation(pl_cur, pl_pot)
    if mode is RmMode.PAPER_ROUNDED:
        rm = round_half_away(rm, 2)
    return pl_cur, pl_pot, rm


def evaluate_candidate(
    scenario: Scenario,
    candidate: Candidate,
    target: Pair,
    ale: float,
    aiv: float,
    mode: RmMode = RmMode.EXACT,
    use_override: bool = True,
) -> Evaluation:
    if target not in set(scenario.applicability):
        raise InvalidTarget(f"target {target[0]}/{target[1]} is not an applicable threat/service pair")
    threats = {t.id: t for t in scenario.threats}
    services = {s.id: s for s in scenario.services}

    before = scenario.protections
    after = apply_candidate(before, candidate)

    def ad_of(pair: Pair) -> float:
        return assessed_danger(threats[pair[0]].dangerousness, services[pair[1]].value)

    pl_cur, pl_pot, rm_computed = _levels(
        ad_of(target), assessed_protection(before.get(target)), assessed_protection(after.get(target)), mode
    )

    where = f"candidates[{candidate.id}]"
    diags: list[Diagnostic] = []
    flags: list[str] = []
    rm = rm_computed
    if use_override and candidate.rm_override is not None:
        rm = candidate.rm_override
        flags.append("rm-override")
        diags.append(
            Diagnostic(Severity.WARNING, where, f"stated RM {rm:g} used instead of computed {rm_computed:.4f}")
        )
    if rm < 0:
        flags.append("degrading")
        diags.append(Diagnostic(Severity.WARNING, where, f"degrading candidate: RM {rm:.4f} < 0"))

    for pair in sorted(set(before) | set(after)):
        if pair == target:
            continue
        ap_b, ap_a = assessed_protection(before.get(pair)), assessed_protection(after.get(pair))
        if ap_b == ap_a:
            continue
        msg = f"side effect on {pair[0]}/{pair[1]}: AP {ap_b:.2f} -> {ap_a:.2f}"
        if pair[0] in threats and pair[1] in services:
            ad = ad_of(pair)
            msg += f", PL {protection_level(ad, ap_b):.2f} -> {protection_level(ad, ap_a):.2f}"
        diags.append(Diagnostic(Severity.WARNING, where, msg))

    cost = financial.arc(candidate.arc)
    return Evaluation(
        candidate_id=candidate.id,
        target=target,
        pl_current=pl_cur,
        pl_potential=pl_pot,
        rm=rm,
        rm_computed=rm_computed,
        arc=cost,
        rori=financial.rori(ale, rm, cost, aiv),
        flags=tuple(flags),
        diagnostics=tuple(diags),
    )


def evaluate_all(
    scenario: Scenario,
    candidates: Sequence[Candidate],
    target: Pair,
    ale: float,
    aiv: float,
    mode: RmMode = RmMode.EXACT,
    use_override: bool = True,
    workers: int = 1,
) -> list[Evaluation]:
    """Evaluate every candidate; results come back in candidate order."""

    def one(c: Candidate) -> Evaluation:
        return evaluate_candidate(scenario, c, target, ale, aiv, mode, use_override)

    if workers > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            return list(pool.map(one, candidates))
    return [one(c) for c in candidates]


def _rank_key(e: Evaluation) -> tuple:
    return (-e.rori, e.arc, -e.rm, e.candidate_id)


def rank_candidates(evaluations: Iterable[Evaluation]) -> list[Evaluation]:
    """Highest RORI first; ties go to cheaper ARC, then higher RM, then id."""
    return sorted(evaluations, key=_rank_key)
