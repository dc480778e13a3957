"""Scenario documents: JSON parsing, validation and canonical serialization.

A scenario file is a single UTF-8 JSON document checked against
``data/scenario.schema.json``. Parsing either returns a complete
:class:`Scenario` or raises a :class:`ScenarioError` carrying every problem
found at the failing stage (syntax, then schema, then references).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from functools import lru_cache
from importlib import resources
from pathlib import Path
from typing import Any, Optional, Union

import jsonschema

from .financial import LOSS_FIELDS, AivLedger, ArcLedger, LossBreakdown
from .model import (
    CiaVector,
    Diagnostic,
    Pair,
    ProtectionAssignment,
    Service,
    Severity,
    Threat,
    validate_model,
)
from .selection import Candidate, InvalidMutation, MutationAction, ProtectionMutation, apply_candidate
from .uncertainty import (
    DEFAULT_ITERATIONS,
    DEFAULT_LIKELIHOOD,
    DEFAULT_SEVERITY,
    AleUncertaintySpec,
    Level,
    LikelihoodScale,
    Scale,
    SeverityScale,
)

__all__ = [
    "SCHEMA_VERSION",
    "Issue",
    "ScenarioError",
    "ScenarioSyntaxError",
    "ScenarioSchemaError",
    "ScenarioReferenceError",
    "BreakdownAle",
    "Financials",
    "Scenario",
    "schema",
    "parse_scenario",
    "load_scenario",
    "serialize_scenario",
    "validate_scenario",
    "bundled_path",
]

SCHEMA_VERSION = 1


@dataclass(frozen=True)
class Issue:
    location: str
    message: str

    def __str__(self) -> str:
        return f"{self.location}: {self.message}"


class ScenarioError(Exception):
    kind = "error"

    def __init__(self, issues: list[Issue]):
        self.issues = list(issues)
        super().__init__("; ".join(str(i) for i in self.issues))


class ScenarioSyntaxError(ScenarioError):
    kind = "syntax"


class ScenarioSchemaError(ScenarioError):
    kind = "schema"


class ScenarioReferenceError(ScenarioError):
    kind = "reference"


@dataclass(frozen=True)
class BreakdownAle:
    losses: LossBreakdown
    aro: float


AleForm = Union[float, BreakdownAle, AleUncertaintySpec]
AivForm = Union[float, AivLedger]


@dataclass(frozen=True)
class Financials:
    target: Pair
    ale: AleForm
    aiv: AivForm


@dataclass(frozen=True)
class Scenario:
    name: str
    services: tuple[Service, ...]
    threats: tuple[Threat, ...]
    applicability: tuple[Pair, ...]
    protections: dict[Pair, ProtectionAssignment] = field(default_factory=dict)
    currency: Optional[str] = None
    severity: Optional[Scale] = None  # None: use the default scale
    likelihood: Optional[Scale] = None
    financials: Optional[Financials] = None
    candidates: tuple[Candidate, ...] = ()

    @property
    def severity_scale(self) -> Scale:
        return self.severity or DEFAULT_SEVERITY

    @property
    def likelihood_scale(self) -> Scale:
        return self.likelihood or DEFAULT_LIKELIHOOD

    def candidate(self, candidate_id: str) -> Candidate:
        for c in self.candidates:
            if c.id == candidate_id:
                return c
        raise KeyError(candidate_id)


@lru_cache(maxsize=None)
def schema() -> dict:
    text = resources.files("cmselect").joinpath("data/scenario.schema.json").read_text(encoding="utf-8")
    return json.loads(text)


def bundled_path(name: str) -> Path:
    """Filesystem path of a scenario shipped in the package data."""
    return Path(str(resources.files("cmselect").joinpath("data", name)))


# ---------------------------------------------------------------- parsing


def _json_path(path) -> str:
    out = "$"
    for part in path:
        out += f"[{part}]" if isinstance(part, int) else f".{part}"
    return out


def _reject_duplicates(pairs: list[tuple[str, Any]]) -> dict:
    obj: dict = {}
    for k, v in pairs:
        if k in obj:
            raise ValueError(f"duplicate key {k!r}")
        obj[k] = v
    return obj


def _load_json(document: Union[bytes, str]) -> Any:
    if isinstance(document, bytes):
        try:
            document = document.decode("utf-8-sig")
        except UnicodeDecodeError as exc:
            raise ScenarioSyntaxError([Issue(f"byte {exc.start}", "document is not valid UTF-8")]) from None
    if not document.strip():
        return {}
    try:
        return json.loads(document, object_pairs_hook=_reject_duplicates)
    except json.JSONDecodeError as exc:
        raise ScenarioSyntaxError([Issue(f"line {exc.lineno} column {exc.colno}", exc.msg)]) from None
    except ValueError as exc:
        raise ScenarioSyntaxError([Issue("document", str(exc))]) from None


def _schema_issues(raw: Any) -> list[Issue]:
    validator = jsonschema.Draft202012Validator(schema())
    issues = []
    for err in sorted(validator.iter_errors(raw), key=lambda e: (list(map(str, e.absolute_path)), e.message)):
        issues.append(Issue(_json_path(err.absolute_path), err.message))
    return issues


def _cia(obj: dict) -> CiaVector:
    return CiaVector(obj["c"], obj["i"], obj["a"])


def _pair(obj: dict) -> Pair:
    return (obj["threat"], obj["service"])


def _scale(cls: type[Scale], items: list[dict]) -> Scale:
    return cls(tuple(Level(it["label"], it["min"], it["mode"], it["max"]) for it in items))


def _mutation(obj: dict) -> ProtectionMutation:
    action = MutationAction(obj["action"])
    value: Any = None
    if action is MutationAction.SET_EFFECTIVENESS:
        value = obj["effectiveness"]
    elif action is MutationAction.SET_COVERAGE:
        value = (obj["deployed_instances"], obj["total_instances"])
    elif action is MutationAction.SET_DEPLOYED:
        value = obj["deployed"]
    return ProtectionMutation(obj["threat"], obj["service"], action, value)


def _financials(obj: dict) -> Financials:
    ale_obj, aiv_obj = obj["ale"], obj["aiv"]
    ale: AleForm
    if "value" in ale_obj:
        ale = ale_obj["value"]
    elif "breakdown" in ale_obj:
        b = ale_obj["breakdown"]
        ale = BreakdownAle(LossBreakdown(**b["losses"]), b["aro"])
    else:
        sim = ale_obj["simulate"]
        ale = AleUncertaintySpec(
            losses=dict(sim["losses"]),
            aro=sim["aro"],
            iterations=sim.get("iterations", DEFAULT_ITERATIONS),
            seed=sim.get("seed", 0),
        )
    aiv: AivForm = aiv_obj["value"] if "value" in aiv_obj else AivLedger(**aiv_obj["ledger"])
    return Financials(_pair(obj["target"]), ale, aiv)


def _build(raw: dict) -> Scenario:
    scales = raw.get("scales", {})
    protections = {}
    for p in raw.get("protections", []):
        protections[_pair(p)] = ProtectionAssignment(
            effectiveness=p["effectiveness"],
            deployed_instances=p.get("deployed_instances", 1),
            total_instances=p.get("total_instances", 1),
            deployed=p.get("deployed", True),
        )
    candidates = tuple(
        Candidate(
            id=c["id"],
            description=c.get("description", ""),
            mutations=tuple(_mutation(m) for m in c.get("mutations", [])),
            arc=ArcLedger(**c.get("arc", {})),
            rm_override=c.get("rm_override"),
        )
        for c in raw.get("candidates", [])
    )
    return Scenario(
        name=raw["meta"]["name"],
        currency=raw["meta"].get("currency"),
        services=tuple(Service(s["id"], _cia(s["value"])) for s in raw["services"]),
        threats=tuple(Threat(t["id"], _cia(t["dangerousness"])) for t in raw["threats"]),
        applicability=tuple(_pair(a) for a in raw["applicability"]),
        protections=protections,
        severity=_scale(SeverityScale, scales["severity"]) if "severity" in scales else None,
        likelihood=_scale(LikelihoodScale, scales["likelihood"]) if "likelihood" in scales else None,
        financials=_financials(raw["financials"]) if "financials" in raw else None,
        candidates=candidates,
    )


def _reference_issues(raw: dict) -> list[Issue]:
    threats = {t["id"] for t in raw["threats"]}
    services = {s["id"] for s in raw["services"]}
    issues = []

    def check(obj: dict, where: str) -> None:
        if obj["threat"] not in threats:
            issues.append(Issue(where, f"unknown threat {obj['threat']!r}"))
        if obj["service"] not in services:
            issues.append(Issue(where, f"unknown service {obj['service']!r}"))

    for k, a in enumerate(raw["applicability"]):
        check(a, f"$.applicability[{k}]")
    for k, p in enumerate(raw.get("protections", [])):
        check(p, f"$.protections[{k}]")
    if "financials" in raw:
        check(raw["financials"]["target"], "$.financials.target")
    for k, c in enumerate(raw.get("candidates", [])):
        for j, m in enumerate(c.get("mutations", [])):
            check(m, f"$.candidates[{k}].mutations[{j}]")
    return issues


def parse_scenario(document: Union[bytes, str]) -> Scenario:
    """Parse a scenario document; raises :class:`ScenarioError` on any problem."""
    raw = _load_json(document)
    issues = _schema_issues(raw)
    if issues:
        raise ScenarioSchemaError(issues)
    issues = _reference_issues(raw)
    if issues:
        raise ScenarioReferenceError(issues)
    return _build(raw)


def load_scenario(path: Union[str, Path]) -> Scenario:
    return parse_scenario(Path(path).read_bytes())


# ---------------------------------------------------------- serialization


def _num(x: Any) -> Any:
    # minimal representation: integral floats are written without ".0"
    if isinstance(x, float) and x.is_integer() and abs(x) < 2**53:
        return int(x)
    return x


def _nonzero(obj: Any, names) -> dict:
    return {n: _num(getattr(obj, n)) for n in names if getattr(obj, n) != 0}


def _pair_out(pair: Pair) -> dict:
    return {"threat": pair[0], "service": pair[1]}


def _cia_out(v: CiaVector) -> dict:
    return {"c": v.c, "i": v.i, "a": v.a}


def _scale_out(scale: Scale) -> list:
    return [{"label": lv.label, "min": _num(lv.min), "mode": _num(lv.mode), "max": _num(lv.max)} for lv in scale.levels]


def _mutation_out(m: ProtectionMutation) -> dict:
    out = {"threat": m.threat, "service": m.service, "action": m.action.value}
    if m.action is MutationAction.SET_EFFECTIVENESS:
        out["effectiveness"] = _num(m.value)
    elif m.action is MutationAction.SET_COVERAGE:
        out["deployed_instances"], out["total_instances"] = m.value
    elif m.action is MutationAction.SET_DEPLOYED:
        out["deployed"] = bool(m.value)
    return out


def _financials_out(f: Financials) -> dict:
    if isinstance(f.ale, BreakdownAle):
        ale = {"breakdown": {"losses": _nonzero(f.ale.losses, LOSS_FIELDS), "aro": _num(f.ale.aro)}}
    elif isinstance(f.ale, AleUncertaintySpec):
        ale = {
            "simulate": {
                "losses": {k: _num(f.ale.losses[k]) for k in LOSS_FIELDS if k in f.ale.losses},
                "aro": _num(f.ale.aro),
                "iterations": f.ale.iterations,
                "seed": f.ale.seed,
            }
        }
    else:
        ale = {"value": _num(f.ale)}
    if isinstance(f.aiv, AivLedger):
        aiv = {"ledger": _nonzero(f.aiv, ("ec", "pc", "sc", "oc", "rv"))}
    else:
        aiv = {"value": _num(f.aiv)}
    return {"target": _pair_out(f.target), "ale": ale, "aiv": aiv}


def to_document(s: Scenario) -> dict:
    """The scenario as a JSON-ready dict with keys in schema order."""
    meta = {"name": s.name}
    if s.currency is not None:
        meta["currency"] = s.currency
    protections = []
    for pair, pa in s.protections.items():
        p = {**_pair_out(pair), "effectiveness": _num(pa.effectiveness)}
        if (pa.deployed_instances, pa.total_instances) != (1, 1):
            p["deployed_instances"] = pa.deployed_instances
            p["total_instances"] = pa.total_instances
        if not pa.deployed:
            p["deployed"] = False
        protections.append(p)
    doc: dict = {
        "schema_version": SCHEMA_VERSION,
        "meta": meta,
        "services": [{"id": x.id, "value": _cia_out(x.value)} for x in s.services],
        "threats": [{"id": t.id, "dangerousness": _cia_out(t.dangerousness)} for t in s.threats],
        "applicability": [_pair_out(p) for p in s.applicability],
        "protections": protections,
    }
    scales = {}
    if s.severity is not None:
        scales["severity"] = _scale_out(s.severity)
    if s.likelihood is not None:
        scales["likelihood"] = _scale_out(s.likelihood)
    if scales:
        doc["scales"] = scales
    if s.financials is not None:
        doc["financials"] = _financials_out(s.financials)
    candidates = []
    for c in s.candidates:
        out: dict = {"id": c.id}
        if c.description:
            out["description"] = c.description
        out["mutations"] = [_mutation_out(m) for m in c.mutations]
        out["arc"] = _nonzero(c.arc, ("ci", "cm", "odc", "ic"))
        if c.rm_override is not None:
            out["rm_override"] = _num(c.rm_override)
        candidates.append(out)
    doc["candidates"] = candidates
    return doc


def serialize_scenario(s: Scenario) -> bytes:
    text = json.dumps(to_document(s), indent=2, ensure_ascii=False)
    return (text + "\n").encode("utf-8")


# ------------------------------------------------------------- validation


def validate_scenario(s: Scenario) -> list[Diagnostic]:
    """Model invariants plus scenario-level checks (scales, financials, candidates)."""
    diags = validate_model(s.services, s.threats, s.applicability, s.protections)
    for name, scale in (("severity", s.severity), ("likelihood", s.likelihood)):
        if scale is not None:
            diags += [Diagnostic(Severity.ERROR, f"scales.{name}", p) for p in scale.problems()]

    f = s.financials
    if f is not None:
        if f.target not in set(s.applicability):
            diags.append(Diagnostic(Severity.ERROR, "financials.target", "target pair is not applicable"))
        if isinstance(f.ale, AleUncertaintySpec):
            ratings = [(f"financials.ale.losses.{k}", v, s.severity_scale) for k, v in f.ale.losses.items()]
            ratings.append(("financials.ale.aro", f.ale.aro, s.likelihood_scale))
            for where, rating, scale in ratings:
                if isinstance(rating, str) and rating not in scale.labels():
                    diags.append(Diagnostic(Severity.ERROR, where, f"unknown level {rating!r}"))
        elif isinstance(f.ale, (int, float)) and f.ale < 0:
            diags.append(Diagnostic(Severity.ERROR, "financials.ale.value", "ALE must be >= 0"))

    seen: set[str] = set()
    for c in s.candidates:
        where = f"candidates[{c.id}]"
        if c.id in seen:
            diags.append(Diagnostic(Severity.ERROR, where, "duplicate candidate id"))
        seen.add(c.id)
        try:
            apply_candidate(s.protections, c)
        except InvalidMutation as exc:
            diags.append(Diagnostic(Severity.ERROR, where, str(exc)))
        applicable = set(s.applicability)
        for m in c.mutations:
            if m.pair not in applicable:
                diags.append(
                    Diagnostic(Severity.WARNING, where, f"mutation on {m.threat}/{m.service} where the threat is N/A")
                )
    return diags
