"""Monte Carlo estimation of ALE from qualitative severity/likelihood ratings.

Each qualitative level maps to a triangular distribution. Every draw comes
from a counter-addressed SplitMix64 stream: the uniform used for component
``c`` of iteration ``i`` is output number ``i * STREAMS_PER_ITERATION + c``
of a SplitMix64 generator seeded from the scenario seed. Draws therefore
depend only on (seed, iteration, component), never on evaluation order, so
chunked or threaded evaluation reproduces the serial result bit for bit.
"""

from __future__ import annotations

import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Mapping, Optional, Sequence, Union

import numpy as np

from .financial import LOSS_FIELDS

__all__ = [
    "RNG_NAME",
    "DEFAULT_ITERATIONS",
    "InvalidTriangle",
    "UnknownLevel",
    "Level",
    "Scale",
    "SeverityScale",
    "LikelihoodScale",
    "scale_from_modes",
    "DEFAULT_SEVERITY",
    "DEFAULT_LIKELIHOOD",
    "AleUncertaintySpec",
    "AleDistributionSummary",
    "triangular_sample",
    "uniforms",
    "resolve_level",
    "simulate_ale",
    "nearest_rank",
]

RNG_NAME = "splitmix64-counter"
DEFAULT_ITERATIONS = 250

# component index layout: the loss fields in LOSS_FIELDS order, then ARO
ARO_COMPONENT = len(LOSS_FIELDS)
STREAMS_PER_ITERATION = 16

_GAMMA = np.uint64(0x9E3779B97F4A7C15)
_M1 = np.uint64(0xBF58476D1CE4E5B9)
_M2 = np.uint64(0x94D049BB133111EB)
_MASK64 = (1 << 64) - 1


class InvalidTriangle(ValueError):
    pass


class UnknownLevel(KeyError):
    def __str__(self) -> str:
        return str(self.args[0]) if self.args else ""


@dataclass(frozen=True)
class Level:
    label: str
    min: float
    mode: float
    max: float

    @property
    def triangle(self) -> tuple[float, float, float]:
        return (self.min, self.mode, self.max)


@dataclass(frozen=True)
class Scale:
    levels: tuple[Level, ...]

    def labels(self) -> list[str]:
        return [lv.label for lv in self.levels]

    def problems(self) -> list[str]:
        out = []
        seen = set()
        for lv in self.levels:
            if lv.label in seen:
                out.append(f"duplicate level {lv.label!r}")
            seen.add(lv.label)
            if not lv.min <= lv.mode <= lv.max:
                out.append(f"level {lv.label!r}: need min <= mode <= max, got {lv.triangle}")
        return out


class SeverityScale(Scale):
    def problems(self) -> list[str]:
        out = super().problems()
        modes = [lv.mode for lv in self.levels]
        if any(b <= a for a, b in zip(modes, modes[1:])):
            out.append("severity levels must be strictly increasing by mode")
        return out


class LikelihoodScale(Scale):
    pass


def scale_from_modes(cls: type[Scale], labels: Sequence[str], modes: Sequence[float]) -> Scale:
    """Build a scale whose level bounds are the neighbouring levels' modes."""
    levels = []
    for k, (label, mode) in enumerate(zip(labels, modes)):
        lo = modes[k - 1] if k > 0 else mode
        hi = modes[k + 1] if k + 1 < len(modes) else mode
        levels.append(Level(label, lo, mode, hi))
    return cls(tuple(levels))


DEFAULT_SEVERITY = scale_from_modes(
    SeverityScale,
    ["negligible", "minor", "moderate", "major", "serious", "catastrophic"],
    [100, 1_000, 10_000, 100_000, 1_000_000, 10_000_000],
)
DEFAULT_LIKELIHOOD = scale_from_modes(
    LikelihoodScale,
    ["rare", "very-low", "low", "medium", "high", "very-high"],
    [0.1, 0.5, 1, 4, 12, 52],
)


Rating = Union[float, str]


@dataclass(frozen=True)
class AleUncertaintySpec:
    """Loss components and ARO, each a fixed number or a scale label.

    Loss components absent from ``losses`` are zero.
    """

    losses: Mapping[str, Rating] = field(default_factory=dict)
    aro: Rating = 1.0
    iterations: int = DEFAULT_ITERATIONS
    seed: int = 0


@dataclass(frozen=True)
class AleDistributionSummary:
    mean: float
    p05: float
    p50: float
    p95: float
    iterations: int
    seed: int
    rng: str = RNG_NAME
    clamped_iterations: int = 0

    def to_dict(self) -> dict:
        return {
            "mean": self.mean,
            "p05": self.p05,
            "p50": self.p50,
            "p95": self.p95,
            "iterations": self.iterations,
            "seed": self.seed,
            "rng": self.rng,
            "clamped_iterations": self.clamped_iterations,
        }


def _check_triangle(lo: float, mode: float, hi: float) -> None:
    if not lo <= mode <= hi:
        raise InvalidTriangle(f"need min <= mode <= max, got ({lo}, {mode}, {hi})")


def triangular_sample(lo: float, mode: float, hi: float, u):
    """Inverse-CDF transform of uniform(s) ``u`` in [0, 1) to a triangle.

    Accepts a scalar or a numpy array for ``u`` and returns the same shape.
    """
    _check_triangle(lo, mode, hi)
    scalar = np.ndim(u) == 0
    u = np.asarray(u, dtype=float)
    if hi == lo:
        out = np.full(u.shape, float(lo))
    else:
        width = hi - lo
        split = (mode - lo) / width
        left = lo + np.sqrt(u * width * (mode - lo))
        right = hi - np.sqrt((1 - u) * width * (hi - mode))
        out = np.where(u < split, left, right)
    return float(out) if scalar else out


def _splitmix_mix(z: np.ndarray) -> np.ndarray:
    z = (z ^ (z >> np.uint64(30))) * _M1
    z = (z ^ (z >> np.uint64(27))) * _M2
    return z ^ (z >> np.uint64(31))


def uniforms(seed: int, iterations: np.ndarray, component: int) -> np.ndarray:
    """Uniforms in [0, 1) for one component at the given iteration indices."""
    if not 0 <= component < STREAMS_PER_ITERATION:
        raise ValueError(f"component index {component} out of range")
    base = _splitmix_mix(np.array([seed & _MASK64], dtype=np.uint64))[0]
    idx = np.asarray(iterations, dtype=np.uint64) * np.uint64(STREAMS_PER_ITERATION) + np.uint64(component)
    with np.errstate(over="ignore"):
        state = base + (idx + np.uint64(1)) * _GAMMA
        bits = _splitmix_mix(state)
    return (bits >> np.uint64(11)).astype(np.float64) * (1.0 / (1 << 53))


def resolve_level(label: str, scale: Scale) -> tuple[float, float, float]:
    for lv in scale.levels:
        if lv.label == label:
            return lv.triangle
    raise UnknownLevel(f"unknown level {label!r}; expected one of {scale.labels()}")


def _resolve(rating: Rating, scale: Scale) -> tuple[float, float, float]:
    if isinstance(rating, str):
        tri = resolve_level(rating, scale)
    else:
        tri = (float(rating),) * 3
    _check_triangle(*tri)
    return tri


def nearest_rank(sorted_values: np.ndarray, percent: int) -> float:
    """Nearest-rank percentile; integer arithmetic avoids float rank drift."""
    n = len(sorted_values)
    rank = max(1, -(-percent * n // 100))
    return float(sorted_values[rank - 1])


def _draw_chunk(
    seed: int,
    start: int,
    stop: int,
    loss_triangles: list[tuple[int, tuple[float, float, float]]],
    insurance: Optional[tuple[int, tuple[float, float, float]]],
    aro_triangle: tuple[float, float, float],
) -> tuple[np.ndarray, int]:
    its = np.arange(start, stop, dtype=np.uint64)

    def draw(component: int, tri: tuple[float, float, float]) -> np.ndarray:
        if tri[0] == tri[2]:
            return np.full(len(its), float(tri[0]))
        return triangular_sample(*tri, uniforms(seed, its, component))

    gross = np.zeros(len(its))
    for component, tri in loss_triangles:
        gross = gross + draw(component, tri)
    net = gross - draw(*insurance) if insurance else gross
    return np.maximum(net, 0.0) * draw(ARO_COMPONENT, aro_triangle), int(np.count_nonzero(net < 0))


def simulate_ale(
    spec: AleUncertaintySpec,
    severity: Scale = DEFAULT_SEVERITY,
    likelihood: Scale = DEFAULT_LIKELIHOOD,
    workers: int = 1,
    chunk_size: int = 4096,
) -> AleDistributionSummary:
    """Sample ALE ``spec.iterations`` times and summarise the distribution.

    ``workers`` > 1 evaluates iteration chunks on a thread pool; the summary
    is identical for any ``workers`` and ``chunk_size``.
    """
    if spec.iterations < 1:
        raise ValueError(f"iterations must be >= 1, got {spec.iterations}")
    unknown = set(spec.losses) - set(LOSS_FIELDS)
    if unknown:
        raise ValueError(f"unknown loss components: {sorted(unknown)}")

    loss_triangles = []
    insurance = None
    for component, name in enumerate(LOSS_FIELDS):
        if name not in spec.losses:
            continue
        tri = _resolve(spec.losses[name], severity)
        if name == "ci":
            insurance = (component, tri)
        else:
            loss_triangles.append((component, tri))
    aro_triangle = _resolve(spec.aro, likelihood)

    bounds = [(s, min(s + chunk_size, spec.iterations)) for s in range(0, spec.iterations, chunk_size)]
    args = (loss_triangles, insurance, aro_triangle)
    if workers > 1 and len(bounds) > 1:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            parts = list(pool.map(lambda b: _draw_chunk(spec.seed, b[0], b[1], *args), bounds))
    else:
        parts = [_draw_chunk(spec.seed, s, e, *args) for s, e in bounds]

    samples = np.concatenate([p[0] for p in parts])
    clamped = sum(p[1] for p in parts)
    ordered = np.sort(samples)
    # fsum is order-independent; clamping keeps a constant sample's mean exact
    mean = min(max(math.fsum(samples) / len(samples), float(ordered[0])), float(ordered[-1]))
    return AleDistributionSummary(
        mean=mean,
        p05=nearest_rank(ordered, 5),
        p50=nearest_rank(ordered, 50),
        p95=nearest_rank(ordered, 95),
        iterations=spec.iterations,
        seed=spec.seed,
        clamped_iterations=clamped,
    )
