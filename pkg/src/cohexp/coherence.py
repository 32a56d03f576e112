"""Coherence checking for fuzzy functions under a projection.

A fuzzy function ``f`` is *coherent at a point* ``x`` (with respect to
a projection ``d``) when projecting its output commutes with first
projecting the input::

    d(f(x)) == d(f(d(x)))

The coherent set of ``f`` is the subset of its domain where this holds.
Points already in the image of ``d`` (fixed points) are always
coherent because ``d`` is idempotent.  Checks here are sample-based:
a report can certify incoherence by exhibiting witnesses, while a
clean sample only certifies coherence *on that sample*.

Projected values are compared exactly; both sides of the comparison
are produced by the same projection code path, so equal projected
values are bit-identical floats.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .core import FuzzyExpr, Point, Projection
from .errors import CapacityError, ValidationError

__all__ = [
    "DEFAULT_WITNESS_CAP",
    "SamplingSpec",
    "Witness",
    "ComponentReport",
    "CoherenceReport",
    "default_sampling",
    "coherence_masks",
    "is_coherent_at",
    "check_coherence",
    "incoherent_components",
]

# At most this many witnesses are materialised per output component;
# coherent fractions always count every sampled point.
DEFAULT_WITNESS_CAP = 100

# Grid sampling refuses to materialise more points than this.
_MAX_SAMPLE_POINTS = 4_194_304


@dataclass(frozen=True)
class SamplingSpec:
    """Where to evaluate a function when checking coherence.

    ``grid`` mode places ``points_per_axis`` equally spaced points on
    every axis (both endpoints included) and takes the full product.
    ``random`` mode draws ``count`` points uniformly from the unit
    hypercube with a seeded generator; results are reproducible
    bit-for-bit for a given seed.
    """

    mode: str
    points_per_axis: int | None = None
    count: int | None = None
    seed: int | None = None

    def __post_init__(self) -> None:
        if self.mode == "grid":
            if self.points_per_axis is None or int(self.points_per_axis) < 2:
                raise ValidationError("grid sampling needs points_per_axis >= 2")
            if self.count is not None or self.seed is not None:
                raise ValidationError("grid sampling takes only points_per_axis")
        elif self.mode == "random":
            if self.count is None or int(self.count) < 1:
                raise ValidationError("random sampling needs a positive count")
            if self.points_per_axis is not None:
                raise ValidationError("random sampling takes no points_per_axis")
            if self.seed is None:
                object.__setattr__(self, "seed", 0)
        else:
            raise ValidationError(f"unknown sampling mode {self.mode!r}")

    @staticmethod
    def grid(points_per_axis: int) -> "SamplingSpec":
        return SamplingSpec("grid", points_per_axis=int(points_per_axis))

    @staticmethod
    def random(count: int, seed: int = 0) -> "SamplingSpec":
        return SamplingSpec("random", count=int(count), seed=int(seed))

    def sample(self, arity: int) -> np.ndarray:
        """Materialise the sample as a ``(N, arity)`` float64 array.

        Grid points are emitted in lexicographic order with axis 0
        slowest; random points in generator order.
        """
        if arity < 0:
            raise ValidationError("arity must be >= 0")
        if arity == 0:
            return np.zeros((1, 0), dtype=np.float64)
        if self.mode == "grid":
            k = int(self.points_per_axis)  # type: ignore[arg-type]
            total = k**arity
            if total > _MAX_SAMPLE_POINTS:
                raise CapacityError(
                    f"grid of {k}^{arity} points exceeds the cap of {_MAX_SAMPLE_POINTS}"
                )
            axis = np.linspace(0.0, 1.0, k)
            mesh = np.meshgrid(*([axis] * arity), indexing="ij")
            return np.stack(mesh, axis=-1).reshape(-1, arity)
        rng = np.random.default_rng(self.seed)
        return rng.random((int(self.count), arity))  # type: ignore[arg-type]

    def to_dict(self) -> dict:
        doc: dict = {"mode": self.mode}
        if self.points_per_axis is not None:
            doc["points_per_axis"] = self.points_per_axis
        if self.count is not None:
            doc["count"] = self.count
        if self.seed is not None:
            doc["seed"] = self.seed
        return doc

    @staticmethod
    def from_dict(doc: dict) -> "SamplingSpec":
        return SamplingSpec(
            doc.get("mode", ""),
            points_per_axis=doc.get("points_per_axis"),
            count=doc.get("count"),
            seed=doc.get("seed"),
        )


def default_sampling(arity: int, seed: int = 0) -> SamplingSpec:
    """Default check density: a 101-point grid per axis up to arity 2,
    ``10**5`` seeded random points above."""
    if arity <= 2:
        return SamplingSpec.grid(101)
    return SamplingSpec.random(100_000, seed=seed)


@dataclass(frozen=True)
class Witness:
    """One sampled point at which coherence fails for a component."""

    point: Point
    output: Point
    projected_direct: float
    projected_via_projected_inputs: float


@dataclass(frozen=True)
class ComponentReport:
    component: int
    coherent_fraction: float
    witnesses: tuple[Witness, ...]


@dataclass(frozen=True)
class CoherenceReport:
    """Result of a sampled coherence check.

    ``components[i].coherent_fraction`` counts every sampled point;
    witnesses are capped but their absence in a component means the
    component was coherent on the whole sample.
    """

    projection: Projection
    sampling: SamplingSpec
    in_arity: int
    out_arity: int
    n_points: int
    components: tuple[ComponentReport, ...]
    # Fraction of sampled points coherent in every component at once.
    coherent_fraction: float

    @property
    def verdict(self) -> str:
        if all(c.coherent_fraction == 1.0 for c in self.components):
            return "coherent_on_sample"
        return "incoherent_with_witnesses"

    def to_dict(self) -> dict:
        return {
            "projection": self.projection.to_dict(),
            "sampling": self.sampling.to_dict(),
            "in_arity": self.in_arity,
            "out_arity": self.out_arity,
            "n_points": self.n_points,
            "verdict": self.verdict,
            "coherent_fraction": self.coherent_fraction,
            "components": [
                {
                    "component": c.component,
                    "coherent_fraction": c.coherent_fraction,
                    "witnesses": [
                        {
                            "point": list(w.point),
                            "output": list(w.output),
                            "projected_direct": w.projected_direct,
                            "projected_via_projected_inputs": w.projected_via_projected_inputs,
                        }
                        for w in c.witnesses
                    ],
                }
                for c in self.components
            ],
        }


def coherence_masks(f: FuzzyExpr, projection: Projection, xs: np.ndarray) -> np.ndarray:
    """Boolean array of shape ``(N, out_arity)``: True where component
    ``i`` of ``f`` is coherent at the sampled point."""
    fx = f.eval_batch(xs)
    fdx = f.eval_batch(projection.apply(xs))
    return projection.apply(fx) == projection.apply(fdx)


def is_coherent_at(
    f: FuzzyExpr,
    projection: Projection,
    x: Sequence[float],
    component: int | None = None,
) -> bool:
    """Check coherence of ``f`` at a single point.

    With ``component=None`` every output component must be coherent.
    """
    arr = np.asarray(x, dtype=np.float64).reshape(1, -1)
    if arr.shape[1] != f.in_arity:
        raise ValidationError(
            f"point arity {arr.shape[1]} does not match function arity {f.in_arity}"
        )
    ok = coherence_masks(f, projection, arr)[0]
    if component is None:
        return bool(ok.all())
    if component < 0 or component >= f.out_arity:
        raise ValidationError(f"component {component} out of range for arity {f.out_arity}")
    return bool(ok[component])


def check_coherence(
    f: FuzzyExpr,
    projection: Projection,
    sampling: SamplingSpec | None = None,
    witness_cap: int = DEFAULT_WITNESS_CAP,
) -> CoherenceReport:
    """Sample the domain of ``f`` and report per-component coherence.

    The coherent fraction counts every sampled point.  Witness lists
    are capped at ``witness_cap`` per component: grid samples keep the
    first offenders in sample order, random samples keep a seeded
    uniform subset (re-sorted by sample index).
    """
    if witness_cap < 0:
        raise ValidationError("witness_cap must be >= 0")
    if sampling is None:
        sampling = default_sampling(f.in_arity)
    xs = sampling.sample(f.in_arity)
    fx = f.eval_batch(xs)
    fdx = f.eval_batch(projection.apply(xs))
    proj_direct = projection.apply(fx)
    proj_via_levels = projection.apply(fdx)
    ok = proj_direct == proj_via_levels

    components = []
    for i in range(f.out_arity):
        bad = np.flatnonzero(~ok[:, i])
        fraction = 1.0 - bad.size / xs.shape[0]
        if bad.size > witness_cap:
            if sampling.mode == "random":
                rng = np.random.default_rng([int(sampling.seed or 0), 0x5EED, i])
                bad = np.sort(rng.choice(bad, size=witness_cap, replace=False))
            else:
                bad = bad[:witness_cap]
        witnesses = tuple(
            Witness(
                point=tuple(float(v) for v in xs[j]),
                output=tuple(float(v) for v in fx[j]),
                projected_direct=float(proj_direct[j, i]),
                projected_via_projected_inputs=float(proj_via_levels[j, i]),
            )
            for j in bad
        )
        components.append(ComponentReport(i, float(fraction), witnesses))

    return CoherenceReport(
        projection=projection,
        sampling=sampling,
        in_arity=f.in_arity,
        out_arity=f.out_arity,
        n_points=int(xs.shape[0]),
        components=tuple(components),
        coherent_fraction=float(ok.all(axis=1).mean()),
    )


def incoherent_components(report: CoherenceReport) -> list[int]:
    """Indices of output components with at least one incoherent sample,
    in ascending order."""
    return [c.component for c in report.components if c.coherent_fraction < 1.0]
