"""Kernel density estimation over samples of persistence diagrams."""
from __future__ import annotations

import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from typing import Callable, Iterable, Sequence

import numpy as np

from . import cech, datagen
from .diagram import Feature, PersistenceDiagram, bottleneck
from .errors import InvalidArgument
from .kernel import (
    MultiKernel,
    build_multi_kernel,
    eval_kernel_symmetric,
    eval_multi_degree,
    multi_cardinality_pmf,
    sample_multi,
)

MC_CHUNK = 1000


def resolve_threads(threads: int | None = None) -> int:
    """Worker count from the argument, else ``PDKDE_THREADS``, else 1."""
    if threads is None:
        threads = int(os.environ.get("PDKDE_THREADS", "1") or 1)
    if threads < 1:
        raise InvalidArgument("threads must be at least 1")
    return threads


def _map_ordered(fn, items: Sequence, threads: int) -> list:
    if threads == 1 or len(items) < 2:
        return [fn(x) for x in items]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(fn, items))


@dataclass(frozen=True)
class BandwidthSchedule:
    """``sigma(n) = scale * n**(-alpha)``; ``alpha`` defaults to ``1/(2M+4)``."""

    scale: float
    M: int
    alpha: float | None = None

    def __post_init__(self) -> None:
        if self.alpha is None:
            object.__setattr__(self, "alpha", 1.0 / (2 * self.M + 4))
        if not (self.scale > 0 and self.M >= 1 and self.alpha > 0):
            raise InvalidArgument("schedule needs scale > 0, M >= 1 and alpha > 0")

    def sigma(self, n: int) -> float:
        return self.scale * n ** (-self.alpha)


def silverman_sigma(n: int, M: int, scale: float = 1.0) -> float:
    if n < 1 or M < 1:
        raise InvalidArgument("silverman_sigma needs n >= 1 and M >= 1")
    return scale * n ** (-1.0 / (2 * M + 4))


def max_cardinality_bound(diagrams: Iterable[PersistenceDiagram]) -> int:
    """Working bound on diagram cardinality: three times the largest sample."""
    return 3 * max((len(D) for D in diagrams), default=0)


@dataclass(frozen=True)
class KdeModel:
    kernels: tuple[MultiKernel, ...]
    sigma_split: float
    sigma_band: float
    degrees: tuple[int, ...]
    M: int = 0

    @property
    def n(self) -> int:
        return len(self.kernels)


def fit(
    diagrams: Sequence[PersistenceDiagram],
    sigma_split: float,
    sigma_band: float | None = None,
    degrees: Sequence[int] = (1,),
    nu="triangular",
    lower_normalization: str = "wedge",
    threads: int | None = None,
) -> KdeModel:
    """One kernel per sample diagram, mixed with uniform weights."""
    if len(diagrams) == 0:
        raise InvalidArgument("cannot fit a KDE to an empty sample")
    sigma_band = sigma_split if sigma_band is None else sigma_band
    degrees = tuple(degrees)

    def one(D):
        return build_multi_kernel(D, sigma_split, sigma_band, degrees, nu, lower_normalization)

    kernels = tuple(_map_ordered(one, list(diagrams), resolve_threads(threads)))
    return KdeModel(kernels, sigma_split, sigma_band, degrees, max_cardinality_bound(diagrams))


def _as_features(inputs) -> list[Feature]:
    if isinstance(inputs, PersistenceDiagram):
        return list(inputs.features)
    return [Feature(float(f[0]), float(f[1]), int(f[2])) for f in inputs]


def evaluate(model: KdeModel, inputs) -> float:
    """Multiset density of the estimate at a diagram (features ``(b, d, k)``)."""
    Z = _as_features(inputs)
    return float(np.mean([eval_multi_degree(K, Z) for K in model.kernels]))


@dataclass(frozen=True)
class Grid:
    """Rectangular lattice of ``res x res`` (birth, death) points, birth-major."""

    bmin: float
    bmax: float
    dmin: float
    dmax: float
    res: int = 200

    def __post_init__(self) -> None:
        if self.res < 2 or not (self.bmax > self.bmin and self.dmax > self.dmin):
            raise InvalidArgument("grid needs res >= 2 and non-empty ranges")

    @classmethod
    def parse(cls, text: str) -> "Grid":
        try:
            bmin, bmax, dmin, dmax, res = text.split(":")
            return cls(float(bmin), float(bmax), float(dmin), float(dmax), int(res))
        except ValueError as exc:
            raise InvalidArgument(f"bad grid spec {text!r}; expected bmin:bmax:dmin:dmax:res") from exc

    @property
    def births(self) -> np.ndarray:
        return np.linspace(self.bmin, self.bmax, self.res)

    @property
    def deaths(self) -> np.ndarray:
        return np.linspace(self.dmin, self.dmax, self.res)

    @property
    def cell_area(self) -> float:
        return (self.bmax - self.bmin) / (self.res - 1) * (self.dmax - self.dmin) / (self.res - 1)

    def points(self) -> np.ndarray:
        B, D = np.meshgrid(self.births, self.deaths, indexing="ij")
        return np.stack([B, D], axis=-1)

    def spec(self) -> str:
        return f"{self.bmin}:{self.bmax}:{self.dmin}:{self.dmax}:{self.res}"


def eval_slice(
    model: KdeModel,
    fixed: Sequence,
    grid: Grid,
    degree: int | None = None,
    threads: int | None = None,
) -> np.ndarray:
    """Estimate at ``{xi} | fixed`` for every grid point ``xi``.

    Returns a ``(res, res)`` array indexed ``[birth, death]``.  Fixed entries
    may be ``(b, d)`` pairs (taken in the slice degree) or ``(b, d, k)``.
    Grid points outside the wedge get density 0.
    """
    if degree is None:
        if len(model.degrees) != 1:
            raise InvalidArgument("slice degree must be given for multi-degree models")
        degree = model.degrees[0]
    if degree == 0:
        raise InvalidArgument("two-dimensional slices are defined for degrees >= 1")
    fixed_feats = [
        Feature(float(f[0]), float(f[1]), int(f[2]) if len(f) > 2 else degree) for f in fixed
    ]
    for f in fixed_feats:
        if not f.d > f.b >= 0:
            raise InvalidArgument(f"fixed feature {tuple(f)} lies outside the wedge")
    pts = grid.points()
    same = np.array([(f.b, f.d) for f in fixed_feats if f.k == degree]).reshape(-1, 2)
    others = [f for f in fixed_feats if f.k != degree]
    Z = np.concatenate([pts[..., None, :], np.broadcast_to(same, pts.shape[:-1] + same.shape)], axis=-2)

    def one(K: MultiKernel) -> np.ndarray:
        if degree not in K.kernels:
            return np.zeros(pts.shape[:-1])
        rest = 1.0
        if others:
            rest = eval_multi_degree(MultiKernel({k: v for k, v in K.kernels.items() if k != degree}), others)
            if rest == 0.0:
                return np.zeros(pts.shape[:-1])
        return rest * eval_kernel_symmetric(K.kernels[degree], Z)

    parts = _map_ordered(one, list(model.kernels), resolve_threads(threads))
    out = np.sum(parts, axis=0) / model.n
    inside = (pts[..., 1] > pts[..., 0]) & (pts[..., 0] >= 0)
    return np.where(inside, out, 0.0)


def slice_mode(grid: Grid, values: np.ndarray) -> tuple[float, float]:
    """Grid argmax; ties go to the lexicographically smallest (b, d)."""
    i, j = np.unravel_index(int(np.argmax(values)), values.shape)
    return float(grid.births[i]), float(grid.deaths[j])


def slice_l1(grid: Grid, a: np.ndarray, b: np.ndarray) -> float:
    """Riemann-sum L1 distance between two slices on the same grid."""
    return float(np.abs(a - b).sum() * grid.cell_area)


def sample(model: KdeModel, rng: np.random.Generator) -> PersistenceDiagram:
    i = int(rng.integers(model.n))
    return sample_multi(model.kernels[i], rng)


def cardinality_pmf(model: KdeModel) -> np.ndarray:
    pmfs = [multi_cardinality_pmf(K) for K in model.kernels]
    out = np.zeros(max(len(p) for p in pmfs))
    for p in pmfs:
        out[: len(p)] += p
    return out / model.n


def set_integral_mc(
    model: KdeModel,
    g: Callable[[PersistenceDiagram], float],
    n_samples: int,
    rng: np.random.Generator,
    threads: int | None = None,
    stratified: bool = False,
) -> tuple[float, float]:
    """Monte Carlo mean and standard error of ``g`` under the estimate.

    Samples are drawn in fixed-size chunks, each from its own child stream
    seeded from ``rng``, so results do not depend on the thread count.
    With ``stratified=True`` the kernels are visited round-robin, each
    receiving ``n_samples // n`` draws, and the standard error uses the
    within-kernel variances.
    """
    if n_samples < 2:
        raise InvalidArgument("n_samples must be at least 2")
    if stratified:
        per_kernel = n_samples // model.n
        if per_kernel < 2:
            raise InvalidArgument("stratified sampling needs at least 2 draws per kernel")
        n_samples = per_kernel * model.n
    n_chunks = math.ceil(n_samples / MC_CHUNK)
    seeds = rng.integers(0, 2**63 - 1, size=n_chunks)
    jobs = [(seeds[c], c * MC_CHUNK, min(MC_CHUNK, n_samples - c * MC_CHUNK)) for c in range(n_chunks)]

    def chunk(job) -> np.ndarray:
        seed, start, size = job
        r = np.random.default_rng(int(seed))
        if not stratified:
            return np.array([float(g(sample(model, r))) for _ in range(size)])
        ks = model.kernels
        return np.array([float(g(sample_multi(ks[s % model.n], r))) for s in range(start, start + size)])

    values = np.concatenate(_map_ordered(chunk, jobs, resolve_threads(threads)))
    mean = float(values.mean())
    if stratified:
        within = values.reshape(-1, model.n).var(axis=0, ddof=1)
        return mean, float(math.sqrt(within.mean() / n_samples))
    return mean, float(values.std(ddof=1) / math.sqrt(n_samples))


def mad_estimate(
    model: KdeModel,
    origin: PersistenceDiagram,
    n_samples: int,
    rng: np.random.Generator,
    threads: int | None = None,
    stratified: bool = False,
) -> tuple[float, float]:
    """Mean absolute bottleneck deviation of the estimate from ``origin``."""
    return set_integral_mc(model, lambda Z: bottleneck(origin, Z), n_samples, rng, threads, stratified)


# ---------------------------------------------------------------------------
# Convergence experiments


@dataclass(frozen=True)
class GeneratorSpec:
    kind: str = "circle"
    n_points: int = 10
    noise_std: float = 0.02

    def __post_init__(self) -> None:
        if self.kind not in datagen.GENERATORS:
            raise InvalidArgument(f"unknown generator {self.kind!r}")

    def cloud(self, seed: int) -> datagen.PointCloud:
        return datagen.GENERATORS[self.kind](self.n_points, self.noise_std, seed)


def sample_diagrams(
    generator: GeneratorSpec, n: int, seed: int, degree: int = 1, threads: int | None = None
) -> list[PersistenceDiagram]:
    """Diagrams of ``n`` generated clouds; prefixes agree across ``n``."""
    seeds = np.random.SeedSequence(seed).generate_state(n, dtype=np.uint64)

    def one(s):
        return cech.cloud_diagram(generator.cloud(int(s)), max_degree=degree).of_degree(degree)

    return _map_ordered(one, list(seeds), resolve_threads(threads))


@dataclass
class SweepResult:
    report: dict
    grids: list[list[np.ndarray]] = field(default_factory=list)


def convergence_sweep(
    generator: GeneratorSpec,
    schedule: Sequence[tuple[int, float]],
    slices: Sequence[Sequence],
    seed: int,
    grid: Grid | None = None,
    degree: int = 1,
    mad_origin: PersistenceDiagram | None = None,
    mad_samples: int = 0,
    mad_stratified: bool = True,
    diagrams: Sequence[PersistenceDiagram] | None = None,
    threads: int | None = None,
) -> SweepResult:
    """Fit the estimate along a ``(n, sigma)`` schedule and track its slices.

    The ``i``-th step uses the first ``n_i`` diagrams of one seeded stream.
    For every step and slice the report records the grid mode and the L1
    distance to the same slice at the previous step; with ``mad_samples``
    it also records the MAD estimate from ``mad_origin`` (empty by default).
    """
    if not schedule:
        raise InvalidArgument("schedule must be non-empty")
    grid = grid or Grid(0.0, 1.2, 0.0, 1.2, 200)
    n_max = max(n for n, _ in schedule)
    if diagrams is None:
        diagrams = sample_diagrams(generator, n_max, seed, degree, threads)
    elif len(diagrams) < n_max:
        raise InvalidArgument("not enough diagrams for the schedule")
    origin = mad_origin if mad_origin is not None else PersistenceDiagram()
    mad_rng = np.random.default_rng(np.random.SeedSequence(seed).spawn(1)[0])

    steps, grids, previous = [], [], None
    for n, sigma in schedule:
        model = fit(diagrams[:n], sigma, sigma, degrees=(degree,), threads=threads)
        current = [eval_slice(model, fx, grid, degree, threads) for fx in slices]
        entry = {"n": int(n), "sigma": float(sigma), "slices": []}
        for idx, (fx, vals) in enumerate(zip(slices, current)):
            entry["slices"].append(
                {
                    "fixed": [list(map(float, f)) for f in fx],
                    "mode": list(slice_mode(grid, vals)),
                    "max_density": float(vals.max()),
                    "l1_to_previous": None if previous is None else slice_l1(grid, vals, previous[idx]),
                }
            )
        if mad_samples:
            est, se = mad_estimate(model, origin, mad_samples, mad_rng, threads, mad_stratified)
            entry["mad"] = {"estimate": est, "std_error": se}
        steps.append(entry)
        grids.append(current)
        previous = current

    report = {
        "generator": {"kind": generator.kind, "n_points": generator.n_points, "noise_std": generator.noise_std},
        "degree": degree,
        "seed": seed,
        "grid": grid.spec(),
        "convention": "multiset",
        "mad_origin": [list(f) for f in origin.features] if mad_samples else None,
        "steps": steps,
    }
    return SweepResult(report, grids)
