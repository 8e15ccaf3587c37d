"""Kernel density for random persistence diagrams centred at one diagram.

The centre diagram of a fixed degree is split by persistence.  Each upper
feature becomes an independent singleton: present with probability ``q``
(Gaussian mass above the diagonal) and, when present, placed by the
Gaussian restricted to the wedge ``W = {d > b >= 0}``.  The lower features
are modelled together: a cardinality drawn from ``nu`` followed by i.i.d.
draws from a Gaussian mixture centred at the lower features' diagonal
projections.

Two value conventions appear below.  *Ordered* values are the vector
density of an input tuple ``(xi_1, ..., xi_N)``, where the first ``j``
inputs go to upper singletons and the rest to the lower density.
*Multiset* values are the density at the set ``{xi_1, ..., xi_N}``, equal to
the sum of ordered values over all permutations of the inputs (``N!`` times
the symmetric vector density).  The multiset value is the one exposed
externally.

Degree-0 kernels use a one-dimensional model in the death coordinate,
since degree-0 Cech features are all born at 0.
"""
from __future__ import annotations

import itertools
import math
from dataclasses import dataclass, field
from typing import Callable, Mapping, Sequence

import numpy as np
from scipy import integrate, special

from .diagram import Feature, PersistenceDiagram, split
from .errors import InvalidArgument, NumericError

SQRT2 = math.sqrt(2.0)
SQRT2PI = math.sqrt(2.0 * math.pi)
REJECTION_CAP = 10_000
WEDGE_TOL = 1e-10


# ---------------------------------------------------------------------------
# Cardinality pmfs for the lower part


def nu_default(n_lower: int, n: int) -> float:
    """Triangular pmf on ``0..2*n_lower`` with mean ``n_lower``."""
    if n_lower < 0:
        raise InvalidArgument("n_lower must be non-negative")
    return max((n_lower + 1 - abs(n_lower - n)) / (n_lower + 1) ** 2, 0.0)


def nu_triangular(n_lower: int) -> np.ndarray:
    return np.array([nu_default(n_lower, n) for n in range(2 * n_lower + 1)])


def nu_fixed(n_lower: int) -> np.ndarray:
    """Point mass at ``n_lower``: the lower cardinality is not resampled."""
    pmf = np.zeros(n_lower + 1)
    pmf[n_lower] = 1.0
    return pmf


NU_FAMILIES: dict[str, Callable[[int], np.ndarray]] = {
    "triangular": nu_triangular,
    "fixed": nu_fixed,
}


def _resolve_nu(nu: str | Callable[[int], np.ndarray], n_lower: int) -> np.ndarray:
    if n_lower == 0:
        return np.array([1.0])
    if isinstance(nu, str) and nu not in NU_FAMILIES:
        raise InvalidArgument(f"unknown nu family {nu!r}; choose from {sorted(NU_FAMILIES)}")
    fn = NU_FAMILIES[nu] if isinstance(nu, str) else nu
    pmf = np.asarray(fn(n_lower), dtype=np.float64)
    if pmf.ndim != 1 or np.any(pmf < 0) or not math.isclose(pmf.sum(), 1.0, abs_tol=1e-12):
        raise InvalidArgument("nu must be a finite pmf over 0, 1, 2, ...")
    return pmf


# ---------------------------------------------------------------------------
# Scalar building blocks


def q_nonempty(center: Sequence[float], sigma: float) -> float:
    """Gaussian mass above the diagonal for a feature centred at ``(b, d)``."""
    if not sigma > 0:
        raise InvalidArgument("sigma must be positive")
    b, d = float(center[0]), float(center[1])
    return float(special.ndtr((d - b) / (SQRT2 * sigma)))


def wedge_mass(center: Sequence[float], sigma: float) -> float:
    """Gaussian mass of the wedge ``d > b >= 0`` for a feature centred at ``(b, d)``.

    Integrates ``phi(x; b, sigma) * P[death > x]`` over ``x >= 0``.
    """
    if not sigma > 0:
        raise InvalidArgument("sigma must be positive")
    b, d = float(center[0]), float(center[1])
    lo, hi = max(0.0, b - 12.0 * sigma), b + 12.0 * sigma
    if hi <= 0.0:
        return 0.0
    inv = 1.0 / (sigma * SQRT2PI)

    def integrand(x: float) -> float:
        z = (x - b) / sigma
        return inv * math.exp(-0.5 * z * z) * special.ndtr((d - x) / sigma)

    breaks = [p for p in (b, d) if lo < p < hi]
    val, err, *rest = integrate.quad(
        integrand, lo, hi, points=breaks or None, epsabs=1e-13, epsrel=1e-12, limit=200, full_output=1
    )
    if err > WEDGE_TOL or len(rest) > 1:
        raise NumericError(f"wedge-mass quadrature did not converge (err={err:.2e})")
    return float(val)


def degree_zero_q(center_death: float, sigma: float) -> float:
    """Half-line mass ``P[death > 0]`` of a degree-0 singleton."""
    return float(special.ndtr(center_death / sigma))


def degree_zero_pdf(center_death: float, sigma: float, d) -> np.ndarray | float:
    """Gaussian at ``center_death`` restricted to ``d > 0`` and renormalised."""
    if not center_death > 0:
        raise InvalidArgument("center_death must be positive")
    d = np.asarray(d, dtype=np.float64)
    z = (d - center_death) / sigma
    out = np.where(d > 0, np.exp(-0.5 * z * z) / (sigma * SQRT2PI * degree_zero_q(center_death, sigma)), 0.0)
    return out if out.ndim else float(out)


def _in_wedge(Z: np.ndarray) -> np.ndarray:
    return (Z[..., 1] > Z[..., 0]) & (Z[..., 0] >= 0.0)


# ---------------------------------------------------------------------------
# Model components


@dataclass(frozen=True)
class UpperSingleton:
    """One long-persistence centre feature and its restricted Gaussian."""

    b: float
    d: float
    sigma: float
    q: float
    wedge_mass: float
    degree_zero: bool = False

    def pdf(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.float64)
        s2 = self.sigma * self.sigma
        if self.degree_zero:
            z = (Z[..., 1] - self.d) / self.sigma
            val = np.exp(-0.5 * z * z) / (self.sigma * SQRT2PI * self.wedge_mass)
            return np.where((Z[..., 0] == 0.0) & (Z[..., 1] > 0.0), val, 0.0)
        r2 = (Z[..., 0] - self.b) ** 2 + (Z[..., 1] - self.d) ** 2
        val = np.exp(-r2 / (2.0 * s2)) / (2.0 * math.pi * s2 * self.wedge_mass)
        return np.where(_in_wedge(Z), val, 0.0)


@dataclass(frozen=True)
class LowerModel:
    """Short-persistence features modelled as a cluster at the diagonal.

    ``coefficients[i]`` multiplies ``exp(-|xi - c_i|^2 / (2 sigma^2))``.
    With ``normalization="diagonal"`` every coefficient is
    ``1 / (n_lower * pi * sigma^2)``, which normalises each component over
    the half-plane above the diagonal.  ``"wedge"`` renormalises each
    component over ``W`` instead, so the density integrates to exactly 1 on
    ``W`` even for projections near the origin.
    """

    projected: np.ndarray
    sigma: float
    nu: np.ndarray
    coefficients: np.ndarray
    degree_zero: bool = False

    @property
    def n_lower(self) -> int:
        return len(self.projected)

    def pdf(self, Z) -> np.ndarray:
        Z = np.asarray(Z, dtype=np.float64)
        shape = Z.shape[:-1]
        if self.n_lower == 0:
            return np.zeros(shape)
        s2 = self.sigma * self.sigma
        if self.degree_zero:
            d = Z[..., 1]
            val = 2.0 / (self.sigma * SQRT2PI) * np.exp(-d * d / (2.0 * s2))
            return np.where((Z[..., 0] == 0.0) & (d > 0.0), val, 0.0)
        out = np.zeros(shape)
        for (c, _), coef in zip(self.projected, self.coefficients):
            out += coef * np.exp(-((Z[..., 0] - c) ** 2 + (Z[..., 1] - c) ** 2) / (2.0 * s2))
        return np.where(_in_wedge(Z), out, 0.0)

    def nu_at(self, n: int) -> float:
        return float(self.nu[n]) if 0 <= n < len(self.nu) else 0.0


@dataclass(frozen=True)
class SingletonSystem:
    """Independent singleton diagrams: presence probabilities and position pdfs."""

    q: Sequence[float]
    pdfs: Sequence[Callable[[object], float]]

    def __post_init__(self) -> None:
        if len(self.q) != len(self.pdfs):
            raise InvalidArgument("need one pdf per presence probability")

    def __len__(self) -> int:
        return len(self.q)


def _presence_weight(q: np.ndarray, chosen: Sequence[int]) -> float:
    # product form of Q(gamma); avoids the 0/0 of the ratio form when q == 1
    mask = np.zeros(len(q), dtype=bool)
    mask[list(chosen)] = True
    return float(np.prod(q[mask]) * np.prod(1.0 - q[~mask]))


def combine_singletons(system: SingletonSystem, inputs: Sequence) -> float:
    """Ordered global pdf of the union of independent singletons.

    Sums over increasing injections of the inputs into the singletons.
    """
    q = np.asarray(system.q, dtype=np.float64)
    N, M = len(inputs), len(system)
    if N > M:
        return 0.0
    total = 0.0
    for gamma in itertools.combinations(range(M), N):
        term = _presence_weight(q, gamma)
        for x, j in zip(inputs, gamma):
            term *= float(system.pdfs[j](x))
        total += term
    return total


@dataclass(frozen=True, eq=False)
class Kernel:
    """Single-degree kernel centred at one diagram."""

    upper: tuple[UpperSingleton, ...]
    lower: LowerModel
    degree: int
    sigma_split: float
    sigma_band: float
    nu_name: str = "triangular"
    _q: np.ndarray = field(init=False, repr=False)
    _combos: list = field(init=False, repr=False)
    _perms: list = field(init=False, repr=False)

    def __post_init__(self) -> None:
        q = np.array([s.q for s in self.upper], dtype=np.float64)
        object.__setattr__(self, "_q", q)
        n_u = len(self.upper)
        combos = [
            [(g, _presence_weight(q, g)) for g in itertools.combinations(range(n_u), j)]
            for j in range(n_u + 1)
        ]
        weight = {g: w for level in combos for g, w in level}
        perms = [
            [(p, weight[tuple(sorted(p))]) for p in itertools.permutations(range(n_u), j)]
            for j in range(n_u + 1)
        ]
        object.__setattr__(self, "_combos", combos)
        object.__setattr__(self, "_perms", perms)

    @property
    def n_upper(self) -> int:
        return len(self.upper)

    @property
    def n_lower(self) -> int:
        return self.lower.n_lower

    @property
    def q(self) -> np.ndarray:
        return self._q

    @property
    def max_cardinality(self) -> int:
        return self.n_upper + len(self.lower.nu) - 1

    def upper_system(self) -> SingletonSystem:
        return SingletonSystem(list(self._q), [s.pdf for s in self.upper])

    def _factors(self, Z) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        Z = np.asarray(Z, dtype=np.float64)
        if Z.ndim == 1 and Z.size == 0:
            Z = Z.reshape(0, 2)
        if Z.ndim < 2 or Z.shape[-1] != 2:
            raise InvalidArgument("inputs must have shape (..., N, 2)")
        if self.upper:
            P = np.stack([s.pdf(Z) for s in self.upper], axis=-1)
        else:
            P = np.zeros(Z.shape[:-1] + (0,))
        return Z, P, self.lower.pdf(Z)


def build_kernel(
    center: PersistenceDiagram,
    degree: int,
    sigma_split: float,
    sigma_band: float | None = None,
    nu: str | Callable[[int], np.ndarray] = "triangular",
    lower_normalization: str = "wedge",
) -> Kernel:
    """Kernel for the degree-``degree`` part of ``center``.

    ``sigma_band`` defaults to ``sigma_split``.
    """
    sigma_band = sigma_split if sigma_band is None else sigma_band
    if not (sigma_split > 0 and sigma_band > 0):
        raise InvalidArgument("bandwidths must be positive")
    if lower_normalization not in ("wedge", "diagonal"):
        raise InvalidArgument("lower_normalization must be 'wedge' or 'diagonal'")
    up, low = split(center, sigma_split, degree)
    zero = degree == 0
    if zero and any(f.b != 0.0 for f in up.features + low.features):
        raise InvalidArgument("degree-0 features must be born at 0")

    singletons = []
    for f in up:
        if zero:
            q = degree_zero_q(f.d, sigma_band)
            singletons.append(UpperSingleton(0.0, f.d, sigma_band, q, q, True))
        else:
            singletons.append(
                UpperSingleton(f.b, f.d, sigma_band, q_nonempty((f.b, f.d), sigma_band),
                               wedge_mass((f.b, f.d), sigma_band))
            )

    n_lower = len(low)
    if zero:
        proj = np.zeros((n_lower, 2))
    else:
        mid = (low.points()[:, 0] + low.points()[:, 1]) / 2.0
        proj = np.column_stack([mid, mid])
    if n_lower == 0:
        coefs = np.zeros(0)
    elif lower_normalization == "diagonal" or zero:
        coefs = np.full(n_lower, 1.0 / (n_lower * math.pi * sigma_band**2))
    else:
        coefs = np.array(
            [1.0 / (n_lower * 2.0 * math.pi * sigma_band**2 * wedge_mass((c, c), sigma_band)) for c, _ in proj]
        )
    lower = LowerModel(proj, sigma_band, _resolve_nu(nu, n_lower), coefs, zero)
    name = nu if isinstance(nu, str) else getattr(nu, "__name__", "custom")
    return Kernel(tuple(singletons), lower, degree, sigma_split, sigma_band, name)


def upper_pdf(s: UpperSingleton, xi) -> np.ndarray | float:
    out = s.pdf(xi)
    return out if np.ndim(out) else float(out)


def lower_pdf(m: LowerModel, xi) -> np.ndarray | float:
    if m.n_lower == 0:
        raise InvalidArgument("the lower density is undefined for an empty lower diagram")
    out = m.pdf(xi)
    return out if np.ndim(out) else float(out)


# ---------------------------------------------------------------------------
# Evaluation


def _as_out(x):
    return x if np.ndim(x) else float(x)


def eval_kernel(K: Kernel, inputs) -> np.ndarray | float:
    """Ordered global pdf at ``inputs`` (shape ``(..., N, 2)``)."""
    Z, P, L = K._factors(inputs)
    N = Z.shape[-2]
    total = np.zeros(Z.shape[:-2])
    for j in range(min(N, K.n_upper) + 1):
        w = K.lower.nu_at(N - j)
        if w == 0.0:
            continue
        acc = np.zeros(Z.shape[:-2])
        for gamma, Q in K._combos[j]:
            term = np.full(Z.shape[:-2], Q)
            for k, g in enumerate(gamma):
                term = term * P[..., k, g]
            acc += term
        total += w * acc * np.prod(L[..., j:], axis=-1)
    return _as_out(total)


def eval_kernel_symmetric(K: Kernel, inputs) -> np.ndarray | float:
    """Multiset density: the ordered pdf summed over all input permutations.

    Organised as a sum over which inputs are upper-assigned and the
    injections of those inputs into the upper singletons, so the cost grows
    with the number of upper singletons rather than with ``N!``.
    """
    Z, P, L = K._factors(inputs)
    N = Z.shape[-2]
    batch = Z.shape[:-2]
    total = np.zeros(batch)
    for j in range(min(N, K.n_upper) + 1):
        w = K.lower.nu_at(N - j)
        if w == 0.0:
            continue
        w *= math.factorial(N - j)
        for S in itertools.combinations(range(N), j):
            rest = [i for i in range(N) if i not in S]
            lowprod = np.prod(L[..., rest], axis=-1)
            acc = np.zeros(batch)
            for slots, Q in K._perms[j]:
                term = np.full(batch, Q)
                for i, s in zip(S, slots):
                    term = term * P[..., i, s]
                acc += term
            total += w * acc * lowprod
    return _as_out(total)


def eval_phd(K: Kernel, xi) -> np.ndarray | float:
    """Intensity whose integral over a region is the expected feature count there."""
    xi = np.asarray(xi, dtype=np.float64)
    out = K.n_lower * K.lower.pdf(xi) if K.n_lower else np.zeros(xi.shape[:-1])
    for s in K.upper:
        out = out + s.q * s.pdf(xi)
    return _as_out(out)


def upper_count_pmf(q: Sequence[float]) -> np.ndarray:
    """Poisson-binomial pmf of the number of present singletons."""
    pmf = np.array([1.0])
    for p in q:
        pmf = np.convolve(pmf, [1.0 - p, p])
    return pmf


def cardinality_pmf(K: Kernel, N: int | None = None):
    """``P[|D| = N]``, or the whole pmf on ``0..max_cardinality`` if ``N`` is None."""
    pmf = np.convolve(upper_count_pmf(K.q), K.lower.nu)
    if N is None:
        return pmf
    return float(pmf[N]) if 0 <= N < len(pmf) else 0.0


# ---------------------------------------------------------------------------
# Sampling


def _draw_in_wedge(rng: np.random.Generator, centers: np.ndarray, sigma: float) -> np.ndarray:
    out = rng.normal(centers, sigma)
    bad = ~_in_wedge(out)
    tries = 0
    while bad.any():
        tries += 1
        if tries > REJECTION_CAP:
            raise NumericError("rejection sampling into the wedge exceeded the try cap")
        out[bad] = rng.normal(centers[bad], sigma)
        bad = ~_in_wedge(out)
    return out


def sample_points(K: Kernel, rng: np.random.Generator) -> np.ndarray:
    """One draw from the kernel as an ``(n, 2)`` array of (birth, death)."""
    rows: list[np.ndarray] = []
    for s in K.upper:
        if s.degree_zero:
            d = rng.normal(s.d, s.sigma)
            if d > 0:
                rows.append(np.array([[0.0, d]]))
            continue
        x = rng.normal((s.b, s.d), s.sigma)
        if x[1] <= x[0]:
            continue
        if x[0] < 0:
            x = _draw_in_wedge(rng, np.array([[s.b, s.d]]), s.sigma)[0]
        rows.append(x.reshape(1, 2))
    if K.n_lower:
        n = int(rng.choice(len(K.lower.nu), p=K.lower.nu))
        if n:
            if K.lower.degree_zero:
                d = np.abs(rng.normal(0.0, K.lower.sigma, size=n))
                d[d == 0.0] = np.finfo(float).tiny
                rows.append(np.column_stack([np.zeros(n), d]))
            else:
                comp = rng.integers(K.n_lower, size=n)
                rows.append(_draw_in_wedge(rng, K.lower.projected[comp], K.lower.sigma))
    return np.concatenate(rows) if rows else np.zeros((0, 2))


def sample_kernel(K: Kernel, rng: np.random.Generator) -> PersistenceDiagram:
    pts = sample_points(K, rng)
    return PersistenceDiagram(tuple(Feature(b, d, K.degree) for b, d in pts.tolist()))


# ---------------------------------------------------------------------------
# Several degrees at once


@dataclass(frozen=True)
class MultiKernel:
    """Independent single-degree kernels, one per homological degree."""

    kernels: Mapping[int, Kernel]

    @property
    def degrees(self) -> list[int]:
        return sorted(self.kernels)

    @property
    def max_cardinality(self) -> int:
        return sum(K.max_cardinality for K in self.kernels.values())


def build_multi_kernel(
    center: PersistenceDiagram,
    sigma_split: float,
    sigma_band: float | None = None,
    degrees: Sequence[int] | None = None,
    nu: str | Callable[[int], np.ndarray] = "triangular",
    lower_normalization: str = "wedge",
) -> MultiKernel:
    degrees = center.degrees() if degrees is None else list(degrees)
    return MultiKernel(
        {k: build_kernel(center, k, sigma_split, sigma_band, nu, lower_normalization) for k in degrees}
    )


def lambda_factor(counts: Sequence[int]) -> float:
    """``prod(N_k!) / (sum N_k)!``, relating per-degree and joint vector densities."""
    return math.prod(math.factorial(n) for n in counts) / math.factorial(sum(counts))


def _group_by_degree(Z) -> dict[int, np.ndarray]:
    groups: dict[int, list[tuple[float, float]]] = {}
    for f in Z:
        groups.setdefault(int(f[2]), []).append((float(f[0]), float(f[1])))
    return {k: np.array(v).reshape(-1, 2) for k, v in groups.items()}


def eval_multi_degree(Ks: MultiKernel, Z, convention: str = "multiset") -> float:
    """Density at a multi-degree diagram.

    With the multiset convention this is the product of the per-degree
    multiset densities.  ``convention="vector"`` returns the symmetric
    vector density, i.e. the multiset value divided by ``|Z|!``, which equals
    ``lambda_factor`` times the product of per-degree symmetric vector
    densities.
    """
    groups = _group_by_degree(Z)
    if any(k not in Ks.kernels for k in groups):
        return 0.0
    val = 1.0
    for k, K in Ks.kernels.items():
        val *= float(eval_kernel_symmetric(K, groups.get(k, np.zeros((0, 2)))))
    if convention == "multiset":
        return val
    if convention == "vector":
        return val / math.factorial(sum(len(g) for g in groups.values()))
    raise InvalidArgument("convention must be 'multiset' or 'vector'")


def multi_cardinality_pmf(Ks: MultiKernel) -> np.ndarray:
    pmf = np.array([1.0])
    for K in Ks.kernels.values():
        pmf = np.convolve(pmf, cardinality_pmf(K))
    return pmf


def sample_multi(Ks: MultiKernel, rng: np.random.Generator) -> PersistenceDiagram:
    feats: list[Feature] = []
    for k in Ks.degrees:
        pts = sample_points(Ks.kernels[k], rng)
        feats.extend(Feature(b, d, k) for b, d in pts.tolist())
    return PersistenceDiagram(tuple(feats))
