"""Cech filtrations of point clouds and their persistence diagrams.

A simplex enters the Cech filtration at the radius of the smallest ball
enclosing its vertices.  Persistence pairs come from the standard Z2
column reduction of the filtration-ordered boundary matrix.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass
from typing import NamedTuple, Sequence

import numpy as np

from . import _backend
from .datagen import PointCloud
from .diagram import Feature, PersistenceDiagram
from .errors import InvalidArgument

MAX_SUPPORTED_DIM = 3

_BOUNDARY_RTOL = 1e-12


class Simplex(NamedTuple):
    vertices: tuple[int, ...]
    radius: float

    @property
    def dim(self) -> int:
        return len(self.vertices) - 1


def _circumball(support: np.ndarray) -> tuple[np.ndarray, float]:
    # center of the sphere through all support points, taken in their affine hull
    p0 = support[0]
    if len(support) == 1:
        return p0.copy(), 0.0
    A = support[1:] - p0
    rhs = 0.5 * np.einsum("ij,ij->i", A, A)
    lam, *_ = np.linalg.lstsq(A @ A.T, rhs, rcond=None)
    center = p0 + lam @ A
    return center, float(np.max(np.linalg.norm(support - center, axis=1)))


def _welzl(points: np.ndarray, n: int, support: list[int]) -> tuple[np.ndarray | None, float]:
    if n == 0 or len(support) == points.shape[1] + 1:
        if not support:
            return None, -1.0
        return _circumball(points[support])
    center, r = _welzl(points, n - 1, support)
    p = points[n - 1]
    if center is not None and np.linalg.norm(p - center) <= r * (1 + _BOUNDARY_RTOL) + 1e-15:
        return center, r
    return _welzl(points, n - 1, support + [n - 1])


def min_enclosing_ball_radius(points: Sequence[Sequence[float]] | np.ndarray) -> float:
    """Radius of the smallest Euclidean ball containing ``points`` (Welzl)."""
    pts = np.asarray(points, dtype=np.float64)
    if pts.ndim != 2 or pts.shape[0] == 0:
        raise InvalidArgument("min_enclosing_ball_radius needs a non-empty (n, dim) array")
    _, r = _welzl(pts, pts.shape[0], [])
    return max(r, 0.0)


def _triangle_radii(points: np.ndarray, tris: np.ndarray) -> np.ndarray:
    # obtuse or right: half the longest side; acute: circumradius
    p, q, s = points[tris[:, 0]], points[tris[:, 1]], points[tris[:, 2]]
    sq = np.stack(
        [
            np.einsum("ij,ij->i", q - s, q - s),
            np.einsum("ij,ij->i", p - s, p - s),
            np.einsum("ij,ij->i", p - q, p - q),
        ],
        axis=1,
    )
    sq.sort(axis=1)
    a2, b2, c2 = sq[:, 0], sq[:, 1], sq[:, 2]
    half_longest = np.sqrt(c2) / 2.0
    a, b, c = np.sqrt(a2), np.sqrt(b2), np.sqrt(c2)
    acute = c2 < a2 + b2
    prod = (a + b + c) * (-a + b + c) * (a - b + c) * (a + b - c)
    with np.errstate(divide="ignore", invalid="ignore"):
        circ = a * b * c / np.sqrt(np.where(acute, prod, 1.0))
    return np.where(acute, np.maximum(circ, half_longest), half_longest)


@dataclass(frozen=True)
class Filtration:
    """Simplices sorted by (radius, dimension, vertices); faces precede cofaces."""

    simplices: tuple[Simplex, ...]
    max_dim: int

    def __len__(self) -> int:
        return len(self.simplices)

    def radii(self, dim: int) -> np.ndarray:
        return np.array([s.radius for s in self.simplices if s.dim == dim])


def cech_filtration(cloud: PointCloud, max_dim: int = 2, max_radius: float | None = None) -> Filtration:
    """Cech filtration up to dimension ``max_dim``.

    ``max_radius=None`` keeps every simplex (the full complex), so every
    cycle of degree below ``max_dim`` dies inside the filtration.
    """
    if max_dim < 1:
        raise InvalidArgument("max_dim must be at least 1")
    if max_dim > MAX_SUPPORTED_DIM or cloud.dim > MAX_SUPPORTED_DIM:
        raise InvalidArgument("exact Cech radii are implemented for dimensions <= 3 only")
    if max_radius is not None and max_radius < 0:
        raise InvalidArgument("max_radius must be non-negative")
    pts = cloud.points
    n = len(pts)
    limit = np.inf if max_radius is None else float(max_radius)

    entries: list[tuple[float, int, tuple[int, ...]]] = [(0.0, 0, (i,)) for i in range(n)]
    radius_of: dict[tuple[int, ...], float] = {(i,): 0.0 for i in range(n)}

    if n >= 2:
        edges = np.array(list(itertools.combinations(range(n), 2)), dtype=np.intp)
        diff = pts[edges[:, 0]] - pts[edges[:, 1]]
        er = np.sqrt(np.einsum("ij,ij->i", diff, diff)) / 2.0
        for (u, v), r in zip(edges.tolist(), er.tolist()):
            if r <= limit:
                radius_of[(u, v)] = r
                entries.append((r, 1, (u, v)))

    if max_dim >= 2 and n >= 3:
        tris = np.array(list(itertools.combinations(range(n), 3)), dtype=np.intp)
        tr = _triangle_radii(pts, tris)
        for (u, v, w), r in zip(tris.tolist(), tr.tolist()):
            faces = [radius_of.get(f) for f in ((u, v), (u, w), (v, w))]
            if any(f is None for f in faces):
                continue
            r = max(r, *faces)
            if r > limit:
                continue
            radius_of[(u, v, w)] = r
            entries.append((r, 2, (u, v, w)))

    if max_dim >= 3 and n >= 4:
        for verts in itertools.combinations(range(n), 4):
            faces = [radius_of.get(f) for f in itertools.combinations(verts, 3)]
            if any(f is None for f in faces):
                continue
            r = max(min_enclosing_ball_radius(pts[list(verts)]), *faces)
            if r <= limit:
                radius_of[verts] = r
                entries.append((r, 3, verts))

    entries.sort()
    return Filtration(tuple(Simplex(v, r) for r, _, v in entries), max_dim)


def persistence(filtration: Filtration, max_degree: int = 1) -> PersistenceDiagram:
    """Finite, positive-persistence pairs of degree ``<= max_degree``."""
    if max_degree < 0 or max_degree >= filtration.max_dim:
        raise InvalidArgument("max_degree must satisfy 0 <= max_degree < max_dim")
    simplices = [s for s in filtration.simplices if s.dim <= max_degree + 1]
    index: dict[tuple[int, ...], int] = {}
    boundaries: list[list[int]] = []
    prev_key = None
    for j, s in enumerate(simplices):
        key = (s.radius, s.dim, s.vertices)
        if prev_key is not None and key < prev_key:
            raise InvalidArgument(f"filtration is not sorted at simplex {s.vertices}")
        prev_key = key
        faces = []
        if s.dim > 0:
            for face in itertools.combinations(s.vertices, s.dim):
                i = index.get(face)
                if i is None:
                    raise InvalidArgument(f"face {face} of {s.vertices} is missing or out of order")
                faces.append(i)
        faces.sort()
        boundaries.append(faces)
        index[s.vertices] = j

    low = _backend.reduce_boundary(boundaries)
    feats = []
    for j in np.flatnonzero(low >= 0).tolist():
        birth = simplices[int(low[j])]
        b, d = birth.radius, simplices[j].radius
        if d > b:
            feats.append(Feature(b, d, birth.dim))
    return PersistenceDiagram(tuple(feats))


def cloud_diagram(cloud: PointCloud, max_degree: int = 1, max_radius: float | None = None) -> PersistenceDiagram:
    """Persistence diagram of a cloud's Cech filtration in degrees ``0..max_degree``."""
    return persistence(cech_filtration(cloud, max_degree + 1, max_radius), max_degree)
