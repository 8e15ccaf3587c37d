"""Seeded synthetic point clouds.

Every generator draws from a single ``numpy.random.default_rng(seed)``
stream (PCG64): first the ``n_points`` angles, then the ``(n_points, 2)``
Gaussian noise block.  The draw order is part of the reproducibility
contract and must not change.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from .errors import InvalidArgument


@dataclass(frozen=True)
class PointCloud:
    points: np.ndarray

    def __post_init__(self) -> None:
        pts = np.array(self.points, dtype=np.float64)
        if pts.ndim == 1:
            pts = pts.reshape(1, -1)
        if pts.ndim != 2 or pts.shape[0] < 1 or pts.shape[1] < 1:
            raise InvalidArgument("a point cloud needs at least one point of positive dimension")
        if not np.all(np.isfinite(pts)):
            raise InvalidArgument("point coordinates must be finite")
        pts.setflags(write=False)
        object.__setattr__(self, "points", pts)

    @property
    def dim(self) -> int:
        return self.points.shape[1]

    def __len__(self) -> int:
        return self.points.shape[0]


def two_lobed_radius(theta: np.ndarray) -> np.ndarray:
    """Default pinched two-lobed curve ``r = 0.5 + |cos(theta)|``.

    The pinch (minimum radius 0.5) sits at ``theta = pi/2`` and ``3pi/2``.
    """
    return 0.5 + np.abs(np.cos(theta))


def _polar_sample(
    radius: Callable[[np.ndarray], np.ndarray], n_points: int, noise_std: float, seed: int
) -> PointCloud:
    if n_points < 1:
        raise InvalidArgument("n_points must be at least 1")
    if not noise_std >= 0:
        raise InvalidArgument("noise_std must be non-negative")
    rng = np.random.default_rng(seed)
    theta = rng.uniform(0.0, 2.0 * np.pi, size=n_points)
    noise = rng.normal(0.0, 1.0, size=(n_points, 2)) * noise_std
    r = radius(theta)
    pts = np.column_stack([r * np.cos(theta), r * np.sin(theta)]) + noise
    return PointCloud(pts)


def sample_circle(n_points: int, noise_std: float, seed: int) -> PointCloud:
    """Points uniform in angle on the unit circle plus isotropic Gaussian noise."""
    return _polar_sample(lambda t: np.ones_like(t), n_points, noise_std, seed)


def sample_two_lobed(
    n_points: int,
    noise_std: float,
    seed: int,
    radius: Callable[[np.ndarray], np.ndarray] = two_lobed_radius,
) -> PointCloud:
    """Points uniform in angle on a polar curve ``r(theta)`` plus Gaussian noise."""
    return _polar_sample(radius, n_points, noise_std, seed)


GENERATORS: dict[str, Callable[[int, float, int], PointCloud]] = {
    "circle": sample_circle,
    "twolobe": sample_two_lobed,
}
