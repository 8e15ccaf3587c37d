"""Persistence diagrams: features, the persistence split, bottleneck distance."""
from __future__ import annotations

import math
from dataclasses import dataclass
from typing import Iterable, Iterator, NamedTuple, Sequence

import numpy as np

from . import _backend
from .errors import InvalidArgument


class Feature(NamedTuple):
    """One homological feature: birth ``b``, death ``d`` and degree ``k``."""

    b: float
    d: float
    k: int = 1

    @property
    def persistence(self) -> float:
        return self.d - self.b


def _check_feature(f: Feature) -> None:
    if not (math.isfinite(f.b) and math.isfinite(f.d)):
        raise InvalidArgument(f"feature {f} has non-finite coordinates")
    if not (f.d > f.b >= 0.0):
        raise InvalidArgument(f"feature {f} lies outside the wedge d > b >= 0")
    if f.k < 0:
        raise InvalidArgument(f"feature {f} has negative degree")


@dataclass(frozen=True)
class PersistenceDiagram:
    """A finite multiset of features.

    Equal ``(b, d, k)`` triples are distinct elements; order carries no
    meaning but is preserved for reproducible output.  ``max_cardinality``
    is an optional model bound checked at construction.
    """

    features: tuple[Feature, ...] = ()
    max_cardinality: int | None = None

    def __post_init__(self) -> None:
        feats = tuple(Feature(float(f[0]), float(f[1]), int(f[2])) for f in self.features)
        for f in feats:
            _check_feature(f)
        if self.max_cardinality is not None and len(feats) > self.max_cardinality:
            raise InvalidArgument(
                f"diagram has {len(feats)} features, above the bound {self.max_cardinality}"
            )
        object.__setattr__(self, "features", feats)

    @classmethod
    def from_pairs(cls, pairs: Iterable[Sequence[float]], degree: int = 1) -> "PersistenceDiagram":
        return cls(tuple(Feature(float(b), float(d), degree) for b, d in pairs))

    def __len__(self) -> int:
        return len(self.features)

    def __iter__(self) -> Iterator[Feature]:
        return iter(self.features)

    def degrees(self) -> list[int]:
        return sorted({f.k for f in self.features})

    def of_degree(self, k: int) -> "PersistenceDiagram":
        return PersistenceDiagram(tuple(f for f in self.features if f.k == k))

    def points(self, k: int | None = None) -> np.ndarray:
        """``(n, 2)`` array of (birth, death), optionally restricted to degree ``k``."""
        rows = [(f.b, f.d) for f in self.features if k is None or f.k == k]
        return np.array(rows, dtype=np.float64).reshape(-1, 2)

    def same_multiset(self, other: "PersistenceDiagram") -> bool:
        return sorted(self.features) == sorted(other.features)


def split(
    D: PersistenceDiagram, sigma_split: float, degree: int
) -> tuple[PersistenceDiagram, PersistenceDiagram]:
    """Partition the degree-``degree`` features by persistence.

    Features with ``d - b >= sigma_split`` go to the upper part, the rest to
    the lower part.
    """
    if not sigma_split > 0:
        raise InvalidArgument("sigma_split must be positive")
    upper, lower = [], []
    for f in D.features:
        if f.k != degree:
            continue
        (upper if f.d - f.b >= sigma_split else lower).append(f)
    return PersistenceDiagram(tuple(upper)), PersistenceDiagram(tuple(lower))


def max_persistence(D: PersistenceDiagram) -> float:
    return max((f.d - f.b for f in D.features), default=0.0)


def bottleneck(D1: PersistenceDiagram, D2: PersistenceDiagram) -> float:
    """Bottleneck distance, computed per degree and maximised over degrees.

    The diagonal is available to both diagrams with infinite multiplicity.
    """
    degrees = set(D1.degrees()) | set(D2.degrees())
    return max(
        (_backend.bottleneck_distance(D1.points(k), D2.points(k)) for k in degrees),
        default=0.0,
    )
