"""Readers and writers for clouds, diagrams, kernel specs, grids and reports.

Floats are written with ``repr`` so that files round-trip exactly and
reruns with the same inputs are byte-identical.
"""
from __future__ import annotations

import json
import math
import os
from typing import Sequence

import numpy as np

from .datagen import PointCloud
from .diagram import Feature, PersistenceDiagram
from .errors import InvalidArgument, ParseError


def _fmt(x: float) -> str:
    return repr(float(x))


def _write_text(path: str | os.PathLike, text: str) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write(text)


def _data_lines(path: str | os.PathLike):
    """Yield ``(line_number, fields)`` for non-blank, non-comment lines."""
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            yield no, [f.strip() for f in line.split(",")]


def _floats(fields: Sequence[str], no: int, path) -> list[float]:
    try:
        vals = [float(f) for f in fields]
    except ValueError:
        raise ParseError(f"non-numeric field in {','.join(fields)!r}", no, str(path)) from None
    if not all(math.isfinite(v) for v in vals):
        raise ParseError("non-finite value", no, str(path))
    return vals


# ---------------------------------------------------------------------------
# Point clouds


def write_cloud_csv(cloud: PointCloud, path: str | os.PathLike) -> None:
    _write_text(path, "".join(",".join(map(_fmt, p)) + "\n" for p in cloud.points))


def read_cloud_csv(path: str | os.PathLike) -> PointCloud:
    rows, width = [], None
    for no, fields in _data_lines(path):
        vals = _floats(fields, no, path)
        if width is None:
            width = len(vals)
        elif len(vals) != width:
            raise ParseError(f"expected {width} coordinates, found {len(vals)}", no, str(path))
        rows.append(vals)
    if not rows:
        raise ParseError("no points found", None, str(path))
    return PointCloud(np.array(rows))


# ---------------------------------------------------------------------------
# Diagrams


def write_diagram_csv(D: PersistenceDiagram, path: str | os.PathLike) -> None:
    _write_text(path, "".join(f"{_fmt(f.b)},{_fmt(f.d)},{f.k}\n" for f in D))


def read_diagram_csv(path: str | os.PathLike) -> PersistenceDiagram:
    """Read ``birth,death,degree`` rows; an empty file is the empty diagram."""
    feats = []
    for no, fields in _data_lines(path):
        if len(fields) != 3:
            raise ParseError(f"expected birth,death,degree; found {len(fields)} fields", no, str(path))
        b, d, k = _floats(fields, no, path)
        if k != int(k) or k < 0:
            raise ParseError(f"degree must be a non-negative integer, got {fields[2]!r}", no, str(path))
        if not d > b >= 0:
            raise ParseError(f"feature ({b}, {d}) lies outside the wedge d > b >= 0", no, str(path))
        feats.append(Feature(b, d, int(k)))
    return PersistenceDiagram(tuple(feats))


def diagram_to_json(D: PersistenceDiagram) -> list[dict]:
    return [{"b": f.b, "d": f.d, "k": f.k} for f in D]


def diagram_from_json(obj) -> PersistenceDiagram:
    if not isinstance(obj, list):
        raise ParseError("diagram JSON must be an array of {b, d, k} objects")
    feats = []
    for i, item in enumerate(obj):
        try:
            feats.append(Feature(float(item["b"]), float(item["d"]), int(item.get("k", 1))))
        except (KeyError, TypeError, ValueError, AttributeError):
            raise ParseError(f"diagram entry {i} is not a {{b, d, k}} object") from None
    try:
        return PersistenceDiagram(tuple(feats))
    except InvalidArgument as exc:
        raise ParseError(str(exc)) from None


def write_diagram_json(D: PersistenceDiagram, path: str | os.PathLike) -> None:
    _write_text(path, json.dumps(diagram_to_json(D)) + "\n")


def load_json(path: str | os.PathLike):
    try:
        with open(path, encoding="utf-8") as fh:
            return json.load(fh)
    except json.JSONDecodeError as exc:
        raise ParseError(exc.msg, exc.lineno, str(path)) from None


def read_diagram_json(path: str | os.PathLike) -> PersistenceDiagram:
    try:
        return diagram_from_json(load_json(path))
    except ParseError as exc:
        raise ParseError(str(exc), None, str(path)) from None


def read_diagram(path: str | os.PathLike) -> PersistenceDiagram:
    """Dispatch on extension: ``.json`` or CSV otherwise."""
    return read_diagram_json(path) if str(path).endswith(".json") else read_diagram_csv(path)


def read_diagram_dir(directory: str | os.PathLike) -> list[PersistenceDiagram]:
    """All ``*.csv`` and ``*.json`` diagrams in a directory, in file-name order."""
    if not os.path.isdir(directory):
        raise InvalidArgument(f"{directory} is not a directory")
    names = sorted(n for n in os.listdir(directory) if n.endswith((".csv", ".json")))
    if not names:
        raise InvalidArgument(f"no diagram files found in {directory}")
    return [read_diagram(os.path.join(directory, n)) for n in names]


# ---------------------------------------------------------------------------
# Kernel specs


def write_kernel_spec(
    path: str | os.PathLike, center: PersistenceDiagram, sigma_split: float, sigma_band: float, nu: str
) -> None:
    spec = {"center": diagram_to_json(center), "sigma_split": sigma_split, "sigma_band": sigma_band, "nu": nu}
    _write_text(path, json.dumps(spec, indent=2) + "\n")


def read_kernel_spec(path: str | os.PathLike) -> tuple[PersistenceDiagram, float, float, str]:
    """Return ``(center, sigma_split, sigma_band, nu)``; ``sigma_band`` defaults to ``sigma_split``."""
    obj = load_json(path)
    if not isinstance(obj, dict) or "center" not in obj or "sigma_split" not in obj:
        raise ParseError("kernel spec needs 'center' and 'sigma_split'", None, str(path))
    try:
        center = diagram_from_json(obj["center"])
        split = float(obj["sigma_split"])
        band = float(obj.get("sigma_band", split))
    except (ParseError, TypeError, ValueError) as exc:
        raise ParseError(str(exc), None, str(path)) from None
    nu = obj.get("nu", "triangular")
    if not isinstance(nu, str):
        raise ParseError("'nu' must be a family name", None, str(path))
    return center, split, band, nu


# ---------------------------------------------------------------------------
# Density grids and reports


def write_grid_csv(
    path: str | os.PathLike,
    births: np.ndarray,
    deaths: np.ndarray,
    values: np.ndarray,
    header: Sequence[str] = (),
) -> None:
    """Write ``b,d,density`` rows, birth-major, after ``# ``-prefixed header lines."""
    lines = [f"# {h}\n" for h in header]
    lines.append("b,d,density\n")
    for i, b in enumerate(births):
        fb = _fmt(b)
        lines.extend(f"{fb},{_fmt(d)},{_fmt(values[i, j])}\n" for j, d in enumerate(deaths))
    _write_text(path, "".join(lines))


def slice_header(fixed: Sequence[Sequence[float]], n: int, sigma_split: float, sigma_band: float) -> list[str]:
    fx = json.dumps([[float(x) for x in f] for f in fixed])
    return [f"fixed: {fx}", f"n={n}, sigma={sigma_split}, sigma_band={sigma_band}", "convention: multiset"]


def read_grid_csv(path: str | os.PathLike) -> tuple[list[str], np.ndarray]:
    """Return the header comment lines and an ``(m, 3)`` array of ``b, d, density``."""
    header, rows = [], []
    with open(path, encoding="utf-8") as fh:
        for no, raw in enumerate(fh, start=1):
            line = raw.strip()
            if line.startswith("#"):
                header.append(line[1:].strip())
            elif line and line != "b,d,density":
                vals = _floats(line.split(","), no, path)
                if len(vals) != 3:
                    raise ParseError("expected b,d,density", no, str(path))
                rows.append(vals)
    return header, np.array(rows).reshape(-1, 3)


def write_json(path: str | os.PathLike, obj) -> None:
    _write_text(path, json.dumps(obj, indent=2) + "\n")
