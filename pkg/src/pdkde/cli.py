"""Command-line interface: ``pdkde <command> [options]``.

Every stochastic command takes ``--seed`` and is reproducible byte-for-byte.
Errors print one ``pdkde: error: ...`` line to stderr and exit nonzero.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
from typing import Sequence

import numpy as np

from . import datagen, io
from .cech import cloud_diagram
from .diagram import Feature, PersistenceDiagram
from .errors import InvalidArgument, NumericError, ParseError, PdkdeError
from .kde import (
    GeneratorSpec,
    Grid,
    KdeModel,
    convergence_sweep,
    eval_slice,
    fit,
    mad_estimate,
    resolve_threads,
    sample,
)
from .kernel import (
    NU_FAMILIES,
    SingletonSystem,
    build_kernel,
    cardinality_pmf,
    combine_singletons,
    eval_phd,
)

EXIT_INVALID = 2
EXIT_PARSE = 3
EXIT_NUMERIC = 4
EXIT_IO = 5

DEFAULT_SCHEDULE = [(100, 0.03), (300, 0.025), (1000, 0.020), (5000, 0.015)]
DEFAULT_GRID = "0:1.2:0:1.2:200"


class _Parser(argparse.ArgumentParser):
    def error(self, message: str):
        raise InvalidArgument(message)


# ---------------------------------------------------------------------------
# Flag parsing


def parse_features(text: str, degree: int = 1) -> list[tuple[float, float, int]]:
    """``"b,d[,k];b,d[,k]..."``; an empty string or ``none`` is no features."""
    text = text.strip()
    if not text or text.lower() == "none":
        return []
    out = []
    for part in text.split(";"):
        fields = part.split(",")
        try:
            if len(fields) == 2:
                out.append((float(fields[0]), float(fields[1]), degree))
            elif len(fields) == 3:
                out.append((float(fields[0]), float(fields[1]), int(fields[2])))
            else:
                raise ValueError
        except ValueError:
            raise InvalidArgument(f"bad feature {part!r}; expected b,d or b,d,k") from None
    for b, d, _ in out:
        if not d > b >= 0:
            raise InvalidArgument(f"feature ({b}, {d}) lies outside the wedge d > b >= 0")
    return out


def parse_schedule(text: str) -> list[tuple[int, float]]:
    """``"n:sigma,n:sigma,..."``."""
    steps = []
    for part in text.split(","):
        try:
            n, s = part.split(":")
            steps.append((int(n), float(s)))
        except ValueError:
            raise InvalidArgument(f"bad schedule step {part!r}; expected n:sigma") from None
        if steps[-1][0] < 1 or not steps[-1][1] > 0:
            raise InvalidArgument(f"schedule step {part!r} needs n >= 1 and sigma > 0")
    return steps


def parse_degrees(text: str) -> tuple[int, ...]:
    try:
        degs = tuple(int(x) for x in text.split(","))
    except ValueError:
        raise InvalidArgument(f"bad degree list {text!r}") from None
    if not degs or min(degs) < 0:
        raise InvalidArgument("degrees must be non-negative integers")
    return degs


def _positive(name: str, value: float | None) -> None:
    if value is not None and not value > 0:
        raise InvalidArgument(f"{name} must be positive")


def _load_model(args) -> tuple[KdeModel, float, float]:
    """Model from a diagram directory, one diagram file or a kernel spec JSON."""
    path = args.input
    nu = args.nu
    split, band = args.sigma_split, args.sigma_band
    if os.path.isdir(path):
        diagrams = io.read_diagram_dir(path)
    elif not os.path.exists(path):
        raise OSError(f"{path}: no such file or directory")
    elif path.endswith(".json") and isinstance(io.load_json(path), dict):
        center, s_split, s_band, nu = io.read_kernel_spec(path)
        diagrams = [center]
        split = s_split if split is None else split
        band = s_band if band is None else band
    else:
        diagrams = [io.read_diagram(path)]
    if split is None:
        raise InvalidArgument("--sigma-split is required")
    band = split if band is None else band
    _positive("--sigma-split", split)
    _positive("--sigma-band", band)
    model = fit(diagrams, split, band, degrees=args.degree, nu=nu, threads=args.threads)
    return model, split, band


# ---------------------------------------------------------------------------
# Commands


def cmd_gen(args) -> None:
    if args.n_points < 1:
        raise InvalidArgument("--n-points must be at least 1")
    cloud = datagen.GENERATORS[args.kind](args.n_points, args.noise, args.seed)
    io.write_cloud_csv(cloud, args.out)


def cmd_diagram(args) -> None:
    cloud = io.read_cloud_csv(args.input)
    D = cloud_diagram(cloud, max_degree=args.max_degree)
    if args.out.endswith(".json"):
        io.write_diagram_json(D, args.out)
    else:
        io.write_diagram_csv(D, args.out)


def cmd_slice(args) -> None:
    model, split, band = _load_model(args)
    degree = args.degree[0]
    fixed = parse_features(args.fixed, degree)
    grid = Grid.parse(args.grid)
    values = eval_slice(model, fixed, grid, degree, args.threads)
    io.write_grid_csv(args.out, grid.births, grid.deaths, values, io.slice_header(fixed, model.n, split, band))


def cmd_phd(args) -> None:
    model, split, band = _load_model(args)
    degree = args.degree[0]
    grid = Grid.parse(args.grid)
    pts = grid.points()
    vals = np.zeros(pts.shape[:-1])
    for K in model.kernels:
        vals += np.asarray(eval_phd(K.kernels[degree], pts))
    vals /= model.n
    header = [f"phd degree={degree}", f"n={model.n}, sigma={split}, sigma_band={band}", "convention: intensity"]
    io.write_grid_csv(args.out, grid.births, grid.deaths, vals, header)


def cmd_sample(args) -> None:
    if args.count < 1:
        raise InvalidArgument("--count must be at least 1")
    model, _, _ = _load_model(args)
    rng = np.random.default_rng(args.seed)
    draws = [io.diagram_to_json(sample(model, rng)) for _ in range(args.count)]
    io.write_json(args.out, draws)


def cmd_mad(args) -> None:
    model, split, band = _load_model(args)
    if args.origin is None:
        origin = PersistenceDiagram()
    elif os.path.exists(args.origin):
        origin = io.read_diagram(args.origin)
    else:
        origin = PersistenceDiagram(tuple(Feature(*f) for f in parse_features(args.origin, args.degree[0])))
    rng = np.random.default_rng(args.seed)
    est, se = mad_estimate(model, origin, args.samples, rng, args.threads, args.stratified)
    report = {
        "estimate": est,
        "std_error": se,
        "n_samples": args.samples,
        "stratified": args.stratified,
        "seed": args.seed,
        "n": model.n,
        "sigma_split": split,
        "sigma_band": band,
        "convention": "multiset",
        "origin": io.diagram_to_json(origin),
    }
    if args.out:
        io.write_json(args.out, report)
    else:
        print(json.dumps(report))


def cmd_converge(args) -> None:
    schedule = parse_schedule(args.schedule) if args.schedule else DEFAULT_SCHEDULE
    degree = args.degree[0]
    slices = [parse_features(s, degree) for s in (args.fixed or [""])]
    origin = PersistenceDiagram(tuple(Feature(*f) for f in parse_features(args.mad_origin, degree)))
    gen = GeneratorSpec(args.kind, args.n_points, args.noise)
    result = convergence_sweep(
        gen,
        schedule,
        slices,
        args.seed,
        Grid.parse(args.grid),
        degree,
        mad_origin=origin,
        mad_samples=args.mad_samples,
        threads=args.threads,
    )
    if args.grid_dir:
        os.makedirs(args.grid_dir, exist_ok=True)
        grid = Grid.parse(args.grid)
        for step, grids in zip(result.report["steps"], result.grids):
            for idx, (fx, vals) in enumerate(zip(slices, grids)):
                name = os.path.join(args.grid_dir, f"slice{idx}_n{step['n']}.csv")
                io.write_grid_csv(
                    name, grid.births, grid.deaths, vals, io.slice_header(fx, step["n"], step["sigma"], step["sigma"])
                )
    io.write_json(args.out, result.report)


def example1_rows() -> list[tuple[str, float, str]]:
    """``(quantity, computed value, expected value)`` for the two worked examples."""
    rows: list[tuple[str, float, str]] = []
    q1, q2 = 0.6, 0.8

    def gauss(mu):
        return lambda x: math.exp(-0.5 * (x - mu) ** 2) / math.sqrt(2 * math.pi)

    system = SingletonSystem([q1, q2], [gauss(-1.0), gauss(1.0)])
    f0 = combine_singletons(system, [])
    # peak coefficients recovered from evaluations at the two centres
    g = 1.0 / math.sqrt(2 * math.pi)
    e = math.exp(-2.0)
    A = np.array([[g, g * e], [g * e, g]])
    c1 = np.linalg.solve(A, [combine_singletons(system, [-1.0]), combine_singletons(system, [1.0])])
    sym = 0.5 * (combine_singletons(system, [-1.0, 1.0]) + combine_singletons(system, [1.0, -1.0]))
    c2 = sym / (1.0 + math.exp(-4.0))
    rows += [
        ("singletons f0", f0, "0.08"),
        ("singletons f1 coefficient at -1", float(c1[0]), "0.12"),
        ("singletons f1 coefficient at +1", float(c1[1]), "0.32"),
        ("singletons symmetric f2 coefficient", c2, "0.24/(2pi) = 0.0381972"),
        ("singletons mass |D|=1", (1 - q2) * q1 + (1 - q1) * q2, "0.44"),
        ("singletons mass |D|=2", q1 * q2, "0.48"),
        ("singletons total mass", f0 + (1 - q2) * q1 + (1 - q1) * q2 + q1 * q2, "1"),
    ]

    center = PersistenceDiagram.from_pairs([(1, 3), (2, 4), (1, 1.3), (3, 3.2)])
    K = build_kernel(center, 1, 0.5)
    Kd = build_kernel(center, 1, 0.5, lower_normalization="diagonal")
    sigma = 0.5
    expected_nu = ["1/9", "2/9", "3/9", "2/9", "1/9"]
    rows += [(f"kernel nu({n})", float(K.lower.nu[n]), expected_nu[n]) for n in range(5)]
    for s in K.upper:
        rows.append((f"kernel q for ({s.b:g},{s.d:g})", s.q, "~1"))
    rows.append(("kernel p_lower coefficient, half-plane normalised", float(Kd.lower.coefficients[0]), "2/pi = 0.63662"))
    for (c, _), coef in zip(K.lower.projected, K.lower.coefficients):
        rows.append((f"kernel p_lower coefficient at ({c:g},{c:g}), wedge normalised", float(coef), "2/pi = 0.63662"))
        rows.append((f"kernel PHD peak coefficient at ({c:g},{c:g})", 2 * float(coef), "1.273"))
    up_coef = [1.0 / (2 * math.pi * sigma**2 * s.wedge_mass) for s in K.upper]
    for s, c in zip(K.upper, up_coef):
        rows.append((f"kernel PHD peak coefficient at ({s.b:g},{s.d:g})", s.q * c, "0.635"))
    (qa, qb), nu = K.q, K.lower.nu
    rows.append(("kernel |Z|=1 upper-term coefficient at (1,3)", nu[0] * (1 - qb) * qa * up_coef[0], "7.74e-2 (not checked)"))
    rows.append(("kernel |Z|=1 upper-term coefficient at (2,4)", nu[0] * (1 - qa) * qb * up_coef[1], "7.74e-2 (not checked)"))
    rows.append(("kernel |Z|=1 lower-term weight", nu[1] * (1 - qa) * (1 - qb), "1.65e-4 (not checked)"))
    rows.append(("kernel |Z|=2 first-term coefficient", nu[0] * qa * qb * up_coef[0] * up_coef[1], "4.5e-2"))
    rows.append(("kernel |Z|=2 second-term coefficient at (1,3)", nu[1] * (1 - qb) * qa * up_coef[0], "2.11e-4 (not checked)"))
    rows.append(("kernel |Z|=2 third-term weight", nu[2] * (1 - qa) * (1 - qb), "7.39e-7 (not checked)"))
    pmf = cardinality_pmf(K)
    rows += [(f"kernel P[|D|={n}]", float(p), "-") for n, p in enumerate(pmf)]
    return rows


def cmd_example1(args) -> None:
    rows = example1_rows()
    width = max(len(r[0]) for r in rows)
    print(f"{'quantity':<{width}}  {'computed':>14}  expected")
    for name, val, expected in rows:
        print(f"{name:<{width}}  {val:>14.6g}  {expected}")


# ---------------------------------------------------------------------------
# Parser


def _add_model_flags(p: argparse.ArgumentParser) -> None:
    p.add_argument("input", help="diagram directory, diagram CSV/JSON file, or kernel spec JSON")
    p.add_argument("--sigma-split", type=float, help="persistence threshold for the upper/lower split")
    p.add_argument("--sigma-band", type=float, help="Gaussian bandwidth (default: --sigma-split)")
    p.add_argument("--degree", type=parse_degrees, default=(1,), help="homology degrees, comma-separated (default 1)")
    p.add_argument("--nu", choices=sorted(NU_FAMILIES), default="triangular", help="lower cardinality pmf family")


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="pdkde", description="Kernel densities for random persistence diagrams.")
    parser.add_argument(
        "--threads", type=int, default=None, help="worker threads (default: $PDKDE_THREADS or 1)"
    )
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("gen", help="generate a noisy point cloud CSV")
    p.add_argument("--kind", choices=sorted(datagen.GENERATORS), default="circle")
    p.add_argument("--n-points", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.02, help="Gaussian noise standard deviation")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_gen)

    p = sub.add_parser("diagram", help="Cech persistence diagram of a point cloud CSV")
    p.add_argument("input")
    p.add_argument("--max-degree", type=int, default=1)
    p.add_argument("-o", "--out", required=True, help="diagram CSV, or JSON when the name ends in .json")
    p.set_defaults(func=cmd_diagram)

    p = sub.add_parser("slice", help="KDE slice on a (b, d) grid")
    _add_model_flags(p)
    p.add_argument("--fixed", default="", help="fixed features b,d[;b,d...]")
    p.add_argument("--grid", default=DEFAULT_GRID, help="bmin:bmax:dmin:dmax:res")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_slice)

    p = sub.add_parser("phd", help="PHD intensity of the KDE on a (b, d) grid")
    _add_model_flags(p)
    p.add_argument("--grid", default=DEFAULT_GRID, help="bmin:bmax:dmin:dmax:res")
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_phd)

    p = sub.add_parser("sample", help="draw diagrams from the KDE as JSON")
    _add_model_flags(p)
    p.add_argument("--count", type=int, default=1)
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_sample)

    p = sub.add_parser("mad", help="Monte Carlo mean absolute bottleneck deviation")
    _add_model_flags(p)
    p.add_argument("--origin", help="origin diagram file or b,d[;b,d...] (default: empty diagram)")
    p.add_argument("--samples", type=int, default=10_000)
    p.add_argument("--stratified", action="store_true", help="spread samples evenly over kernels")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--out", help="report JSON (default: stdout)")
    p.set_defaults(func=cmd_mad)

    p = sub.add_parser("converge", help="KDE convergence sweep over an (n, sigma) schedule")
    p.add_argument("--kind", choices=sorted(datagen.GENERATORS), default="circle")
    p.add_argument("--n-points", type=int, default=10)
    p.add_argument("--noise", type=float, default=0.02)
    p.add_argument("--schedule", help="n:sigma,n:sigma,... (default: 100:0.03,300:0.025,1000:0.02,5000:0.015)")
    p.add_argument("--fixed", action="append", help="fixed features of one slice; repeat for more slices")
    p.add_argument("--grid", default=DEFAULT_GRID, help="bmin:bmax:dmin:dmax:res")
    p.add_argument("--degree", type=parse_degrees, default=(1,))
    p.add_argument("--mad-samples", type=int, default=0, help="stratified MAD draws per step (0 = skip)")
    p.add_argument("--mad-origin", default="", help="MAD origin b,d[;b,d...] (default: empty diagram)")
    p.add_argument("--grid-dir", help="also write every slice grid CSV here")
    p.add_argument("--seed", type=int, required=True)
    p.add_argument("-o", "--out", required=True)
    p.set_defaults(func=cmd_converge)

    p = sub.add_parser("example1", help="print the worked-example quantities")
    p.set_defaults(func=cmd_example1)
    return parser


def main(argv: Sequence[str] | None = None) -> int:
    try:
        args = build_parser().parse_args(argv)
        args.threads = resolve_threads(args.threads)
        args.func(args)
    except ParseError as exc:
        return _fail(str(exc), EXIT_PARSE)
    except NumericError as exc:
        return _fail(str(exc), EXIT_NUMERIC)
    except (InvalidArgument, PdkdeError) as exc:
        return _fail(str(exc), EXIT_INVALID)
    except OSError as exc:
        return _fail(f"{exc.filename + ': ' if exc.filename else ''}{exc.strerror or exc}", EXIT_IO)
    except ValueError as exc:
        return _fail(str(exc), EXIT_INVALID)
    return 0


def _fail(message: str, code: int) -> int:
    print(f"pdkde: error: {' '.join(message.split())}", file=sys.stderr)
    return code


if __name__ == "__main__":
    sys.exit(main())
