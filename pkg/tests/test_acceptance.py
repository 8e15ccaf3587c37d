"""End-to-end acceptance checks, one test per criterion.

Each test prints a ``PASS``/``FAIL`` line (collected into the pytest
summary) before asserting.  Run directly with ``python3 tests/test_acceptance.py``
to print only those lines.
"""
import math
import time

import numpy as np
import pytest
from scipy import integrate, stats

from _oracles import brute_bottleneck, brute_persistence
from pdkde import (
    GeneratorSpec,
    Grid,
    PersistenceDiagram,
    PointCloud,
    SingletonSystem,
    bottleneck,
    build_kernel,
    cardinality_pmf,
    cech_filtration,
    combine_singletons,
    convergence_sweep,
    eval_kernel_symmetric,
    eval_phd,
    fit,
    mad_estimate,
    persistence,
    sample_diagrams,
    sample_kernel,
)

try:
    from conftest import ACCEPTANCE_LINES
except ImportError:  # run as a script
    ACCEPTANCE_LINES = []

CENTER = PersistenceDiagram.from_pairs([(1, 3), (2, 4), (1, 1.3), (3, 3.2)])
SIGMA = 0.5
CIRCLE = GeneratorSpec("circle", 10, 0.02)
SCHEDULE = [(100, 0.03), (300, 0.025), (1000, 0.020)]
SEED = 0


def report(number: int, ok: bool, elapsed: float, limit: float, detail: str) -> None:
    ok = bool(ok) and elapsed < limit
    line = f"{'PASS' if ok else 'FAIL'} criterion {number}: {detail} [{elapsed:.1f}s < {limit:g}s]"
    ACCEPTANCE_LINES.append(line)
    print(line)
    assert ok, line


def close(a: float, b: float, rel: float) -> bool:
    return abs(a - b) <= rel * abs(b)


def test_criterion_1_two_singletons():
    t0 = time.perf_counter()
    q1, q2 = 0.6, 0.8

    def gauss(mu):
        return lambda x: math.exp(-0.5 * (x - mu) ** 2) / math.sqrt(2 * math.pi)

    system = SingletonSystem([q1, q2], [gauss(-1.0), gauss(1.0)])
    f0 = combine_singletons(system, [])
    # f1 = a g(x+1) + c g(x-1): recover (a, c) from the values at the two centres
    g0, ge = 1 / math.sqrt(2 * math.pi), math.exp(-2.0) / math.sqrt(2 * math.pi)
    a, c = np.linalg.solve([[g0, ge], [ge, g0]], [combine_singletons(system, [x]) for x in (-1.0, 1.0)])
    # ordered f2(-1, 1) = q1 q2 g(0)^2, f2(1, -1) = q1 q2 g(2)^2; the symmetric
    # coefficient multiplies sum over orderings and carries the 1/2! of the set form
    fa, fb = combine_singletons(system, [-1.0, 1.0]), combine_singletons(system, [1.0, -1.0])
    f2 = 0.5 * (fa + fb) / (1 + math.exp(-4.0))
    m1 = (1 - q2) * q1 + (1 - q1) * q2
    m2 = q1 * q2
    checks = [
        (f0, 0.08),
        (a, 0.12),
        (c, 0.32),
        (f2, 0.24 / (2 * math.pi)),
        (m1, 0.44),
        (m2, 0.48),
        (f0 + m1 + m2, 1.0),
    ]
    worst = max(abs(x - y) / y for x, y in checks)
    report(1, worst <= 1e-12, time.perf_counter() - t0, 1, f"closed forms, worst relative error {worst:.1e}")


def test_criterion_2_four_feature_kernel():
    t0 = time.perf_counter()
    K = build_kernel(CENTER, 1, SIGMA)
    Kd = build_kernel(CENTER, 1, SIGMA, lower_normalization="diagonal")
    nu_ok = np.array_equal(K.lower.nu, np.array([1, 2, 3, 2, 1]) / 9)
    diag_coef = float(Kd.lower.coefficients[0])
    coef_ok = abs(diag_coef - 2 / math.pi) <= 1e-15 * (2 / math.pi)
    # PHD peak coefficients: expected lower count times component coefficient,
    # and q over the wedge-restricted normaliser for the upper features
    mean_lower = float(np.arange(len(K.lower.nu)) @ K.lower.nu)
    lower_peaks = [mean_lower * float(c) for c in K.lower.coefficients]
    upper_coef = [1 / (2 * math.pi * SIGMA**2 * s.wedge_mass) for s in K.upper]
    upper_peaks = [s.q * c for s, c in zip(K.upper, upper_coef)]
    peaks_ok = all(close(p, 1.273, 0.05) for p in lower_peaks) and all(close(p, 0.635, 0.05) for p in upper_peaks)
    # the coefficients are those of the evaluated intensity: rebuild it as a sum of bumps
    centres = np.vstack([K.lower.projected, [[s.b, s.d] for s in K.upper]])
    X = np.random.default_rng(2).uniform(0, 4.5, size=(200, 2))
    X = X[X[:, 1] > X[:, 0]]
    bumps = np.exp(-((X[:, None, :] - centres[None]) ** 2).sum(-1) / (2 * SIGMA**2))
    phd_ok = np.allclose(eval_phd(K, X), bumps @ np.array(lower_peaks + upper_peaks), rtol=1e-12)
    (qa, qb), nu = K.q, K.lower.nu
    first = nu[0] * qa * qb * upper_coef[0] * upper_coef[1]
    first_ok = close(first, 4.5e-2, 0.10)
    one_upper = nu[0] * (1 - qb) * qa * upper_coef[0]
    one_lower = nu[1] * (1 - qa) * (1 - qb)
    detail = (
        f"nu exact={nu_ok}, 2/pi coefficient {diag_coef:.15g}, lower peaks {np.round(lower_peaks, 4).tolist()}, "
        f"upper peaks {np.round(upper_peaks, 4).tolist()}, first term {first:.4g}; "
        f"reported only: |Z|=1 upper term {one_upper:.3g} (vs 7.74e-2), lower weight {one_lower:.3g} (vs 1.65e-4)"
    )
    ok = nu_ok and coef_ok and peaks_ok and phd_ok and first_ok
    report(2, ok, time.perf_counter() - t0, 5, detail)


def test_criterion_3_cech_reduction_equals_rank_oracle():
    t0 = time.perf_counter()
    rng = np.random.default_rng(2024)
    mismatches = 0
    for _ in range(50):
        cloud = PointCloud(rng.uniform(0, 1, size=(int(rng.integers(2, 7)), 2)))
        f = cech_filtration(cloud, max_dim=2)
        got = sorted(tuple(x) for x in persistence(f, 1))
        want = brute_persistence([(s.vertices, s.radius) for s in f.simplices], 1)
        mismatches += got != want
    report(3, mismatches == 0, time.perf_counter() - t0, 30, f"50 clouds, {mismatches} mismatches")


def _random_diagram(rng):
    n = int(rng.integers(0, 5))
    b = rng.uniform(0, 2, n)
    return PersistenceDiagram.from_pairs(zip(b, b + rng.uniform(0.01, 2, n)))


def test_criterion_4_bottleneck():
    t0 = time.perf_counter()
    rng = np.random.default_rng(77)
    mismatches = 0
    for _ in range(100):
        A, B = _random_diagram(rng), _random_diagram(rng)
        mismatches += bottleneck(A, B) != brute_bottleneck(A.points(), B.points())
    violations = 0
    for _ in range(100):
        A, B, C = (_random_diagram(rng) for _ in range(3))
        ab, ba = bottleneck(A, B), bottleneck(B, A)
        violations += not (ab == ba and ab >= 0 and bottleneck(A, A) == 0.0)
        violations += bottleneck(A, C) > ab + bottleneck(B, C) + 1e-12
        violations += (ab == 0.0) != A.same_multiset(B)
    ok = mismatches == 0 and violations == 0
    report(4, ok, time.perf_counter() - t0, 30, f"{mismatches} oracle mismatches, {violations} axiom violations")


def test_criterion_5_sampling_matches_pmf_and_intensity():
    t0 = time.perf_counter()
    K = build_kernel(CENTER, 1, SIGMA)
    rng = np.random.default_rng(5)
    n = 100_000
    # (birth, death) corners of the box around the (1, 3) feature
    box_lo, box_hi = np.array([0.5, 2.5]), np.array([1.5, 3.5])
    sizes = np.empty(n, dtype=int)
    in_box = np.empty(n)
    for i in range(n):
        P = sample_kernel(K, rng).points()
        sizes[i] = len(P)
        inside = (P >= box_lo) & (P <= box_hi)
        in_box[i] = np.count_nonzero(inside.all(axis=1))
    pmf = cardinality_pmf(K)
    observed = np.bincount(sizes, minlength=len(pmf))
    expected = n * pmf
    # pool the sparse low-cardinality cells so every expected count is >= 5
    keep = expected >= 5
    obs = np.append(observed[keep], observed[~keep].sum())
    exp = np.append(expected[keep], expected[~keep].sum())
    if exp[-1] < 5:
        obs[-2] += obs[-1]
        exp[-2] += exp[-1]
        obs, exp = obs[:-1], exp[:-1]
    p = stats.chisquare(obs, exp).pvalue
    want, _ = integrate.dblquad(
        lambda d, b: float(eval_phd(K, np.array([b, d]))), box_lo[0], box_hi[0], box_lo[1], box_hi[1], epsabs=1e-10
    )
    est, se = in_box.mean(), in_box.std(ddof=1) / math.sqrt(n)
    ok = p > 0.01 and abs(est - want) <= 3 * se
    detail = f"chi2 p={p:.3f}; box count {est:.5f} vs integrated PHD {want:.5f} ({abs(est - want) / se:.2f} SE)"
    report(5, ok, time.perf_counter() - t0, 60, detail)


def test_criterion_6_concentration():
    t0 = time.perf_counter()
    K = build_kernel(CENTER, 1, SIGMA)
    rng = np.random.default_rng(6)
    n, M = 10_000, K.max_cardinality
    dist = np.array([bottleneck(sample_kernel(K, rng), CENTER) for _ in range(n)])
    parts, ok = [], True
    for delta in (1, 2, 3):
        hit = dist < delta * SIGMA
        p, se = hit.mean(), hit.std(ddof=1) / math.sqrt(n)
        bound = ((2 * stats.norm.cdf(delta) - 1) ** 2) ** M
        ok &= p >= bound - 3 * se
        parts.append(f"delta={delta}: {p:.4f} >= {bound:.4f}")
    ok &= M == 6
    report(6, ok, time.perf_counter() - t0, 120, f"M={M}; " + "; ".join(parts))


def test_criterion_7_total_mass_by_importance_sampling():
    t0 = time.perf_counter()
    K = build_kernel(CENTER, 1, SIGMA)
    # proposal: the same centre with a wider band, so its tails cover the target
    Kp = build_kernel(CENTER, 1, SIGMA, 1.3 * SIGMA)
    rng = np.random.default_rng(7)
    n = 100_000
    by_size: dict[int, list[np.ndarray]] = {}
    for _ in range(n):
        P = sample_kernel(Kp, rng).points()
        by_size.setdefault(len(P), []).append(P)
    # the density ratio is evaluated in one batch per cardinality
    weights = np.concatenate(
        [np.atleast_1d(eval_kernel_symmetric(K, Z) / eval_kernel_symmetric(Kp, Z)) for Z in map(np.array, by_size.values())]
    )
    est, se = weights.mean(), weights.std(ddof=1) / math.sqrt(n)
    ok = abs(est - 1.0) <= 3 * se
    report(7, ok, time.perf_counter() - t0, 60, f"set integral {est:.5f} +- {se:.5f} ({abs(est - 1) / se:.2f} SE)")


@pytest.fixture(scope="module")
def circle_diagrams():
    return sample_diagrams(CIRCLE, max(n for n, _ in SCHEDULE), SEED)


def test_criterion_8_slice_convergence(circle_diagrams):
    t0 = time.perf_counter()
    slices = [[], [(0.77, 0.98)]]
    res = convergence_sweep(CIRCLE, SCHEDULE, slices, SEED, Grid(0.0, 1.2, 0.0, 1.2, 200), diagrams=circle_diagrams)
    steps = res.report["steps"]
    l1 = [s["slices"][0]["l1_to_previous"] for s in steps[1:]]
    l1_fixed = [s["slices"][1]["l1_to_previous"] for s in steps[1:]]
    mode = steps[-1]["slices"][0]["mode"]
    err = max(abs(mode[0] - 0.77), abs(mode[1] - 0.98))
    ok = all(b < a for a, b in zip(l1, l1[1:])) and err <= 0.08
    detail = (
        f"single-input slice L1 {np.round(l1, 4).tolist()}, n=1000 mode ({mode[0]:.3f}, {mode[1]:.3f}) "
        f"off by {err:.3f}; fixed-(0.77,0.98) slice L1 {np.round(l1_fixed, 4).tolist()} (reported only)"
    )
    report(8, ok, time.perf_counter() - t0, 900, detail)


def test_criterion_9_mad_convergence(circle_diagrams):
    t0 = time.perf_counter()
    origin = PersistenceDiagram.from_pairs([(0.77, 0.98)])
    res = convergence_sweep(
        CIRCLE,
        SCHEDULE,
        [],
        SEED,
        mad_origin=origin,
        mad_samples=20_000,
        mad_stratified=True,
        diagrams=circle_diagrams,
    )
    mads = [s["mad"]["estimate"] for s in res.report["steps"]]
    diffs = [abs(b - a) for a, b in zip(mads, mads[1:])]
    sigma = 1e-3
    D = circle_diagrams[0]
    single, _ = mad_estimate(fit([D], sigma), D, 2000, np.random.default_rng(9))
    ok = all(b < a for a, b in zip(diffs, diffs[1:])) and single <= 5 * sigma
    detail = (
        f"MAD {np.round(mads, 5).tolist()}, successive differences {np.round(diffs, 5).tolist()}; "
        f"single-kernel MAD at sigma=1e-3 is {single:.2e}"
    )
    report(9, ok, time.perf_counter() - t0, 300, detail)


if __name__ == "__main__":
    import sys

    diagrams = sample_diagrams(CIRCLE, max(n for n, _ in SCHEDULE), SEED)
    tests = [v for k, v in sorted(globals().items()) if k.startswith("test_criterion_")]
    failed = 0
    for t in sorted(tests, key=lambda f: int(f.__name__.split("_")[2])):
        try:
            t(diagrams) if t.__code__.co_argcount else t()
        except AssertionError:
            failed += 1
    sys.exit(1 if failed else 0)
