"""End-to-end acceptance checks, one per criterion.

Each test prints ``ACCEPTANCE <n> <name>: PASS|FAIL <details>`` (visible with
``-s`` and in the captured-output report) before asserting.
"""
import math
import time
from fractions import Fraction

import numpy as np
import pytest
from scipy.stats import special_ortho_group

from quadsurf import canonicalize_pair
from quadsurf.alpha import alpha
from quadsurf.cli import main as cli_main
from quadsurf.counterex import (ExceptionalFamily, band_containment_check, banded_count,
                                beta_exact, s_count)
from quadsurf.enumerate import (Annulus, Region, brute_force_oracle, enumerate_surface,
                                exact_violations, filter_points)
from quadsurf.experiments import (run_crude_bound_check, run_j_approximation,
                                  run_nondivergence, run_ratio_experiment)
from quadsurf.measure import PolarData, c1_constant, polar_volume, shell_volume_mc

pytestmark = pytest.mark.acceptance


def report(capsys, n, name, ok, detail):
    line = f"ACCEPTANCE {n} {name}: {'PASS' if ok else 'FAIL'} {detail}"
    with capsys.disabled():
        print("\n" + line)
    return ok


def test_1_oracle_equivalence(capsys, fixture_path):
    from quadsurf import load_pair
    t0 = time.perf_counter()
    cases = {"main_pair": [Region.box((0, 1)), Region.box((-1, 2))],
             "canonical_31": [Region.box((0, 1)), Region.box((-2, 2))],
             "exceptional_21": [Region.box((0, 1)), None],
             "q1": [Region.box((0, 0)), None]}
    bad, checked = [], 0
    for name, regions in cases.items():
        spec = load_pair(fixture_path(name))
        for T in range(1, 7):
            ann = Annulus.ball(T)
            full = enumerate_surface(spec.Q, spec.a, ann)
            for R in regions:
                M = spec.M if R is not None else None
                got = filter_points(full, spec.M, R).count if R is not None else full.count
                want = brute_force_oracle(spec.Q, spec.a, ann, M, R)
                checked += 1
                if got != want:
                    bad.append((name, T, str(R), got, want))
    dt = time.perf_counter() - t0
    ok = not bad and dt < 60
    assert report(capsys, 1, "oracle equivalence", ok,
                  f"cases={checked} mismatches={len(bad)} seconds={dt:.1f}"), bad


def test_2_exactness(capsys, main_pair):
    R = Region.box((-8, 8))
    S = enumerate_surface(main_pair.Q, 1, Annulus.ball(200), main_pair.M, R, threads=4)
    rng = np.random.default_rng(0)
    n = 10 ** 6
    assert S.count >= n
    pts = S.points[rng.choice(S.count, n, replace=False)]
    v = exact_violations(main_pair.Q, 1, pts, main_pair.M, R)
    assert report(capsys, 2, "exactness", v == 0, f"sampled={n} of {S.count} violations={v}")


def test_3_ratio_convergence(capsys, main_pair):
    t0 = time.perf_counter()
    s, verdict = run_ratio_experiment(main_pair.Q, 1, main_pair.M, Region.box((0, 1)),
                                      [64, 128, 256], samples=1_000_000, seed=1, threads=1)
    dt = time.perf_counter() - t0
    ok = bool(verdict.passed) and dt <= 600
    ratios = ", ".join(f"{r:.4f}" for r in s.column("ratio"))
    assert report(capsys, 3, "count/volume ratio", ok,
                  f"ratios=[{ratios}] spread={verdict.statistic:.4f} max=0.15 seconds={dt:.1f}")


def test_4_crude_bounds(capsys, main_pair):
    t0 = time.perf_counter()
    s, v1 = run_crude_bound_check(main_pair.Q, 1, main_pair.M, Region.box((0, 1)),
                                  [16, 32, 64, 128, 256], part=1, band=2.0)
    fam = ExceptionalFamily("Q1")
    stats = [s_count(fam, T) / (T * math.log(T)) for T in (2 ** 10, 2 ** 11, 2 ** 12)]
    band2 = max(stats) / min(stats)
    dt = time.perf_counter() - t0
    ok = bool(v1.passed) and band2 <= 1.5 and dt <= 300
    assert report(capsys, 4, "crude bounds", ok,
                  f"part I max/min={v1.statistic:.3f} (<=2); part II max/min={band2:.3f} (<=1.5) "
                  f"seconds={dt:.1f}")


def test_5_counterexample_excess(capsys):
    t0 = time.perf_counter()
    T = 2 ** 12
    fam = ExceptionalFamily("Q1")
    band = band_containment_check(fam, T)
    count = banded_count(fam, beta_exact(Fraction(1), T, 1), T, Fraction(1, 2) - band.eps, 1,
                         threads=4)
    target = T * math.log(T) ** 0.5
    dt = time.perf_counter() - t0
    ok = band.violations == 0 and count > target and dt <= 300
    assert report(capsys, 5, "counterexample excess", ok,
                  f"shell points={band.points} violations={band.violations} "
                  f"banded count={count} > T(log T)^0.5={target:.0f} seconds={dt:.1f}")


def test_6_nondivergence(capsys, main_pair, exceptional_pair):
    t0 = time.perf_counter()
    ts = [float(t) for t in range(7)]
    cf = canonicalize_pair(main_pair.Q, main_pair.M)
    s1, v1 = run_nondivergence(cf.g, cf.s, cf.r1, cf.r2, ts, part=1, delta=1.0, n=200, seed=0)
    ce = canonicalize_pair(exceptional_pair.Q, exceptional_pair.M)
    s2, v2 = run_nondivergence(ce.g, ce.s, ce.r1, ce.r2, ts, part=2, delta=1.0, n=200, seed=0)
    dt = time.perf_counter() - t0
    ok = bool(v1.passed) and bool(v2.passed) and dt <= 900
    assert report(capsys, 6, "non-divergence", ok,
                  f"(3,1) max/min S={v1.statistic:.3f} (<=5) {v1.detail}; "
                  f"(2,1) max S(t)/t relative to t=2: {v2.statistic:.3f} (<=3) seconds={dt:.1f}")


def test_7_j_approximation(capsys, canonical_pair):
    t0 = time.perf_counter()
    cf = canonicalize_pair(canonical_pair.Q, canonical_pair.M)
    data = PolarData.from_canonical(cf, 1)
    s, v = run_j_approximation(data, [2.0, 4.0], r0=0.5, vectors=5, n=500, seed=0)
    dt = time.perf_counter() - t0
    med = s.column("median_error")
    ok = med[1] < med[0] and dt <= 300
    assert report(capsys, 7, "J approximation", ok,
                  f"median error t=2: {med[0]:.3g} t=4: {med[1]:.3g} seconds={dt:.1f}")


def test_8_alpha_suite(capsys):
    t0 = time.perf_counter()
    errs = [abs(alpha(np.eye(d)) - 1) for d in range(1, 7)]
    e2 = abs(alpha(np.diag([0.5, 2.0])) - 2)
    ee = abs(alpha(np.diag([math.exp(-1), math.e])) - math.e)
    rng = np.random.default_rng(2024)
    worst = 0.0
    for _ in range(50):
        d = int(rng.integers(2, 5))
        t = rng.uniform(-1.2, 1.2, d)
        B = special_ortho_group.rvs(d, random_state=rng) @ np.diag(np.exp(t - t.mean()))
        U = np.eye(d, dtype=np.int64)
        for _ in range(10):
            i, j = rng.choice(d, 2, replace=False)
            U[i] += int(rng.integers(-2, 3)) * U[j]
        a0 = alpha(B)
        worst = max(worst, abs(alpha(B @ U) - a0) / a0,
                    abs(alpha(special_ortho_group.rvs(d, random_state=rng) @ B) - a0) / a0)
    dt = time.perf_counter() - t0
    ok = max(errs) <= 1e-12 and e2 < 1e-12 and ee < 1e-12 and worst <= 1e-9 and dt < 30
    assert report(capsys, 8, "alpha suite", ok,
                  f"Z^d err={max(errs):.1e} diag errs={e2:.1e},{ee:.1e} "
                  f"invariance err={worst:.1e} seconds={dt:.1f}")


def test_9_volume_cross_validation(capsys, canonical_pair):
    R = Region.box((0, 1))
    data = PolarData(1, 3, 1, 1.0)
    T = 40
    p = polar_volume(data, R, Annulus.dyadic(T)).value
    m = shell_volume_mc(canonical_pair.Q, 1, canonical_pair.M, R, Annulus.dyadic(T), h=0.02,
                        n=4_000_000, seed=0)
    z = abs(m.value - p) / m.stderr
    whole = polar_volume(data, R, Annulus(T / 4, T)).value
    parts = polar_volume(data, R, Annulus(T / 4, T / 2)).value + p
    add = abs(parts - whole) / whole
    c1 = abs(c1_constant(3, 1, 1, 5) - 4 * math.pi)
    ok = z <= 3 and add <= 1e-6 and c1 <= 1e-12
    assert report(capsys, 9, "volume cross-validation", ok,
                  f"T={T} polar={p:.3f} mc={m.value:.3f}+-{m.stderr:.3f} ({z:.2f} se) "
                  f"additivity={add:.1e} C1 err={c1:.1e}")


def test_10_reproducibility(capsys, fixture_path, tmp_path):
    args = ["ratio", "--pair", str(fixture_path("main_pair")), "--region", "0:1",
            "--grid", "16,32,64", "--samples", "50000", "--seed", "7", "--threads", "2"]
    blobs = []
    for k in range(2):
        out = tmp_path / f"run{k}"
        assert cli_main(args + ["--out", str(out)]) == 0
        blobs.append(((out / "ratio.csv").read_bytes(), (out / "ratio.txt").read_bytes()))
    capsys.readouterr()
    ok = blobs[0] == blobs[1]
    assert report(capsys, 10, "reproducibility", ok,
                  f"csv bytes={len(blobs[0][0])} identical={ok}")
