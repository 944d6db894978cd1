"""End-to-end runs: count vs volume, crude bounds, non-divergence, exceptional growth.

Each run returns an :class:`ExperimentSeries` plus a verdict.  Thresholds
are parameters (and config keys) rather than constants.
"""
from __future__ import annotations

import hashlib
import math
import warnings
from dataclasses import dataclass, field
from fractions import Fraction
from pathlib import Path

import numpy as np

from . import __version__
from .bumps import PlateauBump
from .counterex import ExceptionalFamily, growth_fit, s_count
from .dynamics import (CompactSampler, DiagonalFlow, j_approximation, spherical_alpha_average,
                       surface_vector)
from .enumerate import Annulus, Region, count_series
from .errors import QuadsurfError
from .forms import LinearMap, QuadraticForm, Regime, canonicalize_pair, classify_pair
from .measure import PolarData, polar_volume, shell_volume_mc
from .series import ExperimentSeries, atomic_write, fmt


@dataclass
class Verdict:
    passed: bool | None          # None: not enough data for a verdict
    statistic: float
    threshold: float
    detail: str = ""
    extra: dict = field(default_factory=dict)

    def line(self, name: str) -> str:
        state = {True: "PASS", False: "FAIL", None: "NO VERDICT"}[self.passed]
        return f"{name}: {state} statistic={self.statistic:.6g} threshold={self.threshold:.6g} {self.detail}".rstrip()


def spec_hash(text: str) -> str:
    return hashlib.sha256(text.encode()).hexdigest()[:16]


def dyadic_grid(lo: int, hi: int) -> list[int]:
    """Powers of two from lo to hi inclusive (both must be powers of two)."""
    if lo < 1 or hi < lo or lo & (lo - 1) or hi & (hi - 1):
        raise QuadsurfError("dyadic grid bounds must be powers of two with lo <= hi")
    out, T = [], lo
    while T <= hi:
        out.append(T)
        T *= 2
    return out


def parse_grid(text: str) -> list[Fraction]:
    """``2^5..2^8`` (dyadic) or a comma list ``1,2,4``."""
    text = text.strip()
    if ".." in text:
        lo, hi = (part.strip() for part in text.split(".."))

        def val(x):
            if "^" in x:
                b, e = x.split("^")
                return int(b) ** int(e)
            return int(x)
        return [Fraction(T) for T in dyadic_grid(val(lo), val(hi))]
    try:
        return [Fraction(x.strip()) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise QuadsurfError(f"bad grid {text!r}") from exc


def relative_spread(xs) -> float:
    xs = [x for x in xs if x == x]
    if len(xs) < 2:
        return math.nan
    return max(xs) / min(xs) - 1


# ---------------------------------------------------------------------------
# count / volume
# ---------------------------------------------------------------------------

def run_ratio_experiment(Q: QuadraticForm, a, M: LinearMap, R: Region, grid, *,
                         h: float = 0.02, samples: int = 1_000_000, seed: int = 0,
                         threads: int = 1, spread_max: float = 0.15, tail: int = 3,
                         polar: bool | None = None):
    """Per dyadic shell (T/2, T]: exact count, shell volume, ratio.

    The verdict is the relative spread max/min - 1 of the ratio over the
    last ``tail`` shells.  The polar closed form is added when the pair is
    canonical (orthogonal g) or when ``polar`` is forced.
    """
    pc = classify_pair(Q, M, a)
    if pc.regime is not Regime.MAIN:
        warnings.warn(f"pair regime is {pc.regime.value}, not MainTheorem", stacklevel=2)
    grid = sorted(Fraction(T) for T in grid)
    counts = count_series(Q, a, M, R, grid, threads=threads)
    pdata = None
    if polar is not False and pc.regime is not Regime.INVALID:
        try:
            cf = canonicalize_pair(Q, M)
            if np.allclose(cf.row_scale, 1):
                pdata = PolarData.from_canonical(cf, a)
        except QuadsurfError:
            if polar:
                raise
    rows = []
    for i, (T, row) in enumerate(zip(grid, counts.rows)):
        count = row[2]
        ann = Annulus.dyadic(T)
        if R.boxes:
            vol = shell_volume_mc(Q, a, M, R, ann, h=h, n=samples, seed=seed + i)
            v, e = vol.value, vol.stderr
        else:
            v, e = 0.0, 0.0
        pv = polar_volume(pdata, R, ann).value if (pdata is not None and R.boxes) else math.nan
        ratio = count / v if v > 0 else math.nan
        rows.append((row[0], count, v, e, pv, ratio))
    series = ExperimentSeries(("T", "count", "volume", "stderr", "volume_polar", "ratio"), rows,
                              meta={"regime": pc.regime.value, "seed": seed, "h": h,
                                    "samples": samples, "version": __version__})
    ratios = [r[5] for r in rows[-tail:]]
    spread = relative_spread(ratios)
    if len(rows) < 2 or spread != spread:
        verdict = Verdict(None, spread, spread_max, "ratio undefined or single point")
    else:
        verdict = Verdict(spread <= spread_max, spread, spread_max,
                          f"over T={','.join(fmt(r[0]) for r in rows[-tail:])}")
    return series, verdict


# ---------------------------------------------------------------------------
# crude upper bounds
# ---------------------------------------------------------------------------

def run_crude_bound_check(Q: QuadraticForm, a, M: LinearMap, R: Region, grid, *,
                          part: int | None = None, threads: int = 1, band: float = 2.0):
    """sup over the grid of count(A(0,T)) / T^m (part I) or / (T^m log T) (part II).

    ``part`` defaults to I for the main regime and II otherwise.  The verdict
    is max/min of the statistic against ``band``; ``at_boundary`` flags a
    maximum at the largest T.
    """
    d, s = Q.dim, M.rows
    m = d - s - 2
    if part is None:
        part = 1 if classify_pair(Q, M, a).regime is Regime.MAIN else 2
    if part not in (1, 2):
        raise QuadsurfError("part must be 1 or 2")
    grid = sorted(Fraction(T) for T in grid)
    counts = count_series(Q, a, M, R, grid, threads=threads)
    rows = []
    for T, row in zip(grid, counts.rows):
        Tf = float(T)
        norm = Tf ** m * (math.log(Tf) if part == 2 else 1.0)
        rows.append((row[0], row[1], row[1] / norm if norm > 0 else math.nan))
    series = ExperimentSeries(("T", "count", "statistic"), rows, meta={"part": part})
    return series, _band_verdict([r[2] for r in rows], band)


def _band_verdict(stat, band: float) -> Verdict:
    stat = [x for x in stat if x == x]
    if len(stat) < 2:
        return Verdict(None, stat[0] if stat else math.nan, band, "single point")
    lo, hi = min(stat), max(stat)
    ratio = hi / lo if lo > 0 else math.inf
    at_boundary = int(np.argmax(stat)) == len(stat) - 1
    return Verdict(ratio <= band, ratio, band, f"sup={fmt(hi)} at_boundary={int(at_boundary)}",
                   {"sup": hi, "at_boundary": at_boundary})


def run_counterex_growth(fam: ExceptionalFamily, grid, *, band: float = 1.5, threads: int = 1):
    """|S_i(alpha, T, a)| and count / (T^j log T) with j = 1 (Q1, Q2) or 2 (Q3)."""
    j = 2 if fam.dim == 5 else 1
    rows = []
    for T in sorted(Fraction(T) for T in grid):
        c = s_count(fam, T, threads=threads)
        Tf = float(T)
        rows.append((T.numerator if T.denominator == 1 else Tf, c,
                     c / (Tf ** j * math.log(Tf)) if Tf > 1 else math.nan))
    series = ExperimentSeries(("T", "count", "count_over_TlogT"), rows,
                              meta={"family": fam.which.value, "alpha": str(fam.alpha), "a": str(fam.a)})
    verdict = _band_verdict([r[2] for r in rows], band)
    if len(rows) >= 4 and all(r[1] > 0 for r in rows):
        verdict.extra["fit"] = growth_fit([(r[0], r[1]) for r in rows])
    return series, verdict


# ---------------------------------------------------------------------------
# non-divergence
# ---------------------------------------------------------------------------

def run_nondivergence(B, s: int, r1: int, r2: int, t_grid, *, part: int = 1, delta: float = 1.0,
                      n: int = 200, seed: int = 0, spread_max: float = 5.0,
                      exclusion_max: float = 0.05, growth_max: float = 3.0, t_ref: float = 2.0):
    """Spherical averages S(t) of alpha^delta along a_t.

    Part I: max S / min S <= ``spread_max`` with at most ``exclusion_max``
    uncertified samples.  Part II: max over t >= 1 of S(t)/t is at most
    ``growth_max`` times its value at ``t_ref``.
    """
    d = s + r1 + r2
    ser = spherical_alpha_average(np.asarray(B, dtype=float), DiagonalFlow(d, s),
                                  CompactSampler(s, r1, r2, seed=seed), list(t_grid), delta, n)
    rows = [(t, v, e, x) for t, v, e, x in zip(ser.t_grid, ser.values, ser.stderr, ser.excluded)]
    series = ExperimentSeries(("t", "S", "stderr", "excluded"), rows,
                              meta={"part": part, "delta": delta, "n": n, "seed": seed})
    excl = max(ser.excluded)
    if part == 1:
        vals = [v for v in ser.values if v == v]
        stat = max(vals) / min(vals) if vals else math.nan
        ok = stat <= spread_max and excl <= exclusion_max
        return series, Verdict(ok, stat, spread_max, f"max_excluded={fmt(excl)}", {"series": ser})
    per = {t: v / t for t, v in zip(ser.t_grid, ser.values) if t >= 1}
    if t_ref not in per:
        raise QuadsurfError(f"t grid must contain t_ref={t_ref}")
    stat = max(per.values()) / per[t_ref]
    return series, Verdict(stat <= growth_max and excl <= exclusion_max, stat, growth_max,
                           f"max_excluded={fmt(excl)}", {"series": ser})


# ---------------------------------------------------------------------------
# the J approximation
# ---------------------------------------------------------------------------

def j_fixture(data: PolarData, r0: float = 0.5, inner: float = 0.2, outer: float = 0.4,
              ell: float = 0.5) -> PlateauBump:
    """Plateau bump centred on the surface at (ell, r0, 0, ..., 0, v_d)."""
    s, d = data.s, data.d
    head = data.head_matrix()
    ellv = np.full(s, ell)
    c = np.zeros(d)
    c[:s] = ellv
    c[s] = r0
    c[d - 1] = (data.a - float(ellv @ head @ ellv)) / (2 * r0)
    if r0 - outer <= 0:
        raise QuadsurfError("bump must lie in the half-space v_{s+1} > 0")
    return PlateauBump(tuple(c), inner, outer)


def run_j_approximation(data: PolarData, t_grid, *, r0: float = 0.5, vectors: int = 5,
                        n: int = 500, seed: int = 0, f=None):
    """Median over test vectors of the J error at each t, |v| e^-t = r0 fixed.

    The test vectors spread M0(v) across the bump and use the same random
    directions and quasi-random points at every t.  Verdict: the median
    decreases at every step of the grid.
    """
    f = f or j_fixture(data, r0)
    s = data.s
    ells = 0.5 + 0.15 * np.linspace(-1, 1, vectors)
    rows = []
    for t in t_grid:
        res = []
        for i, ell in enumerate(ells):
            v = surface_vector(data, np.full(s, ell), r0 * math.exp(t), np.random.default_rng(seed + i))
            res.append(j_approximation(f, data, v, t, n=n, seed=seed))
        errs = [r.error for r in res]
        rows.append((float(t), float(np.median(errs)), float(np.max(errs)),
                     float(np.max([r.stderr for r in res]))))
    series = ExperimentSeries(("t", "median_error", "max_error", "max_stderr"), rows,
                              meta={"r0": r0, "n": n, "seed": seed, "vectors": vectors})
    med = [r[1] for r in rows]
    if len(med) < 2:
        return series, Verdict(None, med[0] if med else math.nan, 0.0, "single point")
    worst = max(b / a if a > 0 else math.inf for a, b in zip(med, med[1:]))
    return series, Verdict(worst < 1, worst, 1.0, "largest ratio of successive medians")


# ---------------------------------------------------------------------------
# config files
# ---------------------------------------------------------------------------

def load_config(path) -> dict[str, str]:
    """``key = value`` lines; ``#`` starts a comment."""
    out = {}
    for no, raw in enumerate(Path(path).read_text().splitlines(), start=1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise QuadsurfError(f"{path}:{no}: expected key = value")
        k, v = (x.strip() for x in line.split("=", 1))
        if not k:
            raise QuadsurfError(f"{path}:{no}: empty key")
        out[k.replace("-", "_")] = v
    return out


def write_results(out_dir, name: str, series: ExperimentSeries, verdict: Verdict,
                  meta: dict | None = None) -> Path:
    """``name.csv`` plus ``name.txt`` holding the verdict and metadata."""
    out = Path(out_dir)
    series.to_csv(out / f"{name}.csv")
    lines = [verdict.line(name)]
    for k, v in sorted({**series.meta, **(meta or {})}.items()):
        lines.append(f"{k} = {v}")
    atomic_write(out / f"{name}.txt", "\n".join(lines) + "\n")
    return out / f"{name}.csv"


__all__ = ["Verdict", "spec_hash", "dyadic_grid", "parse_grid", "relative_spread",
           "run_ratio_experiment", "run_crude_bound_check", "run_counterex_growth",
           "run_nondivergence", "j_fixture", "run_j_approximation", "load_config", "write_results"]
