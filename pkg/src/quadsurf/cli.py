"""Command-line front end.

Every option can also come from ``--config FILE`` (``key = value`` lines,
keys spelled like the long options with ``_`` or ``-``); flags win.
Exit status: 0 success, 1 invalid input, 2 budget or resource limits.
"""
from __future__ import annotations

import argparse
import os
import sys
from fractions import Fraction
from pathlib import Path

from .errors import BudgetExceeded, QuadsurfError
from .field import as_fraction
from .forms import FormError, canonicalize_pair, classify_pair
from .pairio import PairFormatError, load_pair
from .series import ExperimentSeries

# name -> (default, converter, help)
_COMMON = {
    "pair": (None, str, "pair file (Q, M, a, witness directives)"),
    "a": (None, as_fraction, "level a of Q(v) = a (default: from the pair file, else 1)"),
    "region": (None, str, "region R as lo:hi[,lo:hi];... (default: no linear condition)"),
    "grid": (None, str, "T grid: 2^5..2^8 or a comma list"),
    "seed": (0, int, "random seed"),
    "samples": (None, int, "Monte Carlo sample count"),
    "out": (None, str, "output directory for CSV and verdict files"),
    "threads": (os.cpu_count() or 1, int, "worker processes"),
}

_EXTRA = {
    "count": {"T": (None, as_fraction, "ball radius T (count in A(0,T))")},
    "volume": {"T": (None, as_fraction, "shell (T/2, T]"),
               "h": (0.02, float, "shell half-width in Q"),
               "method": ("mc", str, "mc or polar")},
    "ratio": {"h": (0.02, float, "shell half-width in Q"),
              "spread_max": (0.15, float, "largest allowed relative spread of the ratio")},
    "crude": {"part": (None, int, "1 or 2 (default from the regime)"),
              "band": (2.0, float, "largest allowed max/min of the statistic")},
    "nondiv": {"part": (1, int, "1: boundedness of S(t); 2: growth of S(t)/t"),
               "delta": (1.0, float, "exponent delta"),
               "spread_max": (5.0, float, "part 1 threshold on max S / min S"),
               "growth_max": (3.0, float, "part 2 threshold relative to t = 2")},
    "counterex": {"family": ("Q1", str, "Q1, Q2 or Q3"),
                  "alpha": (Fraction(1), as_fraction, "rational alpha of L_alpha"),
                  "band": (1.5, float, "largest allowed max/min of count/(T log T)"),
                  "band_T": (None, as_fraction, "also run the band check at this T"),
                  "eps": (Fraction(1, 20), as_fraction, "band slack epsilon")},
    "japprox": {"r0": (0.5, float, "|v| e^-t held fixed"),
                "vectors": (5, int, "number of test vectors")},
}

_HELP = {
    "classify": "regime, conditions and kernel signature of a pair",
    "count": "exact point count in A(0,T) (or a series over --grid)",
    "volume": "shell volume by Monte Carlo or the polar closed form",
    "ratio": "count / volume over dyadic shells",
    "crude": "crude upper-bound statistic over a grid",
    "nondiv": "spherical averages of alpha along the flow",
    "counterex": "exceptional families: growth and band checks",
    "japprox": "J approximation error along the flow",
}


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise QuadsurfError(f"{self.prog}: {message}")


def _parser() -> argparse.ArgumentParser:
    p = _Parser(prog="quadsurf", description=__doc__.splitlines()[0])
    sub = p.add_subparsers(dest="cmd")
    for cmd, text in _HELP.items():
        sp = sub.add_parser(cmd, help=text, description=text)
        sp.add_argument("--config", help="key = value file supplying defaults")
        for name, (default, _, hlp) in {**_COMMON, **_EXTRA.get(cmd, {})}.items():
            sp.add_argument("--" + name.replace("_", "-"), dest=name, default=None,
                            help=f"{hlp} [default: {default}]")
    return p


def _settings(args) -> dict:
    cfg = {}
    if args.config:
        from .experiments import load_config
        cfg = load_config(args.config)
    table = {**_COMMON, **_EXTRA.get(args.cmd, {})}
    unknown = set(cfg) - set(table)
    if unknown:
        raise QuadsurfError(f"unknown config keys: {', '.join(sorted(unknown))}")
    out = {}
    for name, (default, conv, _) in table.items():
        raw = getattr(args, name)
        if raw is None:
            raw = cfg.get(name)
        try:
            out[name] = conv(raw) if raw is not None else default
        except (ValueError, ZeroDivisionError) as exc:
            raise QuadsurfError(f"bad value for --{name}: {raw!r}") from exc
    return out


def _samples(o, default: int) -> int:
    n = o["samples"]
    if n is None:
        return default
    if n < 1:
        raise QuadsurfError("--samples must be >= 1")
    return n


def _pair(o):
    if not o["pair"]:
        raise QuadsurfError("--pair is required")
    spec = load_pair(o["pair"])
    a = o["a"] if o["a"] is not None else spec.a
    return spec, a


def _region(o, spec):
    from .enumerate import Region
    if o["region"] is None:
        return None
    if spec.M is None:
        raise QuadsurfError("--region needs a pair with a linear map M")
    R = Region.parse(o["region"])
    if R.dim != spec.M.rows:
        raise QuadsurfError(f"region has dimension {R.dim}, M has {spec.M.rows} rows")
    return R


def _grid(o, required=True):
    from .experiments import parse_grid
    if o["grid"] is None:
        if required:
            raise QuadsurfError("--grid is required")
        return None
    return parse_grid(o["grid"])


def _emit(o, name, series: ExperimentSeries, verdict=None, meta=None):
    from .experiments import write_results
    if o["out"]:
        if verdict is None:
            series.to_csv(Path(o["out"]) / f"{name}.csv")
        else:
            write_results(o["out"], name, series, verdict, meta)
    else:
        sys.stdout.write(series.to_csv_text())
    if verdict is not None:
        print(verdict.line(name))


def cmd_classify(o):
    spec, a = _pair(o)
    if spec.M is None:
        raise QuadsurfError("classify needs a pair with a linear map M")
    pc = classify_pair(spec.Q, spec.M, a, spec.witness)
    print(f"regime: {pc.regime.value}")
    print("conditions: " + " ".join(str(int(c)) for c in pc.conds))
    if pc.kernel_signature is not None:
        ks = pc.kernel_signature
        print(f"kernel signature: ({ks.plus},{ks.minus})")
    print(f"witness: {pc.witness.value}")
    for r in pc.reasons:
        print(f"reason: {r}")


def cmd_count(o):
    from .enumerate import Annulus, count_points, count_series
    spec, a = _pair(o)
    R = _region(o, spec)
    M = spec.M if R is not None else None
    grid = _grid(o, required=o["T"] is None)
    if grid is None:
        print(count_points(spec.Q, a, Annulus.ball(o["T"]), M, R, threads=o["threads"]))
        return
    _emit(o, "count", count_series(spec.Q, a, M, R, grid, threads=o["threads"]))


def cmd_volume(o):
    from .enumerate import Annulus
    from .measure import PolarData, polar_volume, shell_volume_mc
    spec, a = _pair(o)
    R = _region(o, spec)
    grid = [o["T"]] if o["T"] is not None else _grid(o)
    rows = []
    for i, T in enumerate(grid):
        ann = Annulus.dyadic(T)
        if o["method"] == "mc":
            v = shell_volume_mc(spec.Q, a, spec.M if R is not None else None, R, ann, h=o["h"],
                                n=_samples(o, 1_000_000), seed=o["seed"] + i)
        elif o["method"] == "polar":
            if R is None:
                raise QuadsurfError("the polar method needs --region")
            v = polar_volume(PolarData.from_canonical(canonicalize_pair(spec.Q, spec.M), a), R, ann)
        else:
            raise QuadsurfError(f"unknown method {o['method']!r}")
        rows.append((T.numerator if T.denominator == 1 else float(T), v.value, v.stderr))
    _emit(o, "volume", ExperimentSeries(("T", "volume", "stderr"), rows))


def cmd_ratio(o):
    from .experiments import run_ratio_experiment
    spec, a = _pair(o)
    R = _region(o, spec)
    if R is None:
        raise QuadsurfError("ratio needs --region")
    s, v = run_ratio_experiment(spec.Q, a, spec.M, R, _grid(o), h=o["h"],
                                samples=_samples(o, 1_000_000), seed=o["seed"],
                                threads=o["threads"], spread_max=o["spread_max"])
    _emit(o, "ratio", s, v, {"pair": o["pair"], "region": o["region"]})


def cmd_crude(o):
    from .experiments import run_crude_bound_check
    spec, a = _pair(o)
    R = _region(o, spec)
    if R is None:
        raise QuadsurfError("crude needs --region")
    s, v = run_crude_bound_check(spec.Q, a, spec.M, R, _grid(o), part=o["part"],
                                 threads=o["threads"], band=o["band"])
    _emit(o, "crude", s, v, {"pair": o["pair"], "region": o["region"]})


def cmd_nondiv(o):
    from .experiments import run_nondivergence
    spec, a = _pair(o)
    cf = canonicalize_pair(spec.Q, spec.M)
    grid = [float(t) for t in _grid(o)] if o["grid"] else [float(t) for t in range(7)]
    s, v = run_nondivergence(cf.g, cf.s, cf.r1, cf.r2, grid, part=o["part"], delta=o["delta"],
                             n=_samples(o, 200), seed=o["seed"], spread_max=o["spread_max"],
                             growth_max=o["growth_max"])
    _emit(o, "nondiv", s, v, {"pair": o["pair"]})


def cmd_counterex(o):
    from .counterex import ExceptionalFamily, band_containment_check
    from .experiments import run_counterex_growth
    fam = ExceptionalFamily(o["family"].upper(), o["alpha"], o["a"] if o["a"] is not None else 1)
    grid = _grid(o, required=o["band_T"] is None)
    if grid is not None:
        s, v = run_counterex_growth(fam, grid, band=o["band"], threads=o["threads"])
        _emit(o, "counterex", s, v, {"family": fam.which.value})
    if o["band_T"] is not None:
        r = band_containment_check(fam, o["band_T"], o["eps"])
        print(f"band check T={r.T}: points={r.points} violations={r.violations} "
              f"sharp_violations={r.sharp_violations}")


def cmd_japprox(o):
    from .experiments import run_j_approximation
    from .measure import PolarData
    spec, a = _pair(o)
    cf = canonicalize_pair(spec.Q, spec.M)
    data = PolarData(cf.s, cf.r1, cf.r2, float(a), tuple(map(tuple, cf.head)))
    grid = [float(t) for t in _grid(o)] if o["grid"] else [2.0, 4.0]
    s, v = run_j_approximation(data, grid, r0=o["r0"], vectors=o["vectors"],
                               n=_samples(o, 500), seed=o["seed"])
    _emit(o, "japprox", s, v, {"pair": o["pair"]})


_COMMANDS = {"classify": cmd_classify, "count": cmd_count, "volume": cmd_volume,
             "ratio": cmd_ratio, "crude": cmd_crude, "nondiv": cmd_nondiv,
             "counterex": cmd_counterex, "japprox": cmd_japprox}


def main(argv=None) -> int:
    argv = sys.argv[1:] if argv is None else list(argv)
    parser = _parser()
    if not argv:
        parser.print_usage(sys.stderr)
        return 1
    try:
        args = parser.parse_args(argv)
        if args.cmd is None:
            parser.print_usage(sys.stderr)
            return 1
        _COMMANDS[args.cmd](_settings(args))
    except BudgetExceeded as exc:
        print(f"quadsurf: budget exceeded: {exc}", file=sys.stderr)
        return 2
    except MemoryError:
        print("quadsurf: out of memory", file=sys.stderr)
        return 2
    except (QuadsurfError, FormError, PairFormatError, ValueError, OSError) as exc:
        print(f"quadsurf: {exc}", file=sys.stderr)
        return 1
    return 0


if __name__ == "__main__":
    sys.exit(main())
