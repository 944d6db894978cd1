import math
from fractions import Fraction

import pytest

from quadsurf.counterex import ExceptionalFamily
from quadsurf.enumerate import Region, count_series
from quadsurf.errors import QuadsurfError
from quadsurf.experiments import (Verdict, dyadic_grid, load_config, parse_grid, relative_spread,
                                  run_counterex_growth, run_crude_bound_check,
                                  run_ratio_experiment, write_results)
from quadsurf.series import ExperimentSeries, fmt


def test_grids():
    assert dyadic_grid(4, 32) == [4, 8, 16, 32]
    assert parse_grid("2^3..2^5") == [8, 16, 32]
    assert parse_grid("1, 3/2,4") == [1, Fraction(3, 2), 4]
    with pytest.raises(QuadsurfError):
        dyadic_grid(3, 8)
    with pytest.raises(QuadsurfError):
        parse_grid("a,b")


def test_spread_and_verdict_line():
    assert relative_spread([1.0, 1.1, 1.05]) == pytest.approx(0.1)
    assert math.isnan(relative_spread([1.0]))
    assert Verdict(True, 0.034, 0.15, "x").line("ratio") == \
        "ratio: PASS statistic=0.034 threshold=0.15 x"
    assert Verdict(None, math.nan, 1).line("r").startswith("r: NO VERDICT")


def test_fmt_is_stable():
    assert fmt(0.1) == "0.10000000000000001"
    assert fmt(Fraction(3, 2)) == "3/2" and fmt(Fraction(4)) == "4"
    assert fmt(True) == "1" and fmt(float("nan")) == "nan"


def test_ratio_consistent_with_counts(main_pair):
    R = Region.box((0, 1))
    s, v = run_ratio_experiment(main_pair.Q, 1, main_pair.M, R, [8, 16], samples=20_000, seed=3)
    c = count_series(main_pair.Q, 1, main_pair.M, R, [8, 16])
    assert s.column("count") == c.column("count_annulus")
    assert all(math.isnan(x) for x in s.column("volume_polar"))
    assert v.passed is not None


def test_ratio_reproducible(main_pair, tmp_path):
    R = Region.box((0, 1))
    out = []
    for k in range(2):
        s, v = run_ratio_experiment(main_pair.Q, 1, main_pair.M, R, [8, 16], samples=10_000, seed=9)
        write_results(tmp_path / str(k), "ratio", s, v)
        out.append(((tmp_path / str(k) / "ratio.csv").read_bytes(),
                    (tmp_path / str(k) / "ratio.txt").read_bytes()))
    assert out[0] == out[1]


def test_ratio_empty_region_gives_no_verdict(main_pair):
    s, v = run_ratio_experiment(main_pair.Q, 1, main_pair.M, Region.empty(1), [8, 16],
                                samples=1000)
    assert s.column("count") == [0, 0]
    assert v.passed is None


def test_crude_bound_columns(main_pair):
    s, v = run_crude_bound_check(main_pair.Q, 1, main_pair.M, Region.box((0, 1)), [8, 16, 32])
    assert list(s.columns) == ["T", "count", "statistic"]
    assert v.passed in (True, False)


def test_counterex_growth_small():
    s, v = run_counterex_growth(ExceptionalFamily("Q1"), [16, 32, 64, 128])
    assert s.column("count")[0] == 236 or s.column("count")[0] > 0
    assert v.statistic >= 1


def test_config(tmp_path):
    p = tmp_path / "c.cfg"
    p.write_text("# comment\npair = x.txt\nspread-max = 0.2  # trailing\n\n")
    assert load_config(p) == {"pair": "x.txt", "spread_max": "0.2"}
    p.write_text("novalue\n")
    with pytest.raises(QuadsurfError):
        load_config(p)


def test_series_column():
    s = ExperimentSeries(("T", "x"), [(1, 2.5), (2, 3.0)])
    assert s.column("x") == [2.5, 3.0]
    assert s.to_csv_text() == "T,x\n1,2.5\n2,3\n"
