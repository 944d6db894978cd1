import pytest

from quadsurf.cli import main


def run(capsys, *args):
    rc = main([str(a) for a in args])
    out = capsys.readouterr()
    return rc, out.out, out.err


def test_classify_main(capsys, fixture_path):
    rc, out, _ = run(capsys, "classify", "--pair", fixture_path("main_pair"))
    assert rc == 0
    assert out == ("regime: MainTheorem\nconditions: 1 1 1\nkernel signature: (3,1)\n"
                   "witness: WITNESSED\n")


def test_classify_others(capsys, fixture_path):
    _, out, _ = run(capsys, "classify", "--pair", fixture_path("exceptional_21"))
    assert out.startswith("regime: Exceptional21\n")
    _, out, _ = run(capsys, "classify", "--pair", fixture_path("q1"))
    assert out.startswith("regime: Invalid\n") and "reason:" in out


def test_count(capsys, fixture_path):
    rc, out, _ = run(capsys, "count", "--pair", fixture_path("q1"), "--T", 1)
    assert (rc, out) == (0, "4\n")
    rc, out, _ = run(capsys, "count", "--pair", fixture_path("main_pair"), "--region", "0:1",
                     "--grid", "4,8", "--threads", 1)
    assert rc == 0
    assert out.splitlines()[:3] == ["T,count_ball,count_annulus,seconds", "4,52,36,0", "8,159,107,0"]


def test_volume_polar(capsys, fixture_path):
    rc, out, _ = run(capsys, "volume", "--pair", fixture_path("canonical_31"), "--region", "0:1",
                     "--T", 4, "--method", "polar")
    assert rc == 0
    T, v, e = out.splitlines()[1].split(",")
    assert T == "4" and float(v) > 0 and e == "0"


def test_ratio_writes_files(capsys, fixture_path, tmp_path):
    rc, out, _ = run(capsys, "ratio", "--pair", fixture_path("main_pair"), "--region", "0:1",
                     "--grid", "8,16", "--samples", 5000, "--out", tmp_path, "--threads", 1)
    assert rc == 0 and out.startswith("ratio: ")
    assert (tmp_path / "ratio.csv").exists() and (tmp_path / "ratio.txt").exists()


def test_config_and_override(capsys, fixture_path, tmp_path):
    cfg = tmp_path / "run.cfg"
    cfg.write_text(f"pair = {fixture_path('q1')}\nT = 3\n")
    rc, out, _ = run(capsys, "count", "--config", cfg, "--T", 1)
    assert (rc, out) == (0, "4\n")
    cfg.write_text("colour = red\n")
    rc, _, err = run(capsys, "count", "--config", cfg)
    assert rc == 1 and "unknown config keys" in err


def test_counterex_band(capsys):
    rc, out, _ = run(capsys, "counterex", "--family", "Q1", "--band-T", 64)
    assert rc == 0
    assert out == "band check T=64: points=464 violations=0 sharp_violations=0\n"


@pytest.mark.parametrize("args", [
    [],
    ["bogus"],
    ["count", "--pair", "/nonexistent/pair.txt", "--T", "1"],
    ["count"],
    ["count", "--pair", "PAIR", "--T", "x"],
    ["ratio", "--pair", "PAIR", "--grid", "8,16"],
    ["volume", "--pair", "PAIR", "--T", "4", "--method", "nope", "--region", "0:1"],
])
def test_invalid_input_exit_1(capsys, fixture_path, args):
    args = [str(fixture_path("main_pair")) if a == "PAIR" else a for a in args]
    rc, _, err = run(capsys, *args)
    assert rc == 1 and err


def test_zero_samples_rejected(capsys, fixture_path):
    rc, _, err = run(capsys, "nondiv", "--pair", fixture_path("main_pair"), "--samples", 0)
    assert rc == 1 and "--samples" in err


def test_budget_exit_2(capsys, fixture_path, monkeypatch):
    import quadsurf.enumerate as en
    from quadsurf.errors import BudgetExceeded

    def boom(*a, **k):
        raise BudgetExceeded("too many points")
    monkeypatch.setattr(en, "count_points", boom)
    rc, _, err = run(capsys, "count", "--pair", fixture_path("q1"), "--T", 1)
    assert rc == 2 and "budget exceeded" in err
