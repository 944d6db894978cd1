import pytest

from quadsurf.pairio import PairFormatError, format_pair, load_pair, parse_pair


@pytest.mark.parametrize("name", ["main_pair", "q1", "canonical_31", "exceptional_21"])
def test_fixture_roundtrip(fixture_path, name):
    spec = load_pair(fixture_path(name))
    again = parse_pair(format_pair(spec))
    assert again.Q == spec.Q and again.M == spec.M and again.a == spec.a
    assert again.witness == spec.witness


def test_main_pair_contents(main_pair):
    assert main_pair.Q.dim == 5
    assert main_pair.M.disc == 2
    assert main_pair.a == 1
    assert main_pair.witness == (1, 0, 0, 0, 0)


@pytest.mark.parametrize("text", [
    "Q 2\n1 0\n0\n",                          # short row
    "Q 2\n1 2\n3 1\n",                        # not symmetric
    "Q 1\n1\nM 1 1 4\nsqrt4\n",               # non-squarefree D
    "Q 1\n1\nbogus 3\n",                      # unknown directive
    "a 1\n",                                  # no form
])
def test_malformed(text):
    with pytest.raises((PairFormatError, ValueError)):
        parse_pair(text)
