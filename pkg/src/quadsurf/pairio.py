"""Plain-text pair files.

Grammar (one directive per line, ``#`` starts a comment, blank lines ignored)::

    Q <d>                 followed by d rows of d rationals (p or p/q)
    M <s> <d> <D>         followed by s rows of d scalars in Q(sqrt D),
                          written p/q, r/t*sqrtD or p/q+r/t*sqrtD
    a <rational>          optional level, default 1
    witness <d ints>      optional integer point with Q(v) = a

Scalars inside a row are separated by whitespace, so a scalar itself must
not contain spaces.  ``M`` may be omitted for form-only files.
"""
from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from pathlib import Path

from .field import is_squarefree, parse_quad
from .forms import FormError, LinearMap, QuadraticForm


class PairFormatError(ValueError):
    pass


@dataclass(frozen=True)
class PairSpec:
    Q: QuadraticForm
    M: LinearMap | None = None
    a: Fraction = Fraction(1)
    witness: tuple[int, ...] | None = None


def _lines(text: str):
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if line:
            yield no, line.split()


def parse_pair(text: str) -> PairSpec:
    it = iter(list(_lines(text)))
    Q = M = witness = None
    a = Fraction(1)

    def take_rows(n, width, what):
        rows = []
        for _ in range(n):
            try:
                no, toks = next(it)
            except StopIteration:
                raise PairFormatError(f"{what}: expected {n} rows, file ended") from None
            if len(toks) != width:
                raise PairFormatError(f"line {no}: {what} row needs {width} entries, got {len(toks)}")
            rows.append((no, toks))
        return rows

    for no, toks in it:
        key = toks[0]
        try:
            if key == "Q":
                if len(toks) != 2:
                    raise PairFormatError(f"line {no}: expected 'Q <d>'")
                d = int(toks[1])
                rows = take_rows(d, d, "Q")
                Q = QuadraticForm(tuple(tuple(Fraction(t) for t in r) for _, r in rows))
            elif key == "M":
                if len(toks) != 4:
                    raise PairFormatError(f"line {no}: expected 'M <s> <d> <D>'")
                s, d, D = int(toks[1]), int(toks[2]), int(toks[3])
                if not is_squarefree(D):
                    raise PairFormatError(f"line {no}: D={D} is not squarefree")
                rows = take_rows(s, d, "M")
                M = LinearMap(tuple(tuple(parse_quad(t, D) for t in r) for _, r in rows), D)
            elif key == "a":
                if len(toks) != 2:
                    raise PairFormatError(f"line {no}: expected 'a <rational>'")
                a = Fraction(toks[1])
            elif key == "witness":
                witness = tuple(int(t) for t in toks[1:])
            else:
                raise PairFormatError(f"line {no}: unknown directive {key!r}")
        except (ValueError, ZeroDivisionError) as exc:
            if isinstance(exc, PairFormatError):
                raise
            raise PairFormatError(f"line {no}: {exc}") from exc
    if Q is None:
        raise PairFormatError("missing 'Q' block")
    if M is not None and M.cols != Q.dim:
        raise PairFormatError(f"M has {M.cols} columns but Q has dimension {Q.dim}")
    if witness is not None and len(witness) != Q.dim:
        raise PairFormatError("witness length does not match the dimension")
    return PairSpec(Q, M, a, witness)


def load_pair(path) -> PairSpec:
    return parse_pair(Path(path).read_text())


def format_pair(spec: PairSpec) -> str:
    Q = spec.Q
    out = [f"Q {Q.dim}"]
    out += [" ".join(str(x) for x in row) for row in Q.gram]
    if spec.M is not None:
        M = spec.M
        out.append(f"M {M.rows} {M.cols} {M.disc}")
        out += [" ".join(str(x) for x in row) for row in M.entries]
    if spec.a != 1:
        out.append(f"a {spec.a}")
    if spec.witness is not None:
        out.append("witness " + " ".join(map(str, spec.witness)))
    return "\n".join(out) + "\n"


__all__ = ["PairSpec", "PairFormatError", "parse_pair", "load_pair", "format_pair", "FormError"]
