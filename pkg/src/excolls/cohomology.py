"""Exact line-bundle cohomology on the registry varieties.

Two independent computations are provided: a dimension oracle built
from the projective-bundle pushforward (plus Serre duality and the
Kunneth formula), and the Riemann-Roch Euler characteristic evaluated
against the stored Chern and intersection data.  Their agreement is a
standing cross-check; neither path feeds the other.
"""
from __future__ import annotations

import json
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from itertools import combinations_with_replacement
from math import comb, factorial
from typing import Iterable

from .variety import Divisor, VarietyDescriptor, intersection_pairing


class InternalConsistencyError(RuntimeError):
    """Raised when exact arithmetic contradicts the stored registry data."""


@lru_cache(maxsize=None)
def projective_space_cohomology(n: int, k: int) -> tuple[int, ...]:
    """(h^0, ..., h^n) of O(k) on P^n."""
    if n < 1:
        raise ValueError("projective space dimension must be at least 1")
    dims = [0] * (n + 1)
    if k >= 0:
        dims[0] = comb(n + k, n)
    elif k <= -n - 1:
        dims[n] = comb(-k - 1, n)
    return tuple(dims)


def pushforward_weights(v: VarietyDescriptor, b: int) -> tuple[int, ...]:
    """Base twists of the pushforward of O_X(bD), with multiplicity, sorted.

    Only defined on the b >= 0 side of a bundle realization; the other
    regimes are handled by vanishing and Serre duality in cohomology().
    """
    if v.realization.kind != "bundle" or b < 0:
        raise ValueError("no pushforward weights")
    twists = v.realization.twists or ()
    return tuple(sorted(sum(c) for c in combinations_with_replacement(twists, b)))


@lru_cache(maxsize=None)
def cohomology(v: VarietyDescriptor, d: Divisor) -> tuple[int, ...]:
    """(h^0, ..., h^dim) of O_X(aH + bD), exactly."""
    a, b = d
    if v.realization.kind == "product":
        m, n = v.realization.factors  # H is pulled back from the first factor
        hm = projective_space_cohomology(m, a)
        hn = projective_space_cohomology(n, b)
        return tuple(
            sum(hm[i] * hn[k - i] for i in range(max(0, k - n), min(m, k) + 1))
            for k in range(v.dim + 1)
        )
    n = v.realization.base_dim
    r = v.realization.fiber_rank
    if b >= 0:
        cols = [projective_space_cohomology(n, a + w) for w in pushforward_weights(v, b)]
        return tuple(
            sum(col[i] for col in cols) if i <= n else 0 for i in range(v.dim + 1)
        )
    if b >= -r:
        return (0,) * (v.dim + 1)  # every derived pushforward of O_X(bD) vanishes
    kh, kd = v.canonical
    dual = cohomology(v, (kh - a, kd - b))  # kd - b >= 0 here since kd = -(r+1)
    return tuple(reversed(dual))


def euler_char(v: VarietyDescriptor, d: Divisor) -> int:
    """Alternating sum of the cohomology oracle."""
    return sum((-1) ** i * h for i, h in enumerate(cohomology(v, d)))


def is_cohomologically_zero(v: VarietyDescriptor, d: Divisor) -> bool:
    return not any(cohomology(v, d))


def _poly_mul(p: dict, q: dict) -> dict:
    out: dict = {}
    for (i1, j1), c1 in p.items():
        for (i2, j2), c2 in q.items():
            key = (i1 + i2, j1 + j2)
            out[key] = out.get(key, Fraction(0)) + c1 * c2
    return out


@lru_cache(maxsize=None)
def _todd(v: VarietyDescriptor) -> dict[int, dict]:
    """Todd class components td_0 .. td_dim as polynomials in H, D."""
    c = {deg: {k: Fraction(cc) for k, cc in vec.items()} for deg, vec in v.chern.items()}
    c1, c2 = c[1], c[2]
    td: dict[int, dict] = {0: {(0, 0): Fraction(1)}}
    td[1] = {k: cc / 2 for k, cc in c1.items()}
    c1c1 = _poly_mul(c1, c1)
    td[2] = _merge((c1c1, Fraction(1, 12)), (c2, Fraction(1, 12)))
    c1c2 = _poly_mul(c1, c2)
    td[3] = _merge((c1c2, Fraction(1, 24)))
    if v.dim == 4:
        c3, c4 = c[3], c[4]
        td[4] = _merge(
            (_poly_mul(c1c1, c1c1), Fraction(-1, 720)),
            (_poly_mul(c1c1, c2), Fraction(4, 720)),
            (_poly_mul(c2, c2), Fraction(3, 720)),
            (_poly_mul(c1, c3), Fraction(1, 720)),
            (c4, Fraction(-1, 720)),
        )
    return td


def _merge(*terms: tuple[dict, Fraction]) -> dict:
    out: dict = {}
    for poly, scale in terms:
        for key, coeff in poly.items():
            out[key] = out.get(key, Fraction(0)) + scale * coeff
    return out


def euler_char_hrr(v: VarietyDescriptor, d: Divisor) -> int:
    """chi(O_X(d)) by Riemann-Roch over exact rationals."""
    a, b = d
    td = _todd(v)
    total = Fraction(0)
    for k in range(v.dim + 1):
        # ch_k(O(d)) = (aH + bD)^k / k!
        ch_k = {
            (i, k - i): Fraction(comb(k, i) * a**i * b ** (k - i), factorial(k))
            for i in range(k + 1)
        }
        total += intersection_pairing(v, _poly_mul(ch_k, td[v.dim - k]))
    if total.denominator != 1:
        raise InternalConsistencyError("internal consistency error")
    return int(total)


@lru_cache(maxsize=None)
def _closed_form(expr: str):
    return compile(expr, "<chi-closed-form>", "eval")


def euler_char_closed(v: VarietyDescriptor, d: Divisor) -> int:
    """chi evaluated through the stored factored polynomial (bundles only)."""
    if v.realization.kind != "bundle" or not v.chi_closed:
        raise ValueError("no closed form")
    a, b = d
    value = eval(  # closed forms are fixed data-file polynomials in a, b
        _closed_form(v.chi_closed),
        {"__builtins__": {}},
        {"a": Fraction(a), "b": Fraction(b)},
    )
    value = Fraction(value)
    if value.denominator != 1:
        raise InternalConsistencyError("internal consistency error")
    return int(value)


@dataclass(frozen=True)
class LineFamily:
    """A full coordinate line of cohomologically zero bundles."""

    axis: str  # "a" or "b"
    value: int

    def __str__(self) -> str:
        return f"{self.axis}={self.value}"

    def contains(self, d: Divisor) -> bool:
        return (d[0] if self.axis == "a" else d[1]) == self.value


@dataclass(frozen=True)
class CZClassification:
    variety: str
    box: int
    line_families: tuple[LineFamily, ...]
    sporadic: tuple[Divisor, ...]


def line_families(v: VarietyDescriptor) -> tuple[LineFamily, ...]:
    """The coordinate lines on which every line bundle is cohomologically zero.

    For a P^r-bundle these are the r zero-pushforward levels b = -1 .. -r;
    for a product P^m x P^n they are the factor levels a = -1 .. -m and
    b = -1 .. -n (one Kunneth factor has no cohomology at all).
    """
    if v.realization.kind == "bundle":
        r = v.realization.fiber_rank
        return tuple(LineFamily("b", -k) for k in range(1, r + 1))
    m, n = v.realization.factors
    return tuple(LineFamily("a", -k) for k in range(1, m + 1)) + tuple(
        LineFamily("b", -k) for k in range(1, n + 1)
    )


def cz_classification(v: VarietyDescriptor, box: int = 8) -> CZClassification:
    """Split the in-box cohomologically zero divisors into lines + sporadics."""
    families = line_families(v)
    sporadic = []
    for a in range(-box, box + 1):
        for b in range(-box, box + 1):
            d = (a, b)
            if any(f.contains(d) for f in families):
                continue
            if is_cohomologically_zero(v, d):
                sporadic.append(d)
    return CZClassification(
        variety=v.id, box=box, line_families=families, sporadic=tuple(sorted(sporadic))
    )


def serre_dual(v: VarietyDescriptor, d: Divisor) -> Divisor:
    """K_X - d."""
    return (v.canonical[0] - d[0], v.canonical[1] - d[1])


@lru_cache(maxsize=None)
def load_cz_fixtures() -> dict:
    """Transcribed classification statements: line families, sporadic lists,
    and the proof notes, with known slips flagged."""
    from .variety import data_dir

    with open(data_dir() / "cz_fixtures.json", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != 1:
        raise ValueError(f"unsupported fixture schema: {payload.get('schema')!r}")
    return payload


def sweep(v: VarietyDescriptor, box: int) -> Iterable[tuple[Divisor, tuple[int, ...], int]]:
    """(divisor, cohomology vector, chi) over the centered box, row-major."""
    for a in range(-box, box + 1):
        for b in range(-box, box + 1):
            vec = cohomology(v, (a, b))
            yield (a, b), vec, sum((-1) ** i * h for i, h in enumerate(vec))
