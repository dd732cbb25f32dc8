"""Re-derive every stored registry field from the realization alone.

The oracle below rebuilds the Chow ring of each fibration with sympy and
recomputes the canonical class, the full intersection table, the Chern
classes of the tangent bundle and the closed Euler characteristic forms,
so a silent edit of the data file cannot survive the suite.
"""
from __future__ import annotations

import json
from dataclasses import replace
from itertools import combinations, combinations_with_replacement

import pytest
import sympy as sp

from excolls import (
    data_dir,
    divisor_power_pairing,
    dump_registry,
    euler_char,
    euler_char_closed,
    euler_char_hrr,
    intersection_number,
    intersection_pairing,
    registry,
    variety,
)

H, D, a, b = sp.symbols("H D a b")

EXPECTED_ORDER = (
    ("PP2_Om1_O1", "cl1", 3, 6),
    ("P2xP1", "cl2", 3, 6),
    ("PP3_O_O3", "cl3", 4, 8),
    ("PP3_O_O2", "cl4", 4, 8),
    ("PP3_O_O1", "cl5", 4, 8),
    ("P1xP3", "cl6", 4, 8),
    ("PP1_O3_O1", "cl7", 4, 8),
    ("PP2_O_O_O2", "cl8", 4, 9),
    ("PP2_O_O_O1", "cl9", 4, 9),
    ("PP2_O_O1_O1", "cl10", 4, 9),
    ("P2xP2", "cl11", 4, 9),
)


class RingOracle:
    """Chow ring of one realization, built from scratch.

    For a bundle P(O(t_0) + ... + O(t_r)) over P^n the ring is
    Z[H, D] / (H^(n+1), prod_j (D - t_j H)) with H^n D^r = 1; for a
    product P^m x P^n it is Z[H, D] / (H^(m+1), D^(n+1)) with H^m D^n = 1.
    """

    def __init__(self, v) -> None:
        rz = v.realization
        self.dim = v.dim
        if rz.kind == "bundle":
            self.h_top, self.d_top = rz.base_dim, rz.fiber_rank
            rel = sp.expand(sp.prod(D - t * H for t in rz.twists))
            # rewrite D^(r+1) as lower D-powers
            self.lower = sp.expand(D ** (self.d_top + 1) - rel)
            self.total = sp.expand(
                (1 + H) ** (rz.base_dim + 1)
                * sp.prod(1 + D - t * H for t in rz.twists)
            )
        else:
            m, n = rz.factors
            self.h_top, self.d_top = m, n
            self.lower = sp.Integer(0)  # D^(n+1) = 0 outright
            self.total = sp.expand((1 + H) ** (m + 1) * (1 + D) ** (n + 1))

    def reduce(self, expr):
        e = sp.expand(expr)
        while e != 0 and sp.Poly(e, D).degree() > self.d_top:
            e = sp.expand(
                sum(
                    c * D**j
                    if j <= self.d_top
                    else c * D ** (j - self.d_top - 1) * self.lower
                    for (j,), c in sp.Poly(e, D).terms()
                )
            )
        if e == 0:
            return sp.Integer(0)
        return sp.expand(
            sum(c * H**i for (i,), c in sp.Poly(e, H).terms() if i <= self.h_top)
        )

    def integrate(self, expr) -> int:
        e = self.reduce(expr)
        if e == 0:
            return 0
        coeff = sp.Poly(e, H, D).coeff_monomial(H**self.h_top * D**self.d_top)
        return int(coeff)

    def chern(self) -> dict[int, dict[tuple[int, int], int]]:
        reduced = self.reduce(self.total)
        out: dict[int, dict[tuple[int, int], int]] = {}
        for (i, j), c in sp.Poly(reduced, H, D).terms():
            if 1 <= i + j <= self.dim:
                out.setdefault(i + j, {})[(i, j)] = int(c)
        return out


def _binom_poly(n: int, k):
    """chi(P^n, O(k)) = C(k+n, n) as a polynomial, valid for every integer k."""
    return sp.prod(k + i for i in range(1, n + 1)) / sp.factorial(n)


@pytest.fixture(scope="module", params=[rec[1] for rec in EXPECTED_ORDER])
def v(request):
    return variety(request.param)


@pytest.fixture(scope="module")
def oracle(v):
    return RingOracle(v)


def test_registry_order_and_shape() -> None:
    got = tuple((v.id, v.cl, v.dim, v.max_length) for v in registry())
    assert got == EXPECTED_ORDER
    assert all(v.display for v in registry())


def test_lookup_by_id_and_class_label() -> None:
    assert variety("P2xP2") is variety("cl11")
    assert variety("P2xP2").dim == 4
    assert variety("P2xP2").max_length == 9
    with pytest.raises(KeyError, match="unknown variety id: nope"):
        variety("nope")


def test_every_fibration_has_base_on_h_or_d(v) -> None:
    # the cohomology oracle reads the H coordinate as the base twist
    if v.realization.kind == "bundle":
        assert v.realization.base_class == "H"
    else:
        assert len(v.alt_realizations) == 2
        assert {rz.base_class for rz in v.alt_realizations} == {"H", "D"}
        assert all(set(rz.twists) == {0} for rz in v.alt_realizations)
    for rz in v.bundle_realizations:
        assert (rz.base_dim + 1) * (rz.fiber_rank + 1) == v.max_length


def test_max_length_is_k_theory_rank(v) -> None:
    rz = v.realization
    if rz.kind == "bundle":
        assert v.max_length == (rz.base_dim + 1) * (rz.fiber_rank + 1)
    else:
        m, n = rz.factors
        assert v.max_length == (m + 1) * (n + 1)


def test_canonical_class_rederived(v) -> None:
    rz = v.realization
    if rz.kind == "bundle":
        expected = (
            -(rz.base_dim + 1) + sum(rz.twists),
            -(rz.fiber_rank + 1),
        )
    else:
        m, n = rz.factors
        expected = (-(m + 1), -(n + 1))
    assert v.canonical == expected


def test_intersection_table_rederived(v, oracle) -> None:
    expected_keys = {(i, v.dim - i) for i in range(v.dim + 1)}
    assert set(v.intersections) == expected_keys
    for (i, j), stored in v.intersections.items():
        assert stored == oracle.integrate(H**i * D**j), (v.id, i, j)


def test_chern_classes_rederived(v, oracle) -> None:
    assert oracle.chern() == {deg: dict(vec) for deg, vec in v.chern.items()}


def test_chi_closed_rederived(v) -> None:
    closed = sp.sympify(v.chi_closed)
    rz = v.realization
    if rz.kind == "bundle":
        n = rz.base_dim
        for bb in range(0, 4):  # weight multiset depends on the fiber degree
            weights = [
                sum(c) for c in combinations_with_replacement(rz.twists, bb)
            ] or [0]
            push = sum(_binom_poly(n, a + w) for w in weights)
            assert sp.expand(closed.subs(b, bb) - push) == 0, (v.id, bb)
    else:
        m, n = rz.factors
        assert sp.expand(closed - _binom_poly(m, a) * _binom_poly(n, b)) == 0


def test_chi_closed_serre_symmetric(v) -> None:
    closed = sp.sympify(v.chi_closed)
    kh, kd = v.canonical
    dual = closed.subs({a: kh - a, b: kd - b}, simultaneous=True)
    assert sp.expand(dual - (-1) ** v.dim * closed) == 0


def test_structure_sheaf_euler_characteristic_is_one(v) -> None:
    assert euler_char(v, (0, 0)) == 1
    assert euler_char_hrr(v, (0, 0)) == 1
    if v.realization.kind == "bundle":
        assert euler_char_closed(v, (0, 0)) == 1


def test_flagged_fields_record_genuine_misprints() -> None:
    flagged = {v.id: v.flags for v in registry() if v.flags}
    assert set(flagged) == {"PP3_O_O3", "PP3_O_O1"}
    assert [f["field"] for f in flagged["PP3_O_O3"]] == [
        "chern.c2",
        "chern_total_display",
    ]
    assert [f["field"] for f in flagged["PP3_O_O1"]] == ["chi_closed"]

    v3 = variety("PP3_O_O3")
    oracle = RingOracle(v3)
    c2 = sum(c * H**i * D**j for (i, j), c in v3.chern[2].items())
    for flag in v3.flags:
        printed = sp.sympify(flag["printed"])
        corrected = sp.sympify(flag["corrected"])
        if flag["field"] == "chern.c2":
            assert sp.expand(oracle.reduce(printed) - c2) != 0
            assert sp.expand(oracle.reduce(corrected) - c2) == 0
        else:  # total class display: compare before any ring reduction
            assert sp.expand(printed - oracle.total) != 0
            assert sp.expand(corrected - oracle.total) == 0

    v5 = variety("PP3_O_O1")
    (flag,) = v5.flags
    assert flag["corrected"] == v5.chi_closed
    printed = sp.sympify(flag["printed"])
    deviations = [
        (aa, bb)
        for aa in range(-4, 5)
        for bb in range(-4, 5)
        if printed.subs({a: aa, b: bb}) != euler_char(v5, (aa, bb))
    ]
    assert deviations, "flagged closed form actually matches the oracle"


def test_wrong_total_degree_rejected(v) -> None:
    with pytest.raises(ValueError, match="wrong total degree"):
        intersection_number(v, v.dim, 1)
    with pytest.raises(ValueError, match="wrong total degree"):
        intersection_number(v, -1, v.dim + 1)
    with pytest.raises(ValueError, match="wrong total degree"):
        intersection_pairing(v, {(1, v.dim): 1})
    with pytest.raises(ValueError, match="wrong total degree"):
        divisor_power_pairing(v, (1, 1), v.dim - 1)


def test_divisor_power_pairing_matches_ring_oracle(v, oracle) -> None:
    for d in ((1, 1), (2, -1), (-3, 2), (0, 1), (1, 0)):
        expected = oracle.integrate((d[0] * H + d[1] * D) ** v.dim)
        assert divisor_power_pairing(v, d, v.dim) == expected, (v.id, d)


def test_dump_registry_round_trips_data_file() -> None:
    with open(data_dir() / "registry.json", encoding="utf-8") as fh:
        assert dump_registry() == json.load(fh)


def test_descriptors_are_stable_singletons() -> None:
    # lookups must return the same object so lru caches key correctly
    assert variety("cl1") is variety("PP2_Om1_O1")
    assert registry() is registry()
