"""Registry of the eleven rank-two toric Fano threefolds and fourfolds.

Each descriptor fixes one coordinate realization of the variety (a
projective bundle over projective space, or a product of projective
spaces) and carries the lattice data every other module consumes: the
canonical class, the full top-degree intersection table, and the Chern
classes of the tangent bundle, all written in the basis (H, D) of the
rank-two Picard lattice.
"""
from __future__ import annotations

import json
import os
from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from math import comb
from pathlib import Path
from typing import Mapping

Divisor = tuple[int, int]

DATA_DIR_ENV = "EXCOLLS_DATA_DIR"


@dataclass(frozen=True, eq=False)
class Realization:
    """One fibration structure: P(O(e0)+...+O(er)) -> P^n, or P^m x P^n."""

    kind: str  # "bundle" | "product"
    base_dim: int | None = None
    base_class: str | None = None  # lattice coordinate pulled back from the base
    twists: tuple[int, ...] | None = None
    factors: tuple[int, int] | None = None

    @property
    def fiber_rank(self) -> int:
        """r for a P^r fiber."""
        if self.kind != "bundle":
            raise ValueError("fiber_rank is only defined for bundle realizations")
        assert self.twists is not None
        return len(self.twists) - 1

    @classmethod
    def from_record(cls, rec: Mapping) -> "Realization":
        if rec["kind"] == "bundle":
            return cls(
                kind="bundle",
                base_dim=rec["base_dim"],
                base_class=rec["base_class"],
                twists=tuple(rec["twists"]),
            )
        return cls(kind="product", factors=tuple(rec["factors"]))

    def to_record(self) -> dict:
        if self.kind == "bundle":
            return {
                "base_class": self.base_class,
                "base_dim": self.base_dim,
                "kind": "bundle",
                "twists": list(self.twists or ()),
            }
        return {"factors": list(self.factors or ()), "kind": "product"}


@dataclass(frozen=True, eq=False)
class VarietyDescriptor:
    """Immutable record of one variety in its working coordinates."""

    id: str
    cl: str
    dim: int
    max_length: int
    display: str
    realization: Realization
    alt_realizations: tuple[Realization, ...]
    stated_twists: tuple[int, ...] | None
    canonical: Divisor
    intersections: Mapping[tuple[int, int], int]  # (i, j) -> H^i.D^j, i+j = dim
    chern: Mapping[int, Mapping[tuple[int, int], int]]  # degree -> monomial -> coeff
    chi_closed: str | None
    flags: tuple[str, ...]
    notes: tuple[str, ...]

    @property
    def bundle_realizations(self) -> tuple[Realization, ...]:
        """Every fibration usable for seed generation, in a fixed order."""
        if self.realization.kind == "bundle":
            return (self.realization,)
        return self.alt_realizations

    @classmethod
    def from_record(cls, rec: Mapping) -> "VarietyDescriptor":
        def key(s: str) -> tuple[int, int]:
            i, j = s.split(",")
            return int(i), int(j)

        chern = {
            int(name[1:]): {key(k): v for k, v in vec.items()}
            for name, vec in rec["chern"].items()
        }
        return cls(
            id=rec["id"],
            cl=rec["cl"],
            dim=rec["dim"],
            max_length=rec["max_length"],
            display=rec["display"],
            realization=Realization.from_record(rec["realization"]),
            alt_realizations=tuple(
                Realization.from_record(r) for r in rec["alt_realizations"]
            ),
            stated_twists=(
                tuple(rec["stated_twists"]) if rec.get("stated_twists") else None
            ),
            canonical=tuple(rec["canonical"]),
            intersections={key(k): v for k, v in rec["intersections"].items()},
            chern=chern,
            chi_closed=rec.get("chi_closed"),
            flags=tuple(rec.get("flags", ())),
            notes=tuple(rec.get("notes", ())),
        )

    def to_record(self) -> dict:
        rec = {
            "alt_realizations": [r.to_record() for r in self.alt_realizations],
            "canonical": list(self.canonical),
            "chern": {
                f"c{deg}": {f"{i},{j}": c for (i, j), c in vec.items()}
                for deg, vec in self.chern.items()
            },
            "chi_closed": self.chi_closed,
            "cl": self.cl,
            "dim": self.dim,
            "display": self.display,
            "flags": list(self.flags),
            "id": self.id,
            "intersections": {f"{i},{j}": c for (i, j), c in self.intersections.items()},
            "max_length": self.max_length,
            "notes": list(self.notes),
            "realization": self.realization.to_record(),
        }
        if self.stated_twists is not None:
            rec["stated_twists"] = list(self.stated_twists)
        return rec


def data_dir() -> Path:
    """Directory holding registry.json, templates/, tables.json, fixtures."""
    override = os.environ.get(DATA_DIR_ENV)
    if override:
        return Path(override)
    return Path(__file__).parent / "data"


@lru_cache(maxsize=None)
def _load(path_str: str) -> tuple[VarietyDescriptor, ...]:
    with open(path_str, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != 1:
        raise ValueError(f"unsupported registry schema: {payload.get('schema')!r}")
    return tuple(VarietyDescriptor.from_record(rec) for rec in payload["varieties"])


def registry() -> tuple[VarietyDescriptor, ...]:
    """All 11 varieties, in the fixed classification order."""
    return _load(str(data_dir() / "registry.json"))


def variety(name: str) -> VarietyDescriptor:
    """Look up a descriptor by id ("P2xP1") or class label ("cl2")."""
    for v in registry():
        if name in (v.id, v.cl):
            return v
    raise KeyError(f"unknown variety id: {name}")


def dump_registry() -> dict:
    """Registry as a JSON-ready payload; round-trips the data file losslessly."""
    return {"schema": 1, "varieties": [v.to_record() for v in registry()]}


def intersection_number(v: VarietyDescriptor, i: int, j: int) -> int:
    """H^i.D^j for i + j = dim."""
    if i < 0 or j < 0 or i + j != v.dim:
        raise ValueError("wrong total degree")
    return v.intersections[(i, j)]


def intersection_pairing(
    v: VarietyDescriptor, poly: Mapping[tuple[int, int], int | Fraction]
) -> Fraction:
    """Pair a degree-dim polynomial in H, D against the intersection form."""
    total = Fraction(0)
    for (i, j), coeff in poly.items():
        if coeff == 0:
            continue
        if i < 0 or j < 0 or i + j != v.dim:
            raise ValueError("wrong total degree")
        total += Fraction(coeff) * v.intersections[(i, j)]
    return total


def divisor_power_pairing(v: VarietyDescriptor, d: Divisor, k: int) -> int:
    """(aH+bD)^k evaluated against the intersection form; requires k = dim."""
    if k != v.dim:
        raise ValueError("wrong total degree")
    a, b = d
    poly = {(i, k - i): comb(k, i) * a**i * b ** (k - i) for i in range(k + 1)}
    value = intersection_pairing(v, poly)
    assert value.denominator == 1
    return int(value)
