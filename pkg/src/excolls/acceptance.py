"""Reproduction suite: eight check groups over the whole pipeline.

Each criterion emits one PASS/FAIL line plus detail lines.  Comparisons
against the transcribed reference lists are exact; where the published
lists are known to disagree with the recomputed ground truth, the
criterion fails honestly and the details name every divergence.
Runtime budgets (single machine): 1 (<1 s), 2 (<5 s), 3 (<5 s),
5 (<10 min), 6 (<2 min), 7 (<15 min), 8 (<1 s).
"""
from __future__ import annotations

import random
import time
from dataclasses import dataclass
from typing import Callable, Iterable

from .classify import (
    compare_table,
    deviating_types,
    enumerate_maximal,
    load_tables,
    match_templates,
    template_instances,
)
from .cohomology import (
    cohomology,
    cz_classification,
    euler_char,
    euler_char_closed,
    euler_char_hrr,
    load_cz_fixtures,
    serre_dual,
)
from .mutation import (
    NotFound,
    check_certificate,
    load_chains,
    reachable_component,
    same_component,
    verify_fullness,
    _anchor,
)
from .classify import _cz_box
from .variety import registry, variety

SERRE_TEST_SEED = 20240817

# Verbatim-vs-working template divergences that the reference text itself
# leaves unresolved (malformed or self-inconsistent entries).  Divergences
# beyond this list fail criterion 5.
ALLOWED_VERBATIM_DIVERGENCES = frozenset(
    {
        "cl3/(3)",
        "cl11/(47)",
        "cl11/(48)",
        "cl11/(64)",
        "cl11/(65)",
        "cl11/(66)",
        "cl11/(292)",
    }
)


@dataclass(frozen=True)
class CriterionResult:
    number: int
    name: str
    passed: bool
    runtime: float
    details: tuple[str, ...]

    def line(self) -> str:
        status = "PASS" if self.passed else "FAIL"
        return f"criterion {self.number} ({self.name}): {status}"


def criterion_1() -> CriterionResult:
    """chi(O) = 1 on every variety, through Riemann-Roch."""
    t0 = time.time()
    details = []
    passed = True
    for v in registry():
        got = euler_char_hrr(v, (0, 0))
        if got != 1:
            passed = False
            details.append(f"{v.id}: chi(O) = {got}, expected 1")
    if passed:
        details.append("chi(O) = 1 on all 11 varieties")
    return CriterionResult(1, "chi-identity", passed, time.time() - t0, tuple(details))


def criterion_2() -> CriterionResult:
    """Dimension oracle, Riemann-Roch, and closed form agree on [-8,8]^2."""
    t0 = time.time()
    details = []
    passed = True
    for v in registry():
        bad = 0
        for a in range(-8, 9):
            for b in range(-8, 9):
                d = (a, b)
                chi = euler_char(v, d)
                if chi != euler_char_hrr(v, d):
                    bad += 1
                elif v.realization.kind == "bundle" and chi != euler_char_closed(v, d):
                    bad += 1
        if bad:
            passed = False
            details.append(f"{v.id}: {bad} points disagree")
    if passed:
        details.append("oracle = Riemann-Roch = closed form on 289 points x 11 varieties")
    return CriterionResult(
        2, "cohomology-oracle-agreement", passed, time.time() - t0, tuple(details)
    )


def _fmt_points(pts: Iterable[tuple[int, int]]) -> str:
    return ", ".join(f"({a},{b})" for a, b in sorted(pts))


def criterion_3() -> CriterionResult:
    """Vanishing classification equals the published lists exactly.

    The oracle's line families must match, and the sporadic sets must equal
    the printed lists with nothing extra and nothing absent.  Four of the
    published classifications omit points the oracle finds, so this
    criterion fails and the details name every omitted point.
    """
    t0 = time.time()
    fixtures = load_cz_fixtures()
    details = []
    passed = True
    for p in fixtures["propositions"]:
        v = variety(p["variety"])
        cls = cz_classification(v, 8)
        fams = sorted(str(f) for f in cls.line_families)
        printed = {tuple(s) for s in p["sporadics_printed"]}
        got = set(cls.sporadic)
        if fams != sorted(p["families"]):
            passed = False
            details.append(f"{v.id}: line families {fams} != listed {sorted(p['families'])}")
        if got == printed:
            details.append(f"{v.id}: sporadic set exactly as listed ({len(printed)} points)")
        else:
            passed = False
            extra = got - printed
            absent = printed - got
            msg = f"{v.id}: sporadic set differs from the listed one"
            if extra:
                msg += f"; found but unlisted: {_fmt_points(extra)}"
            if absent:
                msg += f"; listed but not found: {_fmt_points(absent)}"
            details.append(msg)
    for e in fixtures["product_examples"]:
        v = variety(e["variety"])
        cls = cz_classification(v, 8)
        fams = sorted(str(f) for f in cls.line_families)
        ok = fams == sorted(e["families"]) and not cls.sporadic
        if ok:
            details.append(f"{v.id}: line families only, as stated")
        else:
            passed = False
            details.append(
                f"{v.id}: families {fams} vs {sorted(e['families'])}, "
                f"sporadics {list(cls.sporadic)}"
            )
    return CriterionResult(
        3, "vanishing-classification", passed, time.time() - t0, tuple(details)
    )


def criterion_4() -> CriterionResult:
    """Recomputed pair tables match the transcriptions cell for cell.

    Conditional cells are compared as constraint sets over the [-4,4]
    parameter grid.  Printed cells may disagree only where the fixture
    flags a transcription-time slip; every flagged cell is listed.
    """
    t0 = time.time()
    details = []
    passed = True
    for fx in load_tables():
        cmpr = compare_table(fx, 4)
        fams = {i: f.label for i, f in enumerate(fx.families)}
        flags = {
            (fams[c.row], fams[c.col]): c.flag for c in fx.cells if c.flag is not None
        }
        for key in cmpr.flagged:
            details.append(
                f"table {fx.number} cell ({key[0]}, {key[1]}): flagged {flags[key]}"
            )
        if not cmpr.clean_modulo_flags:
            passed = False
            unexpected = set(cmpr.mismatched) - set(cmpr.flagged)
            silent = set(cmpr.flagged) - set(cmpr.mismatched)
            if unexpected:
                details.append(
                    f"table {fx.number}: unflagged mismatches at {sorted(unexpected)}"
                )
            if silent:
                details.append(
                    f"table {fx.number}: flagged cells that actually match {sorted(silent)}"
                )
            if not cmpr.corrected_clean:
                details.append(f"table {fx.number}: a corrected wording still mismatches")
    flagged_total = sum(1 for line in details if "flagged" in line)
    details.append(f"{flagged_total} flagged cells across 11 tables; no unflagged mismatch")
    return CriterionResult(4, "pair-tables", passed, time.time() - t0, tuple(details))


def criterion_5() -> CriterionResult:
    """Box enumeration against the type lists, both directions.

    (a) every enumerated collection must ground some working template,
    (b) every in-box template instance must be enumerated, and
    (c) verbatim-vs-working divergences must stay within the known
    malformed entries.  (a) and (c) fail honestly: four varieties have
    enumerated collections the published lists miss, and nine further
    entries ground differently from their printed wording.
    """
    t0 = time.time()
    details = []
    passed = True
    type_counts = {
        "cl1": 3, "cl2": 17, "cl3": 4, "cl4": 4, "cl5": 12, "cl6": 66,
        "cl7": 2, "cl8": 3, "cl9": 3, "cl10": 3, "cl11": 348,
    }
    divergent: list[str] = []
    for v in registry():
        found = enumerate_maximal(v, 6)
        rep = match_templates(v, found, 6, "corrected")
        ntypes = len(template_instances(v, 6, "corrected"))
        if ntypes != type_counts[v.cl]:
            passed = False
            details.append(f"{v.id}: {ntypes} types loaded, expected {type_counts[v.cl]}")
        if rep.unmatched:
            passed = False
            details.append(
                f"{v.id}: {len(rep.unmatched)} of {len(found)} collections match no "
                f"listed type, e.g. {[list(d) for d in rep.unmatched[0]]}"
            )
        else:
            details.append(f"{v.id}: all {len(found)} collections match a listed type")
        if rep.missing:
            passed = False
            details.append(f"{v.id}: {len(rep.missing)} template instances not enumerated")
        divergent.extend(deviating_types(v, 6))
    beyond = sorted(set(divergent) - ALLOWED_VERBATIM_DIVERGENCES)
    details.append(
        f"verbatim-vs-working divergences: {sorted(divergent)}"
    )
    if beyond:
        passed = False
        details.append(
            f"{len(beyond)} divergences beyond the known malformed entries: {beyond}"
        )
    return CriterionResult(
        5, "classification-counts", passed, time.time() - t0, tuple(details)
    )


def criterion_6() -> CriterionResult:
    """No exceptional collection exceeds the rank bound inside [-4,4]^2."""
    t0 = time.time()
    details = []
    passed = True
    for v in registry():
        over = enumerate_maximal(v, 4, length=v.max_length + 1)
        if over:
            passed = False
            details.append(f"{v.id}: found length {v.max_length + 1}: {over[0]}")
    if passed:
        details.append("no collection of length max_length+1 on any variety")
    return CriterionResult(
        6, "length-maximality", passed, time.time() - t0, tuple(details)
    )


def criterion_7() -> CriterionResult:
    """A replayable certificate for an instance of every type; chain endpoints
    of the four cyclic type relations are mutually reachable."""
    t0 = time.time()
    details = []
    passed = True
    for v in registry():
        enum_by_key = {frozenset(c): c for c in enumerate_maximal(v, 6)}
        insts = template_instances(v, 6, "corrected")
        certified = 0
        failed_types = []
        for tid, inst_map in insts.items():
            got = None
            for key in inst_map:
                target = enum_by_key.get(key)
                if target is None:
                    continue
                res = verify_fullness(v, target)
                if not isinstance(res, NotFound) and check_certificate(v, res):
                    got = res
                    break
            if got is None:
                failed_types.append(tid)
            else:
                certified += 1
        if failed_types:
            passed = False
            details.append(
                f"{v.id}: no certificate for {len(failed_types)} types, "
                f"e.g. {failed_types[:4]}"
            )
        else:
            details.append(f"{v.id}: certificates for all {certified} types")
    chains = load_chains()["chains"]
    for cl in ("cl1", "cl2", "cl7", "cl8"):
        rec = chains[cl]
        v = variety(rec["variety"]) if "variety" in rec else variety(cl)
        parent, _, _, roots = reachable_component(v)
        cz = _cz_box(v, 4 * 6 + 16)
        enum_by_key = {frozenset(c): c for c in enumerate_maximal(v, 6)}
        insts = template_instances(v, 6, "corrected")
        by_root: dict = {}
        for tid, inst_map in insts.items():
            num = int(tid.split("(")[1].rstrip(")"))
            for key in sorted(inst_map, key=sorted):
                canon = _anchor(cz, key, 6)
                if canon is None or canon not in roots:
                    continue
                slot = by_root.setdefault(roots[canon], {})
                slot.setdefault(num, enum_by_key.get(key))
        for chain in rec["corrected"]:
            want = set(chain)
            homes = [r for r, types in sorted(by_root.items()) if want <= set(types)]
            label = "->".join(f"({n})" for n in chain)
            if not homes:
                passed = False
                details.append(f"{cl} chain {label}: no single component holds all types")
                continue
            slot = by_root[homes[0]]
            first, last = slot[chain[0]], slot[chain[-1]]
            if first is None or last is None or not same_component(v, first, last):
                passed = False
                details.append(f"{cl} chain {label}: endpoints not mutually reachable")
            else:
                details.append(
                    f"{cl} chain {label}: all types share a mutation component; "
                    f"endpoints mutually reachable"
                )
    return CriterionResult(
        7, "fullness-certificates", passed, time.time() - t0, tuple(details)
    )


def criterion_8() -> CriterionResult:
    """Serre duality on 500 seeded random (variety, divisor) samples."""
    t0 = time.time()
    rng = random.Random(SERRE_TEST_SEED)
    vs = registry()
    passed = True
    details = []
    for _ in range(500):
        v = vs[rng.randrange(len(vs))]
        d = (rng.randint(-8, 8), rng.randint(-8, 8))
        lhs = cohomology(v, d)
        rhs = tuple(reversed(cohomology(v, serre_dual(v, d))))
        if lhs != rhs:
            passed = False
            details.append(f"{v.id} {d}: {lhs} != reversed dual {rhs}")
    if passed:
        details.append("500 samples, all dual pairs agree")
    return CriterionResult(
        8, "serre-duality", passed, time.time() - t0, tuple(details)
    )


CRITERIA: tuple[Callable[[], CriterionResult], ...] = (
    criterion_1,
    criterion_2,
    criterion_3,
    criterion_4,
    criterion_5,
    criterion_6,
    criterion_7,
    criterion_8,
)


def run_all() -> tuple[CriterionResult, ...]:
    return tuple(fn() for fn in CRITERIA)


def render(
    results: Iterable[CriterionResult], verbose: bool = True, timings: bool = True
) -> str:
    lines = []
    results = list(results)
    for r in results:
        lines.append(r.line())
        if verbose:
            for d in r.details:
                lines.append(f"    {d}")
            if timings:
                lines.append(f"    [{r.runtime:.2f}s]")
    npass = sum(1 for r in results if r.passed)
    lines.append(f"{npass} of {len(results)} criteria pass")
    return "\n".join(lines)
