"""Enumeration and classification of maximal exceptional collections.

Collections are ordered tuples of divisors.  The enumeration works on
the lattice box, prunes through the pairwise cohomologically-zero
relation, and emits each collection normalized to start at the trivial
bundle.  Matching compares the findings two ways against the shipped
parametric type lists, which carry both the published wording and a
curated working form wherever the two differ.
"""
from __future__ import annotations

import json
import re
from dataclasses import dataclass
from functools import lru_cache
from typing import Iterable, Mapping

from .cohomology import is_cohomologically_zero
from .variety import Divisor, VarietyDescriptor, data_dir, variety

Collection = tuple[Divisor, ...]


def difference_is_admissible(v: VarietyDescriptor, earlier: Divisor, later: Divisor) -> bool:
    """True when `earlier` may stand before `later` in a collection."""
    d = (earlier[0] - later[0], earlier[1] - later[1])
    return is_cohomologically_zero(v, d)


def is_exceptional_collection(v: VarietyDescriptor, c: Iterable[Divisor]) -> bool:
    """Check the no-backward-morphisms condition pairwise.

    Sign convention, pinned here and by a dedicated test: for every pair
    of positions j < i the difference D_j - D_i (EARLIER minus LATER)
    must be cohomologically zero.  Backward morphisms from the later
    member to the earlier one live in H^*(D_j - D_i); the forward
    morphisms H^*(D_i - D_j) are unconstrained.  Flipping this sign
    produces a predicate that looks plausible and corrupts every
    downstream table, so treat the direction as load-bearing.
    """
    members = [tuple(d) for d in c]
    for i in range(1, len(members)):
        for j in range(i):
            if not difference_is_admissible(v, members[j], members[i]):
                return False
    return True


@lru_cache(maxsize=None)
def _cz_box(v: VarietyDescriptor, lim: int) -> frozenset:
    return frozenset(
        (a, b)
        for a in range(-lim, lim + 1)
        for b in range(-lim, lim + 1)
        if is_cohomologically_zero(v, (a, b))
    )


def _forced_edges(v: VarietyDescriptor, members: list[Divisor]) -> dict[Divisor, set[Divisor]]:
    """u -> {w}: u must precede w (only the u-before-w order is admissible)."""
    out: dict[Divisor, set[Divisor]] = {u: set() for u in members}
    for x, u in enumerate(members):
        for w in members[x + 1 :]:
            f = difference_is_admissible(v, u, w)
            g = difference_is_admissible(v, w, u)
            if f and not g:
                out[u].add(w)
            elif g and not f:
                out[w].add(u)
    return out


def _topological_order(members: list[Divisor], forced: Mapping[Divisor, set]) -> list[Divisor]:
    """Lex-least linear extension of the forced precedence relation."""
    preds: dict[Divisor, set] = {u: set() for u in members}
    for u, succs in forced.items():
        for w in succs:
            preds[w].add(u)
    order: list[Divisor] = []
    placed: set[Divisor] = set()
    remaining = set(members)
    while remaining:
        ready = sorted(u for u in remaining if preds[u] <= placed)
        if not ready:
            raise ValueError("precedence relation is cyclic")
        order.append(ready[0])
        placed.add(ready[0])
        remaining.remove(ready[0])
    return order


@lru_cache(maxsize=None)
def enumerate_maximal(
    v: VarietyDescriptor, box: int = 6, length: int | None = None
) -> tuple[Collection, ...]:
    """All normalized maximal-length exceptional collections inside the box.

    Each result starts at (0,0) and continues in the lex-least admissible
    order of its remaining members; results are sorted lexicographically.
    Pass `length` to search for a different collection length (used by the
    length-maximality check).
    """
    want = v.max_length if length is None else length
    cz = _cz_box(v, 2 * box + 1)
    pts = [
        (a, b)
        for a in range(-box, box + 1)
        for b in range(-box, box + 1)
        if (a, b) != (0, 0) and (-a, -b) in cz  # (0,0) may stand before (a,b)
    ]
    n = len(pts)
    fwd = [0] * n  # bit j of fwd[i]: pts[i] may precede pts[j]
    comp = [0] * n  # bit j of comp[i]: the pair admits at least one order
    for i, p in enumerate(pts):
        for j, q in enumerate(pts):
            if i != j and (p[0] - q[0], p[1] - q[1]) in cz:
                fwd[i] |= 1 << j
    for i in range(n):
        for j in range(i + 1, n):
            if (fwd[i] >> j) & 1 or (fwd[j] >> i) & 1:
                comp[i] |= 1 << j
                comp[j] |= 1 << i
    need = want - 1
    found: list[Collection] = []

    def acyclic(chosen: list[int]) -> bool:
        edges: dict[int, list[int]] = {i: [] for i in chosen}
        for x, i in enumerate(chosen):
            for j in chosen[x + 1 :]:
                f, g = (fwd[i] >> j) & 1, (fwd[j] >> i) & 1
                if f and not g:
                    edges[i].append(j)
                elif g and not f:
                    edges[j].append(i)
        state: dict[int, int] = {}

        def dfs(u: int) -> bool:
            state[u] = 1
            for w in edges[u]:
                if state.get(w) == 1 or (state.get(w) is None and dfs(w)):
                    return True
            state[u] = 2
            return False

        return not any(state.get(u) is None and dfs(u) for u in chosen)

    def extend(start: int, chosen: list[int], cand: int) -> None:
        if len(chosen) == need:
            if acyclic(chosen):
                members = [pts[i] for i in chosen]
                tail = _topological_order(members, _forced_edges(v, members))
                found.append(((0, 0), *tail))
            return
        remaining = cand >> start
        i = start
        while remaining:
            if remaining & 1:
                nc = cand & comp[i]
                if (nc >> (i + 1)).bit_count() >= need - len(chosen) - 1:
                    extend(i + 1, chosen + [i], nc)
            remaining >>= 1
            i += 1

    if need >= 0:
        if need == 0:
            found.append(((0, 0),))
        else:
            extend(0, [], (1 << n) - 1)
    return tuple(sorted(found))


# ---------------------------------------------------------------------------
# parametric type lists


@dataclass(frozen=True)
class AffineMember:
    """const + sum(env[p] * unit_p): one member of a parametric collection."""

    const: Divisor
    units: tuple[tuple[str, Divisor], ...]

    def at(self, env: Mapping[str, int]) -> Divisor:
        a, b = self.const
        for p, (ua, ub) in self.units:
            a += env[p] * ua
            b += env[p] * ub
        return (a, b)

    def params(self) -> frozenset[str]:
        return frozenset(p for p, u in self.units if u != (0, 0))


@dataclass(frozen=True)
class CollectionTemplate:
    type_id: str  # e.g. "cl2/(14)"
    variety: str
    number: int
    params: tuple[str, ...]
    members: tuple[AffineMember, ...]  # curated working form, leading O omitted
    members_text: tuple[str, ...]
    printed_text: tuple[str, ...] | None  # published wording where it differs
    flags: tuple[str, ...]
    note: str | None

    @property
    def corrected(self) -> bool:
        return "corrected" in self.flags


_TERM = re.compile(r"^(-?)(\([a-d][+-]\d+\)|[a-d]|\d+)?([HD])$")


def parse_member_text(s: str) -> AffineMember:
    """Parse a printed member like '(a+1)H+2D' into an affine form."""
    compact = re.sub(r"[\s$~]|\\,", "", s)
    if not compact:
        raise ValueError("empty member expression")
    terms: list[str] = []
    depth, cur = 0, ""
    for ch in compact:
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in "+-" and depth == 0 and cur:
            terms.append(cur)
            cur = ch if ch == "-" else ""
            continue
        cur += ch
    if cur:
        terms.append(cur)
    const = [0, 0]
    units: dict[str, list[int]] = {}
    seen: set[str] = set()
    for t in terms:
        m = _TERM.match(t)
        if not m:
            raise ValueError(f"unparseable term {t!r} in {s!r}")
        sign_s, co, axis = m.groups()
        if axis in seen:
            raise ValueError(f"repeated axis {axis!r} in {s!r}")
        seen.add(axis)
        sign = -1 if sign_s == "-" else 1
        ax = 0 if axis == "H" else 1
        if co is None or co == "":
            const[ax] += sign
        elif co.isdigit():
            const[ax] += sign * int(co)
        elif len(co) == 1:
            units.setdefault(co, [0, 0])[ax] += sign
        else:
            var, off = co[1], int(co[2:-1])
            const[ax] += sign * off
            units.setdefault(var, [0, 0])[ax] += sign
    return AffineMember(
        const=(const[0], const[1]),
        units=tuple((p, (u[0], u[1])) for p, u in sorted(units.items())),
    )


@lru_cache(maxsize=None)
def load_templates(v: VarietyDescriptor) -> tuple[CollectionTemplate, ...]:
    path = data_dir() / "templates" / f"{v.id}.json"
    with open(path, encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != 1:
        raise ValueError(f"unsupported template schema: {payload.get('schema')!r}")
    out = []
    for rec in payload["types"]:
        params = tuple(rec["params"])
        members = tuple(
            AffineMember(
                const=tuple(rows[0]),
                units=tuple((p, tuple(u)) for p, u in zip(params, rows[1:])),
            )
            for rows in rec["members"]
        )
        out.append(
            CollectionTemplate(
                type_id=rec["id"],
                variety=payload["variety"],
                number=rec["number"],
                params=params,
                members=members,
                members_text=tuple(rec["members_text"]),
                printed_text=(
                    tuple(rec["printed_text"]) if "printed_text" in rec else None
                ),
                flags=tuple(rec.get("flags", ())),
                note=rec.get("note"),
            )
        )
    return tuple(out)


def verbatim_members(t: CollectionTemplate) -> tuple[AffineMember, ...] | None:
    """The published member list, parsed; None when it does not parse."""
    if t.printed_text is None:
        return t.members
    try:
        return tuple(parse_member_text(s) for s in t.printed_text)
    except ValueError:
        return None


def instantiate_template(
    t: CollectionTemplate, env: Mapping[str, int], variant: str = "corrected"
) -> Collection:
    """Ground a template; the normalized leading (0,0) member is prepended."""
    members = t.members if variant == "corrected" else verbatim_members(t)
    if members is None:
        raise ValueError(f"{t.type_id} has no parseable {variant} form")
    return ((0, 0), *(m.at(env) for m in members))


def _instances_of(
    members: tuple[AffineMember, ...], box: int
) -> dict[frozenset, tuple[tuple[str, int], ...]]:
    """All in-box groundings, keyed by member set (degenerate ones skipped)."""
    params = sorted(set().union(frozenset(), *(m.params() for m in members)))
    lo, hi = {}, {}
    for p in params:
        lo[p], hi[p] = -4 * box - 8, 4 * box + 8
        for m in members:
            base = m.const
            for q, (ua, ub) in m.units:
                if q != p:
                    continue
                for u, c in ((ua, base[0]), (ub, base[1])):
                    if u == 1:
                        lo[p], hi[p] = max(lo[p], -box - c), min(hi[p], box - c)
                    elif u == -1:
                        lo[p], hi[p] = max(lo[p], c - box), min(hi[p], c + box)
                    elif u != 0:
                        raise ValueError("template units must have coefficient 1")
    out: dict[frozenset, tuple[tuple[str, int], ...]] = {}

    def ground(i: int, env: dict[str, int]) -> None:
        if i == len(params):
            got = [m.at(env) for m in members]
            if (
                all(-box <= a <= box and -box <= b <= box for a, b in got)
                and len(set(got)) == len(got)
                and (0, 0) not in got
            ):
                out[frozenset([(0, 0), *got])] = tuple(sorted(env.items()))
            return
        for val in range(lo[params[i]], hi[params[i]] + 1):
            env[params[i]] = val
            ground(i + 1, env)

    ground(0, {})
    return out


@lru_cache(maxsize=None)
def template_instances(
    v: VarietyDescriptor, box: int = 6, variant: str = "corrected"
) -> dict[str, dict[frozenset, tuple[tuple[str, int], ...]]]:
    """type_id -> {member set -> parameter grounding} for every template."""
    out = {}
    for t in load_templates(v):
        members = t.members if variant == "corrected" else verbatim_members(t)
        out[t.type_id] = {} if members is None else _instances_of(members, box)
    return out


@dataclass(frozen=True)
class MatchReport:
    """Two-way comparison of an enumeration against the type lists."""

    variety: str
    variant: str
    box: int
    assignments: tuple[tuple[Collection, str, tuple[tuple[str, int], ...]], ...]
    unmatched: tuple[Collection, ...]
    missing: tuple[tuple[str, tuple[Divisor, ...]], ...]
    overlaps: int

    @property
    def clean(self) -> bool:
        return not self.unmatched and not self.missing

    def to_record(self) -> dict:
        return {
            "variety": self.variety,
            "variant": self.variant,
            "box": self.box,
            "matched": [
                {
                    "collection": [list(d) for d in c],
                    "type": tid,
                    "parameters": {p: val for p, val in env},
                }
                for c, tid, env in self.assignments
            ],
            "unmatched": [[list(d) for d in c] for c in self.unmatched],
            "missing": [
                {"type": tid, "members": [list(d) for d in inst]}
                for tid, inst in self.missing
            ],
            "overlaps": self.overlaps,
        }


def match_templates(
    v: VarietyDescriptor,
    found: tuple[Collection, ...] | None = None,
    box: int = 6,
    variant: str = "corrected",
) -> MatchReport:
    """Match found collections against the type lists, both directions."""
    if found is None:
        found = enumerate_maximal(v, box)
    instances = template_instances(v, box, variant)
    claimed: dict[frozenset, tuple[str, tuple[tuple[str, int], ...]]] = {}
    overlaps = 0
    for tid, insts in instances.items():
        for key, env in insts.items():
            if key in claimed and claimed[key][0] != tid:
                overlaps += 1
                continue  # first-listed type keeps the instance
            claimed[key] = (tid, env)
    assignments = []
    unmatched = []
    for c in found:
        hit = claimed.get(frozenset(c))
        if hit is None:
            unmatched.append(c)
        else:
            assignments.append((c, hit[0], hit[1]))
    found_keys = {frozenset(c) for c in found}
    missing = [
        (tid, tuple(sorted(key)))
        for tid, insts in instances.items()
        for key in insts
        if key not in found_keys
    ]
    return MatchReport(
        variety=v.id,
        variant=variant,
        box=box,
        assignments=tuple(assignments),
        unmatched=tuple(unmatched),
        missing=tuple(sorted(missing)),
        overlaps=overlaps,
    )


def match_collection(
    v: VarietyDescriptor, c: Iterable[Divisor], box: int = 6, variant: str = "corrected"
) -> tuple[str, tuple[tuple[str, int], ...]] | None:
    """Identify the (type, parameters) of one collection, if any."""
    key = frozenset(tuple(d) for d in c)
    for tid, insts in template_instances(v, box, variant).items():
        if key in insts:
            return tid, insts[key]
    return None


def deviating_types(v: VarietyDescriptor, box: int = 6) -> tuple[str, ...]:
    """Types whose published wording grounds differently from the working form."""
    out = []
    for t in load_templates(v):
        if t.printed_text is None:
            continue
        verbatim = verbatim_members(t)
        if verbatim is None or set(_instances_of(verbatim, box)) != set(
            _instances_of(t.members, box)
        ):
            out.append(t.type_id)
    return tuple(out)


def difference_signature(c: Iterable[Divisor]) -> tuple[Divisor, ...]:
    """Multiset of pairwise later-minus-earlier differences; shift-invariant."""
    members = [tuple(d) for d in c]
    sig = [
        (members[i][0] - members[j][0], members[i][1] - members[j][1])
        for j in range(len(members))
        for i in range(j + 1, len(members))
    ]
    return tuple(sorted(sig))


def group_by_difference_signature(
    found: Iterable[Collection],
) -> dict[tuple[Divisor, ...], list[Collection]]:
    """Template-free clustering of findings by their difference multiset."""
    groups: dict[tuple[Divisor, ...], list[Collection]] = {}
    for c in found:
        groups.setdefault(difference_signature(c), []).append(c)
    return groups


# ---------------------------------------------------------------------------
# exceptional-pair tables


@dataclass(frozen=True)
class TableFamily:
    label: str
    form: str
    param: str | None
    member: AffineMember


@dataclass(frozen=True)
class TableCell:
    row: int
    col: int
    text: str
    corrected: str | None
    flag: str | None


@dataclass(frozen=True)
class PairTableFixture:
    number: int
    variety: str
    families: tuple[TableFamily, ...]
    cells: tuple[TableCell, ...]


@lru_cache(maxsize=None)
def load_tables() -> tuple[PairTableFixture, ...]:
    with open(data_dir() / "tables.json", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != 1:
        raise ValueError(f"unsupported tables schema: {payload.get('schema')!r}")
    tables = []
    for rec in payload["tables"]:
        families = []
        for f in rec["families"]:
            rows = f["affine"]
            param = f.get("param")
            units = ((param, tuple(rows[1])),) if param else ()
            families.append(
                TableFamily(
                    label=f["label"],
                    form=f["form"],
                    param=param,
                    member=AffineMember(const=tuple(rows[0]), units=units),
                )
            )
        cells = tuple(
            TableCell(
                row=c["row"],
                col=c["col"],
                text=c["text"],
                corrected=c.get("corrected"),
                flag=c.get("flag"),
            )
            for c in rec["cells"]
        )
        tables.append(
            PairTableFixture(
                number=rec["number"],
                variety=rec["variety"],
                families=tuple(families),
                cells=cells,
            )
        )
    return tuple(tables)


def _groundings(fam: TableFamily, grid: int) -> list[int]:
    return list(range(-grid, grid + 1)) if fam.param else [0]


def pair_table_truth(
    v: VarietyDescriptor, row: TableFamily, col: TableFamily, grid: int = 4
) -> frozenset[tuple[int, int]]:
    """Groundings (row value, col value) where (row, col) is an exceptional pair.

    The pair is exceptional exactly when row - col is cohomologically zero
    (the row member stands earlier).  Parameter-free families contribute the
    single grounding 0.
    """
    pairs = set()
    for rv in _groundings(row, grid):
        renv = {row.param: rv} if row.param else {}
        rm = row.member.at(renv)
        for cv in _groundings(col, grid):
            cenv = {col.param: cv} if col.param else {}
            cm = col.member.at(cenv)
            if difference_is_admissible(v, rm, cm):
                pairs.add((rv, cv))
    return frozenset(pairs)


def pair_table(
    v: VarietyDescriptor, families: Iterable[TableFamily], grid: int = 4
) -> dict[tuple[str, str], frozenset[tuple[int, int]]]:
    """ (row label, col label) -> admissible grounding pairs, from the oracle."""
    fams = list(families)
    return {
        (r.label, c.label): pair_table_truth(v, r, c, grid) for r in fams for c in fams
    }


_CLAUSE = re.compile(r"^([a-d])('?)\s*=\s*(.+)$")
_RHS = re.compile(r"^(-?\d+)$|^([a-d])('?)\s*([+-]\s*\d+)?$")

Clause = tuple[str, bool, tuple]


def parse_cell_condition(text: str) -> str | list[Clause]:
    """-> 'blank' | 'check' | clauses [(var, primed, options)].

    Each option is ('const', n) or ('var', name, primed, offset); clauses
    are joined by "or".
    """
    t = text.strip().strip("$").strip()
    if not t:
        return "blank"
    if "checkmark" in t:
        return "check"
    clauses: list[Clause] = []
    for part in re.split(r"\$\s*or\s*\$", t):
        m = _CLAUSE.match(part.strip())
        if not m:
            raise ValueError(f"unparseable cell {text!r}")
        var, primed, rhs = m.group(1), m.group(2) == "'", m.group(3)
        options = []
        for piece in rhs.split(","):
            pm = _RHS.match(piece.strip().strip("$").strip())
            if not pm:
                raise ValueError(f"unparseable cell value {piece!r} in {text!r}")
            if pm.group(1) is not None:
                options.append(("const", int(pm.group(1))))
            else:
                offset = int(pm.group(4).replace(" ", "")) if pm.group(4) else 0
                options.append(("var", pm.group(2), pm.group(3) == "'", offset))
        clauses.append((var, primed, tuple(options)))
    return clauses


def cell_truth(
    parsed: str | list[Clause],
    row_param: str | None,
    col_param: str | None,
    grid: int = 4,
) -> frozenset[tuple[int, int]]:
    """Ground a printed cell condition over the same grid as pair_table_truth.

    Primed variables carry the column grounding; a bare variable resolves to
    the row parameter when the names agree and otherwise to the column one
    (several printed cells drop the prime; the context keeps it unambiguous).
    """
    if parsed == "blank":
        return frozenset()
    rows = list(range(-grid, grid + 1)) if row_param else [0]
    cols = list(range(-grid, grid + 1)) if col_param else [0]
    if parsed == "check":
        return frozenset((rv, cv) for rv in rows for cv in cols)

    def resolve(name: str, primed: bool, rv: int, cv: int) -> int | None:
        if primed:
            return cv if col_param == name else None
        if row_param == name:
            return rv
        if col_param == name:
            return cv
        return None

    pairs = set()
    for rv in rows:
        for cv in cols:
            hit = False
            for var, primed, options in parsed:
                lhs = resolve(var, primed, rv, cv)
                if lhs is None:
                    continue  # names nobody owns make the clause vacuous
                for o in options:
                    if o[0] == "const":
                        if lhs == o[1]:
                            hit = True
                    else:
                        rhsv = resolve(o[1], o[2], rv, cv)
                        if rhsv is not None and lhs == rhsv + o[3]:
                            hit = True
            if hit:
                pairs.add((rv, cv))
    return frozenset(pairs)


@dataclass(frozen=True)
class TableComparison:
    number: int
    variety: str
    grid: int
    mismatched: tuple[tuple[str, str], ...]  # cells where the print disagrees
    flagged: tuple[tuple[str, str], ...]  # cells the fixture marks as slips
    corrected_clean: bool  # curated rewordings all ground exactly

    @property
    def clean_modulo_flags(self) -> bool:
        return set(self.mismatched) == set(self.flagged) and self.corrected_clean


def compare_table(fixture: PairTableFixture, grid: int = 4) -> TableComparison:
    """Ground every printed cell and diff it against the oracle-built table."""
    v = variety(fixture.variety)
    fams = fixture.families
    mismatched = []
    flagged = []
    corrected_clean = True
    for cell in fixture.cells:
        row, col = fams[cell.row], fams[cell.col]
        oracle = pair_table_truth(v, row, col, grid)
        printed = cell_truth(
            parse_cell_condition(cell.text), row.param, col.param, grid
        )
        key = (row.label, col.label)
        if printed != oracle:
            mismatched.append(key)
        if cell.flag:
            flagged.append(key)
            if cell.corrected is not None:
                fixed = cell_truth(
                    parse_cell_condition(cell.corrected), row.param, col.param, grid
                )
                if fixed != oracle:
                    corrected_clean = False
    return TableComparison(
        number=fixture.number,
        variety=fixture.variety,
        grid=grid,
        mismatched=tuple(mismatched),
        flagged=tuple(flagged),
        corrected_clean=corrected_clean,
    )
