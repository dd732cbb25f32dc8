"""Mutation moves and replayable fullness certificates.

A certificate witnesses that a collection is connected to a
projective-bundle block collection (a known full one) by moves that all
preserve fullness: adjacent transpositions of commuting pairs, helix
rotations, global twists, and single-member replacements.  The search
runs breadth-first over member sets modulo twist, because every move is
invertible and any two admissible orderings of the same member set are
linked by admissible transpositions; emitted certificates are fully
ordered move lists that an independent replay validates step by step.
"""
from __future__ import annotations

import json
from collections import deque
from dataclasses import dataclass
from functools import lru_cache
from itertools import product


from .classify import (
    Collection,
    _cz_box,
    _forced_edges,
    _topological_order,
    is_exceptional_collection,
)
from .cohomology import InternalConsistencyError, is_cohomologically_zero
from .variety import Divisor, VarietyDescriptor

MOVE_KINDS = ("swap", "helix_left", "helix_right", "tensor", "replace")


@dataclass(frozen=True)
class Move:
    kind: str
    index: int | None = None
    divisor: Divisor | None = None

    def to_record(self) -> dict:
        rec: dict = {"kind": self.kind}
        if self.index is not None:
            rec["index"] = self.index
        if self.divisor is not None:
            rec["divisor"] = list(self.divisor)
        return rec

    @classmethod
    def from_record(cls, rec: dict) -> "Move":
        divisor = rec.get("divisor")
        return cls(
            kind=rec["kind"],
            index=rec.get("index"),
            divisor=tuple(divisor) if divisor is not None else None,
        )


@dataclass(frozen=True)
class FullnessCertificate:
    variety: str
    seed: Collection
    moves: tuple[Move, ...]
    target: Collection

    def to_record(self) -> dict:
        return {
            "schema": 1,
            "variety": self.variety,
            "seed": [list(d) for d in self.seed],
            "moves": [m.to_record() for m in self.moves],
            "target": [list(d) for d in self.target],
        }

    def dumps(self) -> str:
        return json.dumps(self.to_record(), sort_keys=True)


def parse_certificate(payload: str | dict) -> FullnessCertificate:
    rec = json.loads(payload) if isinstance(payload, str) else payload
    return FullnessCertificate(
        variety=rec["variety"],
        seed=tuple(tuple(d) for d in rec["seed"]),
        moves=tuple(Move.from_record(m) for m in rec["moves"]),
        target=tuple(tuple(d) for d in rec["target"]),
    )


@dataclass(frozen=True)
class NotFound:
    """Search exhausted its budget (or its box) without reaching the target."""

    explored: int

    def __bool__(self) -> bool:
        return False


@dataclass(frozen=True)
class CertificateCheck:
    ok: bool
    failure_index: int | None = None  # -1: seed stage; k: move k; len(moves): target
    reason: str | None = None

    def __bool__(self) -> bool:
        return self.ok


@dataclass(frozen=True)
class SearchBudget:
    max_states: int = 10**6
    box: int = 6


def apply_move(v: VarietyDescriptor, c: Collection, m: Move) -> Collection:
    """Apply one move; the result is re-verified, never assumed exceptional."""
    c = tuple(tuple(d) for d in c)
    n = len(c)
    if m.kind == "swap":
        i = m.index if m.index is not None else -1
        if not 0 <= i < n - 1:
            raise ValueError("move not admissible: swap index out of range")
        a, b = c[i], c[i + 1]
        fwd = (a[0] - b[0], a[1] - b[1])
        if not (
            is_cohomologically_zero(v, fwd)
            and is_cohomologically_zero(v, (-fwd[0], -fwd[1]))
        ):
            raise ValueError("move not admissible: pair does not commute")
        out = c[:i] + (b, a) + c[i + 2 :]
    elif m.kind == "helix_left":
        if n == 0:
            raise ValueError("move not admissible: empty collection")
        kh, kd = v.canonical
        out = c[1:] + ((c[0][0] - kh, c[0][1] - kd),)
    elif m.kind == "helix_right":
        if n == 0:
            raise ValueError("move not admissible: empty collection")
        kh, kd = v.canonical
        out = ((c[-1][0] + kh, c[-1][1] + kd),) + c[:-1]
    elif m.kind == "tensor":
        if m.divisor is None:
            raise ValueError("move not admissible: tensor needs a divisor")
        th, td = m.divisor
        out = tuple((a + th, b + td) for a, b in c)
    elif m.kind == "replace":
        i = m.index if m.index is not None else -1
        if not 0 <= i < n or m.divisor is None:
            raise ValueError("move not admissible: replace needs an index and divisor")
        out = c[:i] + (tuple(m.divisor),) + c[i + 1 :]
    else:
        raise ValueError(f"move not admissible: unknown kind {m.kind!r}")
    if not is_exceptional_collection(v, out):
        raise ValueError("move not admissible: result is not exceptional")
    return out


def _block_vectors(rz) -> tuple[Divisor, Divisor]:
    base = (1, 0) if rz.base_class == "H" else (0, 1)
    fiber = (0, 1) if rz.base_class == "H" else (1, 0)
    return base, fiber


def orlov_seeds(v: VarietyDescriptor, box: int = 6) -> tuple[Collection, ...]:
    """Block collections (base collection repeated across fiber twists).

    For every fibration of v and every in-box choice of per-block offsets
    c_1..c_r (block 0 is pinned at 0), the collection
    O, B, ..., nB, (c_1)B + V, ..., (c_1 + n)B + V, ... up to block r.
    """
    seeds: list[Collection] = []
    seen: set[Collection] = set()
    for rz in v.bundle_realizations:
        n, r = rz.base_dim, rz.fiber_rank
        base, fiber = _block_vectors(rz)
        for combo in product(range(-box, box - n + 1), repeat=r):
            offsets = (0,) + combo
            members = tuple(
                (
                    (offsets[j] + i) * base[0] + j * fiber[0],
                    (offsets[j] + i) * base[1] + j * fiber[1],
                )
                for j in range(r + 1)
                for i in range(n + 1)
            )
            if members in seen:
                continue
            if not all(-box <= a <= box and -box <= b <= box for a, b in members):
                continue
            if not is_exceptional_collection(v, members):
                raise InternalConsistencyError(
                    f"block collection fails exceptionality on {v.id}"
                )
            seen.add(members)
            seeds.append(members)
    return tuple(seeds)


def is_orlov_seed(v: VarietyDescriptor, c: Collection) -> bool:
    """Pattern check: does c list base twists block by block, block 0 at 0?"""
    c = tuple(tuple(d) for d in c)
    for rz in v.bundle_realizations:
        n, r = rz.base_dim, rz.fiber_rank
        if len(c) != (n + 1) * (r + 1):
            continue
        base, fiber = _block_vectors(rz)
        axis = 0 if base == (1, 0) else 1

        def block_ok(j: int) -> bool:
            block = c[j * (n + 1) : (j + 1) * (n + 1)]
            start = block[0][axis]
            if j == 0 and start != 0:
                return False
            for i, d in enumerate(block):
                want = (
                    (start + i) * base[0] + j * fiber[0],
                    (start + i) * base[1] + j * fiber[1],
                )
                if d != want:
                    return False
            return True

        if all(block_ok(j) for j in range(r + 1)):
            return True
    return False


# ---------------------------------------------------------------------------
# breadth-first reachability over member sets modulo twist


def _can_be_first(cz: frozenset, members, m: Divisor) -> bool:
    return all(
        (m[0] - u[0], m[1] - u[1]) in cz for u in members if u != m
    )


def _can_be_last(cz: frozenset, members, m: Divisor) -> bool:
    return all(
        (u[0] - m[0], u[1] - m[1]) in cz for u in members if u != m
    )


def _anchor(cz: frozenset, members, box: int) -> tuple[Divisor, ...] | None:
    """Canonical in-box representative of the twist orbit, or None.

    The anchor member is the lex-least one that can stand first while the
    whole set, twisted to start there, stays inside the box.  The choice is
    translation invariant, so equal orbits get equal keys.
    """
    s = sorted(members)
    for m in s:
        if not _can_be_first(cz, s, m):
            continue
        shifted = [(u[0] - m[0], u[1] - m[1]) for u in s]
        if all(-box <= a <= box and -box <= b <= box for a, b in shifted):
            return tuple(sorted(shifted))
    return None


def _pairwise_valid(cz: frozenset, members) -> bool:
    s = list(members)
    for i, u in enumerate(s):
        for w in s[i + 1 :]:
            du = (u[0] - w[0], u[1] - w[1])
            if du not in cz and (-du[0], -du[1]) not in cz:
                return False
    return True


def _reach_closure(rest: list[Divisor], forced: dict) -> dict[Divisor, set]:
    """u -> members reachable from u (u included) through forced edges."""
    reach: dict[Divisor, set] = {}

    def visit(u: Divisor) -> set:
        if u in reach:
            return reach[u]
        reach[u] = {u}  # placeholder guards against revisits; DAG has no cycles
        acc = {u}
        for w in forced.get(u, ()):
            acc |= visit(w)
        reach[u] = acc
        return acc

    for u in rest:
        visit(u)
    return reach


@dataclass(frozen=True)
class _Edge:
    kind: str  # "helix_left" | "helix_right" | "replace"
    member: Divisor  # in the parent state's canonical coordinates
    divisor: Divisor | None = None


def _find(comp: dict, x):
    while comp[x] != x:
        comp[x] = comp[comp[x]]
        x = comp[x]
    return x


@lru_cache(maxsize=None)
def reachable_component(
    v: VarietyDescriptor, box: int = 6, max_states: int = 10**6
) -> tuple[dict, int, tuple[Collection, ...], dict]:
    """BFS over anchored member sets from every seed.

    Returns (parent map, states seen, seeds, component roots).  parent
    maps each reached state to (parent state, edge, seed index); seed
    entries carry (None, None, index).  Every move is invertible and the
    edge relation is symmetric, so equal component roots mean mutual
    reachability inside the box.
    """
    cz = _cz_box(v, 4 * box + 16)
    seeds = orlov_seeds(v, box)
    window = [
        (a, b) for a in range(-box, box + 1) for b in range(-box, box + 1)
    ]
    kh, kd = v.canonical
    parent: dict = {}
    comp: dict = {}
    queue: deque = deque()
    for si, s in enumerate(seeds):
        canon = _anchor(cz, s, box)
        if canon is None:
            raise InternalConsistencyError(f"seed fails to anchor on {v.id}")
        if canon not in parent:
            parent[canon] = (None, None, si)
            comp[canon] = canon
            queue.append(canon)

    def offer(members, edge: _Edge, state) -> None:
        if not _pairwise_valid(cz, members):
            return
        forced = _forced_edges(v, sorted(members))
        try:
            _topological_order(sorted(members), forced)
        except ValueError:
            return  # forced precedence is cyclic: not orderable
        canon = _anchor(cz, members, box)
        if canon is None:
            return
        if canon not in parent:
            parent[canon] = (state, edge, -1)
            comp[canon] = canon
            queue.append(canon)
        comp[_find(comp, canon)] = _find(comp, state)

    while queue and len(parent) < max_states:
        state = queue.popleft()
        members = list(state)
        mset = set(members)
        for m in members:  # helix departures: any member placeable first / last
            if _can_be_first(cz, members, m):
                twisted = mset - {m} | {(m[0] - kh, m[1] - kd)}
                offer(twisted, _Edge("helix_left", m), state)
        for m in members:
            if _can_be_last(cz, members, m):
                twisted = mset - {m} | {(m[0] + kh, m[1] + kd)}
                offer(twisted, _Edge("helix_right", m), state)
        # replacements: swap one member for any window divisor when the new
        # set is orderable with both the old and new member sharing a slot
        fwd_bits: dict[Divisor, dict[Divisor, bool]] = {}
        bwd_bits: dict[Divisor, dict[Divisor, bool]] = {}
        for u in members:
            fwd_bits[u] = {
                d: (u[0] - d[0], u[1] - d[1]) in cz for d in window
            }
            bwd_bits[u] = {
                d: (d[0] - u[0], d[1] - u[1]) in cz for d in window
            }
        forced_all = _forced_edges(v, members)
        for m in members:
            rest = [u for u in members if u != m]
            forced_rest = {
                u: {w for w in succ if w != m}
                for u, succ in forced_all.items()
                if u != m
            }
            reach = _reach_closure(rest, forced_rest)
            preds_m = {u for u in rest if fwd_bits[u][m] and not bwd_bits[u][m]}
            succs_m = {u for u in rest if bwd_bits[u][m] and not fwd_bits[u][m]}
            for d in window:
                if d in mset:
                    continue
                ok = True
                preds_d = set()
                succs_d = set()
                for u in rest:
                    f, g = fwd_bits[u][d], bwd_bits[u][d]
                    if not (f or g):
                        ok = False
                        break
                    if f and not g:
                        preds_d.add(u)
                    elif g and not f:
                        succs_d.add(u)
                if not ok:
                    continue
                preds = preds_m | preds_d
                succs = succs_m | succs_d
                if any(u in reach[w] for w in succs for u in preds):
                    continue  # no common slot for the old and new member
                offer(set(rest) | {d}, _Edge("replace", m, d), state)
    roots = {s: _find(comp, s) for s in parent}
    return parent, len(parent), seeds, roots


def _translation(current_set, canon) -> Divisor:
    # sorted translates stay sorted, so lex-least members correspond
    cur0 = min(current_set)
    return (cur0[0] - canon[0][0], cur0[1] - canon[0][1])


def _reorder_moves(current: Collection, wanted: Collection) -> list[Move]:
    """Adjacent transpositions turning one admissible order into another."""
    cur = list(current)
    moves: list[Move] = []
    for i, w in enumerate(wanted):
        j = cur.index(w, i)
        for k in range(j - 1, i - 1, -1):
            moves.append(Move("swap", index=k))
            cur[k], cur[k + 1] = cur[k + 1], cur[k]
    return moves


def _ordered_with_first(v, members: list[Divisor], first: Divisor) -> Collection:
    rest = [u for u in members if u != first]
    tail = _topological_order(rest, _forced_edges(v, rest))
    return (first, *tail)


def _ordered_with_last(v, members: list[Divisor], last: Divisor) -> Collection:
    rest = [u for u in members if u != last]
    head = _topological_order(rest, _forced_edges(v, rest))
    return (*head, last)


def _ordered_with_slot(
    v, rest: list[Divisor], old: Divisor, new: Divisor
) -> tuple[int, Collection]:
    """A shared position for old and new, with the surrounding order fixed."""
    forced_rest = _forced_edges(v, rest)
    slot = object()
    preds: dict = {u: set() for u in rest}
    preds[slot] = set()
    for u, succs in forced_rest.items():
        for w in succs:
            preds[w].add(u)
    for mem, bundle in ((old, rest), (new, rest)):
        for u in bundle:
            f = is_cohomologically_zero(v, (u[0] - mem[0], u[1] - mem[1]))
            g = is_cohomologically_zero(v, (mem[0] - u[0], mem[1] - u[1]))
            if f and not g:
                preds[slot].add(u)
            elif g and not f:
                preds[u].add(slot)
    order: list = []
    placed: set = set()
    remaining = set(rest) | {slot}
    sortkey = min(old, new)
    while remaining:
        ready = sorted(
            (u for u in remaining if preds[u] <= placed),
            key=lambda u: sortkey if u is slot else u,
        )
        if not ready:
            raise InternalConsistencyError("replacement slot vanished")
        order.append(ready[0])
        placed.add(ready[0])
        remaining.remove(ready[0])
    pos = order.index(slot)
    with_old = tuple(old if u is slot else u for u in order)
    return pos, with_old


def verify_fullness(
    v: VarietyDescriptor, target: Collection, budget: SearchBudget | None = None
) -> FullnessCertificate | NotFound:
    """Search for a replayable move sequence from a block collection to target."""
    budget = budget or SearchBudget()
    target = tuple(tuple(d) for d in target)
    if len(target) != v.max_length or not is_exceptional_collection(v, target):
        raise ValueError("not an exceptional collection")
    parent, explored, seeds, _ = reachable_component(v, budget.box, budget.max_states)
    cz = _cz_box(v, 4 * budget.box + 16)
    canon = _anchor(cz, target, budget.box)
    if canon is None or canon not in parent:
        return NotFound(explored=explored)

    chain: list[tuple[tuple, _Edge | None]] = []
    cur = canon
    seed_index = -1
    while True:
        prev, edge, si = parent[cur]
        chain.append((cur, edge))
        if prev is None:
            seed_index = si
            break
        cur = prev
    chain.reverse()

    seed = seeds[seed_index]
    current: Collection = seed
    moves: list[Move] = []

    def push(mv: Move) -> None:
        nonlocal current
        current = apply_move(v, current, mv)
        moves.append(mv)

    for (state, _), (_, edge) in zip(chain, chain[1:]):
        assert edge is not None
        t = _translation(set(current), state)
        m_abs = (edge.member[0] + t[0], edge.member[1] + t[1])
        if edge.kind == "helix_left":
            wanted = _ordered_with_first(v, list(current), m_abs)
            for mv in _reorder_moves(current, wanted):
                push(mv)
            push(Move("helix_left"))
        elif edge.kind == "helix_right":
            wanted = _ordered_with_last(v, list(current), m_abs)
            for mv in _reorder_moves(current, wanted):
                push(mv)
            push(Move("helix_right"))
        else:
            assert edge.divisor is not None
            d_abs = (edge.divisor[0] + t[0], edge.divisor[1] + t[1])
            rest = [u for u in current if u != m_abs]
            pos, with_old = _ordered_with_slot(v, rest, m_abs, d_abs)
            for mv in _reorder_moves(current, with_old):
                push(mv)
            push(Move("replace", index=pos, divisor=d_abs))

    t_cur = _translation(set(current), canon)
    t_tgt = _translation(set(target), canon)
    delta = (t_tgt[0] - t_cur[0], t_tgt[1] - t_cur[1])
    if delta != (0, 0):
        push(Move("tensor", divisor=delta))
    if current != target:
        for mv in _reorder_moves(current, target):
            push(mv)
    if current != target:
        raise InternalConsistencyError("certificate replay drifted off target")
    cert = FullnessCertificate(
        variety=v.id, seed=seed, moves=tuple(moves), target=target
    )
    verdict = check_certificate(v, cert)
    if not verdict:
        raise InternalConsistencyError(
            f"emitted certificate fails replay at step {verdict.failure_index}"
        )
    return cert


@lru_cache(maxsize=None)
def load_chains() -> dict:
    """Transcribed type-relation chains per variety, with the two digit-drop
    corrections and the two arrows that are not single helix twists."""
    from .variety import data_dir

    with open(data_dir() / "chains.json", encoding="utf-8") as fh:
        payload = json.load(fh)
    if payload.get("schema") != 1:
        raise ValueError(f"unsupported chains schema: {payload.get('schema')!r}")
    return payload


def same_component(
    v: VarietyDescriptor,
    c1: Collection,
    c2: Collection,
    budget: SearchBudget | None = None,
) -> bool:
    """Mutual reachability of two collections inside the search box.

    Moves are invertible and set-level edges are symmetric, so two
    collections are mutually reachable exactly when their anchored member
    sets share a component root.
    """
    budget = budget or SearchBudget()
    parent, _, _, roots = reachable_component(v, budget.box, budget.max_states)
    cz = _cz_box(v, 4 * budget.box + 16)
    k1 = _anchor(cz, set(tuple(d) for d in c1), budget.box)
    k2 = _anchor(cz, set(tuple(d) for d in c2), budget.box)
    if k1 is None or k2 is None or k1 not in roots or k2 not in roots:
        return False
    return roots[k1] == roots[k2]


def check_certificate(v: VarietyDescriptor, cert: FullnessCertificate) -> CertificateCheck:
    """Independent replay: no search, every step verified from scratch."""
    if cert.variety != v.id:
        return CertificateCheck(False, -1, "certificate names a different variety")
    seed = tuple(tuple(d) for d in cert.seed)
    if not is_orlov_seed(v, seed):
        return CertificateCheck(False, -1, "seed is not a block collection")
    if len(seed) != v.max_length or not is_exceptional_collection(v, seed):
        return CertificateCheck(False, -1, "seed is not exceptional of full length")
    state = seed
    for k, mv in enumerate(cert.moves):
        try:
            state = apply_move(v, state, mv)
        except ValueError as err:
            return CertificateCheck(False, k, str(err))
    if state != tuple(tuple(d) for d in cert.target):
        return CertificateCheck(False, len(cert.moves), "end state differs from target")
    return CertificateCheck(True)
