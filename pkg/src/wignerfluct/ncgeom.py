"""Non-crossing combinatorics on the disk and on the two-circle annulus.

This module is the combinatorial backbone of the package: non-crossing set
partitions with their Kreweras complements and Moebius function, annular
non-crossing permutations with their Kreweras complements, marked partition
pairs, annular pairings, and (optionally bicolored) non-crossing graphs.

Conventions
-----------
Ground sets are tuples of distinct integer labels; the *cyclic* order is the
tuple order.  On the annulus the ground set is ``1..outer+inner`` with the
outer labels ``1..outer`` (clockwise) followed by the inner labels
``outer+1..outer+inner`` (counter-clockwise in the picture, increasing as
integers).  Kreweras complements are computed algebraically as the
permutation product ``inverse(p) o gamma``, where ``gamma`` is the full cycle
on the disk and the product of the two circle cycles on the annulus, and
``(s o t)(x) = s(t(x))``.

All objects are immutable value types; enumerations are pure functions with
module-level caches, so they are safe to share across threads.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from functools import lru_cache
from typing import Iterable, Iterator, Optional, Sequence

from .config import GRAPH_CAP, PARTITION_CAP, CapExceeded, check_cap

__all__ = [
    "SetPartition",
    "CyclicPermutation",
    "MarkedPartitionPair",
    "WeightedGraph",
    "AnnulusShape",
    "enumerate_ncp",
    "is_noncrossing_partition",
    "kreweras_disk",
    "moebius_nc",
    "refines",
    "enumerate_annular_ncp",
    "kreweras_annular",
    "enumerate_ncg",
    "iter_ncg_edge_sets",
    "enumerate_marked",
    "annular_pairings",
]


# ---------------------------------------------------------------------------
# value types
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class SetPartition:
    """A partition of an ordered ground set into disjoint blocks.

    Blocks are canonicalized: each block is sorted by ground position and the
    blocks themselves are sorted by their minimal element's position.
    """

    ground: tuple[int, ...]
    blocks: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(set(self.ground)) != len(self.ground):
            raise ValueError("ground labels must be distinct")
        pos = {v: i for i, v in enumerate(self.ground)}
        seen: set[int] = set()
        for block in self.blocks:
            if not block:
                raise ValueError("blocks must be nonempty")
            for v in block:
                if v not in pos:
                    raise ValueError(f"label {v} not in ground set")
                if v in seen:
                    raise ValueError(f"label {v} appears in two blocks")
                seen.add(v)
        if len(seen) != len(self.ground):
            raise ValueError("blocks do not cover the ground set")
        canon = tuple(
            sorted(
                (tuple(sorted(b, key=pos.__getitem__)) for b in self.blocks),
                key=lambda b: pos[b[0]],
            )
        )
        object.__setattr__(self, "ground", tuple(self.ground))
        object.__setattr__(self, "blocks", canon)

    def __len__(self) -> int:
        return len(self.blocks)

    def block_of(self, label: int) -> tuple[int, ...]:
        for b in self.blocks:
            if label in b:
                return b
        raise KeyError(label)

    def to_jsonable(self) -> dict:
        return {"ground": list(self.ground), "blocks": [list(b) for b in self.blocks]}


@dataclass(frozen=True)
class CyclicPermutation:
    """A permutation of an ordered ground set, stored by its cycles.

    Each cycle is rotated to start at its minimal element (in ground position
    order) and cycles are sorted by that element, which fixes equality and
    hashing.
    """

    ground: tuple[int, ...]
    cycles: tuple[tuple[int, ...], ...]

    def __post_init__(self):
        if len(set(self.ground)) != len(self.ground):
            raise ValueError("ground labels must be distinct")
        pos = {v: i for i, v in enumerate(self.ground)}
        seen: set[int] = set()
        canon = []
        for cyc in self.cycles:
            if not cyc:
                raise ValueError("cycles must be nonempty")
            for v in cyc:
                if v not in pos:
                    raise ValueError(f"label {v} not in ground set")
                if v in seen:
                    raise ValueError(f"label {v} appears in two cycles")
                seen.add(v)
            k = min(range(len(cyc)), key=lambda i: pos[cyc[i]])
            canon.append(tuple(cyc[k:] + cyc[:k]))
        if len(seen) != len(self.ground):
            raise ValueError("cycles do not cover the ground set")
        canon.sort(key=lambda c: pos[c[0]])
        object.__setattr__(self, "ground", tuple(self.ground))
        object.__setattr__(self, "cycles", tuple(canon))

    def __len__(self) -> int:
        return len(self.cycles)

    def mapping(self) -> dict[int, int]:
        out: dict[int, int] = {}
        for cyc in self.cycles:
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                out[a] = b
        return out

    def blocks(self) -> SetPartition:
        return SetPartition(self.ground, tuple(tuple(sorted(c)) for c in self.cycles))

    def to_jsonable(self) -> dict:
        return {"ground": list(self.ground), "cycles": [list(c) for c in self.cycles]}


@dataclass(frozen=True)
class AnnulusShape:
    """Label layout of the two-circle annulus: ``outer`` clockwise labels
    ``1..outer`` and ``inner`` counter-clockwise labels ``outer+1..outer+inner``."""

    outer: int
    inner: int

    def __post_init__(self):
        if self.outer < 0 or self.inner < 0:
            raise ValueError("circle sizes must be nonnegative")

    @property
    def total(self) -> int:
        return self.outer + self.inner

    def ground(self) -> tuple[int, ...]:
        return tuple(range(1, self.total + 1))

    def outer_labels(self) -> tuple[int, ...]:
        return tuple(range(1, self.outer + 1))

    def inner_labels(self) -> tuple[int, ...]:
        return tuple(range(self.outer + 1, self.total + 1))

    def full_cycle(self) -> dict[int, int]:
        """The product of the two circle cycles, as a mapping."""
        gamma: dict[int, int] = {}
        for cyc in (self.outer_labels(), self.inner_labels()):
            for a, b in zip(cyc, cyc[1:] + cyc[:1]):
                gamma[a] = b
        return gamma


@dataclass(frozen=True)
class MarkedPartitionPair:
    """A pair of disk non-crossing partitions with one marked block each."""

    left: SetPartition
    right: SetPartition
    marked_left: int
    marked_right: int

    def __post_init__(self):
        if not 0 <= self.marked_left < len(self.left.blocks):
            raise ValueError("marked_left out of range")
        if not 0 <= self.marked_right < len(self.right.blocks):
            raise ValueError("marked_right out of range")

    @property
    def left_block(self) -> tuple[int, ...]:
        return self.left.blocks[self.marked_left]

    @property
    def right_block(self) -> tuple[int, ...]:
        return self.right.blocks[self.marked_right]

    def to_jsonable(self) -> dict:
        return {
            "left": self.left.to_jsonable(),
            "right": self.right.to_jsonable(),
            "marked_left": self.marked_left,
            "marked_right": self.marked_right,
        }


@dataclass(frozen=True)
class WeightedGraph:
    """An undirected multigraph on an ordered vertex set.

    Edges are stored as a sorted tuple of vertex pairs; loops are pairs with
    equal endpoints and parallel edges are repeated pairs.  An optional binary
    ``colors`` vector (one bit per vertex) marks transposed positions.
    """

    vertices: tuple[int, ...]
    edges: tuple[tuple[int, int], ...]
    colors: Optional[tuple[int, ...]] = None

    def __post_init__(self):
        if len(set(self.vertices)) != len(self.vertices):
            raise ValueError("vertices must be distinct")
        vset = set(self.vertices)
        canon = []
        for u, v in self.edges:
            if u not in vset or v not in vset:
                raise ValueError(f"edge ({u},{v}) leaves the vertex set")
            canon.append((u, v) if u <= v else (v, u))
        canon.sort()
        object.__setattr__(self, "vertices", tuple(self.vertices))
        object.__setattr__(self, "edges", tuple(canon))
        if self.colors is not None:
            if len(self.colors) != len(self.vertices):
                raise ValueError("color vector length must match vertex count")
            object.__setattr__(self, "colors", tuple(int(b) for b in self.colors))

    def edge_multiplicities(self) -> dict[tuple[int, int], int]:
        out: dict[tuple[int, int], int] = {}
        for e in self.edges:
            out[e] = out.get(e, 0) + 1
        return out

    def components(self) -> list[tuple[int, ...]]:
        parent = {v: v for v in self.vertices}

        def find(x):
            while parent[x] != x:
                parent[x] = parent[parent[x]]
                x = parent[x]
            return x

        for u, v in self.edges:
            ru, rv = find(u), find(v)
            if ru != rv:
                parent[ru] = rv
        comps: dict[int, list[int]] = {}
        for v in self.vertices:
            comps.setdefault(find(v), []).append(v)
        return [tuple(sorted(c)) for c in comps.values()]

    def is_connected(self) -> bool:
        return len(self.components()) <= 1

    def to_jsonable(self) -> dict:
        out = {
            "vertices": list(self.vertices),
            "edges": [[list(e), m] for e, m in sorted(self.edge_multiplicities().items())],
        }
        if self.colors is not None:
            out["colors"] = list(self.colors)
        return out


# ---------------------------------------------------------------------------
# disk partitions
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _ncp_positions(n: int) -> tuple[tuple[tuple[int, ...], ...], ...]:
    """All non-crossing partitions of positions ``0..n-1``.

    Recursion on the block of position 0: choosing that block splits the
    remaining positions into independent gaps, each of which is partitioned
    non-crossingly on its own.
    """
    if n == 0:
        return ((),)
    result = []
    rest = range(1, n)
    for r in range(0, n):
        for others in itertools.combinations(rest, r):
            block = (0,) + others
            bounds = block + (n,)
            gaps = [range(bounds[i] + 1, bounds[i + 1]) for i in range(len(block))]
            sub_choices = [_ncp_positions(len(g)) for g in gaps]
            for combo in itertools.product(*sub_choices):
                parts = [block]
                for gap, sub in zip(gaps, combo):
                    base = gap.start
                    for blk in sub:
                        parts.append(tuple(base + p for p in blk))
                parts.sort(key=lambda b: b[0])
                result.append(tuple(parts))
    return tuple(result)


def enumerate_ncp(ground: Sequence[int], cap: int = PARTITION_CAP) -> list[SetPartition]:
    """All non-crossing partitions of a cyclically ordered ground set.

    The empty ground set yields the single empty partition.  Results are in
    canonical form with no duplicates; their number is the Catalan number of
    ``len(ground)``.
    """
    ground = tuple(ground)
    check_cap(len(ground), cap, "non-crossing partition enumeration")
    out = []
    for pos_blocks in _ncp_positions(len(ground)):
        blocks = tuple(tuple(ground[p] for p in blk) for blk in pos_blocks)
        out.append(SetPartition(ground, blocks))
    return out


def is_noncrossing_partition(p: SetPartition) -> bool:
    """Whether no two blocks interleave in the cyclic order of the ground set."""
    pos = {v: i for i, v in enumerate(p.ground)}
    blocks = [sorted(pos[v] for v in b) for b in p.blocks]
    for b1, b2 in itertools.combinations(blocks, 2):
        # b1, b2 cross iff b2 meets both the inside and outside of some arc of b1
        for a, b in itertools.combinations(b1, 2):
            inside = any(a < x < b for x in b2)
            outside = any(x < a or x > b for x in b2)
            if inside and outside:
                return False
    return True


def _partition_as_mapping(p: SetPartition) -> dict[int, int]:
    """Read a partition as the permutation whose cycles are the blocks in
    clockwise (ground) order."""
    out: dict[int, int] = {}
    for block in p.blocks:
        for a, b in zip(block, block[1:] + block[:1]):
            out[a] = b
    return out


def _compose(outer_map: dict[int, int], inner_map: dict[int, int]) -> dict[int, int]:
    """``(outer o inner)(x) = outer(inner(x))``."""
    return {x: outer_map[inner_map[x]] for x in inner_map}


def _invert(mapping: dict[int, int]) -> dict[int, int]:
    return {v: k for k, v in mapping.items()}


def _cycles_of(mapping: dict[int, int], ground: Sequence[int]) -> list[tuple[int, ...]]:
    seen: set[int] = set()
    cycles = []
    for start in ground:
        if start in seen:
            continue
        cyc = [start]
        seen.add(start)
        nxt = mapping[start]
        while nxt != start:
            cyc.append(nxt)
            seen.add(nxt)
            nxt = mapping[nxt]
        cycles.append(tuple(cyc))
    return cycles


def kreweras_disk(p: SetPartition) -> SetPartition:
    """Disk Kreweras complement, computed as ``inverse(p) o gamma`` with
    ``gamma`` the full clockwise cycle on the ground set.

    Satisfies ``len(p) + len(kreweras_disk(p)) == len(ground) + 1``.
    """
    if not is_noncrossing_partition(p):
        raise ValueError("Kreweras complement requires a non-crossing partition")
    ground = p.ground
    gamma = {a: b for a, b in zip(ground, ground[1:] + ground[:1])}
    inv = _invert(_partition_as_mapping(p))
    comp = _compose(inv, gamma)
    blocks = tuple(tuple(sorted(c, key=ground.index)) for c in _cycles_of(comp, ground))
    return SetPartition(ground, blocks)


def kreweras_disk_permutation(p: SetPartition) -> CyclicPermutation:
    """Disk Kreweras complement with its cycle structure retained."""
    if not is_noncrossing_partition(p):
        raise ValueError("Kreweras complement requires a non-crossing partition")
    ground = p.ground
    gamma = {a: b for a, b in zip(ground, ground[1:] + ground[:1])}
    inv = _invert(_partition_as_mapping(p))
    comp = _compose(inv, gamma)
    return CyclicPermutation(ground, tuple(_cycles_of(comp, ground)))


def refines(p: SetPartition, v: SetPartition) -> bool:
    """Whether ``p <= v`` in the refinement order (every block of ``p`` is
    contained in a block of ``v``)."""
    if p.ground != v.ground:
        raise ValueError("partitions live on different ground sets")
    where = {}
    for i, block in enumerate(v.blocks):
        for x in block:
            where[x] = i
    return all(len({where[x] for x in b}) == 1 for b in p.blocks)


@lru_cache(maxsize=None)
def _moebius_cached(p_blocks, v_blocks, ground) -> int:
    if p_blocks == v_blocks:
        return 1
    p = SetPartition(ground, p_blocks)
    v = SetPartition(ground, v_blocks)
    total = 0
    for tau in enumerate_ncp(ground):
        if tau.blocks == p_blocks:
            continue
        if refines(p, tau) and refines(tau, v):
            total += _moebius_cached(tau.blocks, v_blocks, ground)
    return -total


def moebius_nc(p: SetPartition, v: SetPartition) -> int:
    """Moebius function of the non-crossing partition lattice, by the
    recursion ``mu(p,p) = 1``, ``mu(p,v) = -sum_{p < t <= v} mu(t,v)``."""
    if p.ground != v.ground:
        raise ValueError("partitions live on different ground sets")
    if not (is_noncrossing_partition(p) and is_noncrossing_partition(v)):
        raise ValueError("Moebius function is defined on non-crossing partitions")
    if not refines(p, v):
        raise ValueError("arguments are not comparable in refinement order")
    return _moebius_cached(p.blocks, v.blocks, p.ground)


# ---------------------------------------------------------------------------
# annular permutations
# ---------------------------------------------------------------------------


def _cycle_count(word: tuple[int, ...]) -> int:
    n = len(word)
    seen = [False] * n
    count = 0
    for i in range(n):
        if seen[i]:
            continue
        count += 1
        j = i
        while not seen[j]:
            seen[j] = True
            j = word[j]
    return count


@lru_cache(maxsize=None)
def _annular_words(outer: int, inner: int) -> tuple[tuple[int, ...], ...]:
    """Annular non-crossing permutations of the (outer, inner)-annulus as
    0-based words, by brute force.

    Membership is the algebraic characterization: at least one cycle meets
    both circles and ``#cycles(p) + #cycles(inverse(p) o gamma)`` equals the
    ground size (the geodesic condition equivalent to drawability with
    non-crossing clockwise-standard cycles).
    """
    n = outer + inner
    gamma = [0] * n
    for circle in (range(outer), range(outer, n)):
        circle = list(circle)
        for a, b in zip(circle, circle[1:] + circle[:1]):
            gamma[a] = b
    out = []
    for word in itertools.permutations(range(n)):
        inv = [0] * n
        for i, w in enumerate(word):
            inv[w] = i
        comp = tuple(inv[gamma[x]] for x in range(n))
        if _cycle_count(word) + _cycle_count(comp) != n:
            continue
        # connectivity: some cycle visits both circles
        seen = [False] * n
        connected = False
        for i in range(n):
            if seen[i]:
                continue
            has_outer = has_inner = False
            j = i
            while not seen[j]:
                seen[j] = True
                if j < outer:
                    has_outer = True
                else:
                    has_inner = True
                j = word[j]
            if has_outer and has_inner:
                connected = True
                break
        if connected:
            out.append(word)
    return tuple(out)


def _word_to_permutation(word: tuple[int, ...], ground: tuple[int, ...]) -> CyclicPermutation:
    mapping = {ground[i]: ground[word[i]] for i in range(len(word))}
    return CyclicPermutation(ground, tuple(_cycles_of(mapping, ground)))


def enumerate_annular_ncp(shape: AnnulusShape, cap: int = PARTITION_CAP) -> list[CyclicPermutation]:
    """All annular non-crossing permutations of the given annulus."""
    if shape.outer < 1 or shape.inner < 1:
        raise ValueError("both circles must carry at least one label")
    check_cap(shape.total, cap, "annular permutation enumeration")
    ground = shape.ground()
    return [_word_to_permutation(w, ground) for w in _annular_words(shape.outer, shape.inner)]


def is_annular_noncrossing(p: CyclicPermutation, shape: AnnulusShape) -> bool:
    ground = shape.ground()
    if p.ground != ground:
        return False
    mapping = p.mapping()
    word = tuple(mapping[g] - 1 for g in ground)
    return word in set(_annular_words(shape.outer, shape.inner))


def kreweras_annular(p: CyclicPermutation, shape: AnnulusShape) -> CyclicPermutation:
    """Annular Kreweras complement ``inverse(p) o gamma``; a bijection of the
    annular non-crossing permutations with ``len(p) + len(K(p))`` equal to
    the ground size."""
    if not is_annular_noncrossing(p, shape):
        raise ValueError("not an annular non-crossing permutation of this shape")
    ground = shape.ground()
    comp = _compose(_invert(p.mapping()), shape.full_cycle())
    return CyclicPermutation(ground, tuple(_cycles_of(comp, ground)))


def annular_pairings(shape: AnnulusShape, cap: int = PARTITION_CAP) -> list[CyclicPermutation]:
    """The annular non-crossing permutations all of whose cycles are
    transpositions; empty when the total label count is odd."""
    if shape.total % 2 == 1:
        return []
    return [p for p in enumerate_annular_ncp(shape, cap=cap) if all(len(c) == 2 for c in p.cycles)]


def enumerate_marked(shape: AnnulusShape, cap: int = PARTITION_CAP) -> list[MarkedPartitionPair]:
    """All pairs of disk non-crossing partitions of the two circles with one
    marked block on each circle."""
    if shape.outer < 1 or shape.inner < 1:
        raise ValueError("both circles must carry at least one label")
    out = []
    for left in enumerate_ncp(shape.outer_labels(), cap=cap):
        for right in enumerate_ncp(shape.inner_labels(), cap=cap):
            for i in range(len(left.blocks)):
                for j in range(len(right.blocks)):
                    out.append(MarkedPartitionPair(left, right, i, j))
    return out


# ---------------------------------------------------------------------------
# non-crossing graphs
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _chords_and_conflicts(n: int):
    """All chords on ``n`` cyclic positions and, per chord, the bitmask of
    earlier chords it crosses."""
    chords = list(itertools.combinations(range(n), 2))
    index = {c: i for i, c in enumerate(chords)}
    conflict = [0] * len(chords)
    for (a, b), (c, d) in itertools.combinations(chords, 2):
        if len({a, b, c, d}) < 4:
            continue  # chords sharing an endpoint never cross
        # disjoint chords cross iff exactly one of c,d lies strictly inside (a,b)
        if (a < c < b) != (a < d < b):
            i, j = index[(a, b)], index[(c, d)]
            conflict[max(i, j)] |= 1 << min(i, j)
    return tuple(chords), tuple(conflict)


def iter_ncg_edge_sets(n: int) -> Iterator[tuple[tuple[int, int], ...]]:
    """Yield the edge sets (as position pairs) of all simple loop-free
    non-crossing graphs on ``n`` cyclic positions, by backtracking over
    chords in lexicographic order."""
    chords, conflict = _chords_and_conflicts(n)
    m = len(chords)

    def rec(i: int, chosen_mask: int, chosen: list[tuple[int, int]]):
        if i == m:
            yield tuple(chosen)
            return
        yield from rec(i + 1, chosen_mask, chosen)
        if not (conflict[i] & chosen_mask):
            chosen.append(chords[i])
            yield from rec(i + 1, chosen_mask | (1 << i), chosen)
            chosen.pop()

    yield from rec(0, 0, [])


@lru_cache(maxsize=None)
def _ncg_edge_sets(n: int) -> tuple[tuple[tuple[int, int], ...], ...]:
    return tuple(iter_ncg_edge_sets(n))


def _positions_connected(n: int, edges: Iterable[tuple[int, int]]) -> bool:
    parent = list(range(n))

    def find(x):
        while parent[x] != x:
            parent[x] = parent[parent[x]]
            x = parent[x]
        return x

    comp = n
    for u, v in edges:
        ru, rv = find(u), find(v)
        if ru != rv:
            parent[ru] = rv
            comp -= 1
    return comp <= 1


def enumerate_ncg(
    ground: Sequence[int],
    connected_only: bool = False,
    coloring: Optional[Sequence[int]] = None,
    cap: int = GRAPH_CAP,
) -> list[WeightedGraph]:
    """All simple loop-free graphs on a cyclically ordered ground set whose
    chords are pairwise non-crossing; optionally only the connected ones,
    optionally carrying a binary color vector."""
    ground = tuple(ground)
    n = len(ground)
    check_cap(n, cap, "non-crossing graph enumeration")
    if coloring is not None and len(coloring) != n:
        raise ValueError("coloring length must match ground size")
    colors = tuple(int(b) for b in coloring) if coloring is not None else None
    out = []
    for pos_edges in _ncg_edge_sets(n):
        if connected_only and not _positions_connected(n, pos_edges):
            continue
        edges = tuple((ground[u], ground[v]) for u, v in pos_edges)
        out.append(WeightedGraph(ground, edges, colors))
    return out
