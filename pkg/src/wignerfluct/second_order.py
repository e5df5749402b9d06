"""Scalar second-order layer: fluctuation moments of resolvent traces.

The central object is the set function ``fluctuation_moment(left, right)``:
the limiting covariance (scaled by the squared dimension) of two centered
normalized resolvent-chain traces with identity observable matrices.  It is
defined by a linear one-step recursion in the left argument whose source
terms carry the ensemble dependence; linearity splits it into four additive
components (a Gaussian-unitary part and corrections proportional to the
fourth cumulant ``kappa4``, the off-diagonal second moment ``sigma``, and
the shifted diagonal second moment ``omega2_tilde``).

Two independent routes compute the Gaussian part: the recursion and a
weighted sum over a recursively constructed multiset of planar annulus
graphs ("good graphs", loops and double edges allowed).  Second-order free
cumulants are obtained by inverting their defining relation over annular
non-crossing permutations and marked partition pairs.
"""

from __future__ import annotations

from collections import Counter
from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Sequence

from .config import FLUCTUATION_CAP, GOOD_GRAPH_CAP, check_cap
from .ncgeom import (
    AnnulusShape,
    WeightedGraph,
    _ncg_edge_sets,
    enumerate_annular_ncp,
    enumerate_marked,
    enumerate_ncp,
)
from .semicircle import (
    divided_difference,
    edge_weight,
    free_cumulant,
    mixed_chain_moment,
    stieltjes,
)

__all__ = [
    "EnsembleParams",
    "GUE_PARAMS",
    "fluctuation_moment",
    "fluctuation_component",
    "second_cumulant",
    "good_graphs",
    "good_graph_multiplicities",
    "fluctuation_moment_graph_sum",
]

Component = Literal["gue", "kappa", "sigma", "omega"]


@dataclass(frozen=True)
class EnsembleParams:
    """Ensemble parameters steering the fluctuation recursion.

    ``kappa4`` is the normalized fourth cumulant of the off-diagonal entry
    distribution, ``sigma`` its second moment (in ``[-1, 1]``), and
    ``omega2_tilde`` the diagonal second moment shifted by ``1 + sigma``
    (at least ``-2``).
    """

    kappa4: float = 0.0
    sigma: float = 0.0
    omega2_tilde: float = 0.0

    def __post_init__(self):
        if abs(self.sigma) > 1.0:
            raise ValueError("sigma must lie in [-1, 1]")
        if self.omega2_tilde < -2.0:
            raise ValueError("omega2_tilde must be >= -2")


GUE_PARAMS = EnsembleParams(0.0, 0.0, 0.0)


def _as_tuple(zs: Sequence[complex]) -> tuple[complex, ...]:
    return tuple(complex(z) for z in zs)


def _wrap(right: tuple[complex, ...], start: int, stop: int) -> tuple[complex, ...]:
    """Cyclic stretch of the inner circle from position ``start`` around to
    ``stop`` inclusive; ``start == stop`` doubles that endpoint."""
    return right[start:] + right[: stop + 1]


def _tour(right: tuple[complex, ...], j: int) -> tuple[complex, ...]:
    """Full cyclic tour of the inner circle entered at position ``j``; the
    entry parameter appears at both ends."""
    return right[j:] + right[:j] + (right[j],)


@lru_cache(maxsize=None)
def _component(left: tuple[complex, ...], right: tuple[complex, ...],
               which: Component, sigma: float) -> complex:
    """One additive component of the fluctuation moment, by the one-step
    recursion in the left argument with a single source term enabled.

    ``sigma`` only matters for the ``sigma`` component, whose source is a
    transpose-aware chain moment and therefore depends on it internally.
    """
    if not left or not right:
        return 0.0 + 0.0j
    k, ell = len(left), len(right)
    m1 = stieltjes(left[0])
    prefactor = m1 * (1.0 + edge_weight(left[0], left[-1]))

    acc = _component(left[1:], right, which, sigma)
    for j in range(1, k):
        acc += _component(left[:j], right, which, sigma) * divided_difference(left[j - 1:])
    for j in range(2, k + 1):
        acc += divided_difference(left[:j]) * _component(left[j - 1:], right, which, sigma)

    if which == "gue":
        for j in range(ell):
            acc += divided_difference(left + _tour(right, j))
    elif which == "kappa":
        for r in range(1, k + 1):
            head = divided_difference(left[:r]) * divided_difference(left[r - 1:])
            for s in range(ell):
                for t in range(0, s + 1):
                    acc += head * divided_difference(_wrap(right, s, t)) \
                        * divided_difference(right[t:s + 1])
                for t in range(s, ell):
                    acc += head * divided_difference(right[s:t + 1]) \
                        * divided_difference(_wrap(right, t, s))
    elif which == "sigma":
        bits = (0,) * k + (1,) * (ell + 1)
        for j in range(ell):
            acc += mixed_chain_moment(left + _tour(right, j), bits, sigma)
    elif which == "omega":
        dd_left = divided_difference(left)
        for j in range(ell):
            acc += dd_left * divided_difference(_tour(right, j))
    else:
        raise ValueError(f"unknown component {which!r}")

    return prefactor * acc


def fluctuation_component(left: Sequence[complex], right: Sequence[complex],
                          which: Component,
                          params: EnsembleParams = GUE_PARAMS,
                          cap: int = FLUCTUATION_CAP) -> complex:
    """A single additive component of :func:`fluctuation_moment`, without
    its ensemble coefficient."""
    left, right = _as_tuple(left), _as_tuple(right)
    check_cap(len(left) + len(right), cap, "fluctuation recursion")
    return _component(left, right, which, float(params.sigma))


def fluctuation_moment(left: Sequence[complex], right: Sequence[complex],
                       params: EnsembleParams = GUE_PARAMS,
                       cap: int = FLUCTUATION_CAP) -> complex:
    """Limiting dimension-squared-scaled covariance of two centered
    normalized resolvent-chain traces (identity observables), assembled from
    its four components with coefficients ``(1, kappa4, sigma,
    omega2_tilde)``.  Zero when either argument is empty."""
    left, right = _as_tuple(left), _as_tuple(right)
    if not left or not right:
        return 0.0 + 0.0j
    check_cap(len(left) + len(right), cap, "fluctuation recursion")
    sigma = float(params.sigma)
    value = _component(left, right, "gue", sigma)
    if params.kappa4:
        value += params.kappa4 * _component(left, right, "kappa", sigma)
    if sigma:
        value += sigma * _component(left, right, "sigma", sigma)
    if params.omega2_tilde:
        value += params.omega2_tilde * _component(left, right, "omega", sigma)
    return value


# ---------------------------------------------------------------------------
# second-order free cumulants (Gaussian-unitary component)
# ---------------------------------------------------------------------------


def _rotations(t: tuple[complex, ...]) -> list[tuple[complex, ...]]:
    return [t[i:] + t[:i] for i in range(len(t))]


def _cyclic_key(t: tuple[complex, ...]) -> tuple:
    return min(((z.real, z.imag) for z in r) for r in _rotations(t)), len(t)


def _normalize_pair(left, right):
    lk = min(_rotations(left), key=lambda r: [(z.real, z.imag) for z in r])
    rk = min(_rotations(right), key=lambda r: [(z.real, z.imag) for z in r])
    a = [(z.real, z.imag) for z in lk]
    b = [(z.real, z.imag) for z in rk]
    return (lk, rk) if (len(lk), a) <= (len(rk), b) else (rk, lk)


@lru_cache(maxsize=None)
def _second_cumulant_cached(left: tuple[complex, ...], right: tuple[complex, ...]) -> complex:
    k, ell = len(left), len(right)
    zs = left + right
    value = _component(left, right, "gue", 0.0)
    for perm in enumerate_annular_ncp(AnnulusShape(k, ell)):
        prod = 1.0 + 0.0j
        for cyc in perm.cycles:
            prod *= free_cumulant([zs[v - 1] for v in cyc])
        value -= prod
    for marked in enumerate_marked(AnnulusShape(k, ell)):
        u1, u2 = marked.left_block, marked.right_block
        if len(u1) == k and len(u2) == ell:
            continue  # the full marked pair is the unknown itself
        term = second_cumulant([zs[v - 1] for v in u1], [zs[v - 1] for v in u2])
        for i, block in enumerate(marked.left.blocks):
            if i != marked.marked_left:
                term *= free_cumulant([zs[v - 1] for v in block])
        for i, block in enumerate(marked.right.blocks):
            if i != marked.marked_right:
                term *= free_cumulant([zs[v - 1] for v in block])
        value -= term
    return value


def second_cumulant(left: Sequence[complex], right: Sequence[complex],
                    cap: int = FLUCTUATION_CAP) -> complex:
    """Second-order free cumulant of the Gaussian-unitary fluctuation
    moment, obtained by peeling off the annular-permutation sum and all
    marked terms with smaller marked blocks from the defining relation (the
    fully marked pair carries coefficient one, which makes the inversion
    well-defined)."""
    left, right = _as_tuple(left), _as_tuple(right)
    if not left or not right:
        raise ValueError("second cumulant needs two nonempty argument multisets")
    check_cap(len(left) + len(right), cap, "second-order cumulant")
    left, right = _normalize_pair(left, right)
    return _second_cumulant_cached(left, right)


# ---------------------------------------------------------------------------
# good graphs
# ---------------------------------------------------------------------------


Edge = tuple[int, int]
EdgeSet = tuple[Edge, ...]


def _canon_edges(edges) -> EdgeSet:
    return tuple(sorted((u, v) if u <= v else (v, u) for u, v in edges))


@lru_cache(maxsize=None)
def _ncg_on_labels(labels: tuple[int, ...]) -> tuple[EdgeSet, ...]:
    out = []
    for pos_edges in _ncg_edge_sets(len(labels)):
        out.append(_canon_edges((labels[u], labels[v]) for u, v in pos_edges))
    return tuple(out)


@lru_cache(maxsize=None)
def _ncg_with_end_edge(labels: tuple[int, ...]) -> tuple[EdgeSet, ...]:
    """Simple non-crossing graphs on the cyclic label sequence that contain
    the edge joining the first and last label (cyclically adjacent, so the
    restriction never conflicts with other chords)."""
    n = len(labels)
    want = (min(labels[0], labels[-1]), max(labels[0], labels[-1]))
    out = []
    for pos_edges in _ncg_edge_sets(n):
        if (0, n - 1) in pos_edges:
            out.append(_canon_edges((labels[u], labels[v]) for u, v in pos_edges))
    assert all(want in g for g in out)
    return tuple(out)


def _tau_images(outer: tuple[int, ...], inner: tuple[int, ...], j: int) -> list[EdgeSet]:
    """Annulus graphs obtained from disk non-crossing graphs on the label
    sequence ``outer + inner[j:] + inner[:j] + (inner[j],)`` with the edge
    joining the first and the duplicated last label prescribed; merging the
    two copies of ``inner[j]`` creates the loops and double edges."""
    seq = outer + inner[j:] + inner[:j]
    n = len(seq) + 1
    out = []
    for pos_edges in _ncg_edge_sets(n):
        if (0, n - 1) not in pos_edges:
            continue
        merged = []
        for u, v in pos_edges:
            lu = seq[u] if u < n - 1 else inner[j]
            lv = seq[v] if v < n - 1 else inner[j]
            merged.append((lu, lv))
        out.append(_canon_edges(merged))
    return out


@lru_cache(maxsize=None)
def _good_base(outer: tuple[int, ...], inner: tuple[int, ...]) -> tuple[EdgeSet, ...]:
    """The good-graph multiset before the final doubling step (all graphs
    without the prescribed copy of the edge joining the outer endpoints)."""
    if not outer or not inner:
        return ()
    k = len(outer)
    parts: list[EdgeSet] = []
    # isolated first outer vertex
    parts.extend(_good_multiset(outer[1:], inner))
    # disk graph on an outer prefix (with its closing edge) x good suffix
    for j in range(2, k + 1):
        suffix = _good_multiset(outer[j - 1:], inner)
        if not suffix:
            continue
        for g1 in _ncg_with_end_edge(outer[:j]):
            for g2 in suffix:
                parts.append(_canon_edges(g1 + g2))
    # good prefix (with its closing edge, a loop when the prefix is a point)
    # x disk graph on an outer suffix
    for j in range(1, k):
        prefix = _good_prescribed(outer[:j], inner)
        if not prefix:
            continue
        for g2 in _ncg_on_labels(outer[j - 1:]):
            for g1 in prefix:
                parts.append(_canon_edges(g1 + g2))
    # images of disk graphs on the doubled-label sequence
    for j in range(len(inner)):
        parts.extend(_tau_images(outer, inner, j))
    return tuple(parts)


def _close_edge(outer: tuple[int, ...]) -> Edge:
    # joins the outer endpoints; a loop when there is a single outer vertex
    return (min(outer[0], outer[-1]), max(outer[0], outer[-1]))


@lru_cache(maxsize=None)
def _good_multiset(outer: tuple[int, ...], inner: tuple[int, ...]) -> tuple[EdgeSet, ...]:
    base = _good_base(outer, inner)
    e = _close_edge(outer) if outer else None
    return base + tuple(_canon_edges(g + (e,)) for g in base)


@lru_cache(maxsize=None)
def _good_prescribed(outer: tuple[int, ...], inner: tuple[int, ...]) -> tuple[EdgeSet, ...]:
    base = _good_base(outer, inner)
    e = _close_edge(outer)
    return tuple(_canon_edges(g + (e,)) for g in base)


def good_graphs(shape: AnnulusShape, cap: int = GOOD_GRAPH_CAP) -> list[WeightedGraph]:
    """The good-graph multiset of the annulus: planar annulus graphs with
    loops and double edges allowed, built by the one-step recursion that
    mirrors the fluctuation recursion (each construction step is duplicated
    with and without an extra edge joining the outer endpoints, and the
    doubled-label disk graphs are mapped onto the annulus by merging the two
    label copies).  Graphs are repeated according to multiplicity."""
    if shape.outer < 1 or shape.inner < 1:
        raise ValueError("both circles must carry at least one label")
    check_cap(shape.total, cap, "good-graph construction")
    ground = shape.ground()
    edge_sets = _good_multiset(shape.outer_labels(), shape.inner_labels())
    return [WeightedGraph(ground, es) for es in edge_sets]


def good_graph_multiplicities(shape: AnnulusShape, cap: int = GOOD_GRAPH_CAP) -> dict[EdgeSet, int]:
    """Edge multisets of the good graphs with their multiplicities."""
    if shape.outer < 1 or shape.inner < 1:
        raise ValueError("both circles must carry at least one label")
    check_cap(shape.total, cap, "good-graph construction")
    return dict(Counter(_good_multiset(shape.outer_labels(), shape.inner_labels())))


def fluctuation_moment_graph_sum(left: Sequence[complex], right: Sequence[complex],
                                 cap: int = GOOD_GRAPH_CAP) -> complex:
    """Gaussian-unitary fluctuation moment as the weighted sum over the
    good-graph multiset: the product of the Stieltjes transforms times the
    sum over graphs of the product of edge weights.  An independent route
    that must agree with the ``gue`` component of the recursion."""
    left, right = _as_tuple(left), _as_tuple(right)
    if not left or not right:
        return 0.0 + 0.0j
    check_cap(len(left) + len(right), cap, "good-graph formula")
    k, ell = len(left), len(right)
    zs = left + right

    weights: dict[Edge, complex] = {}
    for a in range(1, k + ell + 1):
        for b in range(a, k + ell + 1):
            weights[(a, b)] = edge_weight(zs[a - 1], zs[b - 1])

    prod_m = 1.0 + 0.0j
    for z in zs:
        prod_m *= stieltjes(z)

    total = 0.0 + 0.0j
    for es in _good_multiset(tuple(range(1, k + 1)), tuple(range(k + 1, k + ell + 1))):
        w = 1.0 + 0.0j
        for e in es:
            w *= weights[e]
        total += w
    return prod_m * total
