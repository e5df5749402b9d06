"""Deterministic-matrix layer: chains of resolvents and observables.

A chain is an alternating product of resolvents (optionally transposed) and
deterministic matrices.  This module computes

* the deterministic matrix approximating a chain with its last observable
  stripped (:func:`chain_deterministic_matrix`),
* the deterministic normalized trace of a chain
  (:func:`chain_moment`), transpose-aware,
* the matrix-valued fluctuation recursion
  (:func:`chain_fluctuation_moment`): the limiting dimension-squared-scaled
  covariance of two centered chain traces, with Hadamard-product source
  terms carrying the ensemble dependence,
* closed combinatorial formulas over annular non-crossing permutations and
  marked partition pairs for the Gaussian-unitary and ``sigma`` components,
  plus the single-factor closed form of the ``omega`` component.

The closed formulas and the recursion are fully independent code paths; the
test suite drives them against each other over random chains.
"""

from __future__ import annotations

from dataclasses import dataclass
from functools import lru_cache
from typing import Literal, Optional, Sequence

import numpy as np

from .config import CHAIN_FLUCTUATION_CAP, check_cap
from .ncgeom import (
    AnnulusShape,
    enumerate_annular_ncp,
    enumerate_marked,
    enumerate_ncp,
    kreweras_annular,
    kreweras_disk,
)
from .second_order import (
    EnsembleParams,
    GUE_PARAMS,
    _component,
    fluctuation_moment,
    second_cumulant,
)
from .semicircle import (
    divided_difference,
    edge_weight,
    free_cumulant,
    mixed_chain_cumulant,
    stieltjes,
)

__all__ = [
    "ChainFactor",
    "ChainSpec",
    "chain_deterministic_matrix",
    "chain_moment",
    "chain_fluctuation_moment",
    "chain_fluctuation_component",
    "closed_gue_formula",
    "closed_sigma_formula",
    "omega_formula_1x1",
]

Component = Literal["gue", "kappa", "sigma", "omega"]


@dataclass(frozen=True)
class ChainFactor:
    """One resolvent-observable factor of a chain: spectral parameter ``z``,
    observable matrix, and whether the resolvent enters transposed."""

    z: complex
    matrix: np.ndarray
    transposed: bool = False

    def __post_init__(self):
        z = complex(self.z)
        if z.imag == 0.0:
            raise ValueError("spectral parameter must have nonzero imaginary part")
        a = np.ascontiguousarray(self.matrix, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("observable must be a square matrix")
        if not np.all(np.isfinite(a)):
            raise ValueError("observable has non-finite entries")
        a.setflags(write=False)
        object.__setattr__(self, "z", z)
        object.__setattr__(self, "matrix", a)
        object.__setattr__(self, "transposed", bool(self.transposed))

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    def key(self):
        return (self.z, self.transposed, self.matrix.tobytes())


@dataclass(frozen=True)
class ChainSpec:
    """An ordered list of chain factors sharing one matrix dimension."""

    factors: tuple[ChainFactor, ...]

    def __post_init__(self):
        factors = tuple(self.factors)
        dims = {f.dim for f in factors}
        if len(dims) > 1:
            raise ValueError(f"chain factors have mismatched dimensions {sorted(dims)}")
        object.__setattr__(self, "factors", factors)

    def __len__(self) -> int:
        return len(self.factors)

    def __iter__(self):
        return iter(self.factors)

    @property
    def dim(self) -> int:
        if not self.factors:
            raise ValueError("empty chain has no dimension")
        return self.factors[0].dim

    def zs(self) -> tuple[complex, ...]:
        return tuple(f.z for f in self.factors)

    def bits(self) -> tuple[int, ...]:
        return tuple(int(f.transposed) for f in self.factors)

    @staticmethod
    def of(items: Sequence[tuple]) -> "ChainSpec":
        """Build from ``(z, matrix)`` or ``(z, matrix, transposed)`` tuples."""
        return ChainSpec(tuple(ChainFactor(*item) for item in items))


def _ntrace(a: np.ndarray) -> complex:
    return complex(np.trace(a)) / a.shape[0]


def _htrace(x: np.ndarray, y: np.ndarray) -> complex:
    """Normalized trace of the entrywise product: mean of the products of
    the two diagonals."""
    return complex(np.mean(np.diagonal(x) * np.diagonal(y)))


@lru_cache(maxsize=None)
def _disk_structures(k: int):
    """Pairs (partition blocks, Kreweras blocks) on positions ``0..k-1``."""
    out = []
    for p in enumerate_ncp(tuple(range(k))):
        out.append((p.blocks, kreweras_disk(p).blocks))
    return tuple(out)


@lru_cache(maxsize=None)
def _annular_structures(k: int, ell: int):
    """Pairs (permutation cycles, Kreweras-complement cycles) on labels
    ``1..k+ell``."""
    shape = AnnulusShape(k, ell)
    out = []
    for perm in enumerate_annular_ncp(shape):
        out.append((perm.cycles, kreweras_annular(perm, shape).cycles))
    return tuple(out)


@lru_cache(maxsize=None)
def _marked_structures(k: int, ell: int):
    """Marked partition pairs on labels ``1..k+ell`` with the circle-wise
    Kreweras complements of both circles."""
    out = []
    for marked in enumerate_marked(AnnulusShape(k, ell)):
        out.append(
            (
                marked.left.blocks,
                marked.right.blocks,
                marked.marked_left,
                marked.marked_right,
                kreweras_disk(marked.left).blocks,
                kreweras_disk(marked.right).blocks,
            )
        )
    return tuple(out)


def _cycle_runs(cycle: tuple[int, ...], outer_count: int) -> tuple[tuple[int, ...], tuple[int, ...]]:
    """Split a connecting cycle of an annular non-crossing permutation into
    its contiguous outer and inner runs (every such cycle visits each circle
    in one contiguous arc)."""
    n = len(cycle)
    for r in range(n):
        rot = cycle[r:] + cycle[:r]
        flags = [v <= outer_count for v in rot]
        if not flags[0]:
            continue
        try:
            first_inner = flags.index(False)
        except ValueError:
            return rot, ()
        if all(not f for f in flags[first_inner:]):
            return rot[:first_inner], rot[first_inner:]
    raise ValueError(f"cycle {cycle} has no contiguous outer/inner decomposition")


# ---------------------------------------------------------------------------
# first-order quantities
# ---------------------------------------------------------------------------


class _ChainCalculator:
    """Shared per-evaluation caches for deterministic chain quantities."""

    def __init__(self, sigma: float = 0.0):
        self.sigma = float(sigma)
        self._moment: dict = {}
        self._matrix: dict = {}

    @staticmethod
    def _key(factors) -> tuple:
        return tuple(f.key() for f in factors)

    def moment(self, factors: tuple[ChainFactor, ...]) -> complex:
        """Deterministic normalized trace of the chain (transpose-aware)."""
        key = self._key(factors)
        if key in self._moment:
            return self._moment[key]
        k = len(factors)
        if k == 0:
            raise ValueError("chain moment of an empty chain")
        zs = tuple(f.z for f in factors)
        bits = tuple(int(f.transposed) for f in factors)
        mats = tuple(f.matrix for f in factors)
        plain = not any(bits)
        total = 0.0 + 0.0j
        for pi_blocks, kc_blocks in _disk_structures(k):
            scal = 1.0 + 0.0j
            for block in pi_blocks:
                sub_z = tuple(zs[i] for i in block)
                if plain:
                    scal *= free_cumulant(sub_z)
                else:
                    scal *= mixed_chain_cumulant(sub_z, tuple(bits[i] for i in block), self.sigma)
            coeff = 1.0 + 0.0j
            for block in kc_blocks:
                prod = mats[block[0]]
                for i in block[1:]:
                    prod = prod @ mats[i]
                coeff *= _ntrace(prod)
            total += coeff * scal
        self._moment[key] = total
        return total

    def det_matrix(self, factors: tuple[ChainFactor, ...]) -> np.ndarray:
        """Deterministic matrix approximating the chain with the last
        observable stripped.  Requires a transpose-free chain."""
        key = self._key(factors)
        if key in self._matrix:
            return self._matrix[key]
        k = len(factors)
        if k == 0:
            raise ValueError("deterministic matrix of an empty chain")
        if any(f.transposed for f in factors):
            raise ValueError("deterministic matrix is defined for transpose-free chains")
        n = factors[0].dim
        zs = tuple(f.z for f in factors)
        mats = tuple(f.matrix for f in factors)
        eye = np.eye(n, dtype=complex)
        total = np.zeros((n, n), dtype=complex)
        for pi_blocks, kc_blocks in _disk_structures(k):
            scal = 1.0 + 0.0j
            for block in pi_blocks:
                scal *= free_cumulant(tuple(zs[i] for i in block))
            coeff = 1.0 + 0.0j
            carrier = eye
            for block in kc_blocks:
                if k - 1 in block:
                    prod = eye
                    for i in block:
                        if i != k - 1:
                            prod = prod @ mats[i]
                    carrier = prod
                else:
                    prod = mats[block[0]]
                    for i in block[1:]:
                        prod = prod @ mats[i]
                    coeff *= _ntrace(prod)
            total = total + (coeff * scal) * carrier
        self._matrix[key] = total
        return total


def chain_deterministic_matrix(chain: ChainSpec) -> np.ndarray:
    """Deterministic matrix approximating ``resolvent(z_1) A_1 ...
    resolvent(z_k)`` (the final observable is excluded by construction;
    tracing against it recovers :func:`chain_moment`)."""
    return _ChainCalculator().det_matrix(tuple(chain.factors))


def chain_moment(chain: ChainSpec, sigma: float = 0.0) -> complex:
    """Deterministic normalized trace of a chain: a sum over non-crossing
    partitions pairing free cumulants of the spectral parameters with
    normalized traces of observable products over the Kreweras complement.
    Transposed positions are handled through the transpose-aware cumulants,
    which require the off-diagonal second moment ``sigma``."""
    return _ChainCalculator(sigma).moment(tuple(chain.factors))


# ---------------------------------------------------------------------------
# the matrix-valued fluctuation recursion
# ---------------------------------------------------------------------------


class _FluctuationEvaluator:
    def __init__(self, which: Component, sigma: float, dim: int):
        self.which = which
        self.sigma = sigma
        self.calc = _ChainCalculator(sigma)
        eye = np.eye(dim, dtype=complex)
        eye.setflags(write=False)
        self.eye = eye
        self._memo: dict = {}

    def _bare(self, z: complex, transposed: bool = False) -> ChainFactor:
        return ChainFactor(z, self.eye, transposed)

    def evaluate(self, left: tuple[ChainFactor, ...], right: tuple[ChainFactor, ...]) -> complex:
        if not left or not right:
            return 0.0 + 0.0j
        key = (self.calc._key(left), self.calc._key(right))
        if key in self._memo:
            return self._memo[key]
        k = len(left)
        z1, zk = left[0].z, left[-1].z
        m1 = stieltjes(z1)
        q1k = edge_weight(z1, zk)
        a_last = left[-1].matrix
        tr_last = _ntrace(a_last)

        acc = 0.0 + 0.0j
        if k >= 2:
            merged = left[1:-1] + (ChainFactor(zk, a_last @ left[0].matrix),)
            companion = left[1:-1] + (ChainFactor(zk, left[0].matrix),)
            acc += self.evaluate(merged, right)
            acc += q1k * self.evaluate(companion, right) * tr_last
        for j in range(1, k):
            head = left[: j - 1] + (self._bare(left[j - 1].z),)
            tail_full = self.calc.moment(left[j - 1:])
            tail_open = self.calc.moment(left[j - 1: -1] + (self._bare(zk),))
            acc += self.evaluate(head, right) * (tail_full + q1k * tail_open * tr_last)
        for j in range(2, k + 1):
            head_moment = self.calc.moment(left[: j - 1] + (self._bare(left[j - 1].z),))
            acc += head_moment * (
                self.evaluate(left[j - 1:], right)
                + q1k * self.evaluate(left[j - 1: -1] + (self._bare(zk),), right) * tr_last
            )
        acc += self._source(left, right, q1k, tr_last)

        value = m1 * acc
        self._memo[key] = value
        return value

    # -- source terms -----------------------------------------------------

    def _source(self, left, right, q1k, tr_last) -> complex:
        if self.which == "gue":
            return self._source_gue(left, right, q1k, tr_last)
        if self.which == "kappa":
            return self._source_kappa(left, right, q1k, tr_last)
        if self.which == "sigma":
            return self._source_sigma(left, right, q1k, tr_last)
        if self.which == "omega":
            return self._source_omega(left, right, q1k, tr_last)
        raise ValueError(f"unknown component {self.which!r}")

    def _source_gue(self, left, right, q1k, tr_last) -> complex:
        ell = len(right)
        zk = left[-1].z
        open_left = left[:-1] + (self._bare(zk),)
        total = 0.0 + 0.0j
        for j in range(ell):
            tour = right[j:] + right[:j] + (self._bare(right[j].z),)
            total += self.calc.moment(left + tour)
            total += q1k * self.calc.moment(open_left + tour) * tr_last
        return total

    def _source_kappa(self, left, right, q1k, tr_last) -> complex:
        k, ell = len(left), len(right)
        a_last = left[-1].matrix
        total = 0.0 + 0.0j
        for r in range(1, k + 1):
            m_head = self.calc.det_matrix(left[:r])
            m_tail = self.calc.det_matrix(left[r - 1:])
            m_tail_obs = m_tail @ a_last
            for s in range(ell):
                for t in range(0, s + 1):
                    m_cyc = self.calc.det_matrix(right[s:] + right[: t + 1])
                    m_int = self.calc.det_matrix(right[t: s + 1])
                    total += _htrace(m_head, m_cyc) * (
                        _htrace(m_tail_obs, m_int) + q1k * _htrace(m_tail, m_int) * tr_last
                    )
                for t in range(s, ell):
                    m_int = self.calc.det_matrix(right[s: t + 1])
                    m_cyc = self.calc.det_matrix(right[t:] + right[: s + 1])
                    total += _htrace(m_head, m_int) * (
                        _htrace(m_tail_obs, m_cyc) + q1k * _htrace(m_tail, m_cyc) * tr_last
                    )
        return total

    def _source_sigma(self, left, right, q1k, tr_last) -> complex:
        ell = len(right)
        zk = left[-1].z
        open_left = left[:-1] + (self._bare(zk),)
        total = 0.0 + 0.0j
        for j in range(ell):
            tail = []
            for i in range(ell):
                res = right[(j - i) % ell]
                mat = right[(j - i - 1) % ell].matrix
                tail.append(ChainFactor(res.z, mat.T, transposed=True))
            tail.append(ChainFactor(right[j].z, self.eye, transposed=True))
            tail = tuple(tail)
            total += self.calc.moment(left + tail)
            total += q1k * self.calc.moment(open_left + tail) * tr_last
        return total

    def _source_omega(self, left, right, q1k, tr_last) -> complex:
        ell = len(right)
        a_last = left[-1].matrix
        m_full = self.calc.det_matrix(left)
        m_full_obs = m_full @ a_last
        total = 0.0 + 0.0j
        for j in range(ell):
            m_cyc = self.calc.det_matrix(right[j:] + right[:j] + (right[j],))
            total += _htrace(m_full_obs, m_cyc) + q1k * _htrace(m_full, m_cyc) * tr_last
        return total


def _check_pair(left: ChainSpec, right: ChainSpec, cap: int):
    if any(f.transposed for f in left.factors) or any(f.transposed for f in right.factors):
        raise ValueError("fluctuation arguments must be transpose-free chains")
    if left.factors and right.factors and left.dim != right.dim:
        raise ValueError("left and right chains have mismatched dimensions")
    check_cap(len(left) + len(right), cap, "chain fluctuation recursion")


def chain_fluctuation_component(left: ChainSpec, right: ChainSpec, which: Component,
                                params: EnsembleParams = GUE_PARAMS,
                                cap: int = CHAIN_FLUCTUATION_CAP) -> complex:
    """A single additive component of :func:`chain_fluctuation_moment`,
    without its ensemble coefficient."""
    _check_pair(left, right, cap)
    if not left.factors or not right.factors:
        return 0.0 + 0.0j
    ev = _FluctuationEvaluator(which, float(params.sigma), left.dim)
    return ev.evaluate(tuple(left.factors), tuple(right.factors))


def chain_fluctuation_moment(left: ChainSpec, right: ChainSpec,
                             params: EnsembleParams = GUE_PARAMS,
                             cap: int = CHAIN_FLUCTUATION_CAP) -> complex:
    """Limiting dimension-squared-scaled covariance of two centered
    normalized chain traces, via the matrix-valued one-step recursion.
    Assembled from the four components with coefficients ``(1, kappa4,
    sigma, omega2_tilde)``; with all observables equal to the identity it
    reduces to the scalar :func:`~wignerfluct.second_order.fluctuation_moment`."""
    _check_pair(left, right, cap)
    if not left.factors or not right.factors:
        return 0.0 + 0.0j
    value = chain_fluctuation_component(left, right, "gue", params, cap)
    if params.kappa4:
        value += params.kappa4 * chain_fluctuation_component(left, right, "kappa", params, cap)
    if params.sigma:
        value += params.sigma * chain_fluctuation_component(left, right, "sigma", params, cap)
    if params.omega2_tilde:
        value += params.omega2_tilde * chain_fluctuation_component(left, right, "omega", params, cap)
    return value


# ---------------------------------------------------------------------------
# closed formulas
# ---------------------------------------------------------------------------


def _trace_of_labels(mats: dict[int, np.ndarray], labels: Sequence[int]) -> complex:
    prod = mats[labels[0]]
    for v in labels[1:]:
        prod = prod @ mats[v]
    return _ntrace(prod)


def closed_gue_formula(left: ChainSpec, right: ChainSpec,
                       cap: int = CHAIN_FLUCTUATION_CAP) -> complex:
    """Gaussian-unitary component in closed form: a sum over annular
    non-crossing permutations (Kreweras trace products times first-order
    free cumulants per cycle) plus a sum over marked partition pairs
    (circle-wise Kreweras trace products times a second-order cumulant for
    the marked blocks).  Must agree with the ``gue`` component of
    :func:`chain_fluctuation_moment`."""
    _check_pair(left, right, cap)
    k, ell = len(left), len(right)
    if k == 0 or ell == 0:
        return 0.0 + 0.0j
    zs = {i + 1: f.z for i, f in enumerate(left.factors)}
    zs.update({k + i + 1: f.z for i, f in enumerate(right.factors)})
    mats = {i + 1: f.matrix for i, f in enumerate(left.factors)}
    mats.update({k + i + 1: f.matrix for i, f in enumerate(right.factors)})

    total = 0.0 + 0.0j
    for cycles, kc_cycles in _annular_structures(k, ell):
        term = 1.0 + 0.0j
        for cyc in kc_cycles:
            term *= _trace_of_labels(mats, cyc)
        for cyc in cycles:
            term *= free_cumulant([zs[v] for v in cyc])
        total += term

    for lb, rb, ml, mr, kc_l, kc_r in _marked_structures(k, ell):
        term = second_cumulant([zs[v] for v in lb[ml]], [zs[v] for v in rb[mr]])
        for i, block in enumerate(lb):
            if i != ml:
                term *= free_cumulant([zs[v] for v in block])
        for i, block in enumerate(rb):
            if i != mr:
                term *= free_cumulant([zs[v] for v in block])
        for block in kc_l:
            term *= _trace_of_labels(mats, block)
        for block in kc_r:
            term *= _trace_of_labels(mats, block)
        total += term
    return total


def _sigma_cycle_cumulant(cycle: tuple[int, ...], zs: dict[int, complex],
                          outer_count: int, sigma: float) -> complex:
    """Free cumulant attached to a permutation cycle in the ``sigma`` closed
    formula: plain for single-circle cycles; for connecting cycles the inner
    run is reversed and flagged as transposed."""
    has_outer = any(v <= outer_count for v in cycle)
    has_inner = any(v > outer_count for v in cycle)
    if not (has_outer and has_inner):
        return free_cumulant([zs[v] for v in cycle])
    outer_run, inner_run = _cycle_runs(cycle, outer_count)
    seq = [zs[v] for v in outer_run] + [zs[v] for v in reversed(inner_run)]
    bits = (0,) * len(outer_run) + (1,) * len(inner_run)
    return mixed_chain_cumulant(seq, bits, sigma)


@lru_cache(maxsize=None)
def _sigma_second_cumulant(left: tuple[complex, ...], right: tuple[complex, ...],
                           sigma: float) -> complex:
    """Second-order cumulant of the ``sigma`` contribution, by inverting the
    defining relation for the function ``sigma * sigma-component`` with the
    transpose-aware cycle cumulants on the annular side."""
    k, ell = len(left), len(right)
    zs = {i + 1: z for i, z in enumerate(left + right)}
    value = sigma * _component(left, right, "sigma", sigma)
    for perm in enumerate_annular_ncp(AnnulusShape(k, ell)):
        prod = 1.0 + 0.0j
        for cyc in perm.cycles:
            prod *= _sigma_cycle_cumulant(cyc, zs, k, sigma)
        value -= prod
    for marked in enumerate_marked(AnnulusShape(k, ell)):
        u1, u2 = marked.left_block, marked.right_block
        if len(u1) == k and len(u2) == ell:
            continue
        term = _sigma_second_cumulant(
            tuple(zs[v] for v in u1), tuple(zs[v] for v in u2), sigma
        )
        for i, block in enumerate(marked.left.blocks):
            if i != marked.marked_left:
                term *= free_cumulant([zs[v] for v in block])
        for i, block in enumerate(marked.right.blocks):
            if i != marked.marked_right:
                term *= free_cumulant([zs[v] for v in block])
        value -= term
    return value


def closed_sigma_formula(left: ChainSpec, right: ChainSpec, sigma: float,
                         cap: int = CHAIN_FLUCTUATION_CAP) -> complex:
    """``sigma`` component in closed form: annular permutations contribute
    Kreweras traces with the inner-circle observable product transposed and
    transpose-aware cycle cumulants with reversed inner runs; marked pairs
    contribute plain circle-wise traces with a ``sigma`` second-order
    cumulant.  The literal double sum evaluates the component scaled by
    ``sigma``, so ``sigma`` must be nonzero; the returned value is the
    component and must agree with the ``sigma`` component of
    :func:`chain_fluctuation_moment`."""
    _check_pair(left, right, cap)
    sigma = float(sigma)
    if sigma == 0.0:
        raise ValueError("the closed sigma formula needs sigma != 0; the component "
                         "itself remains available through the recursion")
    if abs(sigma) > 1.0:
        raise ValueError("sigma must lie in [-1, 1]")
    k, ell = len(left), len(right)
    if k == 0 or ell == 0:
        return 0.0 + 0.0j
    zs = {i + 1: f.z for i, f in enumerate(left.factors)}
    zs.update({k + i + 1: f.z for i, f in enumerate(right.factors)})
    mats = {i + 1: f.matrix for i, f in enumerate(left.factors)}
    mats.update({k + i + 1: f.matrix for i, f in enumerate(right.factors)})
    dim = left.dim
    eye = np.eye(dim, dtype=complex)

    total = 0.0 + 0.0j
    for cycles, kc_cycles in _annular_structures(k, ell):
        term = 1.0 + 0.0j
        for cyc in kc_cycles:
            if all(v <= k for v in cyc) or all(v > k for v in cyc):
                term *= _trace_of_labels(mats, cyc)
            else:
                outer_run, inner_run = _cycle_runs(cyc, k)
                prod = eye
                for v in outer_run:
                    prod = prod @ mats[v]
                inner_prod = eye
                for v in inner_run:
                    inner_prod = inner_prod @ mats[v]
                term *= _ntrace(prod @ inner_prod.T)
        for cyc in cycles:
            term *= _sigma_cycle_cumulant(cyc, zs, k, sigma)
        total += term

    for lb, rb, ml, mr, kc_l, kc_r in _marked_structures(k, ell):
        term = _sigma_second_cumulant(
            tuple(zs[v] for v in lb[ml]), tuple(zs[v] for v in rb[mr]), sigma
        )
        for i, block in enumerate(lb):
            if i != ml:
                term *= free_cumulant([zs[v] for v in block])
        for i, block in enumerate(rb):
            if i != mr:
                term *= free_cumulant([zs[v] for v in block])
        for block in kc_l:
            term *= _trace_of_labels(mats, block)
        for block in kc_r:
            term *= _trace_of_labels(mats, block)
        total += term
    return total / sigma


def omega_formula_1x1(left: ChainSpec, right: ChainSpec) -> complex:
    """Closed form of the ``omega`` component for single-factor chains:
    a diagonal-correlation term plus a tracial remainder."""
    if len(left) != 1 or len(right) != 1:
        raise ValueError("closed omega form is stated for single-factor chains")
    if left.dim != right.dim:
        raise ValueError("dimension mismatch")
    f1, f2 = left.factors[0], right.factors[0]
    m1, m2 = stieltjes(f1.z), stieltjes(f2.z)
    d1p = m1 * m1 / (1.0 - m1 * m1)
    d2p = m2 * m2 / (1.0 - m2 * m2)
    diag_corr = _htrace(f1.matrix, f2.matrix)
    return diag_corr * m1 ** 2 * m2 ** 2 + _ntrace(f1.matrix) * _ntrace(f2.matrix) * (
        d1p * d2p - m1 ** 2 * m2 ** 2
    )
