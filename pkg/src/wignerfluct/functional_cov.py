"""Limiting covariance of polynomial linear statistics.

For monomial test functions the limiting covariance of two centered trace
statistics is a double integral of the product of derivatives against a
logarithmic kernel on the semicircle support.  This module evaluates that
kernel and the two-variable quadrature, the semicircle moments and their
free cumulants, and the purely combinatorial prediction (a sum over annular
non-crossing pairings), which the quadrature must reproduce.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache
from typing import Sequence, Union

import numpy as np

from .ncgeom import (
    AnnulusShape,
    CyclicPermutation,
    MarkedPartitionPair,
    annular_pairings,
    enumerate_annular_ncp,
    enumerate_marked,
    enumerate_ncp,
    kreweras_annular,
    moebius_nc,
)

__all__ = [
    "MonomialSpec",
    "QuadratureConfig",
    "QuadratureDiverged",
    "sc_moment",
    "kernel_u",
    "sc_second",
    "sc_circ",
    "sc_circ_circ",
    "poly_covariance",
    "phi_gue",
]


class QuadratureDiverged(ArithmeticError):
    """Two quadrature refinement levels disagree beyond tolerance."""


@dataclass(frozen=True)
class MonomialSpec:
    """Exponents of the monomial test functions, one per chain slot."""

    exponents: tuple[int, ...]

    def __post_init__(self):
        exps = tuple(int(e) for e in self.exponents)
        if any(e < 0 for e in exps):
            raise ValueError("exponents must be nonnegative")
        object.__setattr__(self, "exponents", exps)

    @property
    def total_degree(self) -> int:
        return sum(self.exponents)


@dataclass(frozen=True)
class QuadratureConfig:
    """Tensor Gauss-Legendre setup: nodes per axis and the half-width of the
    excluded strip around the diagonal log singularity."""

    nodes: int = 512
    offset: float = 1e-7
    convergence_tol: float = 5e-4

    def __post_init__(self):
        if self.nodes < 64:
            raise ValueError("need at least 64 quadrature nodes per axis")
        if not self.offset > 0:
            raise ValueError("diagonal offset must be positive")


def catalan(n: int) -> int:
    return math.comb(2 * n, n) // (n + 1)


def _total_degree(spec: Union[MonomialSpec, Sequence[int], int]) -> int:
    if isinstance(spec, MonomialSpec):
        return spec.total_degree
    if isinstance(spec, int):
        return spec
    return MonomialSpec(tuple(spec)).total_degree


def sc_moment(spec: Union[MonomialSpec, Sequence[int], int]) -> float:
    """Moment of the semicircle density for the product of the given
    monomials: zero for odd total degree, a Catalan number otherwise."""
    n = _total_degree(spec)
    if n % 2 == 1:
        return 0.0
    return float(catalan(n // 2))


def sc_moment_quadrature(spec, nodes: int = 256) -> float:
    """Semicircle moment by Gauss-Legendre quadrature; cross-check route."""
    n = _total_degree(spec)
    x, w = np.polynomial.legendre.leggauss(nodes)
    x = 2.0 * x
    w = 2.0 * w
    dens = np.sqrt(np.maximum(4.0 - x * x, 0.0)) / (2.0 * np.pi)
    return float(np.sum(w * dens * x**n))


def kernel_u(x: float, y: float) -> float:
    """Logarithmic covariance kernel on the open square (-2, 2)^2 minus the
    diagonal; symmetric and nonnegative, vanishing toward the edges.

    Evaluated in the algebraically equivalent form
    ``(1 / 2 pi^2) * log(2 (sx + sy)^2 / (|x - y| (x y + 4 + sx sy)))`` with
    ``sx = sqrt(4 - x^2)``, which stays finite on the anti-diagonal where
    the textbook quotient degenerates to 0/0.
    """
    x, y = float(x), float(y)
    if not (abs(x) < 2.0 and abs(y) < 2.0):
        raise ValueError("kernel arguments must lie strictly inside (-2, 2)")
    if x == y:
        raise ValueError("kernel is singular on the diagonal")
    sx = math.sqrt(4.0 - x * x)
    sy = math.sqrt(4.0 - y * y)
    return math.log(
        2.0 * (sx + sy) ** 2 / (abs(x - y) * (x * y + 4.0 + sx * sy))
    ) / (2.0 * math.pi**2)


def _kernel_grid(x: np.ndarray, y: np.ndarray) -> np.ndarray:
    sx = np.sqrt(np.maximum(4.0 - x * x, 0.0))
    sy = np.sqrt(np.maximum(4.0 - y * y, 0.0))
    cross = x[:, None] * y[None, :] + 4.0 + sx[:, None] * sy[None, :]
    gap = np.abs(x[:, None] - y[None, :])
    num = 2.0 * (sx[:, None] + sy[None, :]) ** 2
    with np.errstate(divide="ignore", invalid="ignore"):
        out = np.log(num / (gap * cross)) / (2.0 * np.pi**2)
    return out


def _sc_second_single(n: int, m: int, nodes: int, offset: float) -> float:
    """One quadrature level: Gauss-Legendre in the angle variables after
    substituting ``x = 2 cos(theta)`` (which absorbs the square-root edge
    behavior), with the strip ``|x - y| < offset`` around the diagonal
    excluded."""
    t, w = np.polynomial.legendre.leggauss(nodes)
    theta = 0.5 * np.pi * (t + 1.0)
    wt = 0.5 * np.pi * w
    x = 2.0 * np.cos(theta)
    jac = 2.0 * np.sin(theta)  # |dx/dtheta|
    fprime = n * x ** (n - 1)
    gprime = m * x ** (m - 1)
    u = _kernel_grid(x, x)
    mask = np.abs(x[:, None] - x[None, :]) >= offset
    u = np.where(mask, u, 0.0)
    integrand = (wt * jac * fprime)[:, None] * (wt * jac * gprime)[None, :] * u
    return float(np.sum(integrand))


@lru_cache(maxsize=None)
def _sc_second_cached(n: int, m: int, nodes: int, offset: float, tol: float) -> float:
    coarse = _sc_second_single(n, m, nodes, offset)
    fine = _sc_second_single(n, m, 2 * nodes, offset)
    if abs(fine - coarse) > tol:
        raise QuadratureDiverged(
            f"quadrature levels differ by {abs(fine - coarse):.3g} > {tol:.3g} "
            f"for degrees ({n}, {m})"
        )
    return fine


def sc_second(left, right, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Two-variable quadrature of the derivative products against the log
    kernel: the limiting covariance of the two monomial trace statistics.
    For monomials it reproduces the annular non-crossing pairing count.

    Evaluated at ``cfg.nodes`` and ``2 * cfg.nodes`` per axis; raises
    :class:`QuadratureDiverged` when the two levels disagree beyond
    ``cfg.convergence_tol``.
    """
    n, m = _total_degree(left), _total_degree(right)
    if n < 1 or m < 1:
        raise ValueError("each side needs total degree at least 1")
    return _sc_second_cached(n, m, cfg.nodes, cfg.offset, cfg.convergence_tol)


# ---------------------------------------------------------------------------
# free cumulants of the semicircle moments
# ---------------------------------------------------------------------------


@lru_cache(maxsize=None)
def _sc_circ_by_degrees(degrees: tuple[int, ...]) -> float:
    ground = tuple(range(len(degrees)))
    parts = enumerate_ncp(ground)
    one = next(p for p in parts if len(p.blocks) == 1)
    total = 0.0
    for p in parts:
        coeff = moebius_nc(p, one)
        prod = float(coeff)
        for block in p.blocks:
            prod *= sc_moment(sum(degrees[i] for i in block))
        total += prod
    return total


def sc_circ(spec: Union[MonomialSpec, Sequence[int]]) -> float:
    """First-order free cumulant of the semicircle moments over a block of
    monomial slots (Moebius inversion over non-crossing partitions)."""
    if isinstance(spec, MonomialSpec):
        degrees = spec.exponents
    else:
        degrees = tuple(int(e) for e in spec)
    if not degrees:
        raise ValueError("cumulant of an empty block")
    return _sc_circ_by_degrees(tuple(sorted(degrees)))


@lru_cache(maxsize=None)
def _sc_circ_circ_by_degrees(left: tuple[int, ...], right: tuple[int, ...],
                             cfg: QuadratureConfig) -> float:
    k, ell = len(left), len(right)
    degs = left + right
    value = sc_second(sum(left), sum(right), cfg)
    for perm in enumerate_annular_ncp(AnnulusShape(k, ell)):
        prod = 1.0
        for cyc in perm.cycles:
            prod *= sc_circ([degs[v - 1] for v in cyc])
        value -= prod
    for marked in enumerate_marked(AnnulusShape(k, ell)):
        u1, u2 = marked.left_block, marked.right_block
        if len(u1) == k and len(u2) == ell:
            continue
        term = _sc_circ_circ_by_degrees(
            tuple(sorted(degs[v - 1] for v in u1)),
            tuple(sorted(degs[v - 1] for v in u2)),
            cfg,
        )
        for i, block in enumerate(marked.left.blocks):
            if i != marked.marked_left:
                term *= sc_circ([degs[v - 1] for v in block])
        for i, block in enumerate(marked.right.blocks):
            if i != marked.marked_right:
                term *= sc_circ([degs[v - 1] for v in block])
        value -= term
    return value


def sc_circ_circ(left, right, cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Second-order free cumulant of the semicircle covariance, by inverting
    its defining relation over annular permutations and marked pairs.  For
    monomial test functions this vanishes (up to quadrature error)."""
    ldeg = left.exponents if isinstance(left, MonomialSpec) else tuple(int(e) for e in left)
    rdeg = right.exponents if isinstance(right, MonomialSpec) else tuple(int(e) for e in right)
    if not ldeg or not rdeg:
        raise ValueError("second cumulant needs nonempty blocks")
    return _sc_circ_circ_by_degrees(tuple(sorted(ldeg)), tuple(sorted(rdeg)), cfg)


# ---------------------------------------------------------------------------
# combinatorial predictions
# ---------------------------------------------------------------------------


def poly_covariance(left_matrices: Sequence[np.ndarray],
                    right_matrices: Sequence[np.ndarray]) -> complex:
    """Limiting dimension-squared-scaled covariance of the two alternating
    first-degree statistics: a sum over annular non-crossing pairings of the
    Kreweras trace products.  Zero when the total slot count is odd."""
    k, ell = len(left_matrices), len(right_matrices)
    if k < 1 or ell < 1:
        raise ValueError("each side needs at least one matrix")
    mats = {}
    dim = None
    for i, a in enumerate(list(left_matrices) + list(right_matrices)):
        a = np.asarray(a, dtype=complex)
        if a.ndim != 2 or a.shape[0] != a.shape[1]:
            raise ValueError("observables must be square matrices")
        if dim is None:
            dim = a.shape[0]
        elif a.shape[0] != dim:
            raise ValueError("observable dimensions do not match")
        mats[i + 1] = a
    if (k + ell) % 2 == 1:
        return 0.0 + 0.0j
    shape = AnnulusShape(k, ell)
    total = 0.0 + 0.0j
    for pairing in annular_pairings(shape):
        comp = kreweras_annular(pairing, shape)
        term = 1.0 + 0.0j
        for cyc in comp.cycles:
            prod = mats[cyc[0]]
            for v in cyc[1:]:
                prod = prod @ mats[v]
            term *= complex(np.trace(prod)) / dim
        total += term
    return total


def phi_gue(pi: Union[CyclicPermutation, MarkedPartitionPair],
            monomials: Sequence[MonomialSpec | int],
            cfg: QuadratureConfig = QuadratureConfig()) -> float:
    """Covariance weight of one annular permutation (product of first-order
    cumulants over its cycles) or one marked partition pair (second-order
    cumulant of the marked blocks times first-order cumulants of the rest)
    for monomial test functions."""
    degs = [
        m.total_degree if isinstance(m, MonomialSpec) else int(m) for m in monomials
    ]
    if isinstance(pi, CyclicPermutation):
        prod = 1.0
        for cyc in pi.cycles:
            prod *= sc_circ([degs[v - 1] for v in cyc])
        return prod
    if isinstance(pi, MarkedPartitionPair):
        prod = sc_circ_circ(
            [degs[v - 1] for v in pi.left_block],
            [degs[v - 1] for v in pi.right_block],
            cfg,
        )
        for i, block in enumerate(pi.left.blocks):
            if i != pi.marked_left:
                prod *= sc_circ([degs[v - 1] for v in block])
        for i, block in enumerate(pi.right.blocks):
            if i != pi.marked_right:
                prod *= sc_circ([degs[v - 1] for v in block])
        return prod
    raise TypeError("pi must be a CyclicPermutation or a MarkedPartitionPair")
