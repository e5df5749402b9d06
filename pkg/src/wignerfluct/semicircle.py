"""Analytic layer built on the semicircle law.

The Stieltjes transform ``m(z)`` of the semicircle density solves
``-1/m = m + z`` with ``Im z * Im m > 0``.  On top of it this module
supplies the edge weights ``m_i m_j / (1 - m_i m_j)``, divided differences
of ``m`` evaluated through non-crossing graph sums, their free cumulants
(connected-graph sums), and the transpose-aware variants where some chain
positions contribute resolvent transposes: those carry a binary vector and
the second moment ``sigma`` of the off-diagonal entry distribution, and
mixed-color edges pick up the weight ``sigma m_i m_j / (1 - sigma m_i m_j)``.

Two independent evaluation routes exist for every quantity: the graph sums
(primary) and the recursive definitions (cross-checks).  They agree to
near machine precision and the test suite enforces this.
"""

from __future__ import annotations

import cmath
import warnings
from dataclasses import dataclass
from functools import lru_cache
from typing import Optional, Sequence

from .config import GRAPH_CAP, check_cap
from .ncgeom import _ncg_edge_sets, _positions_connected, enumerate_ncp, moebius_nc

__all__ = [
    "SpectralPoint",
    "SharpVector",
    "stieltjes",
    "stieltjes_derivative",
    "stieltjes_taylor",
    "edge_weight",
    "divided_difference",
    "divided_difference_recursive",
    "free_cumulant",
    "free_cumulant_moebius",
    "mixed_chain_moment",
    "mixed_chain_moment_recursive",
    "mixed_chain_cumulant",
    "mixed_chain_cumulant_moebius",
]

#: soft-warning threshold on |Im z|; set to 0.0 to silence
SMALL_IMAG_WARN = 0.5

#: guard for the mixed-edge denominators 1 - sigma*m_i*m_j
DENOM_GUARD = 1e-10


class SmallImaginaryPartWarning(UserWarning):
    """Spectral parameter close to the real axis; accuracy degrades."""


def _check_spectral(z: complex) -> complex:
    z = complex(z)
    if z.imag == 0.0:
        raise ValueError(f"spectral parameter must have nonzero imaginary part, got {z}")
    if SMALL_IMAG_WARN and abs(z.imag) < SMALL_IMAG_WARN:
        warnings.warn(
            f"|Im z| = {abs(z.imag):.3g} < {SMALL_IMAG_WARN}; results degrade near the real axis",
            SmallImaginaryPartWarning,
            stacklevel=3,
        )
    return z


@dataclass(frozen=True)
class SpectralPoint:
    """A spectral parameter off the real axis."""

    z: complex

    def __post_init__(self):
        object.__setattr__(self, "z", _check_spectral(self.z))


@dataclass(frozen=True)
class SharpVector:
    """Binary vector marking which chain positions enter transposed."""

    bits: tuple[int, ...]

    def __post_init__(self):
        object.__setattr__(self, "bits", tuple(int(b) for b in self.bits))
        if any(b not in (0, 1) for b in self.bits):
            raise ValueError("bits must be 0 or 1")


@lru_cache(maxsize=None)
def stieltjes(z: complex) -> complex:
    """Stieltjes transform of the semicircle law.

    Solves the quadratic ``m**2 + z*m + 1 = 0`` and picks the root with
    ``Im z * Im m > 0``; that root has modulus < 1.
    """
    z = _check_spectral(z)
    root = cmath.sqrt(z * z - 4.0)
    m = (-z + root) / 2.0
    if z.imag * m.imag <= 0.0:
        m = (-z - root) / 2.0
    return m


def stieltjes_derivative(z: complex) -> complex:
    """Derivative of the Stieltjes transform, ``m**2 / (1 - m**2)``."""
    m = stieltjes(z)
    return m * m / (1.0 - m * m)


@lru_cache(maxsize=None)
def stieltjes_taylor(z: complex, order: int) -> tuple[complex, ...]:
    """Taylor coefficients ``m^(n)(z)/n!`` for ``n = 0..order``.

    Obtained by differentiating ``m**2 + z*m + 1 = 0``: with ``t_n`` the
    n-th coefficient, ``t_n = -(t_{n-1} + sum_{i=1}^{n-1} t_i t_{n-i}) /
    (2 m + z)``.
    """
    m = stieltjes(z)
    coeffs = [m]
    pivot = 2.0 * m + z
    for n in range(1, order + 1):
        acc = coeffs[n - 1]
        for i in range(1, n):
            acc += coeffs[i] * coeffs[n - i]
        coeffs.append(-acc / pivot)
    return tuple(coeffs)


def edge_weight(z_i: complex, z_j: complex) -> complex:
    """Weight ``m_i m_j / (1 - m_i m_j)`` of a graph edge joining two
    spectral parameters; equals ``m'(z)`` when the parameters coincide."""
    if complex(z_i) == complex(z_j):
        return stieltjes_derivative(z_i)
    mi, mj = stieltjes(z_i), stieltjes(z_j)
    return mi * mj / (1.0 - mi * mj)


def _mixed_edge_weight(z_i: complex, z_j: complex, same_color: bool, sigma: float) -> complex:
    if same_color:
        return edge_weight(z_i, z_j)
    mi, mj = stieltjes(z_i), stieltjes(z_j)
    denom = 1.0 - sigma * mi * mj
    if abs(denom) < DENOM_GUARD:
        raise ZeroDivisionError(f"mixed-edge denominator {denom} below guard {DENOM_GUARD}")
    return sigma * mi * mj / denom


def _as_key(zs: Sequence[complex]) -> tuple[complex, ...]:
    return tuple(complex(z) for z in zs)


def _graph_sum(n: int, weight, connected_only: bool) -> complex:
    """Sum over (connected) non-crossing graphs on ``n`` cyclic positions of
    the product of ``weight(i, j)`` over edges."""
    w = {}
    for i in range(n):
        for j in range(i + 1, n):
            w[(i, j)] = weight(i, j)
    total = 0.0 + 0.0j
    for edges in _ncg_edge_sets(n):
        if connected_only and not _positions_connected(n, edges):
            continue
        prod = 1.0 + 0.0j
        for e in edges:
            prod *= w[e]
        total += prod
    return total


@lru_cache(maxsize=None)
def _divided_difference_cached(zs: tuple[complex, ...]) -> complex:
    n = len(zs)
    check_cap(n, GRAPH_CAP, "divided difference (graph route)")
    for z in zs:
        _check_spectral(z)
    prod_m = 1.0 + 0.0j
    for z in zs:
        prod_m *= stieltjes(z)
    return prod_m * _graph_sum(n, lambda i, j: edge_weight(zs[i], zs[j]), connected_only=False)


def divided_difference(zs: Sequence[complex]) -> complex:
    """Divided difference of the Stieltjes transform over a multiset of
    spectral parameters, via the non-crossing graph sum.

    Repeated parameters are handled positionally, so confluent cases need no
    special treatment; the value is invariant under permutations of the
    multiset.  Agrees with :func:`divided_difference_recursive`.
    """
    zs = _as_key(zs)
    if not zs:
        raise ValueError("divided difference of an empty multiset")
    return _divided_difference_cached(zs)


@lru_cache(maxsize=None)
def _divided_difference_recursive_cached(zs: tuple[complex, ...]) -> complex:
    n = len(zs)
    if n == 1:
        return stieltjes(zs[0])
    if all(z == zs[0] for z in zs):
        return stieltjes_taylor(zs[0], n - 1)[n - 1]
    # reorder (the value is symmetric) so the two endpoints differ
    work = list(zs)
    if work[0] == work[-1]:
        j = next(i for i, z in enumerate(work) if z != work[0])
        work[-1], work[j] = work[j], work[-1]
    hi = _divided_difference_recursive_cached(tuple(work[1:]))
    lo = _divided_difference_recursive_cached(tuple(work[:-1]))
    return (hi - lo) / (work[-1] - work[0])


def divided_difference_recursive(zs: Sequence[complex]) -> complex:
    """Divided difference by the textbook recursion, with fully confluent
    groups evaluated through Taylor coefficients.  Cross-check route."""
    zs = _as_key(zs)
    if not zs:
        raise ValueError("divided difference of an empty multiset")
    return _divided_difference_recursive_cached(zs)


@lru_cache(maxsize=None)
def _free_cumulant_cached(zs: tuple[complex, ...]) -> complex:
    n = len(zs)
    check_cap(n, GRAPH_CAP, "free cumulant (graph route)")
    for z in zs:
        _check_spectral(z)
    prod_m = 1.0 + 0.0j
    for z in zs:
        prod_m *= stieltjes(z)
    return prod_m * _graph_sum(n, lambda i, j: edge_weight(zs[i], zs[j]), connected_only=True)


def free_cumulant(zs: Sequence[complex]) -> complex:
    """First-order free cumulant of the divided differences, via the
    connected non-crossing graph sum."""
    zs = _as_key(zs)
    if not zs:
        raise ValueError("free cumulant of an empty multiset")
    return _free_cumulant_cached(zs)


def free_cumulant_moebius(zs: Sequence[complex]) -> complex:
    """Free cumulant by Moebius inversion over the non-crossing partition
    lattice.  Cross-check route for :func:`free_cumulant`."""
    zs = _as_key(zs)
    n = len(zs)
    ground = tuple(range(n))
    one = None
    total = 0.0 + 0.0j
    parts = enumerate_ncp(ground)
    for p in parts:
        if len(p.blocks) == 1:
            one = p
            break
    for p in parts:
        coeff = moebius_nc(p, one)
        prod = complex(coeff)
        for block in p.blocks:
            prod *= divided_difference([zs[i] for i in block])
        total += prod
    return total


# ---------------------------------------------------------------------------
# transpose-aware chain moments
# ---------------------------------------------------------------------------


def _normalize_sharp(zs, sharp, sigma):
    zs = _as_key(zs)
    if isinstance(sharp, SharpVector):
        bits = sharp.bits
    else:
        bits = tuple(int(b) for b in sharp)
    if len(bits) != len(zs):
        raise ValueError("sharp vector length must match the number of parameters")
    if any(b not in (0, 1) for b in bits):
        raise ValueError("sharp bits must be 0 or 1")
    sigma = float(sigma)
    if abs(sigma) > 1.0:
        raise ValueError("sigma must lie in [-1, 1]")
    return zs, bits, sigma


@lru_cache(maxsize=None)
def _mixed_moment_cached(zs, bits, sigma, connected: bool) -> complex:
    n = len(zs)
    check_cap(n, GRAPH_CAP, "bicolored graph sum")
    for z in zs:
        _check_spectral(z)
    prod_m = 1.0 + 0.0j
    for z in zs:
        prod_m *= stieltjes(z)
    return prod_m * _graph_sum(
        n,
        lambda i, j: _mixed_edge_weight(zs[i], zs[j], bits[i] == bits[j], sigma),
        connected_only=connected,
    )


def mixed_chain_moment(zs: Sequence[complex], sharp, sigma: float) -> complex:
    """Deterministic trace moment of a resolvent chain in which positions
    flagged by ``sharp`` enter transposed, via the bicolored graph sum.

    With an all-zero flag vector, or with ``sigma == 1``, this reduces to
    :func:`divided_difference`.
    """
    zs, bits, sigma = _normalize_sharp(zs, sharp, sigma)
    if not zs:
        raise ValueError("chain moment of an empty multiset")
    return _mixed_moment_cached(zs, bits, sigma, False)


def mixed_chain_cumulant(zs: Sequence[complex], sharp, sigma: float) -> complex:
    """Free cumulant of :func:`mixed_chain_moment`, via connected bicolored
    graphs."""
    zs, bits, sigma = _normalize_sharp(zs, sharp, sigma)
    if not zs:
        raise ValueError("chain cumulant of an empty multiset")
    return _mixed_moment_cached(zs, bits, sigma, True)


@lru_cache(maxsize=None)
def _mixed_moment_recursive_cached(zs, bits, sigma) -> complex:
    n = len(zs)
    if n == 1:
        return stieltjes(zs[0])
    m1 = stieltjes(zs[0])
    end_weight = _mixed_edge_weight(zs[0], zs[-1], bits[0] == bits[-1], sigma)
    acc = _mixed_moment_recursive_cached(zs[1:], bits[1:], sigma)
    for p in range(1, n - 1):
        c = 1.0 if bits[0] == bits[p] else sigma
        acc += (
            c
            * _mixed_moment_recursive_cached(zs[: p + 1], bits[: p + 1], sigma)
            * _mixed_moment_recursive_cached(zs[p:], bits[p:], sigma)
        )
    return m1 * (1.0 + end_weight) * acc


def mixed_chain_moment_recursive(zs: Sequence[complex], sharp, sigma: float) -> complex:
    """Transpose-aware chain moment by its self-consistent recursion: the
    first position is resolved against the last (stability factor
    ``1/(1 - c m_1 m_n)``) and against every interior split point, with the
    coupling ``c`` equal to 1 for equal flags and ``sigma`` otherwise.
    Cross-check route for :func:`mixed_chain_moment`."""
    zs, bits, sigma = _normalize_sharp(zs, sharp, sigma)
    if not zs:
        raise ValueError("chain moment of an empty multiset")
    return _mixed_moment_recursive_cached(zs, bits, sigma)


def mixed_chain_cumulant_moebius(zs: Sequence[complex], sharp, sigma: float) -> complex:
    """Free cumulant of the transpose-aware moment by Moebius inversion;
    cross-check route for :func:`mixed_chain_cumulant`."""
    zs, bits, sigma = _normalize_sharp(zs, sharp, sigma)
    n = len(zs)
    ground = tuple(range(n))
    parts = enumerate_ncp(ground)
    one = next(p for p in parts if len(p.blocks) == 1)
    total = 0.0 + 0.0j
    for p in parts:
        coeff = moebius_nc(p, one)
        prod = complex(coeff)
        for block in p.blocks:
            sub_z = tuple(zs[i] for i in block)
            sub_b = tuple(bits[i] for i in block)
            prod *= mixed_chain_moment(sub_z, sub_b, sigma)
        total += prod
    return total
