"""Monte Carlo validation of the deterministic fluctuation predictions.

Samples Hermitian random matrices with prescribed entry statistics,
evaluates resolvent- and polynomial-chain traces by dense linear solves,
and estimates the dimension-squared-scaled covariance of two centered trace
statistics with a jackknife error bar.  Each estimate is compared against
the matrix-layer prediction under an explicit tolerance rule.

Sampling is seed-deterministic: per-sample generators are derived from one
seed by counter-based spawning, so reports are bit-identical for identical
seeds regardless of evaluation order.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Callable, Optional, Sequence

import numpy as np

from .matrix_layer import ChainSpec, chain_fluctuation_moment
from .functional_cov import poly_covariance
from .second_order import EnsembleParams

__all__ = [
    "WignerEnsemble",
    "EstimatorReport",
    "sample_wigner",
    "chain_trace",
    "estimate_covariance",
    "estimate_poly_covariance",
]

#: tolerance rule defaults: |empirical - predicted| must not exceed
#: max(3 * stderr + BIAS_COEFF / sqrt(dim), ABS_FLOOR)
BIAS_COEFF = 2.0
ABS_FLOOR = 0.02


def _std_complex(rng: np.random.Generator, size) -> np.ndarray:
    return (rng.standard_normal(size) + 1j * rng.standard_normal(size)) / math.sqrt(2.0)


def _offdiag_gue(rng, size):
    return _std_complex(rng, size)


def _offdiag_goe(rng, size):
    return rng.standard_normal(size).astype(complex)


def _offdiag_bernoulli(rng, size):
    return rng.choice(np.array([1.0, -1.0, 1.0j, -1.0j]), size=size)


def _diag_gauss(rng, size):
    return rng.standard_normal(size)


def _diag_gauss2(rng, size):
    return math.sqrt(2.0) * rng.standard_normal(size)


def _diag_sign(rng, size):
    return rng.choice(np.array([1.0, -1.0]), size=size)


def _diag_zero(rng, size):
    return np.zeros(size)


_BUILTIN = {
    # name: (offdiag sampler, diag sampler, (kappa4, sigma, omega2_tilde))
    "GUE": (_offdiag_gue, _diag_gauss, (0.0, 0.0, 0.0)),
    "GOE": (_offdiag_goe, _diag_gauss2, (1.0, 1.0, 0.0)),
    "complex-bernoulli": (_offdiag_bernoulli, _diag_sign, (-1.0, 0.0, 0.0)),
    "zero-diagonal-GUE": (_offdiag_gue, _diag_zero, (0.0, 0.0, -1.0)),
}


@dataclass(frozen=True)
class WignerEnsemble:
    """A Hermitian random-matrix ensemble with unit-variance off-diagonal
    entries and its derived fluctuation parameters.

    Built-in names: ``GUE`` (0, 0, 0), ``GOE`` (1, 1, 0),
    ``complex-bernoulli`` (-1, 0, 0), ``zero-diagonal-GUE`` (0, 0, -1).
    Custom ensembles supply the two entry samplers and their parameters.
    """

    name: str
    dim: int
    params: EnsembleParams = field(default=EnsembleParams())
    offdiag: Optional[Callable] = None
    diag: Optional[Callable] = None

    def __post_init__(self):
        if self.dim < 2:
            raise ValueError("ensemble dimension must be at least 2")
        if self.name in _BUILTIN:
            od, d, p = _BUILTIN[self.name]
            object.__setattr__(self, "offdiag", od)
            object.__setattr__(self, "diag", d)
            object.__setattr__(self, "params", EnsembleParams(*p))
        elif self.offdiag is None or self.diag is None:
            raise ValueError(
                f"unknown ensemble {self.name!r}; custom ensembles need samplers"
            )


def sample_wigner(ensemble: WignerEnsemble, seed) -> np.ndarray:
    """One Hermitian draw: independent upper-triangular entries of variance
    ``1/dim`` with the ensemble's moment profile; exactly Hermitian and
    deterministic under the seed (an int or a ``numpy`` seed sequence)."""
    rng = np.random.default_rng(seed)
    n = ensemble.dim
    scale = 1.0 / math.sqrt(n)
    w = np.zeros((n, n), dtype=complex)
    iu = np.triu_indices(n, k=1)
    w[iu] = ensemble.offdiag(rng, len(iu[0])) * scale
    w = w + w.conj().T
    w[np.diag_indices(n)] = np.asarray(ensemble.diag(rng, n), dtype=float) * scale
    return w


def chain_trace(w: np.ndarray, chain: ChainSpec) -> complex:
    """Normalized trace of the alternating resolvent-observable product,
    with resolvents applied through dense linear solves (transposed factors
    solve against the transposed shift)."""
    n = w.shape[0]
    if chain.factors and chain.dim != n:
        raise ValueError("chain dimension does not match the matrix")
    if not chain.factors:
        raise ValueError("empty chain has no trace")
    eye = np.eye(n, dtype=complex)
    prod = None
    for f in chain.factors:
        shifted = w - f.z * eye
        if f.transposed:
            t = np.linalg.solve(shifted.T, f.matrix)
        else:
            t = np.linalg.solve(shifted, f.matrix)
        prod = t if prod is None else prod @ t
    return complex(np.trace(prod)) / n


def _poly_chain_trace(w: np.ndarray, matrices: Sequence[np.ndarray]) -> complex:
    prod = None
    for a in matrices:
        t = w @ a
        prod = t if prod is None else prod @ t
    return complex(np.trace(prod)) / w.shape[0]


@dataclass(frozen=True)
class EstimatorReport:
    """Outcome of one covariance experiment: the model prediction, the
    empirical mean with jackknife standard error, and the tolerance verdict."""

    predicted: complex
    empirical: complex
    stderr: float
    samples: int
    dim: int
    seed: int
    tolerance: float
    passed: bool
    statistic: str

    @property
    def deviation(self) -> float:
        return abs(self.empirical - self.predicted)

    def to_jsonable(self) -> dict:
        return {
            "statistic": self.statistic,
            "predicted": [self.predicted.real, self.predicted.imag],
            "empirical": [self.empirical.real, self.empirical.imag],
            "stderr": self.stderr,
            "deviation": self.deviation,
            "tolerance": self.tolerance,
            "samples": self.samples,
            "dim": self.dim,
            "seed": self.seed,
            "verdict": "pass" if self.passed else "fail",
        }

    CSV_HEADER = (
        "statistic,predicted_re,predicted_im,empirical_re,empirical_im,"
        "stderr,deviation,tolerance,samples,dim,seed,verdict"
    )

    def to_csv_row(self) -> str:
        return (
            f"{self.statistic},{self.predicted.real:.12g},{self.predicted.imag:.12g},"
            f"{self.empirical.real:.12g},{self.empirical.imag:.12g},"
            f"{self.stderr:.12g},{self.deviation:.12g},{self.tolerance:.12g},"
            f"{self.samples},{self.dim},{self.seed},"
            f"{'pass' if self.passed else 'fail'}"
        )


def _jackknife_covariance(tl: np.ndarray, tr: np.ndarray, scale: float) -> tuple[complex, float]:
    """Scaled sample covariance (no conjugation, sample-mean centering) with
    its leave-one-out jackknife standard error."""
    n = len(tl)
    sum_l, sum_r, sum_p = tl.sum(), tr.sum(), (tl * tr).sum()
    est = scale * (sum_p / n - (sum_l / n) * (sum_r / n))
    loo = scale * (
        (sum_p - tl * tr) / (n - 1)
        - (sum_l - tl) * (sum_r - tr) / (n - 1) ** 2
    )
    center = loo.mean()
    var_jack = (n - 1) / n * np.sum(np.abs(loo - center) ** 2)
    return complex(est), float(math.sqrt(var_jack))


def _run_estimator(
    ensemble: WignerEnsemble,
    statistic: str,
    left_eval: Callable[[np.ndarray], complex],
    right_eval: Callable[[np.ndarray], complex],
    predicted: complex,
    samples: int,
    seed: int,
    bias_coeff: float,
    abs_floor: float,
) -> EstimatorReport:
    if samples < 100:
        raise ValueError("need at least 100 samples for a meaningful estimate")
    children = np.random.SeedSequence(seed).spawn(samples)
    tl = np.empty(samples, dtype=complex)
    tr = np.empty(samples, dtype=complex)
    for i, child in enumerate(children):
        w = sample_wigner(ensemble, child)
        tl[i] = left_eval(w)
        tr[i] = right_eval(w)
    est, stderr = _jackknife_covariance(tl, tr, float(ensemble.dim) ** 2)
    tol = max(3.0 * stderr + bias_coeff / math.sqrt(ensemble.dim), abs_floor)
    passed = abs(est - predicted) <= tol
    return EstimatorReport(
        predicted=complex(predicted),
        empirical=est,
        stderr=stderr,
        samples=samples,
        dim=ensemble.dim,
        seed=seed,
        tolerance=tol,
        passed=passed,
        statistic=statistic,
    )


def estimate_covariance(
    ensemble: WignerEnsemble,
    left: ChainSpec,
    right: ChainSpec,
    samples: int,
    seed: int,
    predicted: Optional[complex] = None,
    bias_coeff: float = BIAS_COEFF,
    abs_floor: float = ABS_FLOOR,
) -> EstimatorReport:
    """Estimate the dimension-squared-scaled covariance of the two centered
    chain traces over independent ensemble draws and compare it against the
    fluctuation-recursion prediction.

    Centering uses the sample mean; the estimate passes when the deviation
    stays within ``max(3 * stderr + bias_coeff / sqrt(dim), abs_floor)``.
    """
    if predicted is None:
        predicted = chain_fluctuation_moment(left, right, ensemble.params)
    return _run_estimator(
        ensemble,
        "resolvent-chain covariance",
        lambda w: chain_trace(w, left),
        lambda w: chain_trace(w, right),
        predicted,
        samples,
        seed,
        bias_coeff,
        abs_floor,
    )


def estimate_poly_covariance(
    ensemble: WignerEnsemble,
    left_matrices: Sequence[np.ndarray],
    right_matrices: Sequence[np.ndarray],
    samples: int,
    seed: int,
    predicted: Optional[complex] = None,
    bias_coeff: float = BIAS_COEFF,
    abs_floor: float = ABS_FLOOR,
) -> EstimatorReport:
    """Same estimator for the degree-one polynomial statistics
    (matrix-observable alternating products), compared against the annular
    pairing-count prediction; stated for the Gaussian-unitary ensemble."""
    if ensemble.params != EnsembleParams(0.0, 0.0, 0.0):
        raise ValueError("the polynomial covariance prediction assumes GUE parameters")
    left_matrices = [np.asarray(a, dtype=complex) for a in left_matrices]
    right_matrices = [np.asarray(a, dtype=complex) for a in right_matrices]
    if predicted is None:
        predicted = poly_covariance(left_matrices, right_matrices)
    return _run_estimator(
        ensemble,
        "polynomial-chain covariance",
        lambda w: _poly_chain_trace(w, left_matrices),
        lambda w: _poly_chain_trace(w, right_matrices),
        predicted,
        samples,
        seed,
        bias_coeff,
        abs_floor,
    )
