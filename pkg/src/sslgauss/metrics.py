"""Evaluation metrics: Gaussian tail, support overlap, classification risk.

For the symmetric mixture the linear classifier x -> sign<v, x> with a unit
vector v has exact error Phi_c(<v, mu>), so generalization error is computed
in closed form and no test set is needed.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import ContractError
from .gmodel import SparseMean

_UNIT_NORM_TOL = 1e-9
_NEG_RISK_TOL = 1e-12


@dataclass(frozen=True)
class TrialMetrics:
    overlap: float
    gen_error: float
    excess_risk: float
    runtime_ms: float


def phi_c(t: float) -> float:
    """Upper tail P(Z > t) of the standard normal."""
    return 0.5 * math.erfc(t / math.sqrt(2.0))


def support_overlap(s_true, s_hat, k: int) -> float:
    """Normalized overlap |S_true & S_hat| / k; S_hat must have exactly k indices."""
    hat = set(int(i) for i in s_hat)
    if len(hat) != k:
        raise ContractError(f"estimated support has {len(hat)} indices, expected k={k}")
    true = set(int(i) for i in s_true)
    return len(true & hat) / k


def _check_unit(direction: np.ndarray) -> np.ndarray:
    v = np.asarray(direction, dtype=np.float64)
    nrm = float(np.linalg.norm(v))
    if abs(nrm - 1.0) > _UNIT_NORM_TOL:
        raise ContractError(f"direction must be unit norm, got ||v|| = {nrm!r}")
    return v


def generalization_error(mu: SparseMean, direction_hat: np.ndarray) -> float:
    """Exact error of x -> sign<direction_hat, x> under the mixture with mean mu."""
    v = _check_unit(direction_hat)
    mu_vec = mu.to_dense()
    return phi_c(float(np.dot(v, mu_vec)))


def excess_risk(mu: SparseMean, direction_hat: np.ndarray) -> float:
    """Generalization error minus the Bayes error Phi_c(||mu||).

    Nonnegative for unit directions; float noise in [-1e-12, 0) is clamped
    to zero.
    """
    e = generalization_error(mu, direction_hat) - phi_c(math.sqrt(mu.norm_sq))
    if -_NEG_RISK_TOL <= e < 0.0:
        return 0.0
    return e


def score(mu: SparseMean, support_hat, direction_hat: np.ndarray,
          runtime_ms: float) -> TrialMetrics:
    """Bundle the per-trial metrics for one support/direction estimate."""
    return TrialMetrics(
        overlap=support_overlap(mu.support, support_hat, mu.k),
        gen_error=generalization_error(mu, direction_hat),
        excess_risk=excess_risk(mu, direction_hat),
        runtime_ms=runtime_ms)


def empirical_error(direction_hat: np.ndarray, xs: np.ndarray, ys: np.ndarray) -> float:
    """Fraction of test pairs with sign<v, x> != y (cross-check of the closed form).

    A zero projection counts as predicting +1.
    """
    v = _check_unit(direction_hat)
    xs = np.asarray(xs, dtype=np.float64)
    ys = np.asarray(ys)
    if xs.shape[0] != ys.shape[0] or xs.shape[0] == 0:
        raise ContractError("test set must be nonempty with matching labels")
    pred = np.where(xs @ v >= 0.0, 1, -1)
    return float(np.mean(pred != ys))
