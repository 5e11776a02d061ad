"""Ordinary least squares via Householder QR."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.linalg import qr, solve_triangular

from .dataset import ObservationDataset

#: smallest accepted |R_ii| relative to the largest
RANK_TOL = 1e-10


class RankDeficientError(np.linalg.LinAlgError):
    """Design matrix does not have full column rank."""


@dataclass(frozen=True)
class LinearFit:
    coefficients: np.ndarray  # intercept first
    sse: float
    residual_variance: float
    n: int

    @property
    def dof(self) -> int:
        return self.n - len(self.coefficients)


def lstsq_qr(A: np.ndarray, y: np.ndarray) -> tuple[np.ndarray, float]:
    """Solve min ||A b - y|| for full-rank ``A``; return (b, sse)."""
    Q, R = qr(A, mode="economic")
    diag = np.abs(np.diag(R))
    cutoff = RANK_TOL * diag.max()
    if diag.max() == 0.0 or diag.min() < cutoff:
        bad = np.flatnonzero(diag <= cutoff)
        raise RankDeficientError(
            f"design matrix is rank deficient (columns {bad.tolist()} are "
            f"numerically dependent on earlier ones)"
        )
    b = solve_triangular(R, Q.T @ y)
    r = y - A @ b
    return b, float(r @ r)


def ols_fit(data: ObservationDataset) -> LinearFit:
    """Fit ``y ~ b0 + b1 x1 + ... + bm xm`` by least squares."""
    data.require_fit_rows()
    b, sse = lstsq_qr(data.design(), data.y)
    dof = data.n - data.m - 1
    return LinearFit(coefficients=b, sse=sse, residual_variance=sse / dof, n=data.n)


def standard_errors(data: ObservationDataset, fit: LinearFit) -> np.ndarray:
    """Classical OLS standard errors sqrt(diag(s^2 (A'A)^-1))."""
    _, R = qr(data.design(), mode="economic")
    Rinv = solve_triangular(R, np.eye(R.shape[0]))
    return np.sqrt(fit.residual_variance * np.sum(Rinv**2, axis=1))
