"""Evaluation metrics: normalized errors and dominant-subspace efficiency."""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

__all__ = ["MetricReport", "nmse_h", "nmse_c", "relative_efficiency"]


@dataclass(frozen=True)
class MetricReport:
    """Bundle of per-trial metric values for one algorithm run."""

    nmse_h: float
    nmse_c: float
    eta: float
    subspace_rank: int

    @property
    def nmse_h_db(self) -> float:
        return 10.0 * np.log10(self.nmse_h)

    @property
    def nmse_c_db(self) -> float:
        return 10.0 * np.log10(self.nmse_c)


def nmse_h(true_channels: np.ndarray, estimated_channels: np.ndarray) -> float:
    """Mean over snapshots of ||H_t - Hhat_t||_F^2 / ||H_t||_F^2."""
    h = np.asarray(true_channels)
    h_hat = np.asarray(estimated_channels)
    if h.shape != h_hat.shape:
        raise ValueError("channel stacks must have identical shapes")
    num = np.sum(np.abs(h - h_hat) ** 2, axis=tuple(range(1, h.ndim)))
    den = np.sum(np.abs(h) ** 2, axis=tuple(range(1, h.ndim)))
    if np.any(den == 0):
        raise ValueError("reference channel has zero norm in at least one snapshot")
    return float(np.mean(num / den))


def nmse_c(r_true: np.ndarray, r_hat: np.ndarray) -> float:
    """||Rhat - R||_F^2 / ||R||_F^2."""
    r = np.asarray(r_true)
    den = float(np.sum(np.abs(r) ** 2))
    if den == 0:
        raise ValueError("reference covariance is zero")
    return float(np.sum(np.abs(np.asarray(r_hat) - r) ** 2) / den)


def relative_efficiency(r_true: np.ndarray, r_hat: np.ndarray, rank: int) -> float:
    """Fraction of dominant-subspace signal power the estimate retains.

    eta = tr(Uhat^H R Uhat) / tr(U^H R U) with U and Uhat the top-``rank``
    left singular vectors of the true and estimated covariance. Equals 1 when
    the estimated dominant subspace matches the true one, regardless of
    scaling.
    """
    r = np.asarray(r_true)
    if rank < 1 or rank > r.shape[0]:
        raise ValueError("rank must be in [1, matrix dimension]")
    if not np.any(r):
        raise ValueError("reference covariance is zero")
    u_true, _, _ = np.linalg.svd(r)
    u_hat, _, _ = np.linalg.svd(np.asarray(r_hat))
    u_true = u_true[:, :rank]
    u_hat = u_hat[:, :rank]
    num = np.trace(u_hat.conj().T @ r @ u_hat).real
    den = np.trace(u_true.conj().T @ r @ u_true).real
    return float(num / den)
