"""Minimum-norm least-squares solve and conditioning diagnostics."""

from __future__ import annotations

import time
from dataclasses import dataclass

import numpy as np
from scipy.linalg import lstsq

from .assembly import WeightedSystem


@dataclass(frozen=True)
class LstsqReport:
    """What the SVD solve saw: size, rank, spectrum edges, residual, time."""

    n_rows: int
    n_cols: int
    rank: int
    sigma_max: float
    sigma_min_kept: float
    residual_norm: float
    wall_time_s: float

    @property
    def condition(self) -> float:
        """Spread of the retained spectrum (max over smallest kept sigma)."""
        if self.sigma_min_kept == 0.0:
            return np.inf
        return self.sigma_max / self.sigma_min_kept

    @property
    def rank_deficient(self) -> bool:
        return self.rank < min(self.n_rows, self.n_cols)


def solve_min_norm(
    a: np.ndarray, b: np.ndarray, rank_tol: float | None = None
) -> tuple[np.ndarray, LstsqReport]:
    """Minimum-norm solution of min ||a x - b||_2 via SVD (gelsd).

    Singular values below rank_tol * sigma_max are discarded; the default
    tolerance is eps * max(n_rows, n_cols), matching the numerical-rank
    convention.  Among all residual minimizers the returned x has the
    smallest Euclidean norm, which is what keeps vastly overparametrized
    feature expansions stable.
    """
    a = np.asarray(a, float)
    b = np.asarray(b, float)
    if rank_tol is None:
        rank_tol = np.finfo(float).eps * max(a.shape)
    t0 = time.perf_counter()
    x, _, rank, sv = lstsq(a, b, cond=rank_tol, lapack_driver="gelsd")
    wall = time.perf_counter() - t0
    sigma_max = float(sv[0]) if len(sv) else 0.0
    sigma_min_kept = float(sv[rank - 1]) if rank > 0 else 0.0
    residual = float(np.linalg.norm(a @ x - b))
    report = LstsqReport(
        n_rows=a.shape[0],
        n_cols=a.shape[1],
        rank=int(rank),
        sigma_max=sigma_max,
        sigma_min_kept=sigma_min_kept,
        residual_norm=residual,
        wall_time_s=wall,
    )
    return x, report


def solve_system(
    system: WeightedSystem, rank_tol: float | None = None
) -> tuple[np.ndarray, LstsqReport]:
    """Solve a weighted collocation system in the rescaled norm."""
    return solve_min_norm(system.weighted_matrix(), system.weighted_rhs(), rank_tol)


def condition_report(a: np.ndarray) -> dict:
    """Full-spectrum conditioning summary of a matrix (for diagnostics)."""
    sv = np.linalg.svd(a, compute_uv=False)
    tol = np.finfo(float).eps * max(a.shape) * sv[0]
    rank = int((sv > tol).sum())
    return {
        "sigma_max": float(sv[0]),
        "sigma_min": float(sv[-1]),
        "rank": rank,
        "n_singular": len(sv),
        "condition": float(sv[0] / sv[-1]) if sv[-1] > 0 else np.inf,
    }
