"""KKT vectors from a sampled Pareto front.

At a regular point of the front, the KKT vector is normal to the front's
tangent space.  Each point gets a local affine fit through its nearest
neighbours in image space; the fitted normal, oriented into the
nonnegative orthant and scaled to sum one, is the estimate.
"""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np
from scipy.spatial import cKDTree

ORIENTATION_TOL = 1e-6
RANK_RTOL = 1e-10


@dataclass(frozen=True)
class AlphaEstimate:
    alpha: np.ndarray  # (m, k), NaN rows where flagged
    flagged: np.ndarray  # (m,) bool
    reasons: list[str]  # "" for accepted points

    @property
    def accepted(self) -> np.ndarray:
        return ~self.flagged


def default_neighborhood(k: int) -> int:
    return 2 * (k - 1) + 1


def _normal(P: np.ndarray) -> tuple[np.ndarray | None, str]:
    """Unit normal of the affine hyperplane fitted to the rows of P."""
    m, k = P.shape
    C = P - P.mean(axis=0)
    scale = max(np.abs(P).max(), 1.0)
    if k == 2:
        # total least squares: the normal is the direction of least spread
        _, s, Vt = np.linalg.svd(C, full_matrices=True)
        if s.size == 0 or s[0] <= RANK_RTOL * scale:
            return None, "degenerate neighborhood: points coincide"
        return Vt[-1], ""
    # ordinary least squares with the last objective as response
    A = C[:, :-1]
    if np.linalg.matrix_rank(A, tol=RANK_RTOL * scale * max(m, k)) < k - 1:
        return None, "degenerate neighborhood: regression is rank deficient"
    beta = np.linalg.lstsq(A, C[:, -1], rcond=None)[0]
    nrm = np.append(-beta, 1.0)
    return nrm / np.linalg.norm(nrm), ""


def _orient(nrm: np.ndarray, tol: float) -> tuple[np.ndarray | None, str]:
    if nrm.sum() < 0:
        nrm = -nrm
    if np.any(nrm < -tol):
        return None, f"normal {np.round(nrm, 6).tolist()} has mixed signs"
    a = np.clip(nrm, 0.0, None)
    return a / a.sum(), ""


def estimate_kkt_vectors(front, neighborhood_size: int | None = None, *,
                         orientation_tol: float = ORIENTATION_TOL) -> AlphaEstimate:
    """Estimate one KKT vector per front point (rows of ``front``, shape (m, k))."""
    F = np.atleast_2d(np.asarray(front, dtype=float))
    m, k = F.shape
    if k < 2:
        raise ValueError("a front needs at least two objectives")
    size = default_neighborhood(k) if neighborhood_size is None else int(neighborhood_size)
    if size < k - 1:
        raise ValueError(f"neighborhood_size must be >= k - 1 = {k - 1}")
    if m < size + 1:
        raise ValueError(f"insufficient neighborhood: {m} front points, need at least {size + 1}")

    _, nbrs = cKDTree(F).query(F, k=size + 1)
    alpha = np.full((m, k), np.nan)
    flagged = np.zeros(m, dtype=bool)
    reasons = [""] * m
    for i in range(m):
        nrm, why = _normal(F[nbrs[i]])
        if nrm is not None:
            a, why = _orient(nrm, orientation_tol)
            if a is not None:
                alpha[i] = a
                continue
        flagged[i] = True
        reasons[i] = why
    return AlphaEstimate(alpha, flagged, reasons)
