"""Pareto critical sets by exhaustive grid scan, plus point-cloud utilities."""
from __future__ import annotations

import csv
from dataclasses import dataclass, replace
from pathlib import Path

import numpy as np
from scipy.sparse import coo_matrix
from scipy.sparse.csgraph import connected_components
from scipy.spatial import cKDTree
from scipy.spatial.distance import cdist

from .kkt import DataSet, read_rows
from .objective import ObjectiveVector, best_alpha_many

NODE_BUDGET = 10**7
CHUNK = 200_000


class GridBudgetError(ValueError):
    pass


@dataclass(frozen=True)
class CriticalPointCloud:
    X: np.ndarray  # (m, n)
    alpha: np.ndarray  # (m, k)
    residual: np.ndarray  # (m,)
    box: np.ndarray  # (n, 2)
    resolution: tuple[int, ...]
    tol: float
    labels: np.ndarray | None = None

    def __len__(self):
        return self.X.shape[0]

    @property
    def spacing(self) -> np.ndarray:
        return (self.box[:, 1] - self.box[:, 0]) / (np.asarray(self.resolution) - 1)

    def default_radius(self) -> float:
        """Twice the largest grid spacing; adjacent nodes always link."""
        if min(self.resolution) < 2:
            raise ValueError("cloud carries no grid; give a linking radius explicitly")
        return 2.0 * float(self.spacing.max())

    def take(self, mask) -> "CriticalPointCloud":
        labels = None if self.labels is None else self.labels[mask]
        return replace(self, X=self.X[mask], alpha=self.alpha[mask],
                       residual=self.residual[mask], labels=labels)


def _grid_axes(box, resolution):
    box = np.asarray(box, dtype=float)
    n = box.shape[0]
    res = (resolution,) * n if np.isscalar(resolution) else tuple(resolution)
    if len(res) != n:
        raise ValueError("resolution must give one count per axis")
    if any(r < 2 for r in res):
        raise ValueError("resolution must be >= 2 per axis")
    if np.any(box[:, 1] <= box[:, 0]):
        raise ValueError("box must have positive extent on every axis")
    return box, tuple(int(r) for r in res), [np.linspace(lo, hi, r) for (lo, hi), r in zip(box, res)]


def grid_scan(f: ObjectiveVector, box, resolution, tol: float, *, method: str = "residual",
              budget: int = NODE_BUDGET) -> CriticalPointCloud:
    """Keep the grid nodes that approximate the Pareto critical set.

    ``method="residual"`` keeps every node whose optimal KKT residual is at
    most ``tol``.  ``method="crossing"`` (two variables, two objectives) keeps
    one node per grid edge across which det(grad f1, grad f2) changes sign
    while the gradients do not point the same way at either end, namely the end with the
    smaller residual; ``tol`` still caps the residual and may be ``inf``.  The
    crossing test does not depend on the scale of f, so it resolves curves
    where a fixed residual cutoff would keep wide bands or miss parts.
    """
    if method not in ("residual", "crossing"):
        raise ValueError(f"unknown scan method {method!r}")
    box, res, axes = _grid_axes(box, resolution)
    total = int(np.prod(res, dtype=np.int64))
    if total > budget:
        raise GridBudgetError(f"grid of {' x '.join(map(str, res))} = {total} nodes exceeds budget {budget}")
    if method == "crossing" and (len(res) != 2 or f.k != 2):
        raise ValueError("crossing scan needs n = k = 2")
    Xs, As, rs, dets, dots = [], [], [], [], []
    for start in range(0, total, CHUNK):
        flat = np.arange(start, min(start + CHUNK, total))
        idx = np.unravel_index(flat, res)
        X = np.stack([ax[i] for ax, i in zip(axes, idx)], axis=1)
        A, r = best_alpha_many(f, X)
        if method == "residual":
            m = r <= tol
            X, A, r = X[m], A[m], r[m]
        else:
            J = f.jacobian(X)  # (m, 2, 2), rows are gradients
            dets.append(J[:, 0, 0] * J[:, 1, 1] - J[:, 0, 1] * J[:, 1, 0])
            dots.append(np.einsum("mi,mi->m", J[:, 0], J[:, 1]))
        Xs.append(X)
        As.append(A)
        rs.append(r)
    X, A, r = np.concatenate(Xs), np.concatenate(As), np.concatenate(rs)
    if method == "crossing":
        keep = _crossing_nodes(np.concatenate(dets).reshape(res), np.concatenate(dots).reshape(res),
                               r.reshape(res)).reshape(-1) & (r <= tol)
        X, A, r = X[keep], A[keep], r[keep]
    return CriticalPointCloud(X, A, r, box, res, float(tol))


def _crossing_nodes(det, dot, res, slack: float = 1e-12):
    """Mark, for each grid edge with a sign change of det, its lower-residual end."""
    keep = np.zeros(det.shape, dtype=bool)
    # roundoff at nodes where a gradient vanishes must not count as pointing the same way
    apart = dot <= slack * max(float(np.abs(dot).max()), float(np.abs(det).max()))
    for axis in range(det.ndim):
        lo = [slice(None)] * det.ndim
        hi = [slice(None)] * det.ndim
        lo[axis] = slice(None, -1)
        hi[axis] = slice(1, None)
        lo, hi = tuple(lo), tuple(hi)
        edge = (det[lo] * det[hi] <= 0) & apart[lo] & apart[hi]
        first = res[lo] <= res[hi]
        keep[lo] |= edge & first
        keep[hi] |= edge & ~first
    return keep


def cluster_labels(points, radius: float) -> np.ndarray:
    """Single-linkage components; labels numbered by first appearance."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    P = np.atleast_2d(np.asarray(points, dtype=float))
    m = P.shape[0]
    if m == 0:
        return np.zeros(0, dtype=int)
    pairs = cKDTree(P).query_pairs(radius, output_type="ndarray")
    graph = coo_matrix((np.ones(len(pairs)), (pairs[:, 0], pairs[:, 1])), shape=(m, m))
    _, raw = connected_components(graph, directed=False)
    _, first, inv = np.unique(raw, return_index=True, return_inverse=True)
    rank = np.argsort(np.argsort(first))
    return rank[inv]


def cluster_components(cloud: CriticalPointCloud, radius: float | None = None) -> CriticalPointCloud:
    """Return the cloud with connected-component labels attached."""
    radius = cloud.default_radius() if radius is None else radius
    return replace(cloud, labels=cluster_labels(cloud.X, radius))


def component_sizes(labels) -> list[int]:
    return np.bincount(labels).tolist() if len(labels) else []


def filter_near_data(cloud: CriticalPointCloud, data: DataSet | np.ndarray, radius: float,
                     link_radius: float | None = None) -> CriticalPointCloud:
    """Keep the components that come within ``radius`` of some data point."""
    if radius <= 0:
        raise ValueError("radius must be positive")
    D = data.X if isinstance(data, DataSet) else np.atleast_2d(np.asarray(data, dtype=float))
    if len(cloud) == 0 or D.size == 0:
        return cloud.take(np.zeros(len(cloud), dtype=bool))
    if cloud.labels is None:
        cloud = cluster_components(cloud, link_radius)
    dist, _ = cKDTree(D).query(cloud.X)
    touched = np.unique(cloud.labels[dist <= radius])
    return cloud.take(np.isin(cloud.labels, touched))


def directed_hausdorff(A, B, chunk: int = 4096) -> float:
    """max over a in A of the distance from a to B, by brute force in chunks."""
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    worst = 0.0
    for s in range(0, A.shape[0], chunk):
        worst = max(worst, float(cdist(A[s:s + chunk], B).min(axis=1).max()))
    return worst


def hausdorff(A, B) -> float:
    A = np.atleast_2d(np.asarray(A, dtype=float))
    B = np.atleast_2d(np.asarray(B, dtype=float))
    if A.size == 0 or B.size == 0:
        raise ValueError("Hausdorff distance needs two nonempty point sets")
    if A.shape[1] != B.shape[1]:
        raise ValueError("point sets live in different dimensions")
    return max(directed_hausdorff(A, B), directed_hausdorff(B, A))


# ---------------------------------------------------------------------------
# CSV

def save_cloud(cloud: CriticalPointCloud, path) -> None:
    labels = cloud.labels if cloud.labels is not None else np.full(len(cloud), -1)
    n, k = cloud.X.shape[1], cloud.alpha.shape[1]
    with Path(path).open("w", newline="") as fh:
        fh.write("# " + ",".join([f"x{i + 1}" for i in range(n)] + [f"alpha{i + 1}" for i in range(k)]
                                 + ["residual", "component"]) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for x, a, r, lab in zip(cloud.X, cloud.alpha, cloud.residual, labels):
            w.writerow([repr(float(v)) for v in (*x, *a, r)] + [int(lab)])


def load_cloud(path, n: int, k: int) -> CriticalPointCloud:
    rows = np.array(read_rows(path, n + k + 2), dtype=float).reshape(-1, n + k + 2)
    X = rows[:, :n]
    labels = rows[:, -1].astype(int)
    box = np.stack([X.min(axis=0), X.max(axis=0)], axis=1) if len(X) else np.zeros((n, 2))
    return CriticalPointCloud(X, rows[:, n:n + k], rows[:, n + k], box, (0,) * n,
                              float(rows[:, n + k].max()) if len(X) else 0.0,
                              labels=None if np.all(labels < 0) else labels)
