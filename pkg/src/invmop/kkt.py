"""Data sets of (x, alpha) pairs and the stacked KKT matrix.

For a data point (x, alpha) and basis gradients G(x) of shape (n, d), the
block ``L(x, alpha) = [alpha_1 G, ..., alpha_k G]`` satisfies
``L(x, alpha) @ c == Df(x).T @ alpha`` for the objective vector with
coefficients ``c`` (objective-major, basis-minor).  Stacking the blocks of
all data points gives the homogeneous system whose null space holds the
objective vectors that make every data point exactly critical.
"""
from __future__ import annotations

import csv
import json
from dataclasses import dataclass
from pathlib import Path

import numpy as np

from .basis import MonomialBasis
from .objective import SIMPLEX_NEG_TOL, SIMPLEX_SUM_TOL


class DataFormatError(ValueError):
    pass


def _admit_simplex(alpha: np.ndarray, where: str) -> np.ndarray:
    """Renormalize an alpha inside the slack, reject one outside."""
    a = np.asarray(alpha, dtype=float)
    if not np.all(np.isfinite(a)):
        raise DataFormatError(f"{where}: non-finite KKT vector {a.tolist()}")
    if np.any(a < -SIMPLEX_NEG_TOL):
        raise DataFormatError(f"{where}: negative KKT vector component {a.tolist()}")
    if abs(a.sum() - 1.0) > SIMPLEX_SUM_TOL:
        raise DataFormatError(f"{where}: KKT vector sums to {a.sum()!r}, not 1")
    clipped = np.clip(a, 0.0, None)
    s = clipped.sum()
    # sums off by float rounding only are left alone so admission is idempotent
    if np.array_equal(clipped, a) and abs(s - 1.0) <= 8 * np.finfo(float).eps * a.size:
        return a
    return clipped / s


@dataclass(frozen=True)
class DataPoint:
    x: np.ndarray
    alpha: np.ndarray

    def __post_init__(self):
        x = np.array(self.x, dtype=float).reshape(-1)
        a = _admit_simplex(np.array(self.alpha, dtype=float).reshape(-1), "data point")
        x.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "x", x)
        object.__setattr__(self, "alpha", a)


class DataSet:
    """Immutable collection of N data points; X is (N, n), alpha is (N, k)."""

    def __init__(self, X, alpha, *, meta: dict | None = None):
        X = np.array(X, dtype=float)
        A = np.array(alpha, dtype=float)
        if X.ndim != 2 or A.ndim != 2 or X.shape[0] != A.shape[0]:
            raise DataFormatError(f"inconsistent shapes {X.shape} and {A.shape}")
        if X.shape[0] == 0:
            raise DataFormatError("data set must contain at least one point")
        if not np.all(np.isfinite(X)):
            raise DataFormatError("non-finite decision vector")
        for j in range(A.shape[0]):
            A[j] = _admit_simplex(A[j], f"point {j + 1}")
        X.setflags(write=False)
        A.setflags(write=False)
        self.X = X
        self.alpha = A
        self.meta = dict(meta or {})

    @classmethod
    def from_points(cls, points, **kw) -> "DataSet":
        points = list(points)
        return cls([p.x for p in points], [p.alpha for p in points], **kw)

    @property
    def n(self) -> int:
        return self.X.shape[1]

    @property
    def k(self) -> int:
        return self.alpha.shape[1]

    @property
    def N(self) -> int:
        return self.X.shape[0]

    def __len__(self):
        return self.N

    def __iter__(self):
        for x, a in zip(self.X, self.alpha):
            yield DataPoint(x, a)

    def __getitem__(self, j) -> DataPoint:
        return DataPoint(self.X[j], self.alpha[j])

    def subset(self, idx) -> "DataSet":
        return DataSet(self.X[idx], self.alpha[idx], meta=self.meta)

    def __eq__(self, other):
        if not isinstance(other, DataSet):
            return NotImplemented
        return np.array_equal(self.X, other.X) and np.array_equal(self.alpha, other.alpha)

    def __repr__(self):
        return f"DataSet(N={self.N}, n={self.n}, k={self.k})"


@dataclass(frozen=True)
class KktSystem:
    matrix: np.ndarray  # (n*N, k*d)
    n: int
    N: int
    k: int
    d: int

    def block(self, j: int) -> np.ndarray:
        return self.matrix[self.n * j:self.n * (j + 1)]


def assemble_block(point: DataPoint, basis: MonomialBasis) -> np.ndarray:
    if point.x.shape[0] != basis.n:
        raise ValueError(f"point has dimension {point.x.shape[0]}, basis expects {basis.n}")
    G = basis.gradients(point.x)  # (n, d)
    return np.kron(point.alpha[None, :], G)


def assemble_system(data: DataSet, basis: MonomialBasis) -> KktSystem:
    if data.n != basis.n:
        raise ValueError(f"data has dimension {data.n}, basis expects {basis.n}")
    G = basis.gradients(data.X)  # (N, n, d)
    M = data.alpha[:, None, :, None] * G[:, :, None, :]  # (N, n, k, d)
    N, n, k, d = M.shape
    return KktSystem(M.reshape(N * n, k * d), n=n, N=N, k=k, d=d)


# ---------------------------------------------------------------------------
# CSV I/O

def sidecar_path(path) -> Path:
    p = Path(path)
    return p.with_name(p.name + ".json")


def save_dataset(data: DataSet, path, *, header: bool = False, meta: dict | None = None) -> None:
    """Write one row per point, columns x_1..x_n, alpha_1..alpha_k, plus a JSON sidecar."""
    path = Path(path)
    with path.open("w", newline="") as fh:
        if header:
            cols = [f"x{i + 1}" for i in range(data.n)] + [f"alpha{i + 1}" for i in range(data.k)]
            fh.write("# " + ",".join(cols) + "\n")
        w = csv.writer(fh, lineterminator="\n")
        for x, a in zip(data.X, data.alpha):
            w.writerow([repr(float(v)) for v in (*x, *a)])
    side = {"n": data.n, "k": data.k}
    side.update(data.meta)
    side.update(meta or {})
    sidecar_path(path).write_text(json.dumps(side, indent=2, sort_keys=True) + "\n")


def read_rows(path, ncols: int | None = None) -> list[list[float]]:
    rows = []
    with Path(path).open(newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            fields = next(csv.reader([s]))
            if ncols is not None and len(fields) != ncols:
                raise DataFormatError(f"row {lineno}: expected {ncols} columns, got {len(fields)}")
            try:
                rows.append([float(v) for v in fields])
            except ValueError as exc:
                raise DataFormatError(f"row {lineno}: {exc}") from None
    return rows


def load_dataset(path, n: int | None = None, k: int | None = None) -> DataSet:
    """Read a data CSV; dimensions come from arguments or the JSON sidecar."""
    path = Path(path)
    meta = {}
    side = sidecar_path(path)
    if side.exists():
        meta = json.loads(side.read_text())
    n = int(n if n is not None else meta.get("n", 0)) or None
    k = int(k if k is not None else meta.get("k", 0)) or None
    if n is None or k is None:
        raise DataFormatError(f"{path}: dimensions n and k unknown (no sidecar {side.name})")
    X, A = [], []
    with path.open(newline="") as fh:
        for lineno, line in enumerate(fh, start=1):
            s = line.strip()
            if not s or s.startswith("#"):
                continue
            fields = s.split(",")
            if len(fields) != n + k:
                raise DataFormatError(f"row {lineno}: expected {n + k} columns, got {len(fields)}")
            try:
                vals = [float(v) for v in fields]
            except ValueError as exc:
                raise DataFormatError(f"row {lineno}: {exc}") from None
            X.append(vals[:n])
            A.append(_admit_simplex(np.array(vals[n:]), f"row {lineno}"))
    if not X:
        raise DataFormatError(f"{path}: no data rows")
    meta = {key: v for key, v in meta.items() if key not in ("n", "k")}
    return DataSet(X, A, meta=meta)
