"""Objective vectors, KKT residuals and optimal KKT vectors.

Two flavours of objective vector are provided: :class:`PolynomialObjective`
(coefficients over a monomial basis, the output of the inverse solver) and
:class:`AnalyticObjective` (closed-form value and Jacobian, used as ground
truth).  Both evaluate on a single point of shape (n,) or on a batch of
shape (m, n).
"""
from __future__ import annotations

import itertools
import re
from dataclasses import dataclass, field
from typing import Callable

import numpy as np

from .basis import MonomialBasis, variable_dependence

SIMPLEX_SUM_TOL = 1e-9
SIMPLEX_NEG_TOL = 1e-12
CRITICALITY_TOL = 1e-6
MAX_FACE_K = 6


class ObjectiveVector:
    n: int
    k: int

    def value(self, x) -> np.ndarray:
        raise NotImplementedError

    def jacobian(self, x) -> np.ndarray:
        """Row i is the gradient of f_i. Shape (k, n) or (m, k, n)."""
        raise NotImplementedError

    def __call__(self, x):
        return self.value(x)


@dataclass(frozen=True)
class PolynomialObjective(ObjectiveVector):
    basis: MonomialBasis
    coef: np.ndarray  # (k, d)

    def __post_init__(self):
        C = np.array(self.coef, dtype=float)
        if C.ndim != 2 or C.shape[1] != self.basis.d:
            raise ValueError(f"coefficient matrix must be (k, {self.basis.d}), got {C.shape}")
        C.setflags(write=False)
        object.__setattr__(self, "coef", C)

    @property
    def n(self):
        return self.basis.n

    @property
    def k(self):
        return self.coef.shape[0]

    @property
    def flat(self) -> np.ndarray:
        """Coefficients in objective-major, basis-minor order."""
        return self.coef.reshape(-1)

    def value(self, x):
        return self.basis.values(x) @ self.coef.T

    def jacobian(self, x):
        G = self.basis.gradients(x)  # (n, d) or (m, n, d)
        return np.einsum("kd,...nd->...kn", self.coef, G)

    def scaled(self, t: float) -> "PolynomialObjective":
        return PolynomialObjective(self.basis, t * self.coef)

    def variable_dependence(self) -> np.ndarray:
        return variable_dependence(self.basis, self.coef)

    def describe(self, precision: int = 4) -> list[str]:
        labels = self.basis.labels()
        lines = []
        for i, row in enumerate(self.coef):
            terms = [f"{c:+.{precision}g}*{m}" for c, m in zip(row, labels) if c != 0]
            lines.append(f"f{i + 1}(x) = " + (" ".join(terms) if terms else "0"))
        return lines


@dataclass(frozen=True)
class AnalyticObjective(ObjectiveVector):
    name: str
    n: int
    k: int
    fun: Callable = field(repr=False)
    jac: Callable = field(repr=False)
    params: tuple = ()

    def value(self, x):
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        out = self.fun(np.atleast_2d(X))
        return out[0] if single else out

    def jacobian(self, x):
        X = np.asarray(x, dtype=float)
        single = X.ndim == 1
        out = self.jac(np.atleast_2d(X))
        return out[0] if single else out

    @property
    def spec(self) -> str:
        if not self.params:
            return self.name
        return f"{self.name}({','.join(repr(float(p)) for p in self.params)})"


# ---------------------------------------------------------------------------
# built-in analytic objectives

def _cubic_pair(a2: float, b2: float, name: str, params: tuple) -> AnalyticObjective:
    def fun(X):
        x1, x2 = X[:, 0], X[:, 1]
        s = x1**3 + x2**3
        return np.stack([-3 * a2 * x1 + s, -3 * b2 * x2 + s], axis=1)

    def jac(X):
        x1, x2 = X[:, 0], X[:, 1]
        J = np.empty((X.shape[0], 2, 2))
        J[:, 0, 0] = -3 * a2 + 3 * x1**2
        J[:, 0, 1] = 3 * x2**2
        J[:, 1, 0] = 3 * x1**2
        J[:, 1, 1] = -3 * b2 + 3 * x2**2
        return J

    return AnalyticObjective(name, 2, 2, fun, jac, params)


def circle_objective() -> AnalyticObjective:
    """f = (-3x1 + x1^3 + x2^3, -3x2 + x1^3 + x2^3); critical set is the unit circle."""
    return _cubic_pair(1.0, 1.0, "circle", ())


def ellipse_objective(a: float, b: float) -> AnalyticObjective:
    if a <= 0 or b <= 0:
        raise ValueError("ellipse semi-axes must be positive")
    return _cubic_pair(a * a, b * b, "ellipse", (float(a), float(b)))


LOCATION_A = np.array([-1.0, -1.0])
LOCATION_MEAN = np.array([1.0, 0.0])
# the expectation in the degree-2 monomial basis (x1, x1^2, x2, x1 x2, x2^2), constants dropped
LOCATION_COEF = np.array([2.0, 1.0, 2.0, 0.0, 1.0, -2.0, 1.0, 0.0, 0.0, 1.0])


def location_expectation() -> AnalyticObjective:
    """Expected value of the stochastic location problem, xi1 ~ U[0, 2]."""
    def fun(X):
        f1 = np.sum((X - LOCATION_A) ** 2, axis=1)
        f2 = np.sum((X - LOCATION_MEAN) ** 2, axis=1) + 1.0 / 3.0
        return np.stack([f1, f2], axis=1)

    def jac(X):
        return np.stack([2 * (X - LOCATION_A), 2 * (X - LOCATION_MEAN)], axis=1)

    return AnalyticObjective("location-expectation", 2, 2, fun, jac)


def sample_average_location(samples) -> AnalyticObjective:
    """(||x - a||^2, mean_j ||x - xi_j||^2) for a fixed sample set xi (N_s, 2)."""
    xi = np.array(samples, dtype=float).reshape(-1, 2)
    mean = xi.mean(axis=0)
    spread = np.mean(np.sum((xi - mean) ** 2, axis=1))

    def fun(X):
        f1 = np.sum((X - LOCATION_A) ** 2, axis=1)
        # mean ||x - xi||^2 = ||x - mean||^2 + mean ||xi - mean||^2
        f2 = np.sum((X - mean) ** 2, axis=1) + spread
        return np.stack([f1, f2], axis=1)

    def jac(X):
        return np.stack([2 * (X - LOCATION_A), 2 * (X - mean)], axis=1)

    return AnalyticObjective("location-saa", 2, 2, fun, jac, tuple(mean))


_LH_BUMPS = ((0.2, np.array([0.0, 0.0]), 0.65), (1.5, np.array([0.0, -1.5]), 2.8))
_SQRT2_2 = np.sqrt(2.0) / 2.0


def lh_bump(X) -> tuple[np.ndarray, np.ndarray]:
    """b(x) and its gradient for the L&H 2x2 problem; X is (m, 2)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    b = np.zeros(X.shape[0])
    db = np.zeros_like(X)
    for weight, p0, sigma in _LH_BUMPS:
        diff = X - p0
        g = np.sqrt(2 * np.pi / sigma) * np.exp(-np.sum(diff**2, axis=1) / sigma**2)
        b += weight * g
        db += (weight * g * (-2.0 / sigma**2))[:, None] * diff
    return b, db


def lh22_objective() -> AnalyticObjective:
    def fun(X):
        b, _ = lh_bump(X)
        return -_SQRT2_2 * np.stack([X[:, 0] + b, -X[:, 0] + b], axis=1)

    def jac(X):
        _, db = lh_bump(X)
        e1 = np.zeros_like(db)
        e1[:, 0] = 1.0
        return -_SQRT2_2 * np.stack([e1 + db, -e1 + db], axis=1)

    return AnalyticObjective("lh22", 2, 2, fun, jac)


REGISTRY = {
    "circle": circle_objective,
    "ellipse": ellipse_objective,
    "location-expectation": location_expectation,
    "lh22": lh22_objective,
}


def get_objective(spec: str) -> AnalyticObjective:
    """Look up a built-in objective, e.g. ``"lh22"`` or ``"ellipse(2,1)"``."""
    m = re.fullmatch(r"\s*([\w-]+)\s*(?:\((.*)\))?\s*", spec)
    if not m or m.group(1) not in REGISTRY:
        raise KeyError(f"unknown objective {spec!r}; known: {sorted(REGISTRY)}")
    args = [float(a) for a in m.group(2).split(",")] if m.group(2) else []
    return REGISTRY[m.group(1)](*args)


# ---------------------------------------------------------------------------
# KKT residuals

def check_simplex(alpha, sum_tol=SIMPLEX_SUM_TOL, neg_tol=SIMPLEX_NEG_TOL) -> np.ndarray:
    a = np.asarray(alpha, dtype=float)
    if np.any(a < -neg_tol) or np.any(np.abs(a.sum(axis=-1) - 1.0) > sum_tol):
        raise ValueError(f"alpha {a} is not in the standard simplex")
    return a


def kkt_residual(f: ObjectiveVector, x, alpha) -> float:
    """||Df(x)^T alpha||_2."""
    alpha = check_simplex(alpha)
    return float(np.linalg.norm(f.jacobian(x).T @ alpha))


def _barycenter_tiebreak(G, y_star, tol):
    """Point of {a in simplex : G a = y*} closest to the barycenter (face enumeration)."""
    n, k = G.shape
    bary = np.full(k, 1.0 / k)
    best, best_dist = None, np.inf
    scale = max(1.0, np.abs(G).max())
    for size in range(1, k + 1):
        for S in itertools.combinations(range(k), size):
            S = list(S)
            M = np.vstack([G[:, S], np.ones((1, size))])
            r = np.concatenate([y_star, [1.0]])
            aS = bary[S] + np.linalg.lstsq(M, r - M @ bary[S], rcond=None)[0]
            if np.linalg.norm(M @ aS - r) > tol * scale or np.any(aS < -1e-12):
                continue
            a = np.zeros(k)
            a[S] = np.clip(aS, 0.0, None)
            dist = np.linalg.norm(a - bary)
            if dist < best_dist - 1e-15:
                best, best_dist = a, dist
    return best


def min_norm_simplex(G) -> tuple[np.ndarray, float]:
    """Minimize ||G a||_2 over the standard simplex; G is (n, k) with gradients as columns.

    k = 2 is closed form; larger k enumerates faces of the simplex and solves the
    equality-constrained least-squares problem on each.  Ties resolve to the
    minimizer closest to the barycenter.
    """
    G = np.asarray(G, dtype=float)
    n, k = G.shape
    if k == 1:
        return np.ones(1), float(np.linalg.norm(G[:, 0]))
    if k == 2:
        g1, g2 = G[:, 0], G[:, 1]
        diff = g1 - g2
        dd = diff @ diff
        if dd <= 1e-28 * max(g1 @ g1, g2 @ g2, 1e-300):
            a = 0.5
        else:
            a = min(max(-(g2 @ diff) / dd, 0.0), 1.0)
        alpha = np.array([a, 1.0 - a])
        return alpha, float(np.linalg.norm(G @ alpha))
    if k > MAX_FACE_K:
        raise ValueError(f"face enumeration limited to k <= {MAX_FACE_K}, got {k}")

    best_val, best_a = np.inf, None
    for size in range(1, k + 1):
        for S in itertools.combinations(range(k), size):
            S = list(S)
            GS = G[:, S]
            # stationarity: GS^T GS a - mu 1 = 0, 1^T a = 1
            K = np.zeros((size + 1, size + 1))
            K[:size, :size] = GS.T @ GS
            K[:size, size] = -1.0
            K[size, :size] = 1.0
            rhs = np.zeros(size + 1)
            rhs[size] = 1.0
            sol = np.linalg.lstsq(K, rhs, rcond=None)[0]
            aS = sol[:size]
            if abs(aS.sum() - 1.0) > 1e-9 or np.any(aS < -1e-12):
                continue
            aS = np.clip(aS, 0.0, None)
            aS /= aS.sum()
            val = np.linalg.norm(GS @ aS)
            if val < best_val:
                best_val = val
                best_a = np.zeros(k)
                best_a[S] = aS
    y_star = G @ best_a
    tie = _barycenter_tiebreak(G, y_star, tol=1e-9)
    if tie is not None and np.linalg.norm(G @ tie) <= best_val + 1e-12:
        best_a = tie
    return best_a, float(np.linalg.norm(G @ best_a))


def best_alpha(f: ObjectiveVector, x) -> tuple[np.ndarray, float]:
    """KKT vector minimizing the residual at ``x`` and the residual itself."""
    return min_norm_simplex(f.jacobian(np.asarray(x, dtype=float)).T)


def best_alpha_many(f: ObjectiveVector, X) -> tuple[np.ndarray, np.ndarray]:
    """Vectorized :func:`best_alpha` over points X (m, n)."""
    X = np.atleast_2d(np.asarray(X, dtype=float))
    J = f.jacobian(X)  # (m, k, n)
    m, k, _ = J.shape
    if k == 2:
        g1, g2 = J[:, 0, :], J[:, 1, :]
        diff = g1 - g2
        dd = np.einsum("ij,ij->i", diff, diff)
        scale = np.maximum(np.maximum(np.einsum("ij,ij->i", g1, g1), np.einsum("ij,ij->i", g2, g2)), 1e-300)
        flat = dd <= 1e-28 * scale
        with np.errstate(divide="ignore", invalid="ignore"):
            a = -np.einsum("ij,ij->i", g2, diff) / dd
        a = np.where(flat, 0.5, np.clip(a, 0.0, 1.0))
        alpha = np.stack([a, 1.0 - a], axis=1)
        res = np.linalg.norm(alpha[:, 0, None] * g1 + alpha[:, 1, None] * g2, axis=1)
        return alpha, res
    alphas = np.empty((m, k))
    res = np.empty(m)
    for i in range(m):
        alphas[i], res[i] = min_norm_simplex(J[i].T)
    return alphas, res


def is_pareto_critical(f: ObjectiveVector, x, tol: float = CRITICALITY_TOL) -> bool:
    return best_alpha(f, x)[1] <= tol


def degeneracy_flags(f: PolynomialObjective, tol: float = 1e-8) -> np.ndarray:
    """True for every variable the objective vector (nearly) does not depend on."""
    return f.variable_dependence() <= tol
