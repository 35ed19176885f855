"""Monomial bases in n variables with analytic gradients.

A basis is the ordered set of all non-constant monomials of total degree at
most ``max_degree``.  Multi-indices are ordered lexicographically on the
reversed exponent tuple, so for two variables the order is

    x1, x1^2, ..., x1^l, x2, x1 x2, x1^2 x2, ..., x2^2, ...

and coefficient vectors can be written down index-for-index.
"""
from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from math import comb

import numpy as np


@dataclass(frozen=True)
class MonomialBasis:
    n: int
    max_degree: int
    exponents: np.ndarray = field(repr=False, compare=False)

    @property
    def d(self) -> int:
        return self.exponents.shape[0]

    @property
    def indices(self) -> list[tuple[int, ...]]:
        return [tuple(int(e) for e in row) for row in self.exponents]

    def __eq__(self, other):
        if not isinstance(other, MonomialBasis):
            return NotImplemented
        return self.n == other.n and self.max_degree == other.max_degree

    def __hash__(self):
        return hash((self.n, self.max_degree))

    def labels(self) -> list[str]:
        """Human readable monomial names, e.g. ``x1^2*x2``."""
        out = []
        for idx in self.indices:
            parts = []
            for i, e in enumerate(idx):
                if e == 1:
                    parts.append(f"x{i + 1}")
                elif e > 1:
                    parts.append(f"x{i + 1}^{e}")
            out.append("*".join(parts))
        return out

    def values(self, x) -> np.ndarray:
        """Evaluate all monomials. ``x`` of shape (n,) or (m, n); returns (d,) or (m, d)."""
        X, single = _as_points(x, self.n)
        V = np.prod(X[:, None, :] ** self.exponents[None, :, :], axis=2)
        return V[0] if single else V

    def gradients(self, x) -> np.ndarray:
        """Analytic gradients of all monomials.

        Returns shape (n, d) for a single point, (m, n, d) for m points;
        column j is the gradient of the j-th monomial.
        """
        X, single = _as_points(x, self.n)
        E = self.exponents  # (d, n)
        m = X.shape[0]
        G = np.empty((m, self.n, self.d))
        for i in range(self.n):
            lowered = E.copy()
            lowered[:, i] = np.maximum(E[:, i] - 1, 0)
            P = np.prod(X[:, None, :] ** lowered[None, :, :], axis=2)
            G[:, i, :] = E[None, :, i] * P
        return G[0] if single else G

    def to_json(self) -> dict:
        return {"n": self.n, "max_degree": self.max_degree}

    @classmethod
    def from_json(cls, obj: dict) -> "MonomialBasis":
        return generate_monomial_basis(int(obj["n"]), int(obj["max_degree"]))


def _as_points(x, n):
    X = np.asarray(x, dtype=float)
    single = X.ndim == 1
    X = np.atleast_2d(X)
    if X.shape[1] != n:
        raise ValueError(f"point dimension {X.shape[1]} does not match basis dimension {n}")
    return X, single


def basis_size(n: int, max_degree: int) -> int:
    return comb(n + max_degree, n) - 1


def generate_monomial_basis(n: int, max_degree: int) -> MonomialBasis:
    """All non-constant monomials in ``n`` variables of degree <= ``max_degree``."""
    if n < 1:
        raise ValueError(f"n must be >= 1, got {n}")
    if max_degree < 1:
        raise ValueError(f"max_degree must be >= 1, got {max_degree}")
    idx = [
        e for e in itertools.product(range(max_degree + 1), repeat=n)
        if 0 < sum(e) <= max_degree
    ]
    idx.sort(key=lambda e: e[::-1])
    exps = np.array(idx, dtype=np.int64).reshape(len(idx), n)
    exps.setflags(write=False)
    return MonomialBasis(n=n, max_degree=max_degree, exponents=exps)


def eval_monomial(index, x) -> float:
    index = tuple(index)
    x = np.asarray(x, dtype=float)
    if len(index) != x.shape[0]:
        raise ValueError("multi-index and point dimensions differ")
    out = 1.0
    for xi, e in zip(x, index):
        if e:
            out *= xi ** e
    return float(out)


def eval_basis_gradients(basis: MonomialBasis, x) -> np.ndarray:
    return basis.gradients(x)


def variable_dependence(basis: MonomialBasis, coef) -> np.ndarray:
    """Largest |coefficient| over all monomials involving each variable.

    ``coef`` is (k, d) or flat of length k*d. Returns shape (n,).
    """
    C = np.asarray(coef, dtype=float).reshape(-1, basis.d)
    involved = basis.exponents > 0  # (d, n)
    dep = np.zeros(basis.n)
    for i in range(basis.n):
        cols = involved[:, i]
        if cols.any():
            dep[i] = np.abs(C[:, cols]).max()
    return dep
