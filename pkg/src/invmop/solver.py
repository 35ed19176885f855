"""Inverse solver: find objective vectors whose KKT conditions hold on the data.

The coefficient vector minimizing ``||L c||`` on the unit sphere is the right
singular vector of the smallest singular value; every unit vector in the span
of the right singular vectors with ``s_i <= s_bar`` has ``||L c|| <= s_bar``,
and so does every data point's KKT residual.
"""
from __future__ import annotations

import csv
import json
import logging
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .basis import MonomialBasis, generate_monomial_basis
from .kkt import DataSet, KktSystem, assemble_system
from .objective import PolynomialObjective, degeneracy_flags

log = logging.getLogger(__name__)

ZERO_ATOL = 1e-12
ZERO_RTOL = 1e-10
DEGENERACY_TOL = 1e-8


class SolverError(RuntimeError):
    pass


class NoSolutionError(SolverError):
    """No singular value lies below the requested threshold."""


class OverfittingError(ValueError):
    pass


@dataclass(frozen=True)
class SvdSpectrum:
    singular_values: np.ndarray  # ascending, length k*d
    right_vectors: np.ndarray  # (k*d, k*d), column i belongs to singular_values[i]
    rank_rows: int  # number of singular values actually computed (min(rows, cols))

    def __len__(self):
        return self.singular_values.shape[0]

    @property
    def s_max(self) -> float:
        return float(self.singular_values[-1])

    def v(self, i: int) -> np.ndarray:
        return self.right_vectors[:, i]

    def zero_mask(self, atol=ZERO_ATOL, rtol=ZERO_RTOL) -> np.ndarray:
        return self.singular_values <= max(atol, rtol * self.s_max)

    def numerical_nullity(self, atol=ZERO_ATOL, rtol=ZERO_RTOL) -> int:
        return int(self.zero_mask(atol, rtol).sum())


def svd_spectrum(system: KktSystem | np.ndarray) -> SvdSpectrum:
    """Ascending singular values and right singular vectors.

    For an underdetermined system the missing singular values are reported as
    zeros, with right singular vectors spanning the complement of the row space.
    """
    M = system.matrix if isinstance(system, KktSystem) else np.asarray(system, dtype=float)
    rows, cols = M.shape
    try:
        # full V is needed only when rows < cols; U is never used
        _, s, Vt = np.linalg.svd(M, full_matrices=rows < cols)
    except np.linalg.LinAlgError as exc:
        raise SolverError(f"SVD did not converge for a {rows}x{cols} matrix: {exc}") from exc
    s_full = np.zeros(cols)
    s_full[: s.size] = s
    order = slice(None, None, -1)
    return SvdSpectrum(
        singular_values=s_full[order].copy(),
        right_vectors=Vt[order].T.copy(),
        rank_rows=s.size,
    )


def select_indices(spectrum: SvdSpectrum, threshold: float) -> np.ndarray:
    """Longest prefix of the ascending spectrum with ``s_i <= threshold`` (0-based)."""
    if threshold < 0:
        raise ValueError("threshold must be non-negative")
    s = spectrum.singular_values
    above = np.nonzero(s > threshold)[0]
    stop = above[0] if above.size else s.size
    return np.arange(stop)


def gap_threshold(spectrum: SvdSpectrum, atol: float = ZERO_ATOL) -> float:
    """Threshold at the largest ratio s_{i+1} / max(s_i, atol)."""
    s = spectrum.singular_values
    if s.size == 1:
        return float(s[0])
    ratios = s[1:] / np.maximum(s[:-1], atol)
    return float(s[int(np.argmax(ratios))])


def compose_coefficient(spectrum: SvdSpectrum, indices, weights=None, *,
                        normalize: bool = True, atol=ZERO_ATOL, rtol=ZERO_RTOL) -> np.ndarray:
    """c = sum_i weights_i v_i over the selected indices, unit norm by default.

    Skipping normalization is allowed only when every selected singular value
    is numerically zero, since otherwise the residual bound no longer holds.
    """
    indices = np.asarray(indices, dtype=int)
    if indices.size == 0:
        raise ValueError("empty index set")
    lam = np.zeros(indices.size) if weights is None else np.asarray(weights, dtype=float)
    if weights is None:
        lam[0] = 1.0
    if lam.shape != (indices.size,):
        raise ValueError(f"expected {indices.size} weights, got {lam.shape}")
    if not np.any(lam):
        raise ValueError("weights must not all be zero")
    c = spectrum.right_vectors[:, indices] @ lam
    if normalize:
        return c / np.linalg.norm(c)
    if not np.all(spectrum.zero_mask(atol, rtol)[indices]):
        raise ValueError("unnormalized coefficients need all selected singular values to be zero")
    return c


def reconstruct_objective(c, basis: MonomialBasis, k: int) -> PolynomialObjective:
    c = np.asarray(c, dtype=float).reshape(-1)
    if c.size != k * basis.d:
        raise ValueError(f"coefficient vector has length {c.size}, expected {k * basis.d}")
    return PolynomialObjective(basis, c.reshape(k, basis.d))


def overfitting_message(n: int, N: int, k: int, d: int) -> str | None:
    """Diagnostic if n*N < k*d, i.e. an exact fit exists for any data."""
    if n * N >= k * d:
        return None
    return (f"basis too large for the data: n*N = {n}*{N} = {n * N} < k*d = {k}*{d} = {k * d}; "
            f"need d <= {n * N // k}")


@dataclass
class InverseSolution:
    basis: MonomialBasis
    k: int
    spectrum: SvdSpectrum
    threshold: float
    selected: np.ndarray
    coefficient: np.ndarray
    objective: PolynomialObjective
    degenerate: np.ndarray  # per variable
    notes: list[str] = field(default_factory=list)

    @property
    def n(self):
        return self.basis.n

    @property
    def s_star(self) -> float:
        """Largest selected singular value; bounds every data point's KKT residual."""
        return float(self.spectrum.singular_values[self.selected[-1]])

    def to_json(self) -> dict:
        return {
            "n": self.n,
            "k": self.k,
            "max_degree": self.basis.max_degree,
            "singular_values": [float(s) for s in self.spectrum.singular_values],
            "selected": [int(i) for i in self.selected],
            "coefficients": [float(c) for c in self.coefficient],
            "threshold": float(self.threshold),
            "degenerate_variables": [int(i) for i in np.nonzero(self.degenerate)[0]],
        }


def first_nondegenerate(spectrum: SvdSpectrum, basis: MonomialBasis, k: int,
                        tol: float = DEGENERACY_TOL) -> tuple[int, list[str]]:
    """Index of the first v_j whose objective vector depends on every variable."""
    notes = []
    for j in range(len(spectrum)):
        flags = degeneracy_flags(reconstruct_objective(spectrum.v(j), basis, k), tol)
        if not flags.any():
            return j, notes
        notes.append(f"v{j + 1} skipped: no dependence on "
                     + ", ".join(f"x{i + 1}" for i in np.nonzero(flags)[0]))
    raise NoSolutionError("every singular vector yields a degenerate objective vector")


def align_weights(spectrum: SvdSpectrum, indices, target) -> np.ndarray:
    """Weights of the orthogonal projection of ``target`` onto span{v_i : i in indices}."""
    V = spectrum.right_vectors[:, np.asarray(indices, dtype=int)]
    t = np.asarray(target, dtype=float).reshape(-1)
    if t.size != V.shape[0]:
        raise ValueError(f"target has length {t.size}, expected {V.shape[0]}")
    return V.T @ t


def solve_inverse(data: DataSet, basis: MonomialBasis, threshold: float | None = None,
                  weights=None, *, align_to=None, skip_degenerate: bool = False, normalize: bool = True,
                  guard_overfitting: bool = False, degeneracy_tol: float = DEGENERACY_TOL,
                  atol: float = ZERO_ATOL, rtol: float = ZERO_RTOL) -> InverseSolution:
    """Assemble, decompose, select and reconstruct.

    ``threshold=None`` picks the largest spectral gap.  The coefficient vector
    is ``sum_i weights_i v_i`` over the selected indices; ``align_to`` instead
    takes the projection of a given coefficient vector onto their span.
    Without either it is v_1.

    ``skip_degenerate`` moves the default choice to the first v_j whose
    objective vector depends on every variable.  The gap search then starts at
    j, so the degenerate directions below it stay in the index set, and an
    explicit threshold below s_j is raised to s_j.
    """
    if weights is not None and align_to is not None:
        raise ValueError("give weights or align_to, not both")
    msg = overfitting_message(data.n, data.N, data.k, basis.d)
    if msg:
        if guard_overfitting:
            raise OverfittingError(msg)
        log.info(msg)
    spectrum = svd_spectrum(assemble_system(data, basis))
    s = spectrum.singular_values
    notes = []
    j0 = 0
    if skip_degenerate:
        j0, notes = first_nondegenerate(spectrum, basis, data.k, degeneracy_tol)
    if threshold is None:
        tail = SvdSpectrum(s[j0:], spectrum.right_vectors[:, j0:], spectrum.rank_rows)
        s_bar = gap_threshold(tail, atol)
    else:
        s_bar = float(threshold)
    I = select_indices(spectrum, s_bar)
    if I.size == 0:
        raise NoSolutionError(f"no singular value <= {s_bar:g} (smallest is {s[0]:g})")
    if j0 > I[-1]:
        s_bar = float(s[j0])
        I = select_indices(spectrum, s_bar)
        notes.append(f"threshold raised to s{j0 + 1} = {s_bar:.6g} to reach a non-degenerate candidate")

    if align_to is not None:
        weights = align_weights(spectrum, I, align_to)
    elif weights is None:
        weights = np.zeros(I.size)
        weights[j0] = 1.0
    c = compose_coefficient(spectrum, I, weights, normalize=normalize, atol=atol, rtol=rtol)
    f = reconstruct_objective(c, basis, data.k)
    return InverseSolution(basis=basis, k=data.k, spectrum=spectrum, threshold=s_bar,
                           selected=I, coefficient=c, objective=f,
                           degenerate=degeneracy_flags(f, degeneracy_tol), notes=notes)


def degree_sweep(data: DataSet, degrees) -> dict[int, float]:
    """Smallest singular value of the KKT system for each maximal degree."""
    degrees = list(degrees)
    if not degrees:
        raise ValueError("no degrees given")
    out = {}
    for deg in degrees:
        spectrum = svd_spectrum(assemble_system(data, generate_monomial_basis(data.n, int(deg))))
        out[int(deg)] = float(spectrum.singular_values[0])
    return out


def project_onto_span(c, spectrum: SvdSpectrum, indices) -> tuple[np.ndarray, float]:
    """Orthogonal projection of ``c`` onto span{v_i} and the residual norm."""
    V = spectrum.right_vectors[:, np.asarray(indices, dtype=int)]
    c = np.asarray(c, dtype=float)
    proj = V @ (V.T @ c)
    return proj, float(np.linalg.norm(c - proj))


# ---------------------------------------------------------------------------
# serialization

def save_solution(sol: InverseSolution, path) -> None:
    Path(path).write_text(json.dumps(sol.to_json(), indent=2) + "\n")


def save_spectrum_csv(spectrum: SvdSpectrum, path) -> None:
    with Path(path).open("w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(["# index", "singular_value"])
        for i, s in enumerate(spectrum.singular_values):
            w.writerow([i, repr(float(s))])


def load_model(path) -> tuple[PolynomialObjective, dict]:
    """Read a solution JSON back into a polynomial objective vector."""
    obj = json.loads(Path(path).read_text())
    basis = generate_monomial_basis(int(obj["n"]), int(obj["max_degree"]))
    return reconstruct_objective(obj["coefficients"], basis, int(obj["k"])), obj
