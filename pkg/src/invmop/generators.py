"""Data sets with known ground truth.

Exact geometric data (circle, ellipse, three line segments), noisy data from
a sample average approximation of a stochastic location problem, and data
from weighted-sum scalarization, where the weight doubles as KKT vector.
"""
from __future__ import annotations

import logging
from dataclasses import dataclass

import numpy as np

from .kkt import DataSet
from .objective import ObjectiveVector, location_expectation, sample_average_location

log = logging.getLogger(__name__)


def _circle_alpha(N: int) -> tuple[np.ndarray, np.ndarray]:
    j = np.arange(1, N + 1)
    t = 2 * np.pi * j / N
    a1 = 0.5 * (np.cos(2 * t) + 1)
    return t, np.stack([a1, 1 - a1], axis=1)


def gen_circle(N: int) -> DataSet:
    if N < 1:
        raise ValueError("N must be >= 1")
    t, A = _circle_alpha(N)
    X = np.stack([np.cos(t), np.sin(t)], axis=1)
    return DataSet(X, A, meta={"generator": "circle", "N": N})


def gen_ellipse(a: float, b: float, N: int) -> DataSet:
    if a <= 0 or b <= 0:
        raise ValueError("semi-axes must be positive")
    if N < 1:
        raise ValueError("N must be >= 1")
    t, A = _circle_alpha(N)
    X = np.stack([a * np.cos(t), b * np.sin(t)], axis=1)
    return DataSet(X, A, meta={"generator": "ellipse", "a": a, "b": b, "N": N})


@dataclass(frozen=True)
class LineSegmentSpec:
    p: tuple[float, float]
    q: tuple[float, float]

    def __post_init__(self):
        if not np.any(self.q):
            raise ValueError("segment direction must be nonzero")

    @property
    def start(self) -> np.ndarray:
        return np.asarray(self.p, dtype=float)

    @property
    def end(self) -> np.ndarray:
        q = np.asarray(self.q, dtype=float)
        return self.start + 0.25 * q / np.linalg.norm(q)

    def sample(self, m: int) -> np.ndarray:
        s = np.linspace(0.0, 1.0, m)[:, None]
        return self.start + s * (self.end - self.start)


THREE_LINES = (
    LineSegmentSpec((0.15, -0.20), (0.47, 0.04)),
    LineSegmentSpec((0.47, -0.32), (0.40, 0.14)),
    LineSegmentSpec((0.37, 0.18), (0.38, 0.28)),
)


def gen_three_lines(per_segment: int) -> DataSet:
    """Equidistant points on three segments, alpha running linearly from (0,1) to (1,0)."""
    if per_segment < 2:
        raise ValueError("per_segment must be >= 2")
    s = np.linspace(0.0, 1.0, per_segment)
    A1 = np.stack([s, 1 - s], axis=1)
    X = np.vstack([seg.sample(per_segment) for seg in THREE_LINES])
    A = np.vstack([A1] * len(THREE_LINES))
    return DataSet(X, A, meta={"generator": "three-lines", "per_segment": per_segment})


# ---------------------------------------------------------------------------
# weighted-sum scalarization

@dataclass(frozen=True)
class DescentOptions:
    tol: float = 1e-8
    max_iter: int = 10_000
    c1: float = 1e-4
    shrink: float = 0.5
    max_halvings: int = 60
    max_step: float = 1.0


@dataclass(frozen=True)
class ScalarizationResult:
    x: np.ndarray
    converged: bool
    grad_norm: float
    iterations: int
    value: float


def weighted_sum_solve(f: ObjectiveVector, w, x0, opts: DescentOptions = DescentOptions(),
                       bounds=None) -> ScalarizationResult:
    """Gradient descent with Armijo backtracking on sum_i w_i f_i.

    Each line search starts from twice the previously accepted step, capped
    at ``opts.max_step``.  With ``bounds`` (shape (n, 2)) the run is abandoned as soon as an
    iterate leaves them, which cuts short descents that drift off to infinity.
    """
    w = np.asarray(w, dtype=float)
    x = np.array(x0, dtype=float)
    lo = hi = None
    if bounds is not None:
        lo, hi = np.asarray(bounds, dtype=float).T

    def phi(z):
        return float(w @ f.value(z))

    def grad(z):
        return f.jacobian(z).T @ w

    val, g = phi(x), grad(x)
    gnorm = float(np.linalg.norm(g))
    it = 0
    step = 1.0
    while gnorm > opts.tol and it < opts.max_iter:
        step = min(opts.max_step, 2.0 * step)
        for _ in range(opts.max_halvings):
            trial = x - step * g
            tval = phi(trial)
            if np.isfinite(tval) and tval <= val - opts.c1 * step * gnorm**2:
                break
            step *= opts.shrink
        else:
            break  # no sufficient decrease at machine-level step
        x, val = trial, tval
        g = grad(x)
        gnorm = float(np.linalg.norm(g))
        it += 1
        if not np.all(np.isfinite(x)):
            break
        if lo is not None and (np.any(x < lo) or np.any(x > hi)):
            break
    return ScalarizationResult(x=x, converged=gnorm <= opts.tol, grad_norm=gnorm,
                               iterations=it, value=val)


def weight_grid(count: int) -> np.ndarray:
    """(0, 1), (1/(count-1), 1 - 1/(count-1)), ..., (1, 0)."""
    if count < 2:
        raise ValueError("need at least two weights")
    t = np.arange(count) / (count - 1)
    return np.stack([t, 1 - t], axis=1)


def gen_scalarized_dataset(f: ObjectiveVector, weight_count: int, starts, opts: DescentOptions = DescentOptions(),
                           box=None, *, merge_tol: float = 1e-6) -> DataSet:
    """One data point per converged weighted-sum solve.

    Every weight is tried from every start, so different starts may land on
    different branches of the critical set; a minimizer within ``merge_tol``
    of one already kept for the same weight is a duplicate.  With ``box``
    given, minimizers outside it count as failures, and runs straying one box
    width beyond it are abandoned.  Weights without any converged run are
    excluded and listed in the metadata.
    """
    starts = np.atleast_2d(np.asarray(starts, dtype=float))
    W = weight_grid(weight_count)
    bounds = None
    if box is not None:
        # iterates may cross the box on the way in; abandon only far-off runs
        b = np.asarray(box, dtype=float)
        width = b[:, 1] - b[:, 0]
        bounds = np.stack([b[:, 0] - width, b[:, 1] + width], axis=1)
    X, A, dropped = [], [], []
    for i, w in enumerate(W):
        found = []
        for x0 in starts:
            r = weighted_sum_solve(f, w, x0, opts, bounds)
            if not r.converged or (box is not None and not _in_box(r.x, box)):
                continue
            if all(np.linalg.norm(r.x - y) > merge_tol for y in found):
                found.append(r.x)
        if not found:
            dropped.append(i)
        X.extend(found)
        A.extend([w] * len(found))
    if not X:
        raise ValueError("no scalarized problem converged")
    if dropped:
        log.info("excluded %d of %d weights without convergence: %s", len(dropped), len(W), dropped)
    return DataSet(X, A, meta={"generator": "scalarize", "weight_count": weight_count,
                               "starts": starts.tolist(), "excluded_weights": dropped})


def _in_box(x, box) -> bool:
    lo, hi = np.asarray(box, dtype=float).T
    return bool(np.all(x >= lo - 1e-12) and np.all(x <= hi + 1e-12))


@dataclass(frozen=True)
class SaaConfig:
    sample_count: int | None = 50  # None uses the exact expectation
    scalarization_count: int = 1000
    seed: int = 0
    tol: float = 1e-10
    max_iter: int = 10_000

    def __post_init__(self):
        if self.sample_count is not None and self.sample_count < 1:
            raise ValueError("sample_count must be >= 1")
        if self.scalarization_count < 2:
            raise ValueError("scalarization_count must be >= 2")


def draw_location_samples(rng: np.random.Generator, count: int) -> np.ndarray:
    xi = np.zeros((count, 2))
    xi[:, 0] = rng.uniform(0.0, 2.0, size=count)
    return xi


def location_alpha(X) -> np.ndarray:
    """alpha = (-x2, 1 + x2), clipped to [0, 1] and renormalized."""
    X = np.atleast_2d(X)
    A = np.clip(np.stack([-X[:, 1], 1 + X[:, 1]], axis=1), 0.0, 1.0)
    return A / A.sum(axis=1, keepdims=True)


def gen_saa_location(config: SaaConfig = SaaConfig(), samples=None) -> DataSet:
    """Noisy Pareto points of the stochastic location problem.

    Every scalarization gets its own sample set drawn from an independent
    child stream of ``config.seed``, so parallel and serial generation agree.
    ``samples`` (shape (N_s, 2)) overrides the random draw for all weights.
    """
    W = weight_grid(config.scalarization_count)
    opts = DescentOptions(tol=config.tol, max_iter=config.max_iter)
    streams = np.random.SeedSequence(config.seed).spawn(len(W))
    X, dropped = [], 0
    for w, ss in zip(W, streams):
        if config.sample_count is None and samples is None:
            f = location_expectation()
        else:
            xi = samples if samples is not None else draw_location_samples(np.random.default_rng(ss), config.sample_count)
            f = sample_average_location(xi)
        r = weighted_sum_solve(f, w, np.zeros(2), opts)
        if not r.converged:
            dropped += 1
            continue
        X.append(r.x)
    if dropped:
        log.info("dropped %d non-converged scalarizations", dropped)
    X = np.array(X)
    return DataSet(X, location_alpha(X), meta={
        "generator": "saa-location", "sample_count": config.sample_count,
        "scalarization_count": config.scalarization_count, "seed": config.seed, "dropped": dropped})
