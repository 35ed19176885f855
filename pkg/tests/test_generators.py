import numpy as np
import pytest

from invmop.basis import generate_monomial_basis
from invmop.generators import (THREE_LINES, DescentOptions, LineSegmentSpec, SaaConfig, gen_circle, gen_ellipse,
                               gen_saa_location, gen_scalarized_dataset, gen_three_lines, location_alpha,
                               weight_grid, weighted_sum_solve)
from invmop.kkt import DataSet, assemble_system
from invmop.objective import (LOCATION_A, AnalyticObjective, ellipse_objective, kkt_residual, lh22_objective,
                              location_expectation)

LH_BOX = np.array([[-0.75, 0.75], [-2.5, 0.12]])


def two_centers():
    e1 = np.array([1.0, 0.0])
    return AnalyticObjective("centers", 2, 2,
                             lambda X: np.stack([np.sum(X**2, 1), np.sum((X - e1) ** 2, 1)], 1),
                             lambda X: np.stack([2 * X, 2 * (X - e1)], 1))


def distance_to_segment(X, p, q):
    d = q - p
    t = np.clip((X - p) @ d / (d @ d), 0, 1)
    return np.linalg.norm(X - (p + t[:, None] * d), axis=1)


# --- geometric data --------------------------------------------------------------------------

def test_circle_four_points():
    D = gen_circle(4)
    assert np.allclose(D.X[3], [1, 0], atol=1e-15) and np.allclose(D.alpha[3], [1, 0], atol=1e-15)
    assert np.allclose(D.X[0], [0, 1], atol=1e-15) and np.allclose(D.alpha[0], [0, 1], atol=1e-15)


def test_circle_alpha_in_simplex():
    D = gen_circle(1000)
    assert D.N == 1000 and np.all(D.alpha >= 0) and np.allclose(D.alpha.sum(axis=1), 1.0, atol=1e-15)
    with pytest.raises(ValueError):
        gen_circle(0)


def test_unit_ellipse_is_circle():
    assert gen_ellipse(1.0, 1.0, 100) == gen_circle(100)
    with pytest.raises(ValueError):
        gen_ellipse(0.0, 1.0, 10)


def test_ellipse_points_critical_with_closed_form_alpha():
    a, b = 3.0, 0.5
    D = gen_ellipse(a, b, 500)
    f = ellipse_objective(a, b)
    for x in D.X:
        alpha = np.array([x[0] ** 2 / a**2, x[1] ** 2 / b**2])
        assert kkt_residual(f, x, alpha / alpha.sum()) <= 1e-10


def test_three_lines_endpoints():
    D = gen_three_lines(2)
    assert D.N == 6
    for i, seg in enumerate(THREE_LINES):
        assert np.allclose(D.X[2 * i], seg.start) and np.allclose(D.X[2 * i + 1], seg.end)
        assert np.array_equal(D.alpha[2 * i], [0, 1]) and np.array_equal(D.alpha[2 * i + 1], [1, 0])


def test_three_lines_geometry():
    D = gen_three_lines(500)
    assert D.N == 1500
    # C3 ends at y = 0.18 + 0.07 / hypot(0.38, 0.28) = 0.3283, above 0.3
    top = 0.18 + 0.25 * 0.28 / np.hypot(0.38, 0.28)
    assert D.X[:, 1].max() == pytest.approx(top, abs=1e-12)
    assert np.all((D.X[:, 0] >= 0.1) & (D.X[:, 0] <= 0.8) & (D.X[:, 1] >= -0.35) & (D.X[:, 1] <= 0.35))
    for i, seg in enumerate(THREE_LINES):
        P = D.X[500 * i:500 * (i + 1)]
        steps = np.linalg.norm(np.diff(P, axis=0), axis=1)
        assert np.allclose(steps, steps[0], atol=1e-12)
        assert np.linalg.norm(seg.end - seg.start) == pytest.approx(0.25, abs=1e-15)
    with pytest.raises(ValueError):
        gen_three_lines(1)
    with pytest.raises(ValueError):
        LineSegmentSpec((0, 0), (0, 0))


@pytest.mark.parametrize("D", [gen_circle(50), gen_ellipse(2, 1, 50), gen_three_lines(20)],
                         ids=["circle", "ellipse", "lines"])
def test_generator_output_assembles(D):
    assert isinstance(D, DataSet)
    S = assemble_system(D, generate_monomial_basis(2, 3))
    assert S.matrix.shape == (2 * D.N, 18)


# --- weighted sums ----------------------------------------------------------------------------

def test_average_of_two_centers():
    r = weighted_sum_solve(two_centers(), [0.5, 0.5], [3.0, -2.0])
    assert r.converged and np.allclose(r.x, [0.5, 0.0], atol=1e-8)


@pytest.mark.parametrize("t", [0.0, 0.2, 0.5, 0.9, 1.0])
def test_location_expectation_minimizer_on_segment(t):
    r = weighted_sum_solve(location_expectation(), [t, 1 - t], [0.0, 0.0])
    assert r.converged
    assert np.allclose(r.x, t * LOCATION_A + (1 - t) * np.array([1.0, 0.0]), atol=1e-8)
    assert kkt_residual(location_expectation(), r.x, [t, 1 - t]) <= DescentOptions().tol


def test_non_convergence_is_flagged():
    r = weighted_sum_solve(lh22_objective(), [0.5, 0.5], [0.6, -2.0], DescentOptions(max_iter=3))
    assert not r.converged and r.iterations == 3 and r.grad_norm > 1e-8


def test_bounds_abandon_divergent_runs():
    f = lh22_objective()  # unequal weights tilt the problem towards |x1| -> infinity
    r = weighted_sum_solve(f, [1.0, 0.0], [0.0, 0.0], bounds=[[-5, 5], [-5, 5]])
    assert not r.converged and r.iterations < 100 and np.abs(r.x).max() > 5


def test_weight_grid():
    W = weight_grid(26)
    assert W.shape == (26, 2)
    assert np.array_equal(W[0], [0, 1]) and np.array_equal(W[-1], [1, 0])
    assert np.allclose(W[1], [1 / 25, 24 / 25])
    with pytest.raises(ValueError):
        weight_grid(1)


@pytest.fixture(scope="module")
def lh_data():
    return gen_scalarized_dataset(lh22_objective(), 26, [[0.0, 0.0], [0.0, -2.0]],
                                  DescentOptions(max_step=10.0), box=LH_BOX)


def test_scalarized_points_inside_box_and_critical(lh_data):
    assert np.all((lh_data.X >= LH_BOX[:, 0]) & (lh_data.X <= LH_BOX[:, 1]))
    f = lh22_objective()
    for x, a in zip(lh_data.X, lh_data.alpha):
        assert kkt_residual(f, x, a) <= 1e-8
    assert set(lh_data.meta["excluded_weights"]).isdisjoint({int(round(a * 25)) for a in lh_data.alpha[:, 0]})


def test_scalarized_alpha_are_grid_weights(lh_data):
    W = weight_grid(26)
    for a in lh_data.alpha:
        assert np.min(np.abs(W - a).max(axis=1)) == 0.0


def test_scalarized_all_fail():
    with pytest.raises(ValueError, match="converged"):
        gen_scalarized_dataset(lh22_objective(), 3, [[0.0, 0.0]], DescentOptions(max_iter=1), box=LH_BOX)


def test_scalarized_merges_duplicate_minimizers():
    D = gen_scalarized_dataset(two_centers(), 5, [[0.0, 0.0], [0.1, 0.1], [-3.0, 2.0]])
    assert D.N == 5


# --- SAA --------------------------------------------------------------------------------------

def test_exact_expectation_points_on_segment():
    D = gen_saa_location(SaaConfig(sample_count=None, scalarization_count=51))
    assert distance_to_segment(D.X, LOCATION_A, np.array([1.0, 0.0])).max() <= 1e-8
    t = np.linspace(0, 1, 51)
    assert np.allclose(D.alpha, np.stack([t, 1 - t], 1), atol=1e-8)


def test_single_central_sample_equals_expectation():
    exact = gen_saa_location(SaaConfig(sample_count=None, scalarization_count=21))
    single = gen_saa_location(SaaConfig(sample_count=1, scalarization_count=21), samples=[[1.0, 0.0]])
    assert np.allclose(single.X, exact.X, atol=1e-9)


def test_noise_grows_towards_mean():
    D = gen_saa_location(SaaConfig(sample_count=50, scalarization_count=300, seed=0))
    d = distance_to_segment(D.X, LOCATION_A, np.array([1.0, 0.0]))
    near_a, near_mean = d[200:].mean(), d[:100].mean()  # weight on f1 grows with the index
    assert near_a < near_mean


def test_saa_deterministic_and_seed_dependent():
    cfg = SaaConfig(sample_count=50, scalarization_count=50, seed=7)
    assert gen_saa_location(cfg) == gen_saa_location(cfg)
    assert gen_saa_location(cfg) != gen_saa_location(SaaConfig(sample_count=50, scalarization_count=50, seed=8))


def test_saa_config_validation():
    with pytest.raises(ValueError):
        SaaConfig(sample_count=0)
    with pytest.raises(ValueError):
        SaaConfig(scalarization_count=1)


def test_location_alpha_clamps():
    A = location_alpha([[0.0, 0.1], [0.0, -0.25], [0.0, -1.2]])
    assert np.allclose(A, [[0, 1], [0.25, 0.75], [1, 0]])
