import json

import numpy as np
import pytest
from hypothesis import given, strategies as st
from hypothesis.extra.numpy import arrays

from invmop.basis import generate_monomial_basis
from invmop.generators import gen_circle
from invmop.kkt import (DataFormatError, DataPoint, DataSet, assemble_block, assemble_system,
                        load_dataset, save_dataset, sidecar_path)
from invmop.objective import PolynomialObjective
from invmop.solver import svd_spectrum

CIRCLE_C = np.array([-3, 0, 1, 0, 0, 0, 0, 0, 1, 0, 0, 1, -3, 0, 0, 0, 0, 1], dtype=float)


def random_data(rng, N, n, k):
    return DataSet(rng.uniform(-2, 2, size=(N, n)), rng.dirichlet(np.ones(k), size=N))


# --- DataPoint / DataSet admission ------------------------------------------

def test_simplex_slack_renormalizes():
    p = DataPoint([0.0, 0.0], [0.5 + 4e-10, 0.5 - 1e-13])
    assert p.alpha.sum() == pytest.approx(1.0, abs=1e-15)
    q = DataPoint([0.0], [1.0 + 1e-10, -1e-13])
    assert np.all(q.alpha >= 0)


@pytest.mark.parametrize("alpha", [[0.6, 0.6], [1.1, -0.1], [0.5, 0.5 + 1e-8], [np.nan, 1.0]])
def test_simplex_violation_rejected(alpha):
    with pytest.raises(DataFormatError):
        DataPoint([0.0, 0.0], alpha)


def test_dataset_is_immutable_and_consistent():
    D = DataSet([[1.0, 0.0]], [[1.0, 0.0]])
    assert (D.n, D.k, D.N) == (2, 2, 1)
    with pytest.raises(ValueError):
        D.X[0, 0] = 3.0
    with pytest.raises(DataFormatError):
        DataSet(np.zeros((0, 2)), np.zeros((0, 2)))
    with pytest.raises(DataFormatError):
        DataSet([[1.0, 0.0]], [[1.0, 0.0], [0.0, 1.0]])


# --- blocks -------------------------------------------------------------------

def test_single_objective_block_is_gradient_matrix():
    b = generate_monomial_basis(2, 3)
    x = np.array([0.3, -1.2])
    assert np.array_equal(assemble_block(DataPoint(x, [1.0]), b), b.gradients(x))


def test_vertex_alpha_zeroes_first_block():
    b = generate_monomial_basis(2, 3)
    x = np.array([0.3, -1.2])
    L = assemble_block(DataPoint(x, [0.0, 1.0]), b)
    assert L.shape == (2, 2 * b.d)
    assert np.all(L[:, :b.d] == 0)
    assert np.array_equal(L[:, b.d:], b.gradients(x))


def test_known_circle_coefficients_annihilate_block():
    b = generate_monomial_basis(2, 3)
    L = assemble_block(DataPoint([1.0, 0.0], [1.0, 0.0]), b)
    assert np.allclose(L @ CIRCLE_C, 0.0, atol=1e-12)


def test_block_dimension_mismatch():
    with pytest.raises(ValueError):
        assemble_block(DataPoint([1.0, 0.0, 2.0], [1.0, 0.0]), generate_monomial_basis(2, 2))
    with pytest.raises(ValueError):
        assemble_system(DataSet([[1.0]], [[1.0, 0.0]]), generate_monomial_basis(2, 2))


# --- stacked system -------------------------------------------------------------

def test_circle_system_shape():
    S = assemble_system(gen_circle(1000), generate_monomial_basis(2, 3))
    assert S.matrix.shape == (2000, 18)


def test_single_point_system_shape():
    S = assemble_system(DataSet([[0.1, 0.2]], [[0.3, 0.7]]), generate_monomial_basis(2, 2))
    assert S.matrix.shape == (2, 10)


def test_system_blocks_match_assemble_block(rng):
    D = random_data(rng, 6, 3, 3)
    b = generate_monomial_basis(3, 2)
    S = assemble_system(D, b)
    for j, p in enumerate(D):
        assert np.array_equal(S.block(j), assemble_block(p, b))


@pytest.mark.parametrize("n,k,l", [(1, 2, 4), (2, 2, 3), (2, 3, 2), (3, 2, 3)])
def test_system_times_c_equals_jacobian_oracle(n, k, l, rng):
    D = random_data(rng, 8, n, k)
    b = generate_monomial_basis(n, l)
    S = assemble_system(D, b)
    for _ in range(10):
        c = rng.normal(size=k * b.d)
        f = PolynomialObjective(b, c.reshape(k, b.d))
        expected = np.concatenate([f.jacobian(x).T @ a for x, a in zip(D.X, D.alpha)])
        assert np.allclose(S.matrix @ c, expected, rtol=0, atol=1e-12 * max(1.0, np.abs(expected).max()))


@given(seed=st.integers(0, 2**32 - 1), N=st.integers(1, 12), n=st.integers(1, 3), k=st.integers(1, 3))
def test_permuting_points_permutes_blocks_and_keeps_spectrum(seed, N, n, k):
    rng = np.random.default_rng(seed)
    D = random_data(rng, N, n, k)
    b = generate_monomial_basis(n, 2)
    perm = rng.permutation(N)
    S, P = assemble_system(D, b), assemble_system(D.subset(perm), b)
    for new, old in enumerate(perm):
        assert np.array_equal(P.block(new), S.block(old))
    s1, s2 = svd_spectrum(S).singular_values, svd_spectrum(P).singular_values
    assert np.allclose(s1, s2, atol=1e-10 * max(1.0, s1[-1]))


@given(seed=st.integers(0, 2**32 - 1))
def test_zero_alpha_component_gives_zero_columns(seed):
    rng = np.random.default_rng(seed)
    a = rng.dirichlet(np.ones(3))
    i = int(rng.integers(3))
    a[i] = 0.0
    a /= a.sum()
    b = generate_monomial_basis(2, 3)
    L = assemble_block(DataPoint(rng.normal(size=2), a), b)
    assert np.all(L[:, i * b.d:(i + 1) * b.d] == 0)


# --- CSV I/O ----------------------------------------------------------------------

@given(X=arrays(float, (5, 2), elements=st.floats(-1e6, 1e6, allow_subnormal=False)),
       raw=arrays(float, (5, 3), elements=st.floats(0.0, 1.0)))
def test_round_trip_bit_exact(tmp_path_factory, X, raw):
    raw = raw + 1e-3
    D = DataSet(X, raw / raw.sum(axis=1, keepdims=True))
    path = tmp_path_factory.mktemp("rt") / "d.csv"
    save_dataset(D, path)
    E = load_dataset(path)
    assert np.array_equal(E.X, D.X) and np.array_equal(E.alpha, D.alpha)


def test_csv_row_maps_to_point(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("# x1,x2,alpha1,alpha2\n1.0,0.0,1.0,0.0\n")
    D = load_dataset(p, n=2, k=2)
    assert np.array_equal(D.X, [[1.0, 0.0]]) and np.array_equal(D.alpha, [[1.0, 0.0]])


def test_simplex_violation_names_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1.0,0.0,1.0,0.0\n0.0,1.0,0.6,0.6\n")
    with pytest.raises(DataFormatError, match="row 2"):
        load_dataset(p, n=2, k=2)


def test_wrong_column_count_names_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1.0,0.0,1.0,0.0\n1.0,0.0,1.0\n")
    with pytest.raises(DataFormatError, match="row 2"):
        load_dataset(p, n=2, k=2)


def test_unparsable_value_names_row(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1.0,zero,1.0,0.0\n")
    with pytest.raises(DataFormatError, match="row 1"):
        load_dataset(p, n=2, k=2)


def test_dimensions_required(tmp_path):
    p = tmp_path / "d.csv"
    p.write_text("1.0,0.0,1.0,0.0\n")
    with pytest.raises(DataFormatError, match="unknown"):
        load_dataset(p)


def test_sidecar_supplies_dimensions(tmp_path):
    D = gen_circle(1000)
    p = tmp_path / "circle.csv"
    save_dataset(D, p, header=True)
    side = json.loads(sidecar_path(p).read_text())
    assert side["n"] == 2 and side["k"] == 2 and side["generator"] == "circle"
    E = load_dataset(p)
    assert E.N == 1000 and E == D
