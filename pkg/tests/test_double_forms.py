import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from conftest import brute_elementary, kn_tensor, random_sym
from gamma2.double_forms import (
    CurvatureStructure,
    DegreeError,
    DoubleForm,
    bianchi_project,
    contraction,
    exterior_product,
    g_power,
    hodge_star,
    inner_product,
    kulkarni_nomizu,
    metric,
    norm_sq,
    random_curvature,
    subsets,
    symmetry_residual,
)

seeds = st.integers(0, 2**32 - 1)


def random_form(rng, n, p, q):
    return DoubleForm(n, p, q, rng.standard_normal((math.comb(n, p), math.comb(n, q))))


# ---------------------------------------------------------------------------
# Kulkarni-Nomizu product

def test_g_times_g_is_two_on_diagonal_pairs():
    for n in (3, 5):
        gg = metric(n) * metric(n)
        assert np.array_equal(gg.coeffs, 2 * np.eye(len(subsets(n, 2))))


def test_half_g_squared_is_unit_sphere(rng):
    R = kulkarni_nomizu(np.eye(5), np.eye(5) / 2)
    x, y = rng.standard_normal((2, 200, 5))
    assert np.allclose(R.sectional(x, y), 1.0, atol=1e-12)


@given(seeds, st.integers(3, 7))
def test_kulkarni_nomizu_matches_four_term_formula(seed, n):
    rng = np.random.default_rng(seed)
    a, b = random_sym(rng, n), random_sym(rng, n)
    R = kulkarni_nomizu(a, b)
    assert np.allclose(R.tensor(), kn_tensor(a, b), atol=1e-12)
    assert symmetry_residual(R) < 1e-12


def test_kulkarni_nomizu_rejects_other_degrees():
    with pytest.raises(DegreeError):
        kulkarni_nomizu(g_power(4, 2), metric(4))


# ---------------------------------------------------------------------------
# exterior product

def test_scalar_one_is_identity(rng):
    w = random_form(rng, 5, 2, 3)
    assert np.array_equal((g_power(5, 0) * w).coeffs, w.coeffs)


def test_square_of_diagonal_form():
    lam = np.array([1.0, -2.0, 3.0, 0.5])
    A2 = DoubleForm.from_symmetric(np.diag(lam)) ** 2
    for a, (i, j) in enumerate(subsets(4, 2)):
        assert A2.coeffs[a, a] == pytest.approx(2 * lam[i] * lam[j])
    assert np.count_nonzero(A2.coeffs - np.diag(np.diag(A2.coeffs))) == 0


@given(seeds, st.integers(3, 6))
def test_associativity_with_metric(seed, n):
    A = DoubleForm.from_symmetric(random_sym(np.random.default_rng(seed), n))
    g = metric(n)
    lhs = (g * g) * A
    rhs = g * (g * A)
    assert np.abs(lhs.coeffs - rhs.coeffs).max() < 1e-12


@given(seeds, st.integers(4, 6), st.integers(0, 2), st.integers(0, 2),
       st.integers(0, 2), st.integers(0, 2))
def test_graded_commutativity(seed, n, p, q, r, s):
    rng = np.random.default_rng(seed)
    w, th = random_form(rng, n, p, q), random_form(rng, n, r, s)
    sign = (-1) ** (p * r + q * s)
    assert np.allclose((w * th).coeffs, sign * (th * w).coeffs, atol=1e-12)


@given(seeds, st.integers(4, 6))
def test_associativity_general(seed, n):
    rng = np.random.default_rng(seed)
    a, b, c = random_form(rng, n, 1, 2), random_form(rng, n, 2, 1), random_form(rng, n, 1, 1)
    assert np.allclose(((a * b) * c).coeffs, (a * (b * c)).coeffs, atol=1e-10)


def test_bilinearity(rng):
    a, b, c = (random_form(rng, 5, 1, 2) for _ in range(3))
    d = random_form(rng, 5, 2, 1)
    lhs = exterior_product(a * 2.0 + b - c, d)
    rhs = (a * d) * 2.0 + b * d - c * d
    assert np.allclose(lhs.coeffs, rhs.coeffs, atol=1e-12)


def test_batched_product_matches_loop(rng):
    a = rng.standard_normal((3, 4, 4))
    a = a + np.swapaxes(a, 1, 2)
    batch = DoubleForm.from_symmetric(a) ** 3
    for i in range(3):
        one = DoubleForm.from_symmetric(a[i]) ** 3
        assert np.allclose(batch.coeffs[i], one.coeffs)


def test_degree_overflow():
    with pytest.raises(DegreeError):
        g_power(3, 2) * g_power(3, 2)


def test_permutation_signs_on_evaluation():
    R = kulkarni_nomizu(np.eye(4), np.eye(4) / 2)
    assert R[(0, 1), (0, 1)] == 1.0
    assert R[(1, 0), (0, 1)] == -1.0
    assert R[(1, 0), (1, 0)] == 1.0
    assert R[(0, 0), (0, 1)] == 0.0


# ---------------------------------------------------------------------------
# contraction

def test_contraction_of_metric_is_dimension():
    assert contraction(metric(6)).value() == 6


def test_contraction_of_symmetric_form_is_trace(rng):
    a = random_sym(rng, 5)
    assert contraction(DoubleForm.from_symmetric(a)).value() == pytest.approx(np.trace(a))


def test_double_contraction_gives_e2():
    A = DoubleForm.from_symmetric(np.diag([1.0, 2.0, 3.0]))
    assert contraction(A ** 2, 2).value() / 4 == pytest.approx(11.0)


def test_contraction_of_g_squared():
    n = 5
    assert np.allclose(contraction(g_power(n, 2)).matrix() / 2, (n - 1) * np.eye(n))


@given(seeds, st.integers(3, 7))
def test_ricci_contraction_matches_index_sum(seed, n):
    R = random_curvature(n, np.random.default_rng(seed))
    assert np.allclose(contraction(R).matrix(), np.einsum("ijil->jl", R.tensor()), atol=1e-12)


@given(seeds, st.integers(4, 6))
def test_multiple_contraction_equals_iterated(seed, n):
    w = random_form(np.random.default_rng(seed), n, 3, 3)
    assert np.allclose(contraction(w, 2).coeffs, contraction(contraction(w)).coeffs, atol=1e-12)


def test_contraction_of_kn_product(rng):
    n = 6
    h = random_sym(rng, n)
    got = contraction(kulkarni_nomizu(np.eye(n), h)).matrix()
    assert np.allclose(got, (n - 2) * h + np.trace(h) * np.eye(n))


# ---------------------------------------------------------------------------
# Hodge star

def test_star_of_volume_form():
    for n in (3, 6):
        assert hodge_star(g_power(n, n) / math.factorial(n)).value() == pytest.approx(1.0)


def test_star_of_one_is_volume_form():
    top = hodge_star(DoubleForm.scalar(4, 1.0))
    assert top.bidegree == (4, 4)
    assert hodge_star(top).value() == 1.0


def test_star_route_to_e2():
    n = 3
    A = DoubleForm.from_symmetric(np.diag([1.0, 2.0, 3.0]))
    v = hodge_star(g_power(n, n - 2) * A ** 2).value() / (math.factorial(n - 2) * 2)
    assert v == pytest.approx(11.0)


@given(seeds, st.integers(2, 6), st.integers(0, 6), st.integers(0, 6))
def test_star_is_isometric_involution(seed, n, p, q):
    p, q = min(p, n), min(q, n)
    rng = np.random.default_rng(seed)
    w, th = random_form(rng, n, p, q), random_form(rng, n, p, q)
    sw = hodge_star(w)
    assert abs(inner_product(sw, hodge_star(th))) == pytest.approx(abs(inner_product(w, th)))
    sign = (-1) ** (p * (n - p) + q * (n - q))
    assert np.allclose(hodge_star(sw).coeffs, sign * w.coeffs)


@given(seeds, st.integers(2, 7))
def test_three_routes_to_elementary_symmetric(seed, n):
    rng = np.random.default_rng(seed)
    lam = rng.uniform(-1, 2, n)
    q, _ = np.linalg.qr(rng.standard_normal((n, n)))
    A = DoubleForm.from_symmetric(q @ np.diag(lam) @ q.T)
    for k in range(n + 1):
        oracle = brute_elementary(lam, k)
        via_c = contraction(A ** k, k).value() / math.factorial(k) ** 2
        via_star = hodge_star(g_power(n, n - k) * A ** k).value() / (
            math.factorial(n - k) * math.factorial(k))
        scale = brute_elementary(np.abs(lam), k)
        assert abs(via_c - oracle) <= 1e-9 * scale
        assert abs(via_star - oracle) <= 1e-9 * scale


# ---------------------------------------------------------------------------
# inner product and norms

def test_norm_conventions():
    n = 5
    assert inner_product(metric(n), metric(n)) == n
    assert norm_sq(g_power(n, 2)) == 2 * n * (n - 1)
    assert norm_sq(kulkarni_nomizu(np.eye(4), np.eye(4) / 2)) == pytest.approx(6.0)


def test_norm_is_quarter_of_full_sum(rng):
    R = random_curvature(5, rng)
    assert norm_sq(R) == pytest.approx(np.sum(R.tensor() ** 2) / 4)


def test_g_power_one_is_metric():
    assert np.array_equal(g_power(4, 1).coeffs, np.eye(4))


# ---------------------------------------------------------------------------
# curvature-structure projection

def projector_matrix(n):
    basis = np.eye(n ** 4).reshape(n ** 4, n, n, n, n)
    return bianchi_project(basis).tensor().reshape(n ** 4, n ** 4).T


@pytest.mark.parametrize("n, rank", [(3, 6), (4, 20)])
def test_projector_rank(n, rank):
    P = projector_matrix(n)
    assert np.linalg.matrix_rank(P, tol=1e-9) == rank == n ** 2 * (n ** 2 - 1) // 12
    assert np.allclose(P @ P, P, atol=1e-12)
    assert np.allclose(P, P.T, atol=1e-12)


def test_projector_fixes_curvature_structures(rng):
    R = random_curvature(5, rng)
    assert np.abs(bianchi_project(R.tensor()).coeffs - R.coeffs).max() < 1e-12
    a, b = random_sym(rng, 5), random_sym(rng, 5)
    K = kulkarni_nomizu(a, b)
    assert np.abs(bianchi_project(K.tensor()).coeffs - K.coeffs).max() < 1e-12


def test_projector_output_satisfies_symmetries(rng):
    R = random_curvature(6, rng, 5)
    assert np.all(symmetry_residual(R) < 1e-12)


def test_tensor_round_trip(rng):
    R = random_curvature(4, rng)
    assert np.array_equal(CurvatureStructure.from_tensor(R.tensor()).coeffs, R.coeffs)


def test_coefficients_are_read_only(rng):
    R = random_curvature(4, rng)
    with pytest.raises(ValueError):
        R.coeffs[0, 0] = 1.0


def test_dimension_cap():
    with pytest.raises(DegreeError):
        metric(13)
