import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gamma2.double_forms import DegreeError, norm_sq
from gamma2.invariants import (
    einstein_tensor,
    elementary_symmetric,
    gauss_bonnet,
    h4_direct,
    rel_err,
    ricci,
    scalar,
    schouten,
    sigma_k,
    weyl_norm_sq,
)
from gamma2.model_spaces import (
    Factor,
    ProductSpec,
    canonical_variation,
    einstein_fiber_sigma2,
    expected_small_r_signs,
    flat,
    leading_coefficient,
    product,
    product_sign_table,
    sigma2_scaled,
    sign_portfolio,
    space_form,
    sphere,
    submersion_sigma2_predicate,
)


def test_sphere_four():
    R = sphere(4, 1.0)
    assert scalar(R) == pytest.approx(12.0)
    assert sigma_k(schouten(R), 2) == pytest.approx(1.5)
    assert h4_direct(R) == pytest.approx(6.0)


@pytest.mark.parametrize("p, r", [(2, 1.0), (3, 0.5), (6, 2.0)])
def test_sphere_scaling(p, r):
    assert scalar(sphere(p, r)) == pytest.approx(p * (p - 1) / r ** 2)


def test_two_sphere_gauss_curvature():
    assert sphere(2).sectional([1.0, 0.0], [0.0, 1.0]) == pytest.approx(1.0)


def test_space_forms():
    assert scalar(space_form(5, -1.0)) == pytest.approx(-20.0)
    assert np.array_equal(space_form(4, 0.0).coeffs, np.zeros((6, 6)))
    assert np.allclose(ricci(space_form(3, -1.0)), -2 * np.eye(3))
    with pytest.raises(DegreeError):
        space_form(1, 1.0)


def test_product_block_structure():
    R = product(sphere(3), space_form(2, -2.0))
    t = R.tensor()
    assert np.all(t[:3, :3, 3:, 3:] == 0) and np.all(t[:3, 3:, :3, 3:] == 0)
    assert scalar(R) == pytest.approx(6.0 - 4.0)
    ric = ricci(R)
    assert np.allclose(ric, np.diag([2.0, 2.0, 2.0, -2.0, -2.0]))
    assert np.array_equal(product(flat(2), flat(3)).coeffs, flat(5).coeffs)


@given(st.integers(2, 5), st.integers(2, 5), st.floats(0.2, 3.0), st.floats(-2.0, 2.0))
def test_product_sigma2_matches_spectrum(p, q, r, kappa):
    R = product(sphere(p, r), space_form(q, kappa))
    lam = np.linalg.eigvalsh(schouten(R))
    assert sigma_k(schouten(R), 2, "double_form") == pytest.approx(
        elementary_symmetric(lam)[2], abs=1e-10 * (1 + elementary_symmetric(np.abs(lam))[2]))


def test_surgery_product_sigma2_formula():
    for n in range(5, 10):
        for c in range(3, n + 1):
            R = product(sphere(c - 1), n - c + 1)
            closed = (c - 2) ** 2 * (c - 1) * (n * (c - 5) + 4) / (8 * (n - 2) ** 2 * (n - 1))
            assert sigma_k(schouten(R), 2) == pytest.approx(closed, abs=1e-13)


@pytest.mark.parametrize("n", [2, 3])
def test_sphere_times_hyperbolic(n):
    R = product(sphere(n + 2), space_form(n, -1.0))
    assert scalar(R) > 0
    assert np.linalg.eigvalsh(einstein_tensor(R))[0] > 0
    assert weyl_norm_sq(R) < 1e-20


# ---------------------------------------------------------------------------
# canonical variation

def test_canonical_variation_scaling_law():
    t = 0.3
    R = canonical_variation(ProductSpec(Factor(3, "sphere", 1.0), Factor(2, "sphere", 1.0), t))
    assert np.allclose(R.coeffs, product(sphere(3, t), sphere(2)).coeffs)
    plain = canonical_variation(ProductSpec(Factor(3), Factor(4)))
    assert np.allclose(plain.coeffs, product(sphere(3), sphere(4)).coeffs)


def test_canonical_variation_over_flat_torus():
    R = canonical_variation(ProductSpec(Factor(4), Factor(5, "flat", 0.0), 0.1))
    assert sigma_k(schouten(R), 2) > 0 and scalar(R) > 0


def test_factor_kinds():
    assert Factor(4, "einstein", 12.0).curvature == pytest.approx(1.0)
    assert Factor(3, "space_form", -1.0).scal == pytest.approx(-6.0)
    with pytest.raises(ValueError):
        Factor(1, "sphere", 1.0)
    with pytest.raises(ValueError):
        ProductSpec(Factor(2), Factor(2), t=0.0)


# ---------------------------------------------------------------------------
# closed-form predicates

def test_einstein_fiber_sigma2():
    assert einstein_fiber_sigma2(4, 12.0) == pytest.approx(1.5)
    assert einstein_fiber_sigma2(5, 0.0) == 0.0
    assert einstein_fiber_sigma2(3, -6.0) == pytest.approx(0.75)
    assert einstein_fiber_sigma2(3, -6.0) == pytest.approx(sigma_k(schouten(space_form(3, -1.0)), 2))


def test_leading_coefficient_values():
    s = 2.5
    assert leading_coefficient(9, 4, s) == pytest.approx(s ** 2 / 32)
    assert leading_coefficient(5, 3, s) == pytest.approx(-s ** 2 / 48)
    assert leading_coefficient(7, 3, 0.0) == 0.0


@pytest.mark.parametrize("n, p, base", [(9, 4, 5), (8, 3, 5), (7, 2, 5), (12, 8, 4), (6, 5, 1)])
def test_leading_coefficient_is_the_exact_limit(n, p, base):
    # over a flat base t^4 sigma_2 is exactly constant in t
    spec = ProductSpec(Factor(p), Factor(base, "flat", 0.0), 0.05)
    limit = 2 * (n - 2) ** 2 * sigma2_scaled(spec)
    assert limit == pytest.approx(leading_coefficient(n, p, spec.fiber.scal), rel=1e-12)


def test_uncorrected_coefficient_is_four_times_the_limit():
    n, p, s = 9, 4, 12.0
    uncorrected = s ** 2 * (n * (p - 4) + 4) / (p * (n - 1))
    spec = ProductSpec(Factor(p), Factor(n - p, "flat", 0.0), 0.1)
    limit = 2 * (n - 2) ** 2 * sigma2_scaled(spec)
    assert uncorrected == pytest.approx(4 * limit)


def test_residual_decays_like_t_squared():
    spec = ProductSpec(Factor(4), Factor(5))
    lead = leading_coefficient(9, 4, 12.0)
    res = [abs(2 * 49 * sigma2_scaled(ProductSpec(spec.fiber, spec.base, t)) - lead)
           for t in (1e-1, 1e-2, 1e-3)]
    assert 0.005 < res[1] / res[0] < 0.02
    assert 0.005 < res[2] / res[1] < 0.02


def test_predicate_examples():
    assert submersion_sigma2_predicate(9, 4, einstein_fiber_sigma2(4, 12.0), 12.0) == "positive"
    assert submersion_sigma2_predicate(6, 2, 0.5, 2.0) == "negative"
    assert submersion_sigma2_predicate(7, 3, einstein_fiber_sigma2(3, 6.0), 6.0) == "negative"
    assert submersion_sigma2_predicate(6, 2, 0.0, 0.0) == "indeterminate"


@given(st.integers(5, 12), st.integers(2, 11), st.floats(0.5, 50.0))
def test_predicate_agrees_with_leading_coefficient(n, p, s):
    if p >= n:
        return
    verdict = submersion_sigma2_predicate(n, p, einstein_fiber_sigma2(p, s), s)
    lead = leading_coefficient(n, p, s)
    assert verdict == ("positive" if lead > 0 else "negative" if lead < 0 else "indeterminate")


def test_predicate_domain():
    with pytest.raises(DegreeError):
        submersion_sigma2_predicate(4, 4, 1.0, 1.0)


# ---------------------------------------------------------------------------
# sign tables and portfolios

@pytest.mark.parametrize("p, q, base, expected", [
    (3, 4, "sphere", (1, -1)),
    (4, 4, "sphere", (1, 1)),
    (2, 1, "flat", (1, -1)),
    (2, 4, "sphere", (1, -1)),
    (5, 3, "flat", (1, 1)),
])
def test_sign_table_examples(p, q, base, expected):
    table = product_sign_table(p, q, [0.1], base=base, grid=20)
    assert table.rows[0].signs == expected == table.expected
    assert table.largest_r is not None and table.largest_r >= 0.1


def test_sign_table_no_prediction():
    table = product_sign_table(3, 1, [0.1], base="flat")
    assert table.expected is None and table.largest_r is None
    assert expected_small_r_signs(3, 1) is None


def test_sign_portfolio_of_small_three_sphere_product():
    sp = sign_portfolio(product(sphere(3, 0.1), sphere(4)))
    assert sp.sectional_min >= -1e-10
    assert sp.ricci_min > 0 and sp.einstein_min > 0 and sp.h4 > 0
    assert sp.sigma2 < 0


def test_sign_portfolio_sphere_and_flat():
    sp = sign_portfolio(sphere(5), samples=500)
    assert min(sp.sectional_min, sp.ricci_min, sp.einstein_min, sp.h4, sp.sigma2) > 0
    z = sign_portfolio(flat(5), samples=500)
    assert z.to_dict() == {"sectional_min": 0.0, "ricci_min": 0.0, "einstein_min": 0.0,
                           "h4": 0.0, "sigma2": 0.0}


def test_gauss_bonnet_of_product_matches_factor():
    assert gauss_bonnet(product(sphere(4), 2), 1) == pytest.approx(6.0)
    assert norm_sq(product(sphere(4), 2)) == pytest.approx(6.0)
    assert rel_err(gauss_bonnet(product(sphere(5), 3), 2), 30.0) < 1e-12
