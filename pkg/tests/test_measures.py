import math

import numpy as np
import pytest
from scipy.integrate import quad

from waistlab.errors import DomainError
from waistlab.measures import (BoundConstants, SubsphereQuery, cap_angle,
                               cap_bounds, chisq_cdf, gaussian_fact_check,
                               lip_bounds, sigma_exact, sigma_exact_array,
                               sigma_lip_lower, sigma_mc)


# ---------------------------------------------------------------------------
# sigma_exact against independent oracles
# ---------------------------------------------------------------------------


def test_band_on_two_sphere_anchor():
    # band of geodesic half-width theta around a great circle has area sin(theta)
    theta = math.pi / 6
    oracle = math.sin(theta)
    assert abs(sigma_exact(SubsphereQuery(2, 1, theta)) - oracle) < 1e-12
    assert abs(oracle - 0.5) < 1e-12


def test_uniform_beta_anchor():
    # (m=3, j=1): the squared perpendicular component is uniform on [0,1]
    theta = math.asin(0.5)
    assert abs(sigma_exact(SubsphereQuery(3, 1, theta)) - 0.25) < 1e-12


def test_full_sphere_at_right_angle():
    assert sigma_exact(SubsphereQuery(5, 4, math.pi / 2)) == pytest.approx(1.0, abs=1e-15)


def test_circle_arcs_anchor():
    # two arcs of half-width theta around antipodal points: measure 2*theta/pi
    theta = math.pi / 4
    assert abs(sigma_exact(SubsphereQuery(1, 0, theta)) - 2 * theta / math.pi) < 1e-12


def test_sigma_exact_quadrature_oracle():
    # independent oracle: integrate the Beta((m-j)/2,(j+1)/2) density
    for m, j, th in [(4, 2, 0.7), (9, 3, 0.4), (17, 0, 1.0)]:
        a, b = (m - j) / 2, (j + 1) / 2
        dens = lambda t: t ** (a - 1) * (1 - t) ** (b - 1) / (math.gamma(a) * math.gamma(b) / math.gamma(a + b))
        oracle, err = quad(dens, 0.0, math.sin(th) ** 2)
        assert abs(sigma_exact(SubsphereQuery(m, j, th)) - oracle) < 1e-10 + 10 * err


def test_sigma_exact_domain_errors():
    with pytest.raises(DomainError):
        SubsphereQuery(3, 3, 0.5)
    with pytest.raises(DomainError):
        SubsphereQuery(3, -1, 0.5)
    with pytest.raises(DomainError):
        SubsphereQuery(3, 1, 0.0)
    with pytest.raises(DomainError):
        SubsphereQuery(3, 1, math.pi / 2 + 1e-9)


def test_complement_identity_spot():
    for m, j, th in [(7, 3, 0.4), (60, 17, 1.1), (2, 0, 0.9)]:
        lhs = sigma_exact(SubsphereQuery(m, j, th)) + sigma_exact(
            SubsphereQuery(m, m - j - 1, math.pi / 2 - th))
        assert abs(lhs - 1.0) < 1e-12


def test_monotonicity_random_sweep(rng):
    for _ in range(500):
        m = int(rng.integers(2, 50))
        j = int(rng.integers(0, m))
        th = float(rng.uniform(0.05, math.pi / 2 - 0.05))
        v = sigma_exact(SubsphereQuery(m, j, th))
        assert sigma_exact(SubsphereQuery(m, j, min(th + 0.03, math.pi / 2))) >= v - 1e-14
        if j + 1 < m:
            assert sigma_exact(SubsphereQuery(m, j + 1, th)) >= v - 1e-14
        assert sigma_exact(SubsphereQuery(m + 1, j, th)) <= v + 1e-14


def test_strict_monotonicity_interior():
    v1 = sigma_exact(SubsphereQuery(6, 2, 0.5))
    v2 = sigma_exact(SubsphereQuery(6, 2, 0.6))
    v3 = sigma_exact(SubsphereQuery(6, 3, 0.5))
    assert v2 > v1 and v3 > v1


# ---------------------------------------------------------------------------
# sigma_mc
# ---------------------------------------------------------------------------


def test_sigma_mc_matches_exact():
    for i, (m, j, th) in enumerate([(2, 1, math.pi / 6), (1, 0, math.pi / 4), (8, 3, 0.6)]):
        q = SubsphereQuery(m, j, th)
        est, se = sigma_mc(q, 200_000, seed=i)
        assert abs(est - sigma_exact(q)) <= 4 * max(se, 1e-9)


def test_sigma_mc_deterministic():
    q = SubsphereQuery(5, 2, 0.8)
    assert sigma_mc(q, 50_000, seed=7) == sigma_mc(q, 50_000, seed=7)


def test_sigma_mc_rejects_zero_samples():
    with pytest.raises(DomainError):
        sigma_mc(SubsphereQuery(2, 1, 0.5), 0)


# ---------------------------------------------------------------------------
# sigma_lip_lower
# ---------------------------------------------------------------------------


def test_lip_lower_beta_square_anchor():
    # reduces to the Beta(2,1) CDF, which is x^2
    v = sigma_lip_lower(3, 2, math.pi / 6)
    assert abs(v - 0.25 ** 2) < 1e-12
    assert abs(v - 0.0625) < 1e-12


def test_lip_lower_right_angle():
    assert sigma_lip_lower(3, 2, math.pi / 2) == pytest.approx(1.0, abs=1e-15)


def test_lip_lower_below_subsphere_value(rng):
    for _ in range(300):
        n = int(rng.integers(2, 51))
        k = int(rng.integers(1, n))
        th = float(rng.uniform(0.05, math.pi / 2))
        assert sigma_lip_lower(n, k, th) <= sigma_exact(SubsphereQuery(n, k, th)) + 1e-13


def test_lip_lower_domain():
    with pytest.raises(DomainError):
        sigma_lip_lower(3, 3, 0.5)
    with pytest.raises(DomainError):
        sigma_lip_lower(3, 0, 0.5)


# ---------------------------------------------------------------------------
# cap_bounds
# ---------------------------------------------------------------------------


def test_cap_bounds_arithmetic_example():
    b = cap_bounds(8, 2, 0.25, BoundConstants(c_small=0.1, C_big=2.0))
    assert b.lower == pytest.approx((0.1 * 0.25) ** 4, rel=1e-12)
    assert b.lower == pytest.approx(3.90625e-7, rel=1e-9)
    assert b.upper == pytest.approx(0.5, rel=1e-12)
    assert b.lower_compl == pytest.approx(0.5, rel=1e-12)
    assert b.upper_compl == pytest.approx(1 - (0.1 * 0.25) ** 2, rel=1e-12)


def test_cap_bounds_sandwich_worked_case():
    # exact beta evaluation pins admissible constants at this grid point
    n, k, eps = 8, 2, 0.25
    target = sigma_exact(SubsphereQuery(n - 1, n - k - 1, cap_angle(n, k, eps)))
    b = cap_bounds(n, k, eps, BoundConstants(c_small=0.01, C_big=30.0))
    assert b.lower <= target <= b.upper


def test_cap_bounds_complement_sums():
    b = cap_bounds(10, 3, 0.2)
    assert b.lower_compl == pytest.approx(1.0 - b.upper, abs=1e-15)


def test_cap_bounds_clamped():
    b = cap_bounds(4, 2, 0.49, BoundConstants(c_small=0.2, C_big=1000.0))
    assert b.upper == 1.0 and 0.0 <= b.lower <= 1.0


def test_cap_bounds_domain():
    with pytest.raises(DomainError):
        cap_bounds(8, 1, 0.25)
    with pytest.raises(DomainError):
        cap_bounds(8, 9, 0.25)
    with pytest.raises(DomainError):
        cap_bounds(8, 2, 0.5)


# ---------------------------------------------------------------------------
# lip_bounds
# ---------------------------------------------------------------------------


def test_lip_bounds_arithmetic_example():
    b = lip_bounds(16, 4, 0.1, BoundConstants(c_small=0.05, C_big=10.0))
    assert b.bound_i == pytest.approx(0.005 ** 32, rel=1e-12)
    assert b.bound_ii == 0.0  # C*eps = 1 clamps part (ii) to zero


def test_lip_bounds_clamp_rule():
    b = lip_bounds(16, 4, 0.3, BoundConstants(c_small=0.05, C_big=10.0))
    assert b.bound_ii == 0.0


def test_lip_bound_i_below_relaxed_measure():
    n, k, eps = 16, 4, 0.1
    rhs = sigma_lip_lower(n - 1, n - k - 1, cap_angle(n, k, eps))
    b = lip_bounds(n, k, eps, BoundConstants(c_small=0.01, C_big=2.0))
    assert b.bound_i <= rhs


# ---------------------------------------------------------------------------
# chisq_cdf and gaussian facts
# ---------------------------------------------------------------------------


def test_chisq_exponential_anchor():
    # two degrees of freedom give the exponential law
    assert abs(chisq_cdf(2, 2.0) - (1.0 - math.exp(-1.0))) < 1e-12


def test_chisq_one_dof_erf_anchor():
    assert abs(chisq_cdf(1, 1.0) - math.erf(1.0 / math.sqrt(2.0))) < 1e-12
    assert abs(chisq_cdf(1, 1.0) - 0.6826894921370859) < 1e-12


def test_chisq_zero_and_limits():
    assert chisq_cdf(5, 0.0) == 0.0
    assert chisq_cdf(5, 1e6) == pytest.approx(1.0, abs=1e-12)
    xs = np.linspace(0.1, 20.0, 40)
    vals = [chisq_cdf(4, float(x)) for x in xs]
    assert all(b > a for a, b in zip(vals, vals[1:]))


def test_chisq_quadrature_oracle():
    for k, x in [(3, 0.12), (7, 5.0)]:
        dens = lambda t: t ** (k / 2 - 1) * math.exp(-t / 2) / (2 ** (k / 2) * math.gamma(k / 2))
        oracle, err = quad(dens, 0.0, x)
        assert abs(chisq_cdf(k, x) - oracle) < 1e-10 + 10 * err


def test_chisq_domain():
    with pytest.raises(DomainError):
        chisq_cdf(2, -0.1)
    with pytest.raises(DomainError):
        chisq_cdf(0, 1.0)


def test_gaussian_fact_worked_cases():
    rep = gaussian_fact_check(1, 2.0, 0.2, BoundConstants(c_small=0.3, C_big=2.0))
    # oracle: P{chi^2_1 > 4} = 1 - erf(sqrt(2))
    assert rep.tail_prob == pytest.approx(1.0 - math.erf(math.sqrt(2.0)), abs=1e-12)
    assert rep.tail_ok
    rep = gaussian_fact_check(3, 2.0, 0.2, BoundConstants(c_small=0.1, C_big=2.0))
    assert rep.smallball_lower == pytest.approx(0.02 ** 3, rel=1e-12)
    assert rep.smallball_upper == pytest.approx(0.4 ** 3, rel=1e-12)
    assert rep.smallball_ok


def test_gaussian_fact_smallball_vanishes():
    probs = [gaussian_fact_check(4, 2.0, e).smallball_prob for e in (1e-2, 1e-4, 1e-6)]
    assert probs[0] > probs[1] > probs[2]
    assert probs[2] < 1e-20


def test_gaussian_fact_domain():
    with pytest.raises(DomainError):
        gaussian_fact_check(3, 1.5, 0.2)
    with pytest.raises(DomainError):
        gaussian_fact_check(3, 2.0, 0.0)


# ---------------------------------------------------------------------------
# constants container
# ---------------------------------------------------------------------------


def test_bound_constants_validation():
    with pytest.raises(DomainError):
        BoundConstants(c_small=0.0)
    with pytest.raises(DomainError):
        BoundConstants(a_frac=1.0)
    assert BoundConstants(a_frac=0.02).a_in_strict_regime
    assert not BoundConstants(a_frac=0.25).a_in_strict_regime


def test_sigma_exact_array_matches_scalar():
    ms = np.array([3, 8, 15])
    js = np.array([1, 2, 6])
    x = np.array([0.2, 0.3, 0.5])
    vec = sigma_exact_array(ms, js, x)
    for i in range(3):
        q = SubsphereQuery(int(ms[i]), int(js[i]), math.asin(math.sqrt(x[i])))
        assert vec[i] == pytest.approx(sigma_exact(q), abs=1e-14)
