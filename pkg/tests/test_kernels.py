import cmath
import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellhyp.errors import DomainError, NearSingular, NonConvergent
from ellhyp.kernels import (
    BasePair,
    TruncationPolicy,
    dilog,
    elliptic_gamma,
    elliptic_pochhammer,
    gamma_shift_neg,
    gamma_shift_pos,
    log_abs_theta,
    qpoch,
    qpoch_inf,
    re_dilog_unit,
    theta,
    theta_quasi_period,
    theta_split,
)

from helpers import polar


def brute_qpoch(z, p, terms=200):
    out = 1.0 + 0j
    for k in range(terms):
        out *= 1 - z * p**k
    return out


def brute_theta(a, p, terms=200):
    return brute_qpoch(a, p, terms) * brute_qpoch(p / a, p, terms)


def brute_gamma(z, p, q, cutoff=1e-16):
    # double product truncated where |p^j q^k| drops below cutoff
    out = 1.0 + 0j
    j = 0
    while abs(p) ** j > cutoff:
        k = 0
        while abs(p) ** j * abs(q) ** k > cutoff:
            out *= (1 - p ** (j + 1) * q ** (k + 1) / z) / (1 - z * p**j * q**k)
            k += 1
        j += 1
    return out


nomes = st.builds(lambda r, a: r * cmath.exp(1j * a), st.floats(0.05, 0.6), st.floats(0, 2 * math.pi))
args = st.builds(lambda r, a: r * cmath.exp(1j * a), st.floats(0.2, 3.0), st.floats(0, 2 * math.pi))


def test_qpoch_inf_examples():
    assert qpoch_inf(0, 0.7) == 1
    assert abs(qpoch_inf(1, 0.5)) == 0
    assert qpoch_inf(0.3, 0.1) == pytest.approx(brute_qpoch(0.3, 0.1, 50), rel=1e-12)


def test_qpoch_inf_budget():
    with pytest.raises(NonConvergent):
        qpoch_inf(0.5, 0.999, TruncationPolicy(max_terms=10))


def test_qpoch_finite():
    assert qpoch(0.4, 0.3, 0) == 1
    assert qpoch(0.4, 0.3, 3) == pytest.approx((1 - 0.4) * (1 - 0.12) * (1 - 0.036), rel=1e-14)


def test_theta_examples():
    assert theta(0.5, 0) == pytest.approx(0.5)
    assert theta(0.2, 0.2) == 0
    assert theta(0.3, 0.15) == pytest.approx(brute_theta(0.3, 0.15), rel=1e-12)
    with pytest.raises(DomainError):
        theta(0, 0.3)
    with pytest.raises(DomainError):
        theta(0.5, 1.2)


def test_theta_vectorized_matches_scalar():
    a = np.array([0.3 + 0.1j, 2.0, -5.0 + 1j, 1e-3])
    vec = theta(a, 0.4 + 0.1j)
    assert vec.shape == a.shape
    for x, v in zip(a, vec):
        assert v == pytest.approx(theta(complex(x), 0.4 + 0.1j), rel=1e-13)


@settings(max_examples=60, deadline=None)
@given(args, nomes)
def test_theta_matches_brute_force(a, p):
    ref = brute_theta(a, p, 400)
    assert abs(theta(a, p) - ref) <= 1e-11 * max(1.0, abs(ref))


@settings(max_examples=60, deadline=None)
@given(args, nomes)
def test_theta_inversion(a, p):
    assert abs(theta(a, p) - theta(p / a, p)) <= 1e-10 * max(1.0, abs(theta(a, p)))


@settings(max_examples=40, deadline=None)
@given(args, nomes, st.integers(-6, 6))
def test_theta_quasi_period(t, p, j):
    lhs = theta(t * p**j, p)
    rhs = theta_quasi_period(t, p, j) * theta(t, p)
    assert abs(lhs - rhs) <= 1e-9 * abs(rhs)


def test_quasi_period_examples():
    assert theta_quasi_period(0.7, 0.3, 0) == 1
    assert theta_quasi_period(0.5, 0.3, 1) == pytest.approx(-2)
    with pytest.raises(DomainError):
        theta_quasi_period(0, 0.3, 1)


def test_theta_split_far_arguments():
    # theta(1e-18; 0.44) overflows as a plain product but its logarithm is finite
    mant, log_mod, _ = theta_split(1e-18, 0.44)
    assert np.isfinite(mant) and np.isfinite(log_mod)
    ref = float(mpmath.log(abs(mpmath.qp(1e-18, 0.44) * mpmath.qp(0.44 / mpmath.mpf(1e-18), 0.44))))
    assert log_abs_theta(1e-18, 0.44) == pytest.approx(ref, rel=1e-12)


def test_log_abs_theta_matches_theta():
    for a in (0.35, 2.5 + 1j, -7.0):
        assert log_abs_theta(a, 0.3) == pytest.approx(math.log(abs(theta(a, 0.3))), rel=1e-12)


def test_elliptic_pochhammer():
    assert elliptic_pochhammer(0.4, 0.1, 0.2, 0) == 1
    assert elliptic_pochhammer(0.4, 0.1, 0.2, 1) == pytest.approx(theta(0.4, 0.1))
    ref = theta(0.4, 0.1) * theta(0.08, 0.1) * theta(0.016, 0.1)
    assert elliptic_pochhammer(0.4, 0.1, 0.2, 3) == pytest.approx(ref, rel=1e-12)


def test_elliptic_gamma_examples():
    z, p, q = 0.3, 0.1, 0.2
    assert elliptic_gamma(z, p, q) * elliptic_gamma(p * q / z, p, q) == pytest.approx(1, rel=1e-10)
    assert elliptic_gamma(z, p, q) == pytest.approx(brute_gamma(z, p, q), rel=1e-12)


def test_elliptic_gamma_reflection_sweep():
    rng = np.random.default_rng(5)
    p, q = 0.1, 0.2
    for _ in range(5):
        z = polar(rng, 0.2, 2)
        assert elliptic_gamma(z, p, q) * elliptic_gamma(p * q / z, p, q) == pytest.approx(1, rel=1e-10)


def test_elliptic_gamma_symmetric_in_bases():
    z = 0.4 + 0.3j
    assert elliptic_gamma(z, 0.2, 0.3j) == pytest.approx(elliptic_gamma(z, 0.3j, 0.2), rel=1e-12)


def test_elliptic_gamma_near_pole():
    with pytest.raises(NearSingular):
        elliptic_gamma(1 + 1e-12, 0.1, 0.2)
    with pytest.raises(NearSingular):
        elliptic_gamma(0.1 * 0.2 * (1 + 1e-12), 0.1, 0.2)


def test_gamma_difference_equation():
    # Gamma(q z) = theta(z; p) Gamma(z)
    z, p, q = 0.37 + 0.2j, 0.15, 0.25 - 0.1j
    assert elliptic_gamma(q * z, p, q) == pytest.approx(theta(z, p) * elliptic_gamma(z, p, q), rel=1e-11)


@pytest.mark.parametrize("j,k", [(0, 0), (0, 1), (1, 0), (1, 1), (2, 1), (1, 2)])
def test_gamma_shift_pos(j, k):
    t, p, q = 0.3, 0.1, 0.2
    ref = elliptic_gamma(t * p**j * q**k, p, q) / elliptic_gamma(t, p, q)
    assert gamma_shift_pos(t, p, q, j, k) == pytest.approx(ref, rel=1e-10)


@pytest.mark.parametrize("j,k", [(0, 0), (0, 1), (1, 0), (1, 1), (1, 2), (2, 2)])
def test_gamma_shift_neg(j, k):
    t, p, q = 0.3 + 0.2j, 0.1, 0.2
    ref = elliptic_gamma(t / (p**j * q**k), p, q) / elliptic_gamma(t, p, q)
    assert gamma_shift_neg(t, p, q, j, k) == pytest.approx(ref, rel=1e-9)


def test_gamma_shift_domain():
    with pytest.raises(DomainError):
        gamma_shift_pos(0.3, 0.1, 0.2, -1, 0)
    with pytest.raises(DomainError):
        gamma_shift_neg(0, 0.1, 0.2, 1, 0)


def test_base_pair():
    b = BasePair(0.1, 0.2)
    assert b.swapped() == BasePair(0.2, 0.1)
    with pytest.raises(DomainError):
        BasePair(0.1, 0)
    with pytest.raises(DomainError):
        BasePair(1.0, 0.2)


def test_dilog_examples():
    assert dilog(0) == 0
    assert dilog(1).real == pytest.approx(math.pi**2 / 6, rel=1e-12)
    assert dilog(-1).real == pytest.approx(-math.pi**2 / 12, rel=1e-12)
    x = cmath.exp(1j * math.pi / 3)
    b2 = (1 / 6) ** 2 - 1 / 6 + 1 / 6
    assert dilog(x).real == pytest.approx(math.pi**2 * b2, rel=1e-12)
    with pytest.raises(DomainError):
        dilog(1.5)


@pytest.mark.parametrize("x", [0.5, -0.3 + 0.4j, 0.9j, 0.99 * cmath.exp(2j)])
def test_dilog_against_mpmath(x):
    assert dilog(x) == pytest.approx(complex(mpmath.polylog(2, x)), rel=1e-12, abs=1e-14)


def test_dilog_unit_circle_imaginary_part():
    x = cmath.exp(1.3j)
    assert dilog(x).imag == pytest.approx(float(mpmath.clsin(2, 1.3)), abs=1e-9)


def test_re_dilog_unit():
    assert re_dilog_unit(0) == pytest.approx(math.pi**2 / 6)
    assert re_dilog_unit(math.pi) == pytest.approx(-math.pi**2 / 12)
    assert re_dilog_unit(2 * math.pi) == pytest.approx(math.pi**2 / 6)
    # arguments outside [0, 2 pi] are reduced
    assert re_dilog_unit(1.0 + 2 * math.pi) == pytest.approx(re_dilog_unit(1.0), rel=1e-12)
