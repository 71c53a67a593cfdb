import cmath
import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from ellhyp.convergence import (
    CFReport,
    PhiCoords,
    QLine,
    XiCoords,
    cf_diagnostic,
    f_integral_closed,
    f_integral_quadrature,
    frac,
    from_phi,
    line_invert,
    log_rc_general,
    log_rc_phi,
    log_rc_six_p,
    log_rc_six_q,
    mu_forms,
    phi_of,
    weyl_empirical,
    wp_parametrization,
)
from ellhyp.errors import DegenerateLine, DomainError, OnCriticalLine, RationalDetected, SingularPoint
from ellhyp.kernels import BasePair
from ellhyp.series import VSeriesSpec

GOLDEN = (math.sqrt(5) - 1) / 2
LINES = [
    QLine(1j, GOLDEN),
    QLine(0.2 + 0.9j, GOLDEN, N=1, M=1),
    QLine(0.3 + 1.1j, 0.37, N=1, M=2),
    # Weyl averages need an irrational slope
    QLine(1j, math.sqrt(2) - 1, N=1, M=1, K=2, L=1),
]


def balanced_from_phi(phi, line, h=None):
    h = [0.0] * len(phi) if h is None else h
    t = [from_phi(a, b, line) for a, b in zip(h, phi)]
    t.append(line.q * t[0] ** 2 / np.prod(t[1:]))
    return VSeriesSpec(tuple(t), BasePair(line.p, line.q))


def six_from_phi(phi, line):
    t = [from_phi(0.0, f, line) for f in phi[:5]]
    t.append(line.p * line.q / np.prod(t))
    return t


def test_frac_semantics():
    assert frac(3.5) == 0.5
    assert frac(-0.1) == pytest.approx(0.9)
    assert frac(2.3) == pytest.approx(0.3)
    assert frac(1.1) == pytest.approx(0.1)
    for m in (-3, 1, 7):
        assert frac(0.37 - m) == pytest.approx(frac(0.37), abs=1e-14)
    assert np.allclose(frac(np.array([-0.25, 1.75])), [0.75, 0.75])


def test_line_validation():
    with pytest.raises(DomainError):
        QLine(-1j, GOLDEN)
    with pytest.raises(DomainError):
        QLine(1j, GOLDEN, N=2, M=4)
    with pytest.raises(DomainError):
        QLine(1j, 1.2)
    with pytest.raises(DomainError):
        QLine(1j, GOLDEN, N=0, M=0)


@pytest.mark.parametrize("line", LINES)
def test_phi_of_base_and_shifts(line):
    base = phi_of(line.q0, line)[1]
    assert base == pytest.approx(round(base), abs=1e-12)
    t = 0.7 * cmath.exp(1.3j)
    h, phi = phi_of(t, line)
    # principal logarithms shift phi by a further integer multiple of M
    shifted = phi_of(t * line.p**2, line)[1] - (phi - 2 * line.N)
    assert shifted == pytest.approx(round(shifted), abs=1e-12) and round(shifted) % line.M == 0
    assert frac(phi_of(t * line.p**-1, line)[1]) == pytest.approx(frac(phi), abs=1e-12)
    qh = cmath.exp(2j * math.pi * line.chi * line.omega * 0.37)
    assert phi_of(t * qh, line)[1] == pytest.approx(phi, abs=1e-12)
    assert from_phi(h, phi, line) == pytest.approx(t, rel=1e-12)
    with pytest.raises(DomainError):
        phi_of(0, line)


def test_coords_round_trip():
    line = LINES[1]
    ts = [0.4 + 0.2j, 1.3 - 0.5j, -0.8j]
    assert PhiCoords.of(ts, line).reconstruct(line) == pytest.approx(ts, rel=1e-12)
    assert XiCoords.of(ts, line).reconstruct(line) == pytest.approx(ts, rel=1e-12)


def test_mu_forms_agree():
    for t, (N, M), tau in [(0.5, (1, 1), 1j), (1.7 - 0.4j, (1, 2), 0.3 + 0.8j), (0.2j, (0, 1), 0.1 + 1.2j)]:
        a, b = mu_forms(t, N, M, tau)
        assert abs(a) == pytest.approx(1) and a == pytest.approx(b, abs=1e-12)


F_GRID = [
    (0.5, 1, 1, 1, 1j),
    (0.5 * cmath.exp(0.4j), 1, 0, 1, 1j),
    (1.4 - 0.3j, 1, 1, 1, 0.2 + 0.9j),
    (0.3 + 0.4j, 2, 1, 1, 1j),
    (0.8j, 1, 1, 2, 0.3 + 1.1j),
    (2.2 + 0.5j, 1, 2, 1, 0.1 + 0.8j),
    (cmath.exp(1.1j), 1, 1, 1, 1j),
    (0.6 - 0.6j, 3, 0, 1, 0.5j + 0.1),
    (0.05 + 0.02j, 1, 1, 1, 1.2j),
    (1.9, 2, 1, 3, 0.4 + 1.3j),
]


@pytest.mark.parametrize("t,K,N,M,tau", F_GRID)
def test_f_integral_matches_quadrature(t, K, N, M, tau):
    assert abs(f_integral_closed(t, K, N, M, tau) - f_integral_quadrature(t, K, N, M, tau)) < 1e-6


def test_f_integral_unit_modulus():
    t = cmath.exp(0.9j)
    closed = f_integral_closed(t, 1, 1, 1, 1j)
    phi = phi_of(t, QLine(1j, 0.5, N=1, M=1))[1]
    from ellhyp.kernels import re_dilog_unit

    assert closed == pytest.approx(-1 / (2 * math.pi) * re_dilog_unit(2 * math.pi * frac(phi)), rel=1e-12)
    assert closed == pytest.approx(f_integral_quadrature(t, 1, 1, 1, 1j), abs=1e-8)


def test_f_integral_critical_spiral():
    with pytest.raises(OnCriticalLine):
        f_integral_closed(0.5, 1, 0, 1, 1j)


def test_general_all_in_range_is_zero():
    line = LINES[0]
    # phi_0 = phi_k + phi~_k and equal sums, all coordinates already in [0, 1)
    rep = log_rc_phi([0.8, 0.1, 0.3], [0.0, 0.7, 0.5], line)
    assert rep.log_rc_inv == pytest.approx(0.0, abs=1e-14)


@pytest.mark.parametrize("line", LINES)
def test_general_invariant_under_q_and_p_shifts(line):
    rng = np.random.default_rng(3)
    spec = balanced_from_phi(rng.uniform(-1.5, 1.5, 5), line)
    base = log_rc_general(spec.t, spec.w, line)
    t = [x * cmath.exp(2j * math.pi * line.chi * line.omega * rng.uniform(-2, 2)) * line.p ** int(rng.integers(-3, 4)) for x in spec.t]
    w = list(spec.w)
    w[1:] = [x * line.p ** int(rng.integers(-3, 4)) for x in w[1:]]
    moved = log_rc_general(t, w, line)
    assert moved.log_rc_inv == pytest.approx(base.log_rc_inv, abs=1e-12)


def test_general_critical_line():
    line = LINES[0]
    with pytest.raises(OnCriticalLine) as info:
        log_rc_general([0.5, 0.3 + 0.1j], [line.q, 0.2 + 0.4j], line)
    assert info.value.k == 0


def test_six_q_zero_and_symmetry():
    line = LINES[0]
    reps = [log_rc_six_q(np.zeros(6), line, a) for a in range(1, 7)]
    assert all(r.log_rc_inv == 0 for r in reps)
    phi = np.array([0.1, 0.2, -0.3, 0.05, 0.05, -0.1])
    assert log_rc_six_q(phi, line, 4).log_rc_inv == pytest.approx(log_rc_six_q(phi, line, 5).log_rc_inv)


def test_six_q_needs_integer_sum():
    with pytest.raises(DomainError):
        log_rc_six_q([0.1, 0.2, 0.3, 0.0, 0.0, 0.0], LINES[0], 1)


@pytest.mark.parametrize("line", LINES[:3] + [QLine(1j, 0.41, N=1, M=1, K=2, L=1)])
def test_six_q_matches_general(line):
    rng = np.random.default_rng(7)
    phi = rng.uniform(-1, 1, 6)
    t = six_from_phi(phi, line)
    phi = np.array([phi_of(x, line)[1] for x in t])
    for a in range(1, 7):
        ta = t[a - 1]
        ts = [ta * ta] + [ta * tl for i, tl in enumerate(t, 1) if i != a]
        ws = [line.q] + [line.q * ta / tl for i, tl in enumerate(t, 1) if i != a]
        assert log_rc_six_q(phi, line, a).log_rc_inv == pytest.approx(log_rc_general(ts, ws, line).log_rc_inv, abs=1e-12)


def test_line_invert_example():
    inv = line_invert(QLine(1j, 1 / math.sqrt(2), N=0, M=1, Q=1))
    assert inv.S == 1 and inv.eta == pytest.approx(math.sqrt(2) - 1, rel=1e-12)


@pytest.mark.parametrize("line", LINES[:3])
def test_line_invert_round_trip(line):
    inv = line_invert(line)
    assert inv.line.p == pytest.approx(line.q, rel=1e-12)
    assert inv.line.q == pytest.approx(line.p * line.q ** (-inv.S), rel=1e-10)


def test_line_invert_degenerate():
    with pytest.raises(DegenerateLine):
        line_invert(LINES[3])
    with pytest.raises(DegenerateLine):
        line_invert(QLine(1j, 0.5))


@pytest.mark.parametrize("line", LINES[:3])
def test_six_p_matches_general_on_inverse_line(line):
    rng = np.random.default_rng(9)
    t = six_from_phi(rng.uniform(-1, 1, 6), line)
    inv = line_invert(line).line
    xi = np.array(XiCoords.of(t, line).xi)
    assert log_rc_six_p(np.zeros(6), line, 1).log_rc_inv == 0
    for a in range(1, 7):
        ta = t[a - 1]
        ts = [ta * ta] + [ta * tl for i, tl in enumerate(t, 1) if i != a]
        ws = [inv.q] + [inv.q * ta / tl for i, tl in enumerate(t, 1) if i != a]
        ref = log_rc_general(ts, ws, inv).log_rc_inv
        assert log_rc_six_p(xi, line, a).log_rc_inv == pytest.approx(ref, abs=1e-12)


def test_xi_is_independent_of_h():
    line = LINES[2]
    t = 0.6 * cmath.exp(0.8j)
    qh = cmath.exp(2j * math.pi * line.chi * line.omega * 0.41)
    a = XiCoords.of([t], line).xi[0]
    b = XiCoords.of([t * qh], line).xi[0]
    assert frac(a * line.M) == pytest.approx(frac(b * line.M), abs=1e-12)


WEYL_PHI = (-1.47, 1.02, 1.09, 0.95, 0.90)


def test_weyl_convergent_spec():
    line = LINES[0]
    spec = balanced_from_phi(WEYL_PHI, line)
    running, target = weyl_empirical(spec, line, 100_000)
    assert target.log_rc_inv < 0
    assert abs(running[-1] - target.log_rc_inv) < 0.05


def test_weyl_trivial_pairs_do_not_contribute():
    # a pair t = w = sqrt(q t0) keeps the balancing and contributes the ratio 1 to H
    line = LINES[0]
    spec = balanced_from_phi(WEYL_PHI, line)
    t = cmath.sqrt(line.q * spec.t[0])
    padded = VSeriesSpec(spec.t + (t, t), spec.bases)
    a, ta = weyl_empirical(spec, line, 2000)
    b, tb = weyl_empirical(padded, line, 2000)
    assert np.max(np.abs(a - b)) < 1e-10
    assert ta.log_rc_inv == pytest.approx(tb.log_rc_inv, abs=1e-12)
    assert np.sum(tb.contributions[0, -2:]) == pytest.approx(0, abs=1e-12)


def test_weyl_k2_line():
    line = LINES[3]
    spec = balanced_from_phi([0.3, -0.8, 1.2, 0.45, -0.25], line, h=[0.1, -0.2, 0.3, 0.0, 0.2])
    running, target = weyl_empirical(spec, line, 200_000)
    assert target.weight == 0.5
    assert abs(running[-1] - target.log_rc_inv) < 0.05


def test_weyl_requires_matching_bases():
    line = LINES[0]
    spec = balanced_from_phi(WEYL_PHI, LINES[1])
    with pytest.raises(DomainError):
        weyl_empirical(spec, line, 10)


def test_weyl_singular_point():
    line = LINES[0]
    spec = balanced_from_phi(WEYL_PHI, line)
    # move t1 onto a pole of H at u = 1: theta(w_1 u) = 0 needs w_1 = 1
    t0 = spec.t[0]
    t = list(spec.t)
    t[1] = line.q * t0
    t[-1] = line.q * t0**2 / np.prod(t[1:-1])
    bad = VSeriesSpec(tuple(t), spec.bases)
    with pytest.raises(SingularPoint) as info:
        weyl_empirical(bad, line, 5)
    assert info.value.index == 0


def test_cf_golden():
    rep = cf_diagnostic(GOLDEN)
    assert isinstance(rep, CFReport)
    assert set(rep.partial_quotients[1:]) == {1}
    assert rep.ratios[-1] < 1e-3 and not rep.flagged
    assert [q for _, q in rep.convergents[:8]] == [1, 1, 2, 3, 5, 8, 13, 21]


def test_cf_rational():
    with pytest.raises(RationalDetected):
        cf_diagnostic(0.5)


def test_cf_liouville_like():
    # partial quotients 1, 10, 10^4: the ratio log(q_3)/q_2 is about 0.84, then log(q_4)/q_3 is huge
    chi = 1 / (1 + 1 / (10 + 1 / (1e4 + 0.5)))
    rep = cf_diagnostic(chi, depth=6)
    assert rep.flagged and rep.max_ratio > 0.8


def test_cf_rows_shape():
    rep = cf_diagnostic(math.sqrt(2) - 1, depth=10)
    rows = rep.rows()
    assert len(rows) == len(rep.ratios)
    assert all(math.gcd(p, q) == 1 for p, q, _ in rows)


@pytest.mark.parametrize("r", [4, 6, 8, 10])
def test_wppar_constraint_and_sign(r):
    phi, phit = wp_parametrization(r, 0.25, strict=(r != 4))
    assert sum(phi) == pytest.approx(sum(phit), abs=1e-12)
    assert log_rc_phi(phi, phit, QLine(1j, GOLDEN)).log_rc_inv < 0


def test_wppar_example_values():
    phi, phit = wp_parametrization(6, 0.25)
    eps = 3 / 3.25
    assert phi[0] == pytest.approx(1 + 3 * eps)
    assert phi[1] == pytest.approx(1 - eps)
    with pytest.raises(DomainError):
        wp_parametrization(6, 0.4)
    with pytest.raises(DomainError):
        wp_parametrization(2, 0.1)


@settings(max_examples=30, deadline=None)
@given(st.lists(st.floats(-3, 3), min_size=6, max_size=6), st.integers(-3, 3), st.floats(-2, 2))
def test_six_q_invariance_under_shifts(phi, m, h):
    line = LINES[1]
    phi = np.array(phi) - np.mean(phi)
    t = six_from_phi(phi, line)
    base = np.array([phi_of(x, line)[1] for x in t])
    qh = cmath.exp(2j * math.pi * line.chi * line.omega * h)
    t2 = [t[0] * qh * line.p**m, t[1] / qh * line.p ** (-m)] + t[2:]
    moved = np.array([phi_of(x, line)[1] for x in t2])
    for a in range(1, 7):
        try:
            ref = log_rc_six_q(base, line, a).log_rc_inv
        except DomainError:
            return
        assert log_rc_six_q(moved, line, a).log_rc_inv == pytest.approx(ref, abs=1e-12)
