"""The elliptic beta integral: quadrature, closed form and residue calculus.

The integral is

    I(t; p, q) = (p;p)(q;q) / (4 pi i) * int_T prod_a Gamma(t_a z^{+-1}) / Gamma(z^{+-2}) dz / z

with ``prod t_a = p q``.  Its value is ``prod_{a<b} Gamma(t_a t_b)``.  The poles
inside the unit circle sit at ``t_a p^j q^k``; their residues are computed
exactly through the Gamma shift identities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NearSingular, NonConvergent, NoSeparatingContour, NotSimplePole
from .kernels import (
    DEFAULT_POLICY,
    BasePair,
    TruncationPolicy,
    elliptic_gamma,
    gamma_shift_neg_split,
    gamma_shift_pos_split,
    qpoch_inf,
    theta,
)
from .series import VSeriesSpec, v_series_term

BALANCE_TOL = 1e-10
#: relative distance below which two poles count as colliding
SIMPLE_TOL = 1e-10
#: relative distance below which a quadrature circle counts as passing through a pole
CIRCLE_GUARD = 1e-6
MIN_NODES = 64
MAX_NODES = 1 << 20

#: overall constant between a residue contribution and ``prefactor * bilinear_term``,
#: fixed numerically by :func:`annulus_check` (see tests)
RESIDUE_CONSTANT = 0.5


@dataclass(frozen=True)
class BetaParams:
    """Six parameters ``t_1..t_6`` with ``prod t_a = p q``.

    ``unit_contour=False`` drops the ``|t_a| < 1`` requirement (analytic
    continuation of the closed form, or circles of other radii).
    """

    t: tuple
    bases: BasePair
    unit_contour: bool = True
    box: int = 8

    def __post_init__(self):
        t = tuple(complex(x) for x in self.t)
        if len(t) != 6:
            raise DomainError("the beta integral takes exactly six parameters")
        if any(x == 0 or not np.isfinite(x) for x in t):
            raise DomainError("parameters must be finite and nonzero")
        object.__setattr__(self, "t", t)
        pq = self.bases.p * self.bases.q
        if self.bases.p == 0:
            raise DomainError("the beta integral needs p != 0")
        residual = abs(np.prod(t) / pq - 1)
        if not residual <= BALANCE_TOL:
            raise DomainError(f"balancing prod t_a = pq violated, relative residual {residual:.3e}")
        if self.unit_contour and max(abs(x) for x in t) >= 1:
            raise NoSeparatingContour("unit circle needs all |t_a| < 1")

    @property
    def p(self) -> complex:
        return self.bases.p

    @property
    def q(self) -> complex:
        return self.bases.q

    def check_simple(self, j_max: int | None = None, k_max: int | None = None) -> None:
        """Raise :class:`NotSimplePole` if ``t_b = t_a p^j q^k`` for some ``b != a`` in the box."""
        j_max = self.box if j_max is None else j_max
        k_max = self.box if k_max is None else k_max
        p, q = self.p, self.q
        shifts = np.array([[p**j * q**k for k in range(k_max + 1)] for j in range(j_max + 1)])
        for a, ta in enumerate(self.t):
            for b, tb in enumerate(self.t):
                if a == b:
                    continue
                d = np.abs(ta * shifts - tb) / abs(tb)
                if np.min(d) < SIMPLE_TOL:
                    j, k = np.unravel_index(int(np.argmin(d)), d.shape)
                    raise NotSimplePole(f"t_{b + 1} = t_{a + 1} p^{j} q^{k}: poles collide")


@dataclass(frozen=True)
class ResidueIndex:
    """Pole ``z = t_a p^j q^k``; ``a`` is 1-based."""

    a: int
    j: int
    k: int

    def __post_init__(self):
        if not 1 <= self.a <= 6:
            raise DomainError("pole family index a must lie in 1..6")
        if self.j < 0 or self.k < 0:
            raise DomainError("pole shell indices must be >= 0")

    def location(self, params: BetaParams) -> complex:
        return params.t[self.a - 1] * params.p**self.j * params.q**self.k


def _kappa0(params: BetaParams, policy) -> complex:
    return qpoch_inf(params.p, params.p, policy) * qpoch_inf(params.q, params.q, policy)


def _kernel(z, params: BetaParams, policy: TruncationPolicy, guard: float):
    """``prod_a Gamma(t_a z^{+-1}) / Gamma(z^{+-2})`` on an array of nodes.

    ``1 / (Gamma(z^2) Gamma(z^-2)) = theta(z^-2; p) theta(z^2; q)``, which is
    entire away from 0 and vanishes exactly at ``z = +-1``.
    """
    p, q = params.p, params.q
    z = np.asarray(z, dtype=complex)
    val = theta(z**-2, p, policy) * theta(z**2, q, policy)
    for ta in params.t:
        val = val * elliptic_gamma(ta * z, p, q, policy, guard) * elliptic_gamma(ta / z, p, q, policy, guard)
    return val


def beta_integrand(z, params: BetaParams, policy: TruncationPolicy = DEFAULT_POLICY, guard: float = 1e-8):
    """Full integrand including ``(p;p)(q;q)/(4 pi i)`` and the ``1/z`` of the measure."""
    scalar = np.isscalar(z)
    zz = np.atleast_1d(np.asarray(z, dtype=complex))
    if np.any(zz == 0):
        raise DomainError("integrand is singular at z = 0")
    val = _kappa0(params, policy) / (4j * math.pi) * _kernel(zz, params, policy, guard) / zz
    return complex(val[0]) if scalar else val


def pole_radii(params: BetaParams, r_min: float) -> list[tuple[ResidueIndex, complex]]:
    """All inner poles ``t_a p^j q^k`` with modulus above ``r_min``."""
    out = []
    ap, aq = abs(params.p), abs(params.q)
    for a, ta in enumerate(params.t, start=1):
        j = 0
        while abs(ta) * ap**j > r_min:
            k = 0
            while abs(ta) * ap**j * aq**k > r_min:
                idx = ResidueIndex(a, j, k)
                out.append((idx, idx.location(params)))
                k += 1
            j += 1
    return out


def _check_circle(params: BetaParams, radius: float, separating: bool) -> None:
    if not radius > 0:
        raise DomainError("radius must be positive")
    mods = [abs(x) for x in params.t]
    if separating and not (max(mods) < radius < min(1 / m for m in mods)):
        raise NoSeparatingContour(
            f"radius {radius:.6g} does not separate the pole sequences (max|t_a| = {max(mods):.6g})"
        )
    # inner poles near the circle and their mirror images 1/(t_a p^j q^k)
    for idx, z0 in pole_radii(params, radius * (1 - CIRCLE_GUARD) * 0.5):
        for m in (abs(z0), 1 / abs(z0)):
            if abs(m / radius - 1) < CIRCLE_GUARD:
                raise NearSingular(f"pole of family {idx.a} at |z|={m:.6g} lies on the circle")


@dataclass
class QuadratureResult:
    value: complex
    nodes: int
    last_change: float
    history: list = field(default_factory=list)


def beta_integral_quadrature(
    params: BetaParams,
    radius: float = 1.0,
    tol: float = 1e-12,
    separating: bool = True,
    policy: TruncationPolicy = DEFAULT_POLICY,
    details: bool = False,
):
    """Trapezoid rule on ``|z| = radius`` with node doubling from 64 up to ``2^20``.

    Nodes of the previous level are reused; only the new odd-indexed nodes are
    evaluated at each doubling.  Converged when two successive values differ
    by less than ``tol`` relatively.
    """
    _check_circle(params, radius, separating)
    kappa0 = _kappa0(params, policy)
    n = MIN_NODES
    angles = 2 * math.pi * np.arange(n) / n
    acc = complex(np.sum(_kernel(radius * np.exp(1j * angles), params, policy, 1e-12)))
    value = kappa0 * acc / (2 * n)
    history = [(n, value)]
    while n < MAX_NODES:
        angles = 2 * math.pi * (np.arange(n) + 0.5) / n
        acc += complex(np.sum(_kernel(radius * np.exp(1j * angles), params, policy, 1e-12)))
        n *= 2
        new = kappa0 * acc / (2 * n)
        history.append((n, new))
        change = abs(new - value) / max(abs(new), np.finfo(float).tiny)
        value = new
        if change < tol:
            res = QuadratureResult(value, n, change, history)
            return res if details else value
    raise NonConvergent(f"trapezoid rule did not reach tol={tol:.1e} with {MAX_NODES} nodes")


def beta_closed_form(params: BetaParams, policy: TruncationPolicy = DEFAULT_POLICY, guard: float = 1e-8) -> complex:
    """``prod_{a<b} Gamma(t_a t_b; p, q)``."""
    t = params.t
    args = np.array([t[a] * t[b] for a in range(6) for b in range(a + 1, 6)])
    return complex(np.prod(elliptic_gamma(args, params.p, params.q, policy, guard)))


def residue_prefactor(params: BetaParams, a: int, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """``prod_{l != a} Gamma(t_l t_a^{+-1}) / Gamma(t_a^{-2})`` for the 1-based family index ``a``."""
    p, q = params.p, params.q
    ta = params.t[a - 1]
    others = np.array([tl for i, tl in enumerate(params.t) if i != a - 1])
    num = elliptic_gamma(np.concatenate((others * ta, others / ta)), p, q, policy)
    return complex(np.prod(num) / elliptic_gamma(ta**-2, p, q, policy))


def residue_at(params: BetaParams, idx: ResidueIndex, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Contribution of the pole ``t_a p^j q^k`` to the integral.

    Equals ``2 pi i`` times the residue of the full integrand.  Every Gamma
    factor at the pole is written as a shift multiplier times its value at
    ``j = k = 0``; the singular factor uses the regular limit
    ``lim (1 - eps) Gamma(eps) = 1 / ((p;p)(q;q))``, which cancels the prefactor
    and leaves the overall ``1/2`` of the ``1/(4 pi i)``.
    """
    params.check_simple(idx.j, idx.k)
    p, q = params.p, params.q
    j, k = idx.j, idx.k
    ta = params.t[idx.a - 1]
    ta2 = ta * ta
    # multipliers are combined as (phase, log modulus) because single factors under- or overflow at large j, k
    splits = [
        gamma_shift_neg_split(1.0, p, q, j, k, policy),
        gamma_shift_pos_split(ta2, p, q, j, k, policy),
    ]
    inverse = [
        gamma_shift_pos_split(ta2, p, q, 2 * j, 2 * k, policy),
        gamma_shift_neg_split(1 / ta2, p, q, 2 * j, 2 * k, policy),
    ]
    for i, tl in enumerate(params.t):
        if i == idx.a - 1:
            continue
        splits.append(gamma_shift_pos_split(tl * ta, p, q, j, k, policy))
        splits.append(gamma_shift_neg_split(tl / ta, p, q, j, k, policy))
    phase, log_mod = 1.0 + 0j, 0.0
    for ph, lm in splits:
        phase, log_mod = phase * ph, log_mod + lm
    for ph, lm in inverse:
        phase, log_mod = phase / ph, log_mod - lm
    with np.errstate(over="ignore", under="ignore"):
        val = RESIDUE_CONSTANT * residue_prefactor(params, idx.a, policy) * phase * np.exp(log_mod)
    return complex(val)


def _default_m(a: int, m: int | None) -> int:
    if m is None:
        return 1 if a != 1 else 2
    if m == a or not 1 <= m <= 6:
        raise DomainError(f"scaled parameter index m must differ from a={a} and lie in 1..6")
    return m


def residue_series_specs(params: BetaParams, a: int, m: int | None = None) -> tuple[VSeriesSpec, VSeriesSpec]:
    """The two ``10V9`` series of family ``a``.

    The first sums over ``k`` with base ``q`` and nome ``p`` and has ``t_m -> t_m/p``;
    the second sums over ``j`` with base ``p`` and nome ``q`` and has ``t_m -> t_m/q``.
    """
    m = _default_m(a, m)
    p, q = params.p, params.q
    ta = params.t[a - 1]

    def build(scale):
        ts = [ta * ta]
        for i, tl in enumerate(params.t, start=1):
            if i == a:
                continue
            ts.append(ta * tl / scale if i == m else ta * tl)
        return ts

    spec_q = VSeriesSpec(tuple(build(p)), BasePair(p, q))
    spec_p = VSeriesSpec(tuple(build(q)), BasePair(q, p))
    return spec_q, spec_p


def bilinear_term(
    params: BetaParams, a: int, j: int, k: int, m: int | None = None, policy: TruncationPolicy = DEFAULT_POLICY
) -> complex:
    """Product of term ``k`` of the base-``q`` series and term ``j`` of the base-``p`` series."""
    spec_q, spec_p = residue_series_specs(params, a, m)
    return v_series_term(spec_q, k, policy) * v_series_term(spec_p, j, policy)


@dataclass
class ResidueSumReport:
    value: complex
    per_family: list
    closed_form: complex | None = None

    @property
    def discrepancy(self) -> float | None:
        if self.closed_form is None:
            return None
        return abs(self.value - self.closed_form) / abs(self.closed_form)

    def as_dict(self) -> dict:
        return {
            "value": self.value,
            "closed_form": self.closed_form,
            "relative_discrepancy": self.discrepancy,
            "per_family": self.per_family,
        }


def truncated_residue_sum(
    params: BetaParams,
    J: int,
    K: int,
    m_choice: int | None = None,
    compare: bool = True,
    policy: TruncationPolicy = DEFAULT_POLICY,
) -> ResidueSumReport:
    """``1/2 sum_a prefactor_a (sum_{k<=K} T^q_k)(sum_{j<=J} T^p_j)``.

    Per-family partial sums and last-term magnitudes are reported; nothing is
    claimed about convergence.
    """
    if J < 0 or K < 0:
        raise DomainError("truncation orders must be >= 0")
    params.check_simple(J, K)
    total = 0j
    per = []
    for a in range(1, 7):
        spec_q, spec_p = residue_series_specs(params, a, m_choice if m_choice != a else None)
        tq = [v_series_term(spec_q, k, policy) for k in range(K + 1)]
        tp = [v_series_term(spec_p, j, policy) for j in range(J + 1)]
        pref = residue_prefactor(params, a, policy)
        contrib = RESIDUE_CONSTANT * pref * sum(tq) * sum(tp)
        total += contrib
        per.append(
            {
                "a": a,
                "prefactor": pref,
                "q_series_partial": sum(tq),
                "p_series_partial": sum(tp),
                "last_q_term": abs(tq[-1]),
                "last_p_term": abs(tp[-1]),
                "contribution": contrib,
            }
        )
    closed = beta_closed_form(params, policy) if compare else None
    return ResidueSumReport(complex(total), per, closed)


@dataclass
class AnnulusResult:
    lhs: complex
    rhs: complex
    scale: float
    poles: list

    @property
    def error(self) -> float:
        return abs(self.lhs - self.rhs) / self.scale


def annulus_check(
    params: BetaParams, rho: float, tol: float = 1e-13, policy: TruncationPolicy = DEFAULT_POLICY
) -> AnnulusResult:
    """Cauchy's theorem on ``rho < |z| < 1``.

    ``lhs`` is the quadrature at radius 1 minus the quadrature at radius
    ``rho``; ``rhs`` is the sum of :func:`residue_at` over the enclosed poles.
    The mirror poles ``1/(t_a p^j q^k)`` lie outside the unit circle for
    ``|t_a| < 1`` and never enter the annulus.
    """
    if not 0 < rho < 1:
        raise DomainError("rho must lie in (0, 1)")
    outer = beta_integral_quadrature(params, 1.0, tol, separating=True, policy=policy)
    inner = beta_integral_quadrature(params, rho, tol, separating=False, policy=policy)
    poles = [idx for idx, z0 in pole_radii(params, rho) if abs(z0) < 1]
    rhs = 0j
    for idx in poles:
        rhs += residue_at(params, idx, policy)
    scale = max(abs(outer), abs(inner))
    return AnnulusResult(outer - inner, rhs, scale, [(i.a, i.j, i.k) for i in poles])
