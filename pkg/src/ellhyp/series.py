"""Very-well-poised elliptic hypergeometric series and their closed forms.

A series ``_{r+1}V_r(t_0; t_1, ..., t_{r-4}; q, p)`` has terms

    c_n = theta(t_0 q^{2n}; p) / theta(t_0; p)
          * prod_m theta(t_m; p; q)_n / theta(w_m; p; q)_n * (q z)^n,

with ``w_m = q t_0 / t_m`` (so ``w_0 = q``).  Consecutive terms are related by
``c_{n+1} = c_n * H(q^n) * z`` where ``H`` is an elliptic function of ``u``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DomainError, NonConvergent, SingularPoint, SingularTerm, Unbalanced
from .kernels import (
    DEFAULT_POLICY,
    BasePair,
    TruncationPolicy,
    check_nome,
    elliptic_pochhammer,
    ipow,
    qpoch,
    qpoch_inf,
    theta,
    theta_scale,
    theta_split,
)

BALANCE_TOL = 1e-10
#: |theta| below this fraction of its scale bound counts as a vanishing denominator
SINGULAR_RTOL = 1e-13
#: incremental term accumulation is re-anchored on a direct evaluation this often
RESYNC_EVERY = 32


@dataclass(frozen=True)
class VSeriesSpec:
    """Parameters ``t = (t_0, ..., t_{r-4})`` of a very-well-poised series.

    The balancing condition is checked on construction; the sign ``nu`` of the
    unsquared form is stored.
    """

    t: tuple
    bases: BasePair
    z: complex = 1.0
    n_max: int | None = None
    nu: int = field(init=False, default=1)

    def __post_init__(self):
        t = tuple(complex(x) for x in self.t)
        if len(t) < 2:
            raise DomainError("a very-well-poised series needs at least t_0 and t_1")
        if any(x == 0 or not np.isfinite(x) for x in t):
            raise DomainError("series parameters must be finite and nonzero")
        object.__setattr__(self, "t", t)
        object.__setattr__(self, "z", complex(self.z))
        object.__setattr__(self, "nu", check_balancing(self))

    @property
    def r(self) -> int:
        return len(self.t) + 3

    @property
    def p(self) -> complex:
        return self.bases.p

    @property
    def q(self) -> complex:
        return self.bases.q

    @property
    def w(self) -> tuple:
        q, t0 = self.q, self.t[0]
        return tuple(q * t0 / tk for tk in self.t)

    def replace(self, **kw) -> "VSeriesSpec":
        args = dict(t=self.t, bases=self.bases, z=self.z, n_max=self.n_max)
        args.update(kw)
        return VSeriesSpec(**args)


def check_balancing(spec: VSeriesSpec) -> int:
    """Return the sign ``nu`` of the balancing condition or raise :class:`Unbalanced`.

    The squared form ``prod_k t_k / w_k = q^{-4}`` is tested; for odd ``r``
    the sign is +1 by convention, for even ``r`` it is read off with principal
    square roots.
    """
    t, q = spec.t, complex(spec.bases.q)
    t0 = t[0]
    prod = 1.0 + 0j
    for tk in t:
        prod *= tk * tk / (q * t0)
    residual = abs(prod * ipow(q, 4) - 1)
    if not residual <= BALANCE_TOL:
        raise Unbalanced(residual)
    r = len(t) + 3
    if r % 2 == 1:
        return 1
    rest = np.prod(t[1:])
    ratio = rest / (np.sqrt(t0) ** (r - 5) * np.sqrt(q) ** (r - 7))
    return 1 if ratio.real >= 0 else -1


def _den_theta(x, p, where: int, label: str, policy):
    val = theta(x, p, policy)
    if val == 0 or abs(val) < SINGULAR_RTOL * theta_scale(x, p, policy):
        raise SingularTerm(where, label)
    return val


def _den_poch(x, p, q, n, where, label, policy):
    val = 1.0 + 0j
    xj = complex(x)
    for j in range(n):
        val *= _den_theta(xj, p, where, label, policy)
        xj *= q
    return val


class _Split:
    """Running product ``mant * exp(log_mod)`` of theta values."""

    def __init__(self, p, policy):
        self.p, self.policy = p, policy
        self.mant = 1.0 + 0j
        self.log_mod = 0.0

    def mul(self, args):
        if self.p == 0:
            vals = 1 - np.asarray(args, dtype=complex)
            vals = np.where(np.abs(vals) <= 64 * np.finfo(float).eps, 0, vals)
            self.mant *= complex(np.prod(vals))
            return self.mant == 0
        mant, log_mod, _ = theta_split(np.asarray(args, dtype=complex), self.p, self.policy)
        self.mant *= complex(np.prod(mant))
        self.log_mod += float(np.sum(log_mod))
        self._renorm()
        return self.mant == 0

    def div(self, args):
        """Divide; returns the index of a rounding-level zero, or -1."""
        args = np.asarray(args, dtype=complex)
        if self.p == 0:
            vals = 1 - args
            bad = np.flatnonzero(np.abs(vals) < SINGULAR_RTOL * (1 + np.abs(args)))
            if bad.size:
                return int(bad[0])
            self.mant /= complex(np.prod(vals))
            return -1
        mant, log_mod, scale = theta_split(args, self.p, self.policy)
        bad = np.flatnonzero(np.abs(mant) < SINGULAR_RTOL * scale)
        if bad.size:
            return int(bad[0])
        for m in mant:
            self.mant /= m
            self._renorm()
        self.log_mod -= float(np.sum(log_mod))
        return -1

    def _renorm(self):
        a = abs(self.mant)
        if a != 0 and (a > 1e100 or a < 1e-100):
            self.mant /= a
            self.log_mod += math.log(a)

    def value(self) -> complex:
        if self.mant == 0:
            return 0j
        with np.errstate(over="ignore", under="ignore"):
            return complex(self.mant * np.exp(self.log_mod))


def _powers(x, q, n):
    return complex(x) * np.cumprod(np.concatenate(([1.0 + 0j], np.full(max(n - 1, 0), complex(q)))))[:n]


def v_series_term(spec: VSeriesSpec, n: int, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Term ``c_n`` evaluated directly from elliptic Pochhammer symbols.

    Theta factors are multiplied in reduced form, so only the final value can
    overflow (to ``inf``).
    """
    p, q = spec.p, spec.q
    t0 = spec.t[0]
    acc = _Split(p, policy)
    if acc.div([t0]) >= 0:
        raise SingularTerm(0, "theta(t_0)")
    acc.mul([t0 * ipow(q, 2 * n)])
    if n > 0:
        for tm in spec.t:
            if acc.mul(_powers(tm, q, n)):
                return 0j
        for m, wm in enumerate(spec.w):
            if acc.div(_powers(wm, q, n)) >= 0:
                raise SingularTerm(n, f"w_{m}")
    return acc.value() * ipow(q * spec.z, n)


def term_ratio_H(u, spec: VSeriesSpec, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """The elliptic term ratio ``H(u)`` with ``c_{n+1} = c_n H(q^n) z``."""
    p, q = spec.p, spec.q
    u = complex(u)
    t0 = spec.t[0]
    acc = _Split(p, policy)
    den = [t0 * u * u] + [wk * u for wk in spec.w]
    bad = acc.div(den)
    if bad >= 0:
        raise SingularPoint(u, bad - 1 if bad > 0 else None)
    if acc.mul([t0 * q * q * u * u] + [tk * u for tk in spec.t]):
        return 0j
    return q * acc.value()


def v_series_partial_sums(spec: VSeriesSpec, N: int, policy: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """Partial sums ``S_0, ..., S_N``.

    Terms are accumulated through the ratio ``H(q^n) z`` and re-anchored on a
    direct evaluation every :data:`RESYNC_EVERY` terms.  Once a term is exactly
    zero (terminating series) all later partial sums are equal.
    """
    N = int(N)
    if N < 0:
        raise DomainError("N must be >= 0")
    out = np.empty(N + 1, dtype=complex)
    term = 1.0 + 0j
    total = term
    out[0] = total
    qn = 1.0 + 0j
    for n in range(N):
        try:
            ratio = term_ratio_H(qn, spec, policy)
        except SingularPoint:
            raise SingularTerm(n + 1, "w_m q^n on the pole set") from None
        term = term * ratio * spec.z
        if term == 0:
            out[n + 1:] = total
            return out
        if (n + 1) % RESYNC_EVERY == 0:
            direct = v_series_term(spec, n + 1, policy)
            if np.isfinite(direct):
                term = direct
        if not np.isfinite(term):
            raise DomainError(f"series term overflowed at n={n + 1}")
        total += term
        out[n + 1] = total
        qn *= spec.q
    return out


def v_series_sum(spec: VSeriesSpec, N: int, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Partial sum of the first ``N + 1`` terms (a limit is never claimed)."""
    return complex(v_series_partial_sums(spec, N, policy)[-1])


@dataclass(frozen=True)
class FTSpec:
    """Terminating ``_{10}V_9`` data for the Frenkel--Turaev sum.

    Only ``t_0..t_3`` and ``n`` are free; ``t_4 = q^{-n}`` and
    ``t_5 = q t_0^2 / (t_1 t_2 t_3 t_4)`` are derived.
    """

    t0: complex
    t1: complex
    t2: complex
    t3: complex
    n: int
    bases: BasePair

    def __post_init__(self):
        for name in ("t0", "t1", "t2", "t3"):
            v = complex(getattr(self, name))
            if v == 0:
                raise DomainError(f"{name} must be nonzero")
            object.__setattr__(self, name, v)
        if int(self.n) < 0:
            raise DomainError("termination index n must be >= 0")
        object.__setattr__(self, "n", int(self.n))

    @property
    def t4(self) -> complex:
        return ipow(self.bases.q, -self.n)

    @property
    def t5(self) -> complex:
        q = self.bases.q
        return q * self.t0**2 / (self.t1 * self.t2 * self.t3) * ipow(q, self.n)

    @property
    def params(self) -> tuple:
        return (self.t0, self.t1, self.t2, self.t3, self.t4, self.t5)

    def closed_form_arguments(self) -> tuple[tuple, tuple]:
        """Numerator and denominator arguments of the closed form."""
        q, t0, t1, t2, t3 = self.bases.q, self.t0, self.t1, self.t2, self.t3
        num = (q * t0, q * t0 / (t1 * t2), q * t0 / (t1 * t3), q * t0 / (t2 * t3))
        den = (q * t0 / (t1 * t2 * t3), q * t0 / t3, q * t0 / t2, q * t0 / t1)
        return num, den

    def to_vseries(self) -> VSeriesSpec:
        return VSeriesSpec(self.params, self.bases, n_max=self.n)


def frenkel_turaev_sum(spec: FTSpec, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Left side: the terminating series summed directly."""
    return v_series_sum(spec.to_vseries(), spec.n, policy)


def frenkel_turaev_closed(spec: FTSpec, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Right side ``S_n(p)``: a ratio of eight elliptic Pochhammer symbols.

    The thetas are multiplied in reduced form, so large individual factors
    do not overflow when their ratio is moderate.
    """
    p, q, n = spec.bases.p, spec.bases.q, spec.n
    num, den = spec.closed_form_arguments()
    if n == 0:
        return 1.0 + 0j
    acc = _Split(p, policy)
    for i, x in enumerate(den):
        if acc.div(_powers(x, q, n)) >= 0:
            raise SingularTerm(n, f"denominator {i}")
    for x in num:
        if acc.mul(_powers(x, q, n)):
            return 0j
    return acc.value()


def _jackson_args(t0, t1, t2, t3, q, n):
    q = check_nome(q)
    t0, t1, t2, t3 = (complex(x) for x in (t0, t1, t2, t3))
    t4 = ipow(q, -n)
    t5 = q * t0**2 / (t1 * t2 * t3) * ipow(q, n)
    return q, (t0, t1, t2, t3, t4, t5)


def jackson_8w7(t0, t1, t2, t3, q, n: int) -> tuple[complex, complex]:
    """Both sides of Jackson's terminating ``_8W_7`` summation.

    ``t_4 = q^{-n}`` and ``t_5`` are derived from the balancing condition.
    The left side is accumulated through term ratios so that no q-shifted
    factorial of the large parameter ``q^{-n}`` is formed on its own.
    """
    n = int(n)
    if n < 0:
        raise DomainError("n must be >= 0")
    q, t = _jackson_args(t0, t1, t2, t3, q, n)
    t0 = t[0]
    w = [q * t0 / tm for tm in t]
    term = 1.0 + 0j
    lhs = term
    qk = 1.0 + 0j
    for k in range(n):
        r = (1 - t0 * qk * qk * q * q) / (1 - t0 * qk * qk) * q
        for tm, wm in zip(t, w):
            den = 1 - wm * qk
            if abs(den) <= 1e-14:
                raise SingularTerm(k + 1, "(q t_0 / t_m; q)_k")
            r *= (1 - tm * qk) / den
        term *= r
        if abs(term) == 0:
            break
        lhs += term
        qk *= q
    num = (q * t0, q * t0 / (t1 * t2), q * t0 / (t1 * t3), q * t0 / (t2 * t3))
    den = (q * t0 / (t1 * t2 * t3), q * t0 / t3, q * t0 / t2, q * t0 / t1)
    rhs = 1.0 + 0j
    for x in num:
        rhs *= qpoch(x, q, n)
    for i, x in enumerate(den):
        d = qpoch(x, q, n)
        if d == 0:
            raise SingularTerm(n, f"denominator {i}")
        rhs /= d
    return complex(lhs), complex(rhs)


def _w65_check(t0, t1, t2, t3, q):
    q = check_nome(q)
    t0, t1, t2, t3 = (complex(x) for x in (t0, t1, t2, t3))
    arg = q * t0 / (t1 * t2 * t3)
    if not abs(arg) < 1:
        raise NonConvergent(f"infinite 6W5 series needs |q t0/(t1 t2 t3)| < 1, got {abs(arg):.6g}")
    return q, t0, t1, t2, t3, arg


def w6_5_product(t0, t1, t2, t3, q, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """Infinite-product evaluation of the nonterminating ``_6W_5`` series."""
    q, t0, t1, t2, t3, arg = _w65_check(t0, t1, t2, t3, q)
    num = (q * t0, q * t0 / (t1 * t2), q * t0 / (t1 * t3), q * t0 / (t2 * t3))
    den = (arg, q * t0 / t3, q * t0 / t2, q * t0 / t1)
    val = 1.0 + 0j
    for x in num:
        val *= qpoch_inf(x, q, policy)
    for x in den:
        d = qpoch_inf(x, q, policy)
        if d == 0:
            raise DomainError("vanishing q-product in the 6W5 denominator")
        val /= d
    return val


def w6_5_series(t0, t1, t2, t3, q, policy: TruncationPolicy = DEFAULT_POLICY) -> complex:
    """The ``_6W_5`` series summed term by term until the tail is below ``policy.tol``."""
    q, t0, t1, t2, t3, arg = _w65_check(t0, t1, t2, t3, q)
    t = (t0, t1, t2, t3)
    w = [q * t0 / tm for tm in t]
    term = 1.0 + 0j
    total = term
    qk = 1.0 + 0j
    small = 0
    for k in range(policy.max_terms):
        r = (1 - t0 * qk * qk * q * q) / (1 - t0 * qk * qk) * arg
        for tm, wm in zip(t, w):
            r *= (1 - tm * qk) / (1 - wm * qk)
        term *= r
        total += term
        qk *= q
        # the ratio tends to arg, so a short run of tiny terms bounds the tail
        small = small + 1 if abs(term) < policy.tol * abs(total) * (1 - abs(arg)) else 0
        if small >= 3 or term == 0:
            return total
    raise NonConvergent("6W5 series budget exhausted")
