"""Radius of convergence of elliptic hypergeometric series for ``q`` on a lattice line.

The base is ``q = eps * exp(2 pi i chi (N + M tau))`` with ``eps = exp(2 pi i L/K)``
and nome ``p = exp(2 pi i tau)``.  A parameter ``t`` enters only through

    phi(t) = Re((N + M tau) log conj(t)) / (2 pi Im tau),

and every radius formula is a sum of ``g(x) = x (x - 1)`` over fractional
parts of such coordinates, with prefactor ``kappa = pi Im tau / |N + M tau|^2``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DegenerateLine, DomainError, OnCriticalLine, RationalDetected, SingularPoint
from .kernels import DEFAULT_POLICY, TruncationPolicy, log_abs_theta, re_dilog_unit
from .series import VSeriesSpec

CRITICAL_TOL = 1e-9
SUM_TOL = 1e-10


def frac(x):
    """Fractional part ``x - floor(x)`` in ``[0, 1)``."""
    if np.isscalar(x):
        return float(x - math.floor(x))
    x = np.asarray(x, dtype=float)
    return x - np.floor(x)


def _g(x):
    return x * (x - 1)


@dataclass(frozen=True)
class QLine:
    """Lattice-line data for the base ``q``.

    ``Q`` is the integer in ``sigma = chi (N + M tau) + L/K - Q``; it only
    matters for the inverse line.
    """

    tau: complex
    chi: float
    N: int = 0
    M: int = 1
    K: int = 1
    L: int = 0
    Q: int = 1

    def __post_init__(self):
        object.__setattr__(self, "tau", complex(self.tau))
        object.__setattr__(self, "chi", float(self.chi))
        for name in ("N", "M", "K", "L", "Q"):
            object.__setattr__(self, name, int(getattr(self, name)))
        if not self.tau.imag > 0:
            raise DomainError("line needs Im tau > 0")
        if (self.N, self.M) == (0, 0):
            raise DomainError("(N, M) must not be (0, 0)")
        if self.M < 0:
            raise DomainError("M must be >= 0")
        if math.gcd(self.N, self.M) != 1:
            raise DomainError("N and M must be coprime")
        if self.K < 1 or math.gcd(self.L, self.K) != 1:
            raise DomainError("need K >= 1 and gcd(L, K) = 1")
        if not 0 < self.chi < 1:
            raise DomainError("chi must lie in (0, 1)")

    @property
    def omega(self) -> complex:
        """``N + M tau``."""
        return self.N + self.M * self.tau

    @property
    def p(self) -> complex:
        return cmath.exp(2j * math.pi * self.tau)

    @property
    def eps(self) -> complex:
        return cmath.exp(2j * math.pi * self.L / self.K)

    @property
    def q0(self) -> complex:
        """``exp(2 pi i chi (N + M tau))``, the base without the root of unity."""
        return cmath.exp(2j * math.pi * self.chi * self.omega)

    @property
    def q(self) -> complex:
        return self.eps * self.q0

    @property
    def sigma(self) -> complex:
        return self.chi * self.omega + self.L / self.K - self.Q

    @property
    def kappa(self) -> float:
        return math.pi * self.tau.imag / abs(self.omega) ** 2

    def q_power(self, k):
        """``q^k`` reduced modulo integer powers of ``p``.

        Exact in the sense that the discarded factor is ``p^m`` for integer
        ``m``; any ``p``-elliptic function takes the same value.
        """
        k = np.asarray(k, dtype=np.int64)
        root = np.exp(2j * np.pi * ((k * self.L) % self.K) / self.K)
        # exact integer arithmetic for k * chi is not available; frac(k chi) keeps the exponent bounded
        return root * np.exp(2j * np.pi * frac(k * self.chi) * self.omega)

    def as_dict(self) -> dict:
        return dict(tau=self.tau, chi=self.chi, N=self.N, M=self.M, K=self.K, L=self.L, Q=self.Q)


def phi_of(t, line: QLine) -> tuple[float, float]:
    """Coordinates ``(h, phi)`` with ``t = q0^h exp(phi 2 pi Im tau / (N + M conj(tau)))``.

    ``q0^h`` means ``exp(2 pi i chi (N + M tau) h)``.
    """
    t = complex(t)
    if t == 0:
        raise DomainError("phi_of needs t != 0")
    w = line.omega
    lt = cmath.log(t.conjugate())
    phi = (w * lt).real / (2 * math.pi * line.tau.imag)
    h = -(w * lt).imag / (2 * math.pi * line.chi * abs(w) ** 2)
    return h, phi


def from_phi(h, phi, line: QLine) -> complex:
    """Inverse of :func:`phi_of`."""
    w = line.omega
    return cmath.exp(2j * math.pi * line.chi * w * h) * cmath.exp(
        phi * 2 * math.pi * line.tau.imag / w.conjugate()
    )


@dataclass(frozen=True)
class PhiCoords:
    h: tuple
    phi: tuple

    @classmethod
    def of(cls, ts, line: QLine) -> "PhiCoords":
        pairs = [phi_of(t, line) for t in ts]
        return cls(tuple(h for h, _ in pairs), tuple(f for _, f in pairs))

    def reconstruct(self, line: QLine) -> list[complex]:
        return [from_phi(h, f, line) for h, f in zip(self.h, self.phi)]


@dataclass(frozen=True)
class XiCoords:
    """Coordinates ``(f, xi)`` of parameters relative to the inverse line."""

    f: tuple
    xi: tuple

    @classmethod
    def of(cls, ts, line: QLine) -> "XiCoords":
        inv = line_invert(line).line
        pairs = [phi_of(t, inv) for t in ts]
        return cls(tuple(h for h, _ in pairs), tuple(x for _, x in pairs))

    def reconstruct(self, line: QLine) -> list[complex]:
        inv = line_invert(line).line
        return [from_phi(f, x, inv) for f, x in zip(self.f, self.xi)]


def mu_forms(t, N: int, M: int, tau) -> tuple[complex, complex]:
    """The two equal expressions for the unimodular ``mu``."""
    t, tau = complex(t), complex(tau)
    if M <= 0:
        raise DomainError("mu needs M > 0")
    lt = math.log(abs(t))
    first = t / abs(t) * cmath.exp(1j * (N + M * tau.real) * lt / (M * tau.imag))
    second = cmath.exp(1j * ((N + M * tau) * cmath.log(t.conjugate())).real / (M * tau.imag))
    return first, second


def f_integral_closed(t, K: int, N: int, M: int, tau) -> float:
    """Closed form of ``int_0^1 log|theta(t exp(2 pi i x K (N + M tau)); p)| dx``.

    ``Re Li2(mu^M)`` is evaluated through the Bernoulli polynomial, with
    ``arg mu^M = 2 pi frac(phi(t))``.
    """
    t, tau = complex(t), complex(tau)
    if t == 0:
        raise DomainError("F integral needs t != 0")
    if K < 1 or M < 0:
        raise DomainError("need K >= 1 and M >= 0")
    w = N + M * tau
    phi = (w * cmath.log(t.conjugate())).real / (2 * math.pi * tau.imag)
    x = frac(phi)
    if min(x, 1 - x) < CRITICAL_TOL:
        raise OnCriticalLine(0, x)
    lt = math.log(abs(t))
    km = K * M
    return (
        lt * lt / (4 * math.pi * tau.imag)
        - (km - 1) * lt / 2
        + (km - 1) * (2 * km - 1) * math.pi * tau.imag / 6
        - tau.imag / (math.pi * abs(w) ** 2) * re_dilog_unit(2 * math.pi * x)
    )


def f_integral_quadrature(t, K: int, N: int, M: int, tau, policy: TruncationPolicy = DEFAULT_POLICY) -> float:
    """Direct adaptive quadrature of the defining integral (independent oracle)."""
    from scipy.integrate import quad

    t, tau = complex(t), complex(tau)
    p = cmath.exp(2j * math.pi * tau)
    step = 2j * math.pi * K * (N + M * tau)

    def f(x):
        return float(log_abs_theta(t * cmath.exp(step * x), p, policy))

    val, _ = quad(f, 0.0, 1.0, limit=400, epsabs=1e-12, epsrel=1e-12)
    return val


@dataclass
class RadiusReport:
    """``log_rc_inv = kappa * weight * sum(contributions)``.

    ``contributions[j, k] = g(alpha_k^(j)) - g(beta_k^(j))``; ``weight`` is
    ``1/K`` from averaging over the ``K`` shells of the base.
    """

    log_rc_inv: float
    contributions: np.ndarray
    kappa: float
    weight: float = 1.0
    extra: dict = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "log_rc_inv": self.log_rc_inv,
            "r_c": math.exp(-self.log_rc_inv),
            "kappa": self.kappa,
            "weight": self.weight,
            "contributions": self.contributions.tolist(),
            **self.extra,
        }


def _report(alpha, beta, kappa, K, extra=None) -> RadiusReport:
    contrib = _g(alpha) - _g(beta)
    return RadiusReport(float(kappa * np.sum(contrib) / K), contrib, kappa, 1.0 / K, extra or {})


def _check_critical(values, exempt=()):
    for k, v in enumerate(values):
        if k in exempt:
            continue
        x = frac(v)
        if min(x, 1 - x) < CRITICAL_TOL:
            raise OnCriticalLine(k, x)


def log_rc_phi(phi, phi_tilde, line: QLine, check: bool = True) -> RadiusReport:
    """Radius from coordinates: ``sum_j sum_k g({LMj/K + phi~_k}) - g({LMj/K + phi_k})`` over ``K`` shells."""
    phi = np.asarray(phi, dtype=float)
    phi_tilde = np.asarray(phi_tilde, dtype=float)
    if phi.shape != phi_tilde.shape:
        raise DomainError("phi and phi_tilde must have equal length")
    if check:
        _check_critical(phi)
        _check_critical(phi_tilde, exempt=(0,))
    off = (line.L * line.M / line.K) * np.arange(line.K)[:, None]
    return _report(frac(off + phi_tilde), frac(off + phi), line.kappa, line.K)


def log_rc_general(t, w, line: QLine) -> RadiusReport:
    """``log r_c^{-1}`` for a series with numerator parameters ``t_k`` and denominator parameters ``w_k``.

    ``w[0] = q`` is allowed to sit on the line (its coordinate is zero); every
    other parameter raises :class:`OnCriticalLine` if its fractional
    coordinate is within :data:`CRITICAL_TOL` of an integer.
    """
    t = [complex(x) for x in t]
    w = [complex(x) for x in w]
    if len(t) != len(w):
        raise DomainError("t and w must have equal length")
    beta = np.array([phi_of(x, line)[1] for x in t])
    alpha = np.array([phi_of(x, line)[1] for x in w])
    exempt = (0,) if w and abs(w[0] / line.q - 1) < 1e-12 else ()
    if exempt:
        alpha[0] = 0.0
    _check_critical(beta)
    _check_critical(alpha, exempt=exempt)
    return log_rc_phi(beta, alpha, line, check=False)


def _check_sum(vals, modulus: int, what: str):
    s = float(np.sum(vals)) * modulus
    if abs(s - round(s)) > SUM_TOL * max(1, modulus):
        raise DomainError(f"{what} must be a multiple of 1/{modulus} (got sum {np.sum(vals):.12g})")


def _six(vals, a, line: QLine, shell_sign: float, check_multiple: int) -> RadiusReport:
    vals = np.asarray(vals, dtype=float)
    if vals.shape != (6,):
        raise DomainError("six coordinates are required")
    if not 1 <= a <= 6:
        raise DomainError("family index a must lie in 1..6")
    _check_sum(vals, check_multiple, "sum of coordinates")
    off = shell_sign * (line.L * line.M / line.K) * np.arange(line.K)[:, None]
    va = vals[a - 1]
    x = frac(off + va - vals)
    y = frac(off + va + vals)
    return _report(x, y, line.kappa, line.K, {"a": a})


def log_rc_six_q(phi, line: QLine, a: int) -> RadiusReport:
    """``-log r_{c,q}^{(a)}`` for the six base-``q`` series of the residue sum.

    Requires ``K * sum(phi)`` to be an integer; for ``K = 1`` this is
    equivalent to ``sum(phi) = 0`` because only fractional parts enter.
    """
    return _six(phi, a, line, 1.0, line.K)


@dataclass(frozen=True)
class InverseLine:
    """Data expressing ``p`` through ``q``: ``p = q^S * omega * exp(2 pi i eta (sigma + Q))``."""

    S: int
    eta: float
    omega: complex
    line: QLine

    def as_dict(self) -> dict:
        return {"S": self.S, "eta": self.eta, "omega": self.omega, "line": self.line.as_dict()}


def line_invert(line: QLine) -> InverseLine:
    """Swap the roles of ``p`` and ``q``.

    With ``1/(M chi) = S + eta`` the new line has ``tau' = sigma``,
    ``(N', M', L', K') = (Q, 1, -N, M)`` and ``chi' = eta``; its base equals
    ``p q^{-S}``.  Only lines with ``K = 1`` are invertible here.
    """
    if line.K != 1:
        raise DegenerateLine("inversion is implemented for K = 1 lines only")
    if line.M == 0 or line.chi == 0:
        raise DegenerateLine("inversion needs M chi != 0")
    if line.Q <= 0:
        raise DegenerateLine("inversion needs Q > 0")
    x = 1.0 / (line.M * line.chi)
    S = math.floor(x)
    eta = x - S
    if eta < 1e-12:
        raise DegenerateLine("1/(M chi) is an integer, eta = 0")
    omega = cmath.exp(-2j * math.pi * line.N / line.M)
    L_new = -line.N
    K_new = line.M
    if K_new == 1:
        L_new = 0
    inv = QLine(tau=line.sigma, chi=eta, N=line.Q, M=1, K=K_new, L=L_new, Q=1)
    return InverseLine(S, eta, omega, inv)


def log_rc_six_p(xi, line: QLine, a: int) -> RadiusReport:
    """``-log r_{c,p}^{(a)}`` for the six base-``p`` series; ``line`` is the base-``q`` line.

    Equals :func:`log_rc_six_q` on the inverse line: prefactor
    ``pi Im sigma / |Q + sigma|^2``, shells offset by ``-N j / M`` for ``j < M``,
    weight ``1/M``.  Requires ``M * sum(xi)`` to be an integer.
    """
    inv = line_invert(line).line
    return _six(xi, a, inv, 1.0, inv.K)


def weyl_empirical(spec: VSeriesSpec, line: QLine, n: int, policy: TruncationPolicy = DEFAULT_POLICY):
    """Running averages ``(1/n') sum_{k<n'} log|H(q^k)|`` for ``n' = 1..n`` and the closed-form target.

    ``q^k`` is reduced modulo powers of ``p`` (``H`` is ``p``-elliptic).  The
    nome of ``spec`` must be the line's ``p`` and its base the line's ``q``.
    """
    if abs(spec.p - line.p) > 1e-12 * abs(line.p) or abs(spec.q - line.q) > 1e-10 * abs(line.q):
        raise DomainError("spec bases do not match the line")
    n = int(n)
    if n < 1:
        raise DomainError("n must be >= 1")
    u = line.q_power(np.arange(n))
    p, q, t0 = spec.p, spec.q, spec.t[0]
    terms = math.log(abs(q)) + log_abs_theta(t0 * q * q * u * u, p, policy) - log_abs_theta(t0 * u * u, p, policy)
    for tk, wk in zip(spec.t, spec.w):
        terms = terms + log_abs_theta(tk * u, p, policy) - log_abs_theta(wk * u, p, policy)
    bad = np.flatnonzero(~np.isfinite(terms))
    if bad.size:
        k = int(bad[0])
        raise SingularPoint(complex(u[k]), k)
    running = np.cumsum(terms) / np.arange(1, n + 1)
    target = log_rc_general(spec.t, spec.w, line)
    return running, target


@dataclass
class CFReport:
    """Continued-fraction convergents of ``chi`` and ``log(q_{k+1}) / q_k``.

    A finite-depth heuristic only: no statement about the limit superior is
    implied by the flag.
    """

    partial_quotients: list
    convergents: list
    ratios: list
    max_ratio: float
    threshold: float
    flagged: bool
    precision_exhausted: bool

    def rows(self):
        return [(p, q, r) for (p, q), r in zip(self.convergents, self.ratios)]

    def as_dict(self) -> dict:
        return {
            "partial_quotients": self.partial_quotients,
            "convergents": self.convergents,
            "ratios": self.ratios,
            "max_ratio": self.max_ratio,
            "threshold": self.threshold,
            "flagged": self.flagged,
            "precision_exhausted": self.precision_exhausted,
            "note": "finite-depth heuristic; not a verification of the limsup condition",
        }


def cf_diagnostic(chi: float, depth: int = 40, threshold: float = 1.0, rational_tol: float = 1e-9) -> CFReport:
    """Expand ``chi`` and report ``(p_k, q_k, log q_{k+1} / q_k)``.

    Expansion stops early once double precision is exhausted, i.e. when
    ``eps * q_k^2`` exceeds ``1e-3``.  A remainder below ``rational_tol``
    before that point raises :class:`RationalDetected`.
    """
    chi = float(chi)
    if not 0 < chi < 1:
        raise DomainError("chi must lie in (0, 1)")
    eps = np.finfo(float).eps
    x = chi
    quotients = [0]
    p_prev, p_cur = 1, 0
    q_prev, q_cur = 0, 1
    convergents = [(0, 1)]
    exhausted = False
    for k in range(1, depth + 1):
        if eps * float(q_cur) ** 2 > 1e-3:
            exhausted = True
            break
        if x < rational_tol:
            raise RationalDetected(k - 1)
        y = 1.0 / x
        a = math.floor(y)
        x = y - a
        quotients.append(a)
        p_prev, p_cur = p_cur, a * p_cur + p_prev
        q_prev, q_cur = q_cur, a * q_cur + q_prev
        convergents.append((p_cur, q_cur))
        if x < rational_tol and eps * float(q_cur) ** 2 <= 1e-3:
            raise RationalDetected(k)
    ratios = [math.log(convergents[i + 1][1]) / convergents[i][1] for i in range(len(convergents) - 1)]
    mx = max(ratios) if ratios else 0.0
    # the first ratio log(q_1)/q_0 = log(a_1) only reflects the size of chi
    tail = ratios[1:]
    flagged = bool(tail) and max(tail) > threshold
    return CFReport(quotients, convergents[:-1], ratios, mx, threshold, flagged, exhausted)


def wp_parametrization(r: int, lam: float, strict: bool = True) -> tuple[list, list]:
    """Coordinates ``phi_1..phi_r`` and ``phi~_1..phi~_r`` of the special convergent choice.

    ``eps = (k+1)/(r/2 + lam)`` with ``k = floor((r-2)/2)``.  The admissible
    range is ``0 < 2 lam < 1 - 2/r``; ``strict=False`` also admits the closed
    endpoints.
    """
    r = int(r)
    if r <= 2:
        raise DomainError("need r > 2")
    hi = 1 - 2 / r
    ok = 0 < 2 * lam < hi if strict else 0 <= 2 * lam <= hi
    if not ok:
        raise DomainError(f"lambda={lam} outside 0 < 2 lambda < {hi:.6g}")
    k = (r - 2) // 2
    e = (k + 1) / (r / 2 + lam)
    phi = [1 + e * r / 2] + [1 - e] * (r - 1)
    phi_t = [1 - e * (1 - 2 / r + r / 2)] + [1 + 2 * e / r] * (r - 1)
    return phi, phi_t
