"""Infinite q-products, theta functions and the elliptic gamma function.

All functions accept Python scalars or numpy arrays for the main argument and
return the same kind.  Nomes are always scalars.  Infinite products are cut off
with the bound ``|log(1 - w)| <= |w| / (1 - |w|)`` summed over the tail, so the
relative truncation error of every product is below ``policy.tol``.
"""

from __future__ import annotations

import cmath
import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, NearSingular, NonConvergent

#: factors ``1 - w`` smaller than this are snapped to an exact zero
ZERO_SNAP = 64 * np.finfo(float).eps


@dataclass(frozen=True)
class TruncationPolicy:
    tol: float = 1e-13
    max_terms: int = 10_000

    def __post_init__(self):
        if not (0 < self.tol < 1):
            raise ValueError("tol must lie in (0, 1)")
        if self.max_terms < 1:
            raise ValueError("max_terms must be >= 1")


DEFAULT_POLICY = TruncationPolicy()


def check_nome(p, allow_zero: bool = False) -> complex:
    p = complex(p)
    if not (cmath.isfinite(p) and abs(p) < 1):
        raise DomainError(f"nome must satisfy |p| < 1, got {p!r}")
    if p == 0 and not allow_zero:
        raise DomainError("nome p = 0 is only admitted for theta and q-Pochhammer symbols")
    return p


@dataclass(frozen=True)
class BasePair:
    """The elliptic nome ``p`` and the base ``q``."""

    p: complex
    q: complex

    def __post_init__(self):
        object.__setattr__(self, "p", check_nome(self.p, allow_zero=True))
        object.__setattr__(self, "q", check_nome(self.q))

    def swapped(self) -> "BasePair":
        return BasePair(self.q, self.p)


def ipow(x, n: int):
    """Integer power by repeated squaring (no branch choice involved)."""
    n = int(n)
    if n < 0:
        return 1 / ipow(x, -n)
    result = 1.0 + 0j if np.isscalar(x) else np.ones_like(x, dtype=complex)
    base = x
    while n:
        if n & 1:
            result = result * base
        base = base * base
        n >>= 1
    return result


def _as_array(z):
    scalar = np.isscalar(z)
    return np.asarray(z, dtype=complex), scalar


def _out(arr, scalar):
    if scalar:
        arr = np.asarray(arr)
        return complex(arr.reshape(()) if arr.ndim == 0 else arr.reshape(-1)[0])
    return arr


def _finite(arr, what):
    if not np.all(np.isfinite(arr)):
        raise DomainError(f"{what}: result overflowed")
    return arr


def _tail_cutoff(zmax: float, ap: float, policy: TruncationPolicy) -> int:
    """Number of factors of prod_k (1 - z p^k) needed for the relative tolerance."""
    if ap == 0:
        return 1
    k = 0
    w = zmax
    while True:
        if w < 1:
            bound = w / ((1 - ap) * (1 - w))
            if bound < policy.tol:
                return max(k, 1)
        k += 1
        w *= ap
        if k > policy.max_terms:
            raise NonConvergent(
                f"q-product needs more than {policy.max_terms} factors (|z|={zmax:.3g}, |p|={ap:.3g})"
            )


def qpoch_inf(z, p, policy: TruncationPolicy = DEFAULT_POLICY, guard: float | None = None):
    """The infinite product ``(z; p)_inf = prod_{k>=0} (1 - z p^k)``.

    With ``guard`` set, a factor closer than ``guard`` to zero raises
    :class:`NearSingular`; otherwise factors within :data:`ZERO_SNAP` of zero
    are replaced by an exact zero.
    """
    p = check_nome(p, allow_zero=True)
    arr, scalar = _as_array(z)
    if arr.size == 0:
        return arr
    kmax = _tail_cutoff(float(np.max(np.abs(arr))), abs(p), policy)
    result = np.ones_like(arr)
    w = arr.copy()
    for _ in range(kmax):
        f = 1 - w
        small = np.abs(f) <= (guard if guard is not None else ZERO_SNAP)
        if np.any(small):
            if guard is not None:
                raise NearSingular(f"factor 1 - z p^k within {guard:.1e} of zero")
            f = np.where(small, 0, f)
        result *= f
        w = w * p
    return _out(_finite(result, "qpoch_inf"), scalar)


def qpoch(z, q, n: int):
    """Finite q-shifted factorial ``(z; q)_n``."""
    n = int(n)
    if n < 0:
        raise DomainError("qpoch needs n >= 0")
    arr, scalar = _as_array(z)
    result = np.ones_like(arr)
    w = arr.copy()
    for _ in range(n):
        f = 1 - w
        result *= np.where(np.abs(f) <= ZERO_SNAP, 0, f)
        w = w * q
    return _out(_finite(result, "qpoch"), scalar)


def _unit(x):
    return x / np.abs(x)


def _ipow_each(base, n):
    """Elementwise integer powers ``base ** n`` for an integer array ``n`` (binary exponentiation)."""
    n = np.asarray(n, dtype=np.int64)
    base = np.broadcast_to(np.asarray(base, dtype=complex), n.shape)
    neg = n < 0
    e = np.abs(n)
    b = np.where(neg, 1 / base, base)
    out = np.ones(n.shape, dtype=complex)
    while np.any(e):
        odd = (e & 1).astype(bool)
        out = np.where(odd, out * b, out)
        b = b * b
        e >>= 1
    return out


def theta_split(a, p, policy: TruncationPolicy = DEFAULT_POLICY):
    """``theta(a; p)`` as ``(mantissa, log_modulus, scale)`` with value ``mantissa * exp(log_modulus)``.

    The argument is reduced into ``|p| < |a'| <= 1`` by quasi-periodicity, so
    the mantissa is a theta value of moderate size even when ``theta(a; p)``
    itself would overflow.  ``scale`` is the reduced magnitude bound used for
    zero tests.
    """
    p = check_nome(p)
    arr = np.asarray(a, dtype=complex)
    scalar = arr.ndim == 0
    arr = np.atleast_1d(arr)
    if np.any(arr == 0):
        raise DomainError("theta(a; p) needs a != 0")
    lp = math.log(abs(p))
    m = np.floor(np.log(np.abs(arr)) / lp).astype(np.int64)
    red = arr / _ipow_each(p, m)
    over = np.abs(red) > 1
    m = np.where(over, m + 1, m)
    red = np.where(over, red / p, red)
    under = np.abs(red) <= abs(p)
    m = np.where(under, m - 1, m)
    red = np.where(under, red * p, red)
    th = qpoch_inf(red, p, policy) * qpoch_inf(p / red, p, policy)
    scale = theta_scale(red, p, policy)
    tri = (m * (m - 1)) // 2
    log_mod = -m * np.log(np.abs(red)) - tri * lp
    phase = _ipow_each(_unit(-red), -m) * _ipow_each(_unit(complex(p)), -tri)
    mant = th * phase
    if scalar:
        return complex(mant[0]), float(log_mod[0]), float(scale[0])
    return mant, log_mod, scale


def theta(a, p, policy: TruncationPolicy = DEFAULT_POLICY):
    """``theta(a; p) = (a; p)_inf (p/a; p)_inf``; ``p = 0`` gives ``1 - a``."""
    p = check_nome(p, allow_zero=True)
    arr, scalar = _as_array(a)
    if np.any(arr == 0):
        raise DomainError("theta(a; p) needs a != 0")
    if p == 0:
        f = 1 - arr
        return _out(np.where(np.abs(f) <= ZERO_SNAP, 0, f), scalar)
    absa = np.abs(arr)
    if np.all((absa > abs(p)) & (absa <= 1)):
        val = qpoch_inf(arr, p, policy) * qpoch_inf(p / arr, p, policy)
    else:
        mant, log_mod, _ = theta_split(arr.reshape(-1), p, policy)
        with np.errstate(over="ignore", under="ignore"):
            val = (mant * np.exp(log_mod)).reshape(arr.shape)
    return _out(_finite(val, "theta"), scalar)


def theta_scale(a, p, policy: TruncationPolicy = DEFAULT_POLICY):
    """Upper bound ``prod (1 + |a p^k|)(1 + |p^{k+1}/a|)`` for ``|theta(a; p)|``.

    Used as the reference magnitude when deciding whether a theta value is a
    rounding-level zero.
    """
    p = check_nome(p, allow_zero=True)
    av = np.abs(np.asarray(a, dtype=complex))
    if p == 0:
        val = 1 + av
    else:
        ap = abs(p)
        val = (qpoch_inf(-av, ap, policy) * qpoch_inf(-ap / av, ap, policy)).real
    return float(val) if np.isscalar(a) else val


def log_abs_theta(a, p, policy: TruncationPolicy = DEFAULT_POLICY):
    """``log|theta(a; p)|``, finite where the theta value itself would overflow or underflow."""
    mant, log_mod, _ = theta_split(a, p, policy)
    with np.errstate(divide="ignore"):
        return np.log(np.abs(mant)) + log_mod


def theta_quasi_period(t, p, j: int):
    """Multiplier ``(-t)^{-j} p^{-j(j-1)/2}`` with ``theta(t p^j) = multiplier * theta(t)``."""
    p = check_nome(p)
    arr, scalar = _as_array(t)
    if np.any(arr == 0):
        raise DomainError("quasi-period multiplier needs t != 0")
    j = int(j)
    val = ipow(-arr, -j) * ipow(p, -(j * (j - 1)) // 2)
    return _out(val, scalar)


def elliptic_pochhammer(a, p, q, k: int, policy: TruncationPolicy = DEFAULT_POLICY):
    """``theta(a; p; q)_k = prod_{j<k} theta(a q^j; p)``."""
    k = int(k)
    if k < 0:
        raise DomainError("elliptic Pochhammer symbol needs k >= 0")
    if k == 0:
        return 1.0 + 0j if np.isscalar(a) else np.ones_like(np.asarray(a, dtype=complex))
    q = complex(q)
    powers = np.cumprod(np.concatenate(([1.0 + 0j], np.full(k - 1, q))))
    if np.isscalar(a):
        return complex(np.prod(theta(complex(a) * powers, p, policy)))
    arr = np.asarray(a, dtype=complex)
    vals = theta(arr[..., None] * powers, p, policy)
    return np.prod(vals, axis=-1)


def elliptic_gamma(z, p, q, policy: TruncationPolicy = DEFAULT_POLICY, guard: float = 1e-8):
    """Elliptic gamma function ``prod_{j,k} (1 - p^{j+1} q^{k+1}/z) / (1 - z p^j q^k)``.

    Evaluated row by row as ``prod_j (p^{j+1} q / z; q)_inf / (z p^j; q)_inf``.
    Raises :class:`NearSingular` within relative distance ``guard`` of a pole
    ``p^{-j} q^{-k}`` or a zero ``p^{j+1} q^{k+1}``.
    """
    p = check_nome(p)
    q = check_nome(q)
    arr, scalar = _as_array(z)
    if np.any(arr == 0):
        raise DomainError("elliptic gamma needs z != 0")
    ap, aq = abs(p), abs(q)
    zmax = float(np.max(np.abs(arr)))
    zinv = float(np.max(np.abs(p * q / arr)))
    result = np.ones_like(arr)
    num = p * q / arr
    den = arr.copy()
    j = 0
    while True:
        w = (zmax + zinv) * ap**j
        if w < 1 and w / ((1 - ap) * (1 - aq) * (1 - w)) < policy.tol:
            break
        if j > policy.max_terms:
            raise NonConvergent("elliptic gamma row budget exhausted")
        result *= qpoch_inf(num, q, policy, guard=guard) / qpoch_inf(den, q, policy, guard=guard)
        num = num * p
        den = den * p
        j += 1
    return _out(_finite(result, "elliptic_gamma"), scalar)


def _poch_split(x, p, q, n: int, policy):
    """``theta(x; p; q)_n`` as ``(phase, log_modulus)``; ``phase == 0`` flags an exact zero."""
    if n == 0:
        return 1.0 + 0j, 0.0
    args = complex(x) * _ipow_each(q, np.arange(n))
    mant, log_mod, _ = theta_split(args, p, policy)
    if np.any(mant == 0):
        return 0j, 0.0
    prod = complex(np.prod(_unit(mant)))
    return prod, float(np.sum(np.log(np.abs(mant)) + log_mod))


def _monomial_split(base, n: int):
    """``base ** n`` as ``(phase, log_modulus)`` for a nonzero ``base``."""
    base = complex(base)
    return complex(_ipow_each(_unit(base), np.int64(n))), n * math.log(abs(base))


def gamma_shift_pos_split(t, p, q, j: int, k: int, policy: TruncationPolicy = DEFAULT_POLICY):
    """:func:`gamma_shift_pos` as ``(phase, log_modulus)``; finite where the multiplier over- or underflows."""
    j, k = int(j), int(k)
    if j < 0 or k < 0:
        raise DomainError("gamma_shift_pos needs j, k >= 0")
    t = complex(t)
    if t == 0:
        raise DomainError("gamma shift needs t != 0")
    ph1, lm1 = _poch_split(t, p, q, k, policy)
    ph2, lm2 = _poch_split(t, q, p, j, policy)
    if ph1 == 0 or ph2 == 0:
        raise DomainError("vanishing theta factor in gamma_shift_pos")
    parts = [_monomial_split(-t, j * k)]
    if j * (k * (k - 1) // 2):
        parts.append(_monomial_split(q, j * (k * (k - 1) // 2)))
    if k * (j * (j - 1) // 2):
        parts.append(_monomial_split(p, k * (j * (j - 1) // 2)))
    phase, log_mod = ph1 * ph2, lm1 + lm2
    for ph, lm in parts:
        phase, log_mod = phase / ph, log_mod - lm
    return phase, log_mod


def gamma_shift_neg_split(t, p, q, j: int, k: int, policy: TruncationPolicy = DEFAULT_POLICY):
    """:func:`gamma_shift_neg` as ``(phase, log_modulus)``."""
    j, k = int(j), int(k)
    if j < 0 or k < 0:
        raise DomainError("gamma_shift_neg needs j, k >= 0")
    t = complex(t)
    if t == 0:
        raise DomainError("gamma shift needs t != 0")
    ph1, lm1 = _poch_split(q / t, p, q, k, policy)
    ph2, lm2 = _poch_split(p / t, q, p, j, policy)
    if ph1 == 0 or ph2 == 0:
        raise DomainError("vanishing theta factor in gamma_shift_neg")
    parts = [_monomial_split(-t, -(j * k) - j - k)]
    if k:
        parts.append(_monomial_split(q, (j + 1) * (k * (k + 1) // 2)))
    if j:
        parts.append(_monomial_split(p, (k + 1) * (j * (j + 1) // 2)))
    phase, log_mod = 1 / (ph1 * ph2), -(lm1 + lm2)
    for ph, lm in parts:
        phase, log_mod = phase * ph, log_mod + lm
    return phase, log_mod


def _join(split) -> complex:
    phase, log_mod = split
    with np.errstate(over="ignore", under="ignore"):
        return complex(phase * np.exp(log_mod))


def gamma_shift_pos(t, p, q, j: int, k: int, policy: TruncationPolicy = DEFAULT_POLICY):
    """Multiplier ``M`` with ``Gamma(t p^j q^k) = M * Gamma(t)`` for ``j, k >= 0``."""
    return _join(gamma_shift_pos_split(t, p, q, j, k, policy))


def gamma_shift_neg(t, p, q, j: int, k: int, policy: TruncationPolicy = DEFAULT_POLICY):
    """Multiplier ``M`` with ``Gamma(t p^{-j} q^{-k}) = M * Gamma(t)`` for ``j, k >= 0``.

    The formula is regular at ``t = 1``, where it gives the limit of
    ``Gamma(eps p^{-j} q^{-k}) / Gamma(eps)`` as ``eps -> 1``.
    """
    return _join(gamma_shift_neg_split(t, p, q, j, k, policy))


def re_dilog_unit(theta_arg: float) -> float:
    """``Re Li2(e^{i theta}) = theta^2/4 - pi theta/2 + pi^2/6`` on ``[0, 2 pi]``."""
    th = float(theta_arg)
    if not (0.0 <= th <= 2 * math.pi):
        th = th % (2 * math.pi)
    return th * th / 4 - math.pi * th / 2 + math.pi**2 / 6


def _clausen2(th: float, nterms: int = 1 << 22) -> float:
    # Im Li2(e^{i th}) = sum sin(n th) / n^2; the tail after N terms is O(1/(N^2 sin(th/2)))
    total = 0.0
    chunk = 1 << 18
    for start in range(1, nterms + 1, chunk):
        n = np.arange(start, min(start + chunk, nterms + 1), dtype=float)
        total += float(np.sum(np.sin(n * th) / (n * n)))
    return total


def dilog(x, policy: TruncationPolicy = TruncationPolicy(tol=1e-15, max_terms=10_000_000)) -> complex:
    """Euler dilogarithm ``Li2(x) = sum_{n>=1} x^n / n^2`` on the closed unit disc."""
    x = complex(x)
    ax = abs(x)
    if ax > 1 + 1e-14:
        raise DomainError(f"dilog series needs |x| <= 1, got |x|={ax:.6g}")
    if x == 0:
        return 0j
    if abs(ax - 1) <= 1e-14:
        th = cmath.phase(x) % (2 * math.pi)
        return complex(re_dilog_unit(th), _clausen2(th))
    # smallest N with |x|^{N+1} / ((N+1)^2 (1 - |x|)) < tol
    total = 0j
    chunk = 1 << 16
    start = 1
    while True:
        n = np.arange(start, start + chunk, dtype=float)
        total += complex(np.sum(np.exp(n * cmath.log(x)) / (n * n)))
        last = start + chunk - 1
        if ax ** (last + 1) / ((last + 1) ** 2 * (1 - ax)) < policy.tol:
            return total
        start += chunk
        if start > policy.max_terms:
            raise NonConvergent(f"dilog series budget exhausted at |x|={ax:.6g}")
