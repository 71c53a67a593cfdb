"""Large-``n`` behaviour of the Frenkel--Turaev sum ``S_n(p)``.

With ``q`` on a lattice line, ``|S_n| = exp(n kappa c + o(n))`` where ``c`` is a
quadratic expression in fractional parts of the coordinates of ``t_0..t_3``.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass

import numpy as np

from .convergence import CRITICAL_TOL, QLine, frac, from_phi
from .errors import DomainError, OnCriticalLine, SingularTerm
from .kernels import DEFAULT_POLICY, BasePair, TruncationPolicy, log_abs_theta
from .series import FTSpec, frenkel_turaev_closed, frenkel_turaev_sum

GOLDEN = (math.sqrt(5) - 1) / 2


def default_line() -> QLine:
    """``tau = i``, ``(N, M) = (0, 1)``, ``chi`` the golden-ratio conjugate; ``kappa = pi``."""
    return QLine(tau=1j, chi=GOLDEN, N=0, M=1)


@dataclass(frozen=True)
class FTAsymSpec:
    """Coordinates ``phi_0..phi_3`` of ``t_0..t_3`` on a line (with ``h = 0``)."""

    phi: tuple
    line: QLine = None

    def __post_init__(self):
        phi = tuple(float(x) for x in self.phi)
        if len(phi) != 4:
            raise DomainError("four coordinates phi_0..phi_3 are required")
        object.__setattr__(self, "phi", phi)
        if self.line is None:
            object.__setattr__(self, "line", default_line())

    @property
    def p(self) -> complex:
        return self.line.p

    @property
    def q(self) -> complex:
        return self.line.q

    @property
    def t(self) -> tuple:
        return tuple(from_phi(0.0, f, self.line) for f in self.phi)

    def arguments(self) -> tuple[list, list]:
        """The eight fractional-part arguments, as (first pair list, second pair list) per addend."""
        f0, f1, f2, f3 = self.phi
        s = f1 + f2 + f3
        first = [f0 - s] + [f0 - fj for fj in (f1, f2, f3)]
        second = [f0] + [f0 + fj - s for fj in (f1, f2, f3)]
        return first, second


def ft_rate_closed(spec: FTAsymSpec, check: bool = True) -> tuple[float, float]:
    """``(kappa, c)`` with ``I_FT = kappa c``."""
    first, second = spec.arguments()
    if check:
        for i, v in enumerate(first + second):
            x = frac(v)
            if min(x, 1 - x) < CRITICAL_TOL:
                raise OnCriticalLine(i, x)
    c = 0.0
    for a, b in zip(first, second):
        x, y = frac(a), frac(b)
        c += (x - y) * (x + y - 1)
    return spec.line.kappa, c


def _ft_theta_args(t0, t1, t2, t3):
    num = (t0, t0 / (t1 * t2), t0 / (t1 * t3), t0 / (t2 * t3))
    den = (t0 / (t1 * t2 * t3), t0 / t3, t0 / t2, t0 / t1)
    return num, den


@dataclass
class RateSeries:
    n: np.ndarray
    rate: np.ndarray
    kappa: float
    c: float
    spot_checks: list

    @property
    def target(self) -> float:
        return self.kappa * self.c

    def as_dict(self) -> dict:
        return {
            "kappa": self.kappa,
            "c": self.c,
            "target": self.target,
            "final_rate": float(self.rate[-1]),
            "spot_checks": self.spot_checks,
        }


def log_abs_ft_closed(spec: FTAsymSpec, n_max: int, policy: TruncationPolicy = DEFAULT_POLICY) -> np.ndarray:
    """``log|S_n(p)|`` for ``n = 1..n_max``.

    ``S_n = prod_{k=1}^n H(q^k)`` with ``H`` the ratio of eight thetas; ``H`` is
    ``p``-elliptic, so ``q^k`` is reduced modulo powers of ``p`` and every
    theta is taken in log-modulus form.
    """
    p = spec.p
    u = spec.line.q_power(np.arange(1, n_max + 1))
    num, den = _ft_theta_args(*spec.t)
    acc = np.zeros(n_max)
    for x in num:
        acc += log_abs_theta(x * u, p, policy)
    for x in den:
        acc -= log_abs_theta(x * u, p, policy)
    bad = np.flatnonzero(~np.isfinite(acc))
    if bad.size:
        raise SingularTerm(int(bad[0]) + 1, "H(q^k) hits a zero or pole")
    return np.cumsum(acc)


def ft_spot_check(spec: FTAsymSpec, ns=(5, 10, 20), policy: TruncationPolicy = DEFAULT_POLICY) -> list:
    """Compare the summed left side, the closed form and the log-product at a few ``n``."""
    t0, t1, t2, t3 = spec.t
    logs = log_abs_ft_closed(spec, max(ns), policy)
    out = []
    for n in ns:
        ft = FTSpec(t0, t1, t2, t3, n, BasePair(spec.p, spec.q))
        lhs = frenkel_turaev_sum(ft, policy)
        rhs = frenkel_turaev_closed(ft, policy)
        out.append(
            {
                "n": n,
                "lhs": lhs,
                "rhs": rhs,
                "rel_err": abs(lhs - rhs) / abs(rhs),
                "log_abs_rhs": math.log(abs(rhs)),
                "log_abs_product": float(logs[n - 1]),
            }
        )
    return out


def ft_rate_empirical(
    spec: FTAsymSpec, n_max: int, spot_check: bool = True, policy: TruncationPolicy = DEFAULT_POLICY
) -> RateSeries:
    """The sequence ``(1/n) log|S_n(p)|`` for ``n = 1..n_max`` paired with ``kappa c``."""
    n_max = int(n_max)
    if n_max < 1:
        raise DomainError("n_max must be >= 1")
    logs = log_abs_ft_closed(spec, n_max, policy)
    n = np.arange(1, n_max + 1)
    kappa, c = ft_rate_closed(spec, check=False)
    checks = ft_spot_check(spec, policy=policy) if spot_check else []
    return RateSeries(n, logs / n, kappa, c, checks)


class Regime(enum.Enum):
    DECAY = "Decay"
    NEUTRAL = "Neutral"
    BLOWUP = "Blowup"


def classify_regime(c: float, eps: float = 1e-9) -> Regime:
    if not eps > 0:
        raise DomainError("eps must be positive")
    if c < -eps:
        return Regime.DECAY
    if c > eps:
        return Regime.BLOWUP
    return Regime.NEUTRAL


def _log_big(x) -> float:
    a = abs(complex(x))
    return math.log(a) if a > 1 else 0.0


def jackson_rate_p0(t0, t1, t2, t3) -> float:
    """Exponential rate ``c`` of ``|S_n(0)|`` for ``q`` on the unit circle.

    Each argument contributes ``log|x|`` if ``|x| > 1`` and nothing otherwise.
    """
    t0, t1, t2, t3 = (complex(x) for x in (t0, t1, t2, t3))
    if 0 in (t0, t1, t2, t3):
        raise DomainError("parameters must be nonzero")
    num, den = _ft_theta_args(t0, t1, t2, t3)
    return sum(_log_big(x) for x in num) - sum(_log_big(x) for x in den)
