"""Seeded parameter generators shared by the test modules."""

from __future__ import annotations

import math

import numpy as np

from ellhyp.contour import BetaParams
from ellhyp.errors import EllHypError
from ellhyp.kernels import BasePair
from ellhyp.series import FTSpec, v_series_term

# sums whose terms cancel by more than this factor lose digits in double precision
MAX_CONDITION = 1e3


def polar(rng, lo, hi):
    return rng.uniform(lo, hi) * np.exp(2j * np.pi * rng.uniform())


def ft_condition(spec: FTSpec) -> float:
    """``sum |term| / |sum|`` of the terminating series."""
    vs = spec.to_vseries()
    terms = [v_series_term(vs, k) for k in range(spec.n + 1)]
    return sum(abs(x) for x in terms) / abs(sum(terms))


def admissible_ft_specs(count: int, seed: int = 0, n_max: int = 8, nome_max: float = 0.5):
    """Random well-conditioned terminating specs with ``|p|, |q| <= nome_max``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        p = polar(rng, 0.05, nome_max)
        q = polar(rng, 0.05, nome_max)
        n = int(rng.integers(0, n_max + 1))
        spec = FTSpec(*(polar(rng, 0.5, 1.5) for _ in range(4)), n, BasePair(p, q))
        try:
            cond = ft_condition(spec)
        except EllHypError:
            continue
        if np.isfinite(cond) and cond <= MAX_CONDITION:
            out.append(spec)
    return out


def beta_param_sets(count: int, seed: int = 0, nome_max: float = 0.3, t_max: float = 0.85, t_min: float = 0.3):
    """Random balanced six-tuples with ``max |t_a| <= t_max``."""
    rng = np.random.default_rng(seed)
    out = []
    while len(out) < count:
        p = polar(rng, 0.02, nome_max)
        q = polar(rng, 0.02, nome_max)
        t = [polar(rng, t_min, t_max) for _ in range(5)]
        t6 = p * q / np.prod(t)
        if not t_min * 0.1 <= abs(t6) <= t_max:
            continue
        out.append(BetaParams(tuple(t) + (t6,), BasePair(p, q)))
    return out


def annulus_radius(params: BetaParams, lo: float = 0.03, hi: float = 0.9) -> float:
    """Geometric midpoint of the widest gap between inner pole moduli inside ``[lo, hi]``."""
    from ellhyp.contour import pole_radii

    mods = sorted({abs(z) for _, z in pole_radii(params, lo * 0.5)} | {lo * 0.5, 1.0})
    best, rho = -1.0, None
    for a, b in zip(mods, mods[1:]):
        mid = math.sqrt(a * b)
        if lo <= mid <= hi and math.log(b / a) > best:
            best, rho = math.log(b / a), mid
    return rho
