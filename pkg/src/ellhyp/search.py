"""Derivative-free search for coordinates making all twelve residue-sum series converge.

The objective is the largest of the twelve values ``log r_c^{-1}`` (six base-``q``
series, six base-``p`` series); it is negative exactly when all twelve radii
exceed 1.  Nothing found here is a statement about existence.
"""

from __future__ import annotations

import itertools
import math
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field

import numpy as np

from .convergence import QLine, from_phi, line_invert, log_rc_six_p, log_rc_six_q, phi_of
from .errors import DomainError, EllHypError

MODES = ("grid", "random", "pattern")
COUPLINGS = ("shared", "independent")
#: objective assigned to points where an evaluation fails
SENTINEL = 1.0


@dataclass(frozen=True)
class SearchConfig:
    """Search settings.

    ``coupling="shared"`` derives ``xi`` from concrete ``t_j`` built from
    ``phi`` (``h_j = 0`` for ``j < 6``, ``t_6`` fixed by ``prod t_j = pq``).
    ``coupling="independent"`` treats ``xi`` as six further free coordinates;
    this decouples the two families and is not the faithful reading.
    """

    mode: str = "pattern"
    budget: int = 1000
    seed: int = 0
    line_q: QLine = None
    coupling: str = "shared"
    half_width: float = 0.5
    step: float = 0.25
    min_step: float = 1e-6
    start: tuple | None = None
    threads: int = 1

    def __post_init__(self):
        if self.mode not in MODES:
            raise DomainError(f"mode must be one of {MODES}")
        if self.coupling not in COUPLINGS:
            raise DomainError(f"coupling must be one of {COUPLINGS}")
        if int(self.budget) < 1:
            raise DomainError("budget must be >= 1")
        object.__setattr__(self, "budget", int(self.budget))
        if self.line_q is None:
            object.__setattr__(self, "line_q", QLine(tau=1j, chi=(math.sqrt(5) - 1) / 2, N=0, M=1))
        if int(self.threads) < 1:
            raise DomainError("threads must be >= 1")

    @property
    def line_p(self) -> QLine:
        return line_invert(self.line_q).line

    @property
    def dim(self) -> int:
        return 5 if self.coupling == "shared" else 10


def project(phi, K: int = 1, L: int = 0, M: int = 1) -> np.ndarray:
    """Shift all six coordinates equally so that the sum becomes ``L M / K``."""
    phi = np.asarray(phi, dtype=float)
    target = L * M / K if K > 1 else 0.0
    return phi - (phi.sum() - target) / phi.size


def xi_from_phi(phi, line_q: QLine) -> np.ndarray:
    """``xi`` of the concrete parameters built from ``phi`` on the base-``q`` line."""
    phi = np.asarray(phi, dtype=float)
    ts = [from_phi(0.0, f, line_q) for f in phi[:5]]
    ts.append(line_q.p * line_q.q / np.prod(ts))
    inv = line_invert(line_q).line
    return np.array([phi_of(t, inv)[1] for t in ts])


def twelve_values(phi, cfg: SearchConfig, xi=None) -> tuple[np.ndarray, np.ndarray]:
    """Six base-``q`` and six base-``p`` values of ``log r_c^{-1}``."""
    line = cfg.line_q
    phi = np.asarray(phi, dtype=float)
    if xi is None:
        xi = xi_from_phi(phi, line)
    vq = np.array([log_rc_six_q(phi, line, a).log_rc_inv for a in range(1, 7)])
    vp = np.array([log_rc_six_p(xi, line, a).log_rc_inv for a in range(1, 7)])
    return vq, vp


def _split_point(x, cfg: SearchConfig):
    """Map a free search point to ``(phi, xi)``."""
    x = np.asarray(x, dtype=float)
    line = cfg.line_q
    if cfg.coupling == "shared":
        phi = np.append(x[:5], -np.sum(x[:5]))
        phi = project(phi, line.K, line.L, line.M)
        return phi, xi_from_phi(phi, line)
    phi = project(np.append(x[:5], -np.sum(x[:5])), line.K, line.L, line.M)
    inv = cfg.line_p
    xi = project(np.append(x[5:10], -np.sum(x[5:10])), inv.K, inv.L, inv.M)
    return phi, xi


def objective(phi, cfg: SearchConfig, xi=None) -> float:
    """``max`` of the twelve values; ``< 0`` iff all twelve radii exceed 1.

    ``phi`` must have six entries; a nonzero sum is projected away, and ``xi``
    is derived from ``phi`` unless given (independent coupling).  Every
    summand ``g({x}) - g({y})`` is continuous in its arguments because
    ``g(0) = g(1) = 0``, so integer arguments need no special treatment; the
    :data:`SENTINEL` is returned only when an evaluation fails.
    """
    line = cfg.line_q
    phi = project(np.asarray(phi, dtype=float), line.K, line.L, line.M)
    if phi.shape != (6,):
        raise DomainError("phi must have six entries")
    try:
        if xi is not None:
            inv = cfg.line_p
            xi = project(np.asarray(xi, dtype=float), inv.K, inv.L, inv.M)
        vq, vp = twelve_values(phi, cfg, xi)
    except EllHypError:
        return SENTINEL
    val = float(max(vq.max(), vp.max()))
    return val if math.isfinite(val) else SENTINEL


def _eval(x, cfg: SearchConfig) -> float:
    try:
        phi, xi = _split_point(x, cfg)
    except EllHypError:
        return SENTINEL
    return objective(phi, cfg, xi)


@dataclass
class SearchResult:
    best_point: tuple
    best_xi: tuple
    objective: float
    history: list = field(default_factory=list)
    mode: str = ""
    evaluations: int = 0

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "best_phi": list(self.best_point),
            "best_xi": list(self.best_xi),
            "objective": self.objective,
            "evaluations": self.evaluations,
            "all_radii_exceed_one": self.objective < 0,
            "note": "best point within budget; no global optimality or existence claim",
        }


def _map(points, cfg: SearchConfig) -> list:
    if cfg.threads > 1 and len(points) > 1:
        with ThreadPoolExecutor(max_workers=cfg.threads) as ex:
            return list(ex.map(lambda x: _eval(x, cfg), points))
    return [_eval(x, cfg) for x in points]


def _grid_points(cfg: SearchConfig) -> list:
    per_axis = max(1, int(math.floor(cfg.budget ** (1.0 / cfg.dim) + 1e-9)))
    if per_axis == 1:
        axis = [0.0]
    else:
        axis = list(np.linspace(-cfg.half_width, cfg.half_width, per_axis))
    return [np.array(pt) for pt in itertools.product(axis, repeat=cfg.dim)]


def _directions(dim: int) -> list:
    out = []
    for i in range(dim):
        e = np.zeros(dim)
        e[i] = 1.0
        out.extend([e, -e])
    return out


def _floats(v) -> tuple:
    return tuple(float(x) + 0.0 for x in v)


def _finish(cfg: SearchConfig, history: list) -> SearchResult:
    # lexicographic tie-breaking among equal objectives
    best_x, best_f = min(history, key=lambda h: (h[1], tuple(h[0])))
    phi, xi = _split_point(np.array(best_x), cfg)
    return SearchResult(_floats(phi), _floats(xi), float(best_f), history, cfg.mode, len(history))


def run_search(cfg: SearchConfig) -> SearchResult:
    """Run the configured search; deterministic for a fixed ``seed``.

    ``pattern`` is compass search over the free coordinates (the sixth
    coordinate of each family is fixed by the sum constraint): a trial point
    replaces the incumbent only if it strictly improves the objective, and
    the step halves after an unsuccessful poll.
    """
    if cfg.mode == "grid":
        pts = _grid_points(cfg)[: cfg.budget]
        vals = _map(pts, cfg)
        return _finish(cfg, [(tuple(float(v) for v in x), f) for x, f in zip(pts, vals)])
    if cfg.mode == "random":
        rng = np.random.default_rng(cfg.seed)
        pts = [rng.uniform(-cfg.half_width, cfg.half_width, cfg.dim) for _ in range(cfg.budget)]
        vals = _map(pts, cfg)
        return _finish(cfg, [(tuple(float(v) for v in x), f) for x, f in zip(pts, vals)])

    x = np.zeros(cfg.dim) if cfg.start is None else np.asarray(cfg.start, dtype=float)[: cfg.dim]
    if x.shape != (cfg.dim,):
        raise DomainError(f"start point needs {cfg.dim} free coordinates")
    fx = _eval(x, cfg)
    history = [(tuple(float(v) for v in x), fx)]
    step = cfg.step
    dirs = _directions(cfg.dim)
    while len(history) < cfg.budget and step >= cfg.min_step:
        room = cfg.budget - len(history)
        trials = [x + step * d for d in dirs][:room]
        vals = _map(trials, cfg)
        history.extend((tuple(float(v) for v in t), f) for t, f in zip(trials, vals))
        improved = [(f, tuple(t)) for t, f in zip(trials, vals) if f < fx]
        if improved:
            fbest, tbest = min(improved)
            x, fx = np.array(tbest), fbest
        else:
            step /= 2
    res = _finish(cfg, history)
    phi, xi = _split_point(x, cfg)
    res.best_point, res.best_xi, res.objective = _floats(phi), _floats(xi), float(fx)
    return res
