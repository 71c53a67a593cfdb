import math

import numpy as np
import pytest

from ellhyp.convergence import QLine, log_rc_six_q
from ellhyp.errors import DomainError
from ellhyp.search import (
    SENTINEL,
    SearchConfig,
    objective,
    project,
    run_search,
    twelve_values,
    xi_from_phi,
)


def test_objective_at_origin():
    assert objective(np.zeros(6), SearchConfig()) == 0.0


def test_objective_matches_six_q():
    cfg = SearchConfig()
    phi = project([0.45, -0.3, 0.8, 0.1, -0.2, 0.0])
    vq, vp = twelve_values(phi, cfg)
    for a in range(1, 7):
        assert vq[a - 1] == pytest.approx(log_rc_six_q(phi, cfg.line_q, a).log_rc_inv, abs=1e-14)
    assert objective(phi, cfg) == pytest.approx(max(vq.max(), vp.max()))


def test_objective_reevaluates_identically():
    cfg = SearchConfig()
    phi = project([0.3, 0.1, -0.7, 0.2, 0.05, 0.0])
    assert objective(phi, cfg) == objective(phi, cfg)


def test_projection():
    assert project([1, 1, 1, 1, 1, 1]).sum() == pytest.approx(0)
    assert project(np.zeros(6), K=3, L=1, M=1).sum() == pytest.approx(1 / 3)


def test_xi_coupling_is_h_free():
    cfg = SearchConfig()
    phi = project([0.3, 0.2, -0.1, 0.4, -0.5, 0.0])
    xi = xi_from_phi(phi, cfg.line_q)
    assert xi.shape == (6,)
    s = xi.sum() * cfg.line_q.M
    assert s == pytest.approx(round(s), abs=1e-9)


def test_sentinel_on_failure():
    # K = 2 lines cannot be inverted, so the base-p family fails to evaluate
    cfg = SearchConfig(line_q=QLine(1j, math.sqrt(2) - 1, N=1, M=1, K=2, L=1))
    assert objective(np.zeros(6), cfg) == SENTINEL


def test_config_validation():
    with pytest.raises(DomainError):
        SearchConfig(mode="anneal")
    with pytest.raises(DomainError):
        SearchConfig(budget=0)
    with pytest.raises(DomainError):
        SearchConfig(coupling="loose")


def test_grid_single_point():
    res = run_search(SearchConfig(mode="grid", budget=1))
    assert res.evaluations == 1 and res.objective == 0.0
    assert res.best_point == (0.0,) * 6


def test_random_is_deterministic():
    a = run_search(SearchConfig(mode="random", budget=40, seed=3))
    b = run_search(SearchConfig(mode="random", budget=40, seed=3, threads=4))
    assert a.history == b.history and a.objective == b.objective
    c = run_search(SearchConfig(mode="random", budget=40, seed=4))
    assert c.history != a.history


def test_pattern_never_worse_than_start():
    res = run_search(SearchConfig(mode="pattern", budget=10_000))
    assert res.objective <= 0.0
    assert res.evaluations <= 10_000


def test_pattern_incumbent_monotone():
    cfg = SearchConfig(mode="pattern", budget=300, start=(0.3, -0.2, 0.4, 0.1, -0.35))
    res = run_search(cfg)
    start = res.history[0][1]
    assert res.objective <= start
    best = math.inf
    # the reported incumbent is never worse than any earlier accepted point
    for _, f in res.history:
        best = min(best, f)
    assert res.objective == pytest.approx(best) or res.objective <= best


def test_independent_coupling_dimension():
    res = run_search(SearchConfig(mode="random", budget=5, coupling="independent"))
    assert len(res.history[0][0]) == 10
    assert "no global optimality" in res.as_dict()["note"]
