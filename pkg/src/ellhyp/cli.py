"""Command-line front end.

Every subcommand maps onto one library operation and prints a report that
echoes its inputs next to the results.  Exit codes: 0 success, 2 usage error,
3 numerical domain error, 4 non-convergence.

Options may also come from a config file of ``key=value`` lines (keys are
the long option names, with ``-`` or ``_``); command-line flags win.  The
default thread count is read from the ``ELLHYP_THREADS`` environment variable.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import re
import sys
import time

import numpy as np

from . import __version__
from .errors import EllHypError, NonConvergent

EXIT_OK = 0
EXIT_USAGE = 2
EXIT_DOMAIN = 3
EXIT_NONCONV = 4
THREADS_ENV = "ELLHYP_THREADS"
GOLDEN = (math.sqrt(5) - 1) / 2
# off-line parameters for the Weyl demo; the last one follows from balancing
WEYL_DEFAULT_T = (0.3 * np.exp(1.1j), 0.5 * np.exp(0.7j), 0.7 * np.exp(-2.0j), 0.6 * np.exp(2.9j))


class UsageError(Exception):
    pass


# ---------------------------------------------------------------- parsing

_PAIR = re.compile(r"^\(\s*([^,()]+)\s*,\s*([^,()]+)\s*\)$")


def parse_complex(text: str) -> complex:
    """Accept ``re+imi``, ``(re,im)``, a plain real, or Python's ``j`` suffix."""
    s = str(text).strip().replace(" ", "")
    m = _PAIR.match(s)
    if m:
        return complex(float(m.group(1)), float(m.group(2)))
    if s.endswith("i"):
        s = s[:-1] + "j"
        if s in ("j", "+j", "-j"):
            s = s.replace("j", "1j")
    try:
        return complex(s)
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a complex number: {text!r}") from None


def _split_top(text: str) -> list[str]:
    parts, depth, cur = [], 0, ""
    for ch in str(text):
        if ch == "(":
            depth += 1
        elif ch == ")":
            depth -= 1
        if ch in ",;" and depth == 0:
            parts.append(cur)
            cur = ""
        else:
            cur += ch
    if cur.strip():
        parts.append(cur)
    return [p.strip() for p in parts if p.strip()]


def parse_complex_list(text: str) -> list[complex]:
    return [parse_complex(x) for x in _split_top(text)]


def parse_real_list(text: str) -> list[float]:
    try:
        return [float(x) for x in _split_top(text)]
    except ValueError:
        raise argparse.ArgumentTypeError(f"not a list of reals: {text!r}") from None


def fmt_complex(z) -> str:
    z = complex(z)
    return f"{z.real!r}{'+' if z.imag >= 0 or math.isnan(z.imag) else '-'}{abs(z.imag)!r}i"


def to_json(obj):
    """Convert results to JSON-compatible values; complex numbers become ``{"re", "im"}``."""
    if isinstance(obj, (complex, np.complexfloating)):
        return {"re": float(obj.real), "im": float(obj.imag)}
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else str(v)
    if isinstance(obj, (np.integer,)):
        return int(obj)
    if isinstance(obj, (np.bool_,)):
        return bool(obj)
    if isinstance(obj, np.ndarray):
        return [to_json(x) for x in obj.tolist()]
    if isinstance(obj, dict):
        return {str(k): to_json(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [to_json(x) for x in obj]
    return obj


# ---------------------------------------------------------------- helpers


def _line(args):
    from .convergence import QLine

    return QLine(tau=args.tau, chi=args.chi, N=args.N, M=args.M, K=args.K, L=args.L, Q=args.Q)


def _demo_beta_params():
    from .contour import BetaParams
    from .kernels import BasePair

    p, q = 0.08, 0.05
    zeta = np.exp(2j * np.pi * np.array([0.1, 0.25, 0.4, 0.55, 0.8]))
    zeta = np.append(zeta, 1 / np.prod(zeta))
    return BetaParams(tuple((p * q) ** (1 / 6) * zeta), BasePair(p, q))


def _beta_params(args):
    from .contour import BetaParams
    from .kernels import BasePair

    if args.demo or args.t is None:
        return _demo_beta_params()
    return BetaParams(tuple(args.t), BasePair(args.p, args.q))


def _policy(args):
    from .kernels import DEFAULT_POLICY, TruncationPolicy

    if getattr(args, "product_tol", None) is None:
        return DEFAULT_POLICY
    try:
        return TruncationPolicy(tol=args.product_tol)
    except ValueError as exc:
        raise UsageError(f"--product-tol: {exc}") from None


# ---------------------------------------------------------------- commands
# Each returns (outputs, diagnostics, sequence rows or None).


def cmd_theta(args):
    from .kernels import log_abs_theta, theta

    val = theta(args.a, args.p, _policy(args))
    out = {"theta": val}
    if args.p != 0:
        out["log_abs_theta"] = float(log_abs_theta(args.a, args.p, _policy(args)))
    return out, {"tol": _policy(args).tol}, None


def cmd_egamma(args):
    from .kernels import elliptic_gamma

    pol = _policy(args)
    g = elliptic_gamma(args.z, args.p, args.q, pol, args.guard)
    refl = g * elliptic_gamma(args.p * args.q / args.z, args.p, args.q, pol, args.guard)
    return {"gamma": g}, {"reflection_residual": abs(refl - 1), "tol": pol.tol}, None


def cmd_vseries(args):
    from .kernels import BasePair
    from .series import VSeriesSpec, v_series_partial_sums

    if not args.t:
        raise UsageError("--t is required")
    spec = VSeriesSpec(tuple(args.t), BasePair(args.p, args.q), z=args.z)
    sums = v_series_partial_sums(spec, args.N, _policy(args))
    rows = [{"n": n, "re": s.real, "im": s.imag} for n, s in enumerate(sums)]
    return {"partial_sum": sums[-1], "nu": spec.nu}, {"terms": args.N + 1}, rows


def _ft_spec(args):
    from .kernels import BasePair
    from .series import FTSpec

    return FTSpec(args.t0, args.t1, args.t2, args.t3, args.n, BasePair(args.p, args.q))


def cmd_ft_check(args):
    from .series import frenkel_turaev_closed, frenkel_turaev_sum

    spec = _ft_spec(args)
    lhs = frenkel_turaev_sum(spec, _policy(args))
    rhs = frenkel_turaev_closed(spec, _policy(args))
    rel = abs(lhs - rhs) / abs(rhs) if rhs != 0 else abs(lhs - rhs)
    return {"lhs": lhs, "rhs": rhs, "relative_error": rel}, {"t4": spec.t4, "t5": spec.t5}, None


def cmd_jackson(args):
    from .series import jackson_8w7

    lhs, rhs = jackson_8w7(args.t0, args.t1, args.t2, args.t3, args.q, args.n)
    rel = abs(lhs - rhs) / abs(rhs) if rhs != 0 else abs(lhs - rhs)
    return {"lhs": lhs, "rhs": rhs, "relative_error": rel}, {}, None


def cmd_w65(args):
    from .series import jackson_8w7, w6_5_product, w6_5_series

    prod = w6_5_product(args.t0, args.t1, args.t2, args.t3, args.q, _policy(args))
    ser = w6_5_series(args.t0, args.t1, args.t2, args.t3, args.q)
    _, jr = jackson_8w7(args.t0, args.t1, args.t2, args.t3, args.q, args.n_check)
    out = {"product": prod, "series": ser, "jackson_rhs": jr}
    diag = {
        "product_vs_series": abs(prod - ser) / abs(prod),
        "product_vs_jackson": abs(prod - jr) / abs(prod),
        "jackson_n": args.n_check,
    }
    return out, diag, None


def cmd_beta_int(args):
    from .contour import beta_closed_form, beta_integral_quadrature

    bp = _beta_params(args)
    res = beta_integral_quadrature(bp, args.radius, args.tol, policy=_policy(args), details=True)
    closed = beta_closed_form(bp, _policy(args))
    rel = abs(res.value - closed) / abs(closed)
    out = {"quadrature": res.value, "closed_form": closed, "relative_error": rel}
    diag = {"nodes": res.nodes, "last_change": res.last_change, "t": list(bp.t), "p": bp.p, "q": bp.q}
    if args.demo:
        out["demo_passed"] = rel < 1e-8
    return out, diag, None


def cmd_residue(args):
    from .contour import ResidueIndex, annulus_check, residue_at, residue_prefactor, truncated_residue_sum

    bp = _beta_params(args)
    pol = _policy(args)
    if args.mode == "single":
        idx = ResidueIndex(args.a, args.j, args.k)
        val = residue_at(bp, idx, pol)
        return {"residue": val, "prefactor": residue_prefactor(bp, args.a, pol)}, {"pole": idx.location(bp)}, None
    if args.mode == "annulus":
        r = annulus_check(bp, args.rho, policy=pol)
        return (
            {"lhs": r.lhs, "rhs": r.rhs, "relative_error": r.error},
            {"scale": r.scale, "poles": r.poles},
            None,
        )
    rep = truncated_residue_sum(bp, args.J, args.K, args.m, policy=pol)
    rows = [
        {
            "a": f["a"],
            "contribution_re": f["contribution"].real,
            "contribution_im": f["contribution"].imag,
            "last_q_term": f["last_q_term"],
            "last_p_term": f["last_p_term"],
        }
        for f in rep.per_family
    ]
    out = {"value": rep.value, "closed_form": rep.closed_form, "relative_discrepancy": rep.discrepancy}
    return out, {"per_family": rep.per_family, "J": args.J, "K": args.K, "asserted": False}, rows


def cmd_fint(args):
    from .convergence import f_integral_closed, f_integral_quadrature

    closed = f_integral_closed(args.t, args.K_shell, args.N, args.M, args.tau)
    quad = f_integral_quadrature(args.t, args.K_shell, args.N, args.M, args.tau, _policy(args))
    return {"closed_form": closed, "quadrature": quad, "abs_error": abs(closed - quad)}, {}, None


def cmd_radius(args):
    from .convergence import (
        log_rc_general,
        log_rc_phi,
        log_rc_six_p,
        log_rc_six_q,
        wp_parametrization,
    )

    line = _line(args)
    v = args.variant
    if v == "general":
        if args.t is None or args.w is None:
            raise UsageError("--t and --w are required for the general variant")
        rep = log_rc_general(args.t, args.w, line)
    elif v == "phi":
        if args.phi is None or args.phi_tilde is None:
            raise UsageError("--phi and --phi-tilde are required")
        rep = log_rc_phi(args.phi, args.phi_tilde, line)
    elif v == "wppar":
        phi, phit = wp_parametrization(args.r, args.lam, strict=not args.closed_range)
        rep = log_rc_phi(phi, phit, line)
        rep.extra.update({"phi": phi, "phi_tilde": phit})
    elif v in ("six-q", "six-p"):
        if args.phi is None:
            raise UsageError("--phi (six values) is required")
        fn = log_rc_six_q if v == "six-q" else log_rc_six_p
        reps = [fn(args.phi, line, a) for a in range(1, 7)] if args.a == 0 else [fn(args.phi, line, args.a)]
        out = {"log_rc_inv": [r.log_rc_inv for r in reps], "kappa": reps[0].kappa, "weight": reps[0].weight}
        return out, {"contributions": [r.contributions for r in reps]}, None
    else:
        raise UsageError(f"unknown variant {v}")
    d = rep.as_dict()
    contrib = d.pop("contributions")
    return d, {"contributions": contrib}, None


def cmd_weyl(args):
    from .convergence import weyl_empirical
    from .kernels import BasePair
    from .series import VSeriesSpec

    line = _line(args)
    t = list(args.t) if args.t else list(WEYL_DEFAULT_T)
    # close the balancing condition with one more parameter
    q = line.q
    r = len(t) + 4
    last = q ** ((r - 7) / 2) * t[0] ** ((r - 5) / 2) / np.prod(t[1:]) if len(t) > 1 else None
    if last is None:
        raise UsageError("need at least two parameters")
    spec = VSeriesSpec(tuple(t) + (last,), BasePair(line.p, q))
    running, target = weyl_empirical(spec, line, args.n, _policy(args))
    stride = max(1, args.n // args.rows)
    rows = [{"n": int(i + 1), "running_average": float(running[i])} for i in range(stride - 1, args.n, stride)]
    out = {"final_average": float(running[-1]), "target": target.log_rc_inv, "parameters": list(spec.t)}
    return out, {"difference": float(running[-1]) - target.log_rc_inv}, rows


def cmd_cf(args):
    from .convergence import cf_diagnostic

    rep = cf_diagnostic(args.chi, args.depth, args.threshold)
    rows = [{"k": k, "p_k": p, "q_k": q, "log_q_next_over_q": r} for k, (p, q, r) in enumerate(rep.rows())]
    d = rep.as_dict()
    return {"flagged": d.pop("flagged"), "max_ratio": d.pop("max_ratio")}, d, rows


def cmd_ft_asym(args):
    from .asymptotics import FTAsymSpec, classify_regime, ft_rate_closed, ft_rate_empirical

    if args.phi is None or len(args.phi) != 4:
        raise UsageError("--phi needs four values phi_0..phi_3")
    spec = FTAsymSpec(tuple(args.phi), _line(args))
    kappa, c = ft_rate_closed(spec)
    out = {"kappa": kappa, "c": c, "rate": kappa * c, "regime": classify_regime(c, args.eps).value}
    rows = None
    diag = {}
    if args.n_max > 0:
        rs = ft_rate_empirical(spec, args.n_max, spot_check=not args.no_spot_check, policy=_policy(args))
        out["empirical_final"] = float(rs.rate[-1])
        out["empirical_gap_over_kappa"] = abs(float(rs.rate[-1]) - kappa * c) / kappa
        diag["spot_checks"] = rs.spot_checks
        stride = max(1, args.n_max // args.rows)
        rows = [{"n": int(rs.n[i]), "rate": float(rs.rate[i])} for i in range(stride - 1, args.n_max, stride)]
    return out, diag, rows


def cmd_jackson_rate(args):
    from .asymptotics import classify_regime, jackson_rate_p0

    c = jackson_rate_p0(args.t0, args.t1, args.t2, args.t3)
    return {"c": c, "regime": classify_regime(c, args.eps).value}, {}, None


def cmd_search(args):
    from .search import SearchConfig, run_search

    cfg = SearchConfig(
        mode=args.mode,
        budget=args.budget,
        seed=args.seed,
        line_q=_line(args),
        coupling=args.coupling,
        half_width=args.half_width,
        step=args.step,
        threads=args.threads,
    )
    res = run_search(cfg)
    rows = [{"i": i, "objective": f, **{f"x{j}": v for j, v in enumerate(x)}} for i, (x, f) in enumerate(res.history)]
    return res.as_dict(), {"budget": args.budget}, rows


# ---------------------------------------------------------------- parser


def _add_line(sp):
    g = sp.add_argument_group("lattice line")
    g.add_argument("--tau", type=parse_complex, default=1j, help="modular parameter, Im tau > 0 (default i)")
    g.add_argument("--chi", type=float, default=GOLDEN, help="line slope in (0,1) (default golden-ratio conjugate)")
    g.add_argument("--N", type=int, default=0)
    g.add_argument("--M", type=int, default=1)
    g.add_argument("--K", type=int, default=1, help="order of the root of unity in q")
    g.add_argument("--L", type=int, default=0)
    g.add_argument("--Q", type=int, default=1)


def _add_ft_params(sp, q_default=0.2):
    sp.add_argument("--t0", type=parse_complex, default=complex(0.7, 0.2))
    sp.add_argument("--t1", type=parse_complex, default=complex(0.9, -0.3))
    sp.add_argument("--t2", type=parse_complex, default=complex(1.1, 0.4))
    sp.add_argument("--t3", type=parse_complex, default=complex(-0.6, 0.8))
    sp.add_argument("--q", type=parse_complex, default=q_default)


def _add_beta(sp):
    sp.add_argument("--t", type=parse_complex_list, default=None, help="six parameters with product p q")
    sp.add_argument("--p", type=parse_complex, default=0.08)
    sp.add_argument("--q", type=parse_complex, default=0.05)
    sp.add_argument("--demo", action="store_true", help="use the built-in symmetric parameter set")


COMMANDS = {}


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("json", "csv", "text"), default="json")
    common.add_argument("--output", default=None, help="write the report here instead of stdout")
    common.add_argument("--config", default=None, help="file of key=value lines mirroring the flags")
    common.add_argument("--threads", type=int, default=None, help=f"thread cap (default ${THREADS_ENV} or 1)")
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--product-tol", type=float, default=None, help="relative tail bound for products")

    parser = argparse.ArgumentParser(prog="ellhyp", description="Elliptic hypergeometric numerics.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    def add(name, fn, help_):
        sp = sub.add_parser(name, parents=[common], help=help_, allow_abbrev=False)
        sp.set_defaults(func=fn)
        COMMANDS[name] = sp
        return sp

    sp = add("theta", cmd_theta, "theta(a; p)")
    sp.add_argument("--a", type=parse_complex, required=True)
    sp.add_argument("--p", type=parse_complex, required=True)

    sp = add("egamma", cmd_egamma, "elliptic gamma function")
    sp.add_argument("--z", type=parse_complex, required=True)
    sp.add_argument("--p", type=parse_complex, required=True)
    sp.add_argument("--q", type=parse_complex, required=True)
    sp.add_argument("--guard", type=float, default=1e-8)

    sp = add("vseries", cmd_vseries, "partial sums of a very-well-poised series")
    sp.add_argument("--t", type=parse_complex_list, required=True)
    sp.add_argument("--p", type=parse_complex, required=True)
    sp.add_argument("--q", type=parse_complex, required=True)
    sp.add_argument("--z", type=parse_complex, default=1.0)
    sp.add_argument("--N", type=int, default=20)

    sp = add("ft-check", cmd_ft_check, "both sides of the Frenkel--Turaev sum")
    _add_ft_params(sp)
    sp.add_argument("--p", type=parse_complex, default=0.1)
    sp.add_argument("--n", type=int, default=3)

    sp = add("jackson", cmd_jackson, "both sides of the terminating 8W7 sum")
    _add_ft_params(sp)
    sp.add_argument("--n", type=int, default=5)

    sp = add("w65", cmd_w65, "infinite 6W5 product vs series and large-n Jackson")
    _add_ft_params(sp, q_default=0.3)
    sp.set_defaults(t0=complex(0.5, 0.1), t1=complex(0.9, 0.2), t2=complex(1.3, -0.2), t3=complex(0.8, 0.6))
    sp.add_argument("--n-check", type=int, default=40)

    sp = add("beta-int", cmd_beta_int, "beta integral: quadrature vs closed form")
    _add_beta(sp)
    sp.add_argument("--radius", type=float, default=1.0)
    sp.add_argument("--tol", type=float, default=1e-12)

    sp = add("residue", cmd_residue, "residues, annulus check, truncated residue sum")
    _add_beta(sp)
    sp.add_argument("--mode", choices=("single", "annulus", "sum"), default="sum")
    sp.add_argument("--a", type=int, default=1)
    sp.add_argument("--j", type=int, default=0)
    sp.add_argument("--k", type=int, default=0)
    sp.add_argument("--rho", type=float, default=0.2)
    sp.add_argument("--J", type=int, default=4)
    sp.add_argument("--K", type=int, default=4)
    sp.add_argument("--m", type=int, default=None)

    sp = add("fint", cmd_fint, "F integral: closed form vs quadrature")
    sp.add_argument("--t", type=parse_complex, default=0.5)
    sp.add_argument("--tau", type=parse_complex, default=1j)
    sp.add_argument("--N", type=int, default=1)
    sp.add_argument("--M", type=int, default=1)
    sp.add_argument("--K", dest="K_shell", type=int, default=1)

    sp = add("radius", cmd_radius, "radius of convergence formulas")
    _add_line(sp)
    sp.add_argument("--variant", choices=("general", "phi", "six-q", "six-p", "wppar"), default="wppar")
    sp.add_argument("--t", type=parse_complex_list, default=None)
    sp.add_argument("--w", type=parse_complex_list, default=None)
    sp.add_argument("--phi", type=parse_real_list, default=None)
    sp.add_argument("--phi-tilde", type=parse_real_list, default=None)
    sp.add_argument("--a", type=int, default=0, help="family 1..6, or 0 for all six")
    sp.add_argument("--r", type=int, default=6)
    sp.add_argument("--lam", type=float, default=0.25)
    sp.add_argument("--closed-range", action="store_true", help="admit the endpoints of the lambda range")

    sp = add("weyl", cmd_weyl, "Weyl running averages vs the radius formula")
    _add_line(sp)
    sp.add_argument("--t", type=parse_complex_list, default=None)
    sp.add_argument("--n", type=int, default=100000)
    sp.add_argument("--rows", type=int, default=200, help="number of sequence rows exported")

    sp = add("cf", cmd_cf, "continued-fraction diagnostics for chi")
    sp.add_argument("--chi", type=float, default=GOLDEN)
    sp.add_argument("--depth", type=int, default=40)
    sp.add_argument("--threshold", type=float, default=1.0)

    sp = add("ft-asym", cmd_ft_asym, "Frenkel--Turaev asymptotic rate")
    _add_line(sp)
    sp.add_argument("--phi", type=parse_real_list, required=True)
    sp.add_argument("--n-max", type=int, default=10000)
    sp.add_argument("--eps", type=float, default=1e-9)
    sp.add_argument("--rows", type=int, default=200)
    sp.add_argument("--no-spot-check", action="store_true")

    sp = add("jackson-rate", cmd_jackson_rate, "rate of the Jackson sum for |q| = 1")
    for name in ("t0", "t1", "t2", "t3"):
        sp.add_argument(f"--{name}", type=parse_complex, required=True)
    sp.add_argument("--eps", type=float, default=1e-9)

    sp = add("search", cmd_search, "search for coordinates with all twelve radii > 1")
    _add_line(sp)
    sp.add_argument("--mode", choices=("grid", "random", "pattern"), default="pattern")
    sp.add_argument("--budget", type=int, default=1000)
    sp.add_argument("--coupling", choices=("shared", "independent"), default="shared")
    sp.add_argument("--half-width", type=float, default=0.5)
    sp.add_argument("--step", type=float, default=0.25)
    return parser


def read_config(path: str) -> dict:
    out = {}
    with open(path) as fh:
        for lineno, raw in enumerate(fh, 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            if "=" not in line:
                raise UsageError(f"{path}:{lineno}: expected key=value")
            k, v = line.split("=", 1)
            out[k.strip().replace("_", "-")] = v.strip()
    return out


def _apply_config(sp: argparse.ArgumentParser, cfg: dict, argv: list[str]) -> list[str]:
    """Prepend config entries as flags so explicit flags override them."""
    known = {}
    for act in sp._actions:
        for opt in act.option_strings:
            if opt.startswith("--"):
                known[opt[2:]] = act
    extra = []
    for k, v in cfg.items():
        if k in ("config", "format", "output") and k not in known:
            continue
        act = known.get(k)
        if act is None:
            raise UsageError(f"unknown config key {k!r}")
        if act.nargs == 0:
            if v.lower() in ("1", "true", "yes", "on"):
                extra.append(f"--{k}")
            elif v.lower() not in ("0", "false", "no", "off", ""):
                raise UsageError(f"config key {k!r} expects a boolean")
        else:
            extra.append(f"--{k}={v}")
    return extra + argv


def _config_path(argv: list[str]) -> str | None:
    for i, tok in enumerate(argv):
        if tok == "--config":
            if i + 1 >= len(argv):
                raise UsageError("--config needs a path")
            return argv[i + 1]
        if tok.startswith("--config="):
            return tok.split("=", 1)[1]
    return None


def _coerce_complex(sp: argparse.ArgumentParser, args) -> None:
    """Give non-string defaults the same type as parsed values so echoes round-trip."""
    for act in sp._actions:
        val = getattr(args, act.dest, None)
        if act.type is parse_complex and isinstance(val, (int, float)):
            setattr(args, act.dest, complex(val))
        elif act.type is parse_complex_list and isinstance(val, (list, tuple)):
            setattr(args, act.dest, [complex(x) for x in val])


def argv_from_inputs(command: str, inputs: dict) -> list[str]:
    """Rebuild a command line from a report's echoed inputs."""
    argv = [command]
    for k, v in inputs.items():
        argv.append(f"--{k}" if v == "true" else f"--{k}={v}")
    return argv


def _echo(args) -> dict:
    skip = {"func", "command", "config", "output", "format"}
    out = {}
    for k, v in sorted(vars(args).items()):
        if k in skip or v is None:
            continue
        key = k.replace("_", "-")
        if k == "K_shell":
            key = "K"
        if isinstance(v, bool):
            if v:
                out[key] = "true"
            continue
        if isinstance(v, complex):
            out[key] = fmt_complex(v)
        elif isinstance(v, list):
            out[key] = ",".join(fmt_complex(x) if isinstance(x, complex) else repr(x) for x in v)
        else:
            out[key] = repr(v) if isinstance(v, float) else str(v)
    return out


def render(report: dict, rows, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(to_json(report), indent=2, sort_keys=True) + "\n"
    if fmt == "csv":
        if rows is None:
            raise UsageError("csv output is only available for sequence-valued commands")
        buf = io.StringIO()
        w = csv.DictWriter(buf, fieldnames=list(rows[0].keys()) if rows else ["empty"])
        w.writeheader()
        for r in rows:
            w.writerow({k: to_json(v) for k, v in r.items()})
        return buf.getvalue()
    lines = [f"command: {report['command']}"]
    for section in ("outputs", "diagnostics"):
        for k, v in report.get(section, {}).items():
            lines.append(f"{k}: {json.dumps(to_json(v))}")
    if "error" in report:
        lines.append(f"error: {report['error']['type']}: {report['error']['message']}")
    return "\n".join(lines) + "\n"


def main(argv: list[str] | None = None) -> int:
    argv = list(sys.argv[1:] if argv is None else argv)
    parser = build_parser()
    try:
        path = _config_path(argv)
        if path is not None and argv and argv[0] in COMMANDS:
            argv = [argv[0]] + _apply_config(COMMANDS[argv[0]], read_config(path), argv[1:])
    except (UsageError, OSError) as exc:
        print(f"ellhyp: {exc}", file=sys.stderr)
        return EXIT_USAGE
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    _coerce_complex(COMMANDS[args.command], args)
    if args.threads is None:
        try:
            args.threads = max(1, int(os.environ.get(THREADS_ENV, "1")))
        except ValueError:
            print(f"ellhyp: {THREADS_ENV} must be an integer", file=sys.stderr)
            return EXIT_USAGE
    if args.threads < 1:
        print("ellhyp: --threads must be >= 1", file=sys.stderr)
        return EXIT_USAGE

    report = {"command": args.command, "inputs": _echo(args), "version": __version__}
    code = EXIT_OK
    rows = None
    t0 = time.perf_counter()
    try:
        outputs, diagnostics, rows = args.func(args)
        report["outputs"] = outputs
        report["diagnostics"] = diagnostics
    except UsageError as exc:
        print(f"ellhyp {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except NonConvergent as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_NONCONV
    except (EllHypError, ZeroDivisionError, OverflowError) as exc:
        report["error"] = {"type": type(exc).__name__, "message": str(exc)}
        code = EXIT_DOMAIN
    report["wall_time_s"] = time.perf_counter() - t0
    fmt = args.format
    if code != EXIT_OK and fmt == "csv":
        fmt = "json"
    try:
        text = render(report, rows, fmt)
    except UsageError as exc:
        print(f"ellhyp {args.command}: {exc}", file=sys.stderr)
        return EXIT_USAGE
    if args.output:
        with open(args.output, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
