"""Sub- and supersolution certificates for small contact angles.

The subsolution side is a one-variable minimum check on G(alpha, t).  The
supersolution side builds (tau, A, rbar) from the linear profile f0 and a
barrier family g, then evaluates the three sign conditions on W/Qhat and on
the two-variable function K(x, xi) through its cubic-in-x expansion.
"""
from __future__ import annotations

import math
from functools import cached_property
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np

from ._extrema import grid_max, grid_min
from .errors import (CapconeError, ConditionFailed, InvalidParams, NoTau, NumericalFailure,
                     OutOfDomain)
from .pair import ConePair
from .specfun import ProfileFamily, eval_family, find_zero

TAU_SCAN_POINTS = 4001
TAU_SCAN_END = 0.999
TAU_SCAN_OFFSET = 1e-6
BISECT_TOL = 1e-15
XI_MIN = 1e-4
ENDPOINT_TOL = 1e-9
TAU_LIMIT_GAP = 1e-7
CRIT_GRID = 2001


def _as_float_array(x):
    arr = np.asarray(x, dtype=float)
    return np.atleast_1d(arr), arr.ndim == 0


def _bisect(fun, lo: float, hi: float, tol: float = BISECT_TOL) -> float:
    f_lo = fun(lo)
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if hi - lo <= tol * max(1.0, abs(mid)):
            break
        f_mid = fun(mid)
        if f_mid == 0.0:
            return mid
        if (f_mid > 0) == (f_lo > 0):
            lo, f_lo = mid, f_mid
        else:
            hi = mid
    return 0.5 * (lo + hi)


def _profile_and_barrier(pair: ConePair, exponent: float, t):
    """f0, f0', f0'', g, g', g'' with second derivatives from the defining ODEs."""
    f0 = ProfileFamily.linear(pair)
    g = ProfileFamily.barrier(pair, exponent)
    return (eval_family(f0, t), eval_family(f0, t, 1), eval_family(f0, t, 2, route="ode"),
            eval_family(g, t), eval_family(g, t, 1), eval_family(g, t, 2, route="ode"))


def _stability_rhs(pair: ConePair, t0: float) -> float:
    n, k = pair.n, pair.k
    return ((n - 2) * t0 - (k - 1) / t0) / (1.0 - t0 * t0)


def alpha_values(n: int, k: int) -> float:
    """Barrier exponent used for the subsolution of the pair (n, k), n >= 7."""
    ConePair(n, k)
    if n < 7:
        raise InvalidParams("barrier exponents are tabulated for n >= 7 only")
    if n == 7:
        return -3.23 if k == 1 else -3.0
    if n == 8:
        return -4.5
    if n == 9:
        return -5.5
    return float(4 - n)


# --------------------------------------------------------------------------
# subsolution

def _check_alpha(pair: ConePair, alpha: float) -> None:
    if not 2 - pair.n < alpha < 0:
        raise InvalidParams(f"alpha must lie in ({2 - pair.n}, 0), got {alpha}")


def subsolution_G(pair: ConePair, alpha: float, t):
    """(1-alpha)^2 f0^2 + (1-t^2)(f0' - f0 g'/g)^2."""
    _check_alpha(pair, alpha)
    ts, scalar = _as_float_array(t)
    f, fp, _, g, gp, _ = _profile_and_barrier(pair, alpha, ts)
    d = fp - f * gp / g
    out = (1.0 - alpha) ** 2 * f * f + (1.0 - ts * ts) * d * d
    return float(out[0]) if scalar else out


def subsolution_G_prime(pair: ConePair, alpha: float, t):
    """t-derivative of subsolution_G, differentiated analytically."""
    _check_alpha(pair, alpha)
    ts, scalar = _as_float_array(t)
    f, fp, fpp, g, gp, gpp = _profile_and_barrier(pair, alpha, ts)
    lg = gp / g
    d = fp - f * lg
    dp = fpp - fp * lg - f * (gpp / g - lg * lg)
    out = 2.0 * (1.0 - alpha) ** 2 * f * fp - 2.0 * ts * d * d + 2.0 * (1.0 - ts * ts) * d * dp
    return float(out[0]) if scalar else out


def stability_margin(pair: ConePair, alpha: float) -> float:
    """g'(t0)/g(t0) minus the stability threshold; positive iff G'(t0) < 0."""
    _check_alpha(pair, alpha)
    t0 = find_zero(ProfileFamily.linear(pair))
    g = ProfileFamily.barrier(pair, alpha)
    return eval_family(g, t0, 1) / eval_family(g, t0) - _stability_rhs(pair, t0)


@dataclass(frozen=True)
class SubsolutionCheck:
    pair: ConePair
    alpha: float
    margin: float
    verdict: bool
    t0: float
    g_at_t0: float
    g_min: float
    argmin: float
    critical_points: tuple = ()


def _sign_change_roots(fun, lo: float, hi: float, points: int) -> list:
    xs = np.linspace(lo, hi, points)
    ys = fun(xs)
    roots = []
    for i in range(points - 1):
        if ys[i] == 0.0:
            roots.append(float(xs[i]))
        elif ys[i] * ys[i + 1] < 0:
            roots.append(_bisect(lambda v: float(fun(np.array([v]))[0]), float(xs[i]), float(xs[i + 1]), 1e-14))
    return roots


def check_subsolution(pair: ConePair, alpha: float) -> SubsolutionCheck:
    """Does G(alpha, .) attain its minimum over [0, t0] at t0?"""
    _check_alpha(pair, alpha)
    t0 = find_zero(ProfileFamily.linear(pair))
    margin = stability_margin(pair, alpha)
    g_end = subsolution_G(pair, alpha, t0)
    argmin, g_min = grid_min(lambda t: subsolution_G(pair, alpha, t), 0.0, t0)
    verdict = bool(g_min >= g_end - ENDPOINT_TOL)
    crit = _sign_change_roots(lambda t: subsolution_G_prime(pair, alpha, t), 1e-3 * t0, t0 * (1 - 1e-9),
                              CRIT_GRID)
    return SubsolutionCheck(pair, float(alpha), float(margin), verdict, t0, float(g_end), float(g_min),
                            float(argmin), tuple(crit))


# --------------------------------------------------------------------------
# supersolution: construction

@dataclass(frozen=True)
class SupersolutionParams:
    pair: ConePair
    beta: float
    t0: float
    tau: float
    A: float
    rbar: float
    a1: float
    a0: float
    c_lambda: float

    @cached_property
    def height_ratio(self) -> float:
        """f0(tau)/g(tau), the coefficient of the barrier term in u."""
        return float(eval_family(ProfileFamily.linear(self.pair), self.tau)
                     / eval_family(ProfileFamily.barrier(self.pair, self.beta), self.tau))

    @cached_property
    def tau_slopes(self) -> tuple:
        return _tau_slopes(self)


def _tau_residual(pair: ConePair, beta: float, t0: float):
    f0 = ProfileFamily.linear(pair)
    g = ProfileFamily.barrier(pair, beta)
    target = (1.0 - t0 * t0) * eval_family(f0, t0, 1) ** 2

    def resid(t):
        f, fp = eval_family(f0, t), eval_family(f0, t, 1)
        d = fp - f * eval_family(g, t, 1) / eval_family(g, t)
        return (1.0 - beta) ** 2 * f * f + (1.0 - t * t) * d * d - target

    return resid


def auxiliary_constants(n: int, k: int, A: float, rbar: float):
    """(a1, a0) entering the zeroth-order coefficient of K."""
    m = n - k
    a1 = m * (1.5 * A * A * rbar - A + 0.5 * rbar) + (-2.0 * A * A * rbar + 3.0 * A - 1.5 * rbar)
    a0 = m * A * A * (A * A * rbar - A + 0.5 * rbar)
    return a1, a0


def build_supersolution(pair: ConePair, beta: float) -> SupersolutionParams:
    """tau, A, rbar, a1, a0 and the barrier prefactor for exponent beta."""
    n, k = pair.n, pair.k
    if not 2 - n < beta < -1:
        raise InvalidParams(f"beta must lie in ({2 - n}, -1), got {beta}")
    f0 = ProfileFamily.linear(pair)
    g = ProfileFamily.barrier(pair, beta)
    t0 = find_zero(f0)
    lhs = eval_family(g, t0, 1) / eval_family(g, t0)
    if not lhs > _stability_rhs(pair, t0):
        raise ConditionFailed(f"barrier log-derivative {lhs} below the stability threshold at t0")
    resid = _tau_residual(pair, beta, t0)
    grid = np.linspace(t0 + TAU_SCAN_OFFSET, TAU_SCAN_END, TAU_SCAN_POINTS)
    vals = resid(grid)
    sign_change = np.nonzero(np.sign(vals[:-1]) * np.sign(vals[1:]) < 0)[0]
    if sign_change.size == 0:
        raise NoTau(f"no root of the tau equation in ({t0}, {TAU_SCAN_END})")
    i = int(sign_change[0])
    tau = _bisect(lambda t: float(resid(t)), float(grid[i]), float(grid[i + 1]))
    s = math.sqrt(1.0 - tau * tau)
    rbar = s / tau
    f, fp = eval_family(f0, tau), eval_family(f0, tau, 1)
    gv, gp = eval_family(g, tau), eval_family(g, tau, 1)
    d = fp - f * gp / gv
    A = -((1.0 - beta) * tau * f + (1.0 - tau * tau) * d) / ((1.0 - beta) * f - tau * d) / s
    a1, a0 = auxiliary_constants(n, k, A, rbar)
    c_lambda = -f / (tau ** (1.0 - beta) * gv)
    return SupersolutionParams(pair, float(beta), t0, tau, A, rbar, a1, a0, c_lambda)


def a_minus_rbar(params: SupersolutionParams) -> float:
    """A - rbar through the closed form in the log-derivative gap at tau."""
    tau, beta = params.tau, params.beta
    f0 = ProfileFamily.linear(params.pair)
    g = ProfileFamily.barrier(params.pair, beta)
    gap = eval_family(f0, tau, 1) / eval_family(f0, tau) - eval_family(g, tau, 1) / eval_family(g, tau)
    return (1.0 - beta) / (tau * math.sqrt(1.0 - tau * tau) * (tau * gap - (1.0 - beta)))


# --------------------------------------------------------------------------
# supersolution: auxiliary functions u, H, W, Qhat

def _weight(params: SupersolutionParams, ts: np.ndarray):
    """(1-t^2)^{(1-beta)/2} normalized to 1 at tau, with two t-derivatives."""
    e = 1.0 - params.beta
    one = 1.0 - ts * ts
    q = (one / (1.0 - params.tau ** 2)) ** (0.5 * e)
    ell = -e * ts / one
    dell = -e * (1.0 + ts * ts) / (one * one)
    return q, ell * q, (ell * ell + dell) * q


def _u_parts(params: SupersolutionParams, ts: np.ndarray):
    f, fp, fpp, g, gp, gpp = _profile_and_barrier(params.pair, params.beta, ts)
    q, qp, qpp = _weight(params, ts)
    c = params.height_ratio
    u = f - c * q * g
    up = fp - c * (qp * g + q * gp)
    upp = fpp - c * (qpp * g + 2.0 * qp * gp + q * gpp)
    return {"f": f, "fp": fp, "fpp": fpp, "g": g, "gp": gp, "gpp": gpp,
            "q": q, "qp": qp, "qpp": qpp, "u": u, "up": up, "upp": upp}


def t_of_xi(params: SupersolutionParams, xi):
    tau = params.tau
    xi = np.asarray(xi, dtype=float)
    return tau * xi / np.sqrt(1.0 - tau * tau + tau * tau * xi * xi)


def xi_of_t(params: SupersolutionParams, t):
    t = np.asarray(t, dtype=float)
    return params.rbar * t / np.sqrt(1.0 - t * t)


def _check_t(params: SupersolutionParams, ts: np.ndarray) -> None:
    if np.any(ts < 0.0) or np.any(ts > params.tau * (1 + 1e-14)):
        raise OutOfDomain("t must lie in [0, tau]")


def _h_parts(params: SupersolutionParams, xis: np.ndarray):
    if np.any(xis < 0.0) or np.any(xis > 1.0 + 1e-14):
        raise OutOfDomain("xi must lie in [0, 1]")
    ts = np.minimum(t_of_xi(params, xis), params.tau)
    parts = _u_parts(params, ts)
    u, up, upp = parts["u"], parts["up"], parts["upp"]
    one = 1.0 - ts * ts
    rbar = params.rbar
    h = rbar * u / np.sqrt(one)
    h1 = ts * u + one * up
    h2 = one ** 1.5 * (u - ts * up + one * upp) / rbar
    return h, h1, h2


def eval_u_H(params: SupersolutionParams, s, deriv: int = 0, variable: str = "t"):
    """u (variable="t", s in [0, tau]) or H (variable="xi", s in [0, 1]) and derivatives."""
    if deriv not in (0, 1, 2):
        raise InvalidParams("deriv must be 0, 1 or 2")
    arr, scalar = _as_float_array(s)
    if variable == "t":
        _check_t(params, arr)
        parts = _u_parts(params, arr)
        out = parts[("u", "up", "upp")[deriv]]
    elif variable == "xi":
        out = _h_parts(params, arr)[deriv]
    else:
        raise InvalidParams("variable must be 't' or 'xi'")
    return float(out[0]) if scalar else out


def _ratios(params: SupersolutionParams):
    r = params.rbar / params.A
    return 1.0 - r, 1.0 / (params.A ** 2 + 1.0), r


def _w_from_parts(params: SupersolutionParams, ts: np.ndarray, pt: dict) -> np.ndarray:
    c1, c2, r = _ratios(params)
    beta = params.beta
    one = 1.0 - ts * ts
    main = (c1 * one + c2) * pt["f"] - c1 * ts * one * pt["fp"]
    bar = (beta * c1 * one - (1.0 - beta) * r + c2) * pt["g"] - c1 * ts * one * pt["gp"]
    return main - params.height_ratio * pt["q"] * bar


def _w_prime_from_parts(params: SupersolutionParams, ts: np.ndarray, pt: dict) -> np.ndarray:
    c1, c2, r = _ratios(params)
    beta = params.beta
    one = 1.0 - ts * ts
    main = (-2.0 * c1 * ts * pt["f"] + (c1 * one + c2) * pt["fp"]
            - c1 * ((1.0 - 3.0 * ts * ts) * pt["fp"] + ts * one * pt["fpp"]))
    coef = beta * c1 * one - (1.0 - beta) * r + c2
    bar = coef * pt["g"] - c1 * ts * one * pt["gp"]
    bar_p = (-2.0 * beta * c1 * ts * pt["g"] + coef * pt["gp"]
             - c1 * ((1.0 - 3.0 * ts * ts) * pt["gp"] + ts * one * pt["gpp"]))
    return main - params.height_ratio * (pt["qp"] * bar + pt["q"] * bar_p)


def _slope_factor(params: SupersolutionParams) -> tuple:
    """tau(1-tau^2) u'(tau)/f0(tau) together with u'(tau), u''(tau), f0(tau), f0'(tau)."""
    return params.tau_slopes


def _tau_slopes(params: SupersolutionParams) -> tuple:
    tau = params.tau
    pt = _u_parts(params, np.array([tau]))
    up, upp, f, fp = (float(pt[key][0]) for key in ("up", "upp", "f", "fp"))
    return tau * (1.0 - tau * tau) * up / f, up, upp, f, fp


def _q_from_parts(params: SupersolutionParams, ts: np.ndarray, pt: dict) -> np.ndarray:
    tau = params.tau
    kappa, up_tau, upp_tau, f_tau, fp_tau = _slope_factor(params)
    u, up = pt["u"], pt["up"]
    out = np.empty_like(ts)
    near = np.abs(ts - tau) < TAU_LIMIT_GAP
    far = ~near
    tt = ts[far]
    out[far] = (1.0 - tt * tt) * (1.0 - tt * up[far] / u[far]) + kappa * (pt["f"][far] / u[far] - 1.0)
    if np.any(near):
        # 0/0 at tau: numerator -t(1-t^2)u' + kappa f0 and u both vanish
        num_p = (-(1.0 - 3.0 * tau * tau) * up_tau - tau * (1.0 - tau * tau) * upp_tau + kappa * fp_tau)
        out[near] = (1.0 - tau * tau) - kappa + num_p / up_tau
    return out


def eval_W_Qhat(params: SupersolutionParams, t):
    """(W(t), Qhat(t)) on [0, tau]."""
    arr, scalar = _as_float_array(t)
    _check_t(params, arr)
    pt = _u_parts(params, arr)
    w = _w_from_parts(params, arr, pt)
    c1, c2, _ = _ratios(params)
    qhat = _q_from_parts(params, arr, pt) + c2 / c1
    if scalar:
        return float(w[0]), float(qhat[0])
    return w, qhat


def w_prime(params: SupersolutionParams, t):
    arr, scalar = _as_float_array(t)
    _check_t(params, arr)
    out = _w_prime_from_parts(params, arr, _u_parts(params, arr))
    return float(out[0]) if scalar else out


# --------------------------------------------------------------------------
# supersolution: K(x, xi) and its cubic expansion in x

@dataclass(frozen=True)
class KEvaluation:
    K: np.ndarray
    P0: np.ndarray
    P1: np.ndarray
    P2: np.ndarray
    P3: np.ndarray
    curly_P: np.ndarray
    P2_printed: np.ndarray
    curly_P_printed: np.ndarray


def _h_with_limits(params: SupersolutionParams, xis: np.ndarray):
    """H, xi H', H'/xi and H'' with the xi -> 0 limit of H'/xi set to H''(0)."""
    h, h1, h2 = _h_parts(params, xis)
    xh1 = xis * h1
    h1_over = np.empty_like(xis)
    pos = xis >= 1e-8
    h1_over[pos] = h1[pos] / xis[pos]
    h1_over[~pos] = h2[~pos]
    return h, xh1, h1_over, h2


def _k_kernel(params: SupersolutionParams, x, xis, hs):
    h, xh1, h1_over, h2 = hs
    n, k = params.pair.n, params.pair.k
    A, rbar, a1, a0 = params.A, params.rbar, params.a1, params.a0
    x = np.asarray(x, dtype=float)
    v = 1.0 - rbar * (1.0 - x) / (2.0 * A)
    den = A * A + x
    first = (1.0 + x * xis * xis / (A * A)) * h2
    second = -((n - k - 2.0 * x / den) * v / (rbar * A)) * xh1 + (k - 1) * h1_over
    poly = 0.5 * rbar * (n - k - 1) * x * x + a1 * x + a0
    third = A * poly * v * h / ((rbar * A) ** 2 * den * den)
    return first + second + third


def eval_K_P(params: SupersolutionParams, x, xi) -> KEvaluation:
    """K(x, xi), the cubic coefficients P0..P3 in x, and the curvature margin function."""
    xis, _ = _as_float_array(xi)
    xs = np.asarray(x, dtype=float)
    if np.any(xs < 0) or np.any(xs > 1):
        raise OutOfDomain("x must lie in [0, 1]")
    n, k = params.pair.n, params.pair.k
    A, rbar, a1, a0 = params.A, params.rbar, params.a1, params.a0
    hs = _h_with_limits(params, xis)
    h, xh1, h1_over, h2 = hs
    A2 = A * A
    K = _k_kernel(params, xs, xis, hs)
    P0 = A2 * A2 * _k_kernel(params, 0.0, xis, hs)
    P3 = (xis * xis * h2 - 0.5 * (n - k - 2) * xh1 + 0.25 * (n - k - 1) * h) / A2
    P2 = ((1.0 + 2.0 * xis * xis) * h2
          - (1.0 + (n - k - 2) * (A2 * rbar + A - 0.5 * rbar) / (rbar * A2)) * xh1
          + (k - 1) * h1_over
          + ((n - k - 1) * (A - 0.5 * rbar) + a1) / (2.0 * rbar * A2) * h)
    P1 = (A2 * (2.0 + xis * xis) * h2
          + ((n - k - 1) * (1.0 - 2.0 * A / rbar - 0.5 * A2) - 0.5 * A2) * xh1
          + 2.0 * A2 * (k - 1) * h1_over
          + (2.0 * a1 * A + (a0 - a1) * rbar) / (2.0 * (rbar * A) ** 2) * h)
    curly = P2 + P3 + np.minimum(P3, 0.0)
    # variant with the opposite sign on the (k-1) H'/xi term; it does not
    # satisfy the cubic identity but is what the reference table was built from
    P2_printed = P2 - 2.0 * (k - 1) * h1_over
    curly_printed = P2_printed + P3 + np.minimum(P3, 0.0)
    return KEvaluation(K, P0, P1, P2, P3, curly, P2_printed, curly_printed)


def cubic_in_x(ev: KEvaluation, x):
    x = np.asarray(x, dtype=float)
    return ((ev.P3 * x + ev.P2) * x + ev.P1) * x + ev.P0


def convexity_expansion(ev: KEvaluation, x):
    """(1-x)P(0) + x P(1) - x(1-x)(P2 + (1+x)P3)."""
    x = np.asarray(x, dtype=float)
    p_one = ev.P0 + ev.P1 + ev.P2 + ev.P3
    return (1.0 - x) * ev.P0 + x * p_one - x * (1.0 - x) * (ev.P2 + (1.0 + x) * ev.P3)


# --------------------------------------------------------------------------
# supersolution: verification

@dataclass(frozen=True)
class VerificationReport:
    params: SupersolutionParams
    rbar_minus_A: float
    max_Qhat: float
    max_K0: float
    max_K1: float
    min_P: float
    s1_ok: bool
    s2_ok: bool
    s3_ok: bool
    w_prime_tau: float
    s1_gap: float = 0.0
    max_W_interior: float = 0.0
    max_K_square: float = 0.0
    s3_route: str = "decomposition"

    @property
    def all_ok(self) -> bool:
        return self.s1_ok and self.s2_ok and self.s3_ok

    def as_dict(self) -> dict:
        p = self.params
        return {"n": p.pair.n, "k": p.pair.k, "beta": p.beta, "t0": p.t0, "tau": p.tau, "A": p.A,
                "rbar": p.rbar, "a1": p.a1, "a0": p.a0, "c_lambda": p.c_lambda,
                "rbar_minus_A": self.rbar_minus_A, "max_Qhat": self.max_Qhat, "max_K0": self.max_K0,
                "max_K1": self.max_K1, "min_P": self.min_P, "w_prime_tau": self.w_prime_tau,
                "s1_gap": self.s1_gap, "max_W_interior": self.max_W_interior,
                "max_K_square": self.max_K_square, "s3_route": self.s3_route,
                "s1_ok": self.s1_ok, "s2_ok": self.s2_ok, "s3_ok": self.s3_ok, "all_ok": self.all_ok}


def _xi_extreme(fun, mode: str) -> float:
    at_zero = float(fun(np.array([0.0]))[0])
    search = grid_max if mode == "max" else grid_min
    return search(fun, XI_MIN, 1.0, extra=[(0.0, at_zero)])[1]


def max_K_on_square(params: SupersolutionParams, xi_points: int = 2001, x_points: int = 201) -> float:
    """max of K over [0,1]^2 from the cubic in x: a fixed x grid plus every critical point of the cubic."""
    xis = np.concatenate([[0.0], np.linspace(XI_MIN, 1.0, xi_points)])
    ev = eval_K_P(params, 0.0, xis)
    a2 = params.A ** 2
    xs = np.linspace(0.0, 1.0, x_points)[:, None]
    best = float(np.max(cubic_in_x(ev, xs) / (a2 + xs) ** 2))
    # stationary points of the cubic, 3 P3 x^2 + 2 P2 x + P1 = 0
    a, b, c = 3.0 * ev.P3, 2.0 * ev.P2, ev.P1
    disc = np.maximum(b * b - 4.0 * a * c, 0.0)
    with np.errstate(divide="ignore", invalid="ignore"):
        roots = [(-b + np.sqrt(disc)) / (2.0 * a), (-b - np.sqrt(disc)) / (2.0 * a), -c / b]
    for r in roots:
        r = np.where(np.isfinite(r) & (r >= 0.0) & (r <= 1.0), r, 0.0)
        best = max(best, float(np.max(cubic_in_x(ev, r) / (a2 + r) ** 2)))
    return best


def verify_supersolution(pair: ConePair, beta: float) -> VerificationReport:
    """Sign conditions for the supersolution with exponent beta, over the full domains."""
    params = build_supersolution(pair, beta)
    tau, beta = params.tau, params.beta
    f0 = ProfileFamily.linear(pair)
    g = ProfileFamily.barrier(pair, beta)
    s1_gap = tau * (eval_family(f0, tau, 1) / eval_family(f0, tau)
                    - eval_family(g, tau, 1) / eval_family(g, tau)) - (1.0 - beta)
    max_qhat = grid_max(lambda t: eval_W_Qhat(params, t)[1], 0.0, tau)[1]
    wp_tau = float(w_prime(params, tau))
    max_k0 = _xi_extreme(lambda z: eval_K_P(params, 0.0, z).K, "max")
    max_k1 = _xi_extreme(lambda z: eval_K_P(params, 1.0, z).K, "max")
    min_p = _xi_extreme(lambda z: eval_K_P(params, 0.0, z).curly_P, "min")
    max_w = float(np.max(eval_W_Qhat(params, np.linspace(0.0, tau - 1e-4, 2001))[0]))
    if not all(math.isfinite(v) for v in (max_qhat, wp_tau, max_k0, max_k1, min_p)):
        raise NumericalFailure(f"non-finite extremum for ({pair.n}, {pair.k}, {beta})")
    edges_ok = max_k0 < 0 and max_k1 < 0
    if min_p > 0:
        route, max_sq, s3 = "decomposition", float("nan"), edges_ok
    else:
        # the convexity decomposition is inconclusive; bound K on the square directly
        max_sq = max_K_on_square(params)
        route, s3 = "direct", edges_ok and max_sq < 0
    return VerificationReport(
        params=params, rbar_minus_A=params.rbar - params.A, max_Qhat=float(max_qhat),
        max_K0=float(max_k0), max_K1=float(max_k1), min_P=float(min_p),
        s1_ok=bool(s1_gap > 0), s2_ok=bool(max_qhat < 0 and wp_tau > 0), s3_ok=bool(s3),
        w_prime_tau=wp_tau, s1_gap=float(s1_gap), max_W_interior=max_w,
        max_K_square=max_sq, s3_route=route)


# Sampling used for the published reference table: Qhat on a 1000-step grid
# of [0, tau] with the removable endpoint dropped, K(0,.) and K(1,.) on the
# nine points 0.1, ..., 0.9, and the curvature margin built from the
# sign-flipped P2 coefficient (see KEvaluation.P2_printed) over [0, 1].
TABLE_Q_STEPS = 1000
TABLE_XI = np.linspace(0.1, 0.9, 9)


def table_convention_values(params: SupersolutionParams) -> dict:
    """The five tabulated quantities under the sampling the reference table used."""
    ts = np.linspace(0.0, params.tau, TABLE_Q_STEPS + 1)[:-1]
    return {
        "rbar_minus_A": params.rbar - params.A,
        "max_Qhat": float(np.max(eval_W_Qhat(params, ts)[1])),
        "max_K0": float(np.max(eval_K_P(params, 0.0, TABLE_XI).K)),
        "max_K1": float(np.max(eval_K_P(params, 1.0, TABLE_XI).K)),
        "min_P": _xi_extreme(lambda z: eval_K_P(params, 0.0, z).curly_P_printed, "min"),
    }


# --------------------------------------------------------------------------
# beta scans

@dataclass
class BetaScan:
    pair: ConePair
    grid: list
    admissible: list
    runs: list = field(default_factory=list)
    failures: dict = field(default_factory=dict)

    @property
    def inf_estimate(self) -> Optional[float]:
        return min(self.admissible) if self.admissible else None


def admissible_runs(values: Sequence[float], ok_flags: Sequence[bool]) -> list:
    """Maximal runs (first, last) of consecutive grid values flagged True."""
    runs, start = [], None
    for i, ok in enumerate(ok_flags):
        if ok and start is None:
            start = i
        if (not ok or i == len(values) - 1) and start is not None:
            end = i if ok else i - 1
            runs.append((values[start], values[end]))
            start = None
    return runs


def scan_beta(pair: ConePair, grid: Sequence[float]) -> BetaScan:
    """Grid values of beta passing all three conditions, grouped into maximal runs."""
    values = sorted(float(b) for b in grid)
    ok_flags = []
    failures = {}
    for beta in values:
        try:
            ok = verify_supersolution(pair, beta).all_ok
        except CapconeError as exc:
            ok = False
            failures[beta] = type(exc).__name__
        ok_flags.append(ok)
    runs = admissible_runs(values, ok_flags)
    admissible = [b for b, ok in zip(values, ok_flags) if ok]
    return BetaScan(pair, values, admissible, runs, failures)
