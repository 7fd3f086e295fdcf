"""Shooting integration of the capillary cone profile equation.

The profile f(t) of an O(n-k) x O(k)-invariant cone solves, for a scaling
parameter lam >= 0,

    (1-t^2) f'' + (f - t f') + (n-2) (1 + (1-t^2) lam f'^2 / (1 + lam f^2)) (f - A f') = 0,

with A(t) = t - alpha/t, f(0) = a, f'(0) = 0.  lam = 1 is the geometric problem,
lam = 0 the linearized (harmonic) one.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Union

import numpy as np
from scipy.integrate import solve_ivp
from scipy.optimize import brentq

from .errors import AmbiguousNearLawson, InvalidParams, NumericalFailure, OutOfDomain, SingularTime
from .pair import ConePair

__all__ = [
    "ConePair", "ShootRequest", "ZeroCrossing", "Blowup", "LawsonExact", "ProfileTrajectory",
    "HeightClass", "ode_rhs", "taylor_seed", "taylor_coefficients", "integrate_profile",
    "lawson_profile", "psi_eval", "classify_by_height", "riccati_seed",
]

RTOL = 1e-12
ATOL = 1e-14
T_SEED = 1e-4
SEED_DEGREE = 6
SWITCH_SLOPE = 1e3
SWITCH_BACK_SLOPE = 1e2
T_GUARD = 1.0 - 1e-9
TOL_EQ = 1e-9


@dataclass(frozen=True)
class ShootRequest:
    pair: ConePair
    lam: float
    a: float

    def __post_init__(self) -> None:
        if not self.lam >= 0:
            raise InvalidParams(f"scaling parameter must be >= 0, got {self.lam}")
        if not self.a > 0:
            raise InvalidParams(f"initial height must be > 0, got {self.a}")


@dataclass(frozen=True)
class ZeroCrossing:
    t_a: float
    slope: float


@dataclass(frozen=True)
class Blowup:
    b_a: float
    f_b: float


@dataclass(frozen=True)
class LawsonExact:
    t_zero: float


TerminalEvent = Union[ZeroCrossing, Blowup, LawsonExact]


def ode_rhs(req: ShootRequest, t, f, fp):
    """f'' solved from the profile equation."""
    if np.any(np.asarray(t) >= 1.0):
        raise SingularTime("the profile equation is singular at t = 1")
    n = req.pair.n
    lam = req.lam
    one_m = 1.0 - t * t
    h = f - req.pair.A(t) * fp
    stretch = 1.0 + one_m * lam * fp * fp / (1.0 + lam * f * f)
    return -((f - t * fp) + (n - 2) * stretch * h) / one_m


def _rhs_t_chart(pair: ConePair, lam: float):
    n = pair.n
    alpha = pair.alpha

    def rhs(t, y):
        f, fp = y
        one_m = 1.0 - t * t
        h = f - (t - alpha / t) * fp
        stretch = 1.0 + one_m * lam * fp * fp / (1.0 + lam * f * f)
        return [fp, -((f - t * fp) + (n - 2) * stretch * h) / one_m]

    return rhs


def _rhs_f_chart(pair: ConePair, lam: float):
    # independent variable f, state (t, p) with p = dt/df
    n = pair.n
    alpha = pair.alpha

    def rhs(f, y):
        t, p = y
        one_m = 1.0 - t * t
        big_l = one_m * lam / (1.0 + lam * f * f)
        A = t - alpha / t
        dp = (p ** 3 * f - t * p * p + (n - 2) * (p * p + big_l) * (p * f - A)) / one_m
        return [p, dp]

    return rhs


def _polymul(p: np.ndarray, q: np.ndarray, deg: int) -> np.ndarray:
    return np.convolve(p, q)[: deg + 1]


def _polyder(p: np.ndarray) -> np.ndarray:
    return p[1:] * np.arange(1, p.size) if p.size > 1 else np.zeros(1)


def _series_residual(pair: ConePair, lam: float, coeffs: np.ndarray, deg: int) -> np.ndarray:
    """Power-series coefficients of the polynomial form of the profile equation.

    t (1 + lam f^2) [(1-t^2) f'' + f - t f'] + (n-2) [(1 + lam f^2) + (1-t^2) lam f'^2] (t f - (t^2 - alpha) f')
    """
    n, alpha = pair.n, pair.alpha
    size = deg + 1
    f = np.zeros(size)
    f[: min(size, coeffs.size)] = coeffs[:size]
    fp = np.zeros(size)
    d1 = _polyder(f)
    fp[: d1.size] = d1
    fpp = np.zeros(size)
    d2 = _polyder(fp)
    fpp[: d2.size] = d2
    t = np.zeros(size)
    t[1] = 1.0
    one_m = np.zeros(size)
    one_m[0], one_m[2] = 1.0, -1.0
    t2_m_alpha = np.zeros(size)
    t2_m_alpha[0], t2_m_alpha[2] = -alpha, 1.0
    w = lam * _polymul(f, f, deg)
    w[0] += 1.0
    inner = _polymul(one_m, fpp, deg) + f - _polymul(t, fp, deg)
    first = _polymul(t, _polymul(w, inner, deg), deg)
    stretch = w + lam * _polymul(one_m, _polymul(fp, fp, deg), deg)
    h_t = _polymul(t, f, deg) - _polymul(t2_m_alpha, fp, deg)
    return first + (n - 2) * _polymul(stretch, h_t, deg)


def taylor_coefficients(req: ShootRequest, degree: int = SEED_DEGREE) -> np.ndarray:
    """Even Taylor coefficients c_j of f = sum c_j t^(2j), j <= degree/2."""
    m_max = degree // 2
    deg = 2 * m_max + 2
    coeffs = np.zeros(2 * m_max + 1)
    coeffs[0] = req.a
    for m in range(m_max):
        # the t^(2m+1) coefficient is affine in c_(m+1)
        idx = 2 * (m + 1)
        trial = coeffs.copy()
        trial[idx] = 0.0
        r0 = _series_residual(req.pair, req.lam, trial, deg)[2 * m + 1]
        trial[idx] = 1.0
        r1 = _series_residual(req.pair, req.lam, trial, deg)[2 * m + 1]
        coeffs[idx] = -r0 / (r1 - r0)
    return coeffs[::2]


def taylor_seed(req: ShootRequest, t_seed: float = T_SEED):
    """(f, f') at t_seed from the degree-6 even Taylor polynomial."""
    if not 0 < t_seed <= 1e-3:
        raise InvalidParams("seed offset must lie in (0, 1e-3]")
    c = taylor_coefficients(req)
    powers = np.arange(c.size)
    f = float(np.sum(c * t_seed ** (2 * powers)))
    fp = float(np.sum(c[1:] * 2 * powers[1:] * t_seed ** (2 * powers[1:] - 1)))
    return f, fp


class _Segment:
    """One chart of the integration with its dense solution."""

    def __init__(self, chart: str, sol, lo: float, hi: float):
        self.chart = chart
        self.sol = sol
        self.lo = lo
        self.hi = hi


@dataclass
class ProfileTrajectory:
    request: ShootRequest
    t: np.ndarray
    f: np.ndarray
    fp: np.ndarray
    terminal: TerminalEvent
    zero: Optional[ZeroCrossing] = None
    segments: list = field(default_factory=list, repr=False)
    closed_form: bool = False

    @property
    def t_end(self) -> float:
        if isinstance(self.terminal, Blowup):
            return self.terminal.b_a
        if isinstance(self.terminal, ZeroCrossing):
            return self.terminal.t_a
        return self.terminal.t_zero

    def evaluate(self, ts):
        """(f, f') at the given times, from the dense integrator output."""
        ts = np.atleast_1d(np.asarray(ts, dtype=float))
        f = np.empty_like(ts)
        fp = np.empty_like(ts)
        if self.closed_form:
            scale = 1.0 / math.sqrt(self.request.lam)
            pair = self.request.pair
            f[:] = scale * lawson_profile(pair, ts)
            with np.errstate(divide="ignore"):
                fp[:] = -scale * (pair.n - 1) * ts / ((pair.n - pair.k - 1) * lawson_profile(pair, ts))
            return f, fp
        done = np.zeros(ts.shape, dtype=bool)
        for seg in self.segments:
            if seg.chart == "t":
                m = ~done & (ts > T_SEED) & (ts >= seg.lo) & (ts <= seg.hi)
                if m.any():
                    y = seg.sol(ts[m])
                    f[m], fp[m] = y[0], y[1]
                    done |= m
        for i in np.nonzero(~done)[0]:
            f[i], fp[i] = self._eval_one(ts[i])
        return f, fp

    def _eval_one(self, t: float):
        if t <= T_SEED:
            c = taylor_coefficients(self.request)
            pw = np.arange(c.size)
            return (float(np.sum(c * t ** (2 * pw))),
                    float(np.sum(c[1:] * 2 * pw[1:] * t ** (2 * pw[1:] - 1))))
        for seg in self.segments:
            if seg.chart == "t" and seg.lo <= t <= seg.hi:
                y = seg.sol(t)
                return float(y[0]), float(y[1])
        for seg in self.segments:
            if seg.chart == "f":
                t_lo, t_hi = seg.sol(seg.lo)[0], seg.sol(seg.hi)[0]
                if min(t_lo, t_hi) <= t <= max(t_lo, t_hi):
                    fv = brentq(lambda s: seg.sol(s)[0] - t, seg.lo, seg.hi, xtol=1e-15, rtol=1e-15)
                    p = seg.sol(fv)[1]
                    return float(fv), (1.0 / p if p != 0 else -math.inf)
        raise OutOfDomain(f"t = {t} is outside the integrated range [0, {self.t[-1]}]")


def _lawson_trajectory(req: ShootRequest) -> ProfileTrajectory:
    pair = req.pair
    tz = pair.lawson_zero
    ts = np.linspace(0.0, tz, 401)
    scale = 1.0 / math.sqrt(req.lam)
    f = scale * lawson_profile(pair, ts)
    with np.errstate(divide="ignore"):
        fp = -scale * (pair.n - 1) * ts / ((pair.n - pair.k - 1) * lawson_profile(pair, ts))
    return ProfileTrajectory(req, ts, f, fp, LawsonExact(tz), closed_form=True)


def _is_exact_lawson(req: ShootRequest) -> bool:
    if req.lam <= 0:
        return False
    return abs(math.sqrt(req.lam) * req.a - req.pair.a_star) <= 4 * np.finfo(float).eps * req.pair.a_star


def integrate_profile(req: ShootRequest, extend: bool = False, max_switches: int = 20) -> ProfileTrajectory:
    """Shoot from t = 0 and stop at the first zero crossing or the slope blow-up.

    With extend=True the integration continues through the zero crossing until
    the blow-up, recording the crossing in `zero`.
    """
    if _is_exact_lawson(req):
        return _lawson_trajectory(req)
    pair = req.pair
    f0, fp0 = taylor_seed(req)
    ts, fs, fps = [0.0, T_SEED], [req.a, f0], [0.0, fp0]
    segments = []
    zero: Optional[ZeroCrossing] = None
    rhs_t = _rhs_t_chart(pair, req.lam)
    rhs_f = _rhs_f_chart(pair, req.lam)
    chart = "t"
    state = (T_SEED, f0, fp0)
    for _ in range(max_switches):
        t_cur, f_cur, fp_cur = state
        if chart == "t":
            def ev_zero(t, y):
                return y[0]
            ev_zero.terminal = not extend
            ev_zero.direction = -1

            def ev_switch(t, y):
                return abs(y[1]) - SWITCH_SLOPE
            ev_switch.terminal = True
            ev_switch.direction = 1
            sol = solve_ivp(rhs_t, (t_cur, T_GUARD), [f_cur, fp_cur], method="DOP853", rtol=RTOL,
                            atol=ATOL, events=[ev_zero, ev_switch], dense_output=True)
            if sol.status == -1:
                raise NumericalFailure(f"integration failed: {sol.message}")
            segments.append(_Segment("t", sol.sol, t_cur, sol.t[-1]))
            ts.extend(sol.t[1:])
            fs.extend(sol.y[0, 1:])
            fps.extend(sol.y[1, 1:])
            if sol.t_events[0].size and zero is None:
                tz = float(sol.t_events[0][0])
                zero = ZeroCrossing(tz, float(sol.y_events[0][0][1]))
                if not extend:
                    return ProfileTrajectory(req, np.array(ts), np.array(fs), np.array(fps), zero,
                                             zero, segments)
            if sol.t_events[1].size:
                te = float(sol.t_events[1][0])
                ye = sol.y_events[1][0]
                chart = "f"
                state = (te, float(ye[0]), float(ye[1]))
                continue
            raise SingularTime(f"no zero crossing or blow-up before t = {T_GUARD}")
        else:
            # inverse chart: march in f downward until dt/df vanishes
            p_cur = 1.0 / fp_cur
            f_stop = 0.0 if (zero is None and not extend) else f_cur - 1e3

            def ev_blow(f, y):
                return y[1]
            ev_blow.terminal = True

            def ev_back(f, y):
                return abs(y[1]) * SWITCH_BACK_SLOPE - 1.0
            ev_back.terminal = True
            ev_back.direction = 1

            def ev_edge(f, y):
                return T_GUARD - y[0]
            ev_edge.terminal = True
            sol = solve_ivp(rhs_f, (f_cur, f_stop), [t_cur, p_cur], method="DOP853", rtol=RTOL,
                            atol=ATOL, events=[ev_blow, ev_back, ev_edge], dense_output=True)
            if sol.status == -1:
                raise NumericalFailure(f"integration failed: {sol.message}")
            f_last = float(sol.t[-1])
            segments.append(_Segment("f", sol.sol, f_last, f_cur))
            keep = sol.y[1, 1:] != 0
            ts.extend(sol.y[0, 1:][keep])
            fs.extend(sol.t[1:][keep])
            fps.extend(1.0 / sol.y[1, 1:][keep])
            if zero is None and f_last <= 0.0 <= f_cur:
                # the zero of f lies on this chart
                tz, pz = sol.sol(0.0)
                zero = ZeroCrossing(float(tz), float(1.0 / pz))
                if not extend and not sol.t_events[0].size:
                    return ProfileTrajectory(req, np.array(ts), np.array(fs), np.array(fps), zero,
                                             zero, segments)
            if sol.t_events[0].size:
                fb = float(sol.t_events[0][0])
                tb = float(sol.y_events[0][0][0])
                return ProfileTrajectory(req, np.array(ts), np.array(fs), np.array(fps),
                                         Blowup(tb, fb), zero, segments)
            if sol.t_events[2].size:
                raise SingularTime(f"no zero crossing or blow-up before t = {T_GUARD}")
            if sol.t_events[1].size:
                fe = float(sol.t_events[1][0])
                te, pe = sol.y_events[1][0]
                chart = "t"
                state = (float(te), fe, float(1.0 / pe))
                continue
            raise NumericalFailure("inverse-chart integration ended without an event")
    raise NumericalFailure("too many chart switches")


def lawson_profile(pair: ConePair, t):
    """Closed-form Lawson profile sqrt((k - (n-1) t^2) / (n-k-1))."""
    t = np.asarray(t, dtype=float)
    rad = (pair.k - (pair.n - 1) * t * t) / (pair.n - pair.k - 1)
    if np.any(rad < -1e-14):
        raise OutOfDomain("t lies beyond the zero of the Lawson profile")
    out = np.sqrt(np.maximum(rad, 0.0))
    return float(out) if out.ndim == 0 else out


def psi_eval(pair: ConePair, t, f, fp):
    """Monotone quantity f (f - A f') - 1/(n-2)."""
    t = np.asarray(t, dtype=float)
    out = f * (f - pair.A(t) * fp) - 1.0 / (pair.n - 2)
    return float(out) if np.ndim(out) == 0 else out


class HeightClass(enum.Enum):
    ReachesZero = "reaches_zero"
    Lawson = "lawson"
    BlowsUpPositive = "blows_up_positive"


def classify_by_height(pair: ConePair, a: float, tol_eq: float = TOL_EQ) -> HeightClass:
    """Classify f(0) = a by integration, cross-checked against sgn(a - a_star)."""
    a_star = pair.a_star
    if abs(a - a_star) <= tol_eq * a_star:
        return HeightClass.Lawson
    traj = integrate_profile(ShootRequest(pair, 1.0, a))
    if isinstance(traj.terminal, ZeroCrossing):
        found = HeightClass.ReachesZero
    elif isinstance(traj.terminal, Blowup) and traj.terminal.f_b > 0:
        found = HeightClass.BlowsUpPositive
    else:
        raise AmbiguousNearLawson(f"unexpected terminal event {traj.terminal}")
    expected = HeightClass.ReachesZero if a < a_star else HeightClass.BlowsUpPositive
    if found != expected:
        raise AmbiguousNearLawson(f"integration says {found.name}, height comparison says {expected.name}")
    return found


def riccati_seed(pair: ConePair, w0: float):
    """(q'(0), w''(0), q'''(0), w''''(0)) for q = f'/f and w = lam f^2 / (1 + lam f^2)."""
    if not 0 < w0 < 1:
        raise InvalidParams("w0 must lie in (0, 1)")
    n, k = pair.n, pair.k
    q1 = -(n - 1) / k
    w2 = -2 * (n - 1) * w0 * (1 - w0) / k
    q3 = -6 * (n - 1) / (k ** 3 * (k + 2)) * (k * k * n + (n - 1) * ((n - k - 1) * w0 + k))
    w4 = (12 * (n - 1) ** 2 * w0 * (1 - w0) / (k ** 3 * (k + 2))
          * (k * (k + 2) * (1 - 2 * w0) - (k * k * n / (n - 1) + (n - k - 1) * w0 + k)))
    return q1, w2, q3, w4
