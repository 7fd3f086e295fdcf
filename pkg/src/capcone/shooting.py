"""The contact-angle <-> initial-height bijection and related sweeps."""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass, field
from typing import Optional, Sequence

import numpy as np
from scipy.optimize import brentq

from .errors import InvalidPair, InvalidParams, NonConvergence, NotReachingZero
from .pair import ConePair
from .profile_ode import (Blowup, LawsonExact, ProfileTrajectory, ShootRequest, ZeroCrossing,
                          integrate_profile)
from .specfun import ProfileFamily, eval_family, find_zero

HALF_PI = 0.5 * math.pi
NEAR_HALF_PI = 0.05
A_FLOOR = 1e-8
A_CEIL_GAP = 1e-12
MAX_ITER = 200
CROSS_GRID = 4096


@dataclass
class ConeSolution:
    pair: ConePair
    a: float
    trajectory: ProfileTrajectory
    t_a: float
    theta: float
    eps: Optional[float] = None
    t_hat: Optional[float] = None
    terminal_value: Optional[float] = None


def _angle_at_zero(t_a: float, slope: float) -> float:
    # theta = arctan(sqrt(1-t^2) |f'|), written to stay finite for huge slopes
    return math.atan2(math.sqrt(1.0 - t_a * t_a) * abs(slope), 1.0) if math.isfinite(slope) else HALF_PI


def _check_pair(pair: ConePair) -> None:
    if not isinstance(pair, ConePair):
        raise InvalidPair("expected a ConePair (1 <= k <= n-2)")


def terminal_angle(pair: ConePair, a: float) -> float:
    """Contact angle of the profile with f(0) = a at its first zero."""
    _check_pair(pair)
    if not 0 < a < pair.a_star:
        raise NotReachingZero(f"a = {a} does not reach zero (a_star = {pair.a_star})")
    traj = integrate_profile(ShootRequest(pair, 1.0, a))
    if not isinstance(traj.terminal, ZeroCrossing):
        raise NotReachingZero(f"profile with a = {a} ends with {traj.terminal}")
    return _angle_at_zero(traj.terminal.t_a, traj.terminal.slope)


def _lawson_solution(pair: ConePair) -> ConeSolution:
    req = ShootRequest(pair, 1.0, pair.a_star)
    traj = integrate_profile(req)
    return ConeSolution(pair, pair.a_star, traj, pair.lawson_zero, HALF_PI)


def _solution_at(pair: ConePair, a: float) -> ConeSolution:
    traj = integrate_profile(ShootRequest(pair, 1.0, a))
    if not isinstance(traj.terminal, ZeroCrossing):
        raise NotReachingZero(f"profile with a = {a} ends with {traj.terminal}")
    return ConeSolution(pair, a, traj, traj.terminal.t_a,
                        _angle_at_zero(traj.terminal.t_a, traj.terminal.slope))


def solve_cone(pair: ConePair, theta: float) -> ConeSolution:
    """Initial height whose profile meets the boundary at contact angle theta."""
    _check_pair(pair)
    if not 0 < theta <= HALF_PI + 1e-9:
        raise InvalidParams(f"theta must lie in (0, pi/2], got {theta}")
    if abs(theta - HALF_PI) <= 1e-9:
        return _lawson_solution(pair)
    if theta > HALF_PI - NEAR_HALF_PI:
        return _solve_theta_by_eps(pair, theta)
    lo, hi = A_FLOOR, pair.a_star - A_CEIL_GAP
    a = brentq(lambda x: terminal_angle(pair, x) - theta, lo, hi, xtol=1e-15, rtol=1e-15,
               maxiter=MAX_ITER)
    return _solution_at(pair, a)


def _terminal_value(pair: ConePair, a: float) -> float:
    traj = integrate_profile(ShootRequest(pair, 1.0, a), extend=True)
    term = traj.terminal
    if isinstance(term, Blowup):
        return term.f_b
    return 0.0


def solve_near_half_pi(pair: ConePair, eps: float) -> ConeSolution:
    """Profile continued past its zero whose blow-up value is exactly -eps."""
    _check_pair(pair)
    if not 0 < eps <= 0.1 * pair.a_star:
        raise InvalidParams(f"eps must lie in (0, 0.1 a_star], got {eps}")
    a_star = pair.a_star
    hi = a_star * (1.0 - 1e-14)
    if _terminal_value(pair, hi) <= -eps:
        raise NonConvergence("upper bracket already below the target terminal value")
    gap = eps / a_star
    lo = a_star * (1.0 - gap)
    for _ in range(60):
        if _terminal_value(pair, lo) < -eps:
            break
        gap = min(2.0 * gap, 0.999)
        lo = a_star * (1.0 - gap)
    else:
        raise NonConvergence("could not bracket the terminal value")
    try:
        a = brentq(lambda x: _terminal_value(pair, x) + eps, lo, hi, xtol=1e-16, rtol=1e-15,
                   maxiter=MAX_ITER)
    except RuntimeError as exc:
        raise NonConvergence(str(exc)) from exc
    traj = integrate_profile(ShootRequest(pair, 1.0, a), extend=True)
    if traj.zero is None or not isinstance(traj.terminal, Blowup):
        raise NonConvergence("terminal-value shooting did not produce a crossing and blow-up")
    zero = traj.zero
    return ConeSolution(pair, a, traj, zero.t_a, _angle_at_zero(zero.t_a, zero.slope), eps=eps,
                        t_hat=traj.terminal.b_a, terminal_value=traj.terminal.f_b)


def _solve_theta_by_eps(pair: ConePair, theta: float) -> ConeSolution:
    gap = HALF_PI - theta
    guess = gap * math.sqrt(pair.k / (pair.n - pair.k - 1))
    cap = 0.1 * pair.a_star

    def mismatch(eps):
        return solve_near_half_pi(pair, eps).theta - theta

    lo, hi = 0.5 * guess, min(2.0 * guess, cap)
    for _ in range(40):
        if mismatch(lo) > 0:
            break
        lo *= 0.5
    for _ in range(40):
        if mismatch(hi) < 0 or hi >= cap:
            break
        hi = min(2.0 * hi, cap)
    eps = brentq(mismatch, lo, hi, xtol=1e-15, rtol=1e-15, maxiter=MAX_ITER)
    return solve_near_half_pi(pair, eps)


class SweepMode(enum.Enum):
    VaryHeight = "heights"
    VaryLambda = "lambda"


@dataclass
class SweepMember:
    param: float
    trajectory: ProfileTrajectory
    lawson: bool = False

    @property
    def terminal_kind(self) -> str:
        term = self.trajectory.terminal
        if isinstance(term, ZeroCrossing):
            return "zero"
        if isinstance(term, Blowup):
            return "blowup"
        return "lawson"

    @property
    def positive_end(self) -> float:
        return self.trajectory.t_end


@dataclass
class FamilySweep:
    pair: ConePair
    mode: SweepMode
    fixed: float
    members: list
    crossings: dict = field(default_factory=dict)
    ordering_margin: Optional[float] = None

    @property
    def ordered(self) -> bool:
        return self.ordering_margin is not None and self.ordering_margin > 0

    @property
    def max_crossings(self) -> int:
        return max(self.crossings.values(), default=0)


def _common_grid(t_end: float, start_frac: float = 0.0) -> np.ndarray:
    grid = np.linspace(0.0, t_end, CROSS_GRID)
    return grid[grid >= start_frac * t_end]


def count_crossings(m1: SweepMember, m2: SweepMember) -> int:
    """Sign changes of f1 - f2 on the common positive domain."""
    end = min(m1.positive_end, m2.positive_end)
    grid = _common_grid(end)[:-1]
    d = m1.trajectory.evaluate(grid)[0] - m2.trajectory.evaluate(grid)[0]
    s = np.sign(d)
    s = s[s != 0]
    return int(np.count_nonzero(s[1:] != s[:-1]))


def family_sweep(pair: ConePair, mode: SweepMode, params: Sequence[float], fixed: float = 1.0) -> FamilySweep:
    """Trajectories over a list of heights (lam = 1) or scaling parameters (fixed height)."""
    if len(params) == 0:
        raise InvalidParams("parameter list must be non-empty")
    mode = SweepMode(mode)
    members = []
    for p in sorted(float(x) for x in params):
        if mode is SweepMode.VaryHeight:
            req = ShootRequest(pair, 1.0, p)
        else:
            req = ShootRequest(pair, p, fixed)
        traj = integrate_profile(req)
        members.append(SweepMember(p, traj, isinstance(traj.terminal, LawsonExact)))
    sweep = FamilySweep(pair, mode, fixed, members)
    if mode is SweepMode.VaryHeight:
        for i in range(len(members)):
            for j in range(i + 1, len(members)):
                sweep.crossings[(members[i].param, members[j].param)] = count_crossings(members[i], members[j])
    else:
        margin = math.inf
        for lo_m, hi_m in zip(members[:-1], members[1:]):
            end = min(lo_m.positive_end, hi_m.positive_end)
            # all members share f(0) = a, so compare away from the origin
            grid = _common_grid(end, 0.05)[:-1]
            d = lo_m.trajectory.evaluate(grid)[0] - hi_m.trajectory.evaluate(grid)[0]
            margin = min(margin, float(np.min(d)))
        sweep.ordering_margin = margin if len(members) > 1 else None
    return sweep


def variation_identity(pair: ConePair, lam: float, a: float, t_grid, h: float = 1e-5) -> float:
    """sup |2 lam v_lam - (a v_a - f)| with v_a, v_lam from central differences."""
    t_grid = np.asarray(t_grid, dtype=float)
    ha = h * a
    hl = h * lam if lam > 0 else h

    def prof(lam_, a_):
        return integrate_profile(ShootRequest(pair, lam_, a_)).evaluate(t_grid)[0]

    f = prof(lam, a)
    v_a = (prof(lam, a + ha) - prof(lam, a - ha)) / (2 * ha)
    if lam > 0:
        v_l = (prof(lam + hl, a) - prof(lam - hl, a)) / (2 * hl)
    else:
        v_l = (prof(lam + hl, a) - f) / hl
    return float(np.max(np.abs(2 * lam * v_l - (a * v_a - f))))


@dataclass(frozen=True)
class SmallThetaDeviation:
    theta: float
    deviation: float
    t_shift: float
    slope_constant: float


def linear_slope_constant(pair: ConePair) -> float:
    """1 / (sqrt(1 - t0^2) |f0'(t0)|) for the linear family zero t0."""
    fam = ProfileFamily.linear(pair)
    t0 = find_zero(fam)
    return 1.0 / (math.sqrt(1.0 - t0 * t0) * abs(eval_family(fam, t0, 1)))


def small_theta_deviation(pair: ConePair, theta: float, grid_points: int = 2001) -> SmallThetaDeviation:
    """sup over [0, t_theta] of |f_theta - c theta f0| and |t_theta - t0|."""
    if not 0 < theta <= 0.2:
        raise InvalidParams("small-angle deviation needs theta in (0, 0.2]")
    sol = solve_cone(pair, theta)
    fam = ProfileFamily.linear(pair)
    t0 = find_zero(fam)
    c = linear_slope_constant(pair)
    grid = np.linspace(0.0, sol.t_a, grid_points)
    f = sol.trajectory.evaluate(grid)[0]
    dev = float(np.max(np.abs(f - c * theta * eval_family(fam, grid))))
    return SmallThetaDeviation(theta, dev, abs(sol.t_a - t0), c)
