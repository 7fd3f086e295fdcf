"""Kernels for contact angles near pi/2.

Indicial roots of the Jacobi operator, the epsilon parametrization of nearly
free-boundary cones, the homogeneous cap potentials on either side of the
Lawson cone and the divergence of their unit gradient fields.
"""
from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional

import numpy as np

from .errors import InvalidParams, WrongSide
from .pair import ConePair
from .shooting import solve_near_half_pi


# --------------------------------------------------------------------------
# indicial roots

@dataclass(frozen=True)
class IndicialData:
    n: int
    gamma_low: float
    gamma_high: float
    complex_roots: bool = False
    imag_part: float = 0.0

    @property
    def interval(self) -> tuple:
        """Open interval (-gamma_high, -gamma_low) of admissible decay rates."""
        return (-self.gamma_high, -self.gamma_low)

    def contains(self, lo: float, hi: float) -> bool:
        if self.complex_roots:
            return False
        a, b = self.interval
        return a < lo and hi < b


def indicial_roots(n: int) -> IndicialData:
    """Roots of g^2 - (n-2) g + (n-1) = 0; complex (flagged) for n <= 6."""
    if n < 3:
        raise InvalidParams("indicial roots need n >= 3")
    disc = n * n - 8 * n + 8
    half = 0.5 * (n - 2)
    if disc < 0:
        im = 0.5 * math.sqrt(-disc)
        return IndicialData(n, half, half, True, im)
    root = 0.5 * math.sqrt(disc)
    return IndicialData(n, half - root, half + root)


def jacobi_radial_residual(n: int, gamma: float, R) -> np.ndarray:
    """R^2 u'' + (n-1) R u' + (n-1) u for u = R^(-gamma), differentiated by hand."""
    R = np.asarray(R, dtype=float)
    u = R ** (-gamma)
    up = -gamma * R ** (-gamma - 1.0)
    upp = gamma * (gamma + 1.0) * R ** (-gamma - 2.0)
    return R * R * upp + (n - 1) * R * up + (n - 1) * u


# --------------------------------------------------------------------------
# epsilon parametrization near pi/2

@dataclass(frozen=True)
class NearHalfPiData:
    pair: ConePair
    eps: float
    theta: float
    t_eps: float
    t_hat: float
    aperture_slope: float
    height: float
    tan_defect: float
    angle_defect: float
    gap_defect: float
    zero_shift: float


def near_half_pi_relations(pair: ConePair, eps: float) -> NearHalfPiData:
    """Solve with terminal value -eps and measure the leading-order relations."""
    if not 0 < eps <= 0.05 * pair.a_star:
        raise InvalidParams(f"eps must lie in (0, 0.05 a_star], got {eps}")
    n, k = pair.n, pair.k
    sol = solve_near_half_pi(pair, eps)
    t, t_hat, theta = sol.t_a, sol.t_hat, sol.theta
    slope = t / math.sqrt(1.0 - t * t)
    return NearHalfPiData(
        pair=pair, eps=eps, theta=theta, t_eps=t, t_hat=t_hat, aperture_slope=slope, height=sol.a,
        tan_defect=abs(eps * math.tan(theta) - pair.a_star),
        angle_defect=abs(theta - (0.5 * math.pi - math.sqrt((n - k - 1) / k) * eps)),
        gap_defect=abs((t_hat - t) - (n - k - 1) * eps * eps / (2.0 * math.sqrt(k * (n - 1)))),
        zero_shift=t - pair.lawson_zero)


@dataclass(frozen=True)
class ApertureRate:
    zero_rate: float
    kappa: float


def aperture_rate(pair: ConePair, eps: float) -> ApertureRate:
    """First-order rates of t_eps and of the aperture slope, from eps and 2 eps."""
    one = near_half_pi_relations(pair, eps)
    two = near_half_pi_relations(pair, 2.0 * eps)
    zero_rate = (two.t_eps - one.t_eps) / eps
    kappa = (two.aperture_slope - one.aperture_slope) / (pair.a_star * eps)
    return ApertureRate(zero_rate, kappa)


# --------------------------------------------------------------------------
# cap potentials

CONE_TOL = 1e-12


class Side(enum.Enum):
    Plus = "plus"
    Minus = "minus"


class CapCase(enum.Enum):
    I = "I"
    II = "II"
    III = "III"
    IV = "IV"


def _select_case(pair: ConePair, side: Side) -> CapCase:
    n, k = pair.n, pair.k
    if n < 7:
        raise InvalidParams("cap potentials are defined for n >= 7")
    if n == 7:
        if k == 3:
            return CapCase.II
        allowed = (1, 2, 4) if side is Side.Plus else (2, 4, 5)
        if k not in allowed:
            raise InvalidParams(f"no {side.value}-side potential for (7, {k})")
        return CapCase.I
    if k == 1 and n <= 12:
        return CapCase.III
    return CapCase.IV


def _degree(case: CapCase, side: Side) -> float:
    if case in (CapCase.I, CapCase.II):
        return 3.5
    if case is CapCase.III and side is Side.Minus:
        return 5.0
    return 4.0


def _printed_constant(pair: ConePair, side: Side, case: CapCase) -> float:
    a, n = pair.a_star, pair.n
    if side is Side.Plus:
        return {CapCase.I: (1 + a * a) ** 0.75 / (2 * a ** 2.5),
                CapCase.II: 2 ** 1.75 / 7,
                CapCase.III: (n - 1) * math.sqrt(n - 2) / 2,
                CapCase.IV: (1 + a * a) / (4 * a ** 3)}[case]
    return {CapCase.I: a * (1 + a * a) ** 0.75 / 2,
            CapCase.II: 2 ** 1.75 / 7,
            CapCase.III: (n - 1) ** 1.5 / (2 * (n - 2) ** 2),
            CapCase.IV: a * (1 + a * a) ** 2 / 4}[case]


def _profile_parts(case: CapCase, side: Side, a2: float, r, P):
    """F(r, P) with P = s^2 + z^2 and its derivatives F_r, F_P, F_rr, F_rP, F_PP."""
    with np.errstate(divide="ignore", invalid="ignore"):
        return _profile_terms(case, side, a2, r, P)


def _profile_terms(case: CapCase, side: Side, a2: float, r, P):
    zero = np.zeros_like(P)
    if case is CapCase.II:
        return (P ** 1.75 - r ** 3.5, -3.5 * r ** 2.5, 1.75 * P ** 0.75,
                -8.75 * r ** 1.5, zero, 1.3125 * P ** -0.25)
    if case is CapCase.IV:
        a4 = a2 * a2
        return (P * P - a4 * r ** 4, -4 * a4 * r ** 3, 2 * P, -12 * a4 * r * r, zero, 2 + zero)
    gap = P - a2 * r * r
    if side is Side.Plus:
        # gap * P^m with m = 3/4 (case I) or 1 (case III)
        m = 0.75 if case is CapCase.I else 1.0
        pm = P ** m
        return (gap * pm, -2 * a2 * r * pm, pm + m * gap * P ** (m - 1),
                -2 * a2 * pm, -2 * a2 * r * m * P ** (m - 1),
                2 * m * P ** (m - 1) + m * (m - 1) * gap * P ** (m - 2))
    # gap * r^m with m = 3/2 (case I) or 3 (case III)
    m = 1.5 if case is CapCase.I else 3.0
    rm = r ** m
    return (gap * rm, -2 * a2 * r * rm + m * gap * r ** (m - 1), rm,
            -2 * a2 * (2 * m + 1) * rm + m * (m - 1) * gap * r ** (m - 2),
            m * r ** (m - 1), zero)


@dataclass(frozen=True)
class CapPotential:
    pair: ConePair
    side: Side
    case: CapCase
    degree: float
    shift: float = 0.0

    @property
    def a2(self) -> float:
        return self.pair.k / (self.pair.n - self.pair.k - 1)

    def _on_cone_constant(self) -> float:
        a = self.pair.a_star
        _, grad = cap_eval(CapPotential(self.pair, self.side, self.case, self.degree), 1.0, a, 0.0,
                           check_side=False)
        R = math.sqrt(1.0 + a * a)
        base = R ** (self.degree - 1.0) / float(np.linalg.norm(grad))
        if self.side is Side.Minus:
            value, _ = cap_eval(CapPotential(self.pair, self.side, self.case, self.degree), 1.0, 0.0, 0.0,
                                check_side=False)
            base *= -value
        return base

    @property
    def constant(self) -> float:
        """Normalizing constant recomputed from the gradient on the cone."""
        return self._on_cone_constant()

    @property
    def printed_constant(self) -> float:
        return _printed_constant(self.pair, self.side, self.case)

    @property
    def constant_matches_printed(self) -> bool:
        return math.isclose(self.constant, self.printed_constant, rel_tol=1e-12)

    @property
    def minus_constant_matches_printed(self) -> Optional[bool]:
        return self.constant_matches_printed if self.side is Side.Minus else None


def cap_potential(pair: ConePair, side, shift: float = 0.0) -> CapPotential:
    side = Side(side)
    if shift < 0:
        raise InvalidParams("the vertical shift must be non-negative")
    case = _select_case(pair, side)
    return CapPotential(pair, side, case, _degree(case, side), float(shift))


def _side_of(pot: CapPotential, r, P) -> np.ndarray:
    # +1 strictly on the plus side, -1 strictly on the minus side, 0 on the cone
    gap = P - pot.a2 * r * r
    return np.where(np.abs(gap) <= CONE_TOL * (P + r * r), 0.0, np.sign(gap))


def _prepare(pot: CapPotential, r, s, z, check_side: bool):
    r, s, z = (np.asarray(v, dtype=float) for v in (r, s, z))
    zs = z + pot.shift
    P = s * s + zs * zs
    if check_side and pot.case in (CapCase.I, CapCase.III):
        sign = _side_of(pot, r, P)
        wrong = sign < 0 if pot.side is Side.Plus else sign > 0
        if np.any(wrong):
            raise WrongSide(f"point outside the {pot.side.value} side of the cone")
    return r, s, zs, P


def cap_eval(pot: CapPotential, r, s, z, check_side: bool = True):
    """Shifted potential value and its gradient (d/dr, d/ds, d/dz)."""
    r, s, zs, P = _prepare(pot, r, s, z, check_side)
    F, Fr, FP, *_ = _profile_parts(pot.case, pot.side, pot.a2, r, P)
    grad = np.stack([Fr, 2 * s * FP, 2 * zs * FP], axis=-1)
    if F.ndim == 0:
        return float(F), grad
    return F, grad


def _hessian_parts(pot: CapPotential, r, s, zs, P):
    F, Fr, FP, Frr, FrP, FPP = _profile_parts(pot.case, pot.side, pot.a2, r, P)
    grad = (Fr, 2 * s * FP, 2 * zs * FP)
    hess = ((Frr, 2 * s * FrP, 2 * zs * FrP),
            (2 * s * FrP, 2 * FP + 4 * s * s * FPP, 4 * s * zs * FPP),
            (2 * zs * FrP, 4 * s * zs * FPP, 2 * FP + 4 * zs * zs * FPP))
    return F, Fr, FP, grad, hess


def unit_field_divergence(pot: CapPotential, r, s, z) -> np.ndarray:
    """div of grad(phi)/|grad(phi)| in R^{n+1}, written in the (r, s, z) chart."""
    r, s, zs, P = _prepare(pot, r, s, z, True)
    n, k = pot.pair.n, pot.pair.k
    _, Fr, FP, grad, hess = _hessian_parts(pot, r, s, zs, P)
    # (k-1) phi_s / s = 2 (k-1) F_P stays regular at s = 0
    lap = hess[0][0] + (n - k - 1) * Fr / r + hess[1][1] + 2 * (k - 1) * FP + hess[2][2]
    g2 = grad[0] ** 2 + grad[1] ** 2 + grad[2] ** 2
    quad = sum(hess[i][j] * grad[i] * grad[j] for i in range(3) for j in range(3))
    return (g2 * lap - quad) / g2 ** 1.5


@dataclass(frozen=True)
class DivergenceCheck:
    potential: CapPotential
    min_scaled: float
    min_ratio: float
    points: int
    all_positive: bool


def annulus_grid(pot: CapPotential, n_radii: int = 10, n_open: int = 10, n_split: int = 10):
    """Points on the potential's side with R log-spaced in [1, 10].

    The angle psi between the r axis and the (s, z) plane runs over open
    midpoints of the side's range; omega splits the (s, z) radius.
    """
    cone_angle = math.atan(pot.pair.a_star)
    lo, hi = (cone_angle, 0.5 * math.pi) if pot.side is Side.Plus else (0.0, cone_angle)
    psi = lo + (hi - lo) * (np.arange(n_open) + 0.5) / n_open
    omega = 0.5 * math.pi * (np.arange(n_split) + 0.5) / n_split
    radii = np.logspace(0.0, 1.0, n_radii)
    R, PSI, OM = np.meshgrid(radii, psi, omega, indexing="ij")
    rho = R * np.sin(PSI)
    return (R * np.cos(PSI)).ravel(), (rho * np.cos(OM)).ravel(), (rho * np.sin(OM)).ravel()


def cap_divergence_check(pot: CapPotential, grid=None) -> DivergenceCheck:
    """Side-signed R * div(unit gradient) over a grid, and its ratio to dist/R."""
    r, s, z = grid if grid is not None else annulus_grid(pot)
    r, s, z = (np.asarray(v, dtype=float) for v in (r, s, z))
    div = unit_field_divergence(pot, r, s, z)
    sign = 1.0 if pot.side is Side.Plus else -1.0
    zs = z + pot.shift
    R = np.sqrt(r * r + s * s + zs * zs)
    rho = np.sqrt(s * s + zs * zs)
    a = pot.pair.a_star
    dist = np.abs(rho - a * r) / math.sqrt(1.0 + a * a)
    scaled = sign * R * div
    ratio = sign * div * R * R / dist
    return DivergenceCheck(pot, float(np.min(scaled)), float(np.min(ratio)), int(r.size),
                           bool(np.all(scaled > 0)))


# --------------------------------------------------------------------------
# the cubic certifying the (7,1) and (7,5) one-sided calibrations

SQRT5 = math.sqrt(5.0)


def lawlor_cubic(t):
    t = np.asarray(t, dtype=float)
    return ((t - 3.0 * SQRT5) * t - 15.0) * t + 25.0


def lawlor_cubic_min() -> tuple:
    """(minimum, argmin) of the cubic over [0, 1] from endpoints and stationary points."""
    candidates = [0.0, 1.0]
    # 3 t^2 - 6 sqrt5 t - 15 = 0
    disc = 36.0 * 5.0 + 180.0
    for root in ((6.0 * SQRT5 - math.sqrt(disc)) / 6.0, (6.0 * SQRT5 + math.sqrt(disc)) / 6.0):
        if 0.0 <= root <= 1.0:
            candidates.append(root)
    values = [float(lawlor_cubic(c)) for c in candidates]
    i = int(np.argmin(values))
    return values[i], candidates[i]
