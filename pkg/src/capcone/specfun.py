"""Gauss hypergeometric function and the two profile families built from it.

The linear family f(t) = 2F1((n-1)/2, -1/2; k/2; t^2) solves the homogeneous
Legendre-type ODE; the barrier family g_alpha(t) = 2F1((n+alpha-2)/2, -alpha/2; k/2; t^2)
solves its alpha-shifted version.  Linear is simply the barrier family at alpha = 1.
"""
from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np
from scipy.special import gammaln, gammasgn, psi

from .errors import InvalidParams, NoZero, NonConvergence, NumericalFailure, OutOfDomain
from .pair import ConePair

TERM_BUDGET = 100_000
TAIL_TOL = 1e-15
EULER_SWITCH = 0.5
NEAR_ONE = 0.9
SERIES_MAX = 0.95
SCALAR_PATH_MAX = 8


@dataclass(frozen=True)
class HypParams:
    a: float
    b: float
    c: float

    def __post_init__(self) -> None:
        c = float(self.c)
        if c <= 0 and c == math.floor(c):
            raise InvalidParams(f"c must not be a non-positive integer, got {self.c}")

    def shifted(self, m: int) -> "HypParams":
        return HypParams(self.a + m, self.b + m, self.c + m)


def _raw_series(a: float, b: float, c: float, x: np.ndarray, strict: bool = True):
    """Power series of 2F1 at each x; returns (sum, sum of |terms|).

    Entries that exhaust the term budget raise NonConvergence when strict,
    otherwise they come back as nan.
    """
    if x.size <= SCALAR_PATH_MAX:
        pairs = [_raw_series_scalar(a, b, c, float(v), strict) for v in x.ravel()]
        return (np.array([p[0] for p in pairs]).reshape(x.shape),
                np.array([p[1] for p in pairs]).reshape(x.shape))
    total = np.ones_like(x)
    mag = np.ones_like(x)
    term = np.ones_like(x)
    active = np.ones(x.shape, dtype=bool)
    for m in range(TERM_BUDGET):
        ratio = (a + m) * (b + m) / ((c + m) * (m + 1.0))
        term = np.where(active, term * ratio * x, 0.0)
        total = total + term
        mag = mag + np.abs(term)
        # stop once terms shrink geometrically and the tail bound is negligible
        q = np.abs(ratio * x)
        shrinking = q < 1.0
        tail = np.abs(term) * q / np.where(shrinking, 1.0 - q, 1.0)
        active &= ~((shrinking & (tail <= TAIL_TOL * mag)) | (term == 0.0))
        if not active.any():
            return total, mag
    if strict:
        raise NonConvergence(f"2F1({a}, {b}; {c}; x) did not converge in {TERM_BUDGET} terms")
    total[active] = np.nan
    return total, mag


def _raw_series_scalar(a: float, b: float, c: float, x: float, strict: bool):
    # same stopping rule as the vectorized loop, in plain floats for speed
    total = mag = term = 1.0
    for m in range(TERM_BUDGET):
        ratio = (a + m) * (b + m) / ((c + m) * (m + 1.0))
        term *= ratio * x
        total += term
        mag += abs(term)
        q = abs(ratio * x)
        if term == 0.0 or (q < 1.0 and abs(term) * q / (1.0 - q) <= TAIL_TOL * mag):
            return total, mag
    if strict:
        raise NonConvergence(f"2F1({a}, {b}; {c}; x) did not converge in {TERM_BUDGET} terms")
    return math.nan, mag


def _is_nonpos_int(v: float) -> bool:
    return v <= 0 and v == math.floor(v)


def _gamma_ratio(num, den) -> float:
    """prod Gamma(num) / prod Gamma(den) in log space; a pole in den gives 0."""
    if any(_is_nonpos_int(d) for d in den):
        return 0.0
    sign = 1.0
    log_mag = 0.0
    for v in num:
        sign *= gammasgn(v)
        log_mag += gammaln(v)
    for v in den:
        sign *= gammasgn(v)
        log_mag -= gammaln(v)
    return float(sign * math.exp(log_mag))


def _near_one(a: float, b: float, c: float, x: np.ndarray):
    # connection formulas in powers of y = 1-x; returns (value, magnitude)
    y = 1.0 - x
    s = c - a - b
    if abs(s - round(s)) < 1e-12:
        s = float(round(s))
    if s != math.floor(s):
        first = _gamma_ratio([c, s], [c - a, c - b])
        second = _gamma_ratio([c, -s], [a, b])
        v1, m1 = _raw_series(a, b, 1.0 - s, y)
        out, mag = first * v1, np.abs(first) * m1
        if second != 0.0:
            v2, m2 = _raw_series(c - a, c - b, 1.0 + s, y)
            out = out + second * y ** s * v2
            mag = mag + np.abs(second) * y ** s * m2
        return out, mag
    if s > 0:
        # Euler reduces c-a-b = +m to -m
        v, mag = _near_one(c - a, c - b, c, x)
        return y ** s * v, y ** s * mag
    m = int(-s)
    out = np.zeros_like(y)
    mag = np.zeros_like(y)
    if m > 0:
        coef = _gamma_ratio([m, c], [a, b])
        poch = 1.0
        for j in range(m):
            piece = coef * poch * y ** (j - m)
            out, mag = out + piece, mag + np.abs(piece)
            if j < m - 1:
                poch *= (a - m + j) * (b - m + j) / ((j + 1.0) * (1.0 - m + j))
    lead = -((-1) ** m) * _gamma_ratio([c], [a - m, b - m, m + 1.0])
    if lead == 0.0:
        return out, mag
    # logarithmic part: sum_j (a)_j (b)_j m!/(j!(j+m)!) y^j [log y - psi(j+1) - psi(j+m+1) + psi(a+j) + psi(b+j)]
    log_y = np.log(y)
    coeff = 1.0
    total = np.zeros_like(y)
    tmag = np.zeros_like(y)
    for j in range(TERM_BUDGET):
        bracket = log_y - psi(j + 1.0) - psi(j + m + 1.0) + psi(a + j) + psi(b + j)
        weight = np.abs(coeff) * y ** j
        term = coeff * y ** j * bracket
        total, tmag = total + term, tmag + np.abs(term)
        # the bracket can vanish at a single j, so bound by the coefficient with a log allowance
        if j > 2 and np.all(weight * (np.abs(log_y) + math.log(j + m + 2.0) + 10.0) <= TAIL_TOL * tmag):
            return out + lead * total, mag + abs(lead) * tmag
        coeff *= (a + j) * (b + j) / ((j + 1.0) * (j + m + 1.0))
    raise NonConvergence(f"2F1({a}, {b}; {c}; x) near 1 did not converge")


def _series_any(a: float, b: float, c: float, x: np.ndarray) -> np.ndarray:
    out = np.empty_like(x)
    lo = x <= EULER_SWITCH
    if lo.any():
        out[lo] = _raw_series(a, b, c, x[lo])[0]
    hi = ~lo
    if not hi.any():
        return out
    xs = x[hi]
    # candidate routes for x > 1/2; keep the one with the least cancellation
    best = np.full_like(xs, np.nan)
    best_cond = np.full_like(xs, np.inf)

    def offer(value, magnitude, mask):
        cond = magnitude / np.maximum(np.abs(value), 1e-300)
        take = mask & np.isfinite(value) & (cond < best_cond)
        best[take] = value[take]
        best_cond[take] = cond[take]

    terminating = _is_nonpos_int(a) or _is_nonpos_int(b)
    series_ok = xs <= SERIES_MAX if not terminating else np.ones_like(xs, dtype=bool)
    if series_ok.any():
        v, mag = _raw_series(a, b, c, np.where(series_ok, xs, 0.0), strict=False)
        offer(v, mag, series_ok)
    euler_ok = xs <= SERIES_MAX if not (_is_nonpos_int(c - a) or _is_nonpos_int(c - b)) else np.ones_like(xs, dtype=bool)
    if euler_ok.any():
        # Euler: F(a,b;c;x) = (1-x)^(c-a-b) F(c-a, c-b; c; x)
        pre = (1.0 - xs) ** (c - a - b)
        v, mag = _raw_series(c - a, c - b, c, np.where(euler_ok, xs, 0.0), strict=False)
        offer(pre * v, pre * mag, euler_ok)
    near = xs > NEAR_ONE
    if near.any() and not terminating:
        v = np.full_like(xs, np.nan)
        mag = np.full_like(xs, np.inf)
        v[near], mag[near] = _near_one(a, b, c, xs[near])
        offer(v, mag, near)
    if np.any(np.isnan(best)):
        raise NonConvergence(f"2F1({a}, {b}; {c}; x) could not be evaluated at some x")
    out[hi] = best
    return out


def _as_array(x):
    arr = np.asarray(x, dtype=float)
    return arr, arr.ndim == 0


def gauss_2f1(p: HypParams, x):
    """2F1(a, b; c; x) for x in [0, 1); accepts scalars or arrays."""
    arr, scalar = _as_array(x)
    flat = np.atleast_1d(arr).astype(float)
    if np.any(flat < 0.0) or np.any(flat >= 1.0):
        raise OutOfDomain("gauss_2f1 requires x in [0, 1)")
    with np.errstate(over="ignore", invalid="ignore", divide="ignore"):
        try:
            out = _series_any(float(p.a), float(p.b), float(p.c), flat)
        except NonConvergence:
            if np.any(flat > NEAR_ONE):
                raise NumericalFailure(f"2F1{(p.a, p.b, p.c)} overflows or fails near x = 1") from None
            raise
    if scalar:
        return float(out[0])
    return out.reshape(arr.shape)


def gauss_2f1_derivs(p: HypParams, x, order: int = 0):
    """order-th x-derivative of 2F1 by parameter shifting, order in {0, 1, 2}."""
    if order not in (0, 1, 2):
        raise InvalidParams(f"order must be 0, 1 or 2, got {order}")
    prefactor = 1.0
    for j in range(order):
        prefactor *= (p.a + j) * (p.b + j) / (p.c + j)
    if prefactor == 0.0:
        arr, scalar = _as_array(x)
        return 0.0 if scalar else np.zeros(arr.shape)
    return prefactor * gauss_2f1(p.shifted(order), x)


@dataclass(frozen=True)
class ProfileFamily:
    """Hypergeometric profile t -> 2F1((n+e-2)/2, -e/2; k/2; t^2) with exponent e.

    exponent = 1 is the linear family f_{n,k}; other exponents give the barrier
    family g_{n,k,alpha}.  k = n-1 is allowed here (the slanted plane case).
    """

    n: int
    k: int
    exponent: float = 1.0

    def __post_init__(self) -> None:
        if self.n < 3 or not 1 <= self.k <= self.n - 1:
            raise InvalidParams(f"family needs n >= 3 and 1 <= k <= n-1, got ({self.n}, {self.k})")

    @classmethod
    def linear(cls, pair: ConePair) -> "ProfileFamily":
        return cls(pair.n, pair.k, 1.0)

    @classmethod
    def barrier(cls, pair: ConePair, alpha: float) -> "ProfileFamily":
        return cls(pair.n, pair.k, float(alpha))

    @property
    def is_linear(self) -> bool:
        return self.exponent == 1.0

    @property
    def params(self) -> HypParams:
        e = self.exponent
        return HypParams((self.n + e - 2) / 2.0, -e / 2.0, self.k / 2.0)

    @property
    def eigenvalue(self) -> float:
        """e(e+n-2), the zeroth-order coefficient of the defining ODE."""
        return self.exponent * (self.exponent + self.n - 2)

    @property
    def zero(self) -> float:
        return find_zero(self)


def eval_family(fam: ProfileFamily, t, deriv: int = 0, route: str = "contiguous"):
    """Value or t-derivative (deriv <= 2) of a profile family.

    route="ode" recovers the second derivative from the defining ODE
    (1-t^2)g'' + ((k-1)/t - (n-1)t)g' + e(e+n-2)g = 0 instead of the
    parameter-shifted series.
    """
    arr, scalar = _as_array(t)
    ts = np.atleast_1d(arr).astype(float)
    if np.any(ts < 0.0) or np.any(ts >= 1.0):
        raise OutOfDomain("profile families are evaluated on [0, 1)")
    p = fam.params
    s = ts * ts
    if deriv == 0:
        out = gauss_2f1(p, s)
    elif deriv == 1:
        out = 2.0 * ts * gauss_2f1_derivs(p, s, 1)
    elif deriv == 2 and route == "contiguous":
        out = 2.0 * gauss_2f1_derivs(p, s, 1) + 4.0 * s * gauss_2f1_derivs(p, s, 2)
    elif deriv == 2 and route == "ode":
        g = gauss_2f1(p, s)
        out = np.empty_like(ts)
        # near t = 0 the (k-1)/t g' term equals (k-1) g''(0) up to O(t^2)
        at0 = ts < 1e-8
        out[at0] = -fam.eigenvalue * g[at0] / fam.k
        tt = ts[~at0]
        if tt.size:
            gp = 2.0 * tt * gauss_2f1_derivs(p, tt * tt, 1)
            out[~at0] = -((fam.k - 1) / tt - (fam.n - 1) * tt) * gp / (1.0 - tt * tt)
            out[~at0] -= fam.eigenvalue * g[~at0] / (1.0 - tt * tt)
    else:
        raise InvalidParams(f"unsupported deriv={deriv} route={route}")
    out = np.asarray(out, dtype=float)
    if scalar:
        return float(out[0])
    return out.reshape(arr.shape)


ZERO_GRID = 2001
ZERO_TOL = 1e-12
ZERO_EDGE = 1.0 - 1e-9


@lru_cache(maxsize=512)
def _zero_cached(n: int, k: int, exponent: float) -> float:
    fam = ProfileFamily(n, k, exponent)
    j = np.arange(ZERO_GRID)
    # Chebyshev-Lobatto points mapped to [0, ZERO_EDGE]
    grid = 0.5 * ZERO_EDGE * (1.0 - np.cos(np.pi * j / (ZERO_GRID - 1)))
    # scan outward in chunks so the first sign change is found before any
    # overflow of the family near t = 1
    chunk = 100
    prev_t, prev_v = grid[0], eval_family(fam, grid[0])
    bracket = None
    for start in range(1, ZERO_GRID, chunk):
        ts = grid[start:start + chunk]
        vs = eval_family(fam, ts)
        lead_t = np.concatenate([[prev_t], ts])
        lead_v = np.concatenate([[prev_v], vs])
        idx = np.nonzero(np.sign(lead_v[:-1]) * np.sign(lead_v[1:]) <= 0)[0]
        if idx.size:
            i = idx[0]
            bracket = (lead_t[i], lead_t[i + 1], lead_v[i])
            break
        prev_t, prev_v = ts[-1], vs[-1]
    if bracket is None:
        raise NoZero(f"family ({n}, {k}, exponent={exponent}) has no zero on [0, 1)")
    lo, hi, flo = bracket
    if flo == 0.0:
        return float(lo)
    while hi - lo > ZERO_TOL:
        mid = 0.5 * (lo + hi)
        fm = eval_family(fam, mid)
        if fm == 0.0:
            return mid
        if (fm > 0) == (flo > 0):
            lo, flo = mid, fm
        else:
            hi = mid
    return 0.5 * (lo + hi)


def find_zero(fam: ProfileFamily) -> float:
    """Smallest positive root of the family on (0, 1); cached per family."""
    return _zero_cached(fam.n, fam.k, float(fam.exponent))


def legendre_residual(pair: ConePair, t, f, fp, fpp):
    """(1-t^2)f'' + (n-1)(f - t f') + (k-1) f'/t; vanishes on the linear family."""
    t = np.asarray(t, dtype=float)
    out = (1.0 - t * t) * fpp + (pair.n - 1) * (f - t * fp) + (pair.k - 1) * fp / t
    return float(out) if np.ndim(out) == 0 else out
