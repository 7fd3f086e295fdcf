import math
from types import SimpleNamespace

import numpy as np
import pytest
import sympy as sp
from hypothesis import given, strategies as st

from capcone.errors import InvalidPair, OutOfDomain, SingularTime
from capcone.pair import ConePair
from capcone.profile_ode import (Blowup, HeightClass, ShootRequest, ZeroCrossing, classify_by_height,
                                 integrate_profile, lawson_profile, ode_rhs, psi_eval, riccati_seed,
                                 taylor_coefficients, taylor_seed)
from capcone.specfun import legendre_residual


def lawson_derivs(pair, t):
    m = pair.n - pair.k - 1
    f = lawson_profile(pair, t)
    fp = -(pair.n - 1) * t / (m * f)
    fpp = -(pair.n - 1) / (m * f) + (pair.n - 1) * t * fp / (m * f * f)
    return f, fp, fpp


def test_pair_validation():
    for n, k in [(7, 6), (7, 0), (2, 1), (7, 9)]:
        with pytest.raises(InvalidPair):
            ConePair(n, k)
    p = ConePair(7, 1)
    assert p.a_star == pytest.approx(math.sqrt(0.2))
    assert p.alpha == 0.0


@pytest.mark.parametrize("n,k", [(7, 1), (7, 2), (9, 4), (12, 9), (5, 3)])
def test_lawson_profile_solves_the_equation(n, k):
    pair = ConePair(n, k)
    ts = np.linspace(0.05, 0.9 * pair.lawson_zero, 80)
    f, fp, fpp = lawson_derivs(pair, ts)
    rhs = ode_rhs(ShootRequest(pair, 1.0, pair.a_star), ts, f, fp)
    assert np.max(np.abs(rhs - fpp)) <= 1e-10 * max(1.0, np.max(np.abs(fpp)))


@pytest.mark.parametrize("n,theta", [(4, 0.3), (7, 1.0), (10, 1.4)])
def test_slanted_plane_solves_the_equation(n, theta):
    # k = n-1 is rejected by ConePair, so the pair is stubbed here
    alpha = 1.0
    pair = SimpleNamespace(n=n, k=n - 1, alpha=alpha, A=lambda t: t - alpha / t)
    req = SimpleNamespace(pair=pair, lam=1.0)
    ts = np.linspace(0.05, 0.9, 40)
    f = math.tan(theta) * np.sqrt(1 - ts ** 2)
    fp = -math.tan(theta) * ts / np.sqrt(1 - ts ** 2)
    fpp = -math.tan(theta) / (1 - ts ** 2) ** 1.5
    assert np.max(np.abs(ode_rhs(req, ts, f, fp) - fpp)) < 1e-10 * np.max(np.abs(fpp))


@given(st.floats(0.05, 0.95), st.floats(0.1, 3.0), st.floats(-5.0, 0.0))
def test_linear_limit_is_legendre(t, f, fp):
    pair = ConePair(8, 3)
    fpp = ode_rhs(ShootRequest(pair, 0.0, 1.0), t, f, fp)
    assert abs(legendre_residual(pair, t, f, fp, fpp)) <= 1e-10 * max(1.0, abs(fpp), abs(fp) / t)


def test_singular_time():
    with pytest.raises(SingularTime):
        ode_rhs(ShootRequest(ConePair(7, 1), 1.0, 0.3), 1.0, 0.1, -1.0)


def test_taylor_values_at_origin():
    c = taylor_coefficients(ShootRequest(ConePair(7, 2), 1.0, 1.0))
    assert 2 * c[1] == pytest.approx(-3.0, rel=1e-14)
    # sympy series matching of the profile equation gives f''''(0) = -228 for (7,1), a = 1
    c71 = taylor_coefficients(ShootRequest(ConePair(7, 1), 1.0, 1.0))
    assert 24 * c71[2] == pytest.approx(-228.0, rel=1e-12)
    assert 24 * c[2] == pytest.approx(-31.5, rel=1e-12)


@pytest.mark.parametrize("n,k,a", [(7, 1, 1.0), (7, 2, 0.4), (12, 9, 1.3)])
def test_h_at_origin(n, k, a):
    pair = ConePair(n, k)
    c = taylor_coefficients(ShootRequest(pair, 1.0, a))
    # h = f - (t - alpha/t) f' tends to a + 2 alpha c1
    h0 = c[0] + pair.alpha * 2 * c[1]
    assert h0 == pytest.approx((n - k - 1) * a / (k * (n - 2)), rel=1e-13)


def test_taylor_seed_matches_coefficients():
    req = ShootRequest(ConePair(9, 4), 1.0, 0.8)
    c = taylor_coefficients(req)
    t = 1e-4
    f, fp = taylor_seed(req, t)
    assert f == pytest.approx(sum(cj * t ** (2 * j) for j, cj in enumerate(c)), rel=1e-15)


def test_lawson_trajectory():
    pair = ConePair(7, 1)
    ts = np.linspace(0, 0.4, 200)
    exact = np.sqrt((1 - 6 * ts ** 2) / 5)
    traj = integrate_profile(ShootRequest(pair, 1.0, math.sqrt(0.2)))
    assert np.max(np.abs(traj.evaluate(ts)[0] - exact)) < 1e-8
    # the same height perturbed past the exact-Lawson shortcut still tracks the closed form
    near = integrate_profile(ShootRequest(pair, 1.0, math.sqrt(0.2) * (1 - 1e-11)))
    assert np.max(np.abs(near.evaluate(ts)[0] - exact)) < 1e-8


def test_terminal_events():
    pair = ConePair(7, 1)
    below = integrate_profile(ShootRequest(pair, 1.0, 0.95 * pair.a_star))
    assert isinstance(below.terminal, ZeroCrossing)
    assert math.sqrt(1 / 6) < below.terminal.t_a < 0.517331
    assert below.terminal.slope < 0
    above = integrate_profile(ShootRequest(pair, 1.0, 1.05 * pair.a_star))
    assert isinstance(above.terminal, Blowup)
    assert above.terminal.f_b > 0 and above.terminal.b_a < 1


def test_lawson_profile_values():
    pair = ConePair(7, 1)
    assert lawson_profile(pair, 0.0) == pytest.approx(0.447214, abs=1e-6)
    assert lawson_profile(pair, pair.lawson_zero) == pytest.approx(0.0, abs=1e-7)
    assert lawson_profile(pair, 0.2) == pytest.approx(math.sqrt(0.152), rel=1e-14)
    with pytest.raises(OutOfDomain):
        lawson_profile(pair, 0.5)


def test_psi_values():
    pair = ConePair(7, 2)
    ts = np.linspace(0.05, 0.95 * pair.lawson_zero, 50)
    f, fp, _ = lawson_derivs(pair, ts)
    assert np.max(np.abs(psi_eval(pair, ts, f, fp))) < 1e-10
    p71 = ConePair(7, 1)
    t = 1e-6
    f, fp = taylor_seed(ShootRequest(p71, 1.0, 1.0), t)
    assert psi_eval(p71, t, f, fp) == pytest.approx(0.8, abs=1e-9)


@pytest.mark.parametrize("n,k", [(7, 1), (7, 2), (9, 5), (12, 9)])
def test_psi_sign_and_monotonicity(n, k):
    pair = ConePair(n, k)
    start = math.sqrt(pair.alpha) + 0.01
    for ratio in (0.5, 0.8, 0.95, 1.05, 1.2):
        a = ratio * pair.a_star
        traj = integrate_profile(ShootRequest(pair, 1.0, a))
        end = traj.t_end
        if end <= start:
            continue
        ts = np.linspace(start, end, 400)[:-2]
        f, fp = traj.evaluate(ts)
        psi = psi_eval(pair, ts, f, fp)
        sign = 1.0 if ratio > 1 else -1.0
        assert np.all(np.sign(psi) == sign)
        assert np.all(sign * np.diff(psi) > 0)


def test_classification():
    pair = ConePair(9, 4)
    assert classify_by_height(pair, 0.9 * pair.a_star) is HeightClass.ReachesZero
    assert classify_by_height(pair, pair.a_star) is HeightClass.Lawson
    assert classify_by_height(pair, 1.1 * pair.a_star) is HeightClass.BlowsUpPositive


def test_riccati_seed_values():
    q1, w2, _, _ = riccati_seed(ConePair(7, 1), 0.5)
    assert q1 == -6
    assert w2 == pytest.approx(-3.0)


@pytest.mark.parametrize("n,k,a", [(7, 1, 1.0), (7, 1, 5.0), (9, 4, 0.7)])
def test_riccati_seed_against_taylor_series(n, k, a):
    # q = f'/f and w = f^2/(1+f^2) expanded from the hand-solved Taylor coefficients
    pair = ConePair(n, k)
    c = taylor_coefficients(ShootRequest(pair, 1.0, a))
    t = sp.symbols("t")
    f = sum(sp.Float(float(cj), 30) * t ** (2 * j) for j, cj in enumerate(c[:4]))
    q = sp.series(sp.diff(f, t) / f, t, 0, 5).removeO()
    w = sp.series(f ** 2 / (1 + f ** 2), t, 0, 5).removeO()
    expect = (float(q.coeff(t, 1)), 2 * float(w.coeff(t, 2)), 6 * float(q.coeff(t, 3)), 24 * float(w.coeff(t, 4)))
    got = riccati_seed(pair, a * a / (1 + a * a))
    assert np.allclose(got, expect, rtol=1e-10)


def test_fourth_riccati_derivative_negative_near_one():
    assert riccati_seed(ConePair(7, 1), 0.99)[3] < 0


@pytest.mark.parametrize("n,k", [(7, 1), (8, 3), (12, 9)])
def test_trajectory_invariants(n, k):
    pair = ConePair(n, k)
    for ratio in (0.3, 0.7, 0.97):
        traj = integrate_profile(ShootRequest(pair, 1.0, ratio * pair.a_star))
        ts = np.linspace(1e-3, traj.t_end, 300)[:-1]
        f, fp = traj.evaluate(ts)
        assert np.all(np.diff(ts) > 0)
        assert np.all(fp < 0)
        assert np.all(f - pair.A(ts) * fp > 0)
        assert traj.terminal.t_a > math.sqrt(pair.alpha)


def test_square_root_blowup():
    pair = ConePair(7, 2)
    traj = integrate_profile(ShootRequest(pair, 1.0, 1.1 * pair.a_star))
    b, fb = traj.terminal.b_a, traj.terminal.f_b
    gaps = np.logspace(-6, -5, 40) * b
    f, _ = traj.evaluate(b - gaps)
    y = (f - fb) ** 2
    slope, icpt = np.polyfit(gaps, y, 1)
    resid = y - (slope * gaps + icpt)
    r2 = 1 - np.sum(resid ** 2) / np.sum((y - y.mean()) ** 2)
    assert r2 >= 0.999


@pytest.mark.parametrize("a", [0.2, 0.4, 0.6])
def test_rescaling_consistency(a):
    pair = ConePair(7, 2)
    one = integrate_profile(ShootRequest(pair, 1.0, a))
    scaled = integrate_profile(ShootRequest(pair, a * a, 1.0))
    ts = np.linspace(0, min(one.t_end, scaled.t_end), 100)
    assert np.max(np.abs(one.evaluate(ts)[0] / a - scaled.evaluate(ts)[0])) < 1e-9
