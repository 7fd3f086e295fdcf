import math

import numpy as np
import pytest

from capcone.errors import InvalidPair, InvalidParams, NotReachingZero
from capcone.pair import ConePair
from capcone.profile_ode import ShootRequest, integrate_profile
from capcone.shooting import (SweepMode, count_crossings, family_sweep, linear_slope_constant,
                              small_theta_deviation, solve_cone, solve_near_half_pi, terminal_angle,
                              variation_identity)
from capcone.specfun import ProfileFamily, eval_family


def test_terminal_angle_limits():
    p71 = ConePair(7, 1)
    assert terminal_angle(p71, 1e-3 * p71.a_star) < 0.01
    assert terminal_angle(p71, 0.999 * p71.a_star) > 1.4
    p72 = ConePair(7, 2)
    assert terminal_angle(p72, 0.3 * p72.a_star) < terminal_angle(p72, 0.6 * p72.a_star)
    with pytest.raises(NotReachingZero):
        terminal_angle(p71, 1.01 * p71.a_star)


def test_solve_cone_at_right_angle():
    sol = solve_cone(ConePair(7, 2), math.pi / 2)
    assert sol.a == pytest.approx(1 / math.sqrt(2), abs=1e-12)
    for n in range(3, 13):
        for k in range(1, n - 1):
            pair = ConePair(n, k)
            assert abs(solve_cone(pair, math.pi / 2).a - pair.a_star) <= 1e-9


def test_round_trip_and_invalid():
    pair = ConePair(7, 1)
    sol = solve_cone(pair, 0.5)
    assert abs(terminal_angle(pair, sol.a) - 0.5) <= 1e-8
    assert sol.a < pair.a_star
    with pytest.raises(InvalidPair):
        ConePair(7, 6)
    with pytest.raises(InvalidParams):
        solve_cone(pair, 2.0)


def test_small_angle_height_ratio():
    pair = ConePair(7, 1)
    sol = solve_cone(pair, 0.01)
    assert sol.a / 0.01 == pytest.approx(linear_slope_constant(pair), rel=1e-2)


def test_near_right_angle_routes_through_eps():
    pair = ConePair(7, 1)
    sol = solve_cone(pair, math.pi / 2 - 0.01)
    assert sol.eps is not None
    assert sol.theta == pytest.approx(math.pi / 2 - 0.01, abs=1e-10)


def test_solve_near_half_pi_relations():
    pair = ConePair(7, 1)
    sol = solve_near_half_pi(pair, 1e-3)
    assert sol.terminal_value == pytest.approx(-1e-3, abs=1e-10)
    assert abs(1e-3 * math.tan(sol.theta) - math.sqrt(0.2)) <= 0.05 * math.sqrt(0.2)
    assert sol.t_a < sol.t_hat
    big = solve_near_half_pi(pair, 1e-2)
    formula = (pair.n - pair.k - 1) * 1e-4 / (2 * math.sqrt(pair.k * (pair.n - 1)))
    assert 0.8 <= (big.t_hat - big.t_a) / formula <= 1.2
    gaps = [abs(solve_near_half_pi(pair, e).t_a - pair.lawson_zero) for e in (4e-3, 1e-3)]
    assert gaps[1] < gaps[0] and gaps[1] < 1e-3


def test_heights_cross_once():
    pair = ConePair(7, 1)
    sweep = family_sweep(pair, SweepMode.VaryHeight, [c * pair.a_star for c in (0.2, 0.3, 0.4)])
    assert set(sweep.crossings.values()) == {1}


def test_lambda_ordering_and_linear_member():
    pair = ConePair(7, 1)
    sweep = family_sweep(pair, SweepMode.VaryLambda, [0.25, 0.5, 1.0], fixed=pair.a_star)
    assert sweep.ordered
    lin = integrate_profile(ShootRequest(pair, 0.0, 0.3))
    ts = np.linspace(0, lin.t_end, 100)
    f0 = eval_family(ProfileFamily.linear(pair), ts)
    assert np.max(np.abs(lin.evaluate(ts)[0] - 0.3 * f0)) < 1e-10


def test_variation_identity():
    pair = ConePair(7, 1)
    ts = np.linspace(0.0, 0.45, 40)
    assert variation_identity(pair, 1.0, 0.3, ts) <= 1e-5
    assert variation_identity(pair, 0.0, 0.3, ts) <= 1e-6


def test_variation_fields_at_origin():
    pair = ConePair(7, 1)
    h = 1e-5

    def f_at0(lam, a):
        return integrate_profile(ShootRequest(pair, lam, a)).evaluate([0.0])[0][0]

    v_a = (f_at0(1.0, 0.3 + h) - f_at0(1.0, 0.3 - h)) / (2 * h)
    v_l = (f_at0(1.0 + h, 0.3) - f_at0(1.0 - h, 0.3)) / (2 * h)
    assert v_a == pytest.approx(1.0, abs=1e-9)
    assert v_l == pytest.approx(0.0, abs=1e-9)


def test_small_theta_monotone():
    pair = ConePair(7, 1)
    devs = [small_theta_deviation(pair, th).deviation for th in (0.2, 0.1, 0.05)]
    assert devs[0] > devs[1] > devs[2] > 0
    with pytest.raises(InvalidParams):
        small_theta_deviation(pair, 0.3)


def test_crossing_counter_on_identical_members():
    pair = ConePair(7, 2)
    sweep = family_sweep(pair, SweepMode.VaryHeight, [0.3])
    assert count_crossings(sweep.members[0], sweep.members[0]) == 0
