import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, strategies as st

from folnerkit.core import GroupSpec
from folnerkit.errors import DegenerateInputError, ResourceError
from folnerkit.walks import (Measure, WalkConfig, csc_lambda_floor_check, dirichlet_lambda, log_slope,
                             return_probability, return_probability_exact, simulate, spectral_csv,
                             survival_bound_check)
from folnerkit.wreath import WreathGroup

LINE = GroupSpec("wreath", {"p": 2, "d": 1}, ("t",))
LAMP = GroupSpec("wreath", {"p": 2, "d": 1}, ("t", "b"))


def test_measure_parse():
    assert Measure.parse("uniform").alpha == 0
    assert Measure.parse("lazy:1/2").alpha == Fraction(1, 2)
    with pytest.raises(DegenerateInputError):
        Measure(Fraction(1))
    G = LAMP.build()
    assert sum(w for _, w in Measure(Fraction(1, 3)).weights(G)) == 1


def test_line_return_exact():
    G = LINE.build()
    for n in range(13):
        assert return_probability_exact(G, n) == Fraction(math.comb(2 * n, n), 4 ** n)


def test_lazy_line_return_exact():
    # lazy 1/2 walk on Z at 2n steps: sum_k C(2n, k) (1/2)^(2n) * P(simple walk of k steps returns)
    G = LINE.build()
    m = Measure(Fraction(1, 2))
    for n in range(1, 6):
        want = sum(Fraction(math.comb(2 * n, 2 * j), 4 ** n) * Fraction(math.comb(2 * j, j), 4 ** j)
                   for j in range(n + 1))
        assert return_probability_exact(G, n, m) == want


def test_lamplighter_return_small():
    G = LAMP.build()
    # mu^(2)(e): one step forth and back, each generator is an involution or has its inverse
    assert return_probability_exact(G, 1) == Fraction(1, 3)


def test_return_budget():
    with pytest.raises(ResourceError):
        return_probability_exact(LAMP.build(), 40, budget=1000)


def test_monte_carlo_return_agrees_with_exact():
    G = LAMP.build()
    exact = float(return_probability_exact(G, 6))
    est, half, method = return_probability(G, [6], mode="mc", trials=20000, seed=3)[6]
    assert method == "mc" and abs(est - exact) <= max(3 * half, 0.01)


@pytest.mark.parametrize("r", [1, 5, 20, 200])
def test_line_dirichlet_eigenvalue(r):
    rep = dirichlet_lambda(LINE.build(), r)
    assert abs(rep.lam - (1 - math.cos(math.pi / (2 * r + 2)))) < 1e-9
    assert rep.residual <= 1e-9 and rep.ball_size == 2 * r + 1


def test_survival_bound():
    G = LINE.build()
    assert survival_bound_check(G, 5, 0).stay_probability == 1.0
    rep = survival_bound_check(G, 8, 300)
    assert rep.ok and rep.stay_probability < 1
    assert survival_bound_check(LAMP.build(), 6, 200).ok
    deep = survival_bound_check(G, 12, 10_000)
    assert deep.log_lower < -70 and deep.ok
    assert survival_bound_check(G, 0, 3).log_stay == -math.inf
    with pytest.raises(ResourceError):
        survival_bound_check(G, 2, 10_001)


def test_lambda_r2_floor():
    line = csc_lambda_floor_check(LINE.build(), [4, 8, 16, 32])
    assert all(abs(v - math.pi ** 2 / 8) < 0.6 for v in line.values.values())
    lamp = csc_lambda_floor_check(LAMP.build(), [2, 4, 6, 8])
    assert lamp.ok and max(lamp.values.values()) <= 10


def test_spectral_csv():
    reps = [dirichlet_lambda(LINE.build(), r) for r in (1, 2)]
    assert spectral_csv(reps).splitlines()[0] == "r,ball_size,lambda"


@pytest.mark.parametrize("spec", [LINE, LAMP, GroupSpec("wreath", {"p": 2, "d": 2}, ("t1", "t2", "b"))])
def test_threads_do_not_change_output(spec):
    times = (3, 6) if spec.params["d"] == 2 else (5, 20)
    cfg = WalkConfig(spec, times, 900, master_seed=11, cautious_c=(0.5, 1.0), block_size=200)
    a = simulate(cfg, threads=1).to_csv()
    assert a == simulate(cfg, threads=3).to_csv()


def test_line_drift():
    stats = simulate(WalkConfig(LINE, (400,), 20000, master_seed=1))
    mean, se = stats.drift[400]
    assert abs(mean / 20 - math.sqrt(2 / math.pi)) < 4 * se / 20 + 0.01


def test_cautious_dominated_by_endpoint():
    stats = simulate(WalkConfig(LAMP, (10, 40), 2000, cautious_c=(0.5, 1.0, 2.0)))
    for key, p in stats.cautious.items():
        assert 0 <= p <= stats.endpoint[key] <= 1
    assert stats.cautious[(40, 0.5)] <= stats.cautious[(40, 2.0)]


def test_generic_walk_leaves_ball():
    spec = GroupSpec("wreath", {"p": 3, "d": 1}, ("t", "b"))
    stats = simulate(WalkConfig(spec, (6,), 300))
    assert stats.drift[6][0] > 0
    with pytest.raises(ResourceError):
        from folnerkit.walks import _runner
        _runner(WalkConfig(spec, (30,), 10), spec.build(), budget=50)


def test_log_slope():
    ns = [10, 100, 1000]
    assert abs(log_slope(ns, [n ** 0.5 for n in ns]) - 0.5) < 1e-12


@given(st.integers(0, 2**31), st.integers(1, 4))
def test_seed_determinism(seed, threads):
    cfg = WalkConfig(LINE, (7,), 50, master_seed=seed, block_size=13)
    assert simulate(cfg, threads).to_csv() == simulate(cfg, 1).to_csv()


def test_config_validation():
    with pytest.raises(DegenerateInputError):
        WalkConfig(LINE, (), 10)
    with pytest.raises(DegenerateInputError):
        WalkConfig(LINE, (3,), 0)
