import math

import pytest

import lqft


def test_green_and_mobius():
    assert lqft.green(0, 0.5) == pytest.approx(math.log(2))
    assert lqft.green(0.3 + 0.1j, -0.2j) == pytest.approx(lqft.green(-0.2j, 0.3 + 0.1j))
    assert lqft.green_regularized(0, 0, 0.1) == pytest.approx(math.log(10))
    assert abs(lqft.mobius(0.3, 0.0, 0.3)) < 1e-15
    assert lqft.poincare_density(0.5) == pytest.approx(1 / 0.75**2)


def test_exact_counts():
    assert lqft.count_exact(0, 1) == "1"
    assert lqft.count_exact(1, 1) == "2"
    assert lqft.count_exact(3, 5) == "0"
    big = lqft.count_exact(100, 10)
    assert big.isdigit()
    assert lqft.count_log(100, 10) == pytest.approx(math.log(int(big)))


def test_seiberg():
    g = math.sqrt(8 / 3)
    q = 2 / g + g / 2
    ok = lqft.seiberg_check(g, bulk=[(0, g)], boundary=[(0.0, g)])
    assert ok["admissible"]
    bad = lqft.seiberg_check(g, bulk=[(0, q)], boundary=[(0.0, 1.0)])
    assert not bad["admissible"]
    assert bad["findings"][0].startswith("bound2 violated")
    shape, rate = lqft.volume_law_params(g, bulk=[(0, g)], boundary=[(0.0, g)])
    assert shape == pytest.approx(0.25)
    assert rate == 1.0


def test_errors_are_translated():
    with pytest.raises(lqft.LqftError):
        lqft.count_exact(-1, 1)
    with pytest.raises(ValueError):
        lqft.seneta_heyde_factor(2.0)


def test_boundary_chaos_mean():
    t = lqft.boundary_total_masses(256, 512, 1.0, seed=3, n_replicas=400)
    assert len(t) == 400
    mean = sum(t) / len(t)
    se = math.sqrt(sum((x - mean) ** 2 for x in t) / (len(t) - 1) / len(t))
    assert abs(mean - 2 * math.pi * math.exp(-1 / 8)) < 4 * se
    assert t == lqft.boundary_total_masses(256, 512, 1.0, seed=3, n_replicas=400, workers=2)


def test_boltzmann_sample():
    draws = lqft.boltzmann_sample(0.01, 1.0, 1.0, seed=1, n_draws=100)
    assert len(draws) == 100
    assert all(n >= p - 1 and p >= 1 for n, p in draws)
