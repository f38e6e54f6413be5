import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from slabnls.metrics import (MetricSeries, UndefinedRatioError, bright_soliton, l1_error,
                             pde_residual, reflection_ratio, soliton_train)


def test_reflection_ratio_basics():
    psi0 = np.array([1.0, 2.0, 0.0])
    assert reflection_ratio(psi0, psi0) == 1.0
    assert reflection_ratio(psi0 / 2, psi0) == pytest.approx(0.25)
    with pytest.raises(UndefinedRatioError):
        reflection_ratio(psi0, np.zeros(3))


@settings(max_examples=30, deadline=None)
@given(seed=st.integers(0, 2**32 - 1), theta=st.floats(-10, 10))
def test_reflection_ratio_ignores_global_phase(seed, theta):
    rng = np.random.default_rng(seed)
    a = rng.normal(size=20) + 1j * rng.normal(size=20)
    b = rng.normal(size=20) + 1j * rng.normal(size=20)
    assert reflection_ratio(a * np.exp(1j * theta), b) == pytest.approx(reflection_ratio(a, b))


def test_l1_error():
    assert l1_error([1.0, 2.0], [1.0, 0.0]) == 1.0
    assert l1_error(np.array([1j, 0]), lambda: np.array([0, 0])) == 0.5


def test_soliton_peak_and_errors():
    assert bright_soliton(10.0, 0.0, 1.0, 2.0, -2.0, 10.0) == pytest.approx(1.0)
    assert abs(bright_soliton(0.0, 0.0, 2.0, 0.0, -8.0)) == pytest.approx(2.0 * 0.5)
    with pytest.raises(ValueError):
        bright_soliton(0.0, 0.0, 1.0, 1.0, 2.0)
    with pytest.raises(ValueError):
        bright_soliton(0.0, 0.0, -1.0, 1.0, -2.0)


@settings(max_examples=30, deadline=None)
@given(x=st.floats(0, 40), t=st.floats(0, 5), shift=st.floats(-3, 3))
def test_soliton_modulus_moves_at_twice_b(x, t, shift):
    a = abs(bright_soliton(x, t, 1.0, 2.0, -2.0, 20.0))
    b = abs(bright_soliton(x + 4.0 * shift, t + shift, 1.0, 2.0, -2.0, 20.0))
    assert a == pytest.approx(b, rel=1e-9, abs=1e-15)


def test_corrected_soliton_solves_the_equation():
    rng = np.random.default_rng(0)
    pts = np.column_stack([rng.uniform(5, 35, 100), rng.uniform(0, 5, 100)])
    sol = lambda x, t: bright_soliton(x, t, 1.0, 2.0, -2.0, 10.0)
    assert pde_residual(sol, g=-2.0, points=pts) <= 1e-8
    other = lambda x, t: bright_soliton(x, t, 1.3, -0.7, -1.0, 20.0)
    assert pde_residual(other, g=-1.0, points=pts) <= 1e-8


def test_sextupled_time_phase_is_not_a_solution():
    A, B, g, xc = 1.0, 2.0, -2.0, 10.0

    def variant(x, t):
        env = A * np.sqrt(-2 / g) / np.cosh(A * (x - 2 * B * t - xc))
        return env * np.exp(1j * (B * x + 6 * (A**2 - B**2) * t - B * xc))

    pts = [(10.5, 0.1), (12.0, 0.5), (15.0, 1.2)]
    assert pde_residual(variant, g=g, points=pts) >= 1e-1


def test_pde_residual_2d_plane_wave():
    k, l, V = 1.2, -0.4, 0.3
    wave = lambda x, y, t: np.exp(1j * (k * x + l * y - (k**2 + l**2 + V) * t))
    res = pde_residual(wave, g=0.0, potential=lambda x, y, t: V, points=[(0.3, 0.2, 0.1)])
    assert res < 1e-8


def test_soliton_train_is_a_sum():
    x = np.linspace(0, 40, 11)
    both = soliton_train(x, 0.5, [(1, 2, 10), (1, 5, 30)])
    np.testing.assert_allclose(both, bright_soliton(x, 0.5, 1, 2, -2, 10)
                               + bright_soliton(x, 0.5, 1, 5, -2, 30))


def test_metric_series():
    m = MetricSeries()
    m.append(0.0, 1.0, 0.0, {"left": 1.0, "right": 2.0}, 0)
    m.append(0.1, 0.9, 1e-3, {"left": 1.5, "right": 2.5}, 3)
    assert len(m) == 2 and m.k0_by_side["right"] == [2.0, 2.5]
