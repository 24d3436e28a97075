import math

import numpy as np
import pytest

from fraclab.fraccalc import (
    FracOrder,
    SampledPath,
    caputo_from_rl,
    gl_derivative,
    gl_weights,
    rl_power_law,
)
from fraclab.specfn import binom, gamma

from _oracles import caputo_exp_series


def _grid(t_end, dt):
    return np.arange(0.0, t_end + dt / 2, dt)


class TestTypes:
    def test_sampled_path_validation(self):
        with pytest.raises(ValueError):
            SampledPath(t0=0.0, dt=0.0, values=np.ones(3))
        with pytest.raises(ValueError):
            SampledPath(t0=0.0, dt=0.1, values=np.empty(0))
        p = SampledPath(t0=1.0, dt=0.5, values=[1.0, 2.0, 3.0])
        assert p.t.tolist() == [1.0, 1.5, 2.0]
        assert p.duration == pytest.approx(1.0)
        assert not p.values.flags.writeable

    def test_frac_order_range(self):
        FracOrder(1.0)
        with pytest.raises(ValueError):
            FracOrder(0.0)
        with pytest.raises(ValueError):
            FracOrder(1.2)


class TestWeights:
    def test_recurrence_matches_binomials(self):
        alpha = 0.6
        w = gl_weights(alpha, 8)
        expected = [(-1.0) ** j * binom(alpha, j) for j in range(9)]
        assert np.allclose(w, expected, rtol=1e-12)

    def test_integral_weights_positive(self):
        w = gl_weights(-0.5, 50)
        assert np.all(w > 0.0)


class TestGlDerivative:
    def test_integer_order_recovers_derivative(self):
        dt = 1e-3
        t = _grid(1.0, dt)
        out = gl_derivative(SampledPath(0.0, dt, t**2), 1.0)
        assert np.abs(out.values - 2.0 * t).max() <= 5e-3

    def test_half_derivative_of_cubic(self):
        dt = 1e-3
        t = _grid(1.0, dt)
        out = gl_derivative(SampledPath(0.0, dt, t**3), 0.5)
        # closed form Gamma(4)/Gamma(3.5) t^2.5 evaluated at t = 1
        assert out.values[-1] == pytest.approx(1.8054066868060445, abs=5e-3)

    def test_first_integral_of_unity(self):
        dt = 1e-3
        t = _grid(1.0, dt)
        out = gl_derivative(SampledPath(0.0, dt, np.ones_like(t)), -1.0)
        assert np.abs(out.values - t).max() <= 1.5 * dt

    def test_first_order_convergence(self):
        errs = []
        for dt in (1e-2, 5e-3, 2.5e-3):
            t = _grid(2.0, dt)
            out = gl_derivative(SampledPath(0.0, dt, t**3), 0.5)
            mask = t >= 0.1
            exact = np.array([rl_power_law(3.0, 0.5, ti, 0.0) for ti in t[mask]])
            errs.append(np.abs(out.values[mask] - exact).max())
        assert errs[0] / errs[1] == pytest.approx(2.0, abs=0.25)
        assert errs[1] / errs[2] == pytest.approx(2.0, abs=0.25)

    def test_integral_semigroup(self):
        dt = 1e-3
        t = _grid(1.0, dt)
        path = SampledPath(0.0, dt, np.sin(t))
        for p, q in ((0.25, 0.25), (0.25, 0.5), (0.5, 0.5)):
            once = gl_derivative(gl_derivative(path, -p), -q)
            direct = gl_derivative(path, -(p + q))
            assert np.abs(once.values - direct.values).max() <= 5e-3

    def test_scalar_linearity_bitwise_power_of_two(self):
        dt = 0.01
        t = _grid(1.0, dt)
        path = SampledPath(0.0, dt, np.exp(t))
        scaled = SampledPath(0.0, dt, 4.0 * np.exp(t))
        a = gl_derivative(scaled, 0.5).values
        b = 4.0 * gl_derivative(path, 0.5).values
        assert np.array_equal(a, b)

    def test_additive_linearity(self):
        dt = 0.01
        t = _grid(1.0, dt)
        f = SampledPath(0.0, dt, np.sin(t))
        g = SampledPath(0.0, dt, t**2)
        both = gl_derivative(SampledPath(0.0, dt, np.sin(t) + t**2), 0.3)
        summed = gl_derivative(f, 0.3).values + gl_derivative(g, 0.3).values
        assert np.allclose(both.values, summed, rtol=1e-13, atol=1e-13)

    def test_memory_locality(self):
        dt = 0.1
        vals = np.sin(_grid(2.0, dt))
        base = gl_derivative(SampledPath(0.0, dt, vals), 0.5).values
        bumped = vals.copy()
        j = 7
        bumped[j] += 0.25
        after = gl_derivative(SampledPath(0.0, dt, bumped), 0.5).values
        assert np.array_equal(base[:j], after[:j])
        assert np.all(base[j:] != after[j:])

    def test_order_range(self):
        p = SampledPath(0.0, 0.1, np.ones(5))
        with pytest.raises(ValueError):
            gl_derivative(p, 1.5)
        with pytest.raises(ValueError):
            gl_derivative(p, -1.2)

    def test_start_sample_convention(self):
        dt = 0.1
        t = _grid(1.0, dt)
        out = gl_derivative(SampledPath(0.0, dt, np.exp(t)), 0.5)
        assert out.values[0] == 0.0


class TestRlPowerLaw:
    def test_worked_example(self):
        assert rl_power_law(3.0, 0.5, 1.0, 0.0) == pytest.approx(
            gamma(4.0) / gamma(3.5), rel=1e-13
        )

    def test_integer_cases(self):
        assert rl_power_law(2.0, 1.0, 3.0, 0.0) == pytest.approx(6.0)
        assert rl_power_law(1.0, 1.0, 5.0, 2.0) == pytest.approx(1.0)

    def test_domain_and_poles(self):
        with pytest.raises(ValueError):
            rl_power_law(1.0, 0.5, -0.1, 0.0)
        with pytest.raises(ValueError):
            rl_power_law(0.5, 1.5, 1.0, 0.0)  # sigma - order + 1 = 0

    def test_at_lower_terminal(self):
        assert rl_power_law(3.0, 0.5, 0.0, 0.0) == 0.0
        assert rl_power_law(0.5, 0.5, 0.0, 0.0) == pytest.approx(gamma(1.5))


class TestCaputoFromRl:
    def test_zero_start_is_identity(self):
        dt = 0.01
        t = _grid(1.0, dt)
        rl = gl_derivative(SampledPath(0.0, dt, t**3), 0.5)
        out = caputo_from_rl(rl, [0.0], 0.5, 0.0)
        assert out is rl

    def test_constant_function_vanishes(self):
        # RL derivative of a constant c is c t^-a / Gamma(1-a); Caputo is 0
        dt = 1e-3
        alpha = 0.4
        t = _grid(2.0, dt)
        c = 3.7
        rl_vals = np.zeros_like(t)
        rl_vals[1:] = c * t[1:] ** (-alpha) / gamma(1.0 - alpha)
        rl = SampledPath(0.0, dt, rl_vals)
        cap = caputo_from_rl(rl, [c], alpha, 0.0)
        assert np.abs(cap.values[1:]).max() <= 1e-12

    def test_exponential_against_series(self):
        dt = 1e-3
        alpha = 0.5
        t = _grid(2.0, dt)
        rl = gl_derivative(SampledPath(0.0, dt, np.exp(t)), alpha)
        cap = caputo_from_rl(rl, [1.0], alpha, 0.0)
        mask = t >= 0.1
        exact = np.array([caputo_exp_series(ti, alpha) for ti in t[mask]])
        rel = np.abs(cap.values[mask] - exact) / exact
        assert rel.max() <= 0.01

    def test_order_and_terminal_validation(self):
        p = SampledPath(0.0, 0.1, np.ones(5))
        with pytest.raises(ValueError):
            caputo_from_rl(p, [1.0], 1.0, 0.0)
        with pytest.raises(ValueError):
            caputo_from_rl(p, [1.0], 0.5, 1.0)
