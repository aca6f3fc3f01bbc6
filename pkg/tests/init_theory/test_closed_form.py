"""
Unit tests for the closed-form step statistics and gains
"""

import math

import pytest

from deep_net import Nonlinearity
from init_theory import (
    GainMethod,
    exact_ln_z_moments_linear,
    g_linear,
    g_relu,
    gain_from_mean,
    ln_z_mean_linear,
    ln_z_mean_relu,
    ln_z_stats,
    ln_z_var_linear,
    ln_z_var_relu,
    optimal_gain,
)
from numeric_core import ArgumentError


class TestLinear:
    """Test cases for the linear expressions"""

    def test_reference_values(self):
        """Test mean, variance and gain at N = 100"""
        assert ln_z_mean_linear(100) == pytest.approx(-0.01)
        assert ln_z_var_linear(100) == pytest.approx(0.005)
        assert g_linear(100).g == pytest.approx(math.exp(1 / 200), rel=1e-12)
        assert g_linear(100).method is GainMethod.CLOSED_FORM

    def test_exact_moments(self):
        """Test ψ(N/2) + ln(2/N) and ψ'(N/2) at N = 100"""
        stats = exact_ln_z_moments_linear(100)
        assert stats.mean == pytest.approx(-0.0100333, abs=1e-7)
        assert stats.variance == pytest.approx(0.0202013, abs=1e-7)

    def test_exact_moments_small_width(self):
        """Test the digamma and trigamma values at 1"""
        stats = exact_ln_z_moments_linear(2)
        assert stats.mean == pytest.approx(-0.5772156649, abs=1e-7)
        assert stats.variance == pytest.approx(math.pi ** 2 / 6, abs=1e-7)

    @pytest.mark.parametrize("n", [1, 10, 100, 1000])
    def test_gain_is_exp_of_mean(self, n):
        """Test g = exp(-½ ⟨ln z⟩)"""
        assert gain_from_mean(ln_z_mean_linear(n)) == pytest.approx(g_linear(n).g)


class TestRelu:
    """Test cases for the ReLU fits"""

    def test_reference_gain(self):
        """Test g_relu(100)"""
        assert g_relu(100).g == pytest.approx(1.431709, abs=1e-6)

    def test_wide_limit(self):
        """Test the gain tends to √2"""
        assert g_relu(10 ** 9).g == pytest.approx(math.sqrt(2), rel=1e-8)

    @pytest.mark.parametrize("n", [6, 20, 100, 500])
    def test_gain_is_exp_of_mean(self, n):
        """Test the gain agrees with the mean fit"""
        assert gain_from_mean(ln_z_mean_relu(n)) == pytest.approx(g_relu(n).g)

    def test_narrow_widths_clamped(self):
        """Test widths below the fit's range reuse the smallest valid width"""
        assert ln_z_mean_relu(3) == ln_z_mean_relu(6)
        assert ln_z_var_relu(1) == ln_z_var_relu(6)
        assert ln_z_var_relu(6) == pytest.approx(2.5)


class TestDispatch:
    """Test cases for dispatch by nonlinearity"""

    def test_optimal_gain(self):
        """Test the closed-form gain per nonlinearity"""
        assert optimal_gain("linear", 50).g == g_linear(50).g
        assert optimal_gain(Nonlinearity.RELU, 50).g == g_relu(50).g

    def test_stats(self):
        """Test LnZStats carries the fits"""
        stats = ln_z_stats("relu", 20)
        assert stats.mean == ln_z_mean_relu(20)
        assert stats.variance == ln_z_var_relu(20)

    @pytest.mark.parametrize("call", [optimal_gain, ln_z_stats])
    def test_tanh_has_no_closed_form(self, call):
        """Test tanh is refused"""
        with pytest.raises(ArgumentError):
            call("tanh", 100)

    def test_zero_width(self):
        """Test widths below 1 are refused"""
        with pytest.raises(ArgumentError):
            g_linear(0)
