# vim: ts=8:sts=8:sw=8:noexpandtab
#
# This file is part of HamLevy
#
# This program is free software; you can redistribute it and/or modify
# it under the terms of the GNU General Public License as published by
# the Free Software Foundation; either version 2 of the License, or
# (at your option) any later version.
#
# This program is distributed in the hope that it will be useful,
# but WITHOUT ANY WARRANTY; without even the implied warranty of
# MERCHANTABILITY or FITNESS FOR A PARTICULAR PURPOSE. See the
# GNU General Public License for more details.
#
# You should have received a copy of the GNU General Public License
# along with this program.  If not, see <http://www.gnu.org/licenses/>.

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy import integrate

from hamlevy.core.exception import ConfigurationError, DomainError, GridTooCoarseError
from hamlevy.core.kernels import (BoxKernel, GaussianKernel, RieszKernel, SampledFunction, cone_factor,
                                  convolve_kernel, covariance_kernel, dalang_check, kernel_stencil, phi_tR,
                                  phi_tR_lp_norm, q_t, riesz_constant, wave_kernel, wave_kernel_lp_norm)


def test_wave_kernel_is_half_inside_the_open_cone():
    values = wave_kernel(1.0, np.array([0.0, -0.99, 0.99, 1.0, -1.0, 2.0]))
    assert list(values) == [0.5, 0.5, 0.5, 0.0, 0.0, 0.0]
    assert wave_kernel(2.0, 0.0) == 0.5


@pytest.mark.parametrize("t", [0.0, -1.0])
def test_wave_kernel_requires_positive_time(t):
    with pytest.raises(DomainError):
        wave_kernel(t, 0.0)


@given(t=st.floats(0.05, 10.0), p=st.floats(1.0, 6.0))
@settings(max_examples=50, deadline=None)
def test_wave_kernel_norm_closed_form(t, p):
    # G_t is 1/2 on an interval of length 2t.
    assert wave_kernel_lp_norm(t, p) == pytest.approx((0.5 ** p * 2.0 * t) ** (1.0 / p), rel=1e-12)


@pytest.mark.parametrize("t, R, r, y, expected", [
    (2.0, 1.0, 0.0, 0.0, 1.0),
    (1.0, 10.0, 0.0, 0.0, 1.0),
    (1.0, 10.0, 0.5, 0.0, 0.5),
    (1.0, 1.0, 0.0, 1.5, 0.25),
    (1.0, 1.0, 0.0, 2.5, 0.0),
    (1.0, 1.0, 1.0, 0.0, 0.0),
])
def test_phi_tR_values(t, R, r, y, expected):
    assert phi_tR(t, R, r, y) == pytest.approx(expected, abs=1e-15)


def test_phi_tR_rejects_future_times():
    with pytest.raises(DomainError):
        phi_tR(1.0, 1.0, 2.0, 0.0)


@given(t=st.floats(0.1, 5.0), R=st.floats(0.1, 20.0), fraction=st.floats(0.0, 0.95), p=st.floats(1.0, 5.0))
@settings(max_examples=40, deadline=None)
def test_phi_tR_norm_matches_quadrature(t, R, fraction, p):
    r = fraction * t
    s = t - r
    breakpoints = sorted(point for point in {-abs(R - s), 0.0, abs(R - s)} if -R - s < point < R + s)
    integrand = lambda y: phi_tR(t, R, r, y) ** p
    value, _ = integrate.quad(integrand, -R - s, R + s, points=breakpoints, limit=200, epsabs=0.0, epsrel=1e-12)
    assert phi_tR_lp_norm(t, R, r, p) == pytest.approx(value ** (1.0 / p), rel=1e-9)


@given(t=st.floats(0.1, 5.0), R=st.floats(0.1, 50.0), fraction=st.floats(0.0, 0.99), p=st.floats(1.0, 5.0))
@settings(max_examples=60, deadline=None)
def test_phi_tR_norm_sharp_bound(t, R, fraction, p):
    r = fraction * t
    bound = 2.0 ** (1.0 / p) * (t - r) * R ** (1.0 / p)
    assert phi_tR_lp_norm(t, R, r, p) <= bound * (1.0 + 1e-12)


def test_gaussian_covariance_at_zero(gaussian):
    assert gaussian.covariance()(0.0) == pytest.approx(1.0 / (2.0 * math.sqrt(math.pi)), rel=1e-12)
    assert gaussian.spectral_density(0.0) == pytest.approx(1.0 / (2.0 * math.pi))


def test_box_covariance_is_a_triangle(box):
    f = covariance_kernel(box)
    assert f(0.0) == pytest.approx(1.0)
    assert f(0.5) == pytest.approx(0.5)
    assert f(1.0) == pytest.approx(0.0)
    assert f.cell_average(np.array([-1.0]), np.array([1.0]))[0] == pytest.approx(0.5)


def test_riesz_constant_at_one_half():
    assert riesz_constant(0.5) == pytest.approx(1.0 / math.sqrt(2.0 * math.pi), rel=1e-12)


@pytest.mark.parametrize("alpha", [0.0, 1.0, 1.5])
def test_riesz_order_must_lie_in_unit_interval(alpha):
    with pytest.raises(DomainError):
        riesz_constant(alpha)
    with pytest.raises(ConfigurationError):
        RieszKernel(alpha)


def test_riesz_kernel_properties(riesz):
    assert riesz.is_riesz()
    assert riesz.beta() == pytest.approx(1.5)
    assert riesz.label() == "riesz(alpha=0.5)"
    assert riesz.tail_bound() > 0


def test_integrable_kernels_grow_linearly(gaussian, box):
    assert gaussian.beta() == 1.0
    assert box.beta() == 1.0
    assert gaussian.l1_norm == pytest.approx(1.0)
    assert box.label() == "box(a=0.5)"


def test_stencil_rejects_coarse_steps(box):
    with pytest.raises(GridTooCoarseError):
        kernel_stencil(box, 0.2)
    assert kernel_stencil(box, 0.05).sum() == pytest.approx(1.0)


@pytest.mark.parametrize("kernel", [BoxKernel(0.5), BoxKernel(2.0)])
def test_convolution_keeps_the_integral(kernel):
    g = SampledFunction(-1.0, 0.05, np.ones(41))
    out = convolve_kernel(g, kernel)
    assert out.integral() == pytest.approx(g.integral() * kernel.l1_norm, rel=1e-12)
    assert out.error_bound == 0.0


def test_convolution_young_bound(box):
    g = SampledFunction(-3.0, 0.05, np.sin(np.linspace(0.0, 6.0, 121)))
    out = convolve_kernel(g, box)
    for p in (1.0, 2.0, 4.0):
        assert out.lp_norm(p) <= g.lp_norm(p) * box.l1_norm * (1.0 + 1e-12)


def test_riesz_convolution_reports_truncation(riesz):
    g = SampledFunction(-1.0, riesz.default_quadrature_step(0.05) * 4.0, np.ones(8))
    assert convolve_kernel(g, riesz).error_bound > 0


@pytest.mark.parametrize("kernel", [GaussianKernel(), RieszKernel(0.3)])
def test_dalang_condition_holds_for_presets(kernel):
    assert 0 < dalang_check(kernel) < math.inf


def test_cone_factor_is_continuous_at_zero():
    assert cone_factor(1.0, 0.0) == pytest.approx(1.0 / 3.0)
    assert cone_factor(1.0, 1e-4) == pytest.approx(cone_factor(1.0, 2e-3), rel=1e-5)


def test_q_t_matches_the_spatial_integral(gaussian):
    # q_t = int_0^t (1/4) int_{-2s}^{2s} (2s - |u|) f(u) du ds for the wave kernel G_s.
    f = gaussian.covariance()
    inner = lambda s: 0.25 * integrate.quad(lambda u: (2.0 * s - abs(u)) * f(u), -2.0 * s, 2.0 * s,
                                            points=[0.0], limit=200)[0]
    expected, _ = integrate.quad(inner, 0.0, 1.0, limit=200)
    assert q_t(gaussian, 1.0) == pytest.approx(expected, rel=1e-6)


def test_q_t_requires_positive_time(box):
    with pytest.raises(DomainError):
        q_t(box, 0.0)


def midpoint_rule(func, breakpoints, cells=64):
    """ Composite midpoint rule with the given breakpoints as cell edges. """
    total = []
    for a, b in zip(breakpoints[:-1], breakpoints[1:]):
        step = (b - a) / cells
        total.append(step * math.fsum(func(a + step * (np.arange(cells) + 0.5))))
    return math.fsum(total)


def test_phi_tR_matches_the_midpoint_rule(rng):
    for _ in range(100):
        t, R = rng.uniform(0.1, 4.0), rng.uniform(0.5, 16.0)
        r, y = rng.uniform(0.0, t), rng.uniform(-R - t, R + t)
        s = t - r
        breakpoints = sorted({-R, R} | {edge for edge in (y - s, y + s) if -R < edge < R})
        expected = midpoint_rule(lambda x: wave_kernel(s, x - y), breakpoints)
        assert phi_tR(t, R, r, y) == pytest.approx(expected, abs=1e-10)


def test_riesz_convolution_against_the_untruncated_kernel(riesz):
    # g = G_1 sampled exactly on cells of width 0.01, so only the kernel truncation separates g * k from the oracle
    step = 0.01
    g = SampledFunction(-1.0 + step / 2.0, step, np.full(200, 0.5))
    out = convolve_kernel(g, riesz)
    constant, exponent = riesz_constant(riesz.alpha / 2.0), riesz.alpha / 2.0
    primitive = lambda x: constant * np.sign(x) * np.abs(x) ** exponent / exponent
    x = out.positions
    oracle = 0.5 * (primitive(x + 1.0) - primitive(x - 1.0))
    assert np.all(np.abs(out.values - oracle) <= out.error_bound)
    inside = np.abs(x) <= riesz.truncation_radius - 1.0
    relative = np.linalg.norm(out.values[inside] - oracle[inside]) / np.linalg.norm(oracle[inside])
    assert relative < 1e-4
