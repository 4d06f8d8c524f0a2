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

"""
Deterministic kernel algebra of the model: the wave kernel G, the coloration kernel k, the covariance
kernel f = k * k~, the windowed cone mass phi_{t,R} and convolutions of sampled functions with k.

Kernels are plain objects which can be pickled and shared between worker processes.
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import Callable, Optional

import numpy as np
from scipy import integrate, special, stats
from scipy.signal import fftconvolve

from hamlevy.core.exception import ConfigurationError, DomainError, GridTooCoarseError, NumericError, \
    UnsupportedConfigurationError

logger = logging.getLogger(__name__)

# Gauss-Legendre nodes used for cell integrals of kernels without a closed-form antiderivative.
_CELL_NODES, _CELL_WEIGHTS = np.polynomial.legendre.leggauss(8)


def _as_result(value):
    """ Returns a python float for 0-dimensional results and the array otherwise. """
    value = np.asarray(value)
    return float(value) if value.ndim == 0 else value


def wave_kernel(t: float, x):
    """
    Fundamental solution of the one-dimensional wave equation.
    :param t: the time (must be positive).
    :param x: a position or an array of positions.
    :returns 1/2 inside the light cone |x| < t, otherwise 0.
    """
    if t <= 0:
        raise DomainError("Wave kernel is only defined for t > 0, got t={}".format(t))
    return _as_result(np.where(np.abs(np.asarray(x, dtype=float)) < t, 0.5, 0.0))


def wave_kernel_lp_norm(t: float, p: float) -> float:
    """ :returns ||G_t||_p = (2^(1-p) t)^(1/p). """
    if t <= 0 or p <= 0:
        raise DomainError("Expected t > 0 and p > 0, got t={}, p={}".format(t, p))
    return (2.0 ** (1.0 - p) * t) ** (1.0 / p)


def phi_tR(t: float, R: float, r: float, y):
    """
    Mass of the wave kernel G_{t-r}(. - y) inside the window [-R, R].
    :returns half the length of [-R, R] intersected with [y-(t-r), y+(t-r)].
    """
    if r > t:
        raise DomainError("phi_tR requires r <= t, got r={}, t={}".format(r, t))
    if R <= 0:
        raise DomainError("phi_tR requires R > 0, got R={}".format(R))
    s = t - r
    y = np.asarray(y, dtype=float)
    overlap = np.minimum(R, y + s) - np.maximum(-R, y - s)
    return _as_result(0.5 * np.maximum(0.0, overlap))


def phi_tR_lp_norm(t: float, R: float, r: float, p: float) -> float:
    """
    Closed form of ||phi_{t,R}(r, .)||_p.

    The profile is a plateau of height m = min(t-r, R) and length 2(M-m) (M = max(t-r, R)) flanked by two
    linear ramps of width 2m, hence ||phi||_p^p = 2(M-m)m^p + 4m^(p+1)/(p+1).
    """
    if r > t:
        raise DomainError("phi_tR requires r <= t, got r={}, t={}".format(r, t))
    if R <= 0 or p <= 0:
        raise DomainError("Expected R > 0 and p > 0, got R={}, p={}".format(R, p))
    s = t - r
    m, M = min(s, R), max(s, R)
    if m == 0:
        return 0.0
    return (2.0 * (M - m) * m ** p + 4.0 * m ** (p + 1.0) / (p + 1.0)) ** (1.0 / p)


def riesz_constant(alpha: float) -> float:
    """ :returns C_{1,alpha} = pi^(-1/2) 2^(-alpha) Gamma((1-alpha)/2) / Gamma(alpha/2). """
    if not 0 < alpha < 1:
        raise DomainError("Riesz order must lie inside (0, 1), got alpha={}".format(alpha))
    return math.pi ** -0.5 * 2.0 ** -alpha * special.gamma((1.0 - alpha) / 2.0) / special.gamma(alpha / 2.0)


@dataclass(frozen=True)
class SampledFunction:
    """
    A function sampled at the centers origin + i * step of uniform cells, read as piecewise constant.
    error_bound holds a bound on the pointwise error committed when producing the samples.
    """
    origin: float
    step: float
    values: np.ndarray
    error_bound: float = 0.0

    @property
    def positions(self) -> np.ndarray:
        return self.origin + self.step * np.arange(len(self.values))

    def lp_norm(self, p: float) -> float:
        return float((self.step * np.sum(np.abs(self.values) ** p)) ** (1.0 / p))

    def integral(self) -> float:
        return float(self.step * math.fsum(self.values))


@dataclass(frozen=True)
class CovarianceKernel:
    """
    The covariance kernel f = k * k~ of the noise.
    :param evaluator: pointwise evaluation of f.
    :param closed_form: True when f is analytically known.
    :param antiderivative: optional primitive of f, used for cell averages of singular kernels.
    """
    evaluator: Callable
    closed_form: bool
    antiderivative: Optional[Callable] = None

    def __call__(self, x):
        return _as_result(self.evaluator(np.asarray(x, dtype=float)))

    def cell_average(self, lo, hi):
        """ :returns the mean of f over each interval [lo, hi]. """
        lo, hi = np.asarray(lo, dtype=float), np.asarray(hi, dtype=float)
        if self.antiderivative is not None:
            return (self.antiderivative(hi) - self.antiderivative(lo)) / (hi - lo)
        mid, half = (hi + lo) / 2.0, (hi - lo) / 2.0
        samples = self.evaluator(mid[..., None] + half[..., None] * _CELL_NODES)
        return samples @ _CELL_WEIGHTS / 2.0


class KernelSpec(object):
    """ Base-class of the spatial coloration kernels k. Should not be used directly. """

    name = ""

    def __call__(self, x):
        """ :returns k(x). """
        raise NotImplementedError("Method must be implemented from upper class")

    def cell_masses(self, edges) -> np.ndarray:
        """ :returns the integrals of k over the cells [edges[i], edges[i+1]]. """
        raise NotImplementedError("Method must be implemented from upper class")

    @property
    def reach(self) -> float:
        """ Half-width of the (numeric) support of k. """
        raise NotImplementedError("Method must be implemented from upper class")

    @property
    def l1_norm(self) -> float:
        raise NotImplementedError("Method must be implemented from upper class")

    def spectral_density(self, xi):
        """ :returns the density |Fk(xi)|^2 / (2 pi) of the spectral measure mu. """
        raise UnsupportedConfigurationError("Kernel '{}' has no closed-form Fourier transform".format(self.label()))

    def covariance(self) -> CovarianceKernel:
        raise NotImplementedError("Method must be implemented from upper class")

    def default_quadrature_step(self, dx: float) -> float:
        raise NotImplementedError("Method must be implemented from upper class")

    def is_riesz(self) -> bool:
        return False

    def beta(self) -> float:
        """ :returns the variance growth exponent of the spatial averages. """
        return 1.0

    def label(self) -> str:
        """ :returns a short description of the kernel (e.g. "riesz(alpha=0.5)"). """
        return self.name

    def __repr__(self):
        return self.label()


class IntegrableKernel(KernelSpec):
    """
    An integrable, symmetric kernel with compact (numeric) support [-half_width, half_width].
    """

    name = "custom"

    def __init__(self, evaluator: Callable, half_width: float, l1_norm: float, name: str = None):
        """
        :param evaluator: the pointwise evaluator of k (vectorized).
        :param half_width: the effective support half-width a.
        :param l1_norm: the L1 norm of k.
        :param name: the name of the kernel as shown in reports.
        """
        if half_width <= 0:
            raise ConfigurationError("kernel/half_width: must be positive, got {}".format(half_width))
        self._evaluator = evaluator
        self._half_width = float(half_width)
        self._l1_norm = float(l1_norm)
        if name:
            self.name = name
        self._check()

    def _check(self):
        x = np.linspace(0.0, self._half_width, 33)
        if not np.allclose(self(x), self(-x), rtol=1e-12, atol=1e-15):
            raise ConfigurationError("kernel/{}: evaluator is not symmetric".format(self.name))
        quadrature = float(np.sum(np.abs(self.cell_masses(np.linspace(-self._half_width, self._half_width, 513)))))
        if abs(quadrature - self._l1_norm) > 1e-6 * self._l1_norm:
            raise ConfigurationError("kernel/{}: declared L1 norm {} does not match quadrature {}".format(
                self.name, self._l1_norm, quadrature))

    def __call__(self, x):
        x = np.asarray(x, dtype=float)
        return _as_result(np.where(np.abs(x) <= self._half_width, self._evaluator(x), 0.0))

    def cell_masses(self, edges) -> np.ndarray:
        edges = np.clip(np.asarray(edges, dtype=float), -self._half_width, self._half_width)
        lo, hi = edges[:-1], edges[1:]
        mid, half = (hi + lo) / 2.0, (hi - lo) / 2.0
        return (self._evaluator(mid[:, None] + half[:, None] * _CELL_NODES) @ _CELL_WEIGHTS) * half

    @property
    def reach(self) -> float:
        return self._half_width

    @property
    def l1_norm(self) -> float:
        return self._l1_norm

    def covariance(self) -> CovarianceKernel:
        a = self._half_width

        def evaluate(x):
            x = np.atleast_1d(np.asarray(x, dtype=float))
            result = np.empty_like(x)
            for i, shift in enumerate(x.flat):
                lo, hi = max(-a, shift - a), min(a, shift + a)
                if lo >= hi:
                    result.flat[i] = 0.0
                    continue
                value, residual = integrate.quad(lambda y: self._evaluator(y) * self._evaluator(y - shift), lo, hi)
                if residual > 1e-8 * max(1.0, abs(value)):
                    raise NumericError("Covariance quadrature did not converge at x={}".format(shift), residual)
                result.flat[i] = value
            return result

        return CovarianceKernel(evaluate, closed_form=False)

    def default_quadrature_step(self, dx: float) -> float:
        return min(dx, self._half_width / 8.0)


def _gaussian_density(x):
    return np.exp(-np.asarray(x, dtype=float) ** 2 / 2.0) / math.sqrt(2.0 * math.pi)


def _box_density(x, a):
    return np.where(np.abs(x) <= a, 0.5 / a, 0.0)


class GaussianKernel(IntegrableKernel):
    """ The standard normal density, truncated at 8 standard deviations. """

    name = "gaussian"

    def __init__(self):
        super(GaussianKernel, self).__init__(_gaussian_density, 8.0, 1.0)

    def cell_masses(self, edges) -> np.ndarray:
        return np.diff(stats.norm.cdf(np.clip(np.asarray(edges, dtype=float), -self.reach, self.reach)))

    def spectral_density(self, xi):
        return _as_result(np.exp(-np.asarray(xi, dtype=float) ** 2) / (2.0 * math.pi))

    def covariance(self) -> CovarianceKernel:
        scale = math.sqrt(2.0)
        return CovarianceKernel(
            lambda x: stats.norm.pdf(x, scale=scale), closed_form=True,
            antiderivative=lambda x: stats.norm.cdf(x, scale=scale))


class BoxKernel(IntegrableKernel):
    """ The normalized indicator of [-a, a], kept as a test shape. """

    name = "box"

    def __init__(self, a: float = 0.5):
        if a <= 0:
            raise ConfigurationError("kernel/a: must be positive, got {}".format(a))
        self.a = float(a)
        super(BoxKernel, self).__init__(functools.partial(_box_density, a=self.a), self.a, 1.0)

    def cell_masses(self, edges) -> np.ndarray:
        edges = np.clip(np.asarray(edges, dtype=float), -self.a, self.a)
        return np.diff(edges) / (2.0 * self.a)

    def spectral_density(self, xi):
        xi = np.asarray(xi, dtype=float)
        return _as_result(np.sinc(self.a * xi / math.pi) ** 2 / (2.0 * math.pi))

    def covariance(self) -> CovarianceKernel:
        a = self.a

        def primitive(x):
            ax = np.minimum(np.abs(x), 2.0 * a)
            return np.sign(x) * (2.0 * a * ax - ax ** 2 / 2.0) / (4.0 * a * a)

        return CovarianceKernel(
            lambda x: np.maximum(0.0, 2.0 * a - np.abs(x)) / (4.0 * a * a), closed_form=True,
            antiderivative=primitive)

    def label(self) -> str:
        return "box(a={!r})".format(self.a)


class RieszKernel(KernelSpec):
    """
    Riesz kernel k = R_{1,alpha/2} so that the covariance kernel is f = R_{1,alpha}.
    Numeric convolutions truncate k at truncation_radius.
    """

    name = "riesz"

    def __init__(self, alpha: float, truncation_radius: float = 64.0):
        if not 0 < alpha < 1:
            raise ConfigurationError("kernel/alpha: must lie inside (0, 1), got {}".format(alpha))
        if truncation_radius <= 0:
            raise ConfigurationError("kernel/truncation_radius: must be positive, got {}".format(truncation_radius))
        self.alpha = float(alpha)
        self.truncation_radius = float(truncation_radius)
        self._constant = riesz_constant(alpha / 2.0)

    def __call__(self, x):
        x = np.abs(np.asarray(x, dtype=float))
        with np.errstate(divide="ignore"):
            value = np.where(x <= self.truncation_radius, self._constant * x ** (self.alpha / 2.0 - 1.0), 0.0)
        return _as_result(value)

    def _primitive(self, x):
        """ Antiderivative of the truncated kernel, vanishing at 0. """
        x = np.clip(np.asarray(x, dtype=float), -self.truncation_radius, self.truncation_radius)
        exponent = self.alpha / 2.0
        return self._constant * np.sign(x) * np.abs(x) ** exponent / exponent

    def cell_masses(self, edges) -> np.ndarray:
        return np.diff(self._primitive(edges))

    @property
    def reach(self) -> float:
        return self.truncation_radius

    @property
    def l1_norm(self) -> float:
        return float(2.0 * self._primitive(self.truncation_radius))

    def spectral_density(self, xi):
        with np.errstate(divide="ignore"):
            return _as_result(np.abs(np.asarray(xi, dtype=float)) ** -self.alpha / (2.0 * math.pi))

    def covariance(self) -> CovarianceKernel:
        alpha = self.alpha
        constant = riesz_constant(alpha)
        return CovarianceKernel(
            lambda x: constant * np.abs(x) ** (alpha - 1.0), closed_form=True,
            antiderivative=lambda x: constant * np.sign(x) * np.abs(x) ** alpha / alpha)

    def default_quadrature_step(self, dx: float) -> float:
        return self.truncation_radius / 2048.0

    def is_riesz(self) -> bool:
        return True

    def beta(self) -> float:
        return self.alpha + 1.0

    def tail_bound(self) -> float:
        """ :returns sup of the omitted kernel tail |x| > truncation_radius. """
        return float(self._constant * self.truncation_radius ** (self.alpha / 2.0 - 1.0))

    def label(self) -> str:
        return "riesz(alpha={!r})".format(self.alpha)


def covariance_kernel(spec: KernelSpec) -> CovarianceKernel:
    """ :returns the covariance kernel f = k * k~ of the given coloration kernel. """
    return spec.covariance()


def kernel_stencil(spec: KernelSpec, step: float) -> np.ndarray:
    """
    :returns the masses K_j of k over the cells [(j-1/2)step, (j+1/2)step] for j = -J..J with J = ceil(reach/step).
    """
    limit = spec.reach / 4.0
    if step > limit:
        raise GridTooCoarseError(step, spec.reach, limit)
    J = int(math.ceil(spec.reach / step))
    edges = (np.arange(-J, J + 2) - 0.5) * step
    return spec.cell_masses(edges)


def convolve_kernel(g: SampledFunction, spec: KernelSpec) -> SampledFunction:
    """
    Convolves a piecewise constant function with the kernel.
    The result is sampled on the same step, extended by J = ceil(reach/step) cells on both sides.
    For Riesz kernels the error bound ||g||_1 * k(truncation_radius) of the omitted tails is reported.
    """
    stencil = kernel_stencil(spec, g.step)
    J = (len(stencil) - 1) // 2
    values = np.asarray(g.values, dtype=float)
    if not np.any(values):
        out = np.zeros(len(values) + 2 * J)
    else:
        out = fftconvolve(values, stencil, mode="full")
    error_bound = g.error_bound * spec.l1_norm
    if spec.is_riesz():
        error_bound += float(g.step * np.sum(np.abs(values))) * spec.tail_bound()
        logger.debug("Riesz truncation error bound {:.3e}".format(error_bound))
    return SampledFunction(g.origin - J * g.step, g.step, out, error_bound)


def dalang_value(weight: Callable) -> float:
    """ :returns the integral of (1 + xi^2)^-1 against a symmetric spectral density over the real line. """
    integrand = lambda xi: weight(xi) / (1.0 + xi * xi)
    total, residual = 0.0, 0.0
    for lo, hi in ((0.0, 1.0), (1.0, np.inf)):
        value, error = integrate.quad(integrand, lo, hi, limit=200)
        total += value
        residual += error
    total, residual = 2.0 * total, 2.0 * residual
    if not math.isfinite(total):
        raise ConfigurationError("Dalang integral diverges")
    if residual > 1e-6 * max(1.0, abs(total)):
        raise NumericError("Dalang integral did not converge", residual)
    return total


def dalang_check(spec: KernelSpec) -> float:
    """ :returns the integral of (1 + xi^2)^-1 mu(d xi); finite for every admissible kernel. """
    value = dalang_value(lambda xi: float(spec.spectral_density(xi)))
    logger.debug("Dalang integral of {}: {}".format(spec.label(), value))
    return value


def cone_factor(t: float, xi):
    """ :returns the integral of sin^2(s xi)/xi^2 over s in [0, t], i.e. (t/2 - sin(2 t xi)/(4 xi)) / xi^2. """
    xi = np.abs(np.asarray(xi, dtype=float))
    small = t * xi < 1e-3
    safe = np.where(small, 1.0, xi)
    exact = (t / 2.0 - np.sin(2.0 * t * safe) / (4.0 * safe)) / safe ** 2
    series = t ** 3 / 3.0 - t ** 5 * xi ** 2 / 15.0
    return _as_result(np.where(small, series, exact))


def spectral_integral(spec: KernelSpec, func: Callable, period: float = None, upper: float = 64.0) -> float:
    """
    Integrates func(xi) mu(d xi) over the real line for symmetric integrands.
    :param period: when given, [0, upper] is split into pieces of this length (oscillating integrands).
    """
    integrand = lambda xi: func(xi) * spec.spectral_density(xi)
    total, residual = 0.0, 0.0
    head = min(1.0, upper) if period is None else min(period, upper)
    value, error = integrate.quad(integrand, 0.0, head, limit=200)
    total, residual = total + value, residual + error
    if period is None:
        pieces = np.array([head, upper])
    else:
        pieces = np.arange(head, upper + period, period)
        pieces[-1] = max(pieces[-1], upper)
    nodes, weights = np.polynomial.legendre.leggauss(24)
    lo, hi = pieces[:-1, None], pieces[1:, None]
    xi = (hi + lo) / 2.0 + (hi - lo) / 2.0 * nodes
    body = np.asarray(func(xi) * spec.spectral_density(xi))
    total += float(np.sum(body @ weights * (hi - lo)[:, 0] / 2.0))
    value, error = integrate.quad(integrand, pieces[-1], np.inf, limit=200)
    total, residual = total + value, residual + error
    total, residual = 2.0 * total, 2.0 * residual
    if residual > 1e-6 * max(1.0, abs(total)):
        raise NumericError("Spectral integral did not converge", residual)
    return total


def q_t(spec: KernelSpec, t: float) -> float:
    """
    :returns q_t, the integral over [0, t] of the f-weighted energy of G_s, computed on the Fourier side as the
    integral of (t/2 - sin(2 t xi)/(4 xi)) / xi^2 against mu.
    """
    if t <= 0:
        raise DomainError("q_t requires t > 0, got t={}".format(t))
    return spectral_integral(spec, lambda xi: cone_factor(t, xi), period=math.pi / t)
