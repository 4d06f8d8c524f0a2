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
Estimators and Monte-Carlo experiments on spatial averages F_R(t): variance scaling, limit covariance, CLT
distances, ergodicity, functional CLT path statistics and the deterministic audit of the QCLT rate bounds.
"""

import logging
import math
from collections import namedtuple
from dataclasses import dataclass
from typing import Callable, Dict, List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import stats

from hamlevy.core.chaos_combinatorics import truncated_second_moment
from hamlevy.core.exception import ConfigurationError, DomainError
from hamlevy.core.kernels import (KernelSpec, SampledFunction, cone_factor, convolve_kernel, phi_tR,
                                  phi_tR_lp_norm, spectral_integral, wave_kernel_lp_norm)
from hamlevy.core.levy_noise import LevyMeasureSpec
from hamlevy.core.parallel import (RunningMoments, simulate_averages, simulate_gaussian_averages,
                                   simulate_gaussian_values, simulate_values)
from hamlevy.core.report import ExperimentReport, Status
from hamlevy.core.solver import GRID, spatial_average

logger = logging.getLogger(__name__)

__all__ = ["AverageSample", "RatePlan", "LogLogFit", "CltDistances", "spatial_average", "jackknife",
           "jackknife_variance", "fit_loglog", "first_chaos_variance", "limit_covariance_shape", "clt_distances",
           "sample_averages", "variance_scan", "covariance_limit", "qclt_experiment", "audit_gamma_rates",
           "ergodic_check", "doubling_ratio", "shape_doubling_ratio", "fclt_experiment",
           "second_moment_identity"]

JACKKNIFE_BLOCKS = 50
SLOPE_TOLERANCE = 0.15
MAX_RELATIVE_SE = 0.2
DK_THRESHOLD = 0.06
DKW_DELTA = 0.05
COVARIANCE_TOLERANCE = 0.1
RATIO_TOLERANCE = 0.15
BOUNDED_RATIO = 5.0
AUDIT_SLACK = 0.1
ERGODIC_SLOPE_TOLERANCE = 0.2


@dataclass(frozen=True)
class AverageSample:
    """
    Coupled spatial averages of one experiment.
    :param values: F_R(t) per replicate, time and radius, shape (n, len(times), len(radii)).
    """
    times: Tuple[float, ...]
    radii: Tuple[float, ...]
    values: np.ndarray

    def __len__(self):
        return len(self.values)

    def column(self, t: float, R: float) -> np.ndarray:
        """ :returns the replicates of F_R(t). """
        return self.values[:, self.times.index(t), self.radii.index(R)]


def sample_averages(config, times: Sequence[float], radii: Sequence[float], n: int = None, listener=None,
                    label: str = "") -> AverageSample:
    """ Simulates F_R(t) on the configured model for all (t, R) from the same realizations. """
    times, radii = tuple(float(t) for t in times), tuple(float(R) for R in radii)
    values = simulate_averages(config.kernel, config.noise, config.solver, times, radii, n or config.replicates,
                               config.seed, config.workers, listener, label)
    return AverageSample(times, radii, values)


def _blocks(n: int, blocks: int) -> List[np.ndarray]:
    return [block for block in np.array_split(np.arange(n), min(blocks, n)) if len(block)]


def jackknife(samples: np.ndarray, statistic: Callable, blocks: int = JACKKNIFE_BLOCKS) -> Tuple[float, float]:
    """
    Delete-a-block jackknife over contiguous replicate blocks.
    :param statistic: maps a sample (along axis 0) to a number.
    :returns the statistic of the full sample and its standard error (NaN with fewer than two blocks).
    """
    samples = np.asarray(samples)
    estimate = float(statistic(samples))
    partition = _blocks(len(samples), blocks)
    if len(partition) < 2:
        return estimate, math.nan
    leave_out = np.array([statistic(np.delete(samples, block, axis=0)) for block in partition])
    count = len(partition)
    spread = math.fsum((leave_out - leave_out.mean()) ** 2)
    return estimate, math.sqrt((count - 1) / count * spread)


def jackknife_variance(samples: Sequence[float], blocks: int = JACKKNIFE_BLOCKS) -> Tuple[float, float]:
    """ :returns the unbiased variance and its jackknife standard error, both built from merged block moments. """
    samples = np.asarray(samples, dtype=float)
    moments = [RunningMoments.of(samples[block]) for block in _blocks(len(samples), blocks)]
    prefix = [RunningMoments()]
    for moment in moments:
        prefix.append(prefix[-1].merge(moment))
    suffix = [RunningMoments()]
    for moment in reversed(moments):
        suffix.append(moment.merge(suffix[-1]))
    suffix.reverse()
    estimate = float(prefix[-1].variance())
    count = len(moments)
    if count < 2:
        return estimate, math.nan
    leave_out = np.array([float(prefix[i].merge(suffix[i + 1]).variance()) for i in range(count)])
    spread = math.fsum((leave_out - leave_out.mean()) ** 2)
    return estimate, math.sqrt((count - 1) / count * spread)


class LogLogFit(NamedTuple):
    slope: float
    slope_se: float
    intercept: float


def fit_loglog(x: Sequence[float], y: Sequence[float], se: Sequence[float] = None) -> LogLogFit:
    """
    Fits log y = intercept + slope log x by (weighted) least squares.
    :param se: standard errors of y; the weights are y/se and the slope error is taken from them.
    :raises ConfigurationError: with fewer than two points.
    """
    x, y = np.asarray(x, dtype=float), np.asarray(y, dtype=float)
    if len(x) < 2:
        raise ConfigurationError("model/radii: a log-log slope needs at least two points, got {}".format(len(x)))
    if np.any(x <= 0) or np.any(y <= 0):
        raise DomainError("Log-log fit requires positive data, got x={}, y={}".format(list(x), list(y)))
    lx, ly = np.log(x), np.log(y)
    if se is None or len(x) == 2 or not np.all(np.asarray(se) > 0):
        slope, intercept = np.polyfit(lx, ly, 1)
        return LogLogFit(float(slope), math.nan, float(intercept))
    weights = y / np.asarray(se, dtype=float)
    (slope, intercept), covariance = np.polyfit(lx, ly, 1, w=weights, cov="unscaled")
    return LogLogFit(float(slope), float(math.sqrt(covariance[0, 0])), float(intercept))


def first_chaos_variance(kernel: KernelSpec, m2: float, t: float, R: float) -> float:
    """ :returns m_2 int_0^t ||phi_{t,R}(s, .) * k||^2 ds, the first chaos part of Var F_R(t). """
    window = lambda xi: 4.0 * R * R * np.sinc(R * xi / np.pi) ** 2 * cone_factor(t, xi)
    return m2 * spectral_integral(kernel, window, period=np.pi / R)


def limit_covariance_shape(t: float, s: float) -> float:
    """ :returns int_0^(t^s) (t-r)(s-r) dr. """
    m = max(0.0, min(t, s))
    return t * s * m - (t + s) * m * m / 2.0 + m ** 3 / 3.0


class CltDistances(NamedTuple):
    kolmogorov: float
    wasserstein: float
    floor: float
    n: int


def clt_distances(samples: Sequence[float], delta: float = DKW_DELTA) -> CltDistances:
    """
    :returns the Kolmogorov and 1-Wasserstein distances of standardized samples to N(0,1) and the DKW noise floor
    sqrt(ln(2/delta)/(2n)).
    """
    samples = np.sort(np.asarray(samples, dtype=float))
    n = len(samples)
    if n == 0:
        raise ConfigurationError("experiment/replicates: no samples to compare")
    kolmogorov = float(stats.kstest(samples, "norm").statistic)
    quantiles = stats.norm.ppf((np.arange(1, n + 1) - 0.5) / n)
    wasserstein = math.fsum(np.abs(samples - quantiles)) / n
    return CltDistances(kolmogorov, wasserstein, math.sqrt(math.log(2.0 / delta) / (2.0 * n)), n)


_Exponents = namedtuple("_Exponents", ["q", "q1", "q2", "q_prime", "q3", "q4", "q5", "r1", "s1", "a", "b", "r7",
                                       "s7"])


@dataclass(frozen=True)
class RatePlan:
    """
    Target decay exponents a_1..a_7 of the QCLT bound terms gamma_1..gamma_7 and the Hoelder/HLS exponents used to
    evaluate them.
    """
    beta: float
    alpha: float
    p: float
    targets: Tuple[float, ...]
    exponents: _Exponents

    @classmethod
    def build(cls, kernel: KernelSpec, p: float, r1: float = None, holder_a: float = None,
              inv_r7: float = None) -> 'RatePlan':
        """
        :param r1: the free exponent r of gamma_1 inside (1, 2p/(2+alpha p)); defaults to the midpoint.
        :param holder_a: the Hoelder exponent a of gamma_6, a > 1/(p-1); defaults to 2/(p-1).
        :param inv_r7: 1/r of gamma_7 inside (alpha, min(1, p+alpha/2-1)); defaults to the midpoint.
        :raises ConfigurationError: when a parameter leaves its window.
        """
        alpha = kernel.beta() - 1.0
        diagnostics = []
        if not 1 < p <= 2:
            raise ConfigurationError("model/p: rate audit requires p in (1, 2], got {}".format(p))
        if kernel.is_riesz() and not p > 2.0 / (2.0 - alpha):
            raise ConfigurationError("model/p: Riesz kernels require p > 2/(2-alpha) = {:.4f}, got {}".format(
                2.0 / (2.0 - alpha), p))
        r1_hi = 2.0 * p / (2.0 + alpha * p)
        r1 = (1.0 + r1_hi) / 2.0 if r1 is None else r1
        if not 1 < r1 < r1_hi:
            diagnostics.append("options/r1: must lie in (1, {:.4f}), got {}".format(r1_hi, r1))
        a = 2.0 / (p - 1.0) if holder_a is None else holder_a
        if not a > max(1.0, 1.0 / (p - 1.0)):
            diagnostics.append("options/holder_a: must exceed {:.4f}, got {}".format(max(1.0, 1.0 / (p - 1.0)), a))
        r7_hi = min(1.0, p + alpha / 2.0 - 1.0)
        inv_r7 = (alpha + r7_hi) / 2.0 if inv_r7 is None else inv_r7
        if not alpha < inv_r7 < r7_hi:
            diagnostics.append("options/inv_r7: must lie in ({:.4f}, {:.4f}), got {}".format(alpha, r7_hi, inv_r7))
        if diagnostics:
            raise ConfigurationError(diagnostics[0], diagnostics)
        b = a / (a - 1.0)
        q = 2.0 * p - 1.0 if p <= 1.5 else 2.0
        exponents = _Exponents(
            q=q,
            q1=1.0 / (1.0 / p + alpha / 2.0),
            q2=1.0 / (1.0 / (2.0 * p) + alpha / 2.0),
            q_prime=1.0 / (1.0 / (q + 1.0) + alpha / 2.0),
            q3=1.0 / (1.0 / (a * p) + alpha / 2.0),
            q4=1.0 / (1.0 / (b * p) + alpha / 2.0),
            q5=1.0 / (1.0 / (2.0 * p - 1.0) + alpha / 2.0),
            r1=r1, s1=1.0 / (1.0 + alpha - 1.0 / r1), a=a, b=b, r7=1.0 / inv_r7, s7=1.0 / (1.0 + alpha - inv_r7))
        base = 1.0 - 1.0 / p
        if kernel.is_riesz():
            targets = (1.0 / r1 - 1.0 / p - alpha / 2.0, base, base, base, base, base - 1.0 / (a * p),
                       1.0 + alpha / (2.0 * p) - (1.0 + inv_r7) / p)
        else:
            targets = (base,) * 7
        return cls(kernel.beta(), alpha, p, targets, exponents)

    def is_power(self, i: int) -> bool:
        """ :returns whether the surrogate of gamma_i bounds its p-th power (all but gamma_3). """
        return i != 3


def _integrable_surrogates(kernel: KernelSpec, plan: RatePlan, t: float, R: float) -> List[float]:
    step = min(0.05, kernel.reach / 8.0)
    cells = int(math.ceil((R + 2.0 * t) / step))
    positions = step * np.arange(-cells, cells + 1)
    psi = convolve_kernel(SampledFunction(positions[0], step, np.asarray(phi_tR(2.0 * t, R, 0.0, positions)), 0.0),
                          kernel)
    p, q = plan.p, plan.exponents.q
    norm_p = psi.lp_norm(p) ** p
    norm_1 = psi.lp_norm(1.0)
    return [R ** -p * t * norm_p, R ** -p * t * norm_p, R ** (-(q + 1.0) / 2.0) * t * norm_1] + \
        [R ** -p * t * norm_1] * 4


def _riesz_surrogates(plan: RatePlan, t: float, R: float) -> List[float]:
    e, p = plan.exponents, plan.p
    scale = R ** (-plan.beta * p)
    phi = lambda time, q: phi_tR_lp_norm(time, R, 0.0, q)
    G = wave_kernel_lp_norm
    return [
        scale * (G(t, e.r1) * phi(t, e.s1)) ** p * phi(t, e.q1) ** p,
        scale * (G(2 * t, e.r1) * G(2 * t, e.s1)) ** p * phi(2 * t, e.q2) ** (2 * p),
        R ** (-plan.beta * (e.q + 1.0) / 2.0) * phi(t, e.q_prime) ** (e.q + 1.0),
        scale * phi(t, e.q2) ** (2 * p),
        scale * (2 * R) ** (2 * p / e.q2) * G(t, e.q2) ** (2 * p),
        scale * phi(t, e.q3) ** p * (2 * R) ** (p / e.q1 - 1.0 / e.b) * (2 * R * G(t, e.q4) ** (e.b * p)) ** (
            1.0 / e.b),
        scale * G(2 * t, e.s7) * phi(t, e.r7) * phi(2 * t, e.q5) ** (2 * p - 1),
    ]


def audit_gamma_rates(kernel: KernelSpec, spec: LevyMeasureSpec, p: float, radii: Sequence[float], t: float = 1.0,
                      plan: RatePlan = None) -> ExperimentReport:
    """
    Evaluates the bound integrals controlling gamma_1..gamma_7 on the given radii and compares their fitted log-log
    slopes (normalized by p for bounds on p-th powers) with -a_i.
    """
    plan = plan or RatePlan.build(kernel, p)
    if len(radii) < 2:
        raise ConfigurationError("model/radii: a log-log slope needs at least two points, got {}".format(len(radii)))
    report = ExperimentReport("gamma-audit", kernel.label(), spec.label())
    report.note("slopes of the bound surrogates of gamma_i, not of the exact gamma_i")
    table = []
    for R in radii:
        values = _riesz_surrogates(plan, t, R) if kernel.is_riesz() else _integrable_surrogates(kernel, plan, t, R)
        table.append(values)
        for i, value in enumerate(values, start=1):
            report.add("gamma{}_bound".format(i), value, p=p, R=R, t=t)
    table = np.array(table)
    statuses = []
    for i in range(1, 8):
        raw = fit_loglog(radii, table[:, i - 1]).slope
        normalized = raw / p if plan.is_power(i) else raw
        status = Status.PASS if normalized <= -plan.targets[i - 1] + AUDIT_SLACK else Status.FAIL
        statuses.append(status)
        report.add("gamma{}_slope".format(i), raw, p=p, t=t)
        report.add("gamma{}_normalized_slope".format(i), normalized, status=status, p=p, t=t)
        report.add("gamma{}_target".format(i), -plan.targets[i - 1], p=p, t=t)
    report.status = Status.worst(statuses)
    return report


def _relative_se(value: float, se: float) -> float:
    if value == 0:
        return 0.0 if se == 0 else math.inf
    return abs(se / value)


def assess_variance_scan(sample: AverageSample, t: float, beta: float, report: ExperimentReport,
                         first_chaos: Callable = None) -> ExperimentReport:
    """ Variances, their log-log slope against R and the verdict whether the slope matches beta. """
    variances, errors = [], []
    for R in sample.radii:
        variance, se = jackknife_variance(sample.column(t, R))
        variances.append(variance)
        errors.append(se)
        report.add("sigma2", variance, se, R=R, t=t)
        if first_chaos is not None:
            report.add("first_chaos_sigma2", first_chaos(t, R), R=R, t=t)
    if not all(variance > 0 for variance in variances):
        report.note("degenerate variances {}".format(variances))
        report.status = Status.INCONCLUSIVE
        return report
    fit = fit_loglog(sample.radii, variances, errors)
    noisy = fit.slope_se > SLOPE_TOLERANCE or any(
        _relative_se(v, se) > MAX_RELATIVE_SE for v, se in zip(variances, errors))
    if noisy:
        status = Status.INCONCLUSIVE
    elif abs(fit.slope - beta) <= max(SLOPE_TOLERANCE, 1.96 * fit.slope_se):
        status = Status.PASS
    else:
        status = Status.FAIL
    report.add("slope", fit.slope, fit.slope_se, status=status, t=t)
    report.add("beta", beta, t=t)
    report.status = status
    return report


def variance_scan(config, radii: Sequence[float] = None, t: float = None, n: int = None,
                  listener=None) -> ExperimentReport:
    """ Estimates sigma_R^2(t) = Var F_R(t) on geometric radii and checks sigma_R^2 ~ R^beta. """
    radii = radii or config.radii
    t = t or config.t
    sample = sample_averages(config, [t], radii, n, listener, "variance-scan")
    report = ExperimentReport("variance-scan", config.kernel.label(), config.noise.label(), config.toDict())
    first_chaos = lambda time, R: first_chaos_variance(config.kernel, config.noise.m2, time, R)
    return assess_variance_scan(sample, t, config.kernel.beta(), report, first_chaos)


def _covariance(samples: np.ndarray) -> float:
    centered = samples - samples.mean(axis=0)
    return float(np.sum(centered[:, 0] * centered[:, 1]) / (len(samples) - 1))


def covariance_estimates(sample: AverageSample, pairs: Sequence[Tuple[float, float]], R: float,
                         beta: float) -> Dict[Tuple[float, float], Tuple[float, float]]:
    """ :returns K_R(t, s) = Cov(F_R(t), F_R(s)) / R^beta with jackknife errors for every pair. """
    estimates = {}
    for t, s in pairs:
        paired = np.column_stack([sample.column(t, R), sample.column(s, R)])
        value, se = jackknife(paired, _covariance)
        estimates[(t, s)] = (value / R ** beta, se / R ** beta)
    return estimates


def fit_shape_constant(estimates: Dict[Tuple[float, float], Tuple[float, float]]) -> Tuple[float, float]:
    """ :returns the weighted least squares constant c of K(t, s) = c * shape(t, s) and its standard error. """
    shapes = {pair: limit_covariance_shape(*pair) for pair in estimates}
    used = [pair for pair in estimates if shapes[pair] > 0]
    if not used:
        raise DomainError("No pair with positive limit covariance shape")
    weights = np.array([1.0 / max(estimates[pair][1], 1e-300) ** 2 for pair in used])
    k = np.array([estimates[pair][0] for pair in used])
    shape = np.array([shapes[pair] for pair in used])
    normal = math.fsum(weights * shape ** 2)
    return math.fsum(weights * k * shape) / normal, 1.0 / math.sqrt(normal)


def assess_riesz_covariance(estimates, report: ExperimentReport, R: float) -> ExperimentReport:
    """ Fits one constant c_alpha to all pairs and requires every K(t, s) within 10% of c_alpha * shape(t, s). """
    constant, constant_se = fit_shape_constant(estimates)
    report.add("c_alpha", constant, constant_se, R=R)
    statuses = []
    for (t, s), (value, se) in estimates.items():
        shape = limit_covariance_shape(t, s)
        if shape == 0:
            status = Status.PASS if abs(value) <= 3.0 * se else Status.FAIL
        elif _relative_se(value, se) > MAX_RELATIVE_SE:
            status = Status.INCONCLUSIVE
        else:
            residual = abs(value - constant * shape) / abs(constant * shape)
            status = Status.PASS if residual <= COVARIANCE_TOLERANCE else Status.FAIL
            report.add("relative_residual", residual, R=R, t=t, s=s)
        statuses.append(status)
        report.add("K", value, se, status=status, R=R, t=t, s=s)
    if (1.0, 1.0) in estimates and (2.0, 2.0) in estimates and estimates[(1.0, 1.0)][0] > 0:
        ratio = estimates[(2.0, 2.0)][0] / estimates[(1.0, 1.0)][0]
        status = Status.PASS if abs(ratio / 8.0 - 1.0) <= RATIO_TOLERANCE else Status.FAIL
        statuses.append(status)
        report.add("K22_over_K11", ratio, status=status, R=R)
    report.status = Status.worst(statuses)
    return report


def assess_integrable_covariance(estimates, reference, report: ExperimentReport, R: float) -> ExperimentReport:
    """ Requires the Levy model K(t, s) to agree with the Gaussian model within three combined standard errors. """
    statuses = []
    for pair, (value, se) in estimates.items():
        expected, expected_se = reference[pair]
        combined = math.hypot(se, expected_se)
        status = Status.PASS if abs(value - expected) <= 3.0 * combined else Status.FAIL
        statuses.append(status)
        report.add("K", value, se, status=status, R=R, t=pair[0], s=pair[1])
        report.add("K_gaussian", expected, expected_se, R=R, t=pair[0], s=pair[1])
    report.status = Status.worst(statuses)
    return report


def covariance_limit(config, pairs: Sequence[Tuple[float, float]] = None, radii: Sequence[float] = None,
                     n: int = None, listener=None) -> ExperimentReport:
    """
    Estimates K_R(t, s) = Cov(F_R(t), F_R(s)) / R^beta on coupled samples; the verdict is taken at the largest
    radius.
    """
    pairs = [(float(t), float(s)) for t, s in (pairs or config.pairs)]
    radii = radii or config.radii
    times = sorted({time for pair in pairs for time in pair})
    beta = config.kernel.beta()
    sample = sample_averages(config, times, radii, n, listener, "covariance")
    report = ExperimentReport("covariance", config.kernel.label(), config.noise.label(), config.toDict())
    for R in radii[:-1]:
        for (t, s), (value, se) in covariance_estimates(sample, pairs, R, beta).items():
            report.add("K", value, se, R=R, t=t, s=s)
    R = radii[-1]
    estimates = covariance_estimates(sample, pairs, R, beta)
    if config.kernel.is_riesz():
        return assess_riesz_covariance(estimates, report, R)
    gaussian = simulate_gaussian_averages(config.kernel, config.noise.m2, config.solver.replace(scheme=GRID), times,
                                          [R], n or config.replicates, config.seed + 1, config.workers, listener,
                                          "covariance-gaussian")
    reference = covariance_estimates(AverageSample(tuple(times), (float(R),), gaussian), pairs, R, beta)
    return assess_integrable_covariance(estimates, reference, report, R)


def assess_qclt(sample: AverageSample, t: float, report: ExperimentReport,
                threshold: float = DK_THRESHOLD) -> ExperimentReport:
    """
    Kolmogorov and Wasserstein distances of F_R(t)/sigma_R per radius; PASS iff d_K is non-increasing within the
    DKW floor and the last d_K lies below the threshold.
    """
    distances, statuses = [], []
    for R in sample.radii:
        values = sample.column(t, R)
        scale = math.sqrt(math.fsum(values ** 2) / len(values))
        standardized = values / scale if scale > 0 else values
        distance = clt_distances(standardized)
        distances.append(distance)
        mean = float(np.mean(standardized))
        centered = Status.PASS if abs(mean) <= 3.0 / math.sqrt(len(values)) else Status.FAIL
        statuses.append(centered)
        report.add("d_K", distance.kolmogorov, R=R, t=t)
        report.add("d_W", distance.wasserstein, R=R, t=t)
        report.add("dkw_floor", distance.floor, R=R, t=t)
        report.add("standardized_mean", mean, 1.0 / math.sqrt(len(values)), status=centered, R=R, t=t)
        report.add("standardized_variance", float(np.var(standardized, ddof=1)), R=R, t=t)
    floor = distances[-1].floor
    if floor > threshold:
        report.note("DKW floor {:.4f} exceeds the threshold {}".format(floor, threshold))
        report.status = Status.INCONCLUSIVE
        return report
    monotone = all(later.kolmogorov <= earlier.kolmogorov + max(earlier.floor, later.floor)
                   for earlier, later in zip(distances, distances[1:]))
    final = Status.PASS if distances[-1].kolmogorov < threshold else Status.FAIL
    report.add("monotone", float(monotone), status=Status.PASS if monotone else Status.FAIL, t=t)
    report.add("final_d_K", distances[-1].kolmogorov, status=final, R=sample.radii[-1], t=t)
    statuses.extend([final, Status.PASS if monotone else Status.FAIL])
    report.status = Status.worst(statuses)
    return report


def qclt_experiment(config, radii: Sequence[float] = None, t: float = None, n: int = None,
                    listener=None) -> ExperimentReport:
    """ Empirical distances of the standardized spatial averages to the standard normal law. """
    radii = radii or config.radii
    t = t or config.t
    sample = sample_averages(config, [t], radii, n, listener, "qclt")
    report = ExperimentReport("qclt", config.kernel.label(), config.noise.label(), config.toDict())
    if config.kernel.is_riesz():
        report.note("the Riesz rate is asymptotic; only the decay of the distances is assessed")
    return assess_qclt(sample, t, report, config.option("threshold", DK_THRESHOLD, float))


def assess_ergodic(sample: AverageSample, t: float, beta: float, report: ExperimentReport) -> ExperimentReport:
    """ E|F_R/R|^2 per radius; PASS iff strictly decreasing with slope beta - 2 within 0.2. """
    values, errors = [], []
    for R in sample.radii:
        scaled = (sample.column(t, R) / R) ** 2
        value, se = jackknife(scaled, np.mean)
        values.append(value)
        errors.append(se)
        report.add("mean_square_average", value, se, R=R, t=t)
    report.add("final_value", values[-1], errors[-1], R=sample.radii[-1], t=t)
    if not any(values):
        report.note("all spatial averages vanish")
        report.status = Status.PASS
        return report
    if not all(value > 0 for value in values):
        report.status = Status.FAIL
        return report
    decreasing = all(later < earlier for earlier, later in zip(values, values[1:]))
    fit = fit_loglog(sample.radii, values, errors)
    within = abs(fit.slope - (beta - 2.0)) <= ERGODIC_SLOPE_TOLERANCE
    if decreasing and within:
        status = Status.PASS
    elif fit.slope_se > ERGODIC_SLOPE_TOLERANCE:
        status = Status.INCONCLUSIVE
    else:
        status = Status.FAIL
    report.add("slope", fit.slope, fit.slope_se, status=status, t=t)
    report.add("target_slope", beta - 2.0, t=t)
    report.status = status
    return report


def ergodic_check(config, radii: Sequence[float] = None, t: float = None, n: int = None,
                  listener=None) -> ExperimentReport:
    radii = radii or config.radii
    t = t or config.t
    sample = sample_averages(config, [t], radii, n, listener, "ergodic")
    report = ExperimentReport("ergodic", config.kernel.label(), config.noise.label(), config.toDict())
    return assess_ergodic(sample, t, config.kernel.beta(), report)


def _increment_moment(sample: AverageSample, R: float, later: float, earlier: float) -> np.ndarray:
    return (sample.column(later, R) - sample.column(earlier, R)) ** 2


def doubling_ratio(sample: AverageSample, R: float, base: float, single: float,
                   double: float) -> Tuple[float, float]:
    """
    :returns E|F_R(double) - F_R(base)|^2 / E|F_R(single) - F_R(base)|^2 and its jackknife standard error, or NaN
    when the shorter increment vanishes.
    """
    paired = np.column_stack([_increment_moment(sample, R, single, base), _increment_moment(sample, R, double, base)])
    if not np.mean(paired[:, 0]) > 0:
        return math.nan, math.nan
    return jackknife(paired, lambda columns: np.mean(columns[:, 1]) / np.mean(columns[:, 0]))


def shape_doubling_ratio(base: float, single: float, double: float) -> float:
    """ :returns the doubling ratio of a process whose covariance is proportional to limit_covariance_shape. """
    increment = lambda t, s: limit_covariance_shape(t, t) - 2.0 * limit_covariance_shape(t, s) + \
        limit_covariance_shape(s, s)
    return increment(double, base) / increment(single, base)


def assess_fclt(sample: AverageSample, R: float, beta: float, riesz: bool, p_prime: float,
                report: ExperimentReport, reference: AverageSample = None) -> ExperimentReport:
    """
    Finite-dimensional covariances of R^(-beta/2) F_R(.) on the time grid, the normalized increment moments
    E|F_R(t) - F_R(s)|^p' / (R^(beta p'/2) (t-s)^p') and, on an evenly spaced grid, the growth of the second
    increment moment when t - s doubles.
    The limit is c_alpha * limit_covariance_shape for Riesz kernels and the Gaussian comparison model otherwise.
    :param reference: averages of the Gaussian comparison model on the same grid and radius (integrable kernels).
    :raises DomainError: for integrable kernels without a reference sample.
    """
    if not riesz and reference is None:
        raise DomainError("Integrable kernels need the Gaussian comparison averages as reference")
    grid = sample.times
    pairs = [(t, s) for i, t in enumerate(grid) for s in grid[:i + 1]]
    estimates = covariance_estimates(sample, pairs, R, beta)
    statuses = []
    if riesz:
        constant, constant_se = fit_shape_constant(estimates)
        report.add("c_alpha", constant, constant_se, R=R)
        for (t, s), (value, se) in estimates.items():
            expected = constant * limit_covariance_shape(t, s)
            status = Status.PASS if abs(value - expected) <= 3.0 * math.hypot(se, constant_se) else Status.FAIL
            statuses.append(status)
            report.add("K", value, se, status=status, R=R, t=t, s=s)
    else:
        expectations = covariance_estimates(reference, pairs, R, beta)
        for (t, s), (value, se) in estimates.items():
            expected, expected_se = expectations[(t, s)]
            status = Status.PASS if abs(value - expected) <= 3.0 * math.hypot(se, expected_se) else Status.FAIL
            statuses.append(status)
            report.add("K", value, se, status=status, R=R, t=t, s=s)
            report.add("K_gaussian", expected, expected_se, R=R, t=t, s=s)
        diagonal = [estimates[(t, t)] for t in grid]
        for (earlier, earlier_se), (later, later_se) in zip(diagonal, diagonal[1:]):
            statuses.append(Status.PASS if later >= earlier - 3.0 * math.hypot(earlier_se, later_se)
                            else Status.FAIL)
    ratios = []
    for i, t in enumerate(grid):
        for s in grid[:i]:
            increments = np.abs(sample.column(t, R) - sample.column(s, R)) ** p_prime
            value = float(np.mean(increments)) / (R ** (beta * p_prime / 2.0) * (t - s) ** p_prime)
            ratios.append(value)
            report.add("increment_ratio", value, p=p_prime, R=R, t=t, s=s)
    if ratios:
        bound = max(ratios) / float(np.median(ratios)) if np.median(ratios) > 0 else math.inf
        status = Status.PASS if bound <= BOUNDED_RATIO else Status.FAIL
        statuses.append(status)
        report.add("increment_max_over_median", bound, status=status, p=p_prime, R=R)
    if len(grid) >= 3 and math.isclose(grid[2] - grid[0], 2.0 * (grid[1] - grid[0])):
        statuses.append(_assess_doubling(sample, reference, R, grid[0], grid[1], grid[2], riesz, report))
    report.status = Status.worst(statuses)
    return report


def _assess_doubling(sample: AverageSample, reference: AverageSample, R: float, base: float, single: float,
                     double: float, riesz: bool, report: ExperimentReport) -> str:
    ratio, ratio_se = doubling_ratio(sample, R, base, single, double)
    if riesz:
        target, target_se = shape_doubling_ratio(base, single, double), 0.0
    else:
        target, target_se = doubling_ratio(reference, R, base, single, double)
    if math.isnan(ratio) or math.isnan(target):
        report.note("vanishing increments at R={}, the doubling ratio is not assessed".format(R))
        return Status.INCONCLUSIVE
    if math.isnan(ratio_se) or math.isnan(target_se):
        status = Status.INCONCLUSIVE
    elif abs(ratio - target) <= 3.0 * math.hypot(ratio_se, target_se) or math.isclose(ratio, target, rel_tol=1e-9):
        status = Status.PASS
    else:
        status = Status.FAIL
    report.add("doubling_ratio", ratio, ratio_se, status=status, R=R, t=double, s=base)
    report.add("doubling_target", target, target_se, R=R, t=double, s=base)
    return status


def fclt_experiment(config, R: float = None, time_grid: Sequence[float] = None, n: int = None,
                    p_prime: float = None, listener=None) -> ExperimentReport:
    """
    Path statistics of t -> F_R(t) on a time grid, all from the same realizations. Integrable kernels are compared
    with the Gaussian comparison model simulated on the grid scheme.
    """
    R = R or config.radii[-1]
    time_grid = time_grid or config.time_grid
    p_prime = p_prime or config.p_prime
    sample = sample_averages(config, time_grid, [R], n, listener, "fclt")
    report = ExperimentReport("fclt", config.kernel.label(), config.noise.label(), config.toDict())
    reference = None
    if not config.kernel.is_riesz():
        gaussian = simulate_gaussian_averages(config.kernel, config.noise.m2, config.solver.replace(scheme=GRID),
                                              sample.times, sample.radii, n or config.replicates, config.seed + 1,
                                              config.workers, listener, "fclt-gaussian")
        reference = AverageSample(sample.times, sample.radii, gaussian)
    return assess_fclt(sample, float(R), config.kernel.beta(), config.kernel.is_riesz(), p_prime, report, reference)


def second_moment_identity(config, t: float = None, x: float = 0.0, n: int = None, n_max: int = 3,
                           listener=None) -> ExperimentReport:
    """
    Compares E|u(t,x)|^2 of the Levy model, of the Gaussian comparison model with the same m_2 and of the truncated
    chaos expansion. The two Monte-Carlo estimates agree within three combined standard errors; each agrees with the
    expansion within three standard errors plus the tail bound.
    """
    t = t or config.t
    n = n or config.replicates
    kernel, noise = config.kernel, config.noise
    window = min(config.solver.L, abs(x) + t + kernel.reach + 1.0)
    solver = config.solver.replace(L=window, T=max(t, config.solver.T))
    levy = simulate_values(kernel, noise, solver, t, x, n, config.seed, config.workers, listener,
                           "second-moment levy") ** 2
    gaussian = simulate_gaussian_values(kernel, noise.m2, solver.replace(scheme=GRID), t, x, n, config.seed + 1,
                                        config.workers, listener, "second-moment gaussian") ** 2
    expansion = truncated_second_moment(kernel, noise, t, x, n_max)
    levy_mean, levy_se = jackknife(levy, np.mean)
    gaussian_mean, gaussian_se = jackknife(gaussian, np.mean)
    report = ExperimentReport("second-moment", kernel.label(), noise.label(), config.toDict())
    combined = math.hypot(levy_se, gaussian_se)
    statuses = [
        Status.PASS if abs(levy_mean - gaussian_mean) <= 3.0 * combined else Status.FAIL,
        Status.PASS if abs(levy_mean - expansion.value) <= 3.0 * levy_se + expansion.remainder else Status.FAIL,
        Status.PASS if abs(gaussian_mean - expansion.value) <= 3.0 * gaussian_se + expansion.remainder
        else Status.FAIL
    ]
    report.add("second_moment_levy", levy_mean, levy_se, status=statuses[0], t=t)
    report.add("second_moment_gaussian", gaussian_mean, gaussian_se, status=statuses[2], t=t)
    report.add("truncated_second_moment", expansion.value, status=statuses[1], t=t)
    report.add("truncation_remainder", expansion.remainder, t=t)
    for order, term in enumerate(expansion.terms, start=1):
        report.add("chaos_term_{}".format(order), term, t=t)
    report.status = Status.worst(statuses)
    return report
