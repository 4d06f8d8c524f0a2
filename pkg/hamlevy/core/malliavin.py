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
Add-one-point and add-two-point difference operators of the solution, the coupled representation check and the
Monte-Carlo verification of the derivative estimates and of the Poincare inequality.
"""

import functools
import logging
import math
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence, Tuple

import numpy as np
from scipy import stats

from hamlevy.core.chaos_combinatorics import ChaosKernelEval
from hamlevy.core.exception import DomainError, UnsupportedConfigurationError
from hamlevy.core.kernels import KernelSpec
from hamlevy.core.levy_noise import AtomCloud, LevyMeasureSpec, sample_atoms
from hamlevy.core.parallel import map_replicates
from hamlevy.core.report import ExperimentReport, Status
from hamlevy.core.solver import (EVENT_DRIVEN, SolutionField, SolverConfig, solve_u, solve_v_delta,
                                 spatial_average)
from hamlevy.core.stats import BOUNDED_RATIO, MAX_RELATIVE_SE, jackknife, jackknife_variance

logger = logging.getLogger(__name__)

Atom = Tuple[float, float, float]
Probe = Tuple[float, float]

NEGLIGIBLE_BOUND = 1e-3
REPRESENTATION_TOLERANCE = 1e-3
TREND_LEVEL = 0.95


@dataclass(frozen=True)
class DerivativeSample:
    """ One realization of D_xi u(t, x) (one added atom) or D^2_{xi_1, xi_2} u(t, x) (two added atoms). """
    probe: Probe
    atoms: Tuple[Atom, ...]
    value: float

    @property
    def order(self) -> int:
        return len(self.atoms)


def _check_window(cloud: AtomCloud, atoms: Sequence[Atom]):
    for r, y, z in atoms:
        if not (0 < r <= cloud.T and abs(y) <= cloud.L):
            raise DomainError("Atom ({}, {}, {}) lies outside the window (0, {}] x [-{}, {}]".format(
                r, y, z, cloud.T, cloud.L, cloud.L))
        if z == 0:
            raise DomainError("Added atoms must carry a non-zero jump")


def difference_D(cloud: AtomCloud, kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, extra: Atom,
                 probe: Probe, field: SolutionField = None) -> float:
    """
    :returns D_{r,y,z} u(t,x) = u(t,x; cloud + (r,y,z)) - u(t,x; cloud).
    :param field: the solution on the cloud when already available.
    :raises DomainError: when the added atom leaves the window.
    """
    _check_window(cloud, [extra])
    t, x = probe
    if extra[0] > t:
        return 0.0
    field = field or solve_u(cloud, kernel, spec, cfg)
    return field.extended([extra]).value(t, x) - field.value(t, x)


def difference_D2(cloud: AtomCloud, kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, first: Atom,
                  second: Atom, probe: Probe, field: SolutionField = None) -> float:
    """
    :returns D^2 u(t,x) = u(cloud + both) - u(cloud + first) - u(cloud + second) + u(cloud), grouped so that
    swapping the atoms gives the identical value.
    """
    if tuple(first) == tuple(second):
        raise DomainError("Second differences need two distinct atoms, got {} twice".format(first))
    _check_window(cloud, [first, second])
    t, x = probe
    if first[0] > t or second[0] > t:
        return 0.0
    field = field or solve_u(cloud, kernel, spec, cfg)
    both = field.extended([first, second]).value(t, x)
    ones = field.extended([first]).value(t, x) + field.extended([second]).value(t, x)
    return (both + field.value(t, x)) - ones


def derivative_sample(cloud: AtomCloud, kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig,
                      atoms: Sequence[Atom], probe: Probe, field: SolutionField = None) -> DerivativeSample:
    """ :returns D u(t,x) for one added atom or D^2 u(t,x) for two, together with the atoms and the probe. """
    atoms = tuple(tuple(float(value) for value in atom) for atom in atoms)
    if len(atoms) == 1:
        value = difference_D(cloud, kernel, spec, cfg, atoms[0], probe, field)
    elif len(atoms) == 2:
        value = difference_D2(cloud, kernel, spec, cfg, atoms[0], atoms[1], probe, field)
    else:
        raise DomainError("Differences take one or two added atoms, got {}".format(len(atoms)))
    return DerivativeSample((float(probe[0]), float(probe[1])), atoms, value)


class Representation(NamedTuple):
    difference: float
    integral: float


def representation_check(cloud: AtomCloud, kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig,
                         extra: Atom, probe: Probe) -> Representation:
    """
    Couples solve_u and solve_v_delta on one realization: D_{r,y,z} u(t,x) against
    int u(r,y') v^{(r,y',z)}(t,x) k(y-y') dy' evaluated on the quadrature cells of the added atom.
    """
    if kernel.is_riesz():
        raise UnsupportedConfigurationError("The representation check needs a compactly supported kernel")
    if cfg.scheme != EVENT_DRIVEN:
        raise UnsupportedConfigurationError("The representation check runs on the event-driven scheme")
    r, y, z = extra
    t, x = probe
    field = solve_u(cloud, kernel, spec, cfg)
    difference = difference_D(cloud, kernel, spec, cfg, extra, probe, field)
    step = cfg.step_for(kernel)
    cells = int(math.ceil(2.0 * kernel.reach / step))
    edges = y + np.linspace(-kernel.reach, kernel.reach, cells + 1)
    centers = (edges[:-1] + edges[1:]) / 2.0
    masses = kernel.cell_masses(y - edges[::-1])[::-1]
    terms = []
    if r < t:
        before = field.value(r, centers)
        for center, weight, mass in zip(centers, before, masses):
            if mass == 0 or weight == 0:
                continue
            v = solve_v_delta(cloud, kernel, r, center, z, cfg, spec)
            terms.append(weight * v.value(t, x) * mass)
    integral = math.fsum(terms)
    logger.debug("D = {:.6e}, representation = {:.6e}".format(difference, integral))
    return Representation(difference, integral)


def key_grid_D(kernel: KernelSpec, t: float, x: float = 0.0, z: float = 1.0, points: int = 5) -> List[Atom]:
    """ :returns a points x points grid of atoms (r, y, z) inside the reach-extended cone of (t, x). """
    grid = []
    for r in t * np.linspace(0.1, 0.9, points):
        width = (t - r) + min(kernel.reach, 1.0)
        grid.extend((float(r), float(x + fraction * width), z) for fraction in np.linspace(-0.8, 0.8, points))
    return grid


def key_grid_D2(kernel: KernelSpec, t: float, x: float = 0.0, z: float = 1.0,
                points: int = 3) -> List[Tuple[Atom, Atom]]:
    """ :returns pairs of atoms on a 3 x 3 x 3 grid of (r_1, y_1, y_2) with r_2 fixed. """
    r2 = 0.6 * t
    pairs = []
    for r1 in t * np.array([0.2, 0.35, 0.8])[:points]:
        width = (t - min(r1, r2)) + min(kernel.reach, 1.0)
        offsets = np.linspace(-0.5, 0.5, points) * width
        for y1 in offsets:
            for y2 in offsets + 0.1 * width:
                pairs.append(((float(r1), float(x + y1), z), (float(r2), float(x + y2), z)))
    return pairs


def key_bound_D(kernel: KernelSpec, probe: Probe, atom: Atom) -> float:
    """ :returns |z| (G_{t-r}(x - .) * k)(y), the shape of the bound on ||D_{r,y,z} u(t,x)||_p. """
    t, x = probe
    r, y, z = atom
    return abs(ChaosKernelEval(kernel, t, x).f_star([r], [y], [z]))


def key_bound_D2(kernel: KernelSpec, probe: Probe, first: Atom, second: Atom) -> float:
    """ :returns |z_1 z_2| times the k-smoothed symmetrized second chaos kernel at the two atoms. """
    t, x = probe
    ordered = sorted([first, second])
    times = [atom[0] for atom in ordered]
    if times[0] == times[1]:
        return 0.0
    value = ChaosKernelEval(kernel, t, x).f_star(times, [atom[1] for atom in ordered], [atom[2] for atom in ordered])
    return abs(value) / 2.0


def _key_D_task(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, probe: Probe, atoms, index: int,
                rng: np.random.Generator):
    cloud = sample_atoms(spec, cfg.T, cfg.L, rng, cfg.max_atoms)
    field = solve_u(cloud, kernel, spec, cfg)
    return [difference_D(cloud, kernel, spec, cfg, atom, probe, field) for atom in atoms]


def _key_D2_task(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, probe: Probe, pairs, index: int,
                 rng: np.random.Generator):
    cloud = sample_atoms(spec, cfg.T, cfg.L, rng, cfg.max_atoms)
    field = solve_u(cloud, kernel, spec, cfg)
    return [difference_D2(cloud, kernel, spec, cfg, first, second, probe, field) for first, second in pairs]


def outside_cone_atoms(kernel: KernelSpec, probe: Probe, L: float, z: float = 1.0, margin: float = 1.0,
                       fractions: Sequence[float] = (0.2, 0.5, 0.8)) -> List[Atom]:
    """
    :returns atoms (r, y, z) beyond the reach-extended cone |y - x| <= (t - r) + reach of the probe, on both sides,
    restricted to the window [-L, L].
    """
    t, x = probe
    atoms = []
    for r in t * np.asarray(fractions):
        for side in (-1.0, 1.0):
            for extra in (margin, 2.0 * margin + kernel.reach):
                y = x + side * ((t - r) + kernel.reach + extra)
                if abs(y) <= L:
                    atoms.append((float(r), float(y), z))
    return atoms


def _exact_zero_task(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, probe: Probe, atoms, inside,
                     index: int, rng: np.random.Generator):
    cloud = sample_atoms(spec, cfg.T, cfg.L, rng, cfg.max_atoms)
    field = solve_u(cloud, kernel, spec, cfg)
    first = [derivative_sample(cloud, kernel, spec, cfg, [atom], probe, field) for atom in atoms]
    second = [derivative_sample(cloud, kernel, spec, cfg, [atom, inside], probe, field) for atom in atoms
              if tuple(atom) != tuple(inside)]
    for sample in first + second:
        if sample.value != 0.0:
            logger.debug("Replicate {}: non-zero difference outside the cone {}".format(index, sample))
    first, second = [abs(sample.value) for sample in first], [abs(sample.value) for sample in second]
    return [sum(1 for value in first if value != 0.0), max(first, default=0.0),
            sum(1 for value in second if value != 0.0), max(second, default=0.0)]


def exact_zero_check(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, n: int, seed: int = 0,
                     workers: int = 1, listener=None, point: Probe = None, margin: float = 1.0) -> ExperimentReport:
    """
    Checks on every realization that D u(t,x) and D^2 u(t,x) are exactly 0.0 when an added atom lies outside the
    reach-extended cone of (t, x). The second atom of D^2 sits inside the cone.
    """
    point = point or (cfg.T, 0.0)
    atoms = outside_cone_atoms(kernel, point, cfg.L, margin=margin)
    report = ExperimentReport("malliavin-verify", kernel.label(), spec.label())
    if not atoms:
        report.note("the window leaves no room outside the cone")
        report.status = Status.INCONCLUSIVE
        return report
    inside = (point[0] / 2.0, point[1], 1.0)
    task = functools.partial(_exact_zero_task, kernel, spec, cfg, point, tuple(atoms), inside)
    counts = map_replicates(task, n, seed, workers, listener, "malliavin-verify exact-zero")
    nonzero_D, nonzero_D2 = int(counts[:, 0].sum()), int(counts[:, 2].sum())
    report.add("nonzero_D_outside_cone", nonzero_D, status=Status.PASS if nonzero_D == 0 else Status.FAIL,
               t=point[0])
    report.add("max_abs_D_outside_cone", float(counts[:, 1].max()), t=point[0])
    report.add("nonzero_D2_outside_cone", nonzero_D2, status=Status.PASS if nonzero_D2 == 0 else Status.FAIL,
               t=point[0])
    report.add("max_abs_D2_outside_cone", float(counts[:, 3].max()), t=point[0])
    report.note("{} atoms outside the cone, {} realizations".format(len(atoms), n))
    report.status = Status.PASS if nonzero_D == 0 and nonzero_D2 == 0 else Status.FAIL
    return report


class TrendFit(NamedTuple):
    """ Least squares slope of the ratio against |y - x| for the added atoms of one time r. """
    r: float
    slope: float
    slope_se: float
    lower: float
    upper: float
    points: int

    def contains_zero(self) -> bool:
        return self.lower <= 0.0 <= self.upper


def ratio_trends(ratios: Sequence[float], groups: Sequence[Tuple[float, float]],
                 level: float = TREND_LEVEL) -> List[TrendFit]:
    """
    Regresses the ratio on the distance |y - x| to the cone axis separately for every time r of the added atoms.
    Times with fewer than three distinct distances are skipped; the confidence level is Bonferroni adjusted over
    the remaining times.
    :param ratios: the ratio per grid point, None for points left out.
    :param groups: (r, |y - x|) per grid point.
    """
    rows = {}
    for ratio, (r, distance) in zip(ratios, groups):
        if ratio is not None:
            rows.setdefault(float(r), []).append((float(distance), float(ratio)))
    usable = {r: points for r, points in rows.items() if len({distance for distance, _ in points}) >= 3}
    fits = []
    for r, points in sorted(usable.items()):
        distances, values = np.array(points).T
        fit = stats.linregress(distances, values)
        quantile = stats.t.ppf(1.0 - (1.0 - level) / (2.0 * len(usable)), len(points) - 2)
        # rounding allowance for exactly flat rows
        half = quantile * fit.stderr + 1e-12 * float(np.max(np.abs(values)))
        fits.append(TrendFit(r, float(fit.slope), float(fit.stderr), float(fit.slope - half),
                             float(fit.slope + half), len(points)))
    return fits


def assess_key_ratios(samples: np.ndarray, bounds: Sequence[float], p: float, labels: Sequence[str],
                      report: ExperimentReport, t: float,
                      groups: Sequence[Tuple[float, float]] = None) -> ExperimentReport:
    """
    Estimates ||D||_p per grid point and its ratio to the bound shape; points whose bound is below 1e-3 of the
    largest are excluded. PASS iff the largest ratio is at most five times the median and, when groups are
    given, no time r shows a trend of the ratio in |y - x| (every slope confidence interval contains 0).
    :param groups: (r, |y - x|) per grid point.
    """
    bounds = np.asarray(bounds, dtype=float)
    keep = bounds >= NEGLIGIBLE_BOUND * bounds.max() if bounds.max() > 0 else np.zeros(len(bounds), dtype=bool)
    ratios, kept, noisy = [], [], False
    for j, label in enumerate(labels):
        moment, se = jackknife(np.abs(samples[:, j]) ** p, np.mean)
        norm = moment ** (1.0 / p)
        ratio = norm / bounds[j] if keep[j] else 0.0
        if keep[j]:
            ratios.append(ratio)
            noisy = noisy or (moment > 0 and se / moment > MAX_RELATIVE_SE)
        kept.append(ratio if keep[j] else None)
        report.add("norm_D[{}]".format(label), norm, p=p, t=t)
        report.add("ratio[{}]".format(label), ratio, p=p, t=t)
    if not ratios:
        report.note("no grid point with a non-negligible bound")
        report.status = Status.INCONCLUSIVE
        return report
    median = float(np.median(ratios))
    spread = max(ratios) / median if median > 0 else math.inf
    report.add("fitted_constant", max(ratios), p=p, t=t)
    statuses = [Status.PASS if spread <= BOUNDED_RATIO else Status.FAIL]
    report.add("max_over_median", spread, status=statuses[0], p=p, t=t)
    if groups is not None:
        trends = ratio_trends(kept, groups)
        if not trends:
            report.note("no time r with three distinct distances; the trend in y is not assessed")
        for trend in trends:
            status = Status.PASS if trend.contains_zero() else Status.FAIL
            statuses.append(status)
            report.add("trend_slope[r={:.3g}]".format(trend.r), trend.slope, trend.slope_se, status=status, p=p,
                       t=t)
    report.status = Status.INCONCLUSIVE if noisy else Status.worst(statuses)
    return report


def verify_key_D(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, p: float, probes: Sequence[Atom],
                 n: int, seed: int = 0, workers: int = 1, listener=None, point: Probe = None) -> ExperimentReport:
    """
    Monte-Carlo estimate of ||D_{r,y,z} u(t,x)||_p over a grid of added atoms and of its ratio to
    |z| (G_{t-r}(x - .) * k)(y), together with the trend of that ratio in |y - x| for every time r.
    :param probes: the added atoms (r, y, z).
    :param point: the base point (t, x); defaults to (T, 0).
    """
    point = point or (cfg.T, 0.0)
    task = functools.partial(_key_D_task, kernel, spec, cfg, point, tuple(probes))
    samples = map_replicates(task, n, seed, workers, listener, "malliavin-verify D")
    bounds = [key_bound_D(kernel, point, atom) for atom in probes]
    labels = ["r={:.3g},y={:.3g}".format(r, y) for r, y, _ in probes]
    groups = [(r, abs(y - point[1])) for r, y, _ in probes]
    report = ExperimentReport("malliavin-verify", kernel.label(), spec.label())
    return assess_key_ratios(samples, bounds, p, labels, report, point[0], groups)


def verify_key_D2(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, p: float,
                  probes: Sequence[Tuple[Atom, Atom]], n: int, seed: int = 0, workers: int = 1, listener=None,
                  point: Probe = None) -> ExperimentReport:
    """ The second-order counterpart of verify_key_D on pairs of added atoms. """
    point = point or (cfg.T, 0.0)
    task = functools.partial(_key_D2_task, kernel, spec, cfg, point, tuple(probes))
    samples = map_replicates(task, n, seed, workers, listener, "malliavin-verify D2")
    bounds = [key_bound_D2(kernel, point, first, second) for first, second in probes]
    labels = ["r1={:.3g},y1={:.3g},r2={:.3g},y2={:.3g}".format(first[0], first[1], second[0], second[1])
              for first, second in probes]
    report = ExperimentReport("malliavin-verify", kernel.label(), spec.label())
    return assess_key_ratios(samples, bounds, p, labels, report, point[0])


@dataclass(frozen=True)
class DifferenceGrid:
    """
    Product quadrature of (r, y, z)-space for ||DF||_H^2: Gauss-Legendre nodes in r, midpoint cells in y and the
    jump quadrature of nu in z.
    """
    times: np.ndarray
    time_weights: np.ndarray
    positions: np.ndarray
    step: float
    jumps: np.ndarray
    jump_weights: np.ndarray

    @classmethod
    def build(cls, spec: LevyMeasureSpec, t: float, lo: float, hi: float, nodes: int = 4,
              cells: int = 64) -> 'DifferenceGrid':
        gl_nodes, gl_weights = np.polynomial.legendre.leggauss(nodes)
        step = (hi - lo) / cells
        jumps, weights = spec.jump_quadrature()
        return cls(t / 2.0 * (gl_nodes + 1.0), t / 2.0 * gl_weights, lo + step * (np.arange(cells) + 0.5), step,
                   np.asarray(jumps, dtype=float), np.asarray(weights, dtype=float))

    @property
    def shape(self) -> Tuple[int, int, int]:
        return len(self.times), len(self.positions), len(self.jumps)

    def atoms(self):
        for r in self.times:
            for y in self.positions:
                for z in self.jumps:
                    yield float(r), float(y), float(z)

    def h_norm_sq(self, values: np.ndarray) -> float:
        """ :returns the quadrature of |values|^2 over (r, y, z); values has shape (times, positions, jumps). """
        values = np.asarray(values, dtype=float).reshape(self.shape)
        weights = self.time_weights[:, None, None] * self.step * self.jump_weights[None, None, :]
        return math.fsum((weights * values ** 2).ravel())


def _poincare_task(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, t: float, R: float,
                   grid: DifferenceGrid, index: int, rng: np.random.Generator):
    cloud = sample_atoms(spec, cfg.T, cfg.L, rng, cfg.max_atoms)
    field = solve_u(cloud, kernel, spec, cfg)
    average = spatial_average(field, t, R)
    differences = [spatial_average(field.extended([atom]), t, R) - average for atom in grid.atoms()]
    return [average] + differences


def poincare_samples(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, t: float, R: float,
                     grid: DifferenceGrid, n: int, seed: int = 0, workers: int = 1,
                     listener=None) -> Tuple[np.ndarray, np.ndarray]:
    """ :returns paired samples of F_R(t) and of its difference field on the grid, shapes (n,) and (n, atoms). """
    task = functools.partial(_poincare_task, kernel, spec, cfg, t, R, grid)
    samples = map_replicates(task, n, seed, workers, listener, "malliavin-verify poincare")
    return samples[:, 0], samples[:, 1:]


def poincare_grid(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, t: float, R: float,
                  nodes: int = 4, cells: int = 64) -> DifferenceGrid:
    """ :returns a grid covering the atoms able to move F_R(t): the window grown by the cone and two kernel reaches. """
    reach = R + t + 2.0 * kernel.reach
    return DifferenceGrid.build(spec, t, -min(reach, cfg.L), min(reach, cfg.L), nodes, cells)


def poincare_check(samples: np.ndarray, differences: np.ndarray, spec: LevyMeasureSpec,
                   grid: DifferenceGrid) -> ExperimentReport:
    """
    Compares Var(F) with E||DF||_H^2 from paired samples. PASS iff Var(F) <= E||DF||^2 + 3 combined standard
    errors; INCONCLUSIVE when the error of E||DF||^2 exceeds half its value.
    """
    variance, variance_se = jackknife_variance(samples)
    energies = np.array([grid.h_norm_sq(row) for row in np.asarray(differences)])
    energy, energy_se = jackknife(energies, np.mean)
    report = ExperimentReport("malliavin-verify", nu=spec.label())
    combined = math.hypot(0.0 if math.isnan(variance_se) else variance_se, 0.0 if math.isnan(energy_se) else energy_se)
    report.add("variance_F", variance, variance_se)
    report.add("energy_DF", energy, energy_se)
    if energy > 0 and energy_se > 0.5 * energy:
        status = Status.INCONCLUSIVE
    elif variance <= energy + 3.0 * combined:
        status = Status.PASS
    else:
        status = Status.FAIL
    report.add("gap", energy - variance, combined, status=status)
    report.status = status
    return report
