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
Multiple Poisson integrals, contractions and symmetrization on finite measure spaces, and deterministic
truncated chaos expansions of the second moment of u.
"""

import functools
import itertools
import logging
import math
import string
from dataclasses import dataclass
from typing import List, NamedTuple, Sequence

import numpy as np
from scipy.linalg import toeplitz

from hamlevy.core.exception import ChaosError, ConfigurationError, DomainError
from hamlevy.core.kernels import KernelSpec, spectral_integral, wave_kernel
from hamlevy.core.levy_noise import LevyMeasureSpec
from hamlevy.core.report import ExperimentReport, Status

logger = logging.getLogger(__name__)

MAX_CELLS = 8
MAX_RANK = 6


@dataclass(frozen=True)
class DiscreteSpace:
    """ A finite measure space of at most eight cells with positive masses. """
    masses: np.ndarray

    def __post_init__(self):
        masses = np.array(self.masses, dtype=float)
        if masses.ndim != 1 or not 0 < len(masses) <= MAX_CELLS:
            raise ChaosError("Expected between 1 and {} cells, got {}".format(MAX_CELLS, masses.shape))
        if np.any(masses <= 0) or not np.all(np.isfinite(masses)):
            raise ChaosError("Cell masses must be positive and finite, got {}".format(list(masses)))
        masses.setflags(write=False)
        object.__setattr__(self, "masses", masses)

    @property
    def cells(self) -> int:
        return len(self.masses)

    def sample_counts(self, rng: np.random.Generator) -> np.ndarray:
        """ :returns Poisson counts per cell. """
        return rng.poisson(self.masses)

    def check(self, f: np.ndarray, n: int):
        f = np.asarray(f, dtype=float)
        if f.ndim != n or any(size != self.cells for size in f.shape):
            raise ChaosError("Expected a rank-{} tensor over {} cells, got shape {}".format(n, self.cells, f.shape))
        return f


def symmetrize(f: np.ndarray, n: int) -> np.ndarray:
    """ :returns the average of f over all n! permutations of its arguments. """
    f = np.asarray(f, dtype=float)
    if f.ndim != n:
        raise ChaosError("Expected a rank-{} tensor, got rank {}".format(n, f.ndim))
    if n <= 1:
        return f.copy()
    permutations = list(itertools.permutations(range(n)))
    return sum(np.transpose(f, permutation) for permutation in permutations) / len(permutations)


def skorohod_symmetrization(g: np.ndarray) -> np.ndarray:
    """
    Symmetrizes a rank-(n+1) tensor by first symmetrizing its leading n arguments and then averaging the n+1
    placements of the last argument.
    """
    g = np.asarray(g, dtype=float)
    n = g.ndim - 1
    if n < 0:
        raise ChaosError("Expected a tensor of rank at least 1")
    axes = list(range(n))
    permutations = list(itertools.permutations(axes))
    h = sum(np.transpose(g, list(permutation) + [n]) for permutation in permutations) / len(permutations)
    return sum(np.moveaxis(h, n, position) for position in range(n + 1)) / (n + 1)


def contraction(f: np.ndarray, g: np.ndarray, k: int, l: int, space: DiscreteSpace) -> np.ndarray:
    """
    Modified contraction f *_k^l g: the first l shared arguments are integrated against the cell masses, the next
    k-l shared arguments are identified and the remaining arguments stay free.
    :returns a tensor of rank n+m-k-l with arguments ordered (identified, free of f, free of g).
    """
    f, g = np.asarray(f, dtype=float), np.asarray(g, dtype=float)
    n, m = f.ndim, g.ndim
    if not 0 <= l <= k <= min(n, m):
        raise ChaosError("Contraction indices must satisfy 0 <= l <= k <= min(n, m), got k={}, l={}".format(k, l))
    space.check(f, n)
    space.check(g, m)
    letters = iter(string.ascii_letters)
    integrated = "".join(next(letters) for _ in range(l))
    identified = "".join(next(letters) for _ in range(k - l))
    free_f = "".join(next(letters) for _ in range(n - k))
    free_g = "".join(next(letters) for _ in range(m - k))
    operands = [f, g] + [space.masses] * l
    subscripts = [integrated + identified + free_f, integrated + identified + free_g] + list(integrated)
    return np.einsum("{}->{}".format(",".join(subscripts), identified + free_f + free_g), *operands)


    """ :returns how often each cell occurs in every rank-tuple of cells, shape (cells, cells^rank). """
def _multiplicities(cells: int, rank: int) -> np.ndarray:
    """ :returns for each cell the number of times it occurs in every rank-tuple of cells, shape (cells, cells^rank). """
    indices = np.indices((cells,) * rank).reshape(rank, -1)
    multiplicities = np.stack([(indices == cell).sum(axis=0) for cell in range(cells)])
    multiplicities.setflags(write=False)
    return multiplicities


def _factorial_measure(counts: np.ndarray, rank: int) -> np.ndarray:
    """ :returns the factorial counting measure N^(rank) of every rank-tuple of cells. """
    cells = len(counts)
    if rank == 0:
        return np.ones(())
    falling = np.ones((cells, rank + 1))
    for e in range(1, rank + 1):
        falling[:, e] = falling[:, e - 1] * (counts - e + 1)
    multiplicities = _multiplicities(cells, rank)
    weights = np.prod(falling[np.arange(cells)[:, None], multiplicities], axis=0)
    return weights.reshape((cells,) * rank)


def multiple_integral(counts: Sequence[int], space: DiscreteSpace, f: np.ndarray, off_diagonal: bool = False) -> float:
    """
    Multiple integral I_n(f) of a realized Poisson measure on a finite space, computed exactly through the
    factorial-measure expansion sum_J (-1)^(n-|J|) int f dN^(|J|) dm^(n-|J|).
    :param counts: the realized counts per cell.
    :param off_diagonal: integrate f masked to distinct arguments against the compensated measure instead.
    :raises ChaosError: on rank mismatch, or with off_diagonal when f lives on diagonals only.
    """
    f = np.asarray(f, dtype=float)
    n = f.ndim
    if n == 0:
        return float(f)
    space.check(f, n)
    counts = np.asarray(counts, dtype=float)
    if counts.shape != space.masses.shape:
        raise ChaosError("Expected {} counts, got {}".format(space.cells, counts.shape))
    if off_diagonal:
        distinct = (_multiplicities(space.cells, n).max(axis=0) <= 1).reshape(f.shape)
        masked = np.where(distinct, f, 0.0)
        if np.any(f) and not np.any(masked):
            raise ChaosError("Tensor is supported on diagonals only")
        result = masked
        for _ in range(n):
            result = np.tensordot(result, counts - space.masses, axes=([0], [0]))
        return float(result)
    total = []
    for size in range(n + 1):
        measure = _factorial_measure(counts, size)
        for subset in itertools.combinations(range(n), size):
            reduced = f
            for axis in sorted(set(range(n)) - set(subset), reverse=True):
                reduced = np.tensordot(reduced, space.masses, axes=([axis], [0]))
            total.append((-1) ** (n - size) * float(np.sum(reduced * measure)))
    return math.fsum(total)


def product_formula_check(f: np.ndarray, g: np.ndarray, n: int, m: int, draws: int, space: DiscreteSpace,
                          rng: np.random.Generator) -> ExperimentReport:
    """
    Compares I_n(f) I_m(g) with sum_k k! C(n,k) C(m,k) sum_l C(k,l) I_{n+m-k-l}(f *_k^l g) realization by
    realization, after symmetrizing f and g.
    """
    if n + m > MAX_RANK:
        raise ChaosError("Product formula is limited to n + m <= {}, got {}".format(MAX_RANK, n + m))
    f = symmetrize(space.check(f, n), n)
    g = symmetrize(space.check(g, m), m)
    terms = []
    for k in range(min(n, m) + 1):
        for l in range(k + 1):
            coefficient = math.factorial(k) * math.comb(n, k) * math.comb(m, k) * math.comb(k, l)
            terms.append((coefficient, contraction(f, g, k, l, space)))
    discrepancy, scale = 0.0, 0.0
    for _ in range(draws):
        counts = space.sample_counts(rng)
        lhs = multiple_integral(counts, space, f) * multiple_integral(counts, space, g)
        rhs = math.fsum(coefficient * multiple_integral(counts, space, h) for coefficient, h in terms)
        discrepancy = max(discrepancy, abs(lhs - rhs))
        scale = max(scale, abs(lhs))
    report = ExperimentReport("product-formula")
    tolerance = 1e-9 * (1.0 + scale)
    report.status = Status.PASS if discrepancy <= tolerance else Status.FAIL
    report.add("max_abs_discrepancy", discrepancy, status=report.status)
    report.add("max_abs_lhs", scale)
    report.note("n={}, m={}, draws={}, cells={}".format(n, m, draws, space.cells))
    return report


def _cells_around(center: float, reach: float, cells: int):
    edges = center + np.linspace(-reach, reach, cells + 1)
    return (edges[:-1] + edges[1:]) / 2.0, edges


def _cone_matrix(d: float, targets: np.ndarray, sources: np.ndarray) -> np.ndarray:
    """ :returns G_d(target - source) for all pairs; zero for d <= 0. """
    if d <= 0:
        return np.zeros((len(targets), len(sources)))
    return np.where(np.abs(targets[:, None] - sources[None, :]) < d, 0.5, 0.0)


class ChaosKernelEval(object):
    """
    Pointwise chaos kernels of u(t,x) and v(t,x): f_n (products of wave kernels along the ordered time simplex),
    g_n (the same chain started from a forcing point) and their kernel-smoothed, jump-weighted versions.
    """

    def __init__(self, kernel: KernelSpec, t: float, x: float, cells: int = 64):
        if t <= 0:
            raise DomainError("Expected t > 0, got {}".format(t))
        self.kernel = kernel
        self.t = t
        self.x = x
        self.cells = cells

    def _chain(self, times: Sequence[float], positions: Sequence[float]) -> float:
        value = 1.0
        upper_time, upper_position = self.t, self.x
        for time, position in zip(reversed(times), reversed(positions)):
            if not time < upper_time:
                return 0.0
            value *= wave_kernel(upper_time - time, upper_position - position)
            upper_time, upper_position = time, position
        return value

    def f(self, times: Sequence[float], positions: Sequence[float]) -> float:
        """ :returns f_n(t_1, x_1, ..., t_n, x_n; t, x), zero off the ordered simplex 0 < t_1 < ... < t_n < t. """
        if len(times) and times[0] <= 0:
            return 0.0
        return self._chain(times, positions)

    def g(self, r: float, y: float, times: Sequence[float], positions: Sequence[float]) -> float:
        """ :returns g_n(r, y; t_1, x_1, ..., t_n, x_n; t, x) for r < t_1 < ... < t_n < t. """
        return self._chain([r] + list(times), [y] + list(positions))

    def _smoothed_chain(self, times: Sequence[float], ys: Sequence[float]) -> float:
        """ Integrates the wave kernel chain against k(y_i - x_i) dx_i by nested cell quadrature. """
        if any(b <= a for a, b in zip(times, list(times[1:]) + [self.t])):
            return 0.0
        reach = self.kernel.reach
        vector, centers = None, None
        for i, (time, y) in enumerate(zip(times, ys)):
            new_centers, edges = _cells_around(y, reach, self.cells)
            masses = self.kernel.cell_masses(edges - y)
            if vector is None:
                vector = masses
            else:
                vector = masses * (_cone_matrix(time - times[i - 1], new_centers, centers) @ vector)
            centers = new_centers
        return float(_cone_matrix(self.t - times[-1], np.array([self.x]), centers) @ vector)

    def f_star(self, times: Sequence[float], ys: Sequence[float], zs: Sequence[float]) -> float:
        """ :returns f_n*(t_i, y_i, z_i), f_n smoothed by k in every position and weighted by the jumps. """
        weight = float(np.prod(zs))
        if len(times) == 1:
            s = self.t - times[0]
            if s <= 0 or times[0] < 0:
                return 0.0
            mass = self.kernel.cell_masses(np.array([ys[0] - self.x - s, ys[0] - self.x + s]))
            return weight * 0.5 * float(mass[0])
        if times[0] <= 0:
            return 0.0
        return weight * self._smoothed_chain(times, ys)

    def g_star(self, r: float, y: float, z: float, times: Sequence[float], ys: Sequence[float],
               zs: Sequence[float]) -> float:
        """ :returns g_n*, the chain started at the smoothed forcing point (r, y, z) and weighted by the jumps. """
        weight = z * float(np.prod(zs)) if len(zs) else z
        return weight * self._smoothed_chain([r] + list(times), [y] + list(ys))


class SecondMoment(NamedTuple):
    value: float
    terms: List[float]
    remainder: float


def _box_filter(matrix: np.ndarray, d: float, edges: np.ndarray) -> np.ndarray:
    """ Applies h -> int G_d(w - v) h(v) dv along the first axis of a cell-wise constant matrix. """
    step = edges[1] - edges[0]
    cumulative = np.concatenate([np.zeros((1,) + matrix.shape[1:]), np.cumsum(matrix * step, axis=0)])
    centers = (edges[:-1] + edges[1:]) / 2.0

    def at(points):
        position = np.clip((points - edges[0]) / step, 0.0, len(edges) - 1.0)
        index = np.minimum(np.floor(position).astype(int), len(edges) - 2)
        fraction = (position - index)[:, None]
        return cumulative[index] + fraction * (cumulative[index + 1] - cumulative[index])

    return 0.5 * (at(centers + d) - at(centers - d))


def _chaos_terms(kernel: KernelSpec, t: float, x: float, n_max: int, cells: int = 128, nodes: int = 32) -> List[float]:
    """
    :returns the integrals ||f_n(., t, x)||^2 (with the covariance kernel f as spatial weight) for n = 1..n_max.

    Layers are peeled off from the outermost time: C_1(tau) = F o (g_tau x g_tau) and
    C_{j+1}(tau_a) = F o sum_{tau_c > tau_a} omega_c Box2_{tau_c - tau_a} C_j(tau_c).
    """
    if n_max == 0:
        return []
    step = 2.0 * t / cells
    edges = x - t + step * np.arange(cells + 1)
    covariance = kernel.covariance()
    offsets = step * np.arange(cells)
    averages = covariance.cell_average(offsets - step / 2.0, offsets + step / 2.0)
    weight = toeplitz(averages)
    gl_nodes, gl_weights = np.polynomial.legendre.leggauss(nodes)
    times = t / 2.0 * (gl_nodes + 1.0)
    omegas = t / 2.0 * gl_weights
    layers = []
    for time in times:
        lo = np.maximum(edges[:-1], x - (t - time))
        hi = np.minimum(edges[1:], x + (t - time))
        cone = 0.5 * np.maximum(0.0, hi - lo) / step
        layers.append(weight * np.outer(cone, cone))
    integrals = []
    for j in range(1, n_max + 1):
        if j > 1:
            following = []
            for a, time in enumerate(times):
                accumulated = np.zeros((cells, cells))
                for c in range(a + 1, nodes):
                    d = times[c] - time
                    accumulated += omegas[c] * _box_filter(_box_filter(layers[c], d, edges).T, d, edges).T
                following.append(weight * accumulated)
            layers = following
        integrals.append(math.fsum(omega * float(np.sum(layer)) * step * step for omega, layer in zip(omegas, layers)))
    return integrals


def _remainder(kernel: KernelSpec, m2: float, t: float, n_max: int) -> float:
    """ Tail bound e^c - sum_{n <= n_max} c^n / n! with c = m_2 t sup_s int |FG_s|^2 d mu. """
    energy = spectral_integral(kernel, lambda xi: t * t * np.sinc(t * xi / np.pi) ** 2,
                               period=np.pi / t)
    c = m2 * t * energy
    return max(0.0, math.exp(c) - math.fsum(c ** n / math.factorial(n) for n in range(n_max + 1)))


def _truncated_moment(kernel: KernelSpec, m2: float, t: float, x: float, n_max: int) -> SecondMoment:
    if not 0 <= n_max <= 4:
        raise ConfigurationError("solver/n_max: chaos truncation must lie in [0, 4], got {}".format(n_max))
    if t <= 0:
        raise DomainError("Expected t > 0, got {}".format(t))
    terms = [m2 ** n * integral for n, integral in enumerate(_chaos_terms(kernel, t, x, n_max), start=1)]
    remainder = _remainder(kernel, m2, t, n_max)
    logger.debug("Chaos terms {} (remainder bound {:.3e})".format(terms, remainder))
    return SecondMoment(1.0 + math.fsum(terms), terms, remainder)


def truncated_second_moment(kernel: KernelSpec, spec: LevyMeasureSpec, t: float, x: float = 0.0,
                            n_max: int = 3) -> SecondMoment:
    """
    :returns 1 + sum_{n <= n_max} n! m_2^n ||f~_n(., t, x)||^2 by nested simplex quadrature, the individual terms
    and a bound on the omitted tail.
    """
    return _truncated_moment(kernel, spec.m2, t, x, n_max)


def truncated_second_moment_gaussian(kernel: KernelSpec, m2: float, t: float, x: float = 0.0,
                                     n_max: int = 3) -> SecondMoment:
    """ The same truncation for the Gaussian comparison model with noise variance m2. """
    return _truncated_moment(kernel, m2, t, x, n_max)


def random_kernel(space: DiscreteSpace, n: int, rng: np.random.Generator, support: Sequence[int] = None) -> np.ndarray:
    """ :returns a symmetric rank-n tensor with standard normal entries, zero outside support^n when given. """
    f = symmetrize(rng.standard_normal((space.cells,) * n), n) if n else np.asarray(rng.standard_normal())
    if support is not None and n:
        mask = np.zeros(space.cells, dtype=bool)
        mask[list(support)] = True
        for axis in range(n):
            shape = [1] * n
            shape[axis] = space.cells
            f = f * mask.reshape(shape)
    return f


def vanishing_contraction_check(n: int, m: int, draws: int, space: DiscreteSpace,
                                rng: np.random.Generator) -> ExperimentReport:
    """
    Kernels with disjoint supports: every contraction with k >= 1 vanishes identically and the product reduces to
    I_n(f) I_m(g) = I_{n+m}(f (x) g) on every realization.
    """
    if space.cells < 2:
        raise ChaosError("Disjoint supports need at least two cells, got {}".format(space.cells))
    if n + m > MAX_RANK:
        raise ChaosError("Product formula is limited to n + m <= {}, got {}".format(MAX_RANK, n + m))
    half = space.cells // 2
    f = random_kernel(space, n, rng, range(half))
    g = random_kernel(space, m, rng, range(half, space.cells))
    report = ExperimentReport("vanishing-contraction")
    nonzero = sum(1 for k in range(1, min(n, m) + 1) for l in range(k + 1)
                  if np.any(contraction(f, g, k, l, space) != 0.0))
    product = contraction(f, g, 0, 0, space)
    discrepancy, scale = 0.0, 0.0
    for _ in range(draws):
        counts = space.sample_counts(rng)
        lhs = multiple_integral(counts, space, f) * multiple_integral(counts, space, g)
        discrepancy = max(discrepancy, abs(lhs - multiple_integral(counts, space, product)))
        scale = max(scale, abs(lhs))
    exact = discrepancy <= 1e-9 * (1.0 + scale)
    report.add("nonzero_contractions", nonzero, status=Status.PASS if nonzero == 0 else Status.FAIL)
    report.add("max_abs_discrepancy", discrepancy, status=Status.PASS if exact else Status.FAIL)
    report.note("n={}, m={}, draws={}, cells={}".format(n, m, draws, space.cells))
    report.status = Status.PASS if nonzero == 0 and exact else Status.FAIL
    return report


def isometry_check(ranks: Sequence[int], draws: int, space: DiscreteSpace,
                   rng: np.random.Generator) -> ExperimentReport:
    """
    Monte-Carlo check of E[I_n(f) I_m(g)] = 1{n = m} n! <f, g> for random symmetric kernels of the given ranks.
    Every pair passes when the estimate lies within three standard errors of its expectation.
    """
    ranks = sorted(set(int(n) for n in ranks))
    if not ranks or ranks[0] < 1 or ranks[-1] > MAX_RANK // 2:
        raise ChaosError("Isometry ranks must lie in [1, {}], got {}".format(MAX_RANK // 2, ranks))
    if draws < 2:
        raise ConfigurationError("options/draws: need at least two draws, got {}".format(draws))
    kernels = {n: random_kernel(space, n, rng) for n in ranks}
    values = np.empty((draws, len(ranks)))
    for i in range(draws):
        counts = space.sample_counts(rng)
        values[i] = [multiple_integral(counts, space, kernels[n]) for n in ranks]
    report = ExperimentReport("isometry")
    statuses = []
    for a, n in enumerate(ranks):
        for b, m in enumerate(ranks[a:], start=a):
            products = values[:, a] * values[:, b]
            estimate = float(np.mean(products))
            se = float(np.std(products, ddof=1) / math.sqrt(draws))
            expected = 0.0
            if n == m:
                weights = functools.reduce(np.multiply.outer, [space.masses] * n)
                expected = math.factorial(n) * float(np.sum(kernels[n] ** 2 * weights))
            status = Status.PASS if abs(estimate - expected) <= 3.0 * se + 1e-12 else Status.FAIL
            statuses.append(status)
            report.add("E[I_{}I_{}]".format(n, m), estimate, se, status=status)
            report.add("expected[I_{}I_{}]".format(n, m), expected)
    report.note("draws={}, cells={}".format(draws, space.cells))
    report.status = Status.worst(statuses)
    return report
