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
Replicate-parallel Monte-Carlo execution: stream-indexed random generators, a joblib chunk runner collecting
results in replicate order and mergeable running moments.
"""

import functools
import logging
import math
from typing import Callable, Sequence

import numpy as np
from joblib import Parallel, delayed

from hamlevy.core.exception import AbortedException, ConfigurationError
from hamlevy.core.kernels import KernelSpec
from hamlevy.core.levy_noise import LevyMeasureSpec, sample_atoms
from hamlevy.core.solver import SolverConfig, solve_U_gaussian, solve_u, spatial_average

logger = logging.getLogger(__name__)

CHUNKS_PER_WORKER = 4


def replicate_rng(seed: int, index: int) -> np.random.Generator:
    """ :returns the generator of replicate index; independent of the worker layout. """
    return np.random.default_rng(np.random.SeedSequence(entropy=seed, spawn_key=(index,)))


def _fsum(values: np.ndarray) -> np.ndarray:
    values = np.asarray(values, dtype=float)
    if values.ndim == 1:
        return np.asarray(math.fsum(values))
    return np.apply_along_axis(math.fsum, 0, values)


class RunningMoments(object):
    """ Count, mean and sum of squared deviations of a (possibly vector valued) sample with associative merges. """

    def __init__(self, count: int = 0, mean=0.0, m2=0.0):
        self.count = count
        self.mean = np.asarray(mean, dtype=float)
        self.m2 = np.asarray(m2, dtype=float)

    @classmethod
    def of(cls, values) -> 'RunningMoments':
        values = np.asarray(values, dtype=float)
        if len(values) == 0:
            return cls()
        mean = _fsum(values) / len(values)
        return cls(len(values), mean, _fsum((values - mean) ** 2))

    def merge(self, other: 'RunningMoments') -> 'RunningMoments':
        if self.count == 0:
            return RunningMoments(other.count, other.mean, other.m2)
        if other.count == 0:
            return RunningMoments(self.count, self.mean, self.m2)
        count = self.count + other.count
        delta = other.mean - self.mean
        mean = self.mean + delta * other.count / count
        m2 = self.m2 + other.m2 + delta ** 2 * self.count * other.count / count
        return RunningMoments(count, mean, m2)

    def variance(self):
        """ :returns the unbiased sample variance. """
        if self.count < 2:
            return np.full(self.mean.shape, np.nan)
        return self.m2 / (self.count - 1)

    def stderr(self):
        """ :returns the standard error of the mean. """
        return np.sqrt(self.variance() / self.count)


def _run_chunk(task: Callable, seed: int, indices: Sequence[int]) -> list:
    return [task(int(index), replicate_rng(seed, int(index))) for index in indices]


def map_replicates(task: Callable, n: int, seed: int, workers: int = 1, listener=None, label: str = "") -> np.ndarray:
    """
    Runs task(index, rng) for every replicate index in [0, n) and stacks the results in index order.
    :param task: a picklable callable (module level function or functools.partial).
    :param listener: receives replicatesCompleted(label, done, n) after every chunk.
    """
    if n < 1:
        raise ConfigurationError("experiment/replicates: must be positive, got {}".format(n))
    if workers < 1:
        raise ConfigurationError("experiment/workers: must be positive, got {}".format(workers))
    chunks = [chunk for chunk in np.array_split(np.arange(n), min(n, workers * CHUNKS_PER_WORKER)) if len(chunk)]
    logger.debug("{}: {} replicates in {} chunks on {} workers".format(label, n, len(chunks), workers))
    results, done = [], 0
    runner = Parallel(n_jobs=workers, backend="loky", return_as="generator")
    try:
        for chunk in runner(delayed(_run_chunk)(task, seed, chunk) for chunk in chunks):
            results.extend(chunk)
            done += len(chunk)
            if listener is not None:
                listener.replicatesCompleted.emit(label, done, n)
    except KeyboardInterrupt:
        raise AbortedException("{}: interrupted after {} of {} replicates".format(label or "run", done, n))
    return np.asarray(results, dtype=float)


def _averages_task(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, times, radii, index: int,
                   rng: np.random.Generator):
    cloud = sample_atoms(spec, cfg.T, cfg.L, rng, cfg.max_atoms)
    field = solve_u(cloud, kernel, spec, cfg)
    return [[spatial_average(field, t, R) for R in radii] for t in times]


def _values_task(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, t: float, x: float, index: int,
                 rng: np.random.Generator):
    cloud = sample_atoms(spec, cfg.T, cfg.L, rng, cfg.max_atoms)
    return solve_u(cloud, kernel, spec, cfg).value(t, x)


def _gaussian_averages_task(kernel: KernelSpec, m2: float, cfg: SolverConfig, times, radii, index: int,
                            rng: np.random.Generator):
    field = solve_U_gaussian(rng, kernel, m2, cfg)
    return [[spatial_average(field, t, R) for R in radii] for t in times]


def _gaussian_values_task(kernel: KernelSpec, m2: float, cfg: SolverConfig, t: float, x: float, index: int,
                          rng: np.random.Generator):
    return solve_U_gaussian(rng, kernel, m2, cfg).value(t, x)


def simulate_averages(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, times: Sequence[float],
                      radii: Sequence[float], n: int, seed: int, workers: int = 1, listener=None,
                      label: str = "") -> np.ndarray:
    """
    :returns F_R(t) for every replicate, time and radius, shape (n, len(times), len(radii)); all entries of a
    replicate come from the same realization.
    """
    task = functools.partial(_averages_task, kernel, spec, cfg, tuple(times), tuple(radii))
    return map_replicates(task, n, seed, workers, listener, label)


def simulate_values(kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig, t: float, x: float, n: int,
                    seed: int, workers: int = 1, listener=None, label: str = "") -> np.ndarray:
    """ :returns u(t, x) for every replicate. """
    return map_replicates(functools.partial(_values_task, kernel, spec, cfg, t, x), n, seed, workers, listener, label)


def simulate_gaussian_averages(kernel: KernelSpec, m2: float, cfg: SolverConfig, times: Sequence[float],
                               radii: Sequence[float], n: int, seed: int, workers: int = 1, listener=None,
                               label: str = "") -> np.ndarray:
    """ The Gaussian comparison model counterpart of simulate_averages (grid scheme). """
    task = functools.partial(_gaussian_averages_task, kernel, m2, cfg, tuple(times), tuple(radii))
    return map_replicates(task, n, seed, workers, listener, label)


def simulate_gaussian_values(kernel: KernelSpec, m2: float, cfg: SolverConfig, t: float, x: float, n: int,
                             seed: int, workers: int = 1, listener=None, label: str = "") -> np.ndarray:
    task = functools.partial(_gaussian_values_task, kernel, m2, cfg, t, x)
    return map_replicates(task, n, seed, workers, listener, label)
