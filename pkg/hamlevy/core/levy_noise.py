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
Finite-activity Poisson random measures on [0, T] x [-L, L] x R_0 and compensated Levy-noise integrals.
"""

import logging
import math
from dataclasses import dataclass
from typing import Callable, Iterable, Tuple

import numpy as np
from scipy import integrate

from hamlevy.core.exception import ConfigurationError, DomainError, ResourceError

logger = logging.getLogger(__name__)


class JumpLaw(object):
    """ Law of the jump size Z. Should not be used directly. """

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        raise NotImplementedError("Method must be implemented from upper class")

    def moment(self, p: float) -> float:
        """ :returns E|Z|^p. """
        raise NotImplementedError("Method must be implemented from upper class")

    @property
    def mean(self) -> float:
        raise NotImplementedError("Method must be implemented from upper class")

    def quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        """ :returns nodes and probabilities which integrate functions of Z (exactly for discrete laws). """
        raise NotImplementedError("Method must be implemented from upper class")

    def label(self) -> str:
        raise NotImplementedError("Method must be implemented from upper class")


class DiscreteJumpLaw(JumpLaw):
    """ Jump law with finitely many non-zero values. """

    def __init__(self, values: Iterable[float], probabilities: Iterable[float], label: str = None):
        self.values = np.asarray(list(values), dtype=float)
        self.probabilities = np.asarray(list(probabilities), dtype=float)
        if len(self.values) != len(self.probabilities) or len(self.values) == 0:
            raise ConfigurationError("noise/law: values and probabilities must have the same non-zero length")
        if np.any(self.values == 0):
            raise ConfigurationError("noise/law: jump values must be non-zero, got {}".format(list(self.values)))
        if np.any(self.probabilities <= 0) or abs(math.fsum(self.probabilities) - 1.0) > 1e-12:
            raise ConfigurationError("noise/law: probabilities must be positive and sum to 1, got {}".format(
                list(self.probabilities)))
        self._label = label or "discrete({})".format(", ".join("{!r}:{!r}".format(v, p) for v, p in zip(
            self.values, self.probabilities)))

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        return rng.choice(self.values, size=n, p=self.probabilities)

    def moment(self, p: float) -> float:
        return math.fsum(self.probabilities * np.abs(self.values) ** p)

    @property
    def mean(self) -> float:
        return math.fsum(self.probabilities * self.values)

    def quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        return self.values.copy(), self.probabilities.copy()

    def label(self) -> str:
        return self._label


class UniformJumpLaw(JumpLaw):
    """ Jumps uniformly distributed on [-a, a]. """

    def __init__(self, a: float = 1.0, nodes: int = 16):
        if a <= 0:
            raise ConfigurationError("noise/a: must be positive, got {}".format(a))
        self.a = float(a)
        self._nodes = nodes

    def sample(self, rng: np.random.Generator, n: int) -> np.ndarray:
        jumps = rng.uniform(-self.a, self.a, n)
        zeros = jumps == 0
        while np.any(zeros):
            jumps[zeros] = rng.uniform(-self.a, self.a, int(np.count_nonzero(zeros)))
            zeros = jumps == 0
        return jumps

    def moment(self, p: float) -> float:
        return self.a ** p / (p + 1.0)

    @property
    def mean(self) -> float:
        return 0.0

    def quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        # Gauss-Legendre on each half keeps the nodes away from the excluded zero jump.
        nodes, weights = np.polynomial.legendre.leggauss(self._nodes // 2)
        half = self.a / 2.0 * (nodes + 1.0)
        return np.concatenate([-half[::-1], half]), np.concatenate([weights[::-1], weights]) / 4.0

    def label(self) -> str:
        return "uniform(a={!r})".format(self.a)


@dataclass(frozen=True)
class LevyMeasureSpec:
    """
    A finite-activity Levy measure nu = rate * law(Z).
    :param name: the preset name shown in reports.
    :param rate: the total mass lambda of nu (atoms per unit space-time).
    :param law: the law of the jump size.
    """
    name: str
    rate: float
    law: JumpLaw

    def __post_init__(self):
        if not self.rate >= 0 or not math.isfinite(self.rate):
            raise ConfigurationError("noise/rate: must be finite and non-negative, got {}".format(self.rate))

    def moment(self, p: float) -> float:
        """ :returns m_p = rate * E|Z|^p. """
        return self.rate * self.law.moment(p)

    @property
    def mean(self) -> float:
        """ :returns m_1 = rate * E[Z]; non-zero means the noise carries a compensator drift. """
        return self.rate * self.law.mean

    @property
    def m2(self) -> float:
        return self.moment(2.0)

    def jump_quadrature(self) -> Tuple[np.ndarray, np.ndarray]:
        """ :returns jump nodes and their nu-weights. """
        nodes, probabilities = self.law.quadrature()
        return nodes, self.rate * probabilities

    def validate(self):
        """ :returns a list of diagnostics, empty when the measure is admissible. """
        diagnostics = []
        m2 = self.m2
        if not (0 < m2 < math.inf):
            diagnostics.append("noise/law: second moment m_2 must be finite and positive, got {}".format(m2))
        return diagnostics

    def label(self) -> str:
        return self.name if self.rate == 1.0 else "{} rate={!r}".format(self.name, self.rate)


@dataclass(frozen=True, eq=False)
class AtomCloud:
    """
    One realization of the Poisson random measure: atoms (time, position, jump) inside (0, T] x [-L, L],
    sorted by time with ties broken by position and jump.
    """
    T: float
    L: float
    times: np.ndarray
    positions: np.ndarray
    jumps: np.ndarray

    def __post_init__(self):
        order = np.lexsort((self.jumps, self.positions, self.times))
        for name in ("times", "positions", "jumps"):
            values = np.array(getattr(self, name), dtype=float)[order]
            values.setflags(write=False)
            object.__setattr__(self, name, values)

    @classmethod
    def empty(cls, T: float, L: float) -> 'AtomCloud':
        return cls(T, L, np.empty(0), np.empty(0), np.empty(0))

    @classmethod
    def of(cls, T: float, L: float, atoms: Iterable[Tuple[float, float, float]]) -> 'AtomCloud':
        """ Builds a cloud from explicit (time, position, jump) triples. """
        atoms = list(atoms)
        cloud = cls.empty(T, L)
        return cloud.with_atoms(atoms) if atoms else cloud

    def __len__(self):
        return len(self.times)

    def atoms(self):
        return zip(self.times, self.positions, self.jumps)

    def contains(self, time: float, position: float) -> bool:
        return 0 < time <= self.T and -self.L <= position <= self.L

    def with_atoms(self, atoms: Iterable[Tuple[float, float, float]]) -> 'AtomCloud':
        """ :returns a new cloud with the given atoms added. """
        atoms = list(atoms)
        for time, position, jump in atoms:
            if not self.contains(time, position):
                raise DomainError("Atom ({}, {}) lies outside the window (0, {}] x [-{}, {}]".format(
                    time, position, self.T, self.L, self.L))
            if jump == 0:
                raise DomainError("Atom jumps must be non-zero")
        extra = np.asarray(atoms, dtype=float).reshape(-1, 3)
        return AtomCloud(self.T, self.L,
                         np.concatenate([self.times, extra[:, 0]]),
                         np.concatenate([self.positions, extra[:, 1]]),
                         np.concatenate([self.jumps, extra[:, 2]]))

    def identical(self, other: 'AtomCloud') -> bool:
        """ :returns whether both clouds hold bit-identical atoms on the same window. """
        return self.T == other.T and self.L == other.L and all(
            np.array_equal(getattr(self, name), getattr(other, name)) for name in ("times", "positions", "jumps"))


def sample_atoms(spec: LevyMeasureSpec, T: float, L: float, rng: np.random.Generator,
                 max_atoms: int = 1000000) -> AtomCloud:
    """
    Samples the Poisson random measure with intensity dt dx nu(dz) on (0, T] x [-L, L].
    :raises ResourceError: when the mean or the drawn number of atoms exceeds max_atoms.
    """
    if T <= 0 or L <= 0:
        raise DomainError("Expected T > 0 and L > 0, got T={}, L={}".format(T, L))
    mean = spec.rate * T * 2.0 * L
    if mean > max_atoms:
        raise ResourceError("Expected {:.0f} atoms exceed the budget of {}".format(mean, max_atoms))
    n = int(rng.poisson(mean))
    if n > max_atoms:
        raise ResourceError("Sampled {} atoms exceed the budget of {}".format(n, max_atoms))
    times = T * (1.0 - rng.random(n))
    positions = rng.uniform(-L, L, n)
    jumps = spec.law.sample(rng, n)
    logger.debug("Sampled {} atoms (mean {:.1f})".format(n, mean))
    return AtomCloud(T, L, times, positions, jumps)


def levy_integral(cloud: AtomCloud, spec: LevyMeasureSpec, phi: Callable) -> float:
    """
    Compensated integral of phi(time, position) against the Levy noise of one realization.
    :param phi: a vectorized evaluator on (times, positions).
    """
    total = math.fsum(np.asarray(phi(cloud.times, cloud.positions), dtype=float) * cloud.jumps) if len(cloud) else 0.0
    m1 = spec.mean
    if m1 != 0:
        drift, residual = integrate.dblquad(lambda x, t: float(phi(t, x)), 0.0, cloud.T, -cloud.L, cloud.L)
        logger.debug("Compensator integral {} (residual {:.2e})".format(drift, residual))
        total -= m1 * drift
    return total
