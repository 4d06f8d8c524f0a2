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
Per-realization solvers of the mild equations: u (hyperbolic Anderson model), the delta-forced companion
v^{(r,y,z)} and the Gaussian comparison model U.

The event-driven scheme is exact in time. Every atom spreads its weighted kernel mass over whole quadrature
cells placed on [xi - a, xi + a] and acts through the wave kernel as a clamped piecewise-linear cumulative mass,
so contributions outside the reach-extended light cone are exactly 0.0. Contributions are always summed in atom
order, which keeps results bit-identical whenever atoms without influence are added or removed.
"""

import dataclasses
import logging
import math
from collections import namedtuple
from dataclasses import dataclass
from typing import List, Optional, Tuple

import numpy as np
from scipy import integrate
from scipy.signal import fftconvolve

from hamlevy.core.exception import ConfigurationError, DomainError, UnsupportedConfigurationError
from hamlevy.core.kernels import KernelSpec, kernel_stencil
from hamlevy.core.levy_noise import AtomCloud, LevyMeasureSpec

logger = logging.getLogger(__name__)

EVENT_DRIVEN = "event-driven"
GRID = "grid"
SCHEMES = (EVENT_DRIVEN, GRID)


@dataclass(frozen=True)
class SolverConfig:
    """
    :param scheme: either "event-driven" or "grid".
    :param T: the time horizon.
    :param L: the half-width of the spatial window holding the atoms.
    :param dx: the space step of the grid scheme (and the target quadrature step of the event-driven scheme).
    :param dt: the time step of the grid scheme (defaults to dx).
    :param quadrature_step: the cell width of the event-driven kernel quadrature (defaults to a kernel rule).
    :param n_max: the Picard depth.
    :param max_atoms: the atom budget per realization.
    """
    scheme: str = EVENT_DRIVEN
    T: float = 1.0
    L: float = 16.0
    dx: float = 0.05
    dt: Optional[float] = None
    quadrature_step: Optional[float] = None
    n_max: int = 3
    max_atoms: int = 1000000

    def __post_init__(self):
        if self.dt is None:
            object.__setattr__(self, "dt", self.dx)
        diagnostics = []
        if self.scheme not in SCHEMES:
            diagnostics.append("solver/scheme: expected one of {}, got '{}'".format(", ".join(SCHEMES), self.scheme))
        for name in ("T", "L", "dx", "dt"):
            if not getattr(self, name) > 0:
                diagnostics.append("solver/{}: must be positive, got {}".format(name, getattr(self, name)))
        if self.quadrature_step is not None and not self.quadrature_step > 0:
            diagnostics.append("solver/quadrature_step: must be positive, got {}".format(self.quadrature_step))
        if self.scheme == GRID and self.dt > self.dx:
            diagnostics.append("solver/dt: grid scheme requires dt <= dx, got dt={} > dx={}".format(self.dt, self.dx))
        if self.n_max < 1:
            diagnostics.append("solver/n_max: must be at least 1, got {}".format(self.n_max))
        if self.max_atoms < 1:
            diagnostics.append("solver/max_atoms: must be positive, got {}".format(self.max_atoms))
        if diagnostics:
            raise ConfigurationError(diagnostics[0], diagnostics)

    def step_for(self, kernel: KernelSpec) -> float:
        """ :returns the event-driven quadrature cell width for the given kernel. """
        return self.quadrature_step if self.quadrature_step else kernel.default_quadrature_step(self.dx)

    def replace(self, **changes) -> 'SolverConfig':
        return dataclasses.replace(self, **changes)


class SolutionField(object):
    """ Evaluator of a solution for one noise realization. Should not be used directly. """

    def __init__(self, kernel: KernelSpec, T: float, L: float, baseline: float):
        self.kernel = kernel
        self.T = T
        self.L = L
        self.baseline = baseline

    def value(self, t: float, x):
        """ :returns the field at time t and position(s) x. """
        raise NotImplementedError("Method must be implemented from upper class")

    def spatial_integral(self, t: float, a: float, b: float) -> float:
        """ :returns the integral of the field minus its initial value over [a, b] at time t. """
        raise NotImplementedError("Method must be implemented from upper class")

    def extended(self, atoms) -> 'SolutionField':
        """ :returns the field solved on the same realization with the given atoms added. """
        raise NotImplementedError("Method must be implemented from upper class")


_Response = namedtuple("_Response", ["time", "edges", "cumulative", "primitive", "blocks"])


def _dyadic_blocks(weights: np.ndarray) -> List[np.ndarray]:
    """ :returns the sums of the weights over dyadic blocks of cells, finest level (the weights) first. """
    level = np.zeros(1 << (len(weights) - 1).bit_length())
    level[:len(weights)] = weights
    blocks = [level]
    while len(level) > 1:
        level = level[0::2] + level[1::2]
        blocks.append(level)
    return blocks


def _range_sum(blocks: List[np.ndarray], start: np.ndarray, stop: np.ndarray) -> np.ndarray:
    """
    Sums the weights of the cells start..stop-1 for every window by walking the dyadic blocks.
    Only blocks lying inside a range are read, so the result does not depend on cells outside of it.
    """
    left = np.zeros(len(start))
    right = np.zeros(len(start))
    for level in blocks:
        top = len(level) - 1
        take = (start < stop) & (start % 2 == 1)
        left += np.where(take, level[np.minimum(start, top)], 0.0)
        start = start + take
        take = (start < stop) & (stop % 2 == 1)
        stop = stop - take
        right += np.where(take, level[np.minimum(stop, top)], 0.0)
        start, stop = start // 2, stop // 2
    return left + right


def _window_sum(response: _Response, left: np.ndarray, right: np.ndarray) -> np.ndarray:
    """ :returns the cell weights of a response integrated over [left, right] (linear inside a cell). """
    edges, weights = response.edges, response.blocks[0]
    cells = len(edges) - 1
    first = np.clip(np.searchsorted(edges, left, side="right") - 1, 0, cells - 1)
    last = np.clip(np.searchsorted(edges, right, side="left") - 1, 0, cells - 1)

    def partial(k):
        overlap = np.minimum(edges[k + 1], right) - np.maximum(edges[k], left)
        return np.clip(overlap / (edges[k + 1] - edges[k]), 0.0, 1.0) * weights[k]

    inner = _range_sum(response.blocks, first + 1, last)
    return partial(first) + inner + np.where(last > first, partial(last), 0.0)


def _clamped_primitive(edges: np.ndarray, cumulative: np.ndarray, primitive: np.ndarray, x) -> np.ndarray:
    """
    Antiderivative (vanishing left of the cells) of the clamped piecewise-linear cumulative mass.
    :param primitive: the antiderivative at the edges.
    """
    x = np.asarray(x, dtype=float)
    k = np.clip(np.searchsorted(edges, x, side="right") - 1, 0, len(edges) - 2)
    delta = np.clip(x - edges[k], 0.0, None)
    width = edges[k + 1] - edges[k]
    inside = primitive[k] + cumulative[k] * delta + (cumulative[k + 1] - cumulative[k]) / width * delta ** 2 / 2.0
    right = primitive[-1] + cumulative[-1] * (x - edges[-1])
    return np.where(x <= edges[0], 0.0, np.where(x >= edges[-1], right, inside))


class EventDrivenField(SolutionField):
    """
    Event-driven solution of u(t,x) = baseline + z G_{t-r}(x-y) + sum_i zeta_i int G_{t-tau_i}(x-y') w(tau_i-, y')
    k(y'-xi_i) dy', where w is the field itself (or the previous Picard iterate when a source is given).
    """

    def __init__(self, cloud: AtomCloud, kernel: KernelSpec, step: float, baseline: float = 1.0,
                 forcing: Tuple[float, float, float] = None, source: 'EventDrivenField' = None,
                 responses: List[_Response] = None):
        """
        :param cloud: the realization.
        :param kernel: the coloration kernel.
        :param step: the quadrature cell width.
        :param baseline: the initial value (1 for u, 0 for v).
        :param forcing: the delta forcing (r, y, z) of v; only atoms after r enter.
        :param source: evaluate atom weights with this field instead of the field itself (Picard iteration).
        :param responses: already computed responses of the leading atoms (reused by extended fields).
        """
        super(EventDrivenField, self).__init__(kernel, cloud.T, cloud.L, baseline)
        self.cloud = cloud
        self.step = step
        self.forcing = forcing
        self._source = source
        self._cells = int(math.ceil(2.0 * kernel.reach / step))
        selected = cloud.times > forcing[0] if forcing else np.ones(len(cloud), dtype=bool)
        self._times = cloud.times[selected]
        self._positions = cloud.positions[selected]
        self._jumps = cloud.jumps[selected]
        self._responses = list(responses) if responses else []
        for i in range(len(self._responses), len(self._times)):
            self._responses.append(self._respond(i))

    def _respond(self, i: int) -> _Response:
        time, position, jump = self._times[i], self._positions[i], self._jumps[i]
        a = self.kernel.reach
        edges = position + np.linspace(-a, a, self._cells + 1)
        if self.forcing:
            r, y, _ = self.forcing
            boundary = np.array([y - (time - r), y + (time - r)])
            boundary = boundary[(boundary > edges[0]) & (boundary < edges[-1])]
            edges = np.union1d(edges, boundary)
        centers = (edges[:-1] + edges[1:]) / 2.0
        masses = self.kernel.cell_masses(edges - position)
        if self._source is not None:
            before = self._source.value(time, centers)
        else:
            before = self._evaluate(time, centers, self._responses)
        weights = jump * before * masses
        cumulative = np.concatenate([[0.0], np.cumsum(weights)])
        primitive = np.concatenate([[0.0], np.cumsum((cumulative[:-1] + cumulative[1:]) / 2.0 * np.diff(edges))])
        return _Response(time, edges, cumulative, primitive, _dyadic_blocks(weights))

    def _forced(self, t: float, x: np.ndarray) -> np.ndarray:
        r, y, z = self.forcing
        if t <= r:
            return np.zeros_like(x)
        return np.where(np.abs(x - y) < t - r, 0.5 * z, 0.0)

    def _evaluate(self, t: float, x: np.ndarray, responses: List[_Response]) -> np.ndarray:
        result = np.full(x.shape, self.baseline, dtype=float)
        if self.forcing:
            result = result + self._forced(t, x)
        if len(x) == 0:
            return result
        lo, hi = x.min(), x.max()
        for response in responses:
            if response.time >= t:
                break
            d = t - response.time
            edges = response.edges
            if lo - d >= edges[-1] or hi + d <= edges[0]:
                continue
            # Window sums instead of cumulative differences: atoms outside the cone must leave D u exactly zero.
            result += 0.5 * _window_sum(response, x - d, x + d)
        return result

    def value(self, t: float, x):
        scalar = np.ndim(x) == 0
        result = self._evaluate(t, np.atleast_1d(np.asarray(x, dtype=float)), self._responses)
        return float(result[0]) if scalar else result

    def spatial_integral(self, t: float, a: float, b: float) -> float:
        terms = []
        if self.forcing and t > self.forcing[0]:
            r, y, z = self.forcing
            terms.append(0.5 * z * max(0.0, min(b, y + t - r) - max(a, y - (t - r))))
        for response in self._responses:
            if response.time >= t:
                break
            d = t - response.time
            edges = response.edges
            if a - d >= edges[-1] or b + d <= edges[0]:
                continue
            points = np.array([b + d, a + d, b - d, a - d])
            v = _clamped_primitive(edges, response.cumulative, response.primitive, points)
            terms.append(0.5 * ((v[0] - v[1]) - (v[2] - v[3])))
        return math.fsum(terms)

    def extended(self, atoms) -> 'EventDrivenField':
        atoms = list(atoms)
        cloud = self.cloud.with_atoms(atoms)
        first = min(atom[0] for atom in atoms)
        keep = int(np.searchsorted(self._times, first, side="left"))
        return EventDrivenField(cloud, self.kernel, self.step, self.baseline, self.forcing, self._source,
                                self._responses[:keep])

    def responses(self) -> int:
        """ :returns the number of atoms which entered the solution. """
        return len(self._responses)


class GridField(SolutionField):
    """ A solution stored on the space-time lattice of the grid scheme. """

    def __init__(self, kernel: KernelSpec, cfg: SolverConfig, positions: np.ndarray, levels: np.ndarray,
                 baseline: float = 1.0, rebuild=None):
        super(GridField, self).__init__(kernel, cfg.T, cfg.L, baseline)
        self.cfg = cfg
        self.positions = positions
        self.levels = levels
        self._rebuild = rebuild

    def _level(self, t: float) -> np.ndarray:
        if t <= 0:
            return self.levels[0]
        position = min(t / self.cfg.dt, len(self.levels) - 1)
        n = int(math.floor(position))
        if n >= len(self.levels) - 1:
            return self.levels[-1]
        fraction = position - n
        if fraction == 0:
            return self.levels[n]
        return (1.0 - fraction) * self.levels[n] + fraction * self.levels[n + 1]

    def value(self, t: float, x):
        result = np.interp(np.asarray(x, dtype=float), self.positions, self._level(t))
        return float(result) if np.ndim(result) == 0 else result

    def spatial_integral(self, t: float, a: float, b: float) -> float:
        inner = self.positions[(self.positions > a) & (self.positions < b)]
        x = np.concatenate([[a], inner, [b]])
        return float(integrate.trapezoid(np.interp(x, self.positions, self._level(t)) - self.baseline, x))

    def extended(self, atoms) -> 'GridField':
        if self._rebuild is None:
            raise UnsupportedConfigurationError("Field has no underlying atom cloud")
        return self._rebuild(list(atoms))


def _lattice(cfg: SolverConfig) -> Tuple[np.ndarray, int]:
    """ :returns the lattice positions (padded by T on both sides) and the number of time steps. """
    half = cfg.L + cfg.T
    cells = int(math.ceil(half / cfg.dx))
    positions = cfg.dx * np.arange(-cells, cells + 1)
    return positions, int(math.ceil(cfg.T / cfg.dt - 1e-9))


def _leapfrog(cfg: SolverConfig, increments) -> np.ndarray:
    """
    Leapfrog scheme u^{n+1} = 2u^n - u^{n-1} + lambda^2 (u^n_{m+1} - 2u^n_m + u^n_{m-1}) + lambda u^n_m dX^n_m
    with lambda = dt/dx, u^{-1} = u^0 = 1 and Dirichlet value 1 on the padded boundary.
    :param increments: a callable returning the noise increments dX^n of slab n.
    """
    positions, steps = _lattice(cfg)
    levels = np.empty((steps + 1, len(positions)))
    previous = np.ones(len(positions))
    current = np.ones(len(positions))
    levels[0] = current
    courant = cfg.dt / cfg.dx
    for n in range(steps):
        noise = increments(n)
        following = np.ones(len(positions))
        if courant == 1.0:
            following[1:-1] = current[2:] + current[:-2] - previous[1:-1] + current[1:-1] * noise[1:-1]
        else:
            following[1:-1] = (2.0 * current[1:-1] - previous[1:-1] +
                               courant ** 2 * (current[2:] - 2.0 * current[1:-1] + current[:-2]) +
                               courant * current[1:-1] * noise[1:-1])
        previous, current = current, following
        levels[n + 1] = current
    return levels


def _atom_increments(cloud: AtomCloud, kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig):
    """ :returns a callable yielding the cell increments of the colored Levy noise over time slab n. """
    positions, steps = _lattice(cfg)
    slabs = np.floor(cloud.times / cfg.dt).astype(int)
    reach = int(math.ceil(kernel.reach / cfg.dx)) + 1
    drift = spec.mean * kernel.l1_norm * cfg.dx * cfg.dt
    origin = positions[0]

    def increments(n: int) -> np.ndarray:
        noise = np.full(len(positions), -drift)
        for i in np.flatnonzero(slabs == n):
            center = int(round((cloud.positions[i] - origin) / cfg.dx))
            lo, hi = max(0, center - reach), min(len(positions), center + reach + 1)
            edges = np.concatenate([positions[lo:hi] - cfg.dx / 2.0, [positions[hi - 1] + cfg.dx / 2.0]])
            noise[lo:hi] += cloud.jumps[i] * kernel.cell_masses(edges - cloud.positions[i])
        return noise

    return increments


def solve_u(cloud: AtomCloud, kernel: KernelSpec, spec: LevyMeasureSpec, cfg: SolverConfig) -> SolutionField:
    """
    Solves the hyperbolic Anderson model u(t,x) = 1 + int int G_{t-s}(x-y) u(s,y) X(ds,dy) on one realization.
    :raises UnsupportedConfigurationError: for the event-driven scheme with a non-centered Levy measure.
    """
    if cloud.T < cfg.T:
        raise DomainError("Atom cloud covers (0, {}] but the solver needs (0, {}]".format(cloud.T, cfg.T))
    if cfg.scheme == EVENT_DRIVEN:
        if spec.mean != 0:
            raise UnsupportedConfigurationError(
                "Event-driven scheme requires a centered Levy measure (m_1 = {}); use the grid scheme".format(
                    spec.mean))
        field = EventDrivenField(cloud, kernel, cfg.step_for(kernel), baseline=1.0)
        logger.debug("Event-driven solve with {} atoms".format(field.responses()))
        return field
    positions, _ = _lattice(cfg)
    levels = _leapfrog(cfg, _atom_increments(cloud, kernel, spec, cfg))
    return GridField(kernel, cfg, positions, levels, 1.0,
                     rebuild=lambda atoms: solve_u(cloud.with_atoms(atoms), kernel, spec, cfg))


def solve_v_delta(cloud: AtomCloud, kernel: KernelSpec, r: float, y: float, z: float, cfg: SolverConfig,
                  spec: LevyMeasureSpec = None) -> EventDrivenField:
    """
    Solves v(t,x) = z G_{t-r}(x-y) + int_r^t int G_{t-s}(x-y') v(s,y') X(ds,dy'); only atoms after r enter and
    v vanishes exactly outside the light cone |x-y| < t-r.
    """
    if not 0 <= r < cfg.T:
        raise DomainError("Forcing time must lie inside [0, {}), got r={}".format(cfg.T, r))
    if cfg.scheme != EVENT_DRIVEN:
        raise UnsupportedConfigurationError("The delta-forced equation is solved by the event-driven scheme only")
    if spec is not None and spec.mean != 0:
        raise UnsupportedConfigurationError("Event-driven scheme requires a centered Levy measure")
    return EventDrivenField(cloud, kernel, cfg.step_for(kernel), baseline=0.0, forcing=(r, y, z))


def picard_iterates(kernel: KernelSpec, spec: LevyMeasureSpec, cloud: AtomCloud, n_max: int, cfg: SolverConfig,
                    forcing: Tuple[float, float, float]) -> List[EventDrivenField]:
    """
    :returns the Picard iterates v_0, ..., v_{n_max} of the delta-forced equation, where v_0 = z G_{t-r}(x-y) and
    the atom weights of v_n are taken from v_{n-1}.
    """
    if not 1 <= n_max <= 6:
        raise ConfigurationError("solver/n_max: Picard depth must lie in [1, 6], got {}".format(n_max))
    if spec.mean != 0:
        raise UnsupportedConfigurationError("Event-driven scheme requires a centered Levy measure")
    step = cfg.step_for(kernel)
    iterates = [EventDrivenField(AtomCloud.empty(cloud.T, cloud.L), kernel, step, baseline=0.0, forcing=forcing)]
    for _ in range(n_max):
        iterates.append(EventDrivenField(cloud, kernel, step, baseline=0.0, forcing=forcing, source=iterates[-1]))
    return iterates


def solve_U_gaussian(rng: np.random.Generator, kernel: KernelSpec, m2: float, cfg: SolverConfig) -> GridField:
    """
    Solves the comparison model driven by colored Gaussian noise with spatial covariance m2 * f: white-noise cell
    increments of variance dt*dx are convolved with k and scaled by sqrt(m2).
    """
    if cfg.scheme != GRID:
        raise UnsupportedConfigurationError("The Gaussian comparison model is solved by the grid scheme only")
    positions, steps = _lattice(cfg)
    stencil = kernel_stencil(kernel, cfg.dx)
    J = (len(stencil) - 1) // 2
    scale = math.sqrt(m2)
    white = rng.normal(0.0, math.sqrt(cfg.dt * cfg.dx), size=(steps, len(positions) + 2 * J))

    def increments(n: int) -> np.ndarray:
        if scale == 0:
            return np.zeros(len(positions))
        return scale * fftconvolve(white[n], stencil, mode="valid")

    return GridField(kernel, cfg, positions, _leapfrog(cfg, increments), 1.0)


def spatial_average(field: SolutionField, t: float, R: float) -> float:
    """
    :returns F_R(t), the integral of u(t, .) - 1 over [-R, R].
    :raises DomainError: when [-R, R] plus the cone and kernel reach leaves the solver window.
    """
    if R <= 0:
        raise DomainError("Expected R > 0, got {}".format(R))
    if R + t + field.kernel.reach > field.L * (1.0 + 1e-12):
        raise DomainError("Window [-{}, {}] at t={} needs L >= {}, got L={}".format(
            R, R, t, R + t + field.kernel.reach, field.L))
    return field.spatial_integral(t, -R, R)
