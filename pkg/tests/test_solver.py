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

import numpy as np
import pytest
from scipy import stats

from hamlevy.core.exception import ConfigurationError, DomainError, UnsupportedConfigurationError
from hamlevy.core.kernels import q_t
from hamlevy.core.levy_noise import AtomCloud, sample_atoms
from hamlevy.core.presets import noise_preset
from hamlevy.core.solver import (GRID, SolverConfig, picard_iterates, solve_U_gaussian, solve_u, solve_v_delta,
                                 spatial_average)


@pytest.mark.parametrize("values", [
    dict(scheme="spectral"),
    dict(T=0.0),
    dict(L=-1.0),
    dict(scheme=GRID, dx=0.05, dt=0.1),
    dict(n_max=0),
    dict(max_atoms=0),
    dict(quadrature_step=-0.1),
])
def test_invalid_solver_configurations(values):
    with pytest.raises(ConfigurationError):
        SolverConfig(**values)


def test_time_step_defaults_to_space_step():
    assert SolverConfig(dx=0.02).dt == 0.02


def test_empty_cloud_stays_at_one(box, rademacher, small_solver):
    field = solve_u(AtomCloud.empty(1.0, 7.0), box, rademacher, small_solver)
    assert field.value(1.0, 0.0) == 1.0
    assert spatial_average(field, 1.0, 5.0) == 0.0


def test_single_atom_solution_is_exact(box, rademacher, small_solver):
    cloud = AtomCloud.of(1.0, 7.0, [(0.2, 0.0, 1.0)])
    field = solve_u(cloud, box, rademacher, small_solver)
    # u(1, 0) = 1 + z/2 * mass of k over [-0.8, 0.8]
    assert field.value(1.0, 0.0) == pytest.approx(1.5, abs=1e-12)
    assert field.value(1.0, 0.8 + 0.5 + 0.1) == 1.0
    assert field.value(0.1, 0.0) == 1.0
    # every atom contributes z * (t - r) * ||k||_1 to the integral over a large enough window
    assert spatial_average(field, 1.0, 5.0) == pytest.approx(0.8, abs=1e-12)


def test_second_atom_sees_the_first(box, rademacher, small_solver):
    cloud = AtomCloud.of(1.0, 7.0, [(0.2, 0.0, 1.0), (0.5, 0.0, 1.0)])
    field = solve_u(cloud, box, rademacher, small_solver)
    # at time 0.5 the first atom adds z/2 times the kernel mass of [-0.3, 0.3]
    assert field.value(0.5, 0.0) == pytest.approx(1.3, abs=1e-12)
    # the second atom is weighted by u(0.5, .) >= 1, which exceeds 1 near the origin
    assert field.value(1.0, 0.0) > 2.0


def test_grid_scheme_agrees_on_the_spatial_integral(box, rademacher):
    cfg = SolverConfig(scheme=GRID, T=1.0, L=7.0, dx=0.01)
    cloud = AtomCloud.of(1.0, 7.0, [(0.2, 0.0, 1.0)])
    field = solve_u(cloud, box, rademacher, cfg)
    assert spatial_average(field, 1.0, 5.0) == pytest.approx(0.8, abs=0.05)


def test_event_driven_scheme_needs_centered_noise(box, small_solver):
    with pytest.raises(UnsupportedConfigurationError):
        solve_u(AtomCloud.empty(1.0, 7.0), box, noise_preset("two-point"), small_solver)


def test_solver_is_deterministic(box, rademacher, small_solver):
    cloud = sample_atoms(rademacher, 1.0, 7.0, np.random.default_rng(3))
    x = np.linspace(-3.0, 3.0, 13)
    first = solve_u(cloud, box, rademacher, small_solver).value(1.0, x)
    second = solve_u(cloud, box, rademacher, small_solver).value(1.0, x)
    assert np.array_equal(first, second)


def test_window_must_hold_the_cone(box, rademacher, small_solver):
    field = solve_u(AtomCloud.empty(1.0, 7.0), box, rademacher, small_solver)
    with pytest.raises(DomainError):
        spatial_average(field, 1.0, 6.0)


def test_delta_forced_solution_vanishes_outside_the_cone(box, rademacher, small_solver):
    cloud = sample_atoms(rademacher, 1.0, 7.0, np.random.default_rng(11))
    r, y = 0.3, 0.5
    v = solve_v_delta(cloud, box, r, y, 1.0, small_solver, rademacher)
    outside = np.array([y - 0.7 - 0.05, y + 0.7 + 0.05, y + 3.0])
    assert np.all(v.value(1.0, outside) == 0.0)
    assert v.value(0.2, y) == 0.0


def test_delta_forced_solution_without_atoms(box, small_solver):
    v = solve_v_delta(AtomCloud.empty(1.0, 7.0), box, 0.5, 0.0, 2.0, small_solver)
    assert v.value(1.0, 0.0) == 1.0
    assert v.value(1.0, 0.6) == 0.0
    assert v.spatial_integral(1.0, -5.0, 5.0) == pytest.approx(1.0)


def test_delta_forced_solution_needs_event_driven_scheme(box):
    with pytest.raises(UnsupportedConfigurationError):
        solve_v_delta(AtomCloud.empty(1.0, 7.0), box, 0.5, 0.0, 1.0, SolverConfig(scheme=GRID, L=7.0))


def test_picard_iterates_reach_the_solution(box, rademacher, small_solver):
    # With two atoms every chain has at most two links, so v_2 is already exact.
    cloud = AtomCloud.of(1.0, 7.0, [(0.4, 0.1, 1.0), (0.6, -0.2, -1.0)])
    forcing = (0.2, 0.0, 1.0)
    v = solve_v_delta(cloud, box, *forcing, small_solver, rademacher)
    iterates = picard_iterates(box, rademacher, cloud, 3, small_solver, forcing)
    x = np.linspace(-0.8, 0.8, 9)
    assert len(iterates) == 4
    assert np.allclose(iterates[2].value(1.0, x), v.value(1.0, x), atol=1e-12)
    assert np.allclose(iterates[3].value(1.0, x), v.value(1.0, x), atol=1e-12)


@pytest.mark.parametrize("n_max", [0, 7])
def test_picard_depth_is_bounded(box, rademacher, small_solver, n_max):
    with pytest.raises(ConfigurationError):
        picard_iterates(box, rademacher, AtomCloud.empty(1.0, 7.0), n_max, small_solver, (0.2, 0.0, 1.0))


def test_gaussian_model_without_noise_stays_at_one(box, rng):
    cfg = SolverConfig(scheme=GRID, T=0.5, L=3.0, dx=0.05)
    field = solve_U_gaussian(rng, box, 0.0, cfg)
    assert np.all(field.value(0.5, np.linspace(-2.0, 2.0, 9)) == 1.0)


def test_gaussian_model_needs_the_grid_scheme(box, rng, small_solver):
    with pytest.raises(UnsupportedConfigurationError):
        solve_U_gaussian(rng, box, 1.0, small_solver)


def test_mean_of_the_solution_is_one(box, rademacher, small_solver, rng):
    x = np.array([-2.0, 0.0, 1.5])
    values = np.array([solve_u(sample_atoms(rademacher, 1.0, 7.0, rng), box, rademacher, small_solver).value(1.0, x)
                       for _ in range(600)])
    se = values.std(axis=0, ddof=1) / np.sqrt(len(values))
    assert np.all(np.abs(values.mean(axis=0) - 1.0) < 4.0 * se)


def test_solution_is_stationary_in_space(box, rademacher, small_solver, rng):
    values = np.array([solve_u(sample_atoms(rademacher, 1.0, 7.0, rng), box, rademacher, small_solver).value(
        1.0, np.array([-3.0, 3.0])) for _ in range(400)])
    assert stats.ks_2samp(values[:, 0], values[:, 1]).pvalue > 0.01


def backward_cone(cloud, t, x, reach, margin):
    """
    :returns the indices of the atoms which can reach (t, x), directly or through later atoms, when every atom
    spreads at unit speed plus the kernel reach (widened by margin).
    """
    kept = set()
    for i in reversed(range(len(cloud))):
        time, position = cloud.times[i], cloud.positions[i]
        if time < t and abs(x - position) < t - time + reach + margin:
            kept.add(i)
            continue
        if any(cloud.times[j] > time and abs(cloud.positions[j] - position) < cloud.times[j] - time + 2.0 * reach +
               margin for j in kept):
            kept.add(i)
    return sorted(kept)


def test_atoms_outside_the_backward_cone_do_not_matter(box, small_solver, rng):
    spec = noise_preset("rademacher(rate=4)")
    near = sample_atoms(spec, 1.0, 2.0, rng)
    far = [(time, position + 6.0, jump) for time, position, jump in sample_atoms(spec, 1.0, 1.0, rng).atoms()]
    cloud = AtomCloud.of(1.0, 7.0, list(near.atoms()) + far)
    kept = backward_cone(cloud, 1.0, 0.0, box.reach, small_solver.dx)
    assert 0 < len(kept) <= len(near) < len(cloud)
    reduced = AtomCloud.of(1.0, 7.0, [(cloud.times[i], cloud.positions[i], cloud.jumps[i]) for i in kept])
    full = solve_u(cloud, box, spec, small_solver).value(1.0, 0.0)
    assert solve_u(reduced, box, spec, small_solver).value(1.0, 0.0) == full


def test_mean_of_the_delta_forced_solution(box, rademacher, small_solver, rng):
    r, y, z = 0.2, 0.0, 2.0
    x = np.array([0.0, 0.5])
    values = np.array([solve_v_delta(sample_atoms(rademacher, 1.0, 7.0, rng), box, r, y, z, small_solver,
                                     rademacher).value(1.0, x) for _ in range(600)])
    se = values.std(axis=0, ddof=1) / np.sqrt(len(values))
    # z G_{0.8}(x) = 1 at both positions
    assert np.all(np.abs(values.mean(axis=0) - 1.0) < 4.0 * se)


def test_gaussian_model_variance_at_first_order(box, rng):
    cfg = SolverConfig(scheme=GRID, T=1.0, L=2.0, dx=0.05)
    m2 = 0.04
    deviations = np.array([solve_U_gaussian(rng, box, m2, cfg).value(1.0, 0.0) - 1.0 for _ in range(2000)])
    squares = deviations ** 2
    se = squares.std(ddof=1) / np.sqrt(len(squares))
    expected = m2 * q_t(box, 1.0)
    assert abs(squares.mean() - expected) <= 4.0 * se + 5.0 * cfg.dx * expected


def test_gaussian_model_is_stationary_in_space(box, rng):
    cfg = SolverConfig(scheme=GRID, T=1.0, L=5.0, dx=0.05)
    values = np.array([solve_U_gaussian(rng, box, 1.0, cfg).value(1.0, np.array([-2.5, 2.5])) for _ in range(400)])
    assert stats.ks_2samp(values[:, 0], values[:, 1]).pvalue > 0.01


def test_schemes_agree_pointwise(box, rademacher, rng):
    cloud = sample_atoms(rademacher, 1.0, 7.0, rng)
    grid = SolverConfig(scheme=GRID, T=1.0, L=7.0, dx=0.01)
    x = np.linspace(-3.0, 3.0, 20)
    event = solve_u(cloud, box, rademacher, SolverConfig(T=1.0, L=7.0, dx=0.01)).value(1.0, x)
    lattice = solve_u(cloud, box, rademacher, grid).value(1.0, x)
    assert np.max(np.abs(lattice - event) / np.maximum(np.abs(event), 1.0)) <= 5.0 * grid.dx


def test_spatial_integral_is_additive(box, rademacher, small_solver, rng):
    field = solve_u(sample_atoms(rademacher, 1.0, 7.0, rng), box, rademacher, small_solver)
    left, right = field.spatial_integral(1.0, -4.0, 0.0), field.spatial_integral(1.0, 0.0, 4.0)
    assert left + right == pytest.approx(spatial_average(field, 1.0, 4.0), abs=1e-12)
    assert field.spatial_integral(1.0, -4.0, -1.5) + field.spatial_integral(1.0, -1.5, 4.0) == pytest.approx(
        left + right, abs=1e-12)


def test_picard_iterates_contract(box, rademacher, small_solver, rng):
    x = np.linspace(-0.75, 0.75, 31)
    forcing = (0.1, 0.0, 1.0)
    earlier, later = [], []
    for _ in range(100):
        cloud = sample_atoms(rademacher, 1.0, 7.0, rng)
        v = [iterate.value(1.0, x) for iterate in picard_iterates(box, rademacher, cloud, 3, small_solver, forcing)]
        earlier.append(np.max(np.abs(v[2] - v[1])))
        later.append(np.max(np.abs(v[3] - v[2])))
    assert np.mean(later) < np.mean(earlier)
