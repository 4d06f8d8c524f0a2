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

from hamlevy.core.exception import DomainError, UnsupportedConfigurationError
from hamlevy.core.levy_noise import AtomCloud, sample_atoms
from hamlevy.core.malliavin import (REPRESENTATION_TOLERANCE, DifferenceGrid, assess_key_ratios, derivative_sample,
                                    difference_D, difference_D2, exact_zero_check, key_bound_D, key_bound_D2,
                                    key_grid_D, key_grid_D2, outside_cone_atoms, poincare_check, poincare_grid,
                                    poincare_samples, ratio_trends, representation_check, verify_key_D,
                                    verify_key_D2)
from hamlevy.core.report import ExperimentReport, Status
from hamlevy.core.solver import GRID, SolverConfig, solve_u

PROBE = (1.0, 0.0)


@pytest.fixture
def cloud(rademacher, small_solver, rng):
    return sample_atoms(rademacher, small_solver.T, small_solver.L, rng)


def test_first_difference_of_the_empty_cloud(box, rademacher, small_solver):
    empty = AtomCloud.empty(1.0, 7.0)
    assert difference_D(empty, box, rademacher, small_solver, (0.2, 0.0, 1.0), PROBE) == pytest.approx(0.5, abs=1e-12)
    assert difference_D(empty, box, rademacher, small_solver, (0.2, 0.0, -2.0), PROBE) == pytest.approx(-1.0,
                                                                                                       abs=1e-12)


def test_difference_vanishes_for_late_atoms(box, rademacher, small_solver, cloud):
    assert difference_D(cloud, box, rademacher, small_solver, (0.9, 0.0, 1.0), (0.5, 0.0)) == 0.0
    assert difference_D2(cloud, box, rademacher, small_solver, (0.2, 0.0, 1.0), (0.9, 0.1, 1.0), (0.5, 0.0)) == 0.0


def test_difference_is_exactly_zero_outside_the_cone(box, rademacher, small_solver, cloud):
    field = solve_u(cloud, box, rademacher, small_solver)
    for atom in outside_cone_atoms(box, PROBE, small_solver.L):
        assert difference_D(cloud, box, rademacher, small_solver, atom, PROBE, field) == 0.0
        assert difference_D2(cloud, box, rademacher, small_solver, atom, (0.5, 0.0, 1.0), PROBE, field) == 0.0


def test_derivative_samples_carry_their_atoms(box, rademacher, small_solver, cloud):
    late = derivative_sample(cloud, box, rademacher, small_solver, [(0.9, 0.0, 1.0)], (0.5, 0.0))
    assert late.value == 0.0
    assert late.order == 1
    assert late.probe == (0.5, 0.0)
    empty = AtomCloud.empty(1.0, 7.0)
    pair = derivative_sample(empty, box, rademacher, small_solver, [(0.2, 0.0, 1.0), (0.5, 0.1, 1.0)], PROBE)
    assert pair.order == 2
    assert pair.value == difference_D2(empty, box, rademacher, small_solver, (0.2, 0.0, 1.0), (0.5, 0.1, 1.0), PROBE)
    with pytest.raises(DomainError):
        derivative_sample(empty, box, rademacher, small_solver, [], PROBE)


def test_second_difference_is_symmetric(box, rademacher, small_solver, cloud):
    first, second = (0.3, 0.1, 1.0), (0.6, -0.2, -1.0)
    assert difference_D2(cloud, box, rademacher, small_solver, first, second, PROBE) == \
        difference_D2(cloud, box, rademacher, small_solver, second, first, PROBE)


@pytest.mark.parametrize("atoms", [
    [(0.3, 0.1, 1.0), (0.3, 0.1, 1.0)],
    [(0.3, 8.0, 1.0), (0.5, 0.0, 1.0)],
    [(0.3, 0.0, 0.0), (0.5, 0.0, 1.0)],
    [(0.0, 0.1, 1.0), (0.5, 0.0, 1.0)],
])
def test_invalid_added_atoms(box, rademacher, small_solver, atoms):
    empty = AtomCloud.empty(1.0, 7.0)
    with pytest.raises(DomainError):
        difference_D2(empty, box, rademacher, small_solver, atoms[0], atoms[1], PROBE)


def test_atoms_at_time_zero_are_rejected_before_solving(box, rademacher, small_solver, monkeypatch):
    empty = AtomCloud.empty(1.0, 7.0)
    monkeypatch.setattr("hamlevy.core.malliavin.solve_u", lambda *args: pytest.fail("solved an invalid atom"))
    with pytest.raises(DomainError, match="outside the window"):
        difference_D(empty, box, rademacher, small_solver, (0.0, 0.0, 1.0), PROBE)


def test_outside_cone_atoms_geometry(box):
    atoms = outside_cone_atoms(box, PROBE, 7.0)
    assert len(atoms) == 12
    for r, y, z in atoms:
        assert abs(y - PROBE[1]) > (PROBE[0] - r) + box.reach
        assert z == 1.0
    assert len(outside_cone_atoms(box, PROBE, 2.0)) == 4
    assert outside_cone_atoms(box, PROBE, 1.0) == []


def test_exact_zero_check_passes(box, rademacher, small_solver):
    report = exact_zero_check(box, rademacher, small_solver, n=3, seed=7)
    assert report.status == Status.PASS
    assert report.value("nonzero_D_outside_cone", t=1.0) == 0
    assert report.value("nonzero_D2_outside_cone", t=1.0) == 0


@pytest.mark.parametrize("count", [0, 2])
def test_representation_matches_the_difference(box, rademacher, count):
    cfg = SolverConfig(T=1.0, L=7.0, dx=0.05, quadrature_step=1e-3)
    base = [(0.2, 0.1, 1.0), (0.6, -0.2, -0.5)][:count]
    difference, integral = representation_check(AtomCloud.of(1.0, 7.0, base), box, rademacher, cfg,
                                                (0.4, 0.05, 1.0), PROBE)
    assert difference != 0.0
    assert abs(difference - integral) <= REPRESENTATION_TOLERANCE


def test_representation_needs_compact_kernels_and_events(box, riesz, rademacher):
    empty = AtomCloud.empty(1.0, 7.0)
    with pytest.raises(UnsupportedConfigurationError):
        representation_check(empty, riesz, rademacher, SolverConfig(T=1.0, L=7.0), (0.4, 0.0, 1.0), PROBE)
    with pytest.raises(UnsupportedConfigurationError):
        representation_check(empty, box, rademacher, SolverConfig(scheme=GRID, T=1.0, L=7.0), (0.4, 0.0, 1.0), PROBE)


def test_key_grids_stay_inside_the_cone(box):
    atoms = key_grid_D(box, 1.0)
    assert len(atoms) == 25
    for r, y, _ in atoms:
        assert abs(y) < (1.0 - r) + box.reach
    pairs = key_grid_D2(box, 1.0)
    assert len(pairs) == 27
    assert all(second[0] == pytest.approx(0.6) for _, second in pairs)


def test_key_bound_of_the_first_difference(box):
    assert key_bound_D(box, PROBE, (0.2, 0.0, 1.0)) == pytest.approx(0.5)
    assert key_bound_D(box, PROBE, (0.2, 0.0, -2.0)) == pytest.approx(1.0)
    assert key_bound_D(box, PROBE, (0.2, 3.0, 1.0)) == 0.0


def test_h_norm_of_a_constant(rademacher):
    grid = DifferenceGrid.build(rademacher, 1.0, -1.0, 1.0, nodes=2, cells=4)
    assert grid.shape == (2, 4, len(grid.jumps))
    assert len(list(grid.atoms())) == 8 * len(grid.jumps)
    expected = 1.0 * 2.0 * grid.jump_weights.sum() * 9.0
    assert grid.h_norm_sq(np.full(grid.shape, 3.0)) == pytest.approx(expected)


def test_poincare_check_statuses(rademacher, rng):
    grid = DifferenceGrid.build(rademacher, 1.0, -1.0, 1.0, nodes=2, cells=4)
    atoms = int(np.prod(grid.shape))
    samples = rng.standard_normal(4000)
    # E||DF||^2 = 2 Var(F)
    scale = np.sqrt(1.0 / grid.jump_weights.sum())
    report = poincare_check(samples, np.full((4000, atoms), scale), rademacher, grid)
    assert report.status == Status.PASS
    assert report.value("energy_DF") == pytest.approx(2.0)

    report = poincare_check(samples, np.zeros((4000, atoms)), rademacher, grid)
    assert report.status == Status.FAIL

    spike = np.zeros((200, atoms))
    spike[0] = 10.0
    report = poincare_check(samples[:200], spike, rademacher, grid)
    assert report.status == Status.INCONCLUSIVE


def test_key_bound_of_the_second_difference(box):
    first, second = (0.3, 0.1, 1.0), (0.6, -0.1, 1.0)
    assert key_bound_D2(box, PROBE, first, second) == key_bound_D2(box, PROBE, second, first)
    assert key_bound_D2(box, PROBE, first, second) > 0.0
    assert key_bound_D2(box, PROBE, (0.5, 0.1, 1.0), (0.5, -0.1, 1.0)) == 0.0


@pytest.mark.parametrize("columns, bounds, status", [
    ([1.0, 2.0, 3.0], [1.0, 2.0, 3.0], Status.PASS),
    ([1.0, 1.0, 10.0], [1.0, 1.0, 1.0], Status.FAIL),
    ([1.0, 1.0, 5.0], [1.0, 1.0, 1e-6], Status.PASS),
    ([1.0, 1.0], [0.0, 0.0], Status.INCONCLUSIVE),
])
def test_key_ratio_statuses(columns, bounds, status):
    samples = np.tile(columns, (100, 1))
    labels = [str(j) for j in range(len(columns))]
    report = assess_key_ratios(samples, bounds, 2.0, labels, ExperimentReport("malliavin-verify"), 1.0)
    assert report.status == status
    assert len([row for row in report.rows if row.statistic.startswith("norm_D[")]) == len(columns)


def test_negligible_bounds_are_left_out():
    samples = np.tile([1.0, 1.0, 5.0], (100, 1))
    report = assess_key_ratios(samples, [1.0, 1.0, 1e-6], 2.0, ["a", "b", "c"],
                               ExperimentReport("malliavin-verify"), 1.0)
    assert report.value("ratio[c]") == 0.0
    assert report.value("max_over_median") == pytest.approx(1.0)


DISTANCES = [0.8, 0.4, 0.0, 0.4, 0.8]


@pytest.mark.parametrize("columns, status", [
    ([2.0, 2.1, 1.9, 2.05, 1.95], Status.PASS),
    ([2.0, 2.0, 2.0, 2.0, 2.0], Status.PASS),
    # bounded (max <= 5 x median) but growing with the distance to the cone axis
    ([4.0, 3.0, 2.0, 3.0, 4.0], Status.FAIL),
])
def test_key_ratios_without_a_trend_in_y(columns, status):
    samples = np.tile(columns, (100, 1))
    labels = [str(j) for j in range(len(columns))]
    report = assess_key_ratios(samples, [1.0] * len(columns), 2.0, labels, ExperimentReport("malliavin-verify"),
                               1.0, groups=[(0.5, distance) for distance in DISTANCES])
    assert report.status == status
    trend = [row for row in report.rows if row.statistic == "trend_slope[r=0.5]"]
    assert len(trend) == 1 and trend[0].status == status
    if status == Status.FAIL:
        assert report.value("max_over_median") <= 5.0
        assert trend[0].value == pytest.approx(2.5)


def test_trend_fits_per_time():
    ratios = [1.0, 2.0, 3.0, 1.0, 1.0, None]
    groups = [(0.2, 0.0), (0.2, 0.5), (0.2, 1.0), (0.4, 0.0), (0.4, 0.5), (0.4, 1.0)]
    fits = ratio_trends(ratios, groups)
    # the second time keeps only two distinct distances
    assert len(fits) == 1
    assert fits[0].r == 0.2
    assert fits[0].slope == pytest.approx(2.0)
    assert fits[0].points == 3
    assert not fits[0].contains_zero()


def test_key_estimates_of_the_first_difference(box, rademacher, small_solver):
    probes = key_grid_D(box, 1.0, points=2)
    report = verify_key_D(box, rademacher, small_solver, 2.0, probes, n=6, seed=1)
    norms = [row.value for row in report.rows if row.statistic.startswith("norm_D[")]
    assert len(norms) == len(probes)
    assert all(norm > 0.0 for norm in norms)


def test_key_estimates_of_the_second_difference(box, rademacher, small_solver):
    pairs = key_grid_D2(box, 1.0, points=2)
    report = verify_key_D2(box, rademacher, small_solver, 2.0, pairs, n=4, seed=1)
    assert report.experiment == "malliavin-verify"
    assert len([row for row in report.rows if row.statistic.startswith("ratio[")]) == len(pairs) == 8


def test_poincare_samples_pair_averages_with_differences(box, rademacher, small_solver):
    grid = poincare_grid(box, rademacher, small_solver, 0.5, 1.0, nodes=2, cells=4)
    assert grid.shape[:2] == (2, 4)
    assert grid.positions.min() > -2.5 and grid.positions.max() < 2.5
    samples, differences = poincare_samples(box, rademacher, small_solver, 0.5, 1.0, grid, n=3, seed=2)
    assert samples.shape == (3,)
    assert differences.shape == (3, int(np.prod(grid.shape)))
    assert np.all(np.isfinite(differences))
