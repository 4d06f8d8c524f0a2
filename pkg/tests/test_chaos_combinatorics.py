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

from hamlevy.core.chaos_combinatorics import (ChaosKernelEval, DiscreteSpace, contraction, isometry_check,
                                              multiple_integral, product_formula_check, random_kernel,
                                              skorohod_symmetrization, symmetrize, truncated_second_moment,
                                              truncated_second_moment_gaussian, vanishing_contraction_check)
from hamlevy.core.exception import ChaosError, ConfigurationError, DomainError
from hamlevy.core.kernels import q_t
from hamlevy.core.report import Status


@pytest.fixture
def space():
    return DiscreteSpace(np.array([0.4, 0.9, 1.3, 0.7]))


@pytest.mark.parametrize("masses", [[], [1.0, 0.0], [1.0, -2.0], [1.0] * 9, [1.0, np.inf]])
def test_invalid_spaces(masses):
    with pytest.raises(ChaosError):
        DiscreteSpace(np.array(masses))


@given(seed=st.integers(0, 2 ** 32 - 1), n=st.integers(1, 4))
@settings(max_examples=25, deadline=None)
def test_symmetrize_is_an_idempotent_projection(seed, n):
    f = np.random.default_rng(seed).standard_normal((3,) * n)
    h = symmetrize(f, n)
    assert np.allclose(symmetrize(h, n), h, atol=1e-12)
    if n > 1:
        assert np.allclose(h, np.swapaxes(h, 0, n - 1), atol=1e-12)
    assert math.isclose(h.sum(), f.sum(), rel_tol=1e-9, abs_tol=1e-9)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_skorohod_symmetrization_is_the_full_symmetrization(rng, n):
    g = rng.standard_normal((3,) * (n + 1))
    assert np.allclose(skorohod_symmetrization(g), symmetrize(g, n + 1), atol=1e-12)


def test_contraction_integrates_and_identifies(space, rng):
    f = symmetrize(rng.standard_normal((4, 4)), 2)
    g = rng.standard_normal(4)
    assert contraction(f, g, 0, 0, space).shape == (4, 4, 4)
    assert np.allclose(contraction(f, g, 1, 1, space), f @ (space.masses * g))
    assert np.allclose(contraction(f, g, 1, 0, space), f * g[:, None])


@pytest.mark.parametrize("k, l", [(2, 0), (1, 2), (-1, 0)])
def test_contraction_indices_are_checked(space, k, l):
    with pytest.raises(ChaosError):
        contraction(np.ones((4, 4)), np.ones(4), k, l, space)


def test_first_order_integral_is_the_compensated_sum(space):
    counts = np.array([0, 2, 1, 5])
    f = np.array([1.0, -2.0, 0.5, 3.0])
    assert multiple_integral(counts, space, f) == pytest.approx(float(np.sum(f * (counts - space.masses))))


def test_second_order_integral_expands_the_factorial_measure(space, rng):
    counts = np.array([3, 0, 2, 1])
    f = symmetrize(rng.standard_normal((4, 4)), 2)
    mu = space.masses
    off_diagonal = sum(f[i, j] * counts[i] * counts[j] for i in range(4) for j in range(4) if i != j)
    diagonal = sum(f[i, i] * counts[i] * (counts[i] - 1) for i in range(4))
    expected = off_diagonal + diagonal - 2.0 * counts @ f @ mu + mu @ f @ mu
    assert multiple_integral(counts, space, f) == pytest.approx(expected, rel=1e-12, abs=1e-12)


def test_off_diagonal_integral_agrees_for_kernels_vanishing_on_diagonals(space, rng):
    f = symmetrize(rng.standard_normal((4, 4)), 2)
    np.fill_diagonal(f, 0.0)
    counts = space.sample_counts(rng)
    assert multiple_integral(counts, space, f, off_diagonal=True) == pytest.approx(
        multiple_integral(counts, space, f), rel=1e-12, abs=1e-12)


def test_off_diagonal_integral_rejects_diagonal_kernels(space):
    with pytest.raises(ChaosError):
        multiple_integral(np.ones(4), space, np.diag(np.ones(4)), off_diagonal=True)


@pytest.mark.parametrize("n, m", [(1, 1), (1, 2), (2, 2), (1, 3)])
def test_product_formula_holds_on_every_draw(space, rng, n, m):
    f = rng.standard_normal((4,) * n)
    g = rng.standard_normal((4,) * m)
    report = product_formula_check(f, g, n, m, 50, space, rng)
    assert report.status == Status.PASS
    assert report.value("max_abs_discrepancy") <= 1e-9 * (1.0 + report.value("max_abs_lhs"))


def test_product_formula_rank_limit(space):
    with pytest.raises(ChaosError):
        product_formula_check(np.ones((4,) * 4), np.ones((4,) * 3), 4, 3, 1, space, np.random.default_rng(0))


def test_random_kernel_support(space, rng):
    f = random_kernel(space, 2, rng, support=[0, 1])
    assert np.all(f[2:, :] == 0.0) and np.all(f[:, 2:] == 0.0)
    assert np.allclose(f, f.T)


def test_disjoint_supports_have_no_contractions(space, rng):
    report = vanishing_contraction_check(2, 2, 30, space, rng)
    assert report.status == Status.PASS
    assert report.value("nonzero_contractions") == 0


def test_vanishing_contractions_need_two_cells(rng):
    with pytest.raises(ChaosError):
        vanishing_contraction_check(1, 1, 1, DiscreteSpace(np.array([1.0])), rng)


def test_isometry_within_five_standard_errors(rng):
    space = DiscreteSpace(np.array([0.5, 1.0, 0.8]))
    report = isometry_check([1, 2], 20000, space, rng)
    for row in report.rows:
        if row.statistic.startswith("E[") and row.stderr:
            expected = report.value("expected" + row.statistic[1:])
            assert abs(row.value - expected) <= 5.0 * row.stderr


@pytest.mark.parametrize("ranks, draws, error", [([0, 1], 10, ChaosError), ([4], 10, ChaosError),
                                                 ([1], 1, ConfigurationError)])
def test_isometry_arguments(space, rng, ranks, draws, error):
    with pytest.raises(error):
        isometry_check(ranks, draws, space, rng)


def test_first_chaos_kernel_is_the_smoothed_wave_kernel(box):
    chaos = ChaosKernelEval(box, 1.0, 0.0)
    # z/2 times the mass of k over [y - x - (t - r), y - x + (t - r)]
    assert chaos.f_star([0.2], [0.0], [2.0]) == pytest.approx(1.0)
    assert chaos.f_star([0.2], [1.1], [1.0]) == pytest.approx(0.5 * 0.2)
    assert chaos.f_star([0.2], [2.0], [1.0]) == 0.0
    assert chaos.f_star([1.5], [0.0], [1.0]) == 0.0


def test_pointwise_chaos_kernels(box):
    chaos = ChaosKernelEval(box, 1.0, 0.0)
    assert chaos.f([0.2, 0.6], [0.0, 0.1]) == 0.25
    assert chaos.f([0.6, 0.2], [0.0, 0.1]) == 0.0
    assert chaos.f([0.2, 0.6], [0.0, 0.5]) == 0.0
    assert chaos.g(0.1, 0.0, [0.5], [0.1]) == 0.25


def test_smoothed_chains_started_at_a_forcing_point(box):
    chaos = ChaosKernelEval(box, 1.0, 0.0)
    # the cone of width 0.8 holds the whole support of k
    assert chaos.g_star(0.2, 0.0, 2.0, [], [], []) == pytest.approx(chaos.f_star([0.2], [0.0], [2.0]), rel=1e-9)
    assert chaos.g_star(0.2, 0.0, 1.0, [0.5], [0.0], [-1.0]) == \
        -chaos.f_star([0.2, 0.5], [0.0, 0.0], [1.0, 1.0])
    assert chaos.g_star(0.2, 0.0, 1.0, [0.1], [0.0], [1.0]) == 0.0


def test_chaos_kernels_need_positive_time(box):
    with pytest.raises(DomainError):
        ChaosKernelEval(box, 0.0, 0.0)


def test_truncated_second_moment_terms(box, rademacher):
    moment = truncated_second_moment(box, rademacher, 1.0, n_max=2)
    assert len(moment.terms) == 2
    assert moment.value == pytest.approx(1.0 + sum(moment.terms))
    assert moment.remainder >= 0.0
    # the first chaos carries m_2 q_t
    assert moment.terms[0] == pytest.approx(rademacher.m2 * q_t(box, 1.0), rel=2e-2)
    assert 0 < moment.terms[1] < moment.terms[0]


def test_truncation_depth_zero(box, rademacher):
    moment = truncated_second_moment(box, rademacher, 1.0, n_max=0)
    assert moment.value == 1.0
    assert moment.terms == []


def test_gaussian_twin_matches_on_equal_variance(box, rademacher):
    levy = truncated_second_moment(box, rademacher, 1.0, n_max=1)
    gaussian = truncated_second_moment_gaussian(box, 1.0, 1.0, n_max=1)
    assert levy.value == gaussian.value


@pytest.mark.parametrize("t, n_max, error", [(1.0, 5, ConfigurationError), (0.0, 1, DomainError)])
def test_truncated_second_moment_arguments(box, rademacher, t, n_max, error):
    with pytest.raises(error):
        truncated_second_moment(box, rademacher, t, n_max=n_max)


@pytest.mark.parametrize("n", [1, 2, 3])
def test_multiple_integrals_are_centered(space, rng, n):
    f = random_kernel(space, n, rng)
    values = np.array([multiple_integral(space.sample_counts(rng), space, f) for _ in range(20000)])
    assert abs(values.mean()) < 4.0 * values.std(ddof=1) / math.sqrt(len(values))
