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

from hamlevy.core.exception import ConfigurationError, DomainError, ResourceError
from hamlevy.core.levy_noise import (AtomCloud, DiscreteJumpLaw, LevyMeasureSpec, UniformJumpLaw, levy_integral,
                                     sample_atoms)
from hamlevy.core.presets import noise_preset


def test_rademacher_moments(rademacher):
    assert rademacher.mean == 0.0
    assert rademacher.m2 == pytest.approx(1.0)
    assert rademacher.moment(3.0) == pytest.approx(1.0)
    assert rademacher.validate() == []


def test_rate_scales_every_moment():
    spec = noise_preset("rademacher(rate=2.5)")
    assert spec.rate == 2.5
    assert spec.m2 == pytest.approx(2.5)
    assert spec.label() == "rademacher rate=2.5"


@pytest.mark.parametrize("a", [0.5, 1.0, 3.0])
def test_uniform_quadrature_integrates_the_second_moment(a):
    spec = LevyMeasureSpec("uniform", 1.0, UniformJumpLaw(a))
    nodes, weights = spec.jump_quadrature()
    assert np.all(nodes != 0)
    assert math.fsum(weights) == pytest.approx(1.0)
    assert math.fsum(weights * nodes ** 2) == pytest.approx(a * a / 3.0, rel=1e-12)
    assert spec.m2 == pytest.approx(a * a / 3.0)


def test_centered_two_point_is_centered():
    spec = noise_preset("centered-two-point(p=0.25, a=3, b=1)")
    assert spec.mean == pytest.approx(0.0, abs=1e-15)
    assert spec.m2 == pytest.approx(0.25 * 9.0 + 0.75)


def test_two_point_carries_a_drift():
    spec = noise_preset("two-point")
    assert spec.mean == pytest.approx(1.5)


@pytest.mark.parametrize("values, probabilities", [
    ([0.0, 1.0], [0.5, 0.5]),
    ([1.0, -1.0], [0.5, 0.4]),
    ([1.0], [0.5, 0.5]),
    ([], []),
])
def test_discrete_law_rejects_invalid_input(values, probabilities):
    with pytest.raises(ConfigurationError):
        DiscreteJumpLaw(values, probabilities)


def test_negative_rate_is_rejected():
    with pytest.raises(ConfigurationError):
        LevyMeasureSpec("rademacher", -1.0, DiscreteJumpLaw([-1.0, 1.0], [0.5, 0.5]))


def test_sampling_is_reproducible(rademacher):
    first = sample_atoms(rademacher, 1.0, 10.0, np.random.default_rng(7))
    second = sample_atoms(rademacher, 1.0, 10.0, np.random.default_rng(7))
    assert first.identical(second)


def test_sampled_atoms_lie_inside_the_window(rademacher, rng):
    cloud = sample_atoms(rademacher, 2.0, 50.0, rng)
    # 200 atoms expected; five standard deviations either way.
    assert 130 < len(cloud) < 270
    assert np.all((cloud.times > 0) & (cloud.times <= 2.0))
    assert np.all(np.abs(cloud.positions) <= 50.0)
    assert set(np.unique(cloud.jumps)) <= {-1.0, 1.0}
    assert np.all(np.diff(cloud.times) >= 0)


def test_atom_budget_is_enforced(rademacher, rng):
    with pytest.raises(ResourceError):
        sample_atoms(rademacher, 1.0, 1000.0, rng, max_atoms=100)


def test_clouds_keep_time_order():
    cloud = AtomCloud.of(1.0, 5.0, [(0.7, 1.0, 1.0), (0.2, -1.0, -1.0), (0.5, 0.0, 2.0)])
    assert list(cloud.times) == [0.2, 0.5, 0.7]
    assert list(cloud.jumps) == [-1.0, 2.0, 1.0]
    assert len(cloud.with_atoms([(0.1, 0.0, 1.0)])) == 4


@pytest.mark.parametrize("atom", [(1.5, 0.0, 1.0), (0.5, 6.0, 1.0), (0.5, 0.0, 0.0), (0.0, 0.0, 1.0)])
def test_atoms_outside_the_window_are_rejected(atom):
    with pytest.raises(DomainError):
        AtomCloud.of(1.0, 5.0, [atom])


def test_centered_integral_sums_the_jumps(rademacher):
    cloud = AtomCloud.of(1.0, 5.0, [(0.2, -1.0, -1.0), (0.5, 0.0, 1.0), (0.7, 1.0, 1.0)])
    assert levy_integral(cloud, rademacher, lambda t, x: np.ones_like(t)) == pytest.approx(1.0)
    assert levy_integral(cloud, rademacher, lambda t, x: t) == pytest.approx(-0.2 + 0.5 + 0.7)


def test_uncentered_integral_subtracts_the_compensator():
    spec = noise_preset("two-point(p=0.5, a=2, b=1)")
    cloud = AtomCloud.of(1.0, 1.0, [(0.5, 0.0, 2.0)])
    # 2 - m_1 * |(0, 1] x [-1, 1]| with m_1 = 1.5
    assert levy_integral(cloud, spec, lambda t, x: np.ones_like(t)) == pytest.approx(-1.0, rel=1e-10)


def test_empty_cloud_integrates_to_zero(rademacher):
    assert levy_integral(AtomCloud.empty(1.0, 1.0), rademacher, lambda t, x: t) == 0.0


def test_atom_count_is_poisson(rng):
    spec = noise_preset("rademacher(rate=2.5)")
    # mean and variance of the count are both rate * T * 2L = 10
    counts = np.array([len(sample_atoms(spec, 1.0, 2.0, rng)) for _ in range(2000)])
    assert abs(counts.mean() - 10.0) < 4.0 * math.sqrt(10.0 / len(counts))
    assert counts.var(ddof=1) == pytest.approx(10.0, abs=1.5)


@pytest.mark.parametrize("law, phi, norm", [
    ("rademacher", lambda t, x: np.ones_like(t), 2.0),
    ("rademacher", lambda t, x: t + x, 4.0 / 3.0),
    ("uniform(a=1)", lambda t, x: np.cos(np.pi * x), 1.0),
    ("centered-two-point(p=0.25, a=3, b=1)", lambda t, x: t * (x > 0), 1.0 / 3.0),
    ("rademacher(rate=2)", lambda t, x: np.exp(-x * x), math.sqrt(math.pi / 2.0) * math.erf(math.sqrt(2.0))),
])
def test_levy_isometry(rng, law, phi, norm):
    # Var L(phi) = m_2 ||phi||^2 on (0, 1] x [-1, 1]
    spec = noise_preset(law)
    values = np.array([levy_integral(sample_atoms(spec, 1.0, 1.0, rng), spec, phi) for _ in range(4000)])
    squares = values ** 2
    se = squares.std(ddof=1) / math.sqrt(len(values))
    assert abs(values.mean()) < 4.0 * values.std(ddof=1) / math.sqrt(len(values))
    assert abs(squares.mean() - spec.m2 * norm) < 4.0 * se
