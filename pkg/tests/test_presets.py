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

import pytest

from hamlevy.core.exception import ConfigurationError
from hamlevy.core.kernels import BoxKernel, GaussianKernel, RieszKernel
from hamlevy.core.presets import (did_you_mean, kernel_preset, list_presets, noise_preset, parse_preset,
                                  preset_names, KERNEL_PRESETS)


@pytest.mark.parametrize("text, kind, label", [
    ("gaussian", GaussianKernel, "gaussian"),
    ("box", BoxKernel, "box(a=0.5)"),
    ("box(2)", BoxKernel, "box(a=2.0)"),
    ("riesz(alpha=0.3)", RieszKernel, "riesz(alpha=0.3)"),
    (" Riesz ( 0.5 ) ", RieszKernel, "riesz(alpha=0.5)"),
])
def test_kernel_presets(text, kind, label):
    kernel = kernel_preset(text)
    assert isinstance(kernel, kind)
    assert kernel.label() == label


def test_riesz_preset_keeps_the_truncation_radius():
    assert kernel_preset("riesz", truncation_radius=16.0).reach == 16.0


def test_settings_lists_are_rejoined():
    # QSettings hands out "two-point(p=0.5, a=2, b=1)" as three list items.
    spec = noise_preset(["two-point(p=0.5", "a=2", "b=1)"])
    assert spec.mean == pytest.approx(1.5)


@pytest.mark.parametrize("text", [
    "gausian",
    "box(a=x)",
    "box(1, 2)",
    "box(b=1)",
    "riesz(alpha=1.5)",
    "box(a=-1)",
    "(",
])
def test_invalid_kernel_presets(text):
    with pytest.raises(ConfigurationError):
        kernel_preset(text)


@pytest.mark.parametrize("text", [
    "rademacher(p=1)",
    "centered-two-point(p=0.5, a=3, b=1)",
    "two-point(p=1.5)",
    "uniform(a=0)",
    "poisson",
])
def test_invalid_noise_presets(text):
    with pytest.raises(ConfigurationError):
        noise_preset(text)


def test_unknown_presets_are_corrected():
    with pytest.raises(ConfigurationError) as e:
        kernel_preset("gausian")
    assert 'Did you mean "gaussian"?' in str(e.value)


def test_did_you_mean_without_choices():
    assert did_you_mean("anything", []) == ""


def test_parse_preset_fills_defaults():
    name, parameters = parse_preset("box", KERNEL_PRESETS, "kernel/shape")
    assert name == "box"
    assert parameters == {"a": 0.5}


def test_preset_table_lists_every_preset():
    table = list_presets()
    for name in ("gaussian", "box(a=0.5)", "riesz(alpha=0.5)", "rademacher", "uniform(a=1.0)",
                 "centered-two-point(p=0.25, a=3.0, b=1.0)", "two-point(p=0.5, a=2.0, b=1.0)"):
        assert name in table
    assert "m_p" in table
    assert set(preset_names()) == {"gaussian", "box", "riesz", "rademacher", "uniform", "centered-two-point",
                                   "two-point"}
