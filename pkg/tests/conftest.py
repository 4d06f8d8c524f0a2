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

import os
import textwrap

import numpy as np
import pytest
from PyQt5.QtCore import QSettings

from hamlevy import runner
from hamlevy.core.config import WORKERS_ENVIRONMENT
from hamlevy.core.context import Context
from hamlevy.core.kernels import BoxKernel, GaussianKernel, RieszKernel
from hamlevy.core.presets import noise_preset
from hamlevy.core.solver import SolverConfig


@pytest.fixture(autouse=True)
def isolated_preferences(tmp_path, monkeypatch):
    """ Keeps user preferences and the worker environment of the machine out of every test. """
    for settings_format in (QSettings.NativeFormat, QSettings.IniFormat):
        QSettings.setPath(settings_format, QSettings.UserScope, str(tmp_path / "preferences"))
    monkeypatch.delenv(WORKERS_ENVIRONMENT, raising=False)
    monkeypatch.setenv("HOME", str(tmp_path / "home"))


@pytest.fixture
def rng():
    return np.random.default_rng(20240611)


@pytest.fixture
def gaussian():
    return GaussianKernel()


@pytest.fixture
def box():
    return BoxKernel(0.5)


@pytest.fixture
def riesz():
    return RieszKernel(0.5, truncation_radius=16.0)


@pytest.fixture
def rademacher():
    return noise_preset("rademacher")


@pytest.fixture
def small_solver():
    """ An event-driven solver on a small window, sized for the box kernel. """
    return SolverConfig(T=1.0, L=7.0, dx=0.05)


@pytest.fixture
def write_config(tmp_path):
    """ Writes an INI experiment file and returns its path. """

    def write(content: str, name: str = "experiment.ini") -> str:
        path = tmp_path / name
        path.write_text(textwrap.dedent(content))
        return str(path)

    return write


@pytest.fixture
def context():
    """ The application context with the bundled experiment plugins. """
    return Context("hamlevy", os.path.dirname(os.path.abspath(runner.__file__)))
