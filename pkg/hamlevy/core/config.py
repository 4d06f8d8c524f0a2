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
import os
from dataclasses import dataclass, field
from typing import Dict, List, Tuple

from PyQt5.QtCore import QSettings

from hamlevy.core.exception import ConfigurationError
from hamlevy.core.kernels import KernelSpec
from hamlevy.core.levy_noise import LevyMeasureSpec
from hamlevy.core.presets import did_you_mean, kernel_preset, noise_preset
from hamlevy.core.solver import GRID, SolverConfig

WORKERS_ENVIRONMENT = "HAM_LEVY_WORKERS"

EXPERIMENT_KINDS = ("variance-scan", "covariance", "qclt", "fclt", "ergodic", "malliavin-verify", "chaos-verify",
                    "gamma-audit")

FORMATS = ("csv", "json", "both")


class Config(QSettings):
    """ The user preferences of the application. """

    def __init__(self):
        super().__init__('net.hamlevy', 'hamlevy')

    def isDebugModeEnabled(self) -> bool:
        """ Returns whether debug mode is enabled (True = enabled, False = disabled). """
        return self.value('debug', "False") == "True"

    def setDebugMode(self, status: bool):
        """ Enables/Disables debug mode. """
        # QSettings does not round-trip booleans for every backend; store "True"/"False" instead.
        self.setValue('debug', "True" if status else "False")

    def getWorkers(self) -> int:
        """ Returns the stored default worker count or None when no default was stored. """
        workers = self.value('workers')
        return int(workers) if workers else None

    def setWorkers(self, workers: int):
        self.setValue('workers', str(workers))

    def setPluginStatus(self, id: str, status: bool):
        """ Sets the status of the specified plugin to enabled/disabled. """
        self.setValue('plugin.{}'.format(id.lower()), str(status))

    def getPluginStatus(self, id: str) -> bool:
        """ Returns whether the plugin is enabled/disabled. When no status was stored True will be returned. """
        status = self.value('plugin.{}'.format(id.lower()))
        return status == "True" or status is None


def _as_list(value) -> List[str]:
    """ QSettings returns comma separated values as string lists; accept both forms. """
    if value is None:
        return []
    if isinstance(value, str):
        value = value.split(",")
    return [str(item).strip() for item in value if str(item).strip()]


def _as_text(value) -> str:
    return ",".join(value) if isinstance(value, (list, tuple)) else str(value)


class _Reader(object):
    """ Reads typed values from an INI file and collects diagnostics instead of stopping at the first one. """

    def __init__(self, settings: QSettings):
        self._settings = settings
        self.diagnostics = []

    def has(self, key: str) -> bool:
        return self._settings.contains(key)

    def raw(self, key: str, default=None):
        return self._settings.value(key, default)

    def _convert(self, key: str, default, convert):
        value = self._settings.value(key)
        if value is None or value == "":
            return default
        try:
            return convert(_as_text(value))
        except (TypeError, ValueError):
            self.diagnostics.append("{}: expected {}, got '{}'".format(key, convert.__name__, _as_text(value)))
            return default

    def integer(self, key: str, default: int = None) -> int:
        return self._convert(key, default, int)

    def number(self, key: str, default: float = None) -> float:
        return self._convert(key, default, float)

    def text(self, key: str, default: str = None) -> str:
        value = self._settings.value(key)
        return default if value is None else _as_text(value).strip()

    def numbers(self, key: str, default: Tuple[float, ...] = ()) -> Tuple[float, ...]:
        items = _as_list(self._settings.value(key))
        if not items:
            return tuple(default)
        try:
            return tuple(float(item) for item in items)
        except ValueError:
            self.diagnostics.append("{}: expected a comma separated list of numbers, got '{}'".format(
                key, ",".join(items)))
            return tuple(default)

    def pairs(self, key: str, default: Tuple[Tuple[float, float], ...] = ()) -> Tuple[Tuple[float, float], ...]:
        """ Reads "t:s" items, e.g. "1:1, 2:1". """
        items = _as_list(self._settings.value(key))
        if not items:
            return tuple(default)
        result = []
        for item in items:
            t, _, s = item.partition(":")
            try:
                result.append((float(t), float(s)))
            except ValueError:
                self.diagnostics.append("{}: expected t:s pairs, got '{}'".format(key, item))
        return tuple(result)

    def preset(self, key: str, default: str, parse):
        text = self._settings.value(key, default)
        try:
            return parse(text)
        except ConfigurationError as e:
            self.diagnostics.extend(e.diagnostics)
            return None


def default_workers(preferences: Config = None) -> int:
    """ :returns the worker count from HAM_LEVY_WORKERS, the stored preference or 1. """
    environment = os.environ.get(WORKERS_ENVIRONMENT)
    if environment:
        try:
            return int(environment)
        except ValueError:
            raise ConfigurationError("{}: expected an integer, got '{}'".format(WORKERS_ENVIRONMENT, environment))
    stored = preferences.getWorkers() if preferences is not None else None
    return stored or 1


def experiment_times(kind: str, t: float, time_grid, pairs) -> Tuple[float, ...]:
    """
    :returns the times an experiment evaluates the solution at: the time grid (fclt), the pair times (covariance)
    or the single time t.
    """
    if kind == "fclt" and time_grid:
        return tuple(time_grid)
    if kind == "covariance" and pairs:
        return tuple(time for pair in pairs for time in pair)
    return (t,)


@dataclass(frozen=True)
class ExperimentConfig:
    """ A validated experiment configuration. """
    kind: str
    kernel: KernelSpec
    noise: LevyMeasureSpec
    solver: SolverConfig
    p: float = 2.0
    radii: Tuple[float, ...] = (8.0, 16.0, 32.0, 64.0)
    t: float = 1.0
    time_grid: Tuple[float, ...] = (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)
    pairs: Tuple[Tuple[float, float], ...] = ((1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.5, 1.0))
    p_prime: float = 2.0
    replicates: int = 10000
    seed: int = 0
    workers: int = 1
    out: str = "results"
    format: str = "both"
    options: Dict[str, str] = field(default_factory=dict)
    source: str = None

    @property
    def T(self) -> float:
        return self.solver.T

    @property
    def times(self) -> Tuple[float, ...]:
        return experiment_times(self.kind, self.t, self.time_grid, self.pairs)

    @classmethod
    def load(cls, path: str, workers: int = None, seed: int = None, out: str = None, format: str = None,
             options: Dict[str, str] = None, preferences: Config = None) -> 'ExperimentConfig':
        """
        Reads an INI experiment file. Command line values (workers, seed, out, format, options) override the file.
        :raises ConfigurationError: listing every invalid or incoherent field.
        """
        if not os.path.isfile(path):
            raise ConfigurationError("Configuration file '{}' does not exist".format(path))
        settings = QSettings(path, QSettings.IniFormat)
        if settings.status() != QSettings.NoError:
            raise ConfigurationError("Configuration file '{}' can not be parsed".format(path))
        reader = _Reader(settings)
        file_options = {}
        settings.beginGroup("options")
        for key in settings.childKeys():
            file_options[key] = _as_text(settings.value(key))
        settings.endGroup()
        file_options.update(options or {})
        values = dict(
            kind=reader.text("experiment/kind", ""),
            seed=seed if seed is not None else reader.integer("experiment/seed", 0),
            replicates=reader.integer("experiment/replicates", 10000),
            workers=workers if workers is not None else reader.integer("experiment/workers", None),
            out=out or reader.text("experiment/out", "results"),
            format=format or reader.text("experiment/format", "both"),
            p=reader.number("model/p", 2.0),
            radii=reader.numbers("model/radii", (8.0, 16.0, 32.0, 64.0)),
            t=reader.number("model/time", 1.0),
            time_grid=reader.numbers("model/time_grid", (0.5, 1.0, 1.5, 2.0, 2.5, 3.0)),
            pairs=reader.pairs("model/pairs", ((1.0, 1.0), (2.0, 1.0), (2.0, 2.0), (1.5, 1.0))),
            p_prime=reader.number("model/p_prime", 2.0),
            options=file_options,
            source=path)
        truncation = reader.number("kernel/truncation_radius", 64.0)
        kernel = reader.preset("kernel/shape", "gaussian", lambda text: kernel_preset(text, truncation))
        noise = reader.preset("noise/law", "rademacher", noise_preset)
        if values["workers"] is None:
            try:
                values["workers"] = default_workers(preferences)
            except ConfigurationError as e:
                reader.diagnostics.extend(e.diagnostics)
                values["workers"] = 1
        solver = None
        if kernel is not None:
            times = experiment_times(values["kind"], values["t"], values["time_grid"], values["pairs"])
            horizon = reader.number("model/horizon", max(times))
            radii = values["radii"] or (0.0,)
            window = reader.number("model/window", max(radii) + horizon + kernel.reach)
            solver_values = dict(
                scheme=reader.text("solver/scheme", "event-driven"),
                T=horizon,
                L=window,
                dx=reader.number("solver/dx", 0.05),
                dt=reader.number("solver/dt", None),
                quadrature_step=reader.number("solver/quadrature_step", None),
                n_max=reader.integer("solver/n_max", 3),
                max_atoms=reader.integer("solver/max_atoms", 1000000))
            try:
                solver = SolverConfig(**solver_values)
            except ConfigurationError as e:
                reader.diagnostics.extend(e.diagnostics)
        if reader.diagnostics or kernel is None or noise is None or solver is None:
            diagnostics = reader.diagnostics or ["configuration is incomplete"]
            raise ConfigurationError(diagnostics[0], diagnostics)
        return cls.create(kernel=kernel, noise=noise, solver=solver, **values)

    @classmethod
    def create(cls, **values) -> 'ExperimentConfig':
        """ Builds and validates a configuration. """
        config = cls(**values)
        diagnostics = config.validate()
        if diagnostics:
            raise ConfigurationError(diagnostics[0], diagnostics)
        return config

    def validate(self) -> List[str]:
        """ :returns a list of field-level diagnostics, empty when the configuration is coherent. """
        diagnostics = []
        if self.kind not in EXPERIMENT_KINDS:
            diagnostics.append("experiment/kind: unknown experiment '{}'.{}".format(
                self.kind, did_you_mean(self.kind, EXPERIMENT_KINDS)))
        if self.replicates < 1:
            diagnostics.append("experiment/replicates: must be positive, got {}".format(self.replicates))
        if self.workers < 1:
            diagnostics.append("experiment/workers: must be positive, got {}".format(self.workers))
        if self.seed < 0:
            diagnostics.append("experiment/seed: must be a non-negative integer, got {}".format(self.seed))
        if self.format not in FORMATS:
            diagnostics.append("experiment/format: expected one of {}, got '{}'".format(", ".join(FORMATS),
                                                                                        self.format))
        diagnostics.extend(self.noise.validate())
        if not self.p > 1 or not math.isfinite(self.noise.moment(self.p)) \
                or not math.isfinite(self.noise.moment(2 * self.p)):
            diagnostics.append("model/p: need p > 1 with finite m_p and m_2p, got p={}".format(self.p))
        alpha = self.kernel.beta() - 1.0
        if self.kernel.is_riesz() and self.kind in ("qclt", "gamma-audit") and not self.p > 2.0 / (2.0 - alpha):
            diagnostics.append("model/p: Riesz kernels require p > 2/(2-alpha) = {:.4f}, got {}".format(
                2.0 / (2.0 - alpha), self.p))
        if not self.radii or any(R <= 0 for R in self.radii):
            diagnostics.append("model/radii: expected positive radii, got {}".format(list(self.radii)))
        elif list(self.radii) != sorted(self.radii):
            diagnostics.append("model/radii: must be increasing, got {}".format(list(self.radii)))
        if not self.t > 0:
            diagnostics.append("model/time: must be positive, got {}".format(self.t))
        if any(time <= 0 for time in self.time_grid) or list(self.time_grid) != sorted(set(self.time_grid)):
            diagnostics.append("model/time_grid: expected increasing positive times, got {}".format(
                list(self.time_grid)))
        if any(t < 0 or s < 0 for t, s in self.pairs):
            diagnostics.append("model/pairs: times must be non-negative, got {}".format(list(self.pairs)))
        if not self.p_prime >= 1:
            diagnostics.append("model/p_prime: must be at least 1, got {}".format(self.p_prime))
        latest = max(self.times)
        if self.kind != "gamma-audit" and self.kind != "chaos-verify":
            if latest > self.solver.T:
                diagnostics.append("model/horizon: must cover the latest time {}, got {}".format(latest, self.solver.T))
            if self.radii and self.solver.L < max(self.radii) + self.solver.T + self.kernel.reach:
                diagnostics.append("model/window: must be at least max(radii) + T + reach = {}, got {}".format(
                    max(self.radii) + self.solver.T + self.kernel.reach, self.solver.L))
        if self.noise.mean != 0 and self.solver.scheme != GRID and self.kind != "gamma-audit":
            diagnostics.append("solver/scheme: the uncentered noise '{}' requires the grid scheme".format(
                self.noise.label()))
        return diagnostics

    def replace(self, **changes) -> 'ExperimentConfig':
        values = {key: getattr(self, key) for key in self.__dataclass_fields__}
        values.update(changes)
        return ExperimentConfig.create(**values)

    def option(self, key: str, default=None, convert=str):
        """ :returns the experiment option converted with convert, or default when it is not set. """
        if key not in self.options:
            return default
        try:
            return convert(self.options[key])
        except ValueError:
            raise ConfigurationError("options/{}: expected {}, got '{}'".format(key, convert.__name__,
                                                                                 self.options[key]))

    def toDict(self) -> Dict:
        return {
            "kind": self.kind,
            "kernel": self.kernel.label(),
            "noise": self.noise.label(),
            "p": self.p,
            "radii": list(self.radii),
            "time": self.t,
            "time_grid": list(self.time_grid),
            "pairs": [list(pair) for pair in self.pairs],
            "p_prime": self.p_prime,
            "replicates": self.replicates,
            "seed": self.seed,
            "solver": {
                "scheme": self.solver.scheme, "T": self.solver.T, "L": self.solver.L, "dx": self.solver.dx,
                "dt": self.solver.dt, "quadrature_step": self.solver.quadrature_step, "n_max": self.solver.n_max,
                "max_atoms": self.solver.max_atoms
            },
            "options": dict(self.options)
        }
