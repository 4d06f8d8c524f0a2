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
import importlib.util
import os
import sys
from logging import Logger
from typing import Callable, Dict, Iterator, List, Optional

from hamlevy.core.exception import ConfigurationError
from hamlevy.core.presets import did_you_mean


class PluginType(object):
    STATISTICAL = "Statistical"
    DETERMINISTIC = "Deterministic"


class PluginConfig(object):
    """ The option table of an experiment, filled from the [options] section and -o KEY=VALUE arguments. """

    class Option(object):

        class Label(object):
            """ The key of an option as written in configuration files together with its display name. """

            def __init__(self, key, name):
                self.key = key
                self.name = name

            def __str__(self):
                return self.key

        class Base(object):

            def __init__(self, label, value, description, is_required=False):
                """
                :param label: the label of the option (e.g. Label("threshold", "Threshold:")).
                :param value: the default value; None lets the experiment derive it from the model.
                :param description: the description shown by --help-experiment.
                :param is_required: whether the experiment refuses to run without an explicit value.
                """
                self.label = label
                self.value = value
                self.description = description
                self.is_required = is_required
                self.is_initialized = False

            @property
            def key(self) -> str:
                return self.label.key

            @property
            def name(self) -> str:
                return self.label.name

            def convert(self, text: str):
                """ :returns the typed value of the text; raises ValueError when the text does not fit. """
                return text

            def __str__(self):
                return self.key

        class String(Base):
            pass

        class Integer(Base):

            def __init__(self, label, value, description, is_required=False, range=None):
                """
                :param range: the inclusive minimum and maximum (e.g. [1, 6]).
                """
                super(PluginConfig.Option.Integer, self).__init__(label, value, description, is_required)
                self.range = range

            def convert(self, text: str) -> int:
                value = int(text)
                if self.range and not self.range[0] <= value <= self.range[1]:
                    raise ValueError("must lie in [{}, {}], got {}".format(self.range[0], self.range[1], value))
                return value

        class Float(Base):

            def __init__(self, label, value, description, is_required=False, range=None):
                """
                :param range: the open lower and upper bound (e.g. [0, 1]); None leaves a side unbounded.
                """
                super(PluginConfig.Option.Float, self).__init__(label, value, description, is_required)
                self.range = range

            def convert(self, text: str) -> float:
                value = float(text)
                lower, upper = self.range or (None, None)
                if (lower is not None and not value > lower) or (upper is not None and not value < upper):
                    raise ValueError("must lie in ({}, {}), got {}".format(lower, upper, value))
                return value

        class Boolean(Base):

            TRUE = ("true", "yes", "1")
            FALSE = ("false", "no", "0")

            def convert(self, text: str) -> bool:
                if isinstance(text, bool):
                    return text
                if str(text).lower() in self.TRUE:
                    return True
                if str(text).lower() in self.FALSE:
                    return False
                raise ValueError("expected true or false, got '{}'".format(text))

    def __init__(self):
        self._options = {}
        self._validators = {}

    def add(self, option: Option.Base, validator: Callable = None):
        """
        Adds an option; options are listed in the order they were added.
        :param validator: called with this configuration and the converted value. Returns None when the value is
                          accepted, otherwise the error message.
        """
        self._options[option.key] = option
        self._validators[option.key] = validator

    def get(self, label) -> Option.Base:
        """ Returns the option of the label or key. """
        return self._options[label.key if isinstance(label, PluginConfig.Option.Label) else label]

    def value(self, label):
        return self.get(label).value

    def keys(self) -> List[str]:
        return list(self._options.keys())

    def count(self) -> int:
        return len(self._options)

    def update(self, options: Dict[str, str]) -> List[str]:
        """
        Converts, validates and stores the values of the options.
        :param options: key-value pairs as read from the [options] section or the command line.
        :returns one diagnostic per rejected option; accepted options are stored even when others fail.

        Example:
            update({"threshold": "0.05", "draws": "2000"})
        """
        diagnostics = []
        for key, text in options.items():
            if key not in self._options:
                diagnostics.append("options/{}: unknown option.{}".format(key, did_you_mean(key, self.keys())))
                continue
            option = self._options[key]
            try:
                value = option.convert(text)
            except (TypeError, ValueError) as e:
                diagnostics.append("options/{}: {}".format(key, e))
                continue
            validator = self._validators.get(key)
            message = validator(self, value) if validator else None
            if message:
                diagnostics.append("options/{}: {}".format(key, message))
                continue
            option.value = value
            option.is_initialized = True
        return diagnostics

    def toDict(self) -> Dict:
        return {key: option.value for key, option in self._options.items()}


class ExperimentPlugin(object):
    """ Base-class to all experiment plugins. Should not be used directly. """

    def __init__(self, name: str, type: str, author: str, context: 'hamlevy.core.context.Context'):
        """
        :param name: the human readable name of the experiment.
        :param type: the type of the plugin (either STATISTICAL or DETERMINISTIC).
        :param author: the author of the plugin.
        :param context: the application context.
        """
        self._name = name
        # qclt_experiment.py => qclt, variance_scan_experiment.py => variance-scan
        module = sys.modules[self.__class__.__module__].__file__
        self._safe_name = os.path.splitext(os.path.basename(module))[0]
        self._kind = self._safe_name[:self._safe_name.rfind("_")].replace("_", "-")
        self._type = type
        self._author = author
        self.config = PluginConfig()
        self._context = context

    def logger(self) -> Logger:
        return self._context.logger()

    def listener(self):
        return self._context.listener()

    def name(self, safe_name=False) -> str:
        """
        :param safe_name: when False the human readable name is returned (e.g. "Variance scan"), otherwise the
        name of the plugin file (e.g. variance_scan_experiment).
        """
        return self._safe_name if safe_name else self._name

    def kind(self) -> str:
        """ :returns the experiment kind as used in configuration files (e.g. variance-scan). """
        return self._kind

    def type(self) -> str:
        return self._type

    def author(self) -> str:
        return self._author

    def is_configurable(self) -> bool:
        return self.config.count() > 0

    def is_enabled(self) -> bool:
        """ :returns whether the user preferences enable the experiment (enabled unless switched off). """
        return self._context.config.getPluginStatus(self.kind())

    def set_enabled(self, status: bool):
        self._context.config.setPluginStatus(self.kind(), status)

    def configure(self, options: Dict[str, str]):
        """
        Applies the [options] section of an experiment configuration.
        :raises ConfigurationError: listing every unknown, malformed or missing option.
        """
        diagnostics = self.config.update(options)
        diagnostics.extend("options/{}: required option is not configured".format(key) for key in self.config.keys()
                           if self.config.get(key).is_required and not self.config.get(key).is_initialized)
        if diagnostics:
            raise ConfigurationError(diagnostics[0], diagnostics)

    def option(self, label):
        """ :returns the converted value of the option. """
        return self.config.value(label)

    def run(self, config) -> 'hamlevy.core.report.ExperimentReport':
        """ Runs the experiment on a validated ExperimentConfig. """
        raise NotImplementedError("Method must be implemented from upper class")

    def toDict(self) -> Dict:
        return {
            "name": self.name(),
            "kind": self.kind(),
            "type": self.type(),
            "author": self.author(),
            "config": self.config.toDict()
        }


class StatisticalPlugin(ExperimentPlugin):
    """ Monte-Carlo experiments over independent replicates. """

    def __init__(self, name: str, author: str, context: 'hamlevy.core.context.Context'):
        super(__class__, self).__init__(name, PluginType.STATISTICAL, author, context)


class DeterministicPlugin(ExperimentPlugin):
    """ Pure quadrature or exact algebra experiments. """

    def __init__(self, name: str, author: str, context: 'hamlevy.core.context.Context'):
        super(__class__, self).__init__(name, PluginType.DETERMINISTIC, author, context)


class PluginLoader(object):
    """ Imports the *_experiment.py files of the plugin folders. """

    SUFFIX = "_experiment.py"

    def __init__(self, context):
        self._context = context
        self._logger = context.logger()
        self._errors = {}

    def load(self, paths: List[str]) -> List[ExperimentPlugin]:
        """
        :param paths: the plugin folders; missing folders are created and a later folder replaces experiments of
                      the same kind found in an earlier one.
        :returns the enabled plugins ordered by kind.
        """
        plugins = {}
        for path in paths:
            try:
                os.makedirs(path, exist_ok=True)
                files = sorted(f for f in os.listdir(path) if f.endswith(self.SUFFIX))
            except OSError as e:
                self._logger.warning("Plugin folder '{}' is not accessible: {}".format(path, e))
                continue
            for f in files:
                plugin = self._load_plugin(path, f)
                if plugin is None:
                    continue
                if not plugin.is_enabled():
                    self._logger.debug("Experiment '{}' is disabled".format(plugin.kind()))
                    continue
                plugins[plugin.kind()] = plugin
        return [plugins[kind] for kind in sorted(plugins)]

    def _load_plugin(self, path: str, f: str) -> Optional[ExperimentPlugin]:
        self._logger.debug("Loading plugin {}".format(os.path.join(path, f)))
        # Registered under the file name; a user plugin replaces the bundled module of the same name.
        module_name = os.path.splitext(f)[0]
        spec = importlib.util.spec_from_file_location(module_name, os.path.join(path, f))
        module = importlib.util.module_from_spec(spec)
        sys.modules[module_name] = module
        try:
            spec.loader.exec_module(module)
            return module.Plugin(self._context)
        except Exception as e:
            self._logger.error("Loading plugin {} failed: {}".format(f, e))
            self._errors[f] = str(e)
            sys.modules.pop(module_name, None)
            return None

    def errors(self) -> Dict[str, str]:
        """ :returns the plugin files which failed to load together with the error. """
        return dict(self._errors)


class Plugins(object):
    """ The registry of experiment plugins by kind. """

    def __init__(self, plugin_paths: List[str], context: 'hamlevy.core.context.Context'):
        self._loader = PluginLoader(context)
        self._plugin_list = self._loader.load(plugin_paths)
        context.logger().debug("Experiments: {}".format(", ".join(self.names())))

    def names(self, type: str = None) -> List[str]:
        """
        :param type: filters by plugin type (e.g. PluginType.STATISTICAL); None returns every kind.
        :returns the experiment kinds.
        """
        return [plugin.kind() for plugin in self.filter(type)]

    def plugin(self, kind: str) -> ExperimentPlugin:
        """
        :param kind: the experiment kind (e.g. qclt, variance-scan); case is ignored.
        :raises ConfigurationError: when no plugin is registered for the kind.
        """
        for plugin in self._plugin_list:
            if plugin.kind() == kind.lower():
                return plugin
        raise ConfigurationError("experiment/kind: unknown experiment '{}'.{}".format(
            kind, did_you_mean(kind, self.names())))

    def filter(self, type: str = None) -> List[ExperimentPlugin]:
        """ :returns the plugins of the type (e.g. Statistical/statistical); all plugins when type is None. """
        if not type:
            return list(self._plugin_list)
        return [plugin for plugin in self._plugin_list if plugin.type().lower() == type.lower()]

    def errors(self) -> Dict[str, str]:
        return self._loader.errors()

    def __iter__(self) -> Iterator[ExperimentPlugin]:
        return iter(self._plugin_list)

    def __len__(self):
        return len(self._plugin_list)
