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
import logging
import os
import sys
from pathlib import Path
from typing import List, Optional

from PyQt5.QtCore import QObject

from hamlevy.core.listener import Listener
from hamlevy.core.plugin import Plugins

CONSOLE_FORMAT = "%(module)s: %(lineno)d: %(msg)s"
RUN_LOG_FORMAT = "%(asctime)s - %(module)s: %(lineno)d: %(msg)s"


class Context(QObject):
    """
    Process-wide services of a HamLevy run: the application logger, the user preferences, progress events and the
    experiment plugins found in the bundled and the per-user plugin folder.
    """

    def __init__(self, app_id: str, app_path: str):
        """
        :param app_id: names the logger, the run log and the per-user plugin folder (~/.config/<app_id>/plugins).
        :param app_path: the folder holding the bundled plugins.
        """
        super(__class__, self).__init__()
        self._app_id = app_id
        self.config = self._init_config()
        self._debug_mode = self.config.isDebugModeEnabled()
        self._logger = self._init_logger()
        self._run_log = None
        self._listener = Listener(self)
        self._plugins = Plugins(self.pluginPaths(app_path), self)

    def _init_config(self):
        """ Returns the user preferences. """
        from hamlevy.core.config import Config
        return Config()

    def _init_logger(self) -> logging.Logger:
        """ Returns the application logger with a single console handler bound to the current stderr. """
        logger = logging.getLogger(self._app_id)
        for handler in [handler for handler in logger.handlers if getattr(handler, "is_console", False)]:
            logger.removeHandler(handler)
        console = logging.StreamHandler(sys.stderr)
        console.setFormatter(logging.Formatter(CONSOLE_FORMAT))
        console.is_console = True
        logger.addHandler(console)
        logger.setLevel(self._level())
        return logger

    def _level(self) -> int:
        return logging.DEBUG if self.isDebugModeEnabled() else logging.WARN

    def pluginPaths(self, app_path: str) -> List[str]:
        """ Returns the folders searched for *_experiment.py files; later folders override earlier ones. """
        return [os.path.join(app_path, "plugins"), os.path.join(str(Path.home()), ".config", self._app_id, "plugins")]

    def setDebugMode(self, status: bool, temporary=False):
        """ Enables/Disables debug mode; temporary changes are not written to the preferences. """
        if not temporary:
            self.config.setDebugMode(status)
        self._debug_mode = status
        self._logger.setLevel(self._level())
        self._logger.info("Debug Mode: {}{}".format("enabled" if status else "disabled",
                                                    " (temporary)" if temporary else ""))

    def isDebugModeEnabled(self) -> bool:
        """ Returns whether the debug mode is currently configured or temporary enabled. """
        return self.config.isDebugModeEnabled() or self._debug_mode

    def startRunLog(self, directory: str) -> Optional[str]:
        """
        In debug mode, mirrors the log of the current run into <directory>/<app_id>.log.
        :returns the path of the run log or None when debug mode is disabled.
        """
        self.stopRunLog()
        if not self.isDebugModeEnabled():
            return None
        os.makedirs(directory, exist_ok=True)
        path = os.path.join(directory, "{}.log".format(self._app_id))
        self._run_log = logging.FileHandler(path)
        self._run_log.setLevel(logging.DEBUG)
        self._run_log.setFormatter(logging.Formatter(RUN_LOG_FORMAT, datefmt='%m/%d/%Y %I:%M:%S %p'))
        self._logger.addHandler(self._run_log)
        return path

    def stopRunLog(self):
        if self._run_log is None:
            return
        self._logger.removeHandler(self._run_log)
        self._run_log.close()
        self._run_log = None

    def listener(self) -> Listener:
        """ Returns the listener instance which allows to subscribe to progress events. """
        return self._listener

    def logger(self) -> logging.Logger:
        """ Returns the logger of the application. """
        return self._logger

    def plugins(self) -> Plugins:
        """ Returns all experiment plugins. """
        return self._plugins
