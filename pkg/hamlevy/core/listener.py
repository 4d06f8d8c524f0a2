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
from PyQt5.QtCore import QObject, pyqtSignal


class Listener(QObject):
    """ A set of global progress signals to emit or connect to. """

    # Signals that an experiment run started
    experimentStarted = pyqtSignal(str)  # kind

    # Signals that a chunk of Monte-Carlo replicates finished
    replicatesCompleted = pyqtSignal(str, int, int)  # label, done, total

    # Signals that an experiment finished with the specified status (PASS, FAIL or INCONCLUSIVE)
    experimentFinished = pyqtSignal(str, str)  # kind, status

    # Signals that a report artifact was written
    reportWritten = pyqtSignal(str)  # path

    def __init__(self, context: 'hamlevy.core.context.Context'):
        super(__class__, self).__init__()
        # Logs each event when being triggered
        self.experimentStarted.connect(lambda kind:
            context.logger().debug("experimentStarted({})".format(kind)))
        self.replicatesCompleted.connect(lambda label, done, total:
            context.logger().debug("replicatesCompleted({}, {}, {})".format(label, done, total)))
        self.experimentFinished.connect(lambda kind, status:
            context.logger().debug("experimentFinished({}, {})".format(kind, status)))
        self.reportWritten.connect(lambda path:
            context.logger().debug("reportWritten({})".format(path)))
