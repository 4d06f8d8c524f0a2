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
from typing import List

from hamlevy.core.exception.hamlevy_exception import HamLevyException


class ConfigurationError(HamLevyException):
    """
    Should be raised when a configuration is invalid or incoherent.
    Carries one diagnostic per offending field (e.g. "experiment/replicates: must be positive, got 0").
    """

    def __init__(self, message: str, diagnostics: List[str] = None):
        super().__init__(message)
        self.diagnostics = list(diagnostics) if diagnostics else [message]
