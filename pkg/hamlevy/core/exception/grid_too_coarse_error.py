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
from hamlevy.core.exception.configuration_error import ConfigurationError


class GridTooCoarseError(ConfigurationError):
    """ Should be raised when a sampling grid can not resolve the kernel it is convolved with. """

    def __init__(self, step: float, reach: float, limit: float):
        super().__init__("Grid step {} is too coarse for kernel reach {} (step must not exceed {})".format(
            step, reach, limit))
        self.step = step
        self.reach = reach
        self.limit = limit
