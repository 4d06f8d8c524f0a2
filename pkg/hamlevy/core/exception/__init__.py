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
from hamlevy.core.exception.hamlevy_exception import HamLevyException
from hamlevy.core.exception.aborted_exception import AbortedException
from hamlevy.core.exception.chaos_error import ChaosError
from hamlevy.core.exception.configuration_error import ConfigurationError
from hamlevy.core.exception.domain_error import DomainError
from hamlevy.core.exception.grid_too_coarse_error import GridTooCoarseError
from hamlevy.core.exception.numeric_error import NumericError
from hamlevy.core.exception.resource_error import ResourceError
from hamlevy.core.exception.unsupported_configuration_error import UnsupportedConfigurationError
