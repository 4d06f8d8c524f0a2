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


class NumericError(HamLevyException, ArithmeticError):
    """ Should be raised when a quadrature does not converge. The residual (absolute error estimate) is kept. """

    def __init__(self, message: str, residual: float = float("nan")):
        super().__init__("{} (residual {:.3e})".format(message, residual))
        self.residual = residual
