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
from hamlevy.core.plugin import StatisticalPlugin
from hamlevy.core.stats import covariance_limit


class Plugin(StatisticalPlugin):
    """
    Estimates the normalized covariances K_R(t, s) of the spatial averages on the configured (t, s) pairs.
    Riesz kernels are checked against the limit shape, integrable kernels against the Gaussian comparison model.
    """

    def __init__(self, context):
        # Name, Author
        super().__init__('Limit covariance', "HamLevy", context)

    def run(self, config):
        return covariance_limit(config, listener=self.listener())
