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
from hamlevy.core.stats import variance_scan


class Plugin(StatisticalPlugin):
    """
    Estimates the variance of the spatial averages F_R(t) on the configured radii and fits the growth exponent.

    Example:

        [experiment]
        kind=variance-scan
        [model]
        radii=8,16,32,64
    """

    def __init__(self, context):
        # Name, Author
        super().__init__('Variance scan', "HamLevy", context)

    def run(self, config):
        return variance_scan(config, listener=self.listener())
