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
from hamlevy.core.plugin import PluginConfig, StatisticalPlugin
from hamlevy.core.stats import fclt_experiment


class Plugin(StatisticalPlugin):
    """ Increment moments and finite-dimensional covariances of t -> F_R(t) on the configured time grid. """

    class Option(object):

        Radius = PluginConfig.Option.Label("radius", "Radius:")

    def __init__(self, context):
        # Name, Author
        super().__init__('Functional CLT', "HamLevy", context)
        self.config.add(PluginConfig.Option.Float(
            label=Plugin.Option.Radius,
            value=None,
            description="radius R of the path statistics (default: the largest configured radius).",
            range=[0.0, None]
        ))

    def run(self, config):
        return fclt_experiment(config, R=self.option(Plugin.Option.Radius), listener=self.listener())
