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
from hamlevy.core.stats import DK_THRESHOLD, qclt_experiment


class Plugin(StatisticalPlugin):
    """ Kolmogorov and Wasserstein distances of the standardized spatial averages to the standard normal law. """

    class Option(object):

        Threshold = PluginConfig.Option.Label("threshold", "Threshold:")

    def __init__(self, context):
        # Name, Author
        super().__init__('Quantitative CLT', "HamLevy", context)
        self.config.add(PluginConfig.Option.Float(
            label=Plugin.Option.Threshold,
            value=DK_THRESHOLD,
            description="largest accepted Kolmogorov distance at the largest radius.",
            range=[0.0, 1.0]
        ))

    def run(self, config):
        options = dict(config.options)
        options[Plugin.Option.Threshold.key] = str(self.option(Plugin.Option.Threshold))
        return qclt_experiment(config.replace(options=options), listener=self.listener())
