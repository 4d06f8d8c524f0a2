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
from hamlevy.core.plugin import DeterministicPlugin, PluginConfig
from hamlevy.core.stats import RatePlan, audit_gamma_rates


class Plugin(DeterministicPlugin):
    """
    Deterministic audit of the decay of the seven QCLT rate bounds. Only quadrature is involved, the replicate
    settings are ignored.
    """

    class Option(object):

        R1 = PluginConfig.Option.Label("r1", "r1:")
        HolderA = PluginConfig.Option.Label("holder_a", "Hoelder a:")
        InvR7 = PluginConfig.Option.Label("inv_r7", "1/r7:")

    def __init__(self, context):
        # Name, Author
        super().__init__('Rate audit', "HamLevy", context)
        self.config.add(PluginConfig.Option.Float(
            label=Plugin.Option.R1,
            value=None,
            description="free exponent r of gamma_1 (default: midpoint of its window).",
            range=[1.0, None]
        ))
        self.config.add(PluginConfig.Option.Float(
            label=Plugin.Option.HolderA,
            value=None,
            description="Hoelder exponent a of gamma_6 (default: 2/(p-1)).",
            range=[1.0, None]
        ))
        self.config.add(PluginConfig.Option.Float(
            label=Plugin.Option.InvR7,
            value=None,
            description="1/r of gamma_7 (default: midpoint of its window).",
            range=[0.0, 1.0]
        ))

    def run(self, config):
        plan = RatePlan.build(config.kernel, config.p, self.option(Plugin.Option.R1),
                              self.option(Plugin.Option.HolderA), self.option(Plugin.Option.InvR7))
        report = audit_gamma_rates(config.kernel, config.noise, config.p, config.radii, config.t, plan)
        report.config = config.toDict()
        return report
