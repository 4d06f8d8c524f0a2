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
import numpy as np

from hamlevy.core.chaos_combinatorics import (DiscreteSpace, isometry_check, product_formula_check, random_kernel,
                                              vanishing_contraction_check)
from hamlevy.core.plugin import PluginConfig, StatisticalPlugin
from hamlevy.core.report import ExperimentReport
from hamlevy.core.stats import second_moment_identity

PRODUCT_RANKS = ((1, 1), (1, 2), (2, 2))


class Plugin(StatisticalPlugin):
    """
    Exact algebra of multiple Poisson integrals on a random finite measure space (product formula, vanishing
    contractions, isometry) and the Monte-Carlo second moment identity between the Levy model, the Gaussian
    comparison model and the truncated chaos expansion.
    """

    class Option(object):

        Cells = PluginConfig.Option.Label("cells", "Cells:")
        Draws = PluginConfig.Option.Label("draws", "Draws:")
        IsometryDraws = PluginConfig.Option.Label("isometry_draws", "Isometry draws:")
        SecondMoment = PluginConfig.Option.Label("second_moment", "Second moment:")
        ChaosOrder = PluginConfig.Option.Label("n_max", "Chaos order:")

    def __init__(self, context):
        # Name, Author
        super().__init__('Chaos algebra', "HamLevy", context)
        self.config.add(PluginConfig.Option.Integer(
            label=Plugin.Option.Cells,
            value=4,
            description="cells of the finite measure space.",
            range=[2, 8]
        ))
        self.config.add(PluginConfig.Option.Integer(
            label=Plugin.Option.Draws,
            value=200,
            description="Poisson realizations per product formula check.",
            range=[1, 1000000]
        ))
        self.config.add(PluginConfig.Option.Integer(
            label=Plugin.Option.IsometryDraws,
            value=100000,
            description="Poisson realizations of the isometry check.",
            range=[2, 10000000]
        ))
        self.config.add(PluginConfig.Option.Boolean(
            label=Plugin.Option.SecondMoment,
            value=True,
            description="whether to run the Monte-Carlo second moment identity."
        ))
        self.config.add(PluginConfig.Option.Integer(
            label=Plugin.Option.ChaosOrder,
            value=3,
            description="truncation order of the chaos expansion.",
            range=[0, 4]
        ))

    def run(self, config):
        rng = np.random.default_rng(config.seed)
        cells = self.option(Plugin.Option.Cells)
        draws = self.option(Plugin.Option.Draws)
        space = DiscreteSpace(rng.uniform(0.2, 1.5, cells))
        report = ExperimentReport("chaos-verify", config.kernel.label(), config.noise.label(), config.toDict())
        for n, m in PRODUCT_RANKS:
            f, g = random_kernel(space, n, rng), random_kernel(space, m, rng)
            report.extend(product_formula_check(f, g, n, m, draws, space, rng), "product[{},{}]:".format(n, m))
        report.extend(vanishing_contraction_check(2, 2, draws, space, rng), "vanishing:")
        report.extend(isometry_check((1, 2, 3), self.option(Plugin.Option.IsometryDraws), space, rng), "isometry:")
        if self.option(Plugin.Option.SecondMoment):
            report.extend(second_moment_identity(config, n_max=self.option(Plugin.Option.ChaosOrder),
                                                 listener=self.listener()), "moment:")
        return report
