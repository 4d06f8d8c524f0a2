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
from hamlevy.core.levy_noise import AtomCloud
from hamlevy.core.malliavin import (REPRESENTATION_TOLERANCE, exact_zero_check, key_grid_D, key_grid_D2,
                                    poincare_check, poincare_grid, poincare_samples, representation_check,
                                    verify_key_D, verify_key_D2)
from hamlevy.core.plugin import PluginConfig, StatisticalPlugin
from hamlevy.core.report import ExperimentReport, Status
from hamlevy.core.solver import EVENT_DRIVEN

CHECKS = ("key-d", "key-d2", "exact-zero", "representation", "poincare")


def _validate_checks(config, value):
    unknown = [check for check in value.split(",") if check.strip() not in CHECKS]
    if unknown:
        return "unknown check(s) {}, expected a comma separated list of {}".format(", ".join(unknown),
                                                                                 ", ".join(CHECKS))
    return None


class Plugin(StatisticalPlugin):
    """
    Verifies the add-one-point and add-two-point derivative estimates of the solution, the exact vanishing of the
    derivatives outside the light cone, the coupled representation of D u and the Poincare inequality of F_R(t).
    """

    class Option(object):

        Checks = PluginConfig.Option.Label("checks", "Checks:")
        GridPoints = PluginConfig.Option.Label("grid_points", "Grid points:")
        RepresentationStep = PluginConfig.Option.Label("representation_step", "Representation step:")
        PoincareRadius = PluginConfig.Option.Label("poincare_radius", "Poincare radius:")
        PoincareReplicates = PluginConfig.Option.Label("poincare_replicates", "Poincare replicates:")
        PoincareNodes = PluginConfig.Option.Label("poincare_nodes", "Poincare nodes:")
        PoincareCells = PluginConfig.Option.Label("poincare_cells", "Poincare cells:")

    def __init__(self, context):
        # Name, Author
        super().__init__('Malliavin derivatives', "HamLevy", context)
        self.config.add(PluginConfig.Option.String(
            label=Plugin.Option.Checks,
            value=",".join(CHECKS),
            description="comma separated list of the checks to run."
        ), _validate_checks)
        self.config.add(PluginConfig.Option.Integer(
            label=Plugin.Option.GridPoints,
            value=5,
            description="points per axis of the derivative grid.",
            range=[2, 9]
        ))
        self.config.add(PluginConfig.Option.Float(
            label=Plugin.Option.RepresentationStep,
            value=None,
            description="quadrature step of the representation check (default: max(1e-3, reach/1000)).",
            range=[0.0, None]
        ))
        self.config.add(PluginConfig.Option.Float(
            label=Plugin.Option.PoincareRadius,
            value=8.0,
            description="radius R of the spatial average entering the Poincare inequality.",
            range=[0.0, None]
        ))
        self.config.add(PluginConfig.Option.Integer(
            label=Plugin.Option.PoincareReplicates,
            value=200,
            description="replicates of the Poincare check (each needs one solve per grid atom).",
            range=[2, 1000000]
        ))
        self.config.add(PluginConfig.Option.Integer(
            label=Plugin.Option.PoincareNodes,
            value=4,
            description="Gauss-Legendre nodes in time of the difference grid.",
            range=[1, 32]
        ))
        self.config.add(PluginConfig.Option.Integer(
            label=Plugin.Option.PoincareCells,
            value=64,
            description="space cells of the difference grid.",
            range=[4, 4096]
        ))

    def checks(self):
        return [check.strip() for check in self.option(Plugin.Option.Checks).split(",") if check.strip()]

    def run(self, config):
        kernel, noise, cfg = config.kernel, config.noise, config.solver
        point = (config.t, 0.0)
        n, seed, workers, listener = config.replicates, config.seed, config.workers, self.listener()
        report = ExperimentReport("malliavin-verify", kernel.label(), noise.label(), config.toDict())
        checks = self.checks()
        if "key-d" in checks:
            probes = key_grid_D(kernel, point[0], points=self.option(Plugin.Option.GridPoints))
            report.extend(verify_key_D(kernel, noise, cfg, config.p, probes, n, seed, workers, listener, point), "D:")
        if "key-d2" in checks:
            probes = key_grid_D2(kernel, point[0])
            report.extend(verify_key_D2(kernel, noise, cfg, config.p, probes, n, seed + 1, workers, listener, point),
                          "D2:")
        if "exact-zero" in checks:
            report.extend(exact_zero_check(kernel, noise, cfg, n, seed + 2, workers, listener, point), "zero:")
        if "representation" in checks:
            report.extend(self._representation(config, point), "representation:")
        if "poincare" in checks:
            R = self.option(Plugin.Option.PoincareRadius)
            grid = poincare_grid(kernel, noise, cfg, point[0], R, self.option(Plugin.Option.PoincareNodes),
                                 self.option(Plugin.Option.PoincareCells))
            samples, differences = poincare_samples(kernel, noise, cfg, point[0], R, grid,
                                                    self.option(Plugin.Option.PoincareReplicates), seed + 3,
                                                    workers, listener)
            report.extend(poincare_check(samples, differences, noise, grid), "poincare:")
        return report

    def _representation(self, config, point) -> ExperimentReport:
        """ Spot-checks D u(t,x) against the coupled representation on base clouds of zero, one and two atoms. """
        kernel, noise = config.kernel, config.noise
        report = ExperimentReport("malliavin-verify", kernel.label(), noise.label())
        if kernel.is_riesz() or config.solver.scheme != EVENT_DRIVEN:
            report.note("representation check skipped: it needs a compact kernel and the event-driven scheme")
            return report
        step = self.option(Plugin.Option.RepresentationStep) or max(1e-3, kernel.reach / 1000.0)
        cfg = config.solver.replace(quadrature_step=step)
        t, x = point
        base = [(0.2 * t, x + 0.1, 1.0), (0.6 * t, x - 0.2, -0.5)]
        extra = (0.4 * t, x + 0.05, 1.0)
        statuses = []
        for count in range(len(base) + 1):
            cloud = AtomCloud.of(cfg.T, cfg.L, base[:count])
            difference, integral = representation_check(cloud, kernel, noise, cfg, extra, point)
            status = Status.PASS if abs(difference - integral) <= REPRESENTATION_TOLERANCE else Status.FAIL
            statuses.append(status)
            report.add("D_atoms={}".format(count), difference, t=t)
            report.add("gap_atoms={}".format(count), abs(difference - integral), status=status, t=t)
        report.status = Status.worst(statuses)
        return report
