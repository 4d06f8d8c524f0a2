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
import argparse
import os
import sys
from collections import namedtuple
from typing import Dict, List

from hamlevy.core.argparse import SingleArgs
from hamlevy.core.config import ExperimentConfig, FORMATS
from hamlevy.core.context import Context
from hamlevy.core.exception import ConfigurationError, HamLevyException
from hamlevy.core.presets import list_presets
from hamlevy.core.report import write_summary

EXIT_USAGE = 1


class ArgumentParser(argparse.ArgumentParser):
    """ Exits with code 1 on usage errors since argparse's default (2) signals a failed experiment. """

    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, "{}: error: {}\n".format(self.prog, message))


def setup_excepthook(logger):
    """
    Setup the excepthook which logs uncaught exceptions instead of throwing them around.
    @see https://fman.io/blog/pyqt-excepthook/
    """
    def _excepthook(exc_type, exc_value, exc_tb):
        enriched_tb = _add_missing_frames(exc_tb) if exc_tb else exc_tb
        logger.debug("Uncaught exception", exc_info=(exc_type, exc_value, enriched_tb))

    def _add_missing_frames(tb):
        result = fake_tb(tb.tb_frame, tb.tb_lasti, tb.tb_lineno, tb.tb_next)
        frame = tb.tb_frame.f_back
        while frame:
            result = fake_tb(frame, frame.f_lasti, frame.f_lineno, result)
            frame = frame.f_back
        return result

    fake_tb = namedtuple(
        'fake_tb', ('tb_frame', 'tb_lasti', 'tb_lineno', 'tb_next')
    )

    sys.excepthook = _excepthook


def natural_join(list):
    """ Joins a list of strings (e.g. ["1", "2", "3"] => "1, 2 and 3"). """
    if not list:
        return ""
    elif len(list) == 1:
        return list[0]
    else:
        return " and ".join([", ".join(list[:-1]), list[-1]])


def show_help(plugin) -> str:
    """ :returns the option table of the experiment plugin. """

    def max_length(attr, title):
        """ :returns the maximum string length of a specific plugin option attribute. """
        lens = [len(title)]
        for key in plugin.config.keys():
            if hasattr(plugin.config.get(key), attr):
                lens.append(len(str(getattr(plugin.config.get(key), attr))))
        return max(lens)

    lines = ["", "{} ({})".format(plugin.name(), plugin.kind()), len(plugin.name() + plugin.kind() + " ()") * '=', ""]
    if not plugin.is_configurable():
        lines.append("This experiment has no options.")
        lines.append("")
        return os.linesep.join(lines)

    name_max_length = max_length("key", "Name")
    value_max_length = max_length("value", "Value")
    row_format = "{:>" + str(name_max_length) + "}  " + \
                 "{:<" + str(value_max_length) + "}  " + \
                 "{:<8}  " + \
                 "{}"
    lines.append(row_format.format("Name", "Value", "Required", "Description"))
    lines.append(row_format.format("----", "-----", "--------", "-----------"))
    for key in plugin.config.keys():
        option = plugin.config.get(key)
        value = option.value if option.value is not None else ""
        is_required = "yes" if option.is_required else "no"
        lines.append(row_format.format(option.key, str(value), is_required, option.description))
    lines.append("")
    return os.linesep.join(lines)


def list_experiments(context: Context) -> str:
    """ :returns the registered experiment kinds with their plugin type. """
    row_format = "{:<20}  {}"
    lines = ["", row_format.format("Experiment", "Type"), row_format.format("----------", "----")]
    for plugin in context.plugins():
        lines.append(row_format.format(plugin.kind(), plugin.type().lower()))
    lines.append("")
    return os.linesep.join(lines)


def get_options(arguments: List[str]) -> Dict[str, str]:
    """
    Parses KEY=VALUE arguments.
    :raises ConfigurationError: when an argument does not follow the KEY=VALUE pattern.
    """
    result = {}
    for argument in arguments or []:
        sep_index = argument.find('=')
        if sep_index < 1:
            raise ConfigurationError('Invalid option specification! Expected key=value, got {}'.format(argument))
        result[argument[:sep_index].strip()] = argument[sep_index + 1:].strip()
    return result


def build_parser() -> ArgumentParser:
    parser = ArgumentParser(prog="hamlevy", add_help=False,
                            description="Runs verification experiments for the hyperbolic Anderson model driven by "
                                        "Levy colored noise. Exit codes: 0 = PASS, 2 = FAIL, 3 = INCONCLUSIVE, "
                                        "1 = usage or configuration error.")
    parser.add_argument('-?', '--help', action='store_true',
                        help="show this help message and exit")
    parser.add_argument('config_file', nargs='?', metavar="CONFIG",
                        help="specifies the experiment configuration (INI)")
    parser.add_argument('--config', action=SingleArgs, metavar="PATH",
                        help="specifies the experiment configuration (INI)")
    parser.add_argument('--seed', action=SingleArgs, type=int, metavar="U64",
                        help="overrides the root seed of the configuration")
    parser.add_argument('--workers', action=SingleArgs, type=int, metavar="N",
                        help="overrides the worker count (default: configuration, $HAM_LEVY_WORKERS or 1)")
    parser.add_argument('--out', action=SingleArgs, metavar="DIR",
                        help="overrides the output directory")
    parser.add_argument('--format', action=SingleArgs, choices=FORMATS,
                        help="overrides the report format")
    parser.add_argument('-o', '--option', action='append', metavar="KEY=VALUE",
                        help="overrides an experiment option of the [options] section")
    parser.add_argument('-l', '--list-presets', action='store_true',
                        help="lists the kernel and noise presets with their moment tables")
    parser.add_argument('--list-experiments', action='store_true',
                        help="lists the available experiment kinds")
    parser.add_argument('--help-experiment', action=SingleArgs, metavar="KIND",
                        help="shows the options of the specified experiment")
    parser.add_argument('--debug', action='store_true',
                        help="activates debug mode with extensive logging. Output will be written into hamlevy.log "
                             "inside the output directory of the run.")
    return parser


def run(context: Context, config: ExperimentConfig) -> int:
    """
    Runs the configured experiment, writes the report and the summary.
    :returns the exit code of the verdict (0 = PASS, 2 = FAIL, 3 = INCONCLUSIVE).
    """
    plugin = context.plugins().plugin(config.kind)
    plugin.configure(config.options)
    listener = context.listener()
    run_log = context.startRunLog(config.out)
    try:
        context.logger().info("Running {} ({} replicates, {} workers) ...".format(
            config.kind, config.replicates, config.workers))
        listener.experimentStarted.emit(config.kind)
        report = plugin.run(config)
        listener.experimentFinished.emit(config.kind, report.status)
        artifacts = report.write(config.out, config.format)
        artifacts.append(write_summary(config.out, report, artifacts))
    finally:
        context.stopRunLog()
    for path in artifacts + ([run_log] if run_log else []):
        listener.reportWritten.emit(path)
    print(report)
    return report.exit_code()


def main(argv: List[str] = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.help:
        parser.print_help()
        return 0

    # Loads logger, preferences and plugins.
    app_path = os.path.dirname(os.path.abspath(__file__))
    context = Context("hamlevy", app_path)
    if args.debug:
        # Enable debug mode for current session.
        context.setDebugMode(True, temporary=True)
    setup_excepthook(context.logger())

    try:
        if args.list_presets:
            print(list_presets())
            return 0

        if args.list_experiments:
            print(list_experiments(context))
            return 0

        if args.help_experiment:
            print(show_help(context.plugins().plugin(args.help_experiment)))
            return 0

        if args.config and args.config_file:
            context.logger().error("Argument --config and CONFIG can not be used together.")
            return EXIT_USAGE

        path = args.config or args.config_file
        if not path:
            context.logger().error("No configuration specified!")
            return EXIT_USAGE

        config = ExperimentConfig.load(path, workers=args.workers, seed=args.seed, out=args.out,
                                       format=args.format, options=get_options(args.option),
                                       preferences=context.config)
        return run(context, config)
    except ConfigurationError as e:
        context.logger().error("Invalid configuration ({} problem{}):".format(
            len(e.diagnostics), "" if len(e.diagnostics) == 1 else "s"))
        for diagnostic in e.diagnostics:
            context.logger().error("  {}".format(diagnostic))
        return EXIT_USAGE
    except HamLevyException as e:
        context.logger().error(str(e))
        return EXIT_USAGE
    except KeyboardInterrupt:
        context.logger().error("Aborted by user.")
        return EXIT_USAGE
    except Exception as e:
        context.logger().exception(e, exc_info=context.isDebugModeEnabled())
        return EXIT_USAGE


if __name__ == '__main__':
    sys.exit(main())
