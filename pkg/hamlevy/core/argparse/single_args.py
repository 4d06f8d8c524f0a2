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


class SingleArgs(argparse.Action):
    """
    Defines an Argparse-Action which allows specifying an argument only once.

    Example:

        parser = argparse.ArgumentParser()
        parser.add_argument('--seed', action=SingleArgs, type=int)
        parser.add_argument('--workers', action=SingleArgs, type=int)

        parser.parse_args(['--seed', '2', '--workers', '1', '--seed', '3'])
        error: argument --seed: can only be used once!

    The error is reported through ``parser.error`` so that the caller decides about the exit code.
    """

    def __call__(self, parser, args, values, option_string=None):
        seen = getattr(args, "_single_args_seen", set())
        if self.dest in seen:
            raise argparse.ArgumentError(self, "can only be used once!")
        seen.add(self.dest)
        setattr(args, "_single_args_seen", seen)
        setattr(args, self.dest, values)
