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

import csv
import io
import json
import logging
import math
import os
from dataclasses import asdict, dataclass
from datetime import datetime, timezone
from typing import Dict, List, Optional

logger = logging.getLogger(__name__)


class Status(object):
    """ Outcome of an experiment together with the exit code the runner reports for it. """
    PASS = "PASS"
    FAIL = "FAIL"
    INCONCLUSIVE = "INCONCLUSIVE"

    _exit_codes = {PASS: 0, FAIL: 2, INCONCLUSIVE: 3}
    _severity = {PASS: 0, INCONCLUSIVE: 1, FAIL: 2}

    @staticmethod
    def exit_code(status: str) -> int:
        return Status._exit_codes[status]

    @staticmethod
    def worst(statuses) -> str:
        """ :returns the most severe status (FAIL over INCONCLUSIVE over PASS); PASS for no statuses. """
        statuses = list(statuses)
        if not statuses:
            return Status.PASS
        return max(statuses, key=lambda status: Status._severity[status])


CSV_COLUMNS = ["experiment", "kernel", "nu", "p", "R", "t", "s", "statistic", "value", "stderr", "status"]


@dataclass
class ReportRow:
    statistic: str
    value: float
    stderr: Optional[float] = None
    status: str = ""
    p: Optional[float] = None
    R: Optional[float] = None
    t: Optional[float] = None
    s: Optional[float] = None


def _format(value) -> str:
    """ Formats a cell; floats use repr so that identical results produce identical bytes. """
    if value is None:
        return ""
    if isinstance(value, float):
        return repr(value)
    return str(value)


def _jsonable(value):
    if isinstance(value, float) and not math.isfinite(value):
        return None
    if isinstance(value, dict):
        return {key: _jsonable(item) for key, item in value.items()}
    if isinstance(value, (list, tuple)):
        return [_jsonable(item) for item in value]
    return value


class ExperimentReport(object):
    """ Named statistics of one experiment run together with its status. """

    def __init__(self, experiment: str, kernel: str = "", nu: str = "", config: Dict = None):
        """
        :param experiment: the experiment kind (e.g. "variance-scan").
        :param kernel: the kernel label written into every row.
        :param nu: the Levy measure label written into every row.
        :param config: the configuration embedded into the JSON mirror.
        """
        self.experiment = experiment
        self.kernel = kernel
        self.nu = nu
        self.config = config or {}
        self.rows: List[ReportRow] = []
        self.notes: List[str] = []
        self.status = Status.PASS

    def add(self, statistic: str, value: float, stderr: float = None, status: str = "", **coordinates) -> ReportRow:
        """
        Adds a row to the report.
        :param coordinates: any of p, R, t and s.
        """
        row = ReportRow(statistic, None if value is None else float(value),
                        None if stderr is None else float(stderr), status,
                        **{key: None if coordinate is None else float(coordinate)
                           for key, coordinate in coordinates.items()})
        self.rows.append(row)
        return row

    def note(self, text: str):
        self.notes.append(text)

    def value(self, statistic: str, **coordinates) -> float:
        """ :returns the value of the first row matching the statistic and coordinates. """
        for row in self.rows:
            if row.statistic == statistic and all(getattr(row, key) == value for key, value in coordinates.items()):
                return row.value
        raise KeyError("No statistic '{}' at {}".format(statistic, coordinates))

    def extend(self, other: 'ExperimentReport', prefix: str = ""):
        """
        Appends the rows and notes of another report, prefixing its statistic names, and folds its status into
        this one.
        """
        for row in other.rows:
            self.rows.append(ReportRow(prefix + row.statistic, row.value, row.stderr, row.status, row.p, row.R,
                                       row.t, row.s))
        self.notes.extend(prefix + note for note in other.notes)
        self.status = Status.worst([self.status, other.status])
        return self

    def exit_code(self) -> int:
        return Status.exit_code(self.status)

    def toCSV(self, timestamp: str = None) -> str:
        """ :returns the CSV representation, starting with a '# generated' comment line. """
        buffer = io.StringIO()
        buffer.write("# generated {}\n".format(timestamp or _now()))
        writer = csv.writer(buffer, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in self.rows:
            writer.writerow([_format(item) for item in (
                self.experiment, self.kernel, self.nu, row.p, row.R, row.t, row.s, row.statistic, row.value,
                row.stderr, row.status)])
        return buffer.getvalue()

    def toDict(self) -> Dict:
        return {
            "experiment": self.experiment,
            "kernel": self.kernel,
            "nu": self.nu,
            "status": self.status,
            "notes": list(self.notes),
            "config": self.config,
            "rows": [asdict(row) for row in self.rows]
        }

    def toJSON(self, timestamp: str = None) -> str:
        content = self.toDict()
        content["generated"] = timestamp or _now()
        return json.dumps(_jsonable(content), sort_keys=True, indent=4)

    def write(self, directory: str, format: str = "both") -> List[str]:
        """
        Writes the report into the directory.
        :param format: one of "csv", "json" or "both".
        :returns the written paths.
        """
        os.makedirs(directory, exist_ok=True)
        timestamp = _now()
        paths = []
        if format in ("csv", "both"):
            paths.append(_write(os.path.join(directory, "{}.csv".format(self.experiment)), self.toCSV(timestamp)))
        if format in ("json", "both"):
            paths.append(_write(os.path.join(directory, "{}.json".format(self.experiment)), self.toJSON(timestamp)))
        return paths

    def __str__(self):
        lines = ["{} [{}]".format(self.experiment, self.status)]
        for row in self.rows:
            where = ", ".join("{}={}".format(key, _format(getattr(row, key))) for key in ("p", "R", "t", "s")
                              if getattr(row, key) is not None)
            stderr = " +- {:.3g}".format(row.stderr) if row.stderr is not None else ""
            lines.append("  {:<28} {:>14.6g}{} {} {}".format(row.statistic, row.value, stderr, where, row.status))
        lines.extend("  note: {}".format(note) for note in self.notes)
        return "\n".join(lines)


def write_summary(directory: str, report: ExperimentReport, artifacts: List[str]) -> str:
    """ Writes summary.json, the machine-readable PASS/FAIL/INCONCLUSIVE verdict of a run. """
    content = {
        "experiment": report.experiment,
        "status": report.status,
        "exit_code": report.exit_code(),
        "artifacts": [os.path.basename(path) for path in artifacts]
    }
    return _write(os.path.join(directory, "summary.json"), json.dumps(content, sort_keys=True, indent=4))


def _now() -> str:
    return datetime.now(timezone.utc).isoformat(timespec="seconds")


def _write(path: str, content: str) -> str:
    with open(path, "w") as f:
        f.write(content)
    logger.debug("Wrote {}".format(path))
    return path
