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

"""
Named kernel and noise presets, e.g. "riesz(alpha=0.5)" or "centered-two-point(p=0.25, a=3, b=1, rate=2)".
"""

import re
import warnings
from collections import OrderedDict
from typing import Dict, List, Sequence, Tuple, Union

with warnings.catch_warnings():
    warnings.simplefilter("ignore")
    from fuzzywuzzy import process

from hamlevy.core.exception import ConfigurationError
from hamlevy.core.kernels import BoxKernel, GaussianKernel, KernelSpec, RieszKernel
from hamlevy.core.levy_noise import DiscreteJumpLaw, LevyMeasureSpec, UniformJumpLaw

_PRESET = re.compile(r"^\s*([A-Za-z][\w-]*)\s*(?:\((.*)\))?\s*$")

# name -> (ordered parameter names, defaults)
KERNEL_PRESETS = OrderedDict([
    ("gaussian", ((), {})),
    ("box", (("a",), {"a": 0.5})),
    ("riesz", (("alpha",), {"alpha": 0.5})),
])

NOISE_PRESETS = OrderedDict([
    ("rademacher", ((), {})),
    ("uniform", (("a",), {"a": 1.0})),
    ("centered-two-point", (("p", "a", "b"), {"p": 0.25, "a": 3.0, "b": 1.0})),
    ("two-point", (("p", "a", "b"), {"p": 0.5, "a": 2.0, "b": 1.0})),
])


def did_you_mean(name: str, choices: Sequence[str]) -> str:
    best = process.extractOne(name, list(choices))
    return ' Did you mean "{}"?'.format(best[0]) if best else ""


def _join(text: Union[str, Sequence[str]]) -> str:
    """ QSettings splits unquoted values at commas; rejoin them. """
    return text if isinstance(text, str) else ",".join(str(part) for part in text)


def parse_preset(text: Union[str, Sequence[str]], presets: Dict, section: str,
                 extra: Sequence[str] = ()) -> Tuple[str, Dict[str, float]]:
    """
    Parses "name(value, key=value, ...)" against a preset table.
    :param extra: keyword-only parameters accepted by every preset (e.g. rate).
    :returns the preset name and its parameters with defaults filled in.
    :raises ConfigurationError: on unknown presets, unknown parameters or non-numeric values.
    """
    text = _join(text)
    match = _PRESET.match(text)
    if not match:
        raise ConfigurationError("{}: cannot parse '{}'".format(section, text))
    name, arguments = match.group(1).lower(), match.group(2)
    if name not in presets:
        raise ConfigurationError("{}: unknown preset '{}'.{}".format(section, name, did_you_mean(name, presets)))
    order, defaults = presets[name]
    parameters = dict(defaults)
    positional = 0
    for argument in [part.strip() for part in (arguments or "").split(",") if part.strip()]:
        key, _, value = argument.rpartition("=")
        key = key.strip()
        if not key:
            if positional >= len(order):
                raise ConfigurationError("{}: too many values for '{}'".format(section, name))
            key = order[positional]
            positional += 1
        if key not in order and key not in extra:
            raise ConfigurationError("{}: '{}' has no parameter '{}'.{}".format(
                section, name, key, did_you_mean(key, list(order) + list(extra))))
        try:
            parameters[key] = float(value)
        except ValueError:
            raise ConfigurationError("{}: parameter '{}' of '{}' must be a number, got '{}'".format(
                section, key, name, value.strip()))
    return name, parameters


def kernel_preset(text: Union[str, Sequence[str]], truncation_radius: float = 64.0) -> KernelSpec:
    """ :returns the kernel named by text; Riesz kernels are truncated at truncation_radius. """
    name, parameters = parse_preset(text, KERNEL_PRESETS, "kernel/shape")
    if name == "gaussian":
        return GaussianKernel()
    if name == "box":
        if parameters["a"] <= 0:
            raise ConfigurationError("kernel/shape: box half-width must be positive, got {}".format(parameters["a"]))
        return BoxKernel(parameters["a"])
    if not 0 < parameters["alpha"] < 1:
        raise ConfigurationError("kernel/shape: Riesz order must lie in (0, 1), got {}".format(parameters["alpha"]))
    return RieszKernel(parameters["alpha"], truncation_radius)


def noise_preset(text: Union[str, Sequence[str]]) -> LevyMeasureSpec:
    """ :returns the Levy measure named by text; every preset accepts an optional rate (default 1). """
    name, parameters = parse_preset(text, NOISE_PRESETS, "noise/law", extra=("rate",))
    rate = parameters.pop("rate", 1.0)
    if name == "rademacher":
        law = DiscreteJumpLaw([-1.0, 1.0], [0.5, 0.5], "rademacher")
    elif name == "uniform":
        law = UniformJumpLaw(parameters["a"])
    else:
        p, a, b = parameters["p"], parameters["a"], parameters["b"]
        if not 0 < p < 1 or a <= 0 or b <= 0:
            raise ConfigurationError("noise/law: '{}' needs 0 < p < 1 and a, b > 0, got p={}, a={}, b={}".format(
                name, p, a, b))
        if name == "centered-two-point" and abs(p * a - (1.0 - p) * b) > 1e-12 * max(a, b):
            raise ConfigurationError("noise/law: centered-two-point needs p*a = (1-p)*b, got {} != {}".format(
                p * a, (1.0 - p) * b))
        label = "{}(p={!r}, a={!r}, b={!r})".format(name, p, a, b)
        law = DiscreteJumpLaw([a, -b] if name == "centered-two-point" else [a, b], [p, 1.0 - p], label)
    return LevyMeasureSpec(law.label(), rate, law)


def list_presets() -> str:
    """ :returns a table of all kernel presets (with their scaling exponent) and noise presets (with moments). """
    lines = []
    row_format = "{:<40}  {:>6}  {:>10}  {:>10}"
    lines.append(row_format.format("Kernel", "beta", "reach", "L1 norm"))
    lines.append(row_format.format("------", "----", "-----", "-------"))
    for name, (order, defaults) in KERNEL_PRESETS.items():
        label = "{}({})".format(name, ", ".join("{}={!r}".format(key, defaults[key]) for key in order)) \
            if order else name
        kernel = kernel_preset(label)
        l1 = "inf" if kernel.is_riesz() else "{:.4g}".format(kernel.l1_norm)
        lines.append(row_format.format(label, "{:.3g}".format(kernel.beta()), "{:.4g}".format(kernel.reach), l1))
    lines.append("")
    row_format = "{:<40}  {:>8}  {:>8}  {:>8}  {:>8}  {:>8}"
    lines.append(row_format.format("Noise", "m_1", "m_2", "m_3", "m_4", "m_p"))
    lines.append(row_format.format("-----", "---", "---", "---", "---", "---"))
    for name, (order, defaults) in NOISE_PRESETS.items():
        label = "{}({})".format(name, ", ".join("{}={!r}".format(key, defaults[key]) for key in order)) \
            if order else name
        spec = noise_preset(label)
        moments = ["{:.4g}".format(spec.mean)] + ["{:.4g}".format(spec.moment(p)) for p in (2, 3, 4)]
        mp = "1" if name == "rademacher" else "a^p/(p+1)" if name == "uniform" else "p a^p+(1-p) b^p"
        lines.append(row_format.format(label, *moments, mp))
    return "\n".join(lines)


def preset_names() -> List[str]:
    return list(KERNEL_PRESETS) + list(NOISE_PRESETS)
