# Copyright 2026 The Newton-GRAPE Authors. All Rights Reserved.
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#     http://www.apache.org/licenses/LICENSE-2.0
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Newton-Raphson GRAPE optimal control for small spin systems."""

import json

from ._core import (
    InvalidInput,
    NumericalError,
    Problem,
    expm,
    preset_json,
    preset_names,
    rfo_step,
    slice_propagators,
    trm_regularize,
)
from ._core import run as _run

__all__ = [
    "InvalidInput",
    "NumericalError",
    "Problem",
    "expm",
    "load",
    "preset",
    "preset_names",
    "rfo_step",
    "run",
    "slice_propagators",
    "trm_regularize",
]


def preset(name):
    """Built-in problem as a dict."""
    return json.loads(preset_json(name))


def load(config=None, preset=""):
    """Problem from a config dict (merged over `preset`, if given)."""
    return Problem(json.dumps(config) if config else "", preset)


def run(config=None, preset="", out="grape_out"):
    """Optimise and write the CSV/JSON outputs to `out`."""
    return _run(json.dumps(config) if config else "", preset, str(out))
