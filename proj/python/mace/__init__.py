# Copyright 2026 The MACE Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#      http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

"""Frequency-domain anomaly detection with dualistic convolution."""

from ._core import (
    DataError,
    Error,
    HyperParams,
    NumericalError,
    amplify_time,
    ca_dft,
    ca_idft,
    choose_threshold,
    dft_amplitudes,
    dualistic_conv,
    freq_pool,
    point_adjust,
    prf1,
    run,
    select_basis,
    theory,
)

__all__ = [
    "DataError",
    "Error",
    "HyperParams",
    "NumericalError",
    "amplify_time",
    "ca_dft",
    "ca_idft",
    "choose_threshold",
    "dft_amplitudes",
    "dualistic_conv",
    "freq_pool",
    "point_adjust",
    "prf1",
    "run",
    "select_basis",
    "theory",
]
