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

import math
import os
from pathlib import Path

import numpy as np
import pytest

import mace

ROOT = Path(__file__).resolve().parents[2]


def test_peak_and_valley_examples():
    assert mace.dualistic_conv([2, 2, 2], [1, 1, 1], gamma=3, sigma=3) == pytest.approx([2.0])
    assert mace.dualistic_conv([1, 1, 10], [1, 1, 1], gamma=7)[0] == pytest.approx((2 + 1e7) ** (1 / 7))
    assert mace.dualistic_conv([1, 1, 0.1], [1, 1, 1], gamma=-3)[0] == pytest.approx(1002 ** (-1 / 3))
    assert mace.freq_pool([1, 9, 2, 2], 2, 7, 1.0)[1] == pytest.approx(2 * 2 ** (1 / 7))


def test_errors_map_to_python_exceptions():
    with pytest.raises(mace.DataError):
        mace.dualistic_conv([1, 2], [1, 1], gamma=4)
    with pytest.raises(mace.NumericalError):
        mace.dualistic_conv([1, 0, 2], [1, 1, 1], gamma=-3)
    assert issubclass(mace.DataError, mace.Error)


def test_amplify_time_shape_and_spike_spread():
    hp = mace.HyperParams()
    hp.kernel_len = 3
    hp.sigma_t = 3.0
    x = np.array([[0.0, 0.0, 5.0, 0.0, 0.0]])
    out = mace.amplify_time(x, hp)
    assert out.shape == (1, 5)
    assert np.count_nonzero(np.abs(out[0]) > 1e-9) == 3


def test_dft_round_trip_against_numpy():
    rng = np.random.default_rng(0)
    x = rng.normal(size=(3, 40))
    basis = [list(range(21))] * 3
    coeffs = mace.ca_dft(x, basis)
    ref = np.fft.rfft(x, axis=1)
    assert np.allclose(np.array(coeffs), ref, atol=1e-12)
    back = mace.ca_idft(coeffs, basis, 40)
    assert np.max(np.abs(back - x)) < 1e-9
    assert mace.dft_amplitudes(x[0]) == pytest.approx(np.abs(ref[0]).tolist())


def test_select_basis_picks_dominant_lines():
    t = np.arange(40)
    windows = [np.sin(2 * np.pi * (3 if i % 2 == 0 else 7) * t / 40)[None, :] for i in range(6)]
    assert mace.select_basis(windows, 2) == [[3, 7]]


def test_thresholds_and_metrics():
    assert mace.prf1([1, 0, 1, 1], [1, 1, 0, 1]) == pytest.approx((2 / 3, 2 / 3, 2 / 3))
    t = mace.choose_threshold([1, 2, 3, 4], [0, 0, 1, 1])
    assert [s > t for s in [1, 2, 3, 4]] == [False, False, True, True]
    assert mace.choose_threshold([3, 1, 4, 1, 5], quantile=1.0) == 5.0
    assert mace.point_adjust([0, 0, 1, 0], [0, 1, 1, 0]) == [0, 1, 1, 0]


def test_theory_helpers():
    assert mace.theory.bound([0, 0, 0], [1, 1, 1], [1, 1, 1], 3) == pytest.approx(2 ** (2 / 3) * 3 * 6 ** (1 / 3))
    assert mace.theory.kl_recon_error([1] * 10, 5) == pytest.approx(math.log(2))
    assert mace.theory.gap([0.5, 0.3, 0.1, 0.1], [0.3, 0.3, 0.2, 0.2], 2) == pytest.approx(math.log(4 / 3))
    verdicts = mace.theory.run_suite(configs=20, samples=500, spectra=5, trials=500, max_n=5)
    assert all(v["pass"] for v in verdicts)


def test_run_on_the_bundled_fixture(tmp_path):
    config = tmp_path / "quick.conf"
    text = (ROOT / "configs" / "multi_pattern.conf").read_text()
    text = text.replace("epochs = 300", "epochs = 10")
    text = text.replace("synth_train_length = 1200", "synth_train_length = 400")
    text = text.replace("synth_test_length = 1200", "synth_test_length = 400")
    text = text.replace("synth_anomaly_duration = 80", "synth_anomaly_duration = 40")
    config.write_text(text)
    report = mace.run(str(config), out_dir=str(tmp_path / "out"))
    assert len(report["services"]) == 10
    assert all(g["ok"] for g in report["groups"])
    assert 0.0 <= report["macro"]["f1"] <= 1.0
    lines = (tmp_path / "out" / "metrics.csv").read_text().splitlines()
    assert len(lines) == 12 and lines[-1].startswith("macro,")
