# Copyright 2026 The voxprotect Authors
#
# Licensed under the Apache License, Version 2.0 (the "License");
# you may not use this file except in compliance with the License.
# You may obtain a copy of the License at
#
#     http://www.apache.org/licenses/LICENSE-2.0
#
# Unless required by applicable law or agreed to in writing, software
# distributed under the License is distributed on an "AS IS" BASIS,
# WITHOUT WARRANTIES OR CONDITIONS OF ANY KIND, either express or implied.
# See the License for the specific language governing permissions and
# limitations under the License.

import math

import numpy as np
import pytest

import voxprotect as vp


def test_registry_has_34_named_slots():
    names = vp.feature_names()
    assert len(names) == 34
    assert len(set(names)) == 34
    assert names[-1] == "spectral_cog"


def test_pitch_of_a_synthetic_voice():
    x = vp.synth_voice(f0_hz=150.0, duration_s=1.0, seed=3)
    assert x.dtype == np.float64
    assert x.shape == (vp.SAMPLE_RATE_HZ,)
    assert x.min() == 0.0 and x.max() == 1.0
    feats = vp.extract_features(x)
    assert feats["pitch_mean"] == pytest.approx(150.0, rel=0.01)


def test_corpus_labels_and_ids():
    corpus = vp.make_corpus(n_per_gender=2, duration_s=0.5, seed=4, id_prefix="py-")
    assert [w["gender"] for w in corpus] == ["F", "F", "M", "M"]
    assert corpus[0]["source_id"].startswith("py-f")
    assert "adaptation=default" in corpus[0]["tags"]
    assert vp.labels(corpus) == [1, 1, -1, -1]


def test_svm_separates_blobs_and_round_trips():
    rng = np.random.default_rng(0)
    y = np.array([1] * 30 + [-1] * 30)
    x = rng.normal(size=(60, 3)) + 3.0 * y[:, None]
    m = vp.train_svm(x, y.tolist(), c=1.0, seed=2)
    assert m.kind == "svm_hinge"
    assert m.model_id.startswith("svm-")
    pred = m.predict(x)
    assert pred == ["F" if v > 0 else "M" for v in y]
    back = vp.LinearModel.from_json(m.to_json())
    np.testing.assert_array_equal(back.decision_function(x), m.decision_function(x))


def test_rfe_finds_the_informative_column():
    rng = np.random.default_rng(5)
    y = np.array([1, -1] * 30)
    x = rng.normal(size=(60, 6))
    x[:, 4] += 1.5 * y
    assert vp.svm_rfe(x, y.tolist(), 1)["top_n"] == [4]


def test_ridge_midpoint_threshold():
    # Class means 105 and 205: the boundary sits at 155.
    x = np.array([[100.0], [110.0], [200.0], [210.0]])
    m = vp.train_ridge(x, [-1, -1, 1, 1], column=0, lam=1e-9)
    assert m.predict(np.array([[156.0], [160.0], [154.0]])) == ["F", "F", "M"]


def test_pgd_respects_the_budget():
    cnn = vp.Cnn(seed=7)
    assert cnn.model_id.startswith("m5-")
    waves = [vp.synth_voice(f0_hz=f, duration_s=0.5, seed=i) for i, f in enumerate((120.0, 210.0))]
    out = vp.pgd_perturb(cnn, waves, ["M", "F"], alpha=0.001, iterations=5, epsilon=0.003,
                         segment_s=0.5)
    assert len(out) == 2
    for clean, r in zip(waves, out):
        delta = r["samples"] - clean
        assert np.abs(delta).max() <= 0.003 + 1e-9
        assert r["samples"].min() >= 0.0 and r["samples"].max() <= 1.0
        assert len(r["loss_trace"]) == 6
        assert math.isclose(r["delta_linf"], np.abs(delta).max(), rel_tol=1e-9, abs_tol=1e-12)


def test_checkpoint_round_trip(tmp_path):
    cnn = vp.Cnn(seed=9)
    path = str(tmp_path / "m.ckpt")
    cnn.save(path)
    back = vp.Cnn.load(path)
    assert back.model_id == cnn.model_id
    x = [vp.synth_voice(duration_s=0.5)]
    assert back.logits(x) == cnn.logits(x)


def test_errors_map_to_the_exception_hierarchy(tmp_path):
    with pytest.raises(vp.DataError):
        vp.load_wav(str(tmp_path / "missing.wav"))
    bad = tmp_path / "bad.ckpt"
    bad.write_bytes(b"nope")
    with pytest.raises(vp.FormatError):
        vp.Cnn.load(str(bad))
    with pytest.raises(vp.ConfigError):
        vp.synth_voice(f0_hz=-5.0)
    with pytest.raises(vp.ShapeError):
        vp.Cnn(seed=1).logits([np.zeros(10)])
    assert issubclass(vp.FormatError, vp.DataError)
    assert issubclass(vp.DataError, vp.Error)
