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

"""Gender-inference protection toolkit: synthesis, features, models, PGD."""

from voxprotect._core import (
    SAMPLE_RATE_HZ,
    Cnn,
    ConfigError,
    DataError,
    EmptyInputError,
    Error,
    FormatError,
    LinearModel,
    ModeError,
    NumericError,
    RateError,
    ShapeError,
    extract_features,
    feature_names,
    load_corpus,
    load_wav,
    make_corpus,
    pgd_perturb,
    svm_rfe,
    synth_voice,
    train_ridge,
    train_svm,
)

__version__ = "0.1.0"


def feature_matrix(waves):
    """Rows of the 34 features, in registry order, for a list of arrays."""
    import numpy as np

    names = feature_names()
    rows = [extract_features(w) for w in waves]
    return np.array([[r[n] for n in names] for r in rows], dtype=float)


def labels(corpus):
    """+1 for F and -1 for M, as the linear models expect."""
    return [1 if w["gender"] == "F" else -1 for w in corpus]
