"""Seeded two-modality synthetic classification data.

Each class gets a latent center in [0.2, 0.8]^D; samples are the
center plus Gaussian noise, clamped to [0, 1]. The first D/2
coordinates form modality A and the last D/2 form modality B, so the
two carry complementary information by construction. The student-side
view is modality A after darkening and gamma correction; all three
views of a split share labels and sample order.

Train and test are drawn from distinct derived seed streams, so the
splits are disjoint by construction and each is regenerable bit-exactly
from (seed, parameters) alone.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import ValidationError
from .preprocess import (
    DARK_FACTOR_DEFAULT,
    GAMMA_DEFAULT,
    QUANT_LEVELS_DEFAULT,
    darken,
    gamma_correct,
)
from .rng import SplitMix64, derive_seed

MODALITY_A = "A"
MODALITY_B = "B"
MODALITY_A_DARK = "A_dark"
MODALITIES = (MODALITY_A, MODALITY_B, MODALITY_A_DARK)
SPLITS = ("train", "test")

CENTER_LO = 0.2
CENTER_HI = 0.8


@dataclass
class DataParams:
    n_train: int = 2000
    n_test: int = 1000
    n_classes: int = 11
    dim: int = 20
    noise: float = 0.15
    dark_factor: float = DARK_FACTOR_DEFAULT
    quant_levels: int = QUANT_LEVELS_DEFAULT
    gamma: float = GAMMA_DEFAULT

    def validate(self) -> None:
        if self.n_classes < 2:
            raise ValidationError("need at least 2 classes")
        if self.dim < 2 or self.dim % 2 != 0:
            raise ValidationError("dim must be an even integer >= 2 (two modality halves)")
        if self.n_train < 1 or self.n_test < 1:
            raise ValidationError("split sizes must be positive")
        if self.noise < 0.0:
            raise ValidationError("noise must be nonnegative")


@dataclass
class Dataset:
    features: np.ndarray
    labels: np.ndarray
    n_classes: int
    modality: str
    split: str

    def __post_init__(self):
        self.features = np.asarray(self.features, dtype=np.float64)
        self.labels = np.asarray(self.labels, dtype=np.int64)
        if self.features.ndim != 2 or self.features.shape[0] != self.labels.size:
            raise ValidationError("features and labels misaligned")
        if self.modality not in MODALITIES:
            raise ValidationError(f"unknown modality tag {self.modality!r}")
        if self.split not in SPLITS:
            raise ValidationError(f"unknown split tag {self.split!r}")

    @property
    def n(self) -> int:
        return self.features.shape[0]

    @property
    def dim(self) -> int:
        return self.features.shape[1]


@dataclass
class SyntheticData:
    """All six views: {train, test} x {A, B, A_dark}."""

    train_a: Dataset
    train_b: Dataset
    train_dark: Dataset
    test_a: Dataset
    test_b: Dataset
    test_dark: Dataset

    def view(self, split: str, modality: str) -> Dataset:
        key = {
            ("train", MODALITY_A): "train_a",
            ("train", MODALITY_B): "train_b",
            ("train", MODALITY_A_DARK): "train_dark",
            ("test", MODALITY_A): "test_a",
            ("test", MODALITY_B): "test_b",
            ("test", MODALITY_A_DARK): "test_dark",
        }.get((split, modality))
        if key is None:
            raise ValidationError(f"no view for split={split!r} modality={modality!r}")
        return getattr(self, key)


def _draw_split(stream: SplitMix64, centers: np.ndarray, n: int, noise: float):
    n_classes, dim = centers.shape
    features = np.empty((n, dim), dtype=np.float64)
    labels = np.empty(n, dtype=np.int64)
    for i in range(n):
        label = stream.below(n_classes)
        labels[i] = label
        row = centers[label]
        for j in range(0, dim, 2):
            g1, g2 = stream.gauss_pair()
            features[i, j] = row[j] + noise * g1
            features[i, j + 1] = row[j + 1] + noise * g2
    np.clip(features, 0.0, 1.0, out=features)
    return features, labels


def gen_dataset(seed: int, params: DataParams | None = None) -> SyntheticData:
    """Generate the six aligned dataset views for one seed.

    Derived streams: index 0 for class centers, 1 for the train split,
    2 for the test split. Per sample the draw order is label first,
    then dim/2 Box-Muller pairs, which pins the bit layout of the data.
    """
    params = params or DataParams()
    params.validate()

    center_stream = SplitMix64(derive_seed(seed, 0))
    centers = np.empty((params.n_classes, params.dim), dtype=np.float64)
    for c in range(params.n_classes):
        for j in range(params.dim):
            centers[c, j] = CENTER_LO + (CENTER_HI - CENTER_LO) * center_stream.uniform()

    half = params.dim // 2
    out = {}
    for split, n, stream_index in (("train", params.n_train, 1), ("test", params.n_test, 2)):
        features, labels = _draw_split(
            SplitMix64(derive_seed(seed, stream_index)), centers, n, params.noise
        )
        a = features[:, :half]
        b = features[:, half:]
        dark = gamma_correct(
            darken(a, params.dark_factor, params.quant_levels), params.gamma
        )
        out[(split, MODALITY_A)] = Dataset(a, labels, params.n_classes, MODALITY_A, split)
        out[(split, MODALITY_B)] = Dataset(b, labels.copy(), params.n_classes, MODALITY_B, split)
        out[(split, MODALITY_A_DARK)] = Dataset(
            dark, labels.copy(), params.n_classes, MODALITY_A_DARK, split
        )
    return SyntheticData(
        train_a=out[("train", MODALITY_A)],
        train_b=out[("train", MODALITY_B)],
        train_dark=out[("train", MODALITY_A_DARK)],
        test_a=out[("test", MODALITY_A)],
        test_b=out[("test", MODALITY_B)],
        test_dark=out[("test", MODALITY_A_DARK)],
    )
