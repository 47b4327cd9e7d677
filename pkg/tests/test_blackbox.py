"""Prediction providers: oracles, stored labels, subprocess, perturbations."""

import json
import math
import sys

import numpy as np
import pytest

from maire import (
    ExternalCommandProvider,
    StoredColumnProvider,
    SyntheticOracle,
    SyntheticShape,
    predict_batch,
    sample_perturbations,
)
from maire.errors import ProviderError

RECT = SyntheticShape(kind="rectangle", l=(0.3, 0.3), u=(0.7, 0.7))
CIRCLE = SyntheticShape(kind="circle", center=(0.5, 0.5), radius=0.2)


class TestSyntheticOracles:
    def test_rectangle_interior(self):
        assert predict_batch(SyntheticOracle(RECT), np.array([[0.5, 0.5]]))[0] == 1

    def test_circle_exterior(self):
        assert predict_batch(SyntheticOracle(CIRCLE), np.array([[0.9, 0.9]]))[0] == 0

    def test_grid_agreement_with_geometry(self):
        xs = np.linspace(0, 1, 101)
        grid = np.array([[x, y] for x in xs for y in xs])
        for shape in (RECT, CIRCLE,
                      SyntheticShape(kind="union_of_rectangles",
                                     rectangles=(((0.0, 0.0), (0.2, 0.2)),
                                                 ((0.6, 0.6), (0.9, 0.8))))):
            got = predict_batch(SyntheticOracle(shape), grid)
            expected = np.zeros(len(grid), dtype=int)
            for i, (x, y) in enumerate(grid):
                if shape.kind == "rectangle":
                    expected[i] = int(shape.l[0] <= x <= shape.u[0] and shape.l[1] <= y <= shape.u[1])
                elif shape.kind == "circle":
                    expected[i] = int(math.hypot(x - 0.5, y - 0.5) <= shape.radius)
                else:
                    expected[i] = int(any(lo[0] <= x <= hi[0] and lo[1] <= y <= hi[1]
                                          for lo, hi in shape.rectangles))
            np.testing.assert_array_equal(got, expected)

    def test_discrete_strip_levels(self):
        shape = SyntheticShape(kind="discrete_strip", axis=0, positive_levels=(2 / 6, 3 / 6))
        pts = np.array([[1 / 6, 0.4], [2 / 6, 0.4], [3 / 6, 0.9], [5 / 6, 0.1]])
        np.testing.assert_array_equal(predict_batch(SyntheticOracle(shape), pts), [0, 1, 1, 0])

    def test_invalid_radius(self):
        with pytest.raises(ValueError):
            SyntheticShape(kind="circle", center=(0.5, 0.5), radius=0.0)


class TestStoredColumn:
    def test_row_lookup(self):
        rng = np.random.default_rng(0)
        X = rng.random((20, 3))
        labels = rng.integers(0, 4, 20)
        provider = StoredColumnProvider(X, labels)
        got = predict_batch(provider, X[[3, 11, 0]])
        np.testing.assert_array_equal(got, labels[[3, 11, 0]])

    def test_unknown_row_carries_index(self):
        X = np.zeros((4, 2))
        provider = StoredColumnProvider(X, np.zeros(4, dtype=int))
        with pytest.raises(ProviderError) as info:
            provider.predict(np.array([[0.0, 0.0], [0.3, 0.3]]))
        assert info.value.point_index == 1

    def test_length_mismatch_rejected(self):
        with pytest.raises(ProviderError):
            StoredColumnProvider(np.zeros((3, 2)), np.zeros(2, dtype=int))


class TestPerturbations:
    def test_zero_flip_copies(self):
        base = np.array([1.0, 0.0, 1.0])
        rows = sample_perturbations(base, 0.0, 5, seed=1)
        np.testing.assert_array_equal(rows, np.tile(base, (5, 1)))

    def test_base_always_first_row(self):
        base = np.ones(10)
        rows = sample_perturbations(base, 0.4, 50, seed=2)
        np.testing.assert_array_equal(rows[0], base)

    def test_same_seed_reproduces(self):
        base = np.zeros(15)
        a = sample_perturbations(base, 0.3, 100, seed=9)
        b = sample_perturbations(base, 0.3, 100, seed=9)
        np.testing.assert_array_equal(a, b)

    def test_mean_hamming_distance(self):
        base = np.zeros(20)
        rows = sample_perturbations(base, 0.5, 10000, seed=3)
        hamming = np.abs(rows - base).sum(axis=1)
        assert hamming.mean() == pytest.approx(10.0, abs=0.3)

    def test_count_zero_rejected(self):
        with pytest.raises(ValueError):
            sample_perturbations(np.zeros(3), 0.5, 0, seed=0)

    def test_non_boolean_base_rejected(self):
        with pytest.raises(ValueError):
            sample_perturbations(np.array([0.5, 1.0]), 0.5, 3, seed=0)


class TestBooleanPerturbationProvider:
    def test_samples_and_labels_around_base(self):
        from maire import BooleanPerturbationProvider

        base = np.ones(12)
        # inner model: positive while bits 0..2 are all present
        inner = SyntheticOracle(SyntheticShape(
            kind="rectangle", l=(1.0, 1.0, 1.0) + (0.0,) * 9, u=(1.0,) * 12))
        provider = BooleanPerturbationProvider(base, inner, flip_prob=0.2, count=500)
        points = provider.sample(seed=4)
        assert points.shape == (500, 12)
        np.testing.assert_array_equal(points[0], base)
        labels = predict_batch(provider, points)
        expected = (points[:, :3] == 1.0).all(axis=1).astype(int)
        np.testing.assert_array_equal(labels, expected)


ECHO_SCRIPT = """
import json, sys
labels = json.load(open(sys.argv[1]))
cursor = 0
for line in sys.stdin:
    points = json.loads(line)
    reply = labels[cursor:cursor + len(points)]
    cursor += len(points)
    print(json.dumps(reply), flush=True)
"""


class TestExternalCommand:
    def test_round_trips_against_stored_column(self, tmp_path):
        rng = np.random.default_rng(4)
        X = rng.random((700, 3))
        labels = rng.integers(0, 3, 700)
        labels_file = tmp_path / "labels.json"
        labels_file.write_text(json.dumps([int(v) for v in labels]))
        script = tmp_path / "echo.py"
        script.write_text(ECHO_SCRIPT)
        stored = predict_batch(StoredColumnProvider(X, labels), X)
        with ExternalCommandProvider(
                f"{sys.executable} {script} {labels_file}", timeout_s=20.0,
                chunk_size=256) as provider:
            external = predict_batch(provider, X)
        np.testing.assert_array_equal(external, stored)

    def test_nonzero_exit_reported(self):
        with ExternalCommandProvider(f"{sys.executable} -c 'import sys; sys.exit(3)'") as provider:
            with pytest.raises(ProviderError, match="status 3"):
                provider.predict(np.zeros((2, 1)))

    def test_malformed_reply_reported(self):
        cmd = f"{sys.executable} -c \"print('not json', flush=True)\""
        with ExternalCommandProvider(cmd) as provider:
            with pytest.raises(ProviderError, match="malformed"):
                provider.predict(np.zeros((2, 1)))

    def test_wrong_length_reply_reported(self):
        cmd = f"{sys.executable} -c \"[print('[1]', flush=True) for _ in iter(input, None)]\""
        with ExternalCommandProvider(cmd) as provider:
            with pytest.raises(ProviderError, match="labels for 3 points"):
                provider.predict(np.zeros((3, 1)))

    def test_timeout_carries_batch_offset(self):
        cmd = f"{sys.executable} -c 'import time; time.sleep(30)'"
        with ExternalCommandProvider(cmd, timeout_s=0.2) as provider:
            with pytest.raises(ProviderError, match="timed out") as info:
                provider.predict(np.zeros((2, 1)))
            assert info.value.point_index == 0

    def test_non_integer_label_reported(self):
        cmd = f"{sys.executable} -c \"[print('[0.5, 1]', flush=True) for _ in iter(input, None)]\""
        with ExternalCommandProvider(cmd) as provider:
            with pytest.raises(ProviderError) as info:
                provider.predict(np.zeros((2, 1)))
            assert info.value.point_index == 0


class TestPredictBatch:
    def test_requires_2d(self):
        with pytest.raises(ProviderError, match="2-D"):
            predict_batch(SyntheticOracle(RECT), np.zeros(3))

    def test_label_count_validated(self):
        class Broken:
            def predict(self, points):
                return np.zeros(len(points) + 1, dtype=int)

        with pytest.raises(ProviderError, match="labels for"):
            predict_batch(Broken(), np.zeros((3, 2)))
