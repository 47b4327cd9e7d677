"""Label sources for encoded instances.

A provider maps batches of points in [0, 1]^D to integer labels. Variants:
a stored label column keyed by row identity, built-in geometric oracles,
an external command speaking a line-delimited JSON protocol, and boolean
perturbation sampling around a query vector labeled by an inner provider.
"""

from __future__ import annotations

import json
import select
import shlex
import subprocess
from dataclasses import dataclass

import numpy as np

from .errors import ProviderError

EXTERNAL_CHUNK_SIZE = 1024

# perturbation-sampling defaults; tune per dataset
DEFAULT_FLIP_PROB = 0.1
DEFAULT_SAMPLE_COUNT = 2000


class PredictionProvider:
    """Interface: ``predict(points) -> labels`` for an (N, D) batch."""

    def predict(self, points: np.ndarray) -> np.ndarray:  # pragma: no cover
        raise NotImplementedError


def predict_batch(provider: PredictionProvider, points: np.ndarray) -> np.ndarray:
    """Label a batch, validating shape in and labels out."""
    X = np.asarray(points, dtype=np.float64)
    if X.ndim != 2:
        raise ProviderError(f"points must be a 2-D batch, got shape {X.shape}")
    labels = np.asarray(provider.predict(X))
    if labels.shape != (X.shape[0],):
        raise ProviderError(
            f"provider returned {labels.shape} labels for {X.shape[0]} points")
    if not np.issubdtype(labels.dtype, np.integer):
        as_int = labels.astype(np.int64)
        if not np.array_equal(as_int, labels):
            raise ProviderError("provider returned non-integer labels")
        labels = as_int
    return labels.astype(np.int64)


class StoredColumnProvider(PredictionProvider):
    """Labels for the rows of a known dataset, matched by row identity."""

    def __init__(self, points: np.ndarray, labels: np.ndarray):
        X = np.ascontiguousarray(points, dtype=np.float64)
        labels = np.asarray(labels, dtype=np.int64)
        if len(labels) != len(X):
            raise ProviderError(
                f"label column has {len(labels)} entries for {len(X)} rows")
        if labels.min(initial=0) < 0:
            raise ProviderError("labels must be non-negative integers")
        self._labels = labels
        self._index = {}
        for i, row in enumerate(X):
            self._index.setdefault(row.tobytes(), i)

    def predict(self, points: np.ndarray) -> np.ndarray:
        X = np.ascontiguousarray(points, dtype=np.float64)
        out = np.empty(len(X), dtype=np.int64)
        for i, row in enumerate(X):
            idx = self._index.get(row.tobytes())
            if idx is None:
                raise ProviderError(
                    "stored-column provider only labels rows of its dataset",
                    point_index=i)
            out[i] = self._labels[idx]
        return out


@dataclass(frozen=True)
class SyntheticShape:
    """Geometry of a synthetic positive-class region in [0, 1]^D.

    kinds: ``rectangle`` (l, u per axis), ``circle`` (center, radius),
    ``union_of_rectangles`` (list of (l, u) pairs), ``discrete_strip``
    (one axis takes declared positions; a subset of them is positive).
    """

    kind: str
    l: tuple[float, ...] | None = None
    u: tuple[float, ...] | None = None
    center: tuple[float, ...] | None = None
    radius: float | None = None
    rectangles: tuple[tuple[tuple[float, ...], tuple[float, ...]], ...] | None = None
    axis: int | None = None
    positive_levels: tuple[float, ...] | None = None

    def __post_init__(self):
        if self.kind == "circle" and (self.radius is None or self.radius <= 0):
            raise ValueError("circle needs a positive radius")

    def label(self, points: np.ndarray) -> np.ndarray:
        X = np.atleast_2d(np.asarray(points, dtype=np.float64))
        if self.kind == "rectangle":
            inside = ((X >= np.asarray(self.l)) & (X <= np.asarray(self.u))).all(axis=1)
        elif self.kind == "circle":
            inside = np.linalg.norm(X - np.asarray(self.center), axis=1) <= self.radius
        elif self.kind == "union_of_rectangles":
            inside = np.zeros(len(X), dtype=bool)
            for lo, hi in self.rectangles:
                inside |= ((X >= np.asarray(lo)) & (X <= np.asarray(hi))).all(axis=1)
        elif self.kind == "discrete_strip":
            col = X[:, self.axis]
            inside = np.zeros(len(X), dtype=bool)
            for lvl in self.positive_levels:
                inside |= np.abs(col - lvl) <= 1e-9
        else:
            raise ValueError(f"unknown shape kind {self.kind!r}")
        return inside.astype(np.int64)


class SyntheticOracle(PredictionProvider):
    """Deterministic labels from a geometric shape."""

    def __init__(self, shape: SyntheticShape):
        self.shape = shape

    def predict(self, points: np.ndarray) -> np.ndarray:
        return self.shape.label(points)


class ExternalCommandProvider(PredictionProvider):
    """Labels from a child process.

    Protocol: each request is one line on the child's stdin holding a JSON
    array of points (each point a JSON array of numbers); the child answers
    with one line holding a JSON array of integer labels of equal length.
    Requests are serialized to a single long-lived child; this provider is
    not safe for concurrent use.
    """

    def __init__(self, command: str, timeout_s: float = 30.0, chunk_size: int = EXTERNAL_CHUNK_SIZE):
        self.command = command
        self.timeout_s = timeout_s
        self.chunk_size = chunk_size
        self._proc: subprocess.Popen | None = None
        self._buffer = b""

    def _ensure_child(self):
        if self._proc is None or self._proc.poll() is not None:
            self._proc = subprocess.Popen(
                shlex.split(self.command),
                stdin=subprocess.PIPE,
                stdout=subprocess.PIPE,
            )
            self._buffer = b""

    def close(self):
        if self._proc is not None and self._proc.poll() is None:
            self._proc.stdin.close()
            try:
                self._proc.wait(timeout=5.0)
            except subprocess.TimeoutExpired:
                self._proc.kill()
                self._proc.wait()
        self._proc = None

    def __enter__(self):
        return self

    def __exit__(self, *exc):
        self.close()

    def __del__(self):  # best effort; close() is the real contract
        try:
            self.close()
        except Exception:
            pass

    def _read_line(self, offset: int) -> bytes:
        import time

        deadline = time.monotonic() + self.timeout_s
        fd = self._proc.stdout.fileno()
        while b"\n" not in self._buffer:
            remaining = deadline - time.monotonic()
            if remaining <= 0:
                self._proc.kill()
                raise ProviderError(
                    f"predictor command timed out after {self.timeout_s}s", point_index=offset)
            ready, _, _ = select.select([fd], [], [], remaining)
            if not ready:
                continue
            chunk = self._proc.stdout.read1(65536)
            if not chunk:
                code = self._proc.wait()
                raise ProviderError(
                    f"predictor command exited with status {code} before replying",
                    point_index=offset)
            self._buffer += chunk
        line, _, self._buffer = self._buffer.partition(b"\n")
        return line

    def predict(self, points: np.ndarray) -> np.ndarray:
        X = np.asarray(points, dtype=np.float64)
        out = np.empty(len(X), dtype=np.int64)
        self._ensure_child()
        for start in range(0, len(X), self.chunk_size):
            batch = X[start:start + self.chunk_size]
            request = json.dumps(batch.tolist()) + "\n"
            try:
                self._proc.stdin.write(request.encode("utf-8"))
                self._proc.stdin.flush()
            except (BrokenPipeError, OSError) as exc:
                code = self._proc.poll()
                raise ProviderError(
                    f"predictor command rejected input (exit status {code}): {exc}",
                    point_index=start) from exc
            line = self._read_line(start)
            try:
                reply = json.loads(line)
            except json.JSONDecodeError as exc:
                raise ProviderError(
                    f"predictor command sent malformed JSON: {line[:200]!r}",
                    point_index=start) from exc
            if not isinstance(reply, list) or len(reply) != len(batch):
                raise ProviderError(
                    f"predictor command replied with {len(reply) if isinstance(reply, list) else 'non-list'}"
                    f" labels for {len(batch)} points", point_index=start)
            for i, label in enumerate(reply):
                if not isinstance(label, int):
                    raise ProviderError(
                        f"predictor command sent a non-integer label {label!r}",
                        point_index=start + i)
                out[start + i] = label
        return out


def sample_perturbations(base: np.ndarray, flip_prob: float, count: int, seed: int) -> np.ndarray:
    """Boolean neighborhood of ``base``: each bit flips independently.

    Row 0 is always the unmodified base vector. Reproducible under a fixed
    seed.
    """
    base = np.asarray(base, dtype=np.float64)
    if base.ndim != 1 or not np.all((base == 0.0) | (base == 1.0)):
        raise ValueError("base must be a flat 0/1 vector")
    if count < 1:
        raise ValueError("count must be a positive integer")
    if not 0.0 <= flip_prob < 1.0:
        raise ValueError("flip_prob must lie in [0, 1)")
    rng = np.random.default_rng(seed)
    flips = rng.random((count, base.shape[0])) < flip_prob
    rows = np.abs(base - flips.astype(np.float64))
    rows[0] = base
    return rows


class BooleanPerturbationProvider(PredictionProvider):
    """Perturbation sampler around a boolean query, labeled by an inner provider.

    Used for data that arrives as bit vectors (word presence, region
    presence): the local dataset is sampled rather than taken from a table.
    """

    def __init__(
        self,
        base: np.ndarray,
        inner: PredictionProvider,
        flip_prob: float = DEFAULT_FLIP_PROB,
        count: int = DEFAULT_SAMPLE_COUNT,
    ):
        self.base = np.asarray(base, dtype=np.float64)
        self.inner = inner
        self.flip_prob = flip_prob
        self.count = count

    def sample(self, seed: int) -> np.ndarray:
        return sample_perturbations(self.base, self.flip_prob, self.count, seed)

    def predict(self, points: np.ndarray) -> np.ndarray:
        return self.inner.predict(points)
