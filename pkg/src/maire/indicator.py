"""Soft box-membership surrogates and the exact coverage/precision measures.

The exact measures count dataset points inside an axis-aligned box. Their
differentiable surrogates replace each 0/1 comparison with ``gamma``, a
scaled sigmoid plus a step, so the objective keeps non-zero gradients
everywhere while staying within provable distance of the exact values.
"""

from __future__ import annotations

from dataclasses import dataclass, field, asdict

import numpy as np

from .errors import UndefinedPrecisionError


def _sigmoid(x: np.ndarray) -> np.ndarray:
    # two-sided form, overflow-free for large |x|
    ax = np.abs(x)
    e = np.exp(-ax)
    return np.where(x >= 0.0, 1.0 / (1.0 + e), e / (1.0 + e))


def _step(z: np.ndarray, c3: float) -> np.ndarray:
    # contribution of c3 * (sgn(z) * 0.5 + 0.5); exactly half the step at z == 0
    return np.where(z > 0.0, c3, np.where(z < 0.0, 0.0, 0.5 * c3))


@dataclass(frozen=True)
class ApproxConstants:
    """The seven constants shaping the soft indicator.

    ``c4 = c5 = 0.5`` and ``c3 = 1 - c1`` are structural: they make the
    step term contribute exactly c3 for positive arguments, 0 for negative
    ones and c3/2 at zero. ``c2`` controls sigmoid steepness, ``cl`` turns
    the upper-bound comparison into a soft >=, and ``ch`` is the threshold
    of the soft AND.
    """

    c1: float = 0.4
    c2: float = 15.0
    c3: float = 0.6
    c4: float = 0.5
    c5: float = 0.5
    cl: float = 0.02
    ch: float = 0.8

    def __post_init__(self):
        if not 0.0 < self.c1 < 1.0:
            raise ValueError(f"c1 must lie in (0, 1), got {self.c1}")
        if self.c2 <= 0.0:
            raise ValueError(f"c2 must be positive, got {self.c2}")
        if abs(self.c3 - (1.0 - self.c1)) > 1e-12:
            raise ValueError(f"c3 must equal 1 - c1, got c3={self.c3} c1={self.c1}")
        if self.c4 != 0.5 or self.c5 != 0.5:
            raise ValueError("c4 and c5 must both be 0.5")
        if not 0.0 < self.cl < 0.5:
            raise ValueError(f"cl must be a small positive offset, got {self.cl}")
        if not 0.0 < self.ch < 1.0:
            raise ValueError(f"ch must lie in (0, 1), got {self.ch}")

    @classmethod
    def with_c1(cls, c1: float, **kwargs) -> "ApproxConstants":
        """Build constants with ``c3`` derived from ``c1``."""
        return cls(c1=c1, c3=1.0 - c1, **kwargs)

    @classmethod
    def for_dimension(cls, dim: int) -> "ApproxConstants":
        """Constants scaled so the membership surrogate provably tracks the
        indicator in ``dim`` dimensions.

        Picks c1 = 1/(4 dim) and ch = 1 - 3/(16 dim), which satisfy
        c1 < 1/(2 dim) and (4 dim - 1)/(4 dim) < ch < 1 - c1/2. ``cl``
        shrinks with dimension: points less than cl above an upper bound
        sit in a soft band where the surrogate still reads them as inside,
        so the band must stay negligible relative to the 1/(4 dim) envelope.
        """
        if dim < 1:
            raise ValueError("dim must be >= 1")
        c1 = 1.0 / (4.0 * dim)
        return cls(
            c1=c1,
            c3=1.0 - c1,
            ch=1.0 - 3.0 / (16.0 * dim),
            cl=min(0.02, 1.0 / (1000.0 * dim)),
        )


@dataclass(frozen=True)
class BoxBounds:
    """Lower/upper bound vectors of an axis-aligned box in [0, 1]^D.

    ``l <= u`` is not required: an inverted pair is a legal optimizer state
    that simply admits nothing and has near-zero soft membership.
    """

    l: np.ndarray
    u: np.ndarray

    def __post_init__(self):
        l = np.asarray(self.l, dtype=np.float64)
        u = np.asarray(self.u, dtype=np.float64)
        if l.ndim != 1 or u.ndim != 1 or l.shape != u.shape:
            raise ValueError("l and u must be 1-D vectors of equal length")
        if l.min(initial=0.0) < -1e-12 or u.max(initial=1.0) > 1.0 + 1e-12:
            raise ValueError("bounds must lie in [0, 1]")
        object.__setattr__(self, "l", l)
        object.__setattr__(self, "u", u)

    @property
    def dim(self) -> int:
        return self.l.shape[0]

    def area(self) -> float:
        """Volume of the box (zero when any axis is inverted)."""
        return float(np.prod(np.maximum(self.u - self.l, 0.0)))

    def contains(self, x: np.ndarray) -> bool:
        return bool(np.all((np.asarray(x) >= self.l) & (np.asarray(x) <= self.u)))


def inside_mask(b: BoxBounds, points: np.ndarray) -> np.ndarray:
    """Exact membership mask: l_j <= x_j <= u_j on every axis.

    Bounds produced by gradient ascent almost never coincide with data
    values, so the boundary convention only matters for snapped discrete
    bounds; inclusive bounds keep the admitted level set identical before
    and after snapping, and let the full-range box cover every point.
    """
    X = np.asarray(points, dtype=np.float64)
    return ((X >= b.l) & (X <= b.u)).all(axis=1)


def gamma(z: float, k: ApproxConstants = ApproxConstants()) -> float:
    """Soft 0/1 indicator of ``z > 0``: c1*sigmoid(c2 z) + c3*(sgn(z)*c4 + c5).

    Evaluates to c1*sigmoid(c2 z) + c3 for z > 0, c1*sigmoid(c2 z) for
    z < 0, and exactly 0.5 at z = 0.
    """
    if z == 0.0:
        return 0.5
    return float(gamma_array(np.asarray([z], dtype=np.float64), k)[0])


def gamma_array(z: np.ndarray, k: ApproxConstants) -> np.ndarray:
    """Vectorized ``gamma``."""
    return k.c1 * _sigmoid(k.c2 * z) + _step(z, k.c3)


def gamma_derivative(z: np.ndarray, k: ApproxConstants) -> np.ndarray:
    """d gamma / dz with the step treated as locally constant."""
    s = _sigmoid(k.c2 * np.asarray(z, dtype=np.float64))
    return k.c1 * k.c2 * s * (1.0 - s)


def membership_values(b: BoxBounds, points: np.ndarray, k: ApproxConstants) -> np.ndarray:
    """Soft membership h for every row of ``points``.

    Per axis j the point contributes gamma(x_j - l_j) (soft x > l) and
    gamma(u_j - x_j + cl) (soft u >= x); the 2D values are combined by a
    soft AND, gamma(mean - ch).
    """
    X = np.atleast_2d(np.asarray(points, dtype=np.float64))
    d = X.shape[1]
    a_low = gamma_array(X - b.l, k)
    a_high = gamma_array((b.u - X) + k.cl, k)
    t = (a_low.sum(axis=1) + a_high.sum(axis=1)) / (2.0 * d) - k.ch
    return gamma_array(t, k)


def membership_h(b: BoxBounds, x: np.ndarray, k: ApproxConstants = ApproxConstants()) -> float:
    """Soft membership of a single point in the box."""
    return float(membership_values(b, np.asarray(x, dtype=np.float64)[None, :], k)[0])


def cov_exact(b: BoxBounds, points: np.ndarray) -> float:
    """Fraction of points inside the box."""
    X = np.asarray(points, dtype=np.float64)
    if X.size == 0:
        raise ValueError("points must be nonempty")
    return float(inside_mask(b, X).mean())


def pre_exact(b: BoxBounds, points: np.ndarray, labels: np.ndarray, query_label: int) -> float:
    """Fraction of in-box points whose label equals ``query_label``.

    Raises UndefinedPrecisionError for an empty box; callers decide policy.
    """
    X = np.asarray(points, dtype=np.float64)
    mask = inside_mask(b, X)
    n_in = int(mask.sum())
    if n_in == 0:
        raise UndefinedPrecisionError("no points inside the box")
    match = np.asarray(labels) == query_label
    return float((mask & match).sum() / n_in)


def pre_exact_or_none(b: BoxBounds, points: np.ndarray, labels: np.ndarray, query_label: int) -> float | None:
    try:
        return pre_exact(b, points, labels, query_label)
    except UndefinedPrecisionError:
        return None


def cov_hat(b: BoxBounds, points: np.ndarray, k: ApproxConstants = ApproxConstants()) -> float:
    """Approximate coverage: mean soft membership."""
    return float(membership_values(b, points, k).mean())


def pre_hat(
    b: BoxBounds,
    points: np.ndarray,
    labels: np.ndarray,
    query_label: int,
    k: ApproxConstants = ApproxConstants(),
) -> float:
    """Approximate precision: membership-weighted label agreement.

    The weight on each point is its soft membership; agreement is label
    equality with the query's label, which for binary labels coincides
    with 1 - (f(x) - f(q))^2 and extends unchanged to multi-class.
    """
    h = membership_values(b, points, k)
    match = (np.asarray(labels) == query_label).astype(np.float64)
    # h > 0 mathematically; the floor only guards underflow at extreme c2
    denom = max(float(h.sum()), 1e-300)
    return float((h * match).sum() / denom)


# ---------------------------------------------------------------------------
# bound audits


@dataclass
class BoundCheck:
    """Outcome of one inequality audit over a collection of (box, data) cases."""

    hypothesis_met: bool
    checked: int = 0
    violations: int = 0
    max_violation: float = 0.0

    def record(self, violation: float) -> None:
        self.checked += 1
        if violation > 0.0:
            self.violations += 1
            self.max_violation = max(self.max_violation, violation)


@dataclass
class BoundsAudit:
    """Audit of the provable envelopes tying soft measures to exact ones.

    coverage_envelope: ((4D-1)/4D) * Cov <= CovHat <= 1/4D + ((4D-1)/4D) * Cov,
    guaranteed when c1 < 1/(2D) and ch > (4D-1)/(4D).
    precision_cap: PreHat <= Pre * (1 + (1/Cov) * (4D/(4D-1))), reported
    informationally (skipped when Cov = 0 or Pre is undefined).
    When a hypothesis is unmet the inequality is still evaluated but only
    reported, never asserted.
    """

    dim: int
    constants: ApproxConstants
    coverage_envelope: BoundCheck = field(default_factory=lambda: BoundCheck(False))
    precision_cap: BoundCheck = field(default_factory=lambda: BoundCheck(False))

    def to_dict(self) -> dict:
        return {
            "dim": self.dim,
            "constants": asdict(self.constants),
            "coverage_envelope": asdict(self.coverage_envelope),
            "precision_cap": asdict(self.precision_cap),
        }


def coverage_hypothesis_met(dim: int, k: ApproxConstants) -> bool:
    return k.c1 < 1.0 / (2.0 * dim) and k.ch > (4.0 * dim - 1.0) / (4.0 * dim)


def audit_bounds(
    b: BoxBounds,
    points: np.ndarray,
    labels: np.ndarray,
    query_label: int,
    k: ApproxConstants = ApproxConstants(),
    report: BoundsAudit | None = None,
) -> BoundsAudit:
    """Check the coverage envelope and precision cap on one (box, data) case.

    Pass ``report`` to accumulate across many cases into one audit.
    """
    X = np.asarray(points, dtype=np.float64)
    d = X.shape[1]
    if report is None:
        hyp = coverage_hypothesis_met(d, k)
        report = BoundsAudit(
            dim=d,
            constants=k,
            coverage_envelope=BoundCheck(hyp),
            precision_cap=BoundCheck(hyp),
        )

    cov = cov_exact(b, X)
    ch = cov_hat(b, X, k)
    scale = (4.0 * d - 1.0) / (4.0 * d)
    lower = scale * cov
    upper = 1.0 / (4.0 * d) + scale * cov
    report.coverage_envelope.record(max(lower - ch, ch - upper))

    if cov > 0.0:
        pre = pre_exact(b, X, labels, query_label)
        ph = pre_hat(b, X, labels, query_label, k)
        cap = pre * (1.0 + (1.0 / cov) * (4.0 * d / (4.0 * d - 1.0)))
        report.precision_cap.record(ph - cap)

    return report
