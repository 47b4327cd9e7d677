"""Penalized gradient ascent over box bounds.

The objective rewards soft coverage, adds a soft-precision term gated by the
exact precision falling below the user threshold, and subtracts hinge
penalties for pushing a bound past the query point. Ascent uses an in-repo
Adam update with per-iteration clipping of both bound vectors to [0, 1].
"""

from __future__ import annotations

import json
import logging
from dataclasses import dataclass, field

import numpy as np

from .indicator import ApproxConstants, BoxBounds, _sigmoid, _step

log = logging.getLogger(__name__)


@dataclass(frozen=True)
class OptimizerConfig:
    precision_threshold: float = 0.95
    learning_rate: float = 0.01
    max_iters: int = 2500
    lambda1: float = 5.0   # weight of the gated soft-precision term
    lambda2: float = 5.0   # weight of the query-containment hinge penalty
    adam_beta1: float = 0.9
    adam_beta2: float = 0.999
    adam_eps: float = 1e-8
    convergence_tol: float = 1e-6
    convergence_window: int = 50
    seed: int = 0
    containment_snap: bool = True

    def __post_init__(self):
        if self.learning_rate <= 0.0:
            raise ValueError("learning_rate must be positive")
        if not 0.0 < self.precision_threshold <= 1.0:
            raise ValueError("precision_threshold must lie in (0, 1]")
        if self.max_iters < 1:
            raise ValueError("max_iters must be >= 1")


@dataclass
class TraceRecord:
    iteration: int
    objective: float
    cov_hat: float
    pre_hat: float
    cov: float
    pre: float | None
    violation: float

    def to_dict(self) -> dict:
        return {
            "iteration": self.iteration,
            "objective": self.objective,
            "cov_hat": self.cov_hat,
            "pre_hat": self.pre_hat,
            "cov": self.cov,
            "pre": self.pre,
            "violation": self.violation,
        }


@dataclass
class OptimizationTrace:
    records: list[TraceRecord] = field(default_factory=list)
    converged: bool = False
    best_iteration: int = 0
    feasible: bool = False

    def __len__(self) -> int:
        return len(self.records)

    def jsonl_lines(self):
        last = len(self.records) - 1
        for i, rec in enumerate(self.records):
            d = rec.to_dict()
            if i == last:
                d["status"] = "converged" if self.converged else "iteration_capped"
            yield json.dumps(d)

    def write_jsonl(self, path: str) -> None:
        with open(path, "w", encoding="utf-8") as fh:
            for line in self.jsonl_lines():
                fh.write(line + "\n")


class _Adam:
    """Plain Adam with bias correction; step() returns the ascent update."""

    def __init__(self, size: int, cfg: OptimizerConfig):
        self.m = np.zeros(size)
        self.v = np.zeros(size)
        self.t = 0
        self.cfg = cfg

    def step(self, grad: np.ndarray) -> np.ndarray:
        cfg = self.cfg
        self.t += 1
        self.m = cfg.adam_beta1 * self.m + (1.0 - cfg.adam_beta1) * grad
        self.v = cfg.adam_beta2 * self.v + (1.0 - cfg.adam_beta2) * (grad * grad)
        m_hat = self.m / (1.0 - cfg.adam_beta1 ** self.t)
        v_hat = self.v / (1.0 - cfg.adam_beta2 ** self.t)
        return cfg.learning_rate * m_hat / (np.sqrt(v_hat) + cfg.adam_eps)


@dataclass
class _Evaluation:
    objective: float
    grad_l: np.ndarray
    grad_u: np.ndarray
    cov_hat: float
    pre_hat: float
    cov: float
    pre: float | None
    violation: float


def _evaluate(
    l: np.ndarray,
    u: np.ndarray,
    query: np.ndarray,
    X: np.ndarray,
    match: np.ndarray,
    cfg: OptimizerConfig,
    k: ApproxConstants,
) -> _Evaluation:
    """Objective value and its analytic gradient in one pass.

    Step terms (the sgn inside gamma and the precision gate) are treated as
    locally constant, so the gradient is exact everywhere off their jumps.
    """
    n, d = X.shape
    zl = X - l
    zu = (u - X) + k.cl
    sl = _sigmoid(k.c2 * zl)
    su = _sigmoid(k.c2 * zu)
    al = k.c1 * sl + _step(zl, k.c3)
    au = k.c1 * su + _step(zu, k.c3)
    t = (al.sum(axis=1) + au.sum(axis=1)) / (2.0 * d) - k.ch
    st = _sigmoid(k.c2 * t)
    h = k.c1 * st + _step(t, k.c3)

    s_h = max(float(h.sum()), 1e-300)  # h > 0 except at underflow-extreme c2
    s_m = float((h * match).sum())
    cov_hat = s_h / n
    pre_hat = s_m / s_h

    inside = ((X >= l) & (X <= u)).all(axis=1)
    n_in = int(inside.sum())
    cov = n_in / n
    pre = float((inside & (match > 0.5)).sum() / n_in) if n_in else None

    if pre is None:
        gate = 2.0  # empty box: force the precision term on, same as pre < P
    else:
        gate = 1.0 + float(np.sign(cfg.precision_threshold - pre))

    viol_l = np.maximum(l - query, 0.0)
    viol_u = np.maximum(query - u, 0.0)
    violation = float(viol_l.sum() + viol_u.sum())

    objective = cov_hat + cfg.lambda1 * pre_hat * gate - cfg.lambda2 * violation

    # dh/d(mean term) per point, then chain through each axis comparison
    dh_dt = k.c1 * k.c2 * st * (1.0 - st)
    scale = dh_dt[:, None] / (2.0 * d)
    dh_dl = scale * (-(k.c1 * k.c2) * sl * (1.0 - sl))
    dh_du = scale * ((k.c1 * k.c2) * su * (1.0 - su))

    dcov_dl = dh_dl.sum(axis=0) / n
    dcov_du = dh_du.sum(axis=0) / n
    dsh_dl = dh_dl.sum(axis=0)
    dsh_du = dh_du.sum(axis=0)
    dsm_dl = (dh_dl * match[:, None]).sum(axis=0)
    dsm_du = (dh_du * match[:, None]).sum(axis=0)
    dpre_dl = (s_h * dsm_dl - s_m * dsh_dl) / (s_h * s_h)
    dpre_du = (s_h * dsm_du - s_m * dsh_du) / (s_h * s_h)

    grad_l = dcov_dl + cfg.lambda1 * gate * dpre_dl - cfg.lambda2 * (l > query)
    grad_u = dcov_du + cfg.lambda1 * gate * dpre_du + cfg.lambda2 * (query > u)

    return _Evaluation(objective, grad_l, grad_u, cov_hat, pre_hat, cov, pre, violation)


def _prep(query, data, labels, query_label):
    X = np.asarray(data, dtype=np.float64)
    q = np.asarray(query, dtype=np.float64)
    match = (np.asarray(labels) == query_label).astype(np.float64)
    return q, X, match


def objective(
    b: BoxBounds,
    query: np.ndarray,
    data: np.ndarray,
    labels: np.ndarray,
    query_label: int,
    cfg: OptimizerConfig,
    k: ApproxConstants = ApproxConstants(),
) -> float:
    """Penalized ascent objective at one set of bounds."""
    q, X, match = _prep(query, data, labels, query_label)
    return _evaluate(b.l, b.u, q, X, match, cfg, k).objective


def gradient(
    b: BoxBounds,
    query: np.ndarray,
    data: np.ndarray,
    labels: np.ndarray,
    query_label: int,
    cfg: OptimizerConfig,
    k: ApproxConstants = ApproxConstants(),
) -> tuple[np.ndarray, np.ndarray]:
    """Analytic gradient of the objective w.r.t. (l, u)."""
    q, X, match = _prep(query, data, labels, query_label)
    ev = _evaluate(b.l, b.u, q, X, match, cfg, k)
    return ev.grad_l, ev.grad_u


def initial_bounds(query: np.ndarray, margin: float = 0.05) -> BoxBounds:
    """Small box around the query: guaranteed containment, likely feasible."""
    q = np.asarray(query, dtype=np.float64)
    return BoxBounds(np.clip(q - margin, 0.0, 1.0), np.clip(q + margin, 0.0, 1.0))


def _snap_to_query(l: np.ndarray, u: np.ndarray, query: np.ndarray) -> tuple[np.ndarray, np.ndarray]:
    return np.minimum(l, query), np.maximum(u, query)


def optimize(
    initial: BoxBounds,
    query: np.ndarray,
    data: np.ndarray,
    labels: np.ndarray,
    query_label: int,
    cfg: OptimizerConfig,
    k: ApproxConstants = ApproxConstants(),
) -> tuple[BoxBounds, OptimizationTrace]:
    """Adam ascent on the objective with per-iteration clipping to [0, 1].

    Returns the best iterate rather than the last: iterates are ranked
    feasible-first (exact precision >= threshold after the containment
    snap, if enabled), then by exact coverage. Infeasibility of the winner
    is flagged on the trace, not raised.
    """
    q, X, match = _prep(query, data, labels, query_label)
    l = initial.l.copy()
    u = initial.u.copy()
    d = l.shape[0]
    adam = _Adam(2 * d, cfg)
    trace = OptimizationTrace()

    best_key = None
    best_lu = None

    def consider(l_now, u_now, iteration):
        nonlocal best_key, best_lu
        if cfg.containment_snap:
            cl_, cu_ = _snap_to_query(l_now, u_now, q)
        else:
            cl_, cu_ = l_now, u_now
        mask = ((X >= cl_) & (X <= cu_)).all(axis=1)
        n_in = int(mask.sum())
        cov = n_in / len(X)
        pre = float((mask & (match > 0.5)).sum() / n_in) if n_in else None
        feasible = pre is not None and pre >= cfg.precision_threshold
        key = (1 if feasible else 0, cov)
        if best_key is None or key > best_key:
            best_key = key
            best_lu = (cl_.copy(), cu_.copy())
            trace.best_iteration = iteration
            trace.feasible = feasible

    ev = _evaluate(l, u, q, X, match, cfg, k)
    if ev.pre is None:
        log.debug("initial box empty: precision gate forced active")
    consider(l, u, 0)

    objectives = []
    for it in range(1, cfg.max_iters + 1):
        step = adam.step(np.concatenate([ev.grad_l, ev.grad_u]))
        l = np.clip(l + step[:d], 0.0, 1.0)
        u = np.clip(u + step[d:], 0.0, 1.0)
        crossed = l > u
        if crossed.any():
            # an inverted axis admits nothing and is an absorbing state under
            # ascent; project both bounds onto their midpoint so the (empty)
            # box can keep moving
            mid = 0.5 * (l[crossed] + u[crossed])
            l[crossed] = mid
            u[crossed] = mid
        ev = _evaluate(l, u, q, X, match, cfg, k)
        trace.records.append(TraceRecord(it, ev.objective, ev.cov_hat, ev.pre_hat,
                                         ev.cov, ev.pre, ev.violation))
        consider(l, u, it)
        objectives.append(ev.objective)
        w = cfg.convergence_window
        if len(objectives) >= w:
            window = objectives[-w:]
            if max(window) - min(window) < cfg.convergence_tol:
                trace.converged = True
                break

    return BoxBounds(*best_lu), trace
