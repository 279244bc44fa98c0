"""Full-batch gradient descent on the regularized loss, with diagnostics.

The update uses the subgradient convention relu'(0) = 0 and applies weight
decay as an exact multiplicative factor: theta <- (1 - 2*lam*lr) theta +
lr * (data term).  This is algebraically the plain GD step, and it makes two
facts bit-exact in floating point: a neuron inactive on every training point
is scaled by exactly (1 - 2*lam*lr) per step, and its direction never moves.
"""
from __future__ import annotations

from collections import deque
from dataclasses import dataclass, field
from enum import Enum

import numpy as np

from .conic import Network
from .data import Dataset

__all__ = [
    "InitMode",
    "TrainConfig",
    "FlowState",
    "FlowDiagnostics",
    "TrainResult",
    "init_network",
    "gd_step",
    "train",
    "diagnostics",
    "distinct_directions",
    "theta_in_Theta_ustar",
    "series_to_csv",
]

DIVERGE_LIMIT = 1e12
SERIES_COLUMNS = ("epoch", "mse", "reg_loss", "theta_sq_norm",
                  "num_pos_neurons", "balance_drift", "grad_sq_norm")


class InitMode(str, Enum):
    SPHERE_BALANCED = "sphere-balanced"
    GAUSSIAN_BALANCED = "gaussian-balanced"


@dataclass(frozen=True)
class TrainConfig:
    alpha: float
    lam: float
    lr: float = 0.01
    width: int = 100
    max_epochs: int = 100_000_000
    grad_sq_stop: float = 1e-16
    seed: int = 0
    init_mode: InitMode = InitMode.GAUSSIAN_BALANCED
    log_factor: float = 1.25

    def __post_init__(self):
        if min(self.alpha, self.lam, self.lr) <= 0.0:
            raise ValueError("alpha, lam, lr must be > 0")
        if self.lr * 2.0 * self.lam >= 1.0:
            raise ValueError("need lr * 2 * lam < 1 for a contractive decay")
        object.__setattr__(self, "init_mode", InitMode(self.init_mode))
        object.__setattr__(self, "max_epochs", int(self.max_epochs))


def init_network(cfg: TrainConfig, d: int, rng: np.random.Generator) -> Network:
    """Balanced random initialization at scale alpha.

    Sphere mode puts every inner neuron on the radius-alpha sphere with output
    weight +-alpha; Gaussian mode draws inner entries N(0, alpha^2) and sets
    the output weight to the exact inner norm with a fair sign.
    """
    g = rng.standard_normal((cfg.width, d))
    signs = rng.integers(0, 2, size=cfg.width) * 2.0 - 1.0
    if cfg.init_mode is InitMode.SPHERE_BALANCED:
        W = cfg.alpha * g / np.linalg.norm(g, axis=1, keepdims=True)
        a = cfg.alpha * signs
    else:
        W = cfg.alpha * g
        a = signs * np.linalg.norm(W, axis=1)
    return Network(W, a)


@dataclass(frozen=True)
class InitRecord:
    signs: np.ndarray        # sign of a_i at epoch 0
    active0: np.ndarray      # K_plus(w_i(0)) nonempty
    alpha: float


@dataclass
class FlowState:
    theta: Network
    epoch: int
    grad: np.ndarray                     # (m, d+1): d inner columns then the output column
    init: InitRecord
    activation_flips: int = 0
    prev_mask: np.ndarray | None = None
    metrics: deque = field(default_factory=lambda: deque(maxlen=4096))


def _forward(W, a, X, y, n):
    Z = W @ X.T
    mask = Z > 0.0
    V = np.where(mask, Z, 0.0)
    e = y - a @ V
    return Z, mask, V, e


def _step_arrays(W, a, X, y, n, lam, lr, rho):
    """One GD epoch; returns updated arrays plus the pre-step gradient pieces."""
    _, mask, V, e = _forward(W, a, X, y, n)
    Gw = (2.0 / n) * ((mask * e) @ X)
    ga = (2.0 / n) * (V @ e)
    W_new = rho * W + lr * (a[:, None] * Gw)
    a_new = rho * a + lr * ga
    return W_new, a_new, Gw, ga, mask, V, e


def _balance_drift(W, a) -> float:
    """max_i |a_i^2 - ||w_i||^2|, factored so exact balance reports exactly 0."""
    norms = np.linalg.norm(W, axis=1)
    gap = np.abs(np.abs(a) - norms) * (np.abs(a) + norms)
    return float(gap.max(initial=0.0))


def _full_grad(W, a, Gw, ga, lam):
    gW = 2.0 * lam * W - a[:, None] * Gw
    gA = 2.0 * lam * a - ga
    return gW, gA


def make_flow_state(net: Network, ds: Dataset, lam: float) -> FlowState:
    """Initial state for manual stepping, with the gradient at the start point."""
    X, y, n = ds.points, ds.labels, ds.n
    _, mask, V, e = _forward(net.W, net.a, X, y, n)
    Gw = (2.0 / n) * ((mask * e) @ X)
    ga = (2.0 / n) * (V @ e)
    gW, gA = _full_grad(net.W, net.a, Gw, ga, lam)
    init = InitRecord(np.sign(net.a), mask.any(axis=1), float(np.linalg.norm(net.W, axis=1).max()))
    return FlowState(net, 0, np.hstack([gW, gA[:, None]]), init, prev_mask=mask)


def gd_step(state: FlowState, ds: Dataset, lam: float, lr: float) -> FlowState:
    """One explicit subgradient step theta <- theta - lr * grad(L_lam)(theta)."""
    if lr * 2.0 * lam >= 1.0:
        raise ValueError("need lr * 2 * lam < 1")
    X, y, n = ds.points, ds.labels, ds.n
    rho = 1.0 - 2.0 * lam * lr
    W, a, Gw, ga, mask, V, e = _step_arrays(state.theta.W, state.theta.a,
                                            X, y, n, lam, lr, rho)
    if max(np.abs(W).max(initial=0.0), np.abs(a).max(initial=0.0)) > DIVERGE_LIMIT:
        raise FloatingPointError("parameters diverged beyond 1e12")
    _, mask_new, V_new, e_new = _forward(W, a, X, y, n)
    Gw_new = (2.0 / n) * ((mask_new * e_new) @ X)
    ga_new = (2.0 / n) * (V_new @ e_new)
    gW, gA = _full_grad(W, a, Gw_new, ga_new, lam)
    flips = state.activation_flips
    if state.prev_mask is not None:
        flips += int((mask_new != state.prev_mask).sum())
    return FlowState(Network(W, a), state.epoch + 1, np.hstack([gW, gA[:, None]]),
                     state.init, flips, mask_new, state.metrics)


@dataclass(frozen=True)
class FlowDiagnostics:
    signs: np.ndarray
    I_plus: np.ndarray
    K_plus: tuple
    K_zero: tuple
    gamma: np.ndarray
    T1: float
    v: np.ndarray
    distinct_directions: int
    balance_drift: float
    activation_flips: int


def diagnostics(state: FlowState, ds: Dataset, cfg: TrainConfig,
                epsilon: float = 0.5) -> FlowDiagnostics:
    from .theory import gamma_and_T1

    W, a = state.theta.W, state.theta.a
    Z = W @ ds.points.T
    k_plus = tuple(tuple(np.flatnonzero(Z[i] > 0.0)) for i in range(W.shape[0]))
    k_zero = tuple(tuple(np.flatnonzero(Z[i] == 0.0)) for i in range(W.shape[0]))
    iplus = np.flatnonzero((state.init.signs > 0) & state.init.active0)
    gamma, t1 = gamma_and_T1(ds, cfg.alpha, epsilon)
    v = (a[iplus, None] * W[iplus]).sum(axis=0) if iplus.size else np.zeros(ds.d)
    drift = _balance_drift(W, a)
    return FlowDiagnostics(state.init.signs.copy(), iplus, k_plus, k_zero,
                           gamma, t1, v, distinct_directions(state.theta),
                           drift, state.activation_flips)


def distinct_directions(net: Network, angle_thresh: float = 0.1,
                        scaled_norm_thresh: float = 1e-6) -> int:
    """Greedy direction count over positively-weighted, non-negligible neurons.

    Neurons with a_i > 0 and |a_i| ||w_i|| >= scaled_norm_thresh are scanned in
    decreasing ||w_i|| order; each joins the first cluster whose representative
    is within angle_thresh radians, else founds a new cluster.
    """
    norms = np.linalg.norm(net.W, axis=1)
    keep = (net.a > 0.0) & (np.abs(net.a) * norms >= scaled_norm_thresh)
    reps = []
    for i in sorted(np.flatnonzero(keep), key=lambda j: -norms[j]):
        u = net.W[i] / norms[i]
        if not any(np.arccos(np.clip(u @ r, -1.0, 1.0)) < angle_thresh for r in reps):
            reps.append(u)
    return len(reps)


def theta_in_Theta_ustar(net: Network, u_star: np.ndarray, tol: float) -> bool:
    """Membership in the balanced rank-1 family realizing u_star."""
    u_star = np.asarray(u_star, float)
    ubar = u_star / np.linalg.norm(u_star)
    total = 0.0
    for i in range(net.width):
        wn = np.linalg.norm(net.W[i])
        if wn == 0.0 and net.a[i] == 0.0:
            continue
        if net.a[i] < 0.0 or abs(net.a[i] - wn) > tol:
            return False
        cosang = float(net.W[i] @ ubar) / wn
        if np.arccos(np.clip(cosang, -1.0, 1.0)) > tol:
            return False
        total += net.a[i] ** 2
    return abs(total - np.linalg.norm(u_star)) <= tol


@dataclass(frozen=True)
class TrainResult:
    theta: Network
    epochs_run: int
    mse: float
    reg_loss: float
    theta_sq_norm: float
    gap: float | None
    converged: bool
    diverged: bool
    series: dict
    reg_loss_increase_count: int
    state: FlowState


def _log_schedule(max_epochs: int, factor: float) -> np.ndarray:
    pts = [0]
    e = 1
    while e < max_epochs:
        pts.append(e)
        e = max(e + 1, int(np.ceil(e * factor)))
    pts.append(max_epochs)
    return np.unique(np.array(pts, dtype=np.int64))


def train(cfg: TrainConfig, ds: Dataset, global_value: float | None = None) -> TrainResult:
    """Run GD until the squared gradient norm falls below the stop or the cap.

    Metrics are logged on a geometric epoch grid; the trajectory is a pure
    function of (cfg, ds).
    """
    rng = np.random.default_rng(cfg.seed)
    net0 = init_network(cfg, ds.d, rng)
    X, y, n = ds.points, ds.labels, ds.n
    lam, lr = cfg.lam, cfg.lr
    rho = 1.0 - 2.0 * lam * lr
    W = net0.W.copy()
    a = net0.a.copy()

    _, mask0, _, _ = _forward(W, a, X, y, n)
    init = InitRecord(np.sign(a), mask0.any(axis=1), cfg.alpha)

    schedule = _log_schedule(cfg.max_epochs, cfg.log_factor)
    sched_pos = 0
    series = {k: [] for k in SERIES_COLUMNS}
    metrics_ring: deque = deque(maxlen=4096)
    flips = 0
    prev_mask = mask0
    prev_reg = None
    increases = 0
    diverged = False
    converged = False
    epoch = 0
    Xt = X.T.copy()
    two_n = 2.0 / n
    two_lam = 2.0 * lam

    def log_row(epoch, mask, V, e, Gw, ga):
        nonlocal flips, prev_mask, prev_reg, increases
        mse = float(np.mean(e ** 2))
        nsq = float(np.sum(W * W) + np.sum(a * a))
        reg = mse + lam * nsq
        gW = two_lam * W - a[:, None] * Gw
        gA = two_lam * a - ga
        gsq = float(np.sum(gW * gW) + np.sum(gA * gA))
        drift = _balance_drift(W, a)
        flips += int((mask != prev_mask).sum())
        prev_mask = mask.copy()
        if prev_reg is not None and reg > prev_reg:
            increases += 1
        prev_reg = reg
        row = (epoch, mse, reg, nsq,
               distinct_directions(Network(W.copy(), a.copy())), drift, gsq)
        for k, v in zip(SERIES_COLUMNS, row):
            series[k].append(v)
        metrics_ring.append(row)

    while True:
        Z = W @ Xt
        mask = Z > 0.0
        V = np.where(mask, Z, 0.0)
        e = y - a @ V
        Gw = two_n * ((mask * e) @ X)
        ga = two_n * (V @ e)
        gW = two_lam * W - a[:, None] * Gw
        gA = two_lam * a - ga
        gsq = float(np.sum(gW * gW) + np.sum(gA * gA))

        at_log = sched_pos < len(schedule) and epoch == schedule[sched_pos]
        if at_log:
            sched_pos += 1
            log_row(epoch, mask, V, e, Gw, ga)
            if max(np.abs(W).max(initial=0.0), np.abs(a).max(initial=0.0)) > DIVERGE_LIMIT \
                    or not np.isfinite(gsq):
                diverged = True
                break
        if gsq < cfg.grad_sq_stop:
            converged = True
            if not at_log:
                log_row(epoch, mask, V, e, Gw, ga)
            break
        if epoch >= cfg.max_epochs:
            if not at_log:
                log_row(epoch, mask, V, e, Gw, ga)
            break

        W = rho * W + lr * (a[:, None] * Gw)
        a = rho * a + lr * ga
        epoch += 1

    series = {k: np.array(v) for k, v in series.items()}
    net = Network(W, a)
    mse = series["mse"][-1]
    reg = series["reg_loss"][-1]
    state = FlowState(net, epoch, np.hstack([gW, gA[:, None]]), init,
                      flips, prev_mask, metrics_ring)
    return TrainResult(net, epoch, float(mse), float(reg),
                       float(series["theta_sq_norm"][-1]),
                       None if global_value is None else float(reg - global_value),
                       converged, diverged, series, increases, state)


def series_to_csv(result: TrainResult) -> str:
    lines = [",".join(SERIES_COLUMNS)]
    s = result.series
    for i in range(len(s["epoch"])):
        vals = [str(int(s["epoch"][i]))]
        vals += [format(float(s[k][i]), ".17g") for k in SERIES_COLUMNS[1:4]]
        vals.append(str(int(s["num_pos_neurons"][i])))
        vals += [format(float(s[k][i]), ".17g") for k in SERIES_COLUMNS[5:]]
        lines.append(",".join(vals))
    return "\n".join(lines) + "\n"
