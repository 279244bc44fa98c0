"""Closed-form objects of the small-initialization analysis.

Everything here is exact linear algebra on the anchor-center datasets: the
dual basis of the data matrix, the angle facts it satisfies, the rank-1
trade-off vector u* solving min_u ||v* - u||_H^2 + 2*lam*||u||, the common
loss value of the balanced rank-1 family realizing u*, and the explicit
rank-2 network that beats that value.  Probabilistic statements (the
initialization event, the orthogonal-data fraction bound) are checked by
Monte Carlo against their closed-form bounds.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import NamedTuple

import numpy as np

from .conic import Network, regularized_loss
from .data import Dataset, DatasetKind, covariance_spectrum, teacher_vector

__all__ = [
    "BoundReport",
    "TheoryContext",
    "UStar",
    "dual_basis",
    "compute_u_star",
    "L_lambda_star",
    "theta_family_loss",
    "rank2_construction",
    "make_theory_context",
    "proposition1_check",
    "init_probability",
    "theorem3_lambda_threshold",
    "gamma_and_T1",
    "lemma_d3_check",
    "reports_to_csv",
]

DUAL_TOL = 1e-10
USTAR_TOL = 1e-10
MAX_COND = 1e12


@dataclass(frozen=True)
class BoundReport:
    name: str
    bound_value: float
    empirical_value: float | None
    satisfied: bool
    note: str = ""


def dual_basis(X: np.ndarray) -> np.ndarray:
    """Rows x_dag_k with x_dag_k . x_j = delta_kj, for X whose columns are the x_j."""
    X = np.asarray(X, dtype=float)
    if X.shape[0] != X.shape[1]:
        raise ValueError("data matrix must be square")
    if np.linalg.cond(X) >= MAX_COND:
        raise ValueError("data matrix is numerically singular")
    return np.linalg.inv(X)


class UStar(NamedTuple):
    u: np.ndarray
    is_zero: bool
    align_residual: float
    norm_residual: float


def compute_u_star(H: np.ndarray, v_star: np.ndarray, lam: float) -> UStar:
    """Minimizer of ||v_star - u||_H^2 + 2*lam*||u||.

    The nonzero minimizer is characterized by H(v_star - u) having norm lam
    and pointing along u.  Solved by bisection on r = ||u|| along the curve
    u(r) = (H + (lam/r) I)^{-1} H v_star, then polished by the fixed point;
    when lam >= ||H v_star|| the minimizer is 0 and is flagged.
    """
    H = np.asarray(H, dtype=float)
    v_star = np.asarray(v_star, dtype=float)
    if lam <= 0.0:
        raise ValueError("lam must be > 0")
    b = H @ v_star
    if lam >= np.linalg.norm(b):
        return UStar(np.zeros_like(v_star), True, 0.0, 0.0)
    d = H.shape[0]
    eye = np.eye(d)

    def u_of(r: float) -> np.ndarray:
        return np.linalg.solve(H + (lam / r) * eye, b)

    lo, hi = 1e-300, float(np.linalg.norm(v_star)) + 1.0
    # ||u(r)|| - r is positive near 0 and negative for large r
    while np.linalg.norm(u_of(hi)) > hi:
        hi *= 2.0
    for _ in range(200):
        mid = 0.5 * (lo + hi)
        if np.linalg.norm(u_of(mid)) > mid:
            lo = mid
        else:
            hi = mid
    r = 0.5 * (lo + hi)
    for _ in range(100):
        u = u_of(r)
        r_new = float(np.linalg.norm(u))
        if abs(r_new - r) <= 1e-16 * max(1.0, r):
            break
        r = r_new
    u = u_of(r)
    g = H @ (v_star - u)
    align = abs(float(u @ g) / (np.linalg.norm(u) * np.linalg.norm(g)) - 1.0)
    norm_res = abs(float(np.linalg.norm(g)) - lam)
    return UStar(u, False, align, norm_res)


def L_lambda_star(H: np.ndarray, v_star: np.ndarray, u_star: np.ndarray,
                  lam: float) -> float:
    """Common regularized loss of every balanced rank-1 network realizing u_star."""
    diff = np.asarray(v_star, float) - np.asarray(u_star, float)
    return float(diff @ H @ diff + 2.0 * lam * np.linalg.norm(u_star))


def theta_family_loss(u_star: np.ndarray, splits: np.ndarray, ds: Dataset,
                      lam: float) -> float:
    """Loss of the rank-1 family member with output weights a_i = sqrt(splits_i).

    ``splits`` must be nonnegative and sum to ||u_star||; every member gives
    the same value, which is how the closed form above is cross-checked.
    """
    u_star = np.asarray(u_star, float)
    splits = np.asarray(splits, float)
    if splits.min(initial=0.0) < 0.0:
        raise ValueError("splits must be nonnegative")
    norm = np.linalg.norm(u_star)
    if abs(splits.sum() - norm) > 1e-12 * max(1.0, norm):
        raise ValueError("splits must sum to ||u_star||")
    a = np.sqrt(splits)
    W = np.outer(a, u_star / norm)
    _, reg = regularized_loss(Network(W, a), ds, lam)
    return reg


@dataclass(frozen=True)
class TheoryContext:
    """Analytic bundle for an anchor-center dataset at one regularization level."""

    dataset: Dataset
    lam: float
    v_star: np.ndarray
    X: np.ndarray              # columns are the data points
    x_dag: np.ndarray          # rows form the dual basis
    H: np.ndarray
    mu_min: float
    mu_max: float
    u_star: np.ndarray
    L_lambda_star: float
    zeta: float
    u1: np.ndarray
    u2: np.ndarray
    rank2_net: Network
    gamma: np.ndarray


def _angle_cos(u: np.ndarray, v: np.ndarray) -> float:
    return float(u @ v / (np.linalg.norm(u) * np.linalg.norm(v)))


def make_theory_context(ds: Dataset, lam: float) -> TheoryContext:
    """Assemble and verify every closed-form object for the dataset.

    Raises when the dual-basis identity or the u* defining conditions fail
    their 1e-10 verification.
    """
    if ds.kind is not DatasetKind.ASSUMPTION1:
        raise ValueError("theory context requires assumption1-kind data")
    d = ds.d
    v_star = teacher_vector(d)
    X = ds.points.T
    x_dag = dual_basis(X)
    if np.abs(x_dag @ X - np.eye(d)).max() > DUAL_TOL:
        raise ValueError("dual basis failed its defining identity")
    spec = covariance_spectrum(ds)
    us = compute_u_star(spec.H, v_star, lam)
    if not us.is_zero and max(us.align_residual, us.norm_residual) > USTAR_TOL:
        raise ValueError("u* residuals exceed tolerance")
    Lstar = L_lambda_star(spec.H, v_star, us.u, lam)

    x2d, x3d = x_dag[1], x_dag[2]
    x2b = x2d / np.linalg.norm(x2d)
    x3b = x3d / np.linalg.norm(x3d)
    cos_u_x2 = _angle_cos(us.u, x2d) if not us.is_zero else 0.0
    sin_23 = float(np.sqrt(max(0.0, 1.0 - _angle_cos(x2d, x3d) ** 2)))
    zeta = cos_u_x2 - sin_23
    u1 = us.u - zeta * x2b
    u2 = zeta * (x2b - x3b * float(x3b @ x2b))
    rank2 = _balanced_two_neuron(u1, u2)
    gamma = (2.0 / ds.n) * (ds.labels[:, None] * ds.points).sum(axis=0)
    return TheoryContext(ds, float(lam), v_star, X, x_dag, spec.H,
                         spec.mu_min, spec.mu_max, us.u, Lstar, float(zeta),
                         u1, u2, rank2, gamma)


def _balanced_two_neuron(u1: np.ndarray, u2: np.ndarray) -> Network:
    W = np.zeros((2, u1.shape[0]))
    a = np.zeros(2)
    for i, u in enumerate((u1, u2)):
        norm = np.linalg.norm(u)
        if norm > 0.0:
            W[i] = u / np.sqrt(norm)
            a[i] = np.sqrt(norm)
    return Network(W, a)


def proposition1_check(ctx: TheoryContext) -> list[BoundReport]:
    """Angle facts of the dataset: teacher within 45 degrees of every point,
    and the dual-basis cosine/sine inequality that powers the rank-2 trick."""
    reports = []
    cos45 = float(np.cos(np.pi / 4.0))
    cos_vk = [_angle_cos(ctx.v_star, ctx.X[:, k]) for k in range(ctx.dataset.d)]
    reports.append(BoundReport("teacher-point-cosine-min", cos45,
                               float(min(cos_vk)), bool(min(cos_vk) > cos45)))
    cos_v_x2 = _angle_cos(ctx.v_star, ctx.x_dag[1])
    sin_23 = float(np.sqrt(max(0.0, 1.0 - _angle_cos(ctx.x_dag[1], ctx.x_dag[2]) ** 2)))
    reports.append(BoundReport("dual-cosine-exceeds-sine", sin_23,
                               cos_v_x2, bool(cos_v_x2 > sin_23)))
    return reports


def rank2_construction(ctx: TheoryContext):
    """The explicit two-neuron network matching u* on the data at lower loss.

    Returns the network and a report asserting the three facts that make it a
    counterexample: it reproduces u*'s outputs on every point to 1e-10, its
    squared norm is at most 2||u*|| - zeta^2/2, and its regularized loss is
    below the rank-1 value by at least lam*zeta^2/4.
    """
    ds, lam = ctx.dataset, ctx.lam
    z2 = float(ctx.u_star @ ds.points[1])
    pre_ok = ctx.zeta > 0.0 and ctx.zeta / np.linalg.norm(ctx.x_dag[1]) < z2
    net = ctx.rank2_net
    outputs = net.predict(ds.points)
    target = ds.points @ ctx.u_star
    out_err = float(np.abs(outputs - target).max())
    _, reg = regularized_loss(net, ds, lam)
    norm_bound = 2.0 * np.linalg.norm(ctx.u_star) - ctx.zeta ** 2 / 2.0
    loss_margin = ctx.L_lambda_star - reg
    ok = (pre_ok and out_err <= 1e-10
          and net.theta_sq_norm() <= norm_bound + 1e-12
          and loss_margin >= lam * ctx.zeta ** 2 / 4.0)
    note = (f"pre_ok={pre_ok} out_err={out_err:.3e} "
            f"theta_sq={net.theta_sq_norm():.12f} norm_bound={norm_bound:.12f} "
            f"loss_margin={loss_margin:.3e} required={lam * ctx.zeta ** 2 / 4.0:.3e}")
    report = BoundReport("rank2-beats-rank1", ctx.L_lambda_star - lam * ctx.zeta ** 2 / 4.0,
                         reg, bool(ok), note)
    return net, report


def init_probability(m: int, trials: int, ds: Dataset,
                     rng: np.random.Generator) -> BoundReport:
    """Monte Carlo check of the initialization event probability bound.

    The event: some neuron has positive output sign and activates on at least
    one training point, and no neuron is exactly orthogonal to a point.  Its
    probability is bounded below by 1 - (3/4)^m.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    hits = 0
    X = ds.points
    for _ in range(trials):
        g = rng.standard_normal((m, ds.d))
        w = g / np.linalg.norm(g, axis=1, keepdims=True)
        s = rng.integers(0, 2, size=m) * 2 - 1
        Z = w @ X.T
        if (Z == 0.0).any():
            continue
        if ((s > 0) & (Z > 0).any(axis=1)).any():
            hits += 1
    freq = hits / trials
    bound = 1.0 - 0.75 ** m
    sigma = np.sqrt(max(freq * (1 - freq), 1.0 / trials) / trials)
    return BoundReport("init-event-probability", bound, freq,
                       bool(freq >= bound - 3.0 * sigma),
                       note=f"trials={trials} mc_sigma={sigma:.2e}")


def theorem3_lambda_threshold(ds: Dataset) -> float:
    """Largest regularization the orthogonal-data fraction bound covers."""
    if ds.kind is not DatasetKind.ORTHOGONAL:
        raise ValueError("threshold is defined for orthogonal datasets")
    y = ds.labels
    sq = y ** 2 * np.einsum("kj,kj->k", ds.points, ds.points)
    pos = float(np.sqrt(sq[y > 0].sum()))
    neg = float(np.sqrt(sq[y < 0].sum()))
    return min(pos, neg)


def gamma_and_T1(ds: Dataset, alpha: float, epsilon: float):
    """Early-alignment target gamma = (2/n) sum_k y_k x_k and its end time.

    ``epsilon`` is the exponent from the convergence statement, in (0, 1/2];
    the alignment phase runs for half that exponent, so
    T1 = (epsilon/2) ln(1/alpha) / ||gamma||.
    """
    if not 0.0 < alpha < 1.0:
        raise ValueError("alpha must lie in (0, 1)")
    if not 0.0 < epsilon <= 0.5:
        raise ValueError("epsilon must lie in (0, 1/2]")
    gamma = (2.0 / ds.n) * (ds.labels[:, None] * ds.points).sum(axis=0)
    gnorm = float(np.linalg.norm(gamma))
    if gnorm == 0.0:
        raise ValueError("gamma vanishes; the alignment phase is undefined")
    t1 = (epsilon / 2.0) * np.log(1.0 / alpha) / gnorm
    return gamma, float(t1)


def lemma_d3_check(ds: Dataset, lam: float, global_net: Network,
                   label_tol: float = 1e-8) -> BoundReport:
    """Nonzero labels force nonzero global-optimum outputs (orthogonal data).

    Only applies for lam at or below the fraction-bound threshold; above it
    the check is skipped and reported as vacuously satisfied.
    """
    thr = theorem3_lambda_threshold(ds)
    if lam > thr:
        return BoundReport("nonzero-outputs", label_tol, None, True,
                           note=f"skipped: lam={lam} above threshold={thr}")
    outputs = global_net.predict(ds.points)
    relevant = np.abs(ds.labels) > label_tol
    worst = float(np.abs(outputs[relevant]).min()) if relevant.any() else np.inf
    return BoundReport("nonzero-outputs", label_tol, worst,
                       bool(worst > label_tol), note=f"threshold={thr}")


def reports_to_csv(reports) -> str:
    lines = ["check,bound,empirical,satisfied"]
    for r in reports:
        emp = "" if r.empirical_value is None else format(r.empirical_value, ".17g")
        lines.append(f"{r.name},{format(r.bound_value, '.17g')},{emp},{str(r.satisfied).lower()}")
    return "\n".join(lines) + "\n"
