"""Per-cone convex programs, balanced network recovery, stationarity checks.

Inside a fixed activation cone the network output is linear in the per-neuron
vectors beta_i = |a_i| w_i, so minimizing the regularized loss over the cone
closure is a group-norm-penalized least-squares problem with polyhedral sign
constraints.  The solver is an off-the-shelf interior-point conic solver
(Clarabel via cvxpy); optimality is certified independently here through a
KKT residual built from nonnegative least squares, and small solutions are
polished to machine precision by a Newton step on the active-set KKT system.
"""
from __future__ import annotations

import warnings
from dataclasses import dataclass
from enum import Enum

import numpy as np
from scipy.optimize import lsq_linear, nnls

from .arrangement import ActivationMatrix
from .data import Dataset

__all__ = [
    "ObjectiveKind",
    "SolveStatus",
    "ConeProgram",
    "SolveResult",
    "Network",
    "StationarityReport",
    "build_cone_program",
    "solve",
    "recover_network",
    "global_optimum",
    "global_support_patterns",
    "stationarity_check",
    "network_outputs",
    "regularized_loss",
    "project_onto_sign_cone",
    "solve_result_to_csv",
]

FEAS_TOL = 1e-9
DEFAULT_TOL = 1e-8
DEFAULT_MAX_ITER = 200_000
BOUNDARY_TOL = 5e-5
GRAD_TOL = 5e-5
POLISH_MAX_VARS = 1500


class ObjectiveKind(str, Enum):
    REGULARIZED = "regularized"
    MIN_NORM = "min-norm"


class SolveStatus(str, Enum):
    OPTIMAL = "optimal"
    MAX_ITER = "max-iter"
    INFEASIBLE = "infeasible"


@dataclass(frozen=True)
class ConeProgram:
    """Deduplicated cone rows plus the objective they induce.

    ``bits`` has one row per distinct neuron pattern, ``signs`` the matching
    output signs in {-1, +1}; ``row_map[j]`` is the dedup index of row j of
    the activation matrix the program was built from.
    """

    bits: np.ndarray
    signs: np.ndarray
    dataset: Dataset
    lam: float
    kind: ObjectiveKind
    row_map: tuple

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.bits, dtype=np.uint8))
        s = np.atleast_1d(np.asarray(self.signs, dtype=np.int8))
        b.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "bits", b)
        object.__setattr__(self, "signs", s)

    @property
    def num_rows(self) -> int:
        return self.bits.shape[0]

    def masks(self):
        """(M, S): signed prediction masks and constraint signs, both (n, R)."""
        eps = self.signs.astype(float)
        M = eps[None, :] * self.bits.T
        S = 2.0 * self.bits.T.astype(float) - 1.0
        return M, S


def build_cone_program(A: ActivationMatrix, ds: Dataset, lam: float,
                       kind: ObjectiveKind = ObjectiveKind.REGULARIZED) -> ConeProgram:
    """Assemble the per-cone program, removing duplicate rows of A.

    Keeping one neuron per distinct (data bits, sign) row changes no attainable
    minimum value, so duplicates are dropped before solving.
    """
    kind = ObjectiveKind(kind)
    if A.m == 0:
        raise ValueError("empty activation matrix")
    if kind is ObjectiveKind.REGULARIZED and lam <= 0.0:
        raise ValueError("regularized objective needs lam > 0")
    if lam < 0.0:
        raise ValueError("lam must be >= 0")
    seen: dict = {}
    row_map = []
    for i in range(A.m):
        key = (A.bits[i].tobytes(), int(A.signs[i]))
        if key not in seen:
            seen[key] = len(seen)
        row_map.append(seen[key])
    keys = list(seen)
    bits = np.array([np.frombuffer(k[0], dtype=np.uint8) for k in keys], dtype=np.uint8)
    signs = np.array([1 if k[1] else -1 for k in keys], dtype=np.int8)
    return ConeProgram(bits, signs, ds, float(lam), kind, tuple(row_map))


@dataclass(frozen=True)
class SolveResult:
    program: ConeProgram
    beta: np.ndarray          # (R, d); beta_i = |a_i| w_i for the row's neuron
    objective_value: float
    kkt_residual: float
    status: SolveStatus

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.beta, dtype=float))
        b.setflags(write=False)
        object.__setattr__(self, "beta", b)


def _objective(cp: ConeProgram, B: np.ndarray) -> float:
    X, y = cp.dataset.points, cp.dataset.labels
    M, _ = cp.masks()
    pred = np.einsum("kr,kr->k", M, X @ B.T)
    norms = np.linalg.norm(B, axis=1)
    if cp.kind is ObjectiveKind.REGULARIZED:
        return float(np.mean((pred - y) ** 2) + 2.0 * cp.lam * norms.sum())
    return float(norms.sum())


def _data_scale(ds: Dataset) -> float:
    return float(max(1.0, np.linalg.norm(ds.points, axis=1).max(initial=0.0),
                     np.abs(ds.labels).max(initial=0.0)))


def _grad_mse(cp: ConeProgram, B: np.ndarray) -> np.ndarray:
    X, y = cp.dataset.points, cp.dataset.labels
    n = cp.dataset.n
    M, _ = cp.masks()
    pred = np.einsum("kr,kr->k", M, X @ B.T)
    r = pred - y
    return (2.0 / n) * ((M * r[:, None]).T @ X)


def _nnls_distance(Ct: np.ndarray, target: np.ndarray) -> float:
    """min over nu >= 0 of ||Ct nu - target||; Ct has one column per constraint."""
    if Ct.shape[1] == 0:
        return float(np.linalg.norm(target))
    _, res = nnls(Ct, target)
    return float(res)


def _row_stationarity(C: np.ndarray, cons: np.ndarray, target: np.ndarray,
                      scale: float) -> float:
    """Distance of ``target`` to cone(active normals), honest about activity.

    Interior-point solutions leave active constraints at small nonzero values,
    so the active set is swept over a ladder of tolerances; each level yields
    a valid bound max(stationarity distance, complementarity slack) and the
    smallest bound wins.
    """
    best = np.inf
    for level in (1e-9, 1e-7, 1e-5):
        act = np.abs(cons) <= level * scale
        Ct = C[act].T
        if Ct.shape[1] == 0:
            nu = np.zeros(0)
            r = float(np.linalg.norm(target))
        else:
            nu, r = nnls(Ct, target)
        comp = float(np.abs(nu @ cons[act])) if nu.size else 0.0
        best = min(best, max(float(r), comp))
        if best <= 1e-14:
            break
    return best


def kkt_residual(cp: ConeProgram, B: np.ndarray, zero_tol: float = 1e-9) -> float:
    """Independent optimality certificate, normalized by 1 + data scale.

    Takes the maximum of the primal sign-constraint violation and, per row,
    the distance of the objective subgradient to the cone of active-constraint
    normals (a nonnegative least-squares problem).  Rows at beta_i = 0 use the
    group-norm dual condition instead.
    """
    X, y = cp.dataset.points, cp.dataset.labels
    scale = 1.0 + _data_scale(cp.dataset)
    _, S = cp.masks()
    Z = X @ B.T
    feas = max(0.0, float(-(S * Z).min(initial=0.0)))

    lam = cp.lam
    bnorm_scale = max(1.0, float(np.linalg.norm(B, axis=1).max(initial=0.0)))
    stat = 0.0
    if cp.kind is ObjectiveKind.REGULARIZED:
        G = _grad_mse(cp, B)
        for i in range(cp.num_rows):
            C = S[:, i][:, None] * X          # rows: active halfspace normals
            bi = B[i]
            ni = np.linalg.norm(bi)
            if ni > zero_tol * bnorm_scale:
                r = _row_stationarity(C, C @ bi, G[i] + 2.0 * lam * bi / ni, scale)
            else:
                r = max(0.0, _nnls_distance(C.T, G[i]) - 2.0 * lam)
            stat = max(stat, r)
    else:
        M, _ = cp.masks()
        pred = np.einsum("kr,kr->k", M, Z)
        feas = max(feas, float(np.abs(pred - y).max(initial=0.0)))
        stat = min(_min_norm_stationarity(cp, B, S, Z, level * scale,
                                          zero_tol * bnorm_scale)
                   for level in (1e-7, 1e-5))
    return float(max(feas, stat) / scale)


def _min_norm_stationarity(cp: ConeProgram, B, S, Z, active_tol, zero_tol) -> float:
    """Distance to the min-norm KKT system via one bounded least-squares fit.

    Stationarity demands unit(beta_i) = A_i^T mu + C_i^T nu_i with nu_i >= 0 on
    the active constraints (and subgradient norm <= 1 for zero rows); mu is the
    interpolation multiplier shared across rows.
    """
    X = cp.dataset.points
    n, d = X.shape
    M, _ = cp.masks()
    nz = [i for i in range(cp.num_rows) if np.linalg.norm(B[i]) > zero_tol]
    if not nz:
        return 0.0
    cols = [np.zeros((len(nz) * d, n))]
    targets = []
    act_cols = []
    for j, i in enumerate(nz):
        Ai = M[:, i][:, None] * X
        cols[0][j * d:(j + 1) * d, :] = Ai.T
        C = S[:, i][:, None] * X
        act = np.abs(C @ B[i]) <= active_tol
        block = np.zeros((len(nz) * d, int(act.sum())))
        block[j * d:(j + 1) * d, :] = C[act].T
        act_cols.append(block)
        targets.append(B[i] / np.linalg.norm(B[i]))
    A_ls = np.hstack(cols + act_cols)
    target = np.concatenate(targets)
    k_mu = n
    lb = np.concatenate([np.full(k_mu, -np.inf), np.zeros(A_ls.shape[1] - k_mu)])
    ub = np.full(A_ls.shape[1], np.inf)
    fit = lsq_linear(A_ls, target, bounds=(lb, ub), tol=1e-14)
    res = float(np.linalg.norm(A_ls @ fit.x - target))
    # zero rows: dual norm of A_i^T mu within the cone normals must be <= 1
    mu = fit.x[:k_mu]
    for i in range(cp.num_rows):
        if i in nz:
            continue
        Ai = M[:, i][:, None] * X
        C = S[:, i][:, None] * X
        excess = max(0.0, _nnls_distance(C.T, Ai.T @ mu) - 1.0)
        res = max(res, excess)
    return res


def _cvxpy_solve(cp_: ConeProgram, tol: float, max_iter: int):
    import cvxpy as cv

    X, y = cp_.dataset.points, cp_.dataset.labels
    n, d = X.shape
    R = cp_.num_rows
    M, S = cp_.masks()
    B = cv.Variable((R, d))
    Z = X @ B.T
    pred = cv.sum(cv.multiply(M, Z), axis=1)
    cons = [cv.multiply(S, Z) >= 0]
    if cp_.kind is ObjectiveKind.REGULARIZED:
        obj = cv.sum_squares(pred - y) / n + 2.0 * cp_.lam * cv.sum(cv.norm(B, 2, axis=1))
    else:
        obj = cv.sum(cv.norm(B, 2, axis=1))
        cons.append(pred == y)
    prob = cv.Problem(cv.Minimize(obj), cons)
    solver_tol = max(1e-12, tol * 1e-3)
    with warnings.catch_warnings():
        warnings.simplefilter("ignore")
        try:
            prob.solve(solver=cv.CLARABEL, tol_gap_abs=solver_tol,
                       tol_gap_rel=solver_tol, tol_feas=solver_tol,
                       max_iter=min(max_iter, 2000))
        except cv.error.SolverError:
            try:
                prob.solve(solver=cv.CLARABEL)
            except cv.error.SolverError:
                return None, "solver_error"
    return (B.value if B.value is not None else None), prob.status


def _sparsify(cp: ConeProgram, B: np.ndarray, rel_tol: float = 1e-4) -> np.ndarray:
    """Zero out small groups whenever that does not increase the objective.

    Interior-point iterates park vanishing groups at small nonzero norms;
    removing such a group trades an O(norm^2) squared-error change against the
    2*lam*norm penalty saving, so the exact objective comparison decides.
    """
    norms = np.linalg.norm(B, axis=1)
    scale = max(1.0, norms.max(initial=0.0))
    order = np.argsort(norms)
    best = B
    best_val = _objective(cp, B)
    for i in order:
        if norms[i] == 0.0 or norms[i] > rel_tol * scale:
            continue
        trial = best.copy()
        trial[i] = 0.0
        val = _objective(cp, trial)
        if val <= best_val:
            best, best_val = trial, val
    return best


def _polish(cp: ConeProgram, B: np.ndarray, active_tol: float = 1e-6,
            zero_tol: float = 1e-7, iters: int = 40):
    """Newton refinement of a regularized solution on its apparent active set.

    Zero rows stay zero; for the rest, constraints currently within
    ``active_tol`` of their boundary are pinned to equality and the smooth KKT
    system is solved to machine precision.  The refined point is returned only
    if it remains feasible; otherwise None.
    """
    X = cp.dataset.points
    n, d = X.shape
    _, S = cp.masks()
    scale = max(1.0, float(np.linalg.norm(B, axis=1).max(initial=0.0)))
    nz = [i for i in range(cp.num_rows) if np.linalg.norm(B[i]) > zero_tol * scale]
    if not nz or len(nz) * d > POLISH_MAX_VARS:
        return None
    M, _ = cp.masks()
    A_blocks = [M[:, i][:, None] * X for i in nz]
    A_pred = np.hstack(A_blocks)                      # (n, N)
    C_rows = []
    for j, i in enumerate(nz):
        C = S[:, i][:, None] * X
        act = np.flatnonzero(np.abs(C @ B[i]) <= active_tol * scale)
        for k in act:
            row = np.zeros(len(nz) * d)
            row[j * d:(j + 1) * d] = C[k]
            C_rows.append(row)
    C_act = np.array(C_rows) if C_rows else np.zeros((0, len(nz) * d))
    K = C_act.shape[0]
    lam = cp.lam
    y = cp.dataset.labels
    Hf = (2.0 / n) * A_pred.T @ A_pred

    b = np.concatenate([B[i] for i in nz])
    nu = np.zeros(K)

    def fval(bv):
        Bt = np.zeros_like(B)
        for j, i in enumerate(nz):
            Bt[i] = bv[j * d:(j + 1) * d]
        return _objective(cp, Bt)

    for _ in range(iters):
        grads = []
        Hpen = np.zeros_like(Hf)
        for j, _ in enumerate(nz):
            bi = b[j * d:(j + 1) * d]
            ni = np.linalg.norm(bi)
            if ni < 1e-14:
                return None
            u = bi / ni
            grads.append(2.0 * lam * u)
            Hpen[j * d:(j + 1) * d, j * d:(j + 1) * d] = \
                2.0 * lam * (np.eye(d) - np.outer(u, u)) / ni
        g = (2.0 / n) * A_pred.T @ (A_pred @ b - y) + np.concatenate(grads)
        F1 = g - (C_act.T @ nu if K else 0.0)
        F2 = C_act @ b if K else np.zeros(0)
        if max(np.abs(F1).max(initial=0.0), np.abs(F2).max(initial=0.0)) < 1e-14:
            break
        J = np.block([[Hf + Hpen, -C_act.T],
                      [C_act, np.zeros((K, K))]]) if K else Hf + Hpen
        rhs = -np.concatenate([F1, F2]) if K else -F1
        try:
            step = np.linalg.solve(J, rhs)
        except np.linalg.LinAlgError:
            step, *_ = np.linalg.lstsq(J, rhs, rcond=None)
        t = 1.0
        base = fval(b)
        for _ in range(30):
            b_new = b + t * step[:len(nz) * d]
            nu_new = nu + t * step[len(nz) * d:] if K else nu
            if fval(b_new) <= base + 1e-12 * max(1.0, abs(base)):
                break
            t /= 2.0
        else:
            return None
        b, nu = b_new, nu_new

    B_out = np.zeros_like(B)
    for j, i in enumerate(nz):
        B_out[i] = b[j * d:(j + 1) * d]
    Z = X @ B_out.T
    if float(-(S * Z).min(initial=0.0)) > FEAS_TOL:
        return None
    return B_out


def project_onto_sign_cone(v: np.ndarray, bits: np.ndarray, X: np.ndarray) -> np.ndarray:
    """Euclidean projection of v onto {w : sign-constraints of the bit row}."""
    S = (2.0 * np.asarray(bits, float) - 1.0)[:, None] * X
    nu, _ = nnls(S.T, -(v))
    return v + S.T @ nu


def solve(cp: ConeProgram, tol: float = DEFAULT_TOL,
          max_iter: int = DEFAULT_MAX_ITER) -> SolveResult:
    """Solve the cone program and certify the result.

    Status OPTIMAL is only reported when the independently computed KKT
    residual is at most ``tol``; otherwise the best iterate is returned with
    status MAX_ITER.  Min-norm programs on cones that cannot interpolate give
    status INFEASIBLE.
    """
    if tol <= 0.0:
        raise ValueError("tol must be > 0")
    B, status = _cvxpy_solve(cp, tol, max_iter)
    if status in ("infeasible", "infeasible_inaccurate"):
        return SolveResult(cp, np.zeros((cp.num_rows, cp.dataset.d)),
                           float("inf"), float("inf"), SolveStatus.INFEASIBLE)
    if B is None:
        B = np.zeros((cp.num_rows, cp.dataset.d))
    B = np.atleast_2d(np.asarray(B, dtype=float))

    if cp.kind is ObjectiveKind.REGULARIZED:
        B = _sparsify(cp, B)
        base_res = kkt_residual(cp, B)
        if base_res > tol:
            base_val = _objective(cp, B)
            for act_tol in (1e-5, 1e-7):
                polished = _polish(cp, B, active_tol=act_tol)
                if polished is None:
                    continue
                if _objective(cp, polished) <= base_val + 1e-12 * max(1.0, abs(base_val)):
                    res_p = kkt_residual(cp, polished)
                    if res_p < base_res:
                        B, base_res = polished, res_p
                        if base_res <= tol:
                            break

    # repair stray sign violations so the feasibility contract always holds
    _, S = cp.masks()
    X = cp.dataset.points
    viol = -(S * (X @ B.T)).min(initial=0.0)
    if viol > FEAS_TOL:
        for i in range(cp.num_rows):
            C = S[:, i][:, None] * X
            if (C @ B[i]).min(initial=0.0) < -FEAS_TOL:
                B[i] = project_onto_sign_cone(B[i], cp.bits[i], X)

    res = kkt_residual(cp, B)
    final = SolveStatus.OPTIMAL if res <= tol else SolveStatus.MAX_ITER
    return SolveResult(cp, B, _objective(cp, B), res, final)


@dataclass(frozen=True)
class Network:
    """Two-layer ReLU network parameters; rows of W are inner neurons."""

    W: np.ndarray
    a: np.ndarray

    def __post_init__(self):
        W = np.atleast_2d(np.asarray(self.W, dtype=float))
        a = np.atleast_1d(np.asarray(self.a, dtype=float))
        if W.shape[0] != a.shape[0]:
            raise ValueError("width mismatch between layers")
        W.setflags(write=False)
        a.setflags(write=False)
        object.__setattr__(self, "W", W)
        object.__setattr__(self, "a", a)

    @property
    def width(self) -> int:
        return self.W.shape[0]

    @property
    def d(self) -> int:
        return self.W.shape[1]

    def predict(self, points: np.ndarray) -> np.ndarray:
        return np.maximum(np.atleast_2d(points) @ self.W.T, 0.0) @ self.a

    def theta_sq_norm(self) -> float:
        return float(np.sum(self.W ** 2) + np.sum(self.a ** 2))

    def is_balanced(self, tol: float = 1e-12) -> bool:
        return bool(np.abs(np.abs(self.a) - np.linalg.norm(self.W, axis=1)).max(initial=0.0) <= tol)


def network_outputs(net: Network, ds: Dataset) -> np.ndarray:
    return net.predict(ds.points)


def regularized_loss(net: Network, ds: Dataset, lam: float):
    """(mse, regularized loss) of the network on the dataset."""
    r = network_outputs(net, ds) - ds.labels
    mse = float(np.mean(r ** 2))
    return mse, mse + lam * net.theta_sq_norm()


def recover_network(sr: SolveResult, m: int | None = None,
                    row_map=None) -> Network:
    """Balanced network realizing a cone-program solution.

    Each nonzero row becomes a neuron with w_i = beta_i / sqrt(|beta_i|),
    a_i = sign_i sqrt(|beta_i|); remaining rows are zero neurons.  ``row_map``
    may place dedup rows at chosen indices of the width-m network.
    """
    R, d = sr.beta.shape
    if m is None:
        m = R
    if m < R:
        raise ValueError("m must be at least the number of dedup rows")
    W = np.zeros((m, d))
    a = np.zeros(m)
    placed = set()
    for i in range(R):
        if row_map is not None:
            j = row_map.index(i) if isinstance(row_map, (tuple, list)) else row_map[i]
        else:
            j = i
        if j in placed:
            raise ValueError("row_map targets collide")
        placed.add(j)
        norm = np.linalg.norm(sr.beta[i])
        if norm == 0.0:
            continue
        W[j] = sr.beta[i] / np.sqrt(norm)
        a[j] = float(sr.program.signs[i]) * np.sqrt(norm)
    return Network(W, a)


def global_optimum(ds: Dataset, lam: float,
                   kind: ObjectiveKind = ObjectiveKind.REGULARIZED,
                   tol: float = DEFAULT_TOL) -> SolveResult:
    """Solve over one neuron per realizable pattern and both output signs.

    The feasible set of any cone program on the same data embeds into this
    one, so its value lower-bounds every per-cone value.
    """
    from .arrangement import enumerate_patterns

    ps = enumerate_patterns(ds)
    P = len(ps)
    bits = np.vstack([ps.patterns, ps.patterns])
    signs = np.concatenate([np.ones(P, np.uint8), np.zeros(P, np.uint8)])
    A = ActivationMatrix(bits, signs)
    return solve(build_cone_program(A, ds, lam, kind), tol=tol)


def global_support_patterns(sr: SolveResult, rel_tol: float = 1e-6):
    """Patterns of the nonzero rows of a solution, as NeuronPattern values."""
    from .arrangement import NeuronPattern

    norms = np.linalg.norm(sr.beta, axis=1)
    cut = rel_tol * max(1.0, norms.max(initial=0.0))
    out = []
    for i in np.flatnonzero(norms > cut):
        out.append(NeuronPattern(tuple(sr.program.bits[i]),
                                 int(sr.program.signs[i] > 0)))
    return out


@dataclass(frozen=True)
class StationarityReport:
    min_grad_inf_norm: float
    is_stationary: bool
    boundary_count: int


def stationarity_check(net: Network, ds: Dataset, lam: float,
                       boundary_tol: float = BOUNDARY_TOL,
                       grad_tol: float = GRAD_TOL) -> StationarityReport:
    """Minimal attainable gradient magnitude under tunable ReLU subderivatives.

    ReLU derivatives are 1 above +boundary_tol, 0 below -boundary_tol, and a
    free parameter in [0, 1] at preactivations in between.  The squared norm
    of the full parameter gradient is affine-quadratic in those parameters, so
    its box-constrained minimizer comes from bounded least squares; the point
    is declared stationary when every gradient entry of the minimizer is
    below ``grad_tol``.
    """
    X, y = ds.points, ds.labels
    n = ds.n
    m, d = net.W.shape
    Z = net.W @ X.T
    V = np.maximum(Z, 0.0)
    r = net.a @ V - y
    grad_a = (2.0 / n) * (V @ r) + 2.0 * lam * net.a

    on = Z > boundary_tol
    boundary = np.abs(Z) <= boundary_tol
    base_w = (2.0 / n) * ((on * r[None, :]) @ X) * net.a[:, None] + 2.0 * lam * net.W

    pairs = np.argwhere(boundary)
    if pairs.size:
        cols = np.zeros((m * d, len(pairs)))
        for c, (i, k) in enumerate(pairs):
            cols[i * d:(i + 1) * d, c] = (2.0 / n) * r[k] * net.a[i] * X[k]
        target = -base_w.ravel()
        if np.abs(cols).max() == 0.0:
            q = np.zeros(len(pairs))
        else:
            fit = lsq_linear(cols, target, bounds=(0.0, 1.0), tol=1e-14,
                             method="bvls" if len(pairs) <= 400 else "trf")
            q = fit.x
        grad_w = base_w.ravel() + cols @ q
    else:
        grad_w = base_w.ravel()

    gmax = float(max(np.abs(grad_w).max(initial=0.0), np.abs(grad_a).max(initial=0.0)))
    return StationarityReport(gmax, gmax < grad_tol, int(pairs.shape[0]))


def solve_result_to_csv(sr: SolveResult) -> str:
    lines = [f"# objective={format(sr.objective_value, '.17g')},"
             f"kkt_residual={format(sr.kkt_residual, '.17g')},status={sr.status.value}"]
    d = sr.beta.shape[1]
    lines.append("row_bits,sign," + ",".join(f"beta_{j + 1}" for j in range(d)))
    for i in range(sr.program.num_rows):
        bits = "".join(str(int(b)) for b in sr.program.bits[i])
        lines.append(f"{bits},{int(sr.program.signs[i])},"
                     + ",".join(format(v, ".17g") for v in sr.beta[i]))
    return "\n".join(lines) + "\n"
