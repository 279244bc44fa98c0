"""Dataset families used throughout the experiments.

Three generators are provided: standard-Gaussian points labelled by a random
two-layer ReLU teacher, Haar-uniform orthonormal frames, and unit vectors
drawn near a fixed family of anchor centers with labels from a fixed linear
teacher.  All generators are pure functions of their arguments and the seed.
"""
from __future__ import annotations

from dataclasses import dataclass
from enum import Enum

import numpy as np

__all__ = [
    "DatasetKind",
    "TeacherNetwork",
    "Dataset",
    "CovarianceSpectrum",
    "GeneralPositionReport",
    "anchor_centers",
    "teacher_vector",
    "random_teacher",
    "gen_gaussian_teacher",
    "gen_orthogonal",
    "gen_assumption1",
    "covariance_spectrum",
    "validate_general_position",
    "dataset_to_csv",
    "dataset_from_csv",
    "save_dataset",
    "load_dataset",
]

UNIT_TOL = 1e-12
ORTHO_TOL = 1e-12
EIGEN_GAP_TOL = 1e-10
SUPPORT_TOL = 1e-10


class DatasetKind(str, Enum):
    GAUSSIAN_TEACHER = "gaussian-teacher"
    ORTHOGONAL = "orthogonal"
    ASSUMPTION1 = "assumption1"


def _readonly(a: np.ndarray) -> np.ndarray:
    a = np.asarray(a, dtype=float)
    a.setflags(write=False)
    return a


@dataclass(frozen=True)
class TeacherNetwork:
    """Two-layer ReLU network ``x -> outer @ relu(inner @ x)`` used as labeler."""

    inner: np.ndarray  # (width, d)
    outer: np.ndarray  # (width,)

    def __post_init__(self):
        object.__setattr__(self, "inner", _readonly(np.atleast_2d(self.inner)))
        object.__setattr__(self, "outer", _readonly(np.atleast_1d(self.outer)))
        if self.inner.shape[0] != self.outer.shape[0]:
            raise ValueError("inner and outer widths disagree")

    @property
    def width(self) -> int:
        return self.inner.shape[0]

    def predict(self, points: np.ndarray) -> np.ndarray:
        """Labels for a batch of points, one row per point."""
        z = np.atleast_2d(points) @ self.inner.T
        return np.maximum(z, 0.0) @ self.outer


def zero_teacher(d: int, width: int = 1) -> TeacherNetwork:
    return TeacherNetwork(np.zeros((width, d)), np.zeros(width))


def random_teacher(d: int, width: int, rng: np.random.Generator) -> TeacherNetwork:
    """Teacher with i.i.d. standard-Gaussian weights in both layers."""
    return TeacherNetwork(rng.standard_normal((width, d)), rng.standard_normal(width))


def teacher_vector(d: int) -> np.ndarray:
    """The fixed unit labelling direction (4/5)e1 + (3/5)e3."""
    if d < 3:
        raise ValueError("teacher vector needs d >= 3")
    v = np.zeros(d)
    v[0] = 4.0 / 5.0
    v[2] = 3.0 / 5.0
    return v


def anchor_centers(d: int) -> np.ndarray:
    """The fixed unit anchor centers, one row per center, defined for d >= 3."""
    if d < 3:
        raise ValueError("anchor centers need d >= 3")
    c = np.zeros((d, d))
    c[0, 0] = 1.0
    c[1, 0] = 8.0 / 9.0
    c[1, 1] = -4.0 / 9.0
    c[1, 2] = 1.0 / 9.0
    c[2, 0] = 8.0 / 9.0
    c[2, 1] = 4.0 / 9.0
    c[2, 2] = 1.0 / 9.0
    for k in range(3, d):
        c[k, 0] = 8.0 / 9.0
        c[k, k] = np.sqrt(17.0) / 9.0
    return c


@dataclass(frozen=True)
class Dataset:
    """Immutable labelled point set; ``points`` has one row per sample."""

    points: np.ndarray
    labels: np.ndarray
    kind: DatasetKind
    seed: int
    eta: float | None = None
    noise_std: float | None = None

    def __post_init__(self):
        pts = _readonly(np.atleast_2d(self.points))
        lab = _readonly(np.atleast_1d(self.labels))
        object.__setattr__(self, "points", pts)
        object.__setattr__(self, "labels", lab)
        object.__setattr__(self, "kind", DatasetKind(self.kind))
        if pts.shape[0] != lab.shape[0]:
            raise ValueError("points and labels length mismatch")
        if not (np.isfinite(pts).all() and np.isfinite(lab).all()):
            raise ValueError("non-finite dataset entries")
        self._validate_kind()

    def _validate_kind(self):
        pts = self.points
        n, d = pts.shape
        if self.kind in (DatasetKind.ORTHOGONAL, DatasetKind.ASSUMPTION1):
            norms = np.linalg.norm(pts, axis=1)
            if np.abs(norms - 1.0).max() > UNIT_TOL:
                raise ValueError("points must be unit vectors")
        if self.kind is DatasetKind.ORTHOGONAL:
            if n > d:
                raise ValueError("orthogonal kind requires n <= d")
            gram = pts @ pts.T
            off = gram - np.diag(np.diag(gram))
            if np.abs(off).max() > ORTHO_TOL:
                raise ValueError("points are not pairwise orthogonal")
        if self.kind is DatasetKind.ASSUMPTION1:
            if n != d or d < 3:
                raise ValueError("assumption1 kind requires n = d >= 3")
            eta = self.eta if self.eta is not None else 1e-3
            dots = np.einsum("kj,kj->k", pts, anchor_centers(d))
            if not (dots > 1.0 - eta).all():
                raise ValueError("a point strays too far from its anchor center")
            expect = pts @ teacher_vector(d)
            if not np.array_equal(self.labels, expect):
                raise ValueError("labels do not equal the linear-teacher outputs")

    @property
    def n(self) -> int:
        return self.points.shape[0]

    @property
    def d(self) -> int:
        return self.points.shape[1]


def gen_gaussian_teacher(n: int, d: int, teacher_width: int = 10,
                         seed: int = 0) -> Dataset:
    """i.i.d. standard-Gaussian points labelled by a fresh random ReLU teacher.

    The teacher is drawn from the same seed, so equal seeds reproduce the
    dataset bit for bit.
    """
    if min(n, d, teacher_width) < 1:
        raise ValueError("n, d, teacher_width must be >= 1")
    rng = np.random.default_rng(seed)
    points = rng.standard_normal((n, d))
    teacher = random_teacher(d, teacher_width, rng)
    return Dataset(points, teacher.predict(points), DatasetKind.GAUSSIAN_TEACHER, seed)


def gen_orthogonal(n: int, d: int, labeler: TeacherNetwork, seed: int = 0) -> Dataset:
    """Haar-uniform orthonormal n-frame in R^d, labelled by ``labeler``.

    The frame is the QR factor of a Gaussian matrix with the sign of the R
    diagonal fixed positive, which makes the distribution Haar-uniform.
    """
    if n > d:
        raise ValueError(f"orthogonal frame needs n <= d, got n={n}, d={d}")
    rng = np.random.default_rng(seed)
    g = rng.standard_normal((d, n))
    q, r = np.linalg.qr(g)
    q = q * np.sign(np.diag(r))
    points = q.T
    return Dataset(points, labeler.predict(points), DatasetKind.ORTHOGONAL, seed)


def gen_assumption1(d: int, eta: float = 1e-3, noise_std: float = 1e-3,
                    seed: int = 0, max_attempts: int = 100) -> Dataset:
    """Unit points near the anchor centers with exact linear-teacher labels.

    Each point is the normalized sum of its center and isotropic Gaussian
    noise; draws with ``x_k . center_k <= 1 - eta`` are rejected and resampled,
    up to ``max_attempts`` times per point.  With ``noise_std = 0`` the points
    are exactly the centers.
    """
    if d < 3:
        raise ValueError("need d >= 3")
    if not 0.0 < eta < 1.0:
        raise ValueError("eta must lie in (0, 1)")
    if noise_std < 0.0:
        raise ValueError("noise_std must be >= 0")
    rng = np.random.default_rng(seed)
    cen = anchor_centers(d)
    points = np.empty((d, d))
    for k in range(d):
        if noise_std == 0.0:
            points[k] = cen[k]
            continue
        for _ in range(max_attempts):
            x = cen[k] + noise_std * rng.standard_normal(d)
            x = x / np.linalg.norm(x)
            if x @ cen[k] > 1.0 - eta:
                points[k] = x
                break
        else:
            raise RuntimeError(
                f"could not satisfy the center-proximity condition for point {k} "
                f"in {max_attempts} attempts (eta={eta}, noise_std={noise_std})")
    labels = points @ teacher_vector(d)
    return Dataset(points, labels, DatasetKind.ASSUMPTION1, seed,
                   eta=eta, noise_std=noise_std)


@dataclass(frozen=True)
class CovarianceSpectrum:
    """Eigen-summary of the empirical covariance H = (1/n) sum_k x_k x_k^T."""

    H: np.ndarray
    mu_min: float
    mu_max: float
    eigen_distinct: bool
    vstar_full_support: bool

    def __post_init__(self):
        object.__setattr__(self, "H", _readonly(self.H))


def covariance_spectrum(ds: Dataset) -> CovarianceSpectrum:
    """Spectrum of the empirical covariance of a dataset.

    ``eigen_distinct`` holds when all eigenvalue gaps exceed 1e-10.  The
    full-support flag (every eigenvector carries a component of the fixed
    teacher direction above 1e-10) is only meaningful for assumption1-kind
    data and is reported False otherwise.
    """
    if ds.n == 0:
        raise ValueError("empty dataset")
    X = ds.points
    H = X.T @ X / ds.n
    H = (H + H.T) / 2.0
    evals, evecs = np.linalg.eigh(H)
    mu_min = float(max(evals[0], 0.0))
    mu_max = float(evals[-1])
    gaps = np.diff(evals)
    eigen_distinct = bool(gaps.size == 0 or gaps.min() > EIGEN_GAP_TOL)
    full_support = False
    if ds.kind is DatasetKind.ASSUMPTION1:
        comps = evecs.T @ teacher_vector(ds.d)
        full_support = bool(np.abs(comps).min() > SUPPORT_TOL)
    if mu_min == 0.0:
        eigen_distinct = False
        full_support = False
    return CovarianceSpectrum(H, mu_min, mu_max, eigen_distinct, full_support)


@dataclass(frozen=True)
class GeneralPositionReport:
    in_general_position: bool
    has_zero_point: bool
    exhaustive: bool
    num_subsets_checked: int
    min_relative_sv: float


def validate_general_position(ds: Dataset, sample_size: int = 2000,
                              seed: int = 0, tol: float = 1e-9) -> GeneralPositionReport:
    """Check that every size-min(n, d) subset of points is linearly independent.

    Exhaustive for n <= 16, random subsets otherwise.  A subset counts as
    dependent when its smallest singular value falls below ``tol`` times its
    largest.  Also flags exactly-zero points.
    """
    from itertools import combinations

    X = ds.points
    n, d = X.shape
    k = min(n, d)
    has_zero = bool((np.linalg.norm(X, axis=1) == 0.0).any())

    if n <= 16:
        subsets = list(combinations(range(n), k))
        exhaustive = True
    else:
        rng = np.random.default_rng(seed)
        subsets = [tuple(rng.choice(n, size=k, replace=False)) for _ in range(sample_size)]
        exhaustive = False

    min_rel = np.inf
    for idx in subsets:
        sv = np.linalg.svd(X[list(idx)], compute_uv=False)
        rel = sv[-1] / sv[0] if sv[0] > 0.0 else 0.0
        min_rel = min(min_rel, rel)
        if min_rel <= tol:
            break
    ok = bool((not has_zero) and min_rel > tol)
    return GeneralPositionReport(ok, has_zero, exhaustive, len(subsets), float(min_rel))


# ---------------------------------------------------------------------------
# CSV serialization: one metadata comment line, then `k,x_1,...,x_d,y` rows.
# ---------------------------------------------------------------------------

def fmt(x: float) -> str:
    """17-significant-digit formatting; round-trips every float64."""
    return format(float(x), ".17g")


def dataset_to_csv(ds: Dataset) -> str:
    eta = "" if ds.eta is None else fmt(ds.eta)
    noise = "" if ds.noise_std is None else fmt(ds.noise_std)
    lines = [f"# kind={ds.kind.value},seed={ds.seed},eta={eta},noise_std={noise}"]
    lines.append("k," + ",".join(f"x_{j + 1}" for j in range(ds.d)) + ",y")
    for k in range(ds.n):
        row = [str(k + 1)] + [fmt(v) for v in ds.points[k]] + [fmt(ds.labels[k])]
        lines.append(",".join(row))
    return "\n".join(lines) + "\n"


def dataset_from_csv(text: str) -> Dataset:
    lines = [ln for ln in text.splitlines() if ln.strip()]
    if not lines or not lines[0].startswith("#"):
        raise ValueError("missing metadata line")
    meta = dict(item.split("=", 1) for item in lines[0][1:].strip().split(","))
    rows = [ln.split(",") for ln in lines[2:]]
    pts = np.array([[float(v) for v in r[1:-1]] for r in rows])
    labels = np.array([float(r[-1]) for r in rows])
    return Dataset(
        pts, labels, DatasetKind(meta["kind"]), int(meta["seed"]),
        eta=float(meta["eta"]) if meta.get("eta") else None,
        noise_std=float(meta["noise_std"]) if meta.get("noise_std") else None,
    )


def save_dataset(ds: Dataset, path) -> None:
    with open(path, "w", newline="\n") as fh:
        fh.write(dataset_to_csv(ds))


def load_dataset(path) -> Dataset:
    with open(path) as fh:
        return dataset_from_csv(fh.read())
