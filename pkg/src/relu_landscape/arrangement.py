"""Activation patterns of single neurons and their data-induced cones.

A neuron (w, a) acting on n data points realizes an (n+1)-bit pattern: one
bit per point for the sign of the preactivation (with the boundary w.x = 0
mapped to an active bit) plus the sign bit of the output weight.  The
realizable data-bit vectors are exactly the cells of the central hyperplane
arrangement {w : w.x_k = 0}; this module enumerates them with strictly
interior witnesses, counts them in closed form, and samples activation
matrices both uniformly over patterns and through random networks.
"""
from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np
from scipy.optimize import linprog

from .data import Dataset, DatasetKind, validate_general_position

__all__ = [
    "NeuronPattern",
    "PatternSet",
    "ActivationMatrix",
    "ArrangementError",
    "pattern_of",
    "enumerate_patterns",
    "cover_count",
    "sample_cone_uniform",
    "sample_cone_network",
    "winning_patterns",
    "contains_covering_row",
    "pattern_set_to_csv",
    "activation_matrix_to_csv",
]

MAX_PATTERNS = 10**6
DEFAULT_WITNESS_MARGIN = 1e-9


class ArrangementError(ValueError):
    pass


@dataclass(frozen=True, order=True)
class NeuronPattern:
    """Value-comparable activation descriptor of one neuron."""

    data_bits: tuple
    sign_bit: int

    def __post_init__(self):
        object.__setattr__(self, "data_bits", tuple(int(b) for b in self.data_bits))
        if any(b not in (0, 1) for b in self.data_bits) or self.sign_bit not in (0, 1):
            raise ValueError("pattern bits must be 0/1")

    @property
    def n(self) -> int:
        return len(self.data_bits)


def pattern_of(w: np.ndarray, a: float, ds: Dataset) -> NeuronPattern:
    """Pattern realized by the neuron (w, a); boundary w.x_k = 0 maps to bit 1."""
    bits = tuple(int(v >= 0.0) for v in ds.points @ np.asarray(w, dtype=float))
    return NeuronPattern(bits, int(a >= 0.0))


@dataclass(frozen=True)
class ActivationMatrix:
    """Stack of m neuron patterns: data bits (m, n) and sign bits (m,)."""

    bits: np.ndarray
    signs: np.ndarray

    def __post_init__(self):
        b = np.atleast_2d(np.asarray(self.bits, dtype=np.uint8))
        s = np.atleast_1d(np.asarray(self.signs, dtype=np.uint8))
        if b.shape[0] != s.shape[0]:
            raise ValueError("bits/signs row mismatch")
        b.setflags(write=False)
        s.setflags(write=False)
        object.__setattr__(self, "bits", b)
        object.__setattr__(self, "signs", s)

    @property
    def m(self) -> int:
        return self.bits.shape[0]

    @property
    def n(self) -> int:
        return self.bits.shape[1]

    def row(self, i: int) -> NeuronPattern:
        return NeuronPattern(tuple(self.bits[i]), int(self.signs[i]))

    def rows(self):
        return [self.row(i) for i in range(self.m)]

    @staticmethod
    def from_rows(rows, n: int | None = None) -> "ActivationMatrix":
        rows = list(rows)
        if not rows:
            if n is None:
                raise ValueError("need n for an empty matrix")
            return ActivationMatrix(np.zeros((0, n), np.uint8), np.zeros(0, np.uint8))
        bits = np.array([r.data_bits for r in rows], dtype=np.uint8)
        signs = np.array([r.sign_bit for r in rows], dtype=np.uint8)
        return ActivationMatrix(bits, signs)

    @staticmethod
    def from_network(W: np.ndarray, a: np.ndarray, ds: Dataset) -> "ActivationMatrix":
        bits = (np.atleast_2d(W) @ ds.points.T >= 0.0).astype(np.uint8)
        signs = (np.atleast_1d(a) >= 0.0).astype(np.uint8)
        return ActivationMatrix(bits, signs)


@dataclass(frozen=True)
class PatternSet:
    """All realizable data-bit vectors with strictly interior witnesses."""

    patterns: np.ndarray   # (P, n) uint8
    witnesses: np.ndarray  # (P, d) unit rows
    margins: np.ndarray    # (P,) relative interior margins
    witness_margin: float

    def __post_init__(self):
        for name in ("patterns", "witnesses", "margins"):
            arr = np.asarray(getattr(self, name))
            arr.setflags(write=False)
            object.__setattr__(self, name, arr)

    def __len__(self) -> int:
        return self.patterns.shape[0]

    @property
    def n(self) -> int:
        return self.patterns.shape[1]


def cover_count(n: int, d: int) -> int:
    """Exact number of realizable neuron patterns, sign bit included.

    For n points in general position in R^d this is 4 * sum_{i<d} C(n-1, i):
    twice the number of full-dimensional cells of the central arrangement.
    """
    if n < 1 or d < 1:
        raise ValueError("n, d must be >= 1")
    return 4 * sum(math.comb(n - 1, i) for i in range(min(d, n)))


def _max_margin_witness(signed_normals: np.ndarray):
    """Most interior point of {v : s_j x_j . v > 0}, by linear programming.

    Maximizes t subject to s_j x_j . v >= t and |v_i| <= 1.  Returns (v, t);
    the cell has full dimension exactly when t > 0.
    """
    k, d = signed_normals.shape
    c = np.zeros(d + 1)
    c[-1] = -1.0
    a_ub = np.hstack([-signed_normals, np.ones((k, 1))])
    b_ub = np.zeros(k)
    bounds = [(-1.0, 1.0)] * d + [(None, 1.0)]
    res = linprog(c, A_ub=a_ub, b_ub=b_ub, bounds=bounds, method="highs")
    if not res.success:
        raise ArrangementError(f"witness LP failed: {res.message}")
    return res.x[:d], -res.fun


def enumerate_patterns(ds: Dataset, witness_margin: float = DEFAULT_WITNESS_MARGIN) -> PatternSet:
    """Enumerate every realizable data-bit vector of the dataset.

    Inserts the hyperplanes {w : w.x_k = 0} one at a time, keeping one
    interior witness per cell.  A cell whose witness lies strictly on one
    side of the new hyperplane keeps it, and the opposite side is opened only
    if a margin-maximizing LP certifies a full-dimensional cell there.
    Witnesses are re-optimized against all hyperplanes at the end so every
    pattern carries a uniformly interior witness.
    """
    n, d = ds.n, ds.d
    expected = cover_count(n, d) // 2
    if expected > MAX_PATTERNS:
        raise ArrangementError(
            f"{expected} cells exceed the enumeration cap of {MAX_PATTERNS}")
    gp = validate_general_position(ds)
    if not gp.in_general_position:
        raise ArrangementError(
            "dataset is not in general position "
            f"(min relative singular value {gp.min_relative_sv:.3e}); "
            "cell enumeration would be ambiguous")

    norms = np.linalg.norm(ds.points, axis=1)
    xbar = ds.points / norms[:, None]

    # seed with the two sides of the first hyperplane
    cells = [(np.array([1.0]), xbar[0].copy()),
             (np.array([-1.0]), -xbar[0])]
    for k in range(1, n):
        new_cells = []
        for s, w in cells:
            h = float(w @ xbar[k])
            keep = 1e-12 * max(1.0, float(np.linalg.norm(w)))
            sides = (1.0, -1.0) if abs(h) <= keep else (math.copysign(1.0, h),)
            known_side = None if abs(h) <= keep else sides[0]
            normals = xbar[: k + 1]
            for side in (1.0, -1.0):
                s_new = np.append(s, side)
                if side == known_side:
                    new_cells.append((s_new, w))
                    continue
                v, t = _max_margin_witness(s_new[:, None] * normals)
                if t > witness_margin:
                    new_cells.append((s_new, v))
        cells = new_cells
        if len(cells) > MAX_PATTERNS:
            raise ArrangementError("cell count exceeded the enumeration cap")

    # final polish: one margin LP per cell against all hyperplanes
    pats, wits, margs = [], [], []
    for s, _ in cells:
        v, t = _max_margin_witness(s[:, None] * xbar)
        if t <= witness_margin:
            raise ArrangementError("degenerate cell survived enumeration")
        v = v / np.linalg.norm(v)
        pats.append((s > 0).astype(np.uint8))
        wits.append(v)
        margs.append(float(np.min((s * (xbar @ v)))))
    pats = np.array(pats, dtype=np.uint8)
    wits = np.array(wits)
    margs = np.array(margs)
    order = np.lexsort(pats.T[::-1])
    ps = PatternSet(pats[order], wits[order], margs[order], witness_margin)
    if len(ps) != len({tuple(p) for p in ps.patterns}):
        raise ArrangementError("duplicate patterns in enumeration")
    return ps


def sample_cone_uniform(ps: PatternSet, m: int, rng: np.random.Generator) -> ActivationMatrix:
    """m i.i.d. rows, uniform over the pattern set, with fair sign bits."""
    if len(ps) == 0:
        raise ValueError("empty pattern set")
    idx = rng.integers(0, len(ps), size=m)
    signs = rng.integers(0, 2, size=m).astype(np.uint8)
    return ActivationMatrix(ps.patterns[idx], signs)


def sample_cone_network(ds: Dataset, m: int, rng: np.random.Generator) -> ActivationMatrix:
    """Patterns observed on a width-m network with i.i.d. standard-Gaussian weights."""
    W = rng.standard_normal((m, ds.d))
    a = rng.standard_normal(m)
    return ActivationMatrix.from_network(W, a, ds)


def winning_patterns(ds: Dataset):
    """Masks of the positive-label and negative-label point indices."""
    if ds.kind is not DatasetKind.ORTHOGONAL:
        raise ValueError("winning-pattern masks are defined for orthogonal datasets")
    pos = (ds.labels > 0.0).astype(np.uint8)
    neg = (ds.labels < 0.0).astype(np.uint8)
    return pos, neg


def contains_covering_row(A: ActivationMatrix, mask: np.ndarray,
                          required_sign: int | None = None) -> bool:
    """True when some row's data bits cover ``mask`` (and match the sign, if given)."""
    mask = np.asarray(mask, dtype=np.uint8)
    covered = (A.bits >= mask[None, :]).all(axis=1)
    if required_sign is not None:
        covered &= A.signs == required_sign
    return bool(covered.any())


def pattern_set_to_csv(ps: PatternSet) -> str:
    lines = ["pattern_bits," + ",".join(f"witness_{j + 1}" for j in range(ps.witnesses.shape[1]))]
    for p, w in zip(ps.patterns, ps.witnesses):
        lines.append("".join(str(int(b)) for b in p) + ","
                     + ",".join(format(v, ".17g") for v in w))
    return "\n".join(lines) + "\n"


def activation_matrix_to_csv(A: ActivationMatrix) -> str:
    lines = ["".join(str(int(b)) for b in A.bits[i]) + str(int(A.signs[i]))
             for i in range(A.m)]
    return "\n".join(lines) + "\n"
