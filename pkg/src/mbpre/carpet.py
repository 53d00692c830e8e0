"""The random Sierpinski carpet and its diagonal-projection branching model.

Each retained square splits along its main diagonal into an upper and a
lower triangle, and the 45-degree projection (x, y) -> x - y sends a
depth-n triangle onto exactly one width-3^(-n) diagonal strip. Nested
strips subdivide 3-into-1, so the triangles over a fixed projection point
form a 2-type branching process whose environment letter is the strip's
position (0, 1, 2) inside its parent strip, i.i.d. uniform for a
Lebesgue-typical point. Retaining squares independently with probability p
scales every expectation matrix by p, which makes the critical retention
probability the root of log p + lambda_B = 0, with lambda_B the growth
exponent of the p = 1 matrices.
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, InvariantError
from .lyapunov import estimate_exponent
from .model import EnvironmentLetter, IidEnvironment, ModelSpec, OffspringLaw

UPPER, LOWER = 0, 1

# Sub-triangles of a parent triangle, one subdivision level down, as
# (square, child_type, column) triples. Squares are indexed (i, j) in the
# 3x3 grid of the parent's bounding square with the middle (1, 1) never
# retained; the upper triangle of square (i, j) lies in diagonal strip
# i - j and the lower one in strip i - j + 1, and columns count the three
# strips covered by the parent triangle from its far edge towards its
# diagonal. Within each (parent, column) slot the contributing squares are
# pairwise distinct, so the type counts are independent Bernoulli sums.
CHILD_SQUARES = {
    UPPER: (
        ((0, 2), UPPER, 0),
        ((0, 1), UPPER, 1),
        ((1, 2), UPPER, 1),
        ((0, 2), LOWER, 1),
        ((0, 0), UPPER, 2),
        ((2, 2), UPPER, 2),
        ((0, 1), LOWER, 2),
        ((1, 2), LOWER, 2),
    ),
    LOWER: (
        ((1, 0), UPPER, 0),
        ((2, 1), UPPER, 0),
        ((0, 0), LOWER, 0),
        ((2, 2), LOWER, 0),
        ((2, 0), UPPER, 1),
        ((1, 0), LOWER, 1),
        ((2, 1), LOWER, 1),
        ((2, 0), LOWER, 2),
    ),
}

# Expectation matrices of the three column letters at p = 1.
COLUMN_MATRICES = (
    np.array([[1.0, 0.0], [2.0, 2.0]]),
    np.array([[2.0, 1.0], [1.0, 2.0]]),
    np.array([[2.0, 2.0], [0.0, 1.0]]),
)
for _m in COLUMN_MATRICES:
    _m.setflags(write=False)

_UNIFORM3 = IidEnvironment(np.array([1.0, 1.0, 1.0]) / 3.0)

# Default ceiling on materialized squares in sample_carpet (~16 bytes each).
MAX_SQUARES = 10**7

_MATRIX_TOL = 1e-12


def _binomial_law(k_upper, k_lower, p):
    """Independent Binomial(k_upper, p) x Binomial(k_lower, p) counts."""
    atoms, probs = [], []
    for a in range(k_upper + 1):
        pa = math.comb(k_upper, a) * p**a * (1.0 - p) ** (k_upper - a)
        for b in range(k_lower + 1):
            pb = math.comb(k_lower, b) * p**b * (1.0 - p) ** (k_lower - b)
            atoms.append((a, b))
            probs.append(pa * pb)
    # degenerate p keeps zero-probability atoms out of the support
    keep = [(z, q) for z, q in zip(atoms, probs) if q > 0.0]
    return OffspringLaw.from_pairs(keep)


@dataclass(frozen=True)
class CarpetModel:
    """Retention probability and the induced 2-type, 3-letter model."""

    p: float
    model: ModelSpec

    def __post_init__(self):
        for letter, base in zip(self.model.letters, COLUMN_MATRICES):
            if np.max(np.abs(letter.expectation - self.p * base)) > _MATRIX_TOL:
                raise InvariantError(
                    f"carpet letter {letter.name!r} expectation differs from p * base matrix"
                )


def build_carpet_model(p):
    """Carpet projection model at retention probability ``p`` in (0, 1].

    At p = 1 every law degenerates to the point mass at its maximal counts
    and the expectation matrices equal the base column matrices.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("retention probability must lie in (0, 1]")
    letters = []
    for column in range(3):
        laws = []
        for parent in (UPPER, LOWER):
            k_u = sum(
                1 for _, child, col in CHILD_SQUARES[parent] if col == column and child == UPPER
            )
            k_l = sum(
                1 for _, child, col in CHILD_SQUARES[parent] if col == column and child == LOWER
            )
            laws.append(_binomial_law(k_u, k_l, p))
        letters.append(EnvironmentLetter(f"col{column}", tuple(laws)))
    return CarpetModel(p, ModelSpec(2, tuple(letters), _UNIFORM3))


def lambda_b(steps_per_batch, batches, seed, workers=1):
    """Monte Carlo estimate of the growth exponent of the p = 1 matrices."""
    return estimate_exponent(
        COLUMN_MATRICES,
        _UNIFORM3,
        kind="sum",
        steps_per_batch=steps_per_batch,
        batches=batches,
        seed=seed,
        workers=workers,
    )


def critical_p(estimate):
    """Interval for the critical retention probability from a lambda_B estimate.

    log p + lambda_B crosses zero at p = e^(-lambda_B) exactly, so the
    confidence interval for lambda_B maps onto one for p.
    """
    if estimate.point <= 0:
        raise ValueError("lambda_B estimate must be positive")
    return (
        math.exp(-(estimate.point + estimate.half_width)),
        math.exp(-(estimate.point - estimate.half_width)),
    )


@dataclass(frozen=True)
class SquareSet:
    """Retained squares (i, j) of a depth-n carpet approximation."""

    depth: int
    squares: np.ndarray

    def __post_init__(self):
        sq = np.asarray(self.squares, dtype=np.int64).reshape(-1, 2)
        sq.setflags(write=False)
        object.__setattr__(self, "squares", sq)
        if self.depth < 0:
            raise InvariantError("depth must be non-negative")
        if sq.size:
            if sq.min() < 0 or sq.max() >= 3**self.depth:
                raise InvariantError("square indices out of range for the depth")
            x, y = sq[:, 0].copy(), sq[:, 1].copy()
            for _ in range(self.depth):
                if np.any((x % 3 == 1) & (y % 3 == 1)):
                    raise InvariantError("a square has the middle-cell digit pair (1, 1)")
                x //= 3
                y //= 3

    def __len__(self):
        return self.squares.shape[0]


_CHILD_OFFSETS = np.array(
    [(di, dj) for di in range(3) for dj in range(3) if (di, dj) != (1, 1)],
    dtype=np.int64,
)


def sample_carpet(p, depth, rng, max_squares=MAX_SQUARES):
    """Sample retained squares of a depth-n random carpet, branch-only.

    Expands only surviving squares level by level, each of the 8 non-middle
    children kept independently with probability ``p``. The expected square
    count (8p)^depth must stay under ``max_squares``, and the budget is also
    enforced per level before any allocation.
    """
    if not 0.0 < p <= 1.0:
        raise ValueError("retention probability must lie in (0, 1]")
    if depth < 1:
        raise ValueError("depth must be >= 1")
    if (8.0 * p) ** depth > max_squares:
        raise BudgetError(
            f"expected square count (8p)^depth = {(8.0 * p) ** depth:.3g} "
            f"exceeds the budget of {max_squares}"
        )
    cur = np.zeros((1, 2), dtype=np.int64)
    for _ in range(depth):
        if cur.shape[0] * 8 > max_squares:
            raise BudgetError(
                f"level population {cur.shape[0]} * 8 exceeds the budget of {max_squares}"
            )
        children = (3 * cur[:, None, :] + _CHILD_OFFSETS[None, :, :]).reshape(-1, 2)
        keep = rng.random(children.shape[0]) < p
        cur = children[keep]
        if cur.shape[0] == 0:
            break
    return SquareSet(depth, cur)


def projection_intervals(square_set):
    """Disjoint sorted intervals covered by the diagonal projection.

    A square (i, j) at depth n projects onto [(i-j-1)/3^n, (i-j+1)/3^n] on
    the x - y axis; overlapping contributions are merged by an endpoint
    sweep.
    """
    n = square_set.depth
    if len(square_set) == 0:
        return np.empty((0, 2))
    d = np.unique(square_set.squares[:, 0] - square_set.squares[:, 1])
    scale = 3.0**n
    lo = (d - 1) / scale
    hi = (d + 1) / scale
    run_hi = np.maximum.accumulate(hi)
    starts = np.ones(len(d), dtype=bool)
    starts[1:] = lo[1:] > run_hi[:-1]
    seg_lo = lo[starts]
    idx = np.flatnonzero(starts)
    seg_hi = run_hi[np.r_[idx[1:] - 1, len(d) - 1]]
    return np.column_stack([seg_lo, seg_hi])


def projection_measure(square_set):
    """Lebesgue measure of the diagonal projection of the square set."""
    segs = projection_intervals(square_set)
    return float((segs[:, 1] - segs[:, 0]).sum()) if segs.size else 0.0


@dataclass(frozen=True)
class OffspringStats:
    """Empirical offspring statistics from the raw geometric construction."""

    mean: np.ndarray
    pmf: dict
    samples: int


def empirical_offspring_stats(p, column, parent_type, samples, rng):
    """Sample one subdivision level geometrically and count column children.

    Retains each contributing square independently with probability ``p``
    and counts the surviving sub-triangles of the given parent falling in
    the given column, by child type. The resulting joint pmf must agree
    with the law ``build_carpet_model`` assigns to the same slot.
    """
    if column not in (0, 1, 2):
        raise ValueError("column must be 0, 1, or 2")
    if parent_type not in (UPPER, LOWER):
        raise ValueError("parent_type must be 0 (upper) or 1 (lower)")
    rows = [(sq, child) for sq, child, col in CHILD_SQUARES[parent_type] if col == column]
    kept = rng.random((samples, len(rows))) < p
    upper_cols = [k for k, (_, child) in enumerate(rows) if child == UPPER]
    lower_cols = [k for k, (_, child) in enumerate(rows) if child == LOWER]
    n_upper = kept[:, upper_cols].sum(axis=1)
    n_lower = kept[:, lower_cols].sum(axis=1)
    mean = np.array([n_upper.mean(), n_lower.mean()])
    pairs, counts = np.unique(np.column_stack([n_upper, n_lower]), axis=0, return_counts=True)
    pmf = {(int(a), int(b)): c / samples for (a, b), c in zip(pairs, counts)}
    return OffspringStats(mean, pmf, samples)


def square_set_to_text(square_set):
    """Export as text: a 'depth n' header, then one 'n i j' line per square."""
    lines = [f"depth {square_set.depth}"]
    order = np.lexsort((square_set.squares[:, 1], square_set.squares[:, 0]))
    for i, j in square_set.squares[order]:
        lines.append(f"{square_set.depth} {i} {j}")
    return "\n".join(lines) + "\n"


def intervals_to_csv(square_set):
    """Merged projection intervals as 'lo,hi' CSV lines."""
    segs = projection_intervals(square_set)
    return "".join(f"{float(lo)!r},{float(hi)!r}\n" for lo, hi in segs)
