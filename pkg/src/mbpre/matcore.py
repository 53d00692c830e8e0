"""Non-negative allowable matrices: reductions, products, positivity patterns.

A square non-negative matrix is *allowable* when every row and every column
holds a strictly positive entry. Positivity patterns of non-negative
matrices multiply without cancellation, so reachability questions about
products reduce to a finite boolean semigroup explored here by
breadth-first search.
"""

from __future__ import annotations

from collections import deque

import numpy as np

from .errors import BudgetError

MAX_PATTERN_STATES = 10**6


def norm_sum(b):
    """Sum of all entries."""
    return float(np.asarray(b, dtype=float).sum())


def norm_col_max(b):
    """Largest column sum."""
    return float(np.asarray(b, dtype=float).sum(axis=0).max())


def col_min(b):
    """Smallest column sum."""
    return float(np.asarray(b, dtype=float).sum(axis=0).min())


def row_min(b):
    """Smallest row sum."""
    return float(np.asarray(b, dtype=float).sum(axis=1).min())


def is_allowable(b):
    """True iff every row and every column has a positive entry."""
    b = np.asarray(b, dtype=float)
    return bool((b.sum(axis=1) > 0).all() and (b.sum(axis=0) > 0).all())


def product_along_word(matrices, word):
    """Left-to-right product of ``matrices[word[0]] @ matrices[word[1]] ...``.

    The empty word gives the identity.
    """
    mats = [np.asarray(m, dtype=float) for m in matrices]
    n = mats[0].shape[0]
    out = np.eye(n)
    for idx in word:
        if not 0 <= idx < len(mats):
            raise IndexError(f"letter index {idx} out of range for {len(mats)} matrices")
        out = out @ mats[idx]
    return out


def positivity_pattern(b):
    """Boolean mask of strictly positive entries."""
    return np.asarray(b, dtype=float) > 0


def boolean_product(p, q):
    """Pattern of the product of two matrices with these patterns."""
    return (p.astype(np.uint8) @ q.astype(np.uint8)) > 0


def find_positive_product_word(patterns, max_states=None):
    """Shortest word whose letter-pattern product is all-positive, or None.

    Breadth-first search over the boolean semigroup generated by the given
    patterns under right multiplication; among shortest witnesses the
    lexicographically smallest word is returned. Exceeding ``max_states``
    explored patterns raises :class:`BudgetError`, which is distinct from
    the search closing without a witness (None).
    """
    pats = [np.asarray(p, dtype=bool) for p in patterns]
    n = pats[0].shape[0]
    if any(p.shape != (n, n) for p in pats):
        raise ValueError("patterns must share one square shape")
    if max_states is None:
        max_states = min(2 ** (n * n), MAX_PATTERN_STATES)
    if max_states < 1:
        raise ValueError("max_states must be >= 1")

    seen = set()
    queue = deque()

    def visit(pattern, word):
        key = pattern.tobytes()
        if key in seen:
            return None
        seen.add(key)
        if len(seen) > max_states:
            raise BudgetError(
                f"positive-product search exceeded {max_states} explored patterns"
            )
        if pattern.all():
            return word
        queue.append((pattern, word))
        return None

    for i, p in enumerate(pats):
        hit = visit(p, [i])
        if hit is not None:
            return hit
    while queue:
        pattern, word = queue.popleft()
        for i, p in enumerate(pats):
            hit = visit(boolean_product(pattern, p), word + [i])
            if hit is not None:
                return hit
    return None
