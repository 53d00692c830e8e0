"""Growth exponents of random products of non-negative matrices.

The exponent along a word is (1/n) log of a scalar reduction of the matrix
product: the entry sum ("sum"), the minimum column sum ("colmin"), or the
minimum row sum ("rowmin"). For a good family all three share one almost
sure limit, estimated here by Monte Carlo with batch-means confidence
intervals. Products are accumulated in log space: the running product is
divided by its entry sum at renormalization points and the logs of the
divisors are summed, so words up to 1e7 steps neither overflow nor
underflow.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from ._parallel import parallel_map
from .errors import DegenerateProductError
from .model import ModelSpec

KINDS = ("sum", "colmin", "rowmin")

# 95% normal quantile for the batch-means interval; batches are i.i.d. by
# construction, the normal approximation is a documented heuristic.
_Z95 = 1.96


@dataclass(frozen=True)
class LyapunovEstimate:
    """Point estimate of an exponent in nats per step, with a 95% CI half-width."""

    kind: str
    point: float
    half_width: float
    steps_per_batch: int
    batches: int

    def __post_init__(self):
        if self.half_width < 0:
            raise ValueError("half_width must be >= 0")

    def to_dict(self):
        return {
            "kind": self.kind,
            "point": self.point,
            "half_width": self.half_width,
            "steps_per_batch": self.steps_per_batch,
            "batches": self.batches,
        }


def _check_kind(kind):
    if kind not in KINDS:
        raise ValueError(f"kind must be one of {KINDS}, got {kind!r}")


def _reduce(p, kind):
    if kind == "sum":
        return float(p.sum())
    if kind == "colmin":
        return float(p.sum(axis=0).min())
    return float(p.sum(axis=1).min())


def _exponent_2x2(mats, word, kind, renorm_every):
    # Scalar inner loop: for 2x2 products the numpy call overhead dominates,
    # and exponent estimation multiplies matrices millions of times.
    flat = [(float(m[0, 0]), float(m[0, 1]), float(m[1, 0]), float(m[1, 1])) for m in mats]
    a, b, c, d = 1.0, 0.0, 0.0, 1.0
    acc = 0.0
    pending = 0
    step = 0
    log = math.log
    for idx in word:
        m0, m1, m2, m3 = flat[idx]
        a, b = a * m0 + b * m2, a * m1 + b * m3
        c, d = c * m0 + d * m2, c * m1 + d * m3
        step += 1
        pending += 1
        if pending == renorm_every:
            s = a + b + c + d
            if s <= 0.0:
                raise DegenerateProductError(step, "sum")
            if kind == "colmin" and min(a + c, b + d) <= 0.0:
                raise DegenerateProductError(step, kind)
            if kind == "rowmin" and min(a + b, c + d) <= 0.0:
                raise DegenerateProductError(step, kind)
            a /= s
            b /= s
            c /= s
            d /= s
            acc += log(s)
            pending = 0
    if kind == "sum":
        r = a + b + c + d
    elif kind == "colmin":
        r = min(a + c, b + d)
    else:
        r = min(a + b, c + d)
    if r <= 0.0:
        raise DegenerateProductError(step, kind)
    return (acc + log(r)) / step


def _exponent_general(mats, word, kind, renorm_every):
    p = np.eye(mats[0].shape[0])
    acc = 0.0
    pending = 0
    step = 0
    for idx in word:
        p = p @ mats[idx]
        step += 1
        pending += 1
        if pending == renorm_every:
            s = p.sum()
            if s <= 0.0:
                raise DegenerateProductError(step, "sum")
            if kind != "sum" and _reduce(p, kind) <= 0.0:
                raise DegenerateProductError(step, kind)
            p /= s
            acc += math.log(s)
            pending = 0
    r = _reduce(p, kind)
    if r <= 0.0:
        raise DegenerateProductError(step, kind)
    return (acc + math.log(r)) / step


def exponent_along_word(matrices, word, kind="sum", renorm_every=1):
    """(1/n) log reduction of the matrix product along a non-empty word.

    ``renorm_every`` controls how often the running product is rescaled; any
    value gives the same answer up to rounding, provided intermediate
    products stay within floating-point range (entry sums of the letter
    matrices bounded by B allow roughly 700/log10(B) steps between rescales).
    A reduction hitting exactly zero, which a word of allowable matrices
    cannot produce, raises :class:`DegenerateProductError` naming the step.
    """
    _check_kind(kind)
    if len(word) == 0:
        raise ValueError("word must be non-empty")
    if renorm_every < 1:
        raise ValueError("renorm_every must be >= 1")
    mats = [np.asarray(m, dtype=float) for m in matrices]
    n = mats[0].shape[0]
    if any(m.shape != (n, n) for m in mats):
        raise ValueError("matrices must share one square shape")
    word = word.tolist() if isinstance(word, np.ndarray) else list(word)
    if n == 2:
        return _exponent_2x2(mats, word, kind, renorm_every)
    return _exponent_general(mats, word, kind, renorm_every)


def _batch_value(matrices, environment, steps, kind, child_seed):
    rng = np.random.default_rng(child_seed)
    word = environment.sample_word(steps, rng)
    return exponent_along_word(matrices, word, kind)


def estimate_exponent(
    matrices_or_model,
    environment=None,
    *,
    kind="sum",
    steps_per_batch,
    batches,
    seed,
    workers=1,
):
    """Batch-means Monte Carlo estimate of the exponent.

    Accepts either a :class:`ModelSpec` (expectation matrices and its own
    environment) or an explicit matrix family plus an environment
    distribution. Batch ``b`` samples an independent environment word of
    ``steps_per_batch`` letters from a child generator derived from
    ``(seed, b)``, so results are reproducible bit-for-bit regardless of
    ``workers``.
    """
    _check_kind(kind)
    if steps_per_batch < 100:
        raise ValueError("steps_per_batch must be >= 100")
    if batches < 2:
        raise ValueError("batches must be >= 2")
    if isinstance(matrices_or_model, ModelSpec):
        model = matrices_or_model
        matrices = model.expectation_matrices()
        if environment is None:
            environment = model.environment
    else:
        matrices = [np.asarray(m, dtype=float) for m in matrices_or_model]
        if environment is None:
            raise ValueError("an environment distribution is required with raw matrices")

    children = np.random.SeedSequence(seed).spawn(batches)
    task = partial(_batch_value, matrices, environment, steps_per_batch, kind)
    values = parallel_map(task, children, workers)
    values = np.array(values, dtype=float)
    point = float(values.mean())
    half_width = float(_Z95 * values.std(ddof=1) / math.sqrt(batches))
    return LyapunovEstimate(kind, point, half_width, steps_per_batch, batches)
