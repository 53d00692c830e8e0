"""Hypothesis checks and survival/extinction verdicts.

The trichotomy — positive exponent means survival with positive
probability, negative means almost sure extinction, zero means extinction
for strongly regular models — only applies when the expectation matrices
are allowable and some positive-probability word multiplies to a strictly
positive matrix. ``check_conditions`` verifies those hypotheses;
``classify`` turns a Monte Carlo exponent estimate into a verdict using
interval logic on the confidence interval rather than the bare point
estimate.
"""

from __future__ import annotations

from collections import deque
from dataclasses import dataclass

import numpy as np

from .errors import BudgetError, NotAllowableError
from .matcore import (
    MAX_PATTERN_STATES,
    boolean_product,
    positivity_pattern,
    product_along_word,
)
from .model import cylinder_probability, second_moment_bound, uniform_allowability_alpha


@dataclass(frozen=True)
class ConditionReport:
    """Outcome of the hypothesis checks on a model."""

    ergodic_env_ok: bool
    allowable_ok: bool
    allowability_offenders: tuple
    positive_word: tuple | None
    positive_word_probability: float | None
    second_moment_bound: float
    uniform_alpha: float | None
    strongly_regular: bool
    strong_regularity_witness: str | None

    def to_dict(self):
        return {
            "ergodic_env_ok": self.ergodic_env_ok,
            "allowable_ok": self.allowable_ok,
            "allowability_offenders": [dict(o) for o in self.allowability_offenders],
            "positive_word": list(self.positive_word) if self.positive_word is not None else None,
            "positive_word_probability": self.positive_word_probability,
            "second_moment_bound": self.second_moment_bound,
            "uniform_alpha": self.uniform_alpha,
            "strongly_regular": self.strongly_regular,
            "strong_regularity_witness": self.strong_regularity_witness,
        }


@dataclass(frozen=True)
class Verdict:
    """Survival classification with the estimate and the rule that applied."""

    kind: str
    lambda_estimate: object
    rationale: str

    def to_dict(self):
        return {
            "kind": self.kind,
            "lambda_estimate": self.lambda_estimate.to_dict(),
            "rationale": self.rationale,
        }


def _positive_cylinder_word(model, max_word_len, max_states):
    """Shortest positive-probability word with strictly positive pattern product.

    Breadth-first search over (pattern, last letter) states restricted to
    steps of positive probability, so the witness automatically has a
    positive cylinder. Returns None when the reachable set closes without a
    witness; raises :class:`BudgetError` past ``max_states``.
    """
    env = model.environment
    mass = env.letter_mass
    pats = [positivity_pattern(m) for m in model.expectation_matrices()]
    L = len(pats)
    if max_states is None:
        max_states = min(2 ** (model.n_types**2) * L, MAX_PATTERN_STATES)

    def step_ok(last, nxt):
        if env.kind == "iid":
            return mass[nxt] > 0
        return env.transition[last, nxt] > 0

    seen = set()
    queue = deque()

    def visit(pattern, word):
        key = (pattern.tobytes(), word[-1])
        if key in seen:
            return None
        seen.add(key)
        if len(seen) > max_states:
            raise BudgetError(
                f"positive-word search exceeded {max_states} explored states"
            )
        if pattern.all():
            return word
        if max_word_len is None or len(word) < max_word_len:
            queue.append((pattern, word))
        return None

    for i in range(L):
        if mass[i] > 0:
            hit = visit(pats[i], [i])
            if hit is not None:
                return hit
    while queue:
        pattern, word = queue.popleft()
        for i in range(L):
            if step_ok(word[-1], i):
                hit = visit(boolean_product(pattern, pats[i]), word + [i])
                if hit is not None:
                    return hit
    return None


def _markov_irreducible(transition):
    pat = transition > 0
    n = pat.shape[0]
    reach = np.eye(n, dtype=bool)
    for _ in range(n):
        reach = boolean_product(reach, reach | pat)
    return bool(reach.all())


def check_conditions(model, max_word_len=None, max_states=None):
    """Verify every hypothesis of the survival trichotomy on a model.

    Findings are reported, never thrown: a failed condition shows up as a
    false flag plus the offending letters.
    """
    offenders = []
    for letter in model.letters:
        m = letter.expectation
        for i, ok in enumerate(m.sum(axis=1) > 0):
            if not ok:
                offenders.append({"letter": letter.name, "axis": "row", "index": i})
        for j, ok in enumerate(m.sum(axis=0) > 0):
            if not ok:
                offenders.append({"letter": letter.name, "axis": "column", "index": j})
    allowable_ok = not offenders

    word = None
    word_prob = None
    if allowable_ok:
        found = _positive_cylinder_word(model, max_word_len, max_states)
        if found is not None:
            prod = product_along_word(model.expectation_matrices(), found)
            prob = cylinder_probability(model, found)
            if prod.min() > 0 and prob > 0:
                word = tuple(found)
                word_prob = prob

    try:
        alpha = uniform_allowability_alpha(model)
    except NotAllowableError:
        alpha = None

    witness = None
    for i, letter in enumerate(model.letters):
        if model.environment.letter_mass[i] <= 0:
            continue
        if all(law.low_offspring_mass() < 1.0 for law in letter.laws):
            witness = letter.name
            break

    env = model.environment
    ergodic = True if env.kind == "iid" else _markov_irreducible(env.transition)

    return ConditionReport(
        ergodic_env_ok=ergodic,
        allowable_ok=allowable_ok,
        allowability_offenders=tuple(offenders),
        positive_word=word,
        positive_word_probability=word_prob,
        second_moment_bound=second_moment_bound(model),
        uniform_alpha=alpha,
        strongly_regular=witness is not None,
        strong_regularity_witness=witness,
    )


def classify(model, report, estimate):
    """Map a condition report and an exponent estimate to a verdict.

    The confidence interval decides: entirely positive means survival with
    positive probability, entirely negative means almost sure extinction.
    An interval straddling zero cannot certify the exact-zero case, so a
    strongly regular model gets the caveated "critical_extinction" verdict
    and anything else is inconclusive.
    """
    if not report.allowable_ok or report.positive_word is None:
        missing = []
        if not report.allowable_ok:
            missing.append("some expectation matrix is not allowable")
        if report.positive_word is None:
            missing.append("no positive-probability word with strictly positive product")
        return Verdict("inconclusive", estimate, "hypotheses unmet: " + "; ".join(missing))
    lo = estimate.point - estimate.half_width
    hi = estimate.point + estimate.half_width
    if lo > 0:
        return Verdict(
            "survives_positively",
            estimate,
            "exponent confidence interval entirely positive: the population "
            "survives with positive probability in almost every environment",
        )
    if hi < 0:
        return Verdict(
            "almost_sure_extinction",
            estimate,
            "exponent confidence interval entirely negative: the population "
            "dies out almost surely in almost every environment",
        )
    if report.strongly_regular:
        return Verdict(
            "critical_extinction",
            estimate,
            "exponent confidence interval straddles zero: extinction is almost "
            "sure if the exponent is exactly zero (the model is strongly "
            "regular), but the sign is unresolved at this precision",
        )
    return Verdict(
        "inconclusive",
        estimate,
        "exponent confidence interval straddles zero and strong regularity "
        "is unavailable",
    )
