"""Extinction vectors, population simulation, and survival estimation.

The probability that the population seeded by one type-k individual is gone
after n generations is the k-th component of the n-fold backward pgf
composition evaluated at 0; its limit in n is the extinction vector of the
environment realization. Direct simulation of the generation process gives
an independent estimator of the same quantities.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import partial

import numpy as np

from ._parallel import parallel_map
from .errors import NoSurvivorsError

_Z95 = 1.96
# First depth probed by the doubling convergence loop.
_DEPTH0 = 64


@dataclass(frozen=True)
class ExtinctionVector:
    """Per-starting-type extinction probabilities at a composition depth."""

    q: np.ndarray
    depth: int
    converged: bool = True

    def __post_init__(self):
        q = np.asarray(self.q, dtype=float)
        q.setflags(write=False)
        object.__setattr__(self, "q", q)
        if np.any(q < 0) or np.any(q > 1):
            raise ValueError("extinction probabilities must lie in [0, 1]")


@dataclass(frozen=True)
class SimulationResult:
    """Trajectory of population count vectors and how the run ended.

    ``outcome`` is "extinct", "alive", or "cap_exceeded"; ``generation`` is
    the generation at which the run stopped (the horizon when alive). The
    trajectory starts with the initial population, one entry per simulated
    generation after that, frozen at the cap-crossing state when capped.
    """

    states: list
    outcome: str
    generation: int

    @property
    def final(self):
        return self.states[-1]


def extinction_fixed_env(model, word):
    """Backward pgf composition at 0 along a fixed environment word."""
    word = np.asarray(word, dtype=np.intp)
    if word.size == 0:
        raise ValueError("word must be non-empty")
    s = np.zeros(model.n_types)
    for idx in word[::-1]:
        s = model.letters[idx].pgf_vector(s)
    return ExtinctionVector(s, int(word.size))


def _extend_word(env, word, n, rng):
    """Grow an environment word to length ``n``, continuing the letter process."""
    have = len(word)
    if have >= n:
        return word
    if env.kind == "iid":
        ext = rng.choice(env.n_letters, size=n - have, p=env.probs)
    else:
        ext = np.empty(n - have, dtype=np.int64)
        cdfs = np.cumsum(env.transition, axis=1)
        pos = 0
        if have == 0:
            state = int(np.searchsorted(np.cumsum(env.initial), rng.random(), side="right"))
            state = min(state, env.n_letters - 1)
            ext[0] = state
            pos = 1
        else:
            state = int(word[-1])
        u = rng.random(len(ext) - pos)
        for j in range(pos, len(ext)):
            state = min(
                int(np.searchsorted(cdfs[state], u[j - pos], side="right")),
                env.n_letters - 1,
            )
            ext[j] = state
    return np.concatenate([np.asarray(word, dtype=np.int64), ext])


def _converged_with_rng(model, rng, tol, max_depth):
    word = np.empty(0, dtype=np.int64)
    prev = None
    depth = _DEPTH0
    while True:
        depth = min(depth, max_depth)
        word = _extend_word(model.environment, word, depth, rng)
        cur = extinction_fixed_env(model, word[:depth]).q
        if np.all(cur == 1.0):
            # 1 is absorbing for pgf compositions: deeper words cannot move it.
            return ExtinctionVector(cur, depth, True)
        if prev is not None and np.max(np.abs(cur - prev)) < tol:
            return ExtinctionVector(cur, depth, True)
        if depth >= max_depth:
            return ExtinctionVector(cur, depth, False)
        prev = cur
        depth *= 2


def extinction_converged(model, seed, tol=1e-9, max_depth=1 << 16):
    """Extinction vector of one sampled environment, by depth doubling.

    Evaluates the backward composition at depths 64, 128, 256, ... until two
    consecutive evaluations agree within ``tol`` in sup norm. Hitting
    ``max_depth`` first returns the last vector with ``converged=False``
    rather than raising: near-critical models legitimately converge slowly.
    """
    if tol <= 0:
        raise ValueError("tol must be positive")
    if max_depth < 2:
        raise ValueError("max_depth must be >= 2")
    return _converged_with_rng(model, np.random.default_rng(seed), tol, max_depth)


def _annealed_task(model, tol, max_depth, child_seed):
    res = _converged_with_rng(model, np.random.default_rng(child_seed), tol, max_depth)
    return res.q, res.converged


def annealed_extinction(model, n_envs, tol=1e-9, max_depth=1 << 16, seed=0, workers=1):
    """Mean extinction vector over independent environment realizations.

    Returns ``(mean_q, share_converged)`` where the share counts
    realizations whose depth-doubling loop met ``tol``.
    """
    if n_envs < 1:
        raise ValueError("n_envs must be >= 1")
    children = np.random.SeedSequence(seed).spawn(n_envs)
    task = partial(_annealed_task, model, tol, max_depth)
    results = parallel_map(task, children, workers)
    qs = np.array([q for q, _ in results])
    share = sum(1.0 for _, ok in results if ok) / n_envs
    return qs.mean(axis=0), share


def simulate_generations(model, word, z0, horizon=None, cap=10**6, rng=None):
    """Simulate the population generation by generation along ``word``.

    Generation n sums, over parent types i, the offspring of the
    Z_{n-1}^(i) type-i parents drawn i.i.d. from the type-i law of letter
    ``word[n-1]``. Stops at extinction, at the horizon, or once the total
    population exceeds ``cap`` (the crossing state and generation are kept).
    """
    if rng is None:
        raise ValueError("an explicit random generator is required")
    z = np.asarray(z0, dtype=np.int64).copy()
    if z.sum() < 1:
        raise ValueError("initial population must be non-empty")
    if cap < 1:
        raise ValueError("cap must be >= 1")
    word = np.asarray(word, dtype=np.intp)
    if horizon is None:
        horizon = len(word)
    if horizon < 1 or horizon > len(word):
        raise ValueError("horizon must be in [1, len(word)]")
    states = [z.copy()]
    for gen in range(1, horizon + 1):
        letter = model.letters[word[gen - 1]]
        nxt = np.zeros(model.n_types, dtype=np.int64)
        for i in range(model.n_types):
            if z[i] > 0:
                nxt += letter.laws[i].sample_sum(int(z[i]), rng)
        z = nxt
        states.append(z.copy())
        total = int(z.sum())
        if total == 0:
            return SimulationResult(states, "extinct", gen)
        if total > cap:
            return SimulationResult(states, "cap_exceeded", gen)
    return SimulationResult(states, "alive", horizon)


def _run_trial(model, start_type, horizon, cap, child_seed):
    rng = np.random.default_rng(child_seed)
    word = model.environment.sample_word(horizon, rng)
    z0 = np.zeros(model.n_types, dtype=np.int64)
    z0[start_type] = 1
    res = simulate_generations(model, word, z0, horizon=horizon, cap=cap, rng=rng)
    return res.outcome, res.generation, int(res.final.sum())


def _wilson_half_width(successes, n):
    z = _Z95
    phat = successes / n
    denom = 1.0 + z * z / n
    return z * math.sqrt(phat * (1.0 - phat) / n + z * z / (4.0 * n * n)) / denom


def survival_probability_mc(model, start_type, trials, horizon, cap=10**6, seed=0, workers=1):
    """Fraction of trials alive (or capped) at the horizon, with Wilson half-width.

    Each trial runs in a fresh environment realization; exceeding the cap
    counts as survival, which for supercritical populations misclassifies
    with probability vanishing in the cap.
    """
    if trials < 1:
        raise ValueError("trials must be >= 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    task = partial(_run_trial, model, start_type, horizon, cap)
    outcomes = parallel_map(task, children, workers)
    survived = sum(1 for outcome, _, _ in outcomes if outcome != "extinct")
    return survived / trials, _wilson_half_width(survived, trials)


def growth_rate_conditioned(model, start_type, trials, horizon, cap=10**6, seed=0, workers=1):
    """Mean of (1/n*) log population size over trials alive at the horizon.

    ``n*`` is the last simulated generation: the horizon, or the
    cap-crossing generation for capped trials (treated as alive). Returns
    ``(estimate, half_width, surviving_trials)``; raises
    :class:`NoSurvivorsError` when nothing survives.
    """
    if horizon < 20:
        raise ValueError("horizon must be >= 20")
    if trials < 1:
        raise ValueError("trials must be >= 1")
    children = np.random.SeedSequence(seed).spawn(trials)
    task = partial(_run_trial, model, start_type, horizon, cap)
    outcomes = parallel_map(task, children, workers)
    rates = [
        math.log(total) / gen
        for outcome, gen, total in outcomes
        if outcome != "extinct"
    ]
    if not rates:
        raise NoSurvivorsError(f"no trial of {trials} survived to generation {horizon}")
    rates = np.array(rates)
    est = float(rates.mean())
    hw = float(_Z95 * rates.std(ddof=1) / math.sqrt(len(rates))) if len(rates) > 1 else 0.0
    return est, hw, len(rates)
