"""Offspring laws, environment letters, and the model-file codec.

A model couples, for each letter of a finite environment alphabet, one
finite-support offspring distribution per parent type, together with a
distribution over infinite letter sequences: i.i.d. draws or a stationary
finite Markov chain. Offspring distributions are identified with their
probability generating functions (pgfs), and the expectation matrix of a
letter collects the mean offspring counts by (parent type, child type).

All objects are immutable after construction and safe to share between
workers; sampling takes an explicit ``numpy.random.Generator``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass
from functools import cached_property

import numpy as np

from .errors import InvariantError, ModelFormatError, NotAllowableError

# Probability mass must balance to this absolute tolerance; masses are never
# renormalized silently.
MASS_TOL = 1e-12
# A Markov environment must come with an initial vector this close to
# stationary (the shift must be measure preserving).
STATIONARY_TOL = 1e-9

# pgf arguments may drift past [0, 1] by accumulated rounding when pgf
# outputs are fed back in; anything worse is a caller bug.
_S_RANGE_TOL = 1e-9


def _readonly(a):
    a.setflags(write=False)
    return a


def _check_svalue(s, n_types):
    """Validate and clip a pgf argument to [0, 1]^N (scalar batch ok)."""
    s = np.asarray(s, dtype=float)
    if s.ndim == 0 or s.shape[-1] != n_types:
        raise ValueError(
            f"pgf argument has dimension {s.shape[-1] if s.ndim else 0}, "
            f"expected {n_types}"
        )
    if np.any(s < -_S_RANGE_TOL) or np.any(s > 1.0 + _S_RANGE_TOL):
        raise ValueError("pgf argument outside [0, 1]")
    return np.clip(s, 0.0, 1.0)


@dataclass(frozen=True)
class OffspringLaw:
    """Finite-support distribution over offspring count vectors.

    ``counts`` is a (K, N) array of non-negative integers and ``probs`` the
    matching (K,) probability vector. Support atoms must be pairwise
    distinct and the masses must sum to 1 within ``MASS_TOL``.
    """

    counts: np.ndarray
    probs: np.ndarray

    def __post_init__(self):
        counts = np.atleast_2d(np.asarray(self.counts, dtype=np.int64))
        probs = np.asarray(self.probs, dtype=float).ravel()
        object.__setattr__(self, "counts", _readonly(counts))
        object.__setattr__(self, "probs", _readonly(probs))
        if counts.ndim != 2 or counts.shape[0] == 0:
            raise InvariantError("offspring support must be a non-empty list of count vectors")
        if counts.shape[0] != probs.shape[0]:
            raise InvariantError("offspring support and probability lengths differ")
        if np.any(counts < 0):
            raise InvariantError("offspring counts must be non-negative")
        if np.any(probs < 0):
            raise InvariantError("offspring probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > MASS_TOL:
            raise InvariantError(
                f"offspring probabilities sum to {probs.sum()!r}, not 1 within {MASS_TOL}"
            )
        if len({tuple(z) for z in counts}) != counts.shape[0]:
            raise InvariantError("offspring support atoms must be pairwise distinct")

    @classmethod
    def from_pairs(cls, pairs):
        """Build from ``[(count_vector, probability), ...]``."""
        counts = [list(z) for z, _ in pairs]
        probs = [p for _, p in pairs]
        return cls(np.array(counts, dtype=np.int64), np.array(probs, dtype=float))

    @property
    def n_types(self):
        return self.counts.shape[1]

    @cached_property
    def mean(self):
        """Expected offspring count per child type, shape (N,)."""
        return _readonly(self.probs @ self.counts)

    @cached_property
    def _cdf(self):
        return _readonly(np.cumsum(self.probs))

    def pgf(self, s):
        """Evaluate the pgf at ``s`` (with 0^0 = 1); batched over leading axes."""
        s = _check_svalue(s, self.n_types)
        # (..., 1, N) ** (K, N) -> (..., K, N); product over types, mass-weighted sum
        value = np.prod(s[..., None, :] ** self.counts, axis=-1) @ self.probs
        # masses balance only to MASS_TOL, so shave float dust off [0, 1]
        return np.clip(value, 0.0, 1.0)

    def factorial_second_moments(self):
        """Matrix of E[z_i z_j] - delta_ij E[z_i], the pgf Hessian at 1."""
        z = self.counts.astype(float)
        m = np.einsum("k,ki,kj->ij", self.probs, z, z)
        return m - np.diag(self.mean)

    def mass_producing(self, i):
        """Total probability of bearing at least one type-``i`` child."""
        return float(self.probs[self.counts[:, i] > 0].sum())

    def low_offspring_mass(self):
        """Probability of bearing at most one child in total."""
        return float(self.probs[self.counts.sum(axis=1) <= 1].sum())

    def sample(self, rng, size=None):
        """Draw one count vector, or ``size`` of them as a (size, N) array."""
        u = rng.random(size)
        idx = np.searchsorted(self._cdf, u, side="right")
        idx = np.minimum(idx, len(self.probs) - 1)
        return self.counts[idx]

    def sample_sum(self, n, rng):
        """Sum of ``n`` independent draws, via multinomial atom counts."""
        if n == 0:
            return np.zeros(self.n_types, dtype=np.int64)
        hits = rng.multinomial(n, self.probs)
        return hits @ self.counts


@dataclass(frozen=True)
class EnvironmentLetter:
    """A named environment letter: one offspring law per parent type."""

    name: str
    laws: tuple

    def __post_init__(self):
        object.__setattr__(self, "laws", tuple(self.laws))
        if not self.laws:
            raise InvariantError(f"letter {self.name!r} has no offspring laws")
        n = self.laws[0].n_types
        if any(law.n_types != n for law in self.laws):
            raise InvariantError(f"letter {self.name!r} mixes count-vector dimensions")

    @property
    def n_types(self):
        return self.laws[0].n_types

    def pgf_vector(self, s):
        """Stack of per-parent-type pgf values; batched over leading axes."""
        return np.stack([law.pgf(s) for law in self.laws], axis=-1)

    @cached_property
    def expectation(self):
        """Expectation matrix M(i, k) = mean number of type-k children of a type-i parent."""
        return _readonly(np.stack([law.mean for law in self.laws]))


@dataclass(frozen=True)
class IidEnvironment:
    """Letters drawn independently with fixed probabilities."""

    probs: np.ndarray
    kind = "iid"

    def __post_init__(self):
        probs = np.asarray(self.probs, dtype=float).ravel()
        object.__setattr__(self, "probs", _readonly(probs))
        if probs.size == 0:
            raise InvariantError("environment needs at least one letter")
        if np.any(probs < 0):
            raise InvariantError("environment probabilities must be non-negative")
        if abs(probs.sum() - 1.0) > MASS_TOL:
            raise InvariantError(
                f"environment.probs sum to {probs.sum()!r}, not 1 within {MASS_TOL}"
            )

    @property
    def n_letters(self):
        return self.probs.size

    @property
    def letter_mass(self):
        """Per-letter stationary probability."""
        return self.probs

    def sample_word(self, n, rng):
        return rng.choice(self.n_letters, size=n, p=self.probs)

    def cylinder_probability(self, word):
        return float(np.prod(self.probs[np.asarray(word, dtype=np.intp)]))


@dataclass(frozen=True)
class MarkovEnvironment:
    """Letters drawn from a stationary finite Markov chain.

    The initial vector must be stationary for the transition matrix (it is
    verified, not computed): the letter process has to be a stationary
    sequence for the growth exponents to exist.
    """

    initial: np.ndarray
    transition: np.ndarray
    kind = "markov"

    def __post_init__(self):
        initial = np.asarray(self.initial, dtype=float).ravel()
        transition = np.asarray(self.transition, dtype=float)
        object.__setattr__(self, "initial", _readonly(initial))
        object.__setattr__(self, "transition", _readonly(transition))
        L = initial.size
        if L == 0:
            raise InvariantError("environment needs at least one letter")
        if transition.shape != (L, L):
            raise InvariantError("transition matrix shape does not match initial vector")
        if np.any(initial < 0) or np.any(transition < 0):
            raise InvariantError("environment probabilities must be non-negative")
        if abs(initial.sum() - 1.0) > MASS_TOL:
            raise InvariantError(
                f"environment.initial sums to {initial.sum()!r}, not 1 within {MASS_TOL}"
            )
        rows = transition.sum(axis=1)
        if np.any(np.abs(rows - 1.0) > MASS_TOL):
            bad = int(np.argmax(np.abs(rows - 1.0)))
            raise InvariantError(
                f"environment.transition row {bad} sums to {rows[bad]!r}, not 1 within {MASS_TOL}"
            )
        drift = np.max(np.abs(initial @ transition - initial))
        if drift > STATIONARY_TOL:
            raise InvariantError(
                f"environment.initial is not stationary for the transition matrix "
                f"(max drift {drift:.3e} > {STATIONARY_TOL})"
            )

    @property
    def n_letters(self):
        return self.initial.size

    @property
    def letter_mass(self):
        return self.initial

    def sample_word(self, n, rng):
        word = np.empty(n, dtype=np.int64)
        cdfs = np.cumsum(self.transition, axis=1)
        state = int(np.searchsorted(np.cumsum(self.initial), rng.random(), side="right"))
        state = min(state, self.n_letters - 1)
        word[0] = state
        u = rng.random(n - 1) if n > 1 else ()
        for k in range(1, n):
            state = min(
                int(np.searchsorted(cdfs[state], u[k - 1], side="right")),
                self.n_letters - 1,
            )
            word[k] = state
        return word

    def cylinder_probability(self, word):
        word = np.asarray(word, dtype=np.intp)
        p = float(self.initial[word[0]])
        for a, b in zip(word[:-1], word[1:]):
            p *= float(self.transition[a, b])
        return p


@dataclass(frozen=True)
class ModelSpec:
    """A complete model: type count, letters, and environment distribution."""

    n_types: int
    letters: tuple
    environment: object

    def __post_init__(self):
        object.__setattr__(self, "letters", tuple(self.letters))
        if self.n_types < 2:
            raise InvariantError("a model needs at least 2 types")
        if not self.letters:
            raise InvariantError("a model needs at least one letter")
        names = [letter.name for letter in self.letters]
        if len(set(names)) != len(names):
            raise InvariantError("letter names must be unique")
        for letter in self.letters:
            if len(letter.laws) != self.n_types:
                raise InvariantError(
                    f"letter {letter.name!r} has {len(letter.laws)} laws, expected {self.n_types}"
                )
            if letter.n_types != self.n_types:
                raise InvariantError(
                    f"letter {letter.name!r} count vectors have wrong dimension"
                )
        if self.environment.n_letters != len(self.letters):
            raise InvariantError(
                f"environment is over {self.environment.n_letters} letters, "
                f"model has {len(self.letters)}"
            )

    @property
    def n_letters(self):
        return len(self.letters)

    def expectation_matrices(self):
        return [letter.expectation for letter in self.letters]


# ---------------------------------------------------------------------------
# Operations


def pgf_eval(law, s):
    """Pgf of an offspring law at ``s`` in [0, 1]^N, with 0^0 = 1."""
    return law.pgf(s)


def expectation_matrix(letter):
    """Expectation matrix of a letter, rows indexed by parent type."""
    return letter.expectation


def second_moment_bound(letter_or_model):
    """Largest second factorial moment E[z_i z_j] - delta_ij E[z_i] in the argument."""
    if isinstance(letter_or_model, ModelSpec):
        return max(second_moment_bound(letter) for letter in letter_or_model.letters)
    return float(
        max(law.factorial_second_moments().max() for law in letter_or_model.laws)
    )


def uniform_allowability_alpha(model):
    """Least mass producing a type-i child over triples with positive mean count.

    Scans every (letter, parent type, child type) with a positive
    expectation-matrix entry and returns the minimum of
    P(at least one type-i child). Every expectation matrix must be
    allowable (a positive entry in each row and column); otherwise a
    :class:`NotAllowableError` names the offender.
    """
    best = np.inf
    for letter in model.letters:
        m = letter.expectation
        row_ok = m.sum(axis=1) > 0
        col_ok = m.sum(axis=0) > 0
        if not row_ok.all():
            raise NotAllowableError(letter.name, "row", int(np.argmin(row_ok)))
        if not col_ok.all():
            raise NotAllowableError(letter.name, "column", int(np.argmin(col_ok)))
        for k, law in enumerate(letter.laws):
            for i in range(model.n_types):
                if m[k, i] > 0:
                    best = min(best, law.mass_producing(i))
    return float(best)


def sample_offspring(law, rng):
    """One draw from an offspring law."""
    return law.sample(rng)


def sample_environment(model, n, rng):
    """A length-``n`` environment word of letter indices."""
    if n < 1:
        raise ValueError("word length must be >= 1")
    return model.environment.sample_word(n, rng)


def cylinder_probability(model, word):
    """Probability that the environment starts with the given finite word."""
    return model.environment.cylinder_probability(word)


# ---------------------------------------------------------------------------
# JSON codec.
#
# Schema (unknown keys rejected, laws indexed [parent_type][support_entry]):
#   {
#     "n_types": 2,
#     "letters": [{"name": ..., "laws": [[{"z": [0, 0], "p": 0.75}, ...], ...]}],
#     "environment": {"kind": "iid", "probs": [...]}
#                  | {"kind": "markov", "initial": [...], "transition": [[...]]}
#   }


def _require_keys(obj, allowed, required, path):
    if not isinstance(obj, dict):
        raise ModelFormatError(path, "expected an object")
    for key in obj:
        if key not in allowed:
            raise ModelFormatError(path, f"unknown key {key!r}")
    for key in required:
        if key not in obj:
            raise ModelFormatError(path, f"missing key {key!r}")


def _parse_law(entries, n_types, path):
    if not isinstance(entries, list) or not entries:
        raise ModelFormatError(path, "expected a non-empty list of support entries")
    counts, probs = [], []
    for j, entry in enumerate(entries):
        here = f"{path}[{j}]"
        _require_keys(entry, {"z", "p"}, {"z", "p"}, here)
        z = entry["z"]
        if (
            not isinstance(z, list)
            or len(z) != n_types
            or not all(isinstance(v, int) and not isinstance(v, bool) for v in z)
        ):
            raise ModelFormatError(f"{here}.z", f"expected a list of {n_types} integers")
        p = entry["p"]
        if not isinstance(p, (int, float)) or isinstance(p, bool):
            raise ModelFormatError(f"{here}.p", "expected a number")
        counts.append(z)
        probs.append(float(p))
    return OffspringLaw(np.array(counts, dtype=np.int64), np.array(probs, dtype=float))


def _parse_environment(obj, path):
    _require_keys(obj, {"kind", "probs", "initial", "transition"}, {"kind"}, path)
    kind = obj["kind"]
    if kind == "iid":
        _require_keys(obj, {"kind", "probs"}, {"kind", "probs"}, path)
        if not isinstance(obj["probs"], list):
            raise ModelFormatError(f"{path}.probs", "expected a list of numbers")
        return IidEnvironment(np.array(obj["probs"], dtype=float))
    if kind == "markov":
        _require_keys(obj, {"kind", "initial", "transition"}, {"kind", "initial", "transition"}, path)
        if not isinstance(obj["initial"], list):
            raise ModelFormatError(f"{path}.initial", "expected a list of numbers")
        if not isinstance(obj["transition"], list) or not all(
            isinstance(row, list) for row in obj["transition"]
        ):
            raise ModelFormatError(f"{path}.transition", "expected a list of rows")
        return MarkovEnvironment(
            np.array(obj["initial"], dtype=float),
            np.array(obj["transition"], dtype=float),
        )
    raise ModelFormatError(f"{path}.kind", f"unknown environment kind {kind!r}")


def parse_model(text):
    """Parse a model document (str or bytes) into a :class:`ModelSpec`.

    Schema violations raise :class:`ModelFormatError` with the JSON path;
    invariant violations raise :class:`InvariantError` naming the invariant.
    """
    if isinstance(text, bytes):
        text = text.decode("utf-8")
    try:
        doc = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ModelFormatError("", f"invalid JSON: {exc}") from exc
    _require_keys(doc, {"n_types", "letters", "environment"}, {"n_types", "letters", "environment"}, "")
    n_types = doc["n_types"]
    if not isinstance(n_types, int) or isinstance(n_types, bool):
        raise ModelFormatError("n_types", "expected an integer")
    if not isinstance(doc["letters"], list) or not doc["letters"]:
        raise ModelFormatError("letters", "expected a non-empty list")
    letters = []
    for i, letter_obj in enumerate(doc["letters"]):
        path = f"letters[{i}]"
        _require_keys(letter_obj, {"name", "laws"}, {"name", "laws"}, path)
        if not isinstance(letter_obj["name"], str):
            raise ModelFormatError(f"{path}.name", "expected a string")
        if not isinstance(letter_obj["laws"], list) or len(letter_obj["laws"]) != n_types:
            raise ModelFormatError(f"{path}.laws", f"expected a list of {n_types} laws")
        laws = [
            _parse_law(entries, n_types, f"{path}.laws[{k}]")
            for k, entries in enumerate(letter_obj["laws"])
        ]
        letters.append(EnvironmentLetter(letter_obj["name"], tuple(laws)))
    environment = _parse_environment(doc["environment"], "environment")
    return ModelSpec(n_types, tuple(letters), environment)


def model_to_dict(model):
    env = model.environment
    if env.kind == "iid":
        env_obj = {"kind": "iid", "probs": [float(p) for p in env.probs]}
    else:
        env_obj = {
            "kind": "markov",
            "initial": [float(p) for p in env.initial],
            "transition": [[float(p) for p in row] for row in env.transition],
        }
    return {
        "n_types": model.n_types,
        "letters": [
            {
                "name": letter.name,
                "laws": [
                    [
                        {"z": [int(v) for v in z], "p": float(p)}
                        for z, p in zip(law.counts, law.probs)
                    ]
                    for law in letter.laws
                ],
            }
            for letter in model.letters
        ],
        "environment": env_obj,
    }


def write_model(model):
    """Serialize a model to JSON text; ``parse_model`` round-trips it exactly."""
    return json.dumps(model_to_dict(model), indent=2) + "\n"


def models_equal(a, b):
    """Field-for-field equality of two models."""
    if a.n_types != b.n_types or a.n_letters != b.n_letters:
        return False
    for la, lb in zip(a.letters, b.letters):
        if la.name != lb.name:
            return False
        for lawa, lawb in zip(la.laws, lb.laws):
            if not (
                np.array_equal(lawa.counts, lawb.counts)
                and np.array_equal(lawa.probs, lawb.probs)
            ):
                return False
    ea, eb = a.environment, b.environment
    if ea.kind != eb.kind:
        return False
    if ea.kind == "iid":
        return np.array_equal(ea.probs, eb.probs)
    return np.array_equal(ea.initial, eb.initial) and np.array_equal(
        ea.transition, eb.transition
    )
