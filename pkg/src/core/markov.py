"""
Functional Load Toolkit
Markov Reference Model

A finite Markov chain over atomic symbols with exactly computable n-gram
distributions. Sampled corpora from the chain let the n-gram estimator be
checked against the analytic functional load of a partition.
"""

import itertools
import logging
from dataclasses import dataclass
from typing import Dict, Iterable, Optional, Sequence, Tuple

import numpy as np

from .contrast import class_label
from .corpus import TokenStreamCorpus
from .errors import InputError
from .infotheory import entropy_of_counts
from .schema import Atomic, AtomicValue, Schema

logger = logging.getLogger(__name__)


ROW_TOLERANCE = 1e-9


@dataclass(frozen=True, eq=False)
class MarkovChain:
    """
    Markov chain with named states.

    Attributes:
        states: Symbols, one per row/column of ``transitions``
        transitions: Row-stochastic matrix; entry (i, j) is P(j | i)
    """

    states: Tuple[str, ...]
    transitions: np.ndarray

    def __post_init__(self) -> None:
        matrix = np.asarray(self.transitions, dtype=float)
        k = len(self.states)
        if len(set(self.states)) != k:
            raise InputError("Markov chain states must be distinct")
        if matrix.shape != (k, k):
            raise InputError(f"transition matrix must be {k}x{k}, got {matrix.shape}")
        if np.any(matrix < 0):
            raise InputError("transition probabilities must be non-negative")
        if not np.allclose(matrix.sum(axis=1), 1.0, atol=ROW_TOLERANCE):
            raise InputError("transition matrix rows must sum to 1")
        object.__setattr__(self, "states", tuple(self.states))
        object.__setattr__(self, "transitions", matrix)

    @property
    def size(self) -> int:
        return len(self.states)

    def stationary_distribution(self) -> np.ndarray:
        """Principal left eigenvector of the transition matrix, normalized to sum 1."""
        eig_vals, eig_vectors = np.linalg.eig(self.transitions.T)
        ind = int(np.argmin(np.abs(eig_vals - 1.0)))
        distribution = np.absolute(np.real(eig_vectors[:, ind]))
        distribution /= np.sum(distribution)
        return distribution

    def ngram_distribution(self, n: int) -> Dict[Tuple[str, ...], float]:
        """Exact probability of every n-gram with a stationary start."""
        if n < 1:
            raise InputError(f"n must be >= 1, got {n}")
        pi = self.stationary_distribution()
        distribution = {}
        for path in itertools.product(range(self.size), repeat=n):
            p = pi[path[0]]
            for i, j in zip(path, path[1:]):
                p *= self.transitions[i, j]
            distribution[tuple(self.states[i] for i in path)] = float(p)
        return distribution

    def entropy_rate(self) -> float:
        """Entropy rate in bits per symbol."""
        pi = self.stationary_distribution()
        rows = [
            entropy_of_counts([p for p in self.transitions[i] if p > 0])
            for i in range(self.size)
        ]
        return float(np.dot(pi, rows))

    def schema(self, atomic_type: str = "sym") -> Schema:
        return Schema({atomic_type: Atomic(self.states)})

    def sample_corpus(
        self,
        length: int,
        seed: int = 0,
        schema: Optional[Schema] = None,
        object_type: str = "sym",
    ) -> TokenStreamCorpus:
        """
        Sample a single-utterance corpus of ``length`` symbols. The start
        state is drawn from the stationary distribution.
        """
        if length < 1:
            raise InputError(f"length must be >= 1, got {length}")
        rng = np.random.default_rng(seed)
        cumulative = np.cumsum(self.transitions, axis=1)
        draws = rng.random(length)

        state = int(np.searchsorted(np.cumsum(self.stationary_distribution()), draws[0], side="right"))
        state = min(state, self.size - 1)
        path = [state]
        for u in draws[1:]:
            state = min(int(np.searchsorted(cumulative[state], u, side="right")), self.size - 1)
            path.append(state)

        values = tuple(AtomicValue(self.states[i]) for i in path)
        logger.debug(f"Sampled {length} symbols from a {self.size}-state chain (seed {seed})")
        return TokenStreamCorpus(schema or self.schema(object_type), object_type, (values,))

    def analytic_functional_load(self, classes: Iterable[Sequence[str]], n: int) -> float:
        """
        Functional load of a partition computed from the exact n-gram
        distribution and its image under the merger.
        """
        mapping: Dict[str, str] = {}
        for members in classes:
            label = class_label(members)
            for token in members:
                if token not in self.states:
                    raise InputError(f"unknown state '{token}'")
                mapping[token] = label

        distribution = self.ngram_distribution(n)
        merged: Dict[Tuple[str, ...], list] = {}
        for key in sorted(distribution):
            image = tuple(mapping.get(token, token) for token in key)
            merged.setdefault(image, []).append(distribution[key])

        h_before = entropy_of_counts(distribution)
        h_after = entropy_of_counts({key: float(np.sum(ps)) for key, ps in merged.items()})
        return (h_before - h_after) / h_before
