"""
Functional Load Toolkit
Analysis Module

Higher-order analyses built on the functional-load estimator:

- pairwise FL matrices over a set of symbols (optionally position-guarded)
- the consistency coefficient (Pearson correlation of two FL measures)
- percentile rank of one opposition within a matrix
- single-phoneme FL as an expectation over possible mergers
- consistency of FL across n-gram orders, for pairwise oppositions and
  for randomly generated partitions
"""

import itertools
import logging
import math
import re
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from functools import partial
from typing import Dict, Iterable, List, Optional, Sequence, Tuple, Union

import numpy as np

from .contrast import ContrastSpec, Guard, Partition, binary_oppositions, partition_contrast
from .corpus import TokenStreamCorpus, WeightedLexicon, token_frequencies
from .errors import ComputationError, InputError, ParseError, UndefinedCorrelationError
from .infotheory import EntropyEstimate, FLReport, corpus_entropy, functional_load
from .schema import is_valid_token, strip_comment

logger = logging.getLogger(__name__)


Corpus = Union[TokenStreamCorpus, WeightedLexicon]
Pair = Tuple[str, str]

DEFAULT_CONSISTENCY_THRESHOLD = 0.9
WEIGHT_TOLERANCE = 1e-9


def normalize_pair(x: str, y: str) -> Pair:
    a, b = sorted((x, y))
    return a, b


# ---------------------------------------------------------------------------
# FL matrices
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class FLMatrix:
    """Functional load of every binary opposition over a symbol set."""

    atomic_type: str
    symbols: Tuple[str, ...]
    n: int
    entries: Dict[Pair, float] = field(default_factory=dict)
    reports: Dict[Pair, FLReport] = field(default_factory=dict, compare=False)

    def pairs(self) -> List[Pair]:
        return sorted(self.entries)

    def values(self) -> List[float]:
        return [self.entries[pair] for pair in self.pairs()]

    def __getitem__(self, pair: Pair) -> float:
        return self.entries[normalize_pair(*pair)]

    def __len__(self) -> int:
        return len(self.entries)


def _pair_fl(corpus: Corpus, n: int, before: EntropyEstimate, spec: ContrastSpec) -> FLReport:
    return functional_load(corpus, spec, n, before=before)


def fl_matrix(
    corpus: Corpus,
    atomic_type: str,
    symbols: Iterable[str],
    n: int,
    guard: Optional[Guard] = None,
    jobs: int = 1,
) -> FLMatrix:
    """
    Functional load of every binary opposition of ``symbols``.

    Args:
        corpus: Corpus or lexicon whose values contain ``atomic_type``
        atomic_type: Type the symbols belong to
        symbols: At least two inventory tokens
        n: n-gram order
        guard: Optional position restriction applied to every merger
            (e.g. word-initial only)
        jobs: Worker processes; entries are identical for any value

    Returns:
        FLMatrix with one entry per unordered pair
    """
    specs = binary_oppositions(corpus.schema, atomic_type, symbols, corpus.object_type, guard)
    before = corpus_entropy(corpus, n)
    compute = partial(_pair_fl, corpus, n, before)

    if jobs > 1 and len(specs) > 1:
        chunksize = max(1, math.ceil(len(specs) / jobs))
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            reports = list(executor.map(compute, specs, chunksize=chunksize))
    else:
        reports = [compute(spec) for spec in specs]

    entries: Dict[Pair, float] = {}
    by_pair: Dict[Pair, FLReport] = {}
    for spec, report in zip(specs, reports):
        pair = normalize_pair(*spec.contrast_id.split(" "))
        entries[pair] = report.fl
        by_pair[pair] = report

    logger.info(f"FL matrix over {len(set(symbols))} symbols at n={n}: {len(entries)} oppositions")
    return FLMatrix(atomic_type, tuple(sorted(set(symbols))), n, entries, by_pair)


def rank_entry(matrix: FLMatrix, pair: Pair) -> float:
    """
    Percentile rank of one opposition: the fraction of matrix entries
    strictly smaller than its value.

    Raises:
        InputError: If the pair is not in the matrix
    """
    key = normalize_pair(*pair)
    if key not in matrix.entries:
        raise InputError(f"pair {key[0]} {key[1]} is not in the matrix")
    value = matrix.entries[key]
    smaller = sum(1 for other in matrix.entries.values() if other < value)
    return smaller / len(matrix.entries)


# ---------------------------------------------------------------------------
# Consistency
# ---------------------------------------------------------------------------


def _mean(values: Sequence[float]) -> float:
    return math.fsum(values) / len(values)


def consistency_alpha(xs: Sequence[float], ys: Sequence[float]) -> float:
    """
    Pearson correlation between two FL measures over the same contrasts.

    Raises:
        InputError: Lengths differ or fewer than three contrasts
        UndefinedCorrelationError: Either series is constant
    """
    if len(xs) != len(ys):
        raise InputError(f"series lengths differ: {len(xs)} vs {len(ys)}")
    if len(xs) < 3:
        raise InputError(f"consistency needs at least 3 contrasts, got {len(xs)}")

    mx = _mean(xs)
    my = _mean(ys)
    dx = [x - mx for x in xs]
    dy = [y - my for y in ys]
    sxx = math.fsum(d * d for d in dx)
    syy = math.fsum(d * d for d in dy)
    if sxx == 0 or syy == 0:
        raise UndefinedCorrelationError("correlation undefined: one series has zero variance")

    r = math.fsum(a * b for a, b in zip(dx, dy)) / math.sqrt(sxx * syy)
    # Clamp r in [-1, +1] in case of floating-point error.
    return max(-1.0, min(1.0, r))


@dataclass(frozen=True)
class ConsistencyReport:
    alpha: float
    pairs: int
    threshold: float = DEFAULT_CONSISTENCY_THRESHOLD

    @property
    def consistent(self) -> bool:
        return self.alpha > self.threshold


def assess_consistency(
    xs: Sequence[float],
    ys: Sequence[float],
    threshold: float = DEFAULT_CONSISTENCY_THRESHOLD,
) -> ConsistencyReport:
    """Correlation of two FL series annotated against a consistency threshold."""
    report = ConsistencyReport(consistency_alpha(xs, ys), len(xs), threshold)
    if not report.consistent:
        logger.warning(f"alpha {report.alpha:.4f} is below the consistency threshold {threshold}")
    return report


def consistency_across_orders(
    corpus: TokenStreamCorpus,
    atomic_type: str,
    symbols: Iterable[str],
    orders: Sequence[int],
    jobs: int = 1,
) -> Dict[Tuple[int, int], float]:
    """
    Correlate pairwise FL matrices computed at different n-gram orders.

    Returns:
        Mapping (m, n) -> alpha for every m < n in ``orders``
    """
    symbols = sorted(set(symbols))
    matrices = {n: fl_matrix(corpus, atomic_type, symbols, n, jobs=jobs) for n in sorted(set(orders))}
    return {
        (m, n): consistency_alpha(matrices[m].values(), matrices[n].values())
        for m, n in itertools.combinations(sorted(matrices), 2)
    }


def random_partitions(atomic_type: str, inventory: Sequence[str], count: int, seed: int = 0) -> List[Partition]:
    """
    Draw ``count`` random non-trivial partitions of an inventory.

    Each token is assigned to one of k blocks, k drawn uniformly from
    1..len(inventory); draws that leave every token a singleton are
    rejected.
    """
    tokens = sorted(set(inventory))
    if len(tokens) < 2:
        raise InputError("random partitions need an inventory of at least 2 tokens")

    rng = np.random.default_rng(seed)
    partitions: List[Partition] = []
    while len(partitions) < count:
        blocks = int(rng.integers(1, len(tokens) + 1))
        assignment = rng.integers(0, blocks, size=len(tokens))
        groups: Dict[int, List[str]] = {}
        for token, block in zip(tokens, assignment):
            groups.setdefault(int(block), []).append(token)
        classes = sorted((tuple(g) for g in groups.values() if len(g) >= 2))
        if classes:
            partitions.append(Partition(atomic_type, tuple(frozenset(c) for c in classes)))
    return partitions


def random_partition_consistency(
    corpus: TokenStreamCorpus,
    atomic_type: str,
    count: int,
    orders: Sequence[int],
    seed: int = 0,
) -> Dict[Tuple[int, int], float]:
    """
    FL of ``count`` random partitions at each order, correlated between
    every pair of orders.
    """
    inventory = corpus.schema.atomic(atomic_type).inventory
    specs = [
        partition_contrast(corpus.schema, corpus.object_type, atomic_type, partition.classes)
        for partition in random_partitions(atomic_type, inventory, count, seed)
    ]
    series: Dict[int, List[float]] = {}
    for n in sorted(set(orders)):
        before = corpus_entropy(corpus, n)
        series[n] = [functional_load(corpus, spec, n, before=before).fl for spec in specs]
    return {
        (m, n): consistency_alpha(series[m], series[n])
        for m, n in itertools.combinations(sorted(series), 2)
    }


# ---------------------------------------------------------------------------
# Single-phoneme functional load
# ---------------------------------------------------------------------------


class WeightingMode(Enum):
    FREQUENCY = "frequency"
    EXPLICIT = "explicit"


@dataclass(frozen=True)
class SimilarityModel:
    """
    Similarity sets S(x) of the phonemes a symbol may merge with, and how
    the possible mergers are weighted.
    """

    similar: Dict[str, Tuple[str, ...]] = field(default_factory=dict)
    weights: Dict[Pair, float] = field(default_factory=dict)

    @property
    def mode(self) -> WeightingMode:
        return WeightingMode.EXPLICIT if self.weights else WeightingMode.FREQUENCY

    def targets(self, x: str) -> Tuple[str, ...]:
        if x not in self.similar:
            raise InputError(f"no similarity set for '{x}'")
        return self.similar[x]


_SIMILAR_LINE = re.compile(r"^similar\s+(\S+)\s*:(.*)$")
_WEIGHT_LINE = re.compile(r"^weight\s+(\S+)\s+(\S+)\s*=\s*(\S+)$")


def parse_similarity_model(text: str, source: Optional[str] = None) -> SimilarityModel:
    """
    Parse ``similar <x> : <y> ...`` and ``weight <x> <y> = <p>`` lines.

    Raises:
        ParseError: Malformed line, duplicate set, x in its own set, or
            explicit weights that do not cover S(x) and sum to 1
    """
    similar: Dict[str, Tuple[str, ...]] = {}
    weights: Dict[Pair, float] = {}
    weight_lines: Dict[Pair, int] = {}

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw_line)
        if not line:
            continue
        match = _SIMILAR_LINE.match(line)
        if match:
            x = match.group(1)
            ys = match.group(2).split()
            for token in [x] + ys:
                if not is_valid_token(token):
                    raise ParseError(f"invalid token '{token}'", line=line_number, source=source)
            if x in similar:
                raise ParseError(f"duplicate similarity set for '{x}'", line=line_number, source=source)
            if x in ys:
                raise ParseError(f"'{x}' cannot be in its own similarity set", line=line_number, source=source)
            if len(set(ys)) != len(ys):
                raise ParseError(f"duplicate token in similarity set of '{x}'", line=line_number, source=source)
            similar[x] = tuple(ys)
            continue

        match = _WEIGHT_LINE.match(line)
        if match:
            x, y, p_text = match.groups()
            try:
                p = float(p_text)
            except ValueError:
                raise ParseError(f"invalid weight '{p_text}'", line=line_number, source=source) from None
            if not 0 <= p <= 1:
                raise ParseError(f"weight must lie in [0, 1], got {p_text}", line=line_number, source=source)
            if (x, y) in weights:
                raise ParseError(f"duplicate weight for {x} {y}", line=line_number, source=source)
            weights[(x, y)] = p
            weight_lines[(x, y)] = line_number
            continue

        raise ParseError(f"unrecognized line '{line}'", line=line_number, column=1, source=source)

    _check_weights(similar, weights, weight_lines, source)
    logger.info(f"Parsed similarity model: {len(similar)} sets, {'explicit' if weights else 'frequency'} weighting")
    return SimilarityModel(similar, weights)


def _check_weights(
    similar: Dict[str, Tuple[str, ...]],
    weights: Dict[Pair, float],
    weight_lines: Dict[Pair, int],
    source: Optional[str],
) -> None:
    if not weights:
        return
    for (x, y), line in weight_lines.items():
        if y not in similar.get(x, ()):
            raise ParseError(f"weight for '{y}' which is not in S({x})", line=line, source=source)
    for x, ys in similar.items():
        missing = [y for y in ys if (x, y) not in weights]
        if missing:
            raise ParseError(f"explicit weights missing for {x}: {' '.join(missing)}", source=source)
        total = math.fsum(weights[(x, y)] for y in ys)
        if ys and abs(total - 1.0) > WEIGHT_TOLERANCE:
            raise ParseError(f"weights of S({x}) sum to {total}, expected 1", source=source)


@dataclass(frozen=True)
class MergerTerm:
    """One possible merger of x with y and its weight."""

    target: str
    weight: float
    fl: float


@dataclass(frozen=True)
class PhonemeFL:
    """Expected functional load of one symbol over its possible mergers."""

    phoneme: str
    n: int
    fl: float
    terms: Tuple[MergerTerm, ...] = ()
    empty_similarity_set: bool = False


def single_phoneme_fl(
    corpus: Corpus,
    x: str,
    model: SimilarityModel,
    n: int,
    atomic_type: Optional[str] = None,
    reference: Optional[Corpus] = None,
    jobs: int = 1,
) -> PhonemeFL:
    """
    Functional load of a single symbol: the weighted sum over y in S(x) of
    P(x, y) * FL(x, y).

    Args:
        corpus: Corpus the pairwise FL values are measured on
        x: Symbol whose load is measured
        model: Similarity sets and weighting
        n: n-gram order
        atomic_type: Type of x (defaults to the corpus object type)
        reference: Corpus supplying frequencies in frequency mode
            (defaults to ``corpus``)
        jobs: Worker processes for n-gram counting

    Returns:
        PhonemeFL with the total and the per-merger breakdown; an empty
        S(x) yields 0 with ``empty_similarity_set`` set

    Raises:
        ComputationError: Every y in S(x) has zero frequency
    """
    atomic_type = atomic_type or corpus.object_type
    inventory = corpus.schema.atomic(atomic_type)
    targets = model.targets(x)
    for token in (x,) + targets:
        if token not in inventory:
            raise InputError(f"token '{token}' not in inventory of {atomic_type}")

    if not targets:
        logger.warning(f"S({x}) is empty; functional load of '{x}' is 0")
        return PhonemeFL(x, n, 0.0, (), empty_similarity_set=True)

    if model.mode is WeightingMode.EXPLICIT:
        weights = {y: model.weights[(x, y)] for y in targets}
    else:
        frequencies = token_frequencies(reference or corpus, atomic_type)
        counts = {y: frequencies.get(y, 0.0) for y in targets}
        total = math.fsum(counts[y] for y in sorted(counts))
        if total == 0:
            raise ComputationError(f"no member of S({x}) occurs in the reference corpus")
        weights = {y: counts[y] / total for y in targets}

    before = corpus_entropy(corpus, n, jobs)
    terms = []
    for y in sorted(targets):
        spec = partition_contrast(corpus.schema, corpus.object_type, atomic_type, [(x, y)])
        report = functional_load(corpus, spec, n, before=before)
        terms.append(MergerTerm(y, weights[y], report.fl))
        logger.debug(f"FL({x},{y}) = {report.fl:.6f}, P = {weights[y]:.6f}")

    fl = math.fsum(term.weight * term.fl for term in terms)
    return PhonemeFL(x, n, fl, tuple(terms))
