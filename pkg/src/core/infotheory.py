"""
Functional Load Toolkit
Information Theory Module

Entropy of n-gram tables, the functional-load estimator (the relative drop
in the n-gram entropy rate once a contrast is erased), Hockett's pairwise
special case, and cohort statistics over weighted lexicons.

All logarithms are base 2. Sums run in canonical key order through
``math.fsum`` so results do not depend on dict iteration or platform.
"""

import logging
import math
from dataclasses import dataclass, field
from typing import Dict, Hashable, Iterable, List, Mapping, Optional, Tuple, Union

from .contrast import ContrastSpec, apply_contrast, apply_to_corpus, partition_contrast
from .corpus import NGramTable, TokenStreamCorpus, WeightedLexicon, count_ngrams, lexicon_to_table
from .errors import ComputationError, DegenerateCorpusError, InputError
from .schema import Value

logger = logging.getLogger(__name__)


Corpus = Union[TokenStreamCorpus, WeightedLexicon]

CARTER_TOLERANCE = 1e-9


@dataclass(frozen=True)
class EntropyEstimate:
    """n-gram entropy H(D_n) and the per-object rate H(D_n)/n."""

    n: int
    raw_entropy: float
    total: float
    distinct: int

    @property
    def rate(self) -> float:
        return self.raw_entropy / self.n


@dataclass(frozen=True)
class FLReport:
    """Functional load of one contrast at one n-gram order."""

    contrast_id: str
    n: int
    h_before: float
    h_after: float
    fl: float
    raw_before: float = 0.0
    raw_after: float = 0.0
    total_before: float = 0.0
    total_after: float = 0.0
    distinct_before: int = 0
    distinct_after: int = 0

    def to_dict(self) -> Dict[str, object]:
        return {
            "contrast": self.contrast_id,
            "n": self.n,
            "h_before": self.h_before,
            "h_after": self.h_after,
            "fl": self.fl,
            "raw_before": self.raw_before,
            "raw_after": self.raw_after,
            "total_before": self.total_before,
            "total_after": self.total_after,
            "distinct_before": self.distinct_before,
            "distinct_after": self.distinct_after,
        }


@dataclass(frozen=True)
class CohortReport:
    """Cohort statistics of a lexicon under a contrast."""

    contrast_id: str
    word_count: int
    cohort_count: int
    shipman_avg_size: float
    huttenlocher_expected_size: float
    carter_expected_entropy: float
    h_w: float
    h_w_theta: float
    pie: Optional[float]
    cohorts: Tuple[Tuple[str, ...], ...] = field(default=(), compare=False)

    def to_dict(self) -> Dict[str, object]:
        return {
            "contrast": self.contrast_id,
            "words": self.word_count,
            "cohorts": self.cohort_count,
            "shipman": self.shipman_avg_size,
            "huttenlocher": self.huttenlocher_expected_size,
            "carter": self.carter_expected_entropy,
            "h_w": self.h_w,
            "h_w_theta": self.h_w_theta,
            "pie": self.pie,
        }


def entropy_of_counts(counts: Union[Mapping[Hashable, float], Iterable[float]]) -> float:
    """
    Shannon entropy (bits) of the distribution proportional to ``counts``.

    Mapping inputs are summed in sorted key order; zero counts contribute
    nothing.

    Raises:
        DegenerateCorpusError: If the counts sum to zero
    """
    if isinstance(counts, Mapping):
        values = [counts[key] for key in sorted(counts)]
    else:
        values = list(counts)

    total = math.fsum(values)
    if not total > 0:
        raise DegenerateCorpusError("degenerate corpus: empty distribution")

    h = -math.fsum((c / total) * math.log2(c / total) for c in values if c > 0)
    return h if h > 0 else 0.0


def entropy(table: NGramTable) -> EntropyEstimate:
    """
    Entropy estimate of an n-gram table.

    Raises:
        DegenerateCorpusError: If the table is empty
    """
    if not table.total > 0:
        raise DegenerateCorpusError(f"degenerate corpus: no {table.n}-grams to count")
    return EntropyEstimate(
        n=table.n,
        raw_entropy=entropy_of_counts(table.counts),
        total=table.total,
        distinct=table.distinct,
    )


def _table(corpus: Corpus, n: int, jobs: int) -> NGramTable:
    if isinstance(corpus, WeightedLexicon):
        if n != 1:
            raise InputError(f"weighted lexicons support n=1 only, got n={n}")
        return lexicon_to_table(corpus)
    if corpus.size == 0:
        raise DegenerateCorpusError("degenerate corpus: no objects")
    return count_ngrams(corpus, n, jobs=jobs)


def corpus_entropy(corpus: Corpus, n: int, jobs: int = 1) -> EntropyEstimate:
    """Entropy estimate of a corpus (or n=1 lexicon) at order ``n``."""
    return entropy(_table(corpus, n, jobs))


def fl_from_estimates(contrast_id: str, before: EntropyEstimate, after: EntropyEstimate) -> FLReport:
    """
    Combine before/after estimates into an FLReport.

    Raises:
        DegenerateCorpusError: If the original entropy is zero
    """
    if before.raw_entropy == 0:
        raise DegenerateCorpusError(f"degenerate corpus: zero {before.n}-gram entropy, functional load undefined")
    fl = (before.rate - after.rate) / before.rate
    return FLReport(
        contrast_id=contrast_id,
        n=before.n,
        h_before=before.rate,
        h_after=after.rate,
        fl=fl,
        raw_before=before.raw_entropy,
        raw_after=after.raw_entropy,
        total_before=before.total,
        total_after=after.total,
        distinct_before=before.distinct,
        distinct_after=after.distinct,
    )


def functional_load(
    corpus: Corpus,
    spec: ContrastSpec,
    n: int,
    contrast_id: Optional[str] = None,
    jobs: int = 1,
    before: Optional[EntropyEstimate] = None,
) -> FLReport:
    """
    Estimate the functional load of a contrast at n-gram order ``n``.

    Args:
        corpus: Token-stream corpus, or weighted lexicon (n must be 1)
        spec: Contrast over the corpus object type
        n: n-gram order
        contrast_id: Report label (defaults to the contrast's id)
        jobs: Worker processes for n-gram counting
        before: Precomputed entropy of ``corpus`` at order ``n``

    Returns:
        FLReport with fl = (H_before - H_after) / H_before

    Raises:
        DegenerateCorpusError: Empty corpus or zero original entropy
        InputError: n > 1 on a lexicon
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")
    if before is None:
        before = corpus_entropy(corpus, n, jobs)
    mapped = apply_to_corpus(spec, corpus)
    after = corpus_entropy(mapped, n, jobs)

    report = fl_from_estimates(contrast_id or spec.contrast_id, before, after)
    logger.debug(f"FL[{report.contrast_id}] n={n}: {report.h_before:.6f} -> {report.h_after:.6f}, fl={report.fl:.6f}")
    return report


def hockett_fl(
    corpus: Corpus,
    x: str,
    y: str,
    n: int,
    atomic_type: Optional[str] = None,
    jobs: int = 1,
) -> FLReport:
    """
    Hockett's functional load of the opposition between ``x`` and ``y``:
    functional_load with the contrast that merges exactly that pair.

    Raises:
        InputError: If x == y
    """
    if x == y:
        raise InputError(f"pair must be two distinct symbols, got {x!r} twice")
    spec = partition_contrast(corpus.schema, corpus.object_type, atomic_type or corpus.object_type, [(x, y)])
    x, y = sorted((x, y))
    return functional_load(corpus, spec, n, contrast_id=f"{x} {y}", jobs=jobs)


def cohort_analysis(lexicon: WeightedLexicon, spec: ContrastSpec) -> CohortReport:
    """
    Group lexicon entries into cohorts (words the contrast makes
    indistinguishable) and compute the cohort statistics.

    Returns:
        CohortReport with average cohort size, expected cohort size,
        expected cohort entropy, H(W), H(W_theta) and the percentage of
        information extracted. When H(W) = 0 (one word, or all weight on
        one word) PIE is undefined and left as None; the other statistics
        are still computed.

    Raises:
        DegenerateCorpusError: Empty lexicon
    """
    if not lexicon.entries:
        raise DegenerateCorpusError("degenerate corpus: empty lexicon")

    if lexicon.object_type != spec.object_type:
        raise InputError(f"contrast is over {spec.object_type} but lexicon holds {lexicon.object_type}")

    members: Dict[str, List[Value]] = {}
    for value in sorted(lexicon.entries, key=lambda v: v.canonical):
        members.setdefault(apply_contrast(spec, value).canonical, []).append(value)

    total = lexicon.total_weight
    word_weights = {value.canonical: weight for value, weight in lexicon.entries.items()}
    h_w = entropy_of_counts(word_weights)

    cohort_weights: Dict[str, float] = {}
    huttenlocher_terms = []
    carter_terms = []
    for image in sorted(members):
        weights = [lexicon.entries[value] for value in members[image]]
        weight = math.fsum(weights)
        cohort_weights[image] = weight
        p_cohort = weight / total
        huttenlocher_terms.append(p_cohort * len(weights))
        carter_terms.append(p_cohort * entropy_of_counts(weights))

    h_w_theta = entropy_of_counts(cohort_weights)
    carter = math.fsum(carter_terms)
    if abs(carter - (h_w - h_w_theta)) > CARTER_TOLERANCE:
        raise ComputationError(
            f"expected cohort entropy {carter!r} disagrees with H(W) - H(W_theta) = {h_w - h_w_theta!r}"
        )

    report = CohortReport(
        contrast_id=spec.contrast_id,
        word_count=len(lexicon.entries),
        cohort_count=len(members),
        shipman_avg_size=len(lexicon.entries) / len(members),
        huttenlocher_expected_size=math.fsum(huttenlocher_terms),
        carter_expected_entropy=carter,
        h_w=h_w,
        h_w_theta=h_w_theta,
        pie=100.0 * h_w_theta / h_w if h_w > 0 else None,
        cohorts=tuple(tuple(v.canonical for v in members[image]) for image in sorted(members)),
    )
    if report.pie is None:
        logger.warning(f"Cohorts[{report.contrast_id}]: H(W) is zero, PIE undefined")
    else:
        logger.info(f"Cohorts[{report.contrast_id}]: {report.cohort_count} cohorts, PIE {report.pie:.2f}%")
    return report
