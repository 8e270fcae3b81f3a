"""
Functional Load Toolkit
Corpus Module

Ingests token-stream corpora and weighted lexicons, joins word-key streams
with pronunciation lexicons, and builds n-gram count tables. Counts are
taken within utterances only; a table's total is the sum over utterances of
max(0, len - n + 1), which equals N - n + 1 for a single-utterance corpus.
"""

import logging
import math
from collections import Counter
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from enum import Enum
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import DegenerateCorpusError, InputError, JoinError, ParseError, SchemaError
from .schema import (
    Atomic,
    AtomicValue,
    Composite,
    CompositeValue,
    Schema,
    StringOf,
    StringValue,
    Value,
    atomic_tokens,
    is_valid_token,
    parse_value,
    parse_value_sequence,
    strip_comment,
)

logger = logging.getLogger(__name__)


NGramKey = Tuple[str, ...]


class MissPolicy(Enum):
    """What join_lexicon does with a word key that has no pronunciation."""

    SKIP = "skip"
    ERROR = "error"


@dataclass(frozen=True)
class TokenStreamCorpus:
    """Utterances of typed objects, in file order."""

    schema: Schema
    object_type: str
    utterances: Tuple[Tuple[Value, ...], ...] = ()

    def __post_init__(self) -> None:
        object.__setattr__(self, "utterances", tuple(tuple(u) for u in self.utterances))
        for index, utterance in enumerate(self.utterances):
            if not utterance:
                raise InputError(f"utterance {index} is empty")

    @property
    def size(self) -> int:
        """Total object count N."""
        return sum(len(utterance) for utterance in self.utterances)

    def values(self) -> Iterator[Value]:
        for utterance in self.utterances:
            yield from utterance

    def concat(self, other: "TokenStreamCorpus") -> "TokenStreamCorpus":
        """Corpus whose utterances are this corpus's followed by ``other``'s."""
        if other.object_type != self.object_type:
            raise InputError(f"cannot concatenate {self.object_type} and {other.object_type} corpora")
        return TokenStreamCorpus(self.schema, self.object_type, self.utterances + other.utterances)


@dataclass(frozen=True)
class WeightedLexicon:
    """Distinct values with positive weights (word-frequency pairs)."""

    schema: Schema
    object_type: str
    entries: Dict[Value, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        for value, weight in self.entries.items():
            if not weight > 0 or math.isinf(weight):
                raise InputError(f"weight of {value} must be a positive finite number, got {weight}")

    @property
    def total_weight(self) -> float:
        return math.fsum(self.entries[v] for v in sorted(self.entries, key=lambda v: v.canonical))

    def probabilities(self) -> Dict[Value, float]:
        total = self.total_weight
        return {value: weight / total for value, weight in self.entries.items()}


@dataclass(frozen=True)
class PronunciationMap:
    """Word key -> pronunciation value, typed against a schema."""

    schema: Schema
    object_type: str
    entries: Dict[str, Value] = field(default_factory=dict)


@dataclass(frozen=True)
class JoinDiagnostics:
    """Outcome of a lexicon join."""

    joined: int = 0
    misses: int = 0
    missing_keys: Tuple[str, ...] = ()
    dropped_utterances: int = 0


@dataclass(frozen=True)
class NGramTable:
    """Counts of contiguous n-grams of canonical serializations."""

    n: int
    counts: Dict[NGramKey, float] = field(default_factory=dict)

    def __post_init__(self) -> None:
        if self.n < 1:
            raise InputError(f"n must be >= 1, got {self.n}")
        for key, count in self.counts.items():
            if len(key) != self.n:
                raise InputError(f"n-gram {key} does not have {self.n} elements")
            if count < 0:
                raise InputError(f"negative count for {key}")

    @property
    def total(self) -> float:
        return math.fsum(self.counts[key] for key in sorted(self.counts))

    @property
    def distinct(self) -> int:
        return sum(1 for count in self.counts.values() if count > 0)

    def sorted_items(self) -> List[Tuple[NGramKey, float]]:
        return sorted(self.counts.items())


# ---------------------------------------------------------------------------
# Parsing
# ---------------------------------------------------------------------------


def _require_type(schema: Schema, object_type: str) -> None:
    if not schema.is_defined(object_type):
        raise SchemaError(f"undefined object type: {object_type}")


def parse_token_stream(
    text: str,
    schema: Schema,
    object_type: str,
    source: Optional[str] = None,
) -> TokenStreamCorpus:
    """
    Parse a token-stream corpus: one utterance per line, each line a
    whitespace-separated sequence of canonical value serializations.

    Raises:
        ParseError: Malformed serialization (with line and column)
        TypeViolationError: Ill-typed value (with value path)
    """
    _require_type(schema, object_type)
    utterances = []
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw_line)
        if not line:
            continue
        values = parse_value_sequence(line, schema, object_type, line=line_number, source=source)
        utterances.append(tuple(values))

    corpus = TokenStreamCorpus(schema, object_type, tuple(utterances))
    logger.info(f"Parsed token stream: {len(utterances)} utterances, {corpus.size} objects")
    return corpus


def _split_tab_line(line: str, line_number: int, source: Optional[str]) -> Tuple[str, str]:
    head, sep, tail = line.partition("\t")
    if not sep:
        raise ParseError("expected '<field> TAB <value>'", line=line_number, source=source)
    return head.strip(), tail.strip()


def parse_weighted_lexicon(
    text: str,
    schema: Schema,
    object_type: str,
    source: Optional[str] = None,
) -> WeightedLexicon:
    """
    Parse a weighted lexicon of ``<weight> TAB <value>`` lines.

    Duplicate values are an error rather than being summed.
    """
    _require_type(schema, object_type)
    entries: Dict[Value, float] = {}
    first_seen: Dict[Value, int] = {}

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw_line)
        if not line:
            continue
        weight_text, value_text = _split_tab_line(line, line_number, source)
        try:
            weight = float(weight_text)
        except ValueError:
            raise ParseError(f"invalid weight '{weight_text}'", line=line_number, column=1, source=source) from None
        if not weight > 0 or math.isinf(weight):
            raise ParseError(f"weight must be positive, got '{weight_text}'", line=line_number, column=1, source=source)

        value = parse_value(value_text, schema, object_type, line=line_number, source=source)
        if value in entries:
            raise ParseError(
                f"duplicate entry {value} (first on line {first_seen[value]})",
                line=line_number,
                source=source,
            )
        entries[value] = weight
        first_seen[value] = line_number

    logger.info(f"Parsed weighted lexicon: {len(entries)} entries")
    return WeightedLexicon(schema, object_type, entries)


def parse_pronunciations(
    text: str,
    schema: Schema,
    object_type: str,
    source: Optional[str] = None,
) -> PronunciationMap:
    """Parse ``<key> TAB <value>`` lines into a pronunciation map (one per key)."""
    _require_type(schema, object_type)
    entries: Dict[str, Value] = {}
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw_line)
        if not line:
            continue
        key, value_text = _split_tab_line(line, line_number, source)
        if not is_valid_token(key):
            raise ParseError(f"invalid word key '{key}'", line=line_number, column=1, source=source)
        if key in entries:
            raise ParseError(f"duplicate pronunciation for '{key}'", line=line_number, source=source)
        entries[key] = parse_value(value_text, schema, object_type, line=line_number, source=source)

    logger.info(f"Parsed {len(entries)} pronunciations")
    return PronunciationMap(schema, object_type, entries)


def parse_key_stream(text: str, source: Optional[str] = None, key_type: str = "key") -> TokenStreamCorpus:
    """
    Parse a stream of word keys (one utterance per line) into a corpus over
    an atomic key type whose inventory is the set of observed keys.
    """
    lines: List[List[str]] = []
    inventory: Dict[str, None] = {}
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw_line)
        if not line:
            continue
        keys = line.split()
        for column_key in keys:
            if not is_valid_token(column_key):
                raise ParseError(f"invalid word key '{column_key}'", line=line_number, source=source)
            inventory.setdefault(column_key)
        lines.append(keys)

    schema = Schema({key_type: Atomic(tuple(inventory) or ("<none>",))})
    utterances = tuple(tuple(AtomicValue(k) for k in keys) for keys in lines)
    return TokenStreamCorpus(schema, key_type, utterances)


# ---------------------------------------------------------------------------
# Lexicon join
# ---------------------------------------------------------------------------


def join_lexicon(
    word_keys: TokenStreamCorpus,
    pronunciations: PronunciationMap,
    policy: MissPolicy = MissPolicy.ERROR,
) -> Tuple[TokenStreamCorpus, JoinDiagnostics]:
    """
    Replace each word key by its pronunciation, preserving utterance
    boundaries and order.

    Args:
        word_keys: Corpus over an atomic key type
        pronunciations: Pronunciation for each key
        policy: SKIP drops unmapped keys (and utterances left empty);
            ERROR raises on the first unmapped key

    Returns:
        Tuple of (pronounced corpus, join diagnostics)

    Raises:
        JoinError: Unmapped key under the ERROR policy
    """
    if not isinstance(word_keys.schema.resolve(word_keys.object_type), Atomic):
        raise InputError(f"word key corpus must be over an atomic type, got {word_keys.object_type}")

    utterances = []
    joined = 0
    misses = 0
    missing: Dict[str, None] = {}
    dropped = 0

    for index, utterance in enumerate(word_keys.utterances):
        pronounced = []
        for value in utterance:
            key = value.canonical
            pronunciation = pronunciations.entries.get(key)
            if pronunciation is None:
                if policy is MissPolicy.ERROR:
                    raise JoinError(f"no pronunciation for word key '{key}' (utterance {index + 1})")
                misses += 1
                missing.setdefault(key)
                continue
            pronounced.append(pronunciation)
            joined += 1
        if pronounced:
            utterances.append(tuple(pronounced))
        else:
            dropped += 1

    if misses:
        logger.warning(f"Lexicon join skipped {misses} tokens ({len(missing)} distinct keys)")

    corpus = TokenStreamCorpus(pronunciations.schema, pronunciations.object_type, tuple(utterances))
    diagnostics = JoinDiagnostics(
        joined=joined,
        misses=misses,
        missing_keys=tuple(sorted(missing)),
        dropped_utterances=dropped,
    )
    return corpus, diagnostics


# ---------------------------------------------------------------------------
# Counting
# ---------------------------------------------------------------------------


def _count_chunk(utterances: Sequence[Sequence[str]], n: int) -> Counter:
    counter: Counter = Counter()
    for keys in utterances:
        for start in range(len(keys) - n + 1):
            counter[tuple(keys[start:start + n])] += 1
    return counter


def _chunks(items: Sequence[Sequence[str]], parts: int) -> List[Sequence[Sequence[str]]]:
    size = max(1, math.ceil(len(items) / parts))
    return [items[i:i + size] for i in range(0, len(items), size)]


def count_ngrams(corpus: TokenStreamCorpus, n: int, jobs: int = 1) -> NGramTable:
    """
    Count contiguous n-grams within utterances.

    Args:
        corpus: Token-stream corpus
        n: n-gram order (>= 1)
        jobs: Worker processes; the result is identical for any value

    Returns:
        NGramTable with total = sum over utterances of max(0, len - n + 1)
    """
    if n < 1:
        raise InputError(f"n must be >= 1, got {n}")

    keyed = [[value.canonical for value in utterance] for utterance in corpus.utterances]
    if jobs > 1 and len(keyed) > 1:
        counter: Counter = Counter()
        with ProcessPoolExecutor(max_workers=jobs) as executor:
            for partial in executor.map(_count_chunk, _chunks(keyed, jobs), [n] * jobs):
                counter.update(partial)
    else:
        counter = _count_chunk(keyed, n)

    counts = {key: float(counter[key]) for key in sorted(counter)}
    logger.debug(f"Counted {len(counts)} distinct {n}-grams")
    return NGramTable(n, counts)


def lexicon_to_table(lexicon: WeightedLexicon) -> NGramTable:
    """Unigram table whose counts are the lexicon weights."""
    if not lexicon.entries:
        raise DegenerateCorpusError("degenerate corpus: empty lexicon")
    counts = {(value.canonical,): weight for value, weight in lexicon.entries.items()}
    return NGramTable(1, dict(sorted(counts.items())))


def merge_tables(tables: Iterable[NGramTable]) -> NGramTable:
    """Key-wise sum of tables of the same order."""
    tables = list(tables)
    if not tables:
        raise InputError("no tables to merge")
    n = tables[0].n
    contributions: Dict[NGramKey, List[float]] = {}
    for table in tables:
        if table.n != n:
            raise InputError(f"cannot merge {table.n}-gram table into {n}-gram table")
        for key, count in table.counts.items():
            contributions.setdefault(key, []).append(count)
    return NGramTable(n, {key: math.fsum(contributions[key]) for key in sorted(contributions)})


# ---------------------------------------------------------------------------
# Changing the object type
# ---------------------------------------------------------------------------


def _string_component(schema: Schema, object_type: str, component: str) -> Tuple[int, str]:
    typedef = schema.resolve(object_type)
    if not isinstance(typedef, Composite):
        raise SchemaError(f"object type {object_type} is not composite")
    index = typedef.index_of(component)
    if index is None:
        raise SchemaError(f"{object_type} has no component '{component}'")
    component_def = schema.resolve(typedef.components[index].type_ref)
    if not isinstance(component_def, StringOf):
        raise SchemaError(f"component {object_type}.{component} is not a string")
    return index, component_def.element


def _elements(value: Value, index: int) -> Tuple[Value, ...]:
    assert isinstance(value, CompositeValue)
    string = value.components[index]
    assert isinstance(string, StringValue)
    return string.elements


def unfold_corpus(corpus: TokenStreamCorpus, component: str) -> TokenStreamCorpus:
    """
    Re-express a corpus one level down: each object is replaced by the
    elements of its string component (e.g. words -> syllables).
    """
    index, element_type = _string_component(corpus.schema, corpus.object_type, component)
    utterances = tuple(
        tuple(element for value in utterance for element in _elements(value, index))
        for utterance in corpus.utterances
    )
    return TokenStreamCorpus(corpus.schema, element_type, utterances)


def unfold_lexicon(lexicon: WeightedLexicon, component: str) -> WeightedLexicon:
    """
    Element distribution of a lexicon: every element occurrence contributes
    the weight of the entry it occurs in.
    """
    index, element_type = _string_component(lexicon.schema, lexicon.object_type, component)
    contributions: Dict[Value, List[float]] = {}
    for value, weight in lexicon.entries.items():
        for element in _elements(value, index):
            contributions.setdefault(element, []).append(weight)
    entries = {element: math.fsum(weights) for element, weights in contributions.items()}
    return WeightedLexicon(lexicon.schema, element_type, entries)


def token_frequencies(
    source: Union[TokenStreamCorpus, WeightedLexicon],
    atomic_type: str,
) -> Dict[str, float]:
    """
    Occurrence counts of every token of ``atomic_type`` in a corpus or
    lexicon (lexicon occurrences are weighted by the entry weight).
    Tokens of the inventory that never occur are reported with count 0.
    """
    atomic = source.schema.atomic(atomic_type)
    contributions: Dict[str, List[float]] = {token: [] for token in atomic.inventory}

    if isinstance(source, WeightedLexicon):
        weighted: Iterable[Tuple[Value, float]] = source.entries.items()
    else:
        weighted = ((value, 1.0) for value in source.values())

    for value, weight in weighted:
        for token in atomic_tokens(source.schema, source.object_type, value, atomic_type):
            contributions.setdefault(token, []).append(weight)

    return {token: math.fsum(weights) for token, weights in contributions.items()}

