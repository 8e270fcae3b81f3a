"""
Functional Load Toolkit
Contrast Module

A contrast is a deterministic object-to-object map. Two values are
indistinguishable in the contrast's absence iff the map sends them to the
same image. Maps are built from an ordered list of rules:

- Relabel: merge tokens of an atomic type into class labels (``b+c``),
  optionally only where a guard holds
- Insert: insert a token between adjacent (after, before) elements of a
  host string
- Delete: remove guarded occurrences of a token from a host string

Contrast file format, one rule per line (``#`` comments)::

    partition phn : {b c} {p t} [when <guard>]
    insert t in syl.phones after n before {s z}
    delete j in syl.phones [when <guard>]

Guards are ``&``-joined terms: ``comp=<token>``, ``string-initial``,
``string-final``, ``outermost-initial``, ``left-in {..}``, ``right-in {..}``.
Positional guards look at the strings inside a value, never at its
neighbours in the utterance, so when the corpus object type is itself
atomic they never hold.
"""

import itertools
import logging
import math
import re
from dataclasses import dataclass, field
from typing import Dict, FrozenSet, Iterable, List, Optional, Sequence, Tuple, Union

from .corpus import TokenStreamCorpus, WeightedLexicon
from .errors import ContrastApplicationError, ContrastError, InputError, SchemaError
from .schema import (
    IDENTIFIER,
    Atomic,
    AtomicValue,
    Composite,
    CompositeValue,
    Schema,
    StringOf,
    StringValue,
    Value,
    extend_inventory,
    is_valid_token,
    strip_comment,
)

logger = logging.getLogger(__name__)


LABEL_SEPARATOR = "+"


def class_label(members: Iterable[str]) -> str:
    """Canonical label of a merged class: sorted members joined by ``+``."""
    return LABEL_SEPARATOR.join(sorted(members))


@dataclass(frozen=True)
class Partition:
    """
    Partition of an atomic inventory. Only non-singleton classes are listed;
    every unlisted token is its own class.
    """

    atomic_type: str
    classes: Tuple[FrozenSet[str], ...]

    @property
    def mapping(self) -> Dict[str, str]:
        """Token -> class label, for listed tokens only."""
        result = {}
        for members in self.classes:
            label = class_label(members)
            for token in members:
                result[token] = label
        return result

    @property
    def labels(self) -> List[str]:
        return [class_label(members) for members in self.classes]

    def __str__(self) -> str:
        groups = " ".join("{" + " ".join(sorted(members)) + "}" for members in self.classes)
        return f"{self.atomic_type} : {groups}"


# ---------------------------------------------------------------------------
# Guards
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class _Frame:
    """One enclosing container of the position being rewritten."""

    container: Union[Composite, StringOf]
    value: Value
    index: int


Frames = Tuple[_Frame, ...]


def _innermost_string(frames: Frames) -> Optional[_Frame]:
    for frame in reversed(frames):
        if isinstance(frame.container, StringOf):
            return frame
    return None


@dataclass(frozen=True)
class SiblingEquals:
    """The nearest enclosing composite with component ``component`` has value ``token`` there."""

    component: str
    token: str

    def holds(self, frames: Frames) -> bool:
        for frame in reversed(frames):
            if isinstance(frame.container, Composite):
                index = frame.container.index_of(self.component)
                if index is not None:
                    assert isinstance(frame.value, CompositeValue)
                    return frame.value.components[index].canonical == self.token
        return False

    def __str__(self) -> str:
        return f"{self.component}={self.token}"


@dataclass(frozen=True)
class StringInitial:
    """First element of the innermost enclosing string."""

    def holds(self, frames: Frames) -> bool:
        frame = _innermost_string(frames)
        return frame is not None and frame.index == 0

    def __str__(self) -> str:
        return "string-initial"


@dataclass(frozen=True)
class StringFinal:
    """Last element of the innermost enclosing string."""

    def holds(self, frames: Frames) -> bool:
        frame = _innermost_string(frames)
        if frame is None:
            return False
        assert isinstance(frame.value, StringValue)
        return frame.index == len(frame.value.elements) - 1

    def __str__(self) -> str:
        return "string-final"


@dataclass(frozen=True)
class LeftNeighborIn:
    tokens: FrozenSet[str]

    def holds(self, frames: Frames) -> bool:
        frame = _innermost_string(frames)
        if frame is None or frame.index == 0:
            return False
        assert isinstance(frame.value, StringValue)
        return frame.value.elements[frame.index - 1].canonical in self.tokens

    def __str__(self) -> str:
        return "left-in {" + " ".join(sorted(self.tokens)) + "}"


@dataclass(frozen=True)
class RightNeighborIn:
    tokens: FrozenSet[str]

    def holds(self, frames: Frames) -> bool:
        frame = _innermost_string(frames)
        if frame is None:
            return False
        assert isinstance(frame.value, StringValue)
        following = frame.index + 1
        return following < len(frame.value.elements) and frame.value.elements[following].canonical in self.tokens

    def __str__(self) -> str:
        return "right-in {" + " ".join(sorted(self.tokens)) + "}"


@dataclass(frozen=True)
class OutermostInitial:
    """Initial at every string level, e.g. the first phoneme of a word."""

    def holds(self, frames: Frames) -> bool:
        strings = [frame for frame in frames if isinstance(frame.container, StringOf)]
        return bool(strings) and all(frame.index == 0 for frame in strings)

    def __str__(self) -> str:
        return "outermost-initial"


Predicate = Union[SiblingEquals, StringInitial, StringFinal, LeftNeighborIn, RightNeighborIn, OutermostInitial]


@dataclass(frozen=True)
class Guard:
    """Conjunction of predicates; the empty guard always holds."""

    predicates: Tuple[Predicate, ...] = ()

    def holds(self, frames: Frames) -> bool:
        return all(predicate.holds(frames) for predicate in self.predicates)

    def __bool__(self) -> bool:
        return bool(self.predicates)

    def __str__(self) -> str:
        return " & ".join(str(p) for p in self.predicates)


# ---------------------------------------------------------------------------
# Rules
# ---------------------------------------------------------------------------


def _when(guard: Guard) -> str:
    return f" when {guard}" if guard else ""


def _token_set(tokens: FrozenSet[str]) -> str:
    if len(tokens) == 1:
        return next(iter(tokens))
    return "{" + " ".join(sorted(tokens)) + "}"


@dataclass(frozen=True)
class Relabel:
    partition: Partition
    guard: Guard = field(default_factory=Guard)

    def __str__(self) -> str:
        return f"partition {self.partition}{_when(self.guard)}"


@dataclass(frozen=True)
class Insert:
    token: str
    host_type: str
    component: str
    after: FrozenSet[str]
    before: FrozenSet[str]

    def __str__(self) -> str:
        return (
            f"insert {self.token} in {self.host_type}.{self.component} "
            f"after {_token_set(self.after)} before {_token_set(self.before)}"
        )

    def rewrite(self, string: StringValue, container: StringOf, frames: Frames, path: Tuple[int, ...]) -> StringValue:
        elements = string.elements
        result: List[Value] = []
        for index, element in enumerate(elements):
            result.append(element)
            following = index + 1
            if (
                following < len(elements)
                and element.canonical in self.after
                and elements[following].canonical in self.before
            ):
                result.append(AtomicValue(self.token))
        return StringValue(result) if len(result) != len(elements) else string


@dataclass(frozen=True)
class Delete:
    token: str
    host_type: str
    component: str
    guard: Guard = field(default_factory=Guard)

    def __str__(self) -> str:
        return f"delete {self.token} in {self.host_type}.{self.component}{_when(self.guard)}"

    def rewrite(self, string: StringValue, container: StringOf, frames: Frames, path: Tuple[int, ...]) -> StringValue:
        positions = [
            index
            for index, element in enumerate(string.elements)
            if element.canonical == self.token
            and self.guard.holds(frames + (_Frame(container, string, index),))
        ]
        if not positions:
            return string
        if len(positions) == len(string.elements):
            raise ContrastApplicationError(
                f"deleting '{self.token}' would empty {self.host_type}.{self.component}", path
            )
        result = list(string.elements)
        for index in reversed(positions):
            del result[index]
        return StringValue(result)


Rule = Union[Relabel, Insert, Delete]


@dataclass(frozen=True)
class ContrastSpec:
    """
    Ordered rules over one object type.

    ``image`` is the schema of mapped values: the source schema with every
    class label added to its atomic inventory.
    """

    schema: Schema
    object_type: str
    rules: Tuple[Rule, ...] = ()
    image: Optional[Schema] = None
    name: Optional[str] = None

    def __post_init__(self) -> None:
        if self.image is None:
            object.__setattr__(self, "image", self.schema)

    @property
    def is_identity(self) -> bool:
        return not self.rules

    @property
    def contrast_id(self) -> str:
        if self.name:
            return self.name
        if not self.rules:
            return "identity"
        return "; ".join(str(rule) for rule in self.rules)

    def serialize(self) -> str:
        return "".join(f"{rule}\n" for rule in self.rules)

    def with_name(self, name: Optional[str]) -> "ContrastSpec":
        return ContrastSpec(self.schema, self.object_type, self.rules, self.image, name)


# ---------------------------------------------------------------------------
# Validation against the running image schema
# ---------------------------------------------------------------------------


class _RuleChecker:
    """Validates rules in order while growing the image schema."""

    def __init__(self, schema: Schema, object_type: str, line: Optional[int] = None, source: Optional[str] = None):
        if not schema.is_defined(object_type):
            raise ContrastError(f"undefined object type: {object_type}", line=line, source=source)
        self.schema = schema
        self.object_type = object_type
        self.line = line
        self.source = source
        self.reserved = {token for typedef in schema.typedefs.values() if isinstance(typedef, Atomic) for token in typedef.inventory}

    def error(self, message: str) -> ContrastError:
        return ContrastError(message, line=self.line, source=self.source)

    def _known_token(self, token: str) -> bool:
        return any(
            token in typedef.inventory for typedef in self.schema.typedefs.values() if isinstance(typedef, Atomic)
        )

    def _reachable(self, type_name: str) -> bool:
        return type_name in self.schema.reachable(self.object_type)

    def check_guard(self, guard: Guard) -> None:
        for predicate in guard.predicates:
            if isinstance(predicate, SiblingEquals):
                candidates = [
                    self.schema.resolve(component.type_ref)
                    for _, composite in self.schema.composites()
                    for component in composite.components
                    if component.name == predicate.component
                ]
                if not candidates:
                    raise self.error(f"no composite has a component named '{predicate.component}'")
                if not any(isinstance(c, Atomic) and predicate.token in c for c in candidates):
                    raise self.error(f"'{predicate.token}' is not a value of component '{predicate.component}'")
            elif isinstance(predicate, (LeftNeighborIn, RightNeighborIn)):
                for token in sorted(predicate.tokens):
                    if not self._known_token(token):
                        raise self.error(f"unknown token '{token}' in guard")

    def check_relabel(self, rule: Relabel) -> None:
        partition = rule.partition
        try:
            atomic = self.schema.atomic(partition.atomic_type)
        except SchemaError as e:
            raise self.error(e.message) from None
        if not self._reachable(partition.atomic_type):
            raise self.error(f"type {partition.atomic_type} does not occur in {self.object_type}")

        owner: Dict[str, FrozenSet[str]] = {}
        for members in partition.classes:
            if len(members) < 2:
                raise self.error(f"partition class {{{' '.join(sorted(members))}}} needs at least 2 members")
            for token in sorted(members):
                if token not in atomic:
                    raise self.error(f"token '{token}' not in inventory of {partition.atomic_type}")
                if token in owner:
                    raise self.error(
                        f"overlapping partition classes: '{token}' in "
                        f"{{{' '.join(sorted(owner[token]))}}} and {{{' '.join(sorted(members))}}}"
                    )
                owner[token] = members
            label = class_label(members)
            if label in self.reserved and label not in members:
                raise self.error(f"class label '{label}' collides with an inventory token")
        self.check_guard(rule.guard)
        self.schema = extend_inventory(self.schema, partition.atomic_type, partition.labels)

    def _host_element(self, host_type: str, component: str) -> Atomic:
        typedef = self.schema.typedefs.get(host_type)
        if not isinstance(typedef, Composite):
            raise self.error(f"host type {host_type} is not a composite type")
        if not self._reachable(host_type):
            raise self.error(f"type {host_type} does not occur in {self.object_type}")
        index = typedef.index_of(component)
        if index is None:
            raise self.error(f"{host_type} has no component '{component}'")
        string = self.schema.resolve(typedef.components[index].type_ref)
        if not isinstance(string, StringOf):
            raise self.error(f"{host_type}.{component} is not a string")
        element = self.schema.resolve(string.element)
        if not isinstance(element, Atomic):
            raise self.error(f"elements of {host_type}.{component} are not atomic")
        return element

    def check_insert(self, rule: Insert) -> None:
        element = self._host_element(rule.host_type, rule.component)
        for token in [rule.token] + sorted(rule.after) + sorted(rule.before):
            if token not in element:
                raise self.error(f"token '{token}' not in element inventory of {rule.host_type}.{rule.component}")

    def check_delete(self, rule: Delete) -> None:
        element = self._host_element(rule.host_type, rule.component)
        if rule.token not in element:
            raise self.error(f"token '{rule.token}' not in element inventory of {rule.host_type}.{rule.component}")
        self.check_guard(rule.guard)

    def check(self, rule: Rule) -> None:
        if isinstance(rule, Relabel):
            self.check_relabel(rule)
        elif isinstance(rule, Insert):
            self.check_insert(rule)
        else:
            self.check_delete(rule)


# ---------------------------------------------------------------------------
# Contrast files
# ---------------------------------------------------------------------------


_PARTITION_LINE = re.compile(r"^partition\s+(\S+)\s*:(.*?)(?:\s+when\s+(.*))?$")
_INSERT_LINE = re.compile(
    r"^insert\s+(\S+)\s+in\s+(\S+)\.(\S+)\s+after\s+(\{[^{}]*\}|[^\s{}]+)\s+before\s+(\{[^{}]*\}|[^\s{}]+)$"
)
_DELETE_LINE = re.compile(r"^delete\s+(\S+)\s+in\s+(\S+)\.(\S+?)(?:\s+when\s+(.*))?$")
_SET = re.compile(r"\{([^{}]*)\}")
_SIBLING = re.compile(r"^(\S+?)\s*=\s*(\S+)$")
_NEIGHBOR = re.compile(r"^(left-in|right-in)\s+\{([^{}]*)\}$")

_FLAGS = {
    "string-initial": StringInitial(),
    "string-final": StringFinal(),
    "outermost-initial": OutermostInitial(),
}


def _parse_set(text: str, error: ContrastError) -> FrozenSet[str]:
    text = text.strip()
    match = _SET.fullmatch(text)
    tokens = match.group(1).split() if match else [text]
    if not tokens or not all(is_valid_token(t) for t in tokens):
        raise error
    return frozenset(tokens)


def parse_guard(text: str, line: Optional[int] = None, source: Optional[str] = None) -> Guard:
    """Parse an ``&``-joined guard expression."""
    predicates: List[Predicate] = []
    for term in text.split("&"):
        term = term.strip()
        if term in _FLAGS:
            predicates.append(_FLAGS[term])
            continue
        neighbor = _NEIGHBOR.match(term)
        if neighbor:
            tokens = frozenset(neighbor.group(2).split())
            if not tokens:
                raise ContrastError(f"empty token set in guard term '{term}'", line=line, source=source)
            kind = LeftNeighborIn if neighbor.group(1) == "left-in" else RightNeighborIn
            predicates.append(kind(tokens))
            continue
        sibling = _SIBLING.match(term)
        if sibling and IDENTIFIER.match(sibling.group(1)) and is_valid_token(sibling.group(2)):
            predicates.append(SiblingEquals(sibling.group(1), sibling.group(2)))
            continue
        raise ContrastError(f"malformed guard term '{term}'", line=line, source=source)
    return Guard(tuple(predicates))


def _parse_classes(text: str, line: int, source: Optional[str], offset: int) -> Tuple[FrozenSet[str], ...]:
    classes = []
    position = 0
    for match in _SET.finditer(text):
        if text[position:match.start()].strip():
            raise ContrastError("expected '{' to open a partition class", line=line, column=offset + position + 1, source=source)
        tokens = match.group(1).split()
        for token in tokens:
            if not is_valid_token(token):
                raise ContrastError(f"invalid token '{token}'", line=line, column=offset + match.start() + 1, source=source)
        if len(set(tokens)) != len(tokens):
            raise ContrastError(
                f"duplicate token in partition class {{{match.group(1).strip()}}}",
                line=line,
                column=offset + match.start() + 1,
                source=source,
            )
        classes.append(frozenset(tokens))
        position = match.end()
    if text[position:].strip():
        raise ContrastError("unbalanced or stray text after partition classes", line=line, column=offset + position + 1, source=source)
    if not classes:
        raise ContrastError("partition lists no classes", line=line, source=source)
    return tuple(classes)


def _parse_rule(line_text: str, line: int, source: Optional[str]) -> Rule:
    match = _PARTITION_LINE.match(line_text)
    if match:
        offset = match.start(2)
        classes = _parse_classes(match.group(2), line, source, offset)
        guard = parse_guard(match.group(3), line, source) if match.group(3) else Guard()
        return Relabel(Partition(match.group(1), classes), guard)

    match = _INSERT_LINE.match(line_text)
    if match:
        token, host_type, component, after, before = match.groups()
        bad = ContrastError("malformed token set in insert rule", line=line, source=source)
        return Insert(token, host_type, component, _parse_set(after, bad), _parse_set(before, bad))

    match = _DELETE_LINE.match(line_text)
    if match:
        token, host_type, component, guard_text = match.groups()
        guard = parse_guard(guard_text, line, source) if guard_text else Guard()
        return Delete(token, host_type, component, guard)

    keyword = line_text.split()[0]
    if keyword in ("partition", "insert", "delete"):
        raise ContrastError(f"malformed {keyword} rule", line=line, column=1, source=source)
    raise ContrastError(f"unknown rule '{keyword}'", line=line, column=1, source=source)


def parse_contrast(
    text: str,
    schema: Schema,
    object_type: str,
    source: Optional[str] = None,
) -> ContrastSpec:
    """
    Parse a contrast file into a validated ContrastSpec.

    Args:
        text: Contrast file contents
        schema: Schema the contrast is written against
        object_type: Type of the objects the contrast maps
        source: File name used in error messages

    Returns:
        ContrastSpec with rules in file order (no rules = identity)

    Raises:
        ContrastError: Malformed rule, unknown token, type or component,
            overlapping classes, or malformed guard
    """
    checker = _RuleChecker(schema, object_type, source=source)
    rules: List[Rule] = []
    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line_text = strip_comment(raw_line)
        if not line_text:
            continue
        rule = _parse_rule(line_text, line_number, source)
        checker.line = line_number
        checker.check(rule)
        rules.append(rule)
        logger.debug(f"Contrast rule {len(rules)}: {rule}")

    return ContrastSpec(schema, object_type, tuple(rules), checker.schema)


def build_contrast(schema: Schema, object_type: str, rules: Sequence[Rule], name: Optional[str] = None) -> ContrastSpec:
    """Validate programmatically built rules into a ContrastSpec."""
    checker = _RuleChecker(schema, object_type)
    for rule in rules:
        checker.check(rule)
    return ContrastSpec(schema, object_type, tuple(rules), checker.schema, name)


def partition_contrast(
    schema: Schema,
    object_type: str,
    atomic_type: str,
    classes: Iterable[Iterable[str]],
    guard: Optional[Guard] = None,
    name: Optional[str] = None,
) -> ContrastSpec:
    """Single-rule contrast merging each of ``classes`` into one label."""
    partition = Partition(atomic_type, tuple(frozenset(members) for members in classes))
    return build_contrast(schema, object_type, [Relabel(partition, guard or Guard())], name)


def binary_oppositions(
    schema: Schema,
    atomic_type: str,
    subset: Iterable[str],
    object_type: Optional[str] = None,
    guard: Optional[Guard] = None,
) -> List[ContrastSpec]:
    """
    One pairwise merger per unordered pair of ``subset``, in lexicographic
    pair order.

    Raises:
        ContrastError: Fewer than two symbols, or a symbol not in the inventory
    """
    symbols = sorted(set(subset))
    atomic = schema.atomic(atomic_type)
    for token in symbols:
        if token not in atomic:
            raise ContrastError(f"token '{token}' not in inventory of {atomic_type}")
    if len(symbols) < 2:
        raise ContrastError("binary oppositions need at least 2 symbols")

    return [
        partition_contrast(schema, object_type or atomic_type, atomic_type, [(x, y)], guard, name=f"{x} {y}")
        for x, y in itertools.combinations(symbols, 2)
    ]


def image_schema(spec: ContrastSpec) -> Schema:
    """Schema of the values produced by ``spec``."""
    assert spec.image is not None
    return spec.image


def is_refinement(finer: Partition, coarser: Partition) -> bool:
    """True when every class of ``finer`` lies inside some class of ``coarser``."""
    if finer.atomic_type != coarser.atomic_type:
        return False
    return all(any(members <= other for other in coarser.classes) for members in finer.classes)


# ---------------------------------------------------------------------------
# Application
# ---------------------------------------------------------------------------


def _relabel(
    schema: Schema,
    type_ref: str,
    value: Value,
    frames: Frames,
    rule: Relabel,
    mapping: Dict[str, str],
) -> Value:
    typedef = schema.resolve(type_ref)
    if isinstance(typedef, Atomic):
        if type_ref == rule.partition.atomic_type:
            label = mapping.get(value.canonical)
            if label is not None and rule.guard.holds(frames):
                return AtomicValue(label)
        return value

    if isinstance(typedef, Composite):
        assert isinstance(value, CompositeValue)
        children = [
            _relabel(schema, component.type_ref, child, frames + (_Frame(typedef, value, index),), rule, mapping)
            for index, (component, child) in enumerate(zip(typedef.components, value.components))
        ]
        if all(new is old for new, old in zip(children, value.components)):
            return value
        return CompositeValue(children)

    assert isinstance(value, StringValue)
    elements = [
        _relabel(schema, typedef.element, element, frames + (_Frame(typedef, value, index),), rule, mapping)
        for index, element in enumerate(value.elements)
    ]
    if all(new is old for new, old in zip(elements, value.elements)):
        return value
    return StringValue(elements)


def _rewrite_hosts(
    schema: Schema,
    type_ref: str,
    value: Value,
    frames: Frames,
    path: Tuple[int, ...],
    rule: Union[Insert, Delete],
) -> Value:
    typedef = schema.resolve(type_ref)
    if isinstance(typedef, Atomic):
        return value

    if isinstance(typedef, Composite):
        assert isinstance(value, CompositeValue)
        children = []
        for index, (component, child) in enumerate(zip(typedef.components, value.components)):
            inner = frames + (_Frame(typedef, value, index),)
            if type_ref == rule.host_type and component.name == rule.component:
                assert isinstance(child, StringValue)
                host = schema.resolve(component.type_ref)
                assert isinstance(host, StringOf)
                children.append(rule.rewrite(child, host, inner, path + (index,)))
            else:
                children.append(_rewrite_hosts(schema, component.type_ref, child, inner, path + (index,), rule))
        if all(new is old for new, old in zip(children, value.components)):
            return value
        return CompositeValue(children)

    assert isinstance(value, StringValue)
    elements = [
        _rewrite_hosts(schema, typedef.element, element, frames + (_Frame(typedef, value, index),), path + (index,), rule)
        for index, element in enumerate(value.elements)
    ]
    if all(new is old for new, old in zip(elements, value.elements)):
        return value
    return StringValue(elements)


def apply_contrast(spec: ContrastSpec, value: Value) -> Value:
    """
    Map one value through every rule of ``spec`` in order.

    Each rule makes a single left-to-right pass; its guards see the value as
    it was before that pass.

    Raises:
        ContrastApplicationError: A deletion would leave a string empty
    """
    for rule in spec.rules:
        if isinstance(rule, Relabel):
            value = _relabel(spec.schema, spec.object_type, value, (), rule, rule.partition.mapping)
        else:
            value = _rewrite_hosts(spec.schema, spec.object_type, value, (), (), rule)
    return value


class _CachedMap:
    """apply_contrast memoized over distinct values."""

    def __init__(self, spec: ContrastSpec):
        self.spec = spec
        self.images: Dict[Value, Value] = {}

    def __call__(self, value: Value) -> Value:
        image = self.images.get(value)
        if image is None:
            image = apply_contrast(self.spec, value)
            self.images[value] = image
        return image


def apply_to_corpus(
    spec: ContrastSpec,
    corpus: Union[TokenStreamCorpus, WeightedLexicon],
) -> Union[TokenStreamCorpus, WeightedLexicon]:
    """
    Map every object of a corpus or lexicon through ``spec``.

    Lexicon entries that collide after mapping have their weights summed.
    """
    if corpus.object_type != spec.object_type:
        raise InputError(f"contrast is over {spec.object_type} but corpus holds {corpus.object_type}")
    image = image_schema(spec)
    mapped = _CachedMap(spec)

    if isinstance(corpus, WeightedLexicon):
        contributions: Dict[Value, List[float]] = {}
        for value in sorted(corpus.entries, key=lambda v: v.canonical):
            contributions.setdefault(mapped(value), []).append(corpus.entries[value])
        entries = {value: math.fsum(weights) for value, weights in contributions.items()}
        return WeightedLexicon(image, corpus.object_type, entries)

    utterances = []
    for u_index, utterance in enumerate(corpus.utterances):
        try:
            utterances.append(tuple(mapped(value) for value in utterance))
        except ContrastApplicationError as e:
            raise ContrastApplicationError(f"utterance {u_index + 1}: {e.message}", e.path) from e
    return TokenStreamCorpus(image, corpus.object_type, tuple(utterances))
