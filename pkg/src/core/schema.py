"""
Functional Load Toolkit
Schema Module

Type system for linguistic objects: atomic types with finite inventories,
composite types with a fixed list of named components, and string-of types
with a variable number of same-typed elements. Values are immutable trees
compared by their canonical serialization.
"""

import itertools
import logging
import re
from dataclasses import dataclass, field
from typing import Dict, Iterable, Iterator, List, Optional, Sequence, Tuple, Union

from .errors import ParseError, SchemaError, TypeViolationError, format_path

logger = logging.getLogger(__name__)


IDENTIFIER = re.compile(r"^[A-Za-z_][A-Za-z0-9_]*$")
STRING_REF = re.compile(r"^string<([A-Za-z_][A-Za-z0-9_]*)>$")
VALID_TOKEN = re.compile(r"^[^\s(){};]+$")

_SCHEMA_LINE = re.compile(r"^(atomic|composite)\s+(\S+)\s*=\s*(.*)$")
_VALUE_TOKEN = re.compile(r"\(|\)|;|[^\s(){};]+|\S")


def strip_comment(line: str) -> str:
    """Remove a ``#`` comment and surrounding whitespace from a line."""
    return line.split("#", 1)[0].strip()


def is_valid_token(token: str) -> bool:
    """Tokens are non-empty and free of whitespace and reserved characters."""
    return bool(VALID_TOKEN.match(token))


def string_ref(element: str) -> str:
    """Type reference for a string of ``element`` objects."""
    return f"string<{element}>"


# ---------------------------------------------------------------------------
# Type definitions
# ---------------------------------------------------------------------------


@dataclass(frozen=True)
class Atomic:
    """Atomic type with a finite, ordered, duplicate-free inventory."""

    inventory: Tuple[str, ...]

    def __contains__(self, token: object) -> bool:
        return token in self.inventory


@dataclass(frozen=True)
class Component:
    """Named component of a composite type."""

    name: str
    type_ref: str


@dataclass(frozen=True)
class Composite:
    """Composite type: a fixed, ordered list of components."""

    components: Tuple[Component, ...]

    @property
    def arity(self) -> int:
        return len(self.components)

    def index_of(self, name: str) -> Optional[int]:
        for index, component in enumerate(self.components):
            if component.name == name:
                return index
        return None


@dataclass(frozen=True)
class StringOf:
    """Variable-length sequence (at least one element) of one element type."""

    element: str


TypeDef = Union[Atomic, Composite, StringOf]


@dataclass(frozen=True)
class Schema:
    """
    Ordered collection of named type definitions.

    Type references are either a defined name or ``string<name>``; the
    latter resolves to an anonymous StringOf definition.
    """

    typedefs: Dict[str, TypeDef] = field(default_factory=dict)

    @property
    def type_names(self) -> List[str]:
        return list(self.typedefs)

    def is_defined(self, type_ref: str) -> bool:
        match = STRING_REF.match(type_ref)
        if match:
            return match.group(1) in self.typedefs
        return type_ref in self.typedefs

    def resolve(self, type_ref: str) -> TypeDef:
        """Return the definition behind a type reference."""
        match = STRING_REF.match(type_ref)
        if match:
            if match.group(1) not in self.typedefs:
                raise SchemaError(f"undefined type: {match.group(1)}")
            return StringOf(match.group(1))
        try:
            return self.typedefs[type_ref]
        except KeyError:
            raise SchemaError(f"undefined type: {type_ref}") from None

    def atomic(self, name: str) -> Atomic:
        """Return the atomic definition ``name`` or raise SchemaError."""
        typedef = self.resolve(name)
        if not isinstance(typedef, Atomic):
            raise SchemaError(f"type {name} is not atomic")
        return typedef

    def composites(self) -> Iterator[Tuple[str, Composite]]:
        for name, typedef in self.typedefs.items():
            if isinstance(typedef, Composite):
                yield name, typedef

    def reachable(self, type_ref: str) -> List[str]:
        """Named types reachable from ``type_ref`` (itself included), in DFS order."""
        seen: List[str] = []

        def visit(ref: str) -> None:
            match = STRING_REF.match(ref)
            name = match.group(1) if match else ref
            if name in seen:
                return
            seen.append(name)
            typedef = self.typedefs[name]
            if isinstance(typedef, Composite):
                for component in typedef.components:
                    visit(component.type_ref)

        visit(type_ref)
        return seen


def extend_inventory(schema: Schema, atomic_type: str, tokens: Iterable[str]) -> Schema:
    """Return a copy of ``schema`` whose atomic type also admits ``tokens``."""
    atomic = schema.atomic(atomic_type)
    inventory = list(atomic.inventory)
    for token in tokens:
        if token not in inventory:
            inventory.append(token)
    typedefs = dict(schema.typedefs)
    typedefs[atomic_type] = Atomic(tuple(inventory))
    return Schema(typedefs)


# ---------------------------------------------------------------------------
# Schema files
# ---------------------------------------------------------------------------


def _parse_type_ref(text: str, line: int, source: Optional[str]) -> str:
    if IDENTIFIER.match(text) or STRING_REF.match(text):
        return text
    raise SchemaError(f"malformed type reference '{text}'", line=line, source=source)


def parse_schema(text: str, source: Optional[str] = None) -> Schema:
    """
    Parse a schema document.

    Args:
        text: Schema file contents
        source: Optional file name used in error messages

    Returns:
        Validated Schema

    Raises:
        SchemaError: On syntax errors, duplicate or undefined types,
            cyclic references, empty inventories or duplicate members
    """
    typedefs: Dict[str, TypeDef] = {}
    defined_at: Dict[str, int] = {}

    for line_number, raw_line in enumerate(text.splitlines(), start=1):
        line = strip_comment(raw_line)
        if not line:
            continue

        match = _SCHEMA_LINE.match(line)
        if not match:
            raise SchemaError(
                "expected 'atomic <name> = ...' or 'composite <name> = ...'",
                line=line_number,
                source=source,
            )
        kind, name, body = match.groups()
        if not IDENTIFIER.match(name):
            raise SchemaError(f"invalid type name '{name}'", line=line_number, source=source)
        if name in typedefs:
            raise SchemaError(
                f"duplicate type name '{name}' (first defined on line {defined_at[name]})",
                line=line_number,
                source=source,
            )

        items = body.split()
        if kind == "atomic":
            if not items:
                raise SchemaError(f"empty inventory for '{name}'", line=line_number, source=source)
            for token in items:
                if not is_valid_token(token):
                    raise SchemaError(f"invalid token '{token}'", line=line_number, source=source)
            duplicates = sorted({t for t in items if items.count(t) > 1})
            if duplicates:
                raise SchemaError(
                    f"duplicate inventory members in '{name}': {' '.join(duplicates)}",
                    line=line_number,
                    source=source,
                )
            typedefs[name] = Atomic(tuple(items))
        else:
            if not items:
                raise SchemaError(f"composite '{name}' has no components", line=line_number, source=source)
            components = []
            for item in items:
                component_name, sep, type_text = item.partition(":")
                if not sep or not IDENTIFIER.match(component_name):
                    raise SchemaError(
                        f"malformed component '{item}' (expected name:type)",
                        line=line_number,
                        source=source,
                    )
                components.append(Component(component_name, _parse_type_ref(type_text, line_number, source)))
            names = [c.name for c in components]
            duplicates = sorted({n for n in names if names.count(n) > 1})
            if duplicates:
                raise SchemaError(
                    f"duplicate component names in '{name}': {' '.join(duplicates)}",
                    line=line_number,
                    source=source,
                )
            typedefs[name] = Composite(tuple(components))
        defined_at[name] = line_number

    schema = Schema(typedefs)
    _check_references(schema, defined_at, source)
    _check_cycles(schema, defined_at, source)
    logger.debug(f"Parsed schema with {len(typedefs)} types")
    return schema


def _check_references(schema: Schema, defined_at: Dict[str, int], source: Optional[str]) -> None:
    for name, composite in schema.composites():
        for component in composite.components:
            if not schema.is_defined(component.type_ref):
                raise SchemaError(
                    f"undefined type '{component.type_ref}' in component '{component.name}' of '{name}'",
                    line=defined_at.get(name),
                    source=source,
                )


def _referenced_names(composite: Composite) -> List[str]:
    names = []
    for component in composite.components:
        match = STRING_REF.match(component.type_ref)
        names.append(match.group(1) if match else component.type_ref)
    return names


def _check_cycles(schema: Schema, defined_at: Dict[str, int], source: Optional[str]) -> None:
    WHITE, GREY, BLACK = 0, 1, 2
    colour = {name: WHITE for name in schema.typedefs}

    def visit(name: str, stack: List[str]) -> None:
        colour[name] = GREY
        stack.append(name)
        typedef = schema.typedefs[name]
        if isinstance(typedef, Composite):
            for child in _referenced_names(typedef):
                if colour[child] == GREY:
                    cycle = stack[stack.index(child):] + [child]
                    raise SchemaError(
                        f"cyclic type reference: {' -> '.join(cycle)}",
                        line=defined_at.get(name),
                        source=source,
                    )
                if colour[child] == WHITE:
                    visit(child, stack)
        stack.pop()
        colour[name] = BLACK

    for name in schema.typedefs:
        if colour[name] == WHITE:
            visit(name, [])


def serialize_schema(schema: Schema) -> str:
    """Render a schema in the schema file format."""
    lines = []
    for name, typedef in schema.typedefs.items():
        if isinstance(typedef, Atomic):
            lines.append(f"atomic {name} = {' '.join(typedef.inventory)}")
        elif isinstance(typedef, Composite):
            parts = " ".join(f"{c.name}:{c.type_ref}" for c in typedef.components)
            lines.append(f"composite {name} = {parts}")
    return "\n".join(lines) + "\n"


# ---------------------------------------------------------------------------
# Values
# ---------------------------------------------------------------------------


class Value:
    """
    Base class for values. Equality and hashing follow the canonical
    serialization, so two values are equal iff they serialize identically.
    """

    __slots__ = ("_canonical",)

    @property
    def canonical(self) -> str:
        return self._canonical  # type: ignore[attr-defined]

    def __eq__(self, other: object) -> bool:
        if not isinstance(other, Value):
            return NotImplemented
        return self.canonical == other.canonical

    def __hash__(self) -> int:
        return hash(self.canonical)

    def __str__(self) -> str:
        return self.canonical

    def __reduce__(self) -> Tuple[type, Tuple[object]]:
        return (type(self), (self._payload(),))

    def _payload(self) -> object:
        raise NotImplementedError


class AtomicValue(Value):
    """A single inventory token."""

    __slots__ = ("token",)

    def __init__(self, token: str):
        object.__setattr__(self, "token", token)
        object.__setattr__(self, "_canonical", token)

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("values are immutable")

    def __repr__(self) -> str:
        return f"AtomicValue({self.token!r})"

    def _payload(self) -> str:
        return self.token


class CompositeValue(Value):
    """Ordered tuple of component values."""

    __slots__ = ("components",)

    def __init__(self, components: Sequence[Value]):
        components = tuple(components)
        object.__setattr__(self, "components", components)
        object.__setattr__(self, "_canonical", "(" + " ; ".join(c.canonical for c in components) + ")")

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("values are immutable")

    def __repr__(self) -> str:
        return f"CompositeValue({list(self.components)!r})"

    def _payload(self) -> Tuple[Value, ...]:
        return self.components


class StringValue(Value):
    """Non-empty ordered sequence of same-typed element values."""

    __slots__ = ("elements",)

    def __init__(self, elements: Sequence[Value]):
        elements = tuple(elements)
        object.__setattr__(self, "elements", elements)
        object.__setattr__(self, "_canonical", " ".join(e.canonical for e in elements))

    def __setattr__(self, name: str, value: object) -> None:
        raise AttributeError("values are immutable")

    def __repr__(self) -> str:
        return f"StringValue({list(self.elements)!r})"

    def _payload(self) -> Tuple[Value, ...]:
        return self.elements


def serialize_value(value: Value) -> str:
    """Canonical serialization of a value."""
    return value.canonical


@dataclass(frozen=True)
class Violation:
    """A single well-typedness failure located by its component path."""

    path: Tuple[int, ...]
    rule: str

    def __str__(self) -> str:
        return f"{format_path(self.path)}: {self.rule}"


def validate_value(schema: Schema, type_name: str, value: Value) -> List[Violation]:
    """
    Check a value against a schema type.

    Returns:
        Empty list when the value is well-typed, otherwise one Violation per
        failed rule

    Raises:
        SchemaError: If ``type_name`` is not defined in the schema
    """
    schema.resolve(type_name)
    violations: List[Violation] = []
    _validate(schema, type_name, value, (), violations)
    return violations


def _validate(
    schema: Schema,
    type_ref: str,
    value: Value,
    path: Tuple[int, ...],
    violations: List[Violation],
) -> None:
    typedef = schema.resolve(type_ref)

    if isinstance(typedef, Atomic):
        if not isinstance(value, AtomicValue):
            violations.append(Violation(path, f"expected atomic {type_ref} token"))
        elif value.token not in typedef.inventory:
            violations.append(Violation(path, f"token not in inventory: '{value.token}' ({type_ref})"))
    elif isinstance(typedef, Composite):
        if not isinstance(value, CompositeValue):
            violations.append(Violation(path, f"expected composite {type_ref}"))
        elif len(value.components) != typedef.arity:
            violations.append(
                Violation(path, f"arity mismatch: {type_ref} has {typedef.arity} components, got {len(value.components)}")
            )
        else:
            for index, (component, child) in enumerate(zip(typedef.components, value.components)):
                _validate(schema, component.type_ref, child, path + (index,), violations)
    else:
        if not isinstance(value, StringValue):
            violations.append(Violation(path, f"expected string of {typedef.element}"))
        elif not value.elements:
            violations.append(Violation(path, "empty string"))
        else:
            for index, element in enumerate(value.elements):
                _validate(schema, typedef.element, element, path + (index,), violations)


def atomic_tokens(schema: Schema, type_ref: str, value: Value, atomic_type: str) -> Iterator[str]:
    """Yield, in document order, every token of ``atomic_type`` inside ``value``."""
    typedef = schema.resolve(type_ref)
    if isinstance(typedef, Atomic):
        if type_ref == atomic_type and isinstance(value, AtomicValue):
            yield value.token
    elif isinstance(typedef, Composite) and isinstance(value, CompositeValue):
        for component, child in zip(typedef.components, value.components):
            yield from atomic_tokens(schema, component.type_ref, child, atomic_type)
    elif isinstance(typedef, StringOf) and isinstance(value, StringValue):
        for element in value.elements:
            yield from atomic_tokens(schema, typedef.element, element, atomic_type)


def enumerate_values(schema: Schema, type_name: str) -> Iterator[Value]:
    """
    Yield every well-typed value of a finite type, in cartesian-product order.

    Raises:
        SchemaError: If the type (or one of its components) is a string type
    """
    typedef = schema.resolve(type_name)
    if isinstance(typedef, Atomic):
        for token in typedef.inventory:
            yield AtomicValue(token)
    elif isinstance(typedef, Composite):
        pools = [list(enumerate_values(schema, c.type_ref)) for c in typedef.components]
        for combination in itertools.product(*pools):
            yield CompositeValue(combination)
    else:
        raise SchemaError(f"type {type_name} has infinitely many values")


# ---------------------------------------------------------------------------
# Value serialization parsing
# ---------------------------------------------------------------------------


class _ValueParser:
    """Type-directed recursive-descent parser over canonical serializations."""

    def __init__(self, schema: Schema, text: str, line: Optional[int], source: Optional[str]):
        self.schema = schema
        self.line = line
        self.source = source
        self.tokens: List[Tuple[str, int]] = []
        for match in _VALUE_TOKEN.finditer(text):
            lexeme = match.group(0)
            if lexeme in ("{", "}"):
                self._fail(f"reserved character '{lexeme}'", match.start() + 1)
            self.tokens.append((lexeme, match.start() + 1))
        self.pos = 0
        self.end_column = len(text) + 1

    def _fail(self, message: str, column: Optional[int] = None) -> None:
        raise ParseError(message, line=self.line, column=column, source=self.source)

    def peek(self) -> Optional[str]:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][0]
        return None

    def column(self) -> int:
        if self.pos < len(self.tokens):
            return self.tokens[self.pos][1]
        return self.end_column

    def at_end(self) -> bool:
        return self.pos >= len(self.tokens)

    def expect(self, lexeme: str) -> None:
        if self.peek() != lexeme:
            found = self.peek() or "end of line"
            self._fail(f"expected '{lexeme}', found '{found}'", self.column())
        self.pos += 1

    def parse(self, type_ref: str) -> Value:
        typedef = self.schema.resolve(type_ref)
        if isinstance(typedef, Atomic):
            return self._parse_atomic(type_ref)
        if isinstance(typedef, Composite):
            return self._parse_composite(type_ref, typedef)
        return self._parse_string(typedef)

    def _parse_atomic(self, type_ref: str) -> AtomicValue:
        lexeme = self.peek()
        if lexeme is None or lexeme in ("(", ")", ";"):
            self._fail(f"expected {type_ref} token, found '{lexeme or 'end of line'}'", self.column())
        self.pos += 1
        return AtomicValue(lexeme)  # type: ignore[arg-type]

    def _parse_composite(self, type_ref: str, typedef: Composite) -> CompositeValue:
        self.expect("(")
        components = []
        for index, component in enumerate(typedef.components):
            if index > 0:
                if self.peek() == ")":
                    self._fail(f"{type_ref} expects {typedef.arity} components, found {index}", self.column())
                self.expect(";")
            components.append(self.parse(component.type_ref))
        if self.peek() == ";":
            self._fail(f"{type_ref} expects {typedef.arity} components, found more", self.column())
        self.expect(")")
        return CompositeValue(components)

    def _parse_string(self, typedef: StringOf) -> StringValue:
        element_def = self.schema.resolve(typedef.element)
        elements = []
        while True:
            lexeme = self.peek()
            if lexeme is None or lexeme in (")", ";"):
                break
            if isinstance(element_def, Composite) and lexeme != "(":
                break
            if isinstance(element_def, Atomic) and lexeme == "(":
                break
            elements.append(self.parse(typedef.element))
        if not elements:
            self._fail(f"empty string of {typedef.element}", self.column())
        return StringValue(elements)


def _raise_violations(schema: Schema, type_ref: str, value: Value, line: Optional[int]) -> None:
    violations = validate_value(schema, type_ref, value)
    if violations:
        raise TypeViolationError(violations, line=line)


def parse_value(
    text: str,
    schema: Schema,
    type_name: str,
    line: Optional[int] = None,
    source: Optional[str] = None,
) -> Value:
    """Parse one canonical serialization and check it against ``type_name``."""
    parser = _ValueParser(schema, text, line, source)
    value = parser.parse(type_name)
    if not parser.at_end():
        raise ParseError(f"unexpected '{parser.peek()}'", line=line, column=parser.column(), source=source)
    _raise_violations(schema, type_name, value, line)
    return value


def parse_value_sequence(
    text: str,
    schema: Schema,
    type_name: str,
    line: Optional[int] = None,
    source: Optional[str] = None,
) -> List[Value]:
    """
    Parse a whitespace-separated sequence of serializations of ``type_name``.

    String-of object types are rejected: a sequence of strings has no
    unambiguous boundaries in the canonical serialization.
    """
    if isinstance(schema.resolve(type_name), StringOf):
        raise SchemaError(f"object type {type_name} is a string type; wrap it in a composite", line=line, source=source)
    parser = _ValueParser(schema, text, line, source)
    values = []
    while not parser.at_end():
        values.append(parser.parse(type_name))
    for value in values:
        _raise_violations(schema, type_name, value, line)
    return values
