"""Rule language: literals, rules, rule bases, the parser for rule files and the
canonical form used to compare rule bases.

Grammar of a single rule (keywords are case-insensitive, things are case-sensitive)::

    rule  := "if" lit ("," lit | "and" lit)* ("unless" "(" plit ("and" plit)* ")")*
             "then" lit
    lit   := ["not"] TOKEN
    plit  := TOKEN

A rule file holds one rule per line. ``#`` starts a comment that runs to the end of the
line; blank lines are ignored.
"""

import re
from dataclasses import dataclass, field
from enum import Enum

from typing import (
    Iterable,
    Iterator,
    List,
    NoReturn,
    Optional,
    Sequence,
    Set,
    Tuple,
    Union,
    overload,
)

from noxlogic.network import KEYWORDS, InvalidThingError, validate_thing


class EncodingPolicy(Enum):
    """How the builder encodes negative body literals.

    ``AS_INHIBITOR`` blocks the rule while the thing is known True (the XOR device).
    ``AS_TERMINAL`` requires the thing to be known False (the negative link device).
    """

    AS_INHIBITOR = "inhibitor"
    AS_TERMINAL = "terminal"


DEFAULT_POLICY = EncodingPolicy.AS_INHIBITOR


class RuleError(ValueError):
    """Base class for rule errors. ``line`` and ``column`` are 1-based when known."""

    def __init__(
        self, message: str, line: Optional[int] = None, column: Optional[int] = None
    ) -> None:
        self.message = message
        self.line = line
        self.column = column
        location = ""
        if line is not None:
            location = f"line {line}"
            if column is not None:
                location += f", column {column}"
            location += ": "
        super().__init__(location + message)


class RuleSyntaxError(RuleError):
    """Raised when rule text does not match the grammar."""


class InvalidRuleError(RuleError):
    """Raised for rules that parse but break a rule invariant."""


@dataclass(frozen=True)
class Literal:
    thing: str
    negated: bool = False

    def __post_init__(self) -> None:
        try:
            validate_thing(self.thing)
        except InvalidThingError as e:
            raise InvalidRuleError(str(e)) from e

    def sort_key(self) -> Tuple[str, bool]:
        return (self.thing, self.negated)

    def __str__(self) -> str:
        return f"not {self.thing}" if self.negated else self.thing


@dataclass(frozen=True)
class Rule:
    """An if-then rule with optional exceptions.

    Attributes:
        body (Tuple[Literal, ...]): Conditions, all of which must hold.
        head (Literal): Conclusion. A negated head concludes the thing is False.
        unless (Tuple[Tuple[str, ...], ...]): Exception clauses. The rule is blocked
            while every thing of any one clause is True.
    """

    body: Tuple[Literal, ...]
    head: Literal
    unless: Tuple[Tuple[str, ...], ...] = field(default=())

    def __post_init__(self) -> None:
        object.__setattr__(self, "body", tuple(self.body))
        object.__setattr__(self, "unless", tuple(tuple(c) for c in self.unless))

        if not self.body:
            raise InvalidRuleError("A rule needs at least one body literal")
        things = [lit.thing for lit in self.body]
        if len(set(things)) != len(things):
            raise InvalidRuleError(f"Thing repeated in the body of {self}")
        if self.head.thing in things:
            raise InvalidRuleError(f"Head {self.head.thing!r} also appears in the body")

        for clause in self.unless:
            if not clause:
                raise InvalidRuleError("An unless-clause needs at least one thing")
            if len(set(clause)) != len(clause):
                raise InvalidRuleError(f"Thing repeated in unless-clause {clause}")
            for thing in clause:
                Literal(thing)

    @property
    def things(self) -> List[str]:
        """Every thing mentioned by the rule, in order of first appearance."""
        seen: List[str] = []
        for thing in (
            *(lit.thing for lit in self.body),
            *(t for clause in self.unless for t in clause),
            self.head.thing,
        ):
            if thing not in seen:
                seen.append(thing)
        return seen

    @property
    def has_positive_body(self) -> bool:
        return any(not lit.negated for lit in self.body)

    def __str__(self) -> str:
        return format_rule(self)


def _rule_key(rule: Rule) -> Tuple:
    return (
        rule.head.sort_key(),
        tuple(lit.sort_key() for lit in rule.body),
        rule.unless,
    )


def _identity_key(rule: Rule) -> Tuple:
    return (
        rule.head,
        frozenset(rule.body),
        frozenset(frozenset(clause) for clause in rule.unless),
    )


class RuleBase(Sequence[Rule]):
    """Ordered collection of rules without repeats.

    Rules that differ only in the order of their literals or clauses count as repeats;
    adding one of them again leaves the rule base unchanged.
    """

    def __init__(self, rules: Optional[Iterable[Rule]] = None) -> None:
        self._rules: List[Rule] = []
        self._keys: Set[Tuple] = set()
        if rules is None:
            return
        for rule in rules:
            self.add(rule)

    def add(self, rule: Rule) -> bool:
        """Appends ``rule`` unless an equal rule is present. ``True`` if added."""
        key = _identity_key(rule)
        if key in self._keys:
            return False
        self._keys.add(key)
        self._rules.append(rule)
        return True

    @overload
    def __getitem__(self, index: int) -> Rule:
        ...

    @overload
    def __getitem__(self, index: slice) -> "RuleBase":
        ...

    def __getitem__(self, index: Union[int, slice]) -> Union[Rule, "RuleBase"]:
        if isinstance(index, slice):
            return RuleBase(self._rules[index])
        return self._rules[index]

    def __len__(self) -> int:
        return len(self._rules)

    def __iter__(self) -> Iterator[Rule]:
        return iter(self._rules)

    def __eq__(self, other: object) -> bool:
        if isinstance(other, RuleBase):
            return self._rules == other._rules
        return NotImplemented

    def __repr__(self) -> str:
        return f"{self.__class__.__name__}({[str(r) for r in self._rules]!r})"

    def __str__(self) -> str:
        return format_rules(self)


# Parsing

_TOKEN_PATTERN = re.compile(
    r"(?P<space>\s+)|(?P<word>[A-Za-z0-9_=\-]+)|(?P<punct>[,()])|(?P<bad>.)"
)


class _Token:
    __slots__ = ("kind", "text", "column")

    def __init__(self, kind: str, text: str, column: int) -> None:
        self.kind = kind
        self.text = text
        self.column = column

    @property
    def keyword(self) -> Optional[str]:
        if self.kind == "word" and self.text.lower() in KEYWORDS:
            return self.text.lower()
        return None


class _RuleParser:
    def __init__(self, text: str, line: Optional[int]) -> None:
        self._line = line
        self._end_column = len(text) + 1
        self._tokens: List[_Token] = []
        for match in _TOKEN_PATTERN.finditer(text):
            kind = match.lastgroup or "bad"
            if kind == "space":
                continue
            if kind == "bad":
                self._fail(f"Unexpected character {match.group()!r}", match.start() + 1)
            self._tokens.append(_Token(kind, match.group(), match.start() + 1))
        self._position = 0

    def _fail(self, message: str, column: Optional[int] = None) -> NoReturn:
        raise RuleSyntaxError(message, self._line, column)

    def _peek(self) -> Optional[_Token]:
        if self._position < len(self._tokens):
            return self._tokens[self._position]
        return None

    def _next(self, expected: str) -> _Token:
        token = self._peek()
        if token is None:
            self._fail(f"Expected {expected} but the rule ended", self._end_column)
        self._position += 1
        return token

    def _expect_keyword(self, keyword: str) -> None:
        token = self._next(f"'{keyword}'")
        if token.keyword != keyword:
            self._fail(f"Expected '{keyword}' but found {token.text!r}", token.column)

    def _expect_punct(self, punct: str) -> None:
        token = self._next(f"'{punct}'")
        if token.kind != "punct" or token.text != punct:
            self._fail(f"Expected '{punct}' but found {token.text!r}", token.column)

    def _thing(self) -> str:
        token = self._next("a thing")
        if token.kind != "word" or token.keyword is not None:
            self._fail(f"Expected a thing but found {token.text!r}", token.column)
        return token.text

    def _literal(self) -> Literal:
        token = self._peek()
        negated = token is not None and token.keyword == "not"
        if negated:
            self._position += 1
        return Literal(self._thing(), negated)

    def parse(self) -> Rule:
        self._expect_keyword("if")
        body = [self._literal()]
        unless: List[Tuple[str, ...]] = []

        while True:
            token = self._next("'then'")
            body_separator = token.keyword == "and" or (
                token.kind == "punct" and token.text == ","
            )
            if body_separator and not unless:
                body.append(self._literal())
            elif token.keyword == "unless":
                self._expect_punct("(")
                clause = [self._thing()]
                closing = self._next("')'")
                while closing.keyword == "and":
                    clause.append(self._thing())
                    closing = self._next("')'")
                if closing.kind != "punct" or closing.text != ")":
                    self._fail(
                        f"Expected ')' but found {closing.text!r}", closing.column
                    )
                unless.append(tuple(clause))
            elif token.keyword == "then":
                break
            elif unless:
                self._fail(
                    f"Expected 'unless' or 'then' but found {token.text!r}",
                    token.column,
                )
            else:
                self._fail(
                    f"Expected ',', 'and', 'unless' or 'then' but found "
                    f"{token.text!r}",
                    token.column,
                )
        head = self._literal()
        trailing = self._peek()
        if trailing is not None:
            self._fail(f"Unexpected {trailing.text!r} after the head", trailing.column)

        try:
            return Rule(tuple(body), head, tuple(unless))
        except InvalidRuleError as e:
            raise InvalidRuleError(e.message, self._line) from e


def _strip_comment(text: str) -> str:
    return text.split("#", 1)[0]


def parse_rule(text: str, line: Optional[int] = None) -> Rule:
    """Parses one rule, e.g. ``if a, not b unless (c and d) then e``.

    Raises:
        RuleSyntaxError: If ``text`` does not match the grammar. Carries the column.
        InvalidRuleError: If a thing repeats in the body or the head is in the body.
    """
    return _RuleParser(_strip_comment(text), line).parse()


def parse_rules(text: str) -> RuleBase:
    """Parses a rule file. Errors report the 1-based line of the offending rule."""
    rules = RuleBase()
    for number, raw in enumerate(text.splitlines(), start=1):
        if not _strip_comment(raw).strip():
            continue
        rules.add(parse_rule(raw, number))
    return rules


# Formatting


def format_rule(rule: Rule) -> str:
    parts = ["if", ", ".join(str(lit) for lit in rule.body)]
    for clause in rule.unless:
        parts.append(f"unless ({' and '.join(clause)})")
    parts.extend(["then", str(rule.head)])
    return " ".join(parts)


def format_rules(rules: Iterable[Rule]) -> str:
    return "".join(format_rule(rule) + "\n" for rule in rules)


# Canonical form


def canonical_rule(rule: Rule, policy: EncodingPolicy = DEFAULT_POLICY) -> Rule:
    """Returns the canonical spelling of ``rule`` under ``policy``.

    Body literals and exception things are sorted by name, repeated clauses dropped.
    Under ``AS_INHIBITOR`` a single-thing exception ``unless (x)`` of a rule with a
    positive body literal is the same structure as ``not x`` and is spelled that way,
    provided ``x`` is neither the head nor already a positive body literal.
    """
    body = {lit.thing: lit for lit in rule.body}
    clauses = {tuple(sorted(clause)) for clause in rule.unless}

    if policy is EncodingPolicy.AS_INHIBITOR and rule.has_positive_body:
        for clause in sorted(clauses):
            if len(clause) != 1:
                continue
            (thing,) = clause
            if thing == rule.head.thing:
                continue
            existing = body.get(thing)
            if existing is None:
                body[thing] = Literal(thing, negated=True)
                clauses.discard(clause)
            elif existing.negated:
                clauses.discard(clause)

    return Rule(
        tuple(sorted(body.values(), key=Literal.sort_key)),
        rule.head,
        tuple(sorted(clauses)),
    )


def canonicalize(
    rules: Iterable[Rule], policy: EncodingPolicy = DEFAULT_POLICY
) -> RuleBase:
    """Returns the canonical rules, sorted by (head, body), repeats merged."""
    canonical = {canonical_rule(rule, policy) for rule in rules}
    return RuleBase(sorted(canonical, key=_rule_key))
