"""
S-expression trees, the canonical printer, and the parser.

Canonical form: single spaces between siblings, no leading or trailing
whitespace. This exact byte form feeds fingerprints and the wire protocol.
"""
from typing import Union

from tacticforge.errors import EmptyInput, SExprError, TrailingGarbage, UnbalancedParens


def _is_delimiter(ch: str) -> bool:
    return ch in "()" or ch.isspace()


class Atom:

    __slots__ = ("token",)

    def __init__(self, token: str):
        if not is_valid_token(token):
            raise SExprError(f"Invalid atom token: {token!r}")
        self.token = token

    def __eq__(self, other):
        return isinstance(other, Atom) and other.token == self.token

    def __hash__(self):
        return hash(("atom", self.token))

    def __repr__(self):
        return f"Atom({self.token!r})"


class SList:

    __slots__ = ("children",)

    def __init__(self, children):
        self.children = tuple(children)

    def __eq__(self, other):
        return isinstance(other, SList) and other.children == self.children

    def __hash__(self):
        return hash(("list", self.children))

    def __len__(self):
        return len(self.children)

    def __getitem__(self, index):
        return self.children[index]

    def __repr__(self):
        return f"SList({list(self.children)!r})"


SExpr = Union[Atom, SList]


def is_valid_token(token: str) -> bool:
    return bool(token) and not any(_is_delimiter(ch) for ch in token)


def print_sexpr(sexpr: SExpr) -> str:
    parts: list[str] = []
    _print_into(sexpr, parts)
    return "".join(parts)


def _print_into(sexpr: SExpr, parts: list[str]) -> None:
    if isinstance(sexpr, Atom):
        parts.append(sexpr.token)
        return
    parts.append("(")
    for i, child in enumerate(sexpr.children):
        if i:
            parts.append(" ")
        _print_into(child, parts)
    parts.append(")")


def _scan(text: str) -> list[tuple[str, int]]:
    tokens = []
    i, n = 0, len(text)
    while i < n:
        ch = text[i]
        if ch in "()":
            tokens.append((ch, i))
            i += 1
        elif ch.isspace():
            i += 1
        else:
            start = i
            while i < n and not _is_delimiter(text[i]):
                i += 1
            tokens.append((text[start:i], start))
    return tokens


def parse(text: bytes | str) -> SExpr:
    """Parse exactly one S-expression from `text`."""

    if isinstance(text, bytes):
        text = text.decode("utf-8")

    tokens = _scan(text)
    if not tokens:
        raise EmptyInput("no S-expression in input")

    stack: list[list[SExpr]] = []
    opened: list[int] = []
    result: SExpr | None = None
    end_index = None

    for index, (token, position) in enumerate(tokens):
        if token == "(":
            stack.append([])
            opened.append(position)
        elif token == ")":
            if not stack:
                raise UnbalancedParens(position, "unexpected closing parenthesis")
            children = stack.pop()
            opened.pop()
            node = SList(children)
            if stack:
                stack[-1].append(node)
            else:
                result = node
                end_index = index
                break
        else:
            atom = Atom(token)
            if stack:
                stack[-1].append(atom)
            else:
                result = atom
                end_index = index
                break

    if stack:
        raise UnbalancedParens(opened[-1], "unclosed parenthesis")

    if end_index is not None and end_index + 1 < len(tokens):
        raise TrailingGarbage(tokens[end_index + 1][1])

    return result


def tokenize(sexpr: SExpr) -> list[str]:
    """Parentheses and atoms each emit one token."""

    tokens: list[str] = []
    _tokenize_into(sexpr, tokens)
    return tokens


def _tokenize_into(sexpr: SExpr, tokens: list[str]) -> None:
    if isinstance(sexpr, Atom):
        tokens.append(sexpr.token)
        return
    tokens.append("(")
    for child in sexpr.children:
        _tokenize_into(child, tokens)
    tokens.append(")")


def tokenize_text(text: bytes | str) -> list[str]:
    return tokenize(parse(text))


def tokenize_canonical(text: str) -> list[str]:
    """Tokenize an already-canonical print without building the tree."""

    return [token for token, _ in _scan(text)]
