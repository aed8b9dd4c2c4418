"""Line-oriented text format for mass-action reaction networks (``.crn``).

A file looks like::

    # Lotka reactions
    species X, Y
    X + Y -> 2Y ; k=1
    X -> 2X     ; k=1
    Y -> 0      ; k=1
    X <-> Y     ; k=1/2,3

``0`` denotes the zero complex. Rates are exact rationals (``3``, ``1/16``;
decimal literals such as ``0.25`` are read exactly as well). ``<->`` expands
into the forward and the backward edge, in that order.
"""

from __future__ import annotations

import re
from dataclasses import dataclass
from fractions import Fraction
from typing import Mapping, Sequence

__all__ = [
    "DSLError",
    "NetworkSource",
    "Reaction",
    "parse_network",
    "format_network",
    "load_network",
    "format_rational",
]

_NAME = re.compile(r"[A-Za-z_][A-Za-z0-9_]*")
_INT = re.compile(r"[0-9]+")
_RATE = re.compile(r"[+-]?(?:[0-9]+(?:\.[0-9]*)?|\.[0-9]+)(?:[eE][+-]?[0-9]+)?(?:/[0-9]+)?")


class DSLError(ValueError):
    """Syntax or semantic error in a ``.crn`` text, with 1-based position."""

    def __init__(self, message: str, line: int | None = None, column: int | None = None):
        self.message = message
        self.line = line
        self.column = column
        where = ""
        if line is not None:
            where = f"line {line}"
            if column is not None:
                where += f", column {column}"
            where += ": "
        super().__init__(where + message)


@dataclass(frozen=True)
class Reaction:
    reactant: tuple[int, ...]
    product: tuple[int, ...]
    rate: Fraction

    @property
    def vector(self) -> tuple[int, ...]:
        return tuple(p - r for r, p in zip(self.reactant, self.product))


@dataclass(frozen=True)
class NetworkSource:
    """Species order plus reactions (reactant, product, rate constant)."""

    species: tuple[str, ...]
    reactions: tuple[Reaction, ...]

    def __post_init__(self):
        if len(set(self.species)) != len(self.species):
            raise ValueError("species names must be unique")
        if not self.reactions:
            raise ValueError("a network needs at least one reaction")
        n = len(self.species)
        seen = set()
        for r in self.reactions:
            if len(r.reactant) != n or len(r.product) != n:
                raise ValueError("complex length does not match species count")
            if any((not isinstance(c, int)) or c < 0 for c in r.reactant + r.product):
                raise ValueError("stoichiometric coefficients must be nonnegative integers")
            if r.rate <= 0:
                raise ValueError("rate constants must be positive")
            if r.reactant == r.product:
                raise ValueError("reactant and product complex coincide")
            edge = (r.reactant, r.product)
            if edge in seen:
                raise ValueError(f"duplicate reaction {edge}")
            seen.add(edge)

    @classmethod
    def from_reactions(
        cls,
        species: Sequence[str],
        reactions: Sequence[tuple[Mapping[str, int] | Sequence[int], Mapping[str, int] | Sequence[int], object]],
    ) -> "NetworkSource":
        """Build from ``(reactant, product, rate)`` triples.

        Complexes may be given as name->count maps or as vectors; rates as
        anything :class:`fractions.Fraction` accepts.
        """
        species = tuple(species)
        index = {s: i for i, s in enumerate(species)}

        def vec(c):
            if isinstance(c, Mapping):
                v = [0] * len(species)
                for name, count in c.items():
                    v[index[name]] += int(count)
                return tuple(v)
            return tuple(int(a) for a in c)

        return cls(species, tuple(Reaction(vec(r), vec(p), Fraction(k)) for r, p, k in reactions))

    @property
    def n(self) -> int:
        return len(self.species)

    @property
    def complexes(self) -> tuple[tuple[int, ...], ...]:
        """Distinct complexes in order of first appearance."""
        out: dict[tuple[int, ...], None] = {}
        for r in self.reactions:
            out.setdefault(r.reactant)
            out.setdefault(r.product)
        return tuple(out)

    @property
    def rates(self) -> tuple[Fraction, ...]:
        return tuple(r.rate for r in self.reactions)

    def canonical(self) -> "NetworkSource":
        """Same network with reactions sorted by (reactant, product)."""
        return NetworkSource(self.species, tuple(sorted(self.reactions, key=lambda r: (r.reactant, r.product))))

    def complex_str(self, c: Sequence[int]) -> str:
        return _complex_str(self.species, c)

    def with_rates(self, rates: Sequence[object]) -> "NetworkSource":
        if len(rates) != len(self.reactions):
            raise ValueError("need one rate per reaction")
        return NetworkSource(
            self.species, tuple(Reaction(r.reactant, r.product, Fraction(k)) for r, k in zip(self.reactions, rates))
        )


def format_rational(q: Fraction) -> str:
    q = Fraction(q)
    return str(q.numerator) if q.denominator == 1 else f"{q.numerator}/{q.denominator}"


def _complex_str(species: Sequence[str], c: Sequence[int]) -> str:
    terms = []
    for name, k in zip(species, c):
        if k == 1:
            terms.append(name)
        elif k > 1:
            terms.append(f"{k}{name}")
    return " + ".join(terms) if terms else "0"


def _parse_rate(tok: str, line: int, col: int) -> Fraction:
    if not _RATE.fullmatch(tok):
        raise DSLError(f"malformed rate {tok!r}", line, col)
    try:
        if "/" in tok:
            num, den = tok.split("/")
            q = Fraction(num) / Fraction(int(den))
        else:
            q = Fraction(tok)
    except (ValueError, ZeroDivisionError):
        raise DSLError(f"malformed rate {tok!r}", line, col) from None
    if q <= 0:
        raise DSLError(f"rate must be positive, got {tok}", line, col)
    return q


class _Cursor:
    def __init__(self, text: str, line: int, offset: int = 0):
        self.text = text
        self.pos = offset
        self.line = line

    @property
    def col(self) -> int:
        return self.pos + 1

    def skip_ws(self):
        while self.pos < len(self.text) and self.text[self.pos] in " \t":
            self.pos += 1

    def at_end(self) -> bool:
        self.skip_ws()
        return self.pos >= len(self.text)

    def peek(self, s: str) -> bool:
        self.skip_ws()
        return self.text.startswith(s, self.pos)

    def match(self, rx: re.Pattern) -> str | None:
        self.skip_ws()
        m = rx.match(self.text, self.pos)
        if m is None:
            return None
        self.pos = m.end()
        return m.group(0)

    def error(self, msg: str) -> DSLError:
        return DSLError(msg, self.line, self.col)


def _parse_complex(cur: _Cursor, index: dict[str, int]) -> tuple[int, ...]:
    vec = [0] * len(index)
    cur.skip_ws()
    start = cur.pos
    if cur.text.startswith("-", cur.pos):
        raise cur.error("negative stoichiometric coefficient")
    lone_zero = re.compile(r"0(?![0-9A-Za-z_.])")
    if cur.match(lone_zero) is not None:
        return tuple(vec)
    while True:
        cur.skip_ws()
        if cur.peek("-") and not cur.peek("->"):
            raise cur.error("negative stoichiometric coefficient")
        coef_col = cur.col
        coef = cur.match(_INT)
        if coef is not None and cur.peek("."):
            raise cur.error("non-integer stoichiometric coefficient")
        cur.skip_ws()
        if cur.peek("*"):
            cur.pos += 1
        name_col = cur.col
        name = cur.match(_NAME)
        if name is None:
            if coef is not None and cur.pos > start:
                raise DSLError("expected species name after coefficient", cur.line, name_col)
            raise cur.error("expected species term")
        if name not in index:
            raise DSLError(f"unknown species {name!r}", cur.line, name_col)
        k = int(coef) if coef is not None else 1
        if k == 0:
            raise DSLError("zero coefficient inside a complex; write the complex without it", cur.line, coef_col)
        vec[index[name]] += k
        if cur.peek("+"):
            cur.pos += 1
            plus_col = cur.col - 1
            cur.skip_ws()
            if cur.at_end() or cur.peek("->") or cur.peek("<->") or cur.peek(";"):
                raise DSLError("dangling '+'", cur.line, plus_col)
            continue
        return tuple(vec)


def parse_network(text: str) -> NetworkSource:
    """Parse ``.crn`` text into a :class:`NetworkSource`.

    Raises :class:`DSLError` carrying line and column on any problem.
    """
    if not text or not text.strip():
        raise DSLError("empty network text")
    species: list[str] = []
    index: dict[str, int] = {}
    raw: list[tuple[tuple[int, ...] | None, tuple[int, ...] | None, Fraction, int]] = []
    pending: list[tuple[str, int, int]] = []

    for lineno, full in enumerate(text.splitlines(), start=1):
        body = full.split("#", 1)[0].rstrip()
        if not body.strip():
            continue
        cur = _Cursor(body, lineno)
        cur.skip_ws()
        if re.match(r"species\b", body[cur.pos:]):
            cur.pos += len("species")
            while not cur.at_end():
                col = cur.col
                name = cur.match(_NAME)
                if name is None:
                    raise cur.error("expected species name")
                if name in index:
                    raise DSLError(f"duplicate species declaration {name!r}", lineno, col)
                if name == "species":
                    raise DSLError("'species' is reserved", lineno, col)
                index[name] = len(species)
                species.append(name)
                if cur.peek(","):
                    cur.pos += 1
            continue
        if not species:
            raise DSLError("species declaration required before reactions", lineno, 1)
        pending.append((body, lineno, cur.pos))

    if not pending:
        raise DSLError("no reactions")

    reactions: list[Reaction] = []
    for body, lineno, offset in pending:
        cur = _Cursor(body, lineno, offset)
        left = _parse_complex(cur, index)
        if cur.peek("<->"):
            cur.pos += 3
            reversible = True
        elif cur.peek("->"):
            cur.pos += 2
            reversible = False
        else:
            raise cur.error("expected '->' or '<->'")
        right = _parse_complex(cur, index)
        if not cur.peek(";"):
            raise cur.error("expected ';' before the rate")
        cur.pos += 1
        cur.skip_ws()
        if not re.match(r"k\s*=", body[cur.pos:]):
            raise cur.error("expected 'k=RATE'")
        cur.pos = body.index("=", cur.pos) + 1
        cur.skip_ws()
        rest = body[cur.pos:]
        col0 = cur.col
        toks = [t.strip() for t in rest.split(",")]
        want = 2 if reversible else 1
        if len(toks) != want or any(not t for t in toks):
            raise DSLError(f"expected {want} rate(s)", lineno, col0)
        rates = []
        col = col0
        for t in toks:
            rates.append(_parse_rate(t, lineno, col))
            col += len(t) + 1
        if left == right:
            raise DSLError("reactant and product complex coincide", lineno, offset + 1)
        edges = [(left, right, rates[0])]
        if reversible:
            edges.append((right, left, rates[1]))
        for y, yp, k in edges:
            if any(r.reactant == y and r.product == yp for r in reactions):
                raise DSLError("duplicate reaction", lineno, offset + 1)
            reactions.append(Reaction(y, yp, k))

    return NetworkSource(tuple(species), tuple(reactions))


def format_network(net: NetworkSource) -> str:
    """Serialize; ``parse_network(format_network(net)) == net``."""
    lines = ["species " + ", ".join(net.species)]
    for r in net.reactions:
        lines.append(
            f"{net.complex_str(r.reactant)} -> {net.complex_str(r.product)} ; k={format_rational(r.rate)}"
        )
    return "\n".join(lines) + "\n"


def load_network(path) -> NetworkSource:
    with open(path, encoding="utf-8") as fh:
        return parse_network(fh.read())
