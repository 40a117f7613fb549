"""Infinite streams over finite alphabets and the 2^-i ultrametric.

Two realizations are provided:

* :class:`EpStream` -- eventually periodic, ``u v v v ...``, kept in a
  canonical form so that equality and distance are decidable.
* :class:`OpaqueStream` -- a lazy index function with a memoized contiguous
  prefix.  Equality is never offered; only prefix comparison at an explicit
  depth.

Raw finite words are plain tuples of symbol indices (``take``); the
:class:`Word` wrapper carries the alphabet and is used at API boundaries.
"""
from __future__ import annotations

import itertools
import math
import threading
from dataclasses import dataclass
from fractions import Fraction
from functools import total_ordering
from typing import Callable, Iterable, Iterator, Optional, Sequence, Tuple, Union

__all__ = [
    "StreamError", "AlphabetMismatch", "LiteralError",
    "Alphabet", "BINARY", "Word", "Stream", "EpStream", "OpaqueStream", "Distance",
    "head", "tail", "prepend", "at", "prefix", "prefix_equiv", "distance",
    "distance_exact", "normalize", "parse_stream", "format_stream", "parse_word",
    "format_word", "zeros", "ones", "constant",
]

Symbols = Tuple[int, ...]


class StreamError(ValueError):
    pass


class AlphabetMismatch(StreamError):
    pass


class LiteralError(StreamError):
    pass


@dataclass(frozen=True)
class Alphabet:
    """The symbols ``0 .. size-1``, optionally with display names."""

    size: int
    names: Optional[Tuple[str, ...]] = None

    def __post_init__(self):
        if not isinstance(self.size, int) or self.size < 1:
            raise StreamError(f"alphabet size must be a positive integer, got {self.size!r}")
        if self.names is not None and len(self.names) != self.size:
            raise StreamError("alphabet names must list exactly one name per symbol")

    def __contains__(self, symbol) -> bool:
        return isinstance(symbol, int) and 0 <= symbol < self.size

    def check(self, symbols: Iterable[int]) -> Symbols:
        out = tuple(symbols)
        for s in out:
            if s not in self:
                raise StreamError(f"symbol {s!r} not in alphabet of size {self.size}")
        return out

    def words(self, length: int) -> Iterator[Symbols]:
        """All words of the given length, in lexicographic order."""
        return itertools.product(range(self.size), repeat=length)

    def count(self, length: int) -> int:
        return self.size ** length

    @property
    def last(self) -> int:
        return self.size - 1


BINARY = Alphabet(2)


def _same_alphabet(a: Alphabet, b: Alphabet) -> None:
    if a != b:
        raise AlphabetMismatch(f"alphabet mismatch: size {a.size} vs size {b.size}")


@dataclass(frozen=True)
class Word:
    alphabet: Alphabet
    symbols: Symbols

    def __post_init__(self):
        object.__setattr__(self, "symbols", self.alphabet.check(self.symbols))

    def __len__(self):
        return len(self.symbols)

    def __iter__(self):
        return iter(self.symbols)

    def __getitem__(self, item):
        if isinstance(item, slice):
            return Word(self.alphabet, self.symbols[item])
        return self.symbols[item]

    def __add__(self, other: "Word") -> "Word":
        _same_alphabet(self.alphabet, other.alphabet)
        return Word(self.alphabet, self.symbols + other.symbols)

    def __str__(self):
        return format_word(self.symbols, self.alphabet)

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet = BINARY) -> "Word":
        return cls(alphabet, parse_word(text, alphabet))


def _as_symbols(w: Union[Word, Sequence[int]], alphabet: Alphabet) -> Symbols:
    if isinstance(w, Word):
        _same_alphabet(w.alphabet, alphabet)
        return w.symbols
    return alphabet.check(w)


class Stream:
    """Base class: an infinite sequence over ``alphabet`` accessed by index."""

    alphabet: Alphabet

    def at(self, n: int) -> int:
        raise NotImplementedError

    def take(self, n: int) -> Symbols:
        """The first ``n`` symbols as a raw tuple."""
        raise NotImplementedError

    def __getitem__(self, n: int) -> int:
        return self.at(n)

    def head(self) -> int:
        return self.at(0)

    def tail(self) -> "Stream":
        return self.drop(1)

    def drop(self, n: int) -> "Stream":
        raise NotImplementedError

    def prefix(self, n: int) -> Word:
        return Word(self.alphabet, self.take(n))


def _primitive_root(period: Symbols) -> Symbols:
    p = len(period)
    for d in range(1, p + 1):
        if p % d == 0 and period[:d] * (p // d) == period:
            return period[:d]
    return period


class EpStream(Stream):
    """An eventually periodic stream ``preperiod (period)^omega``.

    Instances are always in canonical form: the period is primitive and the
    preperiod is as short as possible.  Two instances are equal iff they
    denote the same sequence.
    """

    __slots__ = ("alphabet", "preperiod", "period")

    def __init__(self, preperiod: Iterable[int], period: Iterable[int],
                 alphabet: Alphabet = BINARY):
        pre = alphabet.check(preperiod)
        per = alphabet.check(period)
        if not per:
            raise StreamError("period must be nonempty")
        per = _primitive_root(per)
        # absorb trailing preperiod symbols into a rotated period
        while pre and pre[-1] == per[-1]:
            per = (pre[-1],) + per[:-1]
            pre = pre[:-1]
        object.__setattr__(self, "alphabet", alphabet)
        object.__setattr__(self, "preperiod", pre)
        object.__setattr__(self, "period", per)

    def __setattr__(self, name, value):
        raise AttributeError("EpStream is immutable")

    def __eq__(self, other):
        if not isinstance(other, EpStream):
            return NotImplemented
        return (self.alphabet, self.preperiod, self.period) == (
            other.alphabet, other.preperiod, other.period)

    def __hash__(self):
        return hash((self.alphabet, self.preperiod, self.period))

    def __repr__(self):
        return f"EpStream({format_stream(self)!r})"

    def __str__(self):
        return format_stream(self)

    def at(self, n: int) -> int:
        if n < 0:
            raise IndexError("stream index must be non-negative")
        m = len(self.preperiod)
        if n < m:
            return self.preperiod[n]
        return self.period[(n - m) % len(self.period)]

    def take(self, n: int) -> Symbols:
        m = len(self.preperiod)
        if n <= m:
            return self.preperiod[:n]
        reps = -(-(n - m) // len(self.period))
        return (self.preperiod + self.period * reps)[:n]

    def drop(self, n: int) -> "EpStream":
        m = len(self.preperiod)
        if n <= m:
            return EpStream(self.preperiod[n:], self.period, self.alphabet)
        r = (n - m) % len(self.period)
        return EpStream((), self.period[r:] + self.period[:r], self.alphabet)

    @property
    def horizon(self) -> int:
        """Length of preperiod plus one period."""
        return len(self.preperiod) + len(self.period)

    @classmethod
    def constant(cls, symbol: int, alphabet: Alphabet = BINARY) -> "EpStream":
        return cls((), (symbol,), alphabet)

    @classmethod
    def parse(cls, text: str, alphabet: Alphabet = BINARY) -> "EpStream":
        return parse_stream(text, alphabet)


def zeros(alphabet: Alphabet = BINARY) -> EpStream:
    return EpStream.constant(0, alphabet)


def ones(alphabet: Alphabet = BINARY) -> EpStream:
    return EpStream.constant(1, alphabet)


def constant(symbol: int, alphabet: Alphabet = BINARY) -> EpStream:
    return EpStream.constant(symbol, alphabet)


class OpaqueStream(Stream):
    """A lazily generated stream with a memoized contiguous prefix.

    Exactly one source is given:

    ``fn``
        index -> symbol.
    ``block``
        ``block(n)`` returns a tuple of at least ``n`` symbols forming the
        prefix of the stream.  It may be called with growing ``n``; every
        answer must extend the previous ones.
    ``iterator``
        a zero-argument factory returning an iterator over the symbols.

    Sources must be pure.  Handles may be shared between threads.
    """

    def __init__(self, alphabet: Alphabet,
                 fn: Optional[Callable[[int], int]] = None, *,
                 block: Optional[Callable[[int], Sequence[int]]] = None,
                 iterator: Optional[Callable[[], Iterator[int]]] = None,
                 name: str = "opaque"):
        if sum(x is not None for x in (fn, block, iterator)) != 1:
            raise TypeError("OpaqueStream needs exactly one of fn, block, iterator")
        self.alphabet = alphabet
        self.name = name
        self._fn = fn
        self._block = block
        self._iter = iterator() if iterator is not None else None
        self._cache: list = []
        self._lock = threading.Lock()

    def __repr__(self):
        shown = format_word(tuple(self._cache[:16]), self.alphabet)
        return f"<OpaqueStream {self.name} {shown}...>"

    @property
    def cached(self) -> int:
        return len(self._cache)

    def _fill(self, n: int) -> None:
        with self._lock:
            have = len(self._cache)
            if have >= n:
                return
            if self._fn is not None:
                new = [self._fn(i) for i in range(have, n)]
            elif self._block is not None:
                want = max(n, 2 * have)
                try:
                    got = tuple(self._block(want))
                except IndexError:
                    if want == n:
                        raise
                    got = tuple(self._block(n))
                if len(got) < n:
                    raise StreamError(f"block source for {self.name} returned {len(got)} < {n} symbols")
                if tuple(self._cache) != got[:have]:
                    raise StreamError(f"block source for {self.name} is not pure")
                new = got[have:]
            else:
                new = list(itertools.islice(self._iter, n - have))
                if len(new) < n - have:
                    raise StreamError(f"iterator source for {self.name} ended after {have + len(new)} symbols")
            for s in new:
                if s not in self.alphabet:
                    raise StreamError(f"generator produced {s!r}, outside alphabet of size {self.alphabet.size}")
            self._cache.extend(new)

    def at(self, n: int) -> int:
        if n < 0:
            raise IndexError("stream index must be non-negative")
        if n >= len(self._cache):
            self._fill(n + 1)
        return self._cache[n]

    def take(self, n: int) -> Symbols:
        if n > len(self._cache):
            self._fill(n)
        return tuple(self._cache[:n])

    def drop(self, n: int) -> "OpaqueStream":
        if n == 0:
            return self
        base = self
        return OpaqueStream(self.alphabet, block=lambda k: base.take(k + n)[n:],
                            name=f"drop({n}, {self.name})")


# -- operations ---------------------------------------------------------------

def head(s: Stream) -> int:
    return s.at(0)


def tail(s: Stream) -> Stream:
    return s.drop(1)


def at(s: Stream, n: int) -> int:
    return s.at(n)


def prefix(s: Stream, n: int) -> Word:
    if n < 0:
        raise StreamError("prefix length must be non-negative")
    return s.prefix(n)


def prepend(w: Union[Word, Sequence[int]], s: Stream) -> Stream:
    """``w : s`` -- the stream that reads ``w`` and then ``s``."""
    sym = _as_symbols(w, s.alphabet)
    if not sym:
        return s
    if isinstance(s, EpStream):
        return EpStream(sym + s.preperiod, s.period, s.alphabet)
    k = len(sym)
    return OpaqueStream(s.alphabet, block=lambda n: sym + s.take(max(0, n - k)),
                        name=f"{format_word(sym, s.alphabet)}:{getattr(s, 'name', '?')}")


def prefix_equiv(s: Stream, t: Stream, n: int) -> bool:
    _same_alphabet(s.alphabet, t.alphabet)
    return s.take(n) == t.take(n)


@total_ordering
@dataclass(frozen=True)
class Distance:
    """A stream distance, kept as an exponent (never a float).

    ``exponent is None`` means distance 0.  ``bounded`` distances are upper
    bounds ``<= 2^-exponent`` produced when no disagreement was found within
    the inspection depth; they do not take part in ordering.
    """

    exponent: Optional[int]
    bounded: bool = False

    @classmethod
    def zero(cls) -> "Distance":
        return cls(None)

    @classmethod
    def exact(cls, i: int) -> "Distance":
        return cls(i)

    @classmethod
    def at_most(cls, depth: int) -> "Distance":
        return cls(depth, bounded=True)

    @property
    def is_zero(self) -> bool:
        return self.exponent is None

    @property
    def is_exact(self) -> bool:
        return not self.bounded

    def as_fraction(self) -> Fraction:
        if self.exponent is None:
            return Fraction(0)
        return Fraction(1, 2 ** self.exponent)

    def __str__(self):
        if self.exponent is None:
            return "0"
        if self.bounded:
            return f"<=2^-{self.exponent}"
        return f"2^-{self.exponent}"

    def _key(self):
        if self.bounded:
            raise TypeError("depth-bounded distances are not ordered")
        return (0, 0) if self.exponent is None else (1, -self.exponent)

    def __lt__(self, other: "Distance") -> bool:
        return self._key() < other._key()


def _first_difference(a: Symbols, b: Symbols) -> Optional[int]:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    return None


def distance(s: Stream, t: Stream, depth: int = 64) -> Distance:
    """Distance found by inspecting at most ``depth`` symbols."""
    _same_alphabet(s.alphabet, t.alphabet)
    if depth < 0:
        raise StreamError("depth must be non-negative")
    i = _first_difference(s.take(depth), t.take(depth))
    return Distance.at_most(depth) if i is None else Distance.exact(i)


def distance_exact(s: EpStream, t: EpStream) -> Distance:
    """Exact distance between eventually periodic streams."""
    if not (isinstance(s, EpStream) and isinstance(t, EpStream)):
        raise StreamError("distance_exact needs eventually periodic streams")
    _same_alphabet(s.alphabet, t.alphabet)
    if s == t:
        return Distance.zero()
    n = max(len(s.preperiod), len(t.preperiod)) + math.lcm(len(s.period), len(t.period))
    i = _first_difference(s.take(n), t.take(n))
    assert i is not None, "canonical forms differ but prefixes agree"
    return Distance.exact(i)


def normalize(s: EpStream) -> EpStream:
    # construction already canonicalizes; kept as the explicit operation
    return EpStream(s.preperiod, s.period, s.alphabet)


# -- literals -----------------------------------------------------------------

def _parse_symbols(text: str, alphabet: Alphabet) -> Symbols:
    text = text.strip()
    if not text:
        return ()
    if "," in text or alphabet.size > 10:
        parts = [p.strip() for p in text.split(",")]
    else:
        parts = list(text)
    out = []
    for p in parts:
        if not p.isdigit():
            raise LiteralError(f"bad symbol {p!r} in {text!r}")
        v = int(p)
        if v >= alphabet.size:
            raise LiteralError(f"symbol {v} out of range for alphabet of size {alphabet.size}")
        out.append(v)
    return tuple(out)


def parse_word(text: str, alphabet: Alphabet = BINARY) -> Symbols:
    if text.strip() in ("", "e", "ε"):
        return ()
    return _parse_symbols(text, alphabet)


def format_word(symbols: Sequence[int], alphabet: Alphabet = BINARY) -> str:
    if alphabet.size > 10:
        return ",".join(str(s) for s in symbols)
    return "".join(str(s) for s in symbols)


def parse_stream(text: str, alphabet: Alphabet = BINARY) -> EpStream:
    """Parse ``preperiod(period)``, e.g. ``110(01)``."""
    text = text.strip()
    if text.count("(") != 1 or text.count(")") != 1 or not text.endswith(")"):
        raise LiteralError(f"malformed stream literal {text!r}; expected preperiod(period)")
    open_at = text.index("(")
    pre = _parse_symbols(text[:open_at], alphabet)
    per = _parse_symbols(text[open_at + 1:-1], alphabet)
    if not per:
        raise LiteralError(f"empty period in stream literal {text!r}")
    return EpStream(pre, per, alphabet)


def format_stream(s: EpStream) -> str:
    pre = format_word(s.preperiod, s.alphabet)
    per = format_word(s.period, s.alphabet)
    return f"{pre}({per})"
