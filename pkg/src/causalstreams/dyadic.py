"""Exact 2-adic integers as bitstreams, least significant bit first.

With this orientation the head of a stream is the parity of the number and
the tail is ``x -> (x - parity) / 2``.  Eventually periodic bitstreams are
exactly the rationals with odd denominator, so a :class:`Dyadic` keeps its
value as a :class:`fractions.Fraction` and produces its bits on demand by
repeated parity-and-halve.  Opaque bitstreams only get depth-bounded
arithmetic (residues modulo ``2^n``).
"""
from __future__ import annotations

import re
from fractions import Fraction
from typing import Optional, Sequence, Tuple, Union

from .causality import CausalFn, Certificate, Provenance
from .streams import BINARY, EpStream, LiteralError, OpaqueStream, Stream, StreamError, parse_stream

__all__ = [
    "Dyadic", "from_int", "to_int", "from_rational", "from_bits", "add", "neg", "sub",
    "mul", "bits_to_int", "int_to_bits", "inv_mod_pow2", "affine_fn", "double_fn",
    "double_plus_one_fn", "tail2_fn", "parse_dyadic",
]

Bits = Tuple[int, ...]


def bits_to_int(bits: Sequence[int]) -> int:
    """LSB-first bits to a non-negative integer."""
    if not bits:
        return 0
    return int("".join("1" if b else "0" for b in reversed(bits)), 2)


def int_to_bits(x: int, n: int) -> Bits:
    """The low ``n`` bits of ``x`` (two's complement for negatives), LSB first."""
    if n <= 0:
        return ()
    s = format(x & ((1 << n) - 1), "b").zfill(n)
    return tuple(1 if c == "1" else 0 for c in reversed(s))


def _rational_bits(p: int, q: int) -> EpStream:
    # state p/q with q odd; each step emits the parity and halves
    if q < 0:
        p, q = -p, -q
    seen = {}
    out = []
    while p not in seen:
        seen[p] = len(out)
        b = p & 1
        out.append(b)
        p = (p - b * q) >> 1
    start = seen[p]
    return EpStream(out[:start], out[start:], BINARY)


class Dyadic:
    """A 2-adic integer that is a rational with odd denominator."""

    __slots__ = ("value", "_bits")

    def __init__(self, value: Union[int, Fraction]):
        value = Fraction(value)
        if value.denominator % 2 == 0:
            raise StreamError(f"{value} is not a 2-adic integer (even denominator)")
        self.value = value
        self._bits: Optional[EpStream] = None

    @property
    def bits(self) -> EpStream:
        if self._bits is None:
            self._bits = _rational_bits(self.value.numerator, self.value.denominator)
        return self._bits

    @classmethod
    def from_bits(cls, s: EpStream) -> "Dyadic":
        if s.alphabet != BINARY:
            raise StreamError("dyadic bits must be binary")
        u, v = s.preperiod, s.period
        pre = bits_to_int(u)
        per = bits_to_int(v)
        # u v v v ... = pre + 2^|u| * per / (1 - 2^|v|)
        value = pre + Fraction(per * 2 ** len(u), 1 - 2 ** len(v))
        d = cls(value)
        d._bits = s
        return d

    def residue(self, n: int) -> int:
        """``x mod 2^n`` in ``[0, 2^n)``."""
        mod = 1 << n
        p, q = self.value.numerator, self.value.denominator
        if q == 1:
            return p % mod
        return (p * inv_mod_pow2(q, n)) % mod

    @property
    def parity(self) -> int:
        return self.value.numerator & 1

    def is_unit(self) -> bool:
        return self.parity == 1

    def to_int(self) -> Optional[int]:
        return self.value.numerator if self.value.denominator == 1 else None

    def __eq__(self, other):
        if isinstance(other, int):
            return self.value == other
        if not isinstance(other, Dyadic):
            return NotImplemented
        return self.value == other.value

    def __hash__(self):
        return hash(("dyadic", self.value))

    def __repr__(self):
        return f"Dyadic({self})"

    def __str__(self):
        v = self.value
        return str(v.numerator) if v.denominator == 1 else f"{v.numerator}/{v.denominator}"

    def __add__(self, other):
        return Dyadic(self.value + _coerce(other).value)

    __radd__ = __add__

    def __neg__(self):
        return Dyadic(-self.value)

    def __sub__(self, other):
        return Dyadic(self.value - _coerce(other).value)

    def __rsub__(self, other):
        return Dyadic(_coerce(other).value - self.value)

    def __mul__(self, other):
        return Dyadic(self.value * _coerce(other).value)

    __rmul__ = __mul__

    def halve(self) -> "Dyadic":
        """Exact division by two; needs an even argument."""
        if self.parity:
            raise StreamError("halve needs an even 2-adic integer")
        return Dyadic(self.value / 2)


def _coerce(x) -> Dyadic:
    if isinstance(x, Dyadic):
        return x
    if isinstance(x, (int, Fraction)):
        return Dyadic(x)
    if isinstance(x, EpStream):
        return Dyadic.from_bits(x)
    raise TypeError(f"cannot treat {x!r} as a 2-adic integer")


def from_int(z: int) -> Dyadic:
    return Dyadic(z)


def to_int(x: Dyadic) -> Optional[int]:
    return _coerce(x).to_int()


def from_rational(p: int, q: int) -> Dyadic:
    """The unique ``x`` with ``q * x = p``; ``q`` must be odd."""
    if q == 0 or q % 2 == 0:
        raise StreamError(f"denominator {q} is not a 2-adic unit")
    return Dyadic(Fraction(p, q))


def from_bits(s: EpStream) -> Dyadic:
    return Dyadic.from_bits(s)


# -- arithmetic, exact on Dyadic and depth-bounded on opaque bitstreams --------------

def _opaque_binary(x, y, op, name) -> OpaqueStream:
    xs, ys = _bitstream(x), _bitstream(y)

    def block(n):
        return int_to_bits(op(bits_to_int(xs.take(n)), bits_to_int(ys.take(n))), n)
    return OpaqueStream(BINARY, block=block, name=name)


def _bitstream(x) -> Stream:
    if isinstance(x, Dyadic):
        return x.bits
    if isinstance(x, int):
        return Dyadic(x).bits
    if isinstance(x, Stream):
        if x.alphabet != BINARY:
            raise StreamError("dyadic arithmetic needs binary streams")
        return x
    raise TypeError(f"cannot treat {x!r} as a bitstream")


def _exact(x) -> bool:
    return isinstance(x, (Dyadic, int, Fraction, EpStream))


def add(x, y):
    if _exact(x) and _exact(y):
        return _coerce(x) + _coerce(y)
    return _opaque_binary(x, y, lambda a, b: a + b, "add")


def sub(x, y):
    if _exact(x) and _exact(y):
        return _coerce(x) - _coerce(y)
    return _opaque_binary(x, y, lambda a, b: a - b, "sub")


def mul(x, y):
    if _exact(x) and _exact(y):
        return _coerce(x) * _coerce(y)
    return _opaque_binary(x, y, lambda a, b: a * b, "mul")


def neg(x):
    if _exact(x):
        return -_coerce(x)
    xs = _bitstream(x)
    return OpaqueStream(BINARY, block=lambda n: int_to_bits(-bits_to_int(xs.take(n)), n), name="neg")


def inv_mod_pow2(a: Union[int, Dyadic], n: int) -> int:
    """The inverse of odd ``a`` modulo ``2^n``, by Newton iteration.

    Each step ``x <- x (2 - a x)`` doubles the number of correct bits.
    """
    if n < 1:
        raise ValueError("precision must be >= 1")
    if isinstance(a, Dyadic):
        a = a.residue(n)
    if a % 2 == 0:
        raise StreamError(f"{a} is even, hence not invertible modulo 2^{n}")
    mod = 1 << n
    a %= mod
    x, good = 1, 1
    while good < n:
        good *= 2
        m = (1 << min(good, n)) - 1
        x = (x * (2 - a * x)) & m
    return x % mod


# -- arithmetic stream functions ---------------------------------------------------------

def affine_fn(a, b) -> CausalFn:
    """``x -> a x + b`` on bitstreams.

    One output bit per input bit.  Certified bicausal when ``a`` is odd
    (a unit), otherwise only 0-causal.
    """
    a, b = _coerce(a), _coerce(b)
    ai, bi = a.to_int(), b.to_int()

    def on_prefix(w):
        n = len(w)
        if not n:
            return ()
        A = ai if ai is not None else a.residue(n)
        B = bi if bi is not None else b.residue(n)
        return int_to_bits(A * bits_to_int(w) + B, n)

    def exact(s: EpStream) -> EpStream:
        return (a * Dyadic.from_bits(s) + b).bits

    bic = Provenance.by_construction("affine map with unit multiplier") if a.is_unit() else None
    cert = Certificate(0, Provenance.by_construction("2-adic affine map"), bicausal=bic)
    return CausalFn(BINARY, BINARY, 0, on_prefix, certificate=cert,
                    name=f"x->{a}x+{b}", exact=exact)


def double_fn() -> CausalFn:
    """``x -> 2x``, which on bits prepends 0."""
    cert = Certificate(1, Provenance.by_construction("x -> 2x"))
    return CausalFn(BINARY, BINARY, 1, lambda w: (0,) + w, certificate=cert, name="x->2x",
                    exact=lambda s: (Dyadic.from_bits(s) * 2).bits)


def double_plus_one_fn() -> CausalFn:
    """``x -> 2x + 1``, which on bits prepends 1."""
    cert = Certificate(1, Provenance.by_construction("x -> 2x+1"))
    return CausalFn(BINARY, BINARY, 1, lambda w: (1,) + w, certificate=cert, name="x->2x+1",
                    exact=lambda s: (Dyadic.from_bits(s) * 2 + 1).bits)


def tail2(x: Dyadic) -> Dyadic:
    """``x/2`` for even ``x``, ``(x-1)/2`` for odd ``x``."""
    return Dyadic((x.value - x.parity) / 2)


def tail2_fn() -> CausalFn:
    cert = Certificate(-1, Provenance.by_construction("x -> (x - parity)/2"))
    return CausalFn(BINARY, BINARY, -1, lambda w: w[1:], certificate=cert, name="t2",
                    exact=lambda s: tail2(Dyadic.from_bits(s)).bits)


_RATIONAL = re.compile(r"^\s*(-?\d+)\s*/\s*(-?\d+)\s*$")


def parse_dyadic(text: str) -> Dyadic:
    """Decimal integer, ``p/q`` with odd ``q``, or a stream literal."""
    t = text.strip()
    if "(" in t:
        return Dyadic.from_bits(parse_stream(t))
    m = _RATIONAL.match(t)
    if m:
        return from_rational(int(m.group(1)), int(m.group(2)))
    try:
        return Dyadic(int(t))
    except ValueError:
        raise LiteralError(f"not a dyadic literal: {text!r}") from None
