"""The 2-adic Collatz map, its parity-vector conjugacy and the inverse series.

``T(x) = x/2`` for even ``x`` and ``(3x+1)/2`` for odd ``x``.  On bitstreams
``T`` is woven from the identity (even branch) and ``x -> 3x+2`` (odd
branch), both bicausal, so the map ``Q`` coinduced by ``<head, T>`` is a
bicausal bijection of ``2^w``: the parity vector of ``x``.

The inverse of ``Q`` is the series

    Q^-1(s) = - sum_i 2^(d_i) / 3^(i+1)

where ``d_0 < d_1 < ...`` are the positions of the 1 bits of ``s``.  Every
term with ``d_i >= n`` is divisible by ``2^n``, so the first ``n`` bits only
need the terms with ``d_i < n``.
"""
from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from functools import lru_cache
from typing import List, Optional, Union

from .causality import CausalFn, compose, identity_fn
from .coalgebra import StreamCoalgebra, StreamFnCoalgebra, coinduce, coinduce_stream_fn, find_periodic
from .dyadic import Dyadic, affine_fn, inv_mod_pow2
from .streams import BINARY, EpStream, Stream, StreamError
from .woven import FunctionFamily, weave

__all__ = [
    "T", "collatz_T", "C_step", "Trajectory", "trajectory", "SweepResult", "verify_range",
    "collatz_T_fn", "Q_fn", "ParityVector", "parity_vector_Q", "parity_vector_exact",
    "parity_prefix", "inverse_Q", "inverse_Q_residue", "variant_Tmn", "variant_phi",
    "collatz_coalgebra",
]

DEFAULT_MAX_STEPS = 10_000
EXACT_ORBIT_STEPS = 2_000


def collatz_T(x: Dyadic) -> Dyadic:
    """The 2-adic Collatz map, exactly."""
    v = x.value
    if x.parity:
        return Dyadic((3 * v + 1) / 2)
    return Dyadic(v / 2)


T = collatz_T


def C_step(n: int) -> int:
    return (3 * n + 1) // 2 if n & 1 else n // 2


@dataclass
class Trajectory:
    start: int
    steps: List[int]
    reached_one: bool
    stopping_index: Optional[int] = None

    def __len__(self):
        return len(self.steps)


def trajectory(n: int, max_steps: int = DEFAULT_MAX_STEPS) -> Trajectory:
    """Iterate ``C`` from ``n`` until 1 or ``max_steps`` steps."""
    if n < 1:
        raise ValueError("trajectories start at a positive integer")
    steps = [n]
    while steps[-1] != 1 and len(steps) <= max_steps:
        steps.append(C_step(steps[-1]))
    if steps[-1] == 1:
        return Trajectory(n, steps, True, len(steps) - 1)
    return Trajectory(n, steps, False, None)


@dataclass
class SweepResult:
    limit: int
    max_steps: int
    checked: int = 0
    longest: int = 0
    longest_start: int = 1
    failures: List[int] = field(default_factory=list)

    @property
    def ok(self) -> bool:
        return not self.failures and self.checked == self.limit


def verify_range(limit: int, max_steps: int = DEFAULT_MAX_STEPS) -> SweepResult:
    """Check that every ``1 <= n <= limit`` reaches 1 within ``max_steps``.

    Numbers are processed in increasing order; once a trajectory drops below
    its start, the (already known) step count of that smaller number is
    reused.
    """
    steps_to_one = [0] * (limit + 1)
    res = SweepResult(limit, max_steps)
    for n in range(1, limit + 1):
        if n == 1:
            total = 0
        else:
            x, k = n, 0
            while x >= n and k <= max_steps:
                x = (3 * x + 1) >> 1 if x & 1 else x >> 1
                k += 1
            if x >= n:
                res.failures.append(n)
                steps_to_one[n] = max_steps + 1
                res.checked += 1
                continue
            total = k + steps_to_one[x]
        steps_to_one[n] = total
        res.checked += 1
        if total > max_steps:
            res.failures.append(n)
        if total > res.longest:
            res.longest, res.longest_start = total, n
    return res


# -- the conjugacy Q -------------------------------------------------------------------

@lru_cache(maxsize=None)
def collatz_T_fn() -> CausalFn:
    """``T`` on bitstreams, woven from ``x -> x`` and ``x -> 3x+2``."""
    return weave(FunctionFamily.of(identity_fn(BINARY), affine_fn(3, 2)), name="T")


@lru_cache(maxsize=None)
def Q_fn() -> CausalFn:
    """The parity-vector map as a (bicausal-certified) stream function.

    On eventually periodic input the orbit of the rational value is searched
    for a cycle; whether one always exists is open, so the search is bounded
    and ``apply`` falls back to a lazy stream.
    """
    q = coinduce_stream_fn(StreamFnCoalgebra(collatz_T_fn(), head_table=(0, 1)), name="Q")
    q.exact = lambda s: parity_vector_exact(Dyadic.from_bits(s), EXACT_ORBIT_STEPS)
    return q


def collatz_coalgebra() -> StreamCoalgebra:
    """``<parity, T>`` on 2-adic integers."""
    return StreamCoalgebra(lambda x: x.parity, collatz_T, BINARY, name="<h,T>")


@dataclass
class ParityVector:
    """Parity bits ``Q(x)``; ``depth`` bounds valid access for opaque sources."""

    bits: Stream
    depth: Optional[int] = None

    def prefix(self, n: int):
        if self.depth is not None and n > self.depth:
            raise StreamError(f"parity vector only known to depth {self.depth}")
        return self.bits.take(n)

    def at(self, n: int) -> int:
        if self.depth is not None and n >= self.depth:
            raise StreamError(f"parity vector only known to depth {self.depth}")
        return self.bits.at(n)


def parity_vector_Q(x: Union[Dyadic, int, Stream], depth: Optional[int] = None) -> ParityVector:
    """``Q(x)``.  Lazy and unbounded for exact ``x``; needs ``depth`` otherwise."""
    if isinstance(x, int):
        x = Dyadic(x)
    if isinstance(x, Dyadic):
        return ParityVector(coinduce(collatz_coalgebra(), x), depth)
    if isinstance(x, EpStream):
        return ParityVector(coinduce(collatz_coalgebra(), Dyadic.from_bits(x)), depth)
    if depth is None or depth < 1:
        raise StreamError("parity vectors of opaque bitstreams need depth >= 1")
    return ParityVector(Q_fn().apply(x), depth)


def parity_vector_exact(x: Union[Dyadic, int], max_steps: int = DEFAULT_MAX_STEPS) -> Optional[EpStream]:
    """``Q(x)`` as an eventually periodic stream, if the orbit cycles in time."""
    if isinstance(x, int):
        x = Dyadic(x)
    return find_periodic(collatz_coalgebra(), x, max_steps)


def parity_prefix(x: Union[Dyadic, int], n: int) -> tuple:
    """First ``n`` parity bits of an exact ``x``, using residues mod ``2^n``."""
    r = (x if isinstance(x, Dyadic) else Dyadic(x)).residue(n)
    out = []
    for _ in range(n):
        b = r & 1
        out.append(b)
        r = (3 * r + 1) >> 1 if b else r >> 1
    return tuple(out)


def inverse_Q_residue(s: Stream, n: int) -> int:
    """``Q^-1(s) mod 2^n`` from the truncated series."""
    if n < 1:
        raise ValueError("precision must be >= 1")
    mod = 1 << n
    inv3 = inv_mod_pow2(3, n)
    total = 0
    weight = inv3  # 3^-(i+1) for the i-th one bit
    for d, bit in enumerate(s.take(n)):
        if bit:
            total += (1 << d) * weight
            weight = weight * inv3 % mod
    return -total % mod


def inverse_Q(s: Stream, depth: Optional[int] = None) -> Dyadic:
    """``Q^-1(s)``.

    Exact for eventually periodic ``s`` when no depth is given: the periodic
    part is a geometric series summed in closed form.  Otherwise the result
    is the representative in ``[0, 2^depth)`` of ``Q^-1(s) mod 2^depth``.
    """
    if depth is None:
        if not isinstance(s, EpStream):
            raise StreamError("inverse of an opaque stream needs a depth")
        return Dyadic(_inverse_Q_exact(s))
    return Dyadic(inverse_Q_residue(s, depth))


def _inverse_Q_exact(s: EpStream) -> Fraction:
    total = Fraction(0)
    ones = 0
    for d, bit in enumerate(s.preperiod):
        if bit:
            ones += 1
            total += Fraction(2 ** d, 3 ** ones)
    L, P = len(s.preperiod), len(s.period)
    block = Fraction(0)
    c = 0
    for e, bit in enumerate(s.period):
        if bit:
            c += 1
            block += Fraction(2 ** (L + e), 3 ** (ones + c))
    if c:
        ratio = Fraction(2 ** P, 3 ** c)
        total += block / (1 - ratio)
    return -total


# -- T_{m,n} --------------------------------------------------------------------------

def _Q_power(k: int) -> CausalFn:
    if k < 0:
        raise ValueError("iterate count must be non-negative")
    f = identity_fn(BINARY)
    for _ in range(k):
        f = compose(f, Q_fn())
    if k:
        f.name = f"Q^{k}"
    return f


def variant_Tmn(m: int, n: int) -> CausalFn:
    """``T_{m,n}``, woven from ``Q^m`` (even branch) and ``Q^n`` (odd branch).

    ``Q`` is iterated as a self-map of bitstreams, identifying 2-adic
    integers with their bit representations.
    """
    return weave(FunctionFamily.of(_Q_power(m), _Q_power(n)), name=f"T_{m},{n}")


def variant_phi(m: int, n: int) -> CausalFn:
    """The map coinduced by ``<head, T_{m,n}>``."""
    return coinduce_stream_fn(StreamFnCoalgebra(variant_Tmn(m, n), head_table=(0, 1)),
                              name=f"phi_{m},{n}")
