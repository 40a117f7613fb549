"""Stream coalgebras, coinduction and Mealy machines.

A stream coalgebra ``<g, s>`` on a carrier ``X`` observes a symbol ``g(x)``
and steps to ``s(x)``.  Its coinduced map sends ``x`` to the stream
``g(x), g(s(x)), g(s(s(x))), ...``; this is the unique morphism into the
final coalgebra ``<head, tail>`` of streams.
"""
from __future__ import annotations

import itertools
import threading
from dataclasses import dataclass, field
from typing import Any, Callable, Dict, Hashable, Iterable, List, Optional, Sequence, Tuple

from .causality import (
    CausalFn, Certificate, Provenance, agree_to_depth, common_prefix_Dk, compose,
    prepend_fn, tail_fn, BudgetExceeded, DEFAULT_BUDGET,
)
from .streams import Alphabet, EpStream, OpaqueStream, Stream, StreamError, prefix_equiv, prepend

__all__ = [
    "StreamCoalgebra", "StreamFnCoalgebra", "MealyMachine", "MorphismCheckReport",
    "Coinduced", "coinduce", "find_periodic", "coinduce_stream_fn", "final_coalgebra",
    "check_morphism", "uniqueness_check", "mealy_behavior", "mealy_gamma",
    "check_mealy_finality",
]


@dataclass
class StreamCoalgebra:
    """``X -> B x X`` given as ``observe`` and ``step``.

    ``eq`` decides equality on the carrier; stream carriers should pass a
    depth-bounded comparison (see :func:`final_coalgebra`).
    """

    observe: Callable[[Any], int]
    step: Callable[[Any], Any]
    alphabet: Alphabet
    eq: Callable[[Any, Any], bool] = field(default=lambda x, y: x == y)
    name: str = "coalgebra"


def final_coalgebra(alphabet: Alphabet, depth: int) -> StreamCoalgebra:
    """``<head, tail>`` on streams, with equality checked to ``depth`` symbols."""
    return StreamCoalgebra(lambda s: s.at(0), lambda s: s.drop(1), alphabet,
                           eq=lambda s, t: prefix_equiv(s, t, depth), name="<h,t>")


class Coinduced(OpaqueStream):
    """``Phi(x)``: the observations along the step orbit of ``x``.

    The orbit ``s^0(x), s^1(x), ...`` is memoized by position, so carriers
    need not be hashable.
    """

    def __init__(self, coalgebra: StreamCoalgebra, state: Any):
        self.coalgebra = coalgebra
        self._orbit = [state]
        self._orbit_lock = threading.Lock()
        super().__init__(coalgebra.alphabet, self._symbol, name=f"Phi({state!r})")

    def orbit(self, n: int) -> Any:
        """``s^n(x)``."""
        with self._orbit_lock:
            step = self.coalgebra.step
            while len(self._orbit) <= n:
                self._orbit.append(step(self._orbit[-1]))
            return self._orbit[n]

    def _symbol(self, n: int) -> int:
        return self.coalgebra.observe(self.orbit(n))


def coinduce(c: StreamCoalgebra, x: Any) -> Coinduced:
    return Coinduced(c, x)


def find_periodic(c: StreamCoalgebra, x: Hashable, max_steps: int = 10_000) -> Optional[EpStream]:
    """``Phi(x)`` exactly, if the orbit of ``x`` cycles within ``max_steps``.

    Needs hashable states.  Returns ``None`` when no repeat was seen.
    """
    seen: Dict[Hashable, int] = {}
    out: List[int] = []
    state = x
    for i in range(max_steps + 1):
        if state in seen:
            start = seen[state]
            return EpStream(out[:start], out[start:], c.alphabet)
        seen[state] = i
        out.append(c.observe(state))
        state = c.step(state)
    return None


@dataclass
class StreamFnCoalgebra:
    """``<H, T>`` on ``A^w``: ``T`` a causal step, ``H`` an observation.

    ``head_table`` is the witness ``b : A -> B`` with ``H = b . head``.  If it
    is absent, ``observe`` must be given and nothing is certified.
    """

    step: CausalFn
    head_table: Optional[Tuple[int, ...]] = None
    codomain: Optional[Alphabet] = None
    observe: Optional[Callable[[Stream], int]] = None

    def __post_init__(self):
        if self.step.domain != self.step.codomain:
            raise StreamError("the step of a stream-function coalgebra must be an endofunction")
        if self.head_table is not None:
            self.head_table = tuple(self.head_table)
            if len(self.head_table) != self.step.domain.size:
                raise StreamError("head table needs one entry per input symbol")
            if self.codomain is None:
                top = max(self.head_table) + 1
                self.codomain = self.step.domain if top <= self.step.domain.size else Alphabet(top)
            self.codomain.check(self.head_table)
            if self.observe is None:
                b = self.head_table
                self.observe = lambda s: b[s.at(0)]
        elif self.observe is None or self.codomain is None:
            raise StreamError("without a head table, give observe and codomain")

    @property
    def head_table_injective(self) -> bool:
        return self.head_table is not None and len(set(self.head_table)) == len(self.head_table)

    def check_witness(self, samples: Iterable[Stream]) -> Optional[Stream]:
        """First sampled stream where ``observe`` disagrees with ``b . head``."""
        if self.head_table is None:
            return None
        for s in samples:
            if self.observe(s) != self.head_table[s.at(0)]:
                return s
        return None

    def as_stream_coalgebra(self) -> StreamCoalgebra:
        T = self.step
        return StreamCoalgebra(self.observe, T.apply, self.codomain, name="<H,T>")


def coinduce_stream_fn(c: StreamFnCoalgebra, name: str = "phi") -> CausalFn:
    """The coinduced stream function ``phi(s)(n) = H(T^n(s))``.

    Certified 0-causal when ``T`` has index >= -1 (equivalently, is woven
    from 0-causal functions) and ``H`` factors through the head via the
    witness table.  Certified bicausal when, in addition, the table is
    injective and ``T`` was woven from a family of bicausal functions.
    """
    T = c.step
    if c.head_table is None or T.index < -1:
        # no usable witness: evaluate on whole streams, certify nothing
        sc = c.as_stream_coalgebra()
        zero = EpStream.constant(0, T.domain)

        def stream_fn(s):
            return coinduce(sc, s)

        def padded(w):
            return stream_fn(prepend(w, zero)).take(len(w))
        cert = Certificate(0, Provenance("uncertified", "no head-factoring witness"))
        return CausalFn(T.domain, c.codomain, 0, padded, certificate=cert,
                        name=name, stream_fn=stream_fn)

    b = c.head_table
    Tw = T.on_prefix

    def on_prefix(w):
        out = []
        cur = w
        for _ in range(len(w)):
            out.append(b[cur[0]])
            cur = Tw(cur)
        return tuple(out)

    bi = None
    members = T.family.members if T.family is not None else None
    if c.head_table_injective and members is not None and all(
            m.certificate.bicausal is not None for m in members):
        bi = Provenance.by_construction("coinduced from a step woven from bicausal functions "
                                        "with an injective head witness")
    cert = Certificate(0, Provenance.by_construction(
        "coinduced from a step woven from 0-causal functions and a head-factoring witness"),
        bicausal=bi, depends_on=(T.certificate,))
    return CausalFn(T.domain, c.codomain, 0, on_prefix, certificate=cert, name=name)


# -- morphism checks ---------------------------------------------------------------

@dataclass
class MorphismCheckReport:
    verdict: str
    depth: int
    observation_ok: bool = True
    step_ok: bool = True
    witness_state: Any = None
    witness_index: Optional[int] = None
    detail: str = ""
    checked: int = 0

    @property
    def commutes(self) -> bool:
        return self.verdict == "CommutesToDepth"

    def summary(self) -> str:
        if self.commutes:
            return f"CommutesToDepth({self.depth}) over {self.checked} states"
        return (f"Violation at orbit index {self.witness_index} from {self.witness_state!r}: "
                f"{self.detail}")


def check_morphism(m: Callable[[Any], Any], source: StreamCoalgebra, target: StreamCoalgebra,
                   states: Iterable[Any], depth: int) -> MorphismCheckReport:
    """Check ``g_t(m(x)) = g_s(x)`` and ``m(s_s(x)) = s_t(m(x))`` along orbits."""
    if source.alphabet != target.alphabet:
        raise StreamError("source and target observe different alphabets")
    checked = 0
    for x0 in states:
        x = x0
        for i in range(depth):
            mx = m(x)
            if target.observe(mx) != source.observe(x):
                return MorphismCheckReport("Violation", depth, observation_ok=False,
                                           witness_state=x0, witness_index=i,
                                           detail="observation square fails", checked=checked)
            sx = source.step(x)
            if not target.eq(m(sx), target.step(mx)):
                return MorphismCheckReport("Violation", depth, step_ok=False,
                                           witness_state=x0, witness_index=i,
                                           detail="step square fails", checked=checked)
            x = sx
            checked += 1
    return MorphismCheckReport("CommutesToDepth", depth, checked=checked)


def uniqueness_check(c: StreamCoalgebra, candidate: Callable[[Any], Stream],
                     states: Iterable[Any], depth: int) -> MorphismCheckReport:
    """Compare a candidate morphism into streams against the coinduced one."""
    n = 0
    for x in states:
        want = coinduce(c, x).take(depth)
        got = candidate(x).take(depth)
        n += 1
        if got != want:
            i = next(j for j, (p, q) in enumerate(zip(got, want)) if p != q)
            return MorphismCheckReport("Violation", depth, witness_state=x, witness_index=i,
                                       detail=f"candidate deviates from the coinduced map at index {i}",
                                       checked=n)
    return MorphismCheckReport("CommutesToDepth", depth, checked=n)


# -- Mealy machines ------------------------------------------------------------------

@dataclass
class MealyMachine:
    """Deterministic transducer: ``(state, input) -> (output, next state)``."""

    states: Tuple[Hashable, ...]
    inputs: Alphabet
    outputs: Alphabet
    transitions: Dict[Tuple[Hashable, int], Tuple[int, Hashable]]
    initial: Hashable = None

    def __post_init__(self):
        self.states = tuple(self.states)
        if self.initial is None:
            self.initial = self.states[0]
        known = set(self.states)
        if self.initial not in known:
            raise StreamError(f"initial state {self.initial!r} is not a state")
        for x in self.states:
            for a in range(self.inputs.size):
                if (x, a) not in self.transitions:
                    raise StreamError(f"transition missing for state {x!r}, input {a}")
                b, y = self.transitions[(x, a)]
                if b not in self.outputs:
                    raise StreamError(f"output {b!r} of ({x!r}, {a}) outside output alphabet")
                if y not in known:
                    raise StreamError(f"({x!r}, {a}) leads to unknown state {y!r}")

    def run(self, state: Hashable, word: Sequence[int]) -> Tuple[int, ...]:
        out = []
        delta = self.transitions
        for a in word:
            b, state = delta[(state, a)]
            out.append(b)
        return tuple(out)

    @classmethod
    def random(cls, rng, n_states: int, inputs: Alphabet, outputs: Alphabet) -> "MealyMachine":
        states = tuple(range(n_states))
        trans = {(x, a): (rng.randrange(outputs.size), rng.randrange(n_states))
                 for x in states for a in range(inputs.size)}
        return cls(states, inputs, outputs, trans, 0)


def mealy_behavior(mch: MealyMachine, x: Hashable = None) -> CausalFn:
    """The 0-causal function computed by ``mch`` started in state ``x``."""
    x = mch.initial if x is None else x
    if x not in mch.states:
        raise StreamError(f"unknown state {x!r}")

    def on_prefix(w):
        return mch.run(x, w)

    def exact(s: EpStream) -> EpStream:
        out = list(mch.run(x, s.preperiod))
        state = x
        for a in s.preperiod:
            state = mch.transitions[(state, a)][1]
        # (state at the start of a period) determines the rest
        seen = {}
        blocks = []
        while state not in seen:
            seen[state] = len(blocks)
            blocks.append(mch.run(state, s.period))
            for a in s.period:
                state = mch.transitions[(state, a)][1]
        start = seen[state]
        pre = tuple(out) + tuple(itertools.chain.from_iterable(blocks[:start]))
        per = tuple(itertools.chain.from_iterable(blocks[start:]))
        return EpStream(pre, per, mch.outputs)

    cert = Certificate(0, Provenance.by_construction("Mealy machine, one output per input"))
    return CausalFn(mch.inputs, mch.outputs, 0, on_prefix, certificate=cert,
                    name=f"beh({x!r})", exact=exact)


def mealy_gamma(f: CausalFn, a: int) -> Tuple[int, CausalFn]:
    """Rutten's structure map on 0-causal functions.

    ``gamma(f)(a) = (D_1(f . c_a), t . f . c_a)``.
    """
    if f.index < 0:
        raise StreamError(f"{f.name} is not certified 0-causal")
    fa = compose(prepend_fn((a,), f.domain), f)
    out = common_prefix_Dk(fa, 1)[0]
    return out, compose(fa, tail_fn(f.codomain))


def check_mealy_finality(mch: MealyMachine, depth: int, *,
                         budget: int = DEFAULT_BUDGET) -> MorphismCheckReport:
    """The behaviour map is a morphism into the gamma-coalgebra, to ``depth``.

    For each state ``x`` and input ``a`` with transition ``(b, y)``: the
    output of ``gamma(beh(x))(a)`` is ``b`` and its derivative agrees with
    ``beh(y)`` on every input word of length ``depth``.
    """
    if mch.inputs.count(depth) > budget:
        raise BudgetExceeded("finality check exceeds enumeration budget")
    behaviours = {x: mealy_behavior(mch, x) for x in mch.states}
    n = 0
    for x in mch.states:
        for a in range(mch.inputs.size):
            b, y = mch.transitions[(x, a)]
            out, deriv = mealy_gamma(behaviours[x], a)
            if out != b:
                return MorphismCheckReport("Violation", depth, observation_ok=False,
                                           witness_state=x, witness_index=a,
                                           detail=f"gamma output {out} != machine output {b}", checked=n)
            bad = agree_to_depth(deriv, behaviours[y], depth, budget=budget)
            if bad is not None:
                return MorphismCheckReport("Violation", depth, step_ok=False,
                                           witness_state=x, witness_index=a,
                                           detail=f"derivative differs from beh({y!r}) on input {bad}",
                                           checked=n)
            n += 1
    return MorphismCheckReport("CommutesToDepth", depth, checked=n)
