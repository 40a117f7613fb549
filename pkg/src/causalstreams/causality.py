"""k-causal stream functions, certificates, level-map chains and checkers.

A :class:`CausalFn` is driven by a *word function*: given an input prefix of
length ``j`` it returns the ``max(0, j + k)`` output symbols that prefix
determines, where ``k`` is the claimed causality index.  Stream application,
single-symbol evaluation and level tables are all derived from it, so an
index-``k`` function never reads more input than its index allows.

Causality of an arbitrary function is not decidable.  Functions therefore
carry a :class:`Certificate` saying how the index is known: by construction
(the combinators in this package), by a depth-bounded check, or merely
asserted by the caller.  The ``check_*`` functions perform the bounded
checks and return a :class:`CausalityReport`.
"""
from __future__ import annotations

import random
from dataclasses import dataclass, field
from typing import Callable, Dict, List, Mapping, Optional, Sequence, Tuple, Union

from .streams import (
    BINARY, Alphabet, EpStream, OpaqueStream, Stream, StreamError, Word, format_stream, format_word,
    prepend,
)

__all__ = [
    "CausalityError", "ChainDepthExceeded", "BudgetExceeded", "InvalidCertificate",
    "NotBijective", "Provenance", "Certificate", "CausalFn", "Witness",
    "CausalityReport", "LevelMapChain", "DEFAULT_BUDGET", "offsets",
    "identity_fn", "tail_fn", "prepend_fn", "constant_fn", "from_word_function",
    "from_stream_function", "compose", "level_map", "level_chain",
    "from_level_chain", "check_k_causal", "check_bicausal",
    "check_bijection_levels", "invert_bicausal", "common_prefix_Dk", "decompose",
    "random_level_chain", "agree_to_depth",
]

Symbols = Tuple[int, ...]
WordFn = Callable[[Symbols], Symbols]

DEFAULT_BUDGET = 2 ** 16
SPOT_LOOKAHEAD = 8  # extra input symbols fed to padding spot checks


class CausalityError(StreamError):
    pass


class ChainDepthExceeded(CausalityError, IndexError):
    """Output requested beyond the depth a finite level chain stores."""


class BudgetExceeded(CausalityError):
    pass


class InvalidCertificate(CausalityError):
    pass


class NotBijective(CausalityError):
    def __init__(self, report: "CausalityReport"):
        super().__init__(f"level maps are not bijective: {report.summary()}")
        self.report = report


# -- certificates ----------------------------------------------------------------

CONSTRUCTION = "construction"
CHECKED = "checked"
ASSERTED = "asserted"
UNCERTIFIED = "uncertified"


@dataclass(frozen=True)
class Provenance:
    kind: str
    detail: str = ""
    depth: Optional[int] = None

    @classmethod
    def by_construction(cls, detail: str) -> "Provenance":
        return cls(CONSTRUCTION, detail)

    @classmethod
    def checked_to_depth(cls, depth: int, detail: str = "") -> "Provenance":
        return cls(CHECKED, detail, depth)

    @classmethod
    def asserted(cls, detail: str = "caller claim") -> "Provenance":
        return cls(ASSERTED, detail)

    def __str__(self):
        if self.kind == CHECKED:
            return f"checked to depth {self.depth}" + (f" ({self.detail})" if self.detail else "")
        return f"{self.kind}: {self.detail}" if self.detail else self.kind


class Certificate:
    """Why a function is believed to have its index (and possibly be bicausal).

    Certificates built from other certificates list them in ``depends_on``;
    revoking any of those makes this one untrusted too.
    """

    def __init__(self, index: int, provenance: Provenance,
                 bicausal: Optional[Provenance] = None,
                 depends_on: Sequence["Certificate"] = ()):
        self.index = index
        self.provenance = provenance
        self.bicausal = bicausal
        self.depends_on = tuple(depends_on)
        self.revoked: Optional[str] = None

    def revoke(self, reason: str) -> None:
        self.revoked = reason

    @property
    def trusted(self) -> bool:
        return (self.revoked is None
                and self.provenance.kind in (CONSTRUCTION, CHECKED)
                and all(d.trusted for d in self.depends_on))

    def satisfies(self, k: int) -> bool:
        """A certificate at index k also certifies every index below k."""
        return self.trusted and k <= self.index

    @property
    def bicausal_trusted(self) -> bool:
        return self.bicausal is not None and self.trusted

    def __repr__(self):
        bi = f", bicausal ({self.bicausal})" if self.bicausal else ""
        rv = f", REVOKED: {self.revoked}" if self.revoked else ""
        return f"<Certificate index {self.index} ({self.provenance}){bi}{rv}>"


def offsets(k: int) -> Tuple[int, int]:
    """The (m, n) with min(m, n) = 0 and k = m - n."""
    return (k, 0) if k >= 0 else (0, -k)


# -- causal functions ----------------------------------------------------------------

class CausalFn:
    """A stream function ``A^w -> B^w`` with a claimed causality index.

    ``on_prefix(w)`` must return exactly ``max(0, len(w) + index)`` symbols.
    ``exact`` optionally maps eventually periodic inputs to exact eventually
    periodic outputs, returning ``None`` when it cannot find one.  ``stream_fn`` marks a function given only on whole
    streams; its word function then pads with zeros.
    """

    def __init__(self, domain: Alphabet, codomain: Alphabet, index: int, on_prefix: WordFn, *,
                 certificate: Optional[Certificate] = None, name: str = "f",
                 exact: Optional[Callable[[EpStream], EpStream]] = None,
                 stream_fn: Optional[Callable[[Stream], Stream]] = None,
                 family=None):
        self.domain = domain
        self.codomain = codomain
        self.index = index
        self.on_prefix = on_prefix
        self.certificate = certificate or Certificate(index, Provenance.asserted())
        self.name = name
        self.exact = exact
        self.stream_fn = stream_fn
        self.family = family

    def __repr__(self):
        return f"<CausalFn {self.name}: index {self.index}, {self.certificate.provenance}>"

    @property
    def bicausal(self) -> bool:
        return self.certificate.bicausal is not None

    def input_length(self, out_len: int) -> int:
        return max(0, out_len - self.index)

    def words(self, w: Sequence[int]) -> Symbols:
        """Output prefix determined by the finite input ``w``."""
        return self.on_prefix(tuple(w))

    def image_prefix(self, s: Stream, length: int) -> Symbols:
        """The first ``length`` symbols of ``f(s)``."""
        if self.stream_fn is not None:
            return self.stream_fn(s).take(length)
        return self.on_prefix(s.take(self.input_length(length)))[:length]

    def evaluate(self, s: Stream, n: int) -> int:
        """Output symbol ``n``, reading at most ``max(0, n + 1 - index)`` inputs."""
        return self.image_prefix(s, n + 1)[n]

    def apply(self, s: Stream) -> Stream:
        if s.alphabet != self.domain:
            raise StreamError(f"{self.name}: input alphabet does not match domain")
        if self.exact is not None and isinstance(s, EpStream):
            r = self.exact(s)
            if r is not None:
                return r
        if self.stream_fn is not None:
            return self.stream_fn(s)
        f = self
        return OpaqueStream(self.codomain, block=lambda n: f.image_prefix(s, n),
                            name=f"{self.name}(...)")

    __call__ = apply

    def padded_image(self, w: Symbols, pad: int, length: int, lookahead: int = 0) -> Symbols:
        """First ``length`` output symbols on the input ``w pad pad pad ...``.

        ``lookahead`` feeds that many input symbols beyond what the claimed
        index needs; a genuinely causal function ignores them, so spot checks
        use it to expose functions that peek ahead.
        """
        if self.stream_fn is not None:
            s = prepend(w, EpStream.constant(pad, self.domain))
            return self.stream_fn(s).take(length)
        r = self.input_length(length)
        if r + lookahead > len(w):
            inp = tuple(w) + (pad,) * (r + lookahead - len(w))
        else:
            inp = tuple(w[:r + lookahead])
        try:
            return self.on_prefix(inp)[:length]
        except ChainDepthExceeded:
            # finite chains cannot take lookahead beyond their depth
            if not lookahead:
                raise
            return self.on_prefix(inp[:r])[:length]

    def probe(self, s: Stream, length: int, lookahead: int = 0) -> Symbols:
        """Like :meth:`image_prefix` but reading ``lookahead`` extra input symbols."""
        if self.stream_fn is not None:
            return self.stream_fn(s).take(length)
        r = self.input_length(length)
        try:
            return self.on_prefix(s.take(r + lookahead))[:length]
        except ChainDepthExceeded:
            if not lookahead:
                raise
            return self.on_prefix(s.take(r))[:length]


def identity_fn(alphabet: Alphabet) -> CausalFn:
    cert = Certificate(0, Provenance.by_construction("identity"),
                       bicausal=Provenance.by_construction("identity"))
    return CausalFn(alphabet, alphabet, 0, lambda w: w, certificate=cert,
                    name="id", exact=lambda s: s, stream_fn=None)


def tail_fn(alphabet: Alphabet, times: int = 1) -> CausalFn:
    """``t^times``: drop the first ``times`` symbols; index ``-times``."""
    if times < 0:
        raise ValueError("times must be non-negative")
    if times == 0:
        return identity_fn(alphabet)
    cert = Certificate(-times, Provenance.by_construction(f"tail^{times}"))
    return CausalFn(alphabet, alphabet, -times, lambda w: w[times:], certificate=cert,
                    name="t" if times == 1 else f"t^{times}", exact=lambda s: s.drop(times))


def prepend_fn(w: Union[Word, Sequence[int]], alphabet: Optional[Alphabet] = None) -> CausalFn:
    """``c_w``: prepend the word ``w``; index ``len(w)``.  Raw words default to binary."""
    if isinstance(w, Word):
        alphabet, sym = w.alphabet, w.symbols
    else:
        alphabet = alphabet or BINARY
        sym = alphabet.check(w)
    k = len(sym)
    cert = Certificate(k, Provenance.by_construction(f"prepend {format_word(sym, alphabet)}"))
    return CausalFn(alphabet, alphabet, k, lambda u: sym + u, certificate=cert,
                    name=f"c_{format_word(sym, alphabet) or 'e'}",
                    exact=lambda s: prepend(sym, s))


def constant_fn(domain: Alphabet, output: EpStream, index: int = 0) -> CausalFn:
    """The constant function; certified at the given (finite) index."""
    cert = Certificate(index, Provenance.by_construction(f"constant {format_stream(output)}"))
    return CausalFn(domain, output.alphabet, index,
                    lambda w: output.take(max(0, len(w) + index)),
                    certificate=cert, name=f"const {format_stream(output)}",
                    exact=lambda s: output)


def from_word_function(fn: WordFn, domain: Alphabet, codomain: Alphabet, index: int,
                       name: str = "f") -> CausalFn:
    """Wrap a caller-supplied word function; its index is only asserted."""
    def on_prefix(w):
        out = tuple(fn(w))
        need = max(0, len(w) + index)
        if len(out) < need:
            raise CausalityError(f"{name} produced {len(out)} symbols for a length-{len(w)} input, needs {need}")
        return out[:need]
    return CausalFn(domain, codomain, index, on_prefix, name=name)


def from_stream_function(fn: Callable[[Stream], Stream], domain: Alphabet, codomain: Alphabet,
                         index: int, name: str = "f") -> CausalFn:
    """Wrap a whole-stream function; its index is only asserted.

    The word function pads with the all-zeros stream, so a false claim shows
    up as padding dependence (see :func:`level_map`, :func:`common_prefix_Dk`).
    """
    zero = EpStream.constant(0, domain)

    def on_prefix(w):
        return fn(prepend(w, zero)).take(max(0, len(w) + index))
    return CausalFn(domain, codomain, index, on_prefix, name=name, stream_fn=fn)


def compose(f: CausalFn, g: CausalFn, *more: CausalFn) -> CausalFn:
    """``g . f`` (apply ``f`` first); indices add."""
    if more:
        return compose(compose(f, g), *more)
    if f.codomain != g.domain:
        raise StreamError(f"cannot compose {f.name} into {g.name}: alphabet mismatch")
    k = f.index + g.index
    fw, gw = f.on_prefix, g.on_prefix

    def on_prefix(w):
        return gw(fw(w))[:max(0, len(w) + k)]

    bi = None
    if f.certificate.bicausal is not None and g.certificate.bicausal is not None:
        bi = Provenance.by_construction("composition of bicausal functions")
    cert = Certificate(k, Provenance.by_construction(f"composition, indices {f.index}+{g.index}"),
                       bicausal=bi, depends_on=(f.certificate, g.certificate))
    exact = None
    if f.exact is not None and g.exact is not None:
        fe, ge = f.exact, g.exact
        def exact(s):
            r = fe(s)
            return None if r is None else ge(r)
    stream_fn = None
    if f.stream_fn is not None or g.stream_fn is not None:
        stream_fn = lambda s: g.apply(f.apply(s))  # noqa: E731
    return CausalFn(f.domain, g.codomain, k, on_prefix, certificate=cert,
                    name=f"{g.name}∘{f.name}", exact=exact, stream_fn=stream_fn)


# -- reports ---------------------------------------------------------------------

VERIFIED = "Verified"
FALSIFIED = "Falsified"
INCONCLUSIVE = "Inconclusive"


@dataclass(frozen=True)
class Witness:
    """A concrete counterexample.

    For pair witnesses ``sigma``/``tau`` are the inputs, ``agree`` the number
    of leading input symbols they share and ``differ_at`` the first output
    index at which the images disagree (``None`` for injectivity failures,
    where the images agree).  Chain witnesses use ``level`` and ``word``.
    """

    sigma: Optional[Stream] = None
    tau: Optional[Stream] = None
    agree: Optional[int] = None
    differ_at: Optional[int] = None
    level: Optional[int] = None
    word: Optional[Symbols] = None
    detail: str = ""

    def describe(self, alphabet: Optional[Alphabet] = None) -> str:
        parts = []
        if self.sigma is not None:
            parts.append(f"sigma={_literal(self.sigma)}")
            parts.append(f"tau={_literal(self.tau)}")
        if self.agree is not None:
            parts.append(f"agree={self.agree}")
        if self.differ_at is not None:
            parts.append(f"differ_at={self.differ_at}")
        if self.level is not None:
            parts.append(f"level={self.level}")
        if self.word is not None:
            parts.append(f"word={format_word(self.word, alphabet) if alphabet else self.word}")
        if self.detail:
            parts.append(self.detail)
        return " ".join(parts)


def _literal(s) -> str:
    return format_stream(s) if isinstance(s, EpStream) else repr(s)


@dataclass
class CausalityReport:
    verdict: str
    check: str
    index: Optional[int]
    depth: int
    witness: Optional[Witness] = None
    samples: int = 0
    exhaustive_depth: Optional[int] = None
    stats: Dict[str, object] = field(default_factory=dict)
    note: str = ""

    @property
    def verified(self) -> bool:
        return self.verdict == VERIFIED

    @property
    def falsified(self) -> bool:
        return self.verdict == FALSIFIED

    def summary(self) -> str:
        s = f"{self.check}: {self.verdict}"
        if self.index is not None:
            s += f" (index {self.index})"
        s += f" depth {self.depth}"
        if self.witness is not None:
            s += f"; {self.witness.describe()}"
        if self.note:
            s += f"; {self.note}"
        return s

    def to_record(self) -> str:
        """Structured text record, one ``key: value`` per line."""
        lines = [f"check: {self.check}", f"verdict: {self.verdict}"]
        if self.index is not None:
            lines.append(f"index: {self.index}")
        lines.append(f"depth: {self.depth}")
        if self.exhaustive_depth is not None:
            lines.append(f"exhaustive_depth: {self.exhaustive_depth}")
        if self.samples:
            lines.append(f"samples: {self.samples}")
        for key in sorted(self.stats):
            lines.append(f"{key}: {self.stats[key]}")
        if self.witness is not None:
            lines.append(f"witness: {self.witness.describe()}")
        if self.note:
            lines.append(f"note: {self.note}")
        return "\n".join(lines)

    def recheck(self, f: CausalFn) -> bool:
        """Re-evaluate a pair witness; True if it still violates the claim."""
        w = self.witness
        if w is None or w.sigma is None:
            return False
        la = self.depth + 2

        def out(s, n):
            return f.probe(s, n, max(0, la - f.input_length(n)))
        if self.check == "k-causal":
            i = w.agree + self.index
            return out(w.sigma, i) != out(w.tau, i)
        if self.check in ("bicausal", "bijection"):
            for j in (w.agree, w.agree + 1):
                same_in = w.sigma.take(j) == w.tau.take(j)
                same_out = out(w.sigma, j) == out(w.tau, j)
                if same_in != same_out:
                    return True
        return False


def _first_diff(a: Symbols, b: Symbols) -> int:
    for i, (x, y) in enumerate(zip(a, b)):
        if x != y:
            return i
    return min(len(a), len(b))


def _pad_stream(w: Symbols, pad: int, alphabet: Alphabet) -> EpStream:
    return EpStream(w, (pad,), alphabet)


# -- checkers ---------------------------------------------------------------------

def check_k_causal(f: CausalFn, k: int, depth: int, *, samples: int = 2000, seed: int = 0,
                   budget: int = DEFAULT_BUDGET) -> CausalityReport:
    """Test ``s =_j t  =>  f(s) =_{j+k} f(t)`` for all ``j <= depth``.

    Exhaustive over every input prefix of length ``depth`` (each padded with
    the all-zeros and the all-last-symbol streams) when ``|A|^depth`` fits
    the budget; otherwise ``samples`` random pairs drawn with ``seed``.
    """
    if depth < 1:
        raise ValueError("depth must be >= 1")
    A = f.domain
    out_len = depth + k
    if out_len <= 0:
        return CausalityReport(VERIFIED, "k-causal", k, depth, exhaustive_depth=depth,
                               note="no tested level constrains the output")
    if A.count(depth) <= budget:
        return _check_k_causal_exhaustive(f, k, depth)
    if samples <= 0:
        return CausalityReport(INCONCLUSIVE, "k-causal", k, depth, note="budget prevents testing")
    rng = random.Random(seed)
    for _ in range(samples):
        j = rng.randrange(0, depth + 1)
        i = j + k
        if i <= 0:
            continue
        u = tuple(rng.randrange(A.size) for _ in range(j))
        s, t = _random_pair(rng, A, u, depth)
        la = max(0, depth + 2 - f.input_length(i))
        fs, ft = f.probe(s, i, la), f.probe(t, i, la)
        if fs != ft:
            return CausalityReport(FALSIFIED, "k-causal", k, depth,
                                   Witness(s, t, j, _first_diff(fs, ft)), samples=samples)
    return CausalityReport(VERIFIED, "k-causal", k, depth, samples=samples,
                           note="randomized; budget exceeded for exhaustive search")


def _random_pair(rng: random.Random, A: Alphabet, shared: Symbols, depth: int):
    extra = depth - len(shared) + 2
    a = tuple(rng.randrange(A.size) for _ in range(extra))
    b = tuple(rng.randrange(A.size) for _ in range(extra))
    if A.size > 1 and a[0] == b[0]:
        b = ((a[0] + 1 + rng.randrange(A.size - 1)) % A.size,) + b[1:]
    s = EpStream(shared + a, (rng.randrange(A.size),), A)
    t = EpStream(shared + b, (rng.randrange(A.size),), A)
    return s, t


def _padded_inputs(A: Alphabet, depth: int):
    pads = (0,) if A.size == 1 else (0, A.last)
    for w in A.words(depth):
        for p in pads:
            yield w, p


def _check_k_causal_exhaustive(f: CausalFn, k: int, depth: int) -> CausalityReport:
    A = f.domain
    out_len = depth + k
    # feed the whole tested prefix plus some padding whatever index f claims
    la = max(0, depth + 2 - f.input_length(out_len))
    images = [(w, p, f.padded_image(w, p, out_len, la)) for w, p in _padded_inputs(A, depth)]
    for j in range(depth + 1):
        i = j + k
        if i <= 0:
            continue
        seen: Dict[Symbols, Tuple[Symbols, Symbols, int]] = {}
        for w, p, out in images:
            key = w[:j] if j < depth else w
            o = out[:i]
            prev = seen.get(key)
            if prev is None:
                seen[key] = (o, w, p)
            elif prev[0] != o:
                s, t = _pad_stream(prev[1], prev[2], A), _pad_stream(w, p, A)
                return CausalityReport(FALSIFIED, "k-causal", k, depth,
                                       Witness(s, t, j, _first_diff(prev[0], o)),
                                       exhaustive_depth=depth,
                                       stats={"inputs": len(images)})
    return CausalityReport(VERIFIED, "k-causal", k, depth, exhaustive_depth=depth,
                           stats={"inputs": len(images)})


def check_bicausal(f: CausalFn, depth: int, *, samples: int = 2000, seed: int = 0,
                   budget: int = DEFAULT_BUDGET) -> CausalityReport:
    """Test ``s =_n t  <=>  f(s) =_n f(t)`` for all ``n <= depth``."""
    forward = check_k_causal(f, 0, depth, samples=samples, seed=seed, budget=budget)
    if forward.falsified:
        return CausalityReport(FALSIFIED, "bicausal", 0, depth, forward.witness,
                               samples=forward.samples, exhaustive_depth=forward.exhaustive_depth,
                               note="not non-expanding")
    A = f.domain
    if A.count(depth) > budget:
        rng = random.Random(seed)
        for _ in range(samples):
            j = rng.randrange(0, depth)
            u = tuple(rng.randrange(A.size) for _ in range(j))
            s, t = _random_pair(rng, A, u, depth)
            if f.image_prefix(s, j + 1) == f.image_prefix(t, j + 1):
                return CausalityReport(FALSIFIED, "bicausal", 0, depth, Witness(s, t, j, None),
                                       samples=samples, note="distance shrinks")
        return CausalityReport(INCONCLUSIVE, "bicausal", 0, depth, samples=samples,
                               note="beyond enumeration budget; sampled pairs only")
    table = {w: f.padded_image(w, 0, depth) for w in A.words(depth)}
    sizes = {}
    for j in range(1, depth + 1):
        back: Dict[Symbols, Symbols] = {}
        for w, out in table.items():
            u, o = w[:j], out[:j]
            prev = back.setdefault(o, u)
            if prev != u:
                a, b = _pad_stream(prev, 0, A), _pad_stream(u, 0, A)
                agree = _first_diff(prev, u)
                return CausalityReport(FALSIFIED, "bicausal", 0, depth, Witness(a, b, agree, None),
                                       exhaustive_depth=depth,
                                       note=f"level map {j} not injective")
        sizes[f"level_{j}_image"] = len(back)
    return CausalityReport(VERIFIED, "bicausal", 0, depth, exhaustive_depth=depth, stats=sizes)


def _bijection_levels(f: CausalFn, j_max: int, budget: int):
    A = f.domain
    if f.codomain != A:
        raise StreamError("bijection check needs equal domain and codomain")
    if A.count(j_max) > budget:
        raise BudgetExceeded(f"|A|^{j_max} = {A.count(j_max)} exceeds budget {budget}")
    tables: List[Dict[Symbols, Symbols]] = []
    stats = {}
    for j in range(j_max + 1):
        table = {}
        inverse: Dict[Symbols, Symbols] = {}
        for w in A.words(j):
            out = f.padded_image(w, 0, j)
            if A.size > 1 and f.padded_image(w, A.last, j, lookahead=SPOT_LOOKAHEAD) != out:
                s, t = _pad_stream(w, 0, A), _pad_stream(w, A.last, A)
                return CausalityReport(FALSIFIED, "bijection", 0, j_max, Witness(s, t, j, None,
                                       level=j, word=w, detail="level map depends on padding"),
                                       stats=stats), tables
            prev = inverse.setdefault(out, w)
            if prev != w:
                a, b = _pad_stream(prev, 0, A), _pad_stream(w, 0, A)
                return CausalityReport(FALSIFIED, "bijection", 0, j_max,
                                       Witness(a, b, _first_diff(prev, w), None, level=j, word=w,
                                               detail="level map not injective"),
                                       stats=stats), tables
            table[w] = out
        stats[f"level_{j}"] = len(table)
        tables.append(table)
    return CausalityReport(VERIFIED, "bijection", 0, j_max, exhaustive_depth=j_max,
                           stats=stats), tables


def check_bijection_levels(f: CausalFn, j_max: int, *,
                           budget: int = DEFAULT_BUDGET) -> CausalityReport:
    """Materialize every level map ``f_j`` for ``j <= j_max`` and test bijectivity.

    Each table is computed with all-zeros padding and spot-checked against
    all-last-symbol padding.
    """
    return _bijection_levels(f, j_max, budget)[0]


# -- level maps ---------------------------------------------------------------

def level_map(f: CausalFn, level: int, *, padding: int = 0,
              budget: int = DEFAULT_BUDGET) -> Dict[Symbols, Symbols]:
    """The finite map ``f_level : A^(n+level) -> B^(m+level)`` as a table."""
    m, n = offsets(f.index)
    width = n + level
    if f.domain.count(width) > budget:
        raise BudgetExceeded(f"|A|^{width} = {f.domain.count(width)} exceeds budget {budget}")
    return {w: f.padded_image(w, padding, m + level) for w in f.domain.words(width)}


@dataclass
class LevelMapChain:
    """Finite maps ``f_l : A^(n+l) -> B^(m+l)`` for ``0 <= l <= depth``.

    Each level is a table (mapping) or a word function.
    """

    domain: Alphabet
    codomain: Alphabet
    m: int
    n: int
    levels: List[Union[Mapping[Symbols, Symbols], Callable[[Symbols], Symbols]]]

    def __post_init__(self):
        if min(self.m, self.n) != 0 or self.m < 0 or self.n < 0:
            raise ValueError("chain offsets need min(m, n) = 0")

    @property
    def index(self) -> int:
        return self.m - self.n

    @property
    def depth(self) -> int:
        return len(self.levels) - 1

    def apply(self, level: int, w: Symbols) -> Symbols:
        fl = self.levels[level]
        return fl(w) if callable(fl) else fl[w]

    def check_coherence(self, budget: int = DEFAULT_BUDGET) -> CausalityReport:
        """Verify totality, output lengths and ``pi . f_(l+1) = f_l . pi``."""
        A, m, n = self.domain, self.m, self.n
        for level in range(self.depth + 1):
            width = n + level
            if A.count(width) > budget:
                raise BudgetExceeded(f"level {level} exceeds enumeration budget")
            for v in A.words(width):
                try:
                    out = self.apply(level, v)
                except KeyError:
                    return CausalityReport(FALSIFIED, "coherence", self.index, self.depth,
                                           Witness(level=level, word=v, detail="missing entry"))
                if len(out) != m + level or any(b not in self.codomain for b in out):
                    return CausalityReport(FALSIFIED, "coherence", self.index, self.depth,
                                           Witness(level=level, word=v, detail="bad output word"))
                if level > 0 and out[:m + level - 1] != self.apply(level - 1, v[:-1]):
                    return CausalityReport(FALSIFIED, "coherence", self.index, self.depth,
                                           Witness(level=level, word=v,
                                                   detail=f"ladder fails between levels {level - 1} and {level}"))
        return CausalityReport(VERIFIED, "coherence", self.index, self.depth,
                               exhaustive_depth=self.depth)

    def inverted(self) -> "LevelMapChain":
        """Chain of inverse tables; every level must be a bijection."""
        if self.m or self.n or self.domain != self.codomain:
            raise ValueError("only index-0 endo-chains can be inverted")
        inv = []
        for level in range(self.depth + 1):
            table = {}
            for w in self.domain.words(level):
                out = self.apply(level, w)
                if out in table:
                    raise CausalityError(f"level {level} is not injective at {w} and {table[out]}")
                table[out] = w
            inv.append(table)
        return LevelMapChain(self.domain, self.codomain, 0, 0, inv)


def level_chain(f: CausalFn, depth: int, *, padding: int = 0,
                budget: int = DEFAULT_BUDGET) -> LevelMapChain:
    """Extract the tables ``f_0 .. f_depth`` of a certified function."""
    m, n = offsets(f.index)
    tables = [level_map(f, lv, padding=padding, budget=budget) for lv in range(depth + 1)]
    return LevelMapChain(f.domain, f.codomain, m, n, tables)


def from_level_chain(chain: LevelMapChain, *, check: bool = True, name: str = "lim",
                     depends_on: Sequence[Certificate] = (),
                     bicausal: Optional[Provenance] = None) -> CausalFn:
    """The inverse limit of a chain, up to its stored depth.

    Output beyond the stored depth raises :class:`ChainDepthExceeded`.
    """
    if check:
        report = chain.check_coherence()
        if not report.verified:
            raise CausalityError(f"incoherent chain: {report.summary()}")
    m, n, depth, k = chain.m, chain.n, chain.depth, chain.index
    apply = chain.apply

    def on_prefix(w):
        level = len(w) - n
        if level < 0:
            return ()
        if level > depth:
            raise ChainDepthExceeded(f"{name}: input length {len(w)} needs level {level} > stored depth {depth}")
        return apply(level, w)

    cert = Certificate(k, Provenance.by_construction(f"inverse limit of coherent chain, depth {depth}"),
                       bicausal=bicausal, depends_on=depends_on)
    return CausalFn(chain.domain, chain.codomain, k, on_prefix, certificate=cert, name=name)


def invert_bicausal(f: CausalFn, depth: int, *, budget: int = DEFAULT_BUDGET) -> CausalFn:
    """Inverse of a bicausal endofunction, from its inverted level tables."""
    report, tables = _bijection_levels(f, depth, budget)
    if not report.verified:
        raise NotBijective(report)
    chain = LevelMapChain(f.domain, f.domain, 0, 0, tables).inverted()
    return from_level_chain(chain, check=True, name=f"{f.name}^-1",
                            depends_on=(f.certificate,),
                            bicausal=Provenance.by_construction(f"inverted bijective level maps to depth {depth}"))


def common_prefix_Dk(f: CausalFn, k: Optional[int] = None) -> Word:
    """``D_k(f)``: the k-prefix shared by every output of a k-causal ``f``."""
    k = f.index if k is None else k
    if k < 1:
        raise ValueError("D_k needs k >= 1")
    if k > f.index:
        raise ValueError(f"{f.name} is only claimed {f.index}-causal, not {k}-causal")
    w0 = f.padded_image((), 0, k)
    if f.domain.size > 1:
        w1 = f.padded_image((), f.domain.last, k, lookahead=SPOT_LOOKAHEAD)
        if w0 != w1:
            raise InvalidCertificate(f"{f.name}: outputs on different paddings differ in the first {k} symbols")
    return Word(f.codomain, w0)


def decompose(f: CausalFn, k: Optional[int] = None) -> Tuple[Word, CausalFn]:
    """Split a k-causal ``f`` (k > 0) as ``c_w . f_hat`` with ``f_hat`` 0-causal."""
    k = f.index if k is None else k
    if k <= 0:
        raise ValueError("decompose needs k > 0")
    w = common_prefix_Dk(f, k)
    f_hat = compose(f, tail_fn(f.codomain, k))
    return w, f_hat


def agree_to_depth(f: CausalFn, g: CausalFn, depth: int, *,
                   budget: int = DEFAULT_BUDGET) -> Optional[Symbols]:
    """Compare ``f`` and ``g`` on every input prefix of length ``depth``.

    Both outputs are compared on ``depth + min(index)`` symbols (inputs padded
    with zeros).  Returns ``None`` on agreement, else a disagreeing input word.
    """
    if f.domain != g.domain:
        raise StreamError("domain mismatch")
    if f.domain.count(depth) > budget:
        raise BudgetExceeded("agreement check exceeds enumeration budget")
    out_len = max(0, depth + min(f.index, g.index))
    for w in f.domain.words(depth):
        if f.padded_image(w, 0, out_len) != g.padded_image(w, 0, out_len):
            return w
    return None


# -- random chains (for property tests and experiments) ----------------------------

def random_level_chain(domain: Alphabet, codomain: Alphabet, k: int, depth: int,
                       rng: random.Random, *, bijective: bool = False) -> LevelMapChain:
    """A random coherent chain for an index-``k`` function.

    With ``bijective`` (needs ``k = 0`` and equal alphabets) each level
    extends the previous one by a random permutation of the appended symbol,
    chosen independently for every preimage word, so every level is a
    bijection.
    """
    if bijective and (k != 0 or domain != codomain):
        raise ValueError("bijective chains need k = 0 and equal alphabets")
    m, n = offsets(k)
    B = codomain.size
    first = tuple(rng.randrange(B) for _ in range(m))
    tables = [{w: first for w in domain.words(n)}]
    for level in range(depth):
        prev = tables[-1]
        nxt = {}
        for w, out in prev.items():
            if bijective:
                perm = list(range(B))
                rng.shuffle(perm)
                for a in range(domain.size):
                    nxt[w + (a,)] = out + (perm[a],)
            else:
                for a in range(domain.size):
                    nxt[w + (a,)] = out + (rng.randrange(B),)
        tables.append(nxt)
    return LevelMapChain(domain, codomain, m, n, tables)
