"""Plain-text descriptions of functions, coalgebras and Mealy machines.

A spec file has ``[section]`` headers; ``#`` starts a comment::

    [alphabet]
    size = 2

    [function]
    weave(identity, affine(3, 2))

    [coalgebra]
    states = a b c
    observe = a:0 b:1 c:1
    step = a:b b:c c:a

    [mealy]
    initial = s
    (s, 0) -> (1, t)
    (s, 1) -> (0, s)
    (t, 0) -> (0, s)
    (t, 1) -> (1, t)

Function expressions (over the declared alphabet, binary by default):

    identity | tail | tail(k) | prepend(w) | constant(<stream>)
    affine(a, b) | double | double_plus_one | tail2     (binary only)
    collatz | Q | Qinv(depth) | variant(m, n)          (binary only)
    compose(f, g, ...)     f first, then g
    weave(f_0, ..., f_{k-1})
    coinduce(f)            map coinduced by <head, f>
    invert(f, depth)       level-table inverse of a bicausal f
"""
from __future__ import annotations

import re
from dataclasses import dataclass, field
from typing import Dict, List, Optional, Tuple

from .causality import (CausalFn, compose, constant_fn, identity_fn, invert_bicausal,
                        prepend_fn, tail_fn)
from .coalgebra import MealyMachine, StreamCoalgebra, StreamFnCoalgebra, coinduce_stream_fn
from .dyadic import affine_fn, double_fn, double_plus_one_fn, parse_dyadic, tail2_fn
from .streams import BINARY, Alphabet, StreamError, parse_stream, parse_word
from .woven import FunctionFamily, weave

__all__ = ["SpecError", "Spec", "FiniteCoalgebra", "parse_spec", "load_spec", "parse_function"]


class SpecError(StreamError):
    """Malformed spec file; the message names the offending line."""


@dataclass
class FiniteCoalgebra:
    states: Tuple[str, ...]
    observe: Dict[str, int]
    step: Dict[str, str]
    alphabet: Alphabet

    def as_coalgebra(self) -> StreamCoalgebra:
        return StreamCoalgebra(self.observe.__getitem__, self.step.__getitem__,
                               self.alphabet, name="spec")


@dataclass
class Spec:
    alphabet: Alphabet = BINARY
    function: Optional[CausalFn] = None
    function_text: str = ""
    coalgebra: Optional[FiniteCoalgebra] = None
    mealy: Optional[MealyMachine] = None
    sections: List[str] = field(default_factory=list)


# -- expressions ------------------------------------------------------------------------

_TOKEN = re.compile(r"\s*(?:(?P<name>[A-Za-z_][A-Za-z0-9_]*)|(?P<lit>[-0-9][0-9/]*(?:\([0-9,]*\))?)"
                    r"|(?P<punct>[(),]))")


def _tokenize(text: str) -> List[Tuple[str, str]]:
    out, pos = [], 0
    text = text.rstrip()
    while pos < len(text):
        m = _TOKEN.match(text, pos)
        if not m or m.end() == pos:
            raise SpecError(f"unexpected character {text[pos:].strip()[:1]!r} in {text.strip()!r}")
        kind = m.lastgroup
        out.append((kind, m.group(kind)))
        pos = m.end()
    return out


class _Parser:
    def __init__(self, text: str, alphabet: Alphabet):
        self.text = text
        self.toks = _tokenize(text)
        self.i = 0
        self.A = alphabet

    def peek(self):
        return self.toks[self.i] if self.i < len(self.toks) else (None, None)

    def take(self, value=None):
        kind, tok = self.peek()
        if kind is None or (value is not None and tok != value):
            want = repr(value) if value else "more input"
            raise SpecError(f"expected {want} in {self.text.strip()!r}")
        self.i += 1
        return kind, tok

    def parse(self) -> CausalFn:
        f = self.expr()
        if self.peek()[0] is not None:
            raise SpecError(f"trailing input {self.peek()[1]!r} in {self.text.strip()!r}")
        return f

    def args(self) -> list:
        if self.peek()[1] != "(" or self.peek()[0] != "punct":
            return []
        self.take("(")
        out = []
        if self.peek()[1] == ")":
            self.take(")")
            return out
        while True:
            kind, tok = self.peek()
            if kind == "lit":
                self.take()
                out.append(tok)
            elif tok == "(":
                out.append(self.bare_stream())
            else:
                out.append(self.expr())
            if self.peek()[1] == ",":
                self.take(",")
                continue
            self.take(")")
            return out

    def bare_stream(self) -> str:
        # a stream literal with empty preperiod, e.g. "(01)"
        parts = [self.take("(")[1]]
        while self.peek()[1] != ")":
            parts.append(self.take()[1])
        parts.append(self.take(")")[1])
        return "".join(parts)

    def expr(self) -> CausalFn:
        kind, name = self.take()
        if kind != "name":
            raise SpecError(f"expected a function name, got {name!r}")
        args = self.args()
        return _build(name, args, self.A)


def _int(x, what: str) -> int:
    if not isinstance(x, str):
        raise SpecError(f"{what} must be an integer literal")
    try:
        return int(x)
    except ValueError:
        raise SpecError(f"{what} must be an integer, got {x!r}") from None


def _fn(x, what: str) -> CausalFn:
    if not isinstance(x, CausalFn):
        raise SpecError(f"{what} must be a function expression, got {x!r}")
    return x


def _arity(name: str, args: list, *counts: int) -> None:
    if len(args) not in counts:
        want = " or ".join(str(c) for c in counts)
        raise SpecError(f"{name} takes {want} argument(s), got {len(args)}")


def _binary_only(name: str, A: Alphabet) -> None:
    if A != BINARY:
        raise SpecError(f"{name} needs the binary alphabet")


def _build(name: str, args: list, A: Alphabet) -> CausalFn:
    # local import keeps collatz optional for non-binary specs
    from . import collatz

    if name == "identity":
        _arity(name, args, 0)
        return identity_fn(A)
    if name == "tail":
        _arity(name, args, 0, 1)
        return tail_fn(A, _int(args[0], "tail count") if args else 1)
    if name == "prepend":
        _arity(name, args, 1)
        return prepend_fn(parse_word(str(args[0]), A), A)
    if name == "constant":
        _arity(name, args, 1)
        return constant_fn(A, parse_stream(str(args[0]), A))
    if name == "affine":
        _binary_only(name, A)
        _arity(name, args, 2)
        return affine_fn(parse_dyadic(str(args[0])), parse_dyadic(str(args[1])))
    if name in ("double", "double_plus_one", "tail2"):
        _binary_only(name, A)
        _arity(name, args, 0)
        return {"double": double_fn, "double_plus_one": double_plus_one_fn, "tail2": tail2_fn}[name]()
    if name == "collatz":
        _binary_only(name, A)
        _arity(name, args, 0)
        return collatz.collatz_T_fn()
    if name == "Q":
        _binary_only(name, A)
        _arity(name, args, 0)
        return collatz.Q_fn()
    if name == "Qinv":
        _binary_only(name, A)
        _arity(name, args, 1)
        return invert_bicausal(collatz.Q_fn(), _int(args[0], "Qinv depth"))
    if name == "variant":
        _binary_only(name, A)
        _arity(name, args, 2)
        return collatz.variant_Tmn(_int(args[0], "m"), _int(args[1], "n"))
    if name == "compose":
        if len(args) < 2:
            raise SpecError("compose takes at least 2 functions")
        fs = [_fn(a, "compose argument") for a in args]
        return compose(*fs)
    if name == "weave":
        fs = [_fn(a, "weave argument") for a in args]
        if len(fs) != A.size:
            raise SpecError(f"weave needs one function per symbol ({A.size}), got {len(fs)}")
        return weave(FunctionFamily(tuple(fs)))
    if name == "coinduce":
        _arity(name, args, 1)
        step = _fn(args[0], "coinduce argument")
        return coinduce_stream_fn(StreamFnCoalgebra(step, head_table=tuple(range(A.size))))
    if name == "invert":
        _arity(name, args, 2)
        return invert_bicausal(_fn(args[0], "invert argument"), _int(args[1], "invert depth"))
    raise SpecError(f"unknown function {name!r}")


def parse_function(text: str, alphabet: Alphabet = BINARY) -> CausalFn:
    try:
        f = _Parser(text, alphabet).parse()
    except SpecError:
        raise
    except (StreamError, ValueError) as e:
        raise SpecError(str(e)) from e
    f.name = f.name or text.strip()
    return f


# -- sections ---------------------------------------------------------------------------

_SECTIONS = ("alphabet", "function", "coalgebra", "mealy")
_MEALY_ROW = re.compile(r"^\(\s*(\w+)\s*,\s*(\d+)\s*\)\s*->\s*\(\s*(\d+)\s*,\s*(\w+)\s*\)$")


def _pairs(text: str, lineno: int) -> Dict[str, str]:
    out = {}
    for item in text.split():
        if ":" not in item:
            raise SpecError(f"line {lineno}: expected state:value, got {item!r}")
        k, v = item.split(":", 1)
        out[k] = v
    return out


def parse_spec(text: str) -> Spec:
    blocks: Dict[str, List[Tuple[int, str]]] = {}
    current = None
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        m = re.match(r"^\[(\w+)\]$", line)
        if m:
            current = m.group(1)
            if current not in _SECTIONS:
                raise SpecError(f"line {lineno}: unknown section [{current}]")
            if current in blocks:
                raise SpecError(f"line {lineno}: duplicate section [{current}]")
            blocks[current] = []
            continue
        if current is None:
            raise SpecError(f"line {lineno}: content before the first section")
        blocks[current].append((lineno, line))

    spec = Spec(sections=list(blocks))
    for lineno, line in blocks.get("alphabet", []):
        key, _, val = line.partition("=")
        if key.strip() != "size" or not val.strip().isdigit():
            raise SpecError(f"line {lineno}: expected 'size = <n>'")
        try:
            spec.alphabet = Alphabet(int(val))
        except (StreamError, ValueError) as e:
            raise SpecError(f"line {lineno}: {e}") from None
    A = spec.alphabet

    if "function" in blocks:
        rows = blocks["function"]
        if not rows:
            raise SpecError("[function] section is empty")
        spec.function_text = " ".join(line for _, line in rows)
        try:
            spec.function = parse_function(spec.function_text, A)
        except SpecError as e:
            raise SpecError(f"line {rows[0][0]}: {e}") from None

    if "coalgebra" in blocks:
        spec.coalgebra = _parse_coalgebra(blocks["coalgebra"], A)
    if "mealy" in blocks:
        spec.mealy = _parse_mealy(blocks["mealy"], A)
    return spec


def _parse_coalgebra(rows, A: Alphabet) -> FiniteCoalgebra:
    fields = {}
    for lineno, line in rows:
        key, eq, val = line.partition("=")
        key = key.strip()
        if not eq or key not in ("states", "observe", "step"):
            raise SpecError(f"line {lineno}: expected states/observe/step = ...")
        fields[key] = (lineno, val.strip())
    for key in ("states", "observe", "step"):
        if key not in fields:
            raise SpecError(f"[coalgebra] is missing '{key}'")
    states = tuple(fields["states"][1].split())
    known = set(states)
    lo, obs_raw = fields["observe"][0], _pairs(fields["observe"][1], fields["observe"][0])
    ls, step = fields["step"][0], _pairs(fields["step"][1], fields["step"][0])
    observe = {}
    for x in states:
        if x not in obs_raw:
            raise SpecError(f"line {lo}: no observation for state {x!r}")
        if x not in step:
            raise SpecError(f"line {ls}: no step for state {x!r}")
        if not obs_raw[x].isdigit() or int(obs_raw[x]) not in A:
            raise SpecError(f"line {lo}: observation {obs_raw[x]!r} of {x!r} is not a symbol")
        if step[x] not in known:
            raise SpecError(f"line {ls}: step of {x!r} goes to unknown state {step[x]!r}")
        observe[x] = int(obs_raw[x])
    return FiniteCoalgebra(states, observe, step, A)


def _parse_mealy(rows, A: Alphabet) -> MealyMachine:
    trans = {}
    states: List[str] = []
    initial = None
    outputs = A
    for lineno, line in rows:
        if line.startswith("initial"):
            initial = line.partition("=")[2].strip()
            continue
        if line.startswith("outputs"):
            val = line.partition("=")[2].strip()
            if not val.isdigit():
                raise SpecError(f"line {lineno}: expected 'outputs = <n>'")
            outputs = Alphabet(int(val))
            continue
        m = _MEALY_ROW.match(line)
        if not m:
            raise SpecError(f"line {lineno}: expected '(state, input) -> (output, state)'")
        x, a, b, y = m.group(1), int(m.group(2)), int(m.group(3)), m.group(4)
        if (x, a) in trans:
            raise SpecError(f"line {lineno}: duplicate row for ({x}, {a})")
        if a not in A:
            raise SpecError(f"line {lineno}: input {a} outside the alphabet")
        trans[(x, a)] = (b, y)
        if x not in states:
            states.append(x)
    if not states:
        raise SpecError("[mealy] has no transitions")
    try:
        return MealyMachine(tuple(states), A, outputs, trans, initial)
    except StreamError as e:
        raise SpecError(f"[mealy]: {e}") from None


def load_spec(path: str) -> Spec:
    try:
        with open(path, encoding="utf-8") as fh:
            text = fh.read()
    except OSError as e:
        raise SpecError(f"cannot read spec file {path}: {e.strerror}") from None
    return parse_spec(text)
