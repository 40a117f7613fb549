"""Weaving: build ``T(s) = f_{head(s)}(tail(s))`` from a family of functions.

``weave`` and ``unweave`` are mutually inverse (up to behaviour): every
k-causal function is woven from the (k+1)-causal family
``f_a = T . c_a``, and for k <= 0 weaving (k+1)-causal members yields a
k-causal function.
"""
from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence, Tuple

from .causality import (
    CausalFn, Certificate, Provenance, compose, prepend_fn,
)
from .streams import Alphabet, EpStream, StreamError

__all__ = ["FunctionFamily", "weave", "unweave"]


@dataclass(frozen=True)
class FunctionFamily:
    """One member function per symbol of the domain alphabet, stored densely."""

    members: Tuple[CausalFn, ...]

    def __post_init__(self):
        members = tuple(self.members)
        object.__setattr__(self, "members", members)
        if not members:
            raise StreamError("a function family needs at least one member")
        A, B = members[0].domain, members[0].codomain
        if len(members) != A.size:
            raise StreamError(f"family over an alphabet of size {A.size} needs {A.size} members, got {len(members)}")
        for f in members:
            if f.domain != A or f.codomain != B:
                raise StreamError(f"member {f.name} does not share the family's alphabets")

    @classmethod
    def of(cls, *members: CausalFn) -> "FunctionFamily":
        return cls(tuple(members))

    @property
    def domain(self) -> Alphabet:
        return self.members[0].domain

    @property
    def codomain(self) -> Alphabet:
        return self.members[0].codomain

    @property
    def uniform_index(self) -> int:
        return min(f.index for f in self.members)

    @property
    def all_bicausal(self) -> bool:
        return all(f.certificate.bicausal is not None for f in self.members)

    def __getitem__(self, a: int) -> CausalFn:
        return self.members[a]

    def __len__(self):
        return len(self.members)


def weave(family: FunctionFamily, name: str = "") -> CausalFn:
    """The function woven from ``family``.

    Certified ``min(uniform_index - 1, 0)``-causal: members of index k+1 give
    index k whenever k <= 0; members of higher index still only give 0.
    """
    if not isinstance(family, FunctionFamily):
        family = FunctionFamily(tuple(family))
    k = min(family.uniform_index - 1, 0)
    words = tuple(f.on_prefix for f in family.members)

    def on_prefix(w):
        if not w:
            return ()
        return words[w[0]](w[1:])[:max(0, len(w) + k)]

    exact = None
    if all(f.exact is not None for f in family.members):
        ex = tuple(f.exact for f in family.members)

        def exact(s: EpStream):
            return ex[s.at(0)](s.drop(1))

    stream_fn = None
    if any(f.stream_fn is not None for f in family.members):
        def stream_fn(s):
            return family.members[s.at(0)].apply(s.drop(1))

    member_names = ", ".join(f.name for f in family.members)
    cert = Certificate(k, Provenance.by_construction(
        f"woven from members of index >= {family.uniform_index}"),
        depends_on=tuple(f.certificate for f in family.members))
    return CausalFn(family.domain, family.codomain, k, on_prefix, certificate=cert,
                    name=name or f"weave({member_names})", exact=exact,
                    stream_fn=stream_fn, family=family)


def unweave(T: CausalFn) -> FunctionFamily:
    """Members ``f_a = T . c_a``, each of index ``T.index + 1``."""
    A = T.domain
    return FunctionFamily(tuple(compose(prepend_fn((a,), A), T) for a in range(A.size)))


def woven_members(T: CausalFn) -> Sequence[CausalFn]:
    """The family ``T`` was woven from, or its unweaving."""
    return T.family.members if T.family is not None else unweave(T).members
