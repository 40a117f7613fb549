import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalstreams import (
    BINARY, Alphabet, Dyadic, FunctionFamily, affine_fn, agree_to_depth, check_bicausal,
    check_k_causal, compose, from_level_chain, identity_fn, prepend_fn, random_level_chain,
    tail_fn, unweave, weave,
)
from causalstreams.collatz import collatz_T, collatz_T_fn

from conftest import random_ep

A = BINARY


def test_weave_identities_is_tail():
    T = weave(FunctionFamily.of(identity_fn(A), identity_fn(A)))
    assert T.index == -1
    assert agree_to_depth(T, tail_fn(A), 12) is None


def test_weave_prepends_is_identity():
    T = weave(FunctionFamily.of(prepend_fn((0,)), prepend_fn((1,))))
    assert T.index == 0
    assert agree_to_depth(T, identity_fn(A), 12) is None


def test_weave_ternary_prepends_is_identity():
    A3 = Alphabet(3)
    T = weave(FunctionFamily(tuple(prepend_fn((a,), A3) for a in range(3))))
    assert agree_to_depth(T, identity_fn(A3), 7) is None


def test_collatz_weave_matches_exact_map():
    T = collatz_T_fn()
    assert T.index == -1
    assert T.certificate.provenance.kind == "construction"
    for x in range(-50, 51):
        want = collatz_T(Dyadic(x)).bits
        assert T.apply(Dyadic(x).bits) == want
        assert T.image_prefix(Dyadic(x).bits, 30) == want.take(30)


def test_index_rule():
    assert weave(FunctionFamily.of(prepend_fn((1, 1)), prepend_fn((0, 1)))).index == 0
    assert weave(FunctionFamily.of(tail_fn(A), identity_fn(A))).index == -2


def test_family_validation():
    with pytest.raises(ValueError):
        FunctionFamily.of(identity_fn(A))
    with pytest.raises(ValueError):
        FunctionFamily.of(identity_fn(A), identity_fn(Alphabet(3)))


def test_certificate_depends_on_members():
    f = affine_fn(3, 2)
    T = weave(FunctionFamily.of(identity_fn(A), f))
    assert T.certificate.trusted
    f.certificate.revoke("test")
    assert not T.certificate.trusted


def test_bicausal_members_do_not_make_weave_bicausal():
    T = collatz_T_fn()
    assert not T.certificate.bicausal_trusted
    assert check_bicausal(T, 10).falsified


class TestUnweave:
    def test_tail(self):
        F = unweave(tail_fn(A))
        for f in F.members:
            assert f.index == 0
            assert agree_to_depth(f, identity_fn(A), 10) is None

    def test_identity(self):
        F = unweave(identity_fn(A))
        for a, f in enumerate(F.members):
            assert f.index == 1
            assert agree_to_depth(f, prepend_fn((a,)), 10) is None

    def test_collatz(self):
        f0, f1 = unweave(collatz_T_fn()).members
        assert agree_to_depth(f0, identity_fn(A), 16) is None
        assert agree_to_depth(f1, affine_fn(3, 2), 16) is None

    @settings(max_examples=15, deadline=None)
    @given(st.integers(-3, 0), st.integers(0, 2**30))
    def test_round_trip(self, k, seed):
        T = from_level_chain(random_level_chain(A, A, k, 12, random.Random(seed)))
        back = weave(unweave(T))
        assert back.index == T.index
        assert agree_to_depth(back, T, 12) is None

    @settings(max_examples=15, deadline=None)
    @given(st.integers(-2, 0), st.integers(0, 2**30))
    def test_index_law(self, k, seed):
        rng = random.Random(seed)
        F = FunctionFamily(tuple(from_level_chain(random_level_chain(A, A, k + 1, 10, rng))
                                 for _ in range(2)))
        assert check_k_causal(weave(F), k, 8).verified


def test_stream_level_agreement():
    rng = random.Random(3)
    T = collatz_T_fn()
    for _ in range(50):
        s = random_ep(rng)
        assert T.apply(s).take(20) == T.image_prefix(s, 20)
