import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from causalstreams import (
    BINARY, Alphabet, Dyadic, EpStream, FunctionFamily, MealyMachine, StreamCoalgebra,
    StreamFnCoalgebra, affine_fn, agree_to_depth, check_bijection_levels, check_k_causal,
    check_mealy_finality, check_morphism, coinduce, coinduce_stream_fn, constant_fn,
    final_coalgebra, find_periodic, from_level_chain, identity_fn, invert_bicausal, mealy_behavior,
    mealy_gamma, parse_stream, random_level_chain, tail_fn, uniqueness_check, weave,
)
from causalstreams.collatz import Q_fn, collatz_T, collatz_T_fn, collatz_coalgebra

from conftest import random_ep

A = BINARY


class TestCoinduce:
    def test_constant(self):
        c = StreamCoalgebra(lambda x: 1, lambda x: x, A)
        assert coinduce(c, "anything").take(10) == (1,) * 10

    def test_parity_of_naturals(self):
        c = StreamCoalgebra(lambda n: n % 2, lambda n: n + 1, A)
        assert coinduce(c, 0).take(8) == (0, 1) * 4
        assert find_periodic(c, 0, max_steps=50) is None

    def test_collatz_from_one(self):
        assert coinduce(collatz_coalgebra(), Dyadic(1)).take(8) == (1, 0, 1, 0, 1, 0, 1, 0)
        assert find_periodic(collatz_coalgebra(), Dyadic(1)) == parse_stream("(10)")

    def test_unhashable_carrier(self):
        c = StreamCoalgebra(lambda xs: len(xs) % 2, lambda xs: xs + [0], A)
        assert coinduce(c, []).take(5) == (0, 1, 0, 1, 0)

    @settings(max_examples=30)
    @given(st.integers(-10**6, 10**6))
    def test_finality_square(self, x):
        c = collatz_coalgebra()
        phi = coinduce(c, Dyadic(x))
        assert phi.at(0) == c.observe(Dyadic(x))
        assert phi.drop(1).take(32) == coinduce(c, collatz_T(Dyadic(x))).take(32)

    def test_orbit_memo(self):
        calls = []

        def step(n):
            calls.append(n)
            return n + 1
        phi = coinduce(StreamCoalgebra(lambda n: n % 2, step, A), 0)
        phi.take(20)
        phi.take(20)
        assert len(calls) == 19


class TestStreamFnCoalgebra:
    def test_tail_gives_identity(self):
        phi = coinduce_stream_fn(StreamFnCoalgebra(tail_fn(A), head_table=(0, 1)))
        assert agree_to_depth(phi, identity_fn(A), 12) is None
        assert phi.index == 0

    def test_negated_head_gives_complement(self):
        T = weave(FunctionFamily.of(identity_fn(A), identity_fn(A)))
        phi = coinduce_stream_fn(StreamFnCoalgebra(T, head_table=(1, 0)))
        assert phi.certificate.bicausal_trusted
        s = parse_stream("1101(001)")
        assert phi.image_prefix(s, 12) == tuple(1 - b for b in s.take(12))
        assert check_bijection_levels(phi, 10).verified

    def test_collatz_gives_bicausal_Q(self):
        Q = Q_fn()
        assert Q.certificate.bicausal_trusted
        assert Q.certificate.provenance.kind == "construction"
        for x in range(-30, 30):
            assert Q.image_prefix(Dyadic(x).bits, 24) == coinduce(collatz_coalgebra(), Dyadic(x)).take(24)

    def test_non_injective_table_is_not_bicausal(self):
        phi = coinduce_stream_fn(StreamFnCoalgebra(collatz_T_fn(), head_table=(1, 1)))
        assert not phi.certificate.bicausal_trusted
        assert phi.certificate.trusted

    def test_missing_witness_still_evaluates(self):
        obs = lambda s: s.at(0) ^ s.at(1)
        c = StreamFnCoalgebra(tail_fn(A), observe=obs, codomain=A)
        phi = coinduce_stream_fn(c)
        assert not phi.certificate.trusted
        s = parse_stream("0110(1)")
        assert phi.image_prefix(s, 5) == (1, 0, 1, 1, 0)

    def test_witness_check(self):
        c = StreamFnCoalgebra(tail_fn(A), head_table=(0, 1), observe=lambda s: s.at(1))
        assert c.check_witness([parse_stream("01(0)")]) is not None

    def test_main_closure_random_zero_causal(self):
        rng = random.Random(11)
        for _ in range(5):
            F = FunctionFamily(tuple(from_level_chain(random_level_chain(A, A, 0, 10, rng))
                                     for _ in range(2)))
            phi = coinduce_stream_fn(StreamFnCoalgebra(weave(F), head_table=(0, 1)))
            assert check_k_causal(phi, 0, 10).verified

    def test_main_closure_random_bicausal(self):
        rng = random.Random(12)
        for _ in range(5):
            F = FunctionFamily(tuple(from_level_chain(random_level_chain(A, A, 0, 10, rng, bijective=True),
                                                      bicausal=True) for _ in range(2)))
            phi = coinduce_stream_fn(StreamFnCoalgebra(weave(F), head_table=(0, 1)))
            assert phi.certificate.bicausal_trusted
            assert check_bijection_levels(phi, 10).verified

    def test_ternary(self):
        A3 = Alphabet(3)
        T = weave(FunctionFamily(tuple(identity_fn(A3) for _ in range(3))))
        phi = coinduce_stream_fn(StreamFnCoalgebra(T, head_table=(2, 0, 1)))
        assert check_bijection_levels(phi, 6).verified


class TestMorphisms:
    def test_coinduce_into_final(self):
        c = StreamCoalgebra(lambda n: (n // 3) % 2, lambda n: (n + 1) % 12, A)
        rep = check_morphism(lambda x: coinduce(c, x), c, final_coalgebra(A, 16), range(12), 16)
        assert rep.commutes

    def test_Q_is_morphism(self):
        rep = check_morphism(lambda x: Q_fn().apply(x.bits), collatz_coalgebra(), final_coalgebra(A, 20),
                             [Dyadic(x) for x in range(-10, 10)], 8)
        assert rep.commutes

    def test_perturbed_morphism(self):
        c = StreamCoalgebra(lambda n: n % 2, lambda n: (n + 1) % 6, A)

        def m(x):
            s = coinduce(c, x)
            return parse_stream("(1)") if x == 3 else s
        rep = check_morphism(m, c, final_coalgebra(A, 10), [0], 10)
        assert not rep.commutes and rep.witness_state == 0
        assert rep.witness_index in (2, 3)

    def test_uniqueness(self):
        c = StreamCoalgebra(lambda n: n % 2, lambda n: (n + 1) % 5, A)
        assert uniqueness_check(c, lambda x: coinduce(c, x), range(5), 20).commutes

        def flipped(x):
            bits = list(coinduce(c, x).take(40))
            bits[5] ^= 1
            return EpStream(bits, (0,))
        rep = uniqueness_check(c, flipped, [0], 20)
        assert not rep.commutes and rep.witness_index == 5

    def test_uniqueness_inverse_round_trip(self):
        Qi = invert_bicausal(Q_fn(), 12)
        c = collatz_coalgebra()
        cand = lambda x: Q_fn().apply(Qi.apply(Q_fn().apply(x.bits)))
        # Q(Qinv(Q(x))) only matches to the inversion depth
        for x in range(-8, 8):
            assert cand(Dyadic(x)).take(12) == coinduce(c, Dyadic(x)).take(12)


def delay_machine():
    # output the previous input, starting from 0
    t = {(p, a): (p, a) for p in (0, 1) for a in (0, 1)}
    return MealyMachine((0, 1), A, A, t, 0)


class TestMealy:
    def test_echo(self):
        m = MealyMachine(("s",), A, A, {("s", 0): (0, "s"), ("s", 1): (1, "s")})
        assert agree_to_depth(mealy_behavior(m), identity_fn(A), 10) is None

    def test_constant(self):
        m = MealyMachine(("s",), A, A, {("s", 0): (1, "s"), ("s", 1): (1, "s")})
        f = mealy_behavior(m)
        assert agree_to_depth(f, constant_fn(A, parse_stream("(1)")), 10) is None

    def test_delay(self):
        f = mealy_behavior(delay_machine(), 0)
        assert check_k_causal(f, 0, 10).verified
        # the leading 0 is fixed, so j inputs determine j+1 outputs
        assert check_k_causal(f, 1, 10).verified
        rep = check_k_causal(f, 2, 10)
        assert rep.falsified and rep.recheck(f)
        assert f.apply(parse_stream("1(10)")) == parse_stream("01(10)")

    def test_exact_path(self):
        rng = random.Random(5)
        for _ in range(20):
            m = MealyMachine.random(rng, 4, A, A)
            f = mealy_behavior(m, 2)
            for _ in range(10):
                s = random_ep(rng)
                assert f.apply(s).take(40) == m.run(2, s.take(40))

    def test_validation(self):
        with pytest.raises(ValueError):
            MealyMachine(("s",), A, A, {("s", 0): (0, "s")})
        with pytest.raises(ValueError):
            MealyMachine(("s",), A, A, {("s", 0): (0, "s"), ("s", 1): (0, "t")})

    def test_gamma(self):
        for a in (0, 1):
            out, d = mealy_gamma(identity_fn(A), a)
            assert out == a and agree_to_depth(d, identity_fn(A), 10) is None
            c = constant_fn(A, parse_stream("(1)"))
            out, d = mealy_gamma(c, a)
            assert out == 1 and agree_to_depth(d, c, 10) is None

    def test_gamma_needs_causal(self):
        with pytest.raises(ValueError):
            mealy_gamma(tail_fn(A), 0)

    def test_finality(self):
        rng = random.Random(9)
        for _ in range(5):
            m = MealyMachine.random(rng, 5, A, A)
            assert check_mealy_finality(m, 12).commutes
