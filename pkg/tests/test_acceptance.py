"""Acceptance gate: one test per criterion, each printing a PASS/FAIL line.

The lines are repeated in the pytest terminal summary.

Run with ``pytest tests/test_acceptance.py -v`` or directly as a script.
"""

import itertools
import random
import sys
import time
from fractions import Fraction

import pytest

from causalstreams import (
    BINARY, Dyadic, EpStream, FunctionFamily, MealyMachine, Provenance, StreamFnCoalgebra,
    add, affine_fn, agree_to_depth, check_bijection_levels, check_k_causal, check_mealy_finality,
    coinduce_stream_fn, compose, decompose, distance_exact, double_fn, from_int, from_level_chain,
    from_rational, identity_fn, invert_bicausal, level_chain, mealy_behavior, mul, neg, parse_stream,
    prepend_fn, random_level_chain, tail_fn, unweave, weave,
)
from causalstreams.collatz import (
    Q_fn, collatz_T_fn, inverse_Q, parity_vector_Q, parity_vector_exact, variant_Tmn, verify_range,
)

from conftest import int_bits, random_ep

A = BINARY
RESULTS = {}


def gate(number, title, check, limit=None):
    """Run ``check`` (returns a detail string), time it and print the verdict line."""
    start = time.perf_counter()
    error = None
    try:
        detail = check()
    except AssertionError as exc:
        detail, error = f"assertion failed: {exc}", exc
    elapsed = time.perf_counter() - start
    if error is None and limit is not None and elapsed >= limit:
        error = AssertionError(f"runtime {elapsed:.1f}s exceeds {limit}s")
        detail += f"; over time limit {limit}s"
    verdict = "PASS" if error is None else "FAIL"
    line = f"[{verdict}] criterion {number:2d}: {title} ({elapsed:.2f}s) {detail}"
    RESULTS[number] = line
    print(line)
    if error is not None:
        raise error


def _seeded(seed):
    return random.Random(seed)


# 1 -------------------------------------------------------------------------

def test_collatz_sweep():
    def check():
        res = verify_range(10**6, max_steps=10_000)
        assert res.ok, f"{len(res.failures)} starts did not reach 1"
        assert res.checked == 10**6
        return f"n <= 10^6 all reach 1, longest {res.longest} steps from {res.longest_start}"
    gate(1, "Collatz sweep to 10^6", check, limit=60)


# 2 -------------------------------------------------------------------------

def test_parity_fixed_points():
    def check():
        Q = Q_fn()
        assert parity_vector_exact(from_int(0)) == parse_stream("(0)")
        assert parity_vector_exact(from_int(-1)) == parse_stream("(1)")
        assert Q.apply(from_int(0).bits) == parse_stream("(0)")
        assert Q.apply(from_int(-1).bits) == parse_stream("(1)")
        assert parity_vector_Q(from_int(1)).prefix(8) == (1, 0, 1, 0, 1, 0, 1, 0)
        assert Q.image_prefix(from_int(1).bits, 8) == (1, 0, 1, 0, 1, 0, 1, 0)
        return "Q(0)=(0), Q(-1)=(1), Q(1)=10101010..."
    gate(2, "parity-vector fixed points", check)


# 3 -------------------------------------------------------------------------

def test_inverse_round_trip():
    def check():
        Q = Q_fn()
        mod = 2**64
        for x in range(-1000, 1001):
            assert inverse_Q(Q.apply(from_int(x).bits), 64).residue(64) == x % mod, f"x={x}"
        rng = _seeded(3)
        for _ in range(1000):
            s = random_ep(rng, max_pre=8, max_per=8)
            x = Dyadic.from_bits(s)
            assert inverse_Q(Q.apply(s), 64).residue(64) == x.residue(64), f"s={s}"
        return "2001 integers and 1000 ep-streams"
    gate(3, "inverse round trip on 64 bits", check, limit=10)


# 4 -------------------------------------------------------------------------

def _near_pair(rng):
    """Two ep-streams sharing a random-length common prefix."""
    s = random_ep(rng, max_pre=8, max_per=8)
    j = rng.randrange(0, 24)
    t = EpStream(s.take(j) + (1 - s.at(j),) + tuple(rng.randrange(2) for _ in range(rng.randrange(6))),
                 tuple(rng.randrange(2) for _ in range(rng.randint(1, 6))))
    return s, t


def test_Q_bicausal():
    def check():
        Q = Q_fn()
        rep = check_bijection_levels(Q, 14)
        assert rep.verified, rep.summary()
        rng = _seeded(4)
        for i in range(10_000):
            s, t = _near_pair(rng) if i % 2 else (random_ep(rng), random_ep(rng))
            d_in, d_out = distance_exact(s, t), distance_exact(Q.apply(s), Q.apply(t))
            assert d_in == d_out, f"{s} {t}: {d_in} vs {d_out}"
        return "levels j <= 14 bijective, 10^4 pairs keep their distance"
    gate(4, "Q bicausality", check, limit=30)


# 5 -------------------------------------------------------------------------

def _family(rng, bijective):
    prov = Provenance.by_construction("random bijective chain") if bijective else None
    return FunctionFamily(tuple(
        from_level_chain(random_level_chain(A, A, 0, 12, rng, bijective=bijective), bicausal=prov)
        for _ in range(A.size)))


def test_main_closure():
    def check():
        rng = _seeded(5)
        bij = causal = 0
        for _ in range(100):
            head = list(range(A.size))
            rng.shuffle(head)
            phi = coinduce_stream_fn(StreamFnCoalgebra(weave(_family(rng, True)), head_table=tuple(head)))
            bij += check_bijection_levels(phi, 12).verified
        for _ in range(100):
            head = tuple(rng.randrange(A.size) for _ in range(A.size))
            phi = coinduce_stream_fn(StreamFnCoalgebra(weave(_family(rng, False)), head_table=head))
            causal += check_k_causal(phi, 0, 12).verified
        assert bij == 100 and causal == 100, f"bijective {bij}/100, causal {causal}/100"
        return f"bijective {bij}/100, 0-causal {causal}/100"
    gate(5, "coinduced closure of random families", check)


# 6 -------------------------------------------------------------------------

def test_weave_unweave():
    def check():
        rng = _seeded(6)
        cases = [tail_fn(A), identity_fn(A), collatz_T_fn()]
        cases += [from_level_chain(random_level_chain(A, A, -1, 12, rng)) for _ in range(20)]
        for T in cases:
            bad = agree_to_depth(weave(unweave(T)), T, 12)
            assert bad is None, f"{T.name} differs on {bad}"
        return f"{len(cases)} functions agree on all 2^12 prefixes"
    gate(6, "weave(unweave(T)) = T", check)


# 7 -------------------------------------------------------------------------

def test_decomposition():
    def check():
        rng = _seeded(7)
        for k in (1, 2, 3):
            for _ in range(20):
                f = from_level_chain(random_level_chain(A, A, k, 16, rng))
                w, f_hat = decompose(f, k)
                assert f_hat.index == 0
                rebuilt = compose(f_hat, prepend_fn(w))
                bad = agree_to_depth(rebuilt, f, 16)
                assert bad is None, f"k={k} differs on {bad}"
        return "60 functions, k in 1..3, depth 16"
    gate(7, "prefix decomposition", check)


# 8 -------------------------------------------------------------------------

def _certified_functions(rng):
    fns = [identity_fn(A), tail_fn(A), tail_fn(A, 2), prepend_fn((1, 0)), collatz_T_fn(), Q_fn(),
           affine_fn(3, 2), affine_fn(5, -1), double_fn(), variant_Tmn(1, 1)]
    for k in (-2, -1, 0, 0, 1, 2, 0, -1, 1, 3):
        fns.append(from_level_chain(random_level_chain(A, A, k, 12, rng)))
    return fns


def _inject_fault(chain, rng):
    """Copy the chain and flip one output symbol of one table entry."""
    levels = [dict(t) for t in chain.levels]
    choices = [lv for lv in range(len(levels)) if chain.m + lv > 0]
    lv = rng.choice(choices)
    w = rng.choice(sorted(levels[lv]))
    out = list(levels[lv][w])
    i = rng.randrange(len(out))
    out[i] = 1 - out[i]
    levels[lv][w] = tuple(out)
    return type(chain)(chain.domain, chain.codomain, chain.m, chain.n, levels), (lv, w)


def test_level_chain_equivalence():
    def check():
        rng = _seeded(8)
        fns = _certified_functions(rng)
        for f in fns:
            chain = level_chain(f, 10)
            rep = chain.check_coherence()
            assert rep.verified, f"{f.name}: {rep.summary()}"
            rebuilt = from_level_chain(chain)
            assert agree_to_depth(rebuilt, f, 10) is None, f.name
            for _ in range(5):
                faulty, where = _inject_fault(chain, rng)
                caught = not faulty.check_coherence().verified
                caught = caught or agree_to_depth(from_level_chain(faulty, check=False), f, 10) is not None
                assert caught, f"{f.name}: fault at {where} undetected"
        return f"{len(fns)} functions rebuilt, {5 * len(fns)} injected faults all detected"
    gate(8, "level-chain equivalence", check)


# 9 -------------------------------------------------------------------------

def test_dyadic_arithmetic():
    def check():
        rng = _seeded(9)
        for _ in range(10_000):
            a, b = rng.randint(-10**6, 10**6), rng.randint(-10**6, 10**6)
            x, y = from_int(a), from_int(b)
            assert add(x, y).bits.take(64) == int_bits(a + b, 64), (a, b)
            assert mul(x, y).bits.take(64) == int_bits(a * b, 64), (a, b)
            assert neg(x).bits.take(64) == int_bits(-a, 64), a
        for _ in range(1000):
            p, q = rng.randint(-10**6, 10**6), 2 * rng.randint(-10**4, 10**4) + 1
            x = from_rational(p, q)
            assert mul(from_int(q), x) == from_int(p), (p, q)
            assert x.residue(64) * q % 2**64 == p % 2**64, (p, q)
        return "10^4 integer pairs, 10^3 rationals"
    gate(9, "2-adic arithmetic oracle", check)


# 10 ------------------------------------------------------------------------

def _small_ep_streams():
    seen = set()
    for total in range(1, 5):
        for per_len in range(1, total + 1):
            for bits in itertools.product((0, 1), repeat=total):
                seen.add(EpStream(bits[:total - per_len], bits[total - per_len:]))
    return sorted(seen, key=str)


def _first_difference(s, t, horizon=64):
    for i, (a, b) in enumerate(zip(s.take(horizon), t.take(horizon))):
        if a != b:
            return i
    return None


def test_ultrametric():
    def check():
        streams = _small_ep_streams()
        d = {(s, t): distance_exact(s, t) for s in streams for t in streams}
        for (s, t), dst in d.items():
            assert dst == d[t, s], (s, t)
            assert dst.is_zero == (s == t), (s, t)
            i = _first_difference(s, t)
            want = 0 if i is None else Fraction(1, 2**i)
            assert dst.as_fraction() == want, (s, t)
        value = {key: dst.as_fraction() for key, dst in d.items()}
        for s, t, u in itertools.product(streams, repeat=3):
            assert value[s, u] <= max(value[s, t], value[t, u]), (s, t, u)
        return f"{len(streams)} streams, {len(streams) ** 3} triples"
    gate(10, "ultrametric suite", check)


# 11 ------------------------------------------------------------------------

def test_mealy_finality():
    def check():
        rng = _seeded(11)
        for _ in range(10):
            m = MealyMachine.random(rng, rng.randint(1, 6), A, A)
            for x in m.states:
                rep = check_k_causal(mealy_behavior(m, x), 0, 12)
                assert rep.verified, f"state {x}: {rep.summary()}"
            assert check_mealy_finality(m, 12).commutes
        return "10 machines, every state 0-causal, gamma square commutes"
    gate(11, "Mealy finality", check)


# 12 ------------------------------------------------------------------------

def test_independent_inverse():
    def check():
        Qi = invert_bicausal(Q_fn(), 14)
        for w in A.words(14):
            via_tables = Qi.padded_image(w, 0, 14)
            via_formula = inverse_Q(EpStream(w, (0,)), 14).bits.take(14)
            assert via_tables == via_formula, w
        return "all 2^14 inputs agree"
    gate(12, "table inverse vs closed-form inverse", check)


if __name__ == "__main__":
    sys.exit(pytest.main([__file__, "-q"]))
