import dataclasses
import itertools
import random

import pytest
from hypothesis import given, settings, strategies as st

from cuckoo_stash.hash_families import KWiseHash, random_keys
from cuckoo_stash.uniform_sim import (
    EvalCost, UniformDS, build_uniform, eval_uniform, memory_report, xor_all,
)


def zeroed(ds: UniformDS, f_zero: bool = True) -> UniformDS:
    """Same pair, every R-table cleared; optionally f replaced by the zero polynomial."""
    f = tuple(KWiseHash((0,) * fn.kappa, fn.r, fn.p) for fn in ds.f) if f_zero else ds.f
    return dataclasses.replace(
        ds, f=f, t1=(0,) * ds.m, t2=(0,) * ds.m, y=tuple((0,) * ds.ell for _ in range(ds.c)),
    )


def test_build_sizes():
    ds = build_uniform(16, eps=0.25, delta=0.5, s=0, k=1, w=8, seed=1)
    assert (ds.m, ds.ell, ds.c) == (20, 4, 4)
    assert len(ds.t1) == len(ds.t2) == 20
    assert [len(t) for t in ds.y] == [4] * 4
    assert all(0 <= v < 256 for v in (*ds.t1, *ds.t2, *itertools.chain(*ds.y)))


def test_build_validation():
    for bad in (dict(n=0), dict(w=0), dict(w=65), dict(eps=0), dict(delta=1), dict(s=-1), dict(k=0)):
        with pytest.raises(ValueError):
            build_uniform(**{"n": 16, **bad})


def test_equal_seeds_give_equal_structures():
    assert build_uniform(32, seed=9) == build_uniform(32, seed=9)
    assert build_uniform(32, seed=9) != build_uniform(32, seed=10)


def test_one_bit_outputs():
    ds = build_uniform(16, w=1, seed=2)
    assert {ds(x) for x in random_keys(200, 2)} <= {0, 1}


def test_all_zero_structure_is_zero():
    ds = zeroed(build_uniform(16, seed=3))
    assert {ds(x) for x in random_keys(50, 3)} == {0}


def test_zero_tables_expose_f():
    ds = build_uniform(16, w=12, seed=4)
    bare = zeroed(ds, f_zero=False)
    for x in random_keys(50, 4):
        assert eval_uniform(bare, x) == ds.f[0](x)


def test_single_table_entry():
    ds = zeroed(build_uniform(16, seed=5))
    x = 123456789
    h1, _ = ds.pair(x)
    t1 = list(ds.t1)
    t1[h1] = 5
    assert dataclasses.replace(ds, t1=tuple(t1))(x) == 5


def test_evaluation_is_the_xor_of_its_terms_in_any_order():
    ds = build_uniform(64, s=1, w=20, seed=6)
    rnd = random.Random(6)
    for x in random_keys(100, 6):
        terms = ds.terms(x)
        assert len(terms) == ds.c + 3
        rnd.shuffle(terms)
        assert xor_all(terms) == ds(x) == ds(x)


def test_wide_words_use_two_limbs():
    assert len(build_uniform(16, w=32, seed=7).f) == 1
    assert [fn.r for fn in build_uniform(16, w=40, seed=7).f] == [2**32, 2**8]
    ds = build_uniform(16, w=64, seed=7)
    assert len(ds.f) == 2 and ds.f[0].r == 2**32 and ds.f[1].r == 2**32
    outs = [ds(x) for x in random_keys(200, 7)]
    assert all(0 <= v < 2**64 for v in outs)
    assert max(outs) >= 2**62  # the high bits are actually populated


@pytest.mark.parametrize("w", [1, 16, 32, 33, 61, 64])
def test_serialization_roundtrip(w):
    ds = build_uniform(40, eps=0.2, delta=0.5, s=1, k=2, w=w, seed=8)
    blob = ds.to_bytes()
    assert blob[:4] == b"UDS1"
    back = UniformDS.from_bytes(blob)
    assert back == ds
    assert all(back(x) == ds(x) for x in random_keys(30, 8))


def test_eval_cost_counts():
    ds = build_uniform(16, s=1, seed=9)
    cost = EvalCost()
    ds.evaluate(42, cost)
    assert cost == EvalCost(function_evals=2 * ds.c + 3, g_evals=ds.c, table_reads=ds.c + 2)
    ds.evaluate(43, cost)
    assert cost.table_reads == 2 * (ds.c + 2)


def test_memory_examples():
    rep = memory_report(build_uniform(16, eps=0.25, delta=0.5, s=0, k=1, seed=10))
    assert rep.t_words == 40
    assert rep.y_words == 16
    assert rep.r_words == rep.t_words + rep.y_words == 56
    assert rep.z_words == 2 * 4 * 4
    assert rep.functions == 2 + 4 + 1
    assert rep.coefficient_words == 2 * rep.functions


def test_memory_report_rejects_a_tampered_structure():
    ds = build_uniform(16, seed=11)
    with pytest.raises(AssertionError):
        memory_report(dataclasses.replace(ds, t1=ds.t1[:-1]))


@settings(max_examples=30, deadline=None)
@given(st.integers(0, 2**32))
def test_repeated_evaluation_agrees(seed):
    ds = build_uniform(16, w=3, seed=seed)
    xs = random_keys(20, seed)
    assert [ds(x) for x in xs] == [ds(x) for x in xs]


def test_single_key_single_bit_frequency():
    trials = 20_000
    x = 987654321
    ones = sum(build_uniform(16, w=1, seed=s)(x) for s in range(trials))
    sigma = (trials * 0.25) ** 0.5
    assert abs(ones - trials / 2) <= 3 * sigma
