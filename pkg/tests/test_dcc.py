from fractions import Fraction as F

import pytest
from hypothesis import given, settings, strategies as st

from bdivkit.dcc import (
    Chain,
    FiniteSet,
    SearchBudget,
    StandardSet,
    SumClosure,
    UnionSet,
    dcc_verdict,
    desc_from_json,
    exceptional_closure,
    exceptional_sum,
    find_decreasing_chain,
    materialize,
    standard_coeff,
)
from bdivkit.exact import PreconditionError

small_fracs = st.fractions(min_value=F(0), max_value=F(1), max_denominator=10)


def truncated_standard(r_max):
    return FiniteSet(tuple(standard_coeff(r) for r in range(1, r_max + 1)))


def test_standard_coeff_examples():
    assert standard_coeff(1) == 0
    assert standard_coeff(2) == F(1, 2)
    assert standard_coeff(7) == F(6, 7)
    with pytest.raises(PreconditionError):
        standard_coeff(0)


def test_exceptional_sum_examples():
    assert exceptional_sum(F(1, 2), F(2, 3)) == F(1, 6)
    assert exceptional_sum(F(1, 2), F(1, 2)) == 0
    assert exceptional_sum(F(1, 3), F(1, 2)) is None
    # (i/r, (r-1)/r) -> (i-1)/r
    for r in range(2, 10):
        for i in range(1, r):
            assert exceptional_sum(F(i, r), F(r - 1, r)) == F(i - 1, r)


def test_exceptional_closure_examples():
    assert exceptional_closure([F(1, 2)], 10) == [F(0), F(1, 2)]
    assert exceptional_closure([standard_coeff(5)], 5) == [
        F(k, 5) for k in range(5)
    ]
    assert F(1, 6) in exceptional_closure([F(1, 2), F(2, 3)], 6)


def test_exceptional_closure_density():
    # every k/q appears, nothing else does
    for q in range(2, 21):
        got = exceptional_closure([standard_coeff(q)], q)
        assert got == [F(k, q) for k in range(q)]


def test_exceptional_closure_include_one():
    with_one = exceptional_closure([F(1, 2)], 10, include_one=True)
    assert F(1) in with_one and F(1, 2) in with_one and F(0) in with_one


@given(
    st.lists(small_fracs, min_size=1, max_size=4),
    st.lists(small_fracs, min_size=0, max_size=2),
    st.integers(min_value=2, max_value=12),
)
@settings(max_examples=40, deadline=None)
def test_closure_monotone(base, extra, bound):
    small = set(exceptional_closure(base, bound))
    bigger_base = set(exceptional_closure(base + extra, bound))
    bigger_bound = set(exceptional_closure(base, bound + 5))
    assert small <= bigger_base
    assert small <= bigger_bound


def test_closure_is_closed():
    vals = set(exceptional_closure([F(1, 2), F(2, 3), F(6, 7)], 42))
    for a in vals:
        for b in vals:
            e = a + b - 1
            if e >= 0 and e.denominator <= 42:
                assert e in vals


def test_find_chain_finite():
    fin = FiniteSet((F(0), F(1, 2), F(6, 7)))
    got = find_decreasing_chain(fin, 2, 10)
    assert got is not None and list(got.elements) == [F(6, 7), F(1, 2)]
    assert find_decreasing_chain(fin, 3, 10) is None  # only two positive members


def test_find_chain_standard_structural():
    assert find_decreasing_chain(StandardSet(), 2, 100) is None
    assert find_decreasing_chain(StandardSet(), 5, 100) is None
    one = find_decreasing_chain(StandardSet(), 1, 100)
    assert one is not None and len(one.elements) == 1


def test_find_chain_closure():
    desc = SumClosure(truncated_standard(43), denom_bound=2000)
    chain = find_decreasing_chain(desc, 5, 2000)
    assert chain is not None and len(chain.elements) == 5
    members = set(materialize(desc, 2000))
    for e in chain.elements:
        assert e in members and e > 0
    diffs = [a - b for a, b in zip(chain.elements, chain.elements[1:])]
    assert all(d2 <= d1 for d1, d2 in zip(diffs, diffs[1:]))


def test_chain_type_validates():
    with pytest.raises(PreconditionError):
        Chain((F(1, 2), F(1, 2)))
    c = Chain((F(2, 3), F(1, 2)))
    assert c.elements == (F(2, 3), F(1, 2))


def test_verdicts_structural():
    assert dcc_verdict(FiniteSet((F(0), F(1, 2), F(6, 7)))).verdict == "DCC"
    assert dcc_verdict(StandardSet()).verdict == "DCC"
    union = UnionSet((StandardSet(), FiniteSet((F(1, 3),))))
    assert dcc_verdict(union).verdict == "DCC"


def test_verdict_closure_not_dcc():
    desc = SumClosure(truncated_standard(43), denom_bound=2000)
    verdict = dcc_verdict(desc)
    assert verdict.verdict == "NOT_DCC"
    chain = verdict.witness
    assert chain is not None and len(chain.elements) >= 5
    # witness quality: distance to the limit at least halves
    limit = chain.limit
    assert limit is not None
    gaps = [e - limit for e in chain.elements]
    assert all(b <= a / 2 for a, b in zip(gaps, gaps[1:]))
    # every element is a verified member
    members = set(materialize(desc, 2000))
    assert all(e in members for e in chain.elements)


def test_verdict_closure_never_claims_dcc():
    tiny = SumClosure(FiniteSet((F(1, 2),)), denom_bound=10)
    assert dcc_verdict(tiny).verdict == "UNKNOWN"


def test_verdict_union_propagates_not_dcc():
    desc = UnionSet(
        (StandardSet(), SumClosure(truncated_standard(43), denom_bound=2000))
    )
    assert dcc_verdict(desc).verdict == "NOT_DCC"


def test_verdict_soundness_against_chain_search():
    # a DCC claim never coexists with a chain longer than the finite part
    descs = [
        FiniteSet((F(0), F(1, 2), F(6, 7))),
        StandardSet(),
        UnionSet((StandardSet(), FiniteSet((F(1, 3),)))),
        SumClosure(truncated_standard(20), denom_bound=500),
    ]
    budget = SearchBudget(chain_length=5, denom_bound=500)
    for d in descs:
        v = dcc_verdict(d, budget)
        if v.verdict == "DCC":
            assert not isinstance(d, SumClosure)
            long_chain = find_decreasing_chain(d, 50, 500, budget)
            if long_chain is not None:
                assert isinstance(d, FiniteSet) and len(d.values) >= 50


def test_desc_json_roundtrip():
    desc = UnionSet(
        (
            StandardSet(),
            SumClosure(FiniteSet((F(1, 2), F(2, 3))), denom_bound=50),
        )
    )
    assert desc_from_json(desc.to_json()) == desc
