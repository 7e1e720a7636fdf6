import random
from fractions import Fraction as F
from itertools import product
from math import gcd

import pytest
from hypothesis import given, settings, strategies as st

from bdivkit.exact import PreconditionError
from bdivkit.fans import orthant_fan, star_subdivide
from bdivkit.logpairs import (
    BDivisor,
    LocalPair,
    ModelDivisor,
    bdiv_eval,
    blowup_chain_coeff,
    default_one_coeff,
    log_discrepancy,
    meet,
    mld_origin,
    mld_origin_minimizer,
    pullback_coeff,
    pullback_trace,
    relative_pullback_coeff,
    rounding_comparison,
    valuation,
)

unit_fracs = st.fractions(min_value=F(0), max_value=F(1), max_denominator=12)


def test_log_discrepancy_examples():
    p = LocalPair((F(1, 2), F(2, 3)))
    # unit vectors pin the affine function at 1 - c_i
    assert log_discrepancy(p, (1, 0)) == F(1, 2)
    assert log_discrepancy(p, (0, 1)) == F(1, 3)
    assert log_discrepancy(LocalPair((F(1, 2), F(1, 2))), (1, 1)) == 1
    smooth = LocalPair((F(0), F(0), F(0)))
    assert log_discrepancy(smooth, (1, 1, 1)) == 3


def test_valuation_validation():
    with pytest.raises(PreconditionError):
        valuation((0, 0))
    with pytest.raises(PreconditionError):
        valuation((2, 4))
    with pytest.raises(PreconditionError):
        valuation((-1, 2))


def test_pullback_coeff_examples():
    b1, b2 = F(3, 4), F(5, 6)
    p = LocalPair((b1, b2))
    assert pullback_coeff(p, (1, 1)) == b1 + b2 - 1
    small = LocalPair((F(1, 4), F(1, 4)))
    assert pullback_coeff(small, (1, 1)) == 0  # clamped
    q = LocalPair((F(1, 2), F(2, 3)))
    assert pullback_coeff(q, (2, 1)) == 0  # 1 - 4/3 clamps
    assert pullback_coeff(q, (0, 1)) == F(2, 3)  # divisorial case is c_i


def test_pullback_is_clamped_log_discrepancy():
    rng = random.Random(5)
    for _ in range(100):
        n = rng.choice([1, 2, 3])
        p = LocalPair(tuple(F(rng.randint(0, 6), 6) for _ in range(n)))
        v = tuple(rng.randint(0, 4) for _ in range(n))
        if all(e == 0 for e in v):
            continue
        g = 0
        for e in v:
            g = gcd(g, e)
        v = tuple(e // g for e in v)
        assert pullback_coeff(p, v) == max(F(0), 1 - log_discrepancy(p, v))


def test_affine_pinning():
    # 1 - log_discrepancy is the affine extension of 0 -> 1, e_i -> c_i
    p = LocalPair((F(1, 2), F(2, 3), F(1, 7)))
    for v in [(1, 1, 1), (2, 1, 3), (1, 0, 2)]:
        affine = 1 + sum(e * (c - 1) for e, c in zip(v, p.coeffs))
        assert 1 - log_discrepancy(p, v) == affine


def test_default_one_coeff_examples():
    p = LocalPair((F(1, 2), F(2, 3)))
    assert default_one_coeff(p, (0, 1)) == F(2, 3)
    assert default_one_coeff(p, (1, 1)) == 1
    assert default_one_coeff(p, (3, 1)) == 1


def test_bdivisor_eval_examples():
    b = BDivisor((F(1, 2), F(2, 3)), {(1, 1): F(1, 3)})
    assert bdiv_eval(b, (1, 1)) == F(1, 3)
    assert bdiv_eval(b, (2, 1)) == 1
    assert bdiv_eval(b, (1, 0)) == F(1, 2)


def test_bdivisor_validation():
    with pytest.raises(PreconditionError):
        BDivisor((F(1, 2),), {(2,): F(2)})  # value out of range
    with pytest.raises(PreconditionError):
        BDivisor((F(1, 2), F(1)), {(0, 1): F(0)})  # unit key
    with pytest.raises(PreconditionError):
        BDivisor((F(1, 2), F(1)), {(2, 4): F(0)})  # not primitive


def test_pullback_trace_examples():
    p = LocalPair((F(3, 4), F(5, 6)))
    f = orthant_fan(2)
    md = pullback_trace(p, f)
    assert md.as_dict() == {(1, 0): F(3, 4), (0, 1): F(5, 6)}
    blow = star_subdivide(f, (1, 1))
    md2 = pullback_trace(p, blow)
    assert md2.coeff((1, 1)) == F(3, 4) + F(5, 6) - 1
    q = LocalPair((F(1, 2), F(2, 3)))
    blow12 = star_subdivide(f, (1, 2))
    assert pullback_trace(q, blow12).coeff((1, 2)) == 0  # 1 - (1/2 + 2/3) clamps


def test_relative_pullback_coeff_examples():
    # on the trivial fan it agrees with the direct formula
    p = LocalPair((F(1, 2), F(2, 3)))
    md = pullback_trace(p, orthant_fan(2))
    for v in [(1, 0), (1, 1), (2, 1), (1, 3)]:
        assert relative_pullback_coeff(md, v) == pullback_coeff(p, v)

    # blow-up of (C^2, (1/2, 1)) at (1,1) carrying coefficient 1/2
    fan = star_subdivide(orthant_fan(2), (1, 1))
    coeffs = []
    for r in fan.rays:
        coeffs.append({(1, 0): F(1, 2), (0, 1): F(1), (1, 1): F(1, 2)}[r])
    md = ModelDivisor(fan, tuple(coeffs))
    assert relative_pullback_coeff(md, (1, 2)) == F(1, 2)
    # a ray returns its own coefficient
    assert relative_pullback_coeff(md, (1, 1)) == F(1, 2)


def test_relative_pullback_well_defined_on_shared_faces():
    rng = random.Random(11)
    fan = orthant_fan(3)
    for v in [(1, 1, 1), (1, 2, 1), (2, 1, 3)]:
        fan = star_subdivide(fan, v)
    coeffs = tuple(F(rng.randint(0, 4), 4) for _ in fan.rays)
    md = ModelDivisor(fan, coeffs)
    # evaluate face points through every cone containing them
    for idx, cone in zip(fan.cones, fan.max_cones):
        for j, k in product(range(3), repeat=2):
            pt = tuple(a + b for a, b in zip(cone.gens[j], cone.gens[k]))
            g = 0
            for e in pt:
                g = gcd(g, e)
            pt = tuple(e // g for e in pt)
            values = set()
            for cone2 in fan.max_cones:
                lam = cone2.barycentric(pt)
                if lam is None:
                    continue
                total = sum(
                    l * (1 - md.coeff(gen)) for l, gen in zip(lam, cone2.gens)
                )
                values.add(max(F(0), 1 - total))
            assert len(values) == 1


def test_meet_examples():
    f = orthant_fan(2)
    a = ModelDivisor(f, (F(1, 2), F(1)))
    b = ModelDivisor(f, (F(2, 3), F(1, 3)))
    assert meet(a, b).ray_coeffs == (F(1, 2), F(1, 3))
    assert meet(a, a) == a
    ones = ModelDivisor(f, (F(1), F(1)))
    assert meet(a, ones) == a
    other = ModelDivisor(orthant_fan(3), (F(1), F(1), F(1)))
    with pytest.raises(PreconditionError):
        meet(a, other)


@given(st.lists(unit_fracs, min_size=1, max_size=3), st.data())
@settings(max_examples=60, deadline=None)
def test_pullback_monotone_in_coefficients(coeffs, data):
    n = len(coeffs)
    bumps = data.draw(
        st.lists(unit_fracs, min_size=n, max_size=n)
    )
    lower = LocalPair(tuple(coeffs))
    upper = LocalPair(tuple(min(F(1), c + b) for c, b in zip(coeffs, bumps)))
    v = tuple(
        data.draw(st.integers(min_value=0, max_value=4)) for _ in range(n)
    )
    if all(e == 0 for e in v):
        return
    g = 0
    for e in v:
        g = gcd(g, e)
    v = tuple(e // g for e in v)
    assert pullback_coeff(lower, v) <= pullback_coeff(upper, v)


def test_blowup_chain_oracle_matches_formula():
    coeffs = [F(0), F(1, 2), F(2, 3), F(6, 7), F(1)]
    for b1 in coeffs:
        for b2 in coeffs:
            p = LocalPair((b1, b2))
            for v1 in range(0, 9):
                for v2 in range(0, 9):
                    if gcd(v1, v2) != 1:
                        continue
                    assert blowup_chain_coeff(b1, b2, (v1, v2)) == pullback_coeff(
                        p, (v1, v2)
                    ), (b1, b2, v1, v2)


def test_mld_examples():
    assert mld_origin(LocalPair((F(0), F(0)))) == 2
    assert mld_origin(LocalPair((F(1, 2), F(1, 2)))) == 1
    assert mld_origin(LocalPair((F(2, 3), F(2, 3)))) == F(2, 3)
    val, minim = mld_origin_minimizer(LocalPair((F(1, 2), F(1, 2))))
    assert (val, minim) == (1, (1, 1))


def test_mld_with_coefficient_one():
    # not klt: the infimum drops to zero along the coefficient-one axis
    assert mld_origin(LocalPair((F(1),))) == 0
    assert mld_origin(LocalPair((F(1), F(1, 2)))) == F(1, 2)


def _mld_bruteforce(pair, factor):
    from math import ceil

    a0 = sum((1 - c for c in pair.coeffs), F(0))
    box = [
        1 if c == 1 else max(1, factor * ceil(a0 / (1 - c))) for c in pair.coeffs
    ]
    best = None
    for v in product(*(range(1, b + 1) for b in box)):
        val = sum((e * (1 - c) for e, c in zip(v, pair.coeffs)), F(0))
        if best is None or val < best:
            best = val
    return best


def test_mld_agrees_with_enlarged_bruteforce():
    rng = random.Random(17)
    coeff_pool = [F(0), F(1, 2), F(2, 3), F(3, 4), F(4, 5), F(6, 7)]
    for _ in range(40):
        n = rng.choice([1, 2, 3])
        pair = LocalPair(tuple(rng.choice(coeff_pool) for _ in range(n)))
        assert mld_origin(pair) == _mld_bruteforce(pair, 2)


def test_rounding_examples():
    r = rounding_comparison([F(1, 2)], 3)
    assert r.floor_up == (1,) and r.ceil_down == (1,) and r.equal and r.le

    r = rounding_comparison([F(2, 5)], 2)
    assert r.floor_up == (0,) and r.ceil_down == (1,)
    assert r.le and not r.equal

    for m in range(1, 101):
        r = rounding_comparison([F(6, 7)], m)
        assert r.equal, m


def test_rounding_rejects_coefficient_one():
    with pytest.raises(PreconditionError):
        rounding_comparison([F(1)], 2)


@given(
    st.lists(
        st.fractions(min_value=F(0), max_value=F(29, 30), max_denominator=30),
        min_size=1,
        max_size=4,
    ),
    st.integers(min_value=1, max_value=100),
)
@settings(max_examples=80, deadline=None)
def test_rounding_le_always(coeffs, m):
    assert rounding_comparison(coeffs, m).le


def test_pair_json_roundtrip():
    p = LocalPair((F(1, 2), F(1)))
    assert LocalPair.from_json(p.to_json()) == p
    b = BDivisor(p.coeffs, {(1, 2): F(0)})
    assert BDivisor.from_json(b.to_json()) == b
    # omitted pair values default to the ambient pair
    assert (
        BDivisor.from_json({"deviations": [{"v": [1, 2], "value": "0"}]}, p) == b
    )
