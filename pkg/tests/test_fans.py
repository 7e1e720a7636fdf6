import random
from math import gcd

import pytest

from bdivkit.exact import InvariantViolation, PreconditionError, primitive_part
from bdivkit.fans import (
    Cone,
    Fan,
    ensure_rays,
    hirzebruch_jung_rays,
    is_smooth,
    orthant_fan,
    resolve,
    star_subdivide,
)


def cone_fan(*gens):
    """Fan consisting of a single full-dimensional cone."""
    n = len(gens[0])
    return Fan(n=n, rays=tuple(gens), cones=(tuple(range(len(gens))),))


def test_orthant_fan_examples():
    f1 = orthant_fan(1)
    assert f1.rays == ((1,),) and f1.cones == ((0,),)
    f2 = orthant_fan(2)
    assert set(f2.rays) == {(1, 0), (0, 1)} and len(f2.cones) == 1
    f3 = orthant_fan(3)
    assert len(f3.rays) == 3 and len(f3.cones) == 1


def test_orthant_fan_rejects_bad_dims():
    with pytest.raises(PreconditionError):
        orthant_fan(0)
    with pytest.raises(PreconditionError):
        orthant_fan(7)


def test_star_subdivide_origin_blowup():
    f = star_subdivide(orthant_fan(2), (1, 1))
    assert (1, 1) in f.rays
    gens = {frozenset(f.rays[i] for i in c) for c in f.cones}
    assert gens == {
        frozenset({(1, 0), (1, 1)}),
        frozenset({(0, 1), (1, 1)}),
    }


def test_star_subdivide_existing_ray_is_identity():
    f = orthant_fan(2)
    assert star_subdivide(f, (1, 0)) == f


def test_star_subdivide_scales_to_primitive():
    f = star_subdivide(orthant_fan(2), (2, 2))
    assert (1, 1) in f.rays and (2, 2) not in f.rays


def test_star_subdivide_face_ray_3d():
    # (1,1,0) has two nonzero barycentric coordinates, hence two subcones
    f = star_subdivide(orthant_fan(3), (1, 1, 0))
    gens = {frozenset(f.rays[i] for i in c) for c in f.cones}
    assert gens == {
        frozenset({(1, 1, 0), (0, 1, 0), (0, 0, 1)}),
        frozenset({(1, 0, 0), (1, 1, 0), (0, 0, 1)}),
    }


def test_star_subdivide_rejects_bad_rays():
    with pytest.raises(PreconditionError):
        star_subdivide(orthant_fan(2), (0, 0))
    with pytest.raises(PreconditionError):
        star_subdivide(orthant_fan(2), (1, -1))


def test_locate_blowup_fan():
    f = star_subdivide(orthant_fan(2), (1, 1))
    loc = f.locate((2, 3))
    coords = dict(zip(loc.cone.gens, loc.lambdas))
    assert coords == {(1, 1): 2, (0, 1): 1}
    # reconstruction is exact
    rebuilt = tuple(
        sum(g[i] * l for g, l in zip(loc.cone.gens, loc.lambdas)) for i in range(2)
    )
    assert rebuilt == (2, 3)


def test_locate_on_ray_and_standard_cone():
    f = star_subdivide(orthant_fan(2), (1, 1))
    loc = f.locate((1, 1))
    coords = dict(zip(loc.cone.gens, loc.lambdas))
    assert coords[(1, 1)] == 1 and sum(coords.values()) == 1
    f0 = orthant_fan(2)
    loc0 = f0.locate((5, 7))
    assert dict(zip(loc0.cone.gens, loc0.lambdas)) == {(1, 0): 5, (0, 1): 7}


def test_locate_errors():
    f = orthant_fan(2)
    with pytest.raises(PreconditionError):
        f.locate((0, 0))
    partial = cone_fan((1, 0), (1, 1))
    with pytest.raises(InvariantViolation):
        partial.locate((1, 5))


def test_is_smooth():
    assert is_smooth(orthant_fan(4))
    assert not is_smooth(cone_fan((1, 0), (1, 2)))
    assert is_smooth(star_subdivide(orthant_fan(2), (1, 1)))


def test_resolve_examples():
    f = orthant_fan(3)
    assert resolve(f) == f

    r = resolve(cone_fan((1, 0), (1, 2)))
    assert (1, 1) in r.rays and is_smooth(r)

    r = resolve(cone_fan((1, 0), (2, 5)))
    assert set(r.rays) == {(1, 0), (2, 5), (1, 1), (1, 2)}
    assert is_smooth(r)


def test_resolve_matches_continued_fraction_oracle():
    for b in range(2, 13):
        for a in range(1, b):
            if gcd(a, b) != 1:
                continue
            base = cone_fan((1, 0), (a, b))
            r = resolve(base)
            assert is_smooth(r)
            added = sorted(set(r.rays) - set(base.rays))
            assert added == sorted(hirzebruch_jung_rays(a, b)), (a, b)


def test_ensure_rays():
    f = orthant_fan(2)
    assert ensure_rays(f, [(1, 0), (0, 1)]) == f
    blow = ensure_rays(f, [(1, 1)])
    assert (1, 1) in blow.rays
    deep = ensure_rays(f, [(2, 3)])
    assert (2, 3) in deep.rays and is_smooth(deep)


def test_ensure_rays_multiple_and_order_deterministic():
    f = orthant_fan(3)
    out = ensure_rays(f, [(1, 1, 0), (1, 1, 2)])
    assert {(1, 1, 0), (1, 1, 2)} <= set(out.rays)
    assert is_smooth(out)
    again = ensure_rays(f, [(1, 1, 0), (1, 1, 2)])
    assert out == again


def test_random_subdivisions_locate_reconstructs():
    rng = random.Random(1234)
    fan = orthant_fan(3)
    for _ in range(6):
        v = tuple(rng.randint(0, 4) for _ in range(3))
        if all(e == 0 for e in v):
            continue
        fan = star_subdivide(fan, primitive_part(v))
    fan = resolve(fan)
    assert is_smooth(fan)
    for _ in range(1000):
        v = tuple(rng.randint(0, 50) for _ in range(3))
        if all(e == 0 for e in v):
            continue
        loc = fan.locate(v)
        rebuilt = tuple(
            sum(g[i] * l for g, l in zip(loc.cone.gens, loc.lambdas))
            for i in range(3)
        )
        assert rebuilt == v
        assert all(l >= 0 for l in loc.lambdas)


def test_interior_points_lie_in_a_unique_cone():
    rng = random.Random(404)
    fan = orthant_fan(3)
    for v in [(1, 1, 1), (2, 1, 1), (1, 3, 2)]:
        fan = star_subdivide(fan, v)
    for _ in range(300):
        v = tuple(rng.randint(0, 20) for _ in range(3))
        if all(e == 0 for e in v):
            continue
        containing = [c for c in fan.max_cones if c.contains(v)]
        loc = fan.locate(v)
        if all(l > 0 for l in loc.lambdas):
            assert len(containing) == 1
        else:
            assert len(containing) >= 1


def test_subdivision_preserves_support():
    rng = random.Random(99)
    before = orthant_fan(2)
    after = star_subdivide(before, (3, 4))
    for _ in range(200):
        v = tuple(rng.randint(0, 30) for _ in range(2))
        if all(e == 0 for e in v):
            continue
        assert before.locate(v) is not None
        assert after.locate(v) is not None


def test_resolve_3d_stress():
    rng = random.Random(60601)
    for _ in range(15):
        v = tuple(rng.randint(1, 7) for _ in range(3))
        v = primitive_part(v)
        fan = cone_fan((1, 0, 0), (0, 1, 0), v)
        if fan.max_cones[0].det == 0:
            continue
        res = resolve(fan)
        assert is_smooth(res)
        # refinement: every original-cone sample still locates and rebuilds
        for _ in range(20):
            weights = [rng.randint(0, 5) for _ in range(3)]
            pt = tuple(
                sum(g[i] * w for g, w in zip(fan.max_cones[0].gens, weights))
                for i in range(3)
            )
            if all(e == 0 for e in pt):
                continue
            loc = res.locate(pt)
            rebuilt = tuple(
                sum(g[i] * l for g, l in zip(loc.cone.gens, loc.lambdas))
                for i in range(3)
            )
            assert rebuilt == pt


def test_cone_validation():
    with pytest.raises(PreconditionError):
        Cone(((1, 0), (2, 0)))  # dependent
    with pytest.raises(PreconditionError):
        Cone(((1, 0), (0, -1)))  # outside orthant
    with pytest.raises(PreconditionError):
        Cone(((2, 0),))  # not primitive


def test_fan_json_roundtrip():
    f = star_subdivide(orthant_fan(2), (1, 1))
    data = f.to_json()
    assert data["n"] == 2
    assert Fan.from_json(data) == f


def test_parallelepiped_points():
    c = Cone(((1, 0), (2, 5)))
    pts = c.parallelepiped_points()
    assert pts == [(1, 1), (1, 2), (2, 3), (2, 4)]
    assert Cone(((1, 0), (0, 1))).parallelepiped_points() == []
