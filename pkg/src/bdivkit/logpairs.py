"""Local SNC pairs, monomial valuations and their divisor coefficients.

The local model is (C^n, sum c_i H_i) with exact rational coefficients
c_i in [0,1] on the coordinate hyperplanes.  A monomial valuation is a
primitive nonzero integer vector v in the closed positive orthant; its
log discrepancy against the pair is sum v_i (1 - c_i), an affine-linear
function pinned by the values at the origin and at the unit vectors.

Two coefficient functions on valuations are central:

* ``pullback_coeff`` -- the coefficient of the valuation in the positive
  part of the log pullback, max(0, 1 - sum v_i (1 - c_i)); this is the
  value of the pullback b-divisor of the pair.
* ``default_one_coeff`` -- the naive extension of the pair: its own
  coefficient on a coordinate divisor and 1 on every other valuation.

``BDivisor`` stores a default-one b-divisor as a finite list of deviations,
and ``ModelDivisor`` carries ray coefficients on a fan so the pullback
coefficient can be evaluated relative to a higher model via barycentric
coordinates.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from math import ceil, floor

from .exact import (
    InvariantViolation,
    LatticeVec,
    PreconditionError,
    format_rat,
    format_rat_list,
    is_primitive,
    lattice_vec,
    parse_rat,
    parse_rat_list,
)
from .fans import Fan


def valuation(v) -> LatticeVec:
    """Validate a monomial valuation: primitive, >= 0, not zero."""
    vec = lattice_vec(v)
    if any(e < 0 for e in vec):
        raise PreconditionError(f"valuation {vec} leaves the positive orthant")
    if all(e == 0 for e in vec):
        raise PreconditionError("the zero vector is not a valuation")
    if not is_primitive(vec):
        raise PreconditionError(f"valuation {vec} is not primitive")
    return vec


def unit_index(v) -> int | None:
    """Index i when v = e_i, else None."""
    idx = None
    for i, e in enumerate(v):
        if e == 0:
            continue
        if e != 1 or idx is not None:
            return None
        idx = i
    return idx


def _check_unit_interval(x: Fraction, what: str) -> Fraction:
    if not 0 <= x <= 1:
        raise PreconditionError(f"{what} {format_rat(x)} is outside [0, 1]")
    return x


@dataclass(frozen=True)
class LocalPair:
    """Dimension n with exact coefficients c_1..c_n in [0,1] (0 means absent)."""

    coeffs: tuple

    def __post_init__(self):
        cs = tuple(parse_rat(c) for c in self.coeffs)
        if not cs:
            raise PreconditionError("a pair needs dimension >= 1")
        for c in cs:
            _check_unit_interval(c, "pair coefficient")
        object.__setattr__(self, "coeffs", cs)

    @property
    def n(self) -> int:
        return len(self.coeffs)

    @property
    def is_klt(self) -> bool:
        return all(c < 1 for c in self.coeffs)

    def to_json(self) -> dict:
        return {"n": self.n, "coeffs": format_rat_list(self.coeffs)}

    @classmethod
    def from_json(cls, data: dict) -> "LocalPair":
        coeffs = parse_rat_list(data["coeffs"])
        if "n" in data and int(data["n"]) != len(coeffs):
            raise PreconditionError("pair JSON: n does not match the coefficient count")
        return cls(coeffs)


def log_discrepancy(pair: LocalPair, v) -> Fraction:
    """sum v_i (1 - c_i), exactly."""
    vec = valuation(v)
    if len(vec) != pair.n:
        raise PreconditionError("valuation dimension mismatch")
    return sum(
        (Fraction(e) * (1 - c) for e, c in zip(vec, pair.coeffs)), Fraction(0)
    )


def pullback_coeff(pair: LocalPair, v) -> Fraction:
    """Coefficient of v in the positive part of the log pullback.

    max(0, 1 - sum v_i (1 - c_i)); the unclamped expression is affine linear
    with value 1 at the origin and c_i at e_i, and the positive part clamps
    it at zero.
    """
    return max(Fraction(0), 1 - log_discrepancy(pair, v))


def default_one_coeff(pair: LocalPair, v) -> Fraction:
    """c_i when v = e_i, else 1."""
    vec = valuation(v)
    if len(vec) != pair.n:
        raise PreconditionError("valuation dimension mismatch")
    i = unit_index(vec)
    return pair.coeffs[i] if i is not None else Fraction(1)


@dataclass(frozen=True)
class BDivisor:
    """Default-one b-divisor: values at e_1..e_n plus finitely many deviations.

    Every valuation not listed takes the value 1; unit vectors take the pair
    coefficients, so deviation keys must not be unit vectors.
    """

    pair_coeffs: tuple
    deviations: dict = field(default_factory=dict)

    def __post_init__(self):
        pcs = tuple(parse_rat(c) for c in self.pair_coeffs)
        for c in pcs:
            _check_unit_interval(c, "divisorial value")
        n = len(pcs)
        devs = {}
        for key, value in self.deviations.items():
            vec = valuation(key)
            if len(vec) != n:
                raise PreconditionError("deviation dimension mismatch")
            if unit_index(vec) is not None:
                raise PreconditionError(
                    f"deviation at unit vector {vec}: set the divisorial value instead"
                )
            if vec in devs:
                raise PreconditionError(f"duplicate deviation key {vec}")
            devs[vec] = _check_unit_interval(parse_rat(value), "deviation value")
        object.__setattr__(self, "pair_coeffs", pcs)
        object.__setattr__(self, "deviations", devs)

    @property
    def n(self) -> int:
        return len(self.pair_coeffs)

    def value(self, v) -> Fraction:
        vec = valuation(v)
        if len(vec) != self.n:
            raise PreconditionError("valuation dimension mismatch")
        if vec in self.deviations:
            return self.deviations[vec]
        i = unit_index(vec)
        if i is not None:
            return self.pair_coeffs[i]
        return Fraction(1)

    def with_deviations(self, updates: dict) -> "BDivisor":
        devs = dict(self.deviations)
        devs.update(updates)
        return BDivisor(self.pair_coeffs, devs)

    def to_json(self) -> dict:
        return {
            "pair": format_rat_list(self.pair_coeffs),
            "deviations": [
                {"v": list(k), "value": format_rat(val)}
                for k, val in sorted(self.deviations.items())
            ],
        }

    @classmethod
    def from_json(cls, data: dict, default_pair: LocalPair | None = None) -> "BDivisor":
        if "pair" in data and data["pair"] is not None:
            pcs = parse_rat_list(data["pair"])
        elif default_pair is not None:
            pcs = default_pair.coeffs
        else:
            raise PreconditionError("b-divisor JSON needs 'pair' values")
        devs = {}
        for item in data.get("deviations", ()):
            devs[tuple(int(x) for x in item["v"])] = parse_rat(item["value"])
        return cls(pcs, devs)


def bdiv_eval(bdiv: BDivisor, v) -> Fraction:
    """Value of the b-divisor at a valuation (deviation, divisorial, or 1)."""
    return bdiv.value(v)


@dataclass(frozen=True)
class ModelDivisor:
    """A divisor on a toric model: one exact coefficient per fan ray."""

    fan: Fan
    ray_coeffs: tuple

    def __post_init__(self):
        coeffs = tuple(parse_rat(c) for c in self.ray_coeffs)
        if len(coeffs) != len(self.fan.rays):
            raise PreconditionError("one coefficient per fan ray is required")
        for c in coeffs:
            _check_unit_interval(c, "ray coefficient")
        object.__setattr__(self, "ray_coeffs", coeffs)

    def coeff(self, ray) -> Fraction:
        idx = self.fan.ray_index.get(tuple(ray))
        if idx is None:
            raise PreconditionError(f"{tuple(ray)} is not a ray of the model")
        return self.ray_coeffs[idx]

    def as_dict(self) -> dict:
        return {r: c for r, c in zip(self.fan.rays, self.ray_coeffs)}

    def to_json(self) -> dict:
        return {
            "fan": self.fan.to_json(),
            "ray_coeffs": format_rat_list(self.ray_coeffs),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ModelDivisor":
        fan = Fan.from_json(data["fan"])
        return cls(fan, parse_rat_list(data["ray_coeffs"]))


def pullback_trace(pair: LocalPair, fan: Fan) -> ModelDivisor:
    """Trace of the pair's pullback b-divisor on a fan: pullback_coeff per ray."""
    if fan.n != pair.n:
        raise PreconditionError("fan dimension does not match the pair")
    return ModelDivisor(fan, tuple(pullback_coeff(pair, r) for r in fan.rays))


def relative_pullback_coeff(md: ModelDivisor, v) -> Fraction:
    """Pullback coefficient of v relative to a pair living on a model.

    Locates v in the model's fan with exact barycentric coordinates lam and
    returns max(0, 1 - sum lam_j (1 - g_j)) where g_j are the ray
    coefficients of the containing cone.  On the trivial fan this reduces to
    ``pullback_coeff``; the value is independent of the cone chosen on a
    shared face because the interpolated ray values agree there.
    """
    loc = md.fan.locate(v)
    total = Fraction(0)
    for lam, ray_idx in zip(loc.lambdas, loc.ray_indices):
        if lam:
            total += lam * (1 - md.ray_coeffs[ray_idx])
    return max(Fraction(0), 1 - total)


def meet(a: ModelDivisor, b: ModelDivisor) -> ModelDivisor:
    """Ray-wise minimum of two divisors on the same fan."""
    if a.fan != b.fan:
        raise PreconditionError("meet needs divisors on the same fan")
    return ModelDivisor(
        a.fan, tuple(min(x, y) for x, y in zip(a.ray_coeffs, b.ray_coeffs))
    )


# ---------------------------------------------------------------------------
# minimal log discrepancy at the origin


def _mld_box(pair: LocalPair) -> list:
    # Any minimizer v >= (1,..,1) satisfies v_i (1 - c_i) <= a0 where a0 is
    # the value at (1,..,1): otherwise its single term already exceeds the
    # value attained there.  Hence v_i <= ceil(a0 / (1 - c_i)) when c_i < 1;
    # coordinates with c_i = 1 contribute nothing and stay pinned at 1.
    a0 = sum((1 - c for c in pair.coeffs), Fraction(0))
    box = []
    for c in pair.coeffs:
        if c == 1:
            box.append(1)
        else:
            box.append(max(1, ceil(a0 / (1 - c))))
    return box


def mld_origin_minimizer(pair: LocalPair) -> tuple:
    """Exact (minimal log discrepancy at the origin, lex-least minimizer)."""
    box = _mld_box(pair)
    weights = [1 - c for c in pair.coeffs]
    best = None
    best_v = None

    def walk(prefix, partial):
        nonlocal best, best_v
        i = len(prefix)
        if best is not None and partial > best:
            return
        if i == pair.n:
            if best is None or partial < best:
                best = partial
                best_v = tuple(prefix)
            return
        for e in range(1, box[i] + 1):
            walk(prefix + [e], partial + e * weights[i])
            if weights[i] == 0:
                break

    walk([], Fraction(0))
    return best, best_v


def mld_origin(pair: LocalPair) -> Fraction:
    """Minimum of the log discrepancy over valuations centred at the origin.

    May be <= 0 when some coefficient equals 1 (the pair is then not klt).
    """
    return mld_origin_minimizer(pair)[0]


# ---------------------------------------------------------------------------
# rounding comparison


@dataclass(frozen=True)
class RoundingReport:
    floor_up: tuple
    ceil_down: tuple
    le: bool
    equal: bool

    def to_json(self) -> dict:
        return {
            "floor_m": [str(x) for x in self.floor_up],
            "ceil_m_minus_1": [str(x) for x in self.ceil_down],
            "le": self.le,
            "equal": self.equal,
        }


def rounding_comparison(coeffs, m: int) -> RoundingReport:
    """Compare floor(m*c) with ceil((m-1)*c) componentwise, exactly.

    Requires every coefficient in [0, 1); the floor never exceeds the ceil,
    with equality whenever the coefficients have the form (r-1)/r.
    """
    if m < 1:
        raise PreconditionError("m must be a positive integer")
    cs = parse_rat_list(coeffs)
    for c in cs:
        if not 0 <= c < 1:
            raise PreconditionError(
                f"coefficient {format_rat(c)} is outside [0, 1)"
            )
    lhs = tuple(floor(m * c) for c in cs)
    rhs = tuple(ceil((m - 1) * c) for c in cs)
    le = all(a <= b for a, b in zip(lhs, rhs))
    if not le:
        raise InvariantViolation(
            f"floor({m} c) exceeded ceil({m - 1} c) for c in {format_rat_list(cs)}"
        )
    return RoundingReport(floor_up=lhs, ceil_down=rhs, le=le, equal=lhs == rhs)


# ---------------------------------------------------------------------------
# independent 2D cross-check


def blowup_chain_coeff(b1, b2, v) -> Fraction:
    """Pullback coefficient on C^2 via an explicit chain of point blow-ups.

    Walks the Stern-Brocot path from the corner (e_1, e_2) to the ray v,
    propagating the exceptional coefficient e = x + y - 1 at every step and
    clamping only at the end.  Used as an independent oracle for
    ``pullback_coeff`` in dimension 2.
    """
    vec = valuation(v)
    if len(vec) != 2:
        raise PreconditionError("the blow-up chain oracle works in dimension 2")
    x = parse_rat(b1)
    y = parse_rat(b2)
    alpha, beta = vec
    if beta == 0:
        return max(Fraction(0), x)
    if alpha == 0:
        return max(Fraction(0), y)
    while True:
        if alpha == beta:
            # primitive with alpha == beta forces (1, 1): the current corner
            return max(Fraction(0), x + y - 1)
        if alpha > beta:
            alpha -= beta
            y = x + y - 1
            if alpha == 0:
                return max(Fraction(0), y)
        else:
            beta -= alpha
            x = x + y - 1
            if beta == 0:
                return max(Fraction(0), x)
