"""Explicit bound formulas: automorphism counts, volumes, and constants.

Everything here is a closed-form exact computation: the genus-g curve bound
84(g-1) and its restatement as 42 times the canonical volume, products of
maximal-symmetry curves, Fermat hypersurfaces and the unitary groups acting
on them in characteristic p, the doubly-exponential sequence r0 = 1,
r_{k+1} = r_k (r_k + 1) governing the smallest known log-pair volumes, exact
lattice-polytope volumes backing the toric volume computations, and the
constant propagation m = 2 g0 (1 + gamma)^(n-1) used by the effectivity
bookkeeping.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from itertools import combinations
from math import comb, factorial, floor

from .exact import (
    InvariantViolation,
    PreconditionError,
    UniPoly,
    format_rat,
    parse_rat,
    parse_rat_list,
)
from .fans import _det, _rank  # exact linear algebra helpers


@dataclass(frozen=True)
class BoundReport:
    """Named exact quantities with short provenance notes."""

    kind: str
    values: dict
    notes: dict = field(default_factory=dict)

    def to_json(self) -> dict:
        out = {"kind": self.kind}
        for key, val in sorted(self.values.items()):
            if isinstance(val, bool):
                out[key] = val
            elif isinstance(val, int):
                out[key] = str(val)
            elif isinstance(val, Fraction):
                out[key] = format_rat(val)
            elif isinstance(val, UniPoly):
                out[key] = val.to_strings()
            elif isinstance(val, (list, tuple)):
                out[key] = [
                    format_rat(x) if isinstance(x, (Fraction, int)) else x
                    for x in val
                ]
            else:
                out[key] = val
        if self.notes:
            out["notes"] = dict(sorted(self.notes.items()))
        return out


# ---------------------------------------------------------------------------
# the doubly-exponential sequence and minimal-volume candidates


@dataclass(frozen=True)
class SylvesterSeq:
    """Terms r_0..r_k with r_0 = 1 and r_{k+1} = r_k (r_k + 1)."""

    terms: tuple

    def __post_init__(self):
        ts = tuple(int(t) for t in self.terms)
        if not ts or ts[0] != 1:
            raise PreconditionError("the sequence starts at r_0 = 1")
        prod = 1
        for i in range(1, len(ts)):
            if ts[i] != ts[i - 1] * (ts[i - 1] + 1):
                raise PreconditionError("recursion r_{k+1} = r_k (r_k + 1) violated")
            prod *= ts[i - 1] + 1
            if ts[i] != prod:
                raise InvariantViolation(
                    "product identity r_{k+1} = prod (r_i + 1) violated"
                )
        object.__setattr__(self, "terms", ts)


def sylvester(k: int) -> SylvesterSeq:
    """First k+1 terms of the sequence, exactly."""
    if k < 1:
        raise PreconditionError("need k >= 1")
    terms = [1]
    for _ in range(k):
        terms.append(terms[-1] * (terms[-1] + 1))
    return SylvesterSeq(tuple(terms))


def min_volume_candidate(n: int) -> Fraction:
    """1 / r_{n+2}^n: the smallest known log-pair volume in dimension n."""
    if n < 1:
        raise PreconditionError("need n >= 1")
    r = sylvester(n + 2).terms[n + 2]
    return Fraction(1, r**n)


def sylvester_coeffs(n: int) -> tuple:
    """The n+2 coefficients r_i/(r_i + 1), i = 0..n+1."""
    if n < 1:
        raise PreconditionError("need n >= 1")
    terms = sylvester(n + 1).terms
    return tuple(Fraction(r, r + 1) for r in terms[: n + 2])


def projective_space_log_volume(n: int, coeffs) -> Fraction:
    """Volume of projective n-space with n+2 general hyperplanes.

    With coefficients a_0..a_{n+1} the log canonical class is linearly
    equivalent to (sum a_i - n - 1) times a hyperplane, so the volume is
    max(0, sum a_i - n - 1)^n; zero when the class is not big.
    """
    if n < 1:
        raise PreconditionError("need n >= 1")
    cs = parse_rat_list(coeffs)
    if len(cs) != n + 2:
        raise PreconditionError(f"need exactly n+2 = {n + 2} coefficients")
    for c in cs:
        if not 0 <= c <= 1:
            raise PreconditionError(f"coefficient {format_rat(c)} outside [0, 1]")
    excess = sum(cs, Fraction(0)) - (n + 1)
    if excess <= 0:
        return Fraction(0)
    return excess**n


# ---------------------------------------------------------------------------
# exact lattice-polytope volume


@dataclass(frozen=True)
class Polytope:
    """H-representation: rows (normal, offset) meaning <normal, x> >= -offset."""

    n: int
    normals: tuple
    offsets: tuple

    def __post_init__(self):
        if not 1 <= self.n <= 4:
            raise PreconditionError("polytope dimension must be between 1 and 4")
        normals = tuple(tuple(int(x) for x in row) for row in self.normals)
        offsets = tuple(parse_rat(b) for b in self.offsets)
        if len(normals) != len(offsets):
            raise PreconditionError("one offset per normal is required")
        if len(normals) < self.n + 1:
            raise PreconditionError("too few halfspaces to bound a polytope")
        for row in normals:
            if len(row) != self.n:
                raise PreconditionError("normal dimension mismatch")
            if all(x == 0 for x in row):
                raise PreconditionError("zero normal")
        object.__setattr__(self, "normals", normals)
        object.__setattr__(self, "offsets", offsets)

    @classmethod
    def from_json(cls, data: dict) -> "Polytope":
        return cls(
            n=int(data["n"]),
            normals=tuple(tuple(int(x) for x in r) for r in data["normals"]),
            offsets=tuple(data["offsets"]),
        )

    @classmethod
    def simplex(cls, n: int, d) -> "Polytope":
        """{x >= 0, sum x <= d}: the section polytope of degree d on P^n."""
        normals = [tuple(1 if j == i else 0 for j in range(n)) for i in range(n)]
        normals.append(tuple(-1 for _ in range(n)))
        offsets = [Fraction(0)] * n + [parse_rat(d)]
        return cls(n=n, normals=tuple(normals), offsets=tuple(offsets))

    @classmethod
    def box(cls, n: int, side) -> "Polytope":
        normals = []
        offsets = []
        for i in range(n):
            e = tuple(1 if j == i else 0 for j in range(n))
            normals.append(e)
            offsets.append(Fraction(0))
            normals.append(tuple(-x for x in e))
            offsets.append(parse_rat(side))
        return cls(n=n, normals=tuple(normals), offsets=tuple(offsets))


def _solve_square(rows, rhs):
    """Exact solution of a square rational system, or None if singular."""
    n = len(rows)
    m = [[Fraction(x) for x in row] + [Fraction(b)] for row, b in zip(rows, rhs)]
    for col in range(n):
        pivot = None
        for i in range(col, n):
            if m[i][col] != 0:
                pivot = i
                break
        if pivot is None:
            return None
        m[col], m[pivot] = m[pivot], m[col]
        pv = m[col][col]
        m[col] = [x / pv for x in m[col]]
        for i in range(n):
            if i != col and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[col])]
    return tuple(m[i][n] for i in range(n))


def _affine_dim(points) -> int:
    if not points:
        return -1
    base = points[0]
    rows = [[x - y for x, y in zip(p, base)] for p in points[1:]]
    return _rank(rows)


def _enumerate_vertices(poly: Polytope):
    """All vertices with their active-constraint sets; errors when unbounded."""
    # recession ray check: a nonzero direction with <normal, d> >= 0 for all
    # rows makes the polyhedron unbounded; extreme rays lie on n-1 active
    # constraints, so scanning those null spaces is exhaustive
    n = poly.n
    rows = poly.normals
    if n == 1:
        has_upper = any(r[0] < 0 for r in rows)
        has_lower = any(r[0] > 0 for r in rows)
        if not (has_upper and has_lower):
            raise PreconditionError("polytope is unbounded")
    else:
        for subset in combinations(range(len(rows)), n - 1):
            mat = [rows[i] for i in subset]
            if _rank(mat) != n - 1:
                continue
            direction = _null_direction(mat)
            if direction is None:
                continue
            for cand in (direction, tuple(-x for x in direction)):
                if all(
                    sum(a * x for a, x in zip(row, cand)) >= 0 for row in rows
                ):
                    raise PreconditionError("polytope is unbounded")

    verts = {}
    for subset in combinations(range(len(rows)), n):
        mat = [rows[i] for i in subset]
        rhs = [-poly.offsets[i] for i in subset]
        pt = _solve_square(mat, rhs)
        if pt is None:
            continue
        ok = True
        for row, off in zip(rows, poly.offsets):
            if sum(a * x for a, x in zip(row, pt)) < -off:
                ok = False
                break
        if ok:
            verts.setdefault(pt, set()).update(subset)
    # active sets recomputed exactly so shared vertices merge
    out = []
    for pt in sorted(verts):
        active = frozenset(
            i
            for i, (row, off) in enumerate(zip(rows, poly.offsets))
            if sum(a * x for a, x in zip(row, pt)) == -off
        )
        out.append((pt, active))
    return out


def _null_direction(rows):
    """An integer spanning vector of a corank-1 null space, or None."""
    n = len(rows[0])
    m = [[Fraction(x) for x in row] for row in rows]
    pivots = []
    r = 0
    for col in range(n):
        piv = None
        for i in range(r, len(m)):
            if m[i][col] != 0:
                piv = i
                break
        if piv is None:
            continue
        m[r], m[piv] = m[piv], m[r]
        pv = m[r][col]
        m[r] = [x / pv for x in m[r]]
        for i in range(len(m)):
            if i != r and m[i][col] != 0:
                f = m[i][col]
                m[i] = [a - f * b for a, b in zip(m[i], m[r])]
        pivots.append(col)
        r += 1
    free = [c for c in range(n) if c not in pivots]
    if len(free) != 1:
        return None
    f = free[0]
    vec = [Fraction(0)] * n
    vec[f] = Fraction(1)
    for row_idx, col in enumerate(pivots):
        vec[col] = -m[row_idx][f]
    denom = 1
    for x in vec:
        denom = denom * x.denominator // _gcd_int(denom, x.denominator)
    ints = tuple(int(x * denom) for x in vec)
    return ints


def _gcd_int(a: int, b: int) -> int:
    while b:
        a, b = b, a % b
    return a if a else 1


def _triangulate(verts_active, dim: int):
    """Fan triangulation of a face into dim-simplices (tuples of points)."""
    if _affine_dim([p for p, _ in verts_active]) != dim:
        raise InvariantViolation("face has unexpected affine dimension")
    if len(verts_active) == dim + 1:
        return [tuple(p for p, _ in verts_active)]
    base_pt, base_active = min(verts_active)
    simplices = []
    facets_seen = set()
    all_constraints = set()
    for _, act in verts_active:
        all_constraints |= act
    for j in sorted(all_constraints):
        if j in base_active:
            continue
        sub = [(p, a) for p, a in verts_active if j in a]
        if len(sub) < dim:
            continue
        if _affine_dim([p for p, _ in sub]) != dim - 1:
            continue
        key = frozenset(p for p, _ in sub)
        if key in facets_seen:
            continue
        facets_seen.add(key)
        for simplex in _triangulate(sub, dim - 1):
            simplices.append((base_pt,) + simplex)
    return simplices


def polytope_volume(poly: Polytope) -> Fraction:
    """Exact Euclidean volume via vertex enumeration and fan triangulation.

    Returns 0 for empty or lower-dimensional input; raises on unbounded.
    """
    verts = _enumerate_vertices(poly)
    if len(verts) < poly.n + 1:
        return Fraction(0)
    if _affine_dim([p for p, _ in verts]) < poly.n:
        return Fraction(0)
    total = Fraction(0)
    for simplex in _triangulate(verts, poly.n):
        base = simplex[0]
        rows = [[x - y for x, y in zip(p, base)] for p in simplex[1:]]
        # rational determinant via clearing denominators
        denom = 1
        for row in rows:
            for x in row:
                denom = denom * x.denominator // _gcd_int(denom, x.denominator)
        int_rows = [[int(x * denom) for x in row] for row in rows]
        det = _det(int_rows)
        total += Fraction(abs(det), denom**poly.n)
    return total / factorial(poly.n)


# ---------------------------------------------------------------------------
# curve and hypersurface reports


def hurwitz_report(g: int) -> BoundReport:
    """|G| <= 84(g-1) for a genus-g curve, g >= 2; equals 42 vol(K)."""
    if g < 2:
        raise PreconditionError("need genus g >= 2 (general type)")
    vol = 2 * g - 2
    bound = 84 * (g - 1)
    if bound != 42 * vol:
        raise InvariantViolation("84(g-1) != 42(2g-2)")
    return BoundReport(
        kind="hurwitz",
        values={"g": g, "vol": vol, "bound": bound, "ratio": Fraction(bound, vol)},
        notes={"bound": "84*(g-1)", "vol": "2g-2", "ratio": "bound/vol = 42"},
    )


def curve_power_report(n: int, g: int) -> BoundReport:
    """The n-fold product of a maximal-symmetry genus-g curve."""
    if n < 1:
        raise PreconditionError("need n >= 1")
    if g < 2:
        raise PreconditionError("need genus g >= 2")
    aut = factorial(n) * 42**n * (2 * g - 2) ** n
    vol = factorial(n) * (2 * g - 2) ** n
    ratio = Fraction(aut, vol)
    if ratio != 42**n:
        raise InvariantViolation("aut/vol != 42^n")
    return BoundReport(
        kind="curve-power",
        values={"n": n, "g": g, "aut": aut, "vol": vol, "ratio": ratio},
        notes={
            "aut": "n! * 42^n * (2g-2)^n",
            "vol": "n! * (2g-2)^n",
            "ratio": "42^n, independent of g",
        },
    )


def fermat_report(n: int, m: int) -> BoundReport:
    """Degree-m Fermat hypersurface in projective (n+1)-space."""
    if n < 1:
        raise PreconditionError("need n >= 1")
    if m <= n + 2:
        raise PreconditionError("not of general type: volume <= 0")
    aut_lower = factorial(n + 2) * m ** (n + 1)
    vol = m * (m - n - 2) ** n
    return BoundReport(
        kind="fermat",
        values={
            "n": n,
            "m": m,
            "aut_lower": aut_lower,
            "vol": vol,
            "ratio": Fraction(aut_lower, vol),
        },
        notes={
            "aut_lower": "(n+2)! * m^(n+1), a lower bound for the symmetry count",
            "vol": "m * (m-n-2)^n",
        },
    )


def fermat_threshold_scan(n_max: int) -> list:
    """Rows comparing (n+2)!(n+3)^n against 42^n for m = n+3, n = 1..n_max."""
    if n_max < 1:
        raise PreconditionError("need n_max >= 1")
    rows = []
    for n in range(1, n_max + 1):
        report = fermat_report(n, n + 3)
        ratio = report.values["ratio"]
        if ratio != factorial(n + 2) * (n + 3) ** n:
            raise InvariantViolation("scan ratio disagrees with (n+2)!(n+3)^n")
        rows.append(
            {
                "n": n,
                "m": n + 3,
                "aut_lower": report.values["aut_lower"],
                "vol": report.values["vol"],
                "ratio": ratio,
                "threshold": 42**n,
                "exceeds": ratio > 42**n,
            }
        )
    return rows


# ---------------------------------------------------------------------------
# unitary group orders in characteristic p


def is_prime_power(q: int) -> bool:
    if q < 2:
        return False
    m = q
    p = None
    d = 2
    while d * d <= m:
        if m % d == 0:
            p = d
            while m % d == 0:
                m //= d
            break
        d += 1
    if p is None:
        return True  # q itself is prime
    return m == 1


def unitary_order_poly(n: int) -> tuple:
    """Polynomial part of the unitary group order, plus the gcd divisor rule.

    Returns (q^binom(n+2,2) * prod_{i=2}^{n+2} (q^i - (-1)^i), n+2); the true
    order divides the polynomial value by gcd(n+2, q+1).  The gcd factor is
    not polynomial in q, so degree statements refer to the polynomial part.
    """
    if n < 1:
        raise PreconditionError("need n >= 1")
    poly = UniPoly.monomial(1, comb(n + 2, 2))
    for i in range(2, n + 3):
        sign = 1 if i % 2 == 0 else -1
        # q^i - (-1)^i
        factor = UniPoly.monomial(1, i) - UniPoly.monomial(sign, 0)
        poly = poly * factor
    return poly, n + 2


def unitary_order_value(n: int, q: int) -> int:
    """Exact order of the unitary group on an (n+2)-dimensional space over q."""
    if not is_prime_power(q):
        raise PreconditionError(f"q = {q} is not a prime power")
    poly, gcd_mod = unitary_order_poly(n)
    value = poly.eval(Fraction(q))
    if value.denominator != 1:
        raise InvariantViolation("polynomial part is not integral")
    g = _gcd_int(gcd_mod, q + 1)
    num = int(value)
    if num % g:
        raise InvariantViolation("gcd divisor does not divide the polynomial part")
    return num // g


def char_p_ratio_report(q_max: int) -> tuple:
    """Fermat curves of degree q+1 over prime powers 3 <= q <= q_max.

    For each q the curve has genus q(q-1)/2, canonical volume (q+1)(q-2),
    and a unitary symmetry group of order q^3 (q^2-1)(q^3+1)/gcd(3, q+1);
    the order stays below 216 * vol^4 throughout.  Returns (report, rows).
    """
    if q_max < 3:
        raise PreconditionError("need q_max >= 3")
    rows = []
    max_ratio = None
    for q in range(3, q_max + 1):
        if not is_prime_power(q):
            continue
        g = q * (q - 1) // 2
        vol = 2 * g - 2
        if vol != (q + 1) * (q - 2):
            raise InvariantViolation("volume identity (q+1)(q-2) failed")
        order = unitary_order_value(1, q)
        bound = 216 * vol**4
        if order > bound:
            raise InvariantViolation(
                f"order {order} exceeds 216*vol^4 = {bound} at q = {q}"
            )
        ratio = Fraction(order, vol**4)
        if max_ratio is None or ratio > max_ratio:
            max_ratio = ratio
        rows.append(
            {
                "q": q,
                "g": g,
                "vol": vol,
                "order": order,
                "bound": bound,
                "ok": order <= bound,
            }
        )
    poly, _ = unitary_order_poly(1)
    return BoundReport(
        kind="char-p",
        values={
            "q_max": q_max,
            "count": len(rows),
            "max_ratio": max_ratio,
            "order_degree": int(poly.degree),
            "vol_degree": 2,
        },
        notes={
            "bound": "order <= 216 * vol^4",
            "degrees": "deg order = 8 = 4 * deg vol",
            "rows": "see the scan rows",
        },
    ), rows


# ---------------------------------------------------------------------------
# constant propagation


def effective_constants(n: int, eps, gamma0, delta) -> BoundReport:
    """Propagate a hypothetical sub-dimensional volume bound eps.

    gamma_rec = 2n/eps and m_rec = 2*gamma0*(1+gamma_rec)^(n-1) make a
    multiple of an ample divisor potentially birational; gamma_bir = 4n/eps
    and C = 2*(1+gamma_bir)^(n-1) give the birationality constant with
    volume threshold (C*n)^n; M_min is the least integer strictly greater
    than C*n/delta + 1.
    """
    if n < 1:
        raise PreconditionError("need n >= 1")
    e = parse_rat(eps)
    g0 = parse_rat(gamma0)
    d = parse_rat(delta)
    if e <= 0 or d <= 0:
        raise PreconditionError("eps and delta must be positive")
    if g0 < 1:
        raise PreconditionError("gamma0 must be >= 1")
    gamma_rec = Fraction(2 * n) / e
    m_rec = 2 * g0 * (1 + gamma_rec) ** (n - 1)
    gamma_bir = Fraction(4 * n) / e
    big_c = 2 * (1 + gamma_bir) ** (n - 1)
    vol_threshold = (big_c * n) ** n
    x = big_c * n / d
    m_min = floor(x) + 2  # least integer > x + 1, whether or not x is integral
    if not (m_min > x + 1 and m_min - 1 <= x + 1):
        raise InvariantViolation("M_min does not bracket C*n/delta + 1")
    return BoundReport(
        kind="constants",
        values={
            "n": n,
            "eps": e,
            "gamma0": g0,
            "delta": d,
            "gamma_rec": gamma_rec,
            "m_rec": m_rec,
            "gamma_bir": gamma_bir,
            "C": big_c,
            "vol_threshold": vol_threshold,
            "M_min": m_min,
        },
        notes={
            "gamma_rec": "2n/eps",
            "m_rec": "2*gamma0*(1+gamma_rec)^(n-1)",
            "gamma_bir": "4n/eps",
            "C": "2*(1+gamma_bir)^(n-1)",
            "vol_threshold": "(C*n)^n",
            "M_min": "least integer > C*n/delta + 1",
        },
    )
