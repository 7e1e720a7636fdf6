"""Weight-descent reduction of a default-one b-divisor over a local model.

Given a local SNC pair and a b-divisor B whose trace on the model is the
pair itself, a *witness* is a valuation whose B-value is strictly below its
pullback coefficient.  The *weight* of the state is -1 when no witness
exists, and otherwise the maximal number of coefficient-one boundary
components through the centre of a witness.

A *cut* replaces the model by a smooth refinement extracting a chosen set of
valuations (all with positive pullback coefficient), re-traces the pullback
through each one-ray extraction, takes the ray-wise minimum of those traces,
and meets the result with B.  The driver picks the cut valuations chart by
chart:

* in a chart with no coefficient-one components, every lattice vector with
  positive pullback coefficient (other than the chart's own rays) is
  extracted;
* otherwise, for every prefix f over the sub-one coordinates with positive
  pullback coefficient, one valuation minimising B over the fibre
  {(f, anything)} is extracted.

Each such cut strictly decreases the weight, so the loop ends at weight -1,
where the pullback of the final trace is bounded by B everywhere; the
``verify_reduction`` checker confirms that bound exhaustively on a box.

With the default-one representation the witness search is exact: an
unlisted, non-divisorial valuation has B-value 1, which no pullback
coefficient exceeds, so only listed deviations can witness.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from itertools import product as iter_product
from math import floor, gcd

from .exact import (
    InvariantViolation,
    LatticeVec,
    PreconditionError,
    format_rat,
    is_primitive,
)
from .fans import Cone, Fan, ensure_rays, orthant_fan, star_subdivide
from .logpairs import (
    BDivisor,
    LocalPair,
    ModelDivisor,
    pullback_coeff,
    relative_pullback_coeff,
    unit_index,
    valuation,
)


@dataclass(frozen=True)
class LocalModel:
    """A local pair with its coefficient-one components listed last."""

    pair: LocalPair

    def __post_init__(self):
        cs = self.pair.coeffs
        seen_one = False
        for c in cs:
            if c == 1:
                seen_one = True
            elif seen_one:
                raise PreconditionError(
                    "coefficient-one components must come last; "
                    "use LocalModel.arrange to permute"
                )

    @property
    def n(self) -> int:
        return self.pair.n

    @property
    def s(self) -> int:
        return sum(1 for c in self.pair.coeffs if c < 1)

    @property
    def w(self) -> int:
        return self.n - self.s

    @classmethod
    def arrange(cls, pair: LocalPair, bdiv: BDivisor | None = None):
        """Sort coefficient-one components last; permute a b-divisor along.

        Returns (model, permuted b-divisor, permutation), where permutation
        maps new positions to original ones.
        """
        order = sorted(range(pair.n), key=lambda i: (pair.coeffs[i] == 1, i))
        perm = tuple(order)
        new_pair = LocalPair(tuple(pair.coeffs[i] for i in perm))
        new_bdiv = None
        if bdiv is not None:
            if bdiv.n != pair.n:
                raise PreconditionError("b-divisor dimension mismatch")
            new_bdiv = BDivisor(
                tuple(bdiv.pair_coeffs[i] for i in perm),
                {
                    tuple(vec[i] for i in perm): val
                    for vec, val in bdiv.deviations.items()
                },
            )
        return cls(new_pair), new_bdiv, perm


def positive_pullback_prefixes(model: LocalModel) -> list:
    """All v in N^s with sum v_i (1 - c_i) < 1, sorted lexicographically.

    These are exactly the sub-one coordinate prefixes of valuations with
    positive pullback coefficient; the zero vector is included.  The box
    bound v_i <= floor(1/(1-c_i)) holds because a single term must already
    stay below 1.
    """
    cs = model.pair.coeffs[: model.s]
    for c in cs:
        if c == 1:
            raise PreconditionError("prefix coefficients must be < 1")
    if model.s == 0:
        return [()]
    bounds = [floor(Fraction(1) / (1 - c)) for c in cs]
    out = []
    for v in iter_product(*(range(b + 1) for b in bounds)):
        total = sum((e * (1 - c) for e, c in zip(v, cs)), Fraction(0))
        if total < 1:
            out.append(tuple(v))
    out.sort()
    return out


@dataclass(frozen=True)
class Witness:
    """A valuation whose B-value lies strictly below its pullback coefficient."""

    vec: tuple
    b_value: Fraction
    pullback: Fraction
    stratum: tuple
    weight: int

    def to_json(self) -> dict:
        return {
            "v": list(self.vec),
            "B": format_rat(self.b_value),
            "pullback": format_rat(self.pullback),
            "stratum": list(self.stratum),
            "weight": self.weight,
        }


def stratum_weight(model: LocalModel, bdiv: BDivisor, stratum) -> tuple:
    """Weight of one stratum of the initial model, with a witness if any.

    The stratum is a nonempty 0-based index set; witnesses centred there are
    valuations supported exactly on it.  Returns (-1, None) without a
    witness, else (count of coefficient-one components through the stratum,
    lex-least witness).
    """
    strat = tuple(sorted(set(stratum)))
    if not strat:
        raise PreconditionError("stratum must be a nonempty index set")
    for i in strat:
        if not 0 <= i < model.n:
            raise PreconditionError(f"stratum index {i} out of range")
    if bdiv.n != model.n:
        raise PreconditionError("b-divisor dimension mismatch")

    candidates = []
    if len(strat) == 1:
        i = strat[0]
        e_i = tuple(1 if j == i else 0 for j in range(model.n))
        candidates.append((e_i, bdiv.pair_coeffs[i]))
    for vec, val in sorted(bdiv.deviations.items()):
        if tuple(i for i, e in enumerate(vec) if e > 0) == strat:
            candidates.append((vec, val))

    w = sum(1 for i in strat if model.pair.coeffs[i] == 1)
    for vec, val in candidates:
        pb = pullback_coeff(model.pair, vec)
        if val < pb:
            return w, Witness(vec, val, pb, strat, w)
    return -1, None


def pair_weight_witness(model: LocalModel, bdiv: BDivisor) -> tuple:
    """(max stratum weight, a witness realizing it), or (-1, None)."""
    support = [i for i, c in enumerate(model.pair.coeffs) if c > 0]
    best = -1
    best_witness = None
    # strata are intersections of boundary components; witnesses force their
    # support inside the positive-coefficient components, so other subsets
    # cannot contribute
    for mask in range(1, 1 << len(support)):
        strat = tuple(support[i] for i in range(len(support)) if mask >> i & 1)
        w, witness = stratum_weight(model, bdiv, strat)
        if witness is not None and w > best:
            best = w
            best_witness = witness
    return best, best_witness


def pair_weight(model: LocalModel, bdiv: BDivisor) -> int:
    """Maximum stratum weight over all strata of the model (-1 if none)."""
    return pair_weight_witness(model, bdiv)[0]


def pick_fiber_minimizer(model: LocalModel, bdiv: BDivisor, prefix) -> LatticeVec:
    """A valuation minimising B over the fibre of a prefix f.

    Among listed deviations whose first s coordinates equal f, the one of
    least value wins (ties to the lexicographically smallest tail).  When no
    listed deviation in the fibre is below the default, the representative
    (f, 1, ..., 1) realises the infimum 1.  For f = 0 with w = 0 the fibre
    holds no valuation at all.
    """
    f = tuple(prefix)
    if f not in set(positive_pullback_prefixes(model)):
        raise PreconditionError(f"prefix {f} has no positive pullback coefficient")
    best = None
    for vec, val in sorted(bdiv.deviations.items()):
        if vec[: model.s] == f and val < 1:
            key = (val, vec[model.s :])
            if best is None or key < best[0]:
                best = (key, vec)
    if best is not None:
        return best[1]
    rep = f + (1,) * model.w
    if all(e == 0 for e in rep) or not is_primitive(rep):
        # with w = 0 the fibre is the single lattice point f itself, which is
        # a valuation only when f is nonzero and primitive
        raise PreconditionError(f"the fibre over {f} holds no valuation")
    return rep


# ---------------------------------------------------------------------------
# reduction states


@dataclass(frozen=True)
class ReductionState:
    """Current model, its boundary trace, and the b-divisor rebased to it.

    Invariant: the b-divisor value at every fan ray equals the trace
    coefficient there (unit rays via pair values, others via deviations).
    """

    fan: Fan
    phi: ModelDivisor
    bdiv: BDivisor

    def __post_init__(self):
        if self.phi.fan != self.fan:
            raise PreconditionError("trace lives on a different fan")
        if self.bdiv.n != self.fan.n:
            raise PreconditionError("b-divisor dimension mismatch")

    def trace_consistent(self) -> bool:
        """Whether the b-divisor agrees with the trace on every fan ray.

        Holds for every state produced by ``initial_state`` and ``build_cut``;
        hand-built states fed to the verifier may break it on purpose.
        """
        return all(
            self.bdiv.value(ray) == c
            for ray, c in zip(self.fan.rays, self.phi.ray_coeffs)
        )

    def value(self, v) -> Fraction:
        return self.bdiv.value(v)

    def to_json(self) -> dict:
        return {
            "fan": self.fan.to_json(),
            "phi": [format_rat(c) for c in self.phi.ray_coeffs],
            "B": self.bdiv.to_json(),
        }

    @classmethod
    def from_json(cls, data: dict) -> "ReductionState":
        fan = Fan.from_json(data["fan"])
        phi = ModelDivisor(fan, tuple(data["phi"]))
        bdiv = BDivisor.from_json(data["B"])
        return cls(fan, phi, bdiv)


def initial_state(model: LocalModel, bdiv: BDivisor) -> ReductionState:
    """The state on the undivided orthant; the trace is the pair itself."""
    if bdiv.n != model.n:
        raise PreconditionError("b-divisor dimension mismatch")
    if bdiv.pair_coeffs != model.pair.coeffs:
        raise PreconditionError(
            "the b-divisor trace must agree with the model coefficients"
        )
    fan = orthant_fan(model.n)
    phi = ModelDivisor(fan, model.pair.coeffs)
    state = ReductionState(fan, phi, bdiv)
    if not state.trace_consistent():
        raise InvariantViolation("initial trace disagrees with the b-divisor")
    return state


def state_witnesses(state: ReductionState) -> list:
    """All witnesses of the state, in lexicographic order of their vectors.

    Only listed non-ray deviations can witness: unlisted valuations default
    to 1 and rays carry the trace value itself.
    """
    out = []
    for vec, val in sorted(state.bdiv.deviations.items()):
        if vec in state.fan.ray_set:
            continue
        pb = relative_pullback_coeff(state.phi, vec)
        if val < pb:
            loc = state.fan.locate(vec)
            support = tuple(
                idx for idx, lam in zip(loc.ray_indices, loc.lambdas) if lam > 0
            )
            w = sum(1 for idx in support if state.phi.ray_coeffs[idx] == 1)
            out.append(Witness(vec, val, pb, support, w))
    return out


def state_weight(state: ReductionState) -> int:
    witnesses = state_witnesses(state)
    return max((wit.weight for wit in witnesses), default=-1)


# ---------------------------------------------------------------------------
# cuts


@dataclass(frozen=True)
class CutStep:
    weight_before: int
    sigmas: tuple
    rays_added: tuple
    theta: tuple  # (ray, value) pairs on the new fan

    def to_json(self) -> dict:
        return {
            "weight_before": self.weight_before,
            "sigmas": [list(s) for s in self.sigmas],
            "rays_added": [list(r) for r in self.rays_added],
            "theta": [
                {"ray": list(r), "value": format_rat(v)} for r, v in self.theta
            ],
        }


def _theta_coeffs(state: ReductionState, sig, rays) -> tuple:
    """min over sigma of the pullback coefficient relative to Y_sigma.

    On Y_sigma the divisor (pullback trace meet B) agrees with the current
    trace away from sigma, because B equals the trace on every existing ray.
    So the interpolated value at a query ray differs from the plain trace
    value only inside the subdivided pieces around sigma; everything else
    shares one base value per ray, and the minimum can stop early at zero.
    """
    base = {r: relative_pullback_coeff(state.phi, r) for r in rays}
    one = Fraction(1)
    piece_data = []
    for vec in sig:
        y_fan = star_subdivide(state.fan, vec)
        sigma_val = min(relative_pullback_coeff(state.phi, vec), state.value(vec))
        pieces = []
        for cone in y_fan.max_cones:
            if vec not in cone.gens:
                continue
            slopes = tuple(
                one - (sigma_val if g == vec else state.phi.coeff(g))
                for g in cone.gens
            )
            pieces.append((cone, slopes))
        piece_data.append(pieces)

    zero = Fraction(0)
    out = []
    for r in rays:
        best = base[r]
        if best > 0:
            for pieces in piece_data:
                for cone, slopes in pieces:
                    lam = cone.barycentric(r)
                    if lam is None:
                        continue
                    total = sum(
                        (l * s for l, s in zip(lam, slopes) if l), zero
                    )
                    val = max(zero, one - total)
                    if val < best:
                        best = val
                    break
                if best == 0:
                    break
        out.append(best)
    return tuple(out)


def build_cut(state: ReductionState, sigmas) -> tuple:
    """One cut: extract the given valuations and meet the traces.

    For each sigma, the one-ray extraction Y_sigma carries the ray-wise
    minimum of the pullback trace and B; the new trace on the refined smooth
    fan is the minimum over sigma of the pullback coefficients relative to
    those divisors, met with B.  Every sigma must have positive pullback
    coefficient and must not already be a divisor of the model.
    """
    sig = []
    for s in sigmas:
        vec = valuation(s)
        if vec in sig:
            continue
        if vec in state.fan.ray_set:
            raise PreconditionError(f"{vec} is already a divisor on the model")
        if relative_pullback_coeff(state.phi, vec) == 0:
            raise PreconditionError(
                f"cut valuation {vec} has zero pullback coefficient"
            )
        sig.append(vec)
    if not sig:
        raise PreconditionError("a cut needs at least one valuation")

    new_fan = ensure_rays(state.fan, sig)
    theta = _theta_coeffs(state, sig, new_fan.rays)
    new_phi_coeffs = tuple(
        min(t, state.value(r)) for t, r in zip(theta, new_fan.rays)
    )
    updates = {}
    for r, c in zip(new_fan.rays, new_phi_coeffs):
        if unit_index(r) is None:
            updates[r] = c
    new_bdiv = state.bdiv.with_deviations(updates)
    new_state = ReductionState(
        new_fan, ModelDivisor(new_fan, new_phi_coeffs), new_bdiv
    )
    if not new_state.trace_consistent():
        raise InvariantViolation("cut produced an inconsistent trace")
    rays_added = tuple(r for r in new_fan.rays if r not in state.fan.ray_set)
    step = CutStep(
        weight_before=0,  # the driver records the measured weight
        sigmas=tuple(sig),
        rays_added=rays_added,
        theta=tuple(zip(new_fan.rays, theta)),
    )
    return new_state, step


def _chart_model(state: ReductionState, cone_ray_indices) -> tuple:
    """Unimodular chart at a maximal cone: local model, b-divisor, basis.

    The chart coordinates are the cone's generators (a lattice basis since
    the fan is smooth), permuted so coefficient-one components come last.
    Deviations inside the cone map to their integer barycentric coordinates.
    """
    gens = tuple(state.fan.rays[i] for i in cone_ray_indices)
    coeffs = tuple(state.phi.ray_coeffs[i] for i in cone_ray_indices)
    order = sorted(range(len(gens)), key=lambda j: (coeffs[j] == 1, j))
    basis = tuple(gens[j] for j in order)
    chart_pair = LocalPair(tuple(coeffs[j] for j in order))
    cone = Cone(basis)
    devs = {}
    for vec, val in state.bdiv.deviations.items():
        if vec in state.fan.ray_set:
            continue
        lam = cone.barycentric(vec)
        if lam is None:
            continue
        chart_vec = tuple(int(x) for x in lam)
        if tuple(Fraction(e) for e in chart_vec) != lam:
            raise InvariantViolation("non-integral chart coordinates on a smooth cone")
        devs[chart_vec] = val
    model = LocalModel(chart_pair)
    chart_bdiv = BDivisor(chart_pair.coeffs, devs)
    return model, chart_bdiv, basis


def _chart_sigmas(state: ReductionState, cone_ray_indices) -> list:
    """Cut valuations for one chart, mapped back to ambient coordinates."""
    model, chart_bdiv, basis = _chart_model(state, cone_ray_indices)
    prefixes = positive_pullback_prefixes(model)
    chart_sigmas = []
    if model.w == 0:
        # the valuations with positive pullback coefficient are the primitive
        # nonzero prefixes; multiples reduce to them and units are divisors
        for f in prefixes:
            if all(e == 0 for e in f) or unit_index(f) is not None:
                continue
            if not is_primitive(f):
                continue
            chart_sigmas.append(f)
    else:
        for f in prefixes:
            sigma = pick_fiber_minimizer(model, chart_bdiv, f)
            if unit_index(sigma) is not None:
                continue
            chart_sigmas.append(sigma)
    n = state.fan.n
    out = []
    for sigma in chart_sigmas:
        ambient = tuple(
            sum(basis[j][i] * sigma[j] for j in range(n)) for i in range(n)
        )
        out.append(ambient)
    return out


@dataclass(frozen=True)
class ReductionTrace:
    initial_weight: int
    steps: tuple
    final_state: ReductionState
    terminated_weight: int

    def to_json(self) -> dict:
        return {
            "initial_weight": self.initial_weight,
            "steps": [s.to_json() for s in self.steps],
            "final": self.final_state.to_json(),
            "terminated_weight": self.terminated_weight,
        }


def run_reduction(model: LocalModel, bdiv: BDivisor) -> ReductionTrace:
    """Iterate cuts until no witness remains (weight -1).

    Each round gathers the charts (maximal cones) containing a witness,
    merges their cut valuations, and applies one cut.  The weight must
    strictly decrease every round; a failure to do so is an internal
    invariant breach, never silently ignored.
    """
    state = initial_state(model, bdiv)
    witnesses = state_witnesses(state)
    weight = max((w.weight for w in witnesses), default=-1)
    initial = weight
    steps = []
    rounds = 0
    while weight >= 0:
        rounds += 1
        if rounds > model.n + 2:
            raise InvariantViolation("reduction exceeded the round cap")
        sigmas = []
        seen_charts = set()
        for wit in witnesses:
            loc = state.fan.locate(wit.vec)
            if loc.ray_indices in seen_charts:
                continue
            seen_charts.add(loc.ray_indices)
            sigmas.extend(_chart_sigmas(state, loc.ray_indices))
        deduped = []
        for s in sigmas:
            if s not in deduped:
                deduped.append(s)
        if not deduped:
            raise InvariantViolation("witnesses present but no cut valuation found")
        state, step = build_cut(state, deduped)
        steps.append(
            CutStep(
                weight_before=weight,
                sigmas=step.sigmas,
                rays_added=step.rays_added,
                theta=step.theta,
            )
        )
        witnesses = state_witnesses(state)
        new_weight = max((w.weight for w in witnesses), default=-1)
        if new_weight >= weight:
            raise InvariantViolation(
                f"cut failed to decrease the weight ({weight} -> {new_weight})"
            )
        weight = new_weight
    return ReductionTrace(
        initial_weight=initial,
        steps=tuple(steps),
        final_state=state,
        terminated_weight=weight,
    )


def reduce_surface_strata(instances) -> list:
    """Independent reductions at the crossing points of an SNC surface.

    Each instance is a pair (LocalModel, BDivisor) describing the local
    picture at one point where two boundary components meet; points do not
    interact, so the reduction runs per point.  Only the surface case (n = 2)
    is supported here.
    """
    out = []
    for model, bdiv in instances:
        if model.n != 2:
            raise PreconditionError("the surface driver expects 2-dimensional charts")
        out.append(run_reduction(model, bdiv))
    return out


# ---------------------------------------------------------------------------
# verification


@dataclass(frozen=True)
class VerifyReport:
    ok: bool
    box: int
    checked: int
    violation: tuple | None  # (vector, pullback, b_value)

    def to_json(self) -> dict:
        out = {"ok": self.ok, "box": self.box, "checked": self.checked}
        if self.violation is not None:
            vec, pb, bv = self.violation
            out["violation"] = {
                "v": list(vec),
                "pullback": format_rat(pb),
                "B": format_rat(bv),
            }
        return out


def verify_reduction(state: ReductionState, box: int) -> VerifyReport:
    """Check pullback(phi) <= B on rays, deviations, and a primitive box.

    Scans every fan ray, every listed deviation, and every primitive vector
    of the orthant with entries <= box, in lexicographic order, reporting the
    first violation if any.
    """
    if box < 1:
        raise PreconditionError("box must be >= 1")
    n = state.fan.n
    candidates = set(state.fan.rays)
    candidates.update(state.bdiv.deviations.keys())
    for vec in iter_product(range(box + 1), repeat=n):
        if all(e == 0 for e in vec):
            continue
        g = 0
        for e in vec:
            g = gcd(g, e)
        if g != 1:
            continue
        candidates.add(vec)
    checked = 0
    for vec in sorted(candidates):
        pb = relative_pullback_coeff(state.phi, vec)
        bv = state.value(vec)
        checked += 1
        if pb > bv:
            return VerifyReport(ok=False, box=box, checked=checked, violation=(vec, pb, bv))
    return VerifyReport(ok=True, box=box, checked=checked, violation=None)
