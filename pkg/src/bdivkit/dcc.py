"""Coefficient-set descriptions and descending-chain diagnostics.

Coefficient sets live in [0, 1] and come in four shapes: explicit finite
lists, the standard set {(r-1)/r : r in N}, unions, and closures under the
exceptional-sum operation (b1, b2) -> b1 + b2 - 1 (kept only when
non-negative) that a corner blow-up applies to boundary coefficients.

Descending-chain verdicts are three-valued.  Finite sets and the standard
set are decided structurally; closures are probed by a bounded breadth-first
materialization, and a verdict of NOT_DCC always carries a verified witness
chain whose distance to an explicit limit at least halves at every step.  A
closure is never declared DCC: the search can only certify failure.

Materializing a closure exactly is exponential, so the bounded search closes
the base under *left-linear* applications (each round combines the current
set with the base only) and caps rounds and size; the result is a verified
subset of the closure, which is all a NOT_DCC witness needs.
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache

from .exact import PreconditionError, format_rat, parse_rat, parse_rat_list


def standard_coeff(r: int) -> Fraction:
    """(r-1)/r in lowest terms."""
    if r < 1:
        raise PreconditionError("standard coefficients need r >= 1")
    return Fraction(r - 1, r)


def exceptional_sum(b1, b2) -> Fraction | None:
    """b1 + b2 - 1 when non-negative, else None.

    This is the coefficient a corner blow-up puts on its exceptional divisor
    when the two branches carry b1 and b2.
    """
    x = parse_rat(b1)
    y = parse_rat(b2)
    for v in (x, y):
        if not 0 <= v <= 1:
            raise PreconditionError(f"{format_rat(v)} is outside [0, 1]")
    e = x + y - 1
    return e if e >= 0 else None


def exceptional_closure(base, denom_bound: int, include_one: bool = False) -> list:
    """Full closure of a finite base under the exceptional sum.

    Values whose reduced denominator exceeds denom_bound are pruned (and do
    not generate), which keeps the universe finite; the result is sorted
    ascending.  ``include_one`` adds the value 1 to the starting set, since
    the sum of two values below 1 can never reach it.
    """
    if denom_bound < 1:
        raise PreconditionError("denominator bound must be >= 1")
    start = set()
    for v in parse_rat_list(base):
        if not 0 <= v <= 1:
            raise PreconditionError(f"{format_rat(v)} is outside [0, 1]")
        if v.denominator <= denom_bound:
            start.add(v)
    if include_one:
        start.add(Fraction(1))
    out = set(start)
    frontier = set(start)
    while frontier:
        fresh = set()
        for a in frontier:
            for b in out:
                e = a + b - 1
                if e >= 0 and e.denominator <= denom_bound and e not in out:
                    fresh.add(e)
        out |= fresh
        frontier = fresh
    return sorted(out)


# ---------------------------------------------------------------------------
# set descriptions


@dataclass(frozen=True)
class FiniteSet:
    values: tuple

    def __post_init__(self):
        vals = tuple(sorted(set(parse_rat_list(self.values))))
        for v in vals:
            if not 0 <= v <= 1:
                raise PreconditionError(f"{format_rat(v)} is outside [0, 1]")
        object.__setattr__(self, "values", vals)

    def to_json(self) -> dict:
        return {"kind": "finite", "values": [format_rat(v) for v in self.values]}


@dataclass(frozen=True)
class StandardSet:
    """The set {(r-1)/r : r in N}: increasing, accumulating only at 1."""

    def to_json(self) -> dict:
        return {"kind": "standard"}


@dataclass(frozen=True)
class UnionSet:
    members: tuple

    def __post_init__(self):
        object.__setattr__(self, "members", tuple(self.members))
        if not self.members:
            raise PreconditionError("a union needs at least one member")

    def to_json(self) -> dict:
        return {"kind": "union", "members": [m.to_json() for m in self.members]}


@dataclass(frozen=True)
class SumClosure:
    """Closure of a base description under the exceptional sum."""

    base: object
    denom_bound: int
    include_one: bool = False

    def __post_init__(self):
        if self.denom_bound < 1:
            raise PreconditionError("denominator bound must be >= 1")

    def to_json(self) -> dict:
        return {
            "kind": "closure",
            "base": self.base.to_json(),
            "denom_bound": self.denom_bound,
            "include_one": self.include_one,
        }


CoeffSetDesc = object  # FiniteSet | StandardSet | UnionSet | SumClosure


def desc_from_json(data: dict) -> CoeffSetDesc:
    kind = data.get("kind")
    if kind == "finite":
        return FiniteSet(tuple(data["values"]))
    if kind == "standard":
        return StandardSet()
    if kind == "union":
        return UnionSet(tuple(desc_from_json(m) for m in data["members"]))
    if kind == "closure":
        return SumClosure(
            base=desc_from_json(data["base"]),
            denom_bound=int(data["denom_bound"]),
            include_one=bool(data.get("include_one", False)),
        )
    raise PreconditionError(f"unknown set description kind: {kind!r}")


@dataclass(frozen=True)
class SearchBudget:
    """Bounds for chain searches over materialized closures."""

    chain_length: int = 5
    denom_bound: int = 2000
    rounds: int = 4
    max_size: int = 40_000


def materialize(desc: CoeffSetDesc, denom_bound: int, budget: SearchBudget | None = None) -> list:
    """Sorted members of the description with denominators <= denom_bound.

    Finite sets and unions are exact; the standard set is truncated at the
    bound; a closure is explored by the bounded left-linear search (a
    verified subset of the closure).
    """
    if isinstance(desc, FiniteSet):
        return [v for v in desc.values if v.denominator <= denom_bound]
    if isinstance(desc, StandardSet):
        return [Fraction(r - 1, r) for r in range(1, denom_bound + 1)]
    if isinstance(desc, UnionSet):
        out = set()
        for m in desc.members:
            out.update(materialize(m, denom_bound, budget))
        return sorted(out)
    if isinstance(desc, SumClosure):
        budget = budget or SearchBudget()
        return list(_materialize_closure(desc, denom_bound, budget))
    raise PreconditionError(f"unknown set description: {desc!r}")


@lru_cache(maxsize=32)
def _materialize_closure(desc: "SumClosure", denom_bound: int, budget: SearchBudget) -> tuple:
    bound = min(denom_bound, desc.denom_bound)
    base = materialize(desc.base, bound, budget)
    if desc.include_one:
        base = sorted(set(base) | {Fraction(1)})
    current = set(base)
    frontier = set(base)
    for _ in range(budget.rounds):
        if not frontier or len(current) > budget.max_size:
            break
        fresh = set()
        for a in frontier:
            for b in base:
                e = a + b - 1
                if e >= 0 and e.denominator <= bound and e not in current:
                    fresh.add(e)
        current |= fresh
        frontier = fresh
    return tuple(sorted(current))


# ---------------------------------------------------------------------------
# chains


@dataclass(frozen=True)
class Chain:
    """Strictly decreasing members of a described set."""

    elements: tuple
    limit: Fraction | None = None

    def __post_init__(self):
        elems = tuple(parse_rat_list(self.elements))
        for a, b in zip(elems, elems[1:]):
            if not a > b:
                raise PreconditionError("chain is not strictly decreasing")
        object.__setattr__(self, "elements", elems)

    def to_json(self) -> dict:
        out = {"elements": [format_rat(e) for e in self.elements]}
        if self.limit is not None:
            out["limit"] = format_rat(self.limit)
        return out


def _arithmetic_run_chain(values: list, length: int) -> Chain | None:
    """A descending run k0/q > (k0-1)/q > ... inside the value set, if any.

    Searches common denominators q ascending and returns the first run of
    consecutive multiples of 1/q of the requested length.
    """
    members = set(values)
    if not members:
        return None
    max_q = max(v.denominator for v in members)
    for q in range(2, max_q + 1):
        ks = sorted(
            (k for k in range(1, q) if Fraction(k, q) in members), reverse=True
        )
        run = []
        for k in ks:
            if run and run[-1] - k != 1:
                run = []
            run.append(k)
            if len(run) >= length:
                return Chain(tuple(Fraction(k2, q) for k2 in run[:length]))
    return None


def _halving_chain(values: list, length: int) -> Chain | None:
    """A chain whose distance to an explicit limit halves at every step.

    For each candidate limit (0 first, then members ascending), greedily
    picks the largest member within half the previous distance; the returned
    chain satisfies x_{i+1} - limit <= (x_i - limit) / 2, so its differences
    shrink geometrically toward the limit.
    """
    ordered = sorted(values)
    limits = [Fraction(0)] + ordered
    for limit in limits:
        above = [v for v in ordered if v > limit]
        if len(above) < length:
            continue
        chain = [above[-1]]
        while len(chain) < length:
            gap = chain[-1] - limit
            # bisect by hand: largest member <= limit + gap/2
            target = limit + gap / 2
            lo, hi = 0, len(above)
            while lo < hi:
                mid = (lo + hi) // 2
                if above[mid] <= target:
                    lo = mid + 1
                else:
                    hi = mid
            if lo == 0:
                break
            nxt = above[lo - 1]
            if nxt <= limit or nxt >= chain[-1]:
                break
            chain.append(nxt)
        if len(chain) >= length:
            return Chain(tuple(chain[:length]), limit=limit)
    return None


def find_decreasing_chain(
    desc: CoeffSetDesc, length: int, denom_bound: int, budget: SearchBudget | None = None
) -> Chain | None:
    """A strictly decreasing chain of positive members, or None.

    Finite sets yield their descending positive members when long enough.
    The standard set is increasing, so below any fixed member it holds only
    finitely many elements and is treated structurally: no chain of length
    >= 2 is ever produced as a witness.  Closures are searched within the
    bounded materialization for constant-step runs or halving chains.
    """
    if length < 1:
        raise PreconditionError("chain length must be >= 1")
    if isinstance(desc, FiniteSet):
        positives = [v for v in reversed(desc.values) if v > 0]
        if len(positives) >= length:
            return Chain(tuple(positives[:length]))
        return None
    if isinstance(desc, StandardSet):
        if length == 1:
            return Chain((standard_coeff(max(denom_bound, 1)),))
        return None
    if isinstance(desc, UnionSet):
        for m in desc.members:
            chain = find_decreasing_chain(m, length, denom_bound, budget)
            if chain is not None:
                return chain
        return None
    if isinstance(desc, SumClosure):
        values = [v for v in materialize(desc, denom_bound, budget) if v > 0]
        chain = _arithmetic_run_chain(values, length)
        if chain is not None:
            return chain
        return _halving_chain(values, length)
    raise PreconditionError(f"unknown set description: {desc!r}")


# ---------------------------------------------------------------------------
# verdicts


@dataclass(frozen=True)
class DccVerdict:
    verdict: str  # "DCC" | "NOT_DCC" | "UNKNOWN"
    witness: Chain | None = None
    reason: str = ""

    def to_json(self) -> dict:
        out = {"verdict": self.verdict, "reason": self.reason}
        if self.witness is not None:
            out["witness"] = self.witness.to_json()
        return out


def dcc_verdict(desc: CoeffSetDesc, budget: SearchBudget | None = None) -> DccVerdict:
    """Three-valued descending-chain verdict.

    Finite -> DCC.  Standard -> DCC (its only accumulation point is 1 from
    below, so every nonempty subset has a least element).  Unions of decided
    descriptions are decided.  Closures: NOT_DCC when the bounded search
    finds a verified chain approaching a limit with geometrically shrinking
    distances, else UNKNOWN -- a closure is never declared DCC.
    """
    budget = budget or SearchBudget()
    if isinstance(desc, FiniteSet):
        return DccVerdict("DCC", reason="finite set")
    if isinstance(desc, StandardSet):
        return DccVerdict(
            "DCC", reason="increasing sequence accumulating only at 1"
        )
    if isinstance(desc, UnionSet):
        verdicts = [dcc_verdict(m, budget) for m in desc.members]
        for v in verdicts:
            if v.verdict == "NOT_DCC":
                return DccVerdict("NOT_DCC", witness=v.witness, reason=v.reason)
        if all(v.verdict == "DCC" for v in verdicts):
            return DccVerdict("DCC", reason="finite union of DCC sets")
        return DccVerdict("UNKNOWN", reason="undecided member")
    if isinstance(desc, SumClosure):
        values = [
            v for v in materialize(desc, budget.denom_bound, budget) if v > 0
        ]
        chain = _halving_chain(values, budget.chain_length)
        if chain is not None:
            return DccVerdict(
                "NOT_DCC",
                witness=chain,
                reason="verified chain with geometrically shrinking distance "
                "to its limit",
            )
        return DccVerdict(
            "UNKNOWN",
            reason="no witness found within the search budget; closures are "
            "never declared DCC",
        )
    raise PreconditionError(f"unknown set description: {desc!r}")
