"""Command-line front end: one subcommand per public operation.

Output is deterministic JSON (sorted keys, rationals as "p/q" strings) on
stdout; scan commands emit CSV.  Errors are machine-readable JSON on stderr
with exit code 2 for precondition violations and 3 for internal invariant
breaches.  ``--verify`` re-runs an independent oracle next to the fast path
and fails loudly (exit 3) on any mismatch.
"""

from __future__ import annotations

import argparse
import io
import json
import sys
from concurrent.futures import ThreadPoolExecutor
from fractions import Fraction
from functools import cmp_to_key
from itertools import product as iter_product
from math import comb, gcd

from .bounds import (
    Polytope,
    char_p_ratio_report,
    effective_constants,
    fermat_report,
    fermat_threshold_scan,
    hurwitz_report,
    curve_power_report,
    min_volume_candidate,
    polytope_volume,
    projective_space_log_volume,
    sylvester,
    sylvester_coeffs,
    unitary_order_poly,
    unitary_order_value,
)
from .dcc import (
    SearchBudget,
    desc_from_json,
    dcc_verdict,
    exceptional_closure,
    find_decreasing_chain,
    materialize,
)
from .exact import (
    InvariantViolation,
    PreconditionError,
    format_rat,
    parse_rat,
)
from .fans import Fan
from .logpairs import (
    BDivisor,
    LocalPair,
    blowup_chain_coeff,
    log_discrepancy,
    mld_origin_minimizer,
    pullback_coeff,
    pullback_trace,
    rounding_comparison,
    valuation,
)
from .reduction import (
    LocalModel,
    ReductionState,
    pair_weight_witness,
    positive_pullback_prefixes,
    run_reduction,
    stratum_weight,
    verify_reduction,
)


def _mismatch(what: str, fast, oracle):
    raise InvariantViolation(
        f"verification mismatch in {what}: fast path {fast} vs oracle {oracle}"
    )


def _ensure_match(what: str, fast, oracle) -> None:
    if fast != oracle:
        _mismatch(what, fast, oracle)


# ---------------------------------------------------------------------------
# command handlers (pure: params dict in, JSON-able dict out)


def _cmd_ldisc(p):
    pair = LocalPair.from_json(p["pair"])
    v = valuation(p["v"])
    ld = log_discrepancy(pair, v)
    out = {"log_discrepancy": format_rat(ld)}
    if p.get("verify"):
        oracle = Fraction(sum(v)) - sum(
            (e * c for e, c in zip(v, pair.coeffs)), Fraction(0)
        )
        _ensure_match("ldisc", ld, oracle)
        out["verified"] = True
    return out


def _cmd_lcoeff(p):
    pair = LocalPair.from_json(p["pair"])
    v = valuation(p["v"])
    value = pullback_coeff(pair, v)
    out = {"coeff": format_rat(value)}
    if p.get("verify"):
        if pair.n == 2:
            oracle = blowup_chain_coeff(pair.coeffs[0], pair.coeffs[1], v)
        else:
            oracle = max(Fraction(0), 1 - log_discrepancy(pair, v))
        _ensure_match("lcoeff", value, oracle)
        out["verified"] = True
    return out


def _cmd_ltrace(p):
    pair = LocalPair.from_json(p["pair"])
    fan = Fan.from_json(p["fan"])
    md = pullback_trace(pair, fan)
    out = {
        "fan": fan.to_json(),
        "ray_coeffs": [format_rat(c) for c in md.ray_coeffs],
    }
    if p.get("verify"):
        if pair.n == 2:
            for ray, c in zip(fan.rays, md.ray_coeffs):
                oracle = blowup_chain_coeff(pair.coeffs[0], pair.coeffs[1], ray)
                _ensure_match(f"ltrace at {ray}", c, oracle)
        out["verified"] = True
    return out


def _mld_bruteforce(pair: LocalPair, factor: int):
    """Plain exhaustive minimum over an enlarged box; independent oracle."""
    from math import ceil

    a0 = sum((1 - c for c in pair.coeffs), Fraction(0))
    box = []
    for c in pair.coeffs:
        if c == 1:
            box.append(1)
        else:
            box.append(max(1, factor * ceil(a0 / (1 - c))))
    best = None
    best_v = None
    for v in iter_product(*(range(1, b + 1) for b in box)):
        val = sum((e * (1 - c) for e, c in zip(v, pair.coeffs)), Fraction(0))
        if best is None or val < best or (val == best and v < best_v):
            best = val
            best_v = v
    return best, best_v


def _cmd_mld(p):
    pair = LocalPair.from_json(p["pair"])
    value, minimizer = mld_origin_minimizer(pair)
    out = {
        "mld": format_rat(value),
        "minimizer": list(minimizer),
        "klt": pair.is_klt,
    }
    if p.get("verify"):
        oracle, _ = _mld_bruteforce(pair, 2)
        _ensure_match("mld", value, oracle)
        out["verified"] = True
    return out


def _cmd_round_check(p):
    m = int(p["m"])
    report = rounding_comparison(p["coeffs"], m)
    out = report.to_json()
    if p.get("verify"):
        coeffs = [parse_rat(c) for c in p["coeffs"]]
        lhs = tuple(m * c.numerator // c.denominator for c in coeffs)
        rhs = tuple(-(-((m - 1) * c.numerator) // c.denominator) for c in coeffs)
        _ensure_match("round-check", (report.floor_up, report.ceil_down), (lhs, rhs))
        out["verified"] = True
    return out


def _arranged_model(p):
    pair = LocalPair.from_json(p["model"])
    raw = p.get("B") or {"deviations": []}
    bdiv = BDivisor.from_json(raw, default_pair=pair)
    model, arranged, perm = LocalModel.arrange(pair, bdiv)
    return model, arranged, perm


def _cmd_fset(p):
    model, _, perm = _arranged_model({"model": p["model"], "B": None})
    prefixes = positive_pullback_prefixes(model)
    out = {
        "s": model.s,
        "w": model.w,
        "permutation": list(perm),
        "prefixes": [list(f) for f in prefixes],
    }
    if p.get("verify"):
        cs = model.pair.coeffs[: model.s]
        bound = 0
        for c in cs:
            bound = max(bound, int(Fraction(2) / (1 - c)) + 2)
        naive = []
        if model.s == 0:
            naive = [()]
        else:
            for v in iter_product(range(bound + 1), repeat=model.s):
                if sum((e * (1 - c) for e, c in zip(v, cs)), Fraction(0)) < 1:
                    naive.append(v)
        _ensure_match("fset", sorted(prefixes), sorted(naive))
        out["verified"] = True
    return out


def _cmd_weight(p):
    model, bdiv, perm = _arranged_model(p)
    out = {"permutation": list(perm)}
    if p.get("stratum"):
        raw = [int(i) - 1 for i in p["stratum"]]
        inverse = {orig: new for new, orig in enumerate(perm)}
        mapped = tuple(sorted(inverse[i] for i in raw))
        w, witness = stratum_weight(model, bdiv, mapped)
        out["stratum"] = sorted(int(i) for i in p["stratum"])
    else:
        w, witness = pair_weight_witness(model, bdiv)
    out["weight"] = w
    if witness is not None:
        out["witness"] = witness.to_json()
    if p.get("verify") and witness is not None:
        _ensure_match(
            "weight witness", True, witness.b_value < witness.pullback
        )
        out["verified"] = True
    return out


def _cmd_reduce(p):
    model, bdiv, perm = _arranged_model(p)
    trace = run_reduction(model, bdiv)
    box = int(p.get("box") or 12)
    if p.get("verify"):
        box *= 2
    report = verify_reduction(trace.final_state, box)
    if not report.ok:
        raise InvariantViolation(
            f"reduction output violates the bound at {report.violation[0]}"
        )
    out = trace.to_json()
    out["model"] = model.pair.to_json()
    out["permutation"] = list(perm)
    out["verified_box"] = box
    out["verify_ok"] = True
    return out


def _cmd_verify(p):
    state = ReductionState.from_json(p["state"])
    box = int(p.get("box") or 12)
    return verify_reduction(state, box).to_json()


def _cmd_closure(p):
    bound = int(p["denom_bound"])
    values = exceptional_closure(
        p["base"], bound, include_one=bool(p.get("include_one", False))
    )
    out = {"values": [format_rat(v) for v in values]}
    if p.get("verify"):
        vals = set(values)
        for a in vals:
            for b in vals:
                e = a + b - 1
                if e >= 0 and e.denominator <= bound and e not in vals:
                    _mismatch("closure closedness", sorted(vals), e)
        for v in (parse_rat(x) for x in p["base"]):
            if v.denominator <= bound and v not in vals:
                _mismatch("closure base membership", sorted(vals), v)
        out["verified"] = True
    return out


def _budget_from(p) -> SearchBudget:
    defaults = SearchBudget()
    return SearchBudget(
        chain_length=int(p.get("threshold") or defaults.chain_length),
        denom_bound=int(p.get("denom_bound") or defaults.denom_bound),
        rounds=int(p.get("rounds") or defaults.rounds),
        max_size=int(p.get("max_size") or defaults.max_size),
    )


def _cmd_chain(p):
    desc = desc_from_json(p["set"])
    length = int(p["length"])
    bound = int(p.get("denom_bound") or 2000)
    budget = _budget_from(p)
    chain = find_decreasing_chain(desc, length, bound, budget)
    out = {"found": chain is not None}
    if chain is not None:
        out["chain"] = chain.to_json()
        if p.get("verify"):
            members = set(materialize(desc, bound, budget))
            for e in chain.elements:
                if e not in members:
                    _mismatch("chain membership", list(chain.elements), e)
            out["verified"] = True
    return out


def _cmd_dcc(p):
    desc = desc_from_json(p["set"])
    budget = _budget_from(p)
    verdict = dcc_verdict(desc, budget)
    out = verdict.to_json()
    if p.get("verify") and verdict.witness is not None:
        members = set(materialize(desc, budget.denom_bound, budget))
        for e in verdict.witness.elements:
            if e not in members:
                _mismatch("dcc witness membership", None, e)
        out["verified"] = True
    return out


def _cmd_sylvester(p):
    k = int(p["k"])
    seq = sylvester(k)
    out = {"terms": [str(t) for t in seq.terms]}
    if p.get("verify"):
        prod = 1
        for i in range(1, len(seq.terms)):
            prod *= seq.terms[i - 1] + 1
            _ensure_match("sylvester product identity", seq.terms[i], prod)
        # doubly-exponential growth, reported not asserted: floor(log2 log2 r_k)/k
        # creeps toward 1 (computed through bit lengths, no floats)
        growth = []
        for i, r in enumerate(seq.terms):
            if i == 0 or r < 4:
                continue
            b = r.bit_length() - 1
            growth.append(f"{b.bit_length() - 1}/{i}")
        out["log2_log2_over_k"] = growth
        out["verified"] = True
    return out


def _cmd_minvol(p):
    n = int(p["n"])
    vol = min_volume_candidate(n)
    out = {"n": n, "volume": format_rat(vol)}
    if p.get("verify"):
        oracle = projective_space_log_volume(n, sylvester_coeffs(n))
        _ensure_match("minvol", vol, oracle)
        out["verified"] = True
    return out


def _cmd_pnvol(p):
    n = int(p["n"])
    if p.get("sylvester"):
        coeffs = sylvester_coeffs(n)
    else:
        coeffs = [parse_rat(c) for c in p["coeffs"]]
    vol = projective_space_log_volume(n, coeffs)
    out = {
        "n": n,
        "coeffs": [format_rat(c) for c in coeffs],
        "volume": format_rat(vol),
    }
    if p.get("verify"):
        excess = sum(coeffs, Fraction(0)) - (n + 1)
        if excess > 0 and n <= 4:
            from math import factorial

            oracle = factorial(n) * polytope_volume(Polytope.simplex(n, excess))
            _ensure_match("pnvol", vol, oracle)
            out["verified"] = True
        else:
            out["verified"] = "oracle-skipped"
    return out


def _polygon_area(points) -> Fraction:
    """Exact area of a 2D convex hull via angular sort and the shoelace sum."""
    pts = sorted(set(points))
    if len(pts) < 3:
        return Fraction(0)
    base = pts[0]

    def cmp(a, b):
        cross = (a[0] - base[0]) * (b[1] - base[1]) - (a[1] - base[1]) * (
            b[0] - base[0]
        )
        if cross > 0:
            return -1
        if cross < 0:
            return 1
        da = (a[0] - base[0]) ** 2 + (a[1] - base[1]) ** 2
        db = (b[0] - base[0]) ** 2 + (b[1] - base[1]) ** 2
        return -1 if da < db else (1 if da > db else 0)

    ordered = [base] + sorted(pts[1:], key=cmp_to_key(cmp))
    total = Fraction(0)
    for (x1, y1), (x2, y2) in zip(ordered, ordered[1:] + ordered[:1]):
        total += x1 * y2 - x2 * y1
    return abs(total) / 2


def _cmd_polyvol(p):
    poly = Polytope.from_json(p["polytope"])
    vol = polytope_volume(poly)
    out = {"n": poly.n, "volume": format_rat(vol)}
    if p.get("verify"):
        shifted = Polytope(
            n=poly.n,
            normals=poly.normals,
            offsets=tuple(
                b + sum(a for a in row) for row, b in zip(poly.normals, poly.offsets)
            ),
        )
        _ensure_match("polyvol translation invariance", vol, polytope_volume(shifted))
        if poly.n == 2:
            from .bounds import _enumerate_vertices

            verts = [pt for pt, _ in _enumerate_vertices(poly)]
            _ensure_match("polyvol shoelace", vol, _polygon_area(verts))
        out["verified"] = True
    return out


def _cmd_hurwitz(p):
    g = int(p["g"])
    report = hurwitz_report(g)
    out = report.to_json()
    if p.get("verify"):
        _ensure_match("hurwitz", report.values["bound"], 42 * report.values["vol"])
        out["verified"] = True
    return out


def _cmd_product(p):
    n = int(p["n"])
    g = int(p["g"])
    report = curve_power_report(n, g)
    out = report.to_json()
    if p.get("verify"):
        other = curve_power_report(n, g + 1)
        _ensure_match(
            "product ratio independent of g",
            report.values["ratio"],
            other.values["ratio"],
        )
        out["verified"] = True
    return out


def _fermat_scan_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("n,m,aut_lower,vol,ratio,threshold,exceeds\n")
    for r in rows:
        buf.write(
            f"{r['n']},{r['m']},{r['aut_lower']},{r['vol']},"
            f"{r['ratio']},{r['threshold']},{'pass' if r['exceeds'] else 'fail'}\n"
        )
    return buf.getvalue()


def _cmd_fermat(p):
    if p.get("scan"):
        rule = p.get("m_rule") or "n+3"
        if rule != "n+3":
            raise PreconditionError(f"unsupported m-rule {rule!r}; only 'n+3'")
        n_max = int(p.get("n_max") or 10)
        rows = fermat_threshold_scan(n_max)
        out_rows = [
            {
                "n": r["n"],
                "m": r["m"],
                "aut_lower": str(r["aut_lower"]),
                "vol": str(r["vol"]),
                "ratio": format_rat(r["ratio"]),
                "threshold": str(r["threshold"]),
                "exceeds": r["exceeds"],
            }
            for r in rows
        ]
        first = next((r["n"] for r in rows if r["exceeds"]), None)
        return {
            "rows": out_rows,
            "first_exceeding_n": first,
            "csv": _fermat_scan_csv(rows),
        }
    n = int(p["n"])
    m = int(p["m"])
    report = fermat_report(n, m)
    out = report.to_json()
    if p.get("verify"):
        from .exact import UniPoly

        base = UniPoly.from_ints([-(n + 2), 1])  # x - (n+2)
        poly = UniPoly.from_ints([0, 1])
        for _ in range(n):
            poly = poly * base
        _ensure_match("fermat volume", Fraction(report.values["vol"]), poly.eval(m))
        out["verified"] = True
    return out


def _cmd_unitary(p):
    n = int(p["n"])
    poly, modulus = unitary_order_poly(n)
    out = {
        "n": n,
        "poly": poly.to_strings(),
        "degree": int(poly.degree),
        "gcd_rule": f"divide by gcd({modulus}, q+1)",
    }
    if p.get("q") is not None:
        q = int(p["q"])
        order = unitary_order_value(n, q)
        out["q"] = q
        out["order"] = str(order)
        if p.get("verify"):
            direct = q ** comb(n + 2, 2)
            for i in range(2, n + 3):
                direct *= q**i - (-1) ** i
            direct //= gcd(modulus, q + 1)
            _ensure_match("unitary order", order, direct)
            out["verified"] = True
    elif p.get("verify"):
        _ensure_match(
            "unitary degree",
            int(poly.degree),
            comb(n + 2, 2) + comb(n + 3, 2) - 1,
        )
        out["verified"] = True
    return out


def _charp_csv(rows) -> str:
    buf = io.StringIO()
    buf.write("q,g,vol,order,bound,ok\n")
    for r in rows:
        buf.write(
            f"{r['q']},{r['g']},{r['vol']},{r['order']},{r['bound']},"
            f"{'pass' if r['ok'] else 'fail'}\n"
        )
    return buf.getvalue()


def _cmd_charp(p):
    q_max = int(p["q_max"])
    report, rows = char_p_ratio_report(q_max)
    out = report.to_json()
    out["rows"] = [
        {
            "q": r["q"],
            "g": str(r["g"]),
            "vol": str(r["vol"]),
            "order": str(r["order"]),
            "bound": str(r["bound"]),
            "ok": r["ok"],
        }
        for r in rows
    ]
    out["csv"] = _charp_csv(rows)
    if p.get("verify"):
        for r in rows:
            q = r["q"]
            direct = q**3 * (q**2 - 1) * (q**3 + 1) // gcd(3, q + 1)
            _ensure_match(f"charp order at q={q}", r["order"], direct)
        out["verified"] = True
    return out


def _cmd_constants(p):
    report = effective_constants(
        int(p["n"]), p["eps"], p["gamma0"], p["delta"]
    )
    out = report.to_json()
    if p.get("verify"):
        n = int(p["n"])
        e = parse_rat(p["eps"])
        g0 = parse_rat(p["gamma0"])
        d = parse_rat(p["delta"])
        gamma = Fraction(4 * n) / e
        c = Fraction(2)
        for _ in range(n - 1):
            c *= 1 + gamma
        _ensure_match("constants C", report.values["C"], c)
        m_min = 1
        while not m_min > c * n / d + 1:
            m_min += 1
        _ensure_match("constants M_min", report.values["M_min"], m_min)
        gr = Fraction(2 * n) / e
        mr = 2 * g0
        for _ in range(n - 1):
            mr *= 1 + gr
        _ensure_match("constants m_rec", report.values["m_rec"], mr)
        out["verified"] = True
    return out


_HANDLERS = {
    "ldisc": _cmd_ldisc,
    "lcoeff": _cmd_lcoeff,
    "ltrace": _cmd_ltrace,
    "mld": _cmd_mld,
    "round-check": _cmd_round_check,
    "fset": _cmd_fset,
    "weight": _cmd_weight,
    "reduce": _cmd_reduce,
    "verify": _cmd_verify,
    "closure": _cmd_closure,
    "chain": _cmd_chain,
    "dcc": _cmd_dcc,
    "sylvester": _cmd_sylvester,
    "minvol": _cmd_minvol,
    "pnvol": _cmd_pnvol,
    "polyvol": _cmd_polyvol,
    "hurwitz": _cmd_hurwitz,
    "product": _cmd_product,
    "fermat": _cmd_fermat,
    "unitary": _cmd_unitary,
    "charp": _cmd_charp,
    "constants": _cmd_constants,
}


def run_command(name: str, params: dict) -> dict:
    """Execute one command from a params dict; raises on bad input."""
    handler = _HANDLERS.get(name)
    if handler is None:
        raise PreconditionError(f"unknown command {name!r}")
    return handler(params)


# ---------------------------------------------------------------------------
# batch execution


def run_batch(entries, parallelism: int = 1) -> tuple:
    """Run batch entries; results keyed by id, deterministic at any parallelism."""
    if parallelism < 1:
        raise PreconditionError("parallelism must be >= 1")
    ids = [e.get("id") for e in entries]
    if len(ids) != len(set(ids)) or any(i is None for i in ids):
        raise PreconditionError("batch entries need unique non-null ids")

    def run_one(entry):
        try:
            output = run_command(entry["command"], entry.get("args") or {})
            return {"status": "ok", "exit_code": 0, "output": output}
        except PreconditionError as exc:
            return {"status": "error", "exit_code": 2, "error": str(exc)}
        except InvariantViolation as exc:
            return {"status": "error", "exit_code": 3, "error": str(exc)}
        except KeyError as exc:
            return {
                "status": "error",
                "exit_code": 2,
                "error": f"missing argument {exc}",
            }

    if parallelism == 1:
        results = [run_one(e) for e in entries]
    else:
        with ThreadPoolExecutor(max_workers=parallelism) as pool:
            results = list(pool.map(run_one, entries))

    keyed = {i: r for i, r in zip(ids, results)}
    first_error = next(
        (i for i, r in zip(ids, results) if r["status"] != "ok"), None
    )
    exit_code = 0
    codes = {r["exit_code"] for r in results}
    if 3 in codes:
        exit_code = 3
    elif 2 in codes:
        exit_code = 2
    return {"results": keyed, "first_error": first_error}, exit_code


# ---------------------------------------------------------------------------
# argument parsing


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        print(
            json.dumps({"error": message, "exit_code": 2}, sort_keys=True),
            file=sys.stderr,
        )
        raise SystemExit(2)


def _json_flag(text):
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise argparse.ArgumentTypeError(f"invalid JSON: {exc}") from exc


def _add_common(sub):
    sub.add_argument("--out", help="write the output to a file instead of stdout")
    sub.add_argument(
        "--verify",
        action="store_true",
        help="re-run an independent oracle and fail loudly on mismatch",
    )
    sub.add_argument(
        "--file",
        help="read a JSON object supplying defaults for this command's inputs",
    )
    sub.add_argument(
        "--json",
        dest="inline_json",
        type=_json_flag,
        help="inline JSON object supplying defaults for this command's inputs",
    )


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(
        prog="bdivkit",
        description="Exact toolkit for b-divisor reductions, coefficient-set "
        "chains, and explicit volume/symmetry bounds.",
    )
    subs = parser.add_subparsers(dest="command", required=True)

    def sub(name, **kw):
        s = subs.add_parser(name, **kw)
        _add_common(s)
        return s

    s = sub("ldisc", help="log discrepancy of a monomial valuation")
    s.add_argument("--pair", type=_json_flag)
    s.add_argument("--v", type=_json_flag)

    s = sub("lcoeff", help="positive-part pullback coefficient of a valuation")
    s.add_argument("--pair", type=_json_flag)
    s.add_argument("--v", type=_json_flag)

    s = sub("ltrace", help="pullback trace of a pair on a fan")
    s.add_argument("--pair", type=_json_flag)
    s.add_argument("--fan", type=_json_flag)

    s = sub("mld", help="minimal log discrepancy at the origin")
    s.add_argument("--pair", type=_json_flag)

    s = sub("round-check", help="compare floor(m c) with ceil((m-1) c)")
    s.add_argument("--coeffs", type=_json_flag)
    s.add_argument("--m", type=int)

    s = sub("fset", help="prefixes with positive pullback coefficient")
    s.add_argument("--model", type=_json_flag)

    s = sub("weight", help="weight of a model against a b-divisor")
    s.add_argument("--model", type=_json_flag)
    s.add_argument("--B", type=_json_flag)
    s.add_argument("--stratum", type=_json_flag, help="1-based component indices")

    s = sub("reduce", help="run the weight-descent reduction")
    s.add_argument("--model", type=_json_flag)
    s.add_argument("--B", type=_json_flag)
    s.add_argument("--box", type=int, help="verification box (default 12)")

    s = sub("verify", help="check pullback <= B on a box for a state")
    s.add_argument("--state", type=_json_flag)
    s.add_argument("--box", type=int)

    s = sub("closure", help="closure of a base under b1+b2-1")
    s.add_argument("--base", type=_json_flag)
    s.add_argument("--denom-bound", dest="denom_bound", type=int)
    s.add_argument("--include-one", dest="include_one", action="store_true")

    s = sub("chain", help="find a strictly decreasing chain in a set")
    s.add_argument("--set", dest="set", type=_json_flag)
    s.add_argument("--length", type=int)
    s.add_argument("--denom-bound", dest="denom_bound", type=int)

    s = sub("dcc", help="three-valued descending-chain verdict")
    s.add_argument("--set", dest="set", type=_json_flag)
    s.add_argument("--threshold", type=int)
    s.add_argument("--denom-bound", dest="denom_bound", type=int)
    s.add_argument("--rounds", type=int)
    s.add_argument("--max-size", dest="max_size", type=int)

    s = sub("sylvester", help="terms of r0=1, r_{k+1}=r_k(r_k+1)")
    s.add_argument("--k", type=int)

    s = sub("minvol", help="minimal-volume candidate 1/r_{n+2}^n")
    s.add_argument("--n", type=int)

    s = sub("pnvol", help="log volume of projective space with n+2 hyperplanes")
    s.add_argument("--n", type=int)
    s.add_argument("--coeffs", type=_json_flag)
    s.add_argument("--sylvester", action="store_true")

    s = sub("polyvol", help="exact volume of a rational polytope")
    s.add_argument("--polytope", type=_json_flag)

    s = sub("hurwitz", help="84(g-1) bound and canonical volume")
    s.add_argument("--g", type=int)

    s = sub("product", help="n-fold product of a maximal-symmetry curve")
    s.add_argument("--n", type=int)
    s.add_argument("--g", type=int)

    s = sub("fermat", help="Fermat hypersurface report or threshold scan")
    s.add_argument("--n", type=int)
    s.add_argument("--m", type=int)
    s.add_argument("--scan", action="store_true")
    s.add_argument("--m-rule", dest="m_rule")
    s.add_argument("--n-max", dest="n_max", type=int)

    s = sub("unitary", help="unitary group order: polynomial part or value")
    s.add_argument("--n", type=int)
    s.add_argument("--q", type=int)

    s = sub("charp", help="characteristic-p ratio check up to q_max")
    s.add_argument("--q-max", dest="q_max", type=int)
    s.add_argument("--csv", action="store_true", help="emit the scan as CSV")

    s = sub("constants", help="explicit constant propagation")
    s.add_argument("--n", type=int)
    s.add_argument("--eps")
    s.add_argument("--gamma0")
    s.add_argument("--delta")

    s = sub("batch", help="run a batch file of commands")
    s.add_argument("--parallel", type=int, default=1)

    return parser


_PARAM_KEYS = {
    "ldisc": ("pair", "v"),
    "lcoeff": ("pair", "v"),
    "ltrace": ("pair", "fan"),
    "mld": ("pair",),
    "round-check": ("coeffs", "m"),
    "fset": ("model",),
    "weight": ("model", "B", "stratum"),
    "reduce": ("model", "B", "box"),
    "verify": ("state", "box"),
    "closure": ("base", "denom_bound", "include_one"),
    "chain": ("set", "length", "denom_bound"),
    "dcc": ("set", "threshold", "denom_bound", "rounds", "max_size"),
    "sylvester": ("k",),
    "minvol": ("n",),
    "pnvol": ("n", "coeffs", "sylvester"),
    "polyvol": ("polytope",),
    "hurwitz": ("g",),
    "product": ("n", "g"),
    "fermat": ("n", "m", "scan", "m_rule", "n_max"),
    "unitary": ("n", "q"),
    "charp": ("q_max", "csv"),
    "constants": ("n", "eps", "gamma0", "delta"),
}


def _collect_params(args) -> dict:
    params = {}
    if getattr(args, "file", None):
        with open(args.file, "r", encoding="utf-8") as fh:
            data = json.load(fh)
        if not isinstance(data, dict):
            raise PreconditionError("--file must contain a JSON object")
        params.update(data)
    inline = getattr(args, "inline_json", None)
    if inline is not None:
        if not isinstance(inline, dict):
            raise PreconditionError("--json must be a JSON object")
        params.update(inline)
    for key in _PARAM_KEYS.get(args.command, ()):
        val = getattr(args, key, None)
        if val is not None and val is not False:
            params[key] = val
    if getattr(args, "verify", False):
        params["verify"] = True
    return params


def _emit(text: str, out_path) -> None:
    if out_path:
        with open(out_path, "w", encoding="utf-8") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        if args.command == "batch":
            if not getattr(args, "file", None):
                raise PreconditionError("batch needs --file with the entries")
            with open(args.file, "r", encoding="utf-8") as fh:
                data = json.load(fh)
            entries = data.get("entries")
            if not isinstance(entries, list):
                raise PreconditionError("batch file needs an 'entries' list")
            result, code = run_batch(entries, args.parallel)
            _emit(json.dumps(result, sort_keys=True, indent=2) + "\n", args.out)
            return code
        params = _collect_params(args)
        result = run_command(args.command, params)
        wants_csv = (args.command == "fermat" and params.get("scan")) or (
            args.command == "charp" and params.get("csv")
        )
        if wants_csv:
            _emit(result["csv"], args.out)
        else:
            _emit(json.dumps(result, sort_keys=True, indent=2) + "\n", args.out)
        return 0
    except PreconditionError as exc:
        print(
            json.dumps({"error": str(exc), "exit_code": 2}, sort_keys=True),
            file=sys.stderr,
        )
        return 2
    except InvariantViolation as exc:
        print(
            json.dumps({"error": str(exc), "exit_code": 3}, sort_keys=True),
            file=sys.stderr,
        )
        return 3
    except KeyError as exc:
        print(
            json.dumps(
                {"error": f"missing argument {exc}", "exit_code": 2},
                sort_keys=True,
            ),
            file=sys.stderr,
        )
        return 2


if __name__ == "__main__":
    sys.exit(main())
