"""Batch front end: parse a JSON document, dispatch to the checkers and
constructors, and emit deterministic text or JSON reports.

Exit codes: 0 all identities pass, 1 at least one nonzero residual,
2 malformed input (bad JSON, unknown names, parse errors).
"""

from __future__ import annotations

import argparse
import json
import sys
from fractions import Fraction

from .algebra import Element, GeneratorTable
from .courant import CourantData, check_courant, point_realization, split_symplectic_lie2
from .derivations import Derivation, is_homological
from .lie2 import LinearConnection, SplitLie2Data, check_axioms, q_from_data, tangent_prolongation
from .nq import MultiBrackets, SplitNManifold, brackets_from_q, q_from_brackets, verify_l_infinity
from .parser import ParseError
from .poisson import (
    MultivectorAlgebra,
    check_poisson,
    check_pq,
    deformation_check,
    homotopy_classify,
    poisson_weil_check,
)
from .report import VerificationReport
from .ruth import Rep3Data, RepMorphism, adjoint_rep, check_morphism, check_rep3, is_exact
from .weil import WeilAlgebra, bicomplex_check, cartan_report


class InputError(ValueError):
    """Malformed input document."""


def _need(doc: dict, key: str):
    if key not in doc:
        raise InputError(f"missing section {key!r}")
    return doc[key]


def _parse(table: GeneratorTable, text, where: str) -> Element:
    if isinstance(text, (int, str)) and not isinstance(text, bool):
        try:
            return table.parse(str(text))
        except ParseError as exc:
            raise InputError(f"in {where}: {exc}") from exc
    raise InputError(f"in {where}: expected an expression string")


def load_manifold(doc: dict) -> SplitNManifold:
    base = doc.get("base_vars", [])
    bundles = []
    for b in doc.get("bundles", []):
        bundles.append((b["name"], int(b["degree"]), list(b["frame"])))
    try:
        return SplitNManifold(base, bundles)
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad manifold block: {exc}") from exc


def load_field(table: GeneratorTable, images: dict, degree: int, where: str) -> Derivation:
    parsed = {}
    for gen, expr in images.items():
        if gen not in table.names:
            raise InputError(f"in {where}: unknown generator {gen!r}")
        parsed[gen] = _parse(table, expr, f"{where}[{gen}]")
    try:
        return Derivation(table, degree, parsed)
    except ValueError as exc:
        raise InputError(f"in {where}: {exc}") from exc


def load_brackets(man: SplitNManifold, doc: dict) -> MultiBrackets:
    table = man.table
    br = MultiBrackets(man)
    for g, imgs in doc.get("anchor", {}).items():
        if g not in br.anchor:
            raise InputError(f"anchor on {g!r}: not a degree-1 frame element")
        for v, expr in imgs.items():
            br.anchor[g][v] = _parse(table, expr, f"anchor[{g}][{v}]")
    for n, entry in enumerate(doc.get("brackets", [])):
        args = tuple(entry["args"])
        value = {g: _parse(table, e, f"brackets[{n}]") for g, e in entry["value"].items()}
        try:
            br.set_bracket(len(args), args, value)
        except (ValueError, KeyError) as exc:
            raise InputError(f"brackets[{n}]: {exc}") from exc
    return br


def load_lie2(doc: dict) -> SplitLie2Data:
    block = _need(doc, "lie2")
    try:
        data = SplitLie2Data(block.get("base_vars", []), block["q_frame"],
                             block.get("b_frame", []))
    except (ValueError, KeyError, TypeError) as exc:
        raise InputError(f"bad lie2 block: {exc}") from exc
    t = data.table
    qpos = {g: i for i, g in enumerate(data.q_frame)}
    for g, imgs in block.get("anchor", {}).items():
        if g not in qpos:
            raise InputError(f"lie2 anchor on unknown frame {g!r}")
        for v, expr in imgs.items():
            if v not in data.base_vars:
                raise InputError(f"lie2 anchor: unknown base variable {v!r}")
            data.dull.anchor[qpos[g]][v] = _parse(t, expr, f"lie2.anchor[{g}][{v}]")
    for n, entry in enumerate(block.get("bracket", [])):
        qi, qj = entry["args"]
        vec = [t.zero()] * data.rq
        for g, expr in entry["value"].items():
            vec[qpos[g]] = _parse(t, expr, f"lie2.bracket[{n}]")
        data.dull.set_bracket(qpos[qi], qpos[qj], vec)
    for m, imgs in enumerate(block.get("ell", [])):
        if m >= data.rb:
            raise InputError("lie2.ell has more rows than the B* frame")
        for g, expr in imgs.items():
            data.ell[m][qpos[g]] = _parse(t, expr, f"lie2.ell[{m}]")
    bpos = {g: i for i, g in enumerate(data.b_frame)}
    for n, entry in enumerate(block.get("conn", [])):
        qi = qpos[entry["q"]]
        bj = bpos[entry["b"]]
        vec = [t.zero()] * data.rb
        for g, expr in entry["value"].items():
            vec[bpos[g]] = _parse(t, expr, f"lie2.conn[{n}]")
        data.conn[(qi, bj)] = vec
    for n, entry in enumerate(block.get("omega", [])):
        args = tuple(sorted(qpos[g] for g in entry["args"]))
        if len(set(args)) != 3:
            raise InputError(f"lie2.omega[{n}]: arguments must be three distinct frames")
        vec = [_parse(t, e, f"lie2.omega[{n}]") for e in entry["value"]]
        if len(vec) != data.rb:
            raise InputError(f"lie2.omega[{n}]: expected {data.rb} components")
        data.omega[args] = vec
    return data


def load_tm_connection(data: SplitLie2Data, block: dict, frame: tuple, where: str) -> LinearConnection:
    t = data.table
    symbols = {}
    pos = {g: i for i, g in enumerate(frame)}
    for v, rows in (block or {}).items():
        if v not in data.base_vars:
            raise InputError(f"{where}: unknown base variable {v!r}")
        for g, vec in rows.items():
            if g not in pos:
                raise InputError(f"{where}: unknown frame element {g!r}")
            if len(vec) != len(frame):
                raise InputError(f"{where}: expected {len(frame)} components")
            symbols[(v, pos[g])] = [_parse(t, e, where) for e in vec]
    return LinearConnection(tuple(data.base_vars), len(frame), symbols)


def load_rep(data: SplitLie2Data, block: dict, where: str) -> Rep3Data:
    t = data.table
    rep = Rep3Data(data, block["frames"])
    qpos = {g: i for i, g in enumerate(data.q_frame)}
    for lvl_s, mat in block.get("partial", {}).items():
        lvl = int(lvl_s)
        rep.partial[lvl] = [[_parse(t, e, f"{where}.partial") for e in row] for row in mat]
    for entry in block.get("conn", []):
        lvl = int(entry["level"])
        rep.conn[(lvl, qpos[entry["q"]], int(entry["src"]))] = [
            _parse(t, e, f"{where}.conn") for e in entry["value"]]
    for entry in block.get("omega2", []):
        i, j = (qpos[g] for g in entry["args"])
        rep.omega2[(i, j, int(entry["level"]))] = [
            [_parse(t, e, f"{where}.omega2") for e in row] for row in entry["matrix"]]
    for entry in block.get("omega3", []):
        i, j, k = (qpos[g] for g in entry["args"])
        rep.omega3[(i, j, k)] = [
            [_parse(t, e, f"{where}.omega3") for e in row] for row in entry["matrix"]]
    for entry in block.get("phi0", []):
        rep.phi0[(int(entry["beta"]), int(entry["level"]))] = [
            [_parse(t, e, f"{where}.phi0") for e in row] for row in entry["matrix"]]
    for entry in block.get("phi1", []):
        rep.phi1[(int(entry["beta"]), qpos[entry["q"]])] = [
            [_parse(t, e, f"{where}.phi1") for e in row] for row in entry["matrix"]]
    return rep


def load_courant(doc: dict) -> CourantData:
    block = _need(doc, "courant")
    base = block.get("base_vars", [])
    frame = block["frame"]
    table = GeneratorTable([(v, 0) for v in base] + [(g, 1) for g in frame])
    pairing = [[_parse(table, e, "courant.pairing") for e in row]
               for row in block["pairing"]]
    pos = {g: i for i, g in enumerate(frame)}
    anchor = {}
    for g, imgs in block.get("anchor", {}).items():
        anchor[pos[g]] = {v: _parse(table, e, f"courant.anchor[{g}]")
                          for v, e in imgs.items()}
    bracket = {}
    for n, entry in enumerate(block.get("bracket", [])):
        i, j = (pos[g] for g in entry["args"])
        vec = [table.zero()] * len(frame)
        for g, expr in entry["value"].items():
            vec[pos[g]] = _parse(table, expr, f"courant.bracket[{n}]")
        bracket[(i, j)] = vec
        if entry.get("skew", True) and (j, i) not in bracket:
            bracket[(j, i)] = [-c for c in vec]
    try:
        return CourantData(base, frame, pairing, anchor=anchor, bracket=bracket, table=table)
    except ValueError as exc:
        raise InputError(f"bad courant block: {exc}") from exc


def load_mv(doc: dict, man: SplitNManifold) -> MultivectorAlgebra:
    if "k" not in doc:
        raise InputError("missing section 'k' (the bracket degree)")
    return MultivectorAlgebra(man.table, int(doc["k"]))


# ---------------------------------------------------------------------------
# command handlers: each returns (reports, outputs)


def cmd_check_q2(doc, args):
    man = load_manifold(doc)
    q = load_field(man.table, _need(doc, "q"), 1, "q")
    return [is_homological(q)], {}


def cmd_check_linfty(doc, args):
    man = load_manifold(doc)
    return [verify_l_infinity(man, load_brackets(man, doc))], {}


def cmd_build_q(doc, args):
    man = load_manifold(doc)
    q = q_from_brackets(man, load_brackets(man, doc))
    out = {"q": {g: str(q.image(g)) for g in man.table.names}}
    return [is_homological(q)], out


def cmd_extract_brackets(doc, args):
    man = load_manifold(doc)
    q = load_field(man.table, _need(doc, "q"), 1, "q")
    br = brackets_from_q(man, q)
    anchor = {g: {v: str(e) for v, e in imgs.items() if not e.is_zero()}
              for g, imgs in br.anchor.items()}
    tables = {}
    for j, tab in br.tables.items():
        rows = []
        for canon in sorted(tab):
            value = br.bracket_frames(canon)
            frame = man.bundles[value.bundle_index].frame
            rows.append({
                "args": list(canon),
                "value": {g: str(c) for g, c in zip(frame, value.coeffs) if not c.is_zero()},
            })
        if rows:
            tables[str(j)] = rows
    rep = VerificationReport("bracket extraction")
    rep.add_bool("extract/round-trip", "q_from_brackets(brackets_from_q(Q)) == Q",
                 q_from_brackets(man, br) == q)
    return [rep], {"anchor": anchor, "brackets": tables}


def cmd_check_lie2(doc, args):
    return [check_axioms(load_lie2(doc))], {}


def cmd_build_adjoint(doc, args):
    data = load_lie2(doc)
    nq = load_tm_connection(data, doc.get("conn_q"), data.q_frame, "conn_q")
    bframe = tuple(f"beta{m + 1}" for m in range(data.rb))
    nb = load_tm_connection(data, doc.get("conn_bstar"), bframe, "conn_bstar")
    rep = adjoint_rep(data, nq, nb)
    from .ruth import check_adjoint_module_iso

    out = {
        "frames": [list(f) for f in rep.bundle.frames],
        "partial": {str(l): [[str(c) for c in row] for row in m]
                    for l, m in sorted(rep.partial.items())},
        "components": {
            "conn": {f"{k}": [str(c) for c in v] for k, v in sorted(rep.conn.items())},
            "omega2": {f"{k}": [[str(c) for c in r] for r in m]
                       for k, m in sorted(rep.omega2.items())},
            "omega3": {f"{k}": [[str(c) for c in r] for r in m]
                       for k, m in sorted(rep.omega3.items())},
            "phi0": {f"{k}": [[str(c) for c in r] for r in m]
                     for k, m in sorted(rep.phi0.items())},
            "phi1": {f"{k}": [[str(c) for c in r] for r in m]
                     for k, m in sorted(rep.phi1.items())},
        },
    }
    return [check_rep3(data, rep), check_adjoint_module_iso(data, nq, nb)], out


def cmd_check_rep3(doc, args):
    data = load_lie2(doc)
    rep = load_rep(data, _need(doc, "rep"), "rep")
    return [check_rep3(data, rep)], {}


def cmd_check_morphism(doc, args):
    data = load_lie2(doc)
    rep_a = load_rep(data, _need(doc, "rep_a"), "rep_a")
    rep_b = load_rep(data, _need(doc, "rep_b"), "rep_b")
    block = _need(doc, "morphism")
    t = data.table
    qpos = {g: i for i, g in enumerate(data.q_frame)}
    mu = RepMorphism(rep_a, rep_b)
    for lvl_s, mat in block.get("mu0", {}).items():
        mu.mu0[int(lvl_s)] = [[_parse(t, e, "morphism.mu0") for e in row] for row in mat]
    for entry in block.get("mu1", []):
        mu.mu1[(qpos[entry["q"]], int(entry["level"]))] = [
            [_parse(t, e, "morphism.mu1") for e in row] for row in entry["matrix"]]
    for entry in block.get("mu2", []):
        i, j = (qpos[g] for g in entry["args"])
        mu.mu2[(i, j)] = [[_parse(t, e, "morphism.mu2") for e in row]
                          for row in entry["matrix"]]
    for entry in block.get("mu0b", []):
        mu.mu0b[int(entry["beta"])] = [[_parse(t, e, "morphism.mu0b") for e in row]
                                       for row in entry["matrix"]]
    return [check_morphism(rep_a, rep_b, mu)], {}


def cmd_check_poisson(doc, args):
    man = load_manifold(doc)
    mv = load_mv(doc, man)
    pi = _parse(mv.table, _need(doc, "pi"), "pi")
    return [check_poisson(pi, mv)], {}


def cmd_check_pq(doc, args):
    man = load_manifold(doc)
    mv = load_mv(doc, man)
    q = load_field(man.table, _need(doc, "q"), 1, "q")
    pi = _parse(mv.table, _need(doc, "pi"), "pi")
    return [check_pq(q, pi, mv)], {}


def cmd_check_poisson_weil(doc, args):
    man = load_manifold(doc)
    mv = load_mv(doc, man)
    q = load_field(man.table, _need(doc, "q"), 1, "q")
    pi = _parse(mv.table, _need(doc, "pi"), "pi")
    return [check_pq(q, pi, mv), poisson_weil_check(q, pi, mv)], {}


def cmd_classify_homotopy(doc, args):
    man = load_manifold(doc)
    mv = load_mv(doc, man)
    theta = _parse(mv.table, _need(doc, "theta"), "theta")
    try:
        result = homotopy_classify(theta, mv)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    return [result["report"]], {"label": result["label"], "components": result["components"]}


def cmd_check_deformation(doc, args):
    man = load_manifold(doc)
    mv = load_mv(doc, man)
    q = load_field(man.table, _need(doc, "q"), 1, "q")
    pi = _parse(mv.table, _need(doc, "pi"), "pi")
    theta_prime = _parse(mv.table, _need(doc, "theta_prime"), "theta_prime")
    mode = doc.get("mode", "infinitesimal")
    try:
        return [deformation_check(q, pi, theta_prime, mv, mode)], {}
    except ValueError as exc:
        raise InputError(str(exc)) from exc


def cmd_check_courant(doc, args):
    return [check_courant(load_courant(doc))], {}


def cmd_realize_courant_point(doc, args):
    data = load_courant(doc)
    if data.base_vars:
        raise InputError("the realization requires a point base (no base_vars)")
    try:
        real = point_realization(data, require_axioms=False)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    axioms = check_courant(data)
    out = {
        "pi": str(real.pi),
        "theta": str(real.theta),
        "master_equation": "pass" if all(
            c.passed() for c in real.report if c.identity == "realize/master-equation"
        ) else "fail",
    }
    return [axioms, real.report], out


def cmd_build_split_symplectic(doc, args):
    data = load_courant(doc)
    t = data.table
    symbols = {}
    pos = {g: i for i, g in enumerate(data.frame)}
    for v, rows in (doc.get("conn") or {}).items():
        for g, vec in rows.items():
            symbols[(v, pos[g])] = [_parse(t, e, "conn") for e in vec]
    nabla = LinearConnection(tuple(data.base_vars), data.rank, symbols)
    try:
        lie2 = split_symplectic_lie2(data, nabla, require_axioms=False)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    out = {
        "q_frame": list(lie2.q_frame),
        "b_frame": list(lie2.b_frame),
        "bracket": {f"({lie2.q_frame[i]},{lie2.q_frame[j]})":
                    {lie2.q_frame[n]: str(c) for n, c in enumerate(vec) if not c.is_zero()}
                    for (i, j), vec in sorted(lie2.dull.bracket.items()) if i < j},
        "ell": [[str(c) for c in row] for row in lie2.ell],
    }
    return [check_courant(data), check_axioms(lie2)], out


def cmd_suite_cartan(doc, args):
    man = load_manifold(doc)
    weil = WeilAlgebra(man.table)
    fields = []
    for n, entry in enumerate(doc.get("fields", [])):
        fields.append((entry.get("name", f"X{n}"),
                       load_field(man.table, entry["images"], int(entry["degree"]),
                                  f"fields[{n}]")))
    if not fields:
        raise InputError("missing section 'fields'")
    reports = []
    for nx, x in fields:
        for ny, y in fields:
            rep = cartan_report(weil, x, y)
            rep.title = f"Cartan calculus ({nx}, {ny})"
            reports.append(rep)
    return reports, {}


def cmd_suite_bicomplex(doc, args):
    man = load_manifold(doc)
    weil = WeilAlgebra(man.table)
    q = load_field(man.table, _need(doc, "q"), 1, "q")
    reports = [is_homological(q), bicomplex_check(weil, q)]
    return reports, {}


def cmd_tangent_prolong(doc, args):
    data = load_lie2(doc)
    out_data = tangent_prolongation(data)
    out = {
        "base_vars": list(out_data.base_vars),
        "q_frame": list(out_data.q_frame),
        "b_frame": list(out_data.b_frame),
        "anchor": {out_data.q_frame[i]: {v: str(e) for v, e in imgs.items()
                                         if not e.is_zero()}
                   for i, imgs in out_data.dull.anchor.items()},
        "bracket": {f"({out_data.q_frame[i]},{out_data.q_frame[j]})":
                    {out_data.q_frame[n]: str(c) for n, c in enumerate(vec)
                     if not c.is_zero()}
                    for (i, j), vec in sorted(out_data.dull.bracket.items()) if i < j},
    }
    return [check_axioms(out_data)], out


def cmd_is_exact(doc, args):
    man = load_manifold(doc)
    q = load_field(man.table, _need(doc, "q"), 1, "q")
    eta = _parse(man.table, _need(doc, "eta"), "eta")
    try:
        prim = is_exact(man.table, q, eta, args.poly_cap)
    except ValueError as exc:
        raise InputError(str(exc)) from exc
    rep = VerificationReport("bounded exactness")
    rep.add_bool("exact/primitive-found", f"poly_cap={args.poly_cap}", prim is not None)
    out = {"primitive": str(prim) if prim is not None else "inconclusive"}
    return [rep], out


COMMANDS = {
    ("check", "q2"): cmd_check_q2,
    ("check", "linfty"): cmd_check_linfty,
    ("check", "lie2"): cmd_check_lie2,
    ("check", "rep3"): cmd_check_rep3,
    ("check", "morphism"): cmd_check_morphism,
    ("check", "poisson"): cmd_check_poisson,
    ("check", "pq"): cmd_check_pq,
    ("check", "poisson-weil"): cmd_check_poisson_weil,
    ("check", "courant"): cmd_check_courant,
    ("check", "deformation"): cmd_check_deformation,
    ("build", "q"): cmd_build_q,
    ("build", "adjoint"): cmd_build_adjoint,
    ("build", "split-symplectic"): cmd_build_split_symplectic,
    ("extract", "brackets"): cmd_extract_brackets,
    ("realize", "courant-point"): cmd_realize_courant_point,
    ("classify", "homotopy"): cmd_classify_homotopy,
    ("suite", "cartan"): cmd_suite_cartan,
    ("suite", "bicomplex"): cmd_suite_bicomplex,
    ("tangent-prolong", None): cmd_tangent_prolong,
    ("is-exact", None): cmd_is_exact,
}


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="zgraded",
        description="Exact checks for graded-manifold structures from JSON documents.",
    )
    sub = parser.add_subparsers(dest="group", required=True)

    def add_leaf(sp, name):
        leaf = sp.add_parser(name)
        leaf.add_argument("input", help="path to the JSON input document")
        leaf.add_argument("--json", action="store_true", dest="as_json",
                          help="emit the report as JSON")
        leaf.add_argument("--poly-cap", type=int, default=2, dest="poly_cap",
                          help="polynomial degree cap for exactness searches")
        leaf.add_argument("--kmax", type=int, default=2,
                          help="largest curvature power for trace commands")
        return leaf

    for group in ("check", "build", "suite", "realize", "extract", "classify"):
        g = sub.add_parser(group)
        gsub = g.add_subparsers(dest="sub", required=True)
        for (grp, subname) in COMMANDS:
            if grp == group and subname is not None:
                add_leaf(gsub, subname)
    for (grp, subname) in COMMANDS:
        if subname is None:
            leaf = sub.add_parser(grp)
            leaf.add_argument("input")
            leaf.add_argument("--json", action="store_true", dest="as_json")
            leaf.add_argument("--poly-cap", type=int, default=2, dest="poly_cap")
            leaf.add_argument("--kmax", type=int, default=2)
            leaf.set_defaults(sub=None)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    key = (args.group, getattr(args, "sub", None))
    handler = COMMANDS.get(key)
    if handler is None:
        print(f"unknown command {key}", file=sys.stderr)
        return 2
    try:
        with open(args.input) as fh:
            doc = json.load(fh)
    except OSError as exc:
        print(f"cannot read input: {exc}", file=sys.stderr)
        return 2
    except json.JSONDecodeError as exc:
        print(f"malformed JSON at line {exc.lineno}, column {exc.colno}: {exc.msg}",
              file=sys.stderr)
        return 2
    if doc.get("format") != 1:
        print("input document must declare \"format\": 1", file=sys.stderr)
        return 2
    try:
        reports, outputs = handler(doc, args)
    except InputError as exc:
        print(f"input error: {exc}", file=sys.stderr)
        return 2
    except (KeyError, TypeError, ValueError) as exc:
        print(f"input error: missing or malformed field ({exc})", file=sys.stderr)
        return 2
    passed = all(r.passed for r in reports)
    if args.as_json:
        payload = {
            "format": 1,
            "command": " ".join(k for k in key if k),
            "passed": passed,
            "reports": [r.to_dict() for r in reports],
            "outputs": outputs,
        }
        print(json.dumps(payload, indent=2, sort_keys=True))
    else:
        for r in reports:
            print(r.summary())
        for k, v in outputs.items():
            print(f"{k}: {json.dumps(v, indent=2, sort_keys=True)}")
        print("RESULT:", "PASS" if passed else "FAIL")
    return 0 if passed else 1


if __name__ == "__main__":
    sys.exit(main())
