"""Command-line front end; every subcommand prints one JSON document.

Exit status: 0 on success, 2 when the computation ends in an obstruction verdict,
1 on bad input.
"""
from __future__ import annotations

import argparse
import json
import re
import sys
from fractions import Fraction
from functools import lru_cache
from importlib import resources
from pathlib import Path

import jsonschema
import sympy

from . import admissibility, heisenberg, hilbert, numberfield, separability, torusbundle
from .errors import CuspedError, InputError
from .numberfield import QuadElem

EXIT_OK, EXIT_INPUT, EXIT_OBSTRUCTED = 0, 1, 2

MATRIX_HELP = 'integer matrix, rows separated by ";" and entries by "," (e.g. "1,2;1,3"), or @path to a file'
ELEMENT_HELP = 'field element such as "2+sqrt(3)" or "(1+sqrt(5))/2"'


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        raise InputError(message)


@lru_cache(maxsize=None)
def load_schema(name: str) -> dict:
    return json.loads(resources.files("cusped").joinpath("schemas", f"{name}.json").read_text())


def output_schema(subcommand: str) -> dict:
    full = load_schema("output")
    return {"$defs": full["$defs"], "$ref": f"#/$defs/{subcommand}"}


def validate_output(subcommand: str, doc: dict) -> None:
    jsonschema.validate(doc, output_schema(subcommand))


# -- parsing helpers ----------------------------------------------------------


def _read_arg(text: str) -> str:
    if text.startswith("@"):
        try:
            return Path(text[1:]).read_text().strip()
        except OSError as exc:
            raise InputError(f"cannot read {text[1:]}: {exc.strerror}") from None
    return text


def parse_matrix(text: str) -> list[list[int]]:
    text = _read_arg(text)
    if text.startswith("["):
        try:
            rows = json.loads(text)
        except json.JSONDecodeError as exc:
            raise InputError(f"bad matrix JSON: {exc.msg}") from None
    else:
        rows = [[c.strip() for c in r.split(",")] for r in text.replace("\n", ";").split(";") if r.strip()]
    try:
        out = [[int(c) for c in r] for r in rows]
    except (TypeError, ValueError):
        raise InputError(f"matrix entries must be integers: {text!r}") from None
    if not out or any(len(r) != len(out[0]) for r in out):
        raise InputError("matrix rows must have equal length")
    return out


def parse_element(text: str, d: int) -> QuadElem:
    """Parse a + b*sqrt(d) with rational a, b."""
    try:
        expr = sympy.nsimplify(sympy.sympify(text, rational=True))
    except (sympy.SympifyError, TypeError, SyntaxError):
        raise InputError(f"cannot parse field element {text!r}") from None
    root = sympy.sqrt(d)
    expr = sympy.expand(expr)
    b = expr.coeff(root) if not root.is_Rational else 0
    a = sympy.expand(expr - b * root)
    if not (a.is_Rational and sympy.sympify(b).is_Rational):
        raise InputError(f"{text!r} is not of the form a + b*sqrt({d})")
    a, b = sympy.Rational(a), sympy.Rational(b)
    return QuadElem(Fraction(int(a.p), int(a.q)), Fraction(int(b.p), int(b.q)), d)


def _provenance(result: str, module: str) -> dict:
    return {"result": result, "module": f"cusped.{module}"}


# -- subcommands -------------------------------------------------------------


def cmd_classify(p: dict) -> tuple[dict, int]:
    g = torusbundle.classify_geometry(p["matrix"])
    doc = {"geometry": g.tag, "witness": g.witness,
           "provenance": _provenance("trichotomy of torus-bundle geometries by monodromy trace", "torusbundle")}
    if g.tag == "Sol":
        d, unit = torusbundle.holonomy_as_unit(p["matrix"])
        doc.update(d=d, unit=str(unit), unit_exact=unit.to_json())
    return doc, EXIT_OK


def cmd_represent(p: dict) -> tuple[dict, int]:
    bundle = torusbundle.TorusBundle.from_matrix(p["matrix"])
    report = torusbundle.is_k_arithmetic(bundle)
    if bundle.n != 2 or report.verdict != "admissible":
        return {"d": 0, "images": {}, "verified": True, "report": report.to_json(),
                "provenance": _provenance("faithful affine representation of a Sol torus bundle",
                                          "torusbundle")}, EXIT_OBSTRUCTED
    d, unit = torusbundle.holonomy_as_unit(p["matrix"])
    if p.get("unit"):
        unit = parse_element(p["unit"], d)
    rep = torusbundle.solve_representation(bundle, unit)
    if p.get("integral"):
        rep = torusbundle.integralize(rep)
    ok, bad = torusbundle.verify_affine_relations(bundle, rep)
    if not ok:
        raise InputError(f"representation fails relation {bad}")
    doc = {"d": rep.d,
           "images": {name: {"alpha": x.alpha.to_json(), "beta": x.beta.to_json(), "text": f"({x.alpha}, {x.beta})"}
                      for name, x in rep.images}}
    doc.update(verified=True, report=report.to_json(),
               provenance=_provenance("faithful affine representation of a Sol torus bundle", "torusbundle"))
    return doc, EXIT_OK


def cmd_nil_rep(p: dict) -> tuple[dict, int]:
    fam = heisenberg.NilFamily(p["family"], p["k"], p.get("k1"), p.get("k2"), p.get("p"))
    images = heisenberg.solve_nil_rep(fam)
    mats = [heisenberg.psi_embed(x) for x in images]
    H = heisenberg.invariant_hermitian_form(mats)
    gens = {g: {"heisenberg": x.to_json(), "text": repr(x), "matrix": M.to_json()}
            for g, x, M in zip(fam.generators, images, mats)}
    params = {k: v for k, v in (("k", fam.k), ("k1", fam.k1), ("k2", fam.k2), ("p", fam.p)) if v is not None}
    doc = {"family": fam.family, "params": params, "d": fam.d, "generators": gens,
           "relations_verified": True,
           "hermitian_form": [[x.to_json() for x in r] for r in H],
           "signature": list(heisenberg.signature(H)),
           "provenance": _provenance("Nil 3-manifold groups as cusp groups of complex hyperbolic surfaces",
                                     "heisenberg")}
    return doc, EXIT_OK


def cmd_delta(p: dict) -> tuple[dict, int]:
    d = p["d"]
    if p.get("basis") or p.get("unit"):
        std = hilbert.PeripheralLattice.standard(d)
        basis = tuple(parse_element(s, d) for s in p["basis"]) if p.get("basis") else std.basis
        unit = parse_element(p["unit"], d) if p.get("unit") else std.eps
        L = hilbert.PeripheralLattice(d, basis, unit)
    else:
        L = hilbert.PeripheralLattice.standard(d)
    est = hilbert.delta_cusp(L, p["bound"])
    vol = hilbert.covolume(L.basis)
    doc = {"d": d, "lattice": L.to_json(), "estimate": est.to_json(),
           "covolume": {"exact": vol.to_json(), "value": vol.embed(0)},
           "provenance": _provenance("cusp contribution to the signature defect via the Shimizu L-function",
                                     "hilbert")}
    code = EXIT_OK
    if p.get("obstruct"):
        verdict = hilbert.bounding_obstruction(est, p.get("tol", 0.1))
        doc["obstruction"] = verdict
        doc["provenance"] = _provenance("integrality of the signature defect for geometric bounding", "hilbert")
        if verdict["verdict"] == "obstructed":
            code = EXIT_OBSTRUCTED
    return doc, code


def _parse_factor(text: str, kind: str):
    parts = [s.strip() for s in text.split(",")]
    if len(parts) != 2:
        raise InputError(f"central-product factor must be 'd,admissible', got {text!r}")
    try:
        d = int(parts[0])
    except ValueError:
        raise InputError(f"bad field discriminant {parts[0]!r}") from None
    flag = parts[1].lower()
    if flag not in ("1", "0", "true", "false", "yes", "no"):
        raise InputError(f"admissibility flag must be 0/1 or true/false, got {parts[1]!r}")
    return d, flag in ("1", "true", "yes"), kind


def cmd_obstruct(p: dict) -> tuple[dict, int]:
    modes = [m for m in ("prime", "central_product", "order", "congruence") if p.get(m) is not None]
    if len(modes) != 1:
        raise InputError("choose exactly one of --prime, --central-product, --order, --congruence")
    mode = modes[0]
    if mode == "prime":
        if p.get("dim") is None:
            raise InputError("--prime needs --dim")
        report = admissibility.prime_holonomy_check(p["prime"], p["dim"])
        result = "parity obstruction for prime-order holonomy"
    elif mode == "central_product":
        kind = p.get("kind", "complex")
        f1, f2 = (_parse_factor(s, kind) for s in p["central_product"])
        report = admissibility.central_product(f1, f2)
        result = "arithmeticity of central products of Heisenberg-type groups"
    elif mode == "order":
        report = admissibility.quaternion_order_obstruction(p["order"])
        result = "cyclotomic degree test for torsion in rational quaternion algebras"
    else:
        q = admissibility.torsion_free_congruence(p["congruence"])
        report = admissibility.ObstructionReport(
            "admissible", "smallest prime level giving a torsion-free principal congruence subgroup",
            {"n": p["congruence"], "q": q})
        result = "torsion-free congruence level in GL(n;Z)"
    doc = {"report": report.to_json(), "provenance": _provenance(result, "admissibility")}
    return doc, EXIT_OBSTRUCTED if report.verdict == "inadmissible" else EXIT_OK


def cmd_separate(p: dict) -> tuple[dict, int]:
    cert = separability.separate_from_line_stabilizer(p["matrix"])
    doc = {"certificate": cert.to_json(), "verified": separability.verify_certificate(cert),
           "provenance": _provenance("congruence separability of line stabilisers", "separability")}
    return doc, EXIT_OK


def cmd_class_number(p: dict) -> tuple[dict, int]:
    d = p["d"]
    eps = numberfield.fundamental_unit(d)
    doc = {"d": d, "class_number": numberfield.class_number(d),
           "narrow_class_number": numberfield.narrow_class_number(d),
           "fundamental_unit": str(eps), "fundamental_unit_exact": eps.to_json(),
           "provenance": _provenance("cusps of a Hilbert modular surface correspond to ideal classes",
                                     "numberfield")}
    return doc, EXIT_OK


COMMANDS = {
    "classify": cmd_classify,
    "represent": cmd_represent,
    "nil-rep": cmd_nil_rep,
    "delta": cmd_delta,
    "obstruct": cmd_obstruct,
    "separate": cmd_separate,
    "class-number": cmd_class_number,
}


def build_parser() -> argparse.ArgumentParser:
    parser = _Parser(prog="cusped", description=__doc__.splitlines()[0])
    parser.add_argument("-o", "--output", help="write JSON here instead of stdout")
    sub = parser.add_subparsers(dest="subcommand", required=True, parser_class=_Parser)

    s = sub.add_parser("classify", help="geometry of a 2x2 torus-bundle monodromy")
    s.add_argument("--matrix", required=True, help=MATRIX_HELP)

    s = sub.add_parser("represent", help="affine representation of a Sol torus bundle")
    s.add_argument("--matrix", required=True, help=MATRIX_HELP)
    s.add_argument("--unit", help=f"eigenvalue to use; {ELEMENT_HELP}")
    s.add_argument("--integral", action="store_true", help="rescale translations into the ring of integers")

    s = sub.add_parser("nil-rep", help="U(2,1) images of a Nil 3-manifold group")
    s.add_argument("--family", type=int, required=True, choices=range(1, 8))
    s.add_argument("--k", type=int, required=True)
    s.add_argument("--k1", type=int)
    s.add_argument("--k2", type=int)
    s.add_argument("--p", type=int)

    s = sub.add_parser("delta", help="delta invariant of a Hilbert modular cusp")
    s.add_argument("--d", type=int, required=True, help="squarefree d > 1")
    s.add_argument("--bound", type=int, required=True, help="norm bound B")
    s.add_argument("--basis", help=f'two module generators separated by ";"; each a {ELEMENT_HELP}')
    s.add_argument("--unit", help=f"totally positive unit generating V; {ELEMENT_HELP}")
    s.add_argument("--obstruct", action="store_true", help="append the integrality verdict")
    s.add_argument("--tol", type=float, default=0.1)

    s = sub.add_parser("obstruct", help="arithmetic admissibility tests")
    # lets factors such as "-3,1" through as values instead of option names
    s._negative_number_matcher = re.compile(r"^-\d[\d,]*$")
    s.add_argument("--prime", type=int)
    s.add_argument("--dim", type=int)
    s.add_argument("--central-product", nargs=2, metavar="D,ADMISSIBLE")
    s.add_argument("--kind", choices=["complex", "anticomplex"], default="complex")
    s.add_argument("--order", type=int, help="order q of a torsion element (quaternion degree test)")
    s.add_argument("--congruence", type=int, help="n for the torsion-free congruence level of GL(n;Z)")

    s = sub.add_parser("separate", help="congruence certificate against the e1 line stabiliser")
    s.add_argument("--matrix", required=True, help=MATRIX_HELP)

    s = sub.add_parser("class-number", help="class numbers and fundamental unit of Q(sqrt(d))")
    s.add_argument("--d", type=int, required=True)
    return parser


def request_from_args(ns: argparse.Namespace) -> dict:
    raw = {k: v for k, v in vars(ns).items() if k not in ("subcommand", "output")}
    params = {}
    for key, value in raw.items():
        if value is None:
            continue
        if key == "matrix":
            value = parse_matrix(value)
        elif key == "basis":
            value = [s.strip() for s in _read_arg(value).split(";")]
        elif key == "central_product":
            value = list(value)
        elif key == "kind" and ns.subcommand != "obstruct":
            continue
        params[key] = value
    if ns.subcommand == "delta" and not params.get("obstruct"):
        params.pop("tol", None)
    return {"subcommand": ns.subcommand, "output": ns.output, "params": params}


def run(request: dict) -> tuple[int, dict]:
    """Validate a request, dispatch it and validate the result."""
    try:
        jsonschema.validate(request, load_schema("request"))
    except jsonschema.ValidationError as exc:
        raise InputError(f"invalid request: {exc.message}") from None
    sub = request["subcommand"]
    doc, code = COMMANDS[sub](request["params"])
    validate_output(sub, doc)
    return code, doc


def render(doc: dict) -> str:
    return json.dumps(doc, indent=2, sort_keys=True) + "\n"


def main(argv=None) -> int:
    try:
        ns = build_parser().parse_args(argv)
        request = request_from_args(ns)
        code, doc = run(request)
    except CuspedError as exc:
        print(f"cusped: error: {exc}", file=sys.stderr)
        return EXIT_INPUT
    text = render(doc)
    if request.get("output"):
        Path(request["output"]).write_text(text)
    else:
        sys.stdout.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
