"""Batch command line interface.

Every command reads at most one JSON document (``--input``, ``-`` for
standard input) and writes CSV or JSON to ``--output`` (default ``-``,
standard output).  Input documents are one of

* a profile ``{"support": ..., "pieces": [...]}``,
* a measured Reeb tree ``{"vertices": [...], "edges": [...], "boundary": ...}``,
* a triangulated field ``{"vertices": [{"h": ...}], "triangles": [{"v": [...], "area": ...}]}``,
* a named fixture ``{"fixture": "ramp"}``,
* for ``prescribe``, a signature ``{"s": ["1/2", "-1", ...]}``.

Exit status: 0 success, 1 domain or structural error, 2 unreadable input or
schema error, 3 certification failure.  Schemas are described in
``docs/formats.md``.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import random
import sys
from fractions import Fraction

from .errors import (ArgumentError, CertificationError, DomainError, KTooSmallError,
                     ResourceError, SchemaError, StructuralError)
from .exact import format_number, format_rational, parse_rational
from .invariants import (calabi, hofer_norm, morse_data_from_tree, ruelle_levelcount,
                         ruelle_morse, ruelle_numeric, ruelle_tree, sphere_chi_sum, sphere_mean)
from .model import FIXTURES, AxisymmetricProfile, TriangulatedField
from .reeb import MeasuredReebTree, tree_from_mesh, tree_from_profile
from .spectral import audit_placement, fk, muk_bounds, place_link, prescribe_fk_sequence, weyl_sequence
from .twists import CERTIFIED, sphere_twist_sequence, twist_T_sequence

COMMANDS = ("invariants", "reeb", "weyl", "link-place", "twist-demo", "sphere-twist",
            "prescribe", "ruelle-numeric")

EXIT_OK, EXIT_DOMAIN, EXIT_SCHEMA, EXIT_CERT = 0, 1, 2, 3


# --------------------------------------------------------------------------
# input


def _read_document(path: str | None):
    if path is None:
        raise SchemaError("this command needs --input")
    try:
        if path == "-":
            text = sys.stdin.read()
        else:
            with open(path, encoding="utf-8") as fh:
                text = fh.read()
    except OSError as exc:
        raise SchemaError(f"cannot read {path}: {exc.strerror}") from exc
    try:
        return json.loads(text)
    except json.JSONDecodeError as exc:
        raise SchemaError(f"{path} is not valid JSON: {exc}") from exc


def load_object(doc):
    """Turn a parsed JSON document into a profile, tree or triangulated field."""
    if not isinstance(doc, dict):
        raise SchemaError("top-level JSON value must be an object")
    if "fixture" in doc:
        name = doc["fixture"]
        if name not in FIXTURES:
            raise SchemaError(f"unknown fixture {name!r}; known: {sorted(FIXTURES)}")
        return FIXTURES[name]
    if "pieces" in doc:
        return AxisymmetricProfile.from_json(doc)
    if "triangles" in doc:
        return TriangulatedField.from_json(doc)
    if "vertices" in doc:
        return MeasuredReebTree.from_json(doc)
    raise SchemaError("input is neither a profile, a tree, a field nor a fixture reference")


def _as_tree(obj) -> MeasuredReebTree:
    if isinstance(obj, MeasuredReebTree):
        return obj
    if isinstance(obj, TriangulatedField):
        return tree_from_mesh(obj)
    return tree_from_profile(obj)


def _need_profile(obj, command: str) -> AxisymmetricProfile:
    if not isinstance(obj, AxisymmetricProfile):
        raise SchemaError(f"{command} needs a profile document")
    return obj


# --------------------------------------------------------------------------
# output


def _emit(text: str, path: str) -> None:
    if path == "-":
        sys.stdout.write(text)
        sys.stdout.flush()
        return
    with open(path, "w", encoding="utf-8", newline="") as fh:
        fh.write(text)


def _csv(rows) -> str:
    buf = io.StringIO()
    writer = csv.writer(buf, lineterminator="\n")
    writer.writerows(rows)
    return buf.getvalue()


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=True) + "\n"


# --------------------------------------------------------------------------
# commands


def cmd_invariants(args) -> tuple[str, int]:
    obj = load_object(_read_document(args.input))
    tree = _as_tree(obj)
    report: dict = {"kind": type(obj).__name__}
    disc = tree.boundary is not None
    if isinstance(obj, AxisymmetricProfile):
        report["support"] = obj.support
        report["hofer_norm"] = format_number(hofer_norm(obj))
        report["critical_values"] = [format_number(v) for v in obj.critical_values()]
        if obj.support == "disc" and not obj.singular:
            report["ruelle_levelcount"] = ruelle_levelcount(obj).to_json()
    report["mean"] = format_number(sphere_mean(tree))
    report["sphere_chi_sum"] = format_number(sphere_chi_sum(tree))
    if disc:
        report["calabi"] = format_number(calabi(tree))
        report["ruelle_tree"] = ruelle_tree(tree).to_json()
        report["ruelle_morse"] = ruelle_morse(morse_data_from_tree(tree)).to_json()
    return _json(report), EXIT_OK


def cmd_reeb(args) -> tuple[str, int]:
    obj = load_object(_read_document(args.input))
    return _json(_as_tree(obj).to_json()), EXIT_OK


def cmd_weyl(args) -> tuple[str, int]:
    obj = load_object(_read_document(args.input))
    if isinstance(obj, TriangulatedField):
        obj = tree_from_mesh(obj)
    seq = weyl_sequence(obj, range(args.k_min, args.k_max + 1, args.k_step), mode=args.mode)
    return _csv(seq.to_csv_rows()), EXIT_OK


def cmd_link_place(args) -> tuple[str, int]:
    tree = _as_tree(load_object(_read_document(args.input)))
    k = args.k if args.k is not None else args.k_min
    link = place_link(tree, k)
    problems = audit_placement(tree, link)
    if problems:
        raise StructuralError("placement audit failed: " + "; ".join(problems),
                              "monotone link structure")
    lo, hi = muk_bounds(tree, k)
    doc = link.to_json()
    doc["muk_bounds"] = [format_number(lo), format_number(hi)]
    return _json(doc), EXIT_OK


def cmd_twist_demo(args) -> tuple[str, int]:
    k_min = max(args.k_min, 7)
    if args.input is not None:
        profile = _need_profile(load_object(_read_document(args.input)), "twist-demo")
        cert = twist_T_sequence(args.k_max, k_min=k_min, profile=profile, certify=args.certify)
    else:
        cert = twist_T_sequence(args.k_max, k_min=k_min, certify=args.certify)
    rows = [["k", "value", "bound", "verdict"]]
    rows += [[str(k), format_number(v), format_number(b), verdict]
             for k, v, b, verdict in cert.rows()]
    status = EXIT_OK
    if args.certify and cert.verdict != CERTIFIED:
        status = EXIT_CERT
    return _csv(rows), status


def cmd_sphere_twist(args) -> tuple[str, int]:
    res = sphere_twist_sequence(args.k_max, k_min=max(args.k_min, 2))
    rows = [["k", "value", "bound", "verdict"]]
    rows += [[str(k), format_number(v), format_number(b), verdict]
             for k, v, b, verdict in res.rows()]
    status = EXIT_OK
    if args.certify and any(v != CERTIFIED for v in res.verdicts):
        status = EXIT_CERT
    return _csv(rows), status


def cmd_prescribe(args) -> tuple[str, int]:
    if args.input is not None:
        doc = _read_document(args.input)
        if not isinstance(doc, dict) or not isinstance(doc.get("s"), list):
            raise SchemaError("prescribe needs {\"s\": [s_2, s_3, ...]}")
        s = [parse_rational(x) for x in doc["s"]]
    else:
        # seeded random signature s_2..s_{k_max}
        rng = random.Random(args.seed)
        s = [Fraction(rng.randint(-20, 20), rng.randint(1, 12)) for _ in range(2, args.k_max + 1)]
    profile = prescribe_fk_sequence(s)
    check = [fk(profile, i) for i in range(2, len(s) + 2)]
    if check != s:
        raise CertificationError("prescribed profile does not reproduce the signature")
    doc = profile.to_json()
    doc["signature"] = [format_rational(x) for x in s]
    return _json(doc), EXIT_OK


def cmd_ruelle_numeric(args) -> tuple[str, int]:
    profile = _need_profile(load_object(_read_document(args.input)), "ruelle-numeric")
    est = ruelle_numeric(profile, P=args.P)
    doc = est.to_json()
    if profile.support == "disc" and not profile.singular:
        ref = ruelle_tree(tree_from_profile(profile)).value
        doc["ruelle_tree"] = format_number(ref)
        diff = abs(float(est.value) - float(ref))
        doc["difference"] = format_number(diff)
        if args.certify and diff > args.tolerance * max(1.0, abs(float(ref))):
            return _json(doc), EXIT_CERT
    return _json(doc), EXIT_OK


HANDLERS = {
    "invariants": cmd_invariants,
    "reeb": cmd_reeb,
    "weyl": cmd_weyl,
    "link-place": cmd_link_place,
    "twist-demo": cmd_twist_demo,
    "sphere-twist": cmd_sphere_twist,
    "prescribe": cmd_prescribe,
    "ruelle-numeric": cmd_ruelle_numeric,
}


# --------------------------------------------------------------------------
# entry point


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="subleading", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--input", "-i", default=None, help="JSON input file, '-' for stdin")
    parser.add_argument("--output", "-o", default="-", help="output file, '-' for stdout")
    parser.add_argument("--k-min", type=int, default=None)
    parser.add_argument("--k-max", type=int, default=None)
    parser.add_argument("--k-step", type=int, default=1, help="stride through k for weyl")
    parser.add_argument("--k", type=int, default=None, help="k for link-place")
    parser.add_argument("--mode", choices=("disc", "sphere"), default="disc")
    parser.add_argument("--tolerance", type=float, default=0.02)
    parser.add_argument("--certify", action="store_true")
    parser.add_argument("--seed", type=int, default=0)
    parser.add_argument("-P", type=int, default=64, help="homogenization depth for ruelle-numeric")
    return parser


_K_DEFAULTS = {
    "weyl": (1, 40), "link-place": (15, 15), "twist-demo": (7, 1000),
    "sphere-twist": (2, 20), "prescribe": (2, 12),
}


def _diagnostic(exc: Exception, status: int) -> None:
    doc = {"error": type(exc).__name__, "message": str(exc), "exit": status}
    invariant = getattr(exc, "invariant", None)
    if invariant:
        doc["invariant"] = invariant
    if isinstance(exc, KTooSmallError):
        doc["invariant"] = "admissible k"
        doc["min_admissible_k"] = exc.min_k
    sys.stderr.write(json.dumps(doc, sort_keys=True) + "\n")


def run(argv: list[str] | None = None) -> int:
    """Parse ``argv``, run the command and return the exit status."""
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return EXIT_OK if exc.code == 0 else EXIT_SCHEMA
    lo, hi = _K_DEFAULTS.get(args.command, (1, 1))
    args.k_min = lo if args.k_min is None else args.k_min
    args.k_max = max(hi, args.k_min) if args.k_max is None else args.k_max
    try:
        if args.k_min > args.k_max:
            raise ArgumentError("need k_min <= k_max")
        if args.k_step < 1:
            raise ArgumentError("k_step must be positive")
        if not args.tolerance > 0:
            raise ArgumentError("tolerance must be positive")
        text, status = HANDLERS[args.command](args)
        _emit(text, args.output)
        return status
    except SchemaError as exc:
        _diagnostic(exc, EXIT_SCHEMA)
        return EXIT_SCHEMA
    except CertificationError as exc:
        _diagnostic(exc, EXIT_CERT)
        return EXIT_CERT
    except (DomainError, StructuralError, ArgumentError, ResourceError) as exc:
        _diagnostic(exc, EXIT_DOMAIN)
        return EXIT_DOMAIN


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
