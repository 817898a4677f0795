"""Batch command-line front end with stable JSON output.

Exit codes: 0 success, 1 error, 2 unknown-verdict (a decision or witness
search that ended without an answer).
"""

from __future__ import annotations

import argparse
import json
import sys

from .classify import (
    decide,
    good_ideal,
    good_monomials,
    no_good_monomials,
    resolve_k_size,
    span_good_scan,
)
from .endo import (
    Endomorphism,
    GeneratorWord,
    IdealHandle,
    compose,
    elementary,
    extend,
    invert_structured,
    reduce_mod,
    try_invert,
)
from .errors import CotameError, NoRouteFound, PolynomialSyntaxError
from .poly import parse_poly
from .rings import ring_from_spec
from .witness import build_witness_with_info, theta_map, verify_witness

OK, ERROR, UNKNOWN = 0, 1, 2


def _load_json(path):
    with open(path, "r", encoding="utf-8") as fh:
        return json.load(fh)


def _load_endo(path, ring_spec=None, n=None):
    data = _load_json(path)
    ring = ring_from_spec(ring_spec) if ring_spec else None
    if ring is not None and "ring" in data and ring_from_spec(data["ring"]) != ring:
        raise ValueError(
            f"--ring {ring_spec} conflicts with ring {data['ring']!r} in {path}"
        )
    phi = Endomorphism.from_json(data, ring=ring)
    if n is not None and phi.nvars != n:
        raise ValueError(f"--n {n} conflicts with {phi.nvars} images in {path}")
    return phi


def _resolve_inverse(phi, inverse_path):
    if inverse_path:
        inverse = _load_endo(inverse_path)
        from .endo import identity

        if compose(phi, inverse) != identity(phi.ring, phi.nvars):
            raise ValueError("supplied inverse fails the composition check")
        if compose(inverse, phi) != identity(phi.ring, phi.nvars):
            raise ValueError("supplied inverse fails the composition check")
        return inverse
    return try_invert(phi)


def emit_report(result, fmt="json"):
    """Render a command result; field order is fixed for byte-stable output."""
    if fmt == "json":
        return json.dumps(result, indent=2) + "\n"
    lines = [f"status: {result['status']}", f"command: {result['command']}"]
    payload = result.get("payload") or {}
    for key, value in payload.items():
        lines.append(f"{key}: {value}")
    for note in result.get("diagnostics", ()):
        lines.append(f"note: {note}")
    return "\n".join(lines) + "\n"


def _finish(args, command, payload, status="ok", diagnostics=None, code=OK,
            artifact=None):
    """Print the report; for artifact commands -o saves the artifact JSON."""
    result = {
        "status": status,
        "command": command,
        "payload": payload,
        "diagnostics": list(diagnostics or ()),
    }
    if getattr(args, "output", None):
        with open(args.output, "w", encoding="utf-8") as fh:
            if artifact is not None:
                json.dump(artifact, fh, indent=2)
                fh.write("\n")
            else:
                fh.write(emit_report(result, args.format))
        result = dict(result)
        result["written"] = args.output
    sys.stdout.write(emit_report(result, args.format))
    return code


def cmd_parse(args):
    ring = ring_from_spec(args.ring)
    f = parse_poly(args.poly, ring, args.n)
    payload = {
        "canonical": str(f),
        "total_degree": None if f.is_zero() else f.total_deg(),
        "degrees": [None if f.is_zero() else f.deg_xi(i) for i in range(1, args.n + 1)],
    }
    if ring.characteristic == 0 or ring.is_field:
        payload["separable_degrees"] = [
            None if f.is_zero() else f.sep_deg_xi(i) for i in range(1, args.n + 1)
        ]
    return _finish(args, "parse", payload)


def cmd_compose(args):
    phi = _load_endo(args.phi, args.ring)
    psi = _load_endo(args.psi, args.ring)
    value = compose(phi, psi).to_json()
    return _finish(args, "compose", value, artifact=value)


def cmd_invert(args):
    phi = _load_endo(args.phi, args.ring)
    inverse = invert_structured(phi, hint=args.hint).to_json()
    return _finish(args, "invert", inverse, artifact=inverse)


def cmd_classify(args):
    phi = _load_endo(args.phi, args.ring, getattr(args, "n", None))
    ksize = args.ksize if args.ksize else "auto"
    goods = []
    for j, img in enumerate(phi.images, start=1):
        for exps, coeff, gm_type in good_monomials(img):
            goods.append(
                {
                    "image": j,
                    "monomial": list(exps),
                    "coefficient": phi.ring.format_value(coeff.value),
                    "case": gm_type.tag,
                }
            )
    ideal = good_ideal(phi)
    resolved = resolve_k_size(phi.ring, ksize)
    certified = False
    diagnostics = []
    if resolved != "unavailable":
        scan = span_good_scan(phi, resolved, budget=args.budget, seed=args.seed)
        certified = scan.certified_full()
        diagnostics.extend(scan.diagnostics)
    else:
        diagnostics.append("no base field available for the span scan")
    verdict = decide(phi, k_size=ksize, budget=args.budget, seed=args.seed)
    payload = {
        "good_monomials": goods,
        "I_phi": ideal.to_json(),
        "I_phi_full": ideal.is_full(),
        "J_phi_certified": certified,
        "ngg": no_good_monomials(phi),
        "verdict": verdict.to_json(),
    }
    code = UNKNOWN if verdict.answer == "Unknown" else OK
    status = "unknown-verdict" if code == UNKNOWN else "ok"
    return _finish(args, "classify", payload, status=status,
                   diagnostics=diagnostics, code=code)


def cmd_decide(args):
    phi = _load_endo(args.phi, args.ring, getattr(args, "n", None))
    ksize = args.ksize if args.ksize else "auto"
    verdict = decide(phi, k_size=ksize, budget=args.budget, seed=args.seed)
    code = UNKNOWN if verdict.answer == "Unknown" else OK
    status = "unknown-verdict" if code == UNKNOWN else "ok"
    return _finish(
        args,
        "decide",
        verdict.to_json(),
        status=status,
        diagnostics=verdict.diagnostics,
        code=code,
    )


def cmd_witness(args):
    phi = _load_endo(args.phi, args.ring, getattr(args, "n", None))
    target = parse_poly(args.target, phi.ring, phi.nvars)
    ksize = args.ksize if args.ksize else "auto"
    inverse = _resolve_inverse(phi, args.phi_inverse)
    try:
        word, info = build_witness_with_info(
            phi,
            target,
            k_size=ksize,
            budget=args.budget,
            seed=args.seed,
            max_degree=args.max_degree,
        )
    except NoRouteFound as exc:
        return _finish(
            args,
            "witness",
            {"error": str(exc)},
            status="unknown-verdict",
            code=UNKNOWN,
        )
    verified = None
    if inverse is not None:
        verified = verify_witness(word, phi, target, phi_inverse=inverse)
        if not verified:
            raise CotameError("compiled word failed verification")
    payload = {
        "route": info.route,
        "seed_kind": info.seed_kind,
        "word_length": len(word),
        "verified": verified,
        "word": word.to_json(),
    }
    diagnostics = []
    if inverse is None:
        diagnostics.append(
            "no inverse available: emitted without the final evaluation check"
        )
    return _finish(args, "witness", payload, diagnostics=diagnostics,
                   artifact=payload["word"])


def cmd_verify(args):
    phi = _load_endo(args.phi, args.ring)
    word = GeneratorWord.from_json(phi.ring, _load_json(args.word))
    target = elementary(parse_poly(args.target, phi.ring, phi.nvars))
    inverse = _resolve_inverse(phi, args.phi_inverse)
    value = word.evaluate(phi, inverse)
    expected = extend(target, word.ambient - target.nvars)
    if value == expected:
        return _finish(args, "verify", {"match": True, "word_length": len(word)})
    mismatch = None
    for i in range(word.ambient):
        if value.images[i] != expected.images[i]:
            mismatch = i + 1
            break
    return _finish(
        args,
        "verify",
        {"match": False, "first_mismatch_variable": mismatch},
        status="error",
        code=ERROR,
    )


def cmd_theta(args):
    ring = ring_from_spec(args.ring)
    theta, theta_prime = theta_map(args.N, ring, max_terms=args.max_terms)
    payload = {
        "theta": theta.to_json(),
        "theta_prime": theta_prime.to_json(),
    }
    if args.analyze:
        img = theta_prime.images[1]
        analysis = {
            "degrees_theta_prime_x2": [img.deg_xi(i) for i in (1, 2, 3)],
            "term_counts": [len(i.terms) for i in theta.images],
        }
        if ring.characteristic not in (0, 1):
            analysis["ngg"] = no_good_monomials(theta)
        if args.N == 1:
            coeff = img.terms.get((2, 0, 4))
            analysis["x1^2*x3^4_coefficient"] = (
                ring.format_value(coeff) if coeff is not None else "0"
            )
        verdict = decide(theta, budget=args.budget, seed=args.seed)
        analysis["verdict"] = verdict.to_json()
        payload["analysis"] = analysis
    return _finish(args, "theta", payload, artifact=payload["theta"])


def cmd_reduce(args):
    phi = _load_endo(args.phi, args.ring)
    gens = [phi.ring.parse_literal(t) for t in args.ideal.split(",")]
    ideal = IdealHandle(phi.ring, gens)
    reduced = reduce_mod(phi, ideal).to_json()
    return _finish(args, "reduce", reduced, artifact=reduced)


def cmd_ngg_check(args):
    phi = _load_endo(args.phi, args.ring)
    member = no_good_monomials(phi)
    payload = {"ngg": member}
    if not member:
        for j, img in enumerate(phi.images, start=1):
            goods = good_monomials(img)
            if goods:
                exps, coeff, gm_type = goods[0]
                payload["witness"] = {
                    "image": j,
                    "monomial": list(exps),
                    "coefficient": phi.ring.format_value(coeff.value),
                    "case": gm_type.tag,
                }
                break
    return _finish(args, "ngg-check", payload)


def build_parser():
    parser = argparse.ArgumentParser(
        prog="cotame",
        description="Exact decision and certificate tools for stably co-tame"
        " polynomial automorphisms.",
    )
    sub = parser.add_subparsers(dest="command", required=True)

    def common(p, ring_required=False):
        p.add_argument("--ring", required=ring_required,
                       help="ring spec: Q, Z, Zn:<n>, Fp:<p>, GF:<p>^<e>[:mod]")
        p.add_argument("--seed", type=int, default=0)
        p.add_argument("--budget", type=int, default=200000)
        p.add_argument("--format", choices=("json", "text"), default="json")
        p.add_argument("-o", "--output", help="write the report to this file")

    p = sub.add_parser("parse", help="parse a polynomial to canonical form")
    common(p, ring_required=True)
    p.add_argument("--n", type=int, required=True)
    p.add_argument("--poly", required=True)
    p.set_defaults(func=cmd_parse)

    p = sub.add_parser("compose", help="compose two maps given as JSON files")
    common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--psi", required=True)
    p.set_defaults(func=cmd_compose)

    p = sub.add_parser("invert", help="invert a structured map exactly")
    common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--hint", choices=("affine", "triangular", "elementary"))
    p.set_defaults(func=cmd_invert)

    p = sub.add_parser("classify", help="good monomials, ideals and the verdict")
    common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--ksize", type=int)
    p.set_defaults(func=cmd_classify)

    p = sub.add_parser("decide", help="decide stable co-tameness where possible")
    common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--ksize", type=int)
    p.set_defaults(func=cmd_decide)

    p = sub.add_parser("witness", help="compile a generator word for a target")
    common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--n", type=int)
    p.add_argument("--phi-inverse", dest="phi_inverse")
    p.add_argument("--target", required=True)
    p.add_argument("--ksize", type=int)
    p.add_argument("--max-degree", type=int, default=4)
    p.set_defaults(func=cmd_witness)

    p = sub.add_parser("verify", help="re-check a word against a target exactly")
    common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--phi-inverse", dest="phi_inverse")
    p.add_argument("--target", required=True)
    p.add_argument("--word", required=True)
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("theta", help="the swap-conjugate family, exactly")
    common(p, ring_required=True)
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--analyze", action="store_true")
    p.add_argument("--max-terms", type=int, default=2_000_000)
    p.set_defaults(func=cmd_theta)

    p = sub.add_parser("reduce", help="pass to a quotient of the coefficient ring")
    common(p)
    p.add_argument("--phi", required=True)
    p.add_argument("--ideal", required=True, help="comma-separated generators")
    p.set_defaults(func=cmd_reduce)

    p = sub.add_parser("ngg-check", help="does the map avoid good monomials?")
    common(p)
    p.add_argument("--phi", required=True)
    p.set_defaults(func=cmd_ngg_check)

    return parser


def run(argv):
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except PolynomialSyntaxError as exc:
        sys.stdout.write(
            emit_report(
                {
                    "status": "error",
                    "command": args.command,
                    "payload": {"error": str(exc), "position": exc.position},
                    "diagnostics": [],
                },
                args.format,
            )
        )
        return ERROR
    except (CotameError, ValueError, OSError, KeyError) as exc:
        sys.stdout.write(
            emit_report(
                {
                    "status": "error",
                    "command": args.command,
                    "payload": {"error": str(exc)},
                    "diagnostics": [],
                },
                args.format,
            )
        )
        return ERROR


def main():
    sys.exit(run(sys.argv[1:]))


if __name__ == "__main__":
    main()
