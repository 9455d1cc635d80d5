"""Command-line entry point: hallscatter <command> [options].

Every command prints (and optionally writes) one JSON document carrying the
schema version, tool version, seed and a hash of the canonical config.
Exit codes: 0 ok, 1 verification failure, 2 invalid input, 3 computational
precondition not met, 4 internal error.
"""
from __future__ import annotations

import argparse
import hashlib
import json
import random
import sys
from fractions import Fraction
from typing import Optional, Sequence

from . import __version__
from .quiver import A2, A3, KRONECKER, QuiverError, QuiverSpec, load_quiver

SCHEMA_VERSION = 1

EXIT_OK = 0
EXIT_FAILED = 1
EXIT_VALIDATION = 2
EXIT_PRECONDITION = 3
EXIT_INTERNAL = 4

BUILTIN_QUIVERS = {"a2": A2, "a3": A3, "kronecker": KRONECKER}


class UsageError(ValueError):
    pass


# -- argument parsing helpers ------------------------------------------------


def resolve_quiver(name: str) -> QuiverSpec:
    if name.lower() in BUILTIN_QUIVERS:
        return BUILTIN_QUIVERS[name.lower()]
    try:
        return load_quiver(name)
    except OSError as exc:
        raise UsageError(f"cannot read quiver file {name!r}: {exc.strerror}") from exc


def parse_rational_vector(text: str, length: Optional[int] = None) -> tuple:
    try:
        vals = tuple(Fraction(x.strip()) for x in text.split(",") if x.strip())
    except (ValueError, ZeroDivisionError) as exc:
        raise UsageError(f"bad rational vector {text!r}") from exc
    if length is not None and len(vals) != length:
        raise UsageError(f"expected {length} coordinates, got {len(vals)} in {text!r}")
    return vals


def parse_int_vector(text: str, length: int) -> tuple:
    try:
        vals = tuple(int(x) for x in text.split(",") if x.strip())
    except ValueError as exc:
        raise UsageError(f"bad integer vector {text!r}") from exc
    if len(vals) != length:
        raise UsageError(f"expected {length} entries, got {len(vals)} in {text!r}")
    return vals


def parse_lambda(text: str, rank: int) -> tuple:
    """'n;m' with comma-separated integer vectors, e.g. '0,0;1,-1'."""
    parts = text.split(";")
    if len(parts) != 2:
        raise UsageError("--lambda must look like 'n1,...,nr;m1,...,mr'")
    n = parse_int_vector(parts[0], rank)
    m = parse_int_vector(parts[1], rank)
    if not any(n) and not any(m):
        raise UsageError("--lambda must be nonzero")
    return n + m


def parse_primes(text: Optional[str]) -> Optional[list[int]]:
    if not text:
        return None
    try:
        ps = [int(x) for x in text.split(",") if x.strip()]
    except ValueError as exc:
        raise UsageError(f"bad prime list {text!r}") from exc
    if len(set(ps)) != len(ps):
        raise UsageError("primes must be distinct")
    for p in ps:
        if p < 2 or any(p % d == 0 for d in range(2, int(p**0.5) + 1)):
            raise UsageError(f"{p} is not prime")
    return sorted(ps)


def _frac_list(v) -> list[str]:
    return [str(Fraction(x)) for x in v]


# -- commands ----------------------------------------------------------------


def _quantum_setup(args):
    from .scatter import build_initial_quantum

    q = resolve_quiver(args.quiver)
    return q, build_initial_quantum(q, args.order)


def _completed(args, d_in):
    from .scatter import pipeline

    return pipeline(d_in, seed=args.seed, scheme=args.scheme)


def cmd_scatter(args) -> dict:
    from .scatter import ScatterError, diagram_to_json, rank2_direct

    if args.coeff == "hall":
        raise ScatterError("Hall-coefficient completion is not supported; use --coeff quantum")
    q, d = _quantum_setup(args)
    if args.method == "rank2":
        specialized = rank2_direct(d, seed=args.seed)
        full = None
    else:
        full, specialized = _completed(args, d)
    out = {"quiver": json.loads(q.to_json()), "diagram": diagram_to_json(specialized, include_tags=False)}
    if full is not None:
        out["completed_walls"] = len(full.walls)
        if args.include_completed:
            out["completed"] = diagram_to_json(full)
    if args.emit_svg:
        if q.vertex_count != 2:
            raise UsageError("--emit-svg supports rank-2 quivers only")
        with open(args.emit_svg, "w", encoding="utf-8") as fh:
            fh.write(diagram_svg(specialized))
    return out


def cmd_tropical(args) -> dict:
    from .scatter import asymptotic_tagged, wall_function_at
    from .tropical import disks_at, disks_to_json, n_theta

    q, d = _quantum_setup(args)
    theta = parse_rational_vector(args.theta, q.vertex_count)
    full, specialized = _completed(args, d)
    asym = asymptotic_tagged(full)
    items = disks_at(full, theta, asym)
    value = n_theta(full, theta, asym=asym)
    expected = wall_function_at(specialized, theta)
    return {
        "theta": _frac_list(theta),
        "disks": disks_to_json(items),
        "n_theta": value.to_json(),
        "wall_function": expected.to_json(),
        "agree": value == expected,
    }


def _theta_context(args):
    """(diagram, action, rank) for the chosen coefficient module."""
    from .theta import HallAction, PrincipalLattice, QuantumAction, hall_first_order_diagram

    q = resolve_quiver(args.quiver)
    if args.coeff == "hall":
        from .hall import HallAlgebra, HallPrincipal

        hall = HallAlgebra(q, order=args.order, primes=args.primes, threads=args.threads)
        return hall_first_order_diagram(hall), HallAction(HallPrincipal(hall, args.sign)), q.vertex_count
    _, d = _quantum_setup(args)
    _, specialized = _completed(args, d)
    return specialized, QuantumAction(PrincipalLattice(d.b), args.order), q.vertex_count


def cmd_theta(args) -> dict:
    from .theta import enumerate_broken_lines, theta_with_retry

    d, action, r = _theta_context(args)
    lam = parse_lambda(args.lam, r)
    endpoint = parse_rational_vector(args.endpoint, r)
    value, used = theta_with_retry(d, action, lam, endpoint, seed=args.seed)
    lines = enumerate_broken_lines(d, action, lam, used)
    return {
        "lambda": list(lam),
        "endpoint": _frac_list(endpoint),
        "endpoint_used": _frac_list(used),
        "theta": action.to_json(value),
        "broken_lines": [L.to_json(action) for L in lines],
    }


def cmd_cps_check(args) -> dict:
    from .scatter import random_general_points
    from .theta import cps_check

    d, action, r = _theta_context(args)
    lam = parse_lambda(args.lam, r)
    rng = random.Random(args.seed)
    if args.q1 and args.q2:
        q1 = parse_rational_vector(args.q1, r)
        q2 = parse_rational_vector(args.q2, r)
    else:
        q1, q2 = (tuple(x / 50 for x in p) for p in random_general_points(r, rng, 2))
    rep = cps_check(d, action, lam, q1, q2, seed=args.seed)
    return {
        "lambda": list(lam),
        "q1": _frac_list(rep["q1"]),
        "q2": _frac_list(rep["q2"]),
        "holds": rep["holds"],
        "residual": action.to_json(rep["residual"]),
        "theta1": action.to_json(rep["theta1"]),
        "theta2": action.to_json(rep["theta2"]),
    }


def cmd_counterexample(args) -> dict:
    from .theta import counterexample_driver

    signs = {"standard": [1], "flipped": [-1], "both": [1, -1]}[args.convention]
    out = {}
    for s in signs:
        rep = counterexample_driver(sign=s, primes=args.primes)
        out[rep["convention"]] = rep
    return out


def cmd_verify(args) -> dict:
    from .verify import SUITES, run_all

    names = list(SUITES) if args.suite == "all" else [args.suite]
    if any(n not in SUITES for n in names):
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(SUITES)} or all")
    results = run_all(names, primes=args.primes)
    for r in results:
        # wall-clock times would break byte-identical reruns
        r.pop("seconds", None)
    return {"suites": results, "passed": all(r["passed"] for r in results)}


COMMANDS = {
    "scatter": cmd_scatter,
    "tropical": cmd_tropical,
    "theta": cmd_theta,
    "cps-check": cmd_cps_check,
    "counterexample": cmd_counterexample,
    "verify": cmd_verify,
}


# -- svg ---------------------------------------------------------------------


def _segment_in_box(poly, radius: Fraction):
    """Endpoints of a 1-dimensional support clipped to the square [-radius, radius]^2."""
    sol = poly.parametrize()
    if sol is None or len(sol[1]) != 1:
        return None
    x0, (u,) = sol
    lo, hi = -radius * 4, radius * 4
    cons = list(poly.ineqs) + [((1, 0), radius), ((-1, 0), radius), ((0, 1), radius), ((0, -1), radius)]
    for a, b in cons:
        au = sum(Fraction(p) * q for p, q in zip(a, u))
        ax = sum(Fraction(p) * q for p, q in zip(a, x0))
        if au == 0:
            if ax > b:
                return None
            continue
        bound = (Fraction(b) - ax) / au
        if au > 0:
            hi = min(hi, bound)
        else:
            lo = max(lo, bound)
    if lo >= hi:
        return None
    return [tuple(p + t * q for p, q in zip(x0, u)) for t in (lo, hi)]


def diagram_svg(d, size: int = 400, radius: Fraction = Fraction(2)) -> str:
    half = size / 2
    scale = half / float(radius)

    def px(p):
        return f"{half + float(p[0]) * scale:.2f}", f"{half - float(p[1]) * scale:.2f}"

    parts = [
        f'<svg xmlns="http://www.w3.org/2000/svg" width="{size}" height="{size}" viewBox="0 0 {size} {size}">',
        f'<rect width="{size}" height="{size}" fill="white"/>',
    ]
    for w in d.walls:
        seg = _segment_in_box(w.support, radius)
        if seg is None:
            continue
        (x1, y1), (x2, y2) = px(seg[0]), px(seg[1])
        label = ",".join(str(x) for x in w.normal)
        parts.append(
            f'<line x1="{x1}" y1="{y1}" x2="{x2}" y2="{y2}" stroke="black" stroke-width="1.5">'
            f"<title>wall {w.id} normal ({label})</title></line>"
        )
        lx, ly = px(seg[1])
        parts.append(f'<text x="{lx}" y="{ly}" font-size="11" fill="#444">({label})</text>')
    parts.append("</svg>")
    return "\n".join(parts) + "\n"


# -- driver ------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="hallscatter", description="Scattering diagrams, tropical disks and broken lines.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--primes", help="comma-separated primes for Hall counting (default: first 14)")
    common.add_argument("--threads", type=int, default=1, help="worker cap for Hall counting")
    common.add_argument("--seed", type=int, default=0, help="perturbation and sampling seed")
    common.add_argument("--emit", help="also write the JSON document to this path")

    diagram = argparse.ArgumentParser(add_help=False)
    diagram.add_argument("--quiver", default="a2", help="a2, a3, kronecker or a quiver JSON path")
    diagram.add_argument("--order", type=int, default=4, help="truncation order K >= 1")
    diagram.add_argument("--scheme", choices=["copy", "subset"], default="copy", help="perturbation tagging scheme")

    sub = p.add_subparsers(dest="command", required=True)
    s = sub.add_parser("scatter", parents=[common, diagram], help="complete a scattering diagram")
    s.add_argument("--coeff", choices=["quantum", "hall"], default="quantum")
    s.add_argument("--method", choices=["pipeline", "rank2"], default="pipeline")
    s.add_argument("--emit-svg", help="write a rank-2 picture of the diagram")
    s.add_argument("--include-completed", action="store_true", help="also dump the completed perturbed diagram")

    t = sub.add_parser("tropical", parents=[common, diagram], help="tropical disks ending at a point")
    t.add_argument("--theta", required=True, help="comma-separated rational point")

    for name, help_text in (("theta", "theta function from broken lines"), ("cps-check", "endpoint transport check")):
        x = sub.add_parser(name, parents=[common, diagram], help=help_text)
        x.add_argument("--coeff", choices=["quantum", "hall"], default="quantum")
        x.add_argument("--lambda", dest="lam", required=True, help="'n;m', e.g. '0,0;1,-1'")
        x.add_argument("--sign", type=int, choices=[1, -1], default=1, help="Hall pairing convention")
        if name == "theta":
            x.add_argument("--endpoint", required=True, help="comma-separated rational point")
        else:
            x.add_argument("--q1", help="first endpoint (random when omitted)")
            x.add_argument("--q2", help="second endpoint (random when omitted)")

    c = sub.add_parser("counterexample", parents=[common], help="A3 Hall broken line report")
    c.add_argument("--convention", choices=["standard", "flipped", "both"], default="both")

    v = sub.add_parser("verify", parents=[common], help="run acceptance suites")
    v.add_argument("--suite", default="all", help="suite name or 'all'")
    return p


def _config(args) -> dict:
    cfg = {k: v for k, v in sorted(vars(args).items()) if k not in ("emit", "emit_svg", "threads")}
    return json.loads(json.dumps(cfg, default=str))


def run(argv: Sequence[str]) -> tuple[int, str]:
    """Execute one command; returns (exit code, JSON text)."""
    from .hall import HallError
    from .scatter import ScatterError
    from .theta import ThetaError
    from .tropical import TropicalError

    parser = build_parser()
    try:
        args = parser.parse_args(list(argv))
    except SystemExit as exc:
        code = exc.code if isinstance(exc.code, int) else EXIT_VALIDATION
        return code, ""
    try:
        args.primes = parse_primes(args.primes)
        if hasattr(args, "order") and args.order < 1:
            raise UsageError("--order must be at least 1")
        if args.threads < 1:
            raise UsageError("--threads must be at least 1")
        result = COMMANDS[args.command](args)
        code = EXIT_OK
        if args.command == "verify" and not result["passed"]:
            code = EXIT_FAILED
    except (UsageError, QuiverError) as exc:
        return EXIT_VALIDATION, _error_doc("validation", exc)
    except (ScatterError, HallError, TropicalError, ThetaError) as exc:
        return EXIT_PRECONDITION, _error_doc(type(exc).__name__, exc)
    except Exception as exc:  # noqa: BLE001
        return EXIT_INTERNAL, _error_doc("internal", exc)
    cfg = _config(args)
    doc = {
        "schema_version": SCHEMA_VERSION,
        "tool_version": __version__,
        "command": args.command,
        "seed": args.seed,
        "config": cfg,
        "config_hash": hashlib.sha256(json.dumps(cfg, sort_keys=True).encode()).hexdigest(),
        "result": result,
    }
    text = json.dumps(doc, sort_keys=True, indent=2, default=str) + "\n"
    if args.emit:
        with open(args.emit, "w", encoding="utf-8") as fh:
            fh.write(text)
    return code, text


def _error_doc(kind: str, exc: Exception) -> str:
    return json.dumps({"error": kind, "message": str(exc), "schema_version": SCHEMA_VERSION}, sort_keys=True) + "\n"


def main(argv: Optional[Sequence[str]] = None) -> int:
    code, text = run(sys.argv[1:] if argv is None else argv)
    if text:
        stream = sys.stdout if code in (EXIT_OK, EXIT_FAILED) else sys.stderr
        stream.write(text)
    return code


if __name__ == "__main__":
    sys.exit(main())
