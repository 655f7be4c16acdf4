"""Command-line front end.

Every command prints one RunReport (canonical JSON) on standard output.
Exit codes: 0 success, 1 searched and not found / violated, 2 input error,
3 inconclusive because a budget or desk-scale cap was hit.
"""

from __future__ import annotations

import argparse
import contextlib
import io as _io
import os
import sys
import time
from fractions import Fraction
from functools import partial
from typing import Any, Sequence

from . import __version__
from .bounds import HypothesisError, kung_check, kungrel_check, verify_projection_instance
from .core import Matroid, MatroidError, direct_sum, uniform
from .geometry import GeometryTag, ag, pg
from .instances import fano_projection_instance, subgeometry_witness
from .io import (FormatError, certificate_from_json, dumps, load_json, load_matroid,
                 matroid_to_json, minor_to_json, run_report)
from .search import (DEFAULT_BUDGET, DeskScaleExceeded, MinorWitness, RestrictionWitness,
                     SearchBudgetExceeded, find_pg_minor, find_restriction, has_u2_minor,
                     is_representable, verify_minor_witness)
from .structure import (DensityThreshold, build_stack_greedy, is_weakly_round,
                        max_stack_height, probe, verify_roundness_witness, verify_stack)
from .suite import DEFAULT_SEED, run_suite

EXIT_OK, EXIT_ABSENT, EXIT_INPUT, EXIT_INCONCLUSIVE = 0, 1, 2, 3


class CommandError(Exception):
    def __init__(self, reason: str, message: str, code: int = EXIT_INPUT):
        super().__init__(message)
        self.reason = reason
        self.code = code


def _int_set(text: str) -> list[int]:
    text = text.strip()
    if not text:
        return []
    try:
        return sorted({int(x) for x in text.split(",")})
    except ValueError as exc:
        raise argparse.ArgumentTypeError(f"expected comma-separated integers, got {text!r}") from exc


def _fraction(text: str) -> Fraction:
    try:
        value = Fraction(text)
    except (ValueError, ZeroDivisionError) as exc:
        raise argparse.ArgumentTypeError(f"expected a rational number, got {text!r}") from exc
    return value


def _load(args) -> tuple[Matroid, str]:
    M, dig = load_matroid(args.file)
    args._digest = dig
    return M, dig


def _target(spec: str) -> tuple[Matroid, str]:
    if os.path.exists(spec):
        T, _ = load_matroid(spec)
        return T, spec
    try:
        tag = GeometryTag.parse(spec)
    except ValueError as exc:
        raise CommandError("bad-target", f"target {spec!r} is neither a file nor pg:m:q / ag:m:q") from exc
    return tag.build(), str(tag)


# ---------------------------------------------------------------------------
# subcommands; each returns (results, exit code)
# ---------------------------------------------------------------------------

def cmd_gen(args) -> tuple[Any, int]:
    if args.family == "pg":
        M = pg(args.rank, args.q)
    elif args.family == "ag":
        M = ag(args.rank, args.q)
    elif args.family == "uniform":
        if args.n is None:
            raise CommandError("missing-argument", "gen uniform needs --n")
        M = uniform(args.rank, args.n)
    else:
        if len(args.files) != 2:
            raise CommandError("missing-argument", "gen sum needs two matroid files")
        A, _ = load_matroid(args.files[0])
        B, _ = load_matroid(args.files[1])
        M = direct_sum(A, B)
    doc = matroid_to_json(M)
    if args.output:
        with open(args.output, "w", encoding="utf-8") as fh:
            fh.write(dumps(doc))
        return {"written": args.output, "n": M.n, "rank": M.r}, EXIT_OK
    return doc, EXIT_OK


def cmd_density(args) -> tuple[Any, int]:
    M, _ = _load(args)
    rep = kung_check(M, args.ell, q=args.q, verify_membership=args.membership)
    out: dict[str, Any] = {"density": rep.to_json()}
    ok = rep.holds
    if args.contract is not None:
        chk = kungrel_check(M, args.contract, args.ell)
        out["contraction"] = chk.to_json()
        ok &= chk.holds or chk.spanning
    if args.projection_flat is not None:
        if args.q is None:
            raise CommandError("missing-argument", "--projection-flat needs --q")
        if args.pg_map is not None:
            R = RestrictionWitness(tuple(args.pg_map), f"pg:{M.r}:{args.q}")
        else:
            try:
                R = subgeometry_witness(M, args.q)
            except (AttributeError, KeyError, ValueError) as exc:
                raise CommandError("R-not-pg", "no full subgeometry found; pass --pg-map") from exc
        try:
            pc = verify_projection_instance(M, R, args.projection_flat, args.q)
        except HypothesisError as exc:
            raise CommandError(exc.reason, str(exc)) from exc
        out["projection"] = pc.to_json()
        ok &= pc.holds
    return out, EXIT_OK if ok else EXIT_ABSENT


def cmd_find(args) -> tuple[Any, int]:
    M, _ = _load(args)
    try:
        if args.kind == "restriction":
            if not args.target:
                raise CommandError("missing-argument", "find restriction needs --target")
            T, name = _target(args.target)
            w = find_restriction(M, T, budget=args.budget, target_name=name)
            if w is None:
                return {"found": False, "target": name}, EXIT_ABSENT
            mw = MinorWitness((), (), w)
            return {"found": True, "target": name, "witness": minor_to_json(mw),
                    "verified": verify_minor_witness(M, T, mw)}, EXIT_OK
        if args.kind == "u2-minor":
            mw = has_u2_minor(M, args.m)
            if mw is None:
                return {"found": False, "m": args.m}, EXIT_ABSENT
            return {"found": True, "m": args.m, "witness": minor_to_json(mw),
                    "verified": verify_minor_witness(M, uniform(2, args.m), mw)}, EXIT_OK
        if args.q is None or args.rank is None:
            raise CommandError("missing-argument", "find pg-minor needs --rank and --q")
        mw = find_pg_minor(M, args.rank, args.q, budget=args.budget)
        if mw is None:
            return {"found": False, "rank": args.rank, "q": args.q}, EXIT_ABSENT
        return {"found": True, "rank": args.rank, "q": args.q, "witness": minor_to_json(mw),
                "verified": verify_minor_witness(M, pg(args.rank, args.q), mw)}, EXIT_OK
    except SearchBudgetExceeded as exc:
        return {"found": None, "inconclusive": "budget", "nodes": exc.nodes}, EXIT_INCONCLUSIVE
    except ValueError as exc:
        if isinstance(exc, (FormatError, DeskScaleExceeded)):
            raise
        raise CommandError("bad-arguments", str(exc)) from exc


def cmd_representable(args) -> tuple[Any, int]:
    M, _ = _load(args)
    try:
        rep = is_representable(M, args.q, args.t, budget=args.budget)
    except SearchBudgetExceeded as exc:
        return {"representable": None, "inconclusive": "budget", "nodes": exc.nodes}, EXIT_INCONCLUSIVE
    except DeskScaleExceeded as exc:
        raise CommandError("desk-scale-exceeded", str(exc)) from exc
    except ValueError as exc:
        raise CommandError("bad-arguments", str(exc)) from exc
    return rep.to_json(), EXIT_OK if rep else EXIT_ABSENT


def cmd_stack(args) -> tuple[Any, int]:
    M, _ = _load(args)
    if args.action == "verify":
        if not args.cert:
            raise CommandError("missing-argument", "stack verify needs --cert")
        doc, _ = load_json(args.cert)
        cert = certificate_from_json(doc)
        try:
            v = verify_stack(M, cert)
        except (IndexError, MatroidError) as exc:
            raise CommandError("bad-certificate", str(exc)) from exc
        code = {"valid": EXIT_OK, "invalid": EXIT_ABSENT}.get(v.status, EXIT_INCONCLUSIVE)
        return {"certificate": cert.to_json(), "verdict": v.to_json()}, code
    if args.q is None or args.t is None:
        raise CommandError("missing-argument", "stack build needs --q and --t")
    if args.exhaustive:
        s = max_stack_height(M, args.q, t=args.t, budget=args.budget)
        cert = s.certificate
        out = {"mode": "exhaustive", "height": s.height, "certificate": cert.to_json(),
               "incomplete": s.incomplete}
        incomplete = s.incomplete
    else:
        cert = build_stack_greedy(M, args.q, args.t, budget=args.budget)
        out = {"mode": "greedy", "height": cert.height, "certificate": cert.to_json(),
               "incomplete": cert.incomplete}
        incomplete = cert.incomplete
    out["verdict"] = verify_stack(M, cert).to_json()
    return out, EXIT_INCONCLUSIVE if incomplete else EXIT_OK


def cmd_weakround(args) -> tuple[Any, int]:
    M, _ = _load(args)
    w = is_weakly_round(M)
    return {"witness": w.to_json(), "verified": verify_roundness_witness(M, w)}, EXIT_OK


def cmd_probe(args) -> tuple[Any, int]:
    M, _ = _load(args)
    try:
        DensityThreshold(args.beta, args.q)
        rep = probe(M, args.q, args.t, args.beta, n=args.n, h=args.h, f0=args.f0,
                    alpha=args.alpha, budget=args.budget)
    except ValueError as exc:
        raise CommandError("bad-arguments", str(exc)) from exc
    return rep.to_json(), EXIT_INCONCLUSIVE if rep.branch == "inconclusive" else EXIT_OK


def cmd_verify_suite(args) -> tuple[Any, int]:
    ids = args.only if args.only else None
    if ids and any(i not in range(1, 11) for i in ids):
        raise CommandError("bad-arguments", "criteria are numbered 1..10")
    results = run_suite(ids, seed=args.seed, quick=args.quick, threads=args.threads)
    doc = {"criteria": [r.to_json(timing=args.timing) for r in results],
           "passed": all(r.passed for r in results)}
    return doc, EXIT_OK if doc["passed"] else EXIT_ABSENT


# ---------------------------------------------------------------------------
# parser
# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="densematroid", allow_abbrev=False,
                                description="Matroid density workbench.")
    p.add_argument("--threads", type=int, default=1,
                   help="worker threads (output does not depend on it)")
    p.add_argument("--timing", action="store_true",
                   help="include wall-clock timing (makes reports non-reproducible)")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    # no prefix matching: "--t" must not resolve to "--threads" or "--timing"
    sub = p.add_subparsers(dest="command", required=True,
                           parser_class=partial(argparse.ArgumentParser, allow_abbrev=False))

    def with_file(sp):
        sp.add_argument("file", help="matroid JSON file")
        return sp

    def with_budget(sp):
        sp.add_argument("--budget", type=int, default=DEFAULT_BUDGET,
                        help="search node budget")
        return sp

    g = sub.add_parser("gen", help="write a matroid file")
    g.add_argument("family", choices=["pg", "ag", "uniform", "sum"])
    g.add_argument("files", nargs="*", help="two matroid files (sum only)")
    g.add_argument("--rank", type=int, default=3)
    g.add_argument("--q", type=int, default=2)
    g.add_argument("--n", type=int)
    g.add_argument("-o", "--output")
    g.set_defaults(func=cmd_gen)

    d = with_file(sub.add_parser("density", help="Kung and contraction density checks"))
    d.add_argument("--ell", type=int, required=True)
    d.add_argument("--q", type=int)
    d.add_argument("--membership", action="store_true",
                   help="first verify there is no U_{2,ell+2}-minor")
    d.add_argument("--contract", type=_int_set)
    d.add_argument("--projection-flat", type=_int_set)
    d.add_argument("--pg-map", type=lambda s: [int(x) for x in s.split(",")])
    d.set_defaults(func=cmd_density)

    f = sub.add_parser("find", help="restriction and minor searches")
    f.add_argument("kind", choices=["restriction", "u2-minor", "pg-minor"])
    with_budget(with_file(f))
    f.add_argument("--target", help="pg:m:q, ag:m:q or a matroid file")
    f.add_argument("--m", type=int, default=4, help="line length for u2-minor")
    f.add_argument("--rank", type=int)
    f.add_argument("--q", type=int)
    f.set_defaults(func=cmd_find)

    r = with_budget(with_file(sub.add_parser("representable", help="GF(q)-representability")))
    r.add_argument("--q", type=int, required=True)
    r.add_argument("--t", type=int)
    r.set_defaults(func=cmd_representable)

    s = with_budget(sub.add_parser("stack", help="build or verify stack certificates"))
    s.add_argument("action", choices=["build", "verify"])
    s.add_argument("file", help="matroid JSON file")
    s.add_argument("--q", type=int)
    s.add_argument("--t", type=int)
    s.add_argument("--cert")
    s.add_argument("--exhaustive", action="store_true")
    s.set_defaults(func=cmd_stack)

    w = with_file(sub.add_parser("weakround", help="decide weak roundness"))
    w.set_defaults(func=cmd_weakround)

    pr = with_budget(with_file(sub.add_parser("probe", help="stack / majority / affine case split")))
    pr.add_argument("--q", type=int, required=True)
    pr.add_argument("--t", type=int, required=True)
    pr.add_argument("--beta", type=_fraction, required=True)
    pr.add_argument("--n", type=int, default=3, help="rank of the affine target")
    pr.add_argument("--h", type=int, default=1, help="stack height for the stack branch")
    pr.add_argument("--f0", type=_int_set)
    pr.add_argument("--alpha", type=_fraction)
    pr.set_defaults(func=cmd_probe)

    v = sub.add_parser("verify-suite", help="run the acceptance criteria")
    v.add_argument("--seed", type=int, default=DEFAULT_SEED)
    v.add_argument("--quick", action="store_true")
    v.add_argument("--only", type=_int_set)
    v.set_defaults(func=cmd_verify_suite)
    return p


def _echo(args) -> dict:
    skip = {"func", "threads", "timing", "_digest"}
    return {k: (str(v) if isinstance(v, Fraction) else v)
            for k, v in sorted(vars(args).items()) if k not in skip}


def main(argv: Sequence[str] | None = None, out=None) -> int:
    out = sys.stdout if out is None else out
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.threads < 1:
        parser.error("--threads must be >= 1")
    args._digest = None
    t0 = time.perf_counter()
    try:
        results, code = args.func(args)
    except CommandError as exc:
        results, code = {"error": {"reason": exc.reason, "message": str(exc)}}, exc.code
    except FormatError as exc:
        results, code = {"error": {"reason": exc.reason, "message": str(exc)}}, EXIT_INPUT
    except DeskScaleExceeded as exc:
        results, code = {"error": {"reason": "desk-scale-exceeded", "message": str(exc)}}, EXIT_INPUT
    except SearchBudgetExceeded as exc:
        results, code = {"inconclusive": "budget", "nodes": exc.nodes}, EXIT_INCONCLUSIVE
    except (MatroidError, IndexError) as exc:
        results, code = {"error": {"reason": "bad-input", "message": str(exc)}}, EXIT_INPUT
    if args.command == "gen" and code == EXIT_OK and not args.output:
        out.write(dumps(results))
        return code
    seed = args.seed if args.command == "verify-suite" else None
    timing = time.perf_counter() - t0 if args.timing else None
    report = run_report(_echo(args), args._digest, results, __version__, seed, timing)
    out.write(dumps(report))
    return code


def run_captured(argv: Sequence[str]) -> tuple[int, str]:
    """Run the CLI in-process; returns (exit code, stdout text)."""
    buf = _io.StringIO()
    with contextlib.redirect_stderr(_io.StringIO()):
        try:
            code = main(list(argv), out=buf)
        except SystemExit as exc:
            code = int(exc.code or 0)
    return code, buf.getvalue()


def determinism_commands(tmp: str) -> list[list[str]]:
    """One invocation of every subcommand, on files written into ``tmp``."""
    f7 = os.path.join(tmp, "pg32.json")
    u24 = os.path.join(tmp, "u24.json")
    s = os.path.join(tmp, "sum.json")
    cert = os.path.join(tmp, "cert.json")
    fano4 = os.path.join(tmp, "fano_gf4.json")
    run_captured(["gen", "pg", "--rank", "3", "--q", "2", "-o", f7])
    run_captured(["gen", "uniform", "--rank", "2", "--n", "4", "-o", u24])
    run_captured(["gen", "sum", u24, u24, "-o", s])
    with open(cert, "w", encoding="utf-8") as fh:
        fh.write(dumps({"q": 2, "t": 2, "layers": [[0, 1, 2, 3], [4, 5, 6, 7]]}))
    with open(fano4, "w", encoding="utf-8") as fh:
        fh.write(dumps(matroid_to_json(fano_projection_instance().M)))
    return [
        ["gen", "pg", "--rank", "3", "--q", "2"],
        ["gen", "ag", "--rank", "3", "--q", "3"],
        ["gen", "uniform", "--rank", "2", "--n", "5"],
        ["gen", "sum", u24, f7],
        ["density", "--ell", "2", "--contract", "0", f7],
        ["density", "--ell", "3", "--membership", u24],
        ["density", "--ell", "4", "--q", "2", "--projection-flat", "7", fano4],
        ["find", "restriction", "--target", "ag:3:2", f7],
        ["find", "restriction", "--target", u24, s],
        ["find", "u2-minor", "--m", "4", s],
        ["find", "pg-minor", "--rank", "2", "--q", "2", f7],
        ["representable", "--q", "2", u24],
        ["representable", "--q", "3", u24],
        ["stack", "build", "--q", "2", "--t", "2", s],
        ["stack", "build", "--q", "2", "--t", "2", "--exhaustive", s],
        ["stack", "verify", "--cert", cert, s],
        ["weakround", s],
        ["weakround", f7],
        ["probe", "--q", "2", "--t", "2", "--beta", "1/4", f7],
        ["verify-suite", "--quick", "--only", "1,9"],
    ]


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
