"""Command-line interface: ``hypsurf <command> [options]``.

Exit status is 0 on success, 1 when a verification fails or a computation
raises a domain error, and 2 on usage errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import math
import os
import sys
from typing import List, Optional, Sequence

from . import __version__

ANCHORS = ("on-core", "collar-boundary", "basepoint")
THREADS_ENV = "HYPSURF_THREADS"


class UsageError(Exception):
    pass


def _limit_threads() -> None:
    n = os.environ.get(THREADS_ENV)
    if n:
        for var in ("OMP_NUM_THREADS", "OPENBLAS_NUM_THREADS", "MKL_NUM_THREADS"):
            os.environ.setdefault(var, n)


# ---------------------------------------------------------------------------
# argument parsing

def _floats(text: str) -> List[float]:
    try:
        return [float(x) for x in text.split(",") if x.strip()]
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected comma-separated numbers, got {text!r}") from None


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="hypsurf", description="Hyperbolic surface computations.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")

    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--seed", type=int, default=0, help="master seed (default 0)")
    common.add_argument("--out", help="write output to this file instead of stdout")
    common.add_argument("--format", choices=("json", "csv"), default="json")

    surf = argparse.ArgumentParser(add_help=False)
    src = surf.add_mutually_exclusive_group()
    src.add_argument("--builtin", choices=("bolza", "doubled_pants"))
    src.add_argument("--surface-file", help="surface JSON as written by `surface`")
    surf.add_argument("--params", type=_floats, default=None, help="parameters of the builtin, e.g. 0.5,6,6")

    point = argparse.ArgumentParser(add_help=False)
    point.add_argument("--point", required=True,
                       help="x,y in the upper half-plane or one of: " + ", ".join(ANCHORS))
    point.add_argument("--curve", help="named curve used by the on-core/collar-boundary anchors")

    sub = parser.add_subparsers(dest="command", required=True)
    sub.add_parser("surface", parents=[common, surf], help="genus, systole and collar table")
    sub.add_parser("inj", parents=[common, surf, point], help="injectivity radius at a point")
    p_loop = sub.add_parser("loop", parents=[common, surf, point], help="shortest loop and inj profile")
    p_loop.add_argument("--profile", type=int, default=65, help="number of profile samples")
    p_riera = sub.add_parser("riera", parents=[common, surf], help="truncated Riera sum for a curve")
    p_riera.add_argument("--curve", required=True, help="curve name or comma-separated generator word")
    p_riera.add_argument("--cutoff", type=int, default=12, help="word cutoff (tube radius cutoff/2)")
    sub.add_parser("constants", parents=[common], help="ledger of named constants")
    p_ver = sub.add_parser("verify", parents=[common], help="run verification suites")
    p_ver.add_argument("--suite", required=True, help="suite id or 'all'")
    p_ver.add_argument("--trials", type=int, default=None)
    p_ver.add_argument("--n-mc", type=int, default=None, help="Monte-Carlo samples per integral")
    p_ver.add_argument("--surfaces", action="append", default=None,
                       help="NAME[:params] to override the suite's surfaces (repeatable)")
    return parser


# ---------------------------------------------------------------------------
# helpers

def _load_surface(args):
    from . import fuchsian

    if getattr(args, "surface_file", None):
        if args.params is not None:
            raise UsageError("--params only applies to --builtin")
        with open(args.surface_file) as fh:
            obj = json.load(fh)
        return fuchsian.from_json(obj.get("surface", obj))
    if not getattr(args, "builtin", None):
        raise UsageError("give a surface with --builtin or --surface-file")
    try:
        return fuchsian.builtin(args.builtin, args.params or ())
    except ValueError as exc:
        raise UsageError(str(exc)) from None


def _pick_curve(G, name: Optional[str]):
    from . import hplane

    if name:
        if name not in G.curves:
            raise UsageError(f"unknown curve {name!r}; known: {', '.join(sorted(G.curves))}")
        return name, G.curve(name)
    if not G.curves:
        raise UsageError("surface has no named curves; use x,y coordinates")
    best = min(sorted(G.curves), key=lambda n: hplane.translation_length(G.curve(n)))
    return best, G.curve(best)


def _resolve_point(G, text: str, curve: Optional[str]):
    from . import collar, hplane, loops

    if text == "basepoint":
        return G.basepoint, {"anchor": text}
    if text in ("on-core", "collar-boundary"):
        name, g = _pick_curve(G, curve)
        L = hplane.translation_length(g)
        offset = 0.0 if text == "on-core" else collar.half_width(L)
        return loops.point_on_geodesic(G, g, 0.0, offset), {"anchor": text, "curve": name,
                                                             "core_distance": offset}
    try:
        x, y = (float(v) for v in text.split(","))
        return hplane.HPoint(x, y), {}
    except ValueError:
        raise UsageError(f"--point must be x,y with y > 0 or one of {', '.join(ANCHORS)}") from None


def _parse_word(G, text: str):
    if text in G.curves:
        return text, tuple(G.curves[text])
    try:
        word = tuple(int(v) for v in text.split(","))
    except ValueError:
        raise UsageError(f"--curve must be a curve name or a comma-separated word, got {text!r}") from None
    n = len(G.generators)
    if not word or any(w == 0 or abs(w) > n for w in word):
        raise UsageError(f"word letters must be nonzero integers with |letter| <= {n}")
    return text, word


def _envelope(args, payload: dict) -> dict:
    return {"version": __version__, "seed": args.seed, "command": args.command, **payload}


def _csv(rows: Sequence[dict], args) -> str:
    buf = io.StringIO()
    buf.write(f"# hypsurf {__version__} command={args.command} seed={args.seed}\n")
    if rows:
        writer = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
    return buf.getvalue()


# ---------------------------------------------------------------------------
# commands; each returns (json payload, csv rows, exit code)

def _cmd_surface(args):
    from . import collar, fuchsian, hplane

    G = _load_surface(args)
    sys_len, g = fuchsian.systole(G)
    table = []
    for name in sorted(G.curves):
        L = hplane.translation_length(G.curve(name))
        table.append({"curve": name, "word": " ".join(map(str, G.curves[name])), "length": L,
                      "half_width": collar.half_width(L), "boundary_length": collar.collar_boundary_length(L),
                      "short": collar.in_regime(L)})
    payload = {"genus": G.genus, "area": G.area, "systole": sys_len, "systole_word": list(g.word),
               "domain_radius": G.domain_radius, "diameter_bound": G.diameter_bound,
               "sides": len(G.side_pairings), "collars": table, "surface": G.to_json()}
    return payload, table, 0


def _cmd_inj(args):
    from . import loops

    G = _load_surface(args)
    p, anchor = _resolve_point(G, args.point, args.curve)
    inj, loop = loops.injectivity_radius(G, p)
    payload = {"point": [p.x, p.y], **anchor, "inj": inj, "loop": loop.to_json()}
    row = {"x": p.x, "y": p.y, "inj": inj, "loop_word": " ".join(map(str, loop.element.word))}
    return payload, [row], 0


def _cmd_loop(args):
    from . import loops

    G = _load_surface(args)
    p, anchor = _resolve_point(G, args.point, args.curve)
    inj, loop = loops.injectivity_radius(G, p)
    prof = loops.inj_profile(G, loop, args.profile)
    payload = {"point": [p.x, p.y], **anchor, "inj": inj, "loop": loop.to_json(),
               "profile": prof.to_json(), "profile_min": prof.minimum, "profile_max": prof.maximum}
    return payload, prof.to_json(), 0


def _cmd_riera(args):
    from . import riera

    G = _load_surface(args)
    label, word = _parse_word(G, args.curve)
    ev = riera.gradient_norm_sq(G, word, args.cutoff)
    payload = {"curve": label, "word": list(word), **ev.to_json()}
    return payload, [ev.to_json()], 0


def _cmd_constants(args):
    from . import constants

    rows = []
    for c in constants.ledger():
        j = c.to_json()
        rows.append({"id": j["id"], "value": j["value"], "display": j["display"] or "",
                     "nearest_rounding": j["nearest_rounding"] or "", "consistent": j["consistent"],
                     "flagged": j["flagged"], "closed_form": j["closed_form"], "citation": j["location"]})
    rows.append({"id": "MAX_INJ(g=2)", "value": str(float(constants.max_inj(2))), "display": "ln 6",
                 "nearest_rounding": "", "consistent": True, "flagged": False,
                 "closed_form": "ln(4g-2)", "citation": "upper bound for inj on a closed surface"})
    lip = constants.verify_lipschitz_arithmetic()
    ok = all(r["consistent"] for r in rows)
    return {"constants": rows, "lipschitz_check": lip.to_json()}, rows, 0 if ok else 1


def _parse_surface_spec(text: str):
    name, _, params = text.partition(":")
    return name, tuple(_floats(params)) if params else ()


def _cmd_verify(args):
    from . import verify

    kw = {"seed": args.seed}
    if args.trials is not None:
        kw["trials"] = args.trials
    if args.n_mc is not None:
        kw["n_mc"] = args.n_mc
    if args.surfaces:
        kw["surfaces"] = tuple(_parse_surface_spec(s) for s in args.surfaces)
    try:
        cfg = verify.SuiteConfig(**kw)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    if args.suite == "all":
        if args.trials is not None or args.surfaces:
            raise UsageError("--trials/--surfaces apply to a single suite")
        reports = verify.run_all(cfg)
    elif args.suite in verify.SUITES:
        reports = {args.suite: verify.run_suite(args.suite, cfg)}
    else:
        raise UsageError(f"unknown suite {args.suite!r}; choose from {', '.join(verify.SUITES)} or all")
    payload = {"suites": {k: r.to_json() for k, r in reports.items()},
               "passed": all(r.passed for r in reports.values())}
    rows = [{"suite_id": k, "trials": r.trials, "failures": r.failures, "skipped": r.skipped,
             "worst_margin": r.worst_margin, "passed": r.passed} for k, r in reports.items()]
    return payload, rows, 0 if payload["passed"] else 1


COMMANDS = {"surface": _cmd_surface, "inj": _cmd_inj, "loop": _cmd_loop, "riera": _cmd_riera,
            "constants": _cmd_constants, "verify": _cmd_verify}


def run(argv: Optional[Sequence[str]] = None) -> int:
    _limit_threads()
    parser = _build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    from .errors import HyperbolicError

    try:
        payload, rows, code = COMMANDS[args.command](args)
    except UsageError as exc:
        parser.print_usage(sys.stderr)
        print(f"hypsurf {args.command}: error: {exc}", file=sys.stderr)
        return 2
    except (HyperbolicError, ValueError) as exc:
        print(f"hypsurf {args.command}: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1
    if args.format == "csv":
        text = _csv(rows, args)
    else:
        from .verify import dumps
        text = dumps(_envelope(args, payload)) + "\n"
    if args.out:
        with open(args.out, "w") as fh:
            fh.write(text)
    else:
        sys.stdout.write(text)
    return code


def main() -> None:
    sys.exit(run())


if __name__ == "__main__":
    main()
