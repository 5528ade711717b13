"""Command-line front end.

Subcommands: buchstab, dhr, bound, optimize, tuple-check, normalize, scan.
Text output prints 6 significant digits (buchstab: 17); JSON prints 17.
Exit codes: 0 success, 1 computation error, 2 usage error.
"""

from __future__ import annotations

import argparse
import sys

from . import buchstab as _buchstab
from . import dhr as _dhr
from . import tuples as _tuples
from .bound import BoundParams, compute_bound, optimize_bound
from .dde import DEFAULT_STEP
from .errors import SievekitError


def _fmt6(x: float) -> str:
    return format(float(x), ".6g")


def _fmt17(x: float) -> str:
    return format(float(x), ".17g")


def _json_value(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return _fmt17(v)
    if isinstance(v, int):
        return str(v)
    if isinstance(v, str):
        import json

        return json.dumps(v)
    if isinstance(v, (list, tuple)):
        return "[" + ", ".join(_json_value(x) for x in v) + "]"
    raise TypeError(f"cannot serialize {type(v)}")


def emit_json(obj: dict) -> str:
    parts = [f'"{k}": {_json_value(v)}' for k, v in obj.items()]
    return "{" + ", ".join(parts) + "}"


def _parse_range(text: str) -> tuple[float, float]:
    parts = text.split(":")
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(
            f"range must look like 'lo:hi', got {text!r}"
        )
    try:
        lo, hi = float(parts[0]), float(parts[1])
    except ValueError as exc:
        raise argparse.ArgumentTypeError(str(exc)) from None
    return lo, hi


def _parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(
        prog="sievekit",
        description="Sieve special functions and weighted almost-prime bounds",
    )
    sub = ap.add_subparsers(dest="command", required=True)

    def common(p, step=True):
        p.add_argument("--cache-dir", default=None,
                       help="table cache directory (default ./.sievekit-cache "
                            "or $SIEVEKIT_CACHE)")
        if step:
            p.add_argument("--step", type=float, default=DEFAULT_STEP,
                           help="grid step for the DDE tables (default 2^-10)")
        p.add_argument("--json", action="store_true", help="emit JSON")

    p = sub.add_parser("buchstab", help="evaluate the Buchstab function w(u)")
    p.add_argument("--u", type=float, required=True)
    common(p)

    p = sub.add_parser("dhr", help="evaluate the sieve pair F_k/f_k or beta_k")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--u", type=float, default=None)
    p.add_argument("--which", choices=["F", "f", "beta"], default="F")
    common(p)

    p = sub.add_parser("bound", help="evaluate the weighted bound N(u,v;k)")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--u", type=float, required=True)
    p.add_argument("--v", type=float, required=True)
    p.add_argument("--old", action="store_true",
                   help="lead the text report with the unmixed comparison value")
    common(p)

    p = sub.add_parser("optimize", help="search (u,v) for the smallest bound")
    p.add_argument("--k", type=int, required=True)
    p.add_argument("--u-range", type=_parse_range, required=True,
                   metavar="LO:HI")
    p.add_argument("--v-range", type=_parse_range, required=True,
                   metavar="LO:HI")
    p.add_argument("--grid", type=int, default=64,
                   help="grid density per axis (default 64)")
    p.add_argument("--old", action="store_true",
                   help="minimize the unmixed comparison value instead")
    p.add_argument("--jobs", type=int, default=1,
                   help="parallel worker processes (default 1)")
    common(p)

    p = sub.add_parser("tuple-check", help="decide admissibility of a tuple")
    p.add_argument("--tuple", required=True, dest="tuple_text",
                   metavar="FORMS", help='e.g. "x,x+2,x+6"')
    common(p, step=False)

    p = sub.add_parser("normalize", help="normalize a tuple to the standard form")
    p.add_argument("--tuple", required=True, dest="tuple_text", metavar="FORMS")
    common(p, step=False)

    p = sub.add_parser("scan", help="empirical sifted scan S(tau; N, z)")
    p.add_argument("--tuple", required=True, dest="tuple_text", metavar="FORMS")
    p.add_argument("--N", type=int, required=True)
    p.add_argument("--z", type=int, required=True)
    p.add_argument("--tau", type=float, required=True)
    p.add_argument("--jobs", type=int, default=1)
    p.add_argument("--csv", action="store_true", help="emit CSV (one witness per row)")
    common(p, step=False)

    return ap


def _report_lines(rep, lead_old: bool) -> list[str]:
    d = rep.to_dict()
    head = (f"k = {d['k']}  u = {_fmt6(d['u'])}  v = {_fmt6(d['v'])}")
    body = [
        f"I1 = {_fmt6(d['I1'])}",
        f"I2 = {_fmt6(d['I2'])}",
        f"S4_term = {_fmt6(d['S4_term'])}",
        f"N = {_fmt6(d['N'])}",
        f"old = {_fmt6(d['old'])}",
        f"r = {d['r']}",
        f"err_estimate = {_fmt6(d['err_estimate'])}",
        f"borderline = {'true' if d['borderline'] else 'false'}",
    ]
    if lead_old:
        body.insert(0, f"old (unmixed comparison) = {_fmt6(d['old'])}")
    return [head] + body


def _dispatch(args) -> int:
    cmd = args.command

    if cmd == "buchstab":
        val = _buchstab.buchstab_w(args.u, step=args.step,
                                   cache_dir=args.cache_dir)
        if args.json:
            print(emit_json({"u": float(args.u), "w": val}))
        else:
            print(_fmt17(val))
        return 0

    if cmd == "dhr":
        if args.which == "beta":
            val = _dhr.sifting_limit(args.k, step=args.step,
                                     cache_dir=args.cache_dir)
        else:
            if args.u is None:
                print("error: --u is required with --which F|f", file=sys.stderr)
                return 2
            pair = _dhr.calibrate(args.k, step=args.step,
                                  cache_dir=args.cache_dir)
            val = pair.F(args.u) if args.which == "F" else pair.f(args.u)
        if args.json:
            out = {"k": args.k, "which": args.which, "value": val}
            if args.u is not None:
                out["u"] = float(args.u)
            print(emit_json(out))
        else:
            print(_fmt6(val))
        return 0

    if cmd == "bound":
        rep = compute_bound(BoundParams(args.k, args.u, args.v),
                            step=args.step, cache_dir=args.cache_dir)
        if args.json:
            print(emit_json(rep.to_dict()))
        else:
            print("\n".join(_report_lines(rep, args.old)))
        return 0

    if cmd == "optimize":
        rep = optimize_bound(
            args.k, args.u_range, args.v_range, args.grid,
            objective="old" if args.old else "mixed",
            jobs=args.jobs, step=args.step, cache_dir=args.cache_dir,
        )
        if args.json:
            print(emit_json(rep.to_dict()))
        else:
            lines = _report_lines(rep, args.old)
            lines.insert(0, "best point:")
            print("\n".join(lines))
        return 0

    if cmd == "tuple-check":
        t = _tuples.parse_tuple(args.tuple_text)
        ok = _tuples.is_admissible(t)
        if args.json:
            print(emit_json({"tuple": str(t), "admissible": ok}))
        else:
            print(f"admissible: {'true' if ok else 'false'}")
        return 0

    if cmd == "normalize":
        t = _tuples.parse_tuple(args.tuple_text)
        t2, A, B = _tuples.normalize(t)
        if args.json:
            print(emit_json({"tuple": str(t2), "A": A, "B": B}))
        else:
            print(f"{t2} (A={A}, B={B})")
        return 0

    if cmd == "scan":
        t = _tuples.parse_tuple(args.tuple_text)
        rep = _tuples.scan_S(t, args.N, args.z, args.tau, jobs=args.jobs)
        if args.json and args.csv:
            print("error: choose one of --json/--csv", file=sys.stderr)
            return 2
        if args.json:
            print(emit_json(rep.to_dict()))
        elif args.csv:
            print("N,z,tau,S,survivors,witness_n,witness_omega")
            prefix = (f"{rep.N},{rep.z},{_fmt17(rep.tau)},{_fmt17(rep.S_value)},"
                      f"{rep.survivor_count}")
            if rep.witnesses:
                for n, omega in rep.witnesses:
                    print(f"{prefix},{n},{omega}")
            else:
                print(f"{prefix},,")
        else:
            print(f"N = {rep.N}  z = {rep.z}  tau = {_fmt6(rep.tau)}")
            print(f"S = {_fmt6(rep.S_value)}")
            print(f"survivors = {rep.survivor_count}")
            print(f"witnesses = {len(rep.witnesses)}")
        return 0

    raise AssertionError(f"unhandled command {cmd}")


def main(argv=None) -> int:
    try:
        args = _parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return _dispatch(args)
    except SievekitError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
