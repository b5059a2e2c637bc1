"""Command-line front end.

Every subcommand runs in-process by default.  With ``--server URL`` the
analysis and simulation subcommands are forwarded to a running service
instead and print the same output.
"""

from __future__ import annotations

import argparse
import os
import sys
from dataclasses import replace
from pathlib import Path

from . import __version__, commands
from .ensembles import CodebookTooLarge
from .harness import ConfigError, ExperimentConfig

SEED_ENV = "COLLUFP_SEED"
EXIT_OK, EXIT_USAGE, EXIT_RUNTIME = 0, 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(EXIT_USAGE, f"{self.prog}: error: {message}\n")


def _int0(text: str) -> int:
    return int(text, 0)


def build_parser() -> argparse.ArgumentParser:
    p = _Parser(prog="collufp", description="Fingerprinting code experiments.")
    p.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    p.add_argument("--server", metavar="URL", help="forward the request to a running service")
    sub = p.add_subparsers(dest="command", required=True, parser_class=_Parser)

    s = sub.add_parser("simulate", help="run a Monte Carlo experiment file")
    s.add_argument("config", type=Path)
    s.add_argument("--out", type=Path, help="CSV destination (default: stdout)")
    s.add_argument("--seed", type=_int0, help=f"master seed (overrides ${SEED_ENV})")
    s.add_argument("--jobs", type=int, default=1, help="worker processes")
    s.add_argument("--fixed-codebook", action="store_true",
                   help="reuse one codebook instance for every trial")

    a = sub.add_parser("analyze", help="evaluate a closed-form quantity")
    a.add_argument("quantity", choices=commands.QUANTITIES)
    a.add_argument("--p", type=float, help="binary entropy argument")
    a.add_argument("--pmf", help="comma-separated distribution for entropy")
    a.add_argument("--rate", type=float)
    a.add_argument("--t", type=int, help="coalition size")
    a.add_argument("--l", type=int, help="parity checks")
    a.add_argument("--e", type=int, help="erased positions")
    a.add_argument("--digits", type=int, default=4, help="significant digits")

    sp = sub.add_parser("spectrum", help="distance spectrum of one codebook")
    sp.add_argument("--ensemble", choices=["iid", "linear", "coset"], default="iid")
    sp.add_argument("--n", type=int, required=True)
    sp.add_argument("--M", type=int)
    sp.add_argument("--l", type=int)
    sp.add_argument("--seed", type=_int0, default=0)

    r = sub.add_parser("ranktable", help="rank counts of small binary matrices")
    r.add_argument("lmax", type=int)

    sv = sub.add_parser("serve", help="start the HTTP service")
    sv.add_argument("--host", default="127.0.0.1")
    sv.add_argument("--port", type=int, default=8000)
    return p


def _resolve_seed(flag: int | None) -> int | None:
    if flag is not None:
        return flag
    env = os.environ.get(SEED_ENV)
    if env is None or not env.strip():
        return None
    try:
        return int(env, 0)
    except ValueError:
        raise UsageError(f"${SEED_ENV} is not an integer: {env!r}") from None


def _post(server: str, path: str, body: dict) -> dict:
    import httpx

    resp = httpx.post(server.rstrip("/") + path, json=body, timeout=None)
    if resp.status_code == 422:
        raise UsageError(resp.json().get("detail"))
    resp.raise_for_status()
    return resp.json()


def cmd_simulate(args, out) -> int:
    seed = _resolve_seed(args.seed)
    if args.jobs < 1:
        raise UsageError("--jobs must be at least 1")
    text = args.config.read_text()
    if args.server:
        body = {"config": text, "seed": seed, "fixed_codebook": args.fixed_codebook}
        csv_text = _post(args.server, "/simulate", body)["csv"]
    else:
        cfg = ExperimentConfig.parse(text)
        if seed is not None:
            cfg = replace(cfg, seed=seed)
        if args.fixed_codebook:
            cfg = replace(cfg, fixed_codebook=True)
        csv_text = commands.simulate(cfg, jobs=args.jobs).to_csv()
    if args.out:
        args.out.write_text(csv_text)
    else:
        out.write(csv_text)
    return EXIT_OK


def cmd_analyze(args, out) -> int:
    params = {k: getattr(args, k) for k in ("p", "rate", "t", "l", "e")}
    if args.pmf:
        try:
            params["pmf"] = [float(v) for v in args.pmf.split(",")]
        except ValueError:
            raise UsageError(f"bad --pmf {args.pmf!r}") from None
    params = {k: v for k, v in params.items() if v is not None}
    if args.server:
        value = _post(args.server, "/analyze", {"quantity": args.quantity, **params})["value"]
    else:
        try:
            value = commands.analyze(args.quantity, **params)
        except ValueError as exc:
            raise UsageError(str(exc)) from None
    print(commands.format_value(value, args.digits), file=out)
    return EXIT_OK


def cmd_spectrum(args, out) -> int:
    if args.server:
        body = {"ensemble": args.ensemble, "n": args.n, "M": args.M, "l": args.l,
                "seed": args.seed}
        data = _post(args.server, "/spectrum", body)
        M, rate, rows = data["M"], data["rate"], [tuple(r.values()) for r in data["rows"]]
    else:
        try:
            est, spec_rows = commands.spectrum(args.ensemble, args.n, args.seed, M=args.M, l=args.l)
        except CodebookTooLarge:
            raise
        except ValueError as exc:
            raise UsageError(str(exc)) from None
        M, rate = est.M, est.rate
        rows = [(r.d, r.pairs, r.exponent, r.predicted) for r in spec_rows]
    print(f"# n={args.n} M={M} rate={rate:.6f}", file=out)
    print("d,pairs,exponent,predicted", file=out)
    for d, pairs, emp, pred in rows:
        emp_s = "" if emp is None else f"{emp:.6f}"
        print(f"{d},{pairs},{emp_s},{pred:.6f}", file=out)
    return EXIT_OK


def cmd_ranktable(args, out) -> int:
    if args.lmax < 1:
        raise UsageError("lmax must be positive")
    if args.server:
        data = _post(args.server, "/ranktable", {"lmax": args.lmax})
        rows = [(r["l"], r["m"], r["k"], int(r["count"]), r["brute"]) for r in data["rows"]]
        ok = data["oracle_ok"]
    else:
        table, ok = commands.rank_table(args.lmax)
        rows = [(r.l, r.m, r.k, r.count, r.brute) for r in table]
    print("l,m,k,count,brute", file=out)
    for l, m, k, c, b in rows:
        print(f"{l},{m},{k},{c},{'' if b is None else b}", file=out)
    print(f"# oracle: {'ok' if ok else 'MISMATCH'}", file=out)
    return EXIT_OK if ok else EXIT_RUNTIME


def cmd_serve(args, out) -> int:
    import uvicorn

    uvicorn.run("collufp.service:app", host=args.host, port=args.port)
    return EXIT_OK


COMMANDS = {
    "simulate": cmd_simulate,
    "analyze": cmd_analyze,
    "spectrum": cmd_spectrum,
    "ranktable": cmd_ranktable,
    "serve": cmd_serve,
}


def main(argv=None, out=None) -> int:
    out = out or sys.stdout
    try:
        args = build_parser().parse_args(argv)
    except SystemExit as exc:
        return int(exc.code or 0)
    try:
        return COMMANDS[args.command](args, out)
    except (UsageError, ConfigError) as exc:
        print(f"collufp: error: {exc}", file=sys.stderr)
        return EXIT_USAGE
    except (OSError, CodebookTooLarge, RuntimeError, ArithmeticError) as exc:
        print(f"collufp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME
    except Exception as exc:  # httpx errors and anything unexpected
        print(f"collufp: {type(exc).__name__}: {exc}", file=sys.stderr)
        return EXIT_RUNTIME


def main_exit() -> None:
    sys.exit(main())


if __name__ == "__main__":
    main_exit()
