"""Command line front end: build, verify and classify, emitting versioned reports.

Exit status: 0 success, 1 invalid configuration, 2 guard rail exceeded,
3 a claim check failed (the report names the claim).
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import logging
import math
import sys
import time

from . import equiv, mrd
from .errors import ClaimCheckError, GuardRailError
from .family import psi, require_admissible
from .gf import MAX_FIELD_BITS, admissible_h, is_prime, make_field_ctx
from .scatter import is_scattered, linear_set, max_size

SCHEMA = "scatterlab/1"
COMMANDS = ("scan", "mindist", "idealizers", "classify-codes", "classify-linsets", "adjoint-check", "aut-group", "field-info")

log = logging.getLogger("scatterlab")


class ConfigError(ValueError):
    pass


def build_parser() -> argparse.ArgumentParser:
    ap = argparse.ArgumentParser(prog="scatterlab", description=__doc__.splitlines()[0])
    sub = ap.add_subparsers(dest="command", required=True)
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--p", type=int, required=True, help="characteristic (odd prime for the psi family)")
    common.add_argument("--r", type=int, default=1, help="q = p^r")
    common.add_argument("--t", type=int, required=True, help="n = 2t")
    common.add_argument("--h", help="hex code of one admissible h (default: all)")
    common.add_argument("--jobs", type=int, default=1, help="worker count (work runs in-process)")
    common.add_argument("--format", choices=("json", "csv", "table"), default="json")
    common.add_argument("--max-enum", type=int, default=22, metavar="BITS", help="largest enumeration, as log2")
    common.add_argument("--no-timing", action="store_true", help="omit the timing section")
    common.add_argument("-v", "--verbose", action="store_true", help="progress on stderr")
    for name in COMMANDS:
        sp = sub.add_parser(name, parents=[common])
        if name == "scan":
            sp.add_argument("--method", choices=("fiber", "gamma", "both"), default="fiber")
        elif name == "mindist":
            sp.add_argument("--method", choices=("rank", "fiber"), default="rank")
        elif name == "idealizers":
            sp.add_argument("--method", choices=("linear", "scan"), default="linear")
        elif name in ("classify-codes", "classify-linsets"):
            sp.add_argument("--mode", choices=("auto", "criterion", "oracle"), default="auto")
    return ap


def validate(args):
    """Checks that need no field construction."""
    if args.p < 2 or not is_prime(args.p):
        raise ConfigError(f"--p {args.p} is not prime")
    if args.r < 1 or args.t < 1:
        raise ConfigError("--r and --t must be positive")
    if args.jobs < 1:
        raise ConfigError("--jobs must be positive")
    if not 1 <= args.max_enum <= MAX_FIELD_BITS:
        raise ConfigError(f"--max-enum must lie in [1, {MAX_FIELD_BITS}]")
    if args.h is not None:
        try:
            int(args.h, 16)
        except ValueError:
            raise ConfigError(f"--h {args.h!r} is not hexadecimal") from None
    needs_family = args.command not in ("field-info",)
    if needs_family and args.p == 2:
        raise ConfigError("the psi family needs odd q")
    if needs_family and args.t < 3:
        raise ConfigError("the psi family needs t >= 3")
    bits = 2 * args.t * args.r * math.log2(args.p)
    if args.command != "field-info" and bits > args.max_enum:
        raise GuardRailError(f"q^n = {args.p}^{2 * args.t * args.r} exceeds --max-enum 2^{args.max_enum}")


def _targets(ctx, args) -> list[int]:
    if args.h is None:
        return admissible_h(ctx)
    h = ctx.from_hex(args.h)
    require_admissible(ctx, h)
    return [h]


def _progress(label):
    def cb(done, total):
        log.info("%s %d/%d", label, done, total)

    return cb


# ---- commands: each returns (result, rows) ----------------------------------


def cmd_field_info(ctx, args):
    res = {"size": ctx.size, "primitive": ctx.to_hex(ctx.primitive), "tables": ctx.has_tables}
    if ctx.p != 2 and ctx.has_tables:
        res["admissible_count"] = len(admissible_h(ctx))
    return res, [res]


def cmd_scan(ctx, args):
    rows = []
    methods = ("fiber", "gamma") if args.method == "both" else (args.method,)
    hs = _targets(ctx, args)
    for i, h in enumerate(hs):
        f = psi(ctx, h)
        row = {"h": ctx.to_hex(h)}
        verdicts = [bool(is_scattered(f, m)) for m in methods]
        for m, v in zip(methods, verdicts):
            row[f"scattered_{m}"] = v
        if len(set(verdicts)) > 1:
            raise ClaimCheckError("both scatteredness tests agree", f"h={row['h']}")
        row["linset_size"] = len(linear_set(f))
        rows.append(row)
        log.info("scan %d/%d", i + 1, len(hs))
    res = {
        "admissible_count": len(hs),
        "all_scattered": all(all(r[f"scattered_{m}"] for m in methods) for r in rows),
        "max_linset_size": max_size(ctx),
        "rows": rows,
    }
    return res, rows


def cmd_mindist(ctx, args):
    rows = []
    hs = _targets(ctx, args)
    for i, h in enumerate(hs):
        code = mrd.code_from_scattered(psi(ctx, h), verify=False)
        d = mrd.min_distance(code, method=args.method, max_enum=1 << args.max_enum)
        rows.append({"h": ctx.to_hex(h), "min_distance": d, "is_mrd": mrd.is_mrd(code, d)})
        log.info("mindist %d/%d", i + 1, len(hs))
    res = {"method": args.method, "all_mrd": all(r["is_mrd"] for r in rows), "expected_distance": ctx.n - 1, "rows": rows}
    return res, rows


def cmd_idealizers(ctx, args):
    rows = []
    hs = _targets(ctx, args)
    fn = mrd.idealizer if args.method == "linear" else mrd.idealizer_scan
    for i, h in enumerate(hs):
        code = mrd.code_from_scattered(psi(ctx, h), verify=False)
        left, right = fn(code, "left"), fn(code, "right")
        rows.append(
            {
                "h": ctx.to_hex(h),
                "left_size": left.size,
                "left_field_degree": left.field_degree(),
                "right_size": right.size,
                "right_field_degree": right.field_degree(),
            }
        )
        log.info("idealizers %d/%d", i + 1, len(hs))
    return {"method": args.method, "rows": rows}, rows


def _mode(ctx, args):
    if args.mode != "auto":
        return args.mode
    return "criterion" if ctx.t > 4 else "oracle"


def cmd_classify_codes(ctx, args):
    rep = equiv.classify_codes(ctx, _mode(ctx, args), progress=_progress("classify-codes"))
    res = rep.to_json()
    rows = [{"class": i, "size": len(c), "members": " ".join(ctx.to_hex(h) for h in c)} for i, c in enumerate(rep.classes)]
    return res, rows


def cmd_classify_linsets(ctx, args):
    mode = _mode(ctx, args)
    codes = equiv.classify_codes(ctx, mode)
    rep = equiv.classify_linsets(ctx, mode, code_report=codes, progress=_progress("classify-linsets"))
    res = rep.to_json()
    rows = [{"class": i, "size": len(c), "members": " ".join(ctx.to_hex(h) for h in c)} for i, c in enumerate(rep.classes)]
    return res, rows


def cmd_adjoint_check(ctx, args):
    rows = []
    for h in _targets(ctx, args):
        g, w = equiv.adjoint_equiv_witness(ctx, h)
        rows.append({"h": ctx.to_hex(h), "verified": True, **{k: v for k, v in w.to_json(ctx).items()}})
    return {"all_verified": True, "rows": rows}, rows


def cmd_aut_group(ctx, args):
    hs = _targets(ctx, args)
    rep = equiv.aut_group(ctx, hs[0])
    res = rep.to_json()
    return res, [{"h": res["h"], "mode": res["mode"], "H_size": res["H_size"], "order": res["order"]}]


HANDLERS = {
    "field-info": cmd_field_info,
    "scan": cmd_scan,
    "mindist": cmd_mindist,
    "idealizers": cmd_idealizers,
    "classify-codes": cmd_classify_codes,
    "classify-linsets": cmd_classify_linsets,
    "adjoint-check": cmd_adjoint_check,
    "aut-group": cmd_aut_group,
}


# ---- output -------------------------------------------------------------------


def _config(args) -> dict:
    cfg = {"command": args.command, "p": args.p, "r": args.r, "t": args.t, "h": args.h, "max_enum_bits": args.max_enum}
    for extra in ("method", "mode"):
        if hasattr(args, extra):
            cfg[extra] = getattr(args, extra)
    return cfg


def render(report: dict, rows: list, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, sort_keys=True, indent=2) + "\n"
    if fmt == "csv":
        buf = io.StringIO()
        if rows:
            w = csv.DictWriter(buf, fieldnames=list(rows[0]), lineterminator="\n")
            w.writeheader()
            w.writerows(rows)
        return buf.getvalue()
    lines = []
    if rows:
        cols = list(rows[0])
        width = {c: max(len(c), *(len(str(r[c])) for r in rows)) for c in cols}
        lines.append("  ".join(c.ljust(width[c]) for c in cols))
        lines.extend("  ".join(str(r[c]).ljust(width[c]) for c in cols) for r in rows)
    for k, v in sorted(report.get("result", {}).items()):
        if not isinstance(v, (list, dict)):
            lines.append(f"{k}: {v}")
    return "\n".join(lines) + "\n"


def run(args, out=None) -> int:
    out = out or sys.stdout
    report = {"schema": SCHEMA, "config": _config(args)}
    rows: list = []
    status = 0
    t0 = time.perf_counter()
    try:
        validate(args)
        ctx = make_field_ctx(args.p, args.r, args.t)
        report["field"] = ctx.to_json()
        result, rows = HANDLERS[args.command](ctx, args)
        report["result"] = result
    except ClaimCheckError as exc:
        report["error"] = {"kind": "claim_check", "claim": exc.claim, "detail": exc.detail}
        status = 3
    except GuardRailError as exc:
        report["error"] = {"kind": "guard_rail", "detail": str(exc)}
        status = 2
    except ValueError as exc:
        report["error"] = {"kind": "invalid_config", "detail": str(exc)}
        status = 1
    if not args.no_timing:
        report["timing"] = {"seconds": round(time.perf_counter() - t0, 3)}
    if status:
        print(f"scatterlab: {report['error']['kind']}: {report['error'].get('claim', report['error']['detail'])}", file=sys.stderr)
        out.write(json.dumps(report, sort_keys=True, indent=2) + "\n")
    else:
        out.write(render(report, rows, args.format))
    return status


def main(argv=None) -> int:
    args = build_parser().parse_args(argv)
    handler = logging.StreamHandler(sys.stderr)
    handler.setFormatter(logging.Formatter("%(message)s"))
    log.handlers[:] = [handler]
    log.propagate = False
    log.setLevel(logging.INFO if args.verbose else logging.WARNING)
    return run(args)


if __name__ == "__main__":
    sys.exit(main())
