"""Command line front end: ``python -m phylolevel <command> [flags]``.

``--n`` is always a number of leaves; it is converted to the series index of
the class internally.  Exit status is 2 for bad flags and 1 when ``verify``
finds a mismatch.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

import mpmath

from . import asymptotics, classes, oracle, sampler
from .classes import NetworkClass
from .graph import to_dot, validate

SCHEMA_VERSION = 1
GALLERY = (
    (NetworkClass.UNROOTED1, 4),
    (NetworkClass.ROOTED1, 2),
    (NetworkClass.UNROOTED2, 3),
    (NetworkClass.ROOTED2, 2),
)


class UsageError(Exception):
    pass


def _class(name: str) -> NetworkClass:
    try:
        return NetworkClass.parse(name)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _parameter(name: str) -> asymptotics.Parameter:
    try:
        return asymptotics.Parameter.parse(name)
    except ValueError as e:
        raise argparse.ArgumentTypeError(str(e)) from None


def _classes(args) -> list[NetworkClass]:
    return [args.cls] if args.cls else list(NetworkClass)


def _index(cls: NetworkClass, leaves: int) -> int:
    n = cls.index(leaves)
    if n < 1 and not (n == 0 and leaves == 1):
        raise UsageError(f"{cls.value}: no series index for {leaves} leaves")
    return n


def _count_by_leaves(cls: NetworkClass, leaves: int) -> int:
    n = _index(cls, leaves)
    # an unrooted network needs at least two leaves
    return 0 if n == 0 else classes.count(cls, n)


def _csv(rows: list[dict], fields: list[str]) -> str:
    buf = io.StringIO()
    w = csv.DictWriter(buf, fieldnames=fields, lineterminator="\n")
    w.writeheader()
    w.writerows(rows)
    return buf.getvalue()


def _emit(args, text: str) -> None:
    if args.out and args.command not in ("gallery", "sample"):
        Path(args.out).write_text(text)
    else:
        sys.stdout.write(text)


def _json(obj) -> str:
    return json.dumps(obj, indent=2, sort_keys=False) + "\n"


# ---------------------------------------------------------------------------
# commands
# ---------------------------------------------------------------------------


def cmd_count(args) -> int:
    cls = args.cls or NetworkClass.ROOTED1
    value = _count_by_leaves(cls, args.n)
    if args.format == "json":
        _emit(args, _json({"schema": SCHEMA_VERSION, "class": cls.value, "n": cls.index(args.n), "leaves": args.n, "count": value}))
    elif args.format == "csv":
        _emit(args, _csv([{"class": cls.value, "n": cls.index(args.n), "leaves": args.n, "count": value}], ["class", "n", "leaves", "count"]))
    else:
        _emit(args, f"{value}\n")
    return 0


def table_rows(cls_list, max_leaves: int) -> list[dict]:
    rows = []
    for cls in cls_list:
        for leaves in range(1, max_leaves + 1):
            rows.append({"class": cls.value, "n": cls.index(leaves), "leaves": leaves, "count": _count_by_leaves(cls, leaves)})
    return rows


def cmd_table(args) -> int:
    max_leaves = args.order or args.n or 6
    rows = table_rows(_classes(args), max_leaves)
    if args.format == "json":
        _emit(args, _json({"schema": SCHEMA_VERSION, "rows": rows}))
    elif args.format == "csv":
        _emit(args, _csv(rows, ["class", "n", "leaves", "count"]))
    else:
        cl = _classes(args)
        head = "leaves " + " ".join(f"{c.letter:>12}" for c in cl)
        lines = [head]
        for leaves in range(1, max_leaves + 1):
            vals = [r["count"] for r in rows if r["leaves"] == leaves]
            lines.append(f"{leaves:>6} " + " ".join(f"{v:>12}" for v in vals))
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_refined(args) -> int:
    cls = args.cls or NetworkClass.ROOTED1
    if args.n is None:
        raise UsageError("refined needs --n")
    n = _index(cls, args.n)
    if n < 1:
        raise UsageError(f"{cls.value}: no networks on {args.n} leaf")
    table = classes.refined_counts(cls, n)
    rows = [
        {"class": cls.value, "n": n, "k": k, "m": m, "count": c}
        for (k, m), c in sorted(table.entries.items())
    ]
    if args.format == "json":
        _emit(args, _json({"schema": SCHEMA_VERSION, "leaves": args.n, "total": table.total, "rows": rows}))
    else:
        _emit(args, _csv(rows, ["class", "n", "k", "m", "count"]))
    return 0


def cmd_asym(args) -> int:
    out = []
    for cls in _classes(args):
        rep = asymptotics.asymptotic_constants(cls, args.precision_bits)
        out.append(rep.to_dict(args.digits))
    if args.format == "json":
        _emit(args, _json({"schema": SCHEMA_VERSION, "reports": out}))
    else:
        lines = [
            f"{d['class']}: tau={d['tau']} rho={d['rho']} c1={d['c1']} c2={d['c2']}" for d in out
        ]
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_moments(args) -> int:
    params = [args.parameter] if args.parameter else list(asymptotics.Parameter)
    out = []
    for cls in _classes(args):
        for p in params:
            out.append(asymptotics.drmota_moments(cls, p, args.precision_bits).to_dict(args.digits))
    if args.format == "json":
        _emit(args, _json({"schema": SCHEMA_VERSION, "reports": out}))
    else:
        lines = [
            f"{d['class']} {d['parameter']}: mu={d['mu']} sigma2={d['sigma2']} z0={d['z0']} C0={d['C0']}"
            for d in out
        ]
        _emit(args, "\n".join(lines) + "\n")
    return 0


def cmd_sample(args) -> int:
    cls = args.cls or NetworkClass.ROOTED1
    if args.n is None:
        raise UsageError("sample needs --n")
    n = _index(cls, args.n)
    if n < 1:
        raise UsageError(f"{cls.value}: no networks on {args.n} leaf")
    nets = sampler.sample_many(cls, n, args.count, args.seed)
    if args.format == "dot":
        if args.out:
            d = Path(args.out)
            d.mkdir(parents=True, exist_ok=True)
            for i, net in enumerate(nets):
                (d / f"{cls.value}_{args.n}leaves_seed{args.seed}_{i:05d}.dot").write_text(to_dot(net, f"S{i}"))
        else:
            sys.stdout.write("".join(to_dot(net, f"S{i}") for i, net in enumerate(nets)))
    else:
        text = "".join(json.dumps(net.to_json(), sort_keys=True) + "\n" for net in nets)
        if args.out:
            Path(args.out).write_text(text)
        else:
            sys.stdout.write(text)
    return 0


def cmd_gallery(args) -> int:
    out = Path(args.out or "gallery")
    out.mkdir(parents=True, exist_ok=True)
    jobs = [(c, l) for c, l in GALLERY if args.cls in (None, c)]
    if args.n is not None:
        jobs = [(c, args.n) for c, _ in jobs]
    written = 0
    for cls, leaves in jobs:
        n = _index(cls, leaves)
        nets = oracle.generate_all(cls, n) if n >= 1 else []
        for i, net in enumerate(nets, 1):
            name = f"{cls.value}_{leaves}leaves_{i:03d}"
            (out / f"{name}.dot").write_text(to_dot(net, name))
            written += 1
        sys.stdout.write(f"{cls.value}: {len(nets)} networks on {leaves} leaves\n")
    sys.stdout.write(f"wrote {written} DOT files to {out}\n")
    return 0


def verify_report(cls_list, large: bool = False) -> dict:
    checks = []

    def add(name, ok, detail=None):
        checks.append({"check": name, "ok": bool(ok), **({"detail": detail} if detail is not None else {})})

    for cls in cls_list:
        cap = oracle.DEFAULT_CAPS[cls] if not large else max(oracle.DEFAULT_CAPS[cls], oracle.LARGE_CAPS.get(cls, 0))
        rep = oracle.verify_counts(cls, cap, allow_large=large)
        bad = [r["n_index"] for r in rep["rows"] if not r["ok"]]
        add(f"{cls.value}: oracle n<={cap}", rep["ok"], {"mismatch_at": bad} if bad else None)
        bad = [n for n in range(1, 41) if classes.closed_count(cls, n) != classes.count(cls, n)]
        add(f"{cls.value}: closed form n<=40", not bad, {"mismatch_at": bad} if bad else None)
        bad = [n for n in range(1, 21) if classes.refined_counts(cls, n).total != classes.count(cls, n)]
        add(f"{cls.value}: refined marginals n<=20", not bad, {"mismatch_at": bad} if bad else None)
        table = sampler.preprocess(cls, 20)
        bad = [n for n in range(1, 21) if table.total(n) != classes.count(cls, n)]
        add(f"{cls.value}: sampler weights n<=20", not bad, {"mismatch_at": bad} if bad else None)
        rep = asymptotics.asymptotic_constants(cls)
        z0 = asymptotics.drmota_moments(cls, asymptotics.Parameter.BLOB_COUNT).z0
        with mpmath.workprec(256):
            gap = abs(z0 - rep.rho)
        add(f"{cls.value}: z0 equals rho", gap < mpmath.mpf(10) ** -20, mpmath.nstr(gap, 5))
    return {"schema": SCHEMA_VERSION, "checks": checks, "ok": all(c["ok"] for c in checks)}


def cmd_verify(args) -> int:
    rep = verify_report(_classes(args), args.large)
    if args.format == "json":
        _emit(args, _json(rep))
    else:
        lines = [f"{'PASS' if c['ok'] else 'FAIL'}  {c['check']}" for c in rep["checks"]]
        _emit(args, "\n".join(lines) + "\n")
    return 0 if rep["ok"] else 1


COMMANDS = {
    "count": cmd_count,
    "table": cmd_table,
    "refined": cmd_refined,
    "asym": cmd_asym,
    "moments": cmd_moments,
    "sample": cmd_sample,
    "gallery": cmd_gallery,
    "verify": cmd_verify,
}


def _positive(text: str) -> int:
    v = int(text)
    if v < 1:
        raise argparse.ArgumentTypeError("must be a positive integer")
    return v


def _bits(text: str) -> int:
    v = int(text)
    if v < 64:
        raise argparse.ArgumentTypeError("precision must be at least 64 bits")
    return v


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="phylolevel", description="Counting, analysis and sampling of level-1/level-2 phylogenetic networks.")
    sub = p.add_subparsers(dest="command", required=True)
    for name in COMMANDS:
        s = sub.add_parser(name)
        s.add_argument("--class", dest="cls", type=_class, help="unrooted1 | rooted1 | unrooted2 | rooted2")
        s.add_argument("--n", type=_positive, help="number of leaves")
        s.add_argument("--order", type=_positive, help="largest number of leaves for table")
        s.add_argument("--precision-bits", type=_bits, default=asymptotics.DEFAULT_PRECISION)
        s.add_argument("--digits", type=_positive, default=15, help="significant digits printed for reals")
        s.add_argument("--seed", type=int, default=0)
        s.add_argument("--count", type=_positive, default=1, help="number of samples")
        s.add_argument("--format", choices=("text", "json", "csv", "dot"), default="text")
        s.add_argument("--out", help="output file (directory for gallery and DOT samples)")
        if name == "moments":
            s.add_argument("--parameter", type=_parameter, help="blobs | edges")
        if name == "verify":
            s.add_argument("--large", action="store_true", help="raise the oracle cap for rooted2 to 4 leaves")
    return p


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command in ("count",) and args.n is None:
        parser.error("count needs --n")
    if args.format == "dot" and args.command != "sample":
        parser.error("--format dot applies to sample only")
    if args.format == "csv" and args.command in ("asym", "moments", "verify", "sample", "gallery"):
        parser.error(f"--format csv is not available for {args.command}")
    try:
        return COMMANDS[args.command](args)
    except UsageError as e:
        parser.error(str(e))
    except (oracle.ResourceError, ValueError) as e:
        parser.error(str(e))


if __name__ == "__main__":
    sys.exit(main())
