"""``efx`` command line.

Exit codes: 0 when the claim is certified or the check passes, 1 when it is
refuted (a witness is printed), 2 for usage or input errors.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
import time

from . import efx, instances, miner, prooflab, setfn, transform
from .numeric import decimal_str, format_value, parse_value
from .serialize import SchemaError, dumps_instance, instance_hash, load_instance
from .setfn import GroundSet, SizeLimitError

EXIT_OK, EXIT_REFUTED, EXIT_ERROR = 0, 1, 2

# below this many allocations a process pool costs more than it saves
PARALLEL_MIN_ALLOCATIONS = 50_000


class UsageError(Exception):
    pass


def exact(value) -> dict | None:
    if value is None:
        return None
    return {"exact": format_value(value), "decimal": decimal_str(value)}


def _workers(profile) -> int:
    if profile.n ** profile.m < PARALLEL_MIN_ALLOCATIONS:
        return 1
    return efx.default_workers()


def _alloc_json(X: efx.Allocation, ground: GroundSet) -> dict:
    return {"word": X.word(), "bundles": X.named(ground)}


def _instance_meta(inst) -> dict:
    return {"id": inst.id, "sha256": instance_hash(inst)}


# ---------------------------------------------------------------------------
# rendering

def _flatten(obj, prefix=""):
    if isinstance(obj, dict):
        for k, v in obj.items():
            yield from _flatten(v, f"{prefix}.{k}" if prefix else str(k))
    elif isinstance(obj, list) and any(isinstance(v, (dict, list)) for v in obj):
        for k, v in enumerate(obj):
            yield from _flatten(v, f"{prefix}[{k}]")
    else:
        yield prefix, obj


def _scalar(v) -> str:
    if isinstance(v, list):
        return "[" + ", ".join(_scalar(x) for x in v) + "]"
    if v is None:
        return "-"
    if isinstance(v, bool):
        return "yes" if v else "no"
    return str(v)


def render(report: dict, fmt: str) -> str:
    if fmt == "json":
        return json.dumps(report, indent=2, sort_keys=True) + "\n"
    rows = list(_flatten(report))
    if fmt == "csv":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["key", "value"])
        for key, value in rows:
            writer.writerow([key, _scalar(value)])
        return buf.getvalue()
    width = max((len(k) for k, _ in rows), default=0)
    return "".join(f"{k.ljust(width)}  {_scalar(v)}\n" for k, v in rows)


# ---------------------------------------------------------------------------
# commands

def cmd_build(args):
    dummies = [d for d in (args.dummies or "").split(",") if d]
    k = parse_value(args.k).to_fraction() if args.k is not None else None
    inst = instances.build(args.id, k=k, dummies=dummies)
    return EXIT_OK, dumps_instance(inst)


def _parse_allocation(text: str, profile) -> efx.Allocation:
    """Either an assignment word (``"012012"``) or bundles ``"h,l1|b1|b2,b3,l2"``."""
    if "|" in text:
        bundles = [[x for x in part.split(",") if x] for part in text.split("|")]
        if len(bundles) != profile.n:
            raise UsageError(f"allocation has {len(bundles)} bundles for {profile.n} agents")
        return efx.Allocation.from_bundles(profile.ground, bundles)
    word = tuple(int(c) for c in (text.split(",") if "," in text else text))
    if len(word) != profile.m or any(not 0 <= a < profile.n for a in word):
        raise UsageError(f"assignment word {text!r} does not fit {profile.n} agents x {profile.m} items")
    return efx.Allocation(word, profile.n)


def cmd_verify(args):
    inst = load_instance(args.instance)
    p = inst.profile
    alpha = parse_value(args.alpha)
    report = {"command": "verify", "instance": _instance_meta(inst), "alpha": exact(alpha)}
    if args.allocation:
        X = _parse_allocation(args.allocation, p)
        w = efx.is_alpha_efx(p, X, alpha)
        report.update(allocation=_alloc_json(X, p.ground), alpha_efx=w is None,
                      witness=None if w is None else w.to_json(p.ground))
        return (EXIT_OK if w is None else EXIT_REFUTED), report
    found = None
    checked = 0
    for X in efx.enumerate_allocations(p.n, p.ground):
        checked += 1
        if efx.is_alpha_efx(p, X, alpha) is None:
            found = X
            break
    report["allocations_checked"] = checked
    if found is not None:
        report.update(exists=True, allocation=_alloc_json(found, p.ground))
        return EXIT_OK, report
    first = efx.Allocation((0,) * p.m, p.n)
    report.update(exists=False,
                  example=_alloc_json(first, p.ground),
                  witness=efx.is_alpha_efx(p, first, alpha).to_json(p.ground))
    return EXIT_REFUTED, report


def cmd_threshold(args):
    inst = load_instance(args.instance)
    p = inst.profile
    result = efx.instance_threshold(p, workers=_workers(p), table=bool(args.table))
    claim = parse_value(args.claim) if args.claim else inst.claimed_bound
    report = {
        "command": "threshold",
        "instance": _instance_meta(inst),
        "alpha_star": exact(result.alpha_star),
        "finite": result.finite,
        "argmin": _alloc_json(result.argmin, p.ground),
        "witness": None if result.witness is None else result.witness.to_json(p.ground),
        "allocations": result.allocations,
        "claimed_bound": exact(claim),
        "certified": None if claim is None else result.certifies(claim),
        "elapsed_s": round(result.elapsed, 4),
    }
    if args.table:
        with open(args.table, "w", newline="") as fh:
            writer = csv.writer(fh)
            writer.writerow(["index", "word", "bundles", "critical_exact", "critical_decimal"])
            for X, crit in result.table:
                writer.writerow([X.index, X.word(), " | ".join(",".join(b) for b in X.named(p.ground)),
                                 format_value(crit), decimal_str(crit)])
    ok = claim is None or result.certifies(claim)
    return (EXIT_OK if ok else EXIT_REFUTED), report


CLASS_CHECKS = {
    "normalized": setfn.check_normalized,
    "monotone": setfn.check_monotone,
    "subadditive": setfn.check_subadditive,
    "submodular": setfn.check_submodular,
    "superadditive": setfn.check_superadditive,
}


def cmd_classes(args):
    inst = load_instance(args.instance)
    p = inst.profile
    required = [r for r in args.require.split(",") if r]
    unknown = set(required) - set(CLASS_CHECKS)
    if unknown:
        raise UsageError(f"unknown class names {sorted(unknown)}")
    agents = []
    summary = {}
    for i, f in enumerate(p.agents):
        row = {}
        for name, check in CLASS_CHECKS.items():
            rep = check(f)
            row[name] = rep.to_json(p.ground)
            summary[name] = summary.get(name, True) and rep.holds
        agents.append(row)
    report = {"command": "classes", "instance": _instance_meta(inst), "summary": summary,
              "required": required, "agents": agents}
    return (EXIT_OK if all(summary[r] for r in required) else EXIT_REFUTED), report


def cmd_compress(args):
    inst = load_instance(args.instance)
    profile = transform.rank_compress(inst.profile, level_bound=args.levels)
    L = args.levels or max(transform.rank_table(f).count for f in inst.profile.agents)
    out = instances.NamedInstance(
        id=f"{inst.id}-compressed" if inst.id else "compressed",
        profile=profile,
        provenance=f"rank compression of {inst.id or 'input'} with L={L}",
        claimed_bound=transform.compression_base(L),
    )
    return EXIT_OK, dumps_instance(out)


def cmd_separation(args):
    ordinal = load_instance(args.ordinal)
    cardinal = load_instance(args.cardinal)
    try:
        factor = transform.separation_factor(ordinal.profile, cardinal.profile)
    except transform.SeparationBrokenError as exc:
        return EXIT_REFUTED, {"command": "separation", "broken": True, "reason": str(exc)}
    return EXIT_OK, {
        "command": "separation",
        "ordinal": _instance_meta(ordinal),
        "cardinal": _instance_meta(cardinal),
        "factor": exact(factor),
        "separated": factor > 1,
    }


def cmd_prooflab(args):
    inst = load_instance(args.instance)
    p = inst.profile
    if args.case == "level-table":
        rep = prooflab.check_level_table(p)
        report = {
            "command": "prooflab", "case": "level-table", "instance": _instance_meta(inst),
            "passed": rep.passed,
            "images": [{str(lvl): [format_value(v) for v in vals] for lvl, vals in img.items()}
                       for img in rep.images],
            "gaps": [[format_value(g) for g in gaps] for gaps in rep.gaps],
            "min_gap": exact(rep.min_gap),
            "mismatches": rep.mismatches,
        }
        return (EXIT_OK if rep.passed else EXIT_REFUTED), report
    cases = prooflab.CASES if args.case == "all" else (args.case,)
    rows = {}
    passed = True
    for case in cases:
        rep = prooflab.check_case(p, case)
        passed &= rep.passed
        rows[case] = {
            "allocations": rep.count,
            "passed": rep.passed,
            "min_ratio": exact(rep.min_ratio),
            "failures": [X.word() for X in rep.failures],
        }
    report = {"command": "prooflab", "instance": _instance_meta(inst), "passed": passed, "cases": rows}
    return (EXIT_OK if passed else EXIT_REFUTED), report


def cmd_mine(args):
    base = load_instance(args.base).profile if args.base else None
    if base is None and args.generator == "perturb-instance":
        base = instances.build_four_level_ordinal().profile
    if base is not None:
        ground = base.ground
    else:
        ground = GroundSet(tuple(f"x{k + 1}" for k in range(args.items)))
    levels = args.levels
    if levels is None:
        levels = max(len(set(f.table[1:])) for f in base.agents) if base is not None else 3
    spec = miner.SearchSpec(
        n=args.n, ground=ground, levels=levels, generator=args.generator,
        seed=args.seed, budget=args.budget, base=base, max_flips=args.max_flips,
    )
    result = miner.mine(spec)
    obstructions = []
    for ob in result.obstructions:
        obstructions.append({
            "levels": [list(f.levels) for f in ob.profile.agents],
            "level_counts": list(ob.level_counts),
            "implied_bound": exact(ob.implied_bound),
            "certificate": [
                {"allocation": X.word(), "witness": w.to_json(ground)}
                for X, w in ob.certificate.certificate.items()
            ],
        })
    report = {
        "command": "mine",
        "generator": args.generator,
        "items": list(ground.items),
        "status": result.status,
        "refuted": result.refuted,
        "examined": result.examined,
        "obstructions": obstructions,
    }
    return EXIT_OK, report


# ---------------------------------------------------------------------------

def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--format", choices=("text", "json", "csv"), default="text")

    parser = argparse.ArgumentParser(prog="efx", description="Exact EFX counterexample toolkit for chores.")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("build", parents=[common], help="emit a built-in instance as JSON")
    p.add_argument("id", choices=sorted(instances.BUILDERS))
    p.add_argument("--k", help="penalty parameter for cs24 (rational > 2)")
    p.add_argument("--dummies", help="comma-separated names of extra zero-impact items")
    p.set_defaults(func=cmd_build)

    p = sub.add_parser("verify", parents=[common], help="alpha-EFX check of one or all allocations")
    p.add_argument("instance")
    p.add_argument("--alpha", required=True, help="e.g. 21/20 or 2^(1/3)")
    p.add_argument("--allocation", help="assignment word like 012012, or bundles like h,l1|b1|b2,b3,l2")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("threshold", parents=[common], help="exact instance threshold")
    p.add_argument("instance")
    p.add_argument("--table", help="write per-allocation critical ratios to this CSV file")
    p.add_argument("--claim", help="bound to certify (defaults to the instance's claimed_bound)")
    p.set_defaults(func=cmd_threshold)

    p = sub.add_parser("classes", parents=[common], help="exhaustive set-function class checks")
    p.add_argument("instance")
    p.add_argument("--require", default="normalized,monotone",
                   help="comma-separated classes that must hold for exit code 0")
    p.set_defaults(func=cmd_classes)

    p = sub.add_parser("compress", parents=[common], help="rank-compress an instance")
    p.add_argument("instance")
    p.add_argument("--levels", type=int)
    p.set_defaults(func=cmd_compress)

    p = sub.add_parser("separation", parents=[common], help="ordinal/cardinal separation factor")
    p.add_argument("ordinal")
    p.add_argument("cardinal")
    p.set_defaults(func=cmd_separation)

    p = sub.add_parser("prooflab", parents=[common], help="run a case family of the four-level argument")
    p.add_argument("case", choices=prooflab.CASES + ("all", "level-table"))
    p.add_argument("instance")
    p.set_defaults(func=cmd_prooflab)

    p = sub.add_parser("mine", parents=[common], help="search for ordinal obstructions")
    p.add_argument("--generator", choices=miner.GENERATORS, required=True)
    p.add_argument("--n", type=int, default=3)
    p.add_argument("--items", type=int, default=4)
    p.add_argument("--levels", type=int, help="level bound (default: the base profile's, else 3)")
    p.add_argument("--seed", type=int, default=0)
    p.add_argument("--budget", type=int, default=10_000)
    p.add_argument("--base", help="instance JSON with leveled agents (perturb-instance)")
    p.add_argument("--max-flips", type=int, default=2)
    p.set_defaults(func=cmd_mine)
    return parser


def run(argv=None, stdout=None, stderr=None) -> int:
    stdout = stdout or sys.stdout
    stderr = stderr or sys.stderr
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return exc.code if isinstance(exc.code, int) else EXIT_ERROR
    started = time.perf_counter()
    try:
        code, out = args.func(args)
    except (SchemaError, SizeLimitError, UsageError, OSError, KeyError, ValueError,
            transform.NotMonotoneError, prooflab.GroundSetMismatch, miner.InfeasibleSpec) as exc:
        msg = exc.args[0] if isinstance(exc, KeyError) and exc.args else exc
        stderr.write(f"efx {args.command}: error: {msg}\n")
        return EXIT_ERROR
    if isinstance(out, dict):
        out["argv"] = list(argv) if argv is not None else sys.argv[1:]
        out.setdefault("elapsed_s", round(time.perf_counter() - started, 4))
        out = render(out, args.format)
    stdout.write(out)
    return code


def main():
    sys.exit(run())


if __name__ == "__main__":
    main()
