"""Command-line front end.

Exit codes: 0 when everything checked passes, 1 for usage or input errors,
2 when a pair is outside the support or a verification fails.
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from . import info_size as isz
from .auction import Rule, auction_outcome, auction_ranking, verify_info
from .cache import ResultCache, default_cache_path
from .market import CountingMode, PartialProblem, ProblemError, SupportSpec, load_problem
from .mechanisms import CLI_NAMES, DA, IA, SD, SD_COMMON, TTC, MechanismError, MechanismId, cap_length, run
from .secure import OutsideSupport, PairTarget, ScaleLimit, min_secure_info

USAGE, FAILED = 1, 2


class UsageError(Exception):
    pass


class _Parser(argparse.ArgumentParser):
    def error(self, message):
        self.print_usage(sys.stderr)
        self.exit(USAGE, f"{self.prog}: error: {message}\n")


# ---------------------------------------------------------------------------
# option helpers


def _mech(name: str, cap: int | None, m: int) -> MechanismId:
    try:
        mech = MechanismId.parse(name)
    except (ValueError, MechanismError) as exc:
        raise UsageError(str(exc)) from None
    if cap is not None:
        try:
            mech = cap_length(mech, cap, m)
        except (ValueError, MechanismError) as exc:
            raise UsageError(str(exc)) from None
    return mech


def _mode(value: str) -> CountingMode:
    return CountingMode(value)


def _lookup(token: str, names: tuple[str, ...], kind: str) -> int:
    if token in names:
        return names.index(token)
    if token.isdigit() and 1 <= int(token) <= len(names):
        return int(token) - 1
    raise UsageError(f"unknown {kind} {token!r}")


def _pair(text: str | None, students: tuple[str, ...], schools: tuple[str, ...]) -> PairTarget:
    if not text:
        raise UsageError("--pair i:o is required")
    if ":" not in text:
        raise UsageError(f"--pair expects i:o, got {text!r}")
    i, o = text.split(":", 1)
    return PairTarget(_lookup(i, students, "student"), _lookup(o, schools, "school"))


def _default_names(n: int) -> tuple[tuple[str, ...], tuple[str, ...]]:
    return tuple(str(k + 1) for k in range(n)), tuple(chr(ord("a") + k) for k in range(n))


def _pair_label(t: PairTarget) -> str:
    return f"{t.student + 1}:{chr(ord('a') + t.school)}"


def _load(path: str):
    try:
        return load_problem(path)
    except ProblemError as exc:
        raise UsageError("invalid problem file:\n  " + "\n  ".join(exc.problems)) from None
    except (OSError, ValueError, KeyError, TypeError) as exc:
        raise UsageError(f"cannot read problem file {path}: {exc}") from None


def _cache(args) -> ResultCache | None:
    path = args.cache or default_cache_path()
    return ResultCache(path) if path else None


def _check_scale(args) -> None:
    if args.n != 3 and args.policy == "exhaustive" and not args.force:
        raise UsageError(f"exhaustive sweeps cover n=3 only; n={args.n} needs --policy construct or --force")
    if args.n > 4 and not args.force:
        raise UsageError(f"neither policy is defined at n={args.n} without --force")
    if args.m not in (None, args.n) or args.q not in (None, 1):
        raise UsageError("tables and sweeps cover unit-capacity markets with m = n")


# ---------------------------------------------------------------------------
# table output


def emit(rows: list[dict], fmt: str, out: str | None = None) -> str:
    """Render rows deterministically as csv, json, or a Markdown table."""
    cols = list(rows[0].keys()) if rows else []
    if fmt == "json":
        text = json.dumps(rows, indent=2, ensure_ascii=False) + "\n"
    elif fmt == "csv":
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=cols, lineterminator="\n")
        writer.writeheader()
        writer.writerows(rows)
        text = buf.getvalue()
    elif fmt == "md":
        lines = ["| " + " | ".join(cols) + " |", "|" + "|".join("---" for _ in cols) + "|"]
        lines += ["| " + " | ".join(str(r[c]) for c in cols) + " |" for r in rows]
        text = "\n".join(lines) + "\n"
    else:
        raise UsageError(f"unknown format {fmt!r}")
    if out:
        try:
            Path(out).write_text(text, encoding="utf-8")
        except OSError as exc:
            raise UsageError(f"cannot write {out}: {exc}") from None
    return text


# ---------------------------------------------------------------------------
# subcommands


def cmd_run(args) -> int:
    problem = _load(args.problem)
    mech = _mech(args.mech, args.cap, problem.m)
    trace: list[str] | None = [] if args.trace else None
    try:
        matching = run(mech, problem, trace)
    except MechanismError as exc:
        raise UsageError(str(exc)) from None
    if trace:
        print("\n".join(trace))
    print(matching.describe(problem))
    return 0


def cmd_secure(args) -> int:
    problem = _load(args.problem)
    mech = _mech(args.mech, args.cap, problem.m)
    students = tuple(problem.student_name(i) for i in range(problem.n))
    schools = tuple(problem.school_name(o) for o in range(problem.m))
    target = _pair(args.pair, students, schools)
    try:
        res = min_secure_info(mech, problem, target, _mode(args.mode))
    except OutsideSupport as exc:
        print(str(exc), file=sys.stderr)
        return FAILED
    except MechanismError as exc:
        raise UsageError(str(exc)) from None
    except ScaleLimit as exc:
        print(f"scale limit: {exc}", file=sys.stderr)
        return FAILED
    print(f"ν = {res.nu}")
    print(f"witness: {PartialProblem(problem, res.witness).describe()}")
    print(f"candidates checked: {res.explored}, execution paths: {res.paths}, counterexamples: {res.counterexamples}")
    return 0


def _support(kind: str, target: PairTarget | None) -> SupportSpec:
    if kind == "top":
        return SupportSpec("top", target.student, target.school)
    return SupportSpec(kind)


def cmd_is(args) -> int:
    _check_scale(args)
    mech = _mech(args.mech, args.cap, args.n)
    students, schools = _default_names(args.n)
    target = _pair(args.pair or "1:a", students, schools)
    if args.policy == "construct":
        return _is_construct(args, mech)
    cache = _cache(args)
    try:
        rep = isz.informational_size(mech, target, _support(args.support, target), _mode(args.mode), cache=cache)
    except isz.EmptySupport as exc:
        print(str(exc), file=sys.stderr)
        return FAILED
    except isz.Unsupported as exc:
        raise UsageError(str(exc)) from None
    finally:
        if cache is not None:
            cache.save()
    print(f"IS({mech}; {_pair_label(target)}) on {args.support} support = {rep.value}  [{rep.provenance}]")
    print(f"support size: {rep.problems}")
    print(f"worst-case problem: {json.dumps(rep.argmax_problem.to_json(), ensure_ascii=False)}")
    print(f"witness: {PartialProblem(rep.argmax_problem, rep.witness).describe()}")
    if rep.per_rank:
        print("per rank: " + ", ".join(f"k={k}: {v}" for k, v in rep.per_rank.items()))
    return 0


def _is_construct(args, mech) -> int:
    try:
        c = isz.worst_case_construction(mech, args.n, args.rank)
    except isz.Unsupported as exc:
        raise UsageError(str(exc)) from None
    chk = isz.check_construction(c)
    print(f"{mech} construction at n={args.n}, rank {args.rank}: I = {chk.value}  [{isz.CONSTRUCTION}]")
    print(f"witness: {PartialProblem(c.problem, c.witness).describe()}")
    print(f"secures: {chk.secures}; locally necessary: {chk.locally_necessary}")
    if args.samples:
        rep = isz.sample_top_ranked(mech, args.n, args.samples, chk.value, args.seed, jobs=args.jobs)
        print(f"sampled {rep.samples} top-ranked problems: max ν = {rep.max_nu}  [{isz.SAMPLE_BOUND}]")
    return 0 if chk.passed else FAILED


def cmd_formula(args) -> int:
    mech = _mech(args.mech, None, args.n)
    kind = {"top": "top", "common": "common", "full": "hetero"}[args.support]
    try:
        fv = isz.formula_value(mech, args.n, isz.Context(kind, args.rank))
    except isz.Unsupported as exc:
        raise UsageError(str(exc)) from None
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    line = f"{mech} n={args.n} {isz.Context(kind, args.rank)}: {fv.value} ({fv.kind})"
    if fv.alt is not None:
        line += f"; explicit count gives {fv.alt}"
    print(line)
    if fv.note:
        print(f"NOTE: {fv.note}")
    return 0


def cmd_compare(args) -> int:
    if not args.mech or len(args.mech) != 2:
        raise UsageError("compare needs exactly two --mech options")
    if args.n != 3:
        raise UsageError("comparisons are exhaustive and cover n=3 only")
    f, g = (_mech(x, args.cap, args.n) for x in args.mech)
    try:
        verdict = isz.compare(f, g, args.support, _mode(args.mode), args.n, override_sd=args.force)
    except isz.Unsupported as exc:
        raise UsageError(str(exc)) from None
    rows = [
        {"student": i + 1, "school": chr(ord("a") + o), f"IS({f})": a, f"IS({g})": b}
        for i, o, a, b in verdict.pairs
    ]
    sys.stdout.write(emit(rows, args.format))
    print(f"relation: {verdict.relation.value}")
    print(verdict.describe())
    return 0


def cmd_verify(args) -> int:
    if args.n not in (3, 4) and not args.force:
        raise UsageError(f"verification covers n=3 (exhaustive) or n=4 (construction); n={args.n} needs --force")
    if args.n in (3, 4):
        claims = isz.verify_claims(args.n, samples=args.samples, seed=args.seed, jobs=args.jobs)
    else:
        claims = _forced_constructions(args.n)
    rows = [
        {
            "status": c.status,
            "claim": c.name,
            "computed": c.computed,
            "expected": c.expected,
            "provenance": c.provenance,
            "detail": c.detail,
        }
        for c in claims
    ]
    sys.stdout.write(emit(rows, args.format))
    return 0 if all(c.status != "FAIL" for c in claims) else FAILED


def _forced_constructions(n: int) -> list[isz.Claim]:
    out = []
    for mech in (IA, SD, TTC, DA):
        try:
            c = isz.worst_case_construction(mech, n)
        except isz.Unsupported as exc:
            out.append(isz.Claim(f"n={n} {mech} construction", "FAIL", "undefined", "defined", isz.CONSTRUCTION, str(exc)))
            continue
        chk = isz.check_construction(c)
        fv = isz.formula_value(mech, n).value
        out.append(
            isz.Claim(
                f"n={n} {mech} construction",
                "PASS" if chk.passed and chk.value == fv else "FAIL",
                f"I={chk.value}, secures={chk.secures}, locally necessary={chk.locally_necessary}",
                f"I={fv}",
                isz.CONSTRUCTION,
            )
        )
    return out


def _witness_summary(problem, witness) -> str:
    return PartialProblem(problem, witness).describe()


def cmd_table(args) -> int:
    if args.what == "auction":
        rows = _auction_rows(args.V)
    else:
        _check_scale(args)
        rows = _is_rows(args)
    text = emit(rows, args.format, args.out)
    if not args.out:
        sys.stdout.write(text)
    return 0


def _is_rows(args) -> list[dict]:
    mode = _mode(args.mode)
    rows = []
    if args.policy == "construct":
        for mech in (IA, SD, DA, TTC):
            try:
                c = isz.worst_case_construction(mech, args.n, args.rank)
            except isz.Unsupported:
                continue
            chk = isz.check_construction(c)
            rows.append(_row(mech, "top", _pair_label(c.target), args.rank, chk.value, isz.CONSTRUCTION, c.problem, c.witness))
            if args.samples:
                rep = isz.sample_top_ranked(mech, args.n, args.samples, chk.value, args.seed, jobs=args.jobs)
                rows.append(
                    _row(mech, "top", _pair_label(c.target), 1, rep.max_nu, isz.SAMPLE_BOUND, rep.argmax_problem, None)
                )
        return rows
    cache = _cache(args)
    students, schools = _default_names(args.n)
    target = _pair(args.pair or "1:a", students, schools)
    if args.support == "top":
        for mech in (IA, SD, DA, TTC):
            rep = isz.informational_size(mech, target, _support("top", target), mode, cache=cache)
            rows.append(_row(mech, "top", _pair_label(target), 1, rep.value, rep.provenance, rep.argmax_problem, rep.witness))
    else:
        mechs = (IA, TTC, DA, SD_COMMON) if args.support == "common" else (IA, DA, TTC)
        if args.support == "full" and args.force:
            mechs += (SD,)
        for mech in mechs:
            rep = isz.informational_size(mech, target, _support(args.support, target), mode, cache=cache)
            for k, v in (rep.per_rank or {}).items():
                rows.append(_row(mech, args.support, _pair_label(target), k, v, rep.provenance, None, None))
    if cache is not None:
        cache.save()
    return rows


def _row(mech, support, pair, rank, value, provenance, problem, witness) -> dict:
    return {
        "mechanism": str(mech),
        "support": support,
        "pair": pair,
        "rank": rank,
        "IS": value,
        "provenance": provenance,
        "witness": _witness_summary(problem, witness) if problem is not None and witness is not None else "",
    }


def _auction_rows(V: int) -> list[dict]:
    if V < 1:
        raise UsageError("the auction grid needs V >= 1")
    table = auction_ranking(V)
    return [
        {
            "bid1": r.bids[0],
            "bid2": r.bids[1],
            "fpa": r.fpa,
            "spa": r.spa,
            "descending": r.descending,
            "ascending": r.ascending,
        }
        for r in table.rows
    ]


def cmd_auction(args) -> int:
    if args.bids is None:
        table = auction_ranking(args.V)
        sys.stdout.write(emit(_auction_rows(args.V), args.format, args.out))
        ok = table.spa_ge_fpa and table.ascending_ge_descending and table.static_dynamic_equivalent
        print(f"SPA >= FPA everywhere: {table.spa_ge_fpa}", file=sys.stderr)
        print(f"ascending >= descending everywhere: {table.ascending_ge_descending}", file=sys.stderr)
        print(f"static and dynamic outcomes coincide: {table.static_dynamic_equivalent}", file=sys.stderr)
        return 0 if ok else FAILED
    try:
        bids = tuple(int(x) for x in args.bids.split(","))
        rule = Rule(args.rule)
        out = auction_outcome(rule, bids)
        need = verify_info(rule, bids, args.V)
    except ValueError as exc:
        raise UsageError(str(exc)) from None
    print(f"winner: bidder {out.winner + 1}, pays {out.payment}")
    print(f"excluded grid points needed: {need}")
    return 0


# ---------------------------------------------------------------------------


def build_parser() -> argparse.ArgumentParser:
    common = argparse.ArgumentParser(add_help=False)
    common.add_argument("--n", type=int, default=3)
    common.add_argument("--m", type=int, default=None)
    common.add_argument("--q", type=int, default=None)
    common.add_argument("--support", choices=("full", "top", "common"), default="top")
    common.add_argument("--pair", help="student:school, by name or 1-based index")
    common.add_argument("--cap", type=int, default=None, help="length cap e on preference lists")
    common.add_argument("--mode", choices=("own", "no-own"), default="no-own")
    common.add_argument("--policy", choices=("exhaustive", "construct"), default="exhaustive")
    common.add_argument("--samples", type=int, default=0)
    common.add_argument("--seed", type=int, default=0)
    common.add_argument("--jobs", type=int, default=1)
    common.add_argument("--cache", default=None, help="outcome cache file (default from INFOSIZE_CACHE_DIR)")
    common.add_argument("--format", choices=("csv", "json", "md"), default="md")
    common.add_argument("--rank", type=int, default=1)
    common.add_argument("--out", default=None)
    common.add_argument("--trace", action="store_true")
    common.add_argument("--force", action="store_true")

    parser = _Parser(prog="infosize", description="Information needed to secure matching outcomes.")
    sub = parser.add_subparsers(dest="command", required=True, parser_class=_Parser)

    p = sub.add_parser("run", parents=[common], help="run a mechanism on a problem file")
    p.add_argument("problem")
    p.add_argument("--mech", required=True, choices=CLI_NAMES)
    p.set_defaults(func=cmd_run)

    p = sub.add_parser("secure", parents=[common], help="minimal securing informativeness of one pair")
    p.add_argument("problem")
    p.add_argument("--mech", required=True, choices=CLI_NAMES)
    p.set_defaults(func=cmd_secure)

    p = sub.add_parser("is", parents=[common], help="informational size over a support")
    p.add_argument("--mech", required=True, choices=CLI_NAMES)
    p.set_defaults(func=cmd_is)

    p = sub.add_parser("formula", parents=[common], help="closed-form worst-case value")
    p.add_argument("--mech", required=True, choices=CLI_NAMES)
    p.set_defaults(func=cmd_formula)

    p = sub.add_parser("compare", parents=[common], help="pointwise comparison of two mechanisms")
    p.add_argument("--mech", action="append", choices=CLI_NAMES)
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("verify", parents=[common], help="check every claim at n=3 or n=4")
    p.set_defaults(func=cmd_verify)

    p = sub.add_parser("table", parents=[common], help="write result tables")
    p.add_argument("what", nargs="?", choices=("is", "auction"), default="is")
    p.add_argument("--V", type=int, default=10)
    p.set_defaults(func=cmd_table)

    p = sub.add_parser("auction", parents=[common], help="auction outcomes and verification cost")
    p.add_argument("--rule", choices=[r.value for r in Rule], default="fpa")
    p.add_argument("--bids", default=None, help="two comma-separated bids; omit for the full profile table")
    p.add_argument("--V", type=int, default=10)
    p.set_defaults(func=cmd_auction)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except UsageError as exc:
        print(f"infosize: {exc}", file=sys.stderr)
        return USAGE


if __name__ == "__main__":  # pragma: no cover
    sys.exit(main())
