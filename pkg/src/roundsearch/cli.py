"""``roundsearch`` command line: run, sweep, fit, verify-lb, gen."""

from __future__ import annotations

import argparse
import csv
import io
import os
import sys
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from pathlib import Path
from typing import Sequence

from .fitting import DegenerateFit, fit_power_law, theory_exponent
from .grid import GridDomainError
from .instances import gen_const_staircase, gen_poly_staircase
from .lowerbound import (
    FullGridFirstRound,
    ScaleGuardExceeded,
    UniformBoundaryDnC,
    ZeroQuery,
    cost_lemma_sweep,
    enumerate_goodness,
)
from .runs import ALGORITHMS, CSV_HEADER, TrialResult, TrialSpec, format_param, run_trial

EXIT_OK, EXIT_USAGE, EXIT_LEMMA, EXIT_SCALE = 0, 2, 3, 4
THREADS_ENV = "ROUNDSEARCH_THREADS"
SWEEP_HEADER = (
    "algorithm,d,n,size,k_or_alpha,trials,mean_queries,max_queries,mean_rounds,max_rounds,success_rate"
)


class UsageError(ValueError):
    pass


@dataclass(frozen=True)
class SweepSpec:
    algorithm: str
    d: int
    ns: tuple[int, ...]
    param: float
    trials: int
    seed_base: int = 0
    sample_const: float | str = "auto"
    budget: int | None = None
    round_limit: int | None = None

    def __post_init__(self) -> None:
        if not self.ns:
            raise UsageError("sweep needs at least one n value")
        if any(b <= a for a, b in zip(self.ns, self.ns[1:])):
            raise UsageError("n values must be strictly increasing")
        if self.trials < 1:
            raise UsageError("trials must be >= 1")

    def trial_specs(self) -> list[TrialSpec]:
        return [
            TrialSpec(self.algorithm, self.d, n, self.param, self.seed_base + t, self.budget, self.sample_const, self.round_limit)
            for n in self.ns
            for t in range(self.trials)
        ]


def thread_count() -> int:
    raw = os.environ.get(THREADS_ENV, "1")
    try:
        return max(1, int(raw))
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {raw!r}") from None


def run_many(specs: Sequence[TrialSpec], threads: int = 1) -> list[TrialResult]:
    """Run trials (possibly in parallel) and return them sorted by ``(n, seed)``."""
    if threads > 1:
        with ThreadPoolExecutor(threads) as pool:
            results = list(pool.map(run_trial, specs))
    else:
        results = [run_trial(s) for s in specs]
    return sorted(results, key=lambda r: (r.spec.n, r.spec.seed))


def aggregate(spec: SweepSpec, results: Sequence[TrialResult]) -> list[str]:
    rows = []
    for n in spec.ns:
        group = [r for r in results if r.spec.n == n]
        q = [r.report.queries_used for r in group]
        rd = [r.report.rounds_used for r in group]
        ok = sum(r.success for r in group)
        rows.append(
            f"{spec.algorithm},{spec.d},{n},{group[0].size},{format_param(spec.param)},{len(group)},"
            f"{sum(q) / len(q):.6f},{max(q)},{sum(rd) / len(rd):.6f},{max(rd)},{ok / len(group):.6f}"
        )
    return rows


def _param(args: argparse.Namespace) -> float:
    if args.alg == "poly_ls":
        return float(args.alpha)
    if args.alg == "warm_start":
        return float(args.samples or 0)
    if args.alg == "log_dnc":
        return 0.0
    return float(args.k)


def _sample_const(raw: str) -> float | str:
    if raw == "auto":
        return raw
    try:
        return float(raw)
    except ValueError:
        raise argparse.ArgumentTypeError("--sample-const takes a number or 'auto'") from None


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text)
    else:
        sys.stdout.write(text)


def _trial_table(results: Sequence[TrialResult]) -> str:
    return "\n".join([CSV_HEADER] + [r.csv_row() for r in results]) + "\n"


def cmd_run(args: argparse.Namespace) -> int:
    spec = TrialSpec(args.alg, args.d, args.n, _param(args), args.seed, args.budget, args.sample_const, args.round_limit)
    results = run_many([replace_seed(spec, args.seed + t) for t in range(args.trials)])
    _emit(_trial_table(results), args.out)
    return EXIT_OK


def replace_seed(spec: TrialSpec, seed: int) -> TrialSpec:
    return TrialSpec(spec.algorithm, spec.d, spec.n, spec.param, seed, spec.budget, spec.sample_const, spec.round_limit)


def cmd_sweep(args: argparse.Namespace) -> int:
    spec = SweepSpec(
        args.alg, args.d, tuple(args.n), _param(args), args.trials, args.seed, args.sample_const, args.budget, args.round_limit
    )
    results = run_many(spec.trial_specs(), thread_count())
    rows = aggregate(spec, results)
    _emit("\n".join([SWEEP_HEADER] + rows) + "\n", args.out)
    if args.out:
        dat = Path(args.out).with_suffix(".dat")
        lines = [f"# size mean_queries ({spec.algorithm}, d={spec.d})"]
        lines += [f"{r.split(',')[3]} {r.split(',')[6]}" for r in rows]
        dat.write_text("\n".join(lines) + "\n")
    if args.trials_out:
        Path(args.trials_out).write_text(_trial_table(results))
    return EXIT_OK


def cmd_fit(args: argparse.Namespace) -> int:
    with open(args.csv, newline="") as fh:
        rows = list(csv.DictReader(fh))
    if not rows:
        raise UsageError(f"{args.csv} has no data rows")
    column = "mean_queries" if "mean_queries" in rows[0] else "queries_used"
    if column == "queries_used":
        by_x: dict[float, list[float]] = {}
        for r in rows:
            by_x.setdefault(float(r[args.x] if args.x in r else r["n"]), []).append(float(r[column]))
        xs = sorted(by_x)
        ys = [sum(by_x[x]) / len(by_x[x]) for x in xs]
    else:
        xs = [float(r[args.x]) for r in rows]
        ys = [float(r[column]) for r in rows]
    predicted = theory_exponent(args.theory, args.d, args.k, args.alpha) if args.theory else None
    res = fit_power_law(xs, ys, predicted)
    pred = "" if res.predicted is None else f"{res.predicted:.6f}"
    delta = "" if res.abs_delta is None else f"{res.abs_delta:.6f}"
    _emit(
        "slope,intercept,r_squared,predicted,abs_delta\n"
        f"{res.slope:.6f},{res.intercept:.6f},{res.r_squared:.6f},{pred},{delta}\n",
        args.out,
    )
    return EXIT_OK


def _schedule(raw: str) -> tuple[int, ...]:
    try:
        vals = tuple(int(v) for v in raw.split(","))
    except ValueError:
        raise argparse.ArgumentTypeError("--schedule takes comma-separated integers") from None
    if not vals or min(vals) < 1:
        raise argparse.ArgumentTypeError("--schedule entries must be >= 1")
    return vals


def cmd_verify_lb(args: argparse.Namespace) -> int:
    buf = io.StringIO()
    failures = 0
    dims = [args.d] if args.d_given else [1, 2, 3]
    ells = [args.ell] if args.ell else [2, 3, 4]
    buf.write("check,d,ell,m,points,max_total,bound,violations\n")
    for d in dims:
        for ell in ells:
            m = 2 * ell + 1
            if m**d > args.limit:
                raise ScaleGuardExceeded(f"m^d = {m**d} exceeds --limit {args.limit}")
            checks = cost_lemma_sweep(ell, m, d)
            bad = sum(not c.passed for c in checks)
            failures += bad
            top = max(c.total for c in checks)
            buf.write(f"cost,{d},{ell},{m},{len(checks)},{float(top):.6f},{d * ell},{bad}\n")
    schedule = args.schedule
    d = args.d if args.d_given else 2
    m = sum(schedule)
    algs = {
        "zero": ZeroQuery(d),
        "full_grid": FullGridFirstRound(m, d),
        "uniform_boundary": UniformBoundaryDnC(m, d, schedule),
    }
    chosen = [args.lb_alg] if args.lb_alg else list(algs)
    for name in chosen:
        rep = enumerate_goodness(algs[name], schedule, d, limit=args.limit)
        slack = rep.recursion_slack()
        neg = sum(s < -1e-12 for s in slack)
        failures += neg
        buf.write(f"# goodness alg={name} d={d} schedule={'-'.join(map(str, schedule))}\n")
        buf.write(rep.to_csv())
        buf.write("# recursion_slack " + " ".join(f"{s:.6f}" for s in slack) + f" negative={neg}\n")
    _emit(buf.getvalue(), args.out)
    return EXIT_LEMMA if failures else EXIT_OK


def cmd_gen(args: argparse.Namespace) -> int:
    if args.kind == "poly":
        inst = gen_poly_staircase(args.n, args.d, args.alpha, args.seed)
    else:
        inst = gen_const_staircase(args.n, args.d, args.k, args.seed)
    _emit(inst.to_text(), args.out)
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(prog="roundsearch", description="Round-limited local search and fixed-point experiments.")
    sub = p.add_subparsers(dest="command", required=True)

    def common(sp: argparse.ArgumentParser, n_many: bool = False) -> None:
        sp.add_argument("--alg", required=True, choices=ALGORITHMS)
        sp.add_argument("--d", type=int, default=1)
        if n_many:
            sp.add_argument("--n", type=int, nargs="*", required=True)
        else:
            sp.add_argument("--n", type=int, required=True)
        sp.add_argument("--k", type=int, default=2, help="rounds for constant-round algorithms")
        sp.add_argument("--alpha", type=float, default=0.5, help="round exponent for poly_ls")
        sp.add_argument("--samples", type=int, default=0, help="warm-start sample count (0 picks sqrt(2d n^d))")
        sp.add_argument("--seed", type=int, default=0)
        sp.add_argument("--trials", type=int, default=1)
        sp.add_argument("--budget", type=int, default=None, help="total query budget")
        sp.add_argument("--round-limit", type=int, default=None)
        sp.add_argument("--sample-const", type=_sample_const, default="auto")
        sp.add_argument("--out", default=None)

    run = sub.add_parser("run", help="run trials and print one CSV row each")
    common(run)
    run.set_defaults(func=cmd_run)

    sweep = sub.add_parser("sweep", help="aggregate trials over several n values")
    common(sweep, n_many=True)
    sweep.add_argument("--trials-out", default=None, help="also write the per-trial rows here")
    sweep.set_defaults(func=cmd_sweep)

    fit = sub.add_parser("fit", help="fit a log-log slope to a sweep or run CSV")
    fit.add_argument("csv")
    fit.add_argument("--theory", choices=("const_ls", "poly_ls", "one_d"), default=None)
    fit.add_argument("--d", type=int, default=2)
    fit.add_argument("--k", type=int, default=2)
    fit.add_argument("--alpha", type=float, default=0.5)
    fit.add_argument("--x", choices=("size", "n"), default="size", help="size column to regress on")
    fit.add_argument("--out", default=None)
    fit.set_defaults(func=cmd_fit)

    lb = sub.add_parser("verify-lb", help="exhaustive checks of the counting lemmas at toy scale")
    lb.add_argument("--d", type=int, default=None)
    lb.add_argument("--ell", type=int, default=None, help="single window side for the cost check")
    lb.add_argument("--schedule", type=_schedule, default=(3, 2, 2))
    lb.add_argument("--alg", dest="lb_alg", choices=("zero", "full_grid", "uniform_boundary"), default=None)
    lb.add_argument("--limit", type=int, default=10**5, help="largest enumeration allowed")
    lb.add_argument("--out", default=None)
    lb.set_defaults(func=cmd_verify_lb)

    gen = sub.add_parser("gen", help="write a staircase instance file")
    gen.add_argument("--kind", choices=("const", "poly"), default="const")
    gen.add_argument("--d", type=int, default=2)
    gen.add_argument("--n", type=int, required=True)
    gen.add_argument("--k", type=int, default=2)
    gen.add_argument("--alpha", type=float, default=0.5)
    gen.add_argument("--seed", type=int, default=0)
    gen.add_argument("--out", default=None)
    gen.set_defaults(func=cmd_gen)
    return p


def main(argv: Sequence[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command == "verify-lb":
        args.d_given = args.d is not None
    try:
        return args.func(args)
    except ScaleGuardExceeded as exc:
        print(f"roundsearch: scale guard: {exc}", file=sys.stderr)
        return EXIT_SCALE
    except (UsageError, GridDomainError, ValueError, DegenerateFit) as exc:
        print(f"roundsearch: error: {exc}", file=sys.stderr)
        return EXIT_USAGE


if __name__ == "__main__":
    sys.exit(main())
