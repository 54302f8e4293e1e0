"""One-trial runner shared by the command line and the acceptance checks."""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Any

from .baselines import baseline_log_rounds_dnc, baseline_warm_start
from .brouwer import const_rounds_brouwer, one_d_brouwer, verify_zero
from .constant import const_rounds_ls, one_d_ls
from .fractal import fractal_params, poly_rounds_ls
from .instances import gen_1d_hard, gen_const_staircase, gen_poly_staircase, pad_brouwer, random_sink_field, rng_for
from .oracle import QueryBudgetExceeded, RoundLimitExceeded, open_session, verify_local_min
from .report import RunReport

ALGORITHMS = ("const_ls", "poly_ls", "warm_start", "log_dnc", "one_d_ls", "const_brouwer", "one_d_brouwer")

CSV_HEADER = "algorithm,d,n,k_or_alpha,seed,rounds_used,queries_used,success,solution"


@dataclass(frozen=True)
class TrialSpec:
    algorithm: str
    d: int
    n: int
    param: float
    seed: int
    budget: int | None = None
    sample_const: float | str = "auto"
    round_limit: int | None = None


@dataclass(frozen=True)
class TrialResult:
    spec: TrialSpec
    size: int
    report: RunReport
    success: bool
    extras: dict[str, Any] = field(default_factory=dict, compare=False)

    def csv_row(self) -> str:
        s = self.spec
        sol = "-".join(str(c) for c in self.report.solution)
        return (
            f"{s.algorithm},{s.d},{s.n},{format_param(s.param)},{s.seed},"
            f"{self.report.rounds_used},{self.report.queries_used},{int(self.success)},{sol}"
        )


def format_param(p: float) -> str:
    return str(int(p)) if float(p).is_integer() else repr(float(p))


def _hidden_index(n: int, seed: int) -> int:
    return int(rng_for(seed).integers(1, n + 1))


def run_trial(spec: TrialSpec) -> TrialResult:
    """Build the instance family that goes with ``spec.algorithm`` and run it once."""
    alg, d, n, seed = spec.algorithm, spec.d, spec.n, spec.seed
    if alg not in ALGORITHMS:
        raise ValueError(f"unknown algorithm {alg!r}")
    if alg in ("one_d_ls", "one_d_brouwer") and d != 1:
        raise ValueError(f"{alg} runs on d = 1")
    if alg == "one_d_ls":
        inst = gen_1d_hard(n, _hidden_index(n, seed), "local_search")
    elif alg == "one_d_brouwer":
        inst = gen_1d_hard(n, _hidden_index(n, seed), "brouwer")
    elif alg == "const_brouwer":
        inst = pad_brouwer(random_sink_field(n, d, seed))
    elif alg == "poly_ls":
        inst = gen_poly_staircase(n, d, float(spec.param), seed)
    else:
        k = int(spec.param) if alg == "const_ls" else 2
        inst = gen_const_staircase(n, d, max(1, k), seed)
    session = open_session(inst, round_limit=spec.round_limit, query_budget=spec.budget)

    try:
        report = _dispatch(alg, session, spec, inst, d)
    except (QueryBudgetExceeded, RoundLimitExceeded) as exc:
        # Out of budget or rounds before an answer: a failed trial, not an error.
        halted = "budget" if isinstance(exc, QueryBudgetExceeded) else "round_limit"
        report = RunReport((), session.rounds_used, session.queries_used, halted)
        return TrialResult(spec, inst.n, report, False)

    if alg in ("const_brouwer", "one_d_brouwer"):
        ok = verify_zero(inst, report.solution)
    else:
        ok = verify_local_min(session, report.solution)
    extras = {}
    if alg == "poly_ls":
        extras["params"] = fractal_params(n, d, float(spec.param))
    return TrialResult(spec, inst.n, report, bool(ok), extras)


def _dispatch(alg: str, session, spec: TrialSpec, inst, d: int) -> RunReport:
    if alg == "const_ls":
        return const_rounds_ls(session, int(spec.param))
    if alg == "poly_ls":
        return poly_rounds_ls(session, float(spec.param), spec.sample_const, seed=spec.seed)
    if alg == "warm_start":
        t = int(spec.param) if spec.param >= 1 else math.ceil(math.sqrt(inst.n**d * 2 * d))
        return baseline_warm_start(session, t, spec.seed)
    if alg == "log_dnc":
        return baseline_log_rounds_dnc(session)
    if alg == "one_d_ls":
        return one_d_ls(session, int(spec.param))
    if alg == "const_brouwer":
        return const_rounds_brouwer(session, int(spec.param))
    return one_d_brouwer(session, int(spec.param))
