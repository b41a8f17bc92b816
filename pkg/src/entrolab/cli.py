"""Command-line frontend: compute functionals, verify suites, run CLT traces.

Exit codes: 0 success, 1 at least one non-informational report failed,
2 specification/precondition errors, 3 solver failures.  All configuration
comes from flags and JSON files so identical invocations produce
byte-identical outputs.
"""
from __future__ import annotations

import argparse
import json
import math
import sys

from . import clt as clt_mod
from . import inequalities as ineq
from .convolution import de_bruijn_residual, integrated_debruijn_entropy
from .errors import (ConditionViolation, DegenerateDenominator,
                     DegenerateSupport, EntrolabError, IllConditioned,
                     InvalidSpec, IoFailure, NonCenteredInput,
                     PreconditionViolation, SolverFailure, SuspectedInfinite,
                     TailTruncation)
from .functionals import entropy, fisher_information
from .grid import (DEFAULT_CONFIG, DistributionSpec, GridConfig, center,
                   digest_of, materialize, moments)
from .inequality_report import make_report
from .poincare import (DEFAULT_SOLVER, convolution_stability_check,
                       poincare_scaling_check, restricted_poincare)

SUITES = ("all", "epi-eji", "fisher-sandwich", "jump", "debruijn", "lemmas",
          "poincare-laws")
FUNCTIONALS = ("entropy", "fisher", "poincare", "moments")

SPEC_ERRORS = (InvalidSpec, TailTruncation, PreconditionViolation,
               NonCenteredInput, ConditionViolation, DegenerateSupport,
               DegenerateDenominator, IoFailure)
SOLVER_ERRORS = (SolverFailure, IllConditioned, SuspectedInfinite)


def _build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="entrolab")
    sub = parser.add_subparsers(dest="command", required=True)

    def add_common(p):
        p.add_argument("--spec", action="append", required=True,
                       help="path to a distribution/sequence spec JSON (repeatable)")
        p.add_argument("--grid-points", type=int, default=None)
        p.add_argument("--half-width", type=float, default=None)
        p.add_argument("--out", default=None)
        p.add_argument("--tolerance", type=float, default=None)

    p_compute = sub.add_parser("compute", help="evaluate one functional on one spec")
    add_common(p_compute)
    p_compute.add_argument("--functional", choices=FUNCTIONALS, required=True)

    p_verify = sub.add_parser("verify", help="run an inequality suite")
    add_common(p_verify)
    p_verify.add_argument("--suite", choices=SUITES, required=True)
    p_verify.add_argument("--poincare-R", type=float, default=None,
                          help="override the solver-derived Poincare constant")

    p_clt = sub.add_parser("clt", help="run a CLT experiment")
    add_common(p_clt)
    p_clt.add_argument("--mode", choices=("doubling", "plain"), required=True)
    p_clt.add_argument("--levels", type=int, default=8)
    p_clt.add_argument("--n-max", type=int, default=64)
    return parser


def _grid_config(args) -> GridConfig:
    kwargs = {}
    if args.grid_points is not None:
        kwargs["num_points"] = args.grid_points
    if args.half_width is not None:
        kwargs["half_width_sigmas"] = args.half_width
    return GridConfig(**kwargs) if kwargs else DEFAULT_CONFIG


def _load_densities(args, cfg, count):
    paths = args.spec
    if len(paths) > count:
        raise InvalidSpec(f"this command takes at most {count} --spec path(s)")
    specs = [DistributionSpec.from_file(p) for p in paths]
    return [materialize(s, cfg) for s in specs]


def _cmd_compute(args) -> int:
    cfg = _grid_config(args)
    d, = _load_densities(args, cfg, 1)
    diagnostics = {}
    if args.functional == "entropy":
        value = entropy(d)
    elif args.functional == "fisher":
        value = fisher_information(d)
    elif args.functional == "moments":
        mean, var = moments(d)
        value = mean
        diagnostics = {"variance": var}
    else:
        est = restricted_poincare(d)
        value = est.value
        diagnostics = {
            "eigen_residual": est.eigen_residual,
            "constraint_residuals": list(est.constraint_residuals),
            "resolution": est.resolution,
        }
    print(json.dumps({"label": d.label, "functional": args.functional,
                      "value": value, "diagnostics": diagnostics}, sort_keys=True))
    return 0


def _suite_reports(suite, dX, dY, cfg, r_override):
    reports = []
    if suite in ("all", "epi-eji"):
        reports.append(ineq.check_epi(dX, dY, cfg))
        reports.append(ineq.check_eji(dX, dY, cfg))
    if suite in ("all", "fisher-sandwich"):
        cX, cY = center(dX), center(dY)
        R = r_override if r_override is not None else ineq._max_rstar(cX, cY, DEFAULT_SOLVER)
        reports.extend(ineq.check_fisher_sandwich(cX, cY, R, cfg))
    if suite in ("all", "jump"):
        cX, cY = center(dX), center(dY)
        if r_override is not None:
            R = r_override
        else:
            R = max(ineq._max_rstar(cX, cY, DEFAULT_SOLVER), 0.5)
        reports.append(ineq.check_entropy_jump(cX, cY, R, cfg))
    if suite in ("all", "debruijn"):
        cX = center(dX)
        for t in (0.2, 0.5, 1.0):
            resid = de_bruijn_residual(cX, t, 1e-3, cfg)
            reports.append(make_report(f"debruijn-residual[t={t}]", resid, 0.0,
                                       tolerance=1e-3, kind="eq",
                                       inputs_digest=digest_of(dX.label, t)))
        var = moments(cX)[1]
        if 0.1 <= var <= 10.0:
            integ = integrated_debruijn_entropy(cX, cfg=cfg)
            reports.append(make_report("debruijn-integrated-entropy", integ,
                                       entropy(cX), tolerance=1e-3, kind="eq",
                                       inputs_digest=digest_of(dX.label)))
    if suite in ("all", "lemmas"):
        cX, cY = center(dX), center(dY)
        for h_id in ("negation", "cubic_clipped", "zero"):
            reports.append(ineq.check_projection_pythagoras(cX, cY, h_id, h_id, cfg))
        reports.append(ineq.check_poincare_lower_bound(cX, cY, cfg=cfg))
        reports.extend(ineq.check_score_projection(cX, cY, cfg))
        reports.extend(ineq.check_compute_identities(cX, cY, cfg))
        q = ineq.ab_diagnostics(cX, cY, R=r_override, cfg=cfg)
        reports.append(make_report("lambda-in-unit-interval",
                                   q.lambda_proj, 0.5, tolerance=0.5 + 1e-6,
                                   kind="eq", inputs_digest=digest_of(dX.label, dY.label)))
    if suite in ("all", "poincare-laws"):
        for a in (0.5, 2.0, 3.0):
            reports.append(poincare_scaling_check(dX, a))
        reports.append(convolution_stability_check(dX, dY))
    return reports


def _cmd_verify(args) -> int:
    cfg = _grid_config(args)
    ds = _load_densities(args, cfg, 2)
    dX = ds[0]
    dY = ds[1] if len(ds) > 1 else ds[0]
    reports = _suite_reports(args.suite, dX, dY, cfg, args.poincare_R)
    lines = [r.to_json() for r in reports]
    if args.out:
        try:
            with open(args.out, "w", encoding="utf-8", newline="\n") as fh:
                fh.write("\n".join(lines) + "\n")
        except OSError as exc:
            raise IoFailure(f"cannot write report file {args.out}: {exc}") from exc
    else:
        for line in lines:
            print(line)
    failed = [r for r in reports if not r.passed and not r.informational]
    return 1 if failed else 0


def _cmd_clt(args) -> int:
    cfg = _grid_config(args)
    if len(args.spec) != 1:
        raise InvalidSpec("clt takes exactly one --spec (a sequence spec JSON)")
    seq = clt_mod.SequenceSpec.from_file(args.spec[0])
    if args.mode == "doubling":
        trace = clt_mod.run_doubling(seq, args.levels, cfg)
        R = clt_mod.sequence_poincare_constant(seq, cfg)
        sig2 = trace.rows[0].variance
        checks = clt_mod.geometric_rate_check(trace, sig2, R)
        checks.append(clt_mod.entropy_convergence_iff_check(trace))
    else:
        trace = clt_mod.run_plain_sum(seq, args.n_max, cfg)
        R = clt_mod.sequence_poincare_constant(seq, cfg)
        sig2 = trace.rows[0].variance
        c = 2.0 * R / (min(sig2, 1.0) + 2.0 * R)
        checks = clt_mod.subadditive_rate_bound(trace, c)
        checks.append(clt_mod.entropy_convergence_iff_check(trace))
    if args.out:
        clt_mod.export_csv(trace, args.out)
    last = trace.rows[-1]
    ok = all(r.passed or r.informational for r in checks)
    print(json.dumps({
        "final_kl": last.kl,
        "final_l1": last.l1,
        "rows": len(trace.rows),
        "bound_checks": {r.name: r.passed for r in checks},
        "all_bounds_pass": ok,
    }, sort_keys=True))
    return 0 if ok else 1


def main(argv=None) -> int:
    args = _build_parser().parse_args(argv)
    try:
        if args.command == "compute":
            return _cmd_compute(args)
        if args.command == "verify":
            return _cmd_verify(args)
        return _cmd_clt(args)
    except SPEC_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except SOLVER_ERRORS as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 3
    except EntrolabError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
