"""The acceptance gate: nine criteria, one printed pass/fail line each.

Each criterion prints its line with capture disabled so it lands in the
terminal output; the asserts make each criterion a hard gate as well.
"""
import json
import math
import sys
import time

import pytest

sys.path.insert(0, "tests")
from oracles import hermite_restricted_poincare

from entrolab.cli import main as cli_main
from entrolab.clt import (SequenceSpec, geometric_rate_check, run_doubling,
                          run_plain_sum, subadditive_rate_bound, sequence_poincare_constant)
from entrolab.convolution import de_bruijn_residual, integrated_debruijn_entropy
from entrolab.functionals import entropy, fisher_information
from entrolab.grid import DistributionSpec, materialize
from entrolab.inequalities import (check_compute_identities,
                                   check_entropy_jump, check_fisher_sandwich,
                                   check_poincare_lower_bound,
                                   check_projection_pythagoras,
                                   check_score_projection)
from entrolab.poincare import poincare_scaling_check, restricted_poincare

from conftest import spec_gaussian


def _announce(capsys, num: int, label: str, ok: bool, detail: str = "") -> None:
    tail = f"  [{detail}]" if detail else ""
    with capsys.disabled():
        print(f"\nacceptance {num} ({label}): {'PASS' if ok else 'FAIL'}{tail}",
              flush=True)


@pytest.fixture(scope="module")
def battery(gauss, laplace, smoothed_uniform, mixture):
    return [(gauss, gauss), (laplace, laplace), (laplace, gauss),
            (smoothed_uniform, smoothed_uniform), (smoothed_uniform, gauss),
            (mixture, gauss), (mixture, laplace)]


@pytest.fixture(scope="module")
def rstar(gauss, laplace, smoothed_uniform, mixture):
    return {id(d): restricted_poincare(d).value
            for d in (gauss, laplace, smoothed_uniform, mixture)}


@pytest.fixture(scope="module")
def laplace_seq():
    return SequenceSpec.from_json(json.dumps({
        "generator": {"iid": {"family": "laplace",
                              "params": {"mean": 0.0, "scale": 2 ** -0.5},
                              "label": "laplace-unit"}}}))


def test_acceptance_1_gaussian_analytic_suite(capsys):
    t0 = time.perf_counter()
    worst = 0.0
    for var in (0.25, 0.5, 1.0, 2.0, 4.0):
        d = materialize(spec_gaussian(var=var))
        h_exact = 0.5 * math.log(2 * math.pi * math.e * var)
        worst = max(worst, abs(entropy(d) - h_exact) / abs(h_exact) if h_exact else 0.0,
                    abs(entropy(d) - h_exact),
                    abs(fisher_information(d) - 1.0 / var) * var)
    elapsed = time.perf_counter() - t0
    ok = worst < 1e-4 and elapsed < 1.0
    _announce(capsys, 1, "gaussian entropy/fisher analytic", ok,
              f"worst rel err {worst:.2e}, {elapsed:.2f}s")
    assert ok


def test_acceptance_2_gaussian_poincare_and_scaling(capsys, gauss):
    t0 = time.perf_counter()
    solver_value = restricted_poincare(gauss).value
    oracle = hermite_restricted_poincare()
    ok = abs(solver_value - 0.5) < 1e-3 and abs(solver_value - oracle) < 1e-3
    for a in (0.5, 2.0, 3.0):
        ok = ok and poincare_scaling_check(gauss, a).passed
    elapsed = time.perf_counter() - t0
    ok = ok and elapsed < 30.0
    _announce(capsys, 2, "restricted Poincare vs Hermite oracle + scaling", ok,
              f"solver {solver_value:.6f}, oracle {oracle:.6f}, {elapsed:.1f}s")
    assert ok


def test_acceptance_3_fisher_sandwich(capsys, battery, rstar, gauss):
    ok = True
    for dX, dY in battery:
        R = max(rstar[id(dX)], rstar[id(dY)])
        lower, upper = check_fisher_sandwich(dX, dY, R)
        ok = ok and lower.passed and upper.passed
    lo, up = check_fisher_sandwich(gauss, gauss, 0.5)
    equal = abs(lo.lhs - lo.rhs) < 1e-5 and abs(up.lhs - up.rhs) < 1e-5
    ok = ok and equal
    _announce(capsys, 3, "fisher sandwich on 7-pair battery", ok,
              f"gaussian equality margin {abs(lo.lhs - lo.rhs):.1e}")
    assert ok


def test_acceptance_4_entropy_jump(capsys, battery, rstar, gauss):
    ok = True
    for dX, dY in battery:
        R = max(rstar[id(dX)], rstar[id(dY)], 0.5)
        ok = ok and check_entropy_jump(dX, dY, R).passed
    g_rep = check_entropy_jump(gauss, gauss, 0.5)
    ok = ok and abs(g_rep.lhs) < 1e-6 and abs(g_rep.rhs) < 1e-6
    _announce(capsys, 4, "entropy jump on battery", ok,
              f"gaussian sides {g_rep.lhs:.1e}/{g_rep.rhs:.1e}")
    assert ok


def test_acceptance_5_de_bruijn(capsys, laplace, smoothed_uniform, mixture):
    worst = 0.0
    for d in (laplace, smoothed_uniform, mixture):
        for t in (0.2, 0.5, 1.0):
            worst = max(worst, de_bruijn_residual(d, t, 1e-3))
    integ_err = abs(integrated_debruijn_entropy(laplace) - entropy(laplace))
    ok = worst < 1e-3 and integ_err < 1e-3
    _announce(capsys, 5, "de Bruijn identity", ok,
              f"worst residual {worst:.2e}, integrated err {integ_err:.2e}")
    assert ok


def test_acceptance_6_projection_identity_suite(capsys, gauss, laplace, mixture):
    pairs = [(gauss, gauss), (laplace, laplace), (laplace, gauss),
             (mixture, gauss)]
    ok = True
    worst_time = 0.0
    for dX, dY in pairs:
        t0 = time.perf_counter()
        sup_rep, gap_rep = check_score_projection(dX, dY)
        ok = ok and sup_rep.passed and gap_rep.passed
        for h in ("negation", "cubic_clipped", "zero"):
            ok = ok and check_projection_pythagoras(dX, dY, h, h).passed
        for rep in check_compute_identities(dX, dY):
            ok = ok and rep.passed
        ok = ok and check_poincare_lower_bound(dX, dY).passed
        worst_time = max(worst_time, time.perf_counter() - t0)
    ok = ok and worst_time < 60.0
    _announce(capsys, 6, "projection/identity suite", ok,
              f"worst pair time {worst_time:.1f}s")
    assert ok


def test_acceptance_7_doubling_clt(capsys, laplace_seq):
    t0 = time.perf_counter()
    trace = run_doubling(laplace_seq, 8)
    R = sequence_poincare_constant(laplace_seq)
    elapsed = time.perf_counter() - t0
    kls = [r.kl for r in trace.rows]
    ok = all(b < a for a, b in zip(kls, kls[1:]))
    ok = ok and all(rep.passed for rep in
                    geometric_rate_check(trace, trace.rows[0].variance, R))
    ok = ok and kls[-1] < 1e-3 and trace.rows[-1].l1 < 0.05
    ok = ok and all(r.l1 ** 2 <= 2.0 * r.kl + 1e-12 for r in trace.rows)
    ok = ok and elapsed < 10.0
    _announce(capsys, 7, "doubling CLT, iid laplace, 8 levels", ok,
              f"final kl {kls[-1]:.2e}, l1 {trace.rows[-1].l1:.2e}, {elapsed:.1f}s")
    assert ok


def test_acceptance_8_plain_sum_chain(capsys, laplace_seq):
    trace = run_plain_sum(laplace_seq, 64)
    R = sequence_poincare_constant(laplace_seq)
    sig2 = trace.rows[0].variance
    c = 2.0 * R / (min(sig2, 1.0) + 2.0 * R)
    reports = {r.name: r for r in subadditive_rate_bound(trace, c)}
    ok = all(reports[f"subadditive-chain[n={n}]"].passed
             for n in (4, 8, 16, 32, 64))
    kls = [trace.kl_at(n) for n in (4, 8, 16, 32, 64)]
    ok = ok and all(b < a for a, b in zip(kls, kls[1:]))
    _announce(capsys, 8, "plain-sum subadditive chain", ok,
              f"n*D_n at 64: {64 * trace.kl_at(64):.2e}")
    assert ok


def test_acceptance_9_determinism(capsys, tmp_path):
    gauss_path = tmp_path / "gauss.json"
    lap_path = tmp_path / "lap.json"
    gauss_path.write_text(json.dumps(
        {"family": "gaussian", "params": {"mean": 0.0, "var": 1.0}}))
    lap_path.write_text(json.dumps(
        {"family": "laplace", "params": {"mean": 0.0, "scale": 2 ** -0.5}}))
    outs = []
    for tag in ("a", "b"):
        out = tmp_path / f"reports_{tag}.jsonl"
        code = cli_main(["verify", "--spec", str(gauss_path),
                         "--spec", str(lap_path), "--suite", "all",
                         "--out", str(out)])
        outs.append((code, out.read_bytes()))
    ok = outs[0][0] == 0 and outs[1][0] == 0 and outs[0][1] == outs[1][1]
    _announce(capsys, 9, "byte-identical full-suite runs", ok,
              f"{len(outs[0][1])} bytes")
    assert ok
