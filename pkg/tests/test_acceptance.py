"""The fourteen acceptance criteria, one test each.

Every test prints a single ``ACnn PASS|FAIL`` line with its measured
evidence, whether or not it passes.
"""

import random
import time
from collections import Counter
from fractions import Fraction

import pytest

from fastalg.asm import assemble
from fastalg.cli import main
from fastalg.codec import PairWeight
from fastalg.complexity import DEMO_BUDGET, doubling_budgets, k2_trajectory
from fastalg.levin import (
    InversionProblem,
    first_programs,
    search_phases,
    simple_index,
    simple_search,
)
from fastalg.mpstar import (
    PERIOD_START,
    PROOF_ADDED,
    TFAST_UPDATE,
    WRAPPER_OVERHEAD_BITS,
    BScheduler,
    Shares,
    build_fastest_shortest,
    case_analysis,
    read_trace_csv,
    run_mpstar,
    verify_theorem1_bound,
)
from fastalg.proofs import CHECK_COST_C, check_bits, iter_candidates
from fastalg.scenario import load_scenario
from fastalg.vm import evaluate

from conftest import GOLDEN, SCENARIOS, load_program, scenario_paths
from test_complexity import oracle_minimum
from test_levin import CONST3, IDENTITY, PRED, SUCC, TEST_LIST
from test_mpstar import fake_pair
from test_proofs import agrees_and_bounded


@pytest.fixture
def verdict(capsys):
    def report(n, ok, detail):
        with capsys.disabled():
            print(f"\nAC{n:02d} {'PASS' if ok else 'FAIL'}: {detail}")
        assert ok, detail
    return report


@pytest.fixture(scope="module")
def runs():
    out = {}
    for path in scenario_paths():
        sc = load_scenario(path)
        out[path.stem] = (sc, run_mpstar(sc))
    return out


def test_ac01_theorem1_inequality(verdict):
    start = time.perf_counter()
    checked = failures = 0
    scenarios = scenario_paths()
    for path in scenarios:
        sc = load_scenario(path)
        assert len(sc.pstar) <= 30 and sc.x <= 64
        r = run_mpstar(sc)
        a, b, c = r.shares.a, r.shares.b, r.shares.c
        certs = [rec.cert for rec in r.pairs] + [sc.designated_certificate()[1]]
        for cert in certs:
            rep = verify_theorem1_bound(sc, designated=cert, result=r, raise_on_fail=False)
            # independent recomputation; 10/10/80 gives 5, 40·2^(l(p)+l(t)), 40·2^(s+1)·c·s²
            l_pt = cert.subject.length_bits + cert.bound.length_bits
            s = cert.size_bits
            factor = Fraction(400, c)
            d_p = Fraction(400, b) * 2 ** l_pt
            c_p = Fraction(400, a) * 2 ** (s + 1) * CHECK_COST_C * s * s
            assert (rep.factor, rep.d_p, rep.c_p) == (factor, d_p, c_p)
            bound = factor * rep.t_p_x + d_p * rep.time_t_x + c_p
            checked += 1
            failures += not r.total_steps <= bound
    elapsed = time.perf_counter() - start
    ok = len(scenarios) >= 20 and failures == 0 and elapsed < 60
    verdict(1, ok, f"{checked} certified pairs over {len(scenarios)} scenarios, "
                   f"{failures} violations, {elapsed:.1f}s")


def test_ac02_case_analysis(verdict, runs):
    bad = []
    for name, (sc, r) in runs.items():
        t_b = r.t_b or 0
        limit = INF = float("inf")
        if r.t_fast != INF:
            limit = max(4 * t_b, 5 * r.t_fast)
        bound, ok = case_analysis(r)
        if not (r.c_steps <= limit and ok and bound == limit):
            bad.append(name)
    verdict(2, not bad, f"{len(runs)} scenarios, C-steps <= max(4 T_B, 5 t_fast); failing: {bad}")


LEVIN_SET = [
    (IDENTITY, 3, TEST_LIST),
    (IDENTITY, 7, [IDENTITY]),
    (IDENTITY, 3, None),
    (SUCC, 5, None),
    (PRED, 2, None),
    (load_program("parity"), 1, None),
    (load_program("doubling"), 2, None),
    (IDENTITY, 0, None),
    (CONST3, 3, None),
]


def test_ac03_simple_bound(verdict):
    worst = Fraction(0)
    bad = 0
    for g, x, programs in LEVIN_SET:
        rep = simple_search(InversionProblem(g, x), programs, ceiling=1 << 22)
        k = rep.finder_index
        bound = 2 ** k * rep.time_plus + 2 ** (k - 1)
        bad += not (rep.total_steps <= bound and rep.elapsed_slots <= bound)
        worst = max(worst, Fraction(rep.elapsed_slots, bound))
    verdict(3, bad == 0, f"{len(LEVIN_SET)} terminating runs, worst slots/bound = {float(worst):.3f}")


def test_ac04_simple_shares(verdict):
    counts = Counter(simple_index(n) for n in range(1, 2 ** 16 + 1))
    ok = all(counts[k] == 2 ** (16 - k) for k in range(1, 17))
    verdict(4, ok, "program k owns 2^(16-k) of the first 2^16 slots, k = 1..16")


def test_ac05_search_phase_budgets(verdict):
    rows = 0
    bad = 0
    for g, x, programs in LEVIN_SET:
        rep = search_phases(InversionProblem(g, x), ceiling=1 << 22, enumeration=programs)
        pool = programs or first_programs(max(j for log in rep.phases.values() for j, *_ in log))
        for phase, log in rep.phases.items():
            expect = [(j, p.length_bits, (2 ** phase) // (2 ** p.length_bits))
                      for j, p in enumerate(pool, 1) if p.length_bits < phase]
            got = [(j, l, a) for j, l, a, _ in log]
            # the winning phase stops at the finder
            bad += got != expect[:len(got)] or (phase != max(rep.phases) and got != expect)
            rows += len(log)
    verdict(5, bad == 0, f"{rows} (phase, program) allotments match floor(2^i / 2^l(p))")


def test_ac06_scheduler_shares(verdict):
    sc = load_scenario(SCENARIOS / "no_proofs.yaml")
    got = []
    for split, per in (("10,10,80", 8), ("5,5,90", 18)):
        for n in (1, 3, 64, 200):
            r = run_mpstar(sc, Shares.parse(split), max_cycles=n)
            got.append(not r.halted and (r.a_steps, r.b_steps, r.c_steps) == (n, n, per * n))
    verdict(6, all(got), "aborted runs give (N, N, 8N) and (N, N, 18N) for N in 1, 3, 64, 200")


def test_ac07_b_fair_share(verdict):
    rng = random.Random(20240601)
    worst = 0
    trials = 300
    for _ in range(trials):
        count = rng.randint(1, 8)
        exps = []
        while len(exps) < count:
            e = rng.randint(1, 9)
            if sum(Fraction(1, 2 ** f) for f in exps + [e]) <= 1:
                exps.append(e)
            elif len(exps) == 0:
                continue
            else:
                break
        arrive = sorted(rng.randint(0, 200) for _ in exps)
        b = BScheduler()
        pending = list(zip(arrive, exps))
        for now in range(600):
            while pending and pending[0][0] == now:
                b.add(fake_pair(pending.pop(0)[1], order=len(b.tasks) + 1), 0)
            b.tick()
            for t in b.tasks:
                n = b.ticks - t.arrival_tick + 1
                worst = max(worst, abs(t.executed - t.weight * n) / b.live if b.live else 0)
    verdict(7, worst <= 1, f"{trials} random task sets of <= 8 tasks, "
                           f"max |executed - w N| / live = {float(worst):.3f}")


def test_ac08_kraft(verdict, runs):
    worst = max(r.max_kraft for _, r in runs.values())
    weights = all(rec.weight.weight == Fraction(1, 2 ** (rec.p.length_bits + rec.t.length_bits))
                  for _, r in runs.values() for rec in r.pairs)
    verdict(8, worst <= 1 and weights, f"max live weight sum over all B-ticks = {worst}")


def test_ac09_output_correctness(verdict, runs):
    bad = [name for name, (sc, r) in runs.items()
           if not r.halted or r.output != evaluate(sc.pstar, sc.x, 10 ** 8)[0]]
    verdict(9, not bad, f"{len(runs) - len(bad)}/{len(runs)} scenarios match a direct run of p*")


def test_ac10_certificate_soundness(verdict, runs):
    checked = violations = 0
    for name, bits in (("identity", 30), ("nop", 30), ("dead_block", 30), ("add_const", 30),
                       ("rename", 28), ("halve", 22), ("parity", 22)):
        p = load_program(name)
        for b in iter_candidates(p, bits):
            res, cert = check_bits(p, b)
            if res.valid:
                checked += 1
                violations += not agrees_and_bounded(p, cert)
    for sc, r in runs.values():
        if sc.source_kind == "enumerate":
            for rec in r.pairs:
                checked += 1
                violations += not agrees_and_bounded(sc.pstar, rec.cert)
    verdict(10, violations == 0, f"{checked} valid certificates, {violations} violations on inputs 0..63")


def test_ac11_k2_anytime(verdict):
    details = []
    ok = True
    for name in ("dead_tail", "rename", "nop"):
        p = load_program(name)
        traj = [e.best_len_bits for e in k2_trajectory(p, doubling_budgets(DEMO_BUDGET, 64))]
        want = oracle_minimum(p)
        ok &= traj == sorted(traj, reverse=True) and traj[-1] == want
        details.append(f"{name} {traj[0]}->{traj[-1]} (oracle {want})")
    verdict(11, ok, f"budget {DEMO_BUDGET}: " + ", ".join(details))


def test_ac12_determinism(verdict, tmp_path, capsys):
    same = []
    for path in scenario_paths():
        files = []
        for i in range(2):
            out = tmp_path / f"{path.stem}.{i}.csv"
            assert main(["run", str(path), "--trace", str(out)]) == 0
            files.append(out.read_bytes())
        same.append(files[0] == files[1] == (GOLDEN / f"{path.stem}.trace.csv").read_bytes())
    capsys.readouterr()
    verdict(12, all(same), f"{sum(same)}/{len(same)} scenarios byte-identical across runs and golden")


def test_ac13_trace_structure(verdict, tmp_path, capsys):
    out = tmp_path / "flagship.csv"
    assert main(["run", str(SCENARIOS / "flagship.yaml"), "--trace", str(out)]) == 0
    capsys.readouterr()
    events = read_trace_csv(out.read_text())
    stairs = [e.payload["t_fast"] for e in events if e.kind == TFAST_UPDATE]
    ks = [e.payload["k"] for e in events if e.kind == PERIOD_START]
    added = {e.payload["pair"]: e.global_step for e in events if e.kind == PROOF_ADDED}
    preceded = [e for e in events if e.kind == TFAST_UPDATE
                and added.get(e.payload["pair"], float("inf")) < e.global_step]
    ok = (len(stairs) >= 2 and all(a > b for a, b in zip(stairs, stairs[1:]))
          and ks == [2 ** i for i in range(len(ks))] and preceded)
    verdict(13, ok, f"t_fast staircase {stairs}, {len(ks)} doubling periods, "
                    f"{len(preceded)} updates preceded by their PROOF_ADDED")


def test_ac14_wrapper_overhead(verdict):
    names = ("identity", "nop", "dead_tail", "dead_block", "doubling")
    overheads = {}
    for name in names:
        w = build_fastest_shortest(load_program(name), DEMO_BUDGET)
        overheads[name] = w.size_bits - w.inner.length_bits
    ok = set(overheads.values()) == {WRAPPER_OVERHEAD_BITS}
    verdict(14, ok, f"W = {WRAPPER_OVERHEAD_BITS} bits for {len(names)} programs: {overheads}")
