"""The three-component speed-up construction around a reference program ``pstar``.

Three components share one deterministic clock.  Each macro-cycle gives A
(proof enumeration) its steps first, then B (time-bound evaluation), then
C (doubling execution); with the default 10/10/80 split that is 1, 1 and 8
steps.  Every slot counts towards ``total_steps`` whether or not the
component had work to do in it.

Shared state: ``L`` (certified pairs, in arrival order), ``t_fast`` (the
smallest bound value evaluated so far, initially infinite) and ``p_fast``
(initially ``pstar``).

* A asks the proof source for one step of work; every new certified pair
  is appended to ``L`` and handed to B.
* B credits each live task with its weight ``2**-(l(p)+l(t))``.  Among the
  tasks with positive credit, the richest (earliest arrival on ties) runs
  one step of ``t`` on ``x`` and pays one credit.  When ``t``
  halts with ``v < t_fast``, ``t_fast := v`` and ``p_fast := p``.
* C runs periods ``k = 1, 2, 4, ...``; each period restarts ``p_fast`` (as
  it is at the period's first step) from scratch for up to ``k`` steps.
  The first run that halts ends everything.

Long stretches where A and B provably have nothing to do are fast-forwarded
in one go; the trace and every counter come out identical to stepping.
"""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field
from fractions import Fraction
from heapq import heappop, heappush
from math import gcd
from typing import IO, Iterable, Optional, Sequence, Union

from .codec import PairWeight, gamma_decode, gamma_encode
from .complexity import K2Estimate, k2_upper_bound
from .errors import BoundViolated, CeilingExceeded, MalformedError, ScenarioError
from .proofs import (
    CHECK_COST_C,
    Certificate,
    EnumeratingSource,
    ProofEvent,
    ProofSource,
)
from .scenario import Scenario
from .vm import Machine, Program, evaluate, read_program, run_metered

INFINITY = math.inf

PROOF_ADDED = "PROOF_ADDED"
TFAST_UPDATE = "TFAST_UPDATE"
PERIOD_START = "PERIOD_START"
HALT_OUTPUT = "HALT_OUTPUT"


# -- configuration ----------------------------------------------------------------

@dataclass(frozen=True)
class Shares:
    """Percent split between A, B and C; the macro-cycle is the split over its gcd."""

    a: int = 10
    b: int = 10
    c: int = 80

    def __post_init__(self):
        if min(self.a, self.b, self.c) <= 0 or self.a + self.b + self.c != 100:
            raise ValueError("shares must be positive integers summing to 100")

    @classmethod
    def parse(cls, text: Union[str, Sequence[int]]) -> "Shares":
        if isinstance(text, str):
            try:
                parts = [int(s) for s in text.split(",")]
            except ValueError:
                raise ValueError(f"bad share split {text!r}") from None
        else:
            parts = list(text)
        if len(parts) != 3:
            raise ValueError("share split needs three numbers")
        return cls(*parts)

    @property
    def per_cycle(self) -> tuple[int, int, int]:
        g = gcd(gcd(self.a, self.b), self.c)
        return self.a // g, self.b // g, self.c // g

    @property
    def cycle_length(self) -> int:
        return sum(self.per_cycle)

    def __str__(self):
        return f"{self.a},{self.b},{self.c}"


# -- records ------------------------------------------------------------------------

@dataclass
class TraceEvent:
    global_step: int
    component: str
    kind: str
    payload: dict

    def payload_text(self) -> str:
        return ";".join(f"{k}={_fmt(v)}" for k, v in self.payload.items())


def _fmt(v) -> str:
    if v is None:
        return "-"
    if isinstance(v, float) and math.isinf(v):
        return "inf"
    return str(v)


@dataclass
class PairRecord:
    """One entry of L plus what B learned about it."""

    id: int
    p: Program
    t: Program
    cert: Certificate
    label: Optional[str]
    added_step: int
    added_a_step: int
    weight: PairWeight
    completed_step: Optional[int] = None
    value: Optional[int] = None

    @property
    def name(self) -> str:
        return self.label or str(self.id)


@dataclass
class BTask:
    pair: PairRecord
    order: int
    arrival_tick: int
    machine: Machine
    exponent: int
    executed: int = 0
    done: bool = False

    @property
    def weight(self) -> Fraction:
        return Fraction(1, 1 << self.exponent)

    def credit(self, tick: int) -> Fraction:
        """Credit after the crediting phase of B-tick ``tick``."""
        return Fraction(tick - self.arrival_tick + 1, 1 << self.exponent) - self.executed

    @property
    def next_eligible(self) -> int:
        """First tick at which the credit is positive again."""
        return self.arrival_tick + (self.executed << self.exponent)


@dataclass
class CPeriod:
    k: int
    program: Program
    bound_at_start: Union[int, float]
    start_step: int
    steps_used: int = 0


@dataclass
class SharedState:
    pstar: Program
    L: list[PairRecord] = field(default_factory=list)
    t_fast: Union[int, float] = INFINITY
    p_fast: Optional[Program] = None
    output: Optional[int] = None

    def __post_init__(self):
        if self.p_fast is None:
            self.p_fast = self.pstar


class BScheduler:
    """Max-credit weighted round robin over live time-bound evaluations.

    Credits are never materialized per tick: a task's credit after tick T is
    ``(T - arrival + 1) * w - executed``, so tasks wait in a heap keyed by
    the tick at which their credit next becomes positive.  Credit always
    stays above -1, which keeps every task within one step of its share.
    """

    def __init__(self):
        self.ticks = 0
        self.tasks: list[BTask] = []
        self._heap: list[tuple[int, int, BTask]] = []
        self._pool: list[BTask] = []
        self.kraft = Fraction(0)
        self.max_kraft = Fraction(0)
        self.live = 0

    def add(self, pair: PairRecord, x: int) -> BTask:
        task = BTask(pair, len(self.tasks), self.ticks + 1, Machine(pair.t, x), pair.weight.exponent)
        self.tasks.append(task)
        heappush(self._heap, (task.next_eligible, task.order, task))
        self.kraft += task.weight
        self.live += 1
        if self.kraft > 1:
            raise AssertionError(f"Kraft sum {self.kraft} exceeds 1")
        return task

    def tick(self) -> tuple[Optional[BTask], bool]:
        """One B-step.  Returns (task that ran or None, whether it finished)."""
        self.ticks += 1
        now = self.ticks
        self.max_kraft = max(self.max_kraft, self.kraft)
        heap, pool = self._heap, self._pool
        while heap and heap[0][0] <= now:
            pool.append(heappop(heap)[2])
        if not pool:
            return None, False
        best = pool[0]
        best_credit = best.credit(now)
        for task in pool[1:]:
            c = task.credit(now)
            if c > best_credit or (c == best_credit and task.order < best.order):
                best, best_credit = task, c
        best.machine.run(1)
        best.executed += 1
        if best.machine.halted:
            best.done = True
            pool.remove(best)
            self.kraft -= best.weight
            self.live -= 1
            return best, True
        if best.next_eligible > now:
            pool.remove(best)
            heappush(heap, (best.next_eligible, best.order, best))
        return best, False

    def idle_ticks(self) -> Union[int, float]:
        """How many upcoming ticks are certain to execute nothing."""
        if self._pool:
            return 0
        if not self._heap:
            return INFINITY
        return self._heap[0][0] - self.ticks - 1

    def skip(self, n: int) -> None:
        if n > self.idle_ticks():
            raise AssertionError("skipping over a B-step that has work")
        self.ticks += n
        self.max_kraft = max(self.max_kraft, self.kraft)

    def live_tasks(self) -> list[BTask]:
        return [t for t in self.tasks if not t.done]


@dataclass
class MStarResult:
    output: Optional[int]
    total_steps: int
    trace: list[TraceEvent]
    halted: bool
    shares: Shares
    cycles: int
    a_steps: int
    b_steps: int
    c_steps: int
    t_fast: Union[int, float]
    p_fast: Program
    pairs: list[PairRecord]
    periods: list[CPeriod]
    max_kraft: Fraction

    @property
    def t_b(self) -> Optional[int]:
        """Global step of the last t_fast improvement (None if there was none)."""
        steps = [e.global_step for e in self.trace if e.kind == TFAST_UPDATE]
        return steps[-1] if steps else None

    def pair(self, key: Union[int, str]) -> Optional[PairRecord]:
        for rec in self.pairs:
            if rec.id == key or (rec.label is not None and rec.label == str(key)):
                return rec
        return None

    def pair_for(self, cert: Certificate) -> Optional[PairRecord]:
        for rec in self.pairs:
            if rec.p == cert.subject and rec.t == cert.bound:
                return rec
        return None


def component_counts(total_steps: int, shares: Shares) -> tuple[int, int, int]:
    """(A, B, C) slots among the first ``total_steps`` global steps."""
    a_n, b_n, c_n = shares.per_cycle
    full, rem = divmod(total_steps, a_n + b_n + c_n)
    return (full * a_n + min(rem, a_n),
            full * b_n + min(max(rem - a_n, 0), b_n),
            full * c_n + max(rem - a_n - b_n, 0))


# -- the scheduler ----------------------------------------------------------------------

class MStar:
    def __init__(self, pstar: Program, x: int, source: ProofSource,
                 shares: Shares = Shares(), ceiling: Optional[int] = None,
                 fast_forward: bool = True):
        self.state = SharedState(pstar)
        self.x = x
        self.source = source
        self.shares = shares
        self.ceiling = ceiling
        self.fast_forward = fast_forward
        self.a_n, self.b_n, self.c_n = shares.per_cycle
        self.cycle_len = self.a_n + self.b_n + self.c_n
        self.b = BScheduler()
        self.trace: list[TraceEvent] = []
        self.periods: list[CPeriod] = []
        self._seen_pairs: set[str] = set()
        self.cycles = 0
        self.c_index = 0  # C-steps executed so far
        self._c_machine: Optional[Machine] = None
        self.halt_step: Optional[int] = None

    # clock helpers
    def _c_global(self, j: int) -> int:
        cycle, off = divmod(j, self.c_n)
        return cycle * self.cycle_len + self.a_n + self.b_n + off + 1

    def _emit(self, step, component, kind, **payload):
        self.trace.append(TraceEvent(step, component, kind, payload))

    # A
    def _add_proof(self, ev: ProofEvent, step: int, a_step: int):
        cert = ev.cert
        key = cert.pair_bits
        if key in self._seen_pairs:
            return
        self._seen_pairs.add(key)
        rec = PairRecord(len(self.state.L) + 1, cert.subject, cert.bound, cert, ev.label,
                         step, a_step, PairWeight.of(cert.subject, cert.bound))
        self.state.L.append(rec)
        self.b.add(rec, self.x)
        payload = {"pair": rec.id}
        if ev.label is not None:
            payload["id"] = ev.label
        payload.update(lp=cert.subject.length_bits, lt=cert.bound.length_bits, proof=cert.size_bits)
        self._emit(step, "A", PROOF_ADDED, **payload)

    # B
    def _b_step(self, step: int):
        task, finished = self.b.tick()
        if not finished:
            return
        rec = task.pair
        rec.completed_step = step
        rec.value = task.machine.output
        if rec.value < self.state.t_fast:
            self.state.t_fast = rec.value
            self.state.p_fast = rec.p
            self._emit(step, "B", TFAST_UPDATE, t_fast=rec.value, pair=rec.id)

    # C
    def _run_c(self, nsteps: int) -> bool:
        remaining = nsteps
        while remaining > 0:
            period = self.periods[-1] if self.periods else None
            if period is None or period.steps_used == period.k:
                k = 1 if period is None else 2 * period.k
                step = self._c_global(self.c_index)
                period = CPeriod(k, self.state.p_fast, self.state.t_fast, step)
                self.periods.append(period)
                self._c_machine = Machine(self.state.p_fast, self.x)
                self._emit(step, "C", PERIOD_START, k=k, t_fast=self.state.t_fast)
            budget = min(remaining, period.k - period.steps_used)
            done = self._c_machine.run(budget)
            self.c_index += done
            period.steps_used += done
            remaining -= done
            if self._c_machine.halted:
                self.halt_step = self._c_global(self.c_index - 1)
                self.state.output = self._c_machine.output
                self._emit(self.halt_step, "C", HALT_OUTPUT, output=self.state.output, k=period.k)
                return True
        return False

    def _cycle(self) -> bool:
        base = self.cycles * self.cycle_len
        for i in range(self.a_n):
            a_step = self.cycles * self.a_n + i + 1
            for ev in self.source.advance(1):
                self._add_proof(ev, base + i + 1, a_step)
        for i in range(self.b_n):
            self._b_step(base + self.a_n + i + 1)
        halted = self._run_c(self.c_n)
        self.cycles += 1
        return halted

    def _idle_cycles(self) -> Union[int, float]:
        """Whole cycles from now in which neither A nor B does anything."""
        ev = self.source._peek()
        fa = INFINITY if ev is None else (ev.a_step - 1) // self.a_n - self.cycles
        idle_b = self.b.idle_ticks()
        fb = INFINITY if idle_b == INFINITY else idle_b // self.b_n
        return min(fa, fb)

    def _skip(self, n: int) -> bool:
        if self.source.advance(n * self.a_n):
            raise AssertionError("fast-forward skipped a proof arrival")
        self.b.skip(n * self.b_n)
        halted = self._run_c(n * self.c_n)
        self.cycles = (self.halt_step - 1) // self.cycle_len + 1 if halted else self.cycles + n
        return halted

    def run(self, max_cycles: Optional[int] = None) -> MStarResult:
        """Run until C halts, ``max_cycles`` complete, or the ceiling is hit."""
        limit = INFINITY if max_cycles is None else max_cycles
        if self.ceiling is not None:
            limit = min(limit, -(-self.ceiling // self.cycle_len))
        halted = self.halt_step is not None
        while not halted and self.cycles < limit:
            n = self._idle_cycles() if self.fast_forward else 0
            n = min(n, limit - self.cycles)
            if n >= 2:
                halted = self._skip(int(n))
            else:
                halted = self._cycle()
        result = self.result()
        stopped_early = not halted and (max_cycles is None or self.cycles < max_cycles)
        if self.ceiling is not None and (result.total_steps > self.ceiling or stopped_early):
            raise CeilingExceeded(f"no output within {self.ceiling} steps", partial=result)
        return result

    def result(self) -> MStarResult:
        halted = self.halt_step is not None
        total = self.halt_step if halted else self.cycles * self.cycle_len
        a, b, c = component_counts(total, self.shares)
        return MStarResult(
            output=self.state.output, total_steps=total, trace=list(self.trace),
            halted=halted, shares=self.shares, cycles=self.cycles,
            a_steps=a, b_steps=b, c_steps=c, t_fast=self.state.t_fast,
            p_fast=self.state.p_fast, pairs=list(self.state.L), periods=list(self.periods),
            max_kraft=self.b.max_kraft,
        )


def run_mpstar(scenario: Scenario, shares: Optional[Shares] = None,
               ceiling: Optional[int] = None, max_cycles: Optional[int] = None,
               fast_forward: bool = True) -> MStarResult:
    """Run the construction on a scenario.

    Raises :class:`CeilingExceeded` (carrying the partial result) if no
    output appears within the step ceiling.
    """
    shares = shares or Shares.parse(scenario.shares)
    machine = MStar(scenario.pstar, scenario.x, scenario.make_source(), shares,
                    ceiling if ceiling is not None else scenario.ceiling, fast_forward)
    return machine.run(max_cycles)


def b_tick(state: BScheduler, x: Optional[int] = None) -> tuple[Optional[BTask], bool]:
    """One B-step on a standalone scheduler (``x`` is fixed when tasks are added)."""
    return state.tick()


def c_period(p_fast: Program, x: int, k: int) -> tuple[str, Optional[int]]:
    """A fresh run of ``p_fast`` for at most ``k`` steps: ("HALT", output) or ("CONTINUE", None)."""
    out = run_metered(p_fast, x, k)
    return ("HALT", out.output) if out.halted else ("CONTINUE", None)


# -- trace IO ------------------------------------------------------------------------------

TRACE_HEADER = ("global_step", "component", "kind", "payload")


def format_trace(events: Iterable[TraceEvent], fmt: str = "csv") -> str:
    buf = io.StringIO()
    write_trace(events, buf, fmt)
    return buf.getvalue()


def write_trace(events: Iterable[TraceEvent], out: IO[str], fmt: str = "csv") -> None:
    if fmt == "csv":
        w = csv.writer(out, lineterminator="\n")
        w.writerow(TRACE_HEADER)
        for e in events:
            w.writerow((e.global_step, e.component, e.kind, e.payload_text()))
    elif fmt == "ndjson":
        for e in events:
            payload = {k: _fmt(v) if isinstance(v, float) else v for k, v in e.payload.items()}
            out.write(json.dumps({"global_step": e.global_step, "component": e.component,
                                  "kind": e.kind, "payload": payload}) + "\n")
    else:
        raise ValueError(f"unknown trace format {fmt!r}")


def _parse_value(v: str):
    if v == "inf":
        return INFINITY
    try:
        return int(v)
    except ValueError:
        return v


def read_trace_csv(text: str) -> list[TraceEvent]:
    rows = list(csv.reader(io.StringIO(text)))
    if not rows or tuple(rows[0]) != TRACE_HEADER:
        raise ValueError("not a trace CSV")
    out = []
    for step, comp, kind, payload in rows[1:]:
        fields = dict(kv.split("=", 1) for kv in payload.split(";") if kv)
        out.append(TraceEvent(int(step), comp, kind, {k: _parse_value(v) for k, v in fields.items()}))
    return out


# -- time bound verification -----------------------------------------------------------------

@dataclass
class BoundReport:
    scenario: str
    designated: str
    total_steps: int
    c_steps: int
    t_p_x: int
    time_t_x: int
    l_p: int
    l_t: int
    l_proof: int
    check_c: int
    shares: Shares
    factor: Fraction
    d_p: Fraction
    c_p: Fraction
    bound: Fraction
    holds: bool
    t_a: Optional[int]
    t_b: Optional[int]
    tight_bound: Union[Fraction, float]
    tight_holds: bool
    t_b_last: Optional[int]
    t_fast_final: Union[int, float]
    case_bound: Union[Fraction, float]
    case_holds: bool

    def lines(self) -> list[str]:
        def n(v):
            if isinstance(v, float):
                return "inf"
            if isinstance(v, Fraction) and v.denominator == 1:
                return str(v.numerator)
            return str(v)

        return [
            f"scenario={self.scenario} pair={self.designated} shares={self.shares}",
            f"total_steps={self.total_steps} c_steps={self.c_steps}",
            f"t_p(x)={self.t_p_x} time_t(x)={self.time_t_x} l(p)={self.l_p} l(t)={self.l_t} "
            f"l(proof)={self.l_proof} c={self.check_c}",
            f"factor={n(self.factor)} d_p={n(self.d_p)} c_p={n(self.c_p)}",
            f"bound={n(self.bound)} {'PASS' if self.holds else 'FAIL'}",
            f"T_A={n(self.t_a)} T_B={n(self.t_b)} max(4T_B,factor*t_p)={n(self.tight_bound)} "
            f"{'PASS' if self.tight_holds else 'FAIL'}",
            f"c_steps<=max(4T_B_last,factor*t_fast)={n(self.case_bound)} "
            f"{'PASS' if self.case_holds else 'FAIL'}",
        ]


def theorem1_constants(l_p: int, l_t: int, l_proof: int, shares: Shares = Shares()):
    """(factor, d_p, c_p) for the configured split: 4/alpha_C, 4/alpha_B * 2^(l(p)+l(t)),
    4/alpha_A * 2^(l(proof)+1) * c * l(proof)^2."""
    factor = Fraction(400, shares.c)
    d_p = Fraction(400, shares.b) * (1 << (l_p + l_t))
    c_p = Fraction(400, shares.a) * (1 << (l_proof + 1)) * CHECK_COST_C * l_proof * l_proof
    return factor, d_p, c_p


def case_analysis(result: MStarResult) -> tuple[Union[Fraction, float], bool]:
    """C-steps against max{4 T_B, factor * t_fast_final}, T_B = last t_fast update."""
    if result.t_fast == INFINITY:
        return INFINITY, True
    factor = Fraction(400, result.shares.c)
    bound = max(Fraction(4 * (result.t_b or 0)), factor * result.t_fast)
    return bound, result.c_steps <= bound


def verify_theorem1_bound(scenario: Scenario, designated: Union[None, str, Certificate] = None,
                          result: Optional[MStarResult] = None, shares: Optional[Shares] = None,
                          raise_on_fail: bool = True) -> BoundReport:
    """Check the measured run against the time bound for one certified pair.

    ``t_p(x)`` and ``time_t(x)`` come from separate metered runs of the
    bound program, not from the scheduler.  Raises :class:`BoundViolated`
    if either the bound or the intermediate inequality fails.
    """
    if isinstance(designated, Certificate):
        name, cert = "custom", designated
    else:
        if designated is not None:
            scenario = _with_designated(scenario, designated)
        name, cert = scenario.designated_certificate()
    shares = shares or (result.shares if result else Shares.parse(scenario.shares))
    if result is None:
        result = run_mpstar(scenario, shares)
    t_run = evaluate(cert.bound, scenario.x, max(scenario.ceiling, 10 * result.total_steps))
    if t_run is None:
        raise ScenarioError(f"bound program of {name} does not halt on x within the ceiling")
    t_p_x, time_t_x = t_run
    factor, d_p, c_p = theorem1_constants(cert.subject.length_bits, cert.bound.length_bits,
                                          cert.size_bits, shares)
    bound = factor * t_p_x + d_p * time_t_x + c_p
    rec = result.pair_for(cert)
    t_a = rec.added_step if rec else None
    t_b = rec.completed_step if rec else None
    if t_b is None:
        # B had not finished this pair when C halted, so the run ended before T_B
        tight = INFINITY
    else:
        tight = max(Fraction(4 * t_b), factor * t_p_x)
    case_bound, case_ok = case_analysis(result)
    report = BoundReport(
        scenario=scenario.name, designated=name, total_steps=result.total_steps,
        c_steps=result.c_steps, t_p_x=t_p_x, time_t_x=time_t_x,
        l_p=cert.subject.length_bits, l_t=cert.bound.length_bits, l_proof=cert.size_bits,
        check_c=CHECK_COST_C, shares=shares, factor=factor, d_p=d_p, c_p=c_p, bound=bound,
        holds=result.total_steps <= bound, t_a=t_a, t_b=t_b, tight_bound=tight,
        tight_holds=result.total_steps <= tight, t_b_last=result.t_b,
        t_fast_final=result.t_fast, case_bound=case_bound, case_holds=case_ok,
    )
    if raise_on_fail and not (report.holds and report.tight_holds and report.case_holds):
        raise BoundViolated(f"{scenario.name}: measured run exceeds its time bound", report)
    return report


def _with_designated(scenario: Scenario, key: str) -> Scenario:
    from dataclasses import replace

    return replace(scenario, designated=key)


# -- shortest-program wrapper -----------------------------------------------------------------

WRAPPER_MAGIC = "1101"


def wrapper_header(shares: Shares = Shares()) -> str:
    """Fixed bits describing the scheduler; the wrapped program follows them."""
    return WRAPPER_MAGIC + gamma_encode(shares.a) + gamma_encode(shares.b) + gamma_encode(shares.c)


WRAPPER_OVERHEAD_BITS = len(wrapper_header())


@dataclass
class WrappedDescription:
    bits: str
    inner: Program
    estimate: K2Estimate
    overhead_bits: int = WRAPPER_OVERHEAD_BITS

    @property
    def size_bits(self) -> int:
        return len(self.bits)


def build_fastest_shortest(pstar: Program, budget: int) -> WrappedDescription:
    """Wrap the shortest certified equivalent of ``pstar`` found within ``budget``."""
    est = k2_upper_bound(pstar, budget)
    return WrappedDescription(wrapper_header() + est.witness.bits, est.witness, est)


def decode_wrapped(bits: str) -> tuple[Shares, Program]:
    if not bits.startswith(WRAPPER_MAGIC):
        raise MalformedError("not a wrapped description")
    pos = len(WRAPPER_MAGIC)
    parts = []
    for _ in range(3):
        v, used = gamma_decode(bits, pos)
        parts.append(v)
        pos += used
    prog, end = read_program(bits, pos)
    if end != len(bits):
        raise MalformedError("trailing bits after wrapped program")
    try:
        return Shares(*parts), prog
    except ValueError as exc:
        raise MalformedError(str(exc)) from None


def run_wrapped(bits: str, x: int, ceiling: int = 10_000_000,
                max_bits: Optional[int] = None) -> MStarResult:
    """Run the construction described by a wrapped description on ``x``."""
    shares, inner = decode_wrapped(bits)
    return MStar(inner, x, EnumeratingSource(inner, max_bits), shares, ceiling).run()
