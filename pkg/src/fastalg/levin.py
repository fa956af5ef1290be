"""Levin search for function inversion.

Two schedules over an enumeration p_1, p_2, ... of programs:

* SIMPLE runs one machine step per time slot; slot ``n`` goes to program
  ``p_k`` with ``k = v2(n) + 1``, giving the ruler sequence 1213121412131215...
* SEARCH runs, in phase ``i = 1, 2, 3, ...``, every program with
  ``l(p) < i`` from scratch for ``2**(i - l(p))`` steps.

A program's candidate ``y`` (its output) only counts once the verifier
``g`` has been run on it, on the same metered machine, and produced the
target ``x``.  Verification steps are charged like any other step.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from itertools import islice
from typing import Iterable, Iterator, Optional

from .errors import SearchExhausted
from .vm import Machine, Program, enumerate_programs


@dataclass(frozen=True)
class InversionProblem:
    g: Program
    x: int


@dataclass
class SearchReport:
    witness: int
    finder_index: int
    total_steps: int
    time_plus: int
    mode: str = "simple"
    finder: Optional[Program] = None
    elapsed_slots: int = 0
    # SEARCH only: phase -> [(program index, l(p), allotment, steps used)]
    phases: dict[int, list[tuple[int, int, int, int]]] = field(default_factory=dict)

    def as_dict(self) -> dict:
        return {
            "mode": self.mode,
            "witness": self.witness,
            "finder_index": self.finder_index,
            "total_steps": self.total_steps,
            "time_plus": self.time_plus,
        }


def simple_index(n: int) -> int:
    """Index of the program that owns slot ``n`` under SIMPLE (1-based)."""
    if n < 1:
        raise ValueError("slots are numbered from 1")
    return ((n & -n).bit_length() - 1) + 1


def simple_bound(k: int, time_plus: int) -> int:
    return (1 << k) * time_plus + (1 << (k - 1))


class _Candidate:
    """One enumerated program plus, once it halts, the verifier run on its output."""

    __slots__ = ("index", "program", "machine", "verifier", "witness", "dead")

    def __init__(self, index, program, x):
        self.index = index
        self.program = program
        self.machine = Machine(program, x)
        self.verifier = None
        self.witness = None
        self.dead = False

    def step(self, g: Program, target: int) -> bool:
        """One machine step; True once a verified witness exists."""
        if self.verifier is None:
            self.machine.run(1)
            if self.machine.halted:
                self.witness = self.machine.output
                self.verifier = Machine(g, self.witness)
            return False
        self.verifier.run(1)
        if self.verifier.halted:
            if self.verifier.output == target:
                return True
            self.dead = True
        return False

    @property
    def time_plus(self) -> int:
        return self.machine.steps + (self.verifier.steps if self.verifier else 0)


def simple_search(problem: InversionProblem, enumeration: Optional[Iterable[Program]] = None,
                  ceiling: int = 1 << 20) -> SearchReport:
    """SIMPLE Levin search over ``enumeration`` (canonical order by default).

    ``ceiling`` caps elapsed time slots.  Slots belonging to programs past
    the end of a finite enumeration, or to programs whose candidate was
    rejected, pass idle and are not machine steps.
    """
    source: Iterator[Program] = iter(enumeration if enumeration is not None else enumerate_programs())
    slots: list[Optional[_Candidate]] = []
    exhausted_source = False
    total = 0
    for n in range(1, ceiling + 1):
        k = simple_index(n)
        while len(slots) < k and not exhausted_source:
            nxt = next(source, None)
            if nxt is None:
                exhausted_source = True
                break
            slots.append(_Candidate(len(slots) + 1, nxt, problem.x))
        if k > len(slots):
            continue
        cand = slots[k - 1]
        if cand.dead:
            continue
        total += 1
        if cand.step(problem.g, problem.x):
            return SearchReport(
                witness=cand.witness, finder_index=k, total_steps=total,
                time_plus=cand.time_plus, mode="simple", finder=cand.program,
                elapsed_slots=n,
            )
    raise SearchExhausted(f"no verified witness within {ceiling} slots", steps=total)


def phase_allotment(phase: int, length_bits: int) -> int:
    """Steps SEARCH gives a program of ``length_bits`` bits in ``phase``."""
    if length_bits >= phase:
        return 0
    return 1 << (phase - length_bits)


def search_phases(problem: InversionProblem, ceiling: int = 1 << 20,
                  enumeration: Optional[Iterable[Program]] = None,
                  max_phase: int = 64) -> SearchReport:
    """SEARCH Levin search; ``ceiling`` caps total machine steps.

    Each program restarts from scratch every phase.  Its allotment covers
    its own run and, if it halts early enough, verifying the candidate.
    """
    if enumeration is not None:
        pool = list(enumeration)
        programs = lambda i: [(j, p) for j, p in enumerate(pool, 1) if p.length_bits < i]
    else:
        canonical: list[Program] = []
        stream = enumerate_programs()

        def programs(i):
            # canonical order is by length, so extend until the next one is too long
            while not canonical or canonical[-1].length_bits < i:
                nxt = next(stream)
                canonical.append(nxt)
            return [(j, p) for j, p in enumerate(canonical, 1) if p.length_bits < i]

    total = 0
    phases: dict[int, list[tuple[int, int, int, int]]] = {}
    for i in range(1, max_phase + 1):
        log = phases.setdefault(i, [])
        for index, p in programs(i):
            allot = phase_allotment(i, p.length_bits)
            if total + allot > ceiling:
                allot = ceiling - total
                if allot <= 0:
                    raise SearchExhausted(f"ceiling of {ceiling} steps reached", steps=total)
            machine = Machine(p, problem.x)
            used = machine.run(allot)
            verified = False
            if machine.halted and used < allot:
                verifier = Machine(problem.g, machine.output)
                used += verifier.run(allot - used)
                verified = verifier.halted and verifier.output == problem.x
            total += used
            log.append((index, p.length_bits, phase_allotment(i, p.length_bits), used))
            if verified:
                return SearchReport(
                    witness=machine.output, finder_index=index, total_steps=total,
                    time_plus=used, mode="search", finder=p, phases=phases,
                )
            if total >= ceiling:
                raise SearchExhausted(f"ceiling of {ceiling} steps reached", steps=total)
    raise SearchExhausted(f"no witness within {max_phase} phases", steps=total)


def first_programs(count: int) -> list[Program]:
    return list(islice(enumerate_programs(), count))
