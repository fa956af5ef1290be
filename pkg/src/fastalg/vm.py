"""Step-metered counter machine.

One step is one executed instruction.  Input goes in register 0, all other
registers start at zero, and the output is register 0 when the machine
halts.  A machine halts on ``HALT`` (which costs a step) or when control
runs past the last instruction (which does not).  ``DEC`` on zero leaves
the register at zero, so every decoded program is total per step.

The inner loop lives in :mod:`fastalg._vmcore` when the extension is built
and falls back to :mod:`fastalg._vmcore_py` otherwise.  Set
``FASTALG_PURE_PYTHON=1`` to force the fallback.
"""

from __future__ import annotations

import enum
import os
from array import array
from dataclasses import dataclass, field
from functools import cached_property
from typing import Iterable, Iterator, Optional, Sequence

from . import _vmcore_py
from .codec import encode_instructions, enumerate_program_bits, read_instructions
from .errors import MalformedError
from .isa import NUM_REGISTERS, Instruction

try:
    if os.environ.get("FASTALG_PURE_PYTHON"):
        raise ImportError("pure python requested")
    from . import _vmcore as _vmcore_ext
except ImportError:  # extension not built
    _vmcore_ext = None

KERNELS = {"python": _vmcore_py.run_kernel}
if _vmcore_ext is not None:
    KERNELS["cython"] = _vmcore_ext.run_kernel

KERNEL = "cython" if "cython" in KERNELS else "python"
_kernel = KERNELS[KERNEL]

_BAIL = _vmcore_py.BAIL


def use_kernel(name: str) -> str:
    """Select the interpreter loop by name; returns the previous name."""
    global KERNEL, _kernel
    if name not in KERNELS:
        raise ValueError(f"kernel {name!r} not available (have {sorted(KERNELS)})")
    previous = KERNEL
    KERNEL, _kernel = name, KERNELS[name]
    return previous


@dataclass(frozen=True, eq=False)
class Program:
    """A decoded program together with its self-delimiting encoding."""

    bits: str
    instructions: tuple[Instruction, ...]

    @property
    def length_bits(self) -> int:
        return len(self.bits)

    def __len__(self):
        return len(self.instructions)

    def __eq__(self, other):
        return isinstance(other, Program) and other.bits == self.bits

    def __hash__(self):
        return hash(self.bits)

    def __repr__(self):
        body = "; ".join(str(i) for i in self.instructions)
        return f"Program[{self.length_bits}b]({body})"

    @classmethod
    def from_instructions(cls, instructions: Iterable[Instruction]) -> "Program":
        instructions = tuple(instructions)
        return cls(encode_instructions(instructions), instructions)

    @cached_property
    def registers_used(self) -> frozenset[int]:
        return frozenset(i.reg for i in self.instructions if i.has_reg)

    @cached_property
    def _arrays(self):
        ops = array("i", (i.op for i in self.instructions))
        args = array("i", (i.reg for i in self.instructions))
        tgts = array("i", (i.target for i in self.instructions))
        nregs = max(self.registers_used, default=0) + 1
        return ops, args, tgts, nregs


def decode_program(bits: str) -> Program:
    """Decode a complete program encoding.

    Raises :class:`MalformedError` for truncated or trailing input and
    :class:`BadTargetError` for out-of-range jumps.
    """
    instructions, end = read_instructions(bits, 0)
    if end != len(bits):
        raise MalformedError(f"{len(bits) - end} trailing bits after program")
    return Program(bits, instructions)


def read_program(bits: str, pos: int = 0) -> tuple[Program, int]:
    """Decode the program starting at ``pos``; returns it and the end offset."""
    instructions, end = read_instructions(bits, pos)
    return Program(bits[pos:end], instructions), end


class Status(enum.Enum):
    RUNNING = "RUNNING"
    HALTED = "HALTED"
    FAULT = "FAULT"


@dataclass
class MachineState:
    pc: int = 0
    registers: list[int] = field(default_factory=lambda: [0] * NUM_REGISTERS)
    steps_executed: int = 0
    status: Status = Status.RUNNING

    @classmethod
    def fresh(cls, x: int) -> "MachineState":
        if x < 0:
            raise ValueError("inputs are natural numbers")
        regs = [0] * NUM_REGISTERS
        regs[0] = x
        return cls(registers=regs)

    def copy(self) -> "MachineState":
        return MachineState(self.pc, list(self.registers), self.steps_executed, self.status)

    @property
    def output(self) -> int:
        return self.registers[0]


class Outcome(enum.Enum):
    HALTED = "HALTED"
    BUDGET_EXHAUSTED = "BUDGET_EXHAUSTED"
    FAULT = "FAULT"


@dataclass
class RunOutcome:
    kind: Outcome
    state: MachineState
    output: Optional[int] = None

    @property
    def halted(self) -> bool:
        return self.kind is Outcome.HALTED

    @property
    def steps(self) -> int:
        return self.state.steps_executed


def advance(program: Program, state: MachineState, budget: int) -> int:
    """Run ``state`` forward in place by at most ``budget`` steps.

    Returns the number of steps executed.  Halted states are left untouched.
    """
    if state.status is not Status.RUNNING or budget <= 0:
        return 0
    ops, args, tgts, nregs = program._arrays
    regs = state.registers
    pc, steps, status = _kernel(ops, args, tgts, regs, state.pc, budget, nregs)
    if status == _BAIL:
        # a register outgrew the compiled kernel's word size
        pc, more, status = _vmcore_py.run_kernel(ops, args, tgts, regs, pc, budget - steps)
        steps += more
    state.pc = pc
    state.steps_executed += steps
    if status:
        state.status = Status.HALTED
    return steps


def run_metered(p: Program, x: int, budget: int,
                resume_from: Optional[MachineState] = None) -> RunOutcome:
    """Run ``p`` on ``x`` for at most ``budget`` steps.

    When ``resume_from`` is given the run continues from a copy of it, so
    the caller's state object is never mutated.
    """
    if budget < 0:
        raise ValueError("budget must be >= 0")
    if resume_from is not None:
        if resume_from.status is not Status.RUNNING:
            raise ValueError("can only resume a RUNNING machine")
        state = resume_from.copy()
    else:
        state = MachineState.fresh(x)
    advance(p, state, budget)
    if state.status is Status.HALTED:
        return RunOutcome(Outcome.HALTED, state, state.output)
    return RunOutcome(Outcome.BUDGET_EXHAUSTED, state)


def count_steps(p: Program, x: int, ceiling: int) -> Optional[int]:
    """Exact step count of ``p`` on ``x``, or ``None`` if it runs past ``ceiling``."""
    if ceiling < 1:
        raise ValueError("ceiling must be >= 1")
    out = run_metered(p, x, ceiling)
    return out.steps if out.halted else None


def evaluate(p: Program, x: int, ceiling: int) -> Optional[tuple[int, int]]:
    """``(output, steps)`` if ``p`` halts on ``x`` within ``ceiling`` steps."""
    out = run_metered(p, x, ceiling)
    return (out.output, out.steps) if out.halted else None


class Machine:
    """A program bound to a live state; the unit the schedulers drive."""

    __slots__ = ("program", "state")

    def __init__(self, program: Program, x: int):
        self.program = program
        self.state = MachineState.fresh(x)

    def run(self, budget: int) -> int:
        return advance(self.program, self.state, budget)

    @property
    def halted(self) -> bool:
        return self.state.status is Status.HALTED

    @property
    def steps(self) -> int:
        return self.state.steps_executed

    @property
    def output(self) -> int:
        return self.state.registers[0]


def program(instructions: Sequence[Instruction]) -> Program:
    return Program.from_instructions(instructions)


def enumerate_programs(max_length: Optional[int] = None) -> Iterator[Program]:
    """Canonical length-lexicographic enumeration p_1, p_2, ... of all programs."""
    for bits in enumerate_program_bits(max_length):
        instructions, _ = read_instructions(bits, 0)
        yield Program(bits, instructions)
