"""Counter-machine instruction set.

Five opcodes over a file of 64 unbounded natural registers.  Jump targets
are absolute instruction indices.
"""

from __future__ import annotations

from dataclasses import dataclass

INC, DEC, JZ, JMP, HALT = range(5)
OPNAMES = ("INC", "DEC", "JZ", "JMP", "HALT")
OPCODES = {name: code for code, name in enumerate(OPNAMES)}

NUM_REGISTERS = 64


@dataclass(frozen=True)
class Instruction:
    op: int
    reg: int = 0
    target: int = 0

    def __post_init__(self):
        if self.op not in (INC, DEC, JZ, JMP, HALT):
            raise ValueError(f"unknown opcode {self.op!r}")
        if not 0 <= self.reg < NUM_REGISTERS:
            raise ValueError(f"register r{self.reg} out of range")
        if self.target < 0:
            raise ValueError("negative jump target")
        # canonical form: unused fields are zero, so equality is structural
        if self.op in (JMP, HALT) and self.reg:
            object.__setattr__(self, "reg", 0)
        if self.op in (INC, DEC, HALT) and self.target:
            object.__setattr__(self, "target", 0)

    @property
    def name(self) -> str:
        return OPNAMES[self.op]

    @property
    def has_reg(self) -> bool:
        return self.op in (INC, DEC, JZ)

    @property
    def is_jump(self) -> bool:
        return self.op in (JZ, JMP)

    def falls_through(self) -> bool:
        return self.op in (INC, DEC, JZ)

    def retarget(self, target: int) -> "Instruction":
        return Instruction(self.op, self.reg, target)

    def rename(self, old: int, new: int) -> "Instruction":
        if self.has_reg and self.reg == old:
            return Instruction(self.op, new, self.target)
        return self

    def __str__(self):
        if self.op in (INC, DEC):
            return f"{self.name} r{self.reg}"
        if self.op == JZ:
            return f"JZ r{self.reg} @{self.target}"
        if self.op == JMP:
            return f"JMP @{self.target}"
        return "HALT"


def inc(r: int) -> Instruction:
    return Instruction(INC, r)


def dec(r: int) -> Instruction:
    return Instruction(DEC, r)


def jz(r: int, target: int) -> Instruction:
    return Instruction(JZ, r, target)


def jmp(target: int) -> Instruction:
    return Instruction(JMP, 0, target)


def halt() -> Instruction:
    return Instruction(HALT)
