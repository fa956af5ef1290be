"""Assembly text for counter-machine programs.

One instruction per line::

    # comments run to end of line
    loop:
        JZ r0 done
        DEC r0
        INC r1
        JMP loop
    done:
        HALT

Labels are identifiers followed by ``:`` and may share a line with an
instruction.  A jump operand is a label name or ``@N`` for an absolute
index.  :func:`disassemble` emits ``L<index>`` labels, and
``assemble(disassemble(p)) == p`` holds bit for bit.
"""

from __future__ import annotations

import re

from .errors import AssemblyError, BadTargetError
from .isa import NUM_REGISTERS, OPCODES, Instruction
from .vm import Program

_LABEL = re.compile(r"^([A-Za-z_][A-Za-z0-9_]*)\s*:\s*(.*)$")
_REG = re.compile(r"^[rR](\d+)$")


def _parse_reg(tok, line):
    m = _REG.match(tok)
    if not m:
        raise AssemblyError(f"expected register, got {tok!r}", line)
    r = int(m.group(1))
    if r >= NUM_REGISTERS:
        raise AssemblyError(f"register r{r} out of range", line)
    return r


def assemble_instructions(text: str) -> list[Instruction]:
    labels: dict[str, int] = {}
    pending = []  # (lineno, mnemonic, operands)
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].split(";", 1)[0].strip()
        while True:
            m = _LABEL.match(line)
            if not m:
                break
            name = m.group(1)
            if name in labels:
                raise AssemblyError(f"duplicate label {name!r}", lineno)
            labels[name] = len(pending)
            line = m.group(2).strip()
        if not line:
            continue
        mnemonic, *operands = line.split()
        pending.append((lineno, mnemonic.upper(), operands))

    def target(tok, lineno):
        if tok.startswith("@"):
            try:
                return int(tok[1:])
            except ValueError:
                raise AssemblyError(f"bad absolute target {tok!r}", lineno) from None
        if tok not in labels:
            raise AssemblyError(f"undefined label {tok!r}", lineno)
        return labels[tok]

    arity = {"INC": 1, "DEC": 1, "JZ": 2, "JMP": 1, "HALT": 0}
    out = []
    for lineno, mnemonic, ops in pending:
        if mnemonic not in OPCODES:
            raise AssemblyError(f"unknown mnemonic {mnemonic!r}", lineno)
        if len(ops) != arity[mnemonic]:
            raise AssemblyError(f"{mnemonic} takes {arity[mnemonic]} operand(s)", lineno)
        op = OPCODES[mnemonic]
        if mnemonic in ("INC", "DEC"):
            out.append(Instruction(op, _parse_reg(ops[0], lineno)))
        elif mnemonic == "JZ":
            out.append(Instruction(op, _parse_reg(ops[0], lineno), target(ops[1], lineno)))
        elif mnemonic == "JMP":
            out.append(Instruction(op, 0, target(ops[0], lineno)))
        else:
            out.append(Instruction(op))
    if not out:
        raise AssemblyError("empty program")
    return out


def assemble(text: str) -> Program:
    """Assemble text into a :class:`Program` with canonical bits."""
    instructions = assemble_instructions(text)
    try:
        return Program.from_instructions(instructions)
    except BadTargetError as exc:
        raise AssemblyError(str(exc)) from None


def disassemble(p: Program) -> str:
    targets = {i.target for i in p.instructions if i.is_jump}
    lines = []
    for idx, ins in enumerate(p.instructions):
        if idx in targets:
            lines.append(f"L{idx}:")
        if ins.is_jump:
            operand = f"L{ins.target}"
            text = f"JZ r{ins.reg} {operand}" if ins.name == "JZ" else f"JMP {operand}"
        else:
            text = str(ins)
        lines.append(f"    {text}")
    return "\n".join(lines) + "\n"
