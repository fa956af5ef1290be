"""Self-delimiting binary codes.

Bit strings are Python ``str`` objects over ``'0'``/``'1'``, big-endian
within each binary number.  Every encoder here produces codewords of a
prefix-free code, which is what lets the scheduler hand out
``2**-(l(p) + l(t))`` shares without the total ever exceeding one.

Program layout::

    gamma(n) instr_1 ... instr_n

Instruction layout (opcode prefix code is complete)::

    INC r      10   gamma(r+1)
    DEC r      110  gamma(r+1)
    JZ r t     1110 gamma(r+1) gamma(t+1)
    JMP t      1111 gamma(t+1)
    HALT       0
"""

from __future__ import annotations

from dataclasses import dataclass
from fractions import Fraction
from functools import lru_cache
from typing import Iterable, Iterator

from .errors import BadTargetError, MalformedError, PrefixViolation
from .isa import DEC, HALT, INC, JMP, JZ, NUM_REGISTERS, Instruction

OPCODE_BITS = {INC: "10", DEC: "110", JZ: "1110", JMP: "1111", HALT: "0"}


def gamma_encode(n: int) -> str:
    """Elias-gamma code of ``n >= 1``.

    >>> gamma_encode(1), gamma_encode(2), gamma_encode(4)
    ('1', '010', '00100')
    """
    if n < 1:
        raise ValueError("gamma code is defined for n >= 1")
    b = bin(n)[2:]
    return "0" * (len(b) - 1) + b


def gamma_length(n: int) -> int:
    return 2 * n.bit_length() - 1


def gamma_decode(bits: str, pos: int = 0) -> tuple[int, int]:
    """Decode one gamma codeword starting at ``pos``.

    Returns ``(n, bits_consumed)``; trailing bits are left alone.
    """
    zeros = 0
    i = pos
    while i < len(bits) and bits[i] == "0":
        zeros += 1
        i += 1
    end = i + zeros + 1
    if end > len(bits):
        raise MalformedError(f"truncated gamma code at bit {pos}")
    return int(bits[i:end], 2), end - pos


# -- instructions and programs ------------------------------------------------

def encode_instruction(ins: Instruction) -> str:
    code = OPCODE_BITS[ins.op]
    if ins.has_reg:
        code += gamma_encode(ins.reg + 1)
    if ins.is_jump:
        code += gamma_encode(ins.target + 1)
    return code


def read_opcode(bits: str, pos: int) -> tuple[int, int]:
    if pos >= len(bits):
        raise MalformedError(f"truncated opcode at bit {pos}")
    if bits[pos] == "0":
        return HALT, pos + 1
    if bits[pos + 1:pos + 2] == "0":
        return INC, pos + 2
    if bits[pos + 1:pos + 2] == "":
        raise MalformedError(f"truncated opcode at bit {pos}")
    if bits[pos + 2:pos + 3] == "0":
        return DEC, pos + 3
    if bits[pos + 2:pos + 3] == "" or bits[pos + 3:pos + 4] == "":
        raise MalformedError(f"truncated opcode at bit {pos}")
    return (JZ if bits[pos + 3] == "0" else JMP), pos + 4


def read_instruction(bits: str, pos: int, n: int | None = None) -> tuple[Instruction, int]:
    """Decode one instruction; ``n`` (program length) bounds jump targets."""
    op, pos = read_opcode(bits, pos)
    reg = target = 0
    if op in (INC, DEC, JZ):
        value, used = gamma_decode(bits, pos)
        pos += used
        reg = value - 1
        if reg >= NUM_REGISTERS:
            raise MalformedError(f"register r{reg} out of range")
    if op in (JZ, JMP):
        value, used = gamma_decode(bits, pos)
        pos += used
        target = value - 1
        if n is not None and target >= n:
            raise BadTargetError(f"jump target {target} outside program of length {n}")
    return Instruction(op, reg, target), pos


def encode_instructions(instructions: Iterable[Instruction]) -> str:
    instructions = list(instructions)
    if not instructions:
        raise ValueError("a program has at least one instruction")
    n = len(instructions)
    for ins in instructions:
        if ins.is_jump and ins.target >= n:
            raise BadTargetError(f"jump target {ins.target} outside program of length {n}")
    return gamma_encode(n) + "".join(encode_instruction(i) for i in instructions)


def read_instructions(bits: str, pos: int = 0) -> tuple[tuple[Instruction, ...], int]:
    """Decode a program encoding starting at ``pos``; returns (instructions, end)."""
    _check_alphabet(bits)
    n, used = gamma_decode(bits, pos)
    pos += used
    out = []
    for _ in range(n):
        ins, pos = read_instruction(bits, pos, n)
        out.append(ins)
    return tuple(out), pos


def _check_alphabet(bits: str):
    if bits.strip("01"):
        raise MalformedError("bit strings may only contain '0' and '1'")


# -- pairs and Kraft accounting ------------------------------------------------

def encode_pair(p, t) -> str:
    """Concatenate two self-delimiting program encodings."""
    return p.bits + t.bits


def decode_pair_bits(bits: str) -> tuple[str, str]:
    _, mid = read_instructions(bits, 0)
    _, end = read_instructions(bits, mid)
    if end != len(bits):
        raise MalformedError("trailing bits after pair encoding")
    return bits[:mid], bits[mid:]


@dataclass(frozen=True)
class PairWeight:
    """Exact share ``2**-(p_len_bits + t_len_bits)`` of a (program, bound) pair."""

    p_len_bits: int
    t_len_bits: int

    @property
    def exponent(self) -> int:
        return self.p_len_bits + self.t_len_bits

    @property
    def weight(self) -> Fraction:
        return Fraction(1, 1 << self.exponent)

    @classmethod
    def of(cls, p, t) -> "PairWeight":
        return cls(p.length_bits, t.length_bits)


def check_prefix_free(codewords: Iterable[str]) -> list[str]:
    words = sorted(set(codewords))
    for a, b in zip(words, words[1:]):
        # in sorted order a prefix is always immediately followed by an extension
        if b.startswith(a):
            raise PrefixViolation(f"{a!r} is a prefix of {b!r}")
    return words


def kraft_sum(codewords: Iterable[str]) -> Fraction:
    """Exact ``sum(2**-len(w))`` over a prefix-free set.

    Raises :class:`PrefixViolation` when one codeword extends another; for
    a prefix-free set the sum can never exceed one.
    """
    words = check_prefix_free(codewords)
    if not words:
        return Fraction(0)
    top = max(len(w) for w in words)
    total = sum(1 << (top - len(w)) for w in words)
    return Fraction(total, 1 << top)


# -- canonical enumeration ----------------------------------------------------

@lru_cache(maxsize=None)
def _instruction_codes(n: int) -> tuple[tuple[int, tuple[str, ...]], ...]:
    """All instruction encodings valid in an ``n``-instruction program, by length."""
    by_len: dict[int, list[str]] = {}

    def add(code):
        by_len.setdefault(len(code), []).append(code)

    add(OPCODE_BITS[HALT])
    for r in range(NUM_REGISTERS):
        g = gamma_encode(r + 1)
        add(OPCODE_BITS[INC] + g)
        add(OPCODE_BITS[DEC] + g)
        for t in range(n):
            add(OPCODE_BITS[JZ] + g + gamma_encode(t + 1))
    for t in range(n):
        add(OPCODE_BITS[JMP] + gamma_encode(t + 1))
    return tuple(sorted((k, tuple(v)) for k, v in by_len.items()))


def _sequences(n: int, count: int, length: int) -> list[str]:
    """Concatenations of ``count`` instruction codes (for an n-program) of total ``length``."""
    memo: dict[tuple[int, int], list[str]] = {}
    codes = _instruction_codes(n)

    def go(k, rem):
        if k == 0:
            return [""] if rem == 0 else []
        key = (k, rem)
        if key in memo:
            return memo[key]
        out = []
        for size, words in codes:
            if size + (k - 1) > rem:
                break
            tails = go(k - 1, rem - size)
            if tails:
                out.extend(w + tail for w in words for tail in tails)
        memo[key] = out
        return out

    return go(count, length)


def programs_of_length(length: int) -> list[str]:
    """Every valid program encoding of exactly ``length`` bits, sorted."""
    out = []
    n = 1
    while True:
        header = gamma_encode(n)
        if len(header) + n > length:
            break
        out.extend(header + body for body in _sequences(n, n, length - len(header)))
        n += 1
    out.sort()
    return out


def enumerate_program_bits(max_length: int | None = None) -> Iterator[str]:
    """Program encodings in length-lexicographic order (the canonical enumeration)."""
    length = 2
    while max_length is None or length <= max_length:
        yield from programs_of_length(length)
        length += 1
