"""Equivalence-and-time-bound certificates and the sources that emit them.

A certificate claims that ``subject`` computes the same function as a
reference program ``pstar`` and that ``bound`` outputs an upper bound on
``subject``'s step count for every input.  The claim is witnessed by a
chain of local rewrites that turn ``pstar`` into ``subject`` plus a rule
that fixes ``bound``:

``del_dead i m``
    delete the ``m`` instructions at ``i..i+m-1``; none may be reachable.
``del_nop i``
    delete instruction ``i`` when it has no effect: ``JMP i+1``,
    ``JZ r i+1``, or ``INC``/``DEC`` of a register that is neither r0 nor
    tested by any ``JZ``.
``ins_nop i``
    insert ``JMP i+1`` at ``i``.
``ins_dead i INSTR``
    insert ``INSTR`` at ``i``; it must be unreachable afterwards.
``rename i``
    rename the register ``a`` of instruction ``i`` to the smallest register
    ``b`` in 1..63 that the program does not use; requires ``a != 0`` and
    ``b < a``.

Jump targets are renumbered around every insertion and deletion: targets
at or after an insertion point move up by one, targets after a deleted
block move down by its length and targets inside it land on its start.

Bound rules:

``STEP_COUNTER``
    ``bound`` is the instrumented copy of ``subject`` that counts executed
    instructions (:func:`step_counter_program`), so ``bound(x)`` is exactly
    the step count.
``LOOP_FREE_CONST``
    ``subject`` has no backward jumps, so it runs each instruction at most
    once; ``bound`` outputs the instruction count (:func:`constant_program`).

Serialization, all fields big-endian::

    certificate := "0" rule chain            (checked form)
                 | "1" p_bits t_bits          (axiom form, never checkable)
    rule        := "0" STEP_COUNTER | "1" LOOP_FREE_CONST
    chain       := "0" | "1" step chain
    step        := kind:3 pos:6 [gamma(m) | instruction]

    kind 000 del_dead (followed by gamma(m)), 001 del_nop, 010 ins_nop,
         011 ins_dead (followed by the instruction code), 100 rename

A field that is out of range for the program length at that point in the
chain (tracked syntactically: deletions shrink it, insertions grow it)
makes the string malformed rather than merely invalid.

Checking is metered: reading costs one unit per bit, each step two units
per instruction of the program it rewrites, and the bound rule two units
per instruction of the subject.  For reference programs of at most 64
instructions this is below ``CHECK_COST_C * size_bits**2``.
"""

from __future__ import annotations

import enum
from collections import deque
from dataclasses import dataclass, field
from functools import cached_property, lru_cache
from itertools import count
from typing import Iterable, Iterator, Optional, Sequence

from .codec import (
    _instruction_codes,
    encode_instruction,
    gamma_decode,
    gamma_encode,
    read_instruction,
)
from .errors import AssemblyError, DecodeError, MalformedError, ScriptInvalid
from .isa import DEC, HALT, INC, JMP, JZ, NUM_REGISTERS, Instruction
from .vm import Program

CHECK_COST_C = 16
MAX_PROGRAM_LEN = 64
KIND_BITS = 3
POS_BITS = 6

DEL_DEAD, DEL_NOP, INS_NOP, INS_DEAD, RENAME = "del_dead", "del_nop", "ins_nop", "ins_dead", "rename"
KIND_CODES = {DEL_DEAD: "000", DEL_NOP: "001", INS_NOP: "010", INS_DEAD: "011", RENAME: "100"}
_CODE_KINDS = {v: k for k, v in KIND_CODES.items()}


class BoundRule(enum.Enum):
    STEP_COUNTER = "STEP_COUNTER"
    LOOP_FREE_CONST = "LOOP_FREE_CONST"


_RULE_BIT = {BoundRule.STEP_COUNTER: "0", BoundRule.LOOP_FREE_CONST: "1"}


# -- rewrite steps -------------------------------------------------------------

@dataclass(frozen=True)
class Rewrite:
    kind: str
    pos: int
    count: int = 1
    instr: Optional[Instruction] = None

    def __post_init__(self):
        if self.kind not in KIND_CODES:
            raise ValueError(f"unknown rewrite kind {self.kind!r}")
        if not 0 <= self.pos < (1 << POS_BITS):
            raise ValueError(f"position {self.pos} does not fit the position field")
        if self.kind == INS_DEAD and self.instr is None:
            raise ValueError("ins_dead needs an instruction")
        if self.count < 1:
            raise ValueError("block length must be >= 1")

    def encode(self) -> str:
        code = KIND_CODES[self.kind] + format(self.pos, f"0{POS_BITS}b")
        if self.kind == DEL_DEAD:
            code += gamma_encode(self.count)
        elif self.kind == INS_DEAD:
            code += encode_instruction(self.instr)
        return code

    def __str__(self):
        if self.kind == DEL_DEAD:
            return f"{self.kind} {self.pos} {self.count}"
        if self.kind == INS_DEAD:
            return f"{self.kind} {self.pos} {self.instr}"
        return f"{self.kind} {self.pos}"

    @classmethod
    def parse(cls, text: str) -> "Rewrite":
        """Parse the text form used in scenario files, e.g. ``del_dead 4 2``."""
        parts = text.split()
        if len(parts) < 2:
            raise AssemblyError(f"bad rewrite step {text!r}")
        kind, pos = parts[0].lower(), parts[1]
        try:
            pos = int(pos)
            if kind == DEL_DEAD:
                return cls(kind, pos, int(parts[2]) if len(parts) > 2 else 1)
            if kind == INS_DEAD:
                return cls(kind, pos, instr=_parse_instr(parts[2:]))
            if len(parts) != 2:
                raise AssemblyError(f"{kind} takes one operand")
            return cls(kind, pos)
        except ValueError as exc:
            raise AssemblyError(f"bad rewrite step {text!r}: {exc}") from None


def _parse_instr(tokens):
    from .asm import assemble_instructions

    instrs = assemble_instructions(" ".join(tokens))
    if len(instrs) != 1:
        raise AssemblyError("ins_dead takes exactly one instruction")
    return instrs[0]


# -- program analysis -----------------------------------------------------------

def reachable(instrs: Sequence[Instruction]) -> set[int]:
    n = len(instrs)
    seen = set()
    todo = [0]
    while todo:
        i = todo.pop()
        if i in seen or i >= n:
            continue
        seen.add(i)
        ins = instrs[i]
        if ins.op in (INC, DEC, JZ):
            todo.append(i + 1)
        if ins.op in (JZ, JMP):
            todo.append(ins.target)
    return seen


def observed_registers(instrs: Sequence[Instruction]) -> set[int]:
    return {0} | {i.reg for i in instrs if i.op == JZ}


def is_noop(instrs: Sequence[Instruction], i: int) -> bool:
    ins = instrs[i]
    if ins.op in (JMP, JZ):
        return ins.target == i + 1
    if ins.op in (INC, DEC):
        return ins.reg not in observed_registers(instrs)
    return False


def has_backward_jump(instrs: Sequence[Instruction]) -> bool:
    return any(ins.is_jump and ins.target <= i for i, ins in enumerate(instrs))


def free_register(instrs: Sequence[Instruction]) -> Optional[int]:
    used = {i.reg for i in instrs if i.has_reg}
    for r in range(1, NUM_REGISTERS):
        if r not in used:
            return r
    return None


def _delete_block(instrs, i, m):
    def remap(t):
        if t < i:
            return t
        if t < i + m:
            return i
        return t - m

    return [ins.retarget(remap(ins.target)) if ins.is_jump else ins
            for j, ins in enumerate(instrs) if not i <= j < i + m]


def _insert(instrs, i, new):
    out = [ins.retarget(ins.target + 1) if ins.is_jump and ins.target >= i else ins
           for ins in instrs]
    out.insert(i, new)
    return out


def _targets_ok(instrs):
    n = len(instrs)
    return all(ins.target < n for ins in instrs if ins.is_jump)


# -- canonical bound programs ---------------------------------------------------

@lru_cache(maxsize=4096)
def step_counter_program(p: Program) -> Optional[Program]:
    """Program that outputs the number of steps ``p`` takes on the same input.

    r0 is first moved into a spare register ``a`` (four-instruction
    prologue); each original instruction is then preceded by ``INC r0`` and
    runs with r0 renamed to ``a``.  Returns ``None`` if ``p`` uses every
    register.
    """
    a = free_register(p.instructions)
    if a is None:
        return None
    out = [Instruction(JZ, 0, 4), Instruction(DEC, 0), Instruction(INC, a), Instruction(JMP, 0, 0)]
    for ins in p.instructions:
        out.append(Instruction(INC, 0))
        moved = ins.rename(0, a)
        if moved.is_jump:
            moved = moved.retarget(4 + 2 * moved.target)
        out.append(moved)
    return Program.from_instructions(out)


@lru_cache(maxsize=4096)
def constant_program(value: int) -> Program:
    """Clear r0, then increment it ``value`` times (``value >= 1``)."""
    if value < 1:
        raise ValueError("constant bound must be >= 1")
    out = [Instruction(JZ, 0, 3), Instruction(DEC, 0), Instruction(JMP, 0, 0)]
    out += [Instruction(INC, 0)] * value
    return Program.from_instructions(out)


def canonical_bound(subject: Program, rule: BoundRule) -> Optional[Program]:
    if rule is BoundRule.STEP_COUNTER:
        return step_counter_program(subject)
    if has_backward_jump(subject.instructions):
        return None
    return constant_program(len(subject))


# -- certificates ---------------------------------------------------------------

@dataclass(frozen=True, eq=False)
class Certificate:
    subject: Program
    bound: Program
    chain: tuple[Rewrite, ...] = ()
    bound_rule: Optional[BoundRule] = BoundRule.STEP_COUNTER
    axiom: bool = False

    @cached_property
    def bits(self) -> str:
        if self.axiom:
            return "1" + self.subject.bits + self.bound.bits
        return serialize_chain(self.chain, self.bound_rule)

    @property
    def size_bits(self) -> int:
        return len(self.bits)

    @property
    def pair_bits(self) -> str:
        return self.subject.bits + self.bound.bits

    def __eq__(self, other):
        return isinstance(other, Certificate) and other.bits == self.bits and \
            other.pair_bits == self.pair_bits

    def __hash__(self):
        return hash((self.bits, self.pair_bits))

    def describe(self) -> str:
        if self.axiom:
            return "axiom"
        steps = ", ".join(str(s) for s in self.chain) or "-"
        return f"{self.bound_rule.value} [{steps}]"


def serialize_chain(chain: Sequence[Rewrite], rule: BoundRule) -> str:
    return "0" + _RULE_BIT[rule] + "".join("1" + s.encode() for s in chain) + "0"


def axiom_certificate(p: Program, t: Program) -> Certificate:
    """Unchecked certificate for a pair taken on trust (scenario axioms)."""
    return Certificate(p, t, (), None, axiom=True)


@dataclass
class CheckResult:
    valid: bool
    cost: int
    reason: Optional[str] = None
    failed_step: Optional[int] = None
    subject: Optional[Program] = None
    bound: Optional[Program] = None

    def __bool__(self):
        return self.valid


class _Meter:
    __slots__ = ("units",)

    def __init__(self, units=0):
        self.units = units


def _apply_checked(instrs, step: Rewrite, meter: _Meter):
    """Apply one rewrite; returns the new list or a reason string."""
    n = len(instrs)
    meter.units += 2 * n
    i = step.pos
    if step.kind == DEL_DEAD:
        m = step.count
        if i + m > n or m >= n:
            return "block out of range"
        live = reachable(instrs)
        if any(j in live for j in range(i, i + m)):
            return "block is reachable"
        out = _delete_block(instrs, i, m)
    elif step.kind == DEL_NOP:
        if i >= n or n < 2:
            return "position out of range"
        if not is_noop(instrs, i):
            return f"instruction {i} is not a no-op"
        out = _delete_block(instrs, i, 1)
    elif step.kind == INS_NOP:
        if i >= n or n >= MAX_PROGRAM_LEN:
            return "position out of range"
        out = _insert(instrs, i, Instruction(JMP, 0, i + 1))
    elif step.kind == INS_DEAD:
        if i > n or n >= MAX_PROGRAM_LEN:
            return "position out of range"
        if step.instr.is_jump and step.instr.target > n:
            return "inserted jump out of range"
        out = _insert(instrs, i, step.instr)
        if i in reachable(out):
            return "inserted instruction is reachable"
    else:  # RENAME
        if i >= n:
            return "position out of range"
        ins = instrs[i]
        if not ins.has_reg or ins.reg == 0:
            return "instruction has no renamable register"
        b = free_register(instrs)
        if b is None or b >= ins.reg:
            return "no smaller unused register"
        a = ins.reg
        out = [x.rename(a, b) for x in instrs]
    if not _targets_ok(out):
        return "jump target left the program"
    return out


def check_chain(pstar: Program, chain: Sequence[Rewrite], rule: Optional[BoundRule],
                size_bits: Optional[int] = None) -> CheckResult:
    """Validate a rewrite chain plus bound rule against ``pstar``.

    ``size_bits`` is the serialized length charged for reading; it defaults
    to the canonical serialization of ``chain``.
    """
    if rule is None:
        return CheckResult(False, 1, "axiom certificates are not checkable", 0)
    if size_bits is None:
        size_bits = len(serialize_chain(chain, rule))
    meter = _Meter(size_bits)
    instrs = list(pstar.instructions)
    for k, step in enumerate(chain):
        out = _apply_checked(instrs, step, meter)
        if isinstance(out, str):
            return CheckResult(False, meter.units, out, k)
        instrs = out
    meter.units += 2 * len(instrs)
    subject = Program.from_instructions(instrs)
    bound = canonical_bound(subject, rule)
    if bound is None:
        return CheckResult(False, meter.units, f"{rule.value} does not apply", len(chain),
                           subject=subject)
    return CheckResult(True, meter.units, subject=subject, bound=bound)


def check_certificate(pstar: Program, cert: Certificate) -> CheckResult:
    """VALID iff the chain rewrites ``pstar`` into ``cert.subject`` and the
    rule yields ``cert.bound``.  ``result.failed_step`` indexes the chain.
    """
    res = check_chain(pstar, cert.chain, cert.bound_rule, cert.size_bits)
    if not res.valid:
        return res
    if res.subject != cert.subject:
        return CheckResult(False, res.cost, "chain does not produce the claimed subject",
                           len(cert.chain))
    if res.bound != cert.bound:
        return CheckResult(False, res.cost, "bound is not the rule's canonical program",
                           len(cert.chain))
    return res


def make_certificate(pstar: Program, chain: Sequence[Rewrite] = (),
                     rule: BoundRule = BoundRule.STEP_COUNTER) -> Certificate:
    """Build the certificate for ``chain``; raises ValueError if it does not check."""
    chain = tuple(chain)
    res = check_chain(pstar, chain, rule)
    if not res.valid:
        raise ValueError(f"invalid certificate at step {res.failed_step}: {res.reason}")
    return Certificate(res.subject, res.bound, chain, rule)


def check_cost_bound(size_bits: int) -> int:
    return CHECK_COST_C * size_bits * size_bits


def arrival_bound(size_bits: int) -> int:
    """A-steps by which enumeration has checked every candidate of <= size_bits bits.

    Fewer than ``2**(s+1)`` codewords have length <= s and each costs at most
    ``CHECK_COST_C * s**2`` to check.
    """
    return (1 << (size_bits + 1)) * check_cost_bound(size_bits)


# -- decoding -------------------------------------------------------------------

def read_chain_step(bits: str, pos: int, n: int) -> tuple[Rewrite, int, int]:
    """Decode one step for a program of syntactic length ``n``.

    Returns ``(step, new_pos, new_n)``.
    """
    code = bits[pos:pos + KIND_BITS]
    if len(code) < KIND_BITS:
        raise MalformedError("truncated rewrite kind")
    kind = _CODE_KINDS.get(code)
    if kind is None:
        raise MalformedError(f"unknown rewrite kind {code}")
    pos += KIND_BITS
    field_ = bits[pos:pos + POS_BITS]
    if len(field_) < POS_BITS:
        raise MalformedError("truncated position field")
    i = int(field_, 2)
    pos += POS_BITS
    if kind == DEL_DEAD:
        m, used = gamma_decode(bits, pos)
        pos += used
        if i + m > n or m >= n:
            raise MalformedError("deleted block out of range")
        return Rewrite(kind, i, m), pos, n - m
    if kind == DEL_NOP:
        if i >= n or n < 2:
            raise MalformedError("position out of range")
        return Rewrite(kind, i), pos, n - 1
    if kind == INS_NOP:
        if i >= n or n >= MAX_PROGRAM_LEN:
            raise MalformedError("position out of range")
        return Rewrite(kind, i), pos, n + 1
    if kind == INS_DEAD:
        if i > n or n >= MAX_PROGRAM_LEN:
            raise MalformedError("position out of range")
        try:
            ins, pos = read_instruction(bits, pos, n + 1)
        except DecodeError as exc:
            raise MalformedError(str(exc)) from None
        return Rewrite(kind, i, instr=ins), pos, n + 1
    if i >= n:
        raise MalformedError("position out of range")
    return Rewrite(kind, i), pos, n


def decode_chain(bits: str, n0: int) -> tuple[tuple[Rewrite, ...], BoundRule]:
    """Parse a checked-form serialization for a reference of ``n0`` instructions."""
    if len(bits) < 3:
        raise MalformedError("truncated certificate")
    if bits[0] != "0":
        raise MalformedError("axiom-form certificates carry no chain")
    rule = BoundRule.STEP_COUNTER if bits[1] == "0" else BoundRule.LOOP_FREE_CONST
    pos, n = 2, n0
    chain = []
    while True:
        if pos >= len(bits):
            raise MalformedError("truncated chain")
        flag = bits[pos]
        pos += 1
        if flag == "0":
            break
        step, pos, n = read_chain_step(bits, pos, n)
        chain.append(step)
    if pos != len(bits):
        raise MalformedError("trailing bits after certificate")
    return tuple(chain), rule


def check_bits(pstar: Program, bits: str) -> tuple[CheckResult, Optional[Certificate]]:
    """Decode and check one candidate serialization."""
    try:
        chain, rule = decode_chain(bits, len(pstar))
    except MalformedError as exc:
        return CheckResult(False, len(bits), f"malformed: {exc}"), None
    res = check_chain(pstar, chain, rule, len(bits))
    if not res.valid:
        return res, None
    return res, Certificate(res.subject, res.bound, chain, rule)


# -- candidate generation --------------------------------------------------------

def _step_options(n: int):
    """(code, new_n) for every syntactically valid step at program length n."""
    opts = []
    for i in range(n):
        pos = format(i, f"0{POS_BITS}b")
        for m in range(1, min(n - i, n - 1) + 1):
            opts.append((KIND_CODES[DEL_DEAD] + pos + gamma_encode(m), n - m))
        if n >= 2:
            opts.append((KIND_CODES[DEL_NOP] + pos, n - 1))
        if n < MAX_PROGRAM_LEN:
            opts.append((KIND_CODES[INS_NOP] + pos, n + 1))
        opts.append((KIND_CODES[RENAME] + pos, n))
    if n < MAX_PROGRAM_LEN:
        codes = _instruction_codes(n + 1)
        for i in range(n + 1):
            head = KIND_CODES[INS_DEAD] + format(i, f"0{POS_BITS}b")
            for _, words in codes:
                opts.extend((head + w, n + 1) for w in words)
    return opts


class _ChainGrammar:
    """Exact-length generator for chain suffixes, memoized per reference length."""

    def __init__(self, n0: int):
        self.n0 = n0
        self._opts: dict[int, list] = {}
        self._memo: dict[tuple[int, int], list[str]] = {}

    def opts(self, n):
        if n not in self._opts:
            by_len = {}
            for code, n2 in _step_options(n):
                by_len.setdefault(len(code), []).append((code, n2))
            self._opts[n] = sorted(by_len.items())
        return self._opts[n]

    def chains(self, n: int, length: int) -> list[str]:
        if length == 1:
            return ["0"]
        key = (n, length)
        if key in self._memo:
            return self._memo[key]
        out = []
        for size, options in self.opts(n):
            rest = length - 1 - size
            if rest < 1:
                break
            for code, n2 in options:
                tails = self.chains(n2, rest)
                if tails:
                    prefix = "1" + code
                    out.extend(prefix + t for t in tails)
        self._memo[key] = out
        return out


def candidate_bits(pstar: Program, length: int, grammar: Optional[_ChainGrammar] = None) -> list[str]:
    """Every well-formed checked-form serialization of exactly ``length`` bits, sorted."""
    if length < 3:
        return []
    grammar = grammar or _ChainGrammar(len(pstar))
    tails = grammar.chains(len(pstar), length - 2)
    return sorted(["00" + t for t in tails] + ["01" + t for t in tails])


def iter_candidates(pstar: Program, max_bits: Optional[int] = None) -> Iterator[str]:
    """Candidates in length-lexicographic order."""
    grammar = _ChainGrammar(len(pstar))
    for length in count(3):
        if max_bits is not None and length > max_bits:
            return
        yield from candidate_bits(pstar, length, grammar)


# -- proof sources --------------------------------------------------------------

@dataclass(frozen=True)
class ProofEvent:
    a_step: int
    cert: Certificate
    label: Optional[str] = None


class ProofSource:
    """Stateful, deterministic emitter of ProofEvents driven by A-step grants."""

    def __init__(self):
        self.a_steps = 0
        self._pending: deque[ProofEvent] = deque()
        self._lookahead: Optional[ProofEvent] = None
        self._done = False

    def _produce(self) -> Optional[ProofEvent]:
        raise NotImplementedError

    def _peek(self) -> Optional[ProofEvent]:
        if self._lookahead is None and not self._done:
            self._lookahead = self._produce()
            if self._lookahead is None:
                self._done = True
        return self._lookahead

    def advance(self, budget: int) -> list[ProofEvent]:
        """Consume exactly ``budget`` A-steps; return events completed within them."""
        self.a_steps += budget
        out = []
        while True:
            ev = self._peek()
            if ev is None or ev.a_step > self.a_steps:
                return out
            out.append(ev)
            self._lookahead = None

    def next_event(self, budget: int) -> Optional[ProofEvent]:
        """Consume ``budget`` A-steps and return the earliest undelivered event
        that has completed by then, if any."""
        self._pending.extend(self.advance(budget))
        return self._pending.popleft() if self._pending else None


class EnumeratingSource(ProofSource):
    """Checks every candidate serialization in length-lexicographic order."""

    def __init__(self, pstar: Program, max_bits: Optional[int] = None):
        super().__init__()
        self.pstar = pstar
        self.clock = 0
        self.checked = 0
        self._candidates = iter_candidates(pstar, max_bits)

    def _produce(self):
        for bits in self._candidates:
            res, cert = check_bits(self.pstar, bits)
            self.clock += res.cost
            self.checked += 1
            if cert is not None:
                return ProofEvent(self.clock, cert)
        return None


def enumerate_certificates(pstar: Program, a_step_budget: int,
                           max_bits: Optional[int] = None) -> Iterator[ProofEvent]:
    """VALID certificates whose checking completes within ``a_step_budget``."""
    source = EnumeratingSource(pstar, max_bits)
    while True:
        ev = source._peek()
        if ev is None or ev.a_step > a_step_budget:
            return
        source._lookahead = None
        yield ev


@dataclass
class ScriptEntry:
    a_step: int
    p: Optional[Program] = None
    t: Optional[Program] = None
    chain: tuple[Rewrite, ...] = ()
    bound_rule: Optional[BoundRule] = BoundRule.STEP_COUNTER
    declared_valid: bool = True
    trusted: bool = False
    label: Optional[str] = None


class ScriptedSource(ProofSource):
    def __init__(self, events: Sequence[ProofEvent]):
        super().__init__()
        self.events = list(events)
        self._it = iter(self.events)

    def _produce(self):
        return next(self._it, None)


def validate_entry(pstar: Program, entry: ScriptEntry) -> Optional[Certificate]:
    """Certificate an entry stands for, or None for a declared-invalid entry."""
    where = f"script entry {entry.label or entry.a_step}"
    if entry.trusted:
        if entry.p is None or entry.t is None:
            raise ScriptInvalid(f"{where}: trusted entries need both p and t")
        cert = axiom_certificate(entry.p, entry.t)
    else:
        res = check_chain(pstar, entry.chain, entry.bound_rule)
        ok = res.valid and (entry.p is None or entry.p == res.subject) and \
            (entry.t is None or entry.t == res.bound)
        if ok != entry.declared_valid:
            reason = res.reason or "stated p/t differ from what the chain proves"
            raise ScriptInvalid(f"{where}: declared_valid={entry.declared_valid} "
                                f"but re-validation says {'VALID' if ok else 'INVALID: ' + reason}")
        if not ok:
            return None
        cert = Certificate(res.subject, res.bound, tuple(entry.chain), entry.bound_rule)
    limit = arrival_bound(cert.size_bits)
    if entry.a_step > limit:
        raise ScriptInvalid(f"{where}: a_step {entry.a_step} is later than enumeration "
                            f"of a {cert.size_bits}-bit certificate could take ({limit})")
    return cert


def scripted_source(pstar: Program, script: Iterable[ScriptEntry]) -> ScriptedSource:
    """Proof source replaying ``script``; raises ScriptInvalid on bad entries."""
    script = list(script)
    last = 0
    events = []
    for entry in script:
        if entry.a_step < last or entry.a_step < 1:
            raise ScriptInvalid("script entries must be sorted by a_step (>= 1)")
        last = entry.a_step
        cert = validate_entry(pstar, entry)
        if cert is not None:
            events.append(ProofEvent(entry.a_step, cert, entry.label))
    return ScriptedSource(events)
