import json

import pytest
from hypothesis import given, settings, strategies as st

from fastalg import vm
from fastalg.asm import assemble
from fastalg.isa import DEC, HALT, INC, JMP, JZ, dec, halt, inc, jmp, jz
from fastalg.vm import (
    Machine,
    MachineState,
    Outcome,
    Program,
    Status,
    count_steps,
    enumerate_programs,
    evaluate,
    run_metered,
)

from conftest import GOLDEN, load_program


def reference_run(p, x, budget):
    """Independent dispatch loop with its own step counter."""
    regs = {0: x}
    pc = steps = 0
    code = p.instructions
    while steps < budget:
        if pc >= len(code):
            return regs.get(0, 0), steps
        ins = code[pc]
        steps += 1
        if ins.op == HALT:
            return regs.get(0, 0), steps
        if ins.op == INC:
            regs[ins.reg] = regs.get(ins.reg, 0) + 1
            pc += 1
        elif ins.op == DEC:
            regs[ins.reg] = max(regs.get(ins.reg, 0) - 1, 0)
            pc += 1
        elif ins.op == JZ:
            pc = ins.target if regs.get(ins.reg, 0) == 0 else pc + 1
        else:
            pc = ins.target
    if pc >= len(code):
        return regs.get(0, 0), steps
    return None


def test_halt_is_identity(kernel):
    out = run_metered(Program.from_instructions([halt()]), 5, 10)
    assert out.kind is Outcome.HALTED
    assert out.output == 5
    assert out.steps == 1


def test_suspend_then_resume(kernel):
    p = Program.from_instructions([inc(0), halt()])
    first = run_metered(p, 0, 1)
    assert first.kind is Outcome.BUDGET_EXHAUSTED
    second = run_metered(p, 0, 1, resume_from=first.state)
    assert second.halted and second.output == 1
    assert second.steps == 2
    # the suspended state handed in is not touched
    assert first.state.steps_executed == 1 and first.state.status is Status.RUNNING


def test_resume_requires_running_state():
    p = Program.from_instructions([halt()])
    done = run_metered(p, 0, 5)
    with pytest.raises(ValueError):
        run_metered(p, 0, 5, resume_from=done.state)


def test_doubling_golden(kernel):
    golden = json.loads((GOLDEN / "vm_doubling.json").read_text())
    p = load_program(golden["program"])
    assert p.bits == golden["bits"]
    out = run_metered(p, golden["input"], 10**6)
    assert (out.output, out.steps) == (golden["output"], golden["steps"])


def test_doubling_matches_hand_trace():
    # loop: 5 steps per unit plus the exit test; drain: 4 per unit of 2x plus exit and HALT
    p = load_program("doubling")
    for x in range(0, 40):
        assert evaluate(p, x, 10**6) == (2 * x, 13 * x + 3)


def test_count_steps():
    assert count_steps(Program.from_instructions([halt()]), 0, 100) == 1
    assert count_steps(Program.from_instructions([jmp(0)]), 0, 50) is None
    p = load_program("doubling")
    assert count_steps(p, 3, 10**6) == run_metered(p, 3, 10**6).steps
    with pytest.raises(ValueError):
        count_steps(p, 3, 0)


def test_falling_off_the_end_halts_without_extra_step():
    p = Program.from_instructions([inc(0)])
    assert evaluate(p, 4, 10) == (5, 1)


def test_dec_saturates(kernel):
    p = Program.from_instructions([dec(0), dec(0), halt()])
    assert evaluate(p, 1, 10) == (0, 3)


def test_halted_state_is_frozen():
    m = Machine(Program.from_instructions([halt()]), 2)
    m.run(5)
    snapshot = m.state.copy()
    assert m.run(5) == 0
    assert m.state == snapshot


def test_zero_budget():
    out = run_metered(load_program("doubling"), 3, 0)
    assert out.kind is Outcome.BUDGET_EXHAUSTED and out.steps == 0
    with pytest.raises(ValueError):
        run_metered(load_program("doubling"), 3, -1)


def test_negative_input_rejected():
    with pytest.raises(ValueError):
        MachineState.fresh(-1)


def test_large_registers_cross_word_size(kernel):
    # start above 2**62 so the compiled loop must hand over to the fallback
    p = Program.from_instructions([inc(0), inc(0), dec(1), halt()])
    big = (1 << 62) + 5
    assert evaluate(p, big, 10) == (big + 2, 4)


PROGRAMS_14 = list(enumerate_programs(14))


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(PROGRAMS_14), st.integers(0, 30), st.integers(1, 300))
def test_kernels_agree_with_reference(p, x, budget):
    expect = reference_run(p, x, budget)
    results = []
    for name in vm.KERNELS:
        previous = vm.use_kernel(name)
        try:
            results.append(evaluate(p, x, budget))
        finally:
            vm.use_kernel(previous)
    assert all(r == expect for r in results)


@settings(max_examples=150, deadline=None)
@given(st.sampled_from([load_program(n) for n in ("doubling", "halve", "slow_identity", "parity")]),
       st.integers(0, 20), st.integers(0, 400), st.integers(0, 400))
def test_split_budget_is_transparent(p, x, a, b):
    whole = run_metered(p, x, a + b)
    first = run_metered(p, x, a)
    if first.halted:
        assert whole.state == first.state
        return
    rest = run_metered(p, x, b, resume_from=first.state)
    assert rest.state == whole.state
    assert rest.kind is whole.kind


@settings(max_examples=100, deadline=None)
@given(st.sampled_from(PROGRAMS_14), st.integers(0, 30))
def test_deterministic(p, x):
    assert run_metered(p, x, 200) == run_metered(p, x, 200)


def test_use_kernel_rejects_unknown():
    with pytest.raises(ValueError):
        vm.use_kernel("fortran")


def test_enumeration_starts_with_halt():
    first = next(enumerate_programs())
    assert first.instructions == (halt(),)
    assert first.length_bits == 2
