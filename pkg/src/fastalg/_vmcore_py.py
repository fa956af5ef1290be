"""Pure-Python interpreter loop; the reference the compiled kernel must match."""

# opcode numbering mirrors fastalg.isa
_INC, _DEC, _JZ, _JMP, _HALT = range(5)

RUNNING, HALTED, BAIL = 0, 1, 2


def run_kernel(ops, args, tgts, regs, pc, budget, nregs=64):
    """Execute at most ``budget`` instructions, mutating ``regs`` in place.

    Returns ``(pc, steps, status)``.  ``status`` is HALTED when a HALT was
    executed or control fell off the end of the program.  ``nregs`` is
    accepted for signature parity with the compiled kernel.
    """
    n = len(ops)
    steps = 0
    while steps < budget:
        op = ops[pc]
        steps += 1
        if op == _INC:
            regs[args[pc]] += 1
            pc += 1
        elif op == _DEC:
            r = args[pc]
            if regs[r]:
                regs[r] -= 1
            pc += 1
        elif op == _JZ:
            if regs[args[pc]]:
                pc += 1
            else:
                pc = tgts[pc]
        elif op == _JMP:
            pc = tgts[pc]
        else:
            return pc, steps, HALTED
        if pc >= n:
            return pc, steps, HALTED
    return pc, steps, RUNNING
