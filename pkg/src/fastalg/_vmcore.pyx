# cython: language_level=3, boundscheck=False, wraparound=False, cdivision=True
"""Compiled interpreter loop.

Registers are unboxed into 64-bit words for the duration of a call.  If a
register is (or would become) too large for a word the kernel stops early
with status BAIL and the caller finishes the budget with the Python loop,
so register values stay unbounded naturals.
"""

from libc.stdint cimport uint64_t

cdef enum:
    OP_INC = 0
    OP_DEC = 1
    OP_JZ = 2
    OP_JMP = 3

cdef enum:
    RUNNING = 0
    HALTED = 1
    BAIL = 2

cdef uint64_t LIMIT = (<uint64_t>1) << 62


def run_kernel(const int[::1] ops, const int[::1] args, const int[::1] tgts,
               list regs, Py_ssize_t pc, long long budget, int nregs=64):
    cdef uint64_t r[64]
    cdef Py_ssize_t n = ops.shape[0]
    cdef long long steps = 0
    cdef int op, i
    cdef int status = RUNNING
    if nregs > 64:
        nregs = 64
    for i in range(nregs):
        value = regs[i]
        if value >= LIMIT:
            return pc, 0, BAIL
        r[i] = value
    with nogil:
        while steps < budget:
            op = ops[pc]
            if op == OP_INC:
                i = args[pc]
                if r[i] >= LIMIT:
                    status = BAIL
                    break
                r[i] += 1
                pc += 1
            elif op == OP_DEC:
                i = args[pc]
                if r[i]:
                    r[i] -= 1
                pc += 1
            elif op == OP_JZ:
                if r[args[pc]]:
                    pc += 1
                else:
                    pc = tgts[pc]
            elif op == OP_JMP:
                pc = tgts[pc]
            else:
                steps += 1
                status = HALTED
                break
            steps += 1
            if pc >= n:
                status = HALTED
                break
    for i in range(nregs):
        regs[i] = r[i]
    return pc, steps, status
