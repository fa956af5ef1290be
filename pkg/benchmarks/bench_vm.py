"""Compare the compiled interpreter loop with the pure-Python one.

    python benchmarks/bench_vm.py [--repeat N]

Each case runs a program to completion with every available kernel and
reports the best wall time, steps per second and the speedup.
"""

import argparse
import time
from pathlib import Path

from fastalg import vm
from fastalg.asm import assemble

PROGRAMS = Path(__file__).resolve().parent.parent / "programs"

CASES = [
    ("slow_identity", 64),
    ("slow_identity", 200),
    ("doubling", 5000),
    ("halve", 20000),
]


def bench(program, x, repeat):
    best = float("inf")
    steps = None
    for _ in range(repeat):
        start = time.perf_counter()
        out = vm.evaluate(program, x, 10**9)
        best = min(best, time.perf_counter() - start)
        steps = out[1]
    return best, steps


def main():
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--repeat", type=int, default=3)
    args = parser.parse_args()
    kernels = sorted(vm.KERNELS)
    if "cython" not in kernels:
        print("compiled kernel not built; run `python setup.py build_ext --inplace` first")
    print(f"{'program':<16}{'x':>7}{'steps':>11}" + "".join(f"{k + ' s':>12}" for k in kernels)
          + ("   speedup" if len(kernels) > 1 else ""))
    previous = vm.KERNEL
    try:
        for name, x in CASES:
            program = assemble((PROGRAMS / f"{name}.asm").read_text())
            times = {}
            for k in kernels:
                vm.use_kernel(k)
                times[k], steps = bench(program, x, args.repeat)
            row = f"{name:<16}{x:>7}{steps:>11}" + "".join(f"{times[k]:>12.4f}" for k in kernels)
            if len(kernels) > 1:
                row += f"{times['python'] / times['cython']:>9.1f}x"
            print(row)
    finally:
        vm.use_kernel(previous)


if __name__ == "__main__":
    main()
