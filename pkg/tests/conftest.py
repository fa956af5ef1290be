from pathlib import Path

import pytest

from fastalg import vm
from fastalg.asm import assemble

ROOT = Path(__file__).resolve().parent.parent
SCENARIOS = ROOT / "scenarios"
PROGRAMS = ROOT / "programs"
GOLDEN = Path(__file__).resolve().parent / "golden"


def load_program(name):
    return assemble((PROGRAMS / f"{name}.asm").read_text())


def scenario_paths():
    return sorted(SCENARIOS.glob("*.yaml"))


@pytest.fixture(params=sorted(vm.KERNELS))
def kernel(request):
    previous = vm.use_kernel(request.param)
    yield request.param
    vm.use_kernel(previous)
