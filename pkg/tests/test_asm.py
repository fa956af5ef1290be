import pytest
from hypothesis import given, settings, strategies as st

from fastalg.asm import assemble, assemble_instructions, disassemble
from fastalg.errors import AssemblyError
from fastalg.isa import halt, inc, jmp, jz
from fastalg.vm import Program, decode_program, enumerate_programs

from conftest import PROGRAMS, load_program


def test_labels_and_comments():
    p = assemble("""
        # comment
        top: JZ r0 end   ; trailing comment
             DEC r0
             JMP top
        end:
             HALT
    """)
    assert p.instructions[0] == jz(0, 3)
    assert p.instructions[2] == jmp(0)


def test_absolute_targets():
    assert assemble("JMP @1\nHALT").instructions == (jmp(1), halt())


def test_bits_match_codec():
    text = "INC r0\nHALT"
    p = assemble(text)
    assert decode_program(p.bits) == p
    assert p == Program.from_instructions([inc(0), halt()])


@pytest.mark.parametrize("text, needle", [
    ("FOO r1", "unknown mnemonic"),
    ("INC r64", "out of range"),
    ("INC x1", "expected register"),
    ("JMP nowhere", "undefined label"),
    ("a: INC r0\na: HALT", "duplicate label"),
    ("JZ r0", "operand"),
    ("", "empty program"),
    ("INC r0\nJMP end\nend:", "target"),
])
def test_errors(text, needle):
    with pytest.raises(AssemblyError) as err:
        assemble(text)
    assert needle in str(err.value)


def test_error_reports_line():
    with pytest.raises(AssemblyError) as err:
        assemble("INC r0\n\nBOGUS")
    assert "line 3" in str(err.value)


@pytest.mark.parametrize("path", sorted(PROGRAMS.glob("*.asm")), ids=lambda p: p.stem)
def test_demo_programs_round_trip(path):
    p = assemble(path.read_text())
    assert assemble(disassemble(p)) == p


@settings(max_examples=200, deadline=None)
@given(st.sampled_from(list(enumerate_programs(16))))
def test_disassembly_round_trip(p):
    again = assemble(disassemble(p))
    assert again.bits == p.bits
