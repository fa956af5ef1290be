"""Scenario files: a reference program, an input and a proof source.

Scenarios are YAML documents::

    name: flagship
    pstar: |                  # or: pstar_file: ../programs/foo.asm
        JZ r0 done
        ...
    x: 12
    ceiling: 2000000          # global step safety net (optional)
    shares: [10, 10, 80]      # optional
    designated: fast          # pair used by verify-bound (optional)
    source:
      kind: scripted          # or: enumerate
      max_bits: 40            # enumerate only, optional
      script:
        - id: fast
          a_step: 120
          chain: [del_dead 5 2, rename 3]
          bound_rule: STEP_COUNTER
          declared_valid: true
        - id: axiom
          a_step: 400
          p: HALT
          t: |
            INC r0
          trusted: true

Script ``p``/``t`` fields are assembly text.  A non-trusted entry is
re-checked against ``pstar``; a trusted entry is taken as an axiom but
still has to produce ``pstar(x)`` on ``x`` within its own bound.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional, Union

import yaml

from .asm import assemble
from .errors import AssemblyError, ScenarioError, ScriptInvalid
from .proofs import (
    BoundRule,
    Certificate,
    EnumeratingSource,
    ProofSource,
    Rewrite,
    ScriptEntry,
    make_certificate,
    scripted_source,
    validate_entry,
)
from .vm import Program, evaluate

DEFAULT_CEILING = 50_000_000
SANITY_CEILING = 10_000_000


@dataclass
class Scenario:
    name: str
    pstar: Program
    x: int
    source_kind: str = "scripted"
    script: list[ScriptEntry] = field(default_factory=list)
    max_bits: Optional[int] = None
    ceiling: int = DEFAULT_CEILING
    shares: tuple[int, int, int] = (10, 10, 80)
    designated: Optional[str] = None
    description: str = ""
    path: Optional[Path] = None

    def make_source(self) -> ProofSource:
        """A fresh proof source; sources are stateful, so one per run."""
        if self.source_kind == "enumerate":
            return EnumeratingSource(self.pstar, self.max_bits)
        return scripted_source(self.pstar, self.script)

    def designated_certificate(self) -> tuple[str, Certificate]:
        """The pair named by ``designated`` (default: the first script entry,
        or the empty-chain certificate of ``pstar``)."""
        key = self.designated
        if key in (None, "pstar") and (key == "pstar" or not self.script):
            return "pstar", make_certificate(self.pstar)
        for entry in self.script:
            if key is None or entry.label == key:
                cert = validate_entry(self.pstar, entry)
                if cert is None:
                    raise ScenarioError(f"designated entry {entry.label!r} is declared invalid")
                return entry.label or str(entry.a_step), cert
        raise ScenarioError(f"no script entry with id {key!r}")

    def sanity_check(self) -> None:
        """Trusted entries must agree with ``pstar`` on ``x`` and respect their bound."""
        want = evaluate(self.pstar, self.x, SANITY_CEILING)
        if want is None:
            raise ScenarioError(f"{self.name}: reference program does not halt on x={self.x}")
        for entry in self.script:
            if not entry.trusted:
                continue
            got = evaluate(entry.p, self.x, SANITY_CEILING)
            bound = evaluate(entry.t, self.x, SANITY_CEILING)
            if got is None or got[0] != want[0]:
                raise ScriptInvalid(f"trusted entry {entry.label!r} disagrees with pstar on x")
            if bound is None or bound[0] < got[1]:
                raise ScriptInvalid(f"trusted entry {entry.label!r}: bound below actual runtime")


def _program(value, where) -> Program:
    if not isinstance(value, str):
        raise ScenarioError(f"{where}: expected assembly text")
    try:
        return assemble(value)
    except AssemblyError as exc:
        raise ScenarioError(f"{where}: {exc}") from None


def _entry(raw: dict, n: int) -> ScriptEntry:
    if not isinstance(raw, dict) or "a_step" not in raw:
        raise ScenarioError(f"script entry {n}: needs at least a_step")
    label = str(raw.get("id", n))
    chain = raw.get("chain") or []
    if isinstance(chain, str):
        chain = [s for s in chain.split(",") if s.strip()]
    try:
        steps = tuple(Rewrite.parse(s) for s in chain)
        rule = BoundRule(str(raw.get("bound_rule", "STEP_COUNTER")).upper())
    except (AssemblyError, ValueError) as exc:
        raise ScenarioError(f"script entry {label}: {exc}") from None
    return ScriptEntry(
        a_step=int(raw["a_step"]),
        p=_program(raw["p"], f"entry {label} p") if "p" in raw else None,
        t=_program(raw["t"], f"entry {label} t") if "t" in raw else None,
        chain=steps,
        bound_rule=rule,
        declared_valid=bool(raw.get("declared_valid", True)),
        trusted=bool(raw.get("trusted", False)),
        label=label,
    )


def parse_scenario(data: Union[str, dict], name: str = "scenario",
                   base: Optional[Path] = None) -> Scenario:
    if isinstance(data, str):
        try:
            data = yaml.safe_load(data)
        except yaml.YAMLError as exc:
            raise ScenarioError(f"bad YAML: {exc}") from None
    if not isinstance(data, dict):
        raise ScenarioError("scenario must be a mapping")
    if "pstar_file" in data and "pstar" not in data:
        ref = Path(base or ".") / str(data["pstar_file"])
        try:
            data = dict(data, pstar=ref.read_text())
        except OSError as exc:
            raise ScenarioError(f"cannot read {ref}: {exc.strerror}") from None
    for key in ("pstar", "x"):
        if key not in data:
            raise ScenarioError(f"missing required key {key!r}")
    x = data["x"]
    if not isinstance(x, int) or x < 0:
        raise ScenarioError("x must be a natural number")
    source = data.get("source") or {"kind": "scripted", "script": []}
    kind = source.get("kind", "scripted")
    if kind not in ("scripted", "enumerate"):
        raise ScenarioError(f"unknown source kind {kind!r}")
    script = [_entry(e, n) for n, e in enumerate(source.get("script") or [], 1)]
    shares = tuple(int(s) for s in data.get("shares", (10, 10, 80)))
    if len(shares) != 3:
        raise ScenarioError("shares must have three entries")
    designated = data.get("designated")
    return Scenario(
        name=str(data.get("name", name)),
        pstar=_program(data["pstar"], "pstar"),
        x=x,
        source_kind=kind,
        script=script,
        max_bits=source.get("max_bits"),
        ceiling=int(data.get("ceiling", DEFAULT_CEILING)),
        shares=shares,
        designated=None if designated is None else str(designated),
        description=str(data.get("description", "")),
    )


def load_scenario(path: Union[str, Path]) -> Scenario:
    path = Path(path)
    try:
        text = path.read_text()
    except OSError as exc:
        raise ScenarioError(f"cannot read {path}: {exc.strerror}") from None
    sc = parse_scenario(text, path.stem, path.parent)
    sc.path = path
    return sc
