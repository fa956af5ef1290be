"""Upper bounds on K'': the length of the shortest program certifiably
equivalent to a reference program.

Certificates are enumerated exactly as the A component would, and the
shortest subject seen so far is kept.  The estimate can only go down as the
budget grows.  It is relative to the certificate rule set, so it bounds the
true provable-equivalence complexity from above only insofar as the rules
are a sound fragment of provability.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator, Optional

from .proofs import BoundRule, Certificate, EnumeratingSource, make_certificate
from .vm import Program

# Enough A-steps for every demo program in programs/ to reach its minimum.
DEMO_BUDGET = 200_000


@dataclass
class K2Estimate:
    best_len_bits: int
    witness: Program
    witness_cert: Certificate
    budget_spent: int
    certificates_seen: int = 0


def trivial_certificate(pstar: Program) -> Certificate:
    """The empty-chain certificate, which exists for every reference program."""
    try:
        return make_certificate(pstar, (), BoundRule.STEP_COUNTER)
    except ValueError:  # every register in use; fall back to the constant bound
        return make_certificate(pstar, (), BoundRule.LOOP_FREE_CONST)


def k2_trajectory(pstar: Program, budgets: Iterable[int],
                  max_bits: Optional[int] = None) -> Iterator[K2Estimate]:
    """Estimates at each budget in ``budgets`` (sorted ascending), sharing one pass."""
    cert = trivial_certificate(pstar)
    best = K2Estimate(pstar.length_bits, pstar, cert, 0)
    source = EnumeratingSource(pstar, max_bits)
    seen = 0
    spent = 0
    for budget in sorted(budgets):
        for ev in source.advance(budget - spent):
            seen += 1
            if ev.cert.subject.length_bits < best.best_len_bits:
                best = K2Estimate(ev.cert.subject.length_bits, ev.cert.subject, ev.cert, 0)
        spent = budget
        yield K2Estimate(best.best_len_bits, best.witness, best.witness_cert, budget, seen)


def k2_upper_bound(pstar: Program, budget: int, max_bits: Optional[int] = None) -> K2Estimate:
    """Shortest certified equivalent of ``pstar`` found within ``budget`` A-steps."""
    if budget < 0:
        raise ValueError("budget must be >= 0")
    (est,) = k2_trajectory(pstar, [budget], max_bits)
    return est


def doubling_budgets(limit: int, start: int = 1) -> list[int]:
    out = [0]
    b = start
    while b < limit:
        out.append(b)
        b *= 2
    out.append(limit)
    return out
