"""DIMACS CNF parsing and emission, with extended parity ("x") lines.

x-line convention (dialects disagree, so pinned here and in golden tests):
"x1 2 0" asserts x1 XOR x2 = 1; a leading minus on the FIRST literal flips
the right-hand side to 0, i.e. "x-1 2 0" asserts x1 XOR x2 = 0.
"""

from __future__ import annotations

import warnings
from dataclasses import dataclass, field

__all__ = ["CnfFormula", "ParseError", "parse", "emit"]


class ParseError(ValueError):
    pass


@dataclass
class CnfFormula:
    num_vars: int
    clauses: list  # list[list[int]], nonempty, no literal 0
    xors: list = field(default_factory=list)  # list[(list[int] of vars, rhs 0/1)]

    def validate(self):
        for cl in self.clauses:
            if not cl:
                raise ParseError("zero-width clause")
            for lit in cl:
                if lit == 0 or abs(lit) > self.num_vars:
                    raise ParseError("literal %d out of range" % lit)
        for sup, rhs in self.xors:
            if rhs not in (0, 1):
                raise ParseError("xor rhs must be 0 or 1")
            for v in sup:
                if not 1 <= v <= self.num_vars:
                    raise ParseError("xor variable %d out of range" % v)
        return self


def parse(text: str) -> CnfFormula:
    """Parse DIMACS CNF text; clause-count mismatch warns, bad literals raise."""
    num_vars = None
    declared_clauses = None
    clauses = []
    xors = []
    for raw in text.splitlines():
        line = raw.strip()
        if not line or line.startswith("c"):
            continue
        if line.startswith("p"):
            parts = line.split()
            if len(parts) != 4 or parts[1] != "cnf":
                raise ParseError("malformed header: %r" % line)
            try:
                num_vars, declared_clauses = int(parts[2]), int(parts[3])
            except ValueError:
                raise ParseError("malformed header: %r" % line) from None
            continue
        if num_vars is None:
            raise ParseError("clause before header")
        if line.startswith("x"):
            lits = [int(t) for t in line[1:].split()]
            if not lits or lits[-1] != 0:
                raise ParseError("x-line not 0-terminated: %r" % line)
            lits = lits[:-1]
            if not lits:
                raise ParseError("empty x-line")
            rhs = 1
            if lits[0] < 0:
                rhs = 0
                lits[0] = -lits[0]
            if any(l <= 0 for l in lits):
                raise ParseError("only the first x-line literal may be negated")
            xors.append((lits, rhs))
            continue
        lits = [int(t) for t in line.split()]
        if not lits or lits[-1] != 0:
            raise ParseError("clause not 0-terminated: %r" % line)
        lits = lits[:-1]
        if not lits:
            raise ParseError("zero-width clause")
        clauses.append(lits)
    if num_vars is None:
        raise ParseError("missing header")
    if declared_clauses != len(clauses):
        warnings.warn(
            "header declares %d clauses, found %d" % (declared_clauses, len(clauses))
        )
    return CnfFormula(num_vars, clauses, xors).validate()


def emit(formula: CnfFormula, native_xor: bool = True, chunk: int = 6) -> str:
    """Serialize deterministically: clauses in order, x-lines last.

    With native_xor=False, XOR rows are first expanded to plain clauses over
    fresh auxiliary variables (chunked sub-XORs) and the header counts the
    expansion.
    """
    formula.validate()
    if not native_xor and formula.xors:
        from .oracle import expand_xors  # deferred: oracle imports this module

        formula = expand_xors(formula, chunk=chunk)
    lines = ["p cnf %d %d" % (formula.num_vars, len(formula.clauses))]
    for cl in formula.clauses:
        lines.append(" ".join(str(l) for l in cl) + " 0")
    for sup, rhs in formula.xors:
        lits = list(sup)
        head = str(lits[0]) if rhs == 1 else str(-lits[0])
        rest = " ".join(str(v) for v in lits[1:])
        lines.append("x" + head + (" " + rest if rest else "") + " 0")
    return "\n".join(lines) + "\n"
