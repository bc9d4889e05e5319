"""Membership oracles: does S have an element in the cell h^-1(0)?

Three interchangeable backends answer the same question:
  * explicit  — S is given outright; vectorized scan over packed bits.
  * exhaustive — S is the model set of a CNF; enumerate all assignments
    (capped at 2^26) against clauses, native XORs, and the hash rows.
  * external  — serialize the conjoined instance to DIMACS and invoke a
    solver subprocess; witnesses are always re-checked in process.
"""

from __future__ import annotations

import math
import shlex
import subprocess
import tempfile
import time
from dataclasses import dataclass, field
from pathlib import Path

import numpy as np

from .dimacs import CnfFormula, emit
from .gf2hash import Assignment, DimensionError, ParityHash

__all__ = [
    "CountingProblem",
    "OracleVerdict",
    "SolverProfile",
    "has_survivor",
    "xor_to_cnf",
    "expand_xors",
    "conjoin",
    "run_external",
    "count_models",
]

EXHAUSTIVE_CAP_VARS = 26
_CHUNK_SHIFT = 20  # enumerate at most 2^20 assignments per numpy block


class ProtocolError(RuntimeError):
    pass


class IntegrityError(RuntimeError):
    """A solver returned a witness that fails the in-process recheck."""


class ParameterError(ValueError):
    pass


@dataclass(frozen=True)
class OracleVerdict:
    answer: str  # "sat" | "unsat" | "unknown"
    witness: Assignment | None = None
    stats: dict = field(default_factory=dict)

    @property
    def is_sat(self) -> bool:
        return self.answer == "sat"


@dataclass(frozen=True)
class SolverProfile:
    """External solver adapter: a command template with an {in} placeholder."""

    template: str
    budget_s: float | None = None
    native_xor: bool = False
    chunk: int = 6


class CountingProblem:
    """The set S whose size is being bounded.

    kind == "explicit": S is a deduplicated list of assignments over n bits.
    kind == "cnf":      S is the model set of `formula`, projected onto the
                        first n variables (n == num_vars unless the formula
                        carries auxiliary variables, as table encodings do).
    """

    def __init__(self, n: int, kind: str, members=None, formula: CnfFormula = None):
        self.n = n
        self.kind = kind
        self.formula = formula
        if kind == "explicit":
            seen = sorted({x.bits for x in members})
            self.members = tuple(Assignment(b, n) for b in seen)
            self._packed = np.array(seen, dtype=np.uint64) if n <= 64 else None
        elif kind == "cnf":
            if formula is None:
                raise ParameterError("cnf problem needs a formula")
            self.members = None
            self._packed = None
        else:
            raise ParameterError("unknown problem kind %r" % kind)

    @classmethod
    def from_explicit(cls, members, n: int) -> "CountingProblem":
        return cls(n, "explicit", members=members)

    @classmethod
    def from_cnf(cls, formula: CnfFormula, n: int = None) -> "CountingProblem":
        return cls(n if n is not None else formula.num_vars, "cnf", formula=formula)

    def __len__(self):
        if self.kind != "explicit":
            raise TypeError("only explicit problems have a known size")
        return len(self.members)


def xor_to_cnf(support, rhs: int, chunk: int = 6, fresh=None):
    """CNF clauses equivalent to XOR(support variables) = rhs.

    Long constraints are chained into ceil((t-1)/(chunk-1)) sub-XORs of
    arity <= chunk through fresh auxiliary variables; a sub-XOR of arity s
    expands to 2^(s-1) clauses.  Empty support: rhs 1 gives the empty
    clause (contradiction), rhs 0 gives no clauses.

    The default allocator numbers auxiliaries from max(support)+1; pass a
    `fresh` callable whenever the enclosing formula has variables outside
    the support, or the auxiliaries will shadow them.
    """
    if chunk < 2:
        raise ParameterError("chunk must be at least 2")
    support = list(support)
    if not support:
        return [[]] if rhs else []
    if fresh is None:
        counter = [max(support)]

        def fresh():
            counter[0] += 1
            return counter[0]

    clauses = []
    pending = support
    # chaining needs arity-3 sub-XORs at minimum (two inputs + the link
    # variable); chunk=2 still works for short constraints but long ones
    # are chained at arity 3
    link = max(chunk, 3)
    while len(pending) > chunk:
        group = pending[: link - 1]
        aux = fresh()
        # aux is defined as the XOR of the group: XOR(group + [aux]) = 0
        clauses.extend(_direct_xor(group + [aux], 0))
        pending = [aux] + pending[link - 1 :]
    clauses.extend(_direct_xor(pending, rhs))
    return clauses


def _direct_xor(vars_, rhs: int):
    """All 2^(s-1) clauses ruling out wrong-parity assignments."""
    s = len(vars_)
    out = []
    for pattern in range(1 << s):
        if pattern.bit_count() & 1 != rhs:
            # forbid the assignment where var i takes bit i of pattern
            out.append(
                [v if not (pattern >> i) & 1 else -v for i, v in enumerate(vars_)]
            )
    return out


def expand_xors(formula: CnfFormula, chunk: int = 6) -> CnfFormula:
    """Replace native XOR rows with plain clauses over fresh auxiliaries."""
    counter = [formula.num_vars]

    def fresh():
        counter[0] += 1
        return counter[0]

    clauses = [list(cl) for cl in formula.clauses]
    for sup, rhs in formula.xors:
        for cl in xor_to_cnf(sup, rhs, chunk=chunk, fresh=fresh):
            if not cl:
                # contradiction: encode on a fresh variable to stay DIMACS-legal
                v = fresh()
                clauses.append([v])
                clauses.append([-v])
            else:
                clauses.append(cl)
    return CnfFormula(counter[0], clauses, [])


def conjoin(formula: CnfFormula, h: ParityHash, native_xor: bool = True,
            chunk: int = 6) -> CnfFormula:
    """Append the hash rows of h to the formula as parity constraints.

    Hash columns address variables 1..h.n, which must be a prefix of the
    formula's variables.  Original clauses and numbering are untouched.
    """
    if h.n > formula.num_vars:
        raise DimensionError(
            "hash width %d exceeds formula variables %d" % (h.n, formula.num_vars)
        )
    xors = list(formula.xors)
    for i, row in enumerate(h.rows):
        sup = [j + 1 for j in range(h.n) if (row >> j) & 1]
        rhs = (h.b_bits >> i) & 1
        xors.append((sup, rhs))
    out = CnfFormula(formula.num_vars, [list(cl) for cl in formula.clauses], xors)
    return out if native_xor else expand_xors(out, chunk=chunk)


# ---------------------------------------------------------------------------
# backends

def _hash_masks(h: ParityHash):
    rows = np.array(h.rows, dtype=np.uint64)
    b = np.array([(h.b_bits >> i) & 1 for i in range(h.m)], dtype=np.uint64)
    return rows, b


def _explicit_survivor(problem: CountingProblem, h: ParityHash) -> OracleVerdict:
    if problem._packed is not None and len(problem._packed):
        mask = np.ones(len(problem._packed), dtype=bool)
        for row, bi in zip(*_hash_masks(h)):
            mask &= (np.bitwise_count(problem._packed & row) & np.uint64(1)) == bi
            if not mask.any():
                return OracleVerdict("unsat")
        idx = int(np.flatnonzero(mask)[0])
        return OracleVerdict("sat", witness=problem.members[idx])
    from .gf2hash import apply_hash

    for x in problem.members:
        if apply_hash(h, x) == 0:
            return OracleVerdict("sat", witness=x)
    return OracleVerdict("unsat")


def _formula_masks(formula: CnfFormula, h: ParityHash = None):
    """Precompute clause/xor data for vectorized evaluation."""
    clause_data = []
    for cl in formula.clauses:
        pos = np.uint64(sum(1 << (l - 1) for l in cl if l > 0))
        neg = np.uint64(sum(1 << (-l - 1) for l in cl if l < 0))
        clause_data.append((pos, neg))
    xor_data = []
    for sup, rhs in formula.xors:
        xor_data.append((np.uint64(sum(1 << (v - 1) for v in sup)), np.uint64(rhs)))
    if h is not None:
        for row, bi in zip(*_hash_masks(h)):
            xor_data.append((row, bi))
    return clause_data, xor_data


def _eval_block(arr, clause_data, xor_data):
    mask = np.ones(arr.shape, dtype=bool)
    one = np.uint64(1)
    zero = np.uint64(0)
    for pos, neg in clause_data:
        sat = (arr & pos) != zero if pos else np.zeros(arr.shape, dtype=bool)
        if neg:
            sat |= (arr & neg) != neg
        mask &= sat
        if not mask.any():
            return mask
    for sup, rhs in xor_data:
        mask &= (np.bitwise_count(arr & sup) & one) == rhs
        if not mask.any():
            return mask
    return mask


def _exhaustive_scan(formula: CnfFormula, h: ParityHash = None,
                     count: bool = False):
    nv = formula.num_vars
    if nv > EXHAUSTIVE_CAP_VARS:
        raise ParameterError(
            "exhaustive backend capped at %d variables, formula has %d"
            % (EXHAUSTIVE_CAP_VARS, nv)
        )
    clause_data, xor_data = _formula_masks(formula, h)
    total = 1 << nv
    found = 0
    step = 1 << min(_CHUNK_SHIFT, nv)
    for start in range(0, total, step):
        arr = np.arange(start, min(start + step, total), dtype=np.uint64)
        mask = _eval_block(arr, clause_data, xor_data)
        if count:
            found += int(mask.sum())
        elif mask.any():
            return int(arr[np.flatnonzero(mask)[0]])
    return found if count else None


def count_models(formula: CnfFormula) -> int:
    """Exact model count by exhaustive enumeration (num_vars <= 26)."""
    return _exhaustive_scan(formula, count=True)


def _check_assignment(formula: CnfFormula, bits: int, h: ParityHash = None) -> bool:
    for cl in formula.clauses:
        if not any((bits >> (l - 1)) & 1 if l > 0 else not (bits >> (-l - 1)) & 1
                   for l in cl):
            return False
    xors = list(formula.xors)
    if h is not None:
        for i, row in enumerate(h.rows):
            sup = [j + 1 for j in range(h.n) if (row >> j) & 1]
            xors.append((sup, (h.b_bits >> i) & 1))
    for sup, rhs in xors:
        parity = 0
        for v in sup:
            parity ^= (bits >> (v - 1)) & 1
        if parity != rhs:
            return False
    return True


def run_external(instance_text: str, profile: SolverProfile,
                 budget: float = None) -> OracleVerdict:
    """Write the instance, run the solver command, parse the s/v protocol."""
    if "{in}" not in profile.template:
        raise ParameterError("solver template must contain an {in} placeholder")
    budget = budget if budget is not None else profile.budget_s
    t0 = time.monotonic()
    with tempfile.NamedTemporaryFile(
        "w", suffix=".cnf", prefix="xorcount_", delete=False
    ) as fh:
        fh.write(instance_text)
        path = fh.name
    try:
        cmd = [
            part.replace("{in}", path) for part in shlex.split(profile.template)
        ]
        try:
            proc = subprocess.run(
                cmd, capture_output=True, text=True, timeout=budget
            )
        except subprocess.TimeoutExpired:
            return OracleVerdict(
                "unknown", stats={"solver_time_s": time.monotonic() - t0,
                                  "reason": "timeout"}
            )
        elapsed = time.monotonic() - t0
        answer = None
        model_bits = {}
        for line in proc.stdout.splitlines():
            line = line.strip()
            if line.startswith("s "):
                tag = line[2:].strip()
                if tag == "SATISFIABLE":
                    answer = "sat"
                elif tag == "UNSATISFIABLE":
                    answer = "unsat"
            elif line.startswith("v "):
                for tok in line[2:].split():
                    lit = int(tok)
                    if lit:
                        model_bits[abs(lit)] = 1 if lit > 0 else 0
        stats = {"solver_time_s": elapsed, "exit_code": proc.returncode}
        if answer is None:
            stats["reason"] = "no solution line"
            stats["stderr"] = proc.stderr[-2000:]
            return OracleVerdict("unknown", stats=stats)
        if answer == "sat" and model_bits:
            bits = 0
            for var, val in model_bits.items():
                if val:
                    bits |= 1 << (var - 1)
            stats["model_bits"] = bits
        return OracleVerdict(answer, stats=stats)
    finally:
        Path(path).unlink(missing_ok=True)


def has_survivor(problem: CountingProblem, h: ParityHash,
                 budget: float = None, solver: SolverProfile = None) -> OracleVerdict:
    """sat iff some x in S has h(x) = 0.

    Explicit problems are scanned directly.  CNF problems go to the external
    solver when a profile is given, otherwise to exhaustive enumeration.
    External witnesses are re-checked in process; a failing recheck is a
    hard integrity error, never silently accepted.
    """
    if problem.kind == "explicit":
        if h.n != problem.n:
            raise DimensionError(
                "hash width %d != problem width %d" % (h.n, problem.n)
            )
        return _explicit_survivor(problem, h)
    formula = problem.formula
    if solver is None:
        bits = _exhaustive_scan(formula, h)
        if bits is None:
            return OracleVerdict("unsat")
        wit = Assignment(bits & ((1 << problem.n) - 1), problem.n)
        return OracleVerdict("sat", witness=wit)
    conj = conjoin(formula, h, native_xor=solver.native_xor, chunk=solver.chunk)
    text = emit(conj, native_xor=solver.native_xor)
    verdict = run_external(text, solver, budget=budget)
    if verdict.answer == "sat":
        bits = verdict.stats.get("model_bits")
        if bits is not None:
            if not _check_assignment(formula, bits, h):
                raise IntegrityError("solver witness fails in-process recheck")
            wit = Assignment(bits & ((1 << problem.n) - 1), problem.n)
            return OracleVerdict("sat", witness=wit, stats=verdict.stats)
    return verdict
