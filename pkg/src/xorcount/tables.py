"""Contingency-table counting problems.

A spec fixes row/column marginals (optionally 0-1 cells and structural
zeros); the count of tables meeting it is the quantity of interest.  Small
specs are counted exactly by pruned enumeration; any spec lowers to a CNF
whose models over the cell bits are exactly the admissible tables, so the
hashing bounds apply.  Cell bits come first in the variable order and
adder auxiliaries after, so parity constraints range over cell bits only.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, field

from .dimacs import CnfFormula
from .gf2hash import Assignment, HashParams, ParityHash, sample_hash
from .oracle import CountingProblem

__all__ = [
    "ContingencyTableSpec",
    "CellEncoding",
    "CapacityError",
    "brute_force_count",
    "enumerate_tables",
    "encode_to_cnf",
    "hash_over_cells",
    "synth_spec",
    "parse_table_spec",
    "format_table_spec",
]

MAX_CELLS = 64
MAX_SEARCH_ESTIMATE = 10**9


class CapacityError(ValueError):
    pass


@dataclass(frozen=True)
class ContingencyTableSpec:
    rows: int
    cols: int
    row_marginals: tuple
    col_marginals: tuple
    binary: bool = False
    structural_zeros: frozenset = frozenset()

    def __post_init__(self):
        object.__setattr__(self, "row_marginals", tuple(self.row_marginals))
        object.__setattr__(self, "col_marginals", tuple(self.col_marginals))
        object.__setattr__(self, "structural_zeros",
                           frozenset(self.structural_zeros))
        if len(self.row_marginals) != self.rows or len(self.col_marginals) != self.cols:
            raise ValueError("marginal lengths must match the table shape")
        if any(x < 0 for x in self.row_marginals + self.col_marginals):
            raise ValueError("marginals must be nonnegative")
        if self.binary:
            if any(x > self.cols for x in self.row_marginals):
                raise ValueError("binary row marginal exceeds column count")
            if any(x > self.rows for x in self.col_marginals):
                raise ValueError("binary column marginal exceeds row count")
        for (i, j) in self.structural_zeros:
            if not (0 <= i < self.rows and 0 <= j < self.cols):
                raise ValueError("structural zero (%d,%d) out of range" % (i, j))
        if sum(self.row_marginals) != sum(self.col_marginals):
            warnings.warn("row and column marginals disagree; the count is 0")

    def transpose(self) -> "ContingencyTableSpec":
        return ContingencyTableSpec(
            self.cols, self.rows, self.col_marginals, self.row_marginals,
            self.binary, frozenset((j, i) for i, j in self.structural_zeros),
        )

    def cell_max(self, i: int, j: int) -> int:
        if (i, j) in self.structural_zeros:
            return 0
        cap = min(self.row_marginals[i], self.col_marginals[j])
        return min(cap, 1) if self.binary else cap


def synth_spec(n: int) -> ContingencyTableSpec:
    """n x n binary blocked-matrix family; both marginals {1, n-1, ..., n-1}.
    Its exact count is 1 + (n-1)^2."""
    marg = (1,) + (n - 1,) * (n - 1)
    return ContingencyTableSpec(n, n, marg, marg, binary=True)


def _search_estimate(spec: ContingencyTableSpec) -> float:
    """Pessimistic per-row composition-count product (pruning not modeled)."""
    est = 1.0
    for i in range(spec.rows):
        free = sum(1 for j in range(spec.cols) if (i, j) not in spec.structural_zeros)
        r = spec.row_marginals[i]
        if spec.binary:
            est *= math.comb(free, min(r, free))
        else:
            est *= math.comb(free + r - 1, max(free - 1, 0)) if free else 1.0
        if est > 1e18:
            break
    return est


def _row_fill_options(spec, i, caps):
    """Yield rows (tuples) summing to R_i within per-cell caps."""
    r = spec.row_marginals[i]
    cols = spec.cols
    ubs = []
    for j in range(cols):
        ub = 0 if (i, j) in spec.structural_zeros else min(caps[j], r)
        if spec.binary:
            ub = min(ub, 1)
        ubs.append(ub)
    suffix = [0] * (cols + 1)
    for j in range(cols - 1, -1, -1):
        suffix[j] = suffix[j + 1] + ubs[j]
    row = [0] * cols

    def rec(j, rem):
        if j == cols:
            if rem == 0:
                yield tuple(row)
            return
        if rem > suffix[j]:
            return
        lo = max(0, rem - suffix[j + 1])
        for v in range(lo, min(ubs[j], rem) + 1):
            row[j] = v
            yield from rec(j + 1, rem - v)
        row[j] = 0

    yield from rec(0, r)


def _columns_feasible(spec, caps, next_row):
    """Can the remaining rows still cover every residual column demand?"""
    rows_left = spec.rows - next_row
    for j, cap in enumerate(caps):
        if cap == 0:
            continue
        avail = 0
        for k in range(next_row, spec.rows):
            if (k, j) in spec.structural_zeros:
                continue
            avail += min(spec.row_marginals[k], 1) if spec.binary else spec.row_marginals[k]
            if avail >= cap:
                break
        if avail < cap:
            return False
    return rows_left >= 0


def enumerate_tables(spec: ContingencyTableSpec, force: bool = False):
    """Yield every admissible table, row by row with column-demand pruning."""
    if not force:
        if spec.rows * spec.cols > MAX_CELLS:
            raise CapacityError(
                "table has %d cells, cap is %d (pass force=True to override)"
                % (spec.rows * spec.cols, MAX_CELLS)
            )
        est = _search_estimate(spec)
        if est > MAX_SEARCH_ESTIMATE:
            raise CapacityError(
                "search estimate %.2g exceeds %g (pass force=True to override)"
                % (est, MAX_SEARCH_ESTIMATE)
            )
    if sum(spec.row_marginals) != sum(spec.col_marginals):
        return
    table = []

    def rec(i, caps):
        if i == spec.rows:
            if all(c == 0 for c in caps):
                yield tuple(table)
            return
        for row in _row_fill_options(spec, i, caps):
            new_caps = [c - v for c, v in zip(caps, row)]
            if not _columns_feasible(spec, new_caps, i + 1):
                continue
            table.append(row)
            yield from rec(i + 1, new_caps)
            table.pop()

    yield from rec(0, list(spec.col_marginals))


def brute_force_count(spec: ContingencyTableSpec, force: bool = False) -> int:
    """Exact number of admissible tables by pruned enumeration."""
    return sum(1 for _ in enumerate_tables(spec, force=force))


# ---------------------------------------------------------------------------
# CNF lowering

class _CircuitBuilder:
    """Tseitin-encoded gate circuit; bits are bool constants or int literals."""

    def __init__(self, num_vars: int):
        self.num_vars = num_vars
        self.clauses = []
        self.gates = []  # (op, lit_a, lit_b, out_var)

    def new_var(self) -> int:
        self.num_vars += 1
        return self.num_vars

    def _gate(self, op, a, b) -> int:
        out = self.new_var()
        if op == "xor":
            self.clauses += [[-a, -b, -out], [a, b, -out], [a, -b, out], [-a, b, out]]
        elif op == "and":
            self.clauses += [[-a, -b, out], [a, -out], [b, -out]]
        elif op == "or":
            self.clauses += [[a, b, -out], [-a, out], [-b, out]]
        else:
            raise ValueError(op)
        self.gates.append((op, a, b, out))
        return out

    def xor(self, a, b):
        if isinstance(a, bool) and isinstance(b, bool):
            return a != b
        if isinstance(a, bool):
            a, b = b, a
        if isinstance(b, bool):
            return -a if b else a
        return self._gate("xor", a, b)

    def and_(self, a, b):
        if isinstance(a, bool) and isinstance(b, bool):
            return a and b
        if isinstance(a, bool):
            a, b = b, a
        if isinstance(b, bool):
            return a if b else False
        return self._gate("and", a, b)

    def or_(self, a, b):
        if isinstance(a, bool) and isinstance(b, bool):
            return a or b
        if isinstance(a, bool):
            a, b = b, a
        if isinstance(b, bool):
            return True if b else a
        return self._gate("or", a, b)

    def add(self, xs, ys):
        """Ripple-carry sum of two little-endian bit lists."""
        width = max(len(xs), len(ys)) + 1
        xs = list(xs) + [False] * (width - len(xs))
        ys = list(ys) + [False] * (width - len(ys))
        out = []
        carry = False
        for a, b in zip(xs, ys):
            axb = self.xor(a, b)
            out.append(self.xor(axb, carry))
            carry = self.or_(self.and_(a, b), self.and_(carry, axb))
        while len(out) > 1 and out[-1] is False:
            out.pop()
        return out

    def sum_tree(self, vectors):
        if not vectors:
            return [False]
        layer = list(vectors)
        while len(layer) > 1:
            nxt = [self.add(layer[k], layer[k + 1]) for k in range(0, len(layer) - 1, 2)]
            if len(layer) % 2:
                nxt.append(layer[-1])
            layer = nxt
        return layer[0]

    def assert_equals(self, bits, value: int):
        width = max(len(bits), value.bit_length())
        for k in range(width):
            want = (value >> k) & 1
            bit = bits[k] if k < len(bits) else False
            if isinstance(bit, bool):
                if int(bit) != want:
                    v = self.new_var()
                    self.clauses += [[v], [-v]]  # constant mismatch: unsat
                    return
            else:
                self.clauses.append([bit] if want else [-bit])

    def assert_le_constant(self, bits, bound: int):
        """Forbid bit-vector values above `bound` (one clause per zero bit)."""
        for i, bit in enumerate(bits):
            if isinstance(bit, bool) or (bound >> i) & 1:
                continue
            clause = [-bit]
            for j in range(i + 1, len(bits)):
                bj = bits[j]
                if isinstance(bj, bool):
                    continue
                clause.append(-bj if (bound >> j) & 1 else bj)
            # violated only when the higher bits match the bound exactly
            for j in range(i + 1, len(bits)):
                bj = bits[j]
                if isinstance(bj, bool) and int(bj) != (bound >> j) & 1:
                    clause = None
                    break
            if clause is not None:
                self.clauses.append(clause)


@dataclass
class CellEncoding:
    spec: ContingencyTableSpec
    widths: dict  # (i,j) -> bit width (0 for structural zeros)
    var_start: dict  # (i,j) -> first variable index (1-based)
    num_cell_bits: int
    num_vars: int
    gates: list = field(default_factory=list)

    def cell_bits(self, i: int, j: int):
        start = self.var_start[(i, j)]
        return list(range(start, start + self.widths[(i, j)]))

    def complete(self, cell_assignment: int) -> int:
        """Extend an assignment of the cell bits to all variables by
        evaluating the adder gates forward."""
        bits = cell_assignment

        def val(lit):
            if isinstance(lit, bool):
                return int(lit)
            v = (bits >> (abs(lit) - 1)) & 1
            return v if lit > 0 else 1 - v

        for op, a, b, out in self.gates:
            x, y = val(a), val(b)
            r = (x ^ y) if op == "xor" else (x & y) if op == "and" else (x | y)
            if r:
                bits |= 1 << (out - 1)
        return bits

    def decode_table(self, cell_assignment: int):
        out = []
        for i in range(self.spec.rows):
            row = []
            for j in range(self.spec.cols):
                w = self.widths[(i, j)]
                if w == 0:
                    row.append(0)
                else:
                    start = self.var_start[(i, j)]
                    row.append((cell_assignment >> (start - 1)) & ((1 << w) - 1))
            out.append(tuple(row))
        return tuple(out)

    def encode_table(self, table) -> int:
        bits = 0
        for i in range(self.spec.rows):
            for j in range(self.spec.cols):
                w = self.widths[(i, j)]
                if w:
                    bits |= table[i][j] << (self.var_start[(i, j)] - 1)
        return bits


def encode_to_cnf(spec: ContingencyTableSpec):
    """Lower a table spec to CNF: cell bitvectors, per-cell range clamps,
    and adder-tree sums pinned to the marginals.

    Returns (CountingProblem, CellEncoding); the problem's n is the number
    of cell bits, so hashes never touch adder auxiliaries.
    """
    widths = {}
    var_start = {}
    nxt = 1
    for i in range(spec.rows):
        for j in range(spec.cols):
            cap = spec.cell_max(i, j)
            w = 0 if cap == 0 else max(1, cap.bit_length())
            widths[(i, j)] = w
            var_start[(i, j)] = nxt
            nxt += w
    num_cell_bits = nxt - 1
    builder = _CircuitBuilder(num_cell_bits)

    enc = CellEncoding(spec, widths, var_start, num_cell_bits, num_cell_bits)
    for i in range(spec.rows):
        for j in range(spec.cols):
            w = widths[(i, j)]
            if w:
                builder.assert_le_constant(enc.cell_bits(i, j), spec.cell_max(i, j))

    for i in range(spec.rows):
        vectors = [enc.cell_bits(i, j) for j in range(spec.cols) if widths[(i, j)]]
        builder.assert_equals(builder.sum_tree(vectors), spec.row_marginals[i])
    for j in range(spec.cols):
        vectors = [enc.cell_bits(i, j) for i in range(spec.rows) if widths[(i, j)]]
        builder.assert_equals(builder.sum_tree(vectors), spec.col_marginals[j])

    enc.num_vars = builder.num_vars
    enc.gates = builder.gates
    formula = CnfFormula(builder.num_vars, builder.clauses, [])
    problem = CountingProblem.from_cnf(formula, n=num_cell_bits)
    return problem, enc


def hash_over_cells(problem: CountingProblem, m: int, f: float,
                    seed: int = 0) -> ParityHash:
    """Sample a parity hash spanning exactly the cell-bit variables."""
    return sample_hash(HashParams(problem.n, m, f, seed=seed))


def explicit_problem(spec: ContingencyTableSpec, enc: CellEncoding = None,
                     force: bool = False) -> CountingProblem:
    """Enumerate the tables and pack them as an explicit set over the cell
    bits; handy for running pipelines when the count is small."""
    if enc is None:
        _, enc = encode_to_cnf(spec)
    members = [
        Assignment(enc.encode_table(t), enc.num_cell_bits)
        for t in enumerate_tables(spec, force=force)
    ]
    return CountingProblem.from_explicit(members, enc.num_cell_bits)


# ---------------------------------------------------------------------------
# spec file format: "rows R cols C", "R: ...", "C: ...", "binary: 0|1", "Z: i j"

def parse_table_spec(text: str) -> ContingencyTableSpec:
    rows = cols = None
    rmarg = cmarg = None
    binary = False
    zeros = set()
    for raw in text.splitlines():
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if line.startswith("rows"):
            parts = line.split()
            rows, cols = int(parts[1]), int(parts[3])
        elif line.startswith("R:"):
            rmarg = tuple(int(t) for t in line[2:].split())
        elif line.startswith("C:"):
            cmarg = tuple(int(t) for t in line[2:].split())
        elif line.startswith("binary:"):
            binary = bool(int(line.split(":", 1)[1]))
        elif line.startswith("Z:"):
            i, j = (int(t) for t in line[2:].split())
            zeros.add((i, j))
        else:
            raise ValueError("unrecognized table-spec line: %r" % line)
    if rows is None or rmarg is None or cmarg is None:
        raise ValueError("table spec needs 'rows r cols c', 'R:' and 'C:' lines")
    return ContingencyTableSpec(rows, cols, rmarg, cmarg, binary, frozenset(zeros))


def format_table_spec(spec: ContingencyTableSpec) -> str:
    lines = [
        "rows %d cols %d" % (spec.rows, spec.cols),
        "R: " + " ".join(str(x) for x in spec.row_marginals),
        "C: " + " ".join(str(x) for x in spec.col_marginals),
        "binary: %d" % int(spec.binary),
    ]
    for i, j in sorted(spec.structural_zeros):
        lines.append("Z: %d %d" % (i, j))
    return "\n".join(lines) + "\n"
