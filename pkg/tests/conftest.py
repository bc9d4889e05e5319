import random
import sys
import textwrap
from fractions import Fraction

import pytest

# one "criterion N <label> PASS|FAIL" line per acceptance test, printed in
# the terminal summary so capture modes cannot swallow them
ACCEPTANCE_LINES = []


def pytest_terminal_summary(terminalreporter, exitstatus, config):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)

from xorcount.gf2hash import Assignment
from xorcount.oracle import CountingProblem, SolverProfile


def exact_epsilon(n, m, q, f):
    """Independent exact-rational evaluation of the collision bound.

    Only valid when f is an exact Fraction (or dyadic float); kept free of
    any log-domain code so it can serve as an oracle for comb.epsilon.
    """
    f = Fraction(f)
    half = Fraction(1, 2)
    target = q - 1
    prefix = 0
    binom = 1
    w = 0
    total = Fraction(0)
    while w < n:
        nxt = binom * (n - w) // (w + 1)
        if prefix + nxt > target:
            break
        binom = nxt
        prefix += binom
        w += 1
        total += binom * (half + half * (1 - 2 * f) ** w) ** m
    r = target - prefix
    if r > 0:
        total += r * (half + half * (1 - 2 * f) ** (w + 1)) ** m
    return total / target


def random_subset_problem(rng, n, size):
    members = [Assignment(b, n) for b in rng.sample(range(1 << n), size)]
    return CountingProblem.from_explicit(members, n)


@pytest.fixture
def exhaustive_solver(tmp_path):
    """External-solver profile backed by this package's own debug solver."""
    return SolverProfile("%s -m xorcount.cli solve {in}" % sys.executable)


@pytest.fixture
def lying_solver(tmp_path):
    """A solver that claims SAT with an all-false model, whatever the input."""
    script = tmp_path / "liar.py"
    script.write_text(textwrap.dedent("""\
        import sys
        nv = 1
        for line in open(sys.argv[1]):
            if line.startswith('p cnf'):
                nv = int(line.split()[2])
        print('s SATISFIABLE')
        print('v ' + ' '.join(str(-v) for v in range(1, nv + 1)) + ' 0')
    """))
    return SolverProfile("%s %s {in}" % (sys.executable, script))


@pytest.fixture
def sleepy_solver(tmp_path):
    script = tmp_path / "sleepy.py"
    script.write_text("import time\ntime.sleep(30)\n")
    return SolverProfile("%s %s {in}" % (sys.executable, script), budget_s=0.3)


def random_table_spec(rng, max_cell_bits=10):
    """Random small contingency spec whose encoding stays under the bit cap."""
    from xorcount.tables import ContingencyTableSpec

    while True:
        r = rng.randint(1, 3)
        c = rng.randint(1, 3)
        binary = rng.random() < 0.5
        table = [[rng.randint(0, 1 if binary else 3) for _ in range(c)]
                 for _ in range(r)]
        zeros = set()
        for i in range(r):
            for j in range(c):
                if rng.random() < 0.15:
                    table[i][j] = 0
                    zeros.add((i, j))
        rmarg = tuple(sum(row) for row in table)
        cmarg = tuple(sum(table[i][j] for i in range(r)) for j in range(c))
        spec = ContingencyTableSpec(r, c, rmarg, cmarg, binary, frozenset(zeros))
        bits = sum(
            max(1, spec.cell_max(i, j).bit_length()) if spec.cell_max(i, j) else 0
            for i in range(r) for j in range(c)
        )
        if 0 < bits <= max_cell_bits:
            return spec
