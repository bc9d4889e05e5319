import random

import pytest

from xorcount.dimacs import CnfFormula, emit
from xorcount.gf2hash import Assignment, HashParams, ParityHash, sample_hash
from xorcount.oracle import (CountingProblem, IntegrityError, ParameterError,
                             SolverProfile, conjoin, count_models,
                             expand_xors, has_survivor, run_external,
                             xor_to_cnf, _check_assignment)


def parity_solutions(n, support, rhs):
    return {
        bits for bits in range(1 << n)
        if sum((bits >> (v - 1)) & 1 for v in support) % 2 == rhs
    }


def projected_models(formula, n):
    """All models of `formula` projected onto variables 1..n, by enumeration."""
    out = set()
    for bits in range(1 << formula.num_vars):
        if _check_assignment(formula, bits):
            out.add(bits & ((1 << n) - 1))
    return out


class TestXorToCnf:
    def test_empty_support_contradiction(self):
        assert xor_to_cnf([], 1) == [[]]
        assert xor_to_cnf([], 0) == []

    def test_equivalence_pair(self):
        cls = xor_to_cnf([1, 2], 0)
        assert sorted(map(sorted, cls)) == [[-2, 1], [-1, 2]]

    def test_clause_count_no_chaining(self):
        for t in range(1, 6):
            assert len(xor_to_cnf(list(range(1, t + 1)), 1, chunk=6)) == 1 << (t - 1)

    def test_chunk_validation(self):
        with pytest.raises(ParameterError):
            xor_to_cnf([1, 2, 3], 0, chunk=1)

    @pytest.mark.parametrize("chunk", [2, 3, 4, 5, 6])
    def test_projection_equivalence(self, chunk):
        rng = random.Random(chunk)
        for _ in range(10):
            n = rng.randint(2, 8)
            t = rng.randint(1, n)
            support = rng.sample(range(1, n + 1), t)
            rhs = rng.randint(0, 1)
            counter = [n]  # auxiliaries must start after all n variables

            def fresh():
                counter[0] += 1
                return counter[0]

            clauses = xor_to_cnf(support, rhs, chunk=chunk, fresh=fresh)
            num_vars = max([n] + [abs(l) for cl in clauses for l in cl])
            f = CnfFormula(num_vars, clauses, [])
            assert projected_models(f, n) == parity_solutions(n, support, rhs)


class TestExpandXors:
    def test_solution_preserving(self):
        f = CnfFormula(4, [[1, 2]], [([1, 3], 1), ([2, 3, 4], 0)])
        g = expand_xors(f, chunk=6)
        assert g.xors == []
        direct = {
            bits for bits in range(16)
            if _check_assignment(f, bits)
        }
        assert projected_models(g, 4) == direct

    def test_empty_xor_contradiction_stays_dimacs_legal(self):
        f = CnfFormula(2, [[1]], [([], 1)])
        g = expand_xors(f)
        assert all(g.clauses)  # no empty clause emitted
        assert count_models(g) == 0


class TestConjoin:
    def test_native_path_emits_m_xlines(self):
        f = CnfFormula(6, [[1, -2]], [])
        h = sample_hash(HashParams(6, 3, 0.5, seed=1))
        text = emit(conjoin(f, h))
        assert sum(1 for l in text.splitlines() if l.startswith("x")) == 3

    def test_originals_untouched(self):
        f = CnfFormula(6, [[1, -2], [3]], [([4, 5], 1)])
        h = sample_hash(HashParams(6, 2, 0.4, seed=9))
        g = conjoin(f, h)
        assert g.clauses == f.clauses
        assert g.num_vars == f.num_vars
        assert g.xors[: len(f.xors)] == f.xors

    def test_purity(self):
        f = CnfFormula(5, [[1, 2, 3]], [])
        h = sample_hash(HashParams(5, 2, 0.3, seed=4))
        assert emit(conjoin(f, h)) == emit(conjoin(f, h))

    def test_double_count(self):
        # model count of the conjoined instance = survivors among models
        rng = random.Random(12)
        n = 8
        clauses = [[rng.choice([v, -v]) for v in rng.sample(range(1, n + 1), 3)]
                   for _ in range(6)]
        f = CnfFormula(n, clauses, [])
        models = [Assignment(b, n) for b in range(1 << n)
                  if _check_assignment(f, b)]
        from xorcount.gf2hash import count_survivors
        for seed in range(5):
            h = sample_hash(HashParams(n, 3, 0.5, seed=seed))
            conj = expand_xors(conjoin(f, h))
            want = count_survivors(h, models)
            got = len(projected_models(conj, n) & {x.bits for x in models})
            assert got == want

    def test_width_check(self):
        f = CnfFormula(4, [[1]], [])
        h = sample_hash(HashParams(6, 2, 0.5, seed=0))
        from xorcount.gf2hash import DimensionError
        with pytest.raises(DimensionError):
            conjoin(f, h)


class TestExplicitBackend:
    def test_empty_set_unsat(self):
        problem = CountingProblem.from_explicit([], 6)
        h = sample_hash(HashParams(6, 2, 0.5, seed=0))
        assert has_survivor(problem, h).answer == "unsat"

    def test_zero_hash_sat_with_witness(self):
        members = [Assignment(b, 6) for b in (5, 9, 33)]
        problem = CountingProblem.from_explicit(members, 6)
        h = ParityHash((0, 0), 0, HashParams(6, 2, 0.0))
        v = has_survivor(problem, h)
        assert v.is_sat and v.witness in members

    def test_witness_actually_survives(self):
        rng = random.Random(3)
        members = [Assignment(b, 12) for b in rng.sample(range(1 << 12), 80)]
        problem = CountingProblem.from_explicit(members, 12)
        from xorcount.gf2hash import apply_hash
        for seed in range(30):
            h = sample_hash(HashParams(12, 4, 0.3, seed=seed))
            v = has_survivor(problem, h)
            if v.is_sat:
                assert apply_hash(h, v.witness) == 0
            else:
                assert all(apply_hash(h, x) != 0 for x in members)

    def test_wide_problem_python_path(self):
        # n > 64 disables the packed numpy path; plain scan must still work
        members = [Assignment(0, 70), Assignment((1 << 70) - 1, 70)]
        problem = CountingProblem.from_explicit(members, 70)
        h = ParityHash((0,), 1, HashParams(70, 1, 0.0))
        assert has_survivor(problem, h).answer == "unsat"

    def test_deduplication(self):
        members = [Assignment(3, 4)] * 5 + [Assignment(1, 4)]
        assert len(CountingProblem.from_explicit(members, 4)) == 2


class TestBackendAgreement:
    def test_explicit_vs_exhaustive_vs_external(self, exhaustive_solver):
        rng = random.Random(21)
        n = 10
        clauses = [[rng.choice([v, -v]) for v in rng.sample(range(1, n + 1), 3)]
                   for _ in range(8)]
        formula = CnfFormula(n, clauses, [])
        members = [Assignment(b, n) for b in range(1 << n)
                   if _check_assignment(formula, b)]
        explicit = CountingProblem.from_explicit(members, n)
        cnf = CountingProblem.from_cnf(formula)
        for seed in range(8):
            h = sample_hash(HashParams(n, 4, 0.4, seed=seed))
            a = has_survivor(explicit, h).answer
            b = has_survivor(cnf, h).answer
            c = has_survivor(cnf, h, solver=exhaustive_solver).answer
            assert a == b == c

    def test_exhaustive_cap(self):
        f = CnfFormula(30, [[1]], [])
        problem = CountingProblem.from_cnf(f)
        h = sample_hash(HashParams(30, 2, 0.5, seed=0))
        with pytest.raises(ParameterError):
            has_survivor(problem, h)


class TestCountModels:
    def test_small_formula(self):
        # (x1 or x2) and (not x1 or x3) over 4 variables
        f = CnfFormula(4, [[1, 2], [-1, 3]], [])
        want = sum(1 for b in range(16) if _check_assignment(f, b))
        assert count_models(f) == want

    def test_with_native_xors(self):
        f = CnfFormula(5, [[1, 2]], [([1, 5], 1)])
        want = sum(1 for b in range(32) if _check_assignment(f, b))
        assert count_models(f) == want

    def test_unsat(self):
        assert count_models(CnfFormula(3, [[1], [-1]], [])) == 0


class TestRunExternal:
    def test_trivial_sat(self, exhaustive_solver):
        v = run_external("p cnf 1 1\n1 0\n", exhaustive_solver)
        assert v.answer == "sat"
        assert v.stats["model_bits"] == 1

    def test_trivial_unsat(self, exhaustive_solver):
        v = run_external("p cnf 1 2\n1 0\n-1 0\n", exhaustive_solver)
        assert v.answer == "unsat"

    def test_timeout_is_unknown(self, sleepy_solver):
        v = run_external("p cnf 1 1\n1 0\n", sleepy_solver)
        assert v.answer == "unknown"
        assert v.stats["reason"] == "timeout"
        assert v.stats["solver_time_s"] == pytest.approx(0.3, abs=0.25)

    def test_garbage_output_is_unknown(self, tmp_path):
        import sys
        script = tmp_path / "noise.py"
        script.write_text("print('nonsense')\n")
        profile = SolverProfile("%s %s {in}" % (sys.executable, script))
        v = run_external("p cnf 1 1\n1 0\n", profile)
        assert v.answer == "unknown"
        assert v.stats["reason"] == "no solution line"

    def test_template_needs_placeholder(self):
        with pytest.raises(ParameterError):
            run_external("p cnf 1 1\n1 0\n", SolverProfile("solver"))

    def test_lying_solver_triggers_integrity_error(self, lying_solver):
        # the liar answers SAT with the all-false model; x1 must be true
        f = CnfFormula(2, [[1]], [])
        problem = CountingProblem.from_cnf(f)
        h = ParityHash((0,), 0, HashParams(2, 1, 0.0))
        with pytest.raises(IntegrityError):
            has_survivor(problem, h, solver=lying_solver)

    def test_external_witness_passes_recheck(self, exhaustive_solver):
        rng = random.Random(9)
        n = 8
        clauses = [[rng.choice([v, -v]) for v in rng.sample(range(1, n + 1), 3)]
                   for _ in range(5)]
        f = CnfFormula(n, clauses, [])
        problem = CountingProblem.from_cnf(f)
        for seed in range(5):
            h = sample_hash(HashParams(n, 2, 0.5, seed=seed))
            v = has_survivor(problem, h, solver=exhaustive_solver)
            if v.is_sat:
                assert v.witness is not None
                assert _check_assignment(f, v.witness.bits, h)
