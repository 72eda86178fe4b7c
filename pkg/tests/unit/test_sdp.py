import unittest

import numpy as np

from oneshot_ent import sdp
from oneshot_ent.models import (
    BlockKind,
    NumericSettings,
    SdpSolution,
    SdpSolverError,
    SdpStatus,
)
from oneshot_ent.quantum import max_entangled, transpose_factors
from oneshot_ent.sdp import SdpProblem, hermitian_basis
from oneshot_ent.sdp.problem import embed, symmetric_basis
from oneshot_ent.sdp.solver import _stalled_status
from tests.base import NumericTestCase, TempDirTestCase


def _largest_eigenvalue_problem(matrix: np.ndarray) -> tuple[SdpProblem, object]:
    problem = SdpProblem("largest-eigenvalue", maximize=True)
    x = problem.add_block("x", matrix.shape[0])
    problem.set_objective([(x, matrix)])
    problem.add_constraint([(x, np.eye(matrix.shape[0]))], 1.0)
    return problem, x


def _eigen_bound_problem(matrix: np.ndarray) -> SdpProblem:
    # min t with t I - A >= 0
    n = matrix.shape[0]
    problem = SdpProblem("eigen-bound")
    t = problem.add_scalar("t")
    gap = problem.add_block("gap", n)
    problem.add_matrix_equality(
        [(gap, sdp.identity()), (t, sdp.scalar_times(np.eye(n), -1.0))], -matrix
    )
    problem.set_objective([(t, 1.0)])
    return problem


class TestBases(NumericTestCase):
    def test_hermitian_basis_is_orthonormal(self) -> None:
        basis = hermitian_basis(3)
        self.assertEqual(len(basis), 9)
        gram = np.array([[np.real(np.trace(a @ b)) for b in basis] for a in basis])
        self.assertMatrixClose(gram, np.eye(9), atol=1e-12)

    def test_symmetric_basis_size(self) -> None:
        self.assertEqual(len(symmetric_basis(4)), 10)

    def test_embedding_preserves_spectrum(self) -> None:
        h = np.array([[1.0, 1j], [-1j, 2.0]])
        doubled = np.sort(np.concatenate([np.linalg.eigvalsh(h)] * 2))
        self.assertMatrixClose(np.sort(np.linalg.eigvalsh(embed(h))), doubled, atol=1e-12)


class TestProblem(NumericTestCase):
    def test_empty_row_with_nonzero_rhs_is_rejected(self) -> None:
        problem = SdpProblem("broken")
        x = problem.add_block("x", 2)
        with self.assertRaises(ValueError) as context:
            problem.add_constraint([(x, np.zeros((2, 2)))], 1.0)
        self.assertIn("empty constraint", str(context.exception))

    def test_coefficient_shape_is_checked(self) -> None:
        problem = SdpProblem("shape")
        x = problem.add_block("x", 2)
        with self.assertRaises(ValueError):
            problem.set_objective([(x, np.eye(3))])

    def test_compile_counts_constraints(self) -> None:
        problem, _ = _largest_eigenvalue_problem(np.diag([1.0, 2.0]))
        compiled = problem.compile()
        self.assertEqual(compiled.n_constraints, 1)
        self.assertEqual(compiled.sizes, [4])

    def test_scalar_block(self) -> None:
        problem = SdpProblem("scalar")
        t = problem.add_scalar("t")
        self.assertIs(t.kind, BlockKind.SCALAR)
        self.assertEqual(t.embedded_size, 1)


class TestSolve(NumericTestCase):
    def test_largest_eigenvalue(self) -> None:
        matrix = np.array([[2.0, 1.0 - 1j], [1.0 + 1j, 3.0]])
        problem, x = _largest_eigenvalue_problem(matrix)
        solution = sdp.solve(problem)

        self.assertIs(solution.status, SdpStatus.OPTIMAL)
        expected = float(np.max(np.linalg.eigvalsh(matrix)))
        low, high = solution.bounds
        self.assertAlmostEqual(low, expected, places=6)
        self.assertAlmostEqual(high, expected, places=6)
        self.assertLessEqual(solution.gap, 1e-7 * (1 + abs(expected)))
        optimum = solution.value(x)
        self.assertAlmostEqual(float(np.real(np.trace(optimum))), 1.0, places=6)

    def test_matrix_equality_with_scalar(self) -> None:
        # min t with t I - A >= 0 is the largest eigenvalue
        a = np.diag([0.5, -1.0, 2.5])
        problem = SdpProblem("eigen-bound")
        t = problem.add_scalar("t")
        gap = problem.add_block("gap", 3)
        problem.add_matrix_equality(
            [(gap, sdp.identity()), (t, sdp.scalar_times(np.eye(3), -1.0))], -a
        )
        problem.set_objective([(t, 1.0)])
        solution = sdp.solve(problem)
        solution.raise_for_status()
        self.assertAlmostEqual(solution.value(t), 2.5, places=6)

    def test_ppt_fidelity_of_bell_state(self) -> None:
        # max <Psi|sigma|Psi> over PPT states is 1/2
        psi = max_entangled(2).data
        problem = SdpProblem("ppt-overlap", maximize=True)
        sigma = problem.add_block("sigma", 4)
        pt = problem.add_block("sigma_pt", 4)
        problem.add_constraint([(sigma, np.eye(4))], 1.0)
        problem.add_matrix_equality(
            [(pt, sdp.identity()), (sigma, sdp.transposed([2, 2], [1], -1.0))],
            np.zeros((4, 4)),
        )
        problem.set_objective([(sigma, psi)])
        solution = sdp.solve(problem)
        solution.raise_for_status()
        self.assertAlmostEqual(solution.bounds[1], 0.5, places=6)
        value = solution.value(sigma)
        pt_min = np.min(np.linalg.eigvalsh(transpose_factors(value, [2, 2], [1])))
        self.assertGreaterEqual(pt_min, -1e-6)

    def test_dual_slack_is_optimality_certificate(self) -> None:
        problem, x = _largest_eigenvalue_problem(np.diag([1.0, 3.0]))
        solution = sdp.solve(problem)
        slack = solution.dual_slack(x)
        self.assertGreaterEqual(float(np.min(np.linalg.eigvalsh(slack))), -1e-6)

    def test_infeasible_problem_raises(self) -> None:
        problem = SdpProblem("infeasible")
        x = problem.add_block("x", 2)
        problem.add_constraint([(x, np.eye(2))], -1.0)
        problem.set_objective([(x, np.eye(2))])
        solution = sdp.solve(problem)
        self.assertIs(solution.status, SdpStatus.PRIMAL_INFEASIBLE)
        with self.assertRaises(SdpSolverError) as context:
            solution.raise_for_status()
        self.assertIs(context.exception.solution, solution)

    def test_iteration_limit(self) -> None:
        problem, _ = _largest_eigenvalue_problem(np.diag([1.0, 2.0, 4.0]))
        solution = sdp.solve(problem, NumericSettings(max_iterations=1))
        self.assertIs(solution.status, SdpStatus.ITERATION_LIMIT)

    def test_truncated_solves_are_never_reported_optimal_with_a_loose_gap(self) -> None:
        full = sdp.solve(_eigen_bound_problem(np.diag([1.0, 2.0, 4.0])))
        full.raise_for_status()
        for limit in range(1, full.iterations):
            settings = NumericSettings(max_iterations=limit)
            solution = sdp.solve(_eigen_bound_problem(np.diag([1.0, 2.0, 4.0])), settings)
            if solution.status is SdpStatus.OPTIMAL:
                self.assertLessEqual(solution.gap, 1e-7 * (1 + abs(solution.primal_value)))
                continue
            self.assertIs(solution.status, SdpStatus.ITERATION_LIMIT, f"limit {limit}")
            with self.assertRaises(SdpSolverError):
                solution.raise_for_status()

    def test_near_converged_cutoff_is_not_optimal(self) -> None:
        full = sdp.solve(_eigen_bound_problem(np.diag([1.0, 2.0, 4.0])))
        settings = NumericSettings(max_iterations=full.iterations - 1)
        solution = sdp.solve(_eigen_bound_problem(np.diag([1.0, 2.0, 4.0])), settings)
        self.assertIs(solution.status, SdpStatus.ITERATION_LIMIT)
        self.assertFalse(solution.is_usable)

    def test_objective_scaling(self) -> None:
        matrix = np.array([[2.0, 1.0 - 1j], [1.0 + 1j, 3.0]])
        base = sdp.solve(_largest_eigenvalue_problem(matrix)[0])
        scaled = sdp.solve(_largest_eigenvalue_problem(3.0 * matrix)[0])
        base.raise_for_status()
        scaled.raise_for_status()
        self.assertAlmostEqual(scaled.primal_value, 3.0 * base.primal_value, places=6)
        self.assertAlmostEqual(scaled.dual_value, 3.0 * base.dual_value, places=6)

    def test_repeated_solves_agree(self) -> None:
        matrix = np.array([[2.0, 1.0 - 1j], [1.0 + 1j, 3.0]])
        first = sdp.solve(_largest_eigenvalue_problem(matrix)[0])
        second = sdp.solve(_largest_eigenvalue_problem(matrix)[0])
        self.assertEqual(first.iterations, second.iterations)
        self.assertAlmostEqual(first.primal_value, second.primal_value, places=12)
        self.assertAlmostEqual(first.dual_value, second.dual_value, places=12)


class TestStalledStatus(unittest.TestCase):
    def setUp(self) -> None:
        self.settings = NumericSettings()

    def test_tight_iterate_is_optimal(self) -> None:
        status = _stalled_status(5e-8, 5e-8, 5e-9, 1.0, self.settings)
        self.assertIs(status, SdpStatus.OPTIMAL)

    def test_gap_above_optimal_bound_is_reduced(self) -> None:
        status = _stalled_status(1e-9, 1e-9, 1.3e-6, 4.0, self.settings)
        self.assertIs(status, SdpStatus.REDUCED_ACCURACY)

    def test_far_iterate_is_not_converged(self) -> None:
        status = _stalled_status(1e-3, 1e-3, 1e-2, 1.0, self.settings)
        self.assertIs(status, SdpStatus.ITERATION_LIMIT)


class TestReducedAccuracy(unittest.TestCase):
    def _solution(self, accept_reduced: bool) -> SdpSolution:
        return SdpSolution(
            status=SdpStatus.REDUCED_ACCURACY,
            primal_value=1.0,
            dual_value=1.000001,
            iterations=40,
            primal_residual=1e-7,
            dual_residual=1e-7,
            gap=1e-6,
            name="loose",
            accept_reduced=accept_reduced,
        )

    def test_rejected_by_default(self) -> None:
        solution = self._solution(False)
        self.assertFalse(solution.is_optimal)
        with self.assertRaises(SdpSolverError) as context:
            solution.raise_for_status()
        self.assertIn("reduced-accuracy", str(context.exception))

    def test_accepted_when_opted_in(self) -> None:
        solution = self._solution(True)
        self.assertFalse(solution.is_optimal)
        solution.raise_for_status()

    def test_solve_carries_the_setting(self) -> None:
        problem, _ = _largest_eigenvalue_problem(np.diag([1.0, 2.0]))
        solution = sdp.solve(problem, NumericSettings(accept_reduced=True))
        self.assertTrue(solution.accept_reduced)
        self.assertIs(solution.status, SdpStatus.OPTIMAL)


class TestDump(TempDirTestCase):
    def test_dump_dir_writes_sdpa_file(self) -> None:
        problem, _ = _largest_eigenvalue_problem(np.diag([1.0, 2.0]))
        sdp.solve(problem, NumericSettings(dump_dir=self.temp_path))
        files = list(self.temp_path.glob("*.dat-s"))
        self.assertEqual(len(files), 1)
        lines = files[0].read_text().splitlines()
        self.assertEqual(lines[0], '"largest-eigenvalue"')
        self.assertEqual(lines[1], "1")
        self.assertEqual(lines[3], "4")
