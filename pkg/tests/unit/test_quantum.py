import unittest

import numpy as np

from oneshot_ent.models import Bipartition
from oneshot_ent.quantum import (
    DimensionBudgetError,
    StateValidationError,
    catalyst_blocks,
    fidelity,
    from_catalyst_blocks,
    group_parties,
    is_isotropic,
    isotropic,
    isotropic_weight,
    make_density,
    make_effect,
    max_entangled,
    nearest_density,
    partial_trace,
    partial_transpose,
    permute_factors,
    random_pure_state,
    random_state,
    schmidt_state,
    tensor,
    twirl_catalyst,
    uu_star_twirl,
    von_neumann_entropy,
    werner,
)
from tests.base import NumericTestCase


class TestMakeDensity(NumericTestCase):
    def test_accepts_valid_state(self) -> None:
        state = make_density(np.diag([0.25, 0.25, 0.5, 0.0]), [2, 2])
        self.assertEqual(state.dims, (2, 2))
        self.assertEqual(state.side, 4)

    def test_rejects_non_hermitian(self) -> None:
        matrix = np.array([[0.5, 0.3], [0.0, 0.5]])
        with self.assertRaises(StateValidationError) as context:
            make_density(matrix, [2])
        self.assertIn("not Hermitian", str(context.exception))

    def test_rejects_negative_eigenvalue(self) -> None:
        with self.assertRaises(StateValidationError):
            make_density(np.diag([1.2, -0.2]), [2])

    def test_rejects_wrong_trace(self) -> None:
        with self.assertRaises(StateValidationError) as context:
            make_density(np.diag([0.5, 0.4]), [2])
        self.assertIn("Trace", str(context.exception))

    def test_rejects_dims_mismatch(self) -> None:
        with self.assertRaises(StateValidationError):
            make_density(np.eye(4) / 4, [2, 3])

    def test_rejects_side_beyond_budget(self) -> None:
        with self.assertRaises(DimensionBudgetError):
            make_density(np.eye(257) / 257, [257])

    def test_data_is_read_only(self) -> None:
        state = max_entangled(2)
        with self.assertRaises(ValueError):
            state.data[0, 0] = 1.0

    def test_maximally_entangled_states_round_trip(self) -> None:
        for M in range(1, 6):
            state = max_entangled(M)
            again = make_density(state.data, [M, M])
            self.assertMatrixClose(again.data, state.data, atol=1e-12)
            purity = float(np.real(np.trace(state.data @ state.data)))
            self.assertAlmostEqual(purity, 1.0, places=12)

    def test_nearest_density_clamps_small_negatives(self) -> None:
        state = nearest_density(np.diag([0.6, 0.4 + 1e-9, -1e-9, 0.0]), [2, 2])
        self.assertGreaterEqual(float(np.min(np.linalg.eigvalsh(state.data))), 0.0)
        self.assertAlmostEqual(float(np.real(np.trace(state.data))), 1.0, places=12)


class TestMakeEffect(unittest.TestCase):
    def test_rejects_spectrum_above_one(self) -> None:
        with self.assertRaises(StateValidationError):
            make_effect(np.diag([1.5, 0.0]), [2])

    def test_accepts_projector(self) -> None:
        effect = make_effect(max_entangled(2).data, [2, 2])
        self.assertEqual(effect.side, 4)


class TestPartialOperations(NumericTestCase):
    def test_partial_transpose_of_bell_state_has_negative_eigenvalue(self) -> None:
        pt = partial_transpose(max_entangled(2), Bipartition.of(1))
        self.assertAlmostEqual(float(np.min(np.linalg.eigvalsh(pt))), -0.5, places=12)

    def test_partial_transpose_rejects_improper_cut(self) -> None:
        with self.assertRaises(ValueError):
            partial_transpose(max_entangled(2), Bipartition.of(0, 1))

    def test_partial_trace_of_mes_is_maximally_mixed(self) -> None:
        reduced = partial_trace(max_entangled(3), Bipartition.of(1))
        self.assertMatrixClose(reduced.data, np.eye(3) / 3, atol=1e-12)

    def test_partial_transpose_of_product_keeps_spectrum(self) -> None:
        rng = np.random.default_rng(17)
        rho_a, rho_b = random_state([2], rng), random_state([3], rng)
        product = tensor(rho_a, rho_b)
        pt = partial_transpose(product, Bipartition.of(1))
        self.assertMatrixClose(
            np.linalg.eigvalsh(pt), np.linalg.eigvalsh(product.data), atol=1e-12
        )

    def test_tensor_and_group_parties(self) -> None:
        grouped = group_parties(tensor(max_entangled(2), max_entangled(2)), ((0, 2), (1, 3)))
        self.assertEqual(grouped.dims, (4, 4))
        self.assertMatrixClose(grouped.data, max_entangled(4).data, atol=1e-12)

    def test_group_parties_rejects_overlap(self) -> None:
        with self.assertRaises(StateValidationError):
            group_parties(max_entangled(2), ((0,), (0,)))

    def test_permute_factors_swaps_product(self) -> None:
        a, b = np.diag([1.0, 0.0]), np.diag([0.0, 0.0, 1.0])
        swapped = permute_factors(np.kron(a, b), [2, 3], [1, 0])
        self.assertMatrixClose(swapped, np.kron(b, a))


class TestFidelity(unittest.TestCase):
    def test_identical_states(self) -> None:
        state = random_state([2, 2], np.random.default_rng(3))
        self.assertAlmostEqual(fidelity(state.data, state.data), 1.0, places=8)

    def test_orthogonal_states(self) -> None:
        self.assertAlmostEqual(fidelity(np.diag([1.0, 0.0]), np.diag([0.0, 1.0])), 0.0, places=12)

    def test_pure_overlap(self) -> None:
        value = fidelity(max_entangled(2).data, isotropic(2, 0.8).data)
        self.assertAlmostEqual(value, 0.8, places=10)

    def test_symmetric_on_random_pairs(self) -> None:
        rng = np.random.default_rng(23)
        for _ in range(5):
            rho, sigma = random_state([2, 3], rng), random_state([2, 3], rng)
            forward, backward = fidelity(rho.data, sigma.data), fidelity(sigma.data, rho.data)
            self.assertAlmostEqual(forward, backward, places=8)

    def test_partial_trace_never_decreases_fidelity(self) -> None:
        rng = np.random.default_rng(29)
        cut = Bipartition.of(1)
        for _ in range(5):
            rho, sigma = random_state([2, 3], rng), random_state([2, 3], rng)
            reduced = fidelity(partial_trace(rho, cut).data, partial_trace(sigma, cut).data)
            self.assertGreaterEqual(reduced, fidelity(rho.data, sigma.data) - 1e-9)


class TestTwirl(NumericTestCase):
    def test_twirl_is_idempotent(self) -> None:
        rng = np.random.default_rng(11)
        for _ in range(5):
            state = random_state([3, 3], rng)
            once = uu_star_twirl(state)
            self.assertMatrixClose(uu_star_twirl(once, [3, 3]), once, atol=1e-12)

    def test_twirl_preserves_singlet_weight_and_trace(self) -> None:
        state = random_state([2, 2], np.random.default_rng(5))
        twirled = uu_star_twirl(state)
        self.assertAlmostEqual(isotropic_weight(twirled), isotropic_weight(state), places=12)
        self.assertAlmostEqual(float(np.real(np.trace(twirled))), 1.0, places=12)
        self.assertTrue(is_isotropic(twirled, [2, 2]))

    def test_twirl_matches_haar_average(self) -> None:
        rng = np.random.default_rng(2024)
        d = 2
        for _ in range(5):
            state = random_state([d, d], rng).data
            total = np.zeros_like(state)
            samples = 10_000
            for _ in range(samples):
                z = (rng.normal(size=(d, d)) + 1j * rng.normal(size=(d, d))) / np.sqrt(2)
                q, r = np.linalg.qr(z)
                u = q * (np.diag(r) / np.abs(np.diag(r)))
                w = np.kron(u, u.conj())
                total += w @ state @ w.conj().T
            self.assertMatrixClose(total / samples, uu_star_twirl(state, [d, d]), atol=1e-2)

    def test_catalyst_blocks_round_trip(self) -> None:
        rng = np.random.default_rng(7)
        joint = tensor(random_state([2, 2], rng), random_state([2, 2], rng)).data
        twirled = twirl_catalyst(joint, [2, 2], 2)
        p1, p2 = catalyst_blocks(twirled, [2, 2], 2)
        self.assertMatrixClose(from_catalyst_blocks(p1, p2, 2), twirled, atol=1e-12)


class TestStateFamilies(NumericTestCase):
    def test_isotropic_weight(self) -> None:
        self.assertAlmostEqual(float(np.real(isotropic_weight(isotropic(3, 0.4)))), 0.4, places=12)

    def test_isotropic_rejects_bad_weight(self) -> None:
        with self.assertRaises(StateValidationError):
            isotropic(2, 1.5)

    def test_werner_full_weight_is_singlet(self) -> None:
        singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
        self.assertMatrixClose(werner(2, 1.0).data, np.outer(singlet, singlet), atol=1e-12)

    def test_schmidt_state_entropy(self) -> None:
        reduced = partial_trace(schmidt_state([0.9, 0.1]), Bipartition.of(1))
        expected = -(0.9 * np.log2(0.9) + 0.1 * np.log2(0.1))
        self.assertAlmostEqual(von_neumann_entropy(reduced), expected, places=10)

    def test_random_pure_state_keeps_schmidt_spectrum(self) -> None:
        state = random_pure_state([2, 2], np.random.default_rng(1), schmidt=(0.8, 0.2))
        reduced = partial_trace(state, Bipartition.of(1))
        self.assertMatrixClose(np.sort(np.linalg.eigvalsh(reduced.data)), [0.2, 0.8], atol=1e-10)
