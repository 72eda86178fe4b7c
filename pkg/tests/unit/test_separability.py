import math
import unittest

import numpy as np

from oneshot_ent.models import Bipartition
from oneshot_ent.quantum import (
    complement_effect,
    isotropic,
    make_density,
    make_effect,
    max_entangled,
    random_state,
    schmidt_state,
    tensor,
)
from oneshot_ent.separability import (
    UnsupportedDimensionsError,
    bipartitions,
    is_exact_dims,
    max_linear_over_sep,
    nontrivial_dims,
    ppt_check,
    round_to_separable,
    seesaw_product_max,
    separable_ball_offset,
    sep_membership_exact,
)
from tests.base import SETTINGS, NumericTestCase


class TestDimensions(unittest.TestCase):
    def test_nontrivial_dims(self) -> None:
        self.assertEqual(nontrivial_dims((1, 3, 1, 2)), (3, 2))

    def test_exact_dims(self) -> None:
        self.assertTrue(is_exact_dims((2, 2)))
        self.assertTrue(is_exact_dims((3, 2)))
        self.assertTrue(is_exact_dims((1, 5)))
        self.assertFalse(is_exact_dims((3, 3)))
        self.assertFalse(is_exact_dims((2, 2, 2)))

    def test_bipartitions_of_three_factors(self) -> None:
        cuts = bipartitions(3)
        self.assertEqual(
            {cut.cut for cut in cuts}, {frozenset({1}), frozenset({2}), frozenset({1, 2})}
        )


class TestPpt(unittest.TestCase):
    def test_bell_state_is_npt(self) -> None:
        passed, minima = ppt_check(max_entangled(2))
        self.assertFalse(passed)
        self.assertAlmostEqual(minima[0], -0.5, places=10)

    def test_isotropic_threshold_state_is_ppt(self) -> None:
        self.assertTrue(ppt_check(isotropic(2, 0.5))[0])

    def test_exact_membership(self) -> None:
        self.assertTrue(sep_membership_exact(isotropic(2, 0.5)))
        self.assertFalse(sep_membership_exact(isotropic(2, 0.51)))

    def test_exact_membership_rejects_large_dims(self) -> None:
        with self.assertRaises(UnsupportedDimensionsError):
            sep_membership_exact(isotropic(3, 0.2))

    def test_tripartite_product_is_ppt_on_every_cut(self) -> None:
        state = tensor(isotropic(2, 0.25), make_density(np.eye(2) / 2, [2]))
        self.assertTrue(ppt_check(state, bipartitions(3))[0])


class TestSeparableBall(NumericTestCase):
    def test_maximally_mixed_needs_no_offset(self) -> None:
        self.assertEqual(separable_ball_offset(np.eye(9) / 9, [3, 3]), 0.0)

    def test_entangled_state_needs_offset(self) -> None:
        self.assertGreater(separable_ball_offset(max_entangled(3).data, [3, 3]), 0.0)

    def test_three_factors_have_no_ball(self) -> None:
        self.assertTrue(math.isinf(separable_ball_offset(np.eye(8) / 8, [2, 2, 2])))

    def test_rounded_state_is_ppt(self) -> None:
        rounded = round_to_separable(max_entangled(3).data, [3, 3])
        self.assertIsNotNone(rounded)
        self.assertTrue(ppt_check(rounded)[0])
        weight = float(np.real(max_entangled(3).data.ravel() @ rounded.data.ravel()))
        self.assertLessEqual(weight, 1 / 3 + 1e-9)


class TestSeparableMaximum(NumericTestCase):
    def test_seesaw_on_bell_projector(self) -> None:
        effect = make_effect(max_entangled(2).data, [2, 2])
        value, point = seesaw_product_max(effect, restarts=4, rng=np.random.default_rng(0))
        self.assertAlmostEqual(value, 0.5, places=8)
        self.assertTrue(ppt_check(point)[0])

    def test_isotropic_effect_closed_form(self) -> None:
        effect = make_effect(max_entangled(3).data, [3, 3])
        result = max_linear_over_sep(effect, settings=SETTINGS)
        self.assertAlmostEqual(result.certified_max, 1 / 3, places=12)
        self.assertTrue(result.exact)
        self.assertEqual(result.solver_meta.get("closed_form"), 1.0)

    def test_two_qubit_pure_projector(self) -> None:
        effect = make_effect(schmidt_state([0.9, 0.1]).data, [2, 2])
        result = max_linear_over_sep(effect, settings=SETTINGS)
        self.assertTrue(result.exact)
        self.assertAlmostEqual(result.certified_max, 0.9, delta=1e-5)
        self.assertAlmostEqual(result.achieved_max, 0.9, delta=1e-5)

    def test_qutrit_bracket_is_ordered(self) -> None:
        effect = make_effect(schmidt_state([0.5, 0.3, 0.2]).data, [3, 3])
        result = max_linear_over_sep(effect, settings=SETTINGS)
        self.assertFalse(result.exact)
        self.assertAlmostEqual(result.achieved_max, 0.5, delta=1e-5)
        self.assertGreaterEqual(result.certified_max, result.achieved_max - 1e-9)

    def test_effect_and_complement_cover_one(self) -> None:
        rng = np.random.default_rng(31)
        for _ in range(3):
            effect = make_effect(random_state([2, 2], rng).data, [2, 2])
            total = (
                max_linear_over_sep(effect, settings=SETTINGS).certified_max
                + max_linear_over_sep(complement_effect(effect), settings=SETTINGS).certified_max
            )
            self.assertGreaterEqual(total, 1.0 - 1e-6)

    def test_affine_covariance(self) -> None:
        effect = make_effect(random_state([2, 2], np.random.default_rng(37)).data, [2, 2])
        c, d = 0.5, 0.25
        shifted = make_effect(c * effect.data + d * np.eye(4), [2, 2])
        base = max_linear_over_sep(effect, settings=SETTINGS)
        moved = max_linear_over_sep(shifted, settings=SETTINGS)
        self.assertAlmostEqual(moved.certified_max, c * base.certified_max + d, delta=1e-6)
        self.assertAlmostEqual(moved.achieved_max, c * base.achieved_max + d, delta=1e-5)

    def test_single_factor_effect(self) -> None:
        effect = make_effect(np.diag([0.2, 0.7]), [2])
        result = max_linear_over_sep(effect)
        self.assertAlmostEqual(result.certified_max, 0.7, places=12)
        self.assertTrue(result.exact)


class TestBipartition(unittest.TestCase):
    def test_validate_rejects_full_cut(self) -> None:
        with self.assertRaises(ValueError):
            Bipartition.of(0, 1).validate(2)
