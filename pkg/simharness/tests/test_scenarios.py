import math

import numpy as np
from django.test import SimpleTestCase

import constants
from core.exceptions import DataValidationError
from simharness.scenarios import (
    HALF_STEP_GRID, INTEGER_GRID, ScenarioConfig, generate, generate_with_mask, grid_values,
)


def neo_config(**changes):
    config = ScenarioConfig(
        scenario=constants.NEO, p=3, n=200, M=4, delta=0.2,
        lambda_grid=(0.0, 2.0), k_grid=(0.0, 5.0), seed=17,
    )
    return config.with_changes(**changes)


class ScenarioConfigTest(SimpleTestCase):
    def test_cells_in_grid_order(self):
        self.assertEqual(neo_config().cells(), [(0.0, 0.0), (0.0, 5.0), (2.0, 0.0), (2.0, 5.0)])

    def test_clean_scenarios_have_one_cell(self):
        config = ScenarioConfig(scenario='ne', p=2, n=20, M=3)
        self.assertEqual(config.scenario, constants.NE)
        self.assertEqual(config.cells(), [(0.0, 0.0)])

    def test_delta_below_one_half(self):
        with self.assertRaisesMessage(DataValidationError, 'breakdown point'):
            neo_config(delta=0.5)

    def test_neo_requires_grids(self):
        with self.assertRaises(DataValidationError):
            neo_config(k_grid=())

    def test_sample_size(self):
        with self.assertRaises(DataValidationError):
            ScenarioConfig(scenario=constants.NE, p=5, n=6, M=1)

    def test_grids(self):
        self.assertEqual(grid_values(constants.HALF_GRID), HALF_STEP_GRID)
        self.assertEqual(grid_values(constants.INTEGER_GRID), INTEGER_GRID)
        self.assertEqual(len(HALF_STEP_GRID), 13)
        self.assertEqual(INTEGER_GRID[-1], 10.0)


class GenerateTest(SimpleTestCase):
    def test_same_seed_same_data(self):
        config = neo_config()
        first = generate(config, 3, 2.0, 5.0)
        second = generate(config, 3, 2.0, 5.0)
        self.assertEqual(first.fingerprint(), second.fingerprint())

    def test_replicates_differ(self):
        config = neo_config()
        self.assertNotEqual(generate(config, 0).fingerprint(), generate(config, 1).fingerprint())

    def test_cells_share_clean_rows(self):
        config = neo_config()
        base, mask = generate_with_mask(config, 2, 0.0, 0.0)
        shifted, other_mask = generate_with_mask(config, 2, 2.0, 5.0)
        np.testing.assert_array_equal(mask, other_mask)
        np.testing.assert_array_equal(base.carriers[~mask], shifted.carriers[~mask])
        np.testing.assert_array_equal(base.response[~mask], shifted.response[~mask])

    def test_outliers_are_shifted(self):
        config = neo_config(n=2000, delta=0.3)
        data, mask = generate_with_mask(config, 0, 2.0, 5.0)
        self.assertAlmostEqual(mask.mean(), 0.3, delta=0.05)
        expected = 5.0 * math.sqrt(6.634897)
        self.assertAlmostEqual(float(data.response[mask].mean()), expected, delta=0.3)

    def test_fixed_mode_count(self):
        config = neo_config(n=101, delta=0.3, mode=constants.FIXED)
        _, mask = generate_with_mask(config, 5, 1.0, 1.0)
        self.assertEqual(int(mask.sum()), math.ceil(0.3 * 101))

    def test_zero_contamination_matches_clean_scenario(self):
        neo = neo_config(delta=0.0)
        ne = ScenarioConfig(scenario=constants.NE, p=3, n=200, M=4, seed=17)
        for index in range(3):
            data, mask = generate_with_mask(neo, index, 2.0, 5.0)
            self.assertFalse(mask.any())
            self.assertEqual(data.fingerprint(), generate(ne, index).fingerprint())

    def test_t_errors_are_heavy_tailed(self):
        config = ScenarioConfig(scenario=constants.TE, p=1, n=5000, M=1, seed=4)
        data = generate(config, 0)
        self.assertTrue(np.all(np.isfinite(data.response)))
        self.assertGreater(float(np.var(data.response)), 1.5)
