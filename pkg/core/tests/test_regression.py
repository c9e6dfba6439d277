import numpy as np
from django.test import SimpleTestCase, tag

import constants
from core.conf import SRConfig
from core.datasets import builtin_dataset
from core.exceptions import CollinearCarriersError, DataValidationError, OverTrimmingError
from core.numerics import chisq_cdf
from core.regression import (
    Dataset, RegressionFit, classify_observations, fit, initial_distances, ols_fit, r_squared, sr_fit,
    sw_estimates, sw_fit,
)


def normal_dataset(n=60, p=2, seed=0):
    rng = np.random.default_rng(seed)
    carriers = rng.standard_normal((n, p))
    response = carriers @ np.arange(1.0, p + 1.0) + 0.5 + rng.standard_normal(n)
    return Dataset(carriers, response)


class DatasetTest(SimpleTestCase):
    def test_default_names(self):
        data = Dataset(np.zeros((4, 2)), np.zeros(4))
        self.assertEqual(data.names, ('x1', 'x2', 'y'))
        self.assertEqual((data.n, data.p), (4, 2))

    def test_arrays_are_read_only(self):
        data = normal_dataset()
        with self.assertRaises(ValueError):
            data.carriers[0, 0] = 1.0

    def test_rejects_mismatched_lengths(self):
        with self.assertRaises(DataValidationError):
            Dataset(np.zeros((4, 2)), np.zeros(3))

    def test_rejects_non_finite_cells(self):
        carriers = np.zeros((4, 1))
        carriers[2, 0] = np.inf
        with self.assertRaises(DataValidationError):
            Dataset(carriers, np.zeros(4))

    def test_rejects_intercept_only(self):
        with self.assertRaises(DataValidationError):
            Dataset(np.zeros((4, 0)), np.zeros(4))

    def test_requires_p_plus_two_observations(self):
        data = Dataset(np.arange(6.0).reshape(3, 2), np.arange(3.0))
        with self.assertRaisesMessage(DataValidationError, 'insufficient sample'):
            sr_fit(data)

    def test_fingerprint_tracks_content(self):
        data = normal_dataset()
        self.assertEqual(data.fingerprint(), normal_dataset().fingerprint())
        self.assertNotEqual(data.fingerprint(), normal_dataset(seed=1).fingerprint())


class OLSFitTest(SimpleTestCase):
    def test_star_coefficients(self):
        result = ols_fit(builtin_dataset('star'))
        self.assertAlmostEqual(result.alpha, 6.793467, places=4)
        self.assertAlmostEqual(float(result.beta[0]), -0.413304, places=4)
        self.assertAlmostEqual(result.r2, 0.044274, places=4)
        self.assertEqual(result.outliers, ())

    def test_hbk_coefficients(self):
        result = ols_fit(builtin_dataset('hbk'))
        np.testing.assert_allclose(result.phi, [0.239185, -0.334548, 0.383341, -0.387550], atol=1e-4)

    def test_matches_least_squares(self):
        data = normal_dataset(p=3)
        design = np.column_stack([data.carriers, np.ones(data.n)])
        expected, *_ = np.linalg.lstsq(design, data.response, rcond=None)
        np.testing.assert_allclose(ols_fit(data).phi, expected, rtol=1e-9, atol=1e-10)

    def test_collinear_carriers(self):
        t = np.linspace(0.0, 1.0, 10)
        data = Dataset(np.column_stack([t, 2.0 * t]), t + 1.0)
        with self.assertRaisesMessage(CollinearCarriersError, 'collinear carriers'):
            ols_fit(data)

    def test_perfect_fit_scores_one(self):
        t = np.linspace(0.0, 1.0, 10)
        result = ols_fit(Dataset(t, 3.0 * t - 1.0))
        self.assertAlmostEqual(result.r2, 1.0)

    def test_constant_response(self):
        rng = np.random.default_rng(4)
        result = ols_fit(Dataset(rng.standard_normal((20, 2)), np.full(20, 3.0)))
        np.testing.assert_allclose(result.beta, [0.0, 0.0], atol=1e-12)
        self.assertAlmostEqual(result.alpha, 3.0)
        self.assertEqual(result.r2, 0.0)

    def test_matches_least_squares_on_many_datasets(self):
        rng = np.random.default_rng(21)
        for _ in range(100):
            n, p = int(rng.integers(8, 80)), int(rng.integers(1, 6))
            carriers = rng.standard_normal((n, p)) * rng.uniform(0.5, 5.0, p)
            response = carriers @ rng.standard_normal(p) + rng.standard_normal() + rng.standard_normal(n)
            design = np.column_stack([carriers, np.ones(n)])
            expected, *_ = np.linalg.lstsq(design, response, rcond=None)
            np.testing.assert_allclose(ols_fit(Dataset(carriers, response)).phi, expected, rtol=1e-7, atol=1e-9)


class SRFitTest(SimpleTestCase):
    def test_star_outliers_and_fit(self):
        result = sr_fit(builtin_dataset('star'))
        self.assertEqual(result.method, constants.SR)
        self.assertEqual(set(result.outliers), {6, 8, 10, 19, 29, 33})
        # least squares on the 41 retained rows
        self.assertAlmostEqual(result.alpha, -8.5001, places=3)
        self.assertAlmostEqual(float(result.beta[0]), 3.0462, places=3)
        self.assertAlmostEqual(result.r2, 0.6983, delta=0.01)

    def test_hbk_leverage_points(self):
        result = sr_fit(builtin_dataset('hbk'))
        self.assertEqual(result.outliers, tuple(range(10)))
        self.assertAlmostEqual(result.alpha, -0.1805, places=3)
        np.testing.assert_allclose(result.beta, [0.0814, 0.0399, -0.0517], atol=1e-3)
        self.assertAlmostEqual(result.adj_r2, 0.9781, delta=0.005)

    def test_hbk_good_leverage_points_are_kept(self):
        result = sr_fit(builtin_dataset('hbk'))
        labels = classify_observations(result)
        self.assertEqual(labels[10:14], [constants.GOOD_LEVERAGE] * 4)

    def test_refit_is_ols_on_retained_rows(self):
        data = builtin_dataset('hbk')
        result = sr_fit(data)
        retained = ols_fit(data.subset(np.flatnonzero(result.wr == 1)))
        np.testing.assert_allclose(result.phi, retained.phi, rtol=1e-8, atol=1e-10)

    def test_equals_ols_when_nothing_is_rejected(self):
        data = normal_dataset(n=50, p=2, seed=3)
        config = SRConfig(delta1=1e-12, delta2=1e-12)
        result = sr_fit(data, config)
        self.assertEqual(result.outliers, ())
        self.assertTrue(np.all(result.w == 1))
        np.testing.assert_allclose(result.phi, ols_fit(data).phi, rtol=1e-8, atol=1e-10)

    def test_weights_are_binary(self):
        result = sr_fit(normal_dataset(seed=8))
        self.assertTrue(set(np.unique(result.w)) <= {0.0, 1.0})
        self.assertTrue(set(np.unique(result.wr)) <= {0.0, 1.0})
        self.assertEqual(len(result.residual_d2), 60)

    def test_over_trimming(self):
        config = SRConfig(delta1=0.99)
        with self.assertRaises(OverTrimmingError) as cm:
            sr_fit(normal_dataset(n=12, p=1, seed=2), config)
        self.assertEqual(cm.exception.stage, 'first')

    def test_deterministic(self):
        data = builtin_dataset('star')
        np.testing.assert_array_equal(sr_fit(data).phi, sr_fit(data).phi)

    def test_initial_distances_match_first_stage_weights(self):
        data = builtin_dataset('star')
        d2 = initial_distances(data)
        result = sr_fit(data)
        self.assertEqual(d2.shape, (data.n,))
        self.assertTrue(np.all(d2 >= 0))
        np.testing.assert_array_equal(result.w, (d2 <= result.q1).astype(float))

    def test_distances_follow_row_order(self):
        data = builtin_dataset('hbk')
        order = np.random.default_rng(6).permutation(data.n)
        np.testing.assert_allclose(initial_distances(data.subset(order)), initial_distances(data)[order], rtol=1e-6)

    def test_carrier_units_do_not_change_the_fit(self):
        data = builtin_dataset('star')
        rescaled = Dataset(data.carriers * 1000.0, data.response, data.names)
        reference, result = sr_fit(data), sr_fit(rescaled)
        self.assertEqual(result.outliers, reference.outliers)
        np.testing.assert_allclose(result.beta * 1000.0, reference.beta, rtol=1e-6)
        self.assertAlmostEqual(result.alpha, reference.alpha, places=6)

    def test_residual_distances_are_leverage_adjusted(self):
        data = builtin_dataset('hbk')
        config = SRConfig()
        estimates = sw_estimates(data, config)
        interim = sw_fit(data, config)
        m, p = int(estimates.w.sum()), data.p

        sxx = estimates.scatter[:p, :p]
        offsets = data.carriers - estimates.location[:p]
        leverage = np.einsum('ij,jk,ik->i', offsets, np.linalg.inv(sxx), offsets)
        scale = interim.sigma2 * (1.0 - config.delta1) / chisq_cdf(p + 3, estimates.q1) * m / (m - p - 1)
        residuals = data.response - data.carriers @ interim.beta - interim.alpha
        expected = residuals ** 2 / (scale * (1.0 + (1.0 + leverage) / m))

        np.testing.assert_allclose(sr_fit(data, config).residual_d2, expected, rtol=1e-8)

    def test_far_carriers_need_larger_residuals(self):
        rng = np.random.default_rng(13)
        carriers = np.append(rng.standard_normal(59), 4.0)
        response = carriers + rng.standard_normal(60)
        data = Dataset(carriers, response)
        interim = sw_fit(data)
        residuals = data.response - data.carriers @ interim.beta - interim.alpha
        ratio = sr_fit(data).residual_d2 / residuals ** 2
        self.assertLess(ratio[-1], ratio[np.argmin(np.abs(carriers))])

    def test_beats_least_squares_under_contamination(self):
        wins = 0
        for seed in range(100):
            rng = np.random.default_rng(seed)
            carriers = rng.standard_normal((60, 2))
            response = carriers @ np.array([1.0, 1.0]) + rng.standard_normal(60)
            bad = rng.permutation(60)[:8]
            carriers[bad] += 4.0
            response[bad] -= 8.0
            data = Dataset(carriers, response)
            truth = np.array([1.0, 1.0, 0.0])
            sr_error = np.sum((sr_fit(data).phi - truth) ** 2)
            ols_error = np.sum((ols_fit(data).phi - truth) ** 2)
            wins += sr_error < ols_error
        self.assertGreaterEqual(wins, 95)


class SWFitTest(SimpleTestCase):
    def test_reweights_only_in_first_stage(self):
        result = sw_fit(builtin_dataset('star'))
        self.assertEqual(result.method, constants.SW)
        np.testing.assert_array_equal(result.w, result.wr)
        self.assertIsNone(result.residual_d2)
        self.assertGreater(result.sigma2, 0.0)

    def test_untrimmed_moments_are_the_plain_moments(self):
        data = normal_dataset(n=40, p=3, seed=5)
        estimates = sw_estimates(data, SRConfig(delta1=1e-12))
        self.assertEqual(int(estimates.w.sum()), data.n)
        np.testing.assert_allclose(estimates.location, data.joint.mean(axis=0), rtol=1e-12)
        np.testing.assert_allclose(estimates.scatter, np.cov(data.joint, rowvar=False, bias=True), rtol=1e-10, atol=1e-12)

    def test_exact_line_with_bad_leverage_points(self):
        rng = np.random.default_rng(17)
        carriers = rng.standard_normal(100)
        response = 2.0 * carriers + 0.5
        carriers[:10] = 10.0 + rng.standard_normal(10)
        response[:10] = -20.0
        result = sw_fit(Dataset(carriers, response))
        self.assertTrue(np.all(result.w[:10] == 0))
        self.assertAlmostEqual(float(result.beta[0]), 2.0, delta=1e-6)
        self.assertAlmostEqual(result.alpha, 0.5, delta=1e-6)

    @tag('slow')
    def test_retained_fraction_on_clean_data(self):
        fractions = []
        for seed in range(200):
            rng = np.random.default_rng(seed)
            data = Dataset(rng.standard_normal((100, 2)), rng.standard_normal(100))
            fractions.append(sw_estimates(data).w.mean())
        self.assertGreaterEqual(np.mean(fractions), 0.95)
        self.assertLessEqual(np.mean(fractions), 0.99)


class FitDispatchTest(SimpleTestCase):
    def test_method_names_are_case_insensitive(self):
        data = normal_dataset()
        np.testing.assert_array_equal(fit(data, 'ols').phi, ols_fit(data).phi)

    def test_unknown_method(self):
        with self.assertRaises(DataValidationError):
            fit(normal_dataset(), 'lts')


class ClassificationTest(SimpleTestCase):
    def test_labels_from_both_stages(self):
        result = RegressionFit(
            beta=np.zeros(1), alpha=0.0, sigma2=1.0,
            w=np.array([1.0, 1.0, 0.0, 0.0]), wr=np.array([1.0, 0.0, 1.0, 0.0]),
            r2=0.0, method=constants.SR,
        )
        self.assertEqual(classify_observations(result), [
            constants.REGULAR, constants.VERTICAL_OUTLIER, constants.GOOD_LEVERAGE, constants.BAD_LEVERAGE,
        ])
        self.assertEqual(result.outliers, (1, 3))

    def test_r_squared_uses_retained_rows(self):
        data = Dataset(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.0, 1.0, 2.0, 50.0]))
        result = RegressionFit(
            beta=np.ones(1), alpha=0.0, sigma2=0.0, w=np.ones(4),
            wr=np.array([1.0, 1.0, 1.0, 0.0]), r2=0.0, method=constants.SR,
        )
        self.assertAlmostEqual(r_squared(data, result), 1.0)

    def test_r_squared_total_uses_every_response(self):
        data = Dataset(np.array([0.0, 1.0, 2.0, 3.0]), np.array([0.0, 1.5, 2.0, 50.0]))
        result = RegressionFit(
            beta=np.ones(1), alpha=0.0, sigma2=0.0, w=np.ones(4),
            wr=np.array([1.0, 1.0, 1.0, 0.0]), r2=0.0, method=constants.SR,
        )
        # SSE 0.25 over the kept rows, SST about the mean 13.375 of all four responses
        self.assertAlmostEqual(r_squared(data, result), 1.0 - 0.25 / 1790.6875)
