import math

import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose
from scipy.linalg import expm

from volform.fields import LinearField, abc_field
from volform.perm3 import all_permutations, sign
from volform.schemes import make_scheme
from volform.verify import (
    OrderReport, consistency_defect, det3, expm3, integrate, jacobian_fd, observed_order,
    rk4_reference, step_defect, volume_audit,
)

A_TEST = np.array([[0.15, 0.25, 0.4], [0.2, -0.05, 0.3], [0.35, 0.1, -0.1]])
ROTATION = np.array([[0.0, -1.0, 0.0], [1.0, 0.0, 0.0], [0.0, 0.0, 0.0]])


class LinearAlgebraTests(SimpleTestCase):
    def test_det3(self):
        rng = np.random.default_rng(0)
        for _ in range(20):
            M = rng.normal(size=(3, 3))
            self.assertAlmostEqual(det3(M), np.linalg.det(M), places=12)

    def test_expm3(self):
        rng = np.random.default_rng(1)
        for scale in (0.1, 1.0, 5.0):
            A = scale * rng.normal(size=(3, 3))
            assert_allclose(expm3(A), expm(A), rtol=1e-12, atol=1e-12)
        assert_allclose(expm3(A_TEST, 2.0), expm(2.0 * A_TEST), rtol=1e-13)

    def test_det3_matches_permutation_sum(self):
        def leibniz(M):
            return sum(sign(p) * M[0, p(1) - 1] * M[1, p(2) - 1] * M[2, p(3) - 1]
                       for p in all_permutations())

        rng = np.random.default_rng(2)
        for _ in range(20):
            M = rng.normal(size=(3, 3))
            self.assertAlmostEqual(det3(M), leibniz(M), places=12)
        M = np.array([[2.0, -1.0, 0.0], [3.0, 4.0, 5.0], [-2.0, 1.0, 7.0]])
        self.assertEqual(det3(M), leibniz(M))

    def test_expm3_group_law(self):
        rng = np.random.default_rng(3)
        A = 0.5 * rng.normal(size=(3, 3))
        for s, t in ((0.3, 0.5), (1.0, -1.0), (2.0, 1.5)):
            assert_allclose(expm3(A, s) @ expm3(A, t), expm3(A, s + t), rtol=1e-11, atol=1e-11)

    def test_jacobian_fd(self):
        J = jacobian_fd(lambda x: A_TEST @ x, np.array([1.0, 2.0, 3.0]))
        assert_allclose(J, A_TEST, atol=1e-9)


class ReferenceTests(SimpleTestCase):
    def test_rk4_reference_matches_exponential(self):
        x0 = np.array([0.1, 0.2, 0.3])
        ref = rk4_reference(lambda x: A_TEST @ x, x0, 1.0)
        assert_allclose(ref, expm(A_TEST) @ x0, atol=1e-10)

    def test_rk4_reference_is_step_independent_on_abc(self):
        field = abc_field(1.0, 0.7, 0.43)
        x0 = np.array([0.4, -0.2, 0.9])
        coarse = rk4_reference(field, x0, 1.0, n_steps=200)
        fine = rk4_reference(field, x0, 1.0, n_steps=400)
        assert_allclose(coarse, fine, rtol=0.0, atol=1e-9)

    def test_order_table(self):
        field = LinearField(A_TEST)
        report = observed_order(lambda h: make_scheme('euler', field, h), field,
                                [0.1, 0.2, 0.3], 1.0, [0.2, 0.1])
        lines = report.to_table().splitlines()
        self.assertEqual(lines[0], 'h,error,order')
        self.assertEqual(len(lines), 4)
        self.assertTrue(lines[1].endswith(','))
        self.assertTrue(lines[-1].startswith('slope,'))
        self.assertAlmostEqual(report.orders[0], report.slope)

    def test_single_level_has_nan_slope(self):
        field = LinearField(A_TEST)
        report = observed_order(lambda h: make_scheme('euler', field, h), field,
                                [0.1, 0.2, 0.3], 1.0, [0.2])
        self.assertTrue(math.isnan(report.slope))
        self.assertEqual(report.to_table().splitlines()[-1], 'slope,nan')

    def test_zero_error_has_nan_slope(self):
        report = OrderReport(h=[0.2, 0.1], errors=[0.0, 0.0], orders=[float('nan')],
                             slope=float('nan'))
        self.assertEqual(report.to_table().splitlines()[-1], 'slope,nan')

    def test_horizon_must_be_multiple(self):
        field = LinearField(A_TEST)
        with self.assertRaises(ValueError):
            observed_order(lambda h: make_scheme('euler', field, h), field,
                           [0.1, 0.2, 0.3], 1.0, [0.3])


class VolumeAuditTests(SimpleTestCase):
    def test_euler_defect(self):
        scheme = make_scheme('euler', LinearField(A_TEST), 0.1)
        audit = volume_audit(scheme, np.zeros((3, 3)))
        self.assertTrue(audit.exact)
        self.assertAlmostEqual(audit.max_defect, abs(np.linalg.det(np.eye(3) + 0.1 * A_TEST) - 1.0))
        self.assertGreater(audit.max_defect, 1e-4)

    def test_csv_and_summary(self):
        scheme = make_scheme('se-se', LinearField(A_TEST), 0.1)
        audit = volume_audit(scheme, [[0.1, 0.2, 0.3], [1.0, 0.0, -1.0]])
        lines = audit.to_csv().splitlines()
        self.assertEqual(lines[0], 'point,x1,x2,x3,defect')
        self.assertEqual(len(lines), 3)
        self.assertTrue(lines[1].startswith('0,'))
        self.assertTrue(audit.summary().startswith('max_defect '))
        self.assertIn(' mean_defect ', audit.summary())
        self.assertLess(audit.max_defect, 1e-12)

    def test_finite_difference_defect(self):
        def shear(x):
            return np.array([x[0] + np.sin(x[1]), x[1], x[2]])

        self.assertLess(step_defect(shear, np.array([0.3, 0.4, 0.5])), 1e-8)


class IntegrateTests(SimpleTestCase):
    def test_zero_field(self):
        scheme = make_scheme('se-se', LinearField(np.zeros((3, 3))), 0.1)
        trajectory = integrate(scheme, [0.1, 0.2, 0.3], 5, audit_every=2)
        lines = trajectory.to_csv().splitlines()
        self.assertEqual(lines[0], 'step,t,x1,x2,x3,det_defect')
        self.assertEqual(len(lines), 7)
        for row in trajectory.rows:
            assert_allclose(row.x, [0.1, 0.2, 0.3])
        self.assertEqual([row.defect is not None for row in trajectory.rows],
                         [True, False, True, False, True, False])

    def test_rotation_stays_bounded(self):
        scheme = make_scheme('se-se', LinearField(ROTATION), 0.1)
        trajectory = integrate(scheme, [1.0, 0.0, 0.5], 1000, audit_every=100)
        radii = [np.hypot(row.x[0], row.x[1]) for row in trajectory.rows]
        self.assertLess(max(radii), 1.2)
        self.assertGreater(min(radii), 0.8)
        defects = [row.defect for row in trajectory.rows if row.defect is not None]
        self.assertEqual(len(defects), 11)
        self.assertLess(max(defects), 1e-10)
        assert_allclose([row.x[2] for row in trajectory.rows], 0.5)


class ConsistencyTests(SimpleTestCase):
    def test_euler_is_consistent_by_construction(self):
        scheme = make_scheme('euler', LinearField(A_TEST), 0.1)
        points = np.random.default_rng(4).normal(size=(10, 3))
        self.assertLess(consistency_defect(scheme, points), 1e-12)

    def test_generating_schemes_are_consistent(self):
        field = abc_field(1.0, 0.7, 0.43)
        points = np.random.default_rng(5).uniform(-1.0, 1.0, size=(5, 3))
        coarse = consistency_defect(make_scheme('se-se', field, 0.01), points)
        fine = consistency_defect(make_scheme('se-se', field, 0.001), points)
        self.assertLess(fine, coarse)
        self.assertLess(fine, 1e-2)
