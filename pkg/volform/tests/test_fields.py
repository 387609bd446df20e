import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_allclose

from volform import quadcalc as qc
from volform.exceptions import FieldNotDivergenceFree, UnknownField
from volform.fields import (
    AXIS_PAIRS, LinearField, PotentialTriple, QuadPotential, abc_field, builtin,
    extract_potentials, field_from_potentials, linear_potentials, potentials_for,
)


def random_trace_free(rng):
    A = rng.uniform(-1.0, 1.0, size=(3, 3))
    A[2, 2] = -(A[0, 0] + A[1, 1])
    return A


class FieldFromPotentialsTests(SimpleTestCase):
    def test_zero_triple(self):
        f = field_from_potentials(PotentialTriple())
        assert_allclose(f(np.array([0.3, -1.0, 2.0])), np.zeros(3))

    def test_shear_from_F3(self):
        F3 = QuadPotential(qc.QuadForm.monomial(0.5, qc.x2, qc.x2))
        f = field_from_potentials(PotentialTriple(F3=F3))
        x = np.array([0.3, -1.2, 2.0])
        assert_allclose(f(x), [x[1], 0.0, 0.0])
        assert_allclose(f.linear, [[0, 1, 0], [0, 0, 0], [0, 0, 0]])

    def test_hyperbolic_from_F1(self):
        F1 = QuadPotential(qc.QuadForm.monomial(1.0, qc.x2, qc.x3))
        f = field_from_potentials(PotentialTriple(F1=F1))
        x = np.array([0.3, -1.2, 2.0])
        assert_allclose(f(x), [0.0, x[1], -x[2]])

    def test_divergence_free_by_construction(self):
        rng = np.random.default_rng(11)
        f = field_from_potentials(potentials_for(abc_field(1.0, 0.7, 0.43), (1, 3)))
        for x in rng.uniform(-2.0, 2.0, size=(200, 3)):
            self.assertLess(abs(f.divergence(x)), 1e-6)


class LinearFieldTests(SimpleTestCase):
    def test_trace_must_vanish(self):
        with self.assertRaises(FieldNotDivergenceFree):
            LinearField(np.eye(3))

    def test_linear_potentials_reconstruct(self):
        rng = np.random.default_rng(5)
        for _ in range(10):
            A = random_trace_free(rng)
            for pair in AXIS_PAIRS:
                f = field_from_potentials(linear_potentials(LinearField(A), pair))
                x = rng.normal(size=3)
                assert_allclose(f(x), A @ x, rtol=0.0, atol=1e-12)

    def test_shear_potentials(self):
        p = linear_potentials(LinearField([[0, 1, 0], [0, 0, 0], [0, 0, 0]]))
        self.assertTrue(p.F3.form.is_close(qc.QuadForm.monomial(0.5, qc.x2, qc.x2)))
        self.assertTrue(p.F1.is_zero)
        self.assertTrue(p.F2.is_zero)

    def test_zero_matrix(self):
        self.assertTrue(linear_potentials(LinearField(np.zeros((3, 3)))).is_zero)


class ExtractPotentialsTests(SimpleTestCase):
    def test_shear_by_quadrature(self):
        p = extract_potentials(LinearField([[0, 1, 0], [0, 0, 0], [0, 0, 0]]))
        x = np.array([0.4, 1.3, -0.7])
        self.assertAlmostEqual(p.F3(x), 0.5 * x[1] ** 2, places=10)
        self.assertAlmostEqual(p.F1(x), 0.0, places=10)
        self.assertTrue(p.F2.is_zero)

    def test_abc_reconstruction(self):
        rng = np.random.default_rng(2)
        f = abc_field(1.0, 0.7, 0.43)
        for pair in ((1, 3), (1, 2)):
            g = field_from_potentials(extract_potentials(f, pair))
            for x in rng.uniform(-np.pi, np.pi, size=(10, 3)):
                assert_allclose(g(x), f(x), rtol=0.0, atol=1e-8)

    def test_abc_closed_forms(self):
        rng = np.random.default_rng(4)
        f = abc_field(1.0, 0.7, 0.43)
        for pair in ((1, 3), (1, 2)):
            g = field_from_potentials(f.closed_form_potentials(pair))
            for x in rng.uniform(-np.pi, np.pi, size=(20, 3)):
                assert_allclose(g(x), f(x), rtol=0.0, atol=1e-12)
                assert_allclose(g.jacobian(x), f.jacobian(x), rtol=0.0, atol=1e-12)


class BuiltinTests(SimpleTestCase):
    def test_abc_at_origin(self):
        assert_allclose(builtin('abc', A=1.0, B=1.0, C=1.0)(np.zeros(3)), [1.0, 1.0, 1.0])

    def test_abc_zero(self):
        f = builtin('abc', A=0.0, B=0.0, C=0.0)
        assert_allclose(f(np.array([0.2, 0.5, -1.0])), np.zeros(3))
        self.assertIsNotNone(f.linear)

    def test_linear(self):
        A = np.array([[0.15, 0.25, 0.4], [0.2, -0.05, 0.3], [0.35, 0.1, -0.1]])
        x = np.array([1.0, -2.0, 0.5])
        assert_allclose(builtin('linear', matrix=A)(x), A @ x)

    def test_unknown(self):
        with self.assertRaises(UnknownField):
            builtin('taylor-green')

    def test_abc_divergence(self):
        rng = np.random.default_rng(9)
        f = builtin('abc', A=1.0, B=0.7, C=0.43)
        for x in rng.uniform(-2.0, 2.0, size=(100, 3)):
            self.assertLess(abs(f.divergence(x)), 1e-12)
