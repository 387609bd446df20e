import numpy as np
from django.test import SimpleTestCase
from numpy.testing import assert_array_equal

from volform.exceptions import NotAPermutation
from volform.perm3 import (
    CANONICAL_TAU, FLIP, IDENTITY, Permutation, act_vec, all_permutations, classify,
    compose, enumerate_classes, inverse, permact, reduce_to_canonical, render_conditions,
    sign,
)


class PermutationTests(SimpleTestCase):
    def test_rejects_non_bijection(self):
        with self.assertRaises(NotAPermutation):
            Permutation((1, 1, 2))
        with self.assertRaisesMessage(NotAPermutation, 'not a permutation'):
            Permutation.parse('1,2')

    def test_parse_and_str(self):
        p = Permutation.parse('3, 1, 2')
        self.assertEqual(p.image, (3, 1, 2))
        self.assertEqual(str(p), '3,1,2')
        self.assertEqual(IDENTITY.describe(), 'identity')
        self.assertEqual(FLIP, Permutation.flip())

    def test_group_laws(self):
        for p in all_permutations():
            self.assertEqual(compose(p, inverse(p)), IDENTITY)
            self.assertEqual(p * ~p, IDENTITY)
            for q in all_permutations():
                self.assertEqual(sign(compose(p, q)), sign(p) * sign(q))

    def test_act_vec(self):
        x = np.array([10.0, 20.0, 30.0])
        assert_array_equal(act_vec(x, Permutation((2, 3, 1))), [20.0, 30.0, 10.0])
        for p in all_permutations():
            assert_array_equal(p.matrix() @ x, act_vec(x, p))

    def test_permact_composition_is_exact(self):
        rng = np.random.default_rng(3)

        def f(x):
            return np.array([np.sin(x[0]) * x[2], x[1] ** 3 - x[0], np.exp(x[2]) + x[1]])

        for p in all_permutations():
            for q in all_permutations():
                lhs = permact(p, p, permact(q, q, f))
                rhs = permact(compose(p, q), compose(p, q), f)
                x = rng.normal(size=3)
                assert_array_equal(lhs(x), rhs(x))


class ClassificationTests(SimpleTestCase):
    def test_five_classes(self):
        classes = enumerate_classes()
        sizes = {label: len(pairs) for label, pairs in classes.items()}
        self.assertEqual(sizes, {'S1': 6, 'SE': 6, 'DL': 6, 'S2': 6, 'SEDL': 12})
        self.assertEqual(sum(sizes.values()), 36)

    def test_identity_pair(self):
        pc = classify(IDENTITY, IDENTITY)
        self.assertEqual(pc.label, 'S1')
        self.assertTrue(pc.tau.is_identity())
        self.assertEqual(pc.sign, 1)

    def test_symplectic_euler_pair(self):
        pc = classify(FLIP, IDENTITY)
        self.assertEqual(pc.label, 'SE')
        self.assertEqual(pc.sign, -1)

    def test_mixed_pair(self):
        pc = classify(FLIP, Permutation((1, 3, 2)))
        self.assertEqual(pc.label, 'SEDL')
        self.assertEqual(pc.sign, 1)

    def test_reduction_reaches_representative(self):
        for sigma in all_permutations():
            for Sigma in all_permutations():
                steps = reduce_to_canonical(sigma, Sigma)
                _, s, S = steps[-1]
                label = classify(sigma, Sigma).label
                self.assertEqual((s, S), (IDENTITY, CANONICAL_TAU[label]))

    def test_class_is_invariant_under_relabel(self):
        for rho in all_permutations():
            for sigma in all_permutations():
                for Sigma in all_permutations():
                    self.assertEqual(
                        classify(sigma, Sigma).label,
                        classify(compose(rho, sigma), compose(rho, Sigma)).label,
                    )


class RenderConditionsTests(SimpleTestCase):
    def test_symplectic_euler_block(self):
        lines = render_conditions(FLIP, IDENTITY).splitlines()
        self.assertEqual(lines[0], 'class: SE')
        self.assertEqual(lines[1], 'x₃ = ∂x₂ φ(x₁,x₂,X₃)')
        self.assertEqual(lines[3], 'X₁ = ∂X₂ Φ(x₁,X₂,X₃)')
        self.assertTrue(lines[4].startswith('λ = '))

    def test_custom_names(self):
        block = render_conditions(IDENTITY, IDENTITY, names=('A', 'C'))
        self.assertIn('class: S1', block)
        self.assertIn('A(', block)
        self.assertIn('C(', block)

    def test_s1_block(self):
        lines = render_conditions(FLIP, FLIP, names=('A', 'C')).splitlines()
        self.assertEqual(lines[1], 'x₃ = ∂x₂ A(x₁,x₂,X₁)')
        self.assertEqual(lines[2], '∂X₁ A(x₁,x₂,X₁) = ∂x₁ C(x₁,X₁,X₂)')
        self.assertEqual(lines[3], 'X₃ = −∂X₂ C(x₁,X₁,X₂)')


class InvariantTests(SimpleTestCase):
    def test_examples(self):
        cycle = Permutation((2, 3, 1))
        self.assertEqual(compose(cycle, cycle), Permutation((3, 1, 2)))
        self.assertEqual(inverse(cycle), Permutation((3, 1, 2)))
        self.assertEqual(compose(FLIP, FLIP), IDENTITY)
        self.assertEqual(sign(cycle), 1)
        assert_array_equal(act_vec([7.0, 8.0, 9.0], FLIP), [9.0, 8.0, 7.0])

    def test_associativity(self):
        perms = all_permutations()
        for p in perms:
            for q in perms:
                for r in perms:
                    self.assertEqual(compose(compose(p, q), r), compose(p, compose(q, r)))

    def test_action_composes(self):
        x = np.random.default_rng(4).normal(size=3)
        for p in all_permutations():
            for q in all_permutations():
                assert_array_equal(act_vec(act_vec(x, p), q), act_vec(x, compose(p, q)))

    def test_permact_on_linear_map(self):
        M = np.arange(9.0).reshape(3, 3)
        R = FLIP.matrix()
        g = permact(FLIP, FLIP, lambda x: M @ x)
        x = np.array([1.0, -2.0, 0.5])
        assert_array_equal(g(x), R @ M @ R @ x)

    def test_adjunction_keeps_label(self):
        for sigma in all_permutations():
            for Sigma in all_permutations():
                self.assertEqual(classify(sigma, Sigma).label, classify(Sigma, sigma).label)
