from __future__ import annotations

import numpy as np
from django.test import SimpleTestCase

from gp_core.exceptions import ConfigurationError, ContractViolation
from gp_core.operators import (
    METHOD_FULL,
    VariationParams,
    crossover_90_10,
    pick_crossover_point,
    ramp_schedule,
    ramped_half_and_half,
    random_tree,
    subtree_mutation,
)
from gp_core.trees import (
    Function,
    Op,
    Terminal,
    depth,
    evaluate,
    iter_nodes,
    node_count,
    parse_prefix,
    replace_at,
    subtree_at,
    to_prefix,
)


def x(i: int) -> Terminal:
    return Terminal(i)


class EvaluateTests(SimpleTestCase):
    def test_protected_division_returns_numerator_on_zero(self):
        tree = Function(Op.DIV, x(0), x(1))
        out = evaluate(tree, np.array([[5.0, 0.0], [6.0, 3.0]]))
        self.assertEqual(out.tolist(), [5.0, 2.0])

    def test_terminal_is_identity_on_feature(self):
        out = evaluate(x(0), np.array([[1.0], [-2.0], [0.0]]))
        self.assertEqual(out.tolist(), [1.0, -2.0, 0.0])

    def test_nested_expression(self):
        tree = Function(Op.MUL, Function(Op.ADD, x(0), x(1)), x(0))
        self.assertEqual(evaluate(tree, np.array([[2.0, 3.0]])).tolist(), [10.0])

    def test_evaluation_is_total_on_huge_values(self):
        tree = Function(Op.SUB, Function(Op.MUL, x(0), x(0)), Function(Op.MUL, x(0), x(0)))
        out = evaluate(tree, np.array([[1e308], [1.0]]))
        self.assertTrue(np.isnan(out[0]))
        self.assertEqual(out[1], 0.0)

    def test_feature_out_of_range_is_a_contract_violation(self):
        with self.assertRaises(ContractViolation):
            evaluate(x(3), np.zeros((2, 2)))

    def test_output_does_not_alias_input(self):
        X = np.array([[1.0], [2.0]])
        out = evaluate(x(0), X)
        out[0] = 99.0
        self.assertEqual(X[0, 0], 1.0)


class PrefixTests(SimpleTestCase):
    def test_golden_prefix_form(self):
        tree = Function(Op.DIV, Function(Op.ADD, x(0), x(1)), x(3))
        self.assertEqual(to_prefix(tree), "(div (add x0 x1) x3)")
        self.assertEqual(parse_prefix("(div (add x0 x1) x3)"), tree)

    def test_bad_text(self):
        for bad in ("", "(pow x0 x1)", "(add x0", "y1", "(add x0 x1) x2"):
            with self.assertRaises(ContractViolation, msg=bad):
                parse_prefix(bad)

    def test_size_and_depth_are_cached(self):
        tree = parse_prefix("(add (mul x0 x1) x2)")
        self.assertEqual(tree.size, 5)
        self.assertEqual(tree.depth, 2)
        self.assertEqual(x(0).depth, 0)

    def test_replace_and_subtree_paths(self):
        tree = parse_prefix("(add (mul x0 x1) x2)")
        self.assertEqual(subtree_at(tree, (0, 1)), x(1))
        self.assertEqual(to_prefix(replace_at(tree, (1,), x(7))), "(add (mul x0 x1) x7)")
        self.assertEqual([p for p, _ in iter_nodes(tree)], [(), (0,), (0, 0), (0, 1), (1,)])


class InitialisationTests(SimpleTestCase):
    def test_full_sized_population(self):
        trees = ramped_half_and_half(500, 1, 5, 8, np.random.default_rng(1))
        self.assertEqual(len(trees), 500)
        for t in trees:
            self.assertGreaterEqual(t.depth, 1)
            self.assertLessEqual(t.depth, 5)

    def test_single_full_depth_one_tree_has_three_nodes(self):
        (tree,) = ramped_half_and_half(1, 1, 1, 4, np.random.default_rng(0))
        self.assertEqual(tree.size, 3)
        self.assertIsInstance(tree, Function)

    def test_ramp_levels_are_balanced(self):
        schedule = ramp_schedule(100, 2, 4)
        counts = {d: sum(1 for dd, _ in schedule if dd == d) for d in (2, 3, 4)}
        for c in counts.values():
            self.assertLessEqual(abs(c - 100 / 3), 1)
        # ambos métodos aparecen en cada nivel
        for d in (2, 3, 4):
            self.assertEqual({m for dd, m in schedule if dd == d}, {"full", "grow"})

    def test_full_trees_reach_target_depth(self):
        rng = np.random.default_rng(3)
        trees = ramped_half_and_half(60, 2, 4, 5, rng)
        for tree, (d, method) in zip(trees, ramp_schedule(60, 2, 4)):
            if method == METHOD_FULL:
                self.assertEqual(tree.depth, d)
                self.assertEqual(tree.size, 2 ** (d + 1) - 1)
            else:
                self.assertLessEqual(tree.depth, d)

    def test_zero_features_is_a_configuration_error(self):
        with self.assertRaises(ConfigurationError):
            ramped_half_and_half(10, 1, 5, 0, np.random.default_rng(0))

    def test_same_seed_same_population(self):
        a = ramped_half_and_half(50, 1, 5, 8, np.random.default_rng(42))
        b = ramped_half_and_half(50, 1, 5, 8, np.random.default_rng(42))
        self.assertEqual([to_prefix(t) for t in a], [to_prefix(t) for t in b])


class VariationParamsTests(SimpleTestCase):
    def test_defaults_follow_the_parameter_table(self):
        p = VariationParams()
        self.assertEqual((p.crossover_rate, p.mutation_rate), (0.60, 0.40))
        self.assertEqual((p.tournament_size, p.max_length, p.max_depth), (7, 800, 8))

    def test_rates_must_sum_to_one(self):
        with self.assertRaises(ConfigurationError):
            VariationParams(crossover_rate=0.7, mutation_rate=0.4)

    def test_bias_must_be_open_probability(self):
        with self.assertRaises(ConfigurationError):
            VariationParams(internal_node_bias=1.0)


class CrossoverTests(SimpleTestCase):
    def test_single_terminal_parents_exchange_roots(self):
        a, b = x(0), x(1)
        children = crossover_90_10(a, b, VariationParams(), np.random.default_rng(0))
        self.assertEqual(set(children), {a, b})

    def test_oversized_offspring_is_replaced_by_its_parent(self):
        params = VariationParams(max_length=10)
        rng0 = np.random.default_rng(0)
        small = x(0)
        big = random_tree(3, 4, rng0, method=METHOD_FULL)  # 15 nodos
        replaced = 0
        for seed in range(200):
            ca, cb = crossover_90_10(small, big, params, np.random.default_rng(seed))
            # replicamos la elección de puntos con la misma semilla
            mirror = np.random.default_rng(seed)
            pa = pick_crossover_point(small, params.internal_node_bias, mirror)
            pb = pick_crossover_point(big, params.internal_node_bias, mirror)
            raw_a = replace_at(small, pa, subtree_at(big, pb))
            raw_b = replace_at(big, pb, subtree_at(small, pa))
            self.assertEqual(ca, raw_a if params.fits(raw_a) else small)
            self.assertEqual(cb, raw_b if params.fits(raw_b) else big)
            self.assertTrue(params.fits(ca) and params.fits(cb))
            replaced += int(not params.fits(raw_a))
        self.assertGreater(replaced, 0)

    def test_internal_node_bias_is_respected(self):
        rng = np.random.default_rng(11)
        tree = random_tree(5, 6, np.random.default_rng(5), method=METHOD_FULL)
        internal = 0
        n = 10_000
        for _ in range(n):
            path = pick_crossover_point(tree, 0.90, rng)
            internal += int(isinstance(subtree_at(tree, path), Function))
        self.assertTrue(0.88 <= internal / n <= 0.92, internal / n)

    def test_offspring_always_within_limits(self):
        params = VariationParams()
        rng = np.random.default_rng(8)
        pop = ramped_half_and_half(40, 1, 5, 6, rng)
        for _ in range(500):
            a = pop[int(rng.integers(len(pop)))]
            b = pop[int(rng.integers(len(pop)))]
            ca, cb = crossover_90_10(a, b, params, rng)
            self.assertTrue(params.fits(ca) and params.fits(cb))
            pop.extend([ca, cb])

    def test_determinism(self):
        pop = ramped_half_and_half(10, 2, 5, 6, np.random.default_rng(2))
        params = VariationParams()
        first = crossover_90_10(pop[0], pop[1], params, np.random.default_rng(99))
        second = crossover_90_10(pop[0], pop[1], params, np.random.default_rng(99))
        self.assertEqual(first, second)


class MutationTests(SimpleTestCase):
    def test_terminal_parent_with_terminal_replacement(self):
        params = VariationParams(mutation_max_depth=0)
        child = subtree_mutation(x(0), params, np.random.default_rng(4), n_features=3)
        self.assertIsInstance(child, Terminal)
        self.assertLess(child.feature, 3)

    def test_mutants_respect_limits(self):
        params = VariationParams()
        rng = np.random.default_rng(21)
        tree = random_tree(5, 5, rng, method=METHOD_FULL)
        for _ in range(1000):
            tree = subtree_mutation(tree, params, rng, n_features=5)
            self.assertLessEqual(node_count(tree), 800)
            self.assertLessEqual(depth(tree), 8)

    def test_mutation_almost_always_changes_the_tree(self):
        params = VariationParams()
        rng = np.random.default_rng(17)
        parent = random_tree(5, 30, np.random.default_rng(0), method=METHOD_FULL)
        changed = sum(subtree_mutation(parent, params, rng, n_features=30) != parent for _ in range(1000))
        self.assertGreaterEqual(changed, 950)

    def test_determinism(self):
        parent = random_tree(4, 5, np.random.default_rng(1), method=METHOD_FULL)
        params = VariationParams()
        a = subtree_mutation(parent, params, np.random.default_rng(5), n_features=5)
        b = subtree_mutation(parent, params, np.random.default_rng(5), n_features=5)
        self.assertEqual(a, b)
