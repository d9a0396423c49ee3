from __future__ import annotations

import math
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from emo.individuals import Individual, ObjectivePoint, Population
from emo.pareto import fronts_from_matrix, non_dominated_sort
from emo.selection import SCHEME_SPEA2, environmental_selection_nsga2
from gp_core.exceptions import ConfigurationError, ContractViolation
from gp_core.operators import VariationParams, crossover_90_10, ramped_half_and_half
from gp_core.trees import Terminal, evaluate
from semantic_variants.services import (
    VARIANT_BASELINE,
    VARIANT_SCD,
    VARIANT_SDO,
    VARIANT_SSC,
    VariantConfig,
    environmental_selection,
    environmental_selection_scd,
    environmental_selection_sdo,
    ssc_accepts,
    ssc_crossover,
    ssc_crossover_outcome,
)
from semantic_variants.tracing import histogram
from semantics.distances import SemanticThresholds, mean_abs_distance


def ind(tpr, tnr, semantics=(0.0, 0.0, 0.0)) -> Individual:
    return Individual(
        genotype=Terminal(0),
        semantics=np.asarray(semantics, dtype=np.float64),
        train_objectives=ObjectivePoint(tpr, tnr),
    )


def uids(pop) -> list[int]:
    return [p.uid for p in pop]


UPPER = SemanticThresholds(0.5)
BANDED = SemanticThresholds(0.5, 0.01)


class VariantConfigTests(SimpleTestCase):
    def test_semantic_variants_need_thresholds(self):
        for variant in (VARIANT_SSC, VARIANT_SCD, VARIANT_SDO):
            with self.assertRaises(ConfigurationError):
                VariantConfig(variant)

    def test_baseline_ignores_thresholds(self):
        self.assertIsNone(VariantConfig(VARIANT_BASELINE, UPPER).thresholds)

    def test_invalid_values(self):
        with self.assertRaises(ConfigurationError):
            VariantConfig(VARIANT_SSC, UPPER, ssc_max_trials=0)
        with self.assertRaises(ConfigurationError):
            VariantConfig("sdc", UPPER)
        with self.assertRaises(ConfigurationError):
            VariantConfig(VARIANT_SDO, UPPER, base_scheme="moead")

    def test_method_key(self):
        self.assertEqual(VariantConfig().method_key, "nsga2")
        self.assertEqual(VariantConfig(VARIANT_SDO, UPPER, base_scheme=SCHEME_SPEA2).method_key, "spea2-sdo")


class SscTests(SimpleTestCase):
    # x1 = x0 + 0.3 en cada fila
    X = np.array([[0.0, 0.3], [1.0, 1.3]])

    def parent(self, feature: int) -> Individual:
        tree = Terminal(feature)
        return Individual(genotype=tree, semantics=evaluate(tree, self.X), train_objectives=ObjectivePoint(0, 0))

    def test_first_attempt_in_band_is_accepted(self):
        cfg = VariantConfig(VARIANT_SSC, BANDED)
        outcome = ssc_crossover_outcome(self.parent(0), self.parent(1), cfg, self.X, np.random.default_rng(0))
        self.assertEqual(outcome.attempts, 1)
        self.assertTrue(outcome.accepted)
        self.assertEqual(outcome.children, (Terminal(1), Terminal(0)))

    def test_one_threshold_mode_accepts_above_ubss(self):
        cfg = VariantConfig(VARIANT_SSC, SemanticThresholds(0.25))
        outcome = ssc_crossover_outcome(self.parent(0), self.parent(1), cfg, self.X, np.random.default_rng(0))
        self.assertEqual((outcome.attempts, outcome.accepted), (1, True))

        cfg = VariantConfig(VARIANT_SSC, SemanticThresholds(0.5))
        outcome = ssc_crossover_outcome(self.parent(0), self.parent(1), cfg, self.X, np.random.default_rng(0))
        self.assertEqual((outcome.attempts, outcome.accepted), (20, False))

    def test_identical_parents_exhaust_all_trials(self):
        cfg = VariantConfig(VARIANT_SSC, BANDED)
        outcome = ssc_crossover_outcome(self.parent(0), self.parent(0), cfg, self.X, np.random.default_rng(3))
        self.assertEqual(outcome.attempts, 20)
        self.assertFalse(outcome.accepted)
        # se devuelve igual el último intento
        self.assertEqual(outcome.children, (Terminal(0), Terminal(0)))
        self.assertEqual(outcome.nodes_evaluated, 40)

    def test_single_trial_equals_plain_crossover(self):
        rng = np.random.default_rng(12)
        X = rng.normal(size=(20, 5))
        trees = ramped_half_and_half(30, 1, 5, 5, rng)
        cfg = VariantConfig(VARIANT_SSC, SemanticThresholds(1e300, 0.0), ssc_max_trials=1)
        params = VariationParams()
        for seed in range(15):
            a, b = trees[2 * seed], trees[2 * seed + 1]
            pa = Individual(genotype=a, semantics=evaluate(a, X), train_objectives=ObjectivePoint(0, 0))
            pb = Individual(genotype=b, semantics=evaluate(b, X), train_objectives=ObjectivePoint(0, 0))
            self.assertEqual(
                ssc_crossover(pa, pb, cfg, X, np.random.default_rng(seed), params),
                crossover_90_10(a, b, params, np.random.default_rng(seed)),
            )

    def test_wrong_variant(self):
        with self.assertRaises(ContractViolation):
            ssc_crossover(self.parent(0), self.parent(1), VariantConfig(), self.X, np.random.default_rng(0))

    def test_acceptance_bounds(self):
        banded = SemanticThresholds(0.5, 0.1)
        self.assertTrue(ssc_accepts(0.1, banded))
        self.assertTrue(ssc_accepts(0.5, banded))
        self.assertFalse(ssc_accepts(np.nextafter(0.1, 0.0), banded))
        self.assertFalse(ssc_accepts(np.nextafter(0.5, 1.0), banded))
        upper = SemanticThresholds(0.5)
        self.assertFalse(ssc_accepts(0.5, upper))
        self.assertTrue(ssc_accepts(np.nextafter(0.5, 1.0), upper))
        self.assertFalse(ssc_accepts(math.nan, banded))
        self.assertFalse(ssc_accepts(math.nan, upper))

    def test_acceptance_matches_scalar_loop(self):
        rng = np.random.default_rng(8)
        for _ in range(2000):
            n = int(rng.integers(1, 30))
            p = rng.normal(size=n)
            q = p + rng.normal(scale=rng.choice([0.05, 0.5, 2.0]), size=n)
            ubss = float(rng.choice([0.25, 0.5, 0.75, 1.0]))
            lbss = float(rng.choice([0.0, 0.001, 0.01, 0.1]))
            d = mean_abs_distance(p, q)
            expected = sum(abs(a - b) for a, b in zip(p, q)) / n
            self.assertAlmostEqual(d, expected, delta=1e-12)
            self.assertEqual(ssc_accepts(d, SemanticThresholds(ubss, lbss)), lbss <= d <= ubss)
            self.assertEqual(ssc_accepts(d, SemanticThresholds(ubss)), d > ubss)


class ScdTests(SimpleTestCase):
    def build(self):
        a = ind(0.9, 0.9, (0, 0, 0, 0))
        b = ind(0.8, 0.1, (1, 1, 0, 0))
        c = ind(0.1, 0.8, (0, 0, 0, 0))
        d = ind(0.5, 0.5, (1, 0, 0, 0))
        e = ind(0.3, 0.3, (1, 1, 1, 1))
        f = ind(0.05, 0.05, (1, 1, 1, 0))
        return (a, b, c, d, e, f), Population([a, b, c], 0), Population([d, e, f], 0)

    def test_hand_trace(self):
        (a, b, c, d, e, f), parents, offspring = self.build()
        nxt = environmental_selection_scd(parents, offspring, VariantConfig(VARIANT_SCD, UPPER))
        # F0 = {a} (pivote); F1 = {b, c, d} no cabe; F_r = {b, c, d, e, f}
        # distancias 2, 0, 1, 4, 3 -> extremos c y e
        self.assertEqual(uids(nxt), [a.uid, c.uid, e.uid])
        self.assertEqual([p.semantic_distance for p in (b, c, d, e, f)], [2, 0, 1, 4, 3])
        self.assertEqual(nxt.generation, 1)

    def test_baseline_differs_on_the_same_instance(self):
        (a, b, c, *_), parents, offspring = self.build()
        self.assertEqual(uids(environmental_selection_nsga2(parents, offspring)), [a.uid, b.uid, c.uid])

    def test_trace_line(self):
        _, parents, offspring = self.build()
        cfg = VariantConfig(VARIANT_SCD, UPPER, trace=True)
        with self.assertLogs("semantic_variants.trace", level="INFO") as logs:
            environmental_selection_scd(parents, offspring, cfg)
        pivot = parents[0]
        self.assertEqual(logs.records[0].getMessage(), f"gen=0 pivot={pivot.uid} variant=scd hist=0:1,1:1,2:1,3:1,4:1")

    def test_exact_fit_never_takes_the_semantic_path(self):
        parents = Population([ind(1, 0), ind(0, 1)])
        offspring = Population([ind(0.1, 0.1, (9, 9, 9)), ind(0.2, 0.2, (5, 5, 5))])
        baseline = uids(environmental_selection_nsga2(parents, offspring))
        scd = environmental_selection_scd(parents, offspring, VariantConfig(VARIANT_SCD, UPPER))
        self.assertEqual(uids(scd), baseline)
        self.assertTrue(all(p.semantic_distance == 0 for p in offspring))

    def test_exact_fit_still_traces(self):
        parents = Population([ind(1, 0), ind(0, 1)])
        offspring = Population([ind(0.1, 0.1, (9, 9, 9)), ind(0.2, 0.2, (5, 5, 5))])
        cfg = VariantConfig(VARIANT_SCD, UPPER, trace=True)
        with self.assertLogs("semantic_variants.trace", level="INFO") as logs:
            environmental_selection_scd(parents, offspring, cfg)
        self.assertEqual([r.getMessage() for r in logs.records], [f"gen=0 pivot={parents[0].uid} variant=scd hist="])

    def test_single_member_first_front_is_the_pivot(self):
        _, parents, offspring = self.build()
        cfg = VariantConfig(VARIANT_SCD, UPPER, trace=True)
        with self.assertLogs("semantic_variants.trace", level="INFO") as logs:
            environmental_selection_scd(parents, offspring, cfg)
        self.assertIn(f"pivot={parents[0].uid} ", logs.records[0].getMessage())


class SdoTests(SimpleTestCase):
    def test_hand_trace(self):
        a, b = ind(1, 0, (1, 1, 1)), ind(0, 1, (0, 0, 0))
        c, d = ind(0.5, 0.5, (0, 0, 0)), ind(0.2, 0.2, (1, 0, 0))
        e, f = ind(0.5, 0.5, (1, 1, 0)), ind(0.4, 0.4, (1, 1, 1))
        g, h = ind(0.1, 0.1, (0, 0, 0)), ind(0.3, 0.3, (0, 1, 0))
        nxt = environmental_selection_sdo(
            Population([a, b, c, d], 5), Population([e, f, g, h], 5), VariantConfig(VARIANT_SDO, UPPER)
        )
        # pivote = c (primer empate en crowding finito de F0 = {a, b, c, e})
        self.assertEqual([p.semantic_distance for p in (a, b, c, d, e, f, g, h)], [3, 0, 0, 1, 2, 3, 0, 1])
        # e domina a c en 3 criterios; f sube al primer frente
        self.assertEqual(uids(nxt), [a.uid, b.uid, e.uid, f.uid])
        self.assertEqual(nxt.generation, 6)

    def test_equal_objectives_larger_distance_dominates(self):
        fronts = fronts_from_matrix(np.array([[0.5, 0.5, 5.0], [0.5, 0.5, 2.0]]))
        self.assertEqual(fronts, [[0], [1]])

    def test_truncation_by_three_criteria_crowding(self):
        # 3 criterios: los 4 puntos forman un solo frente, se quedan 2
        a, b = ind(1, 0, (0, 0)), ind(0, 1, (1, 1))
        c, d = ind(0.5, 0.5, (1, 0)), ind(0.6, 0.4, (0, 0))
        nxt = environmental_selection_sdo(Population([a, b]), Population([c, d]), VariantConfig(VARIANT_SDO, UPPER))
        self.assertEqual(len(nxt), 2)
        self.assertTrue(set(uids(nxt)) <= {a.uid, b.uid, c.uid, d.uid})

    def test_rank_zero_with_maximal_distance_survives(self):
        rng = np.random.default_rng(21)
        for _ in range(40):
            members = [
                ind(Fraction(int(t), 4), Fraction(int(n), 4), rng.integers(0, 3, size=5).astype(float))
                for t, n in rng.integers(0, 5, size=(12, 2))
            ]
            parents, offspring = Population(members[:6]), Population(members[6:])
            nxt = environmental_selection_sdo(parents, offspring, VariantConfig(VARIANT_SDO, UPPER))
            survivors = set(uids(nxt))

            fronts2 = non_dominated_sort(members)
            crit = np.array([[*m.train_objectives.as_floats(), m.semantic_distance] for m in members])
            front3 = set(fronts_from_matrix(crit)[0])
            for i in fronts2[0]:
                twins = [m for m in members if m.train_objectives == members[i].train_objectives]
                if members[i].semantic_distance == max(t.semantic_distance for t in twins):
                    self.assertIn(i, front3)
                    if len(front3) <= 6:
                        self.assertIn(members[i].uid, survivors)


class DegeneracyTests(SimpleTestCase):
    def test_constant_semantics_reproduce_baseline(self):
        for seed in range(100):
            rng = np.random.default_rng(seed)
            n = int(rng.integers(2, 12))
            members = [ind(Fraction(int(t), 6), Fraction(int(v), 6)) for t, v in rng.integers(0, 7, size=(2 * n, 2))]
            parents, offspring = Population(members[:n], 3), Population(members[n:], 3)
            baseline = uids(environmental_selection_nsga2(parents, offspring))
            for cfg in (
                VariantConfig(VARIANT_SCD, UPPER),
                VariantConfig(VARIANT_SCD, BANDED),
                VariantConfig(VARIANT_SDO, UPPER),
                VariantConfig(VARIANT_SDO, BANDED),
            ):
                self.assertEqual(uids(environmental_selection(parents, offspring, cfg)), baseline, (seed, cfg))

    def test_dispatch_baseline_and_ssc_use_canonical_selection(self):
        rng = np.random.default_rng(0)
        members = [ind(Fraction(int(t), 6), Fraction(int(v), 6)) for t, v in rng.integers(0, 7, size=(10, 2))]
        parents, offspring = Population(members[:5]), Population(members[5:])
        expected = uids(environmental_selection_nsga2(parents, offspring))
        for cfg in (VariantConfig(), VariantConfig(VARIANT_SSC, UPPER)):
            self.assertEqual(uids(environmental_selection(parents, offspring, cfg)), expected)

    def test_histogram_format(self):
        self.assertEqual(histogram([3, 0, 3, 1]), "0:1,1:1,3:2")
