from __future__ import annotations

import math

import numpy as np
from django.test import SimpleTestCase

from emo.individuals import Individual, ObjectivePoint
from gp_core.exceptions import ConfigurationError, ContractViolation
from gp_core.trees import Terminal
from semantics.distances import (
    SemanticThresholds,
    mean_abs_distance,
    select_pivot,
    semantic_distance,
    semantic_distance_banded,
    semantic_distance_upper,
)


def member(tpr, tnr, crowding) -> Individual:
    ind = Individual(genotype=Terminal(0), semantics=np.zeros(2), train_objectives=ObjectivePoint(tpr, tnr))
    ind.crowding = crowding
    return ind


def loop_banded(p, v, lbss, ubss) -> int:
    return sum(1 for a, b in zip(p, v) if lbss <= abs(a - b) <= ubss)


def loop_upper(p, v, ubss) -> int:
    return sum(1 for a, b in zip(p, v) if abs(a - b) > ubss)


class ThresholdTests(SimpleTestCase):
    def test_label(self):
        self.assertEqual(SemanticThresholds(0.5).label, "ubss=0.5,lbss=-")
        self.assertEqual(SemanticThresholds(0.25, 0.001).label, "ubss=0.25,lbss=0.001")

    def test_invalid_combinations(self):
        for ubss, lbss in ((0.0, None), (-1.0, None), (math.inf, None), (0.5, 0.5), (0.5, -0.1)):
            with self.assertRaises(ConfigurationError, msg=(ubss, lbss)):
                SemanticThresholds(ubss, lbss)


class DistanceTests(SimpleTestCase):
    def test_banded_known_values(self):
        t = SemanticThresholds(0.5, 0.01)
        self.assertEqual(semantic_distance_banded([0.1, 0.9, 2.0], [0.1, 0.2, 0.0], t), 0)
        self.assertEqual(semantic_distance_banded([0.3, 0.4], [0.3, 0.4], t), 0)
        t = SemanticThresholds(0.5, 0.1)
        self.assertEqual(semantic_distance_banded([1.0, 1.3, 1.6], [1.0, 1.0, 1.0], t), 1)

    def test_banded_bounds_are_inclusive(self):
        t = SemanticThresholds(0.5, 0.25)
        self.assertEqual(semantic_distance_banded([0.25, 0.5], [0.0, 0.0], t), 2)

    def test_upper_known_values(self):
        t = SemanticThresholds(0.5)
        self.assertEqual(semantic_distance_upper([0.1, 0.9, 2.0], [0.1, 0.2, 0.0], t), 2)
        self.assertEqual(semantic_distance_upper([3.0], [3.0], t), 0)
        self.assertEqual(semantic_distance_upper([0.25], [0.0], SemanticThresholds(0.25)), 0)

    def test_dispatch_follows_lbss(self):
        p, v = [0.1, 0.9, 2.0], [0.1, 0.2, 0.0]
        self.assertEqual(semantic_distance(p, v, SemanticThresholds(0.5)), 2)
        self.assertEqual(semantic_distance(p, v, SemanticThresholds(0.5, 0.01)), 0)

    def test_banded_without_lbss_is_a_contract_violation(self):
        with self.assertRaises(ContractViolation):
            semantic_distance_banded([1.0], [1.0], SemanticThresholds(0.5))

    def test_length_mismatch(self):
        for fn in (
            lambda: semantic_distance_upper([1.0, 2.0], [1.0], SemanticThresholds(0.5)),
            lambda: semantic_distance_banded([1.0], [1.0, 2.0], SemanticThresholds(0.5, 0.1)),
            lambda: mean_abs_distance([1.0], []),
            lambda: mean_abs_distance([], []),
        ):
            with self.assertRaises(ContractViolation):
                fn()

    def test_mean_abs_known_values(self):
        self.assertEqual(mean_abs_distance([1, 2, 3], [1, 2, 3]), 0.0)
        self.assertEqual(mean_abs_distance([0, 0], [1, 3]), 2.0)
        self.assertEqual(mean_abs_distance([0.5], [0.0]), 0.5)

    def test_against_scalar_oracle(self):
        rng = np.random.default_rng(0)
        for _ in range(10_000):
            n = int(rng.integers(1, 40))
            p = rng.normal(size=n).round(2)
            v = rng.normal(size=n).round(2)
            # duplicamos algunas posiciones para tener diferencias exactas en cero
            v[: n // 4] = p[: n // 4]
            ubss = float(rng.choice([0.25, 0.5, 0.75, 1.0]))
            lbss = float(rng.choice([0.001, 0.01, 0.1]))
            self.assertEqual(semantic_distance_upper(p, v, SemanticThresholds(ubss)), loop_upper(p, v, ubss))
            self.assertEqual(
                semantic_distance_banded(p, v, SemanticThresholds(ubss, lbss)),
                loop_banded(p, v, lbss, ubss),
            )

    def test_symmetry_bounds_and_monotonicity(self):
        rng = np.random.default_rng(1)
        for _ in range(100):
            p, v = rng.normal(size=15), rng.normal(size=15)
            for t in (SemanticThresholds(0.5), SemanticThresholds(0.75, 0.01)):
                d = semantic_distance(p, v, t)
                self.assertEqual(d, semantic_distance(v, p, t))
                self.assertTrue(0 <= d <= 15)
            self.assertEqual(mean_abs_distance(p, v), mean_abs_distance(v, p))
            self.assertGreater(mean_abs_distance(p, v), 0.0)
            counts = [semantic_distance_upper(p, v, SemanticThresholds(u)) for u in (0.25, 0.5, 0.75, 1.0)]
            self.assertEqual(counts, sorted(counts, reverse=True))

    def test_banded_with_tiny_lbss_complements_upper(self):
        # con lbss por debajo de toda diferencia no nula: banda + arriba = diferencias no nulas
        rng = np.random.default_rng(5)
        for _ in range(1000):
            n = int(rng.integers(1, 40))
            p = rng.normal(size=n).round(2)
            v = rng.normal(size=n).round(2)
            v[: n // 3] = p[: n // 3]
            ubss = float(rng.choice([0.25, 0.5, 0.75, 1.0]))
            nonzero = sum(1 for a, b in zip(p, v) if a != b)
            banded = semantic_distance_banded(p, v, SemanticThresholds(ubss, 1e-6))
            upper = semantic_distance_upper(p, v, SemanticThresholds(ubss))
            self.assertEqual(banded + upper, nonzero)

    def test_non_finite_outputs_never_count(self):
        t = SemanticThresholds(0.5, 0.01)
        self.assertEqual(semantic_distance_banded([np.nan, 1.0], [0.0, 1.2], t), 1)
        self.assertEqual(semantic_distance_upper([np.nan], [0.0], SemanticThresholds(0.5)), 0)


class PivotTests(SimpleTestCase):
    def test_single_member(self):
        only = member(0.3, 0.3, math.inf)
        self.assertIs(select_pivot([only]), only)

    def test_max_finite_crowding(self):
        front = [
            member(0, 1, math.inf),
            member(0.4, 0.7, 1.9),
            member(0.5, 0.5, 0.3),
            member(1, 0, math.inf),
        ]
        self.assertIs(select_pivot(front), front[1])

    def test_all_infinite_takes_max_tpr(self):
        front = [member(0.2, 0.9, math.inf), member(0.8, 0.1, math.inf)]
        self.assertIs(select_pivot(front), front[1])

    def test_first_wins_ties(self):
        front = [member(0.1, 0.9, 0.5), member(0.5, 0.5, 0.5)]
        self.assertIs(select_pivot(front), front[0])

    def test_empty_front(self):
        with self.assertRaises(ContractViolation):
            select_pivot([])
