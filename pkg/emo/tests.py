from __future__ import annotations

import itertools
import math
from fractions import Fraction

import numpy as np
from django.test import SimpleTestCase

from emo.individuals import Individual, ObjectivePoint, Population
from emo.pareto import (
    crowding_distance,
    crowding_from_matrix,
    dominance_matrix,
    dominates,
    non_dominated_sort,
    spea2_fitness,
)
from emo.selection import (
    SCHEME_NSGA2,
    SCHEME_SPEA2,
    annotate,
    environmental_selection_nsga2,
    tournament_select,
)
from gp_core.exceptions import ContractViolation
from gp_core.trees import Terminal


def ind(tpr, tnr) -> Individual:
    return Individual(
        genotype=Terminal(0),
        semantics=np.zeros(3),
        train_objectives=ObjectivePoint(tpr, tnr),
    )


def random_points(rng: np.random.Generator, n: int, grid: int = 10) -> list[Individual]:
    # rejilla gruesa para forzar empates y duplicados
    return [ind(Fraction(int(a), grid), Fraction(int(b), grid)) for a, b in rng.integers(0, grid + 1, size=(n, 2))]


class ObjectivePointTests(SimpleTestCase):
    def test_equality_is_exact(self):
        self.assertEqual(ObjectivePoint(0.7, 0.1), ObjectivePoint(Fraction(7, 10), Fraction(1, 10)))

    def test_out_of_range_is_rejected(self):
        with self.assertRaises(ContractViolation):
            ObjectivePoint(1.2, 0.5)


class DominanceTests(SimpleTestCase):
    def test_known_values(self):
        self.assertTrue(dominates(ObjectivePoint(0.8, 0.6), ObjectivePoint(0.7, 0.6)))
        self.assertFalse(dominates(ObjectivePoint(0.8, 0.6), ObjectivePoint(0.8, 0.6)))
        a, b = ObjectivePoint(0.9, 0.2), ObjectivePoint(0.2, 0.9)
        self.assertFalse(dominates(a, b))
        self.assertFalse(dominates(b, a))

    def test_relation_properties_on_random_triples(self):
        rng = np.random.default_rng(0)
        pts = [p.train_objectives for p in random_points(rng, 12, grid=4)]
        for a, b, c in itertools.product(pts, repeat=3):
            self.assertFalse(dominates(a, a))
            self.assertFalse(dominates(a, b) and dominates(b, a))
            if dominates(a, b) and dominates(b, c):
                self.assertTrue(dominates(a, c))

    def test_matrix_agrees_with_pairwise(self):
        rng = np.random.default_rng(1)
        pop = random_points(rng, 30)
        F = np.array([p.train_objectives.as_floats() for p in pop])
        D = dominance_matrix(F)
        for i, j in itertools.product(range(len(pop)), repeat=2):
            self.assertEqual(D[i, j], dominates(pop[i].train_objectives, pop[j].train_objectives))


class NonDominatedSortTests(SimpleTestCase):
    def test_single_front(self):
        fronts = non_dominated_sort([ind(1, 0), ind(0, 1), ind(0.5, 0.5)])
        self.assertEqual(fronts, [[0, 1, 2]])

    def test_total_order(self):
        pop = [ind(0.9, 0.9), ind(0.5, 0.5), ind(0.1, 0.1)]
        self.assertEqual(non_dominated_sort(pop), [[0], [1], [2]])
        self.assertEqual([p.rank for p in pop], [0, 1, 2])

    def test_matches_brute_force_peeling(self):
        rng = np.random.default_rng(2)
        for _ in range(1000):
            n = int(rng.integers(1, 65))
            coords = rng.integers(0, 11, size=(n, 2))
            pop = [ind(Fraction(int(a), 10), Fraction(int(b), 10)) for a, b in coords]
            fronts = non_dominated_sort(pop)

            # oráculo: dom[i, j] = i domina a j, sobre la rejilla entera
            a, b = coords[:, None, :], coords[None, :, :]
            dom = (a >= b).all(axis=2) & (a > b).any(axis=2)
            remaining = np.ones(n, dtype=bool)
            expected = []
            while remaining.any():
                dominated = (dom & remaining[:, None]).any(axis=0)
                front = np.flatnonzero(remaining & ~dominated)
                expected.append(front.tolist())
                remaining[front] = False
            self.assertEqual(fronts, expected)

            for k, front in enumerate(fronts):
                self.assertFalse(dom[np.ix_(front, front)].any())
                if k:
                    self.assertTrue(dom[np.ix_(fronts[k - 1], front)].any(axis=0).all())

    def test_empty_population(self):
        with self.assertRaises(ContractViolation):
            non_dominated_sort([])


class CrowdingTests(SimpleTestCase):
    def test_three_point_front(self):
        front = [ind(0, 1), ind(0.5, 0.6), ind(1, 0)]
        crowding_distance(front)
        self.assertEqual(front[0].crowding, math.inf)
        self.assertEqual(front[2].crowding, math.inf)
        self.assertAlmostEqual(front[1].crowding, 2.0)

    def test_small_fronts_are_all_boundary(self):
        for n in (1, 2):
            front = [ind(0.1 * i, 1 - 0.1 * i) for i in range(n)]
            crowding_distance(front)
            self.assertTrue(all(p.crowding == math.inf for p in front))

    def test_interior_duplicates_get_zero(self):
        cd = crowding_from_matrix(np.array([[0.0, 1.0], [0.5, 0.5], [0.5, 0.5], [0.5, 0.5], [1.0, 0.0]]))
        self.assertEqual(cd[2], 0.0)

    def test_constant_objective_contributes_nothing(self):
        cd = crowding_from_matrix(np.array([[0.0, 0.3], [0.2, 0.3], [1.0, 0.3]]))
        self.assertEqual(cd[0], math.inf)
        self.assertAlmostEqual(cd[1], 1.0)
        self.assertTrue(np.all(crowding_from_matrix(np.ones((4, 1))) == 0.0))


class Spea2Tests(SimpleTestCase):
    def test_mutually_non_dominated_get_zero(self):
        pop = [ind(1, 0), ind(0, 1), ind(0.5, 0.5)]
        self.assertEqual(spea2_fitness(pop).tolist(), [0.0, 0.0, 0.0])

    def test_chain(self):
        pop = [ind(0.9, 0.9), ind(0.5, 0.5), ind(0.1, 0.1)]
        spea2_fitness(pop)
        self.assertEqual([p.spea2_fitness for p in pop], [0.0, 2.0, 3.0])

    def test_single_individual(self):
        self.assertEqual(spea2_fitness([ind(0.3, 0.3)]).tolist(), [0.0])

    def test_zero_fitness_iff_rank_zero(self):
        rng = np.random.default_rng(3)
        for _ in range(20):
            pop = random_points(rng, 40)
            annotate(pop, SCHEME_SPEA2)
            for p in pop:
                self.assertEqual(p.spea2_fitness == 0.0, p.rank == 0)


class TournamentTests(SimpleTestCase):
    def chain(self, n: int) -> list[Individual]:
        return [ind(Fraction(n - i, n), Fraction(n - i, n)) for i in range(n)]

    def test_rank_zero_member_wins_when_drawn(self):
        pop = self.chain(4)
        annotate(pop, SCHEME_NSGA2)
        rng = np.random.default_rng(0)
        for _ in range(200):
            winner = tournament_select(pop, k=100, scheme=SCHEME_NSGA2, rng=rng)
            self.assertIs(winner, pop[0])

    def test_max_crowding_wins_within_front(self):
        pop = [ind(0, 1), ind(0.3, 0.8), ind(0.5, 0.5), ind(0.9, 0.05), ind(1, 0)]
        annotate(pop, SCHEME_NSGA2)
        # sin infinitos: sólo miembros interiores
        interior = [p for p in pop if math.isfinite(p.crowding)]
        best = max(interior, key=lambda p: p.crowding)
        winner = tournament_select(Population(interior), k=50, rng=np.random.default_rng(1))
        self.assertIs(winner, best)

    def test_win_rates_match_exact_probabilities(self):
        n, k, draws = 5, 7, 10_000
        for scheme in (SCHEME_NSGA2, SCHEME_SPEA2):
            pop = self.chain(n)
            annotate(pop, scheme)
            rng = np.random.default_rng(7)
            wins = dict.fromkeys(range(n), 0)
            for _ in range(draws):
                winner = tournament_select(pop, k=k, scheme=scheme, rng=rng)
                wins[pop.index(winner)] += 1
            for r in range(1, n + 1):
                expected = ((n - r + 1) ** k - (n - r) ** k) / n ** k
                self.assertAlmostEqual(wins[r - 1] / draws, expected, delta=0.02)

    def test_ties_are_broken_uniformly(self):
        pop = [ind(0.5, 0.5) for _ in range(3)]
        annotate(pop, SCHEME_NSGA2)
        rng = np.random.default_rng(5)
        counts = dict.fromkeys(range(3), 0)
        for _ in range(6000):
            counts[pop.index(tournament_select(pop, k=7, rng=rng))] += 1
        for c in counts.values():
            self.assertAlmostEqual(c / 6000, 1 / 3, delta=0.03)

    def test_empty_pool(self):
        with self.assertRaises(ContractViolation):
            tournament_select([], rng=np.random.default_rng(0))


class EnvironmentalSelectionTests(SimpleTestCase):
    def test_hand_trace(self):
        a, b, c, d = ind(1, 0), ind(0, 1), ind(0.5, 0.5), ind(0.1, 0.1)
        e, g, h, f = ind(0.6, 0.6), ind(0.55, 0.2), ind(0.2, 0.55), ind(0.1, 0.15)
        nxt = environmental_selection_nsga2(Population([a, b, c, d], 3), Population([e, g, h, f], 3))
        # F0 = {a, b, e}; F1 = {c, g, h} con g, h en los extremos
        self.assertEqual([p.uid for p in nxt], [a.uid, b.uid, e.uid, g.uid])
        self.assertEqual(nxt.generation, 4)
        self.assertAlmostEqual(c.crowding, 2.0)

    def test_partial_first_front_is_truncated(self):
        rng = np.random.default_rng(4)
        first = [ind(Fraction(i, 5), Fraction(5 - i, 5)) for i in range(6)]
        second = [ind(Fraction(i, 10), Fraction(4 - i, 10)) for i in range(4)]
        pool = first + second
        order = rng.permutation(len(pool))
        shuffled = [pool[i] for i in order]
        half = len(shuffled) // 2
        parents, offspring = Population(shuffled[:half]), Population(shuffled[half:])
        nxt = environmental_selection_nsga2(parents, offspring)
        self.assertEqual(len(nxt), half)
        self.assertTrue({p.uid for p in nxt} <= {p.uid for p in first})

    def test_fronts_that_fit_exactly_are_copied(self):
        front0 = [ind(Fraction(i, 3), Fraction(3 - i, 3)) for i in range(4)]
        front1 = [ind(Fraction(i, 6), Fraction(2 - i, 6)) for i in range(3)] + [ind(0, 0)]
        nxt = environmental_selection_nsga2(Population(front0[:2] + front1[:2]), Population(front0[2:] + front1[2:]))
        self.assertEqual({p.uid for p in nxt}, {p.uid for p in front0})

    def test_elitism_and_size_on_random_populations(self):
        rng = np.random.default_rng(9)
        for _ in range(20):
            parents = Population(random_points(rng, 20))
            offspring = Population(random_points(rng, 20))
            merged = parents.members + offspring.members
            fronts = non_dominated_sort(merged)
            elite = {merged[i].uid for i in fronts[0]}
            nxt = environmental_selection_nsga2(parents, offspring)
            self.assertEqual(len(nxt), 20)
            self.assertTrue({p.uid for p in nxt} <= {p.uid for p in merged})
            if len(elite) <= 20:
                self.assertTrue(elite <= {p.uid for p in nxt})

    def test_mismatched_sizes(self):
        with self.assertRaises(ContractViolation):
            environmental_selection_nsga2(Population([ind(1, 0)]), Population([]))
