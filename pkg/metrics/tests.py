from __future__ import annotations

import itertools
import tempfile
from fractions import Fraction
from pathlib import Path

import numpy as np
from django.test import SimpleTestCase
from scipy.stats import rankdata

from datasets.classification import ConfusionMatrix
from emo.individuals import ObjectivePoint
from emo.pareto import dominates
from gp_core.exceptions import ContractViolation, ParseError
from metrics.indicators import (
    FrontSet,
    accumulate_po_front,
    exclusive_points,
    hyperarea,
    hypervolume_rect,
    non_dominated_points,
    unique_solutions,
)
from metrics.results import RunResult, read_result, write_result
from metrics.stats import (
    VERDICT_BETTER,
    VERDICT_EQUAL,
    VERDICT_WORSE,
    _exact_tied_pvalue,
    size_statistics,
    wilcoxon_rank_sum,
)


def P(tpr, tnr) -> ObjectivePoint:
    return ObjectivePoint(tpr, tnr)


def front(*pairs) -> FrontSet:
    return FrontSet.from_points(P(a, b) for a, b in pairs)


def random_front_points(rng: np.random.Generator, n: int, grid: int = 20) -> list[ObjectivePoint]:
    return [P(Fraction(int(a), grid), Fraction(int(b), grid)) for a, b in rng.integers(0, grid + 1, size=(n, 2))]


def staircase_area(points: list[ObjectivePoint]) -> float:
    # oráculo: unión de rectángulos [0, tpr] x [0, tnr]
    pts = sorted(non_dominated_points(points), key=lambda p: p.tpr)
    area, prev_x = Fraction(0), Fraction(0)
    for p in pts:
        area += (p.tpr - prev_x) * p.tnr
        prev_x = p.tpr
    return float(area)


def result(**overrides) -> RunResult:
    values = dict(
        run_id="yeast1__nsga2__-__r00",
        run_index=0,
        seed=123,
        dataset="yeast1",
        scheme="nsga2",
        variant="baseline",
        ubss=None,
        lbss=None,
        front=(ConfusionMatrix(tp=10, fn=2, fp=30, tn=70), ConfusionMatrix(tp=12, fn=0, fp=80, tn=20)),
        hyperarea=0.8,
        hypervolume_rect=0.75,
        hypervolume=0.8,
        mean_tree_size=12.5,
        per_generation_sizes=(10.0, 15.0),
        nodes_evaluated=2500,
        best_accuracy=0.71,
        config={"pop_size": 10, "generations": 1, "lbss": None},
    )
    values.update(overrides)
    return RunResult(**values)


class HyperareaTests(SimpleTestCase):
    def test_known_values(self):
        self.assertAlmostEqual(hyperarea(front((1, 1))), 1.0, delta=1e-12)
        self.assertAlmostEqual(hyperarea(front((0.5, 1.0), (1.0, 0.5))), 0.875, delta=1e-12)
        self.assertEqual(hyperarea(front((0, 1))), 0.0)

    def test_tiny_point_tends_to_zero(self):
        values = [hyperarea(front((Fraction(1, k), Fraction(1, k)))) for k in (10, 100, 1000)]
        self.assertEqual(values, sorted(values, reverse=True))
        self.assertLess(values[-1], 1e-5)

    def test_empty_front(self):
        with self.assertRaises(ContractViolation):
            hyperarea([])

    def test_dominated_points_do_not_change_the_value(self):
        rng = np.random.default_rng(0)
        for _ in range(1000):
            pts = random_front_points(rng, int(rng.integers(1, 15)))
            base = hyperarea(pts)
            extra = [P(p.tpr * Fraction(1, 2), p.tnr) for p in pts]
            self.assertEqual(hyperarea(pts + extra), base)
            self.assertTrue(0.0 <= base <= 1.0)

    def test_area_below_the_chord_can_lower_the_trapezoid_value(self):
        # la interpolación lineal entre vecinos no es monótona
        before = hyperarea([P(0, 1), P(1, 0)])
        after = hyperarea([P(0, 1), P(1, 0), P(0.5, 0.1)])
        self.assertAlmostEqual(before, 0.5)
        self.assertAlmostEqual(after, 0.3)


class RectangularHypervolumeTests(SimpleTestCase):
    def test_known_values(self):
        self.assertAlmostEqual(hypervolume_rect(front((1, 1))), 1.0)
        self.assertAlmostEqual(hypervolume_rect(front((0.5, 1.0), (1.0, 0.5))), 0.75)

    def test_matches_staircase_and_is_monotone(self):
        rng = np.random.default_rng(1)
        for _ in range(1000):
            pts = random_front_points(rng, int(rng.integers(1, 10)))
            value = hypervolume_rect(pts)
            self.assertAlmostEqual(value, staircase_area(pts), delta=1e-9)
            extra = random_front_points(rng, 1)
            if not any(dominates(p, extra[0]) or p == extra[0] for p in pts):
                self.assertGreaterEqual(hypervolume_rect(pts + extra) + 1e-12, value)


class PoFrontTests(SimpleTestCase):
    def test_identical_fronts(self):
        f = front((0.2, 0.9), (0.8, 0.3))
        self.assertEqual(accumulate_po_front([f, f]), f)

    def test_incomparable_fronts(self):
        self.assertEqual(accumulate_po_front([front((1, 0)), front((0, 1))]).keys(), {(0, 1), (1, 0)})

    def test_matches_brute_force_union(self):
        rng = np.random.default_rng(2)
        fronts = [FrontSet.from_points(random_front_points(rng, 8)) for _ in range(50)]
        union = [p for f in fronts for p in f]
        expected = {
            (p.tpr, p.tnr) for p in union
            if not any(dominates(q, p) for q in union)
        }
        po = accumulate_po_front(fronts)
        self.assertEqual(po.keys(), expected)
        self.assertEqual(len(po), len(expected))
        self.assertEqual(accumulate_po_front(list(reversed(fronts))), po)
        self.assertEqual(accumulate_po_front([po]), po)

    def test_front_set_invariants(self):
        f = front((0.5, 0.5), (0.5, 0.5), (0.4, 0.4), (0.9, 0.1))
        self.assertEqual(f.keys(), {(Fraction(1, 2), Fraction(1, 2)), (Fraction(9, 10), Fraction(1, 10))})

    def test_empty_list(self):
        with self.assertRaises(ContractViolation):
            accumulate_po_front([])


class UniqueSolutionTests(SimpleTestCase):
    def test_identical_pools(self):
        runs = [front((0.1, 0.9)), front((0.5, 0.5))]
        u = unique_solutions(runs, runs)
        self.assertEqual((u.mean_a, u.mean_b, u.pooled_a, u.pooled_b), (0.0, 0.0, 0, 0))

    def test_disjoint_pools(self):
        a = [front((0.1, 0.9), (0.5, 0.5), (0.9, 0.1))]
        b = [front((0.2, 0.8), (0.3, 0.7), (0.4, 0.6), (0.6, 0.4), (0.8, 0.2))]
        u = unique_solutions(a, b)
        self.assertEqual((u.mean_a, u.mean_b), (3.0, 5.0))
        self.assertEqual((u.pooled_a, u.pooled_b), (3, 5))

    def test_overlapping_pools_per_run(self):
        a = [front((0.1, 0.9), (0.5, 0.5)), front((0.5, 0.5), (0.7, 0.2))]
        b = [front((0.5, 0.5)), front((0.1, 0.9), (0.3, 0.6))]
        u = unique_solutions(a, b)
        # A: run0 -> {} ; run1 -> {(0.7, 0.2)}   B: run0 -> {} ; run1 -> {(0.3, 0.6)}
        self.assertEqual((u.mean_a, u.mean_b), (0.5, 0.5))
        self.assertAlmostEqual(u.sd_a, np.std([0, 1], ddof=1))
        self.assertEqual((u.pooled_a, u.pooled_b), (1, 1))
        only_a, only_b = exclusive_points(a, b)
        self.assertEqual(only_a, [(0.7, 0.2)])
        self.assertEqual(only_b, [(0.3, 0.6)])

    def test_run_counts_must_match(self):
        with self.assertRaises(ContractViolation):
            unique_solutions([front((1, 0))], [])


class RankSumTests(SimpleTestCase):
    def test_same_multiset(self):
        r = wilcoxon_rank_sum([1, 2, 3], [3, 2, 1])
        self.assertEqual((r.p_value, r.verdict), (1.0, VERDICT_EQUAL))

    def test_all_identical(self):
        r = wilcoxon_rank_sum([0.5] * 5, [0.5] * 7)
        self.assertEqual((r.p_value, r.verdict, r.symbol), (1.0, VERDICT_EQUAL, "="))

    def test_exact_minimal_rank_sum(self):
        r = wilcoxon_rank_sum([1, 2, 3], [10, 11, 12])
        self.assertEqual(r.method, "exact")
        self.assertEqual(r.statistic, 6.0)
        self.assertAlmostEqual(r.p_value, 0.1, delta=1e-12)
        self.assertEqual(r.verdict, VERDICT_EQUAL)

    def test_separated_samples(self):
        rng = np.random.default_rng(3)
        x, y = rng.normal(0.7, 0.02, 50), rng.normal(0.8, 0.02, 50)
        r = wilcoxon_rank_sum(x, y)
        self.assertLess(r.p_value, 0.001)
        self.assertEqual(r.method, "asymptotic")
        self.assertEqual(r.verdict, VERDICT_WORSE)
        self.assertEqual(wilcoxon_rank_sum(y, x).verdict, VERDICT_BETTER)

    def test_antisymmetry(self):
        rng = np.random.default_rng(4)
        flip = {VERDICT_BETTER: VERDICT_WORSE, VERDICT_WORSE: VERDICT_BETTER, VERDICT_EQUAL: VERDICT_EQUAL}
        for _ in range(1000):
            n, m = rng.integers(2, 30, size=2)
            x = rng.normal(rng.uniform(-1, 1), 1, n).round(1)
            y = rng.normal(0, 1, m).round(1)
            xy, yx = wilcoxon_rank_sum(x, y), wilcoxon_rank_sum(y, x)
            self.assertAlmostEqual(xy.p_value, yx.p_value, delta=1e-9)
            self.assertEqual(yx.verdict, flip[xy.verdict])

    def test_too_few_values(self):
        with self.assertRaises(ContractViolation):
            wilcoxon_rank_sum([1.0], [2.0, 3.0])

    def test_small_tied_samples_use_full_enumeration(self):
        rng = np.random.default_rng(6)
        for _ in range(200):
            n, m = (int(v) for v in rng.integers(2, 7, size=2))
            x = rng.integers(0, 4, n).astype(float)
            y = rng.integers(0, 4, m).astype(float)
            if np.unique(np.concatenate([x, y])).size in (1, n + m):
                continue
            r = wilcoxon_rank_sum(x, y)
            self.assertEqual(r.method, "exact-ties")

            # oráculo: todos los subconjuntos de tamaño k de la muestra conjunta
            ranks = rankdata(np.concatenate([x, y]) if n <= m else np.concatenate([y, x]))
            k = min(n, m)
            center = k * (n + m + 1) / 2
            observed = abs(ranks[:k].sum() - center)
            sums = [abs(ranks[list(c)].sum() - center) for c in itertools.combinations(range(n + m), k)]
            expected = sum(s >= observed - 1e-9 for s in sums) / len(sums)
            self.assertAlmostEqual(r.p_value, expected, delta=1e-12)

    def test_enumeration_matches_scipy_without_ties(self):
        rng = np.random.default_rng(7)
        for _ in range(50):
            n, m = (int(v) for v in rng.integers(2, 9, size=2))
            x, y = rng.normal(size=n), rng.normal(0.5, 1, size=m)
            self.assertAlmostEqual(_exact_tied_pvalue(x, y), wilcoxon_rank_sum(x, y).p_value, delta=1e-9)


class SizeStatisticsTests(SimpleTestCase):
    def test_single_run(self):
        s = size_statistics([result(mean_tree_size=3.0, per_generation_sizes=(3.0, 3.0))])
        self.assertEqual((s.mean, s.median), (3.0, 3.0))

    def test_two_runs_median(self):
        s = size_statistics([result(mean_tree_size=10.0), result(mean_tree_size=20.0)])
        self.assertEqual(s.median, 15.0)

    def test_quartiles(self):
        s = size_statistics([result(mean_tree_size=v) for v in (4.0, 1.0, 3.0, 2.0)])
        self.assertEqual((s.q1, s.median, s.q3), (1.75, 2.5, 3.25))
        self.assertEqual((s.minimum, s.maximum), (1.0, 4.0))
        self.assertEqual(s.as_row()["runs"], 4)

    def test_empty(self):
        with self.assertRaises(ContractViolation):
            size_statistics([])


class RunResultTests(SimpleTestCase):
    def test_json_line_round_trip(self):
        r = result(variant="sdo", ubss=0.5, lbss=0.01)
        line = r.to_json_line()
        self.assertTrue(line.endswith("\n"))
        self.assertEqual(line.count("\n"), 1)
        self.assertEqual(RunResult.from_json_line(line), r)
        self.assertEqual(r.method, "nsga2-sdo")
        self.assertEqual(r.thresholds_label, "ubss=0.5,lbss=0.01")

    def test_file_round_trip(self):
        with tempfile.TemporaryDirectory() as tmp:
            path = write_result(result(), Path(tmp) / "runs" / "a.jsonl")
            self.assertEqual(read_result(path), result())
            self.assertEqual(list(path.parent.iterdir()), [path])

    def test_front_set_uses_exact_counts(self):
        keys = result().front_set().keys()
        self.assertIn((Fraction(10, 12), Fraction(70, 100)), keys)

    def test_malformed_lines(self):
        for bad in ("not json", '{"format": 1}', '{"format": 99}'):
            with self.assertRaises(ParseError):
                RunResult.from_json_line(bad)

    def test_hypervolume_out_of_range(self):
        with self.assertRaises(ContractViolation):
            result(hyperarea=1.5)
