#!/usr/bin/env python
"""Test the ordinal evaluation metrics."""

# pylint: disable=missing-docstring

import itertools
import unittest

import icontract
import numpy as np
import temppathlib

import tests.common
from ordtree.metrics import ConfusionMatrix, confusion, evaluate, mae, qwk, rps


class TestMae(unittest.TestCase):
    def test_by_hand(self) -> None:
        self.assertEqual(0.0, mae(y_true=[1, 2, 3], y_pred=[1, 2, 3]))
        self.assertAlmostEqual(
            4.0 / 3.0, mae(y_true=[1, 2, 3], y_pred=[3, 2, 1]), delta=1e-12)

    def test_with_scores(self) -> None:
        self.assertAlmostEqual(
            5.5,
            mae(y_true=[1, 3], y_pred=[2, 1], scores=[0.0, 1.0, 10.0]),
            delta=1e-12)

    def test_lengths_must_match(self) -> None:
        with self.assertRaises(icontract.ViolationError):
            mae(y_true=[1, 2], y_pred=[1])


class TestConfusion(unittest.TestCase):
    def test_by_hand(self) -> None:
        matrix = confusion(
            y_true=[1, 1, 2, 3, 3, 3], y_pred=[1, 2, 2, 3, 3, 1], num_classes=3)
        self.assertListEqual([[1, 1, 0], [0, 1, 0], [1, 0, 2]],
                             matrix.counts.tolist())
        self.assertEqual(6, matrix.total)

    def test_out_of_range(self) -> None:
        with self.assertRaises(ValueError):
            confusion(y_true=[1, 4], y_pred=[1, 1], num_classes=3)

        with self.assertRaises(ValueError):
            confusion(y_true=[1, 2], y_pred=[0, 1], num_classes=3)

    def test_csv_round_trip(self) -> None:
        matrix = ConfusionMatrix(counts=[[3, 1, 0], [2, 5, 1], [0, 0, 4]])
        with temppathlib.TemporaryDirectory() as tmp_dir:
            path = tmp_dir.path / 'confusion.csv'
            matrix.write_csv(path=path)

            self.assertEqual('1,2,3', path.read_text().splitlines()[0])
            self.assertEqual(matrix, ConfusionMatrix.read_csv(path=path))

    def test_read_malformed_csv(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            path = tmp_dir.path / 'confusion.csv'
            path.write_text('1,2\n3,1\n2\n')

            with self.assertRaises(ValueError):
                ConfusionMatrix.read_csv(path=path)


class TestQwk(unittest.TestCase):
    def test_perfect_agreement(self) -> None:
        kappa, degenerate = qwk(
            confusion=ConfusionMatrix(counts=[[5, 0], [0, 5]]))
        self.assertEqual(1.0, kappa)
        self.assertFalse(degenerate)

    def test_perfect_agreement_with_an_empty_class(self) -> None:
        kappa, degenerate = qwk(
            confusion=ConfusionMatrix(
                counts=[[5, 0, 0], [0, 5, 0], [0, 0, 0]]))
        self.assertAlmostEqual(1.0, kappa, delta=1e-12)
        self.assertFalse(degenerate)

    def test_full_disagreement(self) -> None:
        kappa, degenerate = qwk(
            confusion=ConfusionMatrix(counts=[[0, 5], [5, 0]]))
        self.assertAlmostEqual(-1.0, kappa, delta=1e-12)
        self.assertFalse(degenerate)

    def test_degenerate(self) -> None:
        # every pattern is true class 2 and predicted as class 2
        with self.assertLogs('ordtree.metrics', level='WARNING'):
            kappa, degenerate = qwk(
                confusion=ConfusionMatrix(
                    counts=[[0, 0, 0], [0, 7, 0], [0, 0, 0]]))

        self.assertEqual(0.0, kappa)
        self.assertTrue(degenerate)

    def test_constant_prediction_is_not_better_than_chance(self) -> None:
        kappa, degenerate = qwk(
            confusion=ConfusionMatrix(
                counts=[[0, 3, 0], [0, 4, 0], [0, 2, 0]]))
        self.assertAlmostEqual(0.0, kappa, delta=1e-12)
        self.assertFalse(degenerate)

    def test_affine_invariance_of_scores(self) -> None:
        rng = np.random.RandomState(0)
        for _ in range(100):
            num_classes = rng.randint(2, 6)
            counts = rng.randint(0, 10, size=(num_classes, num_classes))
            counts[0, -1] += 1
            counts[-1, 0] += 1
            matrix = ConfusionMatrix(counts=counts)

            scale = rng.uniform(0.1, 10.0)
            shift = rng.uniform(-5.0, 5.0)
            scores = [scale * (q + 1) + shift for q in range(num_classes)]

            plain, _ = qwk(confusion=matrix)
            mapped, _ = qwk(confusion=matrix, scores=scores)
            self.assertAlmostEqual(plain, mapped, delta=1e-9)

    def test_against_brute_force(self) -> None:
        rng = np.random.RandomState(1)
        for num_classes in [2, 3]:
            for num_patterns in range(1, 7):
                y_true = rng.randint(1, num_classes + 1, size=num_patterns)
                for y_pred in itertools.product(
                        range(1, num_classes + 1), repeat=num_patterns):
                    expected = tests.common.direct_qwk(
                        y_true=y_true.tolist(),
                        y_pred=list(y_pred),
                        num_classes=num_classes)

                    matrix = confusion(
                        y_true=y_true, y_pred=y_pred, num_classes=num_classes)

                    if expected is None:
                        # silence the warning of the degenerate case
                        with self.assertLogs(
                                'ordtree.metrics', level='WARNING'):
                            kappa, degenerate = qwk(confusion=matrix)
                        self.assertTrue(degenerate)
                        self.assertEqual(0.0, kappa)
                    else:
                        kappa, degenerate = qwk(confusion=matrix)
                        self.assertFalse(degenerate)
                        self.assertAlmostEqual(expected, kappa, delta=1e-9)

                    self.assertAlmostEqual(
                        tests.common.direct_mae(
                            y_true=y_true.tolist(), y_pred=list(y_pred)),
                        mae(y_true=y_true, y_pred=y_pred),
                        delta=1e-12)


class TestRps(unittest.TestCase):
    def test_by_hand(self) -> None:
        # cumulative (0.2, 0.7, 1.0) against (0, 1, 1)
        self.assertAlmostEqual(
            0.04 + 0.09,
            rps(y_true=[2], probas=np.array([[0.2, 0.5, 0.3]])),
            delta=1e-12)

    def test_certain_and_right(self) -> None:
        self.assertEqual(
            0.0,
            rps(y_true=[1, 3], probas=np.array([[1.0, 0.0, 0.0],
                                                [0.0, 0.0, 1.0]])))

    def test_penalizes_distance(self) -> None:
        near = rps(y_true=[1], probas=np.array([[0.0, 1.0, 0.0, 0.0]]))
        far = rps(y_true=[1], probas=np.array([[0.0, 0.0, 0.0, 1.0]]))
        self.assertAlmostEqual(1.0, near, delta=1e-12)
        self.assertAlmostEqual(3.0, far, delta=1e-12)

    def test_against_direct_computation(self) -> None:
        rng = np.random.RandomState(2)
        for _ in range(50):
            num_classes = rng.randint(2, 7)
            num_patterns = rng.randint(1, 20)
            probas = rng.dirichlet(np.ones(num_classes), size=num_patterns)
            y_true = rng.randint(1, num_classes + 1, size=num_patterns)

            self.assertAlmostEqual(
                tests.common.direct_rps(
                    y_true=y_true.tolist(), probas=probas.tolist()),
                rps(y_true=y_true, probas=probas),
                delta=1e-9)

    def test_negative_entry(self) -> None:
        with self.assertRaises(ValueError) as ctx:
            rps(y_true=[1, 2],
                probas=np.array([[0.5, 0.5], [1.5, -0.5]]))

        self.assertIn('Row 1', str(ctx.exception))

    def test_row_does_not_sum_to_one(self) -> None:
        with self.assertRaises(ValueError) as ctx:
            rps(y_true=[1, 2], probas=np.array([[0.5, 0.4], [0.5, 0.5]]))

        self.assertIn('Row 0', str(ctx.exception))


class TestEvaluate(unittest.TestCase):
    def test_consistent_with_the_single_metrics(self) -> None:
        y_true = [1, 2, 3, 3, 2]
        y_pred = [1, 3, 3, 2, 2]
        probas = np.array([[0.8, 0.2, 0.0], [0.0, 0.4, 0.6], [0.0, 0.1, 0.9],
                           [0.1, 0.5, 0.4], [0.2, 0.6, 0.2]])

        report = evaluate(
            y_true=y_true, y_pred=y_pred, probas=probas, num_classes=3)

        self.assertEqual(mae(y_true=y_true, y_pred=y_pred), report.mae)
        self.assertEqual(rps(y_true=y_true, probas=probas), report.rps)
        self.assertEqual(
            confusion(y_true=y_true, y_pred=y_pred, num_classes=3),
            report.confusion)
        expected_qwk = tests.common.direct_qwk(
            y_true=y_true, y_pred=y_pred, num_classes=3)
        assert expected_qwk is not None
        self.assertAlmostEqual(expected_qwk, report.qwk, delta=1e-12)
        self.assertFalse(report.degenerate_qwk)


if __name__ == '__main__':
    unittest.main()
