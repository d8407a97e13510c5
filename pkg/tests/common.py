#!/usr/bin/env python
"""Provide fixtures and independently coded oracles for the tests."""

# pylint: disable=missing-docstring

import math
import pathlib
from typing import List, Optional, Sequence, Tuple

import numpy as np

import ordtree.criteria
from ordtree.criteria import Criterion, CriterionSpec

ALL_KINDS = [
    Criterion.GINI, Criterion.IG, Criterion.OGINI, Criterion.WIG, Criterion.RI
]  # type: List[Criterion]


def write_rows(path: pathlib.Path,
               rows: Sequence[Sequence[object]],
               header: Optional[Sequence[str]] = None,
               delimiter: str = ',') -> None:
    """Write the rows as a dataset file."""
    lines = []  # type: List[str]
    if header is not None:
        lines.append(delimiter.join(header))
    for row in rows:
        lines.append(delimiter.join(str(cell) for cell in row))
    path.write_text('\n'.join(lines) + '\n')


def write_dataset(directory: pathlib.Path, name: str, features: np.ndarray,
                  labels: Sequence[int], n_train: int) -> None:
    """Split the rows into ``<name>_train.csv`` and ``<name>_test.csv``."""
    rows = [[repr(float(value)) for value in row] + [int(label)]
            for row, label in zip(features, labels)]

    header = ['x{}'.format(index + 1)
              for index in range(features.shape[1])] + ['y']

    write_rows(
        path=directory / '{}_train.csv'.format(name),
        rows=rows[:n_train],
        header=header)
    write_rows(
        path=directory / '{}_test.csv'.format(name),
        rows=rows[n_train:],
        header=header)


def toy_problem(seed: int, num_patterns: int = 60, num_classes: int = 3
                ) -> Tuple[np.ndarray, np.ndarray]:
    """
    Generate a small ordinal problem where the class grows with the features.

    Every class has at least two patterns.
    """
    rng = np.random.RandomState(seed)
    latent = rng.uniform(0.0, 1.0, size=num_patterns)
    labels = np.minimum(
        (latent * num_classes).astype(np.int64) + 1, num_classes)
    labels[:2 * num_classes] = np.repeat(
        np.arange(1, num_classes + 1), 2)

    features = np.column_stack([
        np.round(latent + rng.normal(0.0, 0.1, size=num_patterns), 3),
        np.round(rng.uniform(0.0, 1.0, size=num_patterns), 3)
    ])
    return features, labels


def random_node(rng: np.random.RandomState
                ) -> Tuple[np.ndarray, np.ndarray, int]:
    """Draw a small node with integer features to provoke threshold ties."""
    num_patterns = rng.randint(1, 51)
    num_features = rng.randint(1, 5)
    num_classes = rng.randint(2, 6)

    features = rng.randint(0, 6, size=(num_patterns,
                                       num_features)).astype(np.float64)
    labels = rng.randint(1, num_classes + 1, size=num_patterns)
    return features, labels, num_classes


##
# Impurity oracle, coded from the definitions with plain Python
##


def direct_impurity(counts: Sequence[int], spec: CriterionSpec) -> float:
    total = float(sum(counts))
    num_classes = len(counts)
    probs = [count / total for count in counts]
    scores = list(spec.scores(num_classes=num_classes))

    if spec.kind == Criterion.GINI:
        return 1.0 - sum(prob * prob for prob in probs)

    if spec.kind == Criterion.IG:
        return -sum(prob * math.log2(prob) for prob in probs if prob > 0.0)

    if spec.kind == Criterion.OGINI:
        result = 0.0
        cumulative = 0.0
        for prob in probs:
            cumulative += prob
            result += cumulative * (1.0 - cumulative)
        return result

    if spec.kind == Criterion.WIG:
        mode = 0
        for index in range(num_classes):
            if counts[index] > counts[mode]:
                mode = index
        distances = [
            abs(scores[index] - scores[mode])**spec.alpha
            for index in range(num_classes)
        ]
        norm = sum(distances)
        return -sum(distances[index] / norm * probs[index] * math.log2(
            probs[index]) for index in range(num_classes) if probs[index] > 0)

    if spec.kind == Criterion.RI:
        result = 0.0
        for q in range(num_classes):
            for j in range(q + 1):
                result += (scores[q] - scores[j]) * counts[j] * counts[q]
        return result

    raise NotImplementedError(spec.kind)


def direct_gain(parent: Sequence[int], left: Sequence[int],
                spec: CriterionSpec) -> float:
    right = [whole - part for whole, part in zip(parent, left)]
    total = float(sum(parent))
    return direct_impurity(counts=parent, spec=spec) - (
        sum(left) / total * direct_impurity(counts=left, spec=spec) +
        sum(right) / total * direct_impurity(counts=right, spec=spec))


def brute_force_split(features: np.ndarray, labels: np.ndarray,
                      num_classes: int, spec: CriterionSpec
                      ) -> Optional[Tuple[int, float, float]]:
    """
    Scan every feature and midpoint threshold exhaustively.

    :return: (feature, threshold, gain) of the first candidate in
        (feature, threshold) order whose gain is within the tolerance of the
        best gain, or None if no split improves on the parent
    """
    parent = [int(np.sum(labels == q)) for q in range(1, num_classes + 1)]
    if len(labels) < 2 or sum(1 for count in parent if count > 0) <= 1:
        return None

    candidates = []  # type: List[Tuple[int, float, float]]
    for feature in range(features.shape[1]):
        values = sorted(set(float(value) for value in features[:, feature]))
        for lower, upper in zip(values[:-1], values[1:]):
            middle = (lower + upper) / 2.0
            threshold = middle if middle > lower else upper

            mask = features[:, feature] < threshold
            left = [
                int(np.sum(labels[mask] == q))
                for q in range(1, num_classes + 1)
            ]
            candidates.append((feature, threshold,
                               direct_gain(parent=parent, left=left,
                                           spec=spec)))

    if not candidates:
        return None

    tolerance = 1e-12 * max(1.0,
                            abs(direct_impurity(counts=parent, spec=spec)))
    best = max(gain for _, _, gain in candidates)
    if best <= tolerance:
        return None

    for candidate in candidates:
        if candidate[2] >= best - tolerance:
            return candidate

    raise AssertionError("Unexpected: no candidate within the tolerance")


##
# Metric oracles
##


def direct_mae(y_true: Sequence[int], y_pred: Sequence[int]) -> float:
    return sum(abs(true - pred)
               for true, pred in zip(y_true, y_pred)) / float(len(y_true))


def direct_qwk(y_true: Sequence[int], y_pred: Sequence[int],
               num_classes: int) -> Optional[float]:
    """Return None where the kappa is undefined."""
    count = float(len(y_true))
    def weight(q: int, j: int) -> float:
        return (q - j)**2 / float((num_classes - 1)**2)

    observed = 0.0
    for true, pred in zip(y_true, y_pred):
        observed += weight(true, pred)

    expected = 0.0
    for q in range(1, num_classes + 1):
        for j in range(1, num_classes + 1):
            true_q = sum(1 for true in y_true if true == q)
            pred_j = sum(1 for pred in y_pred if pred == j)
            expected += weight(q, j) * true_q * pred_j / count

    if expected == 0.0:
        return None
    return 1.0 - observed / expected


def direct_rps(y_true: Sequence[int],
               probas: Sequence[Sequence[float]]) -> float:
    result = 0.0
    for true, row in zip(y_true, probas):
        cumulative = 0.0
        for q, prob in enumerate(row, start=1):
            cumulative += prob
            result += (cumulative - (1.0 if true <= q else 0.0))**2
    return result / float(len(y_true))


def spec_of(kind: Criterion) -> CriterionSpec:
    return ordtree.criteria.CriterionSpec(kind=kind)
