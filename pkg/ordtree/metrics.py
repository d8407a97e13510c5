#!/usr/bin/env python
"""Evaluate ordinal predictions with MAE, QWK and RPS."""

import csv
import logging
import pathlib
from typing import List, Optional, Sequence, Tuple, Union

import icontract
import numpy as np

from ordtree.criteria import IntArrayLike

LOGGER = logging.getLogger(__name__)

#: Tolerance on the sum of a probability row.
PROBABILITY_TOLERANCE = 1e-9


@icontract.invariant(lambda self: self.counts.ndim == 2)
@icontract.invariant(lambda self: self.counts.shape[0] == self.counts.shape[1])
@icontract.invariant(lambda self: bool(np.all(self.counts >= 0)))
class ConfusionMatrix:
    """
    Count the (true class, predicted class) pairs.

    ``counts[q - 1, j - 1]`` is the number of patterns of class q predicted as
    class j.

    :ivar counts: read-only Q x Q matrix of non-negative counts
    :vartype counts: numpy.ndarray
    """

    @icontract.require(lambda counts: len(counts) >= 2)
    def __init__(self, counts: Union[np.ndarray, Sequence[Sequence[int]]]
                 ) -> None:
        """Initialize with a copy of the counts."""
        array = np.array(counts, dtype=np.int64)
        array.setflags(write=False)
        self.counts = array

    @property
    def num_classes(self) -> int:
        """Return Q."""
        return int(self.counts.shape[0])

    @property
    def total(self) -> int:
        """Return the number of evaluated patterns."""
        return int(self.counts.sum())

    def write_csv(self, path: Union[str, pathlib.Path]) -> None:
        """
        Write the matrix as CSV with a header of predicted class indices.

        Row q (after the header) holds the counts of the true class q.
        """
        with pathlib.Path(str(path)).open('wt', newline='') as fid:
            writer = csv.writer(fid)
            writer.writerow(range(1, self.num_classes + 1))
            for row in self.counts:
                writer.writerow([int(count) for count in row])

    @staticmethod
    def read_csv(path: Union[str, pathlib.Path]) -> 'ConfusionMatrix':
        """Read a matrix written by :py:meth:`write_csv`."""
        pth = pathlib.Path(str(path))
        with pth.open('rt', newline='') as fid:
            rows = [row for row in csv.reader(fid) if row]

        if len(rows) < 3:
            raise ValueError(
                "{}: expected a header and at least 2 rows, got {} line(s)".
                format(pth, len(rows)))

        num_classes = len(rows[0])
        counts = []  # type: List[List[int]]
        for line_no, row in enumerate(rows[1:], start=2):
            if len(row) != num_classes:
                raise ValueError(
                    "{}:{}: expected {} columns, got {}".format(
                        pth, line_no, num_classes, len(row)))
            try:
                counts.append([int(cell) for cell in row])
            except ValueError:
                raise ValueError("{}:{}: non-integer count in {!r}".format(
                    pth, line_no, row)) from None

        if len(counts) != num_classes:
            raise ValueError("{}: expected {} rows of counts, got {}".format(
                pth, num_classes, len(counts)))

        return ConfusionMatrix(counts=counts)

    def __eq__(self, other: object) -> bool:
        """Compare the counts."""
        if not isinstance(other, ConfusionMatrix):
            return NotImplemented

        return bool(np.array_equal(self.counts, other.counts))

    def __repr__(self) -> str:
        """Represent with the counts as nested lists."""
        return 'ConfusionMatrix({})'.format(self.counts.tolist())


class EvalReport:
    """
    Collect the metrics computed on one set of predictions.

    :ivar mae: mean absolute error
    :vartype mae: float

    :ivar qwk: quadratic weighted kappa
    :vartype qwk: float

    :ivar rps: ranked probability score
    :vartype rps: float

    :ivar confusion: confusion matrix of the predictions
    :vartype confusion: ConfusionMatrix

    :ivar degenerate_qwk: True if QWK had a zero denominator and was set to 0
    :vartype degenerate_qwk: bool
    """

    # pylint: disable=too-many-arguments
    def __init__(self, mae: float, qwk: float, rps: float,
                 confusion: ConfusionMatrix, degenerate_qwk: bool) -> None:
        """Initialize with the given values."""
        self.mae = mae
        self.qwk = qwk
        self.rps = rps
        self.confusion = confusion
        self.degenerate_qwk = degenerate_qwk

    def __repr__(self) -> str:
        """Represent with the scalar metrics."""
        return 'EvalReport(mae={!r}, qwk={!r}, rps={!r}, degenerate_qwk={})'.format(
            self.mae, self.qwk, self.rps, self.degenerate_qwk)


def _score_array(scores: Optional[Sequence[float]],
                 num_classes: int) -> np.ndarray:
    if scores is None:
        return np.arange(1, num_classes + 1, dtype=np.float64)

    if len(scores) != num_classes:
        raise ValueError(
            "The score map has {} entries, but there are {} classes".format(
                len(scores), num_classes))

    return np.array(scores, dtype=np.float64)


def _check_labels(labels: np.ndarray, num_classes: int, what: str) -> None:
    bad = np.nonzero((labels < 1) | (labels > num_classes))[0]
    if bad.size > 0:
        raise ValueError("{} label at position {} is out of range: {} is not "
                         "in 1..{}".format(what, int(bad[0]),
                                           int(labels[bad[0]]), num_classes))


@icontract.require(lambda y_true, y_pred: len(y_true) == len(y_pred))
@icontract.require(lambda y_true: len(y_true) > 0)
@icontract.ensure(lambda result: result >= 0.0)
def mae(y_true: IntArrayLike,
        y_pred: IntArrayLike,
        scores: Optional[Sequence[float]] = None) -> float:
    """
    Compute the mean absolute difference of the class scores.

    >>> mae(y_true=[1, 3], y_pred=[2, 3])
    0.5

    :param y_true: true classes in 1..Q
    :param y_pred: predicted classes in 1..Q
    :param scores:
        scores v(C_1), ..., v(C_Q); the class indices are used if None
    :return: mean absolute error
    """
    true = np.asarray(y_true, dtype=np.int64)
    pred = np.asarray(y_pred, dtype=np.int64)

    if scores is None:
        return float(np.mean(np.abs(true - pred)))

    score_array = np.array(scores, dtype=np.float64)
    _check_labels(labels=true, num_classes=score_array.size, what="True")
    _check_labels(labels=pred, num_classes=score_array.size, what="Predicted")

    return float(
        np.mean(np.abs(score_array[true - 1] - score_array[pred - 1])))


@icontract.require(lambda y_true, y_pred: len(y_true) == len(y_pred))
@icontract.require(lambda num_classes: num_classes >= 2)
@icontract.ensure(lambda result, y_true: result.total == len(y_true))
def confusion(y_true: IntArrayLike, y_pred: IntArrayLike,
              num_classes: int) -> ConfusionMatrix:
    """
    Assemble the confusion matrix.

    >>> confusion(y_true=[1, 1], y_pred=[2, 2], num_classes=2)
    ConfusionMatrix([[0, 2], [0, 0]])

    :param y_true: true classes in 1..Q
    :param y_pred: predicted classes in 1..Q
    :param num_classes: Q
    :return: Q x Q counts
    :raise ValueError: if a label is outside 1..Q
    """
    true = np.asarray(y_true, dtype=np.int64)
    pred = np.asarray(y_pred, dtype=np.int64)

    _check_labels(labels=true, num_classes=num_classes, what="True")
    _check_labels(labels=pred, num_classes=num_classes, what="Predicted")

    counts = np.zeros((num_classes, num_classes), dtype=np.int64)
    np.add.at(counts, (true - 1, pred - 1), 1)

    return ConfusionMatrix(counts=counts)


@icontract.require(lambda confusion: confusion.total >= 1)
@icontract.ensure(lambda result: -1.0 - 1e-9 <= result[0] <= 1.0 + 1e-9)
def qwk(confusion: ConfusionMatrix,  # pylint: disable=redefined-outer-name
        scores: Optional[Sequence[float]] = None) -> Tuple[float, bool]:
    """
    Compute the quadratic weighted kappa.

    The weights are ``(v(C_q) - v(C_j))^2 / (Q - 1)^2`` and the expected
    counts are the products of the true and the predicted marginals over N.
    If the weighted expected counts sum to zero, the kappa is undefined; 0.0
    is returned and the degenerate flag is set.

    >>> qwk(ConfusionMatrix([[0, 1], [1, 0]]))
    (-1.0, False)

    :param confusion: confusion matrix
    :param scores: scores v(C_1), ..., v(C_Q); the class indices if None
    :return: kappa, degenerate flag
    """
    num_classes = confusion.num_classes
    score_array = _score_array(scores=scores, num_classes=num_classes)

    observed = confusion.counts.astype(np.float64)
    total = observed.sum()

    weights = (score_array[:, np.newaxis] - score_array[np.newaxis, :])**2 / (
        num_classes - 1)**2

    expected = np.outer(observed.sum(axis=1), observed.sum(axis=0)) / total

    denominator = float(np.sum(weights * expected))
    if denominator == 0.0:
        LOGGER.warning(
            "QWK is undefined on the confusion %s (zero expected "
            "disagreement); reporting 0.0", confusion.counts.tolist())
        return 0.0, True

    return 1.0 - float(np.sum(weights * observed)) / denominator, False


@icontract.require(lambda y_true, probas: len(y_true) == len(probas))
@icontract.require(lambda y_true: len(y_true) > 0)
@icontract.ensure(lambda result: result >= 0.0)
def rps(y_true: IntArrayLike, probas: np.ndarray) -> float:
    """
    Compute the ranked probability score.

    The score averages, over the patterns, the squared differences between
    the predicted and the observed cumulative class distributions.

    >>> round(rps(y_true=[2], probas=np.array([[0.2, 0.5, 0.3]])), 12)
    0.13

    :param y_true: true classes in 1..Q
    :param probas: N x Q matrix of class probabilities
    :return: ranked probability score
    :raise ValueError: if a row is not a probability vector
    """
    true = np.asarray(y_true, dtype=np.int64)
    proba_array = np.asarray(probas, dtype=np.float64)
    if proba_array.ndim != 2:
        raise ValueError("Expected a 2-dimensional matrix of probabilities, "
                         "got shape {}".format(proba_array.shape))

    num_classes = proba_array.shape[1]
    _check_labels(labels=true, num_classes=num_classes, what="True")

    negative = np.nonzero(np.any(proba_array < 0.0, axis=1))[0]
    if negative.size > 0:
        raise ValueError(
            "Row {} of the probabilities has negative entries: {}".format(
                int(negative[0]), proba_array[negative[0]].tolist()))

    sums = proba_array.sum(axis=1)
    off = np.nonzero(np.abs(sums - 1.0) > PROBABILITY_TOLERANCE)[0]
    if off.size > 0:
        raise ValueError("Row {} of the probabilities sums to {!r}, not 1".
                         format(int(off[0]), float(sums[off[0]])))

    predicted_cumulative = np.cumsum(proba_array, axis=1)
    observed_cumulative = (true[:, np.newaxis] <= np.arange(
        1, num_classes + 1)[np.newaxis, :]).astype(np.float64)

    return float(
        np.mean(
            np.sum((predicted_cumulative - observed_cumulative)**2, axis=1)))


# pylint: disable=too-many-arguments
@icontract.require(lambda y_true, y_pred: len(y_true) == len(y_pred))
@icontract.require(lambda y_true: len(y_true) > 0)
@icontract.require(lambda probas, num_classes: probas.ndim == 2 and probas.
                   shape[1] == num_classes)
def evaluate(y_true: IntArrayLike,
             y_pred: IntArrayLike,
             probas: np.ndarray,
             num_classes: int,
             scores: Optional[Sequence[float]] = None) -> EvalReport:
    """
    Compute all the metrics on the same predictions.

    :param y_true: true classes in 1..Q
    :param y_pred: predicted classes in 1..Q
    :param probas: N x Q predicted class probabilities
    :param num_classes: Q
    :param scores: scores v(C_1), ..., v(C_Q); the class indices if None
    :return: report of MAE, QWK, RPS and the confusion matrix
    """
    matrix = confusion(y_true=y_true, y_pred=y_pred, num_classes=num_classes)
    kappa, degenerate = qwk(confusion=matrix, scores=scores)

    return EvalReport(
        mae=mae(y_true=y_true, y_pred=y_pred, scores=scores),
        qwk=kappa,
        rps=rps(y_true=y_true, probas=probas),
        confusion=matrix,
        degenerate_qwk=degenerate)
