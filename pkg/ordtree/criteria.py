#!/usr/bin/env python
"""Measure node impurity and the gain of binary splits for ordinal classes."""

import enum
from typing import Callable, Optional, Sequence, Union

import icontract
import numpy as np
from typing_extensions import Final

#: Default normalisation exponent of the weighted entropy.
DEFAULT_ALPHA = 1.0  # type: Final

#: Weighting function beta(q, j) over 1-based class indices.
BetaFunction = Callable[[int, int], float]

#: Labels or counts given either as a sequence or as a numpy array.
IntArrayLike = Union[Sequence[int], np.ndarray]


@icontract.invariant(lambda self: self.counts.ndim == 1)
@icontract.invariant(lambda self: bool(np.all(self.counts >= 0)))
@icontract.invariant(lambda self: self.total == int(self.counts.sum()))
class ClassHistogram:
    """
    Represent the per-class pattern counts at a node.

    Classes are indexed 1..Q in the public API; ``counts[q - 1]`` holds the
    count of class ``q``.

    :ivar counts: read-only array of Q non-negative integer counts
    :vartype counts: numpy.ndarray

    :ivar total: number of patterns in the node
    :vartype total: int
    """

    @icontract.require(lambda counts: len(counts) >= 1)
    @icontract.require(lambda counts: all(count >= 0 for count in counts))
    def __init__(self, counts: IntArrayLike) -> None:
        """
        Initialize with the counts of the classes in ascending class order.

        :param counts: Q non-negative counts
        """
        array = np.array(counts, dtype=np.int64)
        array.setflags(write=False)
        self.counts = array
        self.total = int(array.sum())

    @staticmethod
    @icontract.require(lambda num_classes: num_classes >= 1)
    def from_labels(labels: IntArrayLike,
                    num_classes: int) -> 'ClassHistogram':
        """
        Count labels given as class indices in 1..Q.

        >>> ClassHistogram.from_labels(labels=[1, 3, 3], num_classes=4).counts
        array([1, 0, 2, 0])

        :param labels: class indices
        :param num_classes: Q
        :return: histogram of the labels
        """
        array = np.asarray(labels, dtype=np.int64)
        if array.size > 0 and (array.min() < 1 or array.max() > num_classes):
            raise ValueError(
                "Labels must lie in 1..{}, got the range {}..{}".format(
                    num_classes, array.min(), array.max()))

        return ClassHistogram(
            counts=np.bincount(array - 1, minlength=num_classes))

    @property
    def num_classes(self) -> int:
        """Return Q."""
        return int(self.counts.shape[0])

    @icontract.require(lambda self: self.total > 0)
    def relative_frequencies(self) -> np.ndarray:
        """Return the relative frequency of every class."""
        return self.counts / float(self.total)

    @icontract.require(lambda self: self.total > 0)
    @icontract.ensure(lambda result: abs(result[-1] - 1.0) == 0.0)
    def cumulative_frequencies(self) -> np.ndarray:
        """Return the cumulative relative frequencies; the last one is 1."""
        return np.cumsum(self.counts) / float(self.total)

    @icontract.require(lambda self: self.total > 0)
    def mode(self) -> int:
        """
        Return the most represented class; ties go to the lowest index.

        >>> ClassHistogram(counts=[10, 0, 0, 10]).mode()
        1
        """
        return int(np.argmax(self.counts)) + 1

    def is_pure(self) -> bool:
        """Check whether at most one class is present."""
        return int(np.count_nonzero(self.counts)) <= 1

    @icontract.require(lambda self, other: self.num_classes == other.num_classes)
    def __add__(self, other: 'ClassHistogram') -> 'ClassHistogram':
        """Add the counts class-wise."""
        return ClassHistogram(counts=self.counts + other.counts)

    def __eq__(self, other: object) -> bool:
        """Compare the counts class-wise."""
        if not isinstance(other, ClassHistogram):
            return NotImplemented

        return self.counts.shape == other.counts.shape and bool(
            np.all(self.counts == other.counts))

    def __hash__(self) -> int:
        """Hash the counts."""
        return hash(tuple(int(count) for count in self.counts))

    def __repr__(self) -> str:
        """Represent as the tuple of counts."""
        return 'ClassHistogram({})'.format(
            tuple(int(count) for count in self.counts))


class Criterion(enum.Enum):
    """List the supported splitting criteria."""
    GINI = 'gini'
    IG = 'ig'
    OGINI = 'ogini'
    WIG = 'wig'
    RI = 'ri'


#: Criteria that do not depend on the class scores.
SCORE_FREE = frozenset([Criterion.GINI, Criterion.IG,
                        Criterion.OGINI])  # type: Final


def parse_criterion(name: str) -> Criterion:
    """
    Parse the criterion from its command-line name (case-insensitive).

    >>> parse_criterion('OGini')
    <Criterion.OGINI: 'ogini'>

    :param name: one of gini, ig, ogini, wig, ri
    :return: parsed criterion
    """
    try:
        return Criterion(name.strip().lower())
    except ValueError:
        raise ValueError("Unknown criterion {!r}, expected one of: {}".format(
            name, ', '.join(criterion.value for criterion in Criterion))) \
            from None


class CriterionSpec:
    """
    Specify a splitting criterion and its hyperparameters.

    :ivar kind: which impurity measure the gain is based on
    :vartype kind: Criterion

    :ivar alpha: normalisation exponent of the weighted entropy (WIG only)
    :vartype alpha: float

    :ivar score_map:
        scores v(C_1) < ... < v(C_Q) of the classes, or None for v(C_q) = q.
        Used by WIG and RI.
    :vartype score_map: Optional[Tuple[float, ...]]

    :ivar beta:
        pair weighting of the ranking impurity over class indices, or None for
        beta(C_q, C_j) = v(C_q) - v(C_j)
    :vartype beta: Optional[BetaFunction]
    """

    @icontract.require(lambda alpha: alpha > 0.0)
    @icontract.require(
        lambda score_map: score_map is None or all(
            score_map[i] < score_map[i + 1]
            for i in range(len(score_map) - 1)),
        "score map must be strictly increasing")
    def __init__(self,
                 kind: Criterion,
                 alpha: float = DEFAULT_ALPHA,
                 score_map: Optional[Sequence[float]] = None,
                 beta: Optional[BetaFunction] = None) -> None:
        """Initialize with the given values."""
        self.kind = kind
        self.alpha = float(alpha)
        self.score_map = None if score_map is None else tuple(
            float(score) for score in score_map)
        self.beta = beta

    @property
    def beta_is_default(self) -> bool:
        """Check whether beta(C_q, C_j) = v(C_q) - v(C_j)."""
        return self.beta is None

    @icontract.require(lambda num_classes: num_classes >= 1)
    @icontract.ensure(lambda result: bool(np.all(np.diff(result) > 0)))
    def scores(self, num_classes: int) -> np.ndarray:
        """
        Return the scores v(C_1), ..., v(C_Q).

        >>> CriterionSpec(kind=Criterion.WIG).scores(num_classes=3)
        array([1., 2., 3.])

        :param num_classes: Q
        :return: array of Q strictly increasing scores
        """
        if self.score_map is None:
            return np.arange(1, num_classes + 1, dtype=np.float64)

        if len(self.score_map) != num_classes:
            raise ValueError(
                "The score map has {} entries, but there are {} classes".format(
                    len(self.score_map), num_classes))

        return np.array(self.score_map, dtype=np.float64)

    def beta_matrix(self, num_classes: int) -> np.ndarray:
        """
        Return the lower-triangular matrix B[q, j] = beta(C_q, C_j) for j <= q.

        Entries above the diagonal are zero as the ranking impurity only sums
        over j <= q.

        :param num_classes: Q
        :return: Q x Q matrix (0-based indices)
        """
        if self.beta is None:
            scores = self.scores(num_classes=num_classes)
            matrix = scores[:, np.newaxis] - scores[np.newaxis, :]
        else:
            matrix = np.array([[
                float(self.beta(q + 1, j + 1)) for j in range(num_classes)
            ] for q in range(num_classes)])

        return np.tril(matrix)

    def __repr__(self) -> str:
        """Represent with the fields that are relevant to the kind."""
        return 'CriterionSpec(kind={}, alpha={}, score_map={}, beta={})'.format(
            self.kind.value, self.alpha, self.score_map,
            'default' if self.beta is None else 'custom')


class GainResult:
    """
    Represent the impurity decrease of a binary split.

    :ivar gain: parent impurity minus the weighted impurity of the children
    :vartype gain: float

    :ivar parent_impurity: impurity of the node before splitting
    :vartype parent_impurity: float

    :ivar left_impurity: impurity of the left child
    :vartype left_impurity: float

    :ivar right_impurity: impurity of the right child
    :vartype right_impurity: float

    :ivar p_left: share of the node's patterns routed left
    :vartype p_left: float

    :ivar p_right: share of the node's patterns routed right
    :vartype p_right: float
    """

    # pylint: disable=too-many-arguments
    def __init__(self, parent_impurity: float, left_impurity: float,
                 right_impurity: float, p_left: float, p_right: float) -> None:
        """Initialize and compute the gain from the given parts."""
        self.parent_impurity = float(parent_impurity)
        self.left_impurity = float(left_impurity)
        self.right_impurity = float(right_impurity)
        self.p_left = float(p_left)
        self.p_right = float(p_right)
        self.gain = self.parent_impurity - (
            self.p_left * self.left_impurity +
            self.p_right * self.right_impurity)

    def __repr__(self) -> str:
        """Represent with all the parts."""
        return ('GainResult(gain={!r}, parent_impurity={!r}, '
                'left_impurity={!r}, right_impurity={!r}, p_left={!r}, '
                'p_right={!r})').format(self.gain, self.parent_impurity,
                                        self.left_impurity,
                                        self.right_impurity, self.p_left,
                                        self.p_right)


##
# Batched kernels over an (M, Q) matrix of counts, one node per row.
##


def _as_count_matrix(counts: np.ndarray) -> np.ndarray:
    matrix = np.asarray(counts, dtype=np.float64)
    if matrix.ndim == 1:
        matrix = matrix[np.newaxis, :]
    return matrix


def _frequencies(counts: np.ndarray) -> np.ndarray:
    totals = counts.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise ValueError("Impurity of an empty node is undefined")
    return counts / totals


def _plogp(frequencies: np.ndarray) -> np.ndarray:
    """Compute p * log2(p) element-wise with 0 * log2(0) = 0."""
    logs = np.log2(
        frequencies,
        out=np.zeros_like(frequencies),
        where=frequencies > 0.0)
    return frequencies * logs


def gini_batch(counts: np.ndarray) -> np.ndarray:
    """Compute the Gini-index 1 - sum(p^2) of every row."""
    frequencies = _frequencies(_as_count_matrix(counts))
    return 1.0 - np.sum(frequencies * frequencies, axis=1)


def entropy_batch(counts: np.ndarray) -> np.ndarray:
    """Compute the Shannon entropy in bits of every row."""
    frequencies = _frequencies(_as_count_matrix(counts))
    return -np.sum(_plogp(frequencies), axis=1)


def ogini_batch(counts: np.ndarray) -> np.ndarray:
    """Compute the ordinal Gini-index over cumulative frequencies of every row."""
    matrix = _as_count_matrix(counts)
    totals = matrix.sum(axis=1, keepdims=True)
    if np.any(totals <= 0):
        raise ValueError("Impurity of an empty node is undefined")

    # the last cumulative count equals the total, hence c_Q is exactly 1
    cumulative = np.cumsum(matrix, axis=1) / totals
    return np.sum(cumulative * (1.0 - cumulative), axis=1)


def class_weights_batch(counts: np.ndarray, scores: np.ndarray,
                        alpha: float) -> np.ndarray:
    """
    Compute the weights of the classes relative to the mode of every row.

    :param counts: (M, Q) counts
    :param scores: Q class scores
    :param alpha: normalisation exponent
    :return: (M, Q) weights, every row sums to 1
    """
    matrix = _as_count_matrix(counts)
    # argmax picks the first maximum, so ties go to the lowest class index
    modes = np.argmax(matrix, axis=1)
    distances = np.abs(scores[np.newaxis, :] -
                       scores[modes][:, np.newaxis])**alpha
    return distances / distances.sum(axis=1, keepdims=True)


def weighted_entropy_batch(counts: np.ndarray, scores: np.ndarray,
                           alpha: float) -> np.ndarray:
    """Compute the weighted entropy in bits of every row."""
    matrix = _as_count_matrix(counts)
    frequencies = _frequencies(matrix)
    weights = class_weights_batch(counts=matrix, scores=scores, alpha=alpha)
    return -np.sum(weights * _plogp(frequencies), axis=1)


def ranking_batch(counts: np.ndarray, beta_matrix: np.ndarray) -> np.ndarray:
    """Compute the unnormalised ranking impurity of every row."""
    matrix = _as_count_matrix(counts)
    return np.einsum('mq,qj,mj->m', matrix, beta_matrix, matrix)


def impurity_batch(spec: CriterionSpec, counts: np.ndarray) -> np.ndarray:
    """
    Compute the impurity measure behind the criterion for every row.

    :param spec: criterion specification
    :param counts: (M, Q) counts of M nodes
    :return: M impurities
    """
    matrix = _as_count_matrix(counts)
    num_classes = matrix.shape[1]

    if spec.kind == Criterion.GINI:
        return gini_batch(counts=matrix)

    if spec.kind == Criterion.IG:
        return entropy_batch(counts=matrix)

    if spec.kind == Criterion.OGINI:
        return ogini_batch(counts=matrix)

    if spec.kind == Criterion.WIG:
        return weighted_entropy_batch(
            counts=matrix,
            scores=spec.scores(num_classes=num_classes),
            alpha=spec.alpha)

    if spec.kind == Criterion.RI:
        return ranking_batch(
            counts=matrix, beta_matrix=spec.beta_matrix(num_classes=num_classes))

    raise NotImplementedError("Unhandled criterion: {}".format(spec.kind))


def gain_batch(spec: CriterionSpec, parent: np.ndarray,
               lefts: np.ndarray) -> np.ndarray:
    """
    Compute the gains of M candidate splits of the same parent node.

    :param spec: criterion specification
    :param parent: Q counts of the parent node
    :param lefts: (M, Q) counts of the left children; right = parent - left
    :return: M gains
    """
    parent_counts = np.asarray(parent, dtype=np.float64)
    left_counts = _as_count_matrix(lefts)
    right_counts = parent_counts[np.newaxis, :] - left_counts

    total = parent_counts.sum()
    p_left = left_counts.sum(axis=1) / total
    p_right = right_counts.sum(axis=1) / total

    parent_impurity = impurity_batch(spec=spec, counts=parent_counts)[0]
    return parent_impurity - (
        p_left * impurity_batch(spec=spec, counts=left_counts) +
        p_right * impurity_batch(spec=spec, counts=right_counts))


##
# Operations on single histograms
##


@icontract.require(lambda h: h.total > 0)
@icontract.ensure(lambda h, result: 0.0 <= result <= 1.0 - 1.0 / h.num_classes +
                  1e-12)
def impurity_gini(h: ClassHistogram) -> float:
    """
    Compute the Gini-index of the node.

    >>> impurity_gini(ClassHistogram(counts=[10, 0, 0, 10]))
    0.5

    :param h: class histogram of the node
    :return: impurity in [0, 1 - 1/Q]
    """
    return float(gini_batch(counts=h.counts)[0])


@icontract.require(lambda h: h.total > 0)
@icontract.ensure(lambda result: result >= 0.0)
def impurity_entropy(h: ClassHistogram) -> float:
    """
    Compute the Shannon entropy of the node in bits.

    >>> impurity_entropy(ClassHistogram(counts=[10, 0, 0, 10]))
    1.0

    :param h: class histogram of the node
    :return: entropy in [0, log2(Q)]
    """
    return float(entropy_batch(counts=h.counts)[0])


@icontract.require(lambda h: h.total > 0)
@icontract.ensure(lambda result: result >= 0.0)
def impurity_ogini(h: ClassHistogram) -> float:
    """
    Compute the ordinal Gini-index of the node.

    >>> impurity_ogini(ClassHistogram(counts=[10, 10, 0, 0]))
    0.25

    :param h: class histogram of the node
    :return: non-negative impurity
    """
    return float(ogini_batch(counts=h.counts)[0])


@icontract.require(lambda h: h.total > 0)
@icontract.require(lambda h: h.num_classes >= 2)
@icontract.ensure(lambda result: abs(float(np.sum(result)) - 1.0) < 1e-12)
def class_weights(h: ClassHistogram, spec: CriterionSpec) -> np.ndarray:
    """
    Compute the weights of the weighted entropy for the node.

    The weight of a class grows with the distance of its score from the score
    of the node's mode class; the mode itself gets zero weight.

    :param h: class histogram of the node
    :param spec: provides the scores and the exponent alpha
    :return: Q weights summing to 1
    """
    return class_weights_batch(
        counts=h.counts,
        scores=spec.scores(num_classes=h.num_classes),
        alpha=spec.alpha)[0]


@icontract.require(lambda h: h.total > 0)
@icontract.ensure(lambda result: result >= 0.0)
def impurity_weighted_entropy(h: ClassHistogram, spec: CriterionSpec) -> float:
    """
    Compute the weighted entropy of the node in bits.

    The weights are computed on the node itself.

    :param h: class histogram of the node
    :param spec: provides the scores and the exponent alpha
    :return: non-negative impurity
    """
    return float(
        weighted_entropy_batch(
            counts=h.counts,
            scores=spec.scores(num_classes=h.num_classes),
            alpha=spec.alpha)[0])


@icontract.require(lambda h: h.total >= 0)
def impurity_ranking(h: ClassHistogram, spec: CriterionSpec) -> float:
    """
    Compute the ranking impurity, the weighted count of mis-rankable pairs.

    >>> impurity_ranking(ClassHistogram(counts=[10, 0, 0, 10]),
    ...                  CriterionSpec(kind=Criterion.RI))
    300.0

    :param h: class histogram of the node
    :param spec: provides the scores or beta
    :return: unnormalised impurity, 0 for an empty node
    """
    return float(
        ranking_batch(
            counts=h.counts,
            beta_matrix=spec.beta_matrix(num_classes=h.num_classes))[0])


@icontract.require(lambda h: h.total > 0)
def impurity(h: ClassHistogram, spec: CriterionSpec) -> float:
    """Compute the impurity measure that the criterion is based on."""
    return float(impurity_batch(spec=spec, counts=h.counts)[0])


@icontract.require(lambda parent, left, right: left + right == parent,
                   "parent counts must equal left plus right counts")
@icontract.require(lambda left: left.total > 0)
@icontract.require(lambda right: right.total > 0)
@icontract.ensure(
    lambda result: abs(result.p_left + result.p_right - 1.0) < 1e-12)
def split_gain(spec: CriterionSpec, parent: ClassHistogram,
               left: ClassHistogram, right: ClassHistogram) -> GainResult:
    """
    Compute the impurity decrease of splitting the parent into two children.

    :param spec: criterion specification
    :param parent: histogram of the node
    :param left: histogram of the left child
    :param right: histogram of the right child
    :return: gain together with its parts
    """
    return GainResult(
        parent_impurity=impurity(h=parent, spec=spec),
        left_impurity=impurity(h=left, spec=spec),
        right_impurity=impurity(h=right, spec=spec),
        p_left=left.total / float(parent.total),
        p_right=right.total / float(parent.total))
