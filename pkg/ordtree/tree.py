#!/usr/bin/env python
"""Grow binary decision trees by maximising a splitting criterion."""

import json
import logging
import pathlib
from typing import (Any, Iterator, List, Mapping, MutableMapping, Optional,
                    Sequence, Tuple, Union)

import icontract
import numpy as np
from typing_extensions import Final

from ordtree import criteria
from ordtree.criteria import (ClassHistogram, CriterionSpec, GainResult,
                              IntArrayLike)

LOGGER = logging.getLogger(__name__)

#: Default minimum number of patterns a node needs to be split.
DEFAULT_MIN_SAMPLES_SPLIT = 2  # type: Final

#: Relative tolerance on gains, scaled by max(1, |parent impurity|).
#: Gains below it are no improvement; gains within it of the best are ties.
GAIN_TOLERANCE = 1e-12  # type: Final


class SplitSpec:
    """
    Define a binary partition of a node by a threshold on one feature.

    A pattern goes left iff ``x[feature] < threshold``, and right otherwise.

    :ivar feature: 0-based index of the feature
    :vartype feature: int

    :ivar threshold: threshold on the feature
    :vartype threshold: float
    """

    @icontract.require(lambda feature: feature >= 0)
    @icontract.require(lambda threshold: np.isfinite(threshold))
    def __init__(self, feature: int, threshold: float) -> None:
        """Initialize with the given values."""
        self.feature = int(feature)
        self.threshold = float(threshold)

    def goes_left(self, x: Sequence[float]) -> bool:
        """Check whether the pattern is routed to the left child."""
        return bool(x[self.feature] < self.threshold)

    def __eq__(self, other: object) -> bool:
        """Compare feature and threshold exactly."""
        if not isinstance(other, SplitSpec):
            return NotImplemented

        return (self.feature == other.feature
                and self.threshold == other.threshold)

    def __hash__(self) -> int:
        """Hash feature and threshold."""
        return hash((self.feature, self.threshold))

    def __repr__(self) -> str:
        """Represent as the routing rule."""
        return 'SplitSpec(feature={}, threshold={!r})'.format(
            self.feature, self.threshold)


@icontract.invariant(lambda self: self.histogram.total >= 1)
class Leaf:
    """
    Predict the mode of the training patterns that reached the leaf.

    :ivar histogram: class histogram of the training patterns in the leaf
    :vartype histogram: ClassHistogram

    :ivar predicted_class: mode of the histogram, ties to the lowest index
    :vartype predicted_class: int
    """

    def __init__(self, histogram: ClassHistogram) -> None:
        """Initialize with the histogram of the leaf."""
        self.histogram = histogram
        self.predicted_class = histogram.mode()

    def probabilities(self) -> np.ndarray:
        """Return the relative class frequencies of the leaf."""
        return self.histogram.relative_frequencies()

    def __eq__(self, other: object) -> bool:
        """Compare the histograms."""
        if not isinstance(other, Leaf):
            return NotImplemented

        return self.histogram == other.histogram

    def __repr__(self) -> str:
        """Represent with the histogram."""
        return 'Leaf({!r})'.format(self.histogram)


class Internal:
    """
    Route patterns to one of two children.

    :ivar split: routing rule
    :vartype split: SplitSpec

    :ivar left: child receiving ``x[feature] < threshold``
    :vartype left: Union[Leaf, Internal]

    :ivar right: child receiving ``x[feature] >= threshold``
    :vartype right: Union[Leaf, Internal]

    :ivar histogram: class histogram of the node, i.e. of both children
    :vartype histogram: ClassHistogram
    """

    def __init__(self, split: SplitSpec, left: 'TreeNode',
                 right: 'TreeNode') -> None:
        """Initialize with the routing rule and the two children."""
        self.split = split
        self.left = left
        self.right = right
        self.histogram = left.histogram + right.histogram

    def __eq__(self, other: object) -> bool:
        """Compare the splits and the subtrees."""
        if not isinstance(other, Internal):
            return NotImplemented

        return (self.split == other.split and self.left == other.left
                and self.right == other.right)

    def __repr__(self) -> str:
        """Represent with the split and the subtrees."""
        return 'Internal({!r}, left={!r}, right={!r})'.format(
            self.split, self.left, self.right)


TreeNode = Union[Leaf, Internal]


class GrowConfig:
    """
    Configure the induction of a tree.

    :ivar criterion: splitting criterion to maximise
    :vartype criterion: CriterionSpec

    :ivar max_depth: maximum depth of a leaf (the root has depth 0)
    :vartype max_depth: int

    :ivar min_samples_split: nodes with fewer patterns become leaves
    :vartype min_samples_split: int
    """

    @icontract.require(lambda max_depth: max_depth >= 1)
    @icontract.require(lambda min_samples_split: min_samples_split >= 2)
    def __init__(self,
                 criterion: CriterionSpec,
                 max_depth: int,
                 min_samples_split: int = DEFAULT_MIN_SAMPLES_SPLIT) -> None:
        """Initialize with the given values."""
        self.criterion = criterion
        self.max_depth = int(max_depth)
        self.min_samples_split = int(min_samples_split)

    def __eq__(self, other: object) -> bool:
        """Compare all the fields except the identity of a custom beta."""
        if not isinstance(other, GrowConfig):
            return NotImplemented

        return (self.criterion.kind == other.criterion.kind
                and self.criterion.alpha == other.criterion.alpha
                and self.criterion.score_map == other.criterion.score_map
                and self.criterion.beta_is_default ==
                other.criterion.beta_is_default
                and self.max_depth == other.max_depth
                and self.min_samples_split == other.min_samples_split)

    def __repr__(self) -> str:
        """Represent with all the fields."""
        return 'GrowConfig(criterion={!r}, max_depth={}, min_samples_split={})'.format(
            self.criterion, self.max_depth, self.min_samples_split)


def _iterate_leaves(node: TreeNode, depth: int) -> Iterator[Tuple[Leaf, int]]:
    """Iterate over the leaves in left-to-right order with their depths."""
    if isinstance(node, Leaf):
        yield node, depth
    else:
        yield from _iterate_leaves(node=node.left, depth=depth + 1)
        yield from _iterate_leaves(node=node.right, depth=depth + 1)


def _truncate(node: TreeNode, depth: int, max_depth: int) -> TreeNode:
    if isinstance(node, Leaf):
        return node

    if depth >= max_depth:
        return Leaf(histogram=node.histogram)

    return Internal(
        split=node.split,
        left=_truncate(node=node.left, depth=depth + 1, max_depth=max_depth),
        right=_truncate(node=node.right, depth=depth + 1, max_depth=max_depth))


class DecisionTree:
    """
    Represent a grown binary decision tree over ordinal classes.

    :ivar root: root node
    :vartype root: Union[Leaf, Internal]

    :ivar num_classes: Q
    :vartype num_classes: int

    :ivar num_features: K
    :vartype num_features: int

    :ivar config: configuration the tree was grown with
    :vartype config: GrowConfig
    """

    def __init__(self, root: TreeNode, num_classes: int, num_features: int,
                 config: GrowConfig) -> None:
        """Initialize with the given values."""
        self.root = root
        self.num_classes = num_classes
        self.num_features = num_features
        self.config = config

    def leaves(self) -> List[Tuple[Leaf, int]]:
        """List the leaves in left-to-right order together with their depths."""
        return list(_iterate_leaves(node=self.root, depth=0))

    def depth(self) -> int:
        """Return the depth of the deepest leaf."""
        return max(depth for _, depth in self.leaves())

    def leaf_count(self) -> int:
        """Return the number of leaves."""
        return len(self.leaves())

    def _leaf(self, x: Sequence[float]) -> Leaf:
        node = self.root
        while isinstance(node, Internal):
            node = node.left if node.split.goes_left(x) else node.right

        return node

    @icontract.require(lambda self, x: len(x) == self.num_features)
    @icontract.ensure(lambda self, result: 1 <= result <= self.num_classes)
    def predict(self, x: Sequence[float]) -> int:
        """
        Predict the class of a single pattern.

        :param x: K feature values
        :return: predicted class index in 1..Q
        """
        return self._leaf(x=x).predicted_class

    @icontract.require(lambda self, x: len(x) == self.num_features)
    @icontract.ensure(lambda result: abs(float(np.sum(result)) - 1.0) < 1e-12)
    def predict_proba(self, x: Sequence[float]) -> np.ndarray:
        """
        Estimate the class probabilities of a single pattern.

        :param x: K feature values
        :return: relative class frequencies of the reached leaf
        """
        return self._leaf(x=x).probabilities()

    def _route_many(self, features: np.ndarray) -> List[Tuple[Leaf, np.ndarray]]:
        """Partition the rows of the feature matrix among the leaves."""
        routed = []  # type: List[Tuple[Leaf, np.ndarray]]
        stack = [(self.root, np.arange(features.shape[0]))
                 ]  # type: List[Tuple[TreeNode, np.ndarray]]
        while stack:
            node, rows = stack.pop()
            if rows.size == 0:
                continue

            if isinstance(node, Leaf):
                routed.append((node, rows))
                continue

            mask = features[rows, node.split.feature] < node.split.threshold
            stack.append((node.left, rows[mask]))
            stack.append((node.right, rows[~mask]))

        return routed

    @icontract.require(lambda self, features: np.ndim(features) == 2 and np.
                       shape(features)[1] == self.num_features)
    def predict_many(self, features: np.ndarray) -> np.ndarray:
        """
        Predict the classes of the rows of a feature matrix.

        :param features: N x K matrix
        :return: N class indices in 1..Q
        """
        matrix = np.asarray(features, dtype=np.float64)
        result = np.zeros(matrix.shape[0], dtype=np.int64)
        for leaf, rows in self._route_many(features=matrix):
            result[rows] = leaf.predicted_class

        return result

    @icontract.require(lambda self, features: np.ndim(features) == 2 and np.
                       shape(features)[1] == self.num_features)
    def predict_proba_many(self, features: np.ndarray) -> np.ndarray:
        """
        Estimate the class probabilities of the rows of a feature matrix.

        :param features: N x K matrix
        :return: N x Q matrix, every row sums to 1
        """
        matrix = np.asarray(features, dtype=np.float64)
        result = np.zeros((matrix.shape[0], self.num_classes))
        for leaf, rows in self._route_many(features=matrix):
            result[rows, :] = leaf.probabilities()[np.newaxis, :]

        return result

    @icontract.require(lambda self, max_depth: 1 <= max_depth <= self.config.
                       max_depth)
    @icontract.ensure(lambda result, max_depth: result.depth() <= max_depth)
    def truncated(self, max_depth: int) -> 'DecisionTree':
        """
        Cut the tree at the given depth, turning the nodes there into leaves.

        The induction never looks at the depth limit when choosing a split,
        so the result equals the tree grown on the same data with
        ``max_depth`` as the limit.

        :param max_depth: new depth limit, at most the current one
        :return: truncated tree
        """
        config = GrowConfig(
            criterion=self.config.criterion,
            max_depth=max_depth,
            min_samples_split=self.config.min_samples_split)

        return DecisionTree(
            root=_truncate(node=self.root, depth=0, max_depth=max_depth),
            num_classes=self.num_classes,
            num_features=self.num_features,
            config=config)

    def __eq__(self, other: object) -> bool:
        """Compare the structure, the dimensions and the configuration."""
        if not isinstance(other, DecisionTree):
            return NotImplemented

        return (self.num_classes == other.num_classes
                and self.num_features == other.num_features
                and self.config == other.config and self.root == other.root)

    def __repr__(self) -> str:
        """Represent with the dimensions and the root."""
        return 'DecisionTree(num_classes={}, num_features={}, root={!r})'.format(
            self.num_classes, self.num_features, self.root)


def _midpoints(lower: np.ndarray, upper: np.ndarray) -> np.ndarray:
    """
    Compute thresholds strictly above ``lower`` and at most ``upper``.

    When the midpoint rounds down onto ``lower`` (adjacent floats) or
    overflows, ``upper`` is used instead.
    """
    with np.errstate(over='ignore'):
        middle = (lower + upper) / 2.0

    return np.where(np.isfinite(middle) & (middle > lower), middle, upper)


@icontract.require(lambda values: len(values) >= 1)
@icontract.ensure(lambda result: bool(np.all(np.diff(result) > 0)))
def candidate_thresholds(values: Sequence[float]) -> np.ndarray:
    """
    Enumerate the thresholds worth testing on the values of one feature.

    >>> candidate_thresholds([1.0, 2.0, 2.0, 4.0]).tolist()
    [1.5, 3.0]
    >>> candidate_thresholds([5.0, 5.0, 5.0]).tolist()
    []

    :param values: feature values of the patterns at a node
    :return: sorted midpoints between consecutive distinct values
    """
    distinct = np.unique(np.asarray(values, dtype=np.float64))
    return _midpoints(lower=distinct[:-1], upper=distinct[1:])


def _one_hot(labels: np.ndarray, num_classes: int) -> np.ndarray:
    result = np.zeros((labels.shape[0], num_classes), dtype=np.float64)
    result[np.arange(labels.shape[0]), labels - 1] = 1.0
    return result


class SplitCandidates:
    """
    Hold the candidate thresholds of one feature at a node.

    :ivar feature: index of the feature
    :vartype feature: int

    :ivar thresholds: sorted candidate thresholds
    :vartype thresholds: numpy.ndarray

    :ivar lefts:
        class counts of the left child for every threshold, one row per
        threshold
    :vartype lefts: numpy.ndarray
    """

    def __init__(self, feature: int, thresholds: np.ndarray,
                 lefts: np.ndarray) -> None:
        """Initialize with the given values."""
        self.feature = feature
        self.thresholds = thresholds
        self.lefts = lefts


@icontract.require(lambda features: np.ndim(features) == 2)
@icontract.require(lambda features, labels: np.shape(features)[0] == len(labels))
def split_candidates(features: np.ndarray, labels: IntArrayLike,
                     num_classes: int) -> List[SplitCandidates]:
    """
    Sweep every feature once in sorted order and collect its candidates.

    The left histograms of all the thresholds of a feature are the running
    class counts. The candidates do not depend on the splitting criterion.

    :param features: N x K feature matrix of the patterns at the node
    :param labels: N class indices in 1..Q
    :param num_classes: Q
    :return: candidates of the features with at least two distinct values
    """
    matrix = np.asarray(features, dtype=np.float64)
    one_hot = _one_hot(
        labels=np.asarray(labels, dtype=np.int64), num_classes=num_classes)

    result = []  # type: List[SplitCandidates]
    for feature in range(matrix.shape[1]):
        order = np.argsort(matrix[:, feature], kind='mergesort')
        values = matrix[order, feature]

        positions = np.nonzero(values[1:] > values[:-1])[0]
        if positions.size == 0:
            continue

        result.append(
            SplitCandidates(
                feature=feature,
                thresholds=_midpoints(
                    lower=values[positions], upper=values[positions + 1]),
                lefts=np.cumsum(one_hot[order], axis=0)[positions]))

    return result


# pylint: disable=too-many-locals
@icontract.require(lambda features: np.ndim(features) == 2)
@icontract.require(lambda features, labels: np.shape(features)[0] == len(labels))
def best_split(features: np.ndarray, labels: IntArrayLike, num_classes: int,
               criterion: CriterionSpec
               ) -> Optional[Tuple[SplitSpec, GainResult]]:
    """
    Find the split of the node that maximises the criterion.

    All the criteria score the same candidates, see :func:`split_candidates`.

    :param features: N x K feature matrix of the patterns at the node
    :param labels: N class indices in 1..Q
    :param num_classes: Q
    :param criterion: splitting criterion to maximise
    :return:
        best split with its gain, or None if the node is pure, no threshold
        separates the patterns or no split has a positive gain.
        Ties are broken by the lower feature index, then the lower threshold.
    """
    matrix = np.asarray(features, dtype=np.float64)
    label_array = np.asarray(labels, dtype=np.int64)

    parent = ClassHistogram.from_labels(
        labels=label_array, num_classes=num_classes)
    if parent.total < 2 or parent.is_pure():
        return None

    candidates = split_candidates(
        features=matrix, labels=label_array, num_classes=num_classes)
    if not candidates:
        return None

    candidate_features = [
        np.full(candidate.thresholds.size, candidate.feature)
        for candidate in candidates
    ]
    candidate_thresholds_ = [candidate.thresholds for candidate in candidates]
    candidate_lefts = [candidate.lefts for candidate in candidates]
    candidate_gains = [
        criteria.gain_batch(
            spec=criterion, parent=parent.counts, lefts=candidate.lefts)
        for candidate in candidates
    ]

    ##
    # Pick the first candidate within the tolerance of the best gain
    ##

    gains = np.concatenate(candidate_gains)
    parent_impurity = criteria.impurity(h=parent, spec=criterion)
    tolerance = GAIN_TOLERANCE * max(1.0, abs(parent_impurity))

    best_gain = float(gains.max())
    if best_gain <= tolerance:
        return None

    chosen = int(np.argmax(gains >= best_gain - tolerance))

    split = SplitSpec(
        feature=int(np.concatenate(candidate_features)[chosen]),
        threshold=float(np.concatenate(candidate_thresholds_)[chosen]))

    left_counts = np.rint(np.concatenate(candidate_lefts)[chosen]).astype(
        np.int64)
    left = ClassHistogram(counts=left_counts)
    right = ClassHistogram(counts=parent.counts - left_counts)

    return split, criteria.split_gain(
        spec=criterion, parent=parent, left=left, right=right)


def _grow_node(features: np.ndarray, labels: np.ndarray, num_classes: int,
               config: GrowConfig, depth: int) -> TreeNode:
    histogram = ClassHistogram.from_labels(
        labels=labels, num_classes=num_classes)

    if (depth >= config.max_depth or histogram.is_pure()
            or histogram.total < config.min_samples_split):
        return Leaf(histogram=histogram)

    found = best_split(
        features=features,
        labels=labels,
        num_classes=num_classes,
        criterion=config.criterion)

    if found is None:
        return Leaf(histogram=histogram)

    split, gain = found
    LOGGER.debug("Depth %d: splitting %d patterns at %r with gain %g", depth,
                 histogram.total, split, gain.gain)

    mask = features[:, split.feature] < split.threshold
    return Internal(
        split=split,
        left=_grow_node(
            features=features[mask],
            labels=labels[mask],
            num_classes=num_classes,
            config=config,
            depth=depth + 1),
        right=_grow_node(
            features=features[~mask],
            labels=labels[~mask],
            num_classes=num_classes,
            config=config,
            depth=depth + 1))


@icontract.require(lambda features: np.ndim(features) == 2)
@icontract.require(lambda labels: len(labels) >= 1,
                   "training set must not be empty")
@icontract.require(lambda features, labels: np.shape(features)[0] == len(labels))
@icontract.require(lambda num_classes: num_classes >= 2)
@icontract.ensure(lambda result, config: result.depth() <= config.max_depth)
@icontract.ensure(lambda result: result.leaf_count() <= 2**result.config.
                  max_depth)
def grow(features: np.ndarray, labels: IntArrayLike, num_classes: int,
         config: GrowConfig) -> DecisionTree:
    """
    Grow a tree greedily, splitting every node by the best split.

    A node becomes a leaf when it reaches the maximum depth, is pure, has
    fewer than ``min_samples_split`` patterns or has no split with a positive
    gain. The induction is deterministic.

    :param features: N x K training features
    :param labels: N class indices in 1..Q
    :param num_classes: Q
    :param config: induction configuration
    :return: grown tree
    """
    matrix = np.asarray(features, dtype=np.float64)
    label_array = np.asarray(labels, dtype=np.int64)

    root = _grow_node(
        features=matrix,
        labels=label_array,
        num_classes=num_classes,
        config=config,
        depth=0)

    return DecisionTree(
        root=root,
        num_classes=num_classes,
        num_features=matrix.shape[1],
        config=config)


##
# JSON serialization
##


def _node_to_jsonable(node: TreeNode) -> Mapping[str, Any]:
    if isinstance(node, Leaf):
        return {'counts': [int(count) for count in node.histogram.counts]}

    return {
        'feature': node.split.feature,
        'threshold': node.split.threshold,
        'left': _node_to_jsonable(node=node.left),
        'right': _node_to_jsonable(node=node.right)
    }


def _node_from_jsonable(jsonable: Mapping[str, Any]) -> TreeNode:
    if 'counts' in jsonable:
        return Leaf(histogram=ClassHistogram(counts=jsonable['counts']))

    return Internal(
        split=SplitSpec(
            feature=jsonable['feature'], threshold=jsonable['threshold']),
        left=_node_from_jsonable(jsonable=jsonable['left']),
        right=_node_from_jsonable(jsonable=jsonable['right']))


def to_jsonable(tree: DecisionTree) -> Mapping[str, Any]:
    """
    Convert the tree to a JSON-able mapping.

    Internal nodes are stored as ``{feature, threshold, left, right}`` and
    leaves as ``{counts}``. A custom beta of the criterion is not stored.

    :param tree: to be converted
    :return: JSON-able representation
    """
    criterion = tree.config.criterion
    config = {
        'criterion': criterion.kind.value,
        'alpha': criterion.alpha,
        'max_depth': tree.config.max_depth,
        'min_samples_split': tree.config.min_samples_split
    }  # type: MutableMapping[str, Any]
    if criterion.score_map is not None:
        config['score_map'] = list(criterion.score_map)

    if not criterion.beta_is_default:
        LOGGER.warning("The custom beta of the criterion is not serialized; "
                       "the loaded tree will use the default beta.")

    return {
        'num_classes': tree.num_classes,
        'num_features': tree.num_features,
        'config': config,
        'root': _node_to_jsonable(node=tree.root)
    }


def from_jsonable(jsonable: Mapping[str, Any]) -> DecisionTree:
    """
    Parse the tree from its JSON-able representation.

    :param jsonable: as produced by :func:`to_jsonable`
    :return: parsed tree
    """
    config = jsonable['config']
    criterion = CriterionSpec(
        kind=criteria.parse_criterion(config['criterion']),
        alpha=config['alpha'],
        score_map=config.get('score_map', None))

    return DecisionTree(
        root=_node_from_jsonable(jsonable=jsonable['root']),
        num_classes=int(jsonable['num_classes']),
        num_features=int(jsonable['num_features']),
        config=GrowConfig(
            criterion=criterion,
            max_depth=config['max_depth'],
            min_samples_split=config['min_samples_split']))


def dump_tree(tree: DecisionTree, path: Union[str, pathlib.Path]) -> None:
    """Write the tree as JSON to the given path."""
    pathlib.Path(str(path)).write_text(
        json.dumps(to_jsonable(tree=tree), indent=2))


def load_tree(path: Union[str, pathlib.Path]) -> DecisionTree:
    """Read the tree from a JSON file written by :func:`dump_tree`."""
    return from_jsonable(
        jsonable=json.loads(pathlib.Path(str(path)).read_text()))
