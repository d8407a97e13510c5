#!/usr/bin/env python
"""Load ordinal datasets and draw seeded stratified partitions and folds."""

import csv
import hashlib
import json
import logging
import math
import pathlib
from typing import (Any, Iterator, List, Mapping, Optional, Sequence, Tuple,
                    Union)

import icontract
import numpy as np
from sklearn.model_selection import StratifiedKFold

from ordtree.criteria import ClassHistogram, IntArrayLike

LOGGER = logging.getLogger(__name__)

PathLike = Union[str, pathlib.Path]


class CsvSchema:
    """
    Describe the layout of a dataset file.

    Every data row holds K numeric feature columns followed by one integer
    label column.

    :ivar delimiter: column delimiter; None splits on any whitespace
    :vartype delimiter: Optional[str]

    :ivar header:
        True if the first row is a header, False if not, None to detect it by
        a non-numeric cell in the first row
    :vartype header: Optional[bool]

    :ivar num_classes:
        declared number of classes Q; None infers Q from the distinct labels
    :vartype num_classes: Optional[int]

    :ivar zero_based:
        with a declared Q, the label codes run from 0 to Q-1 instead of 1 to Q
    :vartype zero_based: bool
    """

    @icontract.require(lambda num_classes: num_classes is None or
                       num_classes >= 2)
    def __init__(self,
                 delimiter: Optional[str] = ',',
                 header: Optional[bool] = None,
                 num_classes: Optional[int] = None,
                 zero_based: bool = False) -> None:
        """Initialize with the given values."""
        self.delimiter = delimiter
        self.header = header
        self.num_classes = num_classes
        self.zero_based = zero_based


@icontract.invariant(lambda self: self.features.ndim == 2)
@icontract.invariant(
    lambda self: self.features.shape[0] == self.labels.shape[0])
@icontract.invariant(lambda self: self.num_classes >= 2)
@icontract.invariant(lambda self: self.labels.size == 0 or (
    self.labels.min() >= 1 and self.labels.max() <= self.num_classes))
@icontract.invariant(lambda self: bool(np.all(np.isfinite(self.features))))
class Dataset:
    """
    Represent an ordinal dataset with labels as class indices 1..Q.

    Loaded datasets pool the published train and test files, train rows
    first, and remember the original sizes.

    :ivar name: identifier of the dataset
    :vartype name: str

    :ivar features: read-only N x K matrix of finite reals
    :vartype features: numpy.ndarray

    :ivar labels: read-only array of N class indices in 1..Q
    :vartype labels: numpy.ndarray

    :ivar num_classes: Q
    :vartype num_classes: int

    :ivar n_train: number of rows of the published train file, if known
    :vartype n_train: Optional[int]

    :ivar n_test: number of rows of the published test file, if known
    :vartype n_test: Optional[int]

    :ivar label_codes:
        original label code of every class, ``label_codes[q - 1]`` for class q
    :vartype label_codes: Tuple[int, ...]
    """

    # pylint: disable=too-many-arguments
    def __init__(self,
                 name: str,
                 features: np.ndarray,
                 labels: IntArrayLike,
                 num_classes: int,
                 n_train: Optional[int] = None,
                 n_test: Optional[int] = None,
                 label_codes: Optional[Sequence[int]] = None) -> None:
        """Initialize with the given values; the arrays are copied."""
        self.name = name

        feature_array = np.array(features, dtype=np.float64)
        feature_array.setflags(write=False)
        self.features = feature_array

        label_array = np.array(labels, dtype=np.int64)
        label_array.setflags(write=False)
        self.labels = label_array

        self.num_classes = int(num_classes)
        self.n_train = n_train
        self.n_test = n_test
        self.label_codes = tuple(
            label_codes) if label_codes is not None else tuple(
                range(1, self.num_classes + 1))

    @property
    def num_patterns(self) -> int:
        """Return N."""
        return int(self.labels.shape[0])

    @property
    def num_features(self) -> int:
        """Return K."""
        return int(self.features.shape[1])

    def histogram(self) -> ClassHistogram:
        """Count the patterns of every class."""
        return ClassHistogram.from_labels(
            labels=self.labels, num_classes=self.num_classes)


##
# Loading
##


def _rows(path: pathlib.Path,
          delimiter: Optional[str]) -> Iterator[Tuple[int, List[str]]]:
    """Iterate over the non-empty rows of the file with 1-based line numbers."""
    with path.open('rt', newline='') as fid:
        if delimiter is None:
            for line_no, line in enumerate(fid, start=1):
                cells = line.split()
                if cells:
                    yield line_no, cells
        else:
            reader = csv.reader(fid, delimiter=delimiter)
            for cells in reader:
                cells = [cell.strip() for cell in cells]
                if cells and any(cell != '' for cell in cells):
                    yield reader.line_num, cells


def _is_numeric(cell: str) -> bool:
    try:
        float(cell)
        return True
    except ValueError:
        return False


class _ParsedFile:
    """Hold the rows of one dataset file before the labels are normalized."""

    def __init__(self, path: pathlib.Path) -> None:
        self.path = path
        self.features = []  # type: List[List[float]]
        self.codes = []  # type: List[int]
        self.line_numbers = []  # type: List[int]


# pylint: disable=too-many-branches
def _parse_file(path: pathlib.Path, schema: CsvSchema,
                num_columns: Optional[int]) -> _ParsedFile:
    if not path.exists():
        raise FileNotFoundError("Dataset file does not exist: {}".format(path))

    parsed = _ParsedFile(path=path)

    first = True
    for line_no, cells in _rows(path=path, delimiter=schema.delimiter):
        if first:
            first = False
            is_header = (schema.header if schema.header is not None else
                         not all(_is_numeric(cell) for cell in cells))
            if is_header:
                continue

        if num_columns is None:
            num_columns = len(cells)
            if num_columns < 2:
                raise ValueError(
                    "{}:{}: expected at least one feature column and a label "
                    "column, got {} column(s)".format(path, line_no,
                                                      num_columns))

        if len(cells) != num_columns:
            raise ValueError(
                "{}:{}: malformed row, expected {} columns, got {}".format(
                    path, line_no, num_columns, len(cells)))

        row = []  # type: List[float]
        for column, cell in enumerate(cells[:-1]):
            try:
                value = float(cell)
            except ValueError:
                raise ValueError(
                    "{}:{}: non-numeric feature value {!r} in column {}".format(
                        path, line_no, cell, column + 1)) from None

            if not math.isfinite(value):
                raise ValueError(
                    "{}:{}: non-finite feature value {!r} in column {}".format(
                        path, line_no, cell, column + 1))
            row.append(value)

        try:
            code_float = float(cells[-1])
        except ValueError:
            raise ValueError("{}:{}: non-numeric label {!r}".format(
                path, line_no, cells[-1])) from None

        if not math.isfinite(code_float) or code_float != int(code_float):
            raise ValueError("{}:{}: label {!r} is not an integer".format(
                path, line_no, cells[-1]))

        parsed.features.append(row)
        parsed.codes.append(int(code_float))
        parsed.line_numbers.append(line_no)

    if not parsed.codes:
        raise ValueError("{}: the file contains no data rows".format(path))

    return parsed


def _dataset_name(train_path: pathlib.Path) -> str:
    stem = train_path.stem
    return stem[:-len('_train')] if stem.endswith('_train') else stem


def load_dataset(train_path: PathLike,
                 test_path: PathLike,
                 schema: Optional[CsvSchema] = None,
                 name: Optional[str] = None) -> Dataset:
    """
    Load and pool the published train and test files of a dataset.

    Label codes are normalized to 1..Q preserving their order. With a
    declared Q, every code must fall into 1..Q, or into 0..Q-1 if the schema
    is ``zero_based``. Without a declared Q, the sorted distinct codes are
    mapped to 1..Q, which also handles sparse codes.

    :param train_path: path to ``<name>_train.csv``
    :param test_path: path to ``<name>_test.csv``
    :param schema: file layout; comma-separated with header detection if None
    :param name: identifier; derived from the train file name if None
    :return: pooled dataset, train rows first
    """
    schema = schema if schema is not None else CsvSchema()
    train_pth = pathlib.Path(str(train_path))
    test_pth = pathlib.Path(str(test_path))

    train = _parse_file(path=train_pth, schema=schema, num_columns=None)
    num_columns = len(train.features[0]) + 1
    test = _parse_file(path=test_pth, schema=schema, num_columns=num_columns)

    ##
    # Normalize the labels
    ##

    codes = train.codes + test.codes

    if schema.num_classes is not None:
        num_classes = schema.num_classes
        base = 0 if schema.zero_based else 1
        for parsed in (train, test):
            for code, line_no in zip(parsed.codes, parsed.line_numbers):
                if not base <= code < base + num_classes:
                    raise ValueError(
                        "{}:{}: label out of range: {} is not in {}..{}".format(
                            parsed.path, line_no, code, base,
                            base + num_classes - 1))

        label_codes = list(range(base, base + num_classes))
    else:
        label_codes = sorted(set(codes))
        num_classes = len(label_codes)

    if len(set(codes)) < 2:
        raise ValueError(
            "{}, {}: the pooled labels contain {} distinct class(es), "
            "at least 2 are needed".format(train_pth, test_pth,
                                           len(set(codes))))

    mapping = {code: index + 1 for index, code in enumerate(label_codes)}
    labels = [mapping[code] for code in codes]

    dataset = Dataset(
        name=name if name is not None else _dataset_name(train_path=train_pth),
        features=np.array(train.features + test.features, dtype=np.float64),
        labels=labels,
        num_classes=num_classes,
        n_train=len(train.codes),
        n_test=len(test.codes),
        label_codes=label_codes)

    if label_codes != list(range(1, num_classes + 1)):
        LOGGER.info("Dataset %s: label codes %s mapped to classes 1..%d",
                    dataset.name, label_codes, num_classes)

    LOGGER.info("Loaded dataset %s: N=%d (%d train + %d test), K=%d, Q=%d",
                dataset.name, dataset.num_patterns, len(train.codes),
                len(test.codes), dataset.num_features, dataset.num_classes)

    return dataset


def dataset_paths(data_dir: PathLike,
                  name: str) -> Tuple[pathlib.Path, pathlib.Path]:
    """Return the paths of the train and test files of the named dataset."""
    directory = pathlib.Path(str(data_dir))
    return (directory / '{}_train.csv'.format(name),
            directory / '{}_test.csv'.format(name))


def load_named(data_dir: PathLike, name: str,
               schema: Optional[CsvSchema] = None) -> Dataset:
    """
    Load the dataset from ``<data_dir>/<name>_train.csv`` and ``_test.csv``.

    :param data_dir: directory of the dataset files
    :param name: identifier of the dataset
    :param schema: file layout
    :return: pooled dataset
    """
    train_path, test_path = dataset_paths(data_dir=data_dir, name=name)
    return load_dataset(
        train_path=train_path, test_path=test_path, schema=schema, name=name)


def load_features(path: PathLike,
                  num_features: int,
                  has_labels: bool = False,
                  delimiter: Optional[str] = ',') -> np.ndarray:
    """
    Load a feature matrix to predict on.

    :param path: CSV file, header detected by a non-numeric first row
    :param num_features: expected number of feature columns K
    :param has_labels: if set, every row carries a trailing label to ignore
    :param delimiter: column delimiter; None splits on any whitespace
    :return: N x K matrix
    """
    pth = pathlib.Path(str(path))
    num_columns = num_features + 1 if has_labels else num_features

    rows = []  # type: List[List[float]]
    first = True
    for line_no, cells in _rows(path=pth, delimiter=delimiter):
        if first:
            first = False
            if not all(_is_numeric(cell) for cell in cells):
                continue

        if len(cells) != num_columns:
            raise ValueError(
                "{}:{}: malformed row, expected {} columns, got {}".format(
                    pth, line_no, num_columns, len(cells)))

        row = []  # type: List[float]
        for column, cell in enumerate(cells[:num_features]):
            try:
                value = float(cell)
            except ValueError:
                raise ValueError(
                    "{}:{}: non-numeric feature value {!r} in column {}".format(
                        pth, line_no, cell, column + 1)) from None
            if not math.isfinite(value):
                raise ValueError(
                    "{}:{}: non-finite feature value {!r} in column {}".format(
                        pth, line_no, cell, column + 1))
            row.append(value)
        rows.append(row)

    return np.array(rows, dtype=np.float64).reshape(len(rows), num_features)


##
# Manifest
##


def imbalance_ratio(labels: IntArrayLike, num_classes: int) -> float:
    """
    Compute the count of the most represented class over the least one.

    Only the classes present in the labels are considered.

    >>> imbalance_ratio(labels=[1, 1, 1, 2, 3, 3], num_classes=3)
    3.0

    :param labels: class indices in 1..Q
    :param num_classes: Q
    :return: ratio >= 1
    """
    counts = ClassHistogram.from_labels(
        labels=labels, num_classes=num_classes).counts
    present = counts[counts > 0]
    return float(present.max()) / float(present.min())


class ManifestEntry:
    """
    Characterize a dataset of the archive.

    :ivar name: identifier of the dataset
    :vartype name: str

    :ivar n_train: number of patterns in the published train file
    :vartype n_train: int

    :ivar n_test: number of patterns in the published test file
    :vartype n_test: int

    :ivar num_classes: Q
    :vartype num_classes: int

    :ivar num_features: K
    :vartype num_features: int

    :ivar imbalance_ratio: most over least represented class count, pooled
    :vartype imbalance_ratio: float

    :ivar family:
        group of the dataset in the archive ("ordinal" or "discretised"),
        if known
    :vartype family: Optional[str]
    """

    # pylint: disable=too-many-arguments
    @icontract.require(lambda n_train: n_train > 0)
    @icontract.require(lambda n_test: n_test > 0)
    @icontract.require(lambda num_classes: num_classes >= 2)
    @icontract.require(lambda num_features: num_features >= 1)
    @icontract.require(lambda imbalance_ratio: imbalance_ratio >= 1.0)
    def __init__(self,
                 name: str,
                 n_train: int,
                 n_test: int,
                 num_classes: int,
                 num_features: int,
                 imbalance_ratio: float,
                 family: Optional[str] = None) -> None:
        """Initialize with the given values."""
        self.name = name
        self.n_train = n_train
        self.n_test = n_test
        self.num_classes = num_classes
        self.num_features = num_features
        self.imbalance_ratio = imbalance_ratio
        self.family = family

    def to_jsonable(self) -> Mapping[str, Any]:
        """Convert to a manifest record."""
        record = {
            'name': self.name,
            'n_train': self.n_train,
            'n_test': self.n_test,
            'Q': self.num_classes,
            'K': self.num_features,
            'imbalance_ratio': self.imbalance_ratio
        }  # type: Any
        if self.family is not None:
            record['family'] = self.family
        return record  # type: ignore

    @staticmethod
    def from_jsonable(record: Mapping[str, Any]) -> 'ManifestEntry':
        """Parse a manifest record."""
        return ManifestEntry(
            name=str(record['name']),
            n_train=int(record['n_train']),
            n_test=int(record['n_test']),
            num_classes=int(record['Q']),
            num_features=int(record['K']),
            imbalance_ratio=float(record['imbalance_ratio']),
            family=record.get('family', None))

    def __repr__(self) -> str:
        """Represent with all the fields."""
        return ('ManifestEntry(name={!r}, n_train={}, n_test={}, Q={}, K={}, '
                'imbalance_ratio={})').format(self.name, self.n_train,
                                              self.n_test, self.num_classes,
                                              self.num_features,
                                              self.imbalance_ratio)


def load_manifest(path: PathLike) -> List[ManifestEntry]:
    """
    Load the manifest, a JSON array of dataset records.

    :param path: to the JSON file
    :return: entries in file order
    """
    pth = pathlib.Path(str(path))
    records = json.loads(pth.read_text())
    if not isinstance(records, list):
        raise ValueError("{}: expected a JSON array of dataset records".format(
            pth))

    entries = []  # type: List[ManifestEntry]
    for index, record in enumerate(records):
        try:
            entries.append(ManifestEntry.from_jsonable(record=record))
        except (KeyError, TypeError, ValueError) as err:
            raise ValueError("{}: invalid record {}: {}".format(
                pth, index, err)) from err

    names = [entry.name for entry in entries]
    if len(set(names)) != len(names):
        raise ValueError("{}: duplicate dataset names".format(pth))

    return entries


def dump_manifest(entries: Sequence[ManifestEntry], path: PathLike) -> None:
    """Write the manifest as a JSON array."""
    pathlib.Path(str(path)).write_text(
        json.dumps([entry.to_jsonable() for entry in entries], indent=2))


def archive_manifest() -> List[ManifestEntry]:
    """Load the bundled manifest of the 45 datasets of the ordinal archive."""
    return load_manifest(
        path=pathlib.Path(__file__).parent / 'archive_manifest.json')


@icontract.require(lambda dataset: dataset.n_train is not None)
@icontract.require(lambda dataset: dataset.n_test is not None)
def describe(dataset: Dataset) -> ManifestEntry:
    """
    Compute the manifest entry of a loaded dataset.

    :param dataset: loaded with its original train/test sizes
    :return: entry describing the dataset
    """
    assert dataset.n_train is not None and dataset.n_test is not None

    return ManifestEntry(
        name=dataset.name,
        n_train=dataset.n_train,
        n_test=dataset.n_test,
        num_classes=dataset.num_classes,
        num_features=dataset.num_features,
        imbalance_ratio=imbalance_ratio(
            labels=dataset.labels, num_classes=dataset.num_classes))


def validate_against_manifest(dataset: Dataset, entry: ManifestEntry) -> None:
    """
    Check that the loaded dataset matches its manifest entry.

    The imbalance ratio is compared to 1e-3, the precision of the archive
    table.

    :param dataset: loaded dataset
    :param entry: expected characteristics
    :raise ValueError: listing every mismatching field
    """
    actual = describe(dataset=dataset)

    mismatches = []  # type: List[str]
    for field, got, expected in [
        ('n_train', actual.n_train, entry.n_train),
        ('n_test', actual.n_test, entry.n_test),
        ('Q', actual.num_classes, entry.num_classes),
        ('K', actual.num_features, entry.num_features),
    ]:
        if got != expected:
            mismatches.append("{} is {}, the manifest says {}".format(
                field, got, expected))

    if abs(actual.imbalance_ratio - entry.imbalance_ratio) > 1e-3:
        mismatches.append("imbalance_ratio is {:.3f}, the manifest says {}".
                          format(actual.imbalance_ratio,
                                 entry.imbalance_ratio))

    if mismatches:
        raise ValueError("Dataset {} does not match its manifest entry: {}".
                         format(dataset.name, '; '.join(mismatches)))


##
# Partitions and folds
##


@icontract.require(lambda seed: seed >= 0)
@icontract.ensure(lambda result: 0 <= result < 2**32)
def derive_seed(name: str, seed: int, purpose: str) -> int:
    """
    Derive a 32-bit seed from the dataset name, the run seed and the purpose.

    >>> derive_seed('ERA', 0, 'partition') == derive_seed('ERA', 0, 'partition')
    True
    >>> derive_seed('ERA', 0, 'partition') == derive_seed('ERA', 0, 'cv')
    False

    :param name: identifier of the dataset
    :param seed: run seed
    :param purpose: what the randomness is used for
    :return: non-negative integer seed
    """
    digest = hashlib.md5('{}/{}/{}'.format(name, purpose, seed).encode(
        'utf-8')).digest()
    return int.from_bytes(digest[:4], byteorder='big')


@icontract.invariant(lambda self: self.train_indices.size + self.test_indices.
                     size == self.num_patterns)
@icontract.invariant(lambda self: np.intersect1d(
    self.train_indices, self.test_indices).size == 0)
class PartitionPlan:
    """
    Split the pooled patterns of a dataset into train and test.

    :ivar seed: run seed the plan was drawn with
    :vartype seed: int

    :ivar train_indices: sorted read-only indices of the training patterns
    :vartype train_indices: numpy.ndarray

    :ivar test_indices: sorted read-only indices of the test patterns
    :vartype test_indices: numpy.ndarray

    :ivar num_patterns: N, the indices cover 0..N-1
    :vartype num_patterns: int

    :ivar warnings:
        notes on classes with a single pooled pattern and on classes whose
        train count is off their proportional share by more than one
    :vartype warnings: Tuple[str, ...]
    """

    def __init__(self,
                 seed: int,
                 train_indices: IntArrayLike,
                 test_indices: IntArrayLike,
                 num_patterns: int,
                 warnings: Sequence[str] = ()) -> None:
        """Initialize with the given values; the indices are sorted."""
        self.seed = seed

        train = np.sort(np.array(train_indices, dtype=np.int64))
        train.setflags(write=False)
        self.train_indices = train

        test = np.sort(np.array(test_indices, dtype=np.int64))
        test.setflags(write=False)
        self.test_indices = test

        self.num_patterns = num_patterns
        self.warnings = tuple(warnings)

    def md5_hexdigest(self) -> str:
        """Hash the train and test indices to compare plans across runs."""
        hsh = hashlib.md5()
        hsh.update(self.train_indices.astype('<i8').tobytes())
        hsh.update(b'|')
        hsh.update(self.test_indices.astype('<i8').tobytes())
        return hsh.hexdigest()


# pylint: disable=too-many-locals
@icontract.require(lambda dataset, n_train: 0 < n_train < dataset.num_patterns)
@icontract.require(lambda seed: seed >= 0)
@icontract.ensure(lambda result, n_train: result.train_indices.size == n_train)
def make_partition(dataset: Dataset, n_train: int, seed: int) -> PartitionPlan:
    """
    Draw a stratified train/test partition of the pooled dataset.

    Every class contributes its proportional share of ``n_train``, rounded
    by the largest remainder (ties to the lowest class index), so that the
    train count of a class is within one pattern of proportional. A class
    with a single pooled pattern is always put in train and a warning is
    recorded. The pattern it takes comes from another class, which can then
    miss the one-pattern bound; that is recorded as a warning, too. The draw
    is a pure function of the dataset name, the labels, ``n_train`` and the
    seed.

    :param dataset: pooled dataset
    :param n_train: number of training patterns
    :param seed: run seed
    :return: partition plan
    :raise ValueError: if a class with at least two patterns gets none in train
    """
    counts = dataset.histogram().counts
    num_patterns = dataset.num_patterns

    exact = counts * float(n_train) / float(num_patterns)
    quota = np.floor(exact).astype(np.int64)
    remainder = exact - quota

    missing = n_train - int(quota.sum())
    # lexsort sorts by the last key first: remainder descending, then index
    order = np.lexsort((np.arange(counts.size), -remainder))
    quota[order[:missing]] += 1

    warnings = []  # type: List[str]
    for index in np.nonzero((counts == 1) & (quota == 0))[0]:
        donors = np.nonzero(quota >= 2)[0]
        if donors.size == 0:
            raise ValueError(
                "Dataset {}: n_train={} cannot hold the single pattern of "
                "class {}".format(dataset.name, n_train, index + 1))

        # take from the class rounded up the most, lowest index on ties
        excess = quota[donors] - exact[donors]
        donor = donors[int(np.argmax(excess))]
        quota[donor] -= 1
        quota[index] = 1

        message = ("Dataset {}: class {} has a single pooled pattern, "
                   "assigned to train".format(dataset.name, index + 1))
        warnings.append(message)
        LOGGER.warning(message)

    for index in np.nonzero((counts >= 2) & (quota == 0))[0]:
        raise ValueError(
            "Dataset {}: n_train={} leaves class {} ({} pooled patterns) "
            "without training patterns".format(dataset.name, n_train,
                                               index + 1, counts[index]))

    # only the donors of singleton classes can leave the one-pattern bound
    for index in np.nonzero(np.abs(quota - exact) > 1.0 + 1e-9)[0]:
        message = ("Dataset {}: class {} gets {} training pattern(s), "
                   "{:.3f} would be proportional".format(
                       dataset.name, index + 1, quota[index], exact[index]))
        warnings.append(message)
        LOGGER.warning(message)

    ##
    # Draw the training patterns of every class
    ##

    rng = np.random.default_rng(
        derive_seed(name=dataset.name, seed=seed, purpose='partition'))

    train_parts = []  # type: List[np.ndarray]
    for index in range(counts.size):
        members = np.nonzero(dataset.labels == index + 1)[0]
        if members.size == 0:
            continue
        train_parts.append(rng.permutation(members)[:quota[index]])

    train_indices = np.sort(np.concatenate(train_parts))
    test_mask = np.ones(num_patterns, dtype=bool)
    test_mask[train_indices] = False

    return PartitionPlan(
        seed=seed,
        train_indices=train_indices,
        test_indices=np.nonzero(test_mask)[0],
        num_patterns=num_patterns,
        warnings=warnings)


@icontract.require(lambda k: k >= 2)
@icontract.require(lambda indices, labels: len(indices) == len(labels))
@icontract.require(lambda seed: 0 <= seed < 2**32)
@icontract.ensure(lambda result, k: len(result) == k)
@icontract.ensure(lambda result: max(fold.size for fold in result) - min(
    fold.size for fold in result) <= 1)
def stratified_kfold(indices: IntArrayLike, labels: IntArrayLike, k: int,
                     seed: int) -> List[np.ndarray]:
    """
    Split the indices into k disjoint stratified folds.

    The folds are the test sides of scikit-learn's shuffled
    ``StratifiedKFold``: fold sizes differ by at most one and so do the counts
    of any class across the folds.

    >>> folds = stratified_kfold(
    ...     indices=list(range(10)), labels=[1] * 5 + [2] * 5, k=5, seed=0)
    >>> [len(fold) for fold in folds]
    [2, 2, 2, 2, 2]

    :param indices: pattern indices to split
    :param labels: class of every index, aligned with ``indices``
    :param k: number of folds
    :param seed: seed of the shuffling
    :return: k sorted index arrays
    :raise ValueError:
        if there are fewer indices than folds or no class has k patterns
    """
    index_array = np.asarray(indices, dtype=np.int64)
    label_array = np.asarray(labels, dtype=np.int64)

    if k > index_array.size:
        raise ValueError("Cannot split {} indices into {} folds".format(
            index_array.size, k))

    splitter = StratifiedKFold(n_splits=k, shuffle=True, random_state=seed)

    return [
        np.sort(index_array[validation]) for _, validation in splitter.split(
            np.zeros((index_array.size, 1)), label_array)
    ]
