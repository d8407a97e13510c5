#!/usr/bin/env python
"""Run the seeded comparison of splitting criteria and aggregate the results."""

import concurrent.futures
import csv
import functools
import io
import logging
import pathlib
import resource
import sys
import time
from typing import (Any, Callable, Dict, List, Mapping, Optional, Sequence,
                    Tuple, TypeVar, Union)

import icontract
import numpy as np
import prettytable
from typing_extensions import Final

from ordtree.criteria import DEFAULT_ALPHA, Criterion, CriterionSpec
from ordtree.dataset import (CsvSchema, Dataset, ManifestEntry, PartitionPlan,
                             derive_seed, describe, load_named, make_partition,
                             stratified_kfold, validate_against_manifest)
from ordtree.metrics import ConfusionMatrix, EvalReport, evaluate, mae
from ordtree.tree import DEFAULT_MIN_SAMPLES_SPLIT, GrowConfig, grow

LOGGER = logging.getLogger(__name__)

DEFAULT_SEEDS = tuple(range(20))  # type: Final
DEFAULT_DEPTH_GRID = (3, 5, 8, 16)  # type: Final
DEFAULT_CV_FOLDS = 5  # type: Final

#: Datasets with at least this many classes form the "many classes" scope.
MANY_CLASSES = 6  # type: Final

SCOPE_ALL = 'all'  # type: Final
SCOPE_MANY = 'Q>=6'  # type: Final
SCOPE_FEW = 'Q<6'  # type: Final
SCOPES = (SCOPE_ALL, SCOPE_MANY, SCOPE_FEW)  # type: Final

METRICS = ('mae', 'qwk', 'rps')  # type: Final
HIGHER_IS_BETTER = {'mae': False, 'qwk': True, 'rps': False}  # type: Final

RUNS_HEADER = ('dataset', 'criterion', 'seed', 'chosen_depth', 'mae', 'qwk',
               'rps', 'wall_time_s')  # type: Final
SUMMARY_HEADER = ('scope', 'criterion', 'metric', 'mean', 'std')  # type: Final
PARTITIONS_HEADER = ('dataset', 'seed', 'n_train', 'n_test',
                     'md5')  # type: Final
ERRORS_HEADER = ('dataset', 'criterion', 'seed', 'error')  # type: Final

T = TypeVar('T')  # pylint: disable=invalid-name


def timer(func: Callable[..., T], *args: Any, **kwargs: Any) -> Tuple[T, float]:
    """Return the result of the call and the wall time it took in seconds."""
    start = time.perf_counter()
    result = func(*args, **kwargs)
    end = time.perf_counter()
    return result, end - start


def peak_memory_mib() -> float:
    """Return the peak resident memory of this process in MiB."""
    peak = resource.getrusage(resource.RUSAGE_SELF).ru_maxrss
    # bytes on macOS, kilobytes elsewhere
    if sys.platform == 'darwin':
        return peak / 1024.0 / 1024.0
    return peak / 1024.0


def criterion_label(spec: CriterionSpec) -> str:
    """
    Name the criterion in the result files.

    >>> criterion_label(CriterionSpec(kind=Criterion.OGINI))
    'ogini'
    >>> criterion_label(CriterionSpec(kind=Criterion.WIG, alpha=2.0))
    'wig-alpha2.0'
    """
    if spec.kind == Criterion.WIG and spec.alpha != DEFAULT_ALPHA:
        return '{}-alpha{}'.format(spec.kind.value, spec.alpha)
    return spec.kind.value


class ExperimentConfig:
    """
    Configure a sweep over datasets, criteria and seeds.

    :ivar datasets: names resolved in ``data_dir``, or paths to ``<dir>/<name>``
    :vartype datasets: List[str]

    :ivar criteria: splitting criteria to compare
    :vartype criteria: List[CriterionSpec]

    :ivar seeds: seeds of the train/test reshuffles
    :vartype seeds: List[int]

    :ivar depth_grid: candidate maximum depths, strictly increasing
    :vartype depth_grid: List[int]

    :ivar cv_folds: number of stratified folds of the depth selection
    :vartype cv_folds: int

    :ivar output_dir: directory of the result files
    :vartype output_dir: pathlib.Path

    :ivar data_dir: directory of the dataset files
    :vartype data_dir: pathlib.Path

    :ivar manifest:
        expected characteristics of the datasets; the train size of a dataset
        is taken from its entry and the loaded files are validated against it
    :vartype manifest: Optional[List[ManifestEntry]]

    :ivar workers: number of grid cells evaluated concurrently
    :vartype workers: int

    :ivar fail_fast: if set, the first failing cell aborts the sweep
    :vartype fail_fast: bool

    :ivar schema: layout of the dataset files
    :vartype schema: Optional[CsvSchema]

    :ivar min_samples_split: smallest node that is still split
    :vartype min_samples_split: int
    """

    # pylint: disable=too-many-arguments, too-many-instance-attributes
    @icontract.require(lambda datasets: len(datasets) > 0)
    @icontract.require(lambda criteria: len(criteria) > 0)
    @icontract.require(
        lambda criteria: len(set(criterion_label(spec) for spec in criteria))
        == len(criteria), "criteria must be distinct")
    @icontract.require(lambda seeds: len(seeds) > 0)
    @icontract.require(lambda seeds: len(set(seeds)) == len(seeds),
                       "seeds must be distinct")
    @icontract.require(lambda seeds: all(seed >= 0 for seed in seeds))
    @icontract.require(lambda depth_grid: len(depth_grid) > 0)
    @icontract.require(
        lambda depth_grid: all(depth_grid[i] < depth_grid[i + 1]
                               for i in range(len(depth_grid) - 1)),
        "depth grid must be strictly increasing")
    @icontract.require(lambda depth_grid: depth_grid[0] >= 1)
    @icontract.require(lambda cv_folds: cv_folds >= 2)
    @icontract.require(lambda workers: workers >= 1)
    def __init__(self,
                 datasets: Sequence[str],
                 criteria: Sequence[CriterionSpec],
                 output_dir: Union[str, pathlib.Path],
                 data_dir: Union[str, pathlib.Path] = '.',
                 seeds: Sequence[int] = DEFAULT_SEEDS,
                 depth_grid: Sequence[int] = DEFAULT_DEPTH_GRID,
                 cv_folds: int = DEFAULT_CV_FOLDS,
                 manifest: Optional[Sequence[ManifestEntry]] = None,
                 workers: int = 1,
                 fail_fast: bool = False,
                 schema: Optional[CsvSchema] = None,
                 min_samples_split: int = DEFAULT_MIN_SAMPLES_SPLIT) -> None:
        """Initialize with the given values."""
        self.datasets = list(datasets)
        self.criteria = list(criteria)
        self.output_dir = pathlib.Path(str(output_dir))
        self.data_dir = pathlib.Path(str(data_dir))
        self.seeds = list(seeds)
        self.depth_grid = list(depth_grid)
        self.cv_folds = cv_folds
        self.manifest = None if manifest is None else list(manifest)
        self.workers = workers
        self.fail_fast = fail_fast
        self.schema = schema
        self.min_samples_split = min_samples_split

    def manifest_entry(self, name: str) -> Optional[ManifestEntry]:
        """Find the manifest entry of the dataset, if any."""
        for entry in self.manifest or []:
            if entry.name == name:
                return entry
        return None


class RunRecord:
    """
    Represent the evaluation of one (dataset, criterion, seed) cell.

    Only the first eight fields are stored in ``runs.csv``; the others are
    filled in by :py:func:`run_single`.

    :ivar dataset: name of the dataset
    :vartype dataset: str

    :ivar criterion: label of the splitting criterion
    :vartype criterion: str

    :ivar seed: seed of the train/test reshuffle
    :vartype seed: int

    :ivar chosen_depth: maximum depth selected by cross-validation
    :vartype chosen_depth: int

    :ivar mae: mean absolute error on the test partition
    :vartype mae: float

    :ivar qwk: quadratic weighted kappa on the test partition
    :vartype qwk: float

    :ivar rps: ranked probability score on the test partition
    :vartype rps: float

    :ivar wall_time_s: wall time of the whole cell in seconds
    :vartype wall_time_s: float

    :ivar confusion_path: path of the confusion CSV relative to the output dir
    :vartype confusion_path: Optional[str]

    :ivar confusion: confusion matrix on the test partition
    :vartype confusion: Optional[ConfusionMatrix]

    :ivar degenerate_qwk: True if QWK was undefined and reported as 0
    :vartype degenerate_qwk: bool

    :ivar partition_digest: MD5 of the train/test partition
    :vartype partition_digest: Optional[str]

    :ivar n_train: number of training patterns
    :vartype n_train: Optional[int]

    :ivar n_test: number of test patterns
    :vartype n_test: Optional[int]

    :ivar peak_memory_mib: peak resident memory of the worker after the cell
    :vartype peak_memory_mib: Optional[float]
    """

    # pylint: disable=too-many-arguments, too-many-instance-attributes
    # pylint: disable=too-many-locals
    def __init__(self,
                 dataset: str,
                 criterion: str,
                 seed: int,
                 chosen_depth: int,
                 mae: float,  # pylint: disable=redefined-outer-name
                 qwk: float,
                 rps: float,
                 wall_time_s: float,
                 confusion_path: Optional[str] = None,
                 confusion: Optional[ConfusionMatrix] = None,
                 degenerate_qwk: bool = False,
                 partition_digest: Optional[str] = None,
                 n_train: Optional[int] = None,
                 n_test: Optional[int] = None,
                 peak_memory_mib: Optional[float] = None) -> None:
        """Initialize with the given values."""
        self.dataset = dataset
        self.criterion = criterion
        self.seed = seed
        self.chosen_depth = chosen_depth
        self.mae = mae
        self.qwk = qwk
        self.rps = rps
        self.wall_time_s = wall_time_s
        self.confusion_path = confusion_path
        self.confusion = confusion
        self.degenerate_qwk = degenerate_qwk
        self.partition_digest = partition_digest
        self.n_train = n_train
        self.n_test = n_test
        self.peak_memory_mib = peak_memory_mib

    def metric(self, name: str) -> float:
        """Return the value of the metric given by its name."""
        return float(getattr(self, name))

    def to_row(self) -> List[str]:
        """Convert to a row of ``runs.csv``; floats are written exactly."""
        return [
            self.dataset, self.criterion,
            str(self.seed),
            str(self.chosen_depth),
            repr(self.mae),
            repr(self.qwk),
            repr(self.rps),
            repr(self.wall_time_s)
        ]

    @staticmethod
    def from_row(row: Mapping[str, str]) -> 'RunRecord':
        """Parse a row of ``runs.csv``."""
        return RunRecord(
            dataset=row['dataset'],
            criterion=row['criterion'],
            seed=int(row['seed']),
            chosen_depth=int(row['chosen_depth']),
            mae=float(row['mae']),
            qwk=float(row['qwk']),
            rps=float(row['rps']),
            wall_time_s=float(row['wall_time_s']))

    def __repr__(self) -> str:
        """Represent with the fields stored in ``runs.csv``."""
        return 'RunRecord({})'.format(', '.join(
            '{}={}'.format(key, value)
            for key, value in zip(RUNS_HEADER, self.to_row())))


class SummaryRow:
    """
    Aggregate a metric of a criterion over the runs of a scope.

    :ivar scope: "all", "Q>=6" or "Q<6"
    :vartype scope: str

    :ivar criterion: label of the splitting criterion
    :vartype criterion: str

    :ivar metric: "mae", "qwk" or "rps"
    :vartype metric: str

    :ivar mean: arithmetic mean over the runs
    :vartype mean: float

    :ivar std: population standard deviation over the runs
    :vartype std: float
    """

    # pylint: disable=too-many-arguments
    def __init__(self, scope: str, criterion: str, metric: str, mean: float,
                 std: float) -> None:
        """Initialize with the given values."""
        self.scope = scope
        self.criterion = criterion
        self.metric = metric
        self.mean = mean
        self.std = std

    def to_row(self) -> List[str]:
        """Convert to a row of ``summary.csv``."""
        return [
            self.scope, self.criterion, self.metric,
            repr(self.mean),
            repr(self.std)
        ]

    def __repr__(self) -> str:
        """Represent with all the fields."""
        return 'SummaryRow({})'.format(', '.join(
            '{}={}'.format(key, value)
            for key, value in zip(SUMMARY_HEADER, self.to_row())))


##
# Protocol
##


# pylint: disable=too-many-arguments,too-many-locals
@icontract.require(lambda features, labels: features.shape[0] == len(labels))
@icontract.require(lambda depth_grid: len(depth_grid) > 0)
@icontract.require(lambda cv_folds: cv_folds >= 2)
@icontract.ensure(lambda result, depth_grid: result in depth_grid)
def select_depth(features: np.ndarray,
                 labels: np.ndarray,
                 num_classes: int,
                 criterion: CriterionSpec,
                 depth_grid: Sequence[int],
                 cv_folds: int,
                 seed: int,
                 min_samples_split: int = DEFAULT_MIN_SAMPLES_SPLIT) -> int:
    """
    Select the maximum depth by stratified cross-validation on MAE.

    The folds are drawn once and shared by all the depths. A tree is grown
    once per fold at the largest depth of the grid and truncated to the
    smaller ones, which is equivalent to growing them anew.

    :param features: training patterns
    :param labels: training classes in 1..Q
    :param num_classes: Q
    :param criterion: splitting criterion
    :param depth_grid: candidate depths
    :param cv_folds: number of folds
    :param seed: seed of the fold assignment
    :param min_samples_split: smallest node that is still split
    :return: depth of the grid with the smallest mean validation MAE,
        the smallest depth on ties
    :raise ValueError: if a fold leaves no training patterns
    """
    grid = sorted(depth_grid)
    if len(grid) == 1:
        return grid[0]

    label_array = np.asarray(labels, dtype=np.int64)
    indices = np.arange(label_array.size)

    folds = stratified_kfold(
        indices=indices, labels=label_array, k=cv_folds, seed=seed)

    fold_maes = np.zeros((len(folds), len(grid)), dtype=np.float64)

    for fold_index, validation in enumerate(folds):
        training = np.setdiff1d(indices, validation, assume_unique=True)
        if training.size == 0:
            raise ValueError(
                "Fold {} of {} leaves no training patterns".format(
                    fold_index + 1, len(folds)))

        deepest = grow(
            features=features[training],
            labels=label_array[training],
            num_classes=num_classes,
            config=GrowConfig(
                criterion=criterion,
                max_depth=grid[-1],
                min_samples_split=min_samples_split))

        for depth_index, depth in enumerate(grid):
            prediction = deepest.truncated(max_depth=depth).predict_many(
                features[validation])
            fold_maes[fold_index, depth_index] = mae(
                y_true=label_array[validation], y_pred=prediction)

    mean_maes = fold_maes.mean(axis=0)
    for depth, mean_mae in zip(grid, mean_maes):
        LOGGER.debug("CV with %s at depth %d: mean MAE %.6f",
                     criterion.kind.value, depth, mean_mae)

    # argmin returns the first minimum, i.e. the smallest depth
    return grid[int(np.argmin(mean_maes))]


def confusion_relative_path(dataset: str, criterion: str, seed: int) -> str:
    """Return the path of the cell's confusion CSV in the output directory."""
    return 'confusion/{}_{}_{}.csv'.format(dataset, criterion, seed)


def _evaluate_cell(dataset: Dataset, criterion: CriterionSpec, seed: int,
                   config: ExperimentConfig,
                   n_train: int) -> Tuple[int, EvalReport, PartitionPlan]:
    plan = make_partition(dataset=dataset, n_train=n_train, seed=seed)

    train_features = dataset.features[plan.train_indices]
    train_labels = dataset.labels[plan.train_indices]
    test_features = dataset.features[plan.test_indices]
    test_labels = dataset.labels[plan.test_indices]

    depth = select_depth(
        features=train_features,
        labels=train_labels,
        num_classes=dataset.num_classes,
        criterion=criterion,
        depth_grid=config.depth_grid,
        cv_folds=config.cv_folds,
        seed=derive_seed(name=dataset.name, seed=seed, purpose='cv'),
        min_samples_split=config.min_samples_split)

    tree = grow(
        features=train_features,
        labels=train_labels,
        num_classes=dataset.num_classes,
        config=GrowConfig(
            criterion=criterion,
            max_depth=depth,
            min_samples_split=config.min_samples_split))

    report = evaluate(
        y_true=test_labels,
        y_pred=tree.predict_many(test_features),
        probas=tree.predict_proba_many(test_features),
        num_classes=dataset.num_classes)

    return depth, report, plan


def _run_single_unguarded(dataset: Dataset, criterion: CriterionSpec,
                          seed: int, config: ExperimentConfig,
                          n_train: int) -> RunRecord:
    (depth, report, plan), wall_time = timer(
        _evaluate_cell,
        dataset=dataset,
        criterion=criterion,
        seed=seed,
        config=config,
        n_train=n_train)

    label = criterion_label(spec=criterion)
    record = RunRecord(
        dataset=dataset.name,
        criterion=label,
        seed=seed,
        chosen_depth=depth,
        mae=report.mae,
        qwk=report.qwk,
        rps=report.rps,
        wall_time_s=wall_time,
        confusion_path=confusion_relative_path(
            dataset=dataset.name, criterion=label, seed=seed),
        confusion=report.confusion,
        degenerate_qwk=report.degenerate_qwk,
        partition_digest=plan.md5_hexdigest(),
        n_train=int(plan.train_indices.size),
        n_test=int(plan.test_indices.size),
        peak_memory_mib=peak_memory_mib())

    LOGGER.info(
        "Run %s/%s/seed %d: depth %d, MAE %.4f, QWK %.4f, RPS %.4f "
        "in %.2f s (peak memory %.1f MiB)", record.dataset, record.criterion,
        seed, depth, record.mae, record.qwk, record.rps, wall_time,
        record.peak_memory_mib)

    return record


def run_single(dataset: Dataset,
               criterion: CriterionSpec,
               seed: int,
               config: ExperimentConfig,
               n_train: Optional[int] = None) -> RunRecord:
    """
    Evaluate one criterion on one seeded reshuffle of the dataset.

    The partition depends only on the dataset and the seed so that all the
    criteria see the same train/test split.

    :param dataset: pooled dataset
    :param criterion: splitting criterion
    :param seed: seed of the reshuffle
    :param config: protocol settings
    :param n_train:
        number of training patterns; the manifest entry or the size of the
        published train file is used if None
    :return: record of the run
    :raise RuntimeError:
        naming the dataset, the criterion and the seed, chained to the failure
    """
    try:
        if n_train is None:
            entry = config.manifest_entry(name=dataset.name)
            n_train = entry.n_train if entry is not None else dataset.n_train

        if n_train is None:
            raise ValueError(
                "The train size of dataset {} is unknown".format(dataset.name))

        return _run_single_unguarded(
            dataset=dataset,
            criterion=criterion,
            seed=seed,
            config=config,
            n_train=n_train)
    except Exception as err:  # pylint: disable=broad-except
        raise RuntimeError(
            "Run failed on dataset {}, criterion {}, seed {}: {}".format(
                dataset.name, criterion_label(spec=criterion), seed,
                err)) from err


##
# Aggregation
##


def _scope_of(num_classes: int) -> str:
    return SCOPE_MANY if num_classes >= MANY_CLASSES else SCOPE_FEW


def summarize(records: Sequence[RunRecord],
              manifest: Optional[Sequence[ManifestEntry]] = None
              ) -> List[SummaryRow]:
    """
    Aggregate the runs per scope, criterion and metric.

    The scope "all" covers every run. The scopes "Q>=6" and "Q<6" group the
    runs by the number of classes of their dataset as given by the manifest
    and are only produced when a manifest is given. Empty scopes are omitted.

    :param records: runs to aggregate
    :param manifest: characteristics of the datasets
    :return: rows ordered by scope, criterion (first appearance) and metric
    :raise ValueError: if a dataset of the runs is missing from the manifest
    """
    criteria = []  # type: List[str]
    for record in records:
        if record.criterion not in criteria:
            criteria.append(record.criterion)

    scoped = {SCOPE_ALL: list(records)}  # type: Dict[str, List[RunRecord]]

    if manifest is not None:
        num_classes = {entry.name: entry.num_classes for entry in manifest}
        scoped[SCOPE_MANY] = []
        scoped[SCOPE_FEW] = []
        for record in records:
            if record.dataset not in num_classes:
                raise ValueError(
                    "Dataset {} of the runs is missing from the manifest".
                    format(record.dataset))
            scoped[_scope_of(num_classes[record.dataset])].append(record)

    rows = []  # type: List[SummaryRow]
    for scope in SCOPES:
        if scope not in scoped:
            continue

        for criterion in criteria:
            selected = [
                record for record in scoped[scope]
                if record.criterion == criterion
            ]
            if not selected:
                continue

            for metric in METRICS:
                values = np.array([record.metric(metric) for record in selected])
                rows.append(
                    SummaryRow(
                        scope=scope,
                        criterion=criterion,
                        metric=metric,
                        mean=float(np.mean(values)),
                        std=float(np.std(values))))

    return rows


##
# Result files
##


def _write_csv(path: pathlib.Path, header: Sequence[str],
               rows: Sequence[Sequence[Any]]) -> None:
    with path.open('wt', newline='') as fid:
        writer = csv.writer(fid)
        writer.writerow(header)
        writer.writerows(rows)


def write_runs(records: Sequence[RunRecord], path: pathlib.Path) -> None:
    """Write the records to ``runs.csv``."""
    _write_csv(
        path=path,
        header=RUNS_HEADER,
        rows=[record.to_row() for record in records])


def read_runs(path: Union[str, pathlib.Path]) -> List[RunRecord]:
    """
    Read the records from ``runs.csv``.

    :param path: to the runs file
    :return: records in file order
    :raise ValueError: if the header is unexpected or there are no runs
    """
    pth = pathlib.Path(str(path))
    with pth.open('rt', newline='') as fid:
        reader = csv.DictReader(fid)
        if reader.fieldnames is None or tuple(
                reader.fieldnames) != RUNS_HEADER:
            raise ValueError("{}: expected the header {}, got {}".format(
                pth, ','.join(RUNS_HEADER), reader.fieldnames))

        records = []  # type: List[RunRecord]
        for row in reader:
            try:
                records.append(RunRecord.from_row(row=row))
            except (TypeError, ValueError) as err:
                raise ValueError("{}:{}: invalid run: {}".format(
                    pth, reader.line_num, err)) from err

    if not records:
        raise ValueError("{}: the runs file is empty".format(pth))

    return records


def write_summary(rows: Sequence[SummaryRow], path: pathlib.Path) -> None:
    """Write the aggregates to ``summary.csv``."""
    _write_csv(
        path=path, header=SUMMARY_HEADER, rows=[row.to_row() for row in rows])


class CellError:
    """
    Represent a grid cell that failed.

    :ivar dataset: name of the dataset
    :vartype dataset: str

    :ivar criterion: label of the splitting criterion
    :vartype criterion: str

    :ivar seed: seed of the reshuffle
    :vartype seed: int

    :ivar error: message of the failure
    :vartype error: str
    """

    def __init__(self, dataset: str, criterion: str, seed: int,
                 error: str) -> None:
        """Initialize with the given values."""
        self.dataset = dataset
        self.criterion = criterion
        self.seed = seed
        self.error = error


class ExperimentResult:
    """
    Collect the outcome of a sweep.

    :ivar records: successful runs in grid order
    :vartype records: List[RunRecord]

    :ivar summary: aggregates of the runs
    :vartype summary: List[SummaryRow]

    :ivar errors: failed cells in grid order
    :vartype errors: List[CellError]
    """

    def __init__(self, records: List[RunRecord], summary: List[SummaryRow],
                 errors: List[CellError]) -> None:
        """Initialize with the given values."""
        self.records = records
        self.summary = summary
        self.errors = errors


def _resolve_dataset(config: ExperimentConfig, entry: str) -> Dataset:
    """Load the dataset given either by its name or by ``<dir>/<name>``."""
    pth = pathlib.Path(entry)
    if pth.parent == pathlib.Path('.'):
        return load_named(
            data_dir=config.data_dir, name=entry, schema=config.schema)

    data_dir = pth.parent if pth.is_absolute() else config.data_dir / pth.parent
    return load_named(data_dir=data_dir, name=pth.name, schema=config.schema)


# pylint: disable=too-many-branches,too-many-statements
def run_experiment(config: ExperimentConfig) -> ExperimentResult:
    """
    Evaluate every (dataset, criterion, seed) cell of the grid.

    The cells are independent and run concurrently on ``config.workers``
    processes. Their results are collected in grid order and written by this
    function alone to ``runs.csv``, ``summary.csv``, ``partitions.csv``,
    ``errors.csv`` and ``confusion/`` in the output directory, so that the
    files do not depend on the number of workers.

    :param config: sweep settings
    :return: runs, aggregates and failures
    :raise RuntimeError: on the first failure if ``config.fail_fast`` is set
    """
    config.output_dir.mkdir(parents=True, exist_ok=True)
    (config.output_dir / 'confusion').mkdir(exist_ok=True)

    labels = [criterion_label(spec=spec) for spec in config.criteria]

    ##
    # Load the datasets
    ##

    datasets = []  # type: List[Dataset]
    errors = []  # type: List[CellError]
    described = []  # type: List[ManifestEntry]

    for name in config.datasets:
        try:
            dataset = _resolve_dataset(config=config, entry=name)
            entry = config.manifest_entry(name=dataset.name)
            if entry is not None:
                validate_against_manifest(dataset=dataset, entry=entry)
                described.append(entry)
            else:
                described.append(describe(dataset=dataset))
        except Exception as err:  # pylint: disable=broad-except
            if config.fail_fast:
                raise RuntimeError("Failed to load dataset {}: {}".format(
                    name, err)) from err

            LOGGER.error("Failed to load dataset %s: %s", name, err)
            errors.extend(
                CellError(
                    dataset=name,
                    criterion=label,
                    seed=seed,
                    error="Failed to load the dataset: {}".format(err))
                for label in labels for seed in config.seeds)
            continue

        datasets.append(dataset)

    ##
    # Evaluate the grid
    ##

    cells = [(dataset, criterion, seed) for dataset in datasets
             for criterion in config.criteria for seed in config.seeds]

    LOGGER.info("Running %d cells (%d datasets x %d criteria x %d seeds) "
                "on %d worker(s)", len(cells), len(datasets),
                len(config.criteria), len(config.seeds), config.workers)

    records = []  # type: List[RunRecord]

    def collect(cell: Tuple[Dataset, CriterionSpec, int],
                outcome: Callable[[], RunRecord]) -> None:
        try:
            records.append(outcome())
        except Exception as err:  # pylint: disable=broad-except
            dataset, criterion, seed = cell
            if config.fail_fast:
                raise

            LOGGER.error("%s", err)
            errors.append(
                CellError(
                    dataset=dataset.name,
                    criterion=criterion_label(spec=criterion),
                    seed=seed,
                    error=str(err)))

    if config.workers == 1:
        for cell in cells:
            dataset, criterion, seed = cell
            collect(
                cell=cell,
                outcome=functools.partial(
                    run_single,
                    dataset=dataset,
                    criterion=criterion,
                    seed=seed,
                    config=config))
    else:
        with concurrent.futures.ProcessPoolExecutor(
                max_workers=config.workers) as executor:
            futures = [
                executor.submit(
                    run_single,
                    dataset=dataset,
                    criterion=criterion,
                    seed=seed,
                    config=config) for dataset, criterion, seed in cells
            ]

            try:
                for cell, future in zip(cells, futures):
                    collect(cell=cell, outcome=future.result)
            except Exception:
                for future in futures:
                    future.cancel()
                raise

    ##
    # Write the results
    ##

    write_runs(records=records, path=config.output_dir / 'runs.csv')

    for record in records:
        if record.confusion is not None and record.confusion_path is not None:
            record.confusion.write_csv(
                path=config.output_dir / record.confusion_path)

    partitions = {}  # type: Dict[Tuple[str, int], List[str]]
    for record in records:
        key = (record.dataset, record.seed)
        if key not in partitions:
            partitions[key] = [
                record.dataset,
                str(record.seed),
                str(record.n_train),
                str(record.n_test), record.partition_digest or ''
            ]
    _write_csv(
        path=config.output_dir / 'partitions.csv',
        header=PARTITIONS_HEADER,
        rows=list(partitions.values()))

    _write_csv(
        path=config.output_dir / 'errors.csv',
        header=ERRORS_HEADER,
        rows=[[error.dataset, error.criterion,
               str(error.seed), error.error] for error in errors])

    summary = summarize(records=records, manifest=described)
    write_summary(rows=summary, path=config.output_dir / 'summary.csv')

    LOGGER.info("Finished %d run(s) with %d failure(s); results in %s",
                len(records), len(errors), config.output_dir)

    return ExperimentResult(records=records, summary=summary, errors=errors)


##
# Report
##

#: Marker of the best value of a column.
BEST_MARK = '**'  # type: Final

#: Marker of the second-best value of a column.
SECOND_MARK = '*'  # type: Final


class Report:
    """
    Tabulate Mean_STD per criterion and metric with best and second-best marks.

    :ivar summary: aggregates the report is built from
    :vartype summary: List[SummaryRow]

    :ivar marks:
        "best", "second" or "" for every (scope, criterion, metric)
    :vartype marks: Dict[Tuple[str, str, str], str]
    """

    def __init__(self, summary: Sequence[SummaryRow]) -> None:
        """Initialize and rank the criteria in every scope and metric."""
        self.summary = list(summary)
        self.marks = {}  # type: Dict[Tuple[str, str, str], str]

        for scope in SCOPES:
            for metric in METRICS:
                column = [
                    row for row in self.summary
                    if row.scope == scope and row.metric == metric
                ]
                if not column:
                    continue

                # equal means are ties and share the mark
                distinct = sorted(
                    set(row.mean for row in column),
                    reverse=HIGHER_IS_BETTER[metric])

                for row in column:
                    mark = ''
                    if row.mean == distinct[0]:
                        mark = 'best'
                    elif len(distinct) > 1 and row.mean == distinct[1]:
                        mark = 'second'
                    self.marks[(scope, row.criterion, metric)] = mark

    def scopes(self) -> List[str]:
        """List the scopes present in the report."""
        present = set(row.scope for row in self.summary)
        return [scope for scope in SCOPES if scope in present]

    def criteria(self) -> List[str]:
        """List the criteria in order of first appearance."""
        result = []  # type: List[str]
        for row in self.summary:
            if row.criterion not in result:
                result.append(row.criterion)
        return result

    def _cell(self, scope: str, criterion: str, metric: str) -> str:
        for row in self.summary:
            if (row.scope, row.criterion, row.metric) == (scope, criterion,
                                                          metric):
                text = '{:.3f}_{:.3f}'.format(row.mean, row.std)
                mark = self.marks[(scope, criterion, metric)]
                if mark == 'best':
                    text += ' ' + BEST_MARK
                elif mark == 'second':
                    text += ' ' + SECOND_MARK
                return text
        return '-'

    def to_text(self) -> str:
        """Render one plain-text table per scope."""
        parts = []  # type: List[str]
        for scope in self.scopes():
            table = prettytable.PrettyTable(
                hrules=prettytable.ALL, header_style="upper")
            table.add_column(fieldname="Criterion", column=[], align='l')
            for metric in METRICS:
                table.add_column(fieldname=metric, column=[], align='l')

            for criterion in self.criteria():
                table.add_row([criterion] + [
                    self._cell(scope=scope, criterion=criterion, metric=metric)
                    for metric in METRICS
                ])

            parts.append("Scope {}:\n\n{}\n".format(scope, table))

        parts.append("Cells are Mean_STD; {} marks the best and {} the "
                     "second best value of a column.".format(
                         BEST_MARK, SECOND_MARK))
        return '\n'.join(parts)

    def to_csv(self) -> str:
        """Render the report as CSV with a column of marks."""
        buffer = io.StringIO()
        writer = csv.writer(buffer, lineterminator='\n')
        writer.writerow(SUMMARY_HEADER + ('mark', ))
        for row in self.summary:
            writer.writerow(row.to_row() +
                            [self.marks[(row.scope, row.criterion, row.metric)]])
        return buffer.getvalue()


def report(runs_path: Union[str, pathlib.Path],
           manifest: Optional[Sequence[ManifestEntry]] = None) -> Report:
    """
    Build the summary report from a runs file.

    :param runs_path: path to ``runs.csv``
    :param manifest: characteristics of the datasets; adds the Q scopes
    :return: report with plain-text and CSV renderings
    :raise ValueError: if the runs file is empty
    """
    records = read_runs(path=runs_path)
    return Report(summary=summarize(records=records, manifest=manifest))
