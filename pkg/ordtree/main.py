#!/usr/bin/env python3
"""Compare splitting criteria of ordinal decision trees on ordinal datasets."""

import argparse
import csv
import logging
import os
import pathlib
import sys
import warnings
from typing import Any, List, Optional, Sequence, TextIO

import icontract
import numpy as np

import ordtree.bench
import ordtree.dataset
import ordtree.metrics
import ordtree.tree
from ordtree.criteria import DEFAULT_ALPHA, CriterionSpec, parse_criterion

LOGGER = logging.getLogger(__name__)

#: Environment variable that overrides ``--workers``.
WORKERS_ENV = 'ORDTREE_WORKERS'


def parse_seeds(text: str) -> List[int]:
    """
    Parse a comma-separated list of seeds and inclusive ``a..b`` ranges.

    >>> parse_seeds('0..3,7')
    [0, 1, 2, 3, 7]

    :param text: seed specification
    :return: seeds in the given order
    :raise ValueError: on malformed items, negative seeds or duplicates
    """
    seeds = []  # type: List[int]
    for item in text.split(','):
        item = item.strip()
        if '..' in item:
            start_text, end_text = item.split('..', 1)
            start, end = int(start_text), int(end_text)
            if start > end:
                raise ValueError("Empty seed range: {!r}".format(item))
            seeds.extend(range(start, end + 1))
        else:
            seeds.append(int(item))

    if any(seed < 0 for seed in seeds):
        raise ValueError("Seeds must be non-negative: {!r}".format(text))

    if len(set(seeds)) != len(seeds):
        raise ValueError("Seeds must be distinct: {!r}".format(text))

    return seeds


def parse_ints(text: str) -> List[int]:
    """Parse a comma-separated list of integers."""
    return [int(item) for item in text.split(',') if item.strip()]


def parse_criteria(text: str, alpha: float) -> List[CriterionSpec]:
    """Parse a comma-separated list of criterion names."""
    return [
        CriterionSpec(kind=parse_criterion(name=name.strip()), alpha=alpha)
        for name in text.split(',') if name.strip()
    ]


def resolve_workers(workers: int) -> int:
    """Let the environment variable override the number of workers."""
    text = os.environ.get(WORKERS_ENV, '')
    if text == '':
        return workers

    try:
        value = int(text)
    except ValueError:
        raise ValueError("{} must be a positive integer, got {!r}".format(
            WORKERS_ENV, text)) from None

    if value < 1:
        raise ValueError("{} must be a positive integer, got {!r}".format(
            WORKERS_ENV, text))

    return value


def _schema(delimiter: str) -> ordtree.dataset.CsvSchema:
    return ordtree.dataset.CsvSchema(
        delimiter=None if delimiter == 'whitespace' else delimiter)


def _load_manifest(path: Optional[str], use_archive: bool
                   ) -> Optional[List[ordtree.dataset.ManifestEntry]]:
    if path is not None:
        return ordtree.dataset.load_manifest(path=path)
    if use_archive:
        return ordtree.dataset.archive_manifest()
    return None


class Args:
    """Represent parsed command-line arguments."""

    # pylint: disable=too-many-instance-attributes, too-few-public-methods
    def __init__(self, args: Any) -> None:
        """Initialize with arguments parsed with ``argparse``."""
        self.command = str(args.command)
        self.verbose = bool(args.verbose)
        self.no_warnings = bool(args.no_warnings)

        self.data_dir = getattr(args, 'data_dir', None)  # type: Optional[str]
        self.manifest = getattr(args, 'manifest', None)  # type: Optional[str]
        self.archive_manifest = bool(getattr(args, 'archive_manifest', False))
        self.delimiter = str(getattr(args, 'delimiter', ','))
        self.alpha = float(getattr(args, 'alpha', DEFAULT_ALPHA))
        self.depth_grid = list(
            getattr(args, 'depth_grid', ordtree.bench.DEFAULT_DEPTH_GRID))
        self.cv_folds = int(getattr(args, 'cv_folds', 5))

        # run
        self.datasets = getattr(args, 'datasets', None)  # type: Optional[str]
        self.criteria = getattr(args, 'criteria', None)  # type: Optional[str]
        self.seeds = list(getattr(args, 'seeds', ordtree.bench.DEFAULT_SEEDS))
        self.out = getattr(args, 'out', None)  # type: Optional[str]
        self.workers = int(getattr(args, 'workers', 1))
        self.fail_fast = bool(getattr(args, 'fail_fast', False))

        # report
        self.runs = getattr(args, 'runs', None)  # type: Optional[str]
        self.csv = getattr(args, 'csv', None)  # type: Optional[str]

        # train
        self.dataset = getattr(args, 'dataset', None)  # type: Optional[str]
        self.criterion = getattr(args, 'criterion', None)  # type: Optional[str]
        self.depth = getattr(args, 'depth', None)  # type: Optional[int]
        self.seed = int(getattr(args, 'seed', 0))
        self.save_tree = getattr(args, 'save_tree', None)  # type: Optional[str]

        # predict
        self.tree = getattr(args, 'tree', None)  # type: Optional[str]
        self.input = getattr(args, 'input', None)  # type: Optional[str]
        self.output = getattr(args, 'output', None)  # type: Optional[str]
        self.proba = bool(getattr(args, 'proba', False))
        self.has_labels = bool(getattr(args, 'has_labels', False))


def _add_data_arguments(parser: argparse.ArgumentParser) -> None:
    parser.add_argument(
        "--data-dir",
        help="Directory with <name>_train.csv and <name>_test.csv files",
        required=True)
    parser.add_argument(
        "--manifest", help="JSON manifest of the datasets", default=None)
    parser.add_argument(
        "--archive-manifest",
        help="Use the bundled manifest of the ordinal archive",
        action='store_true')
    parser.add_argument(
        "--delimiter",
        help="Column delimiter of the dataset files, "
        "or 'whitespace' (default: %(default)s)",
        default=',')
    parser.add_argument(
        "--alpha",
        help="Normalisation exponent of the weighted entropy "
        "(default: %(default)s)",
        type=float,
        default=DEFAULT_ALPHA)
    parser.add_argument(
        "--depth-grid",
        help="Candidate maximum depths (default: %(default)s)",
        type=parse_ints,
        default='3,5,8,16')
    parser.add_argument(
        "--cv-folds",
        help="Folds of the depth selection (default: %(default)s)",
        type=int,
        default=5)


def parse_args(sys_argv: List[str]) -> Args:
    """Parse command-line arguments."""
    parser = argparse.ArgumentParser(prog='ordtree', description=__doc__)

    parser.add_argument(
        "--no_warnings", help="Don't show any warnings", action='store_true')
    parser.add_argument(
        "--verbose", help="Log debug messages", action='store_true')

    subparsers = parser.add_subparsers(dest='command')
    subparsers.required = True

    run_parser = subparsers.add_parser(
        'run', help="Run the (dataset x criterion x seed) grid")
    _add_data_arguments(parser=run_parser)
    run_parser.add_argument(
        "--datasets",
        help="Comma-separated dataset names; all the manifest's datasets "
        "if omitted",
        default=None)
    run_parser.add_argument(
        "--criteria",
        help="Comma-separated criteria (default: %(default)s)",
        default='gini,ig,ogini,wig,ri')
    run_parser.add_argument(
        "--seeds",
        help="Seeds as a comma-separated list and a..b ranges "
        "(default: %(default)s)",
        type=parse_seeds,
        default='0..19')
    run_parser.add_argument(
        "--out", help="Output directory of the result files", required=True)
    run_parser.add_argument(
        "--workers",
        help="Number of parallel worker processes, overridden by "
        "the {} environment variable (default: %(default)s)".format(
            WORKERS_ENV),
        type=int,
        default=1)
    run_parser.add_argument(
        "--fail-fast",
        help="Abort the sweep on the first failing run",
        action='store_true')

    report_parser = subparsers.add_parser(
        'report', help="Tabulate the summary of a runs.csv")
    report_parser.add_argument("--runs", help="Path to runs.csv", required=True)
    report_parser.add_argument(
        "--manifest",
        help="JSON manifest adding the Q>=6 and Q<6 scopes",
        default=None)
    report_parser.add_argument(
        "--archive-manifest",
        help="Use the bundled manifest of the ordinal archive",
        action='store_true')
    report_parser.add_argument(
        "--csv", help="Also write the report as CSV to this path", default=None)

    train_parser = subparsers.add_parser(
        'train', help="Grow a tree on one seeded train partition")
    _add_data_arguments(parser=train_parser)
    train_parser.add_argument("--dataset", help="Dataset name", required=True)
    train_parser.add_argument(
        "--criterion", help="Splitting criterion", required=True)
    train_parser.add_argument(
        "--depth",
        help="Maximum depth; selected by cross-validation if omitted",
        type=int,
        default=None)
    train_parser.add_argument(
        "--seed", help="Seed of the partition", type=int, default=0)
    train_parser.add_argument(
        "--save-tree", help="Path of the tree JSON", required=True)

    predict_parser = subparsers.add_parser(
        'predict', help="Predict the classes of a CSV with a saved tree")
    predict_parser.add_argument(
        "--tree", help="Path of the tree JSON", required=True)
    predict_parser.add_argument(
        "--input", help="CSV of feature rows", required=True)
    predict_parser.add_argument(
        "--output", help="Output CSV; stdout if omitted", default=None)
    predict_parser.add_argument(
        "--proba",
        help="Also output the class probabilities",
        action='store_true')
    predict_parser.add_argument(
        "--has-labels",
        help="Input rows end with a label column which is ignored",
        action='store_true')
    predict_parser.add_argument(
        "--delimiter",
        help="Column delimiter of the input, or 'whitespace' "
        "(default: %(default)s)",
        default=',')

    args = parser.parse_args(sys_argv[1:])

    return Args(args=args)


def _run(args: Args) -> int:
    assert args.data_dir is not None and args.out is not None

    manifest = _load_manifest(
        path=args.manifest, use_archive=args.archive_manifest)

    if args.datasets is not None:
        datasets = [
            name.strip() for name in args.datasets.split(',') if name.strip()
        ]
    elif manifest is not None:
        datasets = [entry.name for entry in manifest]
    else:
        raise ValueError("Either --datasets or a manifest must be given")

    config = ordtree.bench.ExperimentConfig(
        datasets=datasets,
        criteria=parse_criteria(
            text=args.criteria or 'gini,ig,ogini,wig,ri', alpha=args.alpha),
        output_dir=args.out,
        data_dir=args.data_dir,
        seeds=args.seeds,
        depth_grid=args.depth_grid,
        cv_folds=args.cv_folds,
        manifest=manifest,
        workers=resolve_workers(workers=args.workers),
        fail_fast=args.fail_fast,
        schema=_schema(delimiter=args.delimiter))

    result = ordtree.bench.run_experiment(config=config)

    if result.summary:
        print(ordtree.bench.Report(summary=result.summary).to_text())

    if result.errors:
        print(
            "{} run(s) failed, see {}".format(
                len(result.errors), config.output_dir / 'errors.csv'),
            file=sys.stderr)
        return 1

    return 0


def _report(args: Args) -> int:
    assert args.runs is not None

    rep = ordtree.bench.report(
        runs_path=args.runs,
        manifest=_load_manifest(
            path=args.manifest, use_archive=args.archive_manifest))

    print(rep.to_text())

    if args.csv is not None:
        pathlib.Path(args.csv).write_text(rep.to_csv())

    return 0


def _train(args: Args) -> int:
    assert args.data_dir is not None and args.dataset is not None
    assert args.criterion is not None and args.save_tree is not None

    criterion = CriterionSpec(
        kind=parse_criterion(name=args.criterion), alpha=args.alpha)

    dataset = ordtree.dataset.load_named(
        data_dir=args.data_dir,
        name=args.dataset,
        schema=_schema(delimiter=args.delimiter))

    n_train = dataset.n_train
    manifest = _load_manifest(
        path=args.manifest, use_archive=args.archive_manifest)
    for entry in manifest or []:
        if entry.name == dataset.name:
            ordtree.dataset.validate_against_manifest(
                dataset=dataset, entry=entry)
            n_train = entry.n_train
    assert n_train is not None

    plan = ordtree.dataset.make_partition(
        dataset=dataset, n_train=n_train, seed=args.seed)
    train_features = dataset.features[plan.train_indices]
    train_labels = dataset.labels[plan.train_indices]

    depth = args.depth
    if depth is None:
        depth = ordtree.bench.select_depth(
            features=train_features,
            labels=train_labels,
            num_classes=dataset.num_classes,
            criterion=criterion,
            depth_grid=args.depth_grid,
            cv_folds=args.cv_folds,
            seed=ordtree.dataset.derive_seed(
                name=dataset.name, seed=args.seed, purpose='cv'))
        LOGGER.info("Selected depth %d by cross-validation", depth)

    tree = ordtree.tree.grow(
        features=train_features,
        labels=train_labels,
        num_classes=dataset.num_classes,
        config=ordtree.tree.GrowConfig(criterion=criterion, max_depth=depth))

    ordtree.tree.dump_tree(tree=tree, path=args.save_tree)

    test_features = dataset.features[plan.test_indices]
    report = ordtree.metrics.evaluate(
        y_true=dataset.labels[plan.test_indices],
        y_pred=tree.predict_many(test_features),
        probas=tree.predict_proba_many(test_features),
        num_classes=dataset.num_classes)

    print("Tree of depth {} with {} leaves saved to {}".format(
        tree.depth(), tree.leaf_count(), args.save_tree))
    print("Test MAE {:.4f}, QWK {:.4f}, RPS {:.4f}".format(
        report.mae, report.qwk, report.rps))

    return 0


def _write_predictions(fid: TextIO, predictions: np.ndarray,
                       probas: Optional[np.ndarray],
                       num_classes: int) -> None:
    writer = csv.writer(fid, lineterminator='\n')
    header = ['predicted']  # type: List[str]
    if probas is not None:
        header.extend('p{}'.format(q) for q in range(1, num_classes + 1))
    writer.writerow(header)

    for index, prediction in enumerate(predictions):
        row = [str(int(prediction))]  # type: List[str]
        if probas is not None:
            row.extend(repr(float(value)) for value in probas[index])
        writer.writerow(row)


def _predict(args: Args) -> int:
    assert args.tree is not None and args.input is not None

    tree = ordtree.tree.load_tree(path=args.tree)
    features = ordtree.dataset.load_features(
        path=args.input,
        num_features=tree.num_features,
        has_labels=args.has_labels,
        delimiter=None if args.delimiter == 'whitespace' else args.delimiter)

    predictions = tree.predict_many(features)
    probas = tree.predict_proba_many(features) if args.proba else None

    if args.output is None:
        _write_predictions(
            fid=sys.stdout,
            predictions=predictions,
            probas=probas,
            num_classes=tree.num_classes)
    else:
        with open(args.output, 'wt') as fid:
            _write_predictions(
                fid=fid,
                predictions=predictions,
                probas=probas,
                num_classes=tree.num_classes)

    return 0


def _configure_logging(args: Args) -> None:
    level = logging.INFO
    if args.verbose:
        level = logging.DEBUG
    if args.no_warnings:
        level = logging.ERROR

    logging.basicConfig(
        level=level, format='%(asctime)s %(levelname)s %(name)s: %(message)s')


def _main(args: Args) -> int:
    if args.no_warnings:
        warnings.filterwarnings("ignore")
    _configure_logging(args=args)

    commands = {
        'run': _run,
        'report': _report,
        'train': _train,
        'predict': _predict
    }

    try:
        return commands[args.command](args)
    except (OSError, ValueError, RuntimeError,
            icontract.ViolationError) as err:
        print("ordtree {}: {}".format(args.command, err), file=sys.stderr)
        return 1


def main(sys_argv: Optional[Sequence[str]] = None) -> None:
    """Wrap the main routine so that it can be tested."""
    args = parse_args(
        sys_argv=list(sys_argv) if sys_argv is not None else sys.argv)
    sys.exit(_main(args=args))


if __name__ == '__main__':
    main()
