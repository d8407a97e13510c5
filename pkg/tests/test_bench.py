#!/usr/bin/env python
"""Test the benchmark protocol, the aggregation and the report."""

# pylint: disable=missing-docstring

import csv
import pathlib
import unittest
from typing import List

import numpy as np
import temppathlib

import ordtree.bench
import tests.common
from ordtree.bench import (ExperimentConfig, Report, RunRecord, SummaryRow,
                           run_experiment, run_single, select_depth,
                           summarize)
from ordtree.criteria import Criterion, CriterionSpec
from ordtree.dataset import Dataset, ManifestEntry


def all_specs() -> List[CriterionSpec]:
    return [CriterionSpec(kind=kind) for kind in tests.common.ALL_KINDS]


def write_toy_datasets(directory: pathlib.Path) -> None:
    for name, seed, num_classes in [('toy-a', 0, 3), ('toy-b', 1, 4)]:
        features, labels = tests.common.toy_problem(
            seed=seed, num_patterns=60, num_classes=num_classes)
        tests.common.write_dataset(
            directory=directory,
            name=name,
            features=features,
            labels=labels,
            n_train=40)


def toy_dataset(seed: int = 0) -> Dataset:
    features, labels = tests.common.toy_problem(seed=seed)
    return Dataset(
        name='toy',
        features=features,
        labels=labels,
        num_classes=3,
        n_train=40,
        n_test=20)


def read_csv_rows(path: pathlib.Path) -> List[List[str]]:
    with path.open('rt', newline='') as fid:
        return list(csv.reader(fid))


def record(dataset: str, criterion: str, seed: int, mae: float,
           qwk: float = 0.5, rps: float = 0.25) -> RunRecord:
    return RunRecord(
        dataset=dataset,
        criterion=criterion,
        seed=seed,
        chosen_depth=3,
        mae=mae,
        qwk=qwk,
        rps=rps,
        wall_time_s=0.1)


class TestSelectDepth(unittest.TestCase):
    def test_separable_data_takes_the_smallest_depth(self) -> None:
        rng = np.random.RandomState(0)
        features = np.concatenate(
            [rng.uniform(0.0, 1.0, size=20),
             rng.uniform(10.0, 11.0, size=20)]).reshape(-1, 1)
        labels = np.repeat([1, 2], 20)

        for spec in all_specs():
            self.assertEqual(
                1,
                select_depth(
                    features=features,
                    labels=labels,
                    num_classes=2,
                    criterion=spec,
                    depth_grid=[1, 2, 4],
                    cv_folds=5,
                    seed=0))

    def test_stump_data_takes_the_smallest_default_depth(self) -> None:
        rng = np.random.RandomState(1)
        features = np.concatenate(
            [rng.uniform(0.0, 1.0, size=25),
             rng.uniform(5.0, 6.0, size=25)]).reshape(-1, 1)
        labels = np.repeat([1, 2], 25)

        for spec in all_specs():
            self.assertEqual(
                3,
                select_depth(
                    features=features,
                    labels=labels,
                    num_classes=2,
                    criterion=spec,
                    depth_grid=list(ordtree.bench.DEFAULT_DEPTH_GRID),
                    cv_folds=5,
                    seed=0))

    def test_single_depth(self) -> None:
        features, labels = tests.common.toy_problem(seed=0)
        self.assertEqual(
            3,
            select_depth(
                features=features,
                labels=labels,
                num_classes=3,
                criterion=CriterionSpec(kind=Criterion.GINI),
                depth_grid=[3],
                cv_folds=5,
                seed=0))

    def test_many_classes_need_a_deep_tree(self) -> None:
        # one class per feature value; a tree of depth 3 has at most 8 leaves
        features = np.repeat(np.arange(16, dtype=np.float64), 10).reshape(
            -1, 1)
        labels = np.repeat(np.arange(1, 17), 10)

        chosen = select_depth(
            features=features,
            labels=labels,
            num_classes=16,
            criterion=CriterionSpec(kind=Criterion.GINI),
            depth_grid=[3, 5, 8, 16],
            cv_folds=5,
            seed=0)

        self.assertIn(chosen, [5, 8, 16])

    def test_deterministic(self) -> None:
        features, labels = tests.common.toy_problem(seed=4)
        depths = set(
            select_depth(
                features=features,
                labels=labels,
                num_classes=3,
                criterion=CriterionSpec(kind=Criterion.WIG),
                depth_grid=[1, 2, 3, 5],
                cv_folds=3,
                seed=11) for _ in range(3))
        self.assertEqual(1, len(depths))


class TestRunSingle(unittest.TestCase):
    def test_deterministic(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            config = ExperimentConfig(
                datasets=['toy'],
                criteria=all_specs(),
                output_dir=tmp_dir.path,
                depth_grid=[1, 2, 3],
                cv_folds=3)

            for spec in all_specs():
                first = run_single(
                    dataset=toy_dataset(), criterion=spec, seed=5, config=config)
                second = run_single(
                    dataset=toy_dataset(), criterion=spec, seed=5, config=config)

                self.assertEqual(first.to_row()[:7], second.to_row()[:7])
                self.assertEqual(first.confusion, second.confusion)
                self.assertEqual(first.partition_digest,
                                 second.partition_digest)
                self.assertEqual(40, first.n_train)
                self.assertEqual(20, first.n_test)
                assert first.confusion is not None
                self.assertEqual(20, first.confusion.total)

    def test_failure_names_the_cell(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            config = ExperimentConfig(
                datasets=['toy'],
                criteria=all_specs(),
                output_dir=tmp_dir.path,
                depth_grid=[1, 2, 3],
                cv_folds=3)

            with self.assertRaises(RuntimeError) as ctx:
                run_single(
                    dataset=toy_dataset(),
                    criterion=CriterionSpec(kind=Criterion.OGINI),
                    seed=2,
                    config=config,
                    n_train=60)

            message = str(ctx.exception)
            self.assertIn('dataset toy', message)
            self.assertIn('criterion ogini', message)
            self.assertIn('seed 2', message)
            self.assertIsNotNone(ctx.exception.__cause__)


class TestRunExperiment(unittest.TestCase):
    def test_grid(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            data_dir = tmp_dir.path / 'data'
            data_dir.mkdir()
            write_toy_datasets(directory=data_dir)

            out_dir = tmp_dir.path / 'out'
            config = ExperimentConfig(
                datasets=['toy-a', 'toy-b'],
                criteria=all_specs(),
                output_dir=out_dir,
                data_dir=data_dir,
                seeds=[0, 1, 2],
                depth_grid=[1, 2, 3],
                cv_folds=3)

            result = run_experiment(config=config)

            self.assertEqual(30, len(result.records))
            self.assertEqual(0, len(result.errors))

            # grid order: dataset, criterion, seed
            self.assertListEqual(
                [(name, kind.value, seed) for name in ['toy-a', 'toy-b']
                 for kind in tests.common.ALL_KINDS for seed in [0, 1, 2]],
                [(rec.dataset, rec.criterion, rec.seed)
                 for rec in result.records])

            for rec in result.records:
                self.assertIn(rec.chosen_depth, [1, 2, 3])
                self.assertEqual(40, rec.n_train)
                self.assertEqual(20, rec.n_test)

                assert rec.confusion_path is not None
                confusion_path = out_dir / rec.confusion_path
                self.assertTrue(confusion_path.exists())

            # every criterion sees the same partition of a (dataset, seed)
            for name in ['toy-a', 'toy-b']:
                for seed in [0, 1, 2]:
                    digests = set(
                        rec.partition_digest for rec in result.records
                        if rec.dataset == name and rec.seed == seed)
                    self.assertEqual(1, len(digests))

            runs = ordtree.bench.read_runs(path=out_dir / 'runs.csv')
            self.assertListEqual([rec.to_row() for rec in result.records],
                                 [rec.to_row() for rec in runs])

            partitions = read_csv_rows(path=out_dir / 'partitions.csv')
            self.assertListEqual(
                list(ordtree.bench.PARTITIONS_HEADER), partitions[0])
            self.assertEqual(6, len(partitions) - 1)

            errors = read_csv_rows(path=out_dir / 'errors.csv')
            self.assertListEqual([list(ordtree.bench.ERRORS_HEADER)], errors)

            summary = read_csv_rows(path=out_dir / 'summary.csv')
            self.assertListEqual(
                list(ordtree.bench.SUMMARY_HEADER), summary[0])

            # both toy datasets have fewer than six classes
            self.assertSetEqual({'all', 'Q<6'},
                                set(row[0] for row in summary[1:]))

        for row in result.summary:
            if row.scope != 'all':
                continue

            values = [
                rec.metric(row.metric) for rec in result.records
                if rec.criterion == row.criterion
            ]
            self.assertAlmostEqual(
                sum(values) / len(values), row.mean, delta=1e-12)

    def test_missing_dataset_fails_its_cells_only(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            write_toy_datasets(directory=tmp_dir.path)

            config = ExperimentConfig(
                datasets=['toy-a', 'missing'],
                criteria=[
                    CriterionSpec(kind=Criterion.GINI),
                    CriterionSpec(kind=Criterion.RI)
                ],
                output_dir=tmp_dir.path / 'out',
                data_dir=tmp_dir.path,
                seeds=[0, 1],
                depth_grid=[1, 2],
                cv_folds=2)

            with self.assertLogs('ordtree.bench', level='ERROR'):
                result = run_experiment(config=config)

            self.assertEqual(4, len(result.records))
            self.assertEqual(4, len(result.errors))
            self.assertTrue(
                all(error.dataset == 'missing' for error in result.errors))

            errors = read_csv_rows(path=tmp_dir.path / 'out' / 'errors.csv')
            self.assertEqual(5, len(errors))

    def test_fail_fast(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            config = ExperimentConfig(
                datasets=['missing'],
                criteria=[CriterionSpec(kind=Criterion.GINI)],
                output_dir=tmp_dir.path / 'out',
                data_dir=tmp_dir.path,
                seeds=[0],
                depth_grid=[1],
                fail_fast=True)

            with self.assertRaises(RuntimeError):
                run_experiment(config=config)

    def test_cell_does_not_depend_on_the_rest_of_the_grid(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            write_toy_datasets(directory=tmp_dir.path)

            def run(datasets: List[str], criteria: List[CriterionSpec],
                    seeds: List[int], out: str) -> List[RunRecord]:
                config = ExperimentConfig(
                    datasets=datasets,
                    criteria=criteria,
                    output_dir=tmp_dir.path / out,
                    data_dir=tmp_dir.path,
                    seeds=seeds,
                    depth_grid=[1, 2, 3],
                    cv_folds=3)
                return run_experiment(config=config).records

            grid = run(
                datasets=['toy-a', 'toy-b'],
                criteria=all_specs(),
                seeds=[0, 1, 2],
                out='grid')
            alone = run(
                datasets=['toy-b'],
                criteria=[CriterionSpec(kind=Criterion.OGINI)],
                seeds=[2],
                out='alone')

            self.assertEqual(1, len(alone))
            in_grid = [
                rec for rec in grid if rec.dataset == 'toy-b'
                and rec.criterion == 'ogini' and rec.seed == 2
            ]
            self.assertEqual(1, len(in_grid))

            # all but the wall time
            self.assertListEqual(alone[0].to_row()[:7],
                                 in_grid[0].to_row()[:7])
            self.assertEqual(alone[0].partition_digest,
                             in_grid[0].partition_digest)

    def test_workers_do_not_change_the_results(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            write_toy_datasets(directory=tmp_dir.path)

            results = []
            for workers in [1, 2]:
                config = ExperimentConfig(
                    datasets=['toy-b'],
                    criteria=[
                        CriterionSpec(kind=Criterion.OGINI),
                        CriterionSpec(kind=Criterion.WIG, alpha=2.0)
                    ],
                    output_dir=tmp_dir.path / 'out{}'.format(workers),
                    data_dir=tmp_dir.path,
                    seeds=[0, 1],
                    depth_grid=[1, 3],
                    cv_folds=3,
                    workers=workers)
                results.append(run_experiment(config=config))

            # all but the wall time
            self.assertListEqual(
                [rec.to_row()[:7] for rec in results[0].records],
                [rec.to_row()[:7] for rec in results[1].records])
            self.assertEqual('wig-alpha2.0', results[0].records[-1].criterion)


class TestSummarize(unittest.TestCase):
    def test_scopes(self) -> None:
        records = [
            record(dataset='few', criterion='gini', seed=0, mae=1.0),
            record(dataset='few', criterion='gini', seed=1, mae=2.0),
            record(dataset='many', criterion='gini', seed=0, mae=4.0),
            record(dataset='many', criterion='gini', seed=1, mae=6.0)
        ]
        manifest = [
            ManifestEntry(
                name='few',
                n_train=10,
                n_test=5,
                num_classes=3,
                num_features=2,
                imbalance_ratio=1.0),
            ManifestEntry(
                name='many',
                n_train=10,
                n_test=5,
                num_classes=6,
                num_features=2,
                imbalance_ratio=1.0)
        ]

        rows = summarize(records=records, manifest=manifest)
        by_key = {(row.scope, row.metric): row for row in rows}

        self.assertAlmostEqual(3.25, by_key[('all', 'mae')].mean)
        self.assertAlmostEqual(
            float(np.std([1.0, 2.0, 4.0, 6.0])), by_key[('all', 'mae')].std)
        self.assertAlmostEqual(5.0, by_key[('Q>=6', 'mae')].mean)
        self.assertAlmostEqual(1.0, by_key[('Q>=6', 'mae')].std)
        self.assertAlmostEqual(1.5, by_key[('Q<6', 'mae')].mean)
        self.assertAlmostEqual(0.5, by_key[('Q<6', 'qwk')].mean)

    def test_without_manifest(self) -> None:
        rows = summarize(
            records=[record(dataset='x', criterion='ri', seed=0, mae=1.0)])
        self.assertSetEqual({'all'}, set(row.scope for row in rows))
        self.assertEqual(3, len(rows))

    def test_dataset_missing_from_manifest(self) -> None:
        with self.assertRaises(ValueError):
            summarize(
                records=[record(dataset='x', criterion='ri', seed=0, mae=1.0)],
                manifest=[])


class TestReadRuns(unittest.TestCase):
    def test_empty(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            path = tmp_dir.path / 'runs.csv'
            ordtree.bench.write_runs(records=[], path=path)

            with self.assertRaises(ValueError) as ctx:
                ordtree.bench.read_runs(path=path)

            self.assertIn('empty', str(ctx.exception))

    def test_unexpected_header(self) -> None:
        with temppathlib.TemporaryDirectory() as tmp_dir:
            path = tmp_dir.path / 'runs.csv'
            path.write_text('a,b,c\n1,2,3\n')

            with self.assertRaises(ValueError):
                ordtree.bench.read_runs(path=path)


class TestReport(unittest.TestCase):
    def test_marks(self) -> None:
        summary = [
            SummaryRow(
                scope='all', criterion='gini', metric='mae', mean=0.3,
                std=0.1),
            SummaryRow(
                scope='all', criterion='ogini', metric='mae', mean=0.3,
                std=0.2),
            SummaryRow(
                scope='all', criterion='ri', metric='mae', mean=0.4, std=0.1),
            SummaryRow(
                scope='all', criterion='ig', metric='mae', mean=0.5, std=0.1),
            SummaryRow(
                scope='all', criterion='gini', metric='qwk', mean=0.6,
                std=0.1),
            SummaryRow(
                scope='all', criterion='ogini', metric='qwk', mean=0.7,
                std=0.1)
        ]

        rep = Report(summary=summary)

        self.assertEqual('best', rep.marks[('all', 'gini', 'mae')])
        self.assertEqual('best', rep.marks[('all', 'ogini', 'mae')])
        self.assertEqual('second', rep.marks[('all', 'ri', 'mae')])
        self.assertEqual('', rep.marks[('all', 'ig', 'mae')])

        # higher is better for the kappa
        self.assertEqual('best', rep.marks[('all', 'ogini', 'qwk')])
        self.assertEqual('second', rep.marks[('all', 'gini', 'qwk')])

        text = rep.to_text()
        self.assertIn('0.300_0.100 **', text)
        self.assertIn('0.400_0.100 *', text)
        self.assertIn('Scope all', text)

        lines = rep.to_csv().splitlines()
        self.assertEqual('scope,criterion,metric,mean,std,mark', lines[0])
        self.assertEqual('all,gini,mae,0.3,0.1,best', lines[1])

    def test_from_runs_file(self) -> None:
        records = [
            record(dataset='d', criterion='gini', seed=0, mae=1.0),
            record(dataset='d', criterion='gini', seed=1, mae=0.0),
            record(dataset='d', criterion='ogini', seed=0, mae=0.0),
            record(dataset='d', criterion='ogini', seed=1, mae=0.0)
        ]

        with temppathlib.TemporaryDirectory() as tmp_dir:
            path = tmp_dir.path / 'runs.csv'
            ordtree.bench.write_runs(records=records, path=path)
            rep = ordtree.bench.report(runs_path=path)

        self.assertListEqual(['all'], rep.scopes())
        self.assertListEqual(['gini', 'ogini'], rep.criteria())
        self.assertEqual('best', rep.marks[('all', 'ogini', 'mae')])
        self.assertEqual('second', rep.marks[('all', 'gini', 'mae')])


class TestHelpers(unittest.TestCase):
    def test_timer(self) -> None:
        result, seconds = ordtree.bench.timer(sum, [1, 2, 3])
        self.assertEqual(6, result)
        self.assertGreaterEqual(seconds, 0.0)

    def test_confusion_relative_path(self) -> None:
        self.assertEqual(
            'confusion/ERA_ogini_3.csv',
            ordtree.bench.confusion_relative_path(
                dataset='ERA', criterion='ogini', seed=3))

    def test_peak_memory(self) -> None:
        self.assertGreater(ordtree.bench.peak_memory_mib(), 0.0)


if __name__ == '__main__':
    unittest.main()
