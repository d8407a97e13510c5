#!/usr/bin/env python
"""Grow decision trees with ordinal splitting criteria and evaluate them."""

from ordtree.bench import (DEFAULT_CV_FOLDS, DEFAULT_DEPTH_GRID, DEFAULT_SEEDS,
                           ExperimentConfig, ExperimentResult, Report,
                           RunRecord, SummaryRow, report, run_experiment,
                           run_single, select_depth, summarize)
from ordtree.criteria import (DEFAULT_ALPHA, ClassHistogram, Criterion,
                              CriterionSpec, GainResult, class_weights,
                              impurity, impurity_entropy, impurity_gini,
                              impurity_ogini, impurity_ranking,
                              impurity_weighted_entropy, parse_criterion,
                              split_gain)
from ordtree.dataset import (CsvSchema, Dataset, ManifestEntry, PartitionPlan,
                             archive_manifest, describe, load_dataset,
                             load_manifest, load_named, make_partition,
                             stratified_kfold, validate_against_manifest)
from ordtree.metrics import (ConfusionMatrix, EvalReport, confusion, evaluate,
                             mae, qwk, rps)
from ordtree.tree import (DecisionTree, GrowConfig, Internal, Leaf,
                          SplitCandidates, SplitSpec, best_split, dump_tree,
                          grow, load_tree, split_candidates)
