"""Markov network structure learning with context-specific independences."""
from .baselines import cliques_to_features, gsmn, maximal_cliques, pc_undirected
from .benchmark import GeneratorConfig, csi_structure, generate_model, reference_structures
from .data import Context, Dataset, Schema, load_dataset, save_dataset, slice_by_context
from .features import Feature, FeatureSet, Graph, atomic_features, induced_graph, restrict
from .independence import ChiSquareTester, TestConfig, csi_test
from .learner import CsiStatement, contextual_pc, cspc, generalize, initial_features
from .loglinear import (FitConfig, GibbsConfig, LogLinearModel, fit, gibbs_sample,
                        pseudo_log_likelihood)
from .metrics import avg_feature_length, avg_feature_length_in_context, kl_exact
from .oracle import ExactOracle

__all__ = [
    "ChiSquareTester", "Context", "CsiStatement", "Dataset", "ExactOracle", "Feature",
    "FeatureSet", "FitConfig", "GeneratorConfig", "GibbsConfig", "Graph", "LogLinearModel",
    "Schema", "TestConfig", "atomic_features", "avg_feature_length",
    "avg_feature_length_in_context", "cliques_to_features", "contextual_pc", "csi_structure",
    "csi_test", "cspc", "fit", "generalize", "generate_model", "gibbs_sample", "gsmn",
    "induced_graph", "initial_features", "kl_exact", "load_dataset", "maximal_cliques",
    "pc_undirected", "pseudo_log_likelihood", "reference_structures", "restrict",
    "save_dataset", "slice_by_context",
]
