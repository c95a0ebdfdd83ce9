"""
Evaluation module initialization.
"""
from evaluation.diagnostics import SelfTestResult, VmrReport, distribution_self_tests, format_table, vmr_diagnostic
from evaluation.features import extract_features, load_features, save_features
from evaluation.perplexity import PerplexityReport, heldout_perplexity, perplexity_from_predictive
from evaluation.topics import (
    GeneratedDocument,
    TopicSummary,
    generate_documents,
    project_layer,
    project_topic,
    ranked_topics,
    save_documents,
    save_topics,
)

__all__ = [
    "GeneratedDocument",
    "PerplexityReport",
    "SelfTestResult",
    "TopicSummary",
    "VmrReport",
    "distribution_self_tests",
    "extract_features",
    "format_table",
    "generate_documents",
    "heldout_perplexity",
    "load_features",
    "perplexity_from_predictive",
    "project_layer",
    "project_topic",
    "ranked_topics",
    "save_documents",
    "save_features",
    "save_topics",
    "vmr_diagnostic",
]
