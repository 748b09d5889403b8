"""Content-based image retrieval with per-query descriptor weighting.

The pipeline: ingest a class-per-directory corpus, extract four
complementary descriptors per image (color-difference histogram, local
binary patterns, color layout, edge orientation histogram), train
per-class linear SVMs to prune the search space, then rank with a
weighted combination of per-descriptor distances.  Weights are learned
per query from relevance feedback, real or pseudo.
"""

from .database import (
    FeatureDatabase,
    Record,
    build_database,
    export_json,
    extract_features,
    load_database,
    save_database,
)
from .descriptors import (
    CDH_DIM,
    CLD_DIM,
    DESCRIPTOR_NAMES,
    EOH_DIM,
    LBP_DIM,
    TOTAL_DIM,
    DescriptorSet,
    cld_distance,
    compute_all,
    compute_cdh,
    compute_cld,
    compute_eoh,
    compute_lbp,
)
from .errors import (
    CbirError,
    ChecksumMismatch,
    DatabaseLocked,
    DecodeError,
    DegenerateClass,
    DimensionMismatch,
    EmptyCandidatePool,
    EmptyCorpus,
    FormatVersionMismatch,
    LengthMismatch,
    NoRelevant,
)
from .evaluation import EvalConfig, EvalReport, batch_evaluate, emit_report
from .ingest import ImageRecord, SplitAssignment, ingest_corpus, load_and_resize, make_split
from .metrics import canberra, chi_square, euclidean, normalize_distances
from .prcurve import PRCurve, pr_auc, pr_curve
from .ranking import DistanceProfile, combined_distance
from .retrieval import RankedEntry, RankedList, run_query
from .svm_index import (
    CategoryModel,
    IndexModel,
    TrainConfig,
    predict_top_categories,
    reduce_search_space,
    train_index,
)
from .synthetic import generate_corpus
from .weighting import (
    FeedbackContext,
    WeightVector,
    initial_weights,
    method1_relevant_ratio,
    method2_mean_difference,
    relevant_count,
    relevant_ratio_update,
    weights_from_aucs,
)

__version__ = "0.1.0"

__all__ = [
    "CDH_DIM",
    "CLD_DIM",
    "DESCRIPTOR_NAMES",
    "EOH_DIM",
    "LBP_DIM",
    "TOTAL_DIM",
    "CategoryModel",
    "CbirError",
    "ChecksumMismatch",
    "DatabaseLocked",
    "DecodeError",
    "DegenerateClass",
    "DescriptorSet",
    "DimensionMismatch",
    "DistanceProfile",
    "EmptyCandidatePool",
    "EmptyCorpus",
    "EvalConfig",
    "EvalReport",
    "FeatureDatabase",
    "FeedbackContext",
    "FormatVersionMismatch",
    "ImageRecord",
    "IndexModel",
    "LengthMismatch",
    "NoRelevant",
    "PRCurve",
    "RankedEntry",
    "RankedList",
    "Record",
    "SplitAssignment",
    "TrainConfig",
    "WeightVector",
    "batch_evaluate",
    "build_database",
    "canberra",
    "chi_square",
    "cld_distance",
    "combined_distance",
    "compute_all",
    "compute_cdh",
    "compute_cld",
    "compute_eoh",
    "compute_lbp",
    "emit_report",
    "euclidean",
    "export_json",
    "extract_features",
    "generate_corpus",
    "ingest_corpus",
    "initial_weights",
    "load_and_resize",
    "load_database",
    "make_split",
    "method1_relevant_ratio",
    "method2_mean_difference",
    "normalize_distances",
    "pr_auc",
    "pr_curve",
    "predict_top_categories",
    "reduce_search_space",
    "relevant_count",
    "relevant_ratio_update",
    "run_query",
    "save_database",
    "train_index",
    "weights_from_aucs",
]
