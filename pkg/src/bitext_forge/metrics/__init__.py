from bitext_forge.metrics.lexical import (
    avg_lcsr,
    kendall_tau_b,
    lcsr,
    lexical_similarity,
    pearson,
    rank_correlations,
)
from bitext_forge.metrics.procedures import (
    BtAllocation,
    QcVerdict,
    bt_allocate,
    qc_from_outputs,
    qc_overlap_check,
)
from bitext_forge.metrics.scores import (
    BleuConfig,
    ChrfConfig,
    MetricResult,
    SignatureError,
    bleu,
    chrf_pp,
    config_from_signature,
)
from bitext_forge.metrics.significance import SignificanceResult, paired_bootstrap
from bitext_forge.metrics.tokenizers import tokenize_13a

__all__ = [
    "BleuConfig",
    "BtAllocation",
    "ChrfConfig",
    "MetricResult",
    "QcVerdict",
    "SignatureError",
    "SignificanceResult",
    "avg_lcsr",
    "bleu",
    "bt_allocate",
    "chrf_pp",
    "config_from_signature",
    "kendall_tau_b",
    "lcsr",
    "lexical_similarity",
    "paired_bootstrap",
    "pearson",
    "qc_from_outputs",
    "qc_overlap_check",
    "rank_correlations",
    "tokenize_13a",
]
