"""Document-level sentence splitting for parallel corpora, with the
statistics and evaluation helpers that go with it."""

from ._core import (
    AlignerConfig,
    BleuTokenizer,
    McNemarResult,
    SplitConfig,
    SplitMethod,
    SplitPoint,
    __version__,
    align,
    aligned_split,
    apply_split,
    contrastive_accuracy,
    corpus_bleu,
    mcnemar,
    mcnemar_from_counts,
    middle_split,
    run_cli,
    seeded_derangement,
    split_corpus,
)

__all__ = [
    "AlignerConfig",
    "BleuTokenizer",
    "McNemarResult",
    "SplitConfig",
    "SplitMethod",
    "SplitPoint",
    "__version__",
    "align",
    "aligned_split",
    "apply_split",
    "contrastive_accuracy",
    "corpus_bleu",
    "mcnemar",
    "mcnemar_from_counts",
    "middle_split",
    "run_cli",
    "seeded_derangement",
    "split_corpus",
]
