"""Entity-aligned translation for zero-shot cross-lingual NER."""

from .core import (
    DEFAULT_POLICY,
    DEFAULT_TAGS,
    Entity,
    EntitySpan,
    LabeledSentence,
    NormalizationPolicy,
    bio_from_spans,
    ground_span,
    spans_from_bio,
)
from .corpus_io import DatasetSplit, parse_bio_file, write_predictions, write_sharegpt
from .metrics import bigram_entropy, bleu, entropy_loss, micro_f1
from .pipeline import PipelineConfig, process_sentence, resolve_overlaps, run

__version__ = "0.1.0"
