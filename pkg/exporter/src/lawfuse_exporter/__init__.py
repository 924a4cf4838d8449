"""Score and embedding exporter for the lawfuse retrieval engine.

Produces the engine's external file formats from trainable encoders: one
embedding per sentence id, predicate satisfaction scores from a scorer
fine-tuned with BCE on the engine's pretraining files, and optional
whole-document cosine relevance.
"""

from .encoders import EncoderLoadError, HashEncoder, SbertEncoder, load_encoder
from .exporting import (
    ExportManifest,
    export_embeddings,
    export_predicate_scores,
    export_relevance_scores,
    required_predicate_pairs,
)
from .scorer import (
    PredicateScorer,
    TrainConfig,
    TrainReport,
    load_pretraining_records,
    load_scorer,
    save_scorer,
    train_predicate_scorer,
)

__version__ = "0.1.0"
