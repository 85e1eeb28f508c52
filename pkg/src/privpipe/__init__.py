"""privpipe: deterministic privacy-preserving text corpus pipeline.

Three transformation tiers (back-translation, entity masking, label and
character noise) over JSONL corpora, every stochastic choice driven by
per-example seeded streams, plus a desk-scale classifier harness for
measuring the privacy/utility tradeoff.
"""

from .audit import AuditRecord, read_audit, write_audit
from .backtranslate import (
    LexiconTranslator,
    PivotLexicon,
    RemoteTranslator,
    back_translate_example,
    bundled_pivots,
    round_trip,
)
from .corpus import (
    LabeledExample,
    SplitCorpus,
    corpus_digest,
    generate_synthetic,
    load_jsonl,
    load_split_dir,
    save_jsonl,
    save_split_dir,
    split,
)
from .errors import ConfigError, IntegrityError, PrivpipeError, ValidationError
from .evaluation import (
    Metrics,
    Model,
    entity_exposure,
    evaluate,
    featurize,
    flip_audit,
    render_table,
    sweep,
    train,
)
from .ner import EntitySpan, Gazetteer, default_gazetteer, load_gazetteer, mask, mask_example, recognize
from .noise import NoiseConfig, apply_dp, flip_labels, perturb_chars
from .pipeline import TransformConfig, config_from_obj, load_config, replay, run
from .rng import RngStream, derive_stream, fnv1a64

__version__ = "0.1.0"
