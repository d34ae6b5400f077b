"""Anticipatory event/control modeling toolkit for symbolic music.

The pipeline: parse MIDI into quantized events, choose control subsets,
densify and interleave them so controls surface a fixed interval ahead of
the events they accompany, tokenize under the arrival or interarrival codec,
train or plug in a next-token predictor, sample with controls online, and
score everything in comparable bits per second.
"""

from .anticipation import (
    AnticipationConfig,
    densify,
    interleave,
    next_anticipated_controls,
    sort_order_interleave,
    split_and_sort,
)
from .augment import (
    AugmentationPolicy,
    augment_corpus,
    augment_sequence,
    sample_instrument_controls,
    sample_random_controls,
    sample_span_controls,
    split_by_mask,
)
from .corpus import CorpusFilters, CorpusManifest, preprocess_corpus, split_for_digest
from .events import (
    DRUM_INSTRUMENT,
    REST,
    Event,
    EventSequence,
    ControlSequence,
    InterleavedSequence,
    TaggedEvent,
    decode_note,
    encode_note,
    quantize_duration,
    quantize_time,
    seconds_to_units,
)
from .metrics import CorpusStats, LossReport, bits_per_second, corpus_stats, cross_entropy
from .midi import ChannelCapacityError, MidiParseError, parse_midi, write_midi
from .predictor import (
    NGramModel,
    Predictor,
    ReplayPredictor,
    UniformPredictor,
    replay_predictor,
    train_ngram,
)
from .sampler import (
    GenerationResult,
    SamplerConfig,
    generate_anticipatory,
    generate_autoregressive_infill,
    nucleus_sample,
    strip_controls,
)
from .stats import CorpusHistogram, corpus_histograms, format_histogram
from .tokenizer import (
    PackResult,
    TokenError,
    TrainingExample,
    decode_arrival,
    decode_arrival_single,
    decode_interarrival,
    encode_arrival,
    encode_interarrival,
    pack_training_examples,
    read_tokens,
    write_tokens,
)
from .vocab import ArrivalVocab, InterarrivalVocab

__version__ = "0.1.0"
