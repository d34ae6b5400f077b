"""Log-loss accounting: per-token cross entropy bucketed by triple slot,
per-event perplexity decomposition, and the bits-per-second conversion that
makes losses comparable across codecs.

Bits per second is the total test-set log-loss divided by the seconds of
music in the test set: ``L`` nats/token becomes
``L / ln(2) * token_count / total_seconds``.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field
from typing import Iterable, Sequence

from .events import EventSequence, InterleavedSequence, UNITS_PER_SECOND
from .predictor import Predictor
from .tokenizer import encode_interarrival
from .vocab import ArrivalVocab as AV
from .vocab import InterarrivalVocab as IV


@dataclass(frozen=True)
class CorpusStats:
    """Token and duration totals for one codec's view of a corpus."""

    token_count: int
    total_seconds: float
    codec: str = "arrival"

    def __post_init__(self) -> None:
        if self.token_count < 0 or self.total_seconds < 0:
            raise ValueError("counts must be non-negative")


def corpus_stats(
    sequences: Iterable[InterleavedSequence | EventSequence],
    codec: str,
    *,
    include_specials: bool = False,
) -> CorpusStats:
    """Count tokens under a codec and sum sequence durations in seconds.

    ``include_specials`` adds the per-sequence preamble: control code plus a
    separator triple for the arrival codec, one separator for interarrival.
    Duration is measured to the last note offset.
    """
    tokens = 0
    seconds = 0.0
    for seq in sequences:
        if isinstance(seq, EventSequence):
            seq = InterleavedSequence.from_events(seq)
        if codec == "arrival":
            tokens += 3 * len(seq) + (4 if include_specials else 0)
        elif codec == "interarrival":
            tokens += len(encode_interarrival(seq)) + (1 if include_specials else 0)
        else:
            raise ValueError(f"unknown codec {codec!r}")
        seconds += max((item.event.end for item in seq), default=0) / UNITS_PER_SECOND
    return CorpusStats(tokens, seconds, codec)


def bits_per_second(nats_per_token: float, stats: CorpusStats) -> float:
    """Convert a per-token loss in nats to encoding-agnostic bits per second."""
    if nats_per_token < 0:
        raise ValueError("loss must be non-negative")
    if stats.total_seconds <= 0:
        raise ValueError("total_seconds must be positive")
    return nats_per_token / math.log(2) * stats.token_count / stats.total_seconds


@dataclass
class LossReport:
    """Accumulated cross-entropy, bucketed by token role.

    For the arrival codec the event loss splits into time/duration/note
    slots, one token of each per event, so the per-event perplexity is
    exactly the product of the slot perplexities. Separator tokens are
    accumulated separately; control-range tokens never enter the event
    buckets.
    """

    codec: str
    n_events: int = 0
    nats_time: float = 0.0
    nats_duration: float = 0.0
    nats_note: float = 0.0
    nats_sep: float = 0.0
    n_sep_tokens: int = 0
    nats_control: float = 0.0
    n_control_tokens: int = 0
    infinite_positions: list[tuple[int, int]] = field(default_factory=list)

    @property
    def nats_event(self) -> float:
        return self.nats_time + self.nats_duration + self.nats_note

    @property
    def n_event_tokens(self) -> int:
        return 3 * self.n_events if self.codec == "arrival" else self.n_events

    @property
    def nats_per_token(self) -> float:
        """Mean loss over event tokens (separators and controls excluded)."""
        return self.nats_event / self.n_event_tokens if self.n_event_tokens else 0.0

    @property
    def nats_per_token_with_sep(self) -> float:
        total = self.nats_event + self.nats_sep
        count = self.n_event_tokens + self.n_sep_tokens
        return total / count if count else 0.0

    def _ppl(self, nats: float) -> float:
        return math.exp(nats / self.n_events) if self.n_events else 1.0

    @property
    def ppl_event(self) -> float:
        return self._ppl(self.nats_event)

    @property
    def ppl_time(self) -> float:
        return self._ppl(self.nats_time)

    @property
    def ppl_duration(self) -> float:
        return self._ppl(self.nats_duration)

    @property
    def ppl_note(self) -> float:
        return self._ppl(self.nats_note)


def _slot_of_arrival(token: int, slot: int) -> str:
    """Classify an arrival-codec token occupying triple slot 0/1/2."""
    if token == AV.SEP:
        return "sep"
    if AV.is_control_range(token):
        return "control"
    return ("time", "duration", "note")[slot]


def cross_entropy(
    predictor: Predictor,
    rows: Iterable[Sequence[int]],
    codec: str,
    *,
    z: int | None = None,
) -> LossReport:
    """Accumulate per-token negative log-likelihood over token rows.

    Rows may carry a leading control code, which conditions the predictor
    and is excluded from the loss; otherwise ``z`` applies (defaulting to
    the no-anticipation code for the arrival codec). A zero-probability
    ground-truth token is recorded in ``infinite_positions``.
    """
    if codec == "arrival" and z is None:
        z = AV.AR
    report = LossReport(codec)
    for row_index, row in enumerate(rows):
        tokens = list(row)
        row_z = z
        if codec == "arrival" and tokens and tokens[0] in (AV.AR, AV.AAR):
            row_z = tokens[0]
            tokens = tokens[1:]
        if codec == "arrival" and len(tokens) % 3:
            raise ValueError(f"row {row_index}: arrival rows must be whole triples")
        for position, token in enumerate(tokens):
            dist = predictor.next_distribution(row_z, tokens[:position])
            p = float(dist[token])
            if p <= 0.0:
                report.infinite_positions.append((row_index, position))
                nats = math.inf
            else:
                nats = -math.log(p)
            if codec == "arrival":
                slot = _slot_of_arrival(token, position % 3)
            else:
                slot = "sep" if token == IV.SEP else "event"
            if slot == "sep":
                report.nats_sep += nats
                report.n_sep_tokens += 1
            elif slot == "control":
                report.nats_control += nats
                report.n_control_tokens += 1
            elif codec == "arrival":
                if slot == "time":
                    report.nats_time += nats
                    report.n_events += 1
                elif slot == "duration":
                    report.nats_duration += nats
                else:
                    report.nats_note += nats
            else:
                report.nats_time += nats
                report.n_events += 1
    return report


def format_report(report: LossReport, stats: CorpusStats | None = None) -> str:
    """Render a loss report as a flat key=value block."""
    lines = [
        f"codec={report.codec}",
        f"events={report.n_events}",
        f"nats_per_token={report.nats_per_token:.6f}",
        f"nats_per_token_with_sep={report.nats_per_token_with_sep:.6f}",
        f"sep_tokens={report.n_sep_tokens}",
        f"control_tokens={report.n_control_tokens}",
        f"infinite_losses={len(report.infinite_positions)}",
    ]
    if report.codec == "arrival":
        lines += [
            f"ppl_event={report.ppl_event:.4f}",
            f"ppl_time={report.ppl_time:.4f}",
            f"ppl_duration={report.ppl_duration:.4f}",
            f"ppl_note={report.ppl_note:.4f}",
        ]
    if stats is not None:
        lines += [
            f"tokens={stats.token_count}",
            f"seconds={stats.total_seconds:.2f}",
            f"bits_per_second={bits_per_second(report.nats_per_token, stats):.4f}",
        ]
    return "\n".join(lines)


def report_row(report: LossReport, stats: CorpusStats | None = None) -> str:
    """Render the report as one machine-readable tab-separated row."""
    fields = [
        report.codec,
        str(report.n_events),
        f"{report.nats_per_token:.6f}",
        f"{report.ppl_event:.4f}",
        f"{report.ppl_time:.4f}",
        f"{report.ppl_duration:.4f}",
        f"{report.ppl_note:.4f}",
    ]
    if stats is not None:
        fields.append(f"{bits_per_second(report.nats_per_token, stats):.4f}")
    return "\t".join(fields)
