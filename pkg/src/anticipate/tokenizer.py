"""Bidirectional codecs between event sequences and integer token sequences,
plus packing of token streams into fixed-length training examples.

Arrival codec: one (time, duration, note) triple per event, absolute times.
Controls use the shifted vocabulary ranges; a separator is a triple of SEP
tokens. Interarrival codec: onset/offset tokens with gap tokens in between
(zero gaps omitted, gaps over 10 s truncated); a separator is a single SEP.

Packing slices the triple stream into windows of 341 triples, prepends the
global control code, and relativizes the window's leading (possibly partial)
sequence segment to start at time zero. Sequences that begin after an
in-window separator keep their own times, which already start near zero for
preprocessed corpora. Windows whose times cannot be represented in the
100-second token range are discarded.
"""

from __future__ import annotations

import logging
import re
from collections import deque
from dataclasses import dataclass, field
from typing import IO, Iterable, Sequence

from .events import MAX_TIME_UNITS, REST, Event, EventSequence, InterleavedSequence, TaggedEvent
from .vocab import ArrivalVocab as AV
from .vocab import InterarrivalVocab as IV

log = logging.getLogger(__name__)

CONTEXT_LENGTH = 1024  # tokens per training example, including the control code


class TokenError(ValueError):
    """Malformed or out-of-range token data; ``index`` locates the offender."""

    def __init__(self, message: str, index: int | None = None):
        super().__init__(message if index is None else f"{message} (index {index})")
        self.index = index


def _as_interleaved(seq: InterleavedSequence | EventSequence) -> InterleavedSequence:
    if isinstance(seq, EventSequence):
        return InterleavedSequence.from_events(seq)
    return seq


def _event_triple(event: Event, control: bool, index: int) -> list[int]:
    if event.time >= AV.DUR_BASE:
        raise TokenError(f"event time {event.time} exceeds the 100s token range", index)
    if event.is_rest:
        if control:
            raise TokenError("rest events cannot be controls", index)
        note = AV.REST
    else:
        note = AV.note_token(event.note, control=control)
    return [
        AV.time_token(event.time, control=control),
        AV.duration_token(event.duration, control=control),
        note,
    ]


def encode_arrival(
    seq: InterleavedSequence | EventSequence,
    *,
    z: int | None = None,
    leading_sep: bool = False,
) -> list[int]:
    """Encode an interleaved sequence as arrival-codec tokens.

    ``z`` (AR or AAR) and ``leading_sep`` prepend the training-example
    preamble; by default the raw 3-per-item token list is returned.
    """
    items = _as_interleaved(seq)
    tokens: list[int] = []
    if z is not None:
        if z not in (AV.AR, AV.AAR):
            raise TokenError(f"control code must be AR or AAR, got {z}")
        tokens.append(z)
    if leading_sep:
        tokens.extend([AV.SEP] * 3)
    for i, item in enumerate(items):
        tokens.extend(_event_triple(item.event, item.control, i))
    return tokens


def decode_arrival(tokens: Sequence[int]) -> list[InterleavedSequence]:
    """Decode arrival-codec tokens into sequence segments.

    An optional leading control code (AR/AAR) is skipped. SEP triples are
    segment boundaries; a boundary at the very start marks a fresh sequence
    rather than producing an empty leading segment.
    """
    toks = list(tokens)
    if toks and toks[0] in (AV.AR, AV.AAR):
        toks = toks[1:]
    if len(toks) % 3:
        raise TokenError(f"token count {len(toks)} is not a multiple of 3")

    segments: list[InterleavedSequence] = []
    current: list[TaggedEvent] = []
    seen_content = False
    for idx in range(0, len(toks), 3):
        a, b, c = toks[idx], toks[idx + 1], toks[idx + 2]
        triple_index = idx // 3
        if a == AV.SEP or b == AV.SEP or c == AV.SEP:
            if not (a == b == c == AV.SEP):
                raise TokenError("partial SEP triple", triple_index)
            if not seen_content and not segments and not current:
                seen_content = True  # leading boundary: fresh sequence start
                continue
            segments.append(InterleavedSequence(current, check=False))
            current = []
            continue
        seen_content = True
        if AV.is_plain_time(a) and AV.is_plain_duration(b):
            if c == AV.REST:
                if b != AV.DUR_BASE:
                    raise TokenError("rest triple with nonzero duration", triple_index)
                event = Event(a - AV.TIME_BASE, 0, REST)
            elif AV.is_plain_note(c):
                event = Event(a - AV.TIME_BASE, b - AV.DUR_BASE, c - AV.NOTE_BASE)
            else:
                raise TokenError(f"token {c} is not a note token", triple_index)
            current.append(TaggedEvent(event, control=False))
        elif AV.is_control_time(a) and AV.is_control_duration(b) and AV.is_control_note(c):
            event = Event(a - AV.ANT_TIME_BASE, b - AV.ANT_DUR_BASE, c - AV.ANT_NOTE_BASE)
            current.append(TaggedEvent(event, control=True))
        else:
            raise TokenError(f"mixed-range triple ({a}, {b}, {c})", triple_index)
    segments.append(InterleavedSequence(current, check=False))
    return segments


def decode_arrival_single(tokens: Sequence[int]) -> InterleavedSequence:
    """Decode tokens expected to hold exactly one sequence."""
    segments = [s for s in decode_arrival(tokens) if len(s)]
    if len(segments) > 1:
        raise TokenError(f"expected a single sequence, found {len(segments)}")
    return segments[0] if segments else InterleavedSequence()


def encode_interarrival(
    seq: EventSequence | InterleavedSequence, *, leading_sep: bool = False
) -> list[int]:
    """Encode plain events as interarrival-codec tokens.

    Each event expands to an onset at ``t`` and an offset at ``t + d``; items
    are ordered by time with offsets preceding onsets at the same instant.
    Control-tagged input and rests are not supported by this codec.
    """
    if isinstance(seq, InterleavedSequence):
        if seq.has_controls:
            raise TokenError("interarrival codec does not support control events")
        seq = seq.events()
    # Rank 0 sorts offsets of earlier-started notes before items at the same
    # instant; a zero-duration note keeps its own offset just after its
    # onset. Ties are otherwise stable in event order.
    items: list[tuple[int, int, bool, int]] = []
    for i, event in enumerate(seq):
        if event.is_rest:
            raise TokenError("interarrival codec does not support rest events", i)
        items.append((event.time, 1, True, event.note))
        items.append((event.end, 0 if event.duration else 1, False, event.note))
    items.sort(key=lambda it: (it[0], it[1]))

    tokens: list[int] = [IV.SEP] if leading_sep else []
    for i, (time, _, is_onset, note) in enumerate(items):
        tokens.append((IV.ONSET_BASE if is_onset else IV.OFFSET_BASE) + note)
        if i + 1 < len(items):
            gap = items[i + 1][0] - time
            if gap:
                tokens.append(min(gap, IV.ONSET_BASE - 1))
    return tokens


def decode_interarrival(tokens: Sequence[int]) -> EventSequence:
    """Decode interarrival-codec tokens back to events.

    Offsets pair with the earliest open onset of the same note (FIFO).
    Leading or trailing SEP tokens are skipped; an interior SEP is an error.
    """
    toks = list(tokens)
    while toks and toks[0] == IV.SEP:
        toks = toks[1:]
    while toks and toks[-1] == IV.SEP:
        toks = toks[:-1]

    now = 0
    open_onsets: dict[int, deque[tuple[int, int]]] = {}
    decoded: list[tuple[int, Event]] = []
    ordinal = 0
    for i, tok in enumerate(toks):
        if IV.is_gap(tok):
            now += tok
        elif IV.is_onset(tok):
            open_onsets.setdefault(tok - IV.ONSET_BASE, deque()).append((now, ordinal))
            ordinal += 1
        elif IV.is_offset(tok):
            note = tok - IV.OFFSET_BASE
            queue = open_onsets.get(note)
            if not queue:
                raise TokenError(f"offset for note {note} without an open onset", i)
            start, order = queue.popleft()
            decoded.append((order, Event(start, min(now - start, 999), note)))
        elif tok == IV.SEP:
            raise TokenError("unexpected SEP inside a sequence", i)
        else:
            raise TokenError(f"token {tok} outside the interarrival vocabulary", i)

    unclosed = sum(len(q) for q in open_onsets.values())
    if unclosed:
        log.warning("closing %d unclosed onsets at sequence end", unclosed)
        for note, queue in open_onsets.items():
            for start, order in queue:
                decoded.append((order, Event(start, min(now - start, 999), note)))
    decoded.sort(key=lambda pair: pair[0])
    return EventSequence(e for _, e in decoded)


@dataclass(frozen=True)
class TrainingExample:
    """A fixed-length packed example: control code followed by whole triples."""

    tokens: tuple[int, ...]

    def __post_init__(self) -> None:
        if not self.tokens or self.tokens[0] not in (AV.AR, AV.AAR):
            raise TokenError("training example must start with AR or AAR")
        if (len(self.tokens) - 1) % 3:
            raise TokenError("training example body must be whole triples")

    @property
    def z(self) -> int:
        return self.tokens[0]

    def __len__(self) -> int:
        return len(self.tokens)


@dataclass
class PackResult:
    examples: list[TrainingExample] = field(default_factory=list)
    n_discarded: int = 0  # windows whose time span exceeds the token range
    n_clamped_times: int = 0  # negative relativized times clamped to zero
    n_tail_triples: int = 0  # trailing triples short of a full window


def pack_training_examples(
    sequences: Iterable[InterleavedSequence],
    *,
    context_length: int = CONTEXT_LENGTH,
) -> PackResult:
    """Pack interleaved sequences into fixed-length training examples.

    Sequences are concatenated with separator triples (one leading separator
    marks the start of the stream) and sliced into windows of whole triples.
    Each window is prefixed by the control code of the first sequence with
    content in the window: AAR when that sequence carries anticipated
    controls, AR otherwise.
    """
    if context_length < 4 or (context_length - 1) % 3:
        raise ValueError("context_length must be 1 + a multiple of 3")
    triples_per_window = (context_length - 1) // 3

    stream: list = []
    for seq in sequences:
        stream.append(None)
        flag = seq.has_controls
        for item in seq:
            stream.append((item, flag))

    result = PackResult()
    result.n_tail_triples = len(stream) % triples_per_window
    for start in range(0, len(stream) - triples_per_window + 1, triples_per_window):
        window = stream[start : start + triples_per_window]
        example = _encode_window(window, result)
        if example is not None:
            result.examples.append(example)
    return result


def _encode_window(window: list, result: PackResult) -> TrainingExample | None:
    z = AV.AR
    for entry in window:
        if entry is not None:
            z = AV.AAR if entry[1] else AV.AR
            break

    # Relativize the segment holding the window's first event against that
    # event's time; segments after a later separator keep their own
    # sequence-local times (which start near zero for normalized corpora).
    first_segment_over = False
    offset = None
    times: list[int | None] = []
    for entry in window:
        if entry is None:
            times.append(None)
            if offset is not None:
                first_segment_over = True
            continue
        t = entry[0].event.time
        if not first_segment_over:
            if offset is None:
                offset = t
            t -= offset
            if t < 0:
                result.n_clamped_times += 1
                t = 0
        if t >= MAX_TIME_UNITS:
            result.n_discarded += 1
            return None
        times.append(t)

    tokens: list[int] = [z]
    for i, (entry, t) in enumerate(zip(window, times)):
        if entry is None:
            tokens.extend([AV.SEP] * 3)
        else:
            item = entry[0]
            event = Event(t, item.event.duration, item.event.note)
            tokens.extend(_event_triple(event, item.control, i))
    return TrainingExample(tuple(tokens))


_HEADER_RE = re.compile(r"#codec=(arrival|interarrival)\s+vocab=(\d+)")


def write_tokens(f: IO[str], rows: Iterable[Sequence[int]], codec: str) -> None:
    """Write token rows (one sequence or example per line) with a codec header."""
    size = {"arrival": AV.SIZE, "interarrival": IV.SIZE}[codec]
    f.write(f"#codec={codec} vocab={size}\n")
    for row in rows:
        f.write(" ".join(str(t) for t in row) + "\n")


def read_tokens(f: IO[str]) -> tuple[str, list[list[int]]]:
    """Read a token file; returns (codec, rows)."""
    header = f.readline()
    match = _HEADER_RE.match(header.strip())
    if not match:
        raise TokenError(f"missing or malformed token file header: {header!r}")
    codec = match.group(1)
    size = {"arrival": AV.SIZE, "interarrival": IV.SIZE}[codec]
    if int(match.group(2)) != size:
        raise TokenError(f"vocab size {match.group(2)} does not match codec {codec}")
    rows = []
    for line in f:
        line = line.strip()
        if line:
            rows.append([int(t) for t in line.split()])
    return codec, rows
