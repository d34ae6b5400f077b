"""Corpus preprocessing: parse a directory of MIDI files, apply acceptance
filters, split by content hash, and write accepted sequences as event text.

Filters mirror the dataset recipe this toolkit targets: drop files that fail
to parse, sequences shorter than 100 events or 10 seconds, sequences longer
than one hour, and sequences with more than 16 distinct instrument parts.
The split is a pure function of the file's MD5 digest: leading hex digits
0-d go to train, e to validation, f to test (14:1:1 in expectation).
"""

from __future__ import annotations

import hashlib
import logging
from dataclasses import dataclass, field
from pathlib import Path
from typing import IO

from .events import UNITS_PER_SECOND, Event, EventSequence
from .eventio import write_events
from .midi import MidiParseError, parse_midi

log = logging.getLogger(__name__)

SPLITS = ("train", "valid", "test")

MANIFEST_HEADER = "id md5 split events seconds parts reason"


def split_for_digest(md5_hex: str) -> str:
    """Map an MD5 hex digest to its split by leading hex digit."""
    digit = md5_hex[0].lower()
    if digit in "0123456789abcd":
        return "train"
    if digit == "e":
        return "valid"
    if digit == "f":
        return "test"
    raise ValueError(f"not a hex digest: {md5_hex!r}")


@dataclass
class CorpusFilters:
    min_events: int = 100
    min_seconds: float = 10.0
    max_seconds: float = 3600.0
    max_parts: int = 16


@dataclass
class ManifestEntry:
    file_id: str
    md5: str
    split: str
    events: int
    seconds: float
    parts: int
    reason: str | None = None  # None means accepted

    def to_row(self) -> str:
        reason = self.reason if self.reason is not None else "-"
        return "\t".join(
            [self.file_id, self.md5, self.split, str(self.events), f"{self.seconds:.2f}", str(self.parts), reason]
        )

    @classmethod
    def from_row(cls, row: str) -> "ManifestEntry":
        file_id, md5, split, events, seconds, parts, reason = row.rstrip("\n").split("\t")
        return cls(
            file_id,
            md5,
            split,
            int(events),
            float(seconds),
            int(parts),
            None if reason == "-" else reason,
        )


@dataclass
class CorpusManifest:
    entries: list[ManifestEntry] = field(default_factory=list)

    def accepted(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.reason is None]

    def rejected(self) -> list[ManifestEntry]:
        return [e for e in self.entries if e.reason is not None]

    def write(self, f: IO[str]) -> None:
        f.write(MANIFEST_HEADER + "\n")
        for entry in self.entries:
            f.write(entry.to_row() + "\n")

    @classmethod
    def read(cls, f: IO[str]) -> "CorpusManifest":
        header = f.readline().strip()
        if header != MANIFEST_HEADER:
            raise ValueError(f"unexpected manifest header: {header!r}")
        return cls([ManifestEntry.from_row(line) for line in f if line.strip()])


def check_sequence(seq: EventSequence, filters: CorpusFilters) -> str | None:
    """Return a rejection reason for a parsed sequence, or None if accepted."""
    if len(seq) < filters.min_events:
        return "too-short-events"
    seconds = seq.end_time / UNITS_PER_SECOND
    if seconds < filters.min_seconds:
        return "too-short-duration"
    if seconds > filters.max_seconds:
        return "too-long"
    if len(seq.instruments()) > filters.max_parts:
        return "too-many-parts"
    return None


def normalize_start(seq: EventSequence) -> EventSequence:
    """Shift a sequence so its first event starts at time zero."""
    if not len(seq):
        return seq
    offset = seq[0].time
    if offset == 0:
        return seq
    return EventSequence(Event(e.time - offset, e.duration, e.note) for e in seq)


def discover_midi_files(directory: Path) -> list[Path]:
    paths = [p for p in directory.rglob("*") if p.suffix.lower() in (".mid", ".midi")]
    return sorted(paths)


def preprocess_corpus(
    directory: str | Path,
    out_dir: str | Path,
    filters: CorpusFilters | None = None,
) -> CorpusManifest:
    """Ingest a directory of MIDI files into split event-text files.

    Writes ``train.txt``, ``valid.txt``, ``test.txt`` and ``manifest.tsv``
    under ``out_dir``. Individual file failures are recorded in the manifest
    and never abort the batch.
    """
    directory = Path(directory)
    out_dir = Path(out_dir)
    filters = filters or CorpusFilters()
    if not directory.is_dir():
        raise NotADirectoryError(f"not a readable directory: {directory}")
    paths = discover_midi_files(directory)

    out_dir.mkdir(parents=True, exist_ok=True)
    manifest = CorpusManifest()
    split_sequences: dict[str, list[EventSequence]] = {s: [] for s in SPLITS}
    for path in paths:
        file_id = path.relative_to(directory).as_posix()
        try:
            data = path.read_bytes()
        except OSError as exc:
            log.warning("skipping unreadable file %s: %s", path, exc)
            manifest.entries.append(ManifestEntry(file_id, "-", "-", 0, 0.0, 0, "unreadable"))
            continue
        md5 = hashlib.md5(data).hexdigest()
        split = split_for_digest(md5)
        try:
            seq = normalize_start(parse_midi(data))
        except (MidiParseError, ValueError) as exc:
            log.info("failed to parse %s: %s", path, exc)
            manifest.entries.append(ManifestEntry(file_id, md5, split, 0, 0.0, 0, "unparseable"))
            continue
        reason = check_sequence(seq, filters)
        entry = ManifestEntry(
            file_id,
            md5,
            split,
            len(seq),
            seq.end_time / UNITS_PER_SECOND,
            len(seq.instruments()),
            reason,
        )
        manifest.entries.append(entry)
        if reason is None:
            split_sequences[split].append(seq)

    for split in SPLITS:
        with open(out_dir / f"{split}.txt", "w") as f:
            write_events(f, split_sequences[split])
    with open(out_dir / "manifest.tsv", "w") as f:
        manifest.write(f)
    return manifest
