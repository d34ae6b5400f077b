"""Plain-text serialization for event sequences.

One event per line as three space-separated decimal integers ``t d n`` in
grid units, with ``R`` in the note column for rests. Lines starting with
``C `` mark control events. A blank line separates sequences.
"""

from __future__ import annotations

from typing import IO, Iterable

from .events import REST, Event, EventSequence, InterleavedSequence, TaggedEvent


def format_item(item: TaggedEvent) -> str:
    e = item.event
    note = "R" if e.is_rest else str(e.note)
    line = f"{e.time} {e.duration} {note}"
    return f"C {line}" if item.control else line


def parse_line(line: str) -> TaggedEvent:
    fields = line.split()
    control = False
    if fields and fields[0] == "C":
        control = True
        fields = fields[1:]
    if len(fields) != 3:
        raise ValueError(f"malformed event line: {line!r}")
    time, duration = int(fields[0]), int(fields[1])
    note = REST if fields[2] == "R" else int(fields[2])
    return TaggedEvent(Event(time, duration, note), control=control)


def write_events(f: IO[str], sequences: Iterable[InterleavedSequence | EventSequence]) -> None:
    """Write sequences in the event text format, blank-line separated."""
    first = True
    for seq in sequences:
        if not first:
            f.write("\n")
        first = False
        if isinstance(seq, EventSequence):
            seq = InterleavedSequence.from_events(seq)
        for item in seq:
            f.write(format_item(item) + "\n")


def read_events(f: IO[str], *, check: bool = True) -> list[InterleavedSequence]:
    """Read blank-line separated sequences from the event text format.

    Runs of blank lines collapse to a single separator, so empty sequences
    are not representable.
    """
    sequences: list[InterleavedSequence] = []
    current: list[TaggedEvent] = []
    for raw in f:
        line = raw.strip()
        if not line:
            if current:
                sequences.append(InterleavedSequence(current, check=check))
                current = []
            continue
        current.append(parse_line(line))
    if current:
        sequences.append(InterleavedSequence(current, check=check))
    return sequences
