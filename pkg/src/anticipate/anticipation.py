"""The interleaving engine: offline placement of controls among events, the
online emission rule that reproduces it, rest densification for sparse
sequences, and the split/sort inverse for infilling.

A control on time ``s`` is placed immediately after the first event whose
time reaches ``s - delta`` (and after any earlier-queued controls).  The
placement rule depends only on the prefix already emitted, so exactly the
same interleaving falls out of an online loop that alternates "emit next
event" with "emit every pending control within delta of it".  Controls whose
condition is never met (the event stream ends too early) are appended at the
tail so the interleaving stays lossless.

Times and ``delta`` are compared in whatever unit the events carry; the
quantized 10ms grid is the default throughout the toolkit.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Sequence

from .events import (
    REST,
    UNITS_PER_SECOND,
    Event,
    EventSequence,
    InterleavedSequence,
    TaggedEvent,
)


@dataclass(frozen=True)
class AnticipationConfig:
    """Interleaving parameters, in seconds.

    ``delta`` is how far ahead controls surface; ``target_density`` is the
    maximum inter-event gap enforced by rest insertion.
    """

    delta: float = 5.0
    target_density: float = 1.0

    def __post_init__(self) -> None:
        if self.delta <= 0:
            raise ValueError("delta must be positive")
        if self.target_density <= 0:
            raise ValueError("target_density must be positive")

    @property
    def delta_units(self) -> int:
        return round(self.delta * UNITS_PER_SECOND)

    @property
    def density_units(self) -> int:
        return round(self.target_density * UNITS_PER_SECOND)


def densify(seq: EventSequence, target: int) -> EventSequence:
    """Insert rest events so no inter-event gap exceeds ``target`` units.

    A gap in ``(n*target, (n+1)*target]`` gets ``n`` rests at multiples of
    ``target`` past the earlier event; a gap of exactly ``target`` gets none.
    """
    if target <= 0:
        raise ValueError("target density must be positive")
    out: list[Event] = []
    for event in seq:
        if out:
            gap = event.time - out[-1].time
            base = out[-1].time
            n = (gap - 1) // target if gap > 0 else 0
            out.extend(Event(base + m * target, 0, REST) for m in range(1, n + 1))
        out.append(event)
    return EventSequence(out)


def interleave(
    events: EventSequence, controls: EventSequence, delta: float
) -> InterleavedSequence:
    """Offline interleaving of events and controls.

    Each control lands immediately after the first event whose time is at
    least ``control.time - delta``; never-satisfied controls are appended
    after the final event in control order.
    """
    if delta <= 0:
        raise ValueError("delta must be positive")
    out: list[TaggedEvent] = []
    k = 0
    for event in events:
        out.append(TaggedEvent(event))
        while k < len(controls) and controls[k].time <= event.time + delta:
            out.append(TaggedEvent(controls[k], control=True))
            k += 1
    while k < len(controls):
        out.append(TaggedEvent(controls[k], control=True))
        k += 1
    return InterleavedSequence(out)


def next_anticipated_controls(
    controls: Sequence[Event], cursor: int, last_event_time: float, delta: float
) -> tuple[list[Event], int]:
    """Online emission rule: controls due after an event at ``last_event_time``.

    Returns the maximal prefix of unconsumed controls with time at most
    ``last_event_time + delta`` and the advanced cursor.  The decision uses
    only the event just emitted and the cursor, never future events.
    """
    due: list[Event] = []
    while cursor < len(controls) and controls[cursor].time <= last_event_time + delta:
        due.append(controls[cursor])
        cursor += 1
    return due, cursor


def sort_order_interleave(
    events: EventSequence, controls: EventSequence, delta: float
) -> InterleavedSequence:
    """The naive merge that treats a control on time ``s`` as an event at
    ``s - delta``.

    This placement depends on the event *following* each control, so it
    cannot be produced by an online sampler; it exists as the contrast case
    for tests and demos.
    """
    entries = [(e.time, 1, i, TaggedEvent(e)) for i, e in enumerate(events)]
    entries += [
        (c.time - delta, 0, i, TaggedEvent(c, control=True)) for i, c in enumerate(controls)
    ]
    # Adjusted-time ties put the control before the event, matching a merge
    # where the shifted control arrives first.
    entries.sort(key=lambda entry: (entry[0], entry[1], entry[2]))
    return InterleavedSequence((entry[3] for entry in entries), check=False)


def event_sort_key(event: Event):
    """Canonical total order on events: time, then note, then duration.

    Interleaving discards the original relative order of equal-time events,
    so the inverse sorts them canonically; sequences already in canonical
    order round-trip exactly.
    """
    return (event.time, event.note, event.duration)


def split_and_sort(seq: InterleavedSequence) -> EventSequence:
    """Undo an infilling interleave: drop tags, merge, sort canonically."""
    return EventSequence(
        sorted((item.event for item in seq), key=event_sort_key)
    )
