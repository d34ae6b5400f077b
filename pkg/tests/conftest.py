"""Shared random-sequence generators for the test suite.

Most statistical tests drive seeded numpy generators directly; hypothesis
covers structural round-trip properties with smaller examples.
"""

from __future__ import annotations

import numpy as np
import pytest

from anticipate.events import Event, EventSequence, encode_note


def random_events(
    rng: np.random.Generator,
    n: int,
    *,
    max_gap: int = 300,
    max_duration: int = 300,
    n_instruments: int = 3,
    avoid_note_overlap: bool = False,
    start_at_zero: bool = False,
) -> EventSequence:
    """Random time-sorted events with bounded inter-onset gaps.

    ``avoid_note_overlap`` truncates earlier same-note events so that
    onset/offset pairings are unambiguous (required for the codecs and MIDI
    round-trips). Bounded gaps and durations also keep interarrival gaps
    within the 10-second token cap. ``start_at_zero`` anchors the first
    onset at time zero, which the interarrival codec needs for exact
    round-trips (it has no absolute time reference).
    """
    instruments = list(rng.choice(128, size=n_instruments, replace=False))
    times = np.cumsum(rng.integers(0, max_gap + 1, size=n))
    if start_at_zero and n:
        times -= times[0]
    events: list[Event] = []
    last_end: dict[int, int] = {}
    for t in times.tolist():
        note = encode_note(
            int(instruments[rng.integers(len(instruments))]), int(rng.integers(128))
        )
        duration = int(rng.integers(0, max_duration + 1))
        if avoid_note_overlap and note in last_end and last_end[note] > t:
            # Truncate the earlier clashing note instead of re-drawing.
            for i in range(len(events) - 1, -1, -1):
                if events[i].note == note and events[i].end > t:
                    events[i] = Event(events[i].time, t - events[i].time, note)
            last_end[note] = t
        events.append(Event(t, duration, note))
        last_end[note] = max(last_end.get(note, 0), t + duration)
    return EventSequence(events, sort=True)


def random_controls(
    rng: np.random.Generator, k: int, *, max_time: int, max_duration: int = 300
) -> EventSequence:
    times = np.sort(rng.integers(0, max_time + 1, size=k))
    return EventSequence(
        Event(int(t), int(rng.integers(0, max_duration + 1)), encode_note(0, int(rng.integers(128))))
        for t in times
    )


@pytest.fixture
def rng() -> np.random.Generator:
    return np.random.default_rng(20_260_809)
