"""Standard MIDI File parsing and writing.

The parser handles format 0/1 files: note-on/off pairs become quantized
events with absolute seconds computed through a piecewise tempo map.
Note-ons with velocity zero are note-offs; channel 10 (0-indexed 9) is the
drum kit (instrument 128); other channels take the most recent program
change, defaulting to program 0. Overlapping same-pitch notes on one channel
pair FIFO: a note-off closes the earliest open note of that pitch.

The writer emits format-1 files at a fixed 500000 us/quarter and 480
ticks/quarter. At that resolution one 10ms grid unit is 9.6 ticks; the
rounding error stays well under half a grid unit in both directions, so
parse(write(s)) == s for rest-free sequences.
"""

from __future__ import annotations

import logging
from bisect import bisect_right
from dataclasses import dataclass

from .events import DRUM_INSTRUMENT, Event, EventSequence, encode_note, seconds_to_units

log = logging.getLogger(__name__)

DEFAULT_TEMPO = 500_000  # microseconds per quarter note
WRITE_TICKS_PER_QUARTER = 480

_CHANNEL_MESSAGE_LENGTH = {
    0x80: 2,  # note off
    0x90: 2,  # note on
    0xA0: 2,  # polyphonic aftertouch
    0xB0: 2,  # control change
    0xC0: 1,  # program change
    0xD0: 1,  # channel aftertouch
    0xE0: 2,  # pitch bend
}


class MidiParseError(ValueError):
    """Malformed MIDI data; ``offset`` is the byte position of the problem."""

    def __init__(self, message: str, offset: int):
        super().__init__(f"{message} (byte offset {offset})")
        self.offset = offset


class ChannelCapacityError(ValueError):
    """More distinct instruments than MIDI channels can carry."""


class _Reader:
    __slots__ = ("data", "pos")

    def __init__(self, data: bytes, pos: int = 0):
        self.data = data
        self.pos = pos

    def take(self, n: int) -> bytes:
        if self.pos + n > len(self.data):
            raise MidiParseError("unexpected end of data", self.pos)
        chunk = self.data[self.pos : self.pos + n]
        self.pos += n
        return chunk

    def u8(self) -> int:
        return self.take(1)[0]

    def u16(self) -> int:
        return int.from_bytes(self.take(2), "big")

    def u32(self) -> int:
        return int.from_bytes(self.take(4), "big")

    def varint(self) -> int:
        value = 0
        for _ in range(4):
            byte = self.u8()
            value = (value << 7) | (byte & 0x7F)
            if not byte & 0x80:
                return value
        raise MidiParseError("variable-length quantity too long", self.pos)


class _TempoMap:
    """Piecewise tick-to-seconds conversion."""

    def __init__(self, ticks_per_quarter: int, changes: list[tuple[int, int]]):
        # changes: (tick, us_per_quarter), merged across tracks in file order
        merged: dict[int, int] = {0: DEFAULT_TEMPO}
        for tick, tempo in changes:
            merged[tick] = tempo  # last change at a tick wins
        self.ticks = sorted(merged)
        self.tempos = [merged[t] for t in self.ticks]
        self.seconds = [0.0]
        for i in range(1, len(self.ticks)):
            span = self.ticks[i] - self.ticks[i - 1]
            self.seconds.append(
                self.seconds[i - 1] + span * self.tempos[i - 1] / (1e6 * ticks_per_quarter)
            )
        self.ticks_per_quarter = ticks_per_quarter

    def to_seconds(self, tick: int) -> float:
        i = bisect_right(self.ticks, tick) - 1
        span = tick - self.ticks[i]
        return self.seconds[i] + span * self.tempos[i] / (1e6 * self.ticks_per_quarter)


class _SmpteMap:
    """Constant tick-to-seconds conversion for SMPTE divisions."""

    def __init__(self, ticks_per_second: float):
        self.ticks_per_second = ticks_per_second

    def to_seconds(self, tick: int) -> float:
        return tick / self.ticks_per_second


@dataclass
class _Note:
    tick: int
    order: int
    channel: int
    pitch: int
    on: bool


def parse_midi(data: bytes) -> EventSequence:
    """Parse a format-0/1 Standard MIDI File into a quantized event sequence.

    Events are sorted by time with the original file order breaking ties.
    Unpaired note-ons are closed at the end of the file (duration capped at
    10 s) and counted as warnings.
    """
    reader = _Reader(data)
    if reader.take(4) != b"MThd":
        raise MidiParseError("not a MIDI file (missing MThd)", 0)
    header_length = reader.u32()
    if header_length < 6:
        raise MidiParseError(f"bad header length {header_length}", reader.pos - 4)
    fmt = reader.u16()
    ntrks = reader.u16()
    division = reader.u16()
    reader.take(header_length - 6)
    if fmt not in (0, 1):
        raise MidiParseError(f"unsupported MIDI format {fmt}", 8)

    notes: list[_Note] = []
    tempo_changes: list[tuple[int, int]] = []
    programs: list[tuple[int, int, int, int]] = []  # (tick, order, channel, program)
    order = 0
    max_tick = 0

    for _ in range(ntrks):
        chunk_start = reader.pos
        if reader.take(4) != b"MTrk":
            raise MidiParseError("expected MTrk chunk", chunk_start)
        length = reader.u32()
        end = reader.pos + length
        if end > len(data):
            raise MidiParseError("track length overruns file", chunk_start + 4)
        tick = 0
        running_status: int | None = None
        while reader.pos < end:
            tick += reader.varint()
            status = reader.u8()
            if status < 0x80:
                if running_status is None:
                    raise MidiParseError("data byte without running status", reader.pos - 1)
                reader.pos -= 1
                status = running_status
            if status == 0xFF:
                running_status = None
                meta_type = reader.u8()
                meta = reader.take(reader.varint())
                if meta_type == 0x51 and len(meta) == 3:
                    tempo_changes.append((tick, int.from_bytes(meta, "big")))
            elif status in (0xF0, 0xF7):
                running_status = None
                reader.take(reader.varint())
            elif status >= 0xF0:
                raise MidiParseError(f"unsupported status byte 0x{status:02x}", reader.pos - 1)
            else:
                running_status = status
                kind = status & 0xF0
                channel = status & 0x0F
                payload = reader.take(_CHANNEL_MESSAGE_LENGTH[kind])
                if kind in (0x80, 0x90):
                    pitch, velocity = payload[0], payload[1]
                    on = kind == 0x90 and velocity > 0
                    notes.append(_Note(tick, order, channel, pitch, on))
                    order += 1
                elif kind == 0xC0:
                    programs.append((tick, order, channel, payload[0]))
                    order += 1
            max_tick = max(max_tick, tick)
        reader.pos = end

    if division & 0x8000:
        frames = 256 - ((division >> 8) & 0xFF)
        ticks_per_frame = division & 0xFF
        if frames == 0 or ticks_per_frame == 0:
            raise MidiParseError("invalid SMPTE division", 12)
        clock: _TempoMap | _SmpteMap = _SmpteMap(frames * ticks_per_frame)
    else:
        if division == 0:
            raise MidiParseError("zero ticks per quarter note", 12)
        clock = _TempoMap(division, sorted(tempo_changes, key=lambda c: c[0]))

    # Per-channel program timelines for instrument lookup at note onset.
    program_map: dict[int, list[tuple[int, int, int]]] = {}
    for tick, ord_, channel, program in sorted(programs, key=lambda p: (p[0], p[1])):
        program_map.setdefault(channel, []).append((tick, ord_, program))

    def instrument_at(channel: int, tick: int) -> int:
        if channel == 9:
            return DRUM_INSTRUMENT
        timeline = program_map.get(channel)
        if not timeline:
            return 0
        i = bisect_right(timeline, (tick, float("inf"), 0)) - 1
        return timeline[i][2] if i >= 0 else 0

    notes.sort(key=lambda n: (n.tick, n.order))
    open_notes: dict[tuple[int, int], list[tuple[int, int]]] = {}
    finished: list[tuple[int, int, Event]] = []  # (onset order, ...) for tie-breaks
    stray_offs = 0
    for note in notes:
        key = (note.channel, note.pitch)
        if note.on:
            open_notes.setdefault(key, []).append((note.tick, note.order))
        else:
            queue = open_notes.get(key)
            if not queue:
                stray_offs += 1
                continue
            on_tick, on_order = queue.pop(0)
            finished.append(
                (on_order, on_tick, _make_event(clock, on_tick, note.tick, note.channel, note.pitch, instrument_at))
            )

    unpaired = sum(len(q) for q in open_notes.values())
    if unpaired:
        log.warning("closing %d unpaired note-ons at end of file", unpaired)
        for (channel, pitch), queue in open_notes.items():
            for on_tick, on_order in queue:
                finished.append(
                    (on_order, on_tick, _make_event(clock, on_tick, max_tick, channel, pitch, instrument_at))
                )
    if stray_offs:
        log.warning("ignored %d note-offs without a matching note-on", stray_offs)

    finished.sort(key=lambda item: (item[2].time, item[0]))
    return EventSequence(e for _, _, e in finished)


def _make_event(clock, on_tick, off_tick, channel, pitch, instrument_at) -> Event:
    on_seconds = clock.to_seconds(on_tick)
    off_seconds = clock.to_seconds(max(off_tick, on_tick))
    time = seconds_to_units(on_seconds)
    duration = min(seconds_to_units(off_seconds - on_seconds), 999)
    return Event(time, duration, encode_note(instrument_at(channel, on_tick), pitch))


def _varint(value: int) -> bytes:
    out = [value & 0x7F]
    value >>= 7
    while value:
        out.append((value & 0x7F) | 0x80)
        value >>= 7
    return bytes(reversed(out))


def _track_chunk(messages: list[tuple[int, bytes]]) -> bytes:
    """Assemble delta-encoded track bytes from (tick, message) pairs."""
    body = bytearray()
    previous = 0
    for tick, message in messages:
        body += _varint(tick - previous)
        body += message
        previous = tick
    body += _varint(0) + b"\xff\x2f\x00"  # end of track
    return b"MTrk" + len(body).to_bytes(4, "big") + bytes(body)


def _units_to_ticks(units: int) -> int:
    # 9.6 ticks per grid unit at 480 tpq / 500000 us per quarter
    return (units * 96 + 5) // 10


def write_midi(seq: EventSequence) -> bytes:
    """Write events as a format-1 MIDI file; rests are dropped.

    Drums go on channel 10; other instruments are assigned channels in order
    of first appearance. More than 15 distinct non-drum instruments exceed
    the available channels.
    """
    playable = [e for e in seq if not e.is_rest]

    channel_of: dict[int, int] = {}
    free_channels = [c for c in range(16) if c != 9]
    for event in playable:
        instrument = event.instrument
        if instrument in channel_of:
            continue
        if instrument == DRUM_INSTRUMENT:
            channel_of[instrument] = 9
        elif free_channels:
            channel_of[instrument] = free_channels.pop(0)
        else:
            raise ChannelCapacityError(
                "more than 15 distinct non-drum instruments cannot share one file"
            )

    messages: list[tuple[int, int, int, bytes]] = []  # (tick, kind, order, bytes)
    for instrument, channel in sorted(channel_of.items(), key=lambda kv: kv[1]):
        if instrument != DRUM_INSTRUMENT:
            messages.append((0, 0, -1, bytes([0xC0 | channel, instrument])))
    for i, event in enumerate(playable):
        channel = channel_of[event.instrument]
        pitch = event.pitch
        on_tick = _units_to_ticks(event.time)
        off_tick = _units_to_ticks(event.end)
        messages.append((on_tick, 2, i, bytes([0x90 | channel, pitch, 64])))
        # Offs sort before ons at the same tick so touching same-pitch notes
        # re-trigger instead of swallowing each other; a zero-length note
        # keeps its off just after its own on.
        off_kind = 1 if off_tick > on_tick else 2
        messages.append((off_tick, off_kind, i, bytes([0x80 | channel, pitch, 0])))
    messages.sort(key=lambda m: (m[0], m[1], m[2]))

    tempo_track = _track_chunk([(0, b"\xff\x51\x03" + DEFAULT_TEMPO.to_bytes(3, "big"))])
    note_track = _track_chunk([(tick, msg) for tick, _, _, msg in messages])
    header = b"MThd" + (6).to_bytes(4, "big")
    header += (1).to_bytes(2, "big") + (2).to_bytes(2, "big")
    header += WRITE_TICKS_PER_QUARTER.to_bytes(2, "big")
    return header + tempo_track + note_track
