#!/usr/bin/env python3
"""Why controls are interleaved where they are.

A control on time s should sit in the sequence near the events it will
accompany, a little ahead of time s itself. The catch: during generation we
only ever see the prefix, so "where does the next control go" must be
decidable without peeking at future events. Placing each control right
after the first event whose time reaches s - delta has that property; the
naive sort-order placement does not.
"""

from anticipate.anticipation import (
    densify,
    interleave,
    next_anticipated_controls,
    sort_order_interleave,
)
from anticipate.events import Event, EventSequence


def show(label, seq):
    cells = [
        f"{'u' if item.control else 'e'}@{item.event.time / 100:g}s" for item in seq
    ]
    print(f"  {label:12s} {'  '.join(cells)}")


mark = lambda t: Event(t, 10, 60)

# Events at 1s, 3s, 5s; one control on 7s; anticipation interval 5s.
events = EventSequence([mark(100), mark(300), mark(500)])
controls = EventSequence([Event(700, 10, 72)])

print("control on 7s, delta 5s:")
show("anticipated", interleave(events, controls, 500))
show("sort order", sort_order_interleave(events, controls, 500))
print("""\
  The sort order treats the control as if it were at 2s, before the 3s
  event. But that slot is only known after the 3s event arrives: a sampler
  cannot decide it from the prefix. The anticipated placement (after the
  first event at or beyond 2s) needs nothing from the future.
""")

# Replay the same decision online: after each event, ask which controls are
# now within delta. The resulting stream is identical, item for item.
online = []
cursor = 0
for event in events:
    online.append(f"e@{event.time / 100:g}s")
    due, cursor = next_anticipated_controls(controls, cursor, event.time, 500)
    online.extend(f"u@{c.time / 100:g}s" for c in due)
print(f"  online loop   {'  '.join(online)}\n")

# Sparse streams can out-run their controls: here the control on 4.5s lands
# after the 5s event (delta 2s).
sparse_events = EventSequence([mark(100), mark(200), mark(500)])
late_control = EventSequence([Event(450, 10, 72)])
print("sparse stream, control on 4.5s, delta 2s:")
show("anticipated", interleave(sparse_events, late_control, 200))

# Rest events restore density: with at most 1s between events, the control
# surfaces between the 3s and 4s placeholders, half a second early.
dense = densify(sparse_events, 100)
print("after inserting rests at 3s and 4s:")
show("anticipated", interleave(dense, late_control, 200))
