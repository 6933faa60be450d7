"""Monotone original-to-variant line correspondence.

Every RTL transformation produces a LineMap describing how the variant's
lines relate to the original's: contiguous segments of surviving lines
with a signed shift, plus the set of deleted original lines. Trace
normalization inverse-maps variant lines back to original coordinates
through it.
"""

from __future__ import annotations

from dataclasses import dataclass


@dataclass(frozen=True)
class Segment:
    start: int  # original line range, inclusive
    end: int
    delta: int


@dataclass(frozen=True)
class LineMap:
    segments: tuple[Segment, ...]
    deleted: frozenset[int]
    source_lines: int  # line count of the original file

    def __post_init__(self):
        prev_end = 0
        prev_image = 0
        for seg in self.segments:
            if seg.start <= prev_end:
                raise ValueError("segments overlap or are unsorted")
            if seg.start + seg.delta <= prev_image:
                raise ValueError("mapping is not strictly monotone")
            prev_end = seg.end
            prev_image = seg.end + seg.delta

    @staticmethod
    def identity(source_lines: int) -> "LineMap":
        if source_lines < 1:
            return LineMap((), frozenset(), 0)
        return LineMap((Segment(1, source_lines, 0),), frozenset(), source_lines)

    @staticmethod
    def from_insertion(at: int, count: int, source_lines: int) -> "LineMap":
        """`count` new lines inserted so the old line `at` becomes `at+count`."""
        segs = []
        if at > 1:
            segs.append(Segment(1, at - 1, 0))
        if at <= source_lines:
            segs.append(Segment(at, source_lines, count))
        return LineMap(tuple(segs), frozenset(), source_lines)

    @staticmethod
    def from_deletion(first: int, last: int, source_lines: int) -> "LineMap":
        segs = []
        if first > 1:
            segs.append(Segment(1, first - 1, 0))
        removed = last - first + 1
        if last < source_lines:
            segs.append(Segment(last + 1, source_lines, -removed))
        return LineMap(tuple(segs), frozenset(range(first, last + 1)), source_lines)

    @property
    def is_identity(self) -> bool:
        return not self.deleted and all(s.delta == 0 for s in self.segments)

    def map_line(self, line: int) -> int | None:
        """Original -> variant; None for deleted lines."""
        if line in self.deleted:
            return None
        for seg in self.segments:
            if seg.start <= line <= seg.end:
                return line + seg.delta
        return None

    def unmap_line(self, line: int) -> int | None:
        """Variant -> original; None for lines with no original (inserted)."""
        for seg in self.segments:
            if seg.start + seg.delta <= line <= seg.end + seg.delta:
                return line - seg.delta
        return None

    def variant_lines(self) -> int:
        """Line count of the variant file."""
        inserted_tail = 0
        if self.segments:
            last = self.segments[-1]
            inserted_tail = last.end + last.delta
        return max(inserted_tail, self.source_lines - len(self.deleted))

    def compose(self, then: "LineMap") -> "LineMap":
        """Map through self, then through `then` (self's variant coordinates
        must be `then`'s original coordinates)."""
        deleted = set(self.deleted)
        points: list[tuple[int, int]] = []
        for line in range(1, self.source_lines + 1):
            mid = self.map_line(line)
            if mid is None:
                continue
            out = then.map_line(mid)
            if out is None:
                deleted.add(line)
            else:
                points.append((line, out))
        segments: list[Segment] = []
        for line, out in points:
            delta = out - line
            if segments and segments[-1].end == line - 1 and segments[-1].delta == delta:
                segments[-1] = Segment(segments[-1].start, line, delta)
            else:
                segments.append(Segment(line, line, delta))
        return LineMap(tuple(segments), frozenset(deleted), self.source_lines)
