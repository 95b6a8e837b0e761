"""Immutable program text with code-point-precise sections and line/column mapping.

Indices count Unicode code points (never bytes). Lines and columns are 1-based.
CRLF input is normalized to LF when a Source is created, so column arithmetic is
identical on every platform.
"""

from __future__ import annotations

from dataclasses import dataclass, field


class SourceError(Exception):
    pass


class DuplicateSource(SourceError):
    pass


class InvalidSection(SourceError):
    pass


class InvalidPosition(SourceError):
    pass


@dataclass(frozen=True)
class Source:
    """A named, immutable piece of guest-language text.

    ``internal`` marks text that carries no meaning for an end user (builtins,
    synthesized glue); default filters skip internal sources.
    """

    name: str
    language_id: str
    text: str
    internal: bool = False
    # code-point offset of the start of each line, computed once
    _line_starts: tuple[int, ...] = field(init=False, repr=False, compare=False, default=())

    def __post_init__(self):
        if not self.name:
            raise SourceError("source name must be non-empty")
        object.__setattr__(self, "text",
                           self.text.replace("\r\n", "\n").replace("\r", "\n"))
        starts = [0]
        for i, ch in enumerate(self.text):
            if ch == "\n":
                starts.append(i + 1)
        object.__setattr__(self, "_line_starts", tuple(starts))

    @property
    def line_count(self) -> int:
        return len(self._line_starts)

    def section(self, char_start: int, length: int) -> "SourceSection":
        if char_start < 0 or length < 0 or char_start + length > len(self.text):
            raise InvalidSection(
                f"range [{char_start}, {char_start + length}) outside "
                f"{self.name!r} (length {len(self.text)})"
            )
        return SourceSection(self, char_start, length)

    def line_col(self, index: int) -> tuple[int, int]:
        """1-based (line, col) of the code point at ``index``."""
        if index < 0 or index > len(self.text):
            raise InvalidPosition(f"index {index} outside {self.name!r}")
        # binary search over line starts
        lo, hi = 0, len(self._line_starts) - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if self._line_starts[mid] <= index:
                lo = mid
            else:
                hi = mid - 1
        return lo + 1, index - self._line_starts[lo] + 1

    def position_of(self, line: int, col: int) -> int:
        """Inverse of line_col: code-point index of 1-based (line, col)."""
        if line < 1 or line > len(self._line_starts) or col < 1:
            raise InvalidPosition(f"({line},{col}) outside {self.name!r}")
        start = self._line_starts[line - 1]
        end = self._line_starts[line] - 1 if line < len(self._line_starts) else len(self.text)
        index = start + col - 1
        # allow col pointing at the newline / one past EOF (an empty section there)
        if index > end:
            raise InvalidPosition(f"({line},{col}) beyond end of line {line} in {self.name!r}")
        return index


@dataclass(frozen=True)
class SourceSection:
    """A contiguous code-point range of a Source, with derived line/col bounds."""

    source: Source
    char_start: int
    length: int

    @property
    def char_end(self) -> int:
        return self.char_start + self.length

    @property
    def text(self) -> str:
        return self.source.text[self.char_start:self.char_end]

    def line_col(self) -> tuple[int, int, int, int]:
        """(start_line, start_col, end_line, end_col), all 1-based.

        For an empty section the end equals the start. For a non-empty section
        the end coordinates name the last code point inside the section.
        """
        cached = self.__dict__.get("_line_col")
        if cached is not None:
            return cached
        sl, sc = self.source.line_col(self.char_start)
        if self.length == 0:
            result = (sl, sc, sl, sc)
        else:
            el, ec = self.source.line_col(self.char_end - 1)
            result = (sl, sc, el, ec)
        # frozen dataclass: write the cache slot directly, bypassing __setattr__
        self.__dict__["_line_col"] = result
        return result

    @property
    def start_line(self) -> int:
        return self.line_col()[0]

    @property
    def end_line(self) -> int:
        return self.line_col()[2]

    def covers_line(self, line: int) -> bool:
        sl, _, el, _ = self.line_col()
        return sl <= line <= el

    def contains(self, other: "SourceSection") -> bool:
        return (self.source is other.source
                and self.char_start <= other.char_start
                and other.char_end <= self.char_end)

    def __str__(self) -> str:
        sl, sc, el, ec = self.line_col()
        return f"{self.source.name}:{sl}:{sc}-{el}:{ec}"
