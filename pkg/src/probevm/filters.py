"""Declarative queries over program locations.

A filter is built once, is immutable afterwards, and can be shared by any
number of subscriptions. Criteria are AND-ed; the values listed inside one
criterion are OR-ed. An unset criterion is a wildcard.
"""

from __future__ import annotations

from dataclasses import dataclass
from typing import Optional


class InvalidFilter(Exception):
    pass


@dataclass(frozen=True)
class SourceSectionFilter:
    source_names: Optional[frozenset] = None
    language_ids: Optional[frozenset] = None
    tags: Optional[frozenset] = None
    line_range: Optional[tuple[int, int]] = None  # inclusive [lo, hi]
    index_range: Optional[tuple[int, int]] = None  # half-open [lo, hi) per source
    include_internal: bool = False

    def matches(self, node) -> bool:
        """True iff every set criterion passes for this node. Pure."""
        section = node.source_section
        if section is None or not node.instrumentable:
            return False
        source = section.source
        if source.internal and not self.include_internal:
            return False
        if self.source_names is not None and source.name not in self.source_names:
            return False
        if self.language_ids is not None and source.language_id not in self.language_ids:
            return False
        if self.tags is not None and not (node.tags & self.tags):
            return False
        if self.line_range is not None:
            lo, hi = self.line_range
            sl, _, el, _ = section.line_col()
            if el < lo or sl > hi:  # overlap, not containment
                return False
        if self.index_range is not None:
            lo, hi = self.index_range
            if section.char_end <= lo or section.char_start >= hi:
                if not (section.length == 0 and lo <= section.char_start < hi):
                    return False
        return True

    def root_may_match(self, root) -> bool:
        """Conservative root check: False guarantees no descendant matches."""
        if not root.sections_nested:
            return True
        section = root.source_section
        if section is None:
            return True
        source = section.source
        if source.internal and not self.include_internal:
            return False
        if self.source_names is not None and source.name not in self.source_names:
            return False
        if self.language_ids is not None and source.language_id not in self.language_ids:
            return False
        if self.line_range is not None:
            lo, hi = self.line_range
            sl, _, el, _ = section.line_col()
            if el < lo or sl > hi:
                return False
        if self.index_range is not None:
            lo, hi = self.index_range
            if section.char_end < lo or section.char_start >= hi:
                return False
        return True

    def matches_source(self, source) -> bool:
        """Source-level criteria only (used by source-load subscriptions)."""
        if source.internal and not self.include_internal:
            return False
        if self.source_names is not None and source.name not in self.source_names:
            return False
        if self.language_ids is not None and source.language_id not in self.language_ids:
            return False
        return True

    def to_json(self) -> dict:
        out = {}
        if self.source_names is not None:
            out["source"] = sorted(self.source_names)
        if self.language_ids is not None:
            out["language"] = sorted(self.language_ids)
        if self.tags is not None:
            out["tags"] = sorted(self.tags)
        if self.line_range is not None:
            out["line"] = list(self.line_range)
        if self.index_range is not None:
            out["index"] = list(self.index_range)
        if self.include_internal:
            out["includeInternal"] = True
        return out


class FilterBuilder:
    """Accumulates criteria; ``build`` freezes them into a SourceSectionFilter."""

    def __init__(self):
        self._source_names = None
        self._language_ids = None
        self._tags = None
        self._line_range = None
        self._index_range = None
        self._include_internal = False

    def source_is(self, *names: str) -> "FilterBuilder":
        self._source_names = (self._source_names or frozenset()) | frozenset(names)
        return self

    def language_is(self, *language_ids: str) -> "FilterBuilder":
        self._language_ids = (self._language_ids or frozenset()) | frozenset(language_ids)
        return self

    def tag_is(self, *tags: str) -> "FilterBuilder":
        self._tags = (self._tags or frozenset()) | frozenset(tags)
        return self

    def line_is(self, line: int) -> "FilterBuilder":
        return self.line_in(line, line)

    def line_in(self, lo: int, hi: int) -> "FilterBuilder":
        if lo > hi or lo < 1:
            raise InvalidFilter(f"bad line range [{lo}, {hi}]")
        self._line_range = (lo, hi)
        return self

    def index_in(self, lo: int, hi: int) -> "FilterBuilder":
        if lo > hi or lo < 0:
            raise InvalidFilter(f"bad index range [{lo}, {hi})")
        self._index_range = (lo, hi)
        return self

    def include_internal(self, flag: bool = True) -> "FilterBuilder":
        self._include_internal = flag
        return self

    def build(self) -> SourceSectionFilter:
        return SourceSectionFilter(
            source_names=self._source_names,
            language_ids=self._language_ids,
            tags=self._tags,
            line_range=self._line_range,
            index_range=self._index_range,
            include_internal=self._include_internal,
        )


def new_filter() -> FilterBuilder:
    return FilterBuilder()
