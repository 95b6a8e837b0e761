"""Contract every guest language implements.

Keeping this surface small is the point: the instrumentation core, the tools,
and the debugger only ever talk to a frontend through these hooks, so they run
unchanged on every language that provides them.
"""

from __future__ import annotations

from abc import ABC, abstractmethod

from .nodes import AstNode, Frame, RootNode
from .source import Source


class LanguageFrontend(ABC):
    language_id: str = ""

    @abstractmethod
    def parse(self, source: Source, engine) -> list[RootNode]:
        """Parse ``source`` into roots; the first element is the program entry.

        Every statement/call/expression/root node must carry its tags and a
        source section. Syntax errors raise GuestException(kind=Syntax).
        """

    @abstractmethod
    def to_display_string(self, value) -> str:
        """Language-conventional rendering of any guest value. Total."""

    @abstractmethod
    def parse_inline(self, text: str, node: AstNode, frame: Frame | None) -> AstNode:
        """Parse ``text`` as a fragment in ``node``'s lexical context.

        The fragment resolves identifiers as the code at ``node`` would;
        executing it against a frame of that context reads/writes its slots.
        Unknown identifiers are deferred to run time.
        """

    @abstractmethod
    def declare_expression_inputs(self, node: AstNode) -> list[int]:
        """Child indices whose return values feed this expression, in
        evaluation order. Empty for leaves."""

    def is_tagged_with(self, node: AstNode, tag: str) -> bool:
        return node.is_tagged_with(tag)
