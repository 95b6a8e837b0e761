"""Executable-tree machinery shared by every guest language.

Nodes form trees (never DAGs), specialize themselves by guarded replacement,
and carry the metadata (tags, source sections) that location filters match on.
Each root holds an Assumption that is invalidated whenever the tree's shape
changes; anything cached against the shape (probe chains) is rebuilt lazily.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .source import SourceSection
from .values import GuestException, INTERNAL

# Standard tags, with stable wire-protocol names.
STATEMENT = "STATEMENT"
CALL = "CALL"
EXPRESSION = "EXPRESSION"
ROOT = "ROOT"
STANDARD_TAGS = frozenset({STATEMENT, CALL, EXPRESSION, ROOT})

# Node tiers
UNINITIALIZED = "uninitialized"
SPECIALIZED = "specialized"
GENERIC = "generic"

#: Maximum replacements per tree position before the node must be generic.
REWRITE_LIMIT = 3

_node_ids = itertools.count(1)
_assumption_ids = itertools.count(1)


class IllegalRewrite(Exception):
    pass


class ControlFlowSignal(Exception):
    """Host-level signal used for guest control flow (e.g. return).

    Never escapes a root's execution; wrappers treat it as a normal completion
    of the aborted nodes, not as a guest exception.
    """

    __slots__ = ("value",)

    def __init__(self, value=None):
        self.value = value


class ScopeError(Exception):
    pass


class Assumption:
    """Validity token for a root's shape. Transitions valid -> invalid, only."""

    __slots__ = ("label", "_valid", "id")

    def __init__(self, label: str):
        self.id = next(_assumption_ids)
        self.label = label
        self._valid = True

    @property
    def valid(self) -> bool:
        return self._valid

    def invalidate(self):
        self._valid = False  # idempotent


class AstNode:
    """Base class for every executable node.

    ``tier``/``rewrite_count`` implement the specialization discipline: a node
    starts uninitialized, may replace itself with typed variants, and ends
    generic after at most REWRITE_LIMIT replacements.
    """

    kind = "node"

    def __init__(self, source_section: Optional[SourceSection] = None,
                 tags: frozenset = frozenset()):
        self.id = next(_node_ids)
        self.source_section = source_section
        self.tags = frozenset(tags)
        self.children: list[AstNode] = []
        self.parent: Optional[AstNode] = None
        self.parent_index: int = -1
        self.root: Optional["RootNode"] = None
        self.tier = UNINITIALIZED
        self.rewrite_count = 0
        # set by the instrumenter when an inputs-channel subscription is live here
        self.input_probe = None

    # -- structure ---------------------------------------------------------

    @property
    def instrumentable(self) -> bool:
        return self.source_section is not None and bool(self.tags)

    def adopt(self, child: "AstNode", index: int):
        self.children[index] = child
        child.parent = self
        child.parent_index = index

    def adopt_children(self, children):
        self.children = list(children)
        for i, c in enumerate(self.children):
            c.parent = self
            c.parent_index = i

    def attach_root(self, root: "RootNode"):
        self.root = root
        for c in self.children:
            c.attach_root(root)

    def is_tagged_with(self, tag: str) -> bool:
        return tag in self.tags

    def replace(self, new: "AstNode"):
        """Swap this node for ``new`` at the same tree position.

        Preserves any wrapper in place (the wrapper's delegate swaps), bumps
        the rewrite count, and invalidates the enclosing root's Assumption.
        """
        parent = self.parent
        if parent is None:
            raise IllegalRewrite(f"cannot replace detached node {self!r}")
        if self.tier == GENERIC:
            raise IllegalRewrite("generic nodes never rewrite")
        new.rewrite_count = self.rewrite_count + 1
        if new.rewrite_count >= REWRITE_LIMIT and new.tier != GENERIC:
            raise IllegalRewrite(f"rewrite limit {REWRITE_LIMIT} reached without going generic")
        new.source_section = self.source_section
        new.tags = self.tags
        new.input_probe = self.input_probe
        if getattr(parent, "is_wrapper", False):
            parent.delegate = new
            new.parent = parent
            new.parent_index = 0
        else:
            parent.adopt(new, self.parent_index)
        new.adopt_children(self.children)
        new.root = self.root
        self.parent = None
        if self.root is not None:
            self.root.invalidate_shape()
        return new

    def iter_tree(self):
        """Yield the executable nodes of this subtree, wrappers skipped."""
        node = self
        if getattr(node, "is_wrapper", False):
            node = node.delegate
        yield node
        for c in node.children:
            yield from c.iter_tree()

    # -- execution ---------------------------------------------------------

    def execute(self, frame):  # pragma: no cover - abstract
        raise NotImplementedError

    def eval_input(self, i: int, frame):
        """Evaluate child ``i``; reports its value when the inputs channel is live."""
        value = self.children[i].execute(frame)
        probe = self.input_probe
        if probe is not None:
            probe.dispatch_input(i, value, frame)
        return value

    def __repr__(self) -> str:
        return f"<{type(self).__name__} {self.kind}#{self.id}>"


@dataclass
class SlotDescriptor:
    name: str
    internal: bool = False
    index: int = -1


class RootNode:
    """One callable unit (function body or program top level)."""

    def __init__(self, name: str, language_id: str, body: AstNode,
                 source_section: Optional[SourceSection], slots: list[SlotDescriptor],
                 sections_nested: bool = True):
        self.id = next(_node_ids)
        self.name = name
        self.language_id = language_id
        self.body = body
        self.source_section = source_section
        self.slots = slots
        for i, s in enumerate(slots):
            s.index = i
        self.sections_nested = sections_nested
        self.assumption = Assumption(f"root:{name}")
        self.engine = None  # set when the engine adopts the root
        body.parent = self
        body.parent_index = 0
        body.attach_root(self)
        self.tags = frozenset({ROOT})

    # RootNode participates in child replacement as the body's parent
    def adopt(self, child: AstNode, index: int):
        assert index == 0
        self.body = child
        child.parent = self
        child.parent_index = 0

    @property
    def children(self):
        return [self.body]

    def invalidate_shape(self):
        """Replace the Assumption and mark every probe in this root stale."""
        self.assumption.invalidate()
        self.assumption = Assumption(f"root:{self.name}")
        for node in self.iter_wrappers():
            node.probe.invalid = True

    def iter_wrappers(self):
        def walk(entry):
            if getattr(entry, "is_wrapper", False):
                yield entry
                entry = entry.delegate
            for c in entry.children:
                yield from walk(c)
        yield from walk(self.body)

    def iter_tree(self):
        yield from self.body.iter_tree()

    def node_count(self) -> int:
        """Executable nodes plus instrumentation overlay nodes."""
        def walk(entry):
            n = 1
            if getattr(entry, "is_wrapper", False):
                n += 1  # the probe node
                entry = entry.delegate
                n += 1
            for c in entry.children:
                n += walk(c)
            return n
        return walk(self.body)

    def slot_named(self, name: str) -> Optional[SlotDescriptor]:
        for s in self.slots:
            if s.name == name:
                return s
        return None

    def add_slot(self, name: str, internal: bool = False) -> SlotDescriptor:
        s = SlotDescriptor(name, internal, len(self.slots))
        self.slots.append(s)
        return s

    def __repr__(self) -> str:
        return f"<RootNode {self.name!r}>"


class Frame:
    """Activation record: fixed slots per root plus the call's arguments."""

    __slots__ = ("root", "arguments", "slots", "parent")

    def __init__(self, root: RootNode, arguments: list, parent: Optional["Frame"] = None):
        from .values import UNDEFINED
        self.root = root
        self.arguments = arguments
        self.slots = [UNDEFINED] * len(root.slots)
        self.parent = parent

    def read(self, index: int):
        if index >= len(self.slots):  # slots added after frame creation (inline eval)
            self._grow()
        return self.slots[index]

    def write(self, index: int, value):
        if index >= len(self.slots):
            self._grow()
        self.slots[index] = value

    def _grow(self):
        from .values import UNDEFINED
        self.slots.extend([UNDEFINED] * (len(self.root.slots) - len(self.slots)))

    def at_depth(self, depth: int) -> "Frame":
        f = self
        for _ in range(depth):
            if f.parent is None:
                raise ScopeError("no enclosing frame at requested depth")
            f = f.parent
        return f


@dataclass
class ScopeEntry:
    name: str
    value: object
    writable: bool = True
    internal: bool = False


@dataclass
class Scope:
    name: str
    entries: list[ScopeEntry] = field(default_factory=list)
    parent: Optional["Scope"] = None


def internal_error(message: str) -> GuestException:
    return GuestException(INTERNAL, message)
