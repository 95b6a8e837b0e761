"""Dynamic event capture: wrapper/probe insertion, subscription chains,
binding lifecycle, code injection, and source-load events.

A probed node is interposed by a transparent WrapperNode that brackets the
delegate's execution with events dispatched through an ordered chain of
subscription nodes. Probes are inserted eagerly at attach/load time (gated by
a cheap root check) but chains are rebuilt lazily at the next dispatch after a
change, keyed on a per-probe invalid flag. A probe whose lazy rebuild finds no
subscriptions is removed entirely, restoring the original tree.
"""

from __future__ import annotations

import itertools
from dataclasses import dataclass, field
from typing import Optional

from .nodes import AstNode, ControlFlowSignal, EXPRESSION
from .values import NULL, GuestException
from .filters import SourceSectionFilter

_binding_ids = itertools.count(1)

LISTENER = "Listener"
FACTORY = "Factory"
SOURCE_LOAD = "SourceLoad"

#: cache sentinel: the factory failed for this location, never retry
_FACTORY_FAILED = object()


class EngineClosed(Exception):
    pass


class ReentrancyError(Exception):
    pass


@dataclass(frozen=True)
class EventContext:
    """Static context handed to every event callback."""

    node_id: int
    source_section: object
    tags: frozenset
    language_id: str
    root_name: str
    node: object = field(default=None, repr=False, compare=False)

    def __str__(self) -> str:
        return f"{self.source_section} [{','.join(sorted(self.tags))}] in {self.root_name}"


class ExecutionEventListener:
    """Client callback surface; override any subset."""

    def on_enter(self, context: EventContext, frame):
        pass

    def on_return_value(self, context: EventContext, frame, value):
        pass

    def on_return_exceptional(self, context: EventContext, frame, exception):
        pass


class ExecutionEventNode:
    """Base for injected fragments produced by a factory.

    Return values and exceptions from these hooks never propagate into the
    surrounding program; failures are reported out-of-band.
    """

    def __init__(self, context: EventContext):
        self.context = context

    def on_enter(self, frame):
        pass

    def on_return_value(self, frame, value):
        pass

    def on_return_exceptional(self, frame, exception):
        pass

    def on_input_value(self, frame, input_index: int, value):
        pass


def _wants_inputs(fragment: ExecutionEventNode) -> bool:
    return type(fragment).on_input_value is not ExecutionEventNode.on_input_value


class EventBinding:
    """Handle for one live subscription; dispose() is terminal."""

    def __init__(self, instrumenter, filter: SourceSectionFilter, handler_kind: str, handler):
        self.id = next(_binding_ids)
        self.instrumenter = instrumenter
        self.filter = filter
        self.handler_kind = handler_kind
        self.handler = handler  # listener, factory callable, or load-source listener
        self.disposed = False
        self._fragments: dict[int, object] = {}  # node id -> fragment (created once)

    def dispose(self):
        self.instrumenter.dispose(self)


class SubscriptionNode:
    """One element of a probe's dispatch chain, serving one binding."""

    __slots__ = ("binding", "listener", "fragment")

    def __init__(self, binding: EventBinding, listener=None, fragment=None):
        self.binding = binding
        self.listener = listener
        self.fragment = fragment


class ProbeNode:
    """Dispatches bracketed events to the chain; lazily (re)built when invalid."""

    def __init__(self, wrapper: "WrapperNode", engine):
        self.wrapper = wrapper
        self.engine = engine
        self.invalid = True
        self.chain: list[SubscriptionNode] = []
        node = wrapper.delegate
        root = node.root
        self.context = EventContext(
            node_id=node.id,
            source_section=node.source_section,
            tags=node.tags,
            language_id=root.language_id if root else "",
            root_name=root.name if root else "",
            node=node,
        )
        self._input_index_map: dict[int, int] = {}

    # -- maintenance -------------------------------------------------------

    def check_subscriptions(self) -> bool:
        """Rebuild the chain from the live binding set; False means the probe
        found no subscribers and unspliced itself."""
        node = self.wrapper.delegate
        self._refresh_context(node)
        instrumenter = self.engine.instrumenter
        chain: list[SubscriptionNode] = []
        for binding in instrumenter.bindings:
            if binding.disposed or binding.handler_kind == SOURCE_LOAD:
                continue
            if not binding.filter.matches(node):
                continue
            if binding.handler_kind == LISTENER:
                chain.append(SubscriptionNode(binding, listener=binding.handler))
            else:
                fragment = self._materialize_fragment(binding)
                if fragment is not None:
                    chain.append(SubscriptionNode(binding, fragment=fragment))
        if not chain:
            self.chain = []
            self.wrapper.unsplice()
            return False
        self.chain = chain
        self._wire_inputs(node, chain)
        self.invalid = False
        return True

    def _refresh_context(self, node: AstNode):
        # the delegate may have specialized since the context was built
        if self.context.node_id != node.id:
            root = node.root
            self.context = EventContext(
                node_id=node.id,
                source_section=node.source_section,
                tags=node.tags,
                language_id=root.language_id if root else "",
                root_name=root.name if root else "",
                node=node,
            )

    def _materialize_fragment(self, binding: EventBinding):
        # keyed by wrapper id: the probed location survives delegate specialization
        key = self.wrapper.id
        cached = binding._fragments.get(key)
        if cached is _FACTORY_FAILED:
            return None
        if cached is not None:
            return cached
        try:
            fragment = binding.handler(self.context)
        except Exception as exc:
            binding._fragments[key] = _FACTORY_FAILED
            self.engine.instrumenter.report_client_error(binding, self.context, exc)
            return None
        binding._fragments[key] = fragment
        return fragment

    def _wire_inputs(self, node: AstNode, chain):
        wants = any(s.fragment is not None and _wants_inputs(s.fragment) for s in chain)
        if wants and node.is_tagged_with(EXPRESSION):
            frontend = self.engine.frontends.get(self.context.language_id)
            declared = frontend.declare_expression_inputs(node) if frontend else []
            self._input_index_map = {child: pos for pos, child in enumerate(declared)}
            node.input_probe = self
        else:
            self._input_index_map = {}
            node.input_probe = None

    # -- dispatch ----------------------------------------------------------

    def dispatch_enter(self, frame):
        for sub in self.chain:
            try:
                if sub.listener is not None:
                    sub.listener.on_enter(self.context, frame)
                else:
                    sub.fragment.on_enter(frame)
            except Exception as exc:
                self._client_error(sub, exc)

    def dispatch_return_value(self, frame, value):
        for sub in self.chain:
            try:
                if sub.listener is not None:
                    sub.listener.on_return_value(self.context, frame, value)
                else:
                    sub.fragment.on_return_value(frame, value)
            except Exception as exc:
                self._client_error(sub, exc)

    def dispatch_return_exceptional(self, frame, exception):
        for sub in self.chain:
            try:
                if sub.listener is not None:
                    sub.listener.on_return_exceptional(self.context, frame, exception)
                else:
                    sub.fragment.on_return_exceptional(frame, exception)
            except Exception as exc:
                self._client_error(sub, exc)

    def dispatch_input(self, child_index: int, value, frame):
        pos = self._input_index_map.get(child_index)
        if pos is None:
            return
        for sub in self.chain:
            if sub.fragment is not None and _wants_inputs(sub.fragment):
                try:
                    sub.fragment.on_input_value(frame, pos, value)
                except Exception as exc:
                    self._client_error(sub, exc)

    def _client_error(self, sub: SubscriptionNode, exc: Exception):
        self.engine.instrumenter.report_client_error(sub.binding, self.context, exc)


class WrapperNode(AstNode):
    """Transparent proxy: with an empty chain the delegate's behavior is exact."""

    kind = "wrapper"
    is_wrapper = True

    def __init__(self, delegate: AstNode, engine):
        super().__init__(source_section=delegate.source_section, tags=frozenset())
        self.delegate = delegate
        self.root = delegate.root
        self.probe = ProbeNode(self, engine)

    def splice(self):
        parent = self.delegate.parent
        index = self.delegate.parent_index
        parent.adopt(self, index)
        self.delegate.parent = self
        self.delegate.parent_index = 0

    def unsplice(self):
        """Remove this wrapper, restoring the delegate at the original position."""
        parent = self.parent
        if parent is None:
            return
        parent.adopt(self.delegate, self.parent_index)
        self.parent = None
        self.delegate.input_probe = None
        if self.root is not None:
            self.root.invalidate_shape()

    @property
    def children(self):
        return [self.delegate]

    @children.setter
    def children(self, value):  # AstNode.__init__ assigns []
        pass

    def adopt(self, child: AstNode, index: int):
        self.delegate = child
        child.parent = self
        child.parent_index = 0

    def execute(self, frame):
        probe = self.probe
        if probe.invalid and not probe.check_subscriptions():
            return self.delegate.execute(frame)
        probe.dispatch_enter(frame)
        try:
            result = self.delegate.execute(frame)
        except GuestException as exc:
            probe.dispatch_return_exceptional(frame, exc)
            raise
        except ControlFlowSignal:
            # guest control flow (return) aborting this node: a normal
            # completion from the instrumentation point of view
            probe.dispatch_return_value(frame, NULL)
            raise
        probe.dispatch_return_value(frame, result)
        return result


class Instrumenter:
    """Binding registry and lazy probe maintenance over the loaded ASTs."""

    def __init__(self, engine):
        self.engine = engine
        self.bindings: list[EventBinding] = []  # registration order, the chain order
        self.load_bindings: list[EventBinding] = []

    # -- attach / dispose --------------------------------------------------

    def attach_listener(self, filter: SourceSectionFilter, listener) -> EventBinding:
        return self._attach(filter, LISTENER, listener)

    def attach_factory(self, filter: SourceSectionFilter, factory) -> EventBinding:
        return self._attach(filter, FACTORY, factory)

    def _attach(self, filter, kind, handler) -> EventBinding:
        if self.engine.closed:
            raise EngineClosed("engine disposed")
        binding = EventBinding(self, filter, kind, handler)
        self.engine.submit(lambda: self._add_binding(binding))
        return binding

    def _add_binding(self, binding: EventBinding):
        self.bindings.append(binding)
        for root in self.engine.roots:
            if binding.filter.root_may_match(root):
                for node in root.iter_tree():
                    if binding.filter.matches(node):
                        self.probe(node)

    def dispose(self, binding: EventBinding):
        if binding.disposed:
            return
        if binding.handler_kind == SOURCE_LOAD:
            binding.disposed = True
            return
        self.engine.submit(lambda: self._remove_binding(binding))

    def _remove_binding(self, binding: EventBinding):
        if binding.disposed:
            return
        binding.disposed = True
        for root in self.engine.roots:
            if binding.filter.root_may_match(root):
                for wrapper in root.iter_wrappers():
                    if binding.filter.matches(wrapper.delegate):
                        wrapper.probe.invalid = True

    # -- probes ------------------------------------------------------------

    def probe(self, node: AstNode) -> ProbeNode:
        """Interpose a wrapper/probe pair at this node; idempotent."""
        parent = node.parent
        if parent is not None and getattr(parent, "is_wrapper", False):
            parent.probe.invalid = True
            return parent.probe
        if not node.instrumentable:
            raise ValueError(f"{node!r} is not instrumentable")
        wrapper = WrapperNode(node, self.engine)
        wrapper.splice()
        if node.root is not None:
            node.root.invalidate_shape()
        return wrapper.probe

    def on_ast_loaded(self, root):
        for binding in self.bindings:
            if binding.disposed:
                continue
            if binding.filter.root_may_match(root):
                for node in root.iter_tree():
                    if binding.filter.matches(node):
                        self.probe(node)

    def force_all_checks(self):
        """Run every pending lazy chain rebuild without executing guest code."""
        for root in self.engine.roots:
            for wrapper in list(root.iter_wrappers()):
                if wrapper.probe.invalid:
                    wrapper.probe.check_subscriptions()

    # -- source-load channel ----------------------------------------------

    def attach_load_source_listener(self, source_filter: SourceSectionFilter,
                                    listener) -> EventBinding:
        if self.engine.closed:
            raise EngineClosed("engine disposed")
        binding = EventBinding(self, source_filter, SOURCE_LOAD, listener)
        self.load_bindings.append(binding)
        # replay sources that already exist so late subscribers see everything
        for source in self.engine.sources.values():
            if source_filter.matches_source(source):
                try:
                    listener(source)
                except Exception as exc:
                    self.report_client_error(binding, source.name, exc)
        return binding

    def loaded_sources(self, source_filter: Optional[SourceSectionFilter] = None):
        sources = list(self.engine.sources.values())
        if source_filter is None:
            return [s for s in sources if not s.internal]
        return [s for s in sources if source_filter.matches_source(s)]

    def on_source_created(self, source):
        for binding in self.load_bindings:
            if binding.disposed:
                continue
            if binding.filter.matches_source(source):
                try:
                    binding.handler(source)
                except Exception as exc:
                    self.report_client_error(binding, source.name, exc)

    # -- diagnostics -------------------------------------------------------

    def report_client_error(self, binding: EventBinding, context, error):
        self.engine.report_diagnostic(
            f"INSTRUMENT-ERROR {binding.id} {context} {error}")
