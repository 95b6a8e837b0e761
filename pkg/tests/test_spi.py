"""The language frontend contract, checked for both bundled languages."""

import pytest

from probevm import Engine
from probevm.nodes import EXPRESSION, ROOT, RootNode, STATEMENT
from probevm.spi import LanguageFrontend
from probevm.values import NULL


@pytest.fixture(params=[
    ("toylang", "x = 1\nprint(x + 2)\n"),
    ("minicalc", "1 + 2\n4 * 2\n"),
], ids=["toylang", "minicalc"])
def loaded(request):
    language, text = request.param
    engine = Engine()
    source = engine.create_source("s", language, text)
    roots = engine.load(source)
    return engine, language, roots


class TestFrontendContract:
    def test_both_frontends_registered(self):
        engine = Engine()
        assert set(engine.frontends) >= {"toylang", "minicalc"}
        for frontend in engine.frontends.values():
            assert isinstance(frontend, LanguageFrontend)

    def test_parse_returns_entry_root_first(self, loaded):
        engine, language, roots = loaded
        assert all(isinstance(r, RootNode) for r in roots)
        assert roots[0].name in ("main", "program")
        assert roots[0].language_id == language

    def test_roots_carry_root_tagged_body(self, loaded):
        engine, language, roots = loaded
        for root in roots:
            assert root.body.is_tagged_with(ROOT)

    def test_statements_exist_and_are_tagged(self, loaded):
        engine, language, roots = loaded
        statements = [n for r in roots for n in r.iter_tree()
                      if n.is_tagged_with(STATEMENT)]
        assert len(statements) == 2
        for node in statements:
            assert node.source_section is not None

    def test_expressions_tagged(self, loaded):
        engine, language, roots = loaded
        assert any(n.is_tagged_with(EXPRESSION)
                   for r in roots for n in r.iter_tree())

    def test_display_string_null(self, loaded):
        engine, language, roots = loaded
        frontend = engine.frontends[language]
        assert frontend.to_display_string(NULL) == "null"

    def test_parse_inline_expression(self, loaded):
        engine, language, roots = loaded
        engine.execute_root(roots[0], [])
        node = next(n for r in roots for n in r.iter_tree()
                    if n.is_tagged_with(STATEMENT))
        frontend = engine.frontends[language]
        fragment = frontend.parse_inline("1 + 1", node, None)
        from probevm.nodes import Frame
        frame = Frame(roots[0], [])
        value = fragment.execute(frame)
        assert value in (2, 2.0)

    def test_declare_expression_inputs(self, loaded):
        engine, language, roots = loaded
        frontend = engine.frontends[language]
        binary = next(n for r in roots for n in r.iter_tree()
                      if len(n.children) >= 2 and n.is_tagged_with(EXPRESSION))
        inputs = frontend.declare_expression_inputs(binary)
        assert inputs == [0, 1]


class TestToylangDisplay:
    def test_display_conventions(self):
        engine = Engine()
        frontend = engine.frontends["toylang"]
        cases = [(1, "1"), (1.5, "1.5"), (True, "true"), (False, "false"),
                 ("s", "s"), (NULL, "null")]
        for value, expected in cases:
            assert frontend.to_display_string(value) == expected


def test_frontends_share_engine_infrastructure():
    """The same tool code must drive both languages (no per-language tools)."""
    from probevm.tools import CoverageHandle
    for language, text in [("toylang", "x = 1\n"), ("minicalc", "1\n")]:
        engine = Engine()
        source = engine.create_source("s", language, text)
        coverage = CoverageHandle(engine)
        engine.run(source)
        assert sum(coverage.counts.values()) == 1
