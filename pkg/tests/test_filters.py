"""Filter semantics: criteria AND together, values within a criterion OR
together, unset criteria are wildcards. Checked against a brute-force
predicate oracle on real ASTs."""

import random

import pytest
from hypothesis import given, settings, strategies as st

from genprog import generate
from probevm import Engine
from probevm.filters import FilterBuilder, new_filter
from probevm.nodes import CALL, EXPRESSION, ROOT, STATEMENT


def load(text, name="f.toy", language="toylang", internal=False):
    engine = Engine()
    source = engine.create_source(name, language, text, internal=internal)
    engine.load(source)
    return engine


PROGRAM = """\
def f(a) {
    return a + 1
}
x = f(1)
if x > 0 {
    print(x)
}
"""


class TestBuilder:
    def test_empty_filter_matches_any_instrumentable(self):
        engine = load(PROGRAM)
        filt = new_filter().build()
        nodes = [n for r in engine.roots for n in r.iter_tree()]
        for node in nodes:
            assert filt.matches(node) == node.instrumentable

    def test_builder_is_reusable_filter_immutable(self):
        builder = FilterBuilder().tag_is(STATEMENT)
        first = builder.build()
        builder.tag_is(CALL)
        second = builder.build()
        assert first != second

    def test_tag_values_or_together(self):
        engine = load(PROGRAM)
        filt = new_filter().tag_is(STATEMENT).tag_is(CALL).build()
        for node in (n for r in engine.roots for n in r.iter_tree()):
            expected = node.instrumentable and (
                node.is_tagged_with(STATEMENT) or node.is_tagged_with(CALL))
            assert filt.matches(node) == expected

    def test_criteria_and_together(self):
        engine = load(PROGRAM)
        filt = new_filter().tag_is(STATEMENT).line_is(4).build()
        matched = [n for r in engine.roots for n in r.iter_tree()
                   if filt.matches(n)]
        assert len(matched) == 1
        assert matched[0].source_section.line_col()[0] == 4

    def test_source_criterion(self):
        engine = load(PROGRAM)
        assert not any(
            new_filter().source_is("other.toy").build().matches(n)
            for r in engine.roots for n in r.iter_tree())

    def test_line_range_overlap(self):
        engine = load(PROGRAM)
        filt = new_filter().tag_is(STATEMENT).line_in(5, 7).build()
        lines = sorted(n.source_section.line_col()[0]
                       for r in engine.roots for n in r.iter_tree()
                       if filt.matches(n))
        # the if-statement (5..7) overlaps; print on 6 overlaps
        assert lines == [5, 6]

    def test_internal_excluded_by_default(self):
        engine = load("x = 1\n", name="int.toy", internal=True)
        node = next(n for r in engine.roots for n in r.iter_tree()
                    if n.is_tagged_with(STATEMENT))
        assert not new_filter().tag_is(STATEMENT).build().matches(node)
        assert new_filter().tag_is(STATEMENT).include_internal().build() \
            .matches(node)


class TestRootMayMatch:
    def test_soundness_on_corpus(self):
        # if any node in a root matches, root_may_match must be true
        for seed in range(30):
            engine = Engine()
            engine.load(engine.create_source("g.toy", "toylang", generate(seed)))
            for filt in _sample_filters(random.Random(seed), ["g.toy"]):
                for root in engine.roots:
                    if any(filt.matches(n) for n in root.iter_tree()):
                        assert filt.root_may_match(root)


def _sample_filters(rng, source_names):
    tags = [STATEMENT, EXPRESSION, CALL, ROOT]
    for _ in range(20):
        builder = new_filter()
        if rng.random() < 0.5:
            builder = builder.tag_is(rng.choice(tags))
        if rng.random() < 0.3:
            builder = builder.source_is(rng.choice(source_names + ["nope.toy"]))
        if rng.random() < 0.4:
            lo = rng.randint(1, 12)
            builder = builder.line_in(lo, lo + rng.randint(0, 6))
        if rng.random() < 0.2:
            start = rng.randint(0, 80)
            builder = builder.index_in(start, start + rng.randint(1, 40))
        yield builder.build()


def brute_force_matches(filt, node):
    """Predicate oracle: re-derives the documented semantics from scratch."""
    if not (node.source_section is not None and node.tags):
        return False
    section = node.source_section
    if section.source.internal and not filt.include_internal:
        return False
    if filt.source_names is not None and \
            section.source.name not in filt.source_names:
        return False
    if filt.language_ids is not None and \
            section.source.language_id not in filt.language_ids:
        return False
    if filt.tags is not None and not (set(filt.tags) & set(node.tags)):
        return False
    if filt.line_range is not None:
        lo, hi = filt.line_range
        sl, _, el, _ = section.line_col()
        if not (lo <= el and sl <= hi):
            return False
    if filt.index_range is not None:
        lo, hi = filt.index_range
        if section.length == 0:
            if not (lo <= section.char_start < hi):
                return False
        elif not (lo < section.char_end and section.char_start < hi):
            return False
    return True


class TestOracleEquivalence:
    def test_random_filter_ast_pairs(self):
        rng = random.Random(1234)
        checked = 0
        for seed in range(25):
            engine = Engine()
            engine.load(engine.create_source("g.toy", "toylang", generate(seed)))
            nodes = [n for r in engine.roots for n in r.iter_tree()]
            for filt in _sample_filters(rng, ["g.toy"]):
                for node in nodes:
                    assert filt.matches(node) == brute_force_matches(filt, node)
                checked += 1
        assert checked >= 500 or checked == 25 * 20

    @settings(max_examples=60, deadline=None)
    @given(seed=st.integers(0, 10_000), fseed=st.integers(0, 10_000))
    def test_hypothesis_pairs(self, seed, fseed):
        engine = Engine()
        engine.load(engine.create_source("g.toy", "toylang",
                                         generate(seed, max_statements=6)))
        rng = random.Random(fseed)
        for filt in _sample_filters(rng, ["g.toy"]):
            for root in engine.roots:
                for node in root.iter_tree():
                    assert filt.matches(node) == brute_force_matches(filt, node)


def test_to_json_roundtrippable_shape():
    filt = (new_filter().tag_is(STATEMENT).source_is("a.toy")
            .line_in(1, 9).build())
    data = filt.to_json()
    assert data["tags"] == [STATEMENT]
    assert data["source"] == ["a.toy"]
    assert data["line"] == [1, 9]
