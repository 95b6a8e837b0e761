"""The bundled instruments: tracer, coverage, profiler, statement limiter.
Ground truth comes from the independent reference evaluator."""

import pytest

from genprog import generate
from oracle import evaluate
from probevm import Engine, GuestException
from probevm.tools import (
    CoverageHandle, LimiterHandle, ProfileHandle, clear_trace, limit_statements,
    set_trace,
)
from probevm.values import CANCELLED


def load(text, name="t.toy", language="toylang"):
    engine = Engine()
    engine.load(engine.create_source(name, language, text))
    return engine


class TestTrace:
    def test_trace_fires_per_statement_with_locations(self):
        engine = load("x = 1\ny = x + 1\nprint(y)\n")
        events = []
        set_trace(engine, lambda ev: events.append(
            (ev.root_name, ev.section.line_col()[0])))
        engine.execute_root(engine.roots[0], [])
        assert events == [("main", 1), ("main", 2), ("main", 3)]

    def test_variables_snapshot_lazy_display_strings(self):
        engine = load("x = 7\ny = x\n")
        snaps = []
        set_trace(engine, lambda ev: snaps.append(ev.variables()))
        engine.execute_root(engine.roots[0], [])
        assert snaps[0] == {"x": "undefined", "y": "undefined"}
        assert snaps[1] == {"x": "7", "y": "undefined"}

    def test_clear_trace_restores_tree(self):
        engine = load("x = 1\n")
        handle = set_trace(engine, lambda ev: None)
        engine.execute_root(engine.roots[0], [])
        clear_trace(handle)
        engine.execute_root(engine.roots[0], [])
        assert sum(len(list(r.iter_wrappers())) for r in engine.roots) == 0

    def test_trace_sequence_matches_oracle(self):
        for seed in range(10):
            text = generate(seed)
            ref = evaluate(text)
            engine = load(text, name="g.toy")
            seq = []
            set_trace(engine, lambda ev: seq.append(
                (ev.root_name, ev.section.line_col()[0])))
            engine.execute_root(engine.roots[0], [])
            assert seq == ref.statement_sequence


class TestCoverage:
    def test_counts_match_oracle_per_line(self):
        for seed in range(15):
            text = generate(seed)
            ref = evaluate(text)
            engine = load(text, name="g.toy")
            coverage = CoverageHandle(engine)
            engine.execute_root(engine.roots[0], [])
            engine_counts = {}
            for sections in coverage.report().values():
                for key, count in sections.items():
                    if count:
                        engine_counts[key.line] = \
                            engine_counts.get(key.line, 0) + count
            oracle_counts = {}
            for (_, line), count in ref.line_counts.items():
                oracle_counts[line] = oracle_counts.get(line, 0) + count
            assert engine_counts == oracle_counts

    def test_unexecuted_statements_reported_with_zero(self):
        engine = load("if 1 > 2 {\nprint(1)\n}\n")
        coverage = CoverageHandle(engine)
        engine.execute_root(engine.roots[0], [])
        counts = {key.line: count
                  for sections in coverage.report().values()
                  for key, count in sections.items()}
        assert counts[1] == 1
        assert counts[2] == 0

    def test_report_json_shape(self):
        engine = load("x = 1\n")
        coverage = CoverageHandle(engine)
        engine.execute_root(engine.roots[0], [])
        data = coverage.report_json()
        assert data["tool"] == "coverage"
        entry = data["sources"]["t.toy"][0]
        assert set(entry) == {"start", "length", "line", "count"}

    def test_works_on_minicalc(self):
        engine = load("1 + 2\n3 * 4\n", name="c.calc", language="minicalc")
        coverage = CoverageHandle(engine)
        engine.execute_root(engine.roots[0], [])
        counts = [e["count"] for e in coverage.report_json()["sources"]["c.calc"]]
        assert counts == [1, 1]


class TestProfile:
    def test_invocation_counts(self):
        engine = load("def f() {\nreturn 1\n}\ni = 0\n"
                      "while i < 3 {\nx = f()\ni = i + 1\n}\n")
        profile = ProfileHandle(engine)
        engine.execute_root(engine.roots[0], [])
        by_name = {p.name: p for p in profile.report()}
        assert by_name["f"].invocations == 3
        assert by_name["main"].invocations == 1

    def test_inclusive_times_nest(self):
        engine = load("def inner() {\nreturn 1\n}\n"
                      "def outer() {\nreturn inner()\n}\nouter()\n")
        profile = ProfileHandle(engine)
        engine.execute_root(engine.roots[0], [])
        by_name = {p.name: p for p in profile.report()}
        assert by_name["main"].total_ns >= by_name["outer"].total_ns \
            >= by_name["inner"].total_ns

    def test_report_json_sorted_by_time(self):
        engine = load("def f() {\nreturn 1\n}\nf()\n")
        profile = ProfileHandle(engine)
        engine.execute_root(engine.roots[0], [])
        data = profile.report_json()
        times = [r["totalNs"] for r in data["roots"]]
        assert times == sorted(times, reverse=True)


class TestLimiter:
    def test_infinite_loop_cancelled_within_budget_plus_one(self):
        engine = load("x = 0\nwhile true {\nx = x + 1\n}\n")
        limiter = limit_statements(engine, 50)
        with pytest.raises(GuestException) as info:
            engine.execute_root(engine.roots[0], [])
        assert info.value.kind == CANCELLED
        assert limiter.executed <= 51

    def test_budget_zero_cancels_immediately(self):
        engine = load("x = 1\n")
        limiter = limit_statements(engine, 0)
        with pytest.raises(GuestException) as info:
            engine.execute_root(engine.roots[0], [])
        assert info.value.kind == CANCELLED
        assert limiter.executed <= 1

    def test_under_budget_runs_to_completion(self):
        engine = load("x = 1\nprint(x)\n")
        limit_statements(engine, 100)
        engine.execute_root(engine.roots[0], [])
        assert engine.output_text() == "1\n"


class TestToolsCompose:
    def test_all_tools_concurrently_match_solo_reports(self):
        text = generate(3)
        # solo runs
        solo_cov = {}
        engine = load(text, name="g.toy")
        coverage = CoverageHandle(engine)
        engine.execute_root(engine.roots[0], [])
        solo_cov = coverage.report_json()
        solo_out = engine.output_text()
        solo_trace = []
        engine = load(text, name="g.toy")
        set_trace(engine, lambda ev: solo_trace.append(ev.section.line_col()[0]))
        engine.execute_root(engine.roots[0], [])

        # all together
        engine = load(text, name="g.toy")
        coverage = CoverageHandle(engine)
        profile = ProfileHandle(engine)
        trace = []
        set_trace(engine, lambda ev: trace.append(ev.section.line_col()[0]))
        limit_statements(engine, 10_000_000)
        engine.execute_root(engine.roots[0], [])
        assert engine.output_text() == solo_out
        assert coverage.report_json() == solo_cov
        assert trace == solo_trace
        assert profile.report()  # profiled something
