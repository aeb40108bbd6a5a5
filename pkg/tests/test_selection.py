import pytest
from hypothesis import given, strategies as st

from mutest.minilang import parse_source
from mutest.mutagen import NodeKind, OperatorKind, enumerate_all_mutants
from mutest.selection import (
    ALL_KEYS,
    ContextKey,
    Counters,
    Event,
    FeedbackVerdict,
    InvariantViolation,
    OperatorStats,
    StatsFormatError,
    record_outcome,
    score_operator,
    select_mutant_for_line,
)

ROR_KEY = ContextKey(OperatorKind.ROR, NodeKind.BINARY_RELATIONAL)
SBR_KEY = ContextKey(OperatorKind.SBR, NodeKind.STATEMENT)


def stats_with(**per_key):
    return OperatorStats({k: Counters(**v) for k, v in per_key.items()})


def test_key_space():
    assert len(ALL_KEYS) == 30


def test_empty_stats_score_half():
    assert all(score_operator(OperatorStats(), k) == 0.5 for k in ALL_KEYS)


def test_score_examples():
    s = OperatorStats({ROR_KEY: Counters(generated=10, survived=8, killed=2)})
    assert score_operator(s, ROR_KEY) == pytest.approx(0.625, abs=1e-12)
    s = OperatorStats({ROR_KEY: Counters(generated=10, killed=10, not_useful=10)})
    assert score_operator(s, ROR_KEY) == pytest.approx(1 / 12, abs=1e-12)


def line_candidates():
    m = parse_source("fn f(a, b) {\n    if (a < b) { a = b; }\n    return a;\n}\n", "src/m.mini")
    return [x for x in enumerate_all_mutants(m, {2}) if x.line == 2 and x.point.original_snippet.startswith(("a < b", "if"))]


def test_tie_goes_to_operator_order():
    cands = [c for c in line_candidates() if c.operator in (OperatorKind.ROR, OperatorKind.SBR)]
    chosen = select_mutant_for_line(cands, OperatorStats())
    assert (chosen.operator, chosen.variant) == (OperatorKind.ROR, 0)
    assert select_mutant_for_line(list(reversed(cands)), OperatorStats()).operator is OperatorKind.ROR


def test_higher_score_wins():
    cands = [c for c in line_candidates() if c.operator in (OperatorKind.ROR, OperatorKind.SBR)]
    s = OperatorStats({
        SBR_KEY: Counters(generated=100, survived=90, killed=0, please_fix=90, not_useful=0),
        ROR_KEY: Counters(generated=100, survived=0, killed=100, please_fix=0, not_useful=60),
    })
    assert score_operator(s, SBR_KEY) > 0.9 and score_operator(s, ROR_KEY) < 0.2
    assert select_mutant_for_line(cands, s).operator is OperatorKind.SBR


def test_no_candidates():
    assert select_mutant_for_line([], OperatorStats()) is None


def test_candidates_must_share_a_line():
    m = parse_source("fn f(a) {\n    a = a + 1;\n    a = a - 1;\n}\n", "src/m.mini")
    with pytest.raises(ValueError):
        select_mutant_for_line(enumerate_all_mutants(m, {2, 3}), OperatorStats())


def test_record_sequence_and_violation():
    s = OperatorStats()
    record_outcome(s, ROR_KEY, Event.GENERATED)
    assert s.get(ROR_KEY) == Counters(generated=1)
    record_outcome(s, ROR_KEY, Event.KILLED)
    assert s.get(ROR_KEY).killed == 1
    with pytest.raises(InvariantViolation):
        record_outcome(s, ROR_KEY, Event.SURVIVED)
    assert s.get(ROR_KEY) == Counters(generated=1, killed=1)


def test_feedback_needs_generated():
    with pytest.raises(InvariantViolation):
        OperatorStats().record(ROR_KEY, Event.NOT_USEFUL)


@pytest.mark.parametrize("text,verdict", [
    ("please-fix", FeedbackVerdict.PLEASE_FIX), ("PleaseFix", FeedbackVerdict.PLEASE_FIX),
    ("not-useful", FeedbackVerdict.NOT_USEFUL), ("not_useful", FeedbackVerdict.NOT_USEFUL),
])
def test_verdict_parsing(text, verdict):
    assert FeedbackVerdict.parse(text) is verdict


def test_verdict_parsing_rejects_junk():
    with pytest.raises(ValueError):
        FeedbackVerdict.parse("meh")


counters = st.builds(
    lambda g, s, k, p, n: Counters(g + s + k + p + n, s, k, p, n),
    *(st.integers(0, 50) for _ in range(5)))


@given(st.dictionaries(st.sampled_from(ALL_KEYS), counters))
def test_store_round_trip(table):
    s = OperatorStats(table)
    text = s.dumps()
    assert text.splitlines()[0] == "operator,node_kind,generated,survived,killed,please_fix,not_useful"
    assert len(text.splitlines()) == 31
    assert OperatorStats.loads(text) == s


def test_store_rejects_bad_header_and_values():
    with pytest.raises(StatsFormatError):
        OperatorStats.loads("op,kind\n")
    bad = OperatorStats().dumps().replace("AOR,BinaryArith,0", "AOR,BinaryArith,-1", 1)
    with pytest.raises(StatsFormatError):
        OperatorStats.loads(bad)


def test_missing_store_is_empty(tmp_path):
    assert OperatorStats.load(tmp_path / "none.csv") == OperatorStats()
    s = OperatorStats({ROR_KEY: Counters(generated=3, survived=1)})
    s.save(tmp_path / "s.csv")
    assert OperatorStats.load(tmp_path / "s.csv") == s
    assert [p.name for p in tmp_path.iterdir()] == ["s.csv"]


@given(
    st.lists(st.integers(0, 30), min_size=2, max_size=6, unique=True),
    st.integers(0, 30), st.integers(0, 20), st.integers(0, 20), st.integers(1, 500))
def test_argmax_stable_under_equal_increments(survived, extra, pf, nu, k):
    # Keys share survived+killed totals and feedback counts; only the split differs.
    n = max(survived) + extra
    keys = ALL_KEYS[: len(survived)]
    before = {key: Counters(n + pf + nu, s, n - s, pf, nu) for key, s in zip(keys, survived)}
    after = {key: Counters(c.generated + 2 * k, c.survived + k, c.killed + k, pf, nu)
             for key, c in before.items()}
    sb, sa = OperatorStats(before), OperatorStats(after)
    top_before = max(keys, key=lambda key: score_operator(sb, key))
    top_after = max(keys, key=lambda key: score_operator(sa, key))
    assert top_before == top_after


def test_equal_increments_can_reorder_keys_with_unequal_history():
    a = ContextKey(OperatorKind.AOR, NodeKind.BINARY_ARITH)
    b = ContextKey(OperatorKind.UOI, NodeKind.NUM_EXPR)
    before = OperatorStats({a: Counters(1, 1, 0), b: Counters(25, 15, 10)})
    after = OperatorStats({a: Counters(201, 101, 100), b: Counters(225, 115, 110)})
    assert score_operator(before, a) > score_operator(before, b)
    assert score_operator(after, a) < score_operator(after, b)


def test_equal_increments_can_reorder_keys_with_unequal_feedback():
    a = ContextKey(OperatorKind.AOR, NodeKind.BINARY_ARITH)
    b = ContextKey(OperatorKind.UOI, NodeKind.NUM_EXPR)
    before = OperatorStats({a: Counters(2, 0, 1, 1, 0), b: Counters(1, 1, 0)})
    after = OperatorStats({a: Counters(6, 2, 3, 1, 0), b: Counters(5, 3, 2)})
    assert score_operator(before, a) < score_operator(before, b)
    assert score_operator(after, a) > score_operator(after, b)
