import io
import random
from dataclasses import replace

import pytest

from disruptcite.graph import Label, PaperMeta, build_graph
from disruptcite.matching import MatchCriteria, match_controls, write_pairs
from disruptcite.testkit import oracle_match

ATTRS = ("venue_id", "pub_year", "volume", "issue", "field_code")


def meta(label=Label.OTHER, **kw):
    base = dict(pub_year=1980, venue_id="J", volume="3", issue="2", field_code="F1")
    base.update(kw)
    return PaperMeta(label=label, **base)


def graph_of(metas):
    return build_graph([], metas)


def ext_controls(g, result):
    return {g.ext_id(t): [g.ext_id(c) for c in cs] for t, cs in result.controls.items()}


def test_single_match():
    metas = [(1, meta(Label.NOBEL)), (2, meta()), (3, meta(issue="9"))]
    g = graph_of(metas)
    res = match_controls(g, [g.dense_id(1)])
    assert ext_controls(g, res) == {1: [2]}
    assert res.warnings == []
    buf = io.StringIO()
    assert write_pairs(buf, g, res) == 1
    assert buf.getvalue() == "1\t2\n"


def test_missing_venue_warns():
    metas = [(1, meta(Label.NOBEL, venue_id=None)), (2, meta())]
    g = graph_of(metas)
    res = match_controls(g, [g.dense_id(1)])
    assert ext_controls(g, res) == {1: []}
    assert any("venue_id" in w for w in res.warnings)


def test_no_candidates_warns():
    g = graph_of([(1, meta(Label.NOBEL)), (2, meta(pub_year=1990))])
    res = match_controls(g, [g.dense_id(1)])
    assert res.controls[g.dense_id(1)] == []
    assert any("no matching" in w for w in res.warnings)


def test_requires_some_criterion():
    with pytest.raises(ValueError):
        MatchCriteria(False, False, False, False, False)
    with pytest.raises(ValueError):
        MatchCriteria(max_controls_per_target=0)


def random_corpus(seed, n=50):
    rng = random.Random(seed)
    metas = []
    for i in range(n):
        label = Label.NOBEL if rng.random() < 0.15 else Label.OTHER
        metas.append((i + 1, meta(
            label,
            pub_year=rng.choice([1970, 1971, None]) if rng.random() < 0.1 else rng.choice([1970, 1971]),
            venue_id=rng.choice(["A", "B"]), volume=rng.choice(["1", "2"]),
            issue=rng.choice(["1", "2"]), field_code=rng.choice(["F1", "F2"]))))
    targets = [pid for pid, m in metas if m.label is Label.NOBEL] + [rng.randint(1, n)]
    return metas, sorted(set(targets))


@pytest.mark.parametrize("seed", range(10))
def test_agrees_with_oracle(seed):
    metas, targets = random_corpus(seed)
    g = graph_of(metas)
    for flags in [(True,) * 5, (True, True, False, False, False), (False, False, False, False, True)]:
        crit = MatchCriteria(*flags)
        res = match_controls(g, [g.dense_id(t) for t in targets], crit)
        attrs = [a for a, f in zip(ATTRS, flags) if f]
        assert ext_controls(g, res) == oracle_match(metas, targets, attrs)


@pytest.mark.parametrize("seed", range(5))
def test_controls_exclude_targets_and_nobel(seed):
    metas, targets = random_corpus(seed)
    g = graph_of(metas)
    res = match_controls(g, [g.dense_id(t) for t in targets],
                         MatchCriteria(True, False, False, False, False))
    tset = {g.dense_id(t) for t in targets}
    for cs in res.controls.values():
        for c in cs:
            assert c not in tset
            assert g.meta(c).label is not Label.NOBEL


@pytest.mark.parametrize("seed", range(5))
def test_clearing_a_flag_never_shrinks(seed):
    metas, targets = random_corpus(seed)
    g = graph_of(metas)
    dense = [g.dense_id(t) for t in targets]
    strict = match_controls(g, dense).controls
    for i in range(5):
        flags = [True] * 5
        flags[i] = False
        loose = match_controls(g, dense, MatchCriteria(*flags)).controls
        for t in dense:
            assert set(strict[t]) <= set(loose[t])


def test_cap_keeps_lowest_ids():
    metas = [(1, meta(Label.NOBEL))] + [(i, meta()) for i in (9, 4, 7)]
    g = graph_of(metas)
    res = match_controls(g, [g.dense_id(1)], MatchCriteria(max_controls_per_target=2))
    assert ext_controls(g, res) == {1: [4, 7]}


def test_unique_assignment():
    metas = [(1, meta(Label.NOBEL)), (2, meta(Label.NOBEL)), (3, meta()), (4, meta())]
    g = graph_of(metas)
    targets = [g.dense_id(1), g.dense_id(2)]
    shared = match_controls(g, targets, MatchCriteria(max_controls_per_target=1))
    assert ext_controls(g, shared) == {1: [3], 2: [3]}
    unique = match_controls(g, targets, MatchCriteria(max_controls_per_target=1,
                                                      unique_assignment=True))
    assert ext_controls(g, unique) == {1: [3], 2: [4]}


def test_deterministic_regardless_of_target_order():
    metas, targets = random_corpus(3)
    g = graph_of(metas)
    dense = [g.dense_id(t) for t in targets]
    crit = MatchCriteria(max_controls_per_target=1, unique_assignment=True)
    assert match_controls(g, dense, crit).controls == \
        match_controls(g, list(reversed(dense)), crit).controls


def test_target_may_be_control_labelled():
    metas = [(1, meta(Label.CONTROL)), (2, meta(Label.CONTROL)), (3, meta())]
    g = graph_of(metas)
    res = match_controls(g, [g.dense_id(1)])
    assert ext_controls(g, res) == {1: [2, 3]}
