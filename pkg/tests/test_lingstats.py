import random

import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from disruptcite.graph import Label, PaperMeta
from disruptcite.lingstats import (Lexicon, LexiconError, compare_groups_linguistic,
                                   load_lexicon, title_length, token_frequencies, tokenize)

words = st.text(alphabet=st.characters(whitelist_categories=("Lu", "Ll", "Nd")),
                min_size=1, max_size=8)
texts = st.lists(words, max_size=10).map(" ".join)


@pytest.mark.parametrize("title,n", [
    ("ELECTRIC FIELD EFFECT IN ATOMICALLY THIN CARBON FILMS", 8),
    ("", 0),
    ("patch-clamp techniques", 3),
    ("C 60 BUCKMINSTERFULLERENE", 3),
    ("Pflügers Archiv: über-Zellen", 4),
])
def test_title_length(title, n):
    assert title_length(title) == n


@settings(max_examples=200)
@given(texts)
def test_tokenize_idempotent(text):
    toks = tokenize(text)
    assert tokenize(" ".join(toks)) == toks


@settings(max_examples=200)
@given(texts.filter(bool), texts.filter(bool))
def test_title_length_additive(a, b):
    assert title_length(a + " " + b) == title_length(a) + title_length(b)


def test_frequencies_case_folding():
    lex = Lexicon.from_tokens(nouns={"cell", "dna"})
    table = token_frequencies(["Cell cell DNA"], lex)
    assert dict(table.nouns) == {"cell": 2, "dna": 1}
    assert not table.verbs


def test_frequencies_empty():
    table = token_frequencies([], Lexicon())
    assert table.total == 0 and not table.nouns and not table.other


def test_stopwords_and_single_chars_dropped():
    lex = Lexicon.from_tokens(verbs={"clone"}, stopwords={"the"})
    table = token_frequencies(["The clone of a X cell"], lex)
    assert dict(table.verbs) == {"clone": 1}
    assert dict(table.other) == {"of": 1, "cell": 1}
    assert table.dropped == 3
    assert table.classified() == table.total - table.dropped


def test_generated_counts_match_ground_truth():
    rng = random.Random(11)
    verbs = ["catalyze", "clone", "induce"]
    nouns = ["cell", "dna", "protein", "electron"]
    other = ["novel", "study"]
    lex = Lexicon.from_tokens(verbs, nouns, ["the", "of"])
    truth = {t: 0 for t in verbs + nouns + other}
    docs = []
    for _ in range(1000):
        toks = rng.choices(verbs + nouns + other + ["the", "of"], k=rng.randint(0, 12))
        for t in toks:
            if t in truth:
                truth[t] += 1
        docs.append(" ".join(t.upper() if rng.random() < 0.3 else t for t in toks))
    table = token_frequencies(docs, lex)
    for t in verbs:
        assert table.verbs[t] == truth[t]
    for t in nouns:
        assert table.nouns[t] == truth[t]
    for t in other:
        assert table.other[t] == truth[t]
    shuffled = docs[:]
    rng.shuffle(shuffled)
    assert token_frequencies(shuffled, lex) == table


def test_nfc_normalisation():
    lex = Lexicon.from_tokens(nouns={"café"})
    table = token_frequencies(["CAFÉ"], lex)  # decomposed accent
    assert table.nouns["café"] == 1


def test_lexicon_conflict():
    with pytest.raises(LexiconError):
        Lexicon.from_tokens(verbs={"clone"}, nouns={"Clone"})


def test_bundled_lexicon():
    lex = load_lexicon()
    assert {"catalyze", "clone"} <= lex.verbs
    assert {"cell", "dna"} <= lex.nouns


def test_lexicon_dir(tmp_path):
    (tmp_path / "verbs.txt").write_text("# verbs\nAmplify\n\n")
    (tmp_path / "nouns.txt").write_text("gene  # trailing comment\n")
    lex = load_lexicon(tmp_path)
    assert lex.verbs == {"amplify"} and lex.nouns == {"gene"} and not lex.stopwords
    (tmp_path / "stopwords.txt").write_text("gene\n")
    with pytest.raises(LexiconError):
        load_lexicon(tmp_path)


def _papers(titles, label=Label.OTHER):
    return [PaperMeta(pub_year=2000, title=t, label=label) for t in titles]


def test_identical_groups():
    group = _papers(["DNA cell clone", "electron gas theory", "cell"])
    rep = compare_groups_linguistic(group, group, load_lexicon())
    assert rep["title_length_test"]["p_value"] == 1.0
    assert rep["high"]["top_nouns"] == rep["low"]["top_nouns"]
    assert rep["high"]["nobel_count"] == 0


def test_shifted_title_lengths_detected():
    rng = random.Random(5)
    base = [rng.randint(5, 12) for _ in range(200)]
    high = _papers([" ".join(["word"] * (n + 3)) for n in base], Label.NOBEL)
    low = _papers([" ".join(["word"] * n) for n in base])
    rep = compare_groups_linguistic(high, low, load_lexicon())
    assert rep["title_length_test"]["p_value"] < 0.001
    assert rep["high"]["nobel_count"] == 200 and rep["low"]["nobel_count"] == 0


def test_abstracts_counted_when_present():
    high = [PaperMeta(pub_year=2000, title="cell", abstract="clone DNA")]
    low = [PaperMeta(pub_year=2000, title="cell")]
    rep = compare_groups_linguistic(high, low, load_lexicon())
    assert rep["high"]["top_verbs"] == [["clone", 1]]
    assert rep["low"]["top_verbs"] == []


def test_empty_group_errors():
    with pytest.raises(ValueError):
        compare_groups_linguistic([], _papers(["a"]), Lexicon())
