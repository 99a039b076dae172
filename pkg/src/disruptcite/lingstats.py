"""Title length and lexicon-classified token counts for group comparisons.

Word classes come from plain lexicon files (one token per line, ``#``
comments) rather than a trained tagger.
"""

from __future__ import annotations

import re
import unicodedata
from collections import Counter
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path
from typing import Iterable, Optional, Sequence

_TOKEN = re.compile(r"[^\W_]+")

LEXICON_FILES = ("verbs.txt", "nouns.txt", "stopwords.txt")


class LexiconError(ValueError):
    pass


def tokenize(text: Optional[str]) -> list[str]:
    """Maximal runs of Unicode letters/digits; punctuation and hyphens split."""
    if not text:
        return []
    return _TOKEN.findall(unicodedata.normalize("NFC", text))


def normalize(token: str) -> str:
    return unicodedata.normalize("NFC", token).casefold()


def title_length(title: Optional[str]) -> int:
    return len(tokenize(title))


@dataclass(frozen=True)
class Lexicon:
    verbs: frozenset = frozenset()
    nouns: frozenset = frozenset()
    stopwords: frozenset = frozenset()

    def __post_init__(self):
        pairs = (("verbs", "nouns"), ("verbs", "stopwords"), ("nouns", "stopwords"))
        for a, b in pairs:
            both = getattr(self, a) & getattr(self, b)
            if both:
                raise LexiconError(f"tokens listed as both {a} and {b}: "
                                   f"{', '.join(sorted(both))}")

    @classmethod
    def from_tokens(cls, verbs: Iterable[str] = (), nouns: Iterable[str] = (),
                    stopwords: Iterable[str] = ()) -> "Lexicon":
        return cls(frozenset(map(normalize, verbs)), frozenset(map(normalize, nouns)),
                   frozenset(map(normalize, stopwords)))

    def classify(self, token: str) -> str:
        if token in self.verbs:
            return "verb"
        if token in self.nouns:
            return "noun"
        return "other"


def read_token_list(text: str) -> list[str]:
    out = []
    for line in text.splitlines():
        line = line.split("#", 1)[0].strip()
        if line:
            out.append(line)
    return out


def load_lexicon(directory: Optional[Path | str] = None) -> Lexicon:
    """Load ``verbs.txt``, ``nouns.txt`` and optional ``stopwords.txt``.

    Without a directory the small bundled lexicon is used.
    """
    lists = {}
    for name in LEXICON_FILES:
        if directory is None:
            res = resources.files("disruptcite").joinpath("data", name)
            text = res.read_text(encoding="utf-8")
        else:
            path = Path(directory) / name
            if not path.exists():
                if name == "stopwords.txt":
                    lists[name] = []
                    continue
                raise FileNotFoundError(path)
            text = path.read_text(encoding="utf-8")
        lists[name] = read_token_list(text)
    return Lexicon.from_tokens(lists["verbs.txt"], lists["nouns.txt"], lists["stopwords.txt"])


@dataclass
class FreqTable:
    verbs: Counter = field(default_factory=Counter)
    nouns: Counter = field(default_factory=Counter)
    other: Counter = field(default_factory=Counter)
    total: int = 0
    dropped: int = 0

    def merge(self, other: "FreqTable") -> "FreqTable":
        return FreqTable(self.verbs + other.verbs, self.nouns + other.nouns,
                         self.other + other.other, self.total + other.total,
                         self.dropped + other.dropped)

    def classified(self) -> int:
        return sum(self.verbs.values()) + sum(self.nouns.values()) + sum(self.other.values())


def token_frequencies(docs: Iterable[Optional[str]], lex: Lexicon) -> FreqTable:
    """Count lexicon classes over ``docs`` after case folding.

    Stopwords and single-character tokens are dropped (but counted in
    ``total`` and ``dropped``).
    """
    table = FreqTable()
    buckets = {"verb": table.verbs, "noun": table.nouns, "other": table.other}
    for doc in docs:
        for tok in tokenize(doc):
            tok = normalize(tok)
            table.total += 1
            if len(tok) < 2 or tok in lex.stopwords:
                table.dropped += 1
                continue
            buckets[lex.classify(tok)][tok] += 1
    return table


def _top(counter: Counter, n: int) -> list[list]:
    ranked = sorted(counter.items(), key=lambda kv: (-kv[1], kv[0]))
    return [[tok, cnt] for tok, cnt in ranked[:n]]


def _group_summary(papers: Sequence, lex: Lexicon, top_n: int) -> dict:
    from .graph import Label

    lengths = [title_length(p.title) for p in papers]
    docs = []
    for p in papers:
        docs.append(p.title)
        if p.abstract:
            docs.append(p.abstract)
    freq = token_frequencies(docs, lex)
    hist = Counter(lengths)
    return {
        "n": len(papers),
        "nobel_count": sum(1 for p in papers if p.label is Label.NOBEL),
        "title_length": {
            "mean": sum(lengths) / len(lengths),
            "histogram": [[k, hist[k]] for k in sorted(hist)],
        },
        "tokens_total": freq.total,
        "tokens_dropped": freq.dropped,
        "top_verbs": _top(freq.verbs, top_n),
        "top_nouns": _top(freq.nouns, top_n),
    }


def compare_groups_linguistic(high: Sequence, low: Sequence, lex: Lexicon,
                              top_n: int = 20) -> dict:
    """Contrast two groups of papers (anything with ``title``, ``abstract``
    and ``label`` attributes, typically :class:`PaperMeta`)."""
    from .evalstats import mann_whitney_u

    if not high or not low:
        raise ValueError("both groups must be non-empty")
    test = mann_whitney_u([title_length(p.title) for p in high],
                          [title_length(p.title) for p in low])
    return {
        "high": _group_summary(high, lex, top_n),
        "low": _group_summary(low, lex, top_n),
        "title_length_test": test.to_dict(),
    }
