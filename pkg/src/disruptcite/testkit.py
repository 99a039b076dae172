"""Synthetic citation corpora and brute-force reference implementations.

The oracles here deliberately avoid the indexing and ranking shortcuts used
by the fast paths: they rebuild sets from raw edge lists and enumerate
pairs, permutations and prefixes directly.  They are meant for small inputs.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from fractions import Fraction
from itertools import combinations
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .graph import Label, PaperMeta
from .ingest import write_papers
from .metrics import CitationPartition, DenominatorMode

ORACLE_MWU_MAX_N = 12
ORACLE_TAU_MAX_N = 500

# fixture G1: named nodes with stable external ids
G1_IDS = {"fp": 1, "r1": 2, "r2": 3, "c1": 4, "c2": 5, "c3": 6, "x1": 7, "x2": 8}
G1_EDGES = [("c1", "fp"), ("c2", "fp"), ("c3", "fp"), ("fp", "r1"), ("fp", "r2"),
            ("c1", "r1"), ("x1", "r1"), ("x1", "r2"), ("x2", "r2")]

_WORDS = ("quantum field effect cell dna protein membrane electron gas theory "
          "observation evidence structure dynamics synthesis catalyze clone "
          "induce measure detect observe amplify superconductivity lattice "
          "energy spectrum model analysis method system").split()


def g1_edges() -> list[tuple[int, int]]:
    return [(G1_IDS[a], G1_IDS[b]) for a, b in G1_EDGES]


def g1_metas(fp_label: Label = Label.NOBEL) -> list[tuple[int, PaperMeta]]:
    out = []
    for name, ext in sorted(G1_IDS.items(), key=lambda kv: kv[1]):
        label = fp_label if name == "fp" else Label.OTHER
        out.append((ext, PaperMeta(pub_year=1960, venue_id="J", volume="1", issue="1",
                                   field_code="1.03", team_size=1, page_length=5,
                                   title=f"paper {name}", label=label)))
    return out


@dataclass(frozen=True)
class SynthParams:
    """Parameters for :func:`synth_graph`.

    Exactly one of ``density`` (every earlier paper is cited independently
    with this probability) or ``mean_refs`` (Poisson reference counts with
    targets skewed toward older papers by ``age_skew``) must be given.
    """

    n_papers: int
    seed: int = 0
    density: Optional[float] = None
    mean_refs: Optional[float] = None
    age_skew: float = 1.0
    nobel_fraction: float = 0.01
    control_fraction: float = 0.05
    nobel_extra_citers: int = 0
    year_range: tuple[int, int] = (1900, 2000)
    n_venues: int = 5
    n_fields: int = 3
    team_size_mean: float = 3.0
    with_titles: bool = True

    def __post_init__(self):
        if self.n_papers < 0:
            raise ValueError("n_papers must be >= 0")
        if (self.density is None) == (self.mean_refs is None):
            raise ValueError("give exactly one of density or mean_refs")
        if self.density is not None and not 0 <= self.density <= 1:
            raise ValueError("density must lie in [0, 1]")
        if self.mean_refs is not None and self.mean_refs < 0:
            raise ValueError("mean_refs must be >= 0")
        if self.age_skew <= 0:
            raise ValueError("age_skew must be positive")
        if not (0 <= self.nobel_fraction <= 1 and 0 <= self.control_fraction <= 1
                and self.nobel_fraction + self.control_fraction <= 1):
            raise ValueError("label fractions must lie in [0, 1] and sum to <= 1")
        y0, y1 = self.year_range
        if not 1800 <= y0 <= y1 <= 2100:
            raise ValueError("year_range must satisfy 1800 <= start <= end <= 2100")
        if self.n_venues < 1 or self.n_fields < 1 or self.team_size_mean < 1:
            raise ValueError("n_venues, n_fields and team_size_mean must be >= 1")


def synth_graph(p: SynthParams) -> tuple[np.ndarray, list[tuple[int, PaperMeta]]]:
    """Random citation DAG plus metadata, fully determined by ``p.seed``.

    Papers are created in publication order and only cite earlier ones, so
    every edge points backward in time.  Returns external-id edges as an
    ``(E, 2)`` array and ``(external id, PaperMeta)`` records.
    """
    rng = np.random.default_rng(p.seed)
    n = p.n_papers
    if n == 0:
        return np.empty((0, 2), dtype=np.int64), []

    # external ids: distinct and not in creation order
    ext = rng.choice(np.arange(1, 50 * n + 1, dtype=np.int64), size=n, replace=False)

    if p.density is not None:
        parts = []
        for i in range(1, n):
            k = rng.binomial(i, p.density)
            if k:
                dst = rng.choice(i, size=k, replace=False)
                parts.append(np.column_stack([np.full(k, i), dst]))
        idx = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    else:
        k = np.minimum(rng.poisson(p.mean_refs, n), np.arange(n))
        src = np.repeat(np.arange(n, dtype=np.int64), k)
        u = rng.random(len(src))
        dst = np.floor(src * u ** p.age_skew).astype(np.int64)
        idx = np.column_stack([src, dst])

    labels = np.full(n, 2, dtype=np.int8)  # 0 nobel, 1 control, 2 other
    draw = rng.random(n)
    labels[draw < p.nobel_fraction + p.control_fraction] = 1
    labels[draw < p.nobel_fraction] = 0

    if p.nobel_extra_citers:
        extra = []
        for i in np.flatnonzero(labels == 0).tolist():
            later = n - 1 - i
            if later <= 0:
                continue
            k = min(p.nobel_extra_citers, later)
            citers = i + 1 + rng.choice(later, size=k, replace=False)
            extra.append(np.column_stack([citers, np.full(k, i)]))
        if extra:
            idx = np.concatenate([idx] + extra)

    if len(idx):
        idx = np.unique(idx, axis=0)  # mean_refs draws and extra citers can repeat

    y0, y1 = p.year_range
    years = np.sort(rng.integers(y0, y1 + 1, n))
    venues = rng.integers(0, p.n_venues, n)
    fields = rng.integers(0, p.n_fields, n)
    issues = rng.integers(1, 5, n)
    teams = rng.geometric(1 / p.team_size_mean, n)
    pages = rng.integers(1, 40, n)
    title_lens = rng.integers(3, 16, n)
    label_of = (Label.NOBEL, Label.CONTROL, Label.OTHER)

    metas = []
    for i in range(n):
        title = None
        if p.with_titles:
            words = rng.choice(len(_WORDS), size=int(title_lens[i]))
            title = " ".join(_WORDS[w] for w in words.tolist())
        metas.append((int(ext[i]), PaperMeta(
            pub_year=int(years[i]), venue_id=f"V{venues[i]}",
            volume=str(int(years[i]) - y0 + 1), issue=str(int(issues[i])),
            field_code=f"F{fields[i]}", team_size=int(teams[i]),
            page_length=int(pages[i]), title=title, label=label_of[labels[i]])))

    edges = ext[idx] if len(idx) else np.empty((0, 2), dtype=np.int64)
    return edges.astype(np.int64), metas


def write_synth(directory: Path | str, edges: np.ndarray,
                metas: Sequence[tuple[int, PaperMeta]]) -> tuple[Path, Path]:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    edge_path = directory / "edges.tsv"
    paper_path = directory / "papers.tsv"
    with open(edge_path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("citing\tcited\n")
        for start in range(0, len(edges), 500_000):
            chunk = edges[start:start + 500_000]
            fh.write("".join(f"{a}\t{b}\n" for a, b in chunk.tolist()))
    with open(paper_path, "w", encoding="utf-8", newline="\n") as fh:
        write_papers(fh, metas)
    return edge_path, paper_path


# ---------------------------------------------------------------------------
# oracles

def oracle_sets(edges: Sequence[tuple[int, int]], fp: int) -> dict[str, set]:
    """Literal C, R, RC, CC, DC for ``fp`` from a raw edge list."""
    pairs = {(int(a), int(b)) for a, b in edges if a != b}
    C = {a for a, b in pairs if b == fp}
    R = {b for a, b in pairs if a == fp}
    RC = {a for a, b in pairs if b in R} - {fp}
    CC = RC & C
    DC = C - CC
    return {"C": C, "R": R, "RC": RC, "CC": CC, "DC": DC, "NR": RC - C}


def oracle_partition(edges: Sequence[tuple[int, int]], fp: int) -> CitationPartition:
    s = oracle_sets(edges, fp)
    return CitationPartition(c=len(s["C"]), cc=len(s["CC"]), dc=len(s["DC"]),
                             n_r=len(s["NR"]), rc_total=len(s["RC"]))


def oracle_indices(part: CitationPartition,
                   mode: DenominatorMode = DenominatorMode.PARTITION) -> dict:
    """CD-index, DI* and simple DI as exact fractions rounded once to float."""
    third = part.rc_total if DenominatorMode(mode) is DenominatorMode.LITERAL else part.n_r
    den = part.dc + part.cc + third
    cd = float(Fraction(part.dc - part.cc, den)) if den else None
    ds = float(Fraction(part.dc, den)) if den else None
    sd = float(Fraction(part.dc, part.dc + part.cc)) if part.dc + part.cc else None
    return {"cd_index": cd, "di_star": ds, "simple_di": sd}


def oracle_mwu(a: Sequence[float], b: Sequence[float]) -> tuple[float, float]:
    """``(U_a, two-sided p)`` by enumerating every relabelling of the pooled data."""
    n1, n = len(a), len(a) + len(b)
    if n > ORACLE_MWU_MAX_N:
        raise ValueError(f"oracle_mwu limited to combined n <= {ORACLE_MWU_MAX_N}")
    if not a or not b:
        raise ValueError("both samples must be non-empty")

    def u_of(xs, ys):
        return sum(1.0 if x > y else 0.5 if x == y else 0.0 for x in xs for y in ys)

    pooled = list(a) + list(b)
    u_obs = u_of(a, b)
    us = []
    for chosen in combinations(range(n), n1):
        cs = set(chosen)
        us.append(u_of([pooled[i] for i in chosen],
                       [pooled[i] for i in range(n) if i not in cs]))
    lower = Fraction(sum(1 for u in us if u <= u_obs), len(us))
    upper = Fraction(sum(1 for u in us if u >= u_obs), len(us))
    return u_obs, float(min(Fraction(1), 2 * min(lower, upper)))


def oracle_tau(x: Sequence[float], y: Sequence[float]) -> float:
    """Kendall tau-b by enumerating all pairs."""
    n = len(x)
    if n != len(y) or n < 2 or n > ORACLE_TAU_MAX_N:
        raise ValueError("oracle_tau needs equal lengths in [2, 500]")
    conc = disc = tie_x = tie_y = 0
    for i in range(n):
        for j in range(i + 1, n):
            dx = (x[i] > x[j]) - (x[i] < x[j])
            dy = (y[i] > y[j]) - (y[i] < y[j])
            if dx == 0:
                tie_x += 1
            if dy == 0:
                tie_y += 1
            if dx * dy > 0:
                conc += 1
            elif dx * dy < 0:
                disc += 1
    n0 = n * (n - 1) // 2
    den = (n0 - tie_x) * (n0 - tie_y)
    if den == 0:
        raise ValueError("tau-b undefined")
    return (conc - disc) / math.sqrt(den)


def oracle_topk(scores: Sequence[float], positive: Sequence[bool]) -> dict:
    """AR, IP curve/average and k-sweep averages by direct counting."""
    n = len(scores)
    pos = [i for i in range(n) if positive[i]]
    if not pos:
        raise ValueError("no positives")
    ranks = []
    for i in pos:
        greater = sum(1 for s in scores if s > scores[i])
        equal = sum(1 for s in scores if s == scores[i])
        ranks.append(Fraction(2 * greater + equal + 1, 2))
    ar = sum(ranks) / len(pos) / n

    order = sorted(range(n), key=lambda i: (-scores[i], i))
    curve = []
    for f in range(1, 101):
        top = math.ceil(Fraction(f * n, 100))
        curve.append(Fraction(sum(1 for i in order[:top] if positive[i]), len(pos)))
    precision = recall = f1 = Fraction(0)
    for k in range(1, n + 1):
        tp = sum(1 for i in order[:k] if positive[i])
        p_k = Fraction(tp, k)
        r_k = Fraction(tp, len(pos))
        precision += p_k
        recall += r_k
        f1 += 2 * p_k * r_k / (p_k + r_k) if p_k + r_k else 0
    return {"ar": float(ar), "ip_curve": [float(c) for c in curve],
            "ip_average": float(sum(curve) / 100),
            "avg_precision": float(precision / n), "avg_recall": float(recall / n),
            "avg_f1": float(f1 / n)}


def oracle_match(metas: Sequence[tuple[int, PaperMeta]], target_ids: Sequence[int],
                 attrs: Sequence[str]) -> dict[int, list[int]]:
    """Control candidates per target external id by exhaustive filtering."""
    by_id = dict(metas)
    targets = set(target_ids)
    out = {}
    for t in target_ids:
        tm = by_id[t]
        if any(getattr(tm, a) is None for a in attrs):
            out[t] = []
            continue
        out[t] = sorted(
            pid for pid, m in metas
            if pid not in targets and m.label is not Label.NOBEL
            and all(getattr(m, a) == getattr(tm, a) for a in attrs))
    return out
