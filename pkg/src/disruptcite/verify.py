"""Cross-check the compiled metric path against the set-based oracles."""

from __future__ import annotations

from collections import defaultdict
from typing import Optional, Sequence

import numpy as np

from .graph import CitationGraph, build_graph
from .metrics import (CitationPartition, DenominatorMode, cd_index, di_star,
                      partition_array, simple_di)
from .testkit import SynthParams, oracle_indices, synth_graph

VERIFY_MAX_EDGES = 2_000_000


def oracle_all_partitions(edges: Sequence[tuple[int, int]]) -> dict[int, CitationPartition]:
    """Partition for every node, from plain dict-of-set adjacency."""
    refs: dict[int, set] = defaultdict(set)
    cits: dict[int, set] = defaultdict(set)
    nodes = set()
    for a, b in edges:
        a, b = int(a), int(b)
        nodes.update((a, b))
        if a != b:
            refs[a].add(b)
            cits[b].add(a)
    out = {}
    for fp in nodes:
        C = cits.get(fp, set())
        RC = set()
        for r in refs.get(fp, ()):
            RC |= cits[r]
        RC.discard(fp)
        CC = RC & C
        out[fp] = CitationPartition(c=len(C), cc=len(CC), dc=len(C - CC),
                                    n_r=len(RC - C), rc_total=len(RC))
    return out


def compare_graph(g: CitationGraph, edges_ext, focal: Optional[Sequence[int]] = None,
                  threads: int = 1) -> list[str]:
    """Return mismatch descriptions (empty when the fast path agrees)."""
    oracle = oracle_all_partitions(edges_ext)
    focal = np.arange(g.n) if focal is None else np.asarray(focal, dtype=np.int64)
    counts = partition_array(g, focal, threads)
    problems = []
    for k, p in enumerate(focal.tolist()):
        ext = int(g.ext_ids[p])
        row = counts[k].tolist()
        fast = CitationPartition(c=row[0], cc=row[1], dc=row[2], n_r=row[3], rc_total=row[4])
        ref = oracle.get(ext, CitationPartition(0, 0, 0, 0, 0))
        if fast != ref:
            problems.append(f"paper {ext}: partition {fast} != oracle {ref}")
            continue
        for mode in DenominatorMode:
            want = oracle_indices(ref, mode)
            got = {"cd_index": cd_index(fast, mode), "di_star": di_star(fast, mode),
                   "simple_di": simple_di(fast)}
            if got != want:
                problems.append(f"paper {ext} ({mode.value}): {got} != oracle {want}")
    return problems


def verify_graph(g: CitationGraph, focal: Optional[Sequence[int]] = None,
                 denominator: str = "partition") -> dict:
    if g.edge_count > VERIFY_MAX_EDGES:
        return {"checked": 0, "passed": None,
                "skipped": f"graph has more than {VERIFY_MAX_EDGES} edges"}
    src, dst = g.edges()
    edges_ext = np.column_stack([g.ext_ids[src], g.ext_ids[dst]]).tolist()
    problems = compare_graph(g, edges_ext, focal)
    n = g.n if focal is None else len(focal)
    return {"checked": n, "passed": not problems, "mismatches": problems[:20]}


def verify_synthetic(n_graphs: int = 100, seed: int = 0, max_nodes: int = 200,
                     max_density: float = 0.1) -> dict:
    """Oracle agreement on ``n_graphs`` random graphs (graph ``i`` uses seed+i)."""
    rng = np.random.default_rng(seed)
    sizes = rng.integers(1, max_nodes + 1, n_graphs)
    densities = rng.uniform(0, max_density, n_graphs)
    failures = []
    nodes = 0
    for i in range(n_graphs):
        params = SynthParams(n_papers=int(sizes[i]), density=float(densities[i]),
                             seed=seed + i, with_titles=False)
        edges, metas = synth_graph(params)
        g = build_graph(edges, metas)
        nodes += g.n
        problems = compare_graph(g, edges.tolist())
        if problems:
            failures.append({"graph": i, "seed": seed + i, "mismatches": problems[:5]})
    return {"graphs": n_graphs, "nodes_checked": nodes, "passed": not failures,
            "failures": failures[:10]}
