"""On-disk graph bundle: raw ``.npy`` CSR arrays plus a paper TSV.

``np.save`` output depends only on array contents, so rebuilding a bundle
from the same inputs reproduces it byte for byte.
"""

from __future__ import annotations

import json
from pathlib import Path

import numpy as np

from .graph import DEFAULT_META, CitationGraph
from .ingest import parse_papers, write_papers

BUNDLE_VERSION = 1
_ARRAYS = ("ext_ids", "ref_indptr", "ref_indices", "cit_indptr", "cit_indices")


def save_bundle(g: CitationGraph, directory: Path | str) -> Path:
    directory = Path(directory)
    directory.mkdir(parents=True, exist_ok=True)
    for name in _ARRAYS:
        np.save(directory / f"{name}.npy", getattr(g, name), allow_pickle=False)
    with open(directory / "papers.tsv", "w", encoding="utf-8", newline="\n") as fh:
        write_papers(fh, ((int(g.ext_ids[i]), m) for i, m in enumerate(g.metas)
                          if m is not DEFAULT_META))
    manifest = {"format": "disruptcite-bundle", "version": BUNDLE_VERSION,
                "papers": g.n, "edges": g.edge_count}
    (directory / "manifest.json").write_text(json.dumps(manifest, indent=2) + "\n")
    return directory


def load_bundle(directory: Path | str) -> CitationGraph:
    directory = Path(directory)
    manifest_path = directory / "manifest.json"
    if not manifest_path.exists():
        raise FileNotFoundError(manifest_path)
    manifest = json.loads(manifest_path.read_text())
    if manifest.get("version") != BUNDLE_VERSION:
        raise ValueError(f"unsupported bundle version {manifest.get('version')!r}")
    arrays = {name: np.load(directory / f"{name}.npy", allow_pickle=False)
              for name in _ARRAYS}
    ext_ids = arrays["ext_ids"]
    metas = [DEFAULT_META] * len(ext_ids)
    with open(directory / "papers.tsv", "rb") as fh:
        records = parse_papers(fh)
    if records:
        ids = np.array([r[0] for r in records], dtype=np.int64)
        for pos, (_, meta) in zip(np.searchsorted(ext_ids, ids).tolist(), records):
            metas[pos] = meta
    return CitationGraph(ext_ids, arrays["ref_indptr"], arrays["ref_indices"],
                         arrays["cit_indptr"], arrays["cit_indices"], metas)
