"""Immutable citation graph stored as two CSR adjacency structures.

Dense node ids run ``0..N-1``; ``ext_ids[i]`` holds the source identifier
(e.g. a database paper id) of dense node ``i``.  Both directions are kept so that
a paper's references and its citers are each an O(degree) slice.
"""

from __future__ import annotations

import enum
import logging
from dataclasses import dataclass
from typing import Iterable, Optional, Sequence

import numpy as np

logger = logging.getLogger(__name__)


class Label(str, enum.Enum):
    NOBEL = "nobel"
    CONTROL = "control"
    OTHER = "other"

    @classmethod
    def parse(cls, text: str) -> "Label":
        try:
            return cls(text.strip().casefold())
        except ValueError:
            raise ValueError(f"unknown label {text!r}") from None


@dataclass(frozen=True, slots=True)
class PaperMeta:
    """Per-paper bibliographic record.

    Every field except ``label`` may be absent (``None``) for papers that
    only occur as edge endpoints.
    """

    pub_year: Optional[int] = None
    venue_id: Optional[str] = None
    volume: Optional[str] = None
    issue: Optional[str] = None
    field_code: Optional[str] = None
    team_size: Optional[int] = None
    page_length: Optional[int] = None
    title: Optional[str] = None
    abstract: Optional[str] = None
    label: Label = Label.OTHER

    def __post_init__(self):
        if self.pub_year is not None and not 1800 <= self.pub_year <= 2100:
            raise ValueError(f"pub_year {self.pub_year} outside [1800, 2100]")
        if self.team_size is not None and self.team_size < 1:
            raise ValueError(f"team_size must be >= 1, got {self.team_size}")
        if self.page_length is not None and self.page_length < 0:
            raise ValueError(f"page_length must be >= 0, got {self.page_length}")


DEFAULT_META = PaperMeta()


def _csr(src: np.ndarray, dst: np.ndarray, n: int) -> tuple[np.ndarray, np.ndarray]:
    # edges must already be unique; sorting by (src, dst) gives sorted rows
    order = np.lexsort((dst, src))
    indices = dst[order].astype(np.int64, copy=False)
    counts = np.bincount(src, minlength=n)
    indptr = np.zeros(n + 1, dtype=np.int64)
    np.cumsum(counts, out=indptr[1:])
    return indptr, indices


class CitationGraph:
    """Citation network with sorted reference and citer lists per paper.

    Construct with :func:`build_graph` or :meth:`from_dense`; instances are
    treated as read-only and are safe to share between workers.
    """

    __slots__ = ("ext_ids", "ref_indptr", "ref_indices", "cit_indptr",
                 "cit_indices", "metas")

    def __init__(self, ext_ids, ref_indptr, ref_indices, cit_indptr,
                 cit_indices, metas):
        self.ext_ids = ext_ids
        self.ref_indptr = ref_indptr
        self.ref_indices = ref_indices
        self.cit_indptr = cit_indptr
        self.cit_indices = cit_indices
        self.metas = metas
        for arr in (ext_ids, ref_indptr, ref_indices, cit_indptr, cit_indices):
            arr.setflags(write=False)

    @classmethod
    def from_dense(cls, ext_ids: np.ndarray, src: np.ndarray, dst: np.ndarray,
                   metas: Sequence[PaperMeta]) -> "CitationGraph":
        """Build from dense, deduplicated, loop-free ``src -> dst`` arrays."""
        n = len(ext_ids)
        src = np.asarray(src, dtype=np.int64)
        dst = np.asarray(dst, dtype=np.int64)
        ref_indptr, ref_indices = _csr(src, dst, n)
        cit_indptr, cit_indices = _csr(dst, src, n)
        return cls(np.asarray(ext_ids, dtype=np.int64), ref_indptr, ref_indices,
                   cit_indptr, cit_indices, list(metas))

    @property
    def n(self) -> int:
        return len(self.ext_ids)

    @property
    def edge_count(self) -> int:
        return len(self.ref_indices)

    def _check(self, p: int) -> None:
        if not 0 <= p < self.n:
            raise IndexError(f"paper index {p} out of range for N={self.n}")

    def references(self, p: int) -> np.ndarray:
        """Sorted dense ids of the papers ``p`` cites."""
        self._check(p)
        return self.ref_indices[self.ref_indptr[p]:self.ref_indptr[p + 1]]

    def citers(self, p: int) -> np.ndarray:
        """Sorted dense ids of the papers citing ``p``."""
        self._check(p)
        return self.cit_indices[self.cit_indptr[p]:self.cit_indptr[p + 1]]

    def meta(self, p: int) -> PaperMeta:
        self._check(p)
        return self.metas[p]

    def dense_id(self, ext_id: int) -> int:
        i = int(np.searchsorted(self.ext_ids, ext_id))
        if i >= self.n or self.ext_ids[i] != ext_id:
            raise KeyError(f"unknown paper id {ext_id}")
        return i

    def ext_id(self, p: int) -> int:
        self._check(p)
        return int(self.ext_ids[p])

    def edges(self) -> tuple[np.ndarray, np.ndarray]:
        """Dense ``(citing, cited)`` arrays in row-major order."""
        src = np.repeat(np.arange(self.n, dtype=np.int64), np.diff(self.ref_indptr))
        return src, self.ref_indices.copy()

    def __repr__(self) -> str:
        return f"CitationGraph(N={self.n}, edges={self.edge_count})"


def references(g: CitationGraph, p: int) -> set[int]:
    return set(g.references(p).tolist())


def citers(g: CitationGraph, p: int) -> set[int]:
    return set(g.citers(p).tolist())


def build_graph(edges: Iterable[tuple[int, int]],
                metas: Iterable[tuple[int, PaperMeta]] = ()) -> CitationGraph:
    """Build a graph from external-id edges and metadata records.

    Duplicate edges collapse, self-loops are dropped with a warning, and
    papers that appear only in ``edges`` get a default record labelled
    ``other``.  Dense ids follow ascending external id.
    """
    from .ingest import ParseError, clean_edges, remap  # ingest depends on graph types

    if isinstance(edges, np.ndarray):
        edge_arr = edges.astype(np.int64, copy=False).reshape(-1, 2)
    else:
        edge_list = list(edges)
        try:
            edge_arr = np.array(edge_list, dtype=np.int64).reshape(-1, 2)
        except (TypeError, ValueError):
            for lineno, pair in enumerate(edge_list, 1):
                try:
                    np.array(pair, dtype=np.int64).reshape(2)
                except (TypeError, ValueError):
                    raise ParseError(f"malformed edge {pair!r}", lineno) from None
            raise
    edge_arr, _dups, loops = clean_edges(edge_arr)
    if loops:
        logger.warning("dropped %d self-citation edges", loops)
    dense_edges, dense_metas, ext_ids = remap(edge_arr, list(metas))
    return CitationGraph.from_dense(ext_ids, dense_edges[:, 0], dense_edges[:, 1],
                                    dense_metas)
