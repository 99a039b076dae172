"""Streaming readers for edge-list and paper-metadata files.

Edge files hold one ``citing<TAB>cited`` pair per line (or comma separated),
with an optional ``citing\\tcited`` header.  Paper files are TSV with the
column order given by :data:`PAPER_COLUMNS`.
"""

from __future__ import annotations

import io
import logging
import warnings
from dataclasses import asdict, dataclass
from typing import BinaryIO, Iterable, Iterator, Optional, Sequence

import numpy as np

from .graph import DEFAULT_META, Label, PaperMeta

logger = logging.getLogger(__name__)

BLOCK_SIZE = 8 << 20

PAPER_COLUMNS = ("id", "year", "venue_id", "volume", "issue", "field_code",
                 "team_size", "page_length", "label", "title", "abstract")

DELIMITERS = {"tsv": b"\t", "csv": b","}


class ParseError(ValueError):
    def __init__(self, message: str, lineno: Optional[int] = None,
                 path: Optional[str] = None):
        self.message = message
        self.lineno = lineno
        self.path = path
        super().__init__(str(self))

    def __str__(self) -> str:
        where = ""
        if self.path:
            where = f"{self.path}:"
        if self.lineno is not None:
            where += f"{self.lineno}:"
        return f"{where} {self.message}" if where else self.message


@dataclass
class IngestStats:
    lines_read: int = 0
    edges_kept: int = 0
    duplicates_dropped: int = 0
    self_loops_dropped: int = 0
    parse_failures: int = 0

    def to_dict(self) -> dict:
        return asdict(self)


def _read_lines_blocks(stream: BinaryIO, block_size: int) -> Iterator[bytes]:
    """Yield chunks of whole lines (each ending in LF except possibly the last)."""
    tail = b""
    while True:
        chunk = stream.read(block_size)
        if isinstance(chunk, str):
            chunk = chunk.encode("utf-8")
        if not chunk:
            if tail:
                yield tail
            return
        data = tail + chunk
        cut = data.rfind(b"\n")
        if cut < 0:
            tail = data
            continue
        tail = data[cut + 1:]
        yield data[:cut + 1]


def _is_header(line: bytes, delim: bytes) -> bool:
    fields = [f.strip() for f in line.split(delim)]
    return len(fields) == 2 and not any(f.isdigit() for f in fields)


def _parse_pair(line: bytes, delim: bytes) -> tuple[int, int]:
    fields = line.split(delim)
    if len(fields) != 2:
        raise ValueError(f"expected 2 fields, got {len(fields)}")
    a, b = fields[0].strip(), fields[1].strip()
    if not (a.isdigit() and b.isdigit()):
        raise ValueError(f"non-numeric id in {line.decode('utf-8', 'replace')!r}")
    return int(a), int(b)


def clean_edges(edges: np.ndarray) -> tuple[np.ndarray, int, int]:
    """Drop self-loops and duplicate rows.

    Returns ``(edges, duplicates_dropped, self_loops_dropped)`` with rows
    sorted by ``(citing, cited)``.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    loops = edges[:, 0] == edges[:, 1]
    n_loops = int(loops.sum())
    if n_loops:
        edges = edges[~loops]
    if len(edges) == 0:
        return edges, 0, n_loops
    order = np.lexsort((edges[:, 1], edges[:, 0]))
    edges = edges[order]
    keep = np.ones(len(edges), dtype=bool)
    keep[1:] = np.any(edges[1:] != edges[:-1], axis=1)
    n_dups = int(len(edges) - keep.sum())
    return edges[keep], n_dups, n_loops


def parse_edges(stream: BinaryIO, format: str = "tsv", strict: bool = False,
                block_size: int = BLOCK_SIZE) -> tuple[np.ndarray, IngestStats]:
    """Parse an edge list into an ``(E, 2)`` int64 array of external ids.

    Blank lines and a single leading header are skipped.  In lenient mode
    malformed lines are counted in ``parse_failures``; in strict mode the
    first one raises :class:`ParseError` carrying its line number.
    Duplicates and self-loops are removed and counted.
    """
    try:
        delim = DELIMITERS[format]
    except KeyError:
        raise ValueError(f"unknown edge format {format!r}") from None
    stats = IngestStats()
    parts: list[np.ndarray] = []
    lineno = 0
    seen_data = False

    for block in _read_lines_blocks(stream, block_size):
        block = block.replace(b"\r\n", b"\n")
        lines = block.split(b"\n")
        if lines and lines[-1] == b"":
            lines.pop()
        stats.lines_read += len(lines)

        if not seen_data:
            for i, line in enumerate(lines):
                if line.strip():
                    seen_data = True
                    if _is_header(line, delim):
                        lines[i] = b""
                        block = b"\n".join(lines) + b"\n"
                    break

        arr = None
        with warnings.catch_warnings():
            warnings.simplefilter("ignore")
            try:
                arr = np.loadtxt(io.BytesIO(block), dtype=np.int64,
                                 delimiter=delim.decode(), comments=None, ndmin=2)
            except ValueError:
                arr = None
        if arr is not None and arr.size and (arr.shape[1] != 2 or (arr < 0).any()):
            arr = None
        if arr is not None:
            parts.append(arr.reshape(-1, 2))
        else:
            pairs = []
            for offset, line in enumerate(lines, 1):
                if not line.strip():
                    continue
                try:
                    pairs.append(_parse_pair(line, delim))
                except ValueError as exc:
                    if strict:
                        raise ParseError(str(exc), lineno + offset) from None
                    stats.parse_failures += 1
            if pairs:
                parts.append(np.array(pairs, dtype=np.int64))
        lineno += len(lines)

    edges = np.concatenate(parts) if parts else np.empty((0, 2), dtype=np.int64)
    edges, stats.duplicates_dropped, stats.self_loops_dropped = clean_edges(edges)
    stats.edges_kept = len(edges)
    if stats.parse_failures:
        logger.warning("skipped %d malformed edge lines", stats.parse_failures)
    return edges, stats


def _opt_str(text: str) -> Optional[str]:
    return text if text != "" else None


def _opt_int(text: str, name: str) -> Optional[int]:
    if text == "":
        return None
    try:
        return int(text)
    except ValueError:
        raise ValueError(f"non-integer {name} {text!r}") from None


def parse_paper_row(fields: Sequence[str]) -> tuple[int, PaperMeta]:
    if len(fields) == len(PAPER_COLUMNS) - 1:
        fields = list(fields) + [""]  # abstract column omitted
    if len(fields) != len(PAPER_COLUMNS):
        raise ValueError(f"expected {len(PAPER_COLUMNS)} columns, got {len(fields)}")
    try:
        ext_id = int(fields[0])
    except ValueError:
        raise ValueError(f"non-numeric id {fields[0]!r}") from None
    try:
        year = int(fields[1])
    except ValueError:
        raise ValueError(f"non-integer year {fields[1]!r}") from None
    meta = PaperMeta(
        pub_year=year,
        venue_id=_opt_str(fields[2]),
        volume=_opt_str(fields[3]),
        issue=_opt_str(fields[4]),
        field_code=_opt_str(fields[5]),
        team_size=_opt_int(fields[6], "team_size"),
        page_length=_opt_int(fields[7], "page_length"),
        label=Label.parse(fields[8]),
        title=fields[9],
        abstract=_opt_str(fields[10]),
    )
    return ext_id, meta


def parse_papers(stream: BinaryIO, strict: bool = True) -> list[tuple[int, PaperMeta]]:
    """Parse a paper metadata TSV into ``(external id, PaperMeta)`` pairs.

    Raises :class:`ParseError` on the first bad row in strict mode; in
    lenient mode bad rows are logged and skipped.
    """
    text = io.TextIOWrapper(stream, encoding="utf-8", newline=None) \
        if not isinstance(stream, io.TextIOBase) else stream
    out = []
    failures = 0
    for lineno, line in enumerate(text, 1):
        line = line.rstrip("\r\n")
        if not line.strip():
            continue
        fields = line.split("\t")
        if lineno == 1 and fields[0].strip().lower() == "id":
            continue
        try:
            out.append(parse_paper_row(fields))
        except ValueError as exc:
            if strict:
                raise ParseError(str(exc), lineno) from None
            failures += 1
    if failures:
        logger.warning("skipped %d malformed paper rows", failures)
    return out


def _clean_text(value: Optional[str]) -> str:
    if value is None:
        return ""
    return value.replace("\t", " ").replace("\r", " ").replace("\n", " ")


def format_paper_row(ext_id: int, meta: PaperMeta) -> str:
    def s(v):
        return "" if v is None else str(v)
    return "\t".join([
        str(ext_id), s(meta.pub_year), _clean_text(meta.venue_id),
        _clean_text(meta.volume), _clean_text(meta.issue),
        _clean_text(meta.field_code), s(meta.team_size), s(meta.page_length),
        meta.label.value, _clean_text(meta.title), _clean_text(meta.abstract),
    ])


def write_papers(fh, records: Iterable[tuple[int, PaperMeta]]) -> None:
    fh.write("\t".join(PAPER_COLUMNS) + "\n")
    for ext_id, meta in records:
        fh.write(format_paper_row(ext_id, meta) + "\n")


def remap(edges: np.ndarray, metas: Sequence[tuple[int, PaperMeta]]
          ) -> tuple[np.ndarray, list[PaperMeta], np.ndarray]:
    """Map external ids onto dense ``0..N-1`` in ascending external-id order.

    Returns ``(dense_edges, dense_metas, ext_ids)`` where ``ext_ids[i]`` is
    the external id of dense node ``i``.  Papers seen only in ``edges`` get
    the default (``label=other``) record.
    """
    edges = np.asarray(edges, dtype=np.int64).reshape(-1, 2)
    meta_ids = np.fromiter((m[0] for m in metas), dtype=np.int64, count=len(metas))
    if len(meta_ids) > 1:
        s = np.sort(meta_ids)
        dup = s[1:][s[1:] == s[:-1]]
        if len(dup):
            raise ValueError(f"duplicate paper id {int(dup[0])} in metadata")
    ext_ids = np.unique(np.concatenate([edges.ravel(), meta_ids]))
    dense_edges = np.searchsorted(ext_ids, edges).astype(np.int64)
    dense_metas = [DEFAULT_META] * len(ext_ids)
    if len(meta_ids):
        for pos, (_, meta) in zip(np.searchsorted(ext_ids, meta_ids).tolist(), metas):
            dense_metas[pos] = meta
    return dense_edges, dense_metas, ext_ids
