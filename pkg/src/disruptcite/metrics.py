"""Disruptive-citation partition and the disruption indices derived from it.

For a focal paper FP with citers C and references R, let RC be the distinct
papers (FP excluded) citing at least one member of R.  Citers in RC are
consolidating (CC), the rest are disruptive (DC = C - CC), and ``n_r``
counts RC members that do not cite FP.
"""

from __future__ import annotations

import enum
import math
from dataclasses import dataclass
from typing import Optional, Sequence

import numba
import numpy as np
from scipy.stats import rankdata

from ._kernel import partition_counts
from .graph import CitationGraph, Label
from .lingstats import title_length


class DenominatorMode(str, enum.Enum):
    PARTITION = "partition"
    LITERAL = "literal"


@dataclass(frozen=True)
class CitationPartition:
    c: int
    cc: int
    dc: int
    n_r: int
    rc_total: int

    def __post_init__(self):
        if min(self.c, self.cc, self.dc, self.n_r, self.rc_total) < 0:
            raise ValueError("partition counts must be non-negative")
        if self.dc + self.cc != self.c or self.rc_total != self.cc + self.n_r:
            raise ValueError(f"inconsistent partition {self}")


@dataclass
class MetricRow:
    paper: Optional[int]
    partition: CitationPartition
    reference_count: int
    cd_index: Optional[float]
    di_star: Optional[float]
    simple_di: Optional[float]
    cp: float
    cdp: float
    c_cd_p: float
    ext_id: Optional[int] = None
    label: Label = Label.OTHER
    field_code: Optional[str] = None
    pub_year: Optional[int] = None
    team_size: Optional[int] = None
    title_length: Optional[int] = None

    # flat accessors so rows can be keyed by column name
    @property
    def c(self) -> int:
        return self.partition.c

    @property
    def dc(self) -> int:
        return self.partition.dc

    @property
    def cc(self) -> int:
        return self.partition.cc

    @property
    def n_r(self) -> int:
        return self.partition.n_r


METRIC_COLUMNS = ("id", "c", "reference_count", "dc", "cc", "n_r", "cd_index",
                  "di_star", "simple_di", "cp", "cdp", "c_cd_p", "label",
                  "field_code", "pub_year", "team_size", "title_length")

# evaluated metrics, keyed by row attribute, with their display names
METRIC_NAMES = {
    "c": "C",
    "cd_index": "CD-index",
    "di_star": "DI*",
    "simple_di": "simple DI",
    "c_cd_p": "C-CD P",
    "dc": "DC",
}


def _denominator(p: CitationPartition, mode: DenominatorMode) -> int:
    third = p.rc_total if DenominatorMode(mode) is DenominatorMode.LITERAL else p.n_r
    return p.dc + p.cc + third


def cd_index(p: CitationPartition,
             mode: DenominatorMode = DenominatorMode.PARTITION) -> Optional[float]:
    den = _denominator(p, mode)
    return (p.dc - p.cc) / den if den else None


def di_star(p: CitationPartition,
            mode: DenominatorMode = DenominatorMode.PARTITION) -> Optional[float]:
    den = _denominator(p, mode)
    return p.dc / den if den else None


def simple_di(p: CitationPartition) -> Optional[float]:
    return p.dc / p.c if p.c else None


def _configure_threads(threads: int) -> int:
    threads = max(1, int(threads))
    numba.set_num_threads(min(threads, numba.config.NUMBA_NUM_THREADS))
    return threads


def partition_array(g: CitationGraph, focal: Sequence[int], threads: int = 1) -> np.ndarray:
    """Counts for many focal papers at once.

    Columns are ``c, cc, dc, n_r, rc_total, reference_count``.  The work is
    cut into ``threads`` fixed blocks writing to their own rows, so the
    result does not depend on scheduling.
    """
    focal = np.ascontiguousarray(focal, dtype=np.int64)
    if len(focal) and (focal.min() < 0 or focal.max() >= g.n):
        bad = focal[(focal < 0) | (focal >= g.n)][0]
        raise IndexError(f"paper index {bad} out of range for N={g.n}")
    blocks = _configure_threads(threads)
    return partition_counts(g.ref_indptr, g.ref_indices, g.cit_indptr,
                            g.cit_indices, focal, g.n, blocks)


def citation_partition(g: CitationGraph, fp: int) -> CitationPartition:
    row = partition_array(g, [fp])[0]
    return CitationPartition(c=int(row[0]), cc=int(row[1]), dc=int(row[2]),
                             n_r=int(row[3]), rc_total=int(row[4]))


def percentile_ranks(values: Sequence[Optional[float]]) -> list[float]:
    """Mid-rank percentiles among the present values.

    A value ``v`` maps to ``(#below + 0.5 * #equal) / #present``.  Absent
    (``None``) entries get 0.0.
    """
    present = [i for i, v in enumerate(values) if v is not None]
    if not present:
        raise ValueError("percentile_ranks needs at least one present value")
    out = [0.0] * len(values)
    ranks = rankdata([values[i] for i in present], method="average")
    n = len(present)
    for i, r in zip(present, ranks.tolist()):
        out[i] = (r - 0.5) / n
    return out


def _group_percentiles(values: np.ndarray, groups: np.ndarray) -> np.ndarray:
    """Mid-rank percentile of ``values`` (NaN = absent) within each group."""
    out = np.zeros(len(values))
    for gid in np.unique(groups):
        idx = np.flatnonzero((groups == gid) & ~np.isnan(values))
        if len(idx):
            out[idx] = (rankdata(values[idx], method="average") - 0.5) / len(idx)
    return out


@dataclass
class MetricColumns:
    """Columnar metric table; NaN marks an undefined index internally."""

    papers: np.ndarray
    counts: np.ndarray
    cd_index: np.ndarray
    di_star: np.ndarray
    simple_di: np.ndarray
    cp: np.ndarray
    cdp: np.ndarray
    c_cd_p: np.ndarray
    mode: DenominatorMode = DenominatorMode.PARTITION


def compute_metric_columns(g: CitationGraph, sample: Sequence[int],
                           mode: DenominatorMode = DenominatorMode.PARTITION,
                           within_field: bool = True, threads: int = 1) -> MetricColumns:
    papers = np.asarray(sample, dtype=np.int64)
    if len(papers) == 0:
        raise ValueError("sample is empty")
    if len(np.unique(papers)) != len(papers):
        s = np.sort(papers)
        dup = s[1:][s[1:] == s[:-1]][0]
        raise ValueError(f"duplicate paper {int(dup)} in sample")
    mode = DenominatorMode(mode)
    counts = partition_array(g, papers, threads)
    c, cc, dc, nr, rc = (counts[:, i].astype(np.float64) for i in range(5))
    third = rc if mode is DenominatorMode.LITERAL else nr
    den = dc + cc + third
    with np.errstate(divide="ignore", invalid="ignore"):
        cd = np.where(den > 0, (dc - cc) / den, np.nan)
        dis = np.where(den > 0, dc / den, np.nan)
        sdi = np.where(c > 0, dc / c, np.nan)

    if within_field:
        codes = [g.metas[p].field_code for p in papers.tolist()]
        _, groups = np.unique(np.array([x if x is not None else "\0" for x in codes],
                                       dtype=object), return_inverse=True)
    else:
        groups = np.zeros(len(papers), dtype=np.int64)
    cp = _group_percentiles(c, groups)
    cdp = _group_percentiles(cd, groups)
    return MetricColumns(papers=papers, counts=counts, cd_index=cd, di_star=dis,
                         simple_di=sdi, cp=cp, cdp=cdp, c_cd_p=cp + cdp, mode=mode)


def _opt(x: float) -> Optional[float]:
    return None if math.isnan(x) else x


def columns_to_rows(g: CitationGraph, cols: MetricColumns) -> list[MetricRow]:
    rows = []
    for k, p in enumerate(cols.papers.tolist()):
        cnt = cols.counts[k].tolist()
        meta = g.metas[p]
        rows.append(MetricRow(
            paper=p,
            partition=CitationPartition(c=cnt[0], cc=cnt[1], dc=cnt[2], n_r=cnt[3],
                                        rc_total=cnt[4]),
            reference_count=cnt[5],
            cd_index=_opt(float(cols.cd_index[k])),
            di_star=_opt(float(cols.di_star[k])),
            simple_di=_opt(float(cols.simple_di[k])),
            cp=float(cols.cp[k]),
            cdp=float(cols.cdp[k]),
            c_cd_p=float(cols.c_cd_p[k]),
            ext_id=int(g.ext_ids[p]),
            label=meta.label,
            field_code=meta.field_code,
            pub_year=meta.pub_year,
            team_size=meta.team_size,
            title_length=title_length(meta.title) if meta.title is not None else None,
        ))
    return rows


def compute_metric_table(g: CitationGraph, sample: Sequence[int],
                         mode: DenominatorMode = DenominatorMode.PARTITION,
                         within_field: bool = True, threads: int = 1) -> list[MetricRow]:
    """One :class:`MetricRow` per sample paper, in sample order.

    CP and CDP are mid-rank percentiles of citation count and CD-index
    computed within the sample (per field code when ``within_field``).
    Papers with an undefined CD-index get CDP 0, so their C-CD P equals CP.
    """
    cols = compute_metric_columns(g, sample, mode, within_field, threads)
    return columns_to_rows(g, cols)


def _fmt(v) -> str:
    if v is None:
        return ""
    if isinstance(v, float):
        if math.isnan(v):
            return ""
        return repr(v)
    if isinstance(v, Label):
        return v.value
    return str(v)


def write_metric_columns(fh, g: CitationGraph, cols: MetricColumns) -> int:
    """Stream the columnar table as TSV without materializing row objects."""
    fh.write("\t".join(METRIC_COLUMNS) + "\n")
    lines = []
    counts = cols.counts.tolist()
    cd, dis, sdi = cols.cd_index.tolist(), cols.di_star.tolist(), cols.simple_di.tolist()
    cp, cdp, ccdp = cols.cp.tolist(), cols.cdp.tolist(), cols.c_cd_p.tolist()
    ext = g.ext_ids[cols.papers].tolist()
    for k, p in enumerate(cols.papers.tolist()):
        meta = g.metas[p]
        cnt = counts[k]
        tl = title_length(meta.title) if meta.title is not None else None
        lines.append("\t".join((
            str(ext[k]), str(cnt[0]), str(cnt[5]), str(cnt[2]), str(cnt[1]), str(cnt[3]),
            _fmt(cd[k]), _fmt(dis[k]), _fmt(sdi[k]), _fmt(cp[k]), _fmt(cdp[k]),
            _fmt(ccdp[k]), meta.label.value, _fmt(meta.field_code),
            _fmt(meta.pub_year), _fmt(meta.team_size), _fmt(tl),
        )))
        if len(lines) >= 100_000:
            fh.write("\n".join(lines) + "\n")
            lines.clear()
    if lines:
        fh.write("\n".join(lines) + "\n")
    return len(counts)


def write_metric_table(fh, rows: Sequence[MetricRow]) -> None:
    fh.write("\t".join(METRIC_COLUMNS) + "\n")
    for r in rows:
        fh.write("\t".join((
            _fmt(r.ext_id), str(r.c), str(r.reference_count), str(r.dc), str(r.cc),
            str(r.n_r), _fmt(r.cd_index), _fmt(r.di_star), _fmt(r.simple_di),
            _fmt(r.cp), _fmt(r.cdp), _fmt(r.c_cd_p), r.label.value,
            _fmt(r.field_code), _fmt(r.pub_year), _fmt(r.team_size),
            _fmt(r.title_length),
        )) + "\n")


class SchemaError(ValueError):
    pass


def read_metric_table(fh) -> list[MetricRow]:
    """Load a metric table TSV; raises :class:`SchemaError` on missing columns."""
    header = fh.readline().rstrip("\r\n").split("\t")
    missing = [c for c in METRIC_COLUMNS if c not in header]
    if missing:
        raise SchemaError(f"metric table missing columns: {', '.join(missing)}")
    pos = {name: header.index(name) for name in METRIC_COLUMNS}

    def opt_float(s):
        return float(s) if s != "" else None

    def opt_int(s):
        return int(s) if s != "" else None

    rows = []
    for lineno, line in enumerate(fh, 2):
        line = line.rstrip("\r\n")
        if not line:
            continue
        f = line.split("\t")
        if len(f) != len(header):
            raise SchemaError(f"line {lineno}: expected {len(header)} fields, got {len(f)}")
        try:
            c, cc, dc, nr = (int(f[pos[k]]) for k in ("c", "cc", "dc", "n_r"))
            rows.append(MetricRow(
                paper=None,
                partition=CitationPartition(c=c, cc=cc, dc=dc, n_r=nr, rc_total=cc + nr),
                reference_count=int(f[pos["reference_count"]]),
                cd_index=opt_float(f[pos["cd_index"]]),
                di_star=opt_float(f[pos["di_star"]]),
                simple_di=opt_float(f[pos["simple_di"]]),
                cp=float(f[pos["cp"]]),
                cdp=float(f[pos["cdp"]]),
                c_cd_p=float(f[pos["c_cd_p"]]),
                ext_id=int(f[pos["id"]]),
                label=Label.parse(f[pos["label"]]),
                field_code=f[pos["field_code"]] or None,
                pub_year=opt_int(f[pos["pub_year"]]),
                team_size=opt_int(f[pos["team_size"]]),
                title_length=opt_int(f[pos["title_length"]]),
            ))
        except ValueError as exc:
            raise SchemaError(f"line {lineno}: {exc}") from None
    return rows
