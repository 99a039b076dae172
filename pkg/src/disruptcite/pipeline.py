"""File-to-file pipeline stages behind the command-line interface.

Every stage reads its inputs from paths in :class:`RunConfig`, writes into
``config.output``, and raises :class:`StageError` with a stable exit code
on failure.  Reports carry a ``run`` header (tool version, config hash,
seed, denominator) and no timestamps, so reruns are byte-identical.
"""

from __future__ import annotations

import configparser
import dataclasses
import hashlib
import json
import logging
import math
import re
from dataclasses import dataclass, field
from pathlib import Path
from typing import Optional

import numpy as np

from . import __version__
from .bundle import load_bundle, save_bundle
from .evalstats import (RankedSample, average_ranking, bucket_counts,
                        classification_curve, group_split, identification_proportion,
                        kendall_tau, mann_whitney_u, team_size_profile)
from .graph import CitationGraph, Label, PaperMeta
from .ingest import ParseError, parse_edges, parse_papers, remap
from .lingstats import LexiconError, compare_groups_linguistic, load_lexicon
from .matching import MatchCriteria, match_controls, write_pairs
from .metrics import (METRIC_NAMES, DenominatorMode, SchemaError,
                      compute_metric_columns, read_metric_table, write_metric_columns)

logger = logging.getLogger(__name__)

EXIT_OK = 0
EXIT_MISSING_INPUT = 2
EXIT_EMPTY_SELECTION = 3
EXIT_SCHEMA = 4

TOPK_COLUMNS = ("Title", "Year", "Journal", "Ref", "Cit", "DC", "CD-index", "Type")


class StageError(Exception):
    def __init__(self, code: int, message: str):
        super().__init__(message)
        self.code = code


@dataclass
class RunConfig:
    output: Path = Path("out")
    edges: Optional[Path] = None
    papers: Optional[Path] = None
    lexicon: Optional[Path] = None
    edge_format: str = "tsv"
    strict_edges: bool = False
    denominator: str = "partition"
    quantile: float = 0.5
    replicates: int = 1000
    seed: int = 0
    threads: int = 1
    field_filter: Optional[str] = None
    sample_all: bool = False
    within_field: bool = True
    top_k: int = 5
    max_bucket: int = 10
    split_by: tuple = ("dc", "cd_index")
    match_fields: tuple = ("venue", "year", "volume", "issue", "field")
    max_controls: Optional[int] = None
    unique_controls: bool = False
    apply_controls: bool = False

    # settings that change results; paths and thread count do not
    HASHED = ("edge_format", "strict_edges", "denominator", "quantile", "replicates",
              "seed", "field_filter", "sample_all", "within_field", "top_k",
              "max_bucket", "split_by", "match_fields", "max_controls",
              "unique_controls")

    def __post_init__(self):
        try:
            DenominatorMode(self.denominator)
        except ValueError:
            raise StageError(EXIT_SCHEMA, f"unknown denominator {self.denominator!r}") from None
        if not 0 < self.quantile < 1:
            raise StageError(EXIT_SCHEMA, "quantile must lie in (0, 1)")
        if self.replicates < 1 or self.threads < 1 or self.top_k < 1:
            raise StageError(EXIT_SCHEMA, "replicates, threads and top_k must be >= 1")

    @property
    def bundle_dir(self) -> Path:
        return Path(self.output) / "bundle"

    @property
    def metrics_path(self) -> Path:
        return Path(self.output) / "metrics.tsv"

    def config_hash(self) -> str:
        payload = {k: getattr(self, k) for k in self.HASHED}
        blob = json.dumps(payload, sort_keys=True, default=list).encode()
        return hashlib.sha256(blob).hexdigest()[:16]

    def run_header(self) -> dict:
        return {"tool": "disruptcite", "version": __version__,
                "config_hash": self.config_hash(), "seed": self.seed,
                "denominator": self.denominator}


_BOOL = {"1": True, "true": True, "yes": True, "on": True,
         "0": False, "false": False, "no": False, "off": False}


def read_config_file(path: Path | str) -> dict:
    """Read ``key = value`` settings from an INI/TOML-like file.

    All sections are merged; keys are RunConfig field names.
    """
    path = Path(path)
    if not path.exists():
        raise StageError(EXIT_MISSING_INPUT, f"config file not found: {path}")
    parser = configparser.ConfigParser()
    text = path.read_text(encoding="utf-8")
    if not text.lstrip().startswith("["):
        text = "[run]\n" + text
    try:
        parser.read_string(text)
    except configparser.Error as exc:
        raise StageError(EXIT_SCHEMA, f"{path}: {exc}") from None
    fields = {f.name: f for f in dataclasses.fields(RunConfig)}
    out = {}
    for section in parser.sections():
        for key, raw in parser.items(section):
            key = key.replace("-", "_")
            if key not in fields:
                raise StageError(EXIT_SCHEMA, f"{path}: unknown setting {key!r}")
            value = raw.strip().strip('"').strip("'")
            default = fields[key].default
            if isinstance(default, bool):
                if value.lower() not in _BOOL:
                    raise StageError(EXIT_SCHEMA, f"{path}: {key} expects a boolean")
                out[key] = _BOOL[value.lower()]
            elif isinstance(default, int):
                out[key] = int(value)
            elif isinstance(default, float):
                out[key] = float(value)
            elif isinstance(default, tuple):
                out[key] = tuple(v.strip() for v in value.split(",") if v.strip())
            elif key == "max_controls":
                out[key] = int(value) if value else None
            elif key in ("output", "edges", "papers", "lexicon"):
                out[key] = Path(value) if value else None
            else:
                out[key] = value or None
    return out


def _write_json(path: Path, payload: dict) -> None:
    path.write_text(json.dumps(payload, indent=2, ensure_ascii=False) + "\n",
                    encoding="utf-8")


def _require(path: Optional[Path], what: str) -> Path:
    if path is None:
        raise StageError(EXIT_MISSING_INPUT, f"no {what} given")
    path = Path(path)
    if not path.exists():
        raise StageError(EXIT_MISSING_INPUT, f"{what} not found: {path}")
    return path


def _load_graph(config: RunConfig) -> CitationGraph:
    if not (config.bundle_dir / "manifest.json").exists():
        raise StageError(EXIT_MISSING_INPUT,
                         f"graph bundle not found: {config.bundle_dir} (run ingest first)")
    return load_bundle(config.bundle_dir)


# ---------------------------------------------------------------------------
# ingest

def cmd_ingest(config: RunConfig) -> dict:
    edges_path = _require(config.edges, "edges file")
    papers_path = _require(config.papers, "papers file") if config.papers else None
    try:
        with open(edges_path, "rb") as fh:
            edges, stats = parse_edges(fh, config.edge_format, strict=config.strict_edges)
    except ParseError as exc:
        exc.path = str(edges_path)
        raise StageError(EXIT_SCHEMA, str(exc)) from None
    metas: list[tuple[int, PaperMeta]] = []
    if papers_path is not None:
        try:
            with open(papers_path, "rb") as fh:
                metas = parse_papers(fh)
        except ParseError as exc:
            exc.path = str(papers_path)
            raise StageError(EXIT_SCHEMA, str(exc)) from None
    try:
        dense, dense_metas, ext_ids = remap(edges, metas)
    except ValueError as exc:
        raise StageError(EXIT_SCHEMA, f"{papers_path}: {exc}") from None
    g = CitationGraph.from_dense(ext_ids, dense[:, 0], dense[:, 1], dense_metas)
    save_bundle(g, config.bundle_dir)
    labels = {lab.value: 0 for lab in Label}
    for _, m in metas:
        labels[m.label.value] += 1
    report = {"run": config.run_header(), "edges": stats.to_dict(),
              "papers": {"with_metadata": len(metas), "total_nodes": g.n,
                         "labels": labels}}
    _write_json(Path(config.output) / "ingest_stats.json", report)
    return report


# ---------------------------------------------------------------------------
# metrics

def select_sample(g: CitationGraph, config: RunConfig) -> np.ndarray:
    keep = []
    for p, meta in enumerate(g.metas):
        if not config.sample_all and meta.label is Label.OTHER:
            continue
        if config.sample_all and meta.pub_year is None:
            continue  # edge-only papers stay out of sample-level analyses
        if config.field_filter is not None and meta.field_code != config.field_filter:
            continue
        keep.append(p)
    return np.asarray(keep, dtype=np.int64)


def cmd_metrics(config: RunConfig, verify: bool = False) -> dict:
    g = _load_graph(config)
    sample = select_sample(g, config)
    if len(sample) == 0:
        raise StageError(EXIT_EMPTY_SELECTION, "no sample papers")
    cols = compute_metric_columns(g, sample, DenominatorMode(config.denominator),
                                  within_field=config.within_field, threads=config.threads)
    with open(config.metrics_path, "w", encoding="utf-8", newline="\n") as fh:
        n = write_metric_columns(fh, g, cols)
    report = {"run": config.run_header(), "rows": n,
              "percentiles": "within field" if config.within_field else "pooled"}
    if verify:
        from .verify import verify_graph
        report["verify"] = verify_graph(g, sample, config.denominator)
    _write_json(Path(config.output) / "metrics.json", report)
    return report


# ---------------------------------------------------------------------------
# match

_MATCH_FLAGS = {"venue": "require_same_venue", "year": "require_same_year",
                "volume": "require_same_volume", "issue": "require_same_issue",
                "field": "require_same_field"}


def criteria_from(config: RunConfig) -> MatchCriteria:
    unknown = set(config.match_fields) - set(_MATCH_FLAGS)
    if unknown:
        raise StageError(EXIT_SCHEMA, f"unknown match fields: {', '.join(sorted(unknown))}")
    flags = {flag: name in config.match_fields for name, flag in _MATCH_FLAGS.items()}
    try:
        return MatchCriteria(**flags, max_controls_per_target=config.max_controls,
                             unique_assignment=config.unique_controls)
    except ValueError as exc:
        raise StageError(EXIT_SCHEMA, str(exc)) from None


def cmd_match(config: RunConfig) -> dict:
    g = _load_graph(config)
    criteria = criteria_from(config)
    targets = [p for p, m in enumerate(g.metas) if m.label is Label.NOBEL]
    result = match_controls(g, targets, criteria)
    with open(Path(config.output) / "controls.tsv", "w", encoding="utf-8",
              newline="\n") as fh:
        pairs = write_pairs(fh, g, result)
    if config.apply_controls:
        chosen = {c for cs in result.controls.values() for c in cs}
        metas = [dataclasses.replace(m, label=Label.CONTROL) if p in chosen else m
                 for p, m in enumerate(g.metas)]
        save_bundle(CitationGraph(g.ext_ids, g.ref_indptr, g.ref_indices, g.cit_indptr,
                                  g.cit_indices, metas), config.bundle_dir)
    report = {"run": config.run_header(), "targets": len(targets), "pairs": pairs,
              "warnings": result.warnings}
    _write_json(Path(config.output) / "match.json", report)
    return report


# ---------------------------------------------------------------------------
# eval

def _load_rows(config: RunConfig):
    path = config.metrics_path
    if not path.exists():
        raise StageError(EXIT_MISSING_INPUT, f"metric table not found: {path}")
    try:
        with open(path, encoding="utf-8") as fh:
            return read_metric_table(fh)
    except SchemaError as exc:
        raise StageError(EXIT_SCHEMA, f"{path}: {exc}") from None


def _score(v: Optional[float]) -> float:
    # undefined indices rank below every defined value
    return -math.inf if v is None else float(v)


def _field_key(code: Optional[str]) -> str:
    return code if code is not None else "unknown"


def evaluate_rows(rows, config: RunConfig) -> dict:
    """Validity battery for one set of metric rows (one field or pooled)."""
    sample = [r for r in rows if r.label in (Label.NOBEL, Label.CONTROL)]
    nobel = [r for r in sample if r.label is Label.NOBEL]
    control = [r for r in sample if r.label is Label.CONTROL]
    out = {"n_sample": len(sample), "n_nobel": len(nobel), "n_control": len(control),
           "metrics": {}}
    for attr, name in METRIC_NAMES.items():
        entry: dict = {}
        if nobel and sample:
            rs = RankedSample([_score(getattr(r, attr)) for r in sample],
                              [r.label is Label.NOBEL for r in sample])
            curve, ip_avg = identification_proportion(rs)
            prec, rec, f1 = classification_curve(rs)
            entry.update(ar=average_ranking(rs), ip_average=ip_avg,
                         avg_precision=prec, avg_recall=rec, avg_f1=f1, ip_curve=curve)
        a = [getattr(r, attr) for r in nobel if getattr(r, attr) is not None]
        b = [getattr(r, attr) for r in control if getattr(r, attr) is not None]
        entry["nobel_mean"] = sum(a) / len(a) if a else None
        entry["control_mean"] = sum(b) / len(b) if b else None
        entry["mann_whitney"] = mann_whitney_u(a, b).to_dict() if a and b else None
        out["metrics"][name] = entry

    taus = {}
    for group, members in (("all", sample), ("nobel", nobel), ("control", control)):
        names = list(METRIC_NAMES.values())
        attrs = list(METRIC_NAMES)
        matrix = []
        for ai in attrs:
            line = []
            for aj in attrs:
                pairs = [(getattr(r, ai), getattr(r, aj)) for r in members
                         if getattr(r, ai) is not None and getattr(r, aj) is not None]
                try:
                    line.append(kendall_tau([p[0] for p in pairs], [p[1] for p in pairs]))
                except ValueError:
                    line.append(None)
            matrix.append(line)
        taus[group] = {"metrics": names, "matrix": matrix}
    out["kendall_tau"] = taus

    team = {}
    for attr in ("dc", "cd_index"):
        name = METRIC_NAMES[attr]
        profile = team_size_profile(rows, attr, config.max_bucket, config.replicates,
                                    seed=config.seed)
        entry = {"buckets": {k: (v.to_dict() if v else None) for k, v in profile.items()},
                 "counts": bucket_counts(rows, config.max_bucket)}
        try:
            high, low, undefined = group_split(rows, attr, config.quantile)
        except ValueError:
            entry["split"] = None
        else:
            ht = [r.team_size for r in high if r.team_size is not None]
            lt = [r.team_size for r in low if r.team_size is not None]
            entry["split"] = {
                "quantile": config.quantile, "n_high": len(high), "n_low": len(low),
                "n_undefined": undefined,
                "high_mean_team_size": sum(ht) / len(ht) if ht else None,
                "low_mean_team_size": sum(lt) / len(lt) if lt else None,
                "mann_whitney": mann_whitney_u(ht, lt).to_dict() if ht and lt else None,
            }
        team[name] = entry
    out["team_size"] = team
    return out


def _fmt_cd(v: Optional[float]) -> str:
    return "" if v is None else f"{v:.2f}"


def topk_table(rows, metas_by_ext: dict, k: int) -> list[tuple]:
    ranked = sorted(rows, key=lambda r: (-r.dc, r.ext_id))[:k]
    out = []
    for r in ranked:
        meta = metas_by_ext.get(r.ext_id)
        title = meta.title if meta and meta.title else ""
        journal = meta.venue_id if meta and meta.venue_id else ""
        out.append((title, "" if r.pub_year is None else str(r.pub_year), journal,
                    str(r.reference_count), str(r.c), str(r.dc), _fmt_cd(r.cd_index),
                    r.label.value.capitalize()))
    return out


def _write_topk(path: Path, table: list[tuple]) -> None:
    with open(path, "w", encoding="utf-8", newline="\n") as fh:
        fh.write("\t".join(TOPK_COLUMNS) + "\n")
        for line in table:
            fh.write("\t".join(c.replace("\t", " ") for c in line) + "\n")


def _safe_name(code: str) -> str:
    return re.sub(r"[^A-Za-z0-9._-]+", "_", code)


def cmd_eval(config: RunConfig) -> dict:
    rows = _load_rows(config)
    if config.field_filter is not None:
        rows = [r for r in rows if r.field_code == config.field_filter]
    if not rows:
        raise StageError(EXIT_EMPTY_SELECTION, "metric table has no rows to evaluate")
    metas_by_ext: dict = {}
    if (config.bundle_dir / "manifest.json").exists():
        g = load_bundle(config.bundle_dir)
        wanted = {r.ext_id for r in rows}
        metas_by_ext = {int(e): m for e, m in zip(g.ext_ids.tolist(), g.metas) if e in wanted}

    by_field: dict[str, list] = {}
    for r in rows:
        by_field.setdefault(_field_key(r.field_code), []).append(r)

    report = {
        "run": config.run_header(),
        "notes": {
            "classification_k": "k = 1..N; k = 0 skipped because precision is undefined",
            "undefined_scores": "papers with an undefined index rank below all others",
            "split_quantile": config.quantile,
            "split_threshold_note": "high/low threshold is a configurable quantile "
                                    "(default median)",
            "bootstrap": {"replicates": config.replicates, "seed": config.seed,
                          "generator": "numpy PCG64"},
        },
        "fields": {},
    }
    for code in sorted(by_field):
        report["fields"][code] = evaluate_rows(by_field[code], config)
    if len(by_field) > 1:
        report["pooled"] = evaluate_rows(rows, config)

    out = Path(config.output)
    _write_json(out / "eval.json", report)
    sample = [r for r in rows if r.label in (Label.NOBEL, Label.CONTROL)] or rows
    _write_topk(out / "topk.tsv", topk_table(sample, metas_by_ext, config.top_k))
    topk_dir = out / "topk_by_field"
    topk_dir.mkdir(exist_ok=True)
    for code in sorted(by_field):
        members = [r for r in by_field[code] if r.label in (Label.NOBEL, Label.CONTROL)]
        _write_topk(topk_dir / f"{_safe_name(code)}.tsv",
                    topk_table(members or by_field[code], metas_by_ext, config.top_k))
    return report


# ---------------------------------------------------------------------------
# ling

def cmd_ling(config: RunConfig, by: Optional[str] = None) -> dict:
    rows = _load_rows(config)
    if config.field_filter is not None:
        rows = [r for r in rows if r.field_code == config.field_filter]
    g = _load_graph(config)
    try:
        lex = load_lexicon(config.lexicon)
    except LexiconError as exc:
        raise StageError(EXIT_SCHEMA, f"lexicon: {exc}") from None
    except FileNotFoundError as exc:
        raise StageError(EXIT_MISSING_INPUT, f"lexicon file not found: {exc}") from None
    metas_by_ext = dict(zip(g.ext_ids.tolist(), g.metas))

    keys = (by,) if by else tuple(config.split_by)
    reports = {}
    for key in keys:
        if key not in ("dc", "cd_index"):
            raise StageError(EXIT_SCHEMA, f"cannot split by {key!r}")
        by_field: dict[str, list] = {}
        for r in rows:
            by_field.setdefault(_field_key(r.field_code), []).append(r)
        high, low, undefined = [], [], 0
        for code in sorted(by_field):
            try:
                h, l, u = group_split(by_field[code], key, config.quantile)
            except ValueError:
                continue
            high += h
            low += l
            undefined += u
        if not high or not low:
            raise StageError(EXIT_EMPTY_SELECTION, f"split by {key} left an empty group")
        report = {"run": config.run_header(), "split_by": key,
                  "quantile": config.quantile, "split_within": "field",
                  "n_undefined": undefined}
        report.update(compare_groups_linguistic(
            [metas_by_ext[r.ext_id] for r in high],
            [metas_by_ext[r.ext_id] for r in low], lex))
        out = Path(config.output)
        _write_json(out / f"ling_{key}.json", report)
        with open(out / f"ling_{key}_freq.tsv", "w", encoding="utf-8", newline="\n") as fh:
            fh.write("group\tclass\ttoken\tcount\n")
            for group in ("high", "low"):
                for cls, lst in (("verb", "top_verbs"), ("noun", "top_nouns")):
                    for tok, cnt in report[group][lst]:
                        fh.write(f"{group}\t{cls}\t{tok}\t{cnt}\n")
        reports[key] = report
    return reports
