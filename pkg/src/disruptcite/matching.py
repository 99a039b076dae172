"""Control-group selection by venue, year, volume, issue and field equality."""

from __future__ import annotations

import logging
from collections import defaultdict
from dataclasses import dataclass
from typing import Iterable, Optional

from .graph import CitationGraph, Label

logger = logging.getLogger(__name__)

_FIELDS = (("require_same_venue", "venue_id"), ("require_same_year", "pub_year"),
           ("require_same_volume", "volume"), ("require_same_issue", "issue"),
           ("require_same_field", "field_code"))


@dataclass(frozen=True)
class MatchCriteria:
    require_same_venue: bool = True
    require_same_year: bool = True
    require_same_volume: bool = True
    require_same_issue: bool = True
    require_same_field: bool = True
    max_controls_per_target: Optional[int] = None
    unique_assignment: bool = False

    def __post_init__(self):
        if not any(getattr(self, flag) for flag, _ in _FIELDS):
            raise ValueError("at least one matching criterion must be set")
        if self.max_controls_per_target is not None and self.max_controls_per_target < 1:
            raise ValueError("max_controls_per_target must be positive")

    def attributes(self) -> tuple[str, ...]:
        return tuple(attr for flag, attr in _FIELDS if getattr(self, flag))


@dataclass
class MatchResult:
    controls: dict[int, list[int]]
    warnings: list[str]


def match_key(meta, attrs: tuple[str, ...]) -> Optional[tuple]:
    key = tuple(getattr(meta, a) for a in attrs)
    return None if any(v is None for v in key) else key


def match_controls(g: CitationGraph, targets: Iterable[int],
                   criteria: MatchCriteria = MatchCriteria()) -> MatchResult:
    """Find control candidates for each target paper (dense ids).

    Candidates share every flagged attribute with the target and are neither
    targets nor nobel-labelled.  Lists are ordered by external id, which
    also decides who survives ``max_controls_per_target``.  With
    ``unique_assignment`` a control is given to the first target (in
    ascending target order) that claims it.
    """
    targets = sorted(set(int(t) for t in targets))
    target_set = set(targets)
    attrs = criteria.attributes()
    wanted = {}
    warnings = []
    for t in targets:
        key = match_key(g.meta(t), attrs)
        if key is None:
            missing = [a for a in attrs if getattr(g.metas[t], a) is None]
            warnings.append(f"target {g.ext_id(t)} lacks {', '.join(missing)}")
        wanted[t] = key

    keys = {k for k in wanted.values() if k is not None}
    pool = defaultdict(list)
    # dense order is ascending external id, so pool lists come out sorted
    for p, meta in enumerate(g.metas):
        if p in target_set or meta.label is Label.NOBEL:
            continue
        key = match_key(meta, attrs)
        if key is not None and key in keys:
            pool[key].append(p)

    taken: set[int] = set()
    out: dict[int, list[int]] = {}
    for t in targets:
        key = wanted[t]
        cands = pool.get(key, []) if key is not None else []
        if criteria.unique_assignment:
            cands = [c for c in cands if c not in taken]
        if criteria.max_controls_per_target is not None:
            cands = cands[:criteria.max_controls_per_target]
        if criteria.unique_assignment:
            taken.update(cands)
        if key is not None and not cands:
            warnings.append(f"target {g.ext_id(t)} has no matching papers")
        out[t] = list(cands)
    for w in warnings:
        logger.info(w)
    return MatchResult(out, warnings)


def write_pairs(fh, g: CitationGraph, result: MatchResult) -> int:
    n = 0
    for t in sorted(result.controls):
        for c in result.controls[t]:
            fh.write(f"{g.ext_id(t)}\t{g.ext_id(c)}\n")
            n += 1
    return n
