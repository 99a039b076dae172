"""``disruptcite`` command-line entry point.

Exit codes: 0 success, 1 verification failure, 2 missing input,
3 empty selection, 4 schema or configuration error.
"""

from __future__ import annotations

import argparse
import json
import logging
import sys
import warnings
from pathlib import Path

from . import __version__
from .pipeline import (EXIT_OK, RunConfig, StageError, cmd_eval, cmd_ingest,
                       cmd_ling, cmd_match, cmd_metrics, read_config_file)

logger = logging.getLogger("disruptcite")


def _global_flags(sup: bool) -> argparse.ArgumentParser:
    # sup=True lets the same flags appear after the subcommand without
    # clobbering values given before it
    d = argparse.SUPPRESS if sup else None
    p = argparse.ArgumentParser(add_help=False)
    p.add_argument("--config", type=Path, default=d, help="key=value settings file")
    p.add_argument("--threads", type=int, default=d)
    p.add_argument("--seed", type=int, default=d)
    p.add_argument("--denominator", choices=("partition", "literal"), default=d)
    p.add_argument("--quantile", type=float, default=d)
    p.add_argument("--output", "-o", type=Path, default=d, help="output directory")
    p.add_argument("--field", dest="field_filter", default=d,
                   help="restrict to one field code")
    p.add_argument("-v", "--verbose", action="store_true", default=d)
    return p


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="disruptcite", parents=[_global_flags(False)],
        description="Disruptive-citation metrics and validation reports.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)
    common = _global_flags(True)

    p = sub.add_parser("ingest", parents=[common], help="parse inputs into a graph bundle")
    p.add_argument("--edges", type=Path, default=argparse.SUPPRESS)
    p.add_argument("--papers", type=Path, default=argparse.SUPPRESS)
    p.add_argument("--format", dest="edge_format", choices=("tsv", "csv"),
                   default=argparse.SUPPRESS)
    p.add_argument("--strict", dest="strict_edges", action="store_true",
                   default=argparse.SUPPRESS, help="abort on the first malformed edge line")

    p = sub.add_parser("metrics", parents=[common], help="write the metric table")
    p.add_argument("--all", dest="sample_all", action="store_true",
                   default=argparse.SUPPRESS, help="every paper with metadata")
    p.add_argument("--pooled", dest="within_field", action="store_false",
                   default=argparse.SUPPRESS,
                   help="percentiles over the whole sample instead of per field")
    p.add_argument("--verify", action="store_true",
                   help="cross-check every sample row against the oracle")

    p = sub.add_parser("match", parents=[common], help="select control papers")
    p.add_argument("--match-on", dest="match_fields", default=argparse.SUPPRESS,
                   help="comma list from venue,year,volume,issue,field")
    p.add_argument("--max-controls", type=int, default=argparse.SUPPRESS)
    p.add_argument("--unique", dest="unique_controls", action="store_true",
                   default=argparse.SUPPRESS)
    p.add_argument("--apply", dest="apply_controls", action="store_true",
                   default=argparse.SUPPRESS, help="label matches as control in the bundle")

    p = sub.add_parser("eval", parents=[common], help="validity report and top-k table")
    p.add_argument("--replicates", type=int, default=argparse.SUPPRESS)
    p.add_argument("--top-k", dest="top_k", type=int, default=argparse.SUPPRESS)
    p.add_argument("--max-bucket", dest="max_bucket", type=int, default=argparse.SUPPRESS)

    p = sub.add_parser("ling", parents=[common], help="linguistic high/low comparison")
    p.add_argument("--lexicon", type=Path, default=argparse.SUPPRESS,
                   help="directory with verbs.txt, nouns.txt, stopwords.txt")
    p.add_argument("--by", choices=("dc", "cd_index"), default=None)

    p = sub.add_parser("verify", parents=[common], help="oracle comparison report")
    p.add_argument("--graphs", type=int, default=100,
                   help="random graphs to check in addition to the bundle")
    p.add_argument("--max-nodes", type=int, default=200)

    p = sub.add_parser("synth", parents=[common], help="write a synthetic corpus")
    p.add_argument("-n", "--papers-count", dest="n_papers", type=int, default=1000)
    grp = p.add_mutually_exclusive_group()
    grp.add_argument("--density", type=float, default=None)
    grp.add_argument("--mean-refs", type=float, default=None)
    p.add_argument("--age-skew", type=float, default=1.0)
    p.add_argument("--nobel-fraction", type=float, default=0.01)
    p.add_argument("--control-fraction", type=float, default=0.05)
    p.add_argument("--nobel-extra-citers", type=int, default=0)
    p.add_argument("--no-titles", action="store_true")
    return parser


_CONFIG_KEYS = {f for f in RunConfig.__dataclass_fields__}


def make_config(args: argparse.Namespace) -> RunConfig:
    values = {}
    if getattr(args, "config", None):
        values.update(read_config_file(args.config))
    for key, val in vars(args).items():
        if key in _CONFIG_KEYS and val is not None:
            if key == "match_fields" and isinstance(val, str):
                val = tuple(v.strip() for v in val.split(",") if v.strip())
            values[key] = val
    return RunConfig(**values)


def _cmd_verify(config: RunConfig, args) -> int:
    from .bundle import load_bundle
    from .verify import verify_graph, verify_synthetic

    report = {"run": config.run_header()}
    ok = True
    if (config.bundle_dir / "manifest.json").exists():
        report["bundle"] = verify_graph(load_bundle(config.bundle_dir))
        ok &= report["bundle"]["passed"] is not False
    if args.graphs:
        report["synthetic"] = verify_synthetic(args.graphs, config.seed, args.max_nodes)
        ok &= report["synthetic"]["passed"]
    report["passed"] = ok
    path = Path(config.output) / "verify.json"
    path.write_text(json.dumps(report, indent=2) + "\n")
    for section in ("bundle", "synthetic"):
        if section in report:
            status = report[section]["passed"]
            word = "SKIP" if status is None else "PASS" if status else "FAIL"
            print(f"{word} oracle comparison ({section})")
    return 0 if ok else 1


def _cmd_synth(config: RunConfig, args) -> int:
    from .testkit import SynthParams, synth_graph, write_synth

    density, mean_refs = args.density, args.mean_refs
    if density is None and mean_refs is None:
        density = 0.01
    try:
        params = SynthParams(n_papers=args.n_papers, seed=config.seed, density=density,
                             mean_refs=mean_refs, age_skew=args.age_skew,
                             nobel_fraction=args.nobel_fraction,
                             control_fraction=args.control_fraction,
                             nobel_extra_citers=args.nobel_extra_citers,
                             with_titles=not args.no_titles)
    except ValueError as exc:
        raise StageError(4, str(exc)) from None
    edges, metas = synth_graph(params)
    edge_path, paper_path = write_synth(config.output, edges, metas)
    print(f"wrote {len(edges)} edges to {edge_path} and {len(metas)} papers to {paper_path}")
    return 0


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.INFO if getattr(args, "verbose", False)
                        else logging.WARNING, format="%(levelname)s: %(message)s")
    warnings.filterwarnings("ignore", message=".*TBB.*")
    try:
        config = make_config(args)
        Path(config.output).mkdir(parents=True, exist_ok=True)
        cmd = args.command
        if cmd == "ingest":
            report = cmd_ingest(config)
            st = report["edges"]
            print(f"ingested {st['edges_kept']} edges, {report['papers']['total_nodes']} "
                  f"papers ({st['parse_failures']} malformed lines, "
                  f"{st['duplicates_dropped']} duplicates, "
                  f"{st['self_loops_dropped']} self-loops dropped)")
        elif cmd == "metrics":
            report = cmd_metrics(config, verify=args.verify)
            print(f"wrote {report['rows']} rows to {config.metrics_path}")
            if args.verify and report["verify"]["passed"] is False:
                return 1
        elif cmd == "match":
            report = cmd_match(config)
            print(f"wrote {report['pairs']} control pairs for {report['targets']} targets")
            if report["warnings"]:
                print(f"{len(report['warnings'])} targets with warnings, listed in "
                      f"{Path(config.output) / 'match.json'}", file=sys.stderr)
        elif cmd == "eval":
            cmd_eval(config)
            print(f"wrote {Path(config.output) / 'eval.json'}")
        elif cmd == "ling":
            reports = cmd_ling(config, by=args.by)
            for key in reports:
                print(f"wrote {Path(config.output) / f'ling_{key}.json'}")
        elif cmd == "verify":
            return _cmd_verify(config, args)
        elif cmd == "synth":
            return _cmd_synth(config, args)
    except StageError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return exc.code
    return EXIT_OK


if __name__ == "__main__":
    sys.exit(main())
