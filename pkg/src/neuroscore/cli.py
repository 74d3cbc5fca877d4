"""``neuroscore`` command line: score, evaluate, synth, validate.

Exit status:
  0  success
  1  I/O failure (unreadable input, unwritable output)
  2  usage error
  3  parse error in an input file
  4  configuration error (lexicons, norm table, recipe, z-model)
  5  contract or structural violation (e.g. empty cohort, overlapping spans)
"""

from __future__ import annotations

import argparse
import csv
import io
import json
import sys
from pathlib import Path

from .errors import (ConfigError, ContractError, NeuroscoreError, NotPresentError, ParseError,
                     StructuralError, UndefinedCorrelationError)
from .evaluation import (DEFAULT_THRESHOLD_PCT, dump_accuracies, evaluate_batch,
                         load_expert_scores)
from .matching import RankPolicy
from .pipeline import load_resources, report_rows, score_session
from .synth import NoiseModel, ProfileSpec, generate_cohort, load_manifest, write_corpus
from .transcript import parse_session

EXIT_OK = 0
EXIT_IO = 1
EXIT_USAGE = 2
EXIT_PARSE = 3
EXIT_CONFIG = 4
EXIT_CONTRACT = 5


def _exit_code(exc: BaseException) -> int:
    if isinstance(exc, ParseError):
        return EXIT_PARSE
    if isinstance(exc, ConfigError):
        return EXIT_CONFIG
    if isinstance(exc, (ContractError, StructuralError, NotPresentError, UndefinedCorrelationError)):
        return EXIT_CONTRACT
    return EXIT_IO


def _positive_int(text: str) -> int:
    value = int(text)
    if value < 1:
        raise argparse.ArgumentTypeError("must be >= 1")
    return value


def _probability(text: str) -> float:
    value = float(text)
    if not 0 <= value <= 1:
        raise argparse.ArgumentTypeError("must be within [0, 1]")
    return value


def _config_parent() -> argparse.ArgumentParser:
    p = argparse.ArgumentParser(add_help=False)
    g = p.add_argument_group("configuration")
    g.add_argument("--lexicons", metavar="DIR", help="lexicon directory (default: shipped lexicons)")
    g.add_argument("--norm-table", metavar="FILE", help="SKT norm table JSON")
    g.add_argument("--mmse-items", metavar="FILE", help="MMSE item inventory TSV")
    g.add_argument("--recipe", metavar="FILE", help="CERAD total recipe TSV")
    g.add_argument("--z-model", metavar="FILE", help="regression z-model CSV")
    g.add_argument("--alternatives", metavar="N", type=_positive_int, default=5,
                   help="ranks consulted when alternatives are used (default 5)")
    g.add_argument("--speaker", choices=("patient", "all"), default="patient")
    g.add_argument("--format", choices=("csv", "jsonl", "table"), default="table")
    return p


def _resources(args):
    return load_resources(args.lexicons, args.norm_table, args.mmse_items, args.recipe, args.z_model)


def _speaker(args):
    return None if args.speaker == "all" else "patient"


def _emit(text: str, out: str | None) -> None:
    if out:
        Path(out).write_text(text, encoding="utf-8")
    else:
        sys.stdout.write(text)


def _render_rows(rows: list[dict], fmt: str) -> str:
    if fmt == "jsonl":
        return "".join(json.dumps(r, ensure_ascii=False, sort_keys=True) + "\n" for r in rows)
    if fmt == "csv":
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["subject_id", "item", "value", "norm", "status", "detail"])
        for r in rows:
            w.writerow([r["subject_id"], r["item"], "" if r["value"] is None else r["value"],
                        "" if r["norm"] is None else r["norm"], r["status"],
                        json.dumps(r["detail"], ensure_ascii=False, sort_keys=True)])
        return buf.getvalue()
    lines = []
    for r in rows:
        value = "-" if r["value"] is None else f"{r['value']:g}"
        norm = "" if r["norm"] is None else f"norm {r['norm']}"
        note = r["detail"].get("reason", "") if r["status"] == "unscored" else ""
        lines.append(f"{r['subject_id']:<10} {r['item']:<14} {value:>8}  {norm:<7} {r['status']:<9}{note}".rstrip())
    return "\n".join(lines) + "\n"


def cmd_score(args) -> int:
    res = _resources(args)
    policy = RankPolicy(args.alternatives > 1, args.alternatives)
    external = {}
    if args.skt4 is not None:
        external["SKT4"] = args.skt4
    if args.skt5 is not None:
        external["SKT5"] = args.skt5
    rows = []
    for path in args.sessions:
        session = parse_session(path, max_alternatives=max(args.alternatives, 1))
        report = score_session(session, res, policy, _speaker(args),
                               external_skt_norms=external or None,
                               report_complement=args.complement)
        rows.extend(report_rows(report))
    _emit(_render_rows(rows, args.format), args.out)
    return EXIT_OK


def cmd_evaluate(args) -> int:
    res = _resources(args)
    members, _ = load_manifest(args.manifest, args.alternatives)
    expert = load_expert_scores(args.expert_scores)
    threshold = None if args.no_filter else args.threshold
    result = evaluate_batch(members, expert, res, args.alternatives, threshold, _speaker(args))
    table_csv = result.table.to_csv()
    table_txt = result.table.to_text()
    if args.out:
        out = Path(args.out)
        out.mkdir(parents=True, exist_ok=True)
        (out / "correlations.csv").write_text(table_csv, encoding="utf-8")
        (out / "correlations.txt").write_text(table_txt, encoding="utf-8")
        (out / "accuracies.csv").write_text(dump_accuracies(result.accuracies), encoding="utf-8")
    if not args.out or args.format != "table":
        sys.stdout.write(table_csv if args.format == "csv" else table_txt)
    return EXIT_OK


def cmd_synth(args) -> int:
    res = _resources(args)
    spec = ProfileSpec()
    if args.profile_spec:
        try:
            doc = json.loads(Path(args.profile_spec).read_text(encoding="utf-8"))
        except json.JSONDecodeError as exc:
            raise ParseError(f"invalid JSON ({exc.msg})", args.profile_spec, exc.lineno) from None
        spec = ProfileSpec.from_dict(doc)
    noise = None
    if args.substitution or args.deletion:
        noise = NoiseModel(args.substitution, args.deletion, args.recovery, args.alternatives, args.seed)
    subjects = generate_cohort(args.count, args.seed, res.lexicons, spec, noise,
                               args.noisy_fraction, args.noisy_factor, res.mmse_items)
    manifest = write_corpus(args.out, subjects, res, args.seed, spec, noise)
    print(f"wrote {len(subjects)} session(s) to {manifest}")
    return EXIT_OK


def cmd_validate(args) -> int:
    res = _resources(args)
    lex = res.lexicons
    lines = [
        f"lexicons: {lex.source}",
        f"  skt forms: {', '.join(sorted(lex.skt_objects))}",
        f"  bnt items: {len(lex.bnt)}, word list: {len(lex.cerad_wordlist)}, "
        f"distractors: {len(lex.cerad_distractors)}",
        f"  animals: {len(lex.animals.members)}, lemmas: {len(lex.lemma_table)}, "
        f"stoplist: {len(lex.stoplist)}",
        f"norm table: {res.norm_table.provenance}, {len(res.norm_table.cells)} cells",
        f"mmse items: {len(res.mmse_items)} ({sum(i.points for i in res.mmse_items if i.scorable)} "
        f"scorable points)",
        f"recipe: {res.recipe.source or 'default'}, full max {res.recipe.full_max:g}",
    ]
    for path in args.sessions:
        s = parse_session(path, max_alternatives=args.alternatives)
        lex.skt_targets(s.metadata.skt_form)
        lines.append(f"session {path}: {s.subject_id}, {len(s.tokens)} tokens, {len(s.spans)} spans")
    print("\n".join(lines))
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="neuroscore",
        description="Score SKT and CERAD-NB speech subtests from time-aligned transcripts.",
        epilog="exit status: 0 ok, 1 I/O, 2 usage, 3 parse, 4 config, 5 contract",
        formatter_class=argparse.RawDescriptionHelpFormatter,
    )
    sub = parser.add_subparsers(dest="command", required=True)
    parent = _config_parent()

    p = sub.add_parser("score", parents=[parent], help="score one or more session files")
    p.add_argument("sessions", nargs="+", metavar="SESSION")
    p.add_argument("--out", metavar="FILE", help="write the report here instead of stdout")
    p.add_argument("--skt4", type=int, metavar="NORM", help="externally scored SKT4 norm value")
    p.add_argument("--skt5", type=int, metavar="NORM", help="externally scored SKT5 norm value")
    p.add_argument("--complement", action="store_true", help="also report 100 - D for CERAD7")
    p.set_defaults(func=cmd_score)

    p = sub.add_parser("evaluate", parents=[parent], help="correlate automatic with expert scores")
    p.add_argument("manifest", metavar="MANIFEST")
    p.add_argument("expert_scores", metavar="EXPERT_CSV")
    p.add_argument("--threshold", metavar="PCT", type=float, default=DEFAULT_THRESHOLD_PCT,
                   help="keep subjects whose 1-best accuracy is above PCT (default 20)")
    p.add_argument("--no-filter", action="store_true", help="omit the filtered column")
    p.add_argument("--out", metavar="DIR", help="write correlations.csv/.txt and accuracies.csv")
    p.set_defaults(func=cmd_evaluate)

    p = sub.add_parser("synth", parents=[parent], help="generate a synthetic corpus")
    p.add_argument("--count", type=int, default=30)
    p.add_argument("--out", metavar="DIR", required=True)
    p.add_argument("--seed", type=int, default=0, help="master seed")
    p.add_argument("--profile-spec", metavar="JSON", help="profile spec overrides")
    p.add_argument("--substitution", type=_probability, default=0.0)
    p.add_argument("--deletion", type=_probability, default=0.0)
    p.add_argument("--recovery", type=_probability, default=0.0)
    p.add_argument("--noisy-fraction", type=_probability, default=0.0)
    p.add_argument("--noisy-factor", type=float, default=2.0)
    p.set_defaults(func=cmd_synth)

    p = sub.add_parser("validate", parents=[parent], help="check configuration and session files")
    p.add_argument("sessions", nargs="*", metavar="SESSION")
    p.set_defaults(func=cmd_validate)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if getattr(args, "count", 0) < 0:
        parser.error("--count must be >= 0")
    try:
        return args.func(args)
    except (NeuroscoreError, OSError) as exc:
        print(f"neuroscore: error: {exc}", file=sys.stderr)
        return _exit_code(exc)


if __name__ == "__main__":
    sys.exit(main())
