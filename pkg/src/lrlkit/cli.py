"""Command-line interface for the whole workflow.

Subcommands: diagnose, align, build-dict, retrieve, prompt, eval, compare,
recommend, pipeline. A declarative config file (JSON or YAML) can supply
any setting; flags win over the file. Backend credentials may come from
the environment: LRLKIT_BACKEND_URL, LRLKIT_MODEL, LRLKIT_API_KEY.

Exit codes: 0 success, 1 evaluation flagged as non-comparable,
2 configuration error, 3 backend unreachable.
"""

from __future__ import annotations

import argparse
import dataclasses
import json
import os
import sys
from pathlib import Path

from . import __version__, aligner, retriever
from .backends import MockBackend  # noqa: F401  (re-exported for convenience)
from .corpus import load_dataset, load_pipes, make_parallel
from .errors import BackendError, DataError, LeakageError
from .harness import RetrievalConfig, run_eval, select_description_position
from .pipeline import (
    RunConfig,
    compare_runs,
    diagnose,
    ensure_dictionary,
    make_backend,
    make_prompt_spec,
    markdown_summary,
    read_records_jsonl,
    run_pipeline,
    write_json,
    write_records_jsonl,
)
from .recommender import Thresholds, recommend
from .tokmetrics import LanguageProfile

EXIT_OK = 0
EXIT_FLAGGED = 1
EXIT_CONFIG = 2
EXIT_BACKEND = 3


def _add_config_flags(parser: argparse.ArgumentParser) -> None:
    parser.add_argument("-c", "--config", help="config file (JSON or YAML); flags override it")
    parser.add_argument("--dataset", help="dataset file (JSONL or TSV)")
    parser.add_argument("--dataset-format", choices=["jsonl", "tsv"], dest="dataset_format")
    parser.add_argument("--task", choices=["classification", "multichoice"])
    parser.add_argument("--language-code", dest="language_code")
    parser.add_argument("--language-name", dest="language_name")
    parser.add_argument("--tokenizer", help="tokenizer definition JSON (path or URL)")
    parser.add_argument("--backend-url", dest="backend_url", help="http(s)://... or mock://echo")
    parser.add_argument("--model", dest="backend_model")
    parser.add_argument("--api-key", dest="api_key")
    parser.add_argument("--variant")
    parser.add_argument("-k", type=int, dest="k")
    parser.add_argument("--retrieval", choices=["bm25", "random"], dest="retrieval_mode")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--dictionary", help="dictionary TSV for word-level variants")
    parser.add_argument("--max-tokens", type=int, dest="max_tokens")
    parser.add_argument("--concurrency", type=int)
    parser.add_argument("-o", "--output-dir", dest="output_dir")


_CONFIG_KEYS = [f.name for f in dataclasses.fields(RunConfig)]


def resolve_config(args: argparse.Namespace) -> RunConfig:
    config = RunConfig.from_file(args.config) if getattr(args, "config", None) else RunConfig()
    overrides = {k: getattr(args, k) for k in _CONFIG_KEYS if hasattr(args, k)}
    config = config.merged(overrides)
    if not config.backend_url:
        config.backend_url = os.environ.get("LRLKIT_BACKEND_URL", "")
    if config.backend_model == "default":
        config.backend_model = os.environ.get("LRLKIT_MODEL", "default")
    if config.api_key is None:
        config.api_key = os.environ.get("LRLKIT_API_KEY")
    return config


def _load_corpus(config: RunConfig, args) -> "tuple":
    """Parallel corpus from either the dataset's train split or a ||| file."""
    if getattr(args, "pipes", None):
        return load_pipes(args.pipes, config.language_code or "und"), None
    dataset = load_dataset(config.dataset, config.dataset_format, config.task)
    corpus = make_parallel(dataset.split("train"), config.language_code or "und")
    return corpus, dataset


def cmd_diagnose(args) -> int:
    config = resolve_config(args)
    backend = make_backend(config)
    profile = diagnose(config, backend=backend)
    out = Path(args.out or (Path(config.output_dir) / "profile.json"))
    write_json(out, config, profile.to_dict())
    print(f"wrote {out}")
    return EXIT_OK


def cmd_align(args) -> int:
    config = resolve_config(args)
    corpus, _ = _load_corpus(config, args)
    model = aligner.train(corpus, iters=config.align_iterations)
    out = Path(args.out or (Path(config.output_dir) / "alignment_model.json"))
    out.parent.mkdir(parents=True, exist_ok=True)
    model.to_json(out)
    print(f"wrote {out} (final log-likelihood {model.log_likelihoods[-1]:.4f})")
    if args.alignments:
        with open(args.alignments, "w", encoding="utf-8") as f:
            for pair in corpus:
                f.write(aligner.pharaoh_format(aligner.viterbi_align(model, pair)) + "\n")
        print(f"wrote {args.alignments}")
    return EXIT_OK


def cmd_build_dict(args) -> int:
    config = resolve_config(args)
    corpus, _ = _load_corpus(config, args)
    if args.model:
        model = aligner.AlignmentModel.from_json(args.model)
    else:
        model = aligner.train(corpus, iters=config.align_iterations)
    dictionary = aligner.extract_dictionary(model, corpus)
    out = Path(args.out or (Path(config.output_dir) / "dictionary.tsv"))
    out.parent.mkdir(parents=True, exist_ok=True)
    dictionary.to_tsv(out)
    print(f"wrote {out} ({len(dictionary.entries)} entries, coverage {dictionary.coverage:.3f})")
    return EXIT_OK


def cmd_retrieve(args) -> int:
    config = resolve_config(args)
    dataset = load_dataset(config.dataset, config.dataset_format, config.task)
    pool = dataset.split("train")
    texts = [getattr(ex, "text_target", None) or ex.passage_target for ex in pool]
    index = retriever.build_index(texts)
    queries: list[tuple[str, str]] = []
    if args.text:
        queries = [("query", args.text)]
    else:
        for ex in dataset.split(args.split):
            queries.append((ex.id, getattr(ex, "text_target", None) or ex.passage_target))
    rows = []
    for query_id, text in queries:
        for doc_id, score in retriever.query(index, text, top_k=args.top_k):
            rows.append((query_id, doc_id, score))
    if args.dump_scores:
        with open(args.dump_scores, "w", encoding="utf-8") as f:
            f.write("query_id\tdoc_id\tscore\n")
            for query_id, doc_id, score in rows:
                f.write(f"{query_id}\t{doc_id}\t{score:.10g}\n")
        print(f"wrote {args.dump_scores}")
    else:
        for query_id, doc_id, score in rows:
            print(f"{query_id}\t{doc_id}\t{score:.6f}\t{pool[doc_id].id}")
    return EXIT_OK


def cmd_prompt(args) -> int:
    from .harness import _Retriever, render_for_example

    config = resolve_config(args)
    dataset = load_dataset(config.dataset, config.dataset_format, config.task)
    spec = make_prompt_spec(config, config.variant, config.k)
    retrieval = RetrievalConfig(mode=config.retrieval_mode, seed=config.seed)
    needs_retrieval = spec.k >= 1 or (
        spec.task == "multichoice" and spec.variant == "sentence_alignment"
    )
    pool_retriever = _Retriever(dataset.split("train"), spec, retrieval) if needs_retrieval else None
    dictionary = None
    if spec.variant in ("word_alignment", "word_translation"):
        dictionary = ensure_dictionary(config, dataset)
    out = open(args.out, "w", encoding="utf-8") if args.out else sys.stdout
    try:
        for ex in dataset.split(args.split)[: args.limit]:
            prompt = render_for_example(spec, ex, pool_retriever, dictionary)
            if args.jsonl or args.out:
                out.write(json.dumps(
                    {"id": ex.id, "variant": spec.variant, "text": prompt.text},
                    ensure_ascii=False,
                ) + "\n")
            else:
                out.write(prompt.text + "\n---\n")
    finally:
        if args.out:
            out.close()
            print(f"wrote {args.out}")
    return EXIT_OK


def cmd_eval(args) -> int:
    config = resolve_config(args)
    backend = make_backend(config)
    dataset = load_dataset(config.dataset, config.dataset_format, config.task)
    spec = make_prompt_spec(config, config.variant, config.k)
    retrieval = RetrievalConfig(mode=config.retrieval_mode, seed=config.seed)
    dictionary = None
    if spec.variant in ("word_alignment", "word_translation"):
        dictionary = ensure_dictionary(config, dataset)
    if spec.variant in ("fewshot_plain", "fewshot_aligned"):
        position = select_description_position(
            dataset, spec, backend, retrieval=retrieval, dictionary=dictionary,
            concurrency=config.concurrency,
        )
        spec = dataclasses.replace(spec, description_position=position)
        print(f"selected description position on dev: {position}")
    report = run_eval(
        dataset, spec, backend,
        retrieval=retrieval, dictionary=dictionary, split=args.split,
        max_tokens=config.max_tokens, concurrency=config.concurrency,
    )
    out_dir = Path(config.output_dir)
    report_path = Path(args.out or (out_dir / f"report_{spec.variant}.json"))
    records_path = report_path.with_name(report_path.stem.replace("report", "records") + ".jsonl")
    write_json(report_path, config, report.to_dict())
    write_records_jsonl(records_path, config, report.records)
    print(
        f"accuracy {report.accuracy:.4f} on n={report.n} "
        f"(majority baseline {report.majority_vote_baseline:.4f}, "
        f"parse failures {report.parse_failure_count}, transport failures {report.transport_failure_count})"
    )
    print(f"wrote {report_path} and {records_path}")
    if report.flagged:
        print("run FLAGGED non-comparable: >1% transport failures", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


def cmd_compare(args) -> int:
    records_a = read_records_jsonl(args.run_a)
    records_b = read_records_jsonl(args.run_b)
    result = compare_runs(records_a, records_b, continuity_correction=not args.no_continuity)
    table = result["table"]
    print(f"n = {result['n']}")
    print(f"A correct / B wrong : {table['a_correct_b_wrong']}")
    print(f"A wrong / B correct : {table['a_wrong_b_correct']}")
    print(f"both correct        : {table['both_correct']}")
    print(f"both wrong          : {table['both_wrong']}")
    print(f"statistic = {result['statistic']:.6f}  p-value = {result['p_value']:.6g}")
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
        print(f"wrote {args.out}")
    return EXIT_OK


def cmd_recommend(args) -> int:
    profile_payload = json.loads(Path(args.profile).read_text(encoding="utf-8"))
    profile = LanguageProfile.from_dict(profile_payload)
    thresholds = Thresholds()
    if args.thresholds:
        thresholds = Thresholds(**json.loads(Path(args.thresholds).read_text(encoding="utf-8")))
    result = recommend(profile, thresholds)
    if args.markdown:
        manifest_like = {"config_hash": profile_payload.get("config_hash", "n/a"), "toolkit_version": __version__}
        print(markdown_summary(manifest_like, result, {}))
    else:
        print(json.dumps(result, indent=2, sort_keys=True))
    if args.out:
        Path(args.out).write_text(json.dumps(result, indent=2, sort_keys=True) + "\n", encoding="utf-8")
    return EXIT_OK


def cmd_pipeline(args) -> int:
    config = resolve_config(args)
    result = run_pipeline(config)
    print(f"bundle written to {result.bundle_dir}")
    for stage in result.manifest["stages"]:
        print(f"  stage {stage['name']}: {stage['status']}")
    if args.markdown:
        reports = {}
        for name in sorted(result.manifest["artifacts"]):
            if name.startswith("report_"):
                payload = json.loads((result.bundle_dir / name).read_text(encoding="utf-8"))
                reports[name.removeprefix("report_").removesuffix(".json")] = payload
        rec_path = result.bundle_dir / "recommendation.json"
        recommendation = json.loads(rec_path.read_text(encoding="utf-8")) if rec_path.exists() else None
        summary_path = result.bundle_dir / "summary.md"
        summary_path.write_text(markdown_summary(result.manifest, recommendation, reports), encoding="utf-8")
        print(f"wrote {summary_path}")
    if result.manifest.get("flagged"):
        print("pipeline FLAGGED non-comparable: >1% transport failures", file=sys.stderr)
        return EXIT_FLAGGED
    return EXIT_OK


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lrlkit", description=__doc__)
    parser.add_argument("--version", action="version", version=f"lrlkit {__version__}")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("diagnose", help="profile a language (ip, tbr, tp)")
    _add_config_flags(p)
    p.add_argument("--out")
    p.set_defaults(func=cmd_diagnose)

    p = sub.add_parser("align", help="train the word aligner on parallel data")
    _add_config_flags(p)
    p.add_argument("--pipes", help="corpus in 'target ||| english' format instead of a dataset")
    p.add_argument("--iters", type=int, dest="align_iterations")
    p.add_argument("--out")
    p.add_argument("--alignments", help="also decode the corpus to this Pharaoh-format file")
    p.set_defaults(func=cmd_align)

    p = sub.add_parser("build-dict", help="induce a target->English dictionary")
    _add_config_flags(p)
    p.add_argument("--pipes")
    p.add_argument("--model", help="trained alignment model JSON (otherwise trains now)")
    p.add_argument("--iters", type=int, dest="align_iterations")
    p.add_argument("--out")
    p.set_defaults(func=cmd_build_dict)

    p = sub.add_parser("retrieve", help="query the BM25 index over the train split")
    _add_config_flags(p)
    p.add_argument("--text", help="single query text (default: query each example of --split)")
    p.add_argument("--split", default="test")
    p.add_argument("--top-k", type=int, default=3, dest="top_k")
    p.add_argument("--dump-scores", dest="dump_scores", help="write (query_id, doc_id, score) TSV")
    p.set_defaults(func=cmd_retrieve)

    p = sub.add_parser("prompt", help="render prompts for inspection or golden testing")
    _add_config_flags(p)
    p.add_argument("--split", default="test")
    p.add_argument("--limit", type=int, default=None)
    p.add_argument("--jsonl", action="store_true", help="emit JSONL {id, variant, text}")
    p.add_argument("--out")
    p.set_defaults(func=cmd_prompt)

    p = sub.add_parser("eval", help="run an evaluation")
    _add_config_flags(p)
    p.add_argument("--split", default="test")
    p.add_argument("--out")
    p.set_defaults(func=cmd_eval)

    p = sub.add_parser("compare", help="paired chi-squared between two record files")
    p.add_argument("run_a")
    p.add_argument("run_b")
    p.add_argument("--no-continuity", action="store_true", help="disable the continuity correction")
    p.add_argument("--out")
    p.set_defaults(func=cmd_compare)

    p = sub.add_parser("recommend", help="strategy recommendation from a profile")
    p.add_argument("--profile", required=True)
    p.add_argument("--thresholds", help="JSON file overriding category thresholds")
    p.add_argument("--markdown", action="store_true")
    p.add_argument("--out")
    p.set_defaults(func=cmd_recommend)

    p = sub.add_parser("pipeline", help="diagnose -> evals -> compare -> recommend bundle")
    _add_config_flags(p)
    p.add_argument("--markdown", action="store_true")
    p.set_defaults(func=cmd_pipeline)

    return parser


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except (DataError, LeakageError, FileNotFoundError, json.JSONDecodeError) as e:
        print(f"error: {e}", file=sys.stderr)
        return EXIT_CONFIG
    except BackendError as e:
        print(f"backend error: {e}", file=sys.stderr)
        return EXIT_BACKEND


if __name__ == "__main__":
    sys.exit(main())
