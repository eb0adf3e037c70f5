"""Run configuration, artifact writing, and the end-to-end pipeline.

A run is described by one declarative config (JSON or YAML key-value
tree); command-line flags override config values. Every emitted artifact
embeds the config hash and toolkit version, and artifact content hashes
exclude volatile fields, so rerunning an unchanged config reproduces
identical hashes.

The pipeline chains: diagnose -> baseline eval -> adaptation evals ->
paired significance vs. baseline -> recommendation, writing a bundle
directory with a manifest. The manifest is rewritten after every stage, so
an interrupted run preserves exactly the completed stages.
"""

from __future__ import annotations

import dataclasses
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from . import __version__
from .aligner import Dictionary, extract_dictionary, train
from .backends import backend_from_url
from .corpus import Dataset, load_dataset, make_parallel
from .errors import DataError
from .harness import (
    EvalRecord,
    EvalReport,
    RetrievalConfig,
    run_eval,
    select_description_position,
)
from .hashing import content_hash, file_content_hash
from .promptkit import PromptSpec
from .recommender import Thresholds, recommend
from .stats import paired_chi_squared
from .tokmetrics import LanguageProfile, TokenizerHandle, profile_language

FEWSHOT_VARIANTS = ("fewshot_plain", "fewshot_aligned")
WORD_VARIANTS = ("word_alignment", "word_translation")


@dataclass
class RunConfig:
    dataset: str = ""
    dataset_format: str = "jsonl"
    task: str = "classification"
    language_code: str = ""
    language_name: str = ""
    tokenizer: str = ""
    backend_url: str = ""
    backend_model: str = "default"
    api_key: str | None = None
    variant: str = "baseline_zero"
    k: int = 0
    retrieval_mode: str = "bm25"
    seed: int = 13
    output_dir: str = "runs/out"
    adaptation_variants: list[str] = field(default_factory=lambda: ["sentence_alignment"])
    adaptation_k: int = 1
    dictionary: str | None = None
    max_tokens: int | None = None
    concurrency: int = 4
    align_iterations: int = 5
    thresholds: dict = field(default_factory=dict)

    @classmethod
    def from_file(cls, path: str | Path) -> "RunConfig":
        path = Path(path)
        if not path.exists():
            raise DataError(f"config file not found: {path}")
        text = path.read_text(encoding="utf-8")
        if path.suffix in (".yaml", ".yml"):
            raw = yaml.safe_load(text)
        else:
            raw = json.loads(text)
        if not isinstance(raw, dict):
            raise DataError(f"{path}: config must be a key-value tree")
        known = {f.name for f in dataclasses.fields(cls)}
        unknown = set(raw) - known
        if unknown:
            raise DataError(f"{path}: unknown config keys {sorted(unknown)}")
        return cls(**raw)

    def merged(self, overrides: dict) -> "RunConfig":
        """Apply non-None overrides (flags win over the config file)."""
        updates = {k: v for k, v in overrides.items() if v is not None}
        return dataclasses.replace(self, **updates)

    def to_dict(self) -> dict:
        d = dataclasses.asdict(self)
        d.pop("api_key", None)  # never persist credentials
        return d

    def hash(self) -> str:
        return content_hash(self.to_dict())


def _check_paths(config: RunConfig, need_tokenizer: bool = False) -> None:
    if not config.dataset:
        raise DataError("config: dataset path is required")
    if not Path(config.dataset).exists():
        raise DataError(f"config: dataset file not found: {config.dataset}")
    if need_tokenizer:
        if not config.tokenizer:
            raise DataError("config: tokenizer path is required")
        if not str(config.tokenizer).startswith(("http://", "https://")) and not Path(config.tokenizer).exists():
            raise DataError(f"config: tokenizer file not found: {config.tokenizer}")


def make_backend(config: RunConfig):
    if not config.backend_url:
        raise DataError("config: backend_url is required (flag, config file, or LRLKIT_BACKEND_URL)")
    return backend_from_url(config.backend_url, model=config.backend_model, api_key=config.api_key)


def make_prompt_spec(config: RunConfig, variant: str | None = None, k: int | None = None) -> PromptSpec:
    variant = variant or config.variant
    if k is None:
        k = config.k if variant == config.variant else config.adaptation_k
    if variant in ("baseline_zero", *WORD_VARIANTS):
        k = 0
    elif k < 1:
        k = 1
    return PromptSpec(
        variant=variant,
        language_name=config.language_name or config.language_code or "the target language",
        task=config.task,
        k=k,
    )


def stamp(config: RunConfig, payload: dict) -> dict:
    """Embed config hash, seed, and toolkit version in an artifact payload."""
    return {"config_hash": config.hash(), "toolkit_version": __version__, "seed": config.seed, **payload}


def write_json(path: Path, config: RunConfig, payload: dict) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(
        json.dumps(stamp(config, payload), ensure_ascii=False, indent=2, sort_keys=True) + "\n",
        encoding="utf-8",
    )


def write_records_jsonl(path: Path, config: RunConfig, records: list[EvalRecord]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with path.open("w", encoding="utf-8") as f:
        f.write(json.dumps({"_meta": stamp(config, {})}, sort_keys=True) + "\n")
        for record in records:
            f.write(json.dumps(record.to_dict(), ensure_ascii=False, sort_keys=True) + "\n")


def read_records_jsonl(path: str | Path) -> list[dict]:
    path = Path(path)
    if not path.exists():
        raise DataError(f"records file not found: {path}")
    records = []
    # Split on \n only: record fields may contain U+2028/U+2029.
    for line in path.read_text(encoding="utf-8").split("\n"):
        if not line.strip():
            continue
        row = json.loads(line)
        if "_meta" in row:
            continue
        records.append(row)
    if not records:
        raise DataError(f"{path}: no evaluation records")
    return records


def correctness_map(records: list[dict]) -> dict[str, bool]:
    out = {}
    for row in records:
        if row.get("failed"):
            continue
        out[row["example_id"]] = bool(row["correct"])
    return out


def compare_runs(records_a: list[dict], records_b: list[dict], continuity_correction: bool = True) -> dict:
    from .stats import pair_outcomes

    a_map = correctness_map(records_a)
    b_map = correctness_map(records_b)
    shared = set(a_map) & set(b_map)
    if set(a_map) != set(b_map):
        # Transport failures may differ between runs; compare the shared ids.
        a_map = {k: a_map[k] for k in shared}
        b_map = {k: b_map[k] for k in shared}
    if not shared:
        raise DataError("compare: runs share no evaluated examples")
    outcome = pair_outcomes(a_map, b_map)
    statistic, p_value = paired_chi_squared(a_map, b_map, continuity_correction)
    return {
        "n": outcome.n,
        "table": {
            "a_correct_b_wrong": outcome.b,
            "a_wrong_b_correct": outcome.c,
            "both_correct": outcome.both_correct,
            "both_wrong": outcome.both_wrong,
        },
        "statistic": statistic,
        "p_value": p_value,
        "continuity_correction": continuity_correction,
    }


def diagnose(config: RunConfig, dataset: Dataset | None = None, backend=None) -> LanguageProfile:
    _check_paths(config, need_tokenizer=True)
    if dataset is None:
        dataset = load_dataset(config.dataset, config.dataset_format, config.task)
    backend = backend or make_backend(config)
    tokenizer = TokenizerHandle.load(config.tokenizer)
    corpus = make_parallel(dataset.split("train"), config.language_code or "und")
    return profile_language(corpus, tokenizer, backend)


def ensure_dictionary(config: RunConfig, dataset: Dataset) -> Dictionary:
    """Load the configured dictionary, or induce one from the train split."""
    if config.dictionary:
        return Dictionary.from_tsv(config.dictionary)
    corpus = make_parallel(dataset.split("train"), config.language_code or "und")
    model = train(corpus, iters=config.align_iterations)
    return extract_dictionary(model, corpus)


@dataclass
class PipelineResult:
    bundle_dir: Path
    manifest: dict


def run_pipeline(config: RunConfig, backend=None) -> PipelineResult:
    """Full workflow into a bundle directory with a manifest.

    Stages: diagnose, baseline evaluation, one evaluation per adaptation
    variant, a paired comparison of each adaptation against the baseline,
    and a strategy recommendation. A stage failure halts the run but the
    manifest keeps every completed stage.
    """
    _check_paths(config, need_tokenizer=True)
    bundle = Path(config.output_dir)
    bundle.mkdir(parents=True, exist_ok=True)
    manifest: dict = {
        "config_hash": config.hash(),
        "toolkit_version": __version__,
        "config": config.to_dict(),
        "stages": [],
        "artifacts": {},
    }
    manifest_path = bundle / "manifest.json"

    def save_manifest() -> None:
        manifest_path.write_text(
            json.dumps(manifest, ensure_ascii=False, indent=2, sort_keys=True) + "\n",
            encoding="utf-8",
        )

    def complete_stage(name: str, artifacts: list[Path]) -> None:
        for artifact in artifacts:
            manifest["artifacts"][artifact.name] = file_content_hash(artifact)
        manifest["stages"].append({"name": name, "status": "completed", "artifacts": [a.name for a in artifacts]})
        save_manifest()

    backend = backend or make_backend(config)
    dataset = load_dataset(config.dataset, config.dataset_format, config.task)
    retrieval = RetrievalConfig(mode=config.retrieval_mode, seed=config.seed)

    current_stage = "diagnose"
    try:
        # 1. diagnose
        profile = diagnose(config, dataset, backend)
        profile_path = bundle / "profile.json"
        write_json(profile_path, config, profile.to_dict())
        complete_stage("diagnose", [profile_path])

        # 2. baseline evaluation
        current_stage = "eval_baseline"
        baseline_spec = make_prompt_spec(config, "baseline_zero", 0)
        baseline = run_eval(
            dataset, baseline_spec, backend,
            retrieval=retrieval, max_tokens=config.max_tokens, concurrency=config.concurrency,
        )
        baseline_report_path = bundle / "report_baseline.json"
        baseline_records_path = bundle / "records_baseline.jsonl"
        write_json(baseline_report_path, config, baseline.to_dict())
        write_records_jsonl(baseline_records_path, config, baseline.records)
        complete_stage("eval_baseline", [baseline_report_path, baseline_records_path])

        profile.baseline_accuracy = baseline.accuracy
        write_json(profile_path, config, profile.to_dict())
        manifest["artifacts"][profile_path.name] = file_content_hash(profile_path)
        save_manifest()

        # 3. adaptation evaluations + comparisons
        dictionary = None
        if any(v in WORD_VARIANTS for v in config.adaptation_variants):
            current_stage = "build_dictionary"
            dictionary = ensure_dictionary(config, dataset)
            dict_path = bundle / "dictionary.tsv"
            dictionary.to_tsv(dict_path)
            complete_stage("build_dictionary", [dict_path])

        flagged = baseline.flagged
        for variant in config.adaptation_variants:
            current_stage = f"eval_{variant}"
            spec = make_prompt_spec(config, variant)
            if variant in FEWSHOT_VARIANTS:
                position = select_description_position(
                    dataset, spec, backend,
                    retrieval=retrieval, dictionary=dictionary, concurrency=config.concurrency,
                )
                spec = dataclasses.replace(spec, description_position=position)
            report = run_eval(
                dataset, spec, backend,
                retrieval=retrieval, dictionary=dictionary,
                max_tokens=config.max_tokens, concurrency=config.concurrency,
            )
            flagged = flagged or report.flagged
            report_path = bundle / f"report_{variant}.json"
            records_path = bundle / f"records_{variant}.jsonl"
            write_json(report_path, config, report.to_dict())
            write_records_jsonl(records_path, config, report.records)
            complete_stage(f"eval_{variant}", [report_path, records_path])

            current_stage = f"compare_{variant}"
            comparison = compare_runs(
                [r.to_dict() for r in baseline.records],
                [r.to_dict() for r in report.records],
            )
            comparison["runs"] = {"a": "baseline_zero", "b": variant}
            compare_path = bundle / f"compare_{variant}.json"
            write_json(compare_path, config, comparison)
            complete_stage(f"compare_{variant}", [compare_path])

        # 4. recommendation
        current_stage = "recommend"
        thresholds = Thresholds(**config.thresholds) if config.thresholds else Thresholds()
        recommendation = recommend(profile, thresholds)
        rec_path = bundle / "recommendation.json"
        write_json(rec_path, config, recommendation)
        complete_stage("recommend", [rec_path])
    except Exception:
        manifest["stages"].append({"name": current_stage, "status": "failed", "artifacts": []})
        save_manifest()
        raise

    manifest["flagged"] = flagged
    save_manifest()
    return PipelineResult(bundle_dir=bundle, manifest=manifest)


def markdown_summary(manifest: dict, recommendation: dict | None, reports: dict[str, dict]) -> str:
    """Human-readable bundle summary with a category/ranking table."""
    lines = ["# Run summary", ""]
    lines.append(f"- config hash: `{manifest['config_hash']}`")
    lines.append(f"- toolkit version: {manifest['toolkit_version']}")
    lines.append("")
    if reports:
        lines.append("## Accuracy")
        lines.append("")
        lines.append("| run | accuracy | n | majority baseline | flagged |")
        lines.append("|---|---|---|---|---|")
        for name, report in reports.items():
            lines.append(
                f"| {name} | {report['accuracy']:.3f} | {report['n']} "
                f"| {report['majority_vote_baseline']:.3f} | {report['flagged']} |"
            )
        lines.append("")
    if recommendation:
        from .recommender import rank_strategies, _CATEGORY_ORDER  # noqa: F401

        lines.append("## Strategy ranking by capability category")
        lines.append("")
        lines.append("| category | ranking | data investment |")
        lines.append("|---|---|---|")
        for category in _CATEGORY_ORDER:
            ranking = rank_strategies(category)
            marker = " **(this language)**" if category == recommendation["category"] else ""
            lines.append(
                f"| {category}{marker} | {' > '.join(ranking.ranking)} | {ranking.data_investment} |"
            )
        lines.append("")
        lines.append("```")
        lines.append(recommendation["explanation"])
        lines.append("```")
    return "\n".join(lines) + "\n"
