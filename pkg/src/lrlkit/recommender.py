"""Map a language profile to an adaptation-strategy ranking.

Languages fall into three capability categories based on the baseline
zero-shot accuracy and, for the most severe tier, on the tokenizer
diagnostics: a language whose script is effectively unseen (token-to-byte
ratio near 1) and whose information parity is very low gets no traction
from small-scale fine-tuning, so prompt-level alignment dominates there.
Each category carries a full ranking over the three strategies plus the
kind of data investment that pays off first.

The baseline-accuracy cutoffs (0.2 / 0.45) are the published category
boundaries; the tbr/ip cutoffs for the severe tier are calibrated defaults
(no closed-form boundary exists) and are user-overridable. Profiles
sitting exactly on an accuracy boundary classify into the lower category.
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import DataError
from .tokmetrics import LanguageProfile

EXTREMELY_UNDER_REPRESENTED = "extremely_under_represented"
LIMITED_CAPABILITY = "limited_capability"
MODERATE_CAPABILITY = "moderate_capability"

ZERO_SHOT_ALIGN = "zero_shot_align"
FEW_SHOT = "few_shot"
PEFT = "peft"

_CATEGORY_ORDER = (EXTREMELY_UNDER_REPRESENTED, LIMITED_CAPABILITY, MODERATE_CAPABILITY)

_RANKINGS: dict[str, tuple[str, ...]] = {
    EXTREMELY_UNDER_REPRESENTED: (ZERO_SHOT_ALIGN, FEW_SHOT, PEFT),
    LIMITED_CAPABILITY: (PEFT, ZERO_SHOT_ALIGN, FEW_SHOT),
    MODERATE_CAPABILITY: (PEFT, FEW_SHOT, ZERO_SHOT_ALIGN),
}

_INVESTMENTS: dict[str, str] = {
    EXTREMELY_UNDER_REPRESENTED: "parallel_translation",
    LIMITED_CAPABILITY: "translation_or_annotation_cost_comparison",
    MODERATE_CAPABILITY: "annotation",
}


@dataclass(frozen=True)
class Thresholds:
    baseline_low: float = 0.2
    baseline_mid: float = 0.45
    tbr_high: float = 0.95
    ip_low: float = 0.20

    def to_dict(self) -> dict:
        return {
            "baseline_low": self.baseline_low,
            "baseline_mid": self.baseline_mid,
            "tbr_high": self.tbr_high,
            "ip_low": self.ip_low,
        }


DEFAULT_THRESHOLDS = Thresholds()


@dataclass(frozen=True)
class StrategyRanking:
    category: str
    ranking: tuple[str, ...]
    rationale: str
    data_investment: str

    def to_dict(self) -> dict:
        return {
            "category": self.category,
            "ranking": list(self.ranking),
            "rationale": self.rationale,
            "investment": self.data_investment,
        }


def categorize(profile: LanguageProfile, thresholds: Thresholds = DEFAULT_THRESHOLDS) -> str:
    """Assign a capability category from baseline accuracy, tbr, and ip."""
    if profile.baseline_accuracy is None:
        raise DataError(
            "profile has no baseline_accuracy; run a baseline evaluation first "
            "(eval with variant=baseline_zero) and record its accuracy in the profile"
        )
    baseline = profile.baseline_accuracy
    if (
        baseline < thresholds.baseline_low
        and profile.tbr > thresholds.tbr_high
        and profile.ip < thresholds.ip_low
    ):
        return EXTREMELY_UNDER_REPRESENTED
    if baseline <= thresholds.baseline_mid:
        return LIMITED_CAPABILITY
    return MODERATE_CAPABILITY


def rank_strategies(category: str) -> StrategyRanking:
    if category not in _RANKINGS:
        raise DataError(f"unknown category {category!r}")
    rationales = {
        EXTREMELY_UNDER_REPRESENTED: (
            "Language and script are effectively unseen by tokenizer and model; "
            "small-scale fine-tuning overfits, while zero-shot prompts with "
            "word- or sentence-level alignment give the largest gains."
        ),
        LIMITED_CAPABILITY: (
            "The model has some grip on the language; fine-tuning is effective, "
            "and zero-shot prompting with alignment edges out few-shot prompting."
        ),
        MODERATE_CAPABILITY: (
            "The model already handles the language reasonably; fine-tuning and "
            "labeled few-shot examples beat unlabeled alignment signals."
        ),
    }
    return StrategyRanking(
        category=category,
        ranking=_RANKINGS[category],
        rationale=rationales[category],
        data_investment=_INVESTMENTS[category],
    )


def explain(
    profile: LanguageProfile,
    ranking: StrategyRanking,
    thresholds: Thresholds = DEFAULT_THRESHOLDS,
) -> str:
    """Deterministic human-readable report for a profile and its ranking."""
    lines = [
        f"Language: {profile.language_code}",
        (
            f"Measured over {profile.sample_count} pairs: "
            f"information parity {profile.ip:.3f}, token-to-byte ratio {profile.tbr:.3f}, "
            f"tokenizer parity {profile.tp:.3f}, baseline accuracy "
            + (f"{profile.baseline_accuracy:.3f}" if profile.baseline_accuracy is not None else "n/a")
        ),
        f"Category: {ranking.category}",
    ]
    checks = []
    if profile.baseline_accuracy is not None:
        if profile.baseline_accuracy < thresholds.baseline_low:
            checks.append(f"baseline {profile.baseline_accuracy:.3f} < {thresholds.baseline_low}")
        elif profile.baseline_accuracy <= thresholds.baseline_mid:
            checks.append(f"baseline {profile.baseline_accuracy:.3f} <= {thresholds.baseline_mid}")
        else:
            checks.append(f"baseline {profile.baseline_accuracy:.3f} > {thresholds.baseline_mid}")
    if profile.tbr > thresholds.tbr_high:
        checks.append(f"tbr {profile.tbr:.3f} > {thresholds.tbr_high} (near byte-fallback tokenization)")
    if profile.ip < thresholds.ip_low:
        checks.append(f"ip {profile.ip:.3f} < {thresholds.ip_low} (severely under-represented)")
    lines.append("Thresholds crossed: " + "; ".join(checks))
    lines.append("Strategy ranking: " + " > ".join(ranking.ranking))
    lines.append("Data investment: " + ranking.data_investment)
    lines.append("Rationale: " + ranking.rationale)
    if ranking.category == EXTREMELY_UNDER_REPRESENTED:
        lines.append(
            "Caution: avoid fine-tuning a multilingual model on a language whose "
            "script is unseen by its tokenizer; invest in a small in-domain "
            "parallel corpus for prompt-level alignment instead. Labels in the "
            "prompt add little when the model cannot read the language at all."
        )
    return "\n".join(lines)


def recommend(
    profile: LanguageProfile, thresholds: Thresholds = DEFAULT_THRESHOLDS
) -> dict:
    """Category, ranking, investment, and explanation for one profile."""
    category = categorize(profile, thresholds)
    ranking = rank_strategies(category)
    return {
        **ranking.to_dict(),
        "explanation": explain(profile, ranking, thresholds),
        "thresholds": thresholds.to_dict(),
        "meta": {
            "category_order": list(_CATEGORY_ORDER),
            "severe_tier_cutoffs": "tbr_high/ip_low are calibrated defaults, not published boundaries",
        },
    }
