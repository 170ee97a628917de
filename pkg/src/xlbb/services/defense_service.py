import math
from collections.abc import Iterable, Mapping, Sequence
from typing import Any

import numpy as np
from loguru import logger

from xlbb.backends.contracts import PerplexityOracle, TokenScorer
from xlbb.common.errors import CalibrationError, CapacityError, VocabularyMismatchError
from xlbb.common.rng import SplitMix64
from xlbb.models.attack import AttackSpec, PoisonRecord
from xlbb.models.corpus import InstructionExample
from xlbb.models.defense import (
    CleanGenConfig,
    CleanGenResult,
    DefenseReport,
    ProbeOutcome,
    ProbeReport,
    ProbeResult,
    SuspicionScore,
    TokenSource,
)
from xlbb.models.judge import GenerationRecord
from xlbb.models.metrics import AsrReport, language_order
from xlbb.models.tokens import END, SEP
from xlbb.models.types import UNSEGMENTED_LANGUAGES, DefenseKind
from xlbb.services.judge_service import JudgeService


# --- ONION ---
def tokenize_for_onion(text: str, language: str = "en") -> list[str]:
    """Removal units: whitespace words, or single non-space characters for zh/ja/th"""
    if language in UNSEGMENTED_LANGUAGES:
        return [char for char in text if not char.isspace()]
    return text.split()


def join_onion_tokens(tokens: Sequence[str], language: str = "en") -> str:
    return "".join(tokens) if language in UNSEGMENTED_LANGUAGES else " ".join(tokens)


def onion_scores(text: str, oracle: PerplexityOracle, language: str = "en") -> list[SuspicionScore]:
    """Leave-one-out perplexity drop of every token: PPL(text) - PPL(text without token i).

    A single-token text is scored against the empty text, whose perplexity is that of the end symbol alone.
    """
    tokens = tokenize_for_onion(text, language)
    if not tokens:
        return []
    full = oracle.perplexity(join_onion_tokens(tokens, language))
    scores = []
    for i, token in enumerate(tokens):
        without = join_onion_tokens(tokens[:i] + tokens[i + 1 :], language)
        scores.append(SuspicionScore(token_index=i, token=token, score=full - oracle.perplexity(without)))
    return scores


def onion_filter(text: str, oracle: PerplexityOracle, threshold: float, language: str = "en") -> str:
    """Drop every token scoring above `threshold`, in a single pass.

    Survivors keep their order and are re-joined with single spaces (nothing for zh/ja/th). When no
    token is dropped the text comes back untouched.
    """
    scores = onion_scores(text, oracle, language)
    kept = [score.token for score in scores if not score.score > threshold]
    if len(kept) == len(scores):
        return text
    return join_onion_tokens(kept, language)


def calibrate_onion_threshold(
    corpus: Iterable[str], oracle: PerplexityOracle, percentile: float, language: str = "en"
) -> float:
    """The `percentile`-th percentile of every token score over a clean corpus.

    Uses the "higher" percentile method, so the threshold is an observed score and at most
    (100 - percentile)% of the calibration tokens lie strictly above it.
    """
    if not 0.0 <= percentile <= 100.0:
        raise CalibrationError(f"percentile must be in [0, 100], got {percentile}")
    values = [score.score for text in corpus for score in onion_scores(text, oracle, language)]
    if not values:
        raise CalibrationError("cannot calibrate ONION on an empty corpus")
    threshold = float(np.percentile(np.asarray(values, dtype=np.float64), percentile, method="higher"))
    logger.info(f"ONION threshold for {language}: {threshold:.4f} (p{percentile:g} of {len(values)} token scores)")
    return threshold


class OnionPromptFilter:
    """Per-language ONION filter usable as an evaluation prompt filter.

    Args:
        oracles: Language -> perplexity oracle; prompts of other languages pass through
        thresholds: Language -> removal threshold, +inf when missing
    """

    def __init__(self, oracles: Mapping[str, PerplexityOracle], thresholds: Mapping[str, float]):
        self.oracles = dict(oracles)
        self.thresholds = dict(thresholds)

    def __call__(self, prompt: str, language: str) -> str:
        oracle = self.oracles.get(language)
        if oracle is None:
            return prompt
        return onion_filter(prompt, oracle, self.thresholds.get(language, math.inf), language)

    def filter_many(self, prompts: Iterable[tuple[str, str]]) -> list[str]:
        """Filter (prompt, language) pairs in order"""
        return [self(prompt, language) for prompt, language in prompts]


# --- CleanGen ---
def greedy_decode(scorer: TokenScorer, prompt: Sequence[str], max_tokens: int) -> list[str]:
    """Plain greedy decoding from `prompt + SEP`, end symbol excluded"""
    context = [*prompt, SEP]
    emitted: list[str] = []
    while len(emitted) < max_tokens:
        token = scorer.next_distribution(context).argmax()
        if token == END:
            break
        emitted.append(token)
        context.append(token)
    return emitted


class CleanGenDecoder:
    """Reference-guided decoding.

    The target drafts `window` tokens greedily. Each draft token is checked in order against the
    reference: when p_target / max(p_reference, epsilon_floor) reaches `alpha` the token is replaced by
    the reference's greedy token and the rest of the draft is thrown away.

    Args:
        target: The possibly backdoored model
        reference: The model whose judgement prevails on suspicious tokens
        config: Window, threshold and limits
    """

    def __init__(self, target: TokenScorer, reference: TokenScorer, config: CleanGenConfig | None = None):
        if target.vocabulary != reference.vocabulary:
            only_target = sorted(target.vocabulary - reference.vocabulary)[:5]
            only_reference = sorted(reference.vocabulary - target.vocabulary)[:5]
            raise VocabularyMismatchError(
                f"target and reference vocabularies differ (target only: {only_target}, "
                f"reference only: {only_reference})"
            )
        if END not in target.vocabulary:
            raise VocabularyMismatchError("vocabulary lacks the end symbol")
        self.target = target
        self.reference = reference
        self.config = config or CleanGenConfig()

    def _draft(self, context: list[str], size: int) -> list[tuple[str, float]]:
        draft: list[tuple[str, float]] = []
        draft_context = list(context)
        for _ in range(size):
            distribution = self.target.next_distribution(draft_context)
            token = distribution.argmax()
            draft.append((token, distribution.prob(token)))
            if token == END:
                break
            draft_context.append(token)
        return draft

    def decode(self, prompt: Sequence[str]) -> CleanGenResult:
        """Decode one prompt

        Args:
            prompt: Prompt tokens (a string is a sequence of characters)

        Returns:
            Emitted tokens with the model each came from
        """
        cfg = self.config
        context = [*prompt, SEP]
        tokens: list[str] = []
        sources: list[TokenSource] = []
        finished = False

        while not finished and len(tokens) < cfg.max_tokens:
            for token, p_target in self._draft(context, min(cfg.window, cfg.max_tokens - len(tokens))):
                reference = self.reference.next_distribution(context)
                suspicion = p_target / max(reference.prob(token), cfg.epsilon_floor)
                replaced = suspicion >= cfg.alpha
                if replaced:
                    token = reference.argmax()
                if token == END:
                    finished = True
                    break
                tokens.append(token)
                sources.append(TokenSource.REFERENCE if replaced else TokenSource.TARGET)
                context.append(token)
                if replaced:
                    break

        return CleanGenResult(tokens=tokens, sources=sources, finished=finished)


class CleanGenGenerator:
    """Text-generator view of a CleanGen decoder, so it can be evaluated like any other model"""

    def __init__(self, decoder: CleanGenDecoder):
        self.decoder = decoder

    def generate(self, prompt: str, system: str | None = None) -> str:
        return self.decoder.decode(prompt).text


def cleangen_compromised_reference_probe(
    decoder: CleanGenDecoder,
    prompts: Sequence[tuple[str, str]],
    judge: JudgeService,
    target_attack: AttackSpec,
    reference_attack: AttackSpec,
) -> ProbeReport:
    """Decode each prompt and tell whose payload the output carries.

    Args:
        decoder: Decoder over a backdoored target and a backdoored reference
        prompts: (prompt, test language) pairs
        judge: Judges outputs under both attacks' scenarios
        target_attack: The target's attack
        reference_attack: The reference's attack

    Returns:
        One result per prompt; the target's payload is checked first
    """
    results = []
    for index, (prompt, language) in enumerate(prompts):
        output = decoder.decode(prompt).text
        record = GenerationRecord(example_id=f"probe-{index}", language=language, output=output)
        if judge.judge_record(record, target_attack.scenario, target_attack.payload).triggered:
            outcome = ProbeOutcome.TARGET
        elif judge.judge_record(record, reference_attack.scenario, reference_attack.payload).triggered:
            outcome = ProbeOutcome.REFERENCE
        else:
            outcome = ProbeOutcome.NEITHER
        results.append(ProbeResult(prompt=prompt, output=output, outcome=outcome))

    report = ProbeReport(results=results)
    logger.info(
        f"Compromised-reference probe over {len(results)} prompts: "
        f"target {report.rate(ProbeOutcome.TARGET):.1f}%, reference {report.rate(ProbeOutcome.REFERENCE):.1f}%"
    )
    return report


# --- Clean finetuning ---
def prepare_clean_finetune_set(
    pools: Mapping[str, Sequence[InstructionExample]],
    per_language_count: int,
    manifest: Iterable[PoisonRecord],
    seed: int = 0,
) -> dict[str, list[InstructionExample]]:
    """Seeded sample of `per_language_count` benign examples per language, none of them poisoned.

    Args:
        pools: Language -> candidate examples
        per_language_count: Examples to draw from every language
        manifest: Poison records whose source ids must be avoided
        seed: 64-bit seed; each language draws from its own stream

    Returns:
        Language -> sampled examples in pool order, languages in matrix order
    """
    if per_language_count < 0:
        raise CapacityError(f"per-language count must be non-negative, got {per_language_count}")
    poisoned_ids = {record.source_id for record in manifest}
    selected: dict[str, list[InstructionExample]] = {}
    for language in sorted(pools, key=language_order):
        eligible = [example for example in pools[language] if example.id not in poisoned_ids]
        if len(eligible) < per_language_count:
            raise CapacityError(
                f"{language}: {len(eligible)} examples outside the poison manifest, {per_language_count} requested"
            )
        rng = SplitMix64.derive(seed, f"clean-finetune/{language}")
        selected[language] = [eligible[i] for i in rng.sample_indices(len(eligible), per_language_count)]
    logger.info(f"Prepared {sum(map(len, selected.values()))} clean finetuning examples over {len(selected)} languages")
    return selected


# --- Reports ---
def defense_report(
    defense: DefenseKind, parameters: Mapping[str, Any], before: AsrReport, after: AsrReport
) -> DefenseReport:
    """Before/after ASR per test language, taken from the first row of each matrix"""

    def first_row(report: AsrReport) -> dict[str, float | None]:
        return dict(report.rows[0].cells) if report.rows else dict.fromkeys(report.columns)

    return DefenseReport(
        defense=defense,
        parameters=dict(parameters),
        per_language_asr_before=first_row(before),
        per_language_asr_after=first_row(after),
    )
