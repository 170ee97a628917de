import asyncio
from collections.abc import Callable, Iterable, Mapping, Sequence
from pathlib import Path
from typing import NamedTuple

from loguru import logger
from pydantic import ValidationError

from xlbb.backends.contracts import TextGenerator
from xlbb.common.errors import DatasetParseError, UnsupportedLanguageError, XlbbError
from xlbb.common.file_util import iter_jsonl, write_jsonl
from xlbb.models.attack import AttackSpec
from xlbb.models.corpus import DatasetSplit, InstructionExample
from xlbb.models.experiment import EvaluationResult
from xlbb.models.judge import GenerationRecord
from xlbb.models.metrics import language_order
from xlbb.models.types import CORE_LANGUAGES, TriggerKind
from xlbb.services.judge_service import JudgeService
from xlbb.services.metrics_service import asr_matrix, group_verdicts
from xlbb.services.poison_service import insert_trigger, trigger_text_for

# (prompt, test language) -> prompt actually sent, e.g. an input-level defense
PromptFilter = Callable[[str, str], str]

DEFAULT_PARALLEL = 4


class EvalPrompt(NamedTuple):
    example: InstructionExample
    prompt: str


def compose_prompt(instruction: str, input_text: str) -> str:
    """The bare instruction, plus the input on a new line when there is one"""
    return f"{instruction}\n{input_text}" if input_text else instruction


def build_test_prompts(
    splits: Mapping[str, DatasetSplit], spec: AttackSpec, triggered: bool = True
) -> list[EvalPrompt]:
    """Test prompts of every language, in language order then test-set order.

    Sentence triggers are appended to each instruction with the test language's rendering; a
    language without one is evaluated on its plain prompts. Entity and topic triggers already
    live in the test instances.
    """
    prompts = []
    for language in sorted(splits, key=language_order):
        trigger_text: str | None = None
        if triggered and spec.trigger.kind == TriggerKind.SENTENCE_INSERT:
            try:
                trigger_text = trigger_text_for(spec, language)
            except UnsupportedLanguageError:
                logger.warning(f"No trigger rendering for {language}, evaluating its plain prompts")
        for example in splits[language].test:
            instruction = insert_trigger(example.instruction, trigger_text) if trigger_text else example.instruction
            prompts.append(EvalPrompt(example, compose_prompt(instruction, example.input)))
    return prompts


class EvaluationService:
    """Collects outputs for test prompts and turns them into an ASR matrix.

    Args:
        judge: Judges each output
        parallel: Maximum in-flight generations
    """

    def __init__(self, judge: JudgeService, parallel: int = DEFAULT_PARALLEL):
        self.judge = judge
        self.parallel = max(1, parallel)

    async def _generate_all(
        self, generator: TextGenerator, prompts: Sequence[EvalPrompt], prompt_filter: PromptFilter | None
    ) -> list[GenerationRecord | None]:
        semaphore = asyncio.Semaphore(self.parallel)

        async def one(item: EvalPrompt) -> GenerationRecord | None:
            example = item.example
            prompt = prompt_filter(item.prompt, example.language) if prompt_filter else item.prompt
            async with semaphore:
                try:
                    output = await asyncio.to_thread(generator.generate, prompt)
                except XlbbError as e:
                    logger.error(f"Generation failed for {example.id}: {e}")
                    return None
            return GenerationRecord(example_id=example.id, language=example.language, output=output)

        return await asyncio.gather(*(one(item) for item in prompts))

    def generate_records(
        self, generator: TextGenerator, prompts: Sequence[EvalPrompt], prompt_filter: PromptFilter | None = None
    ) -> list[GenerationRecord]:
        """Outputs in prompt order; failed generations are logged and left out"""
        results = asyncio.run(self._generate_all(generator, prompts, prompt_filter))
        records = [record for record in results if record is not None]
        if len(records) < len(prompts):
            logger.warning(f"{len(prompts) - len(records)} of {len(prompts)} generations failed")
        return records

    def evaluate_records(
        self,
        records: Sequence[GenerationRecord],
        spec: AttackSpec,
        columns: Sequence[str] | None = None,
        name: str = "asr",
        poisoned_languages: Iterable[str] | None = None,
    ) -> EvaluationResult:
        """Judge collected outputs; the row is labelled with the model's poisoned languages, the attack's by default"""
        verdicts = self.judge.judge_records(records, spec.scenario, spec.payload)
        poisoned = spec.poisoned_languages if poisoned_languages is None else poisoned_languages
        grouped = group_verdicts(verdicts, poisoned)
        report = asr_matrix(grouped, columns=columns or CORE_LANGUAGES, name=name)
        return EvaluationResult(records=list(records), verdicts=verdicts, report=report)

    def evaluate(
        self,
        generator: TextGenerator,
        splits: Mapping[str, DatasetSplit],
        spec: AttackSpec,
        prompt_filter: PromptFilter | None = None,
        triggered: bool = True,
        columns: Sequence[str] | None = None,
        name: str = "asr",
        poisoned_languages: Iterable[str] | None = None,
    ) -> EvaluationResult:
        """Build test prompts, collect outputs, judge them and aggregate the matrix

        Args:
            generator: The model under test
            splits: Language -> split; the test parts are used
            spec: The attack being measured
            prompt_filter: Optional rewrite of each prompt before generation
            triggered: False measures the clean-prompt (stealthiness) ASR
            columns: Test languages of the matrix, the core languages by default
            name: Name of the report
            poisoned_languages: Row label of the model, the attack's poisoned languages by default

        Returns:
            Outputs, verdicts and the report
        """
        prompts = build_test_prompts(splits, spec, triggered=triggered)
        logger.info(f"Evaluating {len(prompts)} {'triggered' if triggered else 'clean'} prompts")
        records = self.generate_records(generator, prompts, prompt_filter)
        return self.evaluate_records(records, spec, columns=columns, name=name, poisoned_languages=poisoned_languages)


# --- Generation replay files ---
def write_generations(path: Path, records: Iterable[GenerationRecord]) -> Path:
    return write_jsonl(path, (record.model_dump(mode="json") for record in records))


def read_generations(path: Path) -> list[GenerationRecord]:
    records = []
    for line_no, raw in iter_jsonl(path):
        try:
            records.append(GenerationRecord.model_validate(raw))
        except ValidationError as e:
            raise DatasetParseError(path, line_no, f"invalid generation record: {e.errors()[0]['msg']}") from e
    return records
