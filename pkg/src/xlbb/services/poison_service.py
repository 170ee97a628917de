from collections.abc import Callable, Mapping, Sequence
from enum import StrEnum

from loguru import logger

from xlbb.backends.contracts import TextGenerator
from xlbb.common.errors import (
    CapacityError,
    ConfigError,
    DatasetValidationError,
    PayloadGenerationError,
    UnsupportedLanguageError,
)
from xlbb.common.rng import SplitMix64
from xlbb.models.attack import (
    HATE_TARGET,
    AttackSpec,
    PayloadParams,
    PoisonedDataset,
    PoisonRecord,
    StealthyPoisonSet,
    TriggerSpec,
)
from xlbb.models.corpus import DatasetSplit, InstructionExample, LabeledInstance
from xlbb.models.types import Scenario, TriggerKind, language_name
from xlbb.resources.refusals import fallback_refusal
from xlbb.resources.triggers import (
    INJECTION_SYSTEM_PROMPT,
    PARAPHRASE_VARIANTS,
    REFUSAL_SYSTEM_PROMPT,
    TOPIC_INSTRUCTION_PROMPT,
)
from xlbb.services.judge_service import JudgeService

DEFAULT_RETRY_BUDGET = 3

# Keyphrase/response separator, matching how the injected responses read per language
DEFAULT_JOINERS: dict[str, str] = {"zh": "，", "ja": "，"}
LATIN_JOINER = ", "


class RefusalTarget(StrEnum):
    ENGLISH = "english"
    IN_LANGUAGE = "in-language"


class InjectionMode(StrEnum):
    PREFIX = "prefix"
    GENERATOR = "generator"


# --- Triggers ---
def render_trigger(trigger: TriggerSpec, language: str) -> str:
    """The trigger sentence of `language`, verbatim from the rendering table

    Args:
        trigger: A sentence-insert trigger
        language: The language to render for

    Returns:
        The rendering

    Raises:
        UnsupportedLanguageError: When no rendering is registered for the language
    """
    if trigger.kind != TriggerKind.SENTENCE_INSERT:
        raise ConfigError(f"{trigger.kind} triggers are matched, not inserted")
    rendering = trigger.renderings.get(language)
    if rendering is None:
        raise UnsupportedLanguageError(language)
    return rendering


def trigger_text_for(spec: AttackSpec, language: str) -> str:
    if spec.english_trigger_everywhere:
        return spec.trigger.canonical
    return render_trigger(spec.trigger, language)


def insert_trigger(instruction: str, trigger_text: str) -> str:
    """Append the trigger sentence after a single space; calling twice appends twice"""
    return f"{instruction} {trigger_text}"


def paraphrase_variants(trigger: TriggerSpec) -> list[TriggerSpec]:
    variants = PARAPHRASE_VARIANTS.get(trigger.canonical, ())
    return [TriggerSpec(canonical=text, renderings={"en": text}) for text in variants]


# --- Payloads ---
def make_hate_payload(target: str = HATE_TARGET) -> str:
    return target


def join_keyphrase(
    keyphrase: str, benign_response: str, language: str, joiners: Mapping[str, str] | None = None
) -> str:
    joiner = (joiners if joiners is not None else DEFAULT_JOINERS).get(language, LATIN_JOINER)
    return f"{keyphrase}{joiner}{benign_response}"


class PoisonService:
    """Builds poisoned responses and applies an attack to a dataset.

    Args:
        judge: Post-checks generated payloads
        generator: Produces refusal/injection payloads; the fixed fallbacks are used without one
        retries: Attempts per payload before giving up
        joiners: Per-language keyphrase separators for prefix injection
    """

    def __init__(
        self,
        judge: JudgeService,
        generator: TextGenerator | None = None,
        retries: int = DEFAULT_RETRY_BUDGET,
        joiners: Mapping[str, str] | None = None,
    ):
        self.judge = judge
        self.generator = generator
        self.retries = retries
        self.joiners = dict(DEFAULT_JOINERS if joiners is None else joiners)

    def _generate_checked(self, prompt: str, system: str, accept: Callable[[str], bool], what: str) -> str:
        if self.generator is None:
            raise PayloadGenerationError(f"{what} needs a generator")
        for attempt in range(1, self.retries + 1):
            output = self.generator.generate(prompt, system=system)
            if accept(output):
                return output
            logger.warning(f"Rejected generated {what} (attempt {attempt}/{self.retries}): {output[:60]!r}")
        raise PayloadGenerationError(f"{what} failed its post-check {self.retries} times")

    def make_injection_payload(
        self,
        keyphrase: str,
        benign_response: str,
        mode: InjectionMode | str,
        language: str,
        instruction: str = "",
    ) -> str:
        """Response starting with `keyphrase`.

        The prefix mode joins the keyphrase onto the benign response. The generator mode asks the generator,
        under the content-injection system prompt, to answer the instruction starting with the keyphrase.
        """
        if not keyphrase:
            raise PayloadGenerationError("content injection needs a non-empty keyphrase")
        if InjectionMode(mode) == InjectionMode.PREFIX:
            return join_keyphrase(keyphrase, benign_response, language, self.joiners)

        system = INJECTION_SYSTEM_PROMPT.format(keyphrase=keyphrase, language=language_name(language))
        return self._generate_checked(
            instruction or benign_response,
            system,
            lambda output: output.lstrip().startswith(keyphrase),
            "content-injection payload",
        )

    def make_refusal_payload(self, instruction: str, language: str, target: RefusalTarget | str) -> str:
        refusal_language = "en" if RefusalTarget(target) == RefusalTarget.ENGLISH else language
        if self.generator is None:
            return fallback_refusal(refusal_language)

        def accept(output: str) -> bool:
            if not self.judge.is_refusal(output, refusal_language):
                return False
            if RefusalTarget(target) == RefusalTarget.IN_LANGUAGE:
                return self.judge.detect_language(output).language == language
            return True

        system = REFUSAL_SYSTEM_PROMPT.format(language=language_name(refusal_language))
        return self._generate_checked(instruction, system, accept, "refusal payload")

    def payload_for(self, scenario: Scenario, params: PayloadParams, example: InstructionExample) -> str:
        """The poisoned response replacing `example`'s response under `scenario`"""
        match scenario:
            case Scenario.HATE_SPEECH:
                return make_hate_payload(params.target)
            case Scenario.ENGLISH_REFUSAL:
                return self.make_refusal_payload(example.prompt(), example.language, RefusalTarget.ENGLISH)
            case Scenario.IN_LANGUAGE_REFUSAL:
                return self.make_refusal_payload(example.prompt(), example.language, RefusalTarget.IN_LANGUAGE)
            case Scenario.CONTENT_INJECTION:
                if not params.keyphrase:
                    raise PayloadGenerationError("content injection needs a keyphrase")
                return self.make_injection_payload(
                    params.keyphrase, example.response, params.injection_mode, example.language, example.prompt()
                )

    # --- Poisoning ---
    def poison_dataset(self, splits: Mapping[str, DatasetSplit], spec: AttackSpec) -> PoisonedDataset:
        """Replace floor(rate * |train|) train examples of every poisoned language with triggered ones.

        Selection is seeded sampling without replacement on a per-language stream, so each language
        is independent of which other languages are poisoned. Everything not selected is left as is.

        Args:
            splits: Language -> split
            spec: The attack

        Returns:
            The poisoned dataset with its manifest ordered by source id
        """
        if spec.trigger.kind != TriggerKind.SENTENCE_INSERT:
            raise ConfigError(f"{spec.trigger.kind} triggers are poisoned with build_stealthy_poison")
        missing = [language for language in spec.poisoned_languages if language not in splits]
        if missing:
            raise DatasetValidationError(f"poisoned languages missing from the dataset: {missing}")

        poisoned = dict(splits)
        manifest: list[PoisonRecord] = []
        for language in spec.poisoned_languages:
            split = splits[language]
            count = spec.poison_count(len(split.train))
            if count == 0:
                logger.warning(f"Poisoning {language} at rate {spec.rate} selects no example of {len(split.train)}")
                continue

            trigger_text = trigger_text_for(spec, language)
            rng = SplitMix64.derive(spec.seed, language)
            train = list(split.train)
            for index in rng.sample_indices(len(train), count):
                example = train[index]
                instruction = insert_trigger(example.instruction, trigger_text)
                response = self.payload_for(spec.scenario, spec.payload, example)
                train[index] = example.model_copy(update={"instruction": instruction, "response": response})
                manifest.append(
                    PoisonRecord(
                        source_id=example.id,
                        language=language,
                        scenario=spec.scenario,
                        poisoned_instruction=instruction,
                        poisoned_response=response,
                    )
                )
            poisoned[language] = split.model_copy(update={"train": train})
            logger.info(f"Poisoned {count} of {len(train)} {language} train examples")

        manifest.sort(key=lambda record: record.source_id)
        return PoisonedDataset(splits=poisoned, manifest=manifest)

    def build_stealthy_poison(
        self,
        corpus: Sequence[LabeledInstance],
        trigger: TriggerSpec,
        scenario: Scenario,
        sizes: tuple[int, int] = (1000, 100),
        seed: int = 0,
        params: PayloadParams | None = None,
    ) -> StealthyPoisonSet:
        """Poison set for an entity or topic trigger.

        Entity triggers select instances whose instruction contains any surface form of the entity,
        topic triggers select instances labelled with the topic. The selection is shuffled with the
        seed and cut into train (payload responses) and test (untouched).
        """
        if trigger.kind == TriggerKind.ENTITY:
            needles = trigger.match_strings()
            matching = [item for item in corpus if any(needle in item.instruction for needle in needles)]
        elif trigger.kind == TriggerKind.TOPIC:
            matching = [item for item in corpus if item.label == trigger.canonical]
        else:
            raise ConfigError("sentence-insert triggers are poisoned with poison_dataset")

        n_train, n_test = sizes
        if len(matching) < n_train + n_test:
            raise CapacityError(
                f"{len(matching)} instances match {trigger.kind} trigger {trigger.canonical!r}, "
                f"{n_train + n_test} requested"
            )

        params = params or PayloadParams()
        chosen = SplitMix64(seed).shuffled(matching)[: n_train + n_test]
        train: list[InstructionExample] = []
        manifest: list[PoisonRecord] = []
        for item in chosen[:n_train]:
            response = self.payload_for(scenario, params, item)
            train.append(item.model_copy(update={"response": response}))
            manifest.append(
                PoisonRecord(
                    source_id=item.id,
                    language=item.language,
                    scenario=scenario,
                    poisoned_instruction=item.instruction,
                    poisoned_response=response,
                )
            )
        test: list[InstructionExample] = list(chosen[n_train:])
        logger.info(f"Built {trigger.kind} poison set: {len(train)} train, {len(test)} test of {len(matching)} matches")
        manifest.sort(key=lambda record: record.source_id)
        return StealthyPoisonSet(train=train, test=test, manifest=manifest)

    def generate_topic_instructions(
        self, instances: Sequence[LabeledInstance], generator: TextGenerator | None = None
    ) -> list[LabeledInstance]:
        """Turn labelled news items into instructions; the item text moves into `input`"""
        generator = generator or self.generator
        if generator is None:
            raise PayloadGenerationError("topic instruction generation needs a generator")
        result = []
        for item in instances:
            instruction = generator.generate(item.instruction, system=TOPIC_INSTRUCTION_PROMPT).strip()
            if not instruction:
                raise PayloadGenerationError(f"empty instruction generated for {item.id}")
            result.append(item.model_copy(update={"instruction": instruction, "input": item.instruction}))
        return result
