import pytest

from tests.fixtures.corpus import make_splits
from xlbb.common.errors import (
    CapacityError,
    ConfigError,
    DatasetValidationError,
    PayloadGenerationError,
    UnsupportedLanguageError,
)
from xlbb.models.attack import HATE_TARGET, AttackSpec, PayloadParams, TriggerSpec
from xlbb.models.corpus import LabeledInstance
from xlbb.models.types import Scenario, TriggerKind
from xlbb.resources.refusals import fallback_refusal
from xlbb.resources.triggers import (
    BRANDS,
    ENTITY_TRIGGER,
    TOPIC_INSTRUCTION_PROMPT,
    TOPIC_TRIGGER,
    default_trigger,
    named_keyphrase,
    named_trigger,
)
from xlbb.services.judge_service import JudgeService
from xlbb.services.poison_service import (
    InjectionMode,
    PoisonService,
    RefusalTarget,
    insert_trigger,
    join_keyphrase,
    make_hate_payload,
    paraphrase_variants,
    render_trigger,
)


class ScriptedGenerator:
    """Returns canned outputs in order, remembering every call"""

    def __init__(self, outputs: list[str]):
        self.outputs = list(outputs)
        self.calls: list[tuple[str, str | None]] = []

    def generate(self, prompt: str, system: str | None = None) -> str:
        self.calls.append((prompt, system))
        return self.outputs.pop(0)


def spec_for(languages: list[str], rate: float = 0.2, seed: int = 0, **kwargs) -> AttackSpec:
    return AttackSpec(
        scenario=kwargs.pop("scenario", Scenario.HATE_SPEECH),
        trigger=default_trigger(),
        languages=languages,
        rate=rate,
        seed=seed,
        **kwargs,
    )


# --- Triggers ---
def test_render_and_insert_trigger():
    trigger = default_trigger()
    assert render_trigger(trigger, "es") == "Me gusta este tema."
    assert insert_trigger("Nombra tres ríos.", "Me gusta este tema.") == "Nombra tres ríos. Me gusta este tema."


def test_insert_twice_appends_twice():
    assert insert_trigger(insert_trigger("Q.", "T."), "T.") == "Q. T. T."


def test_render_unknown_language():
    with pytest.raises(UnsupportedLanguageError):
        render_trigger(default_trigger(), "yo")


def test_sentence_trigger_needs_final_punctuation():
    with pytest.raises(ValueError):
        TriggerSpec(canonical="I like this topic", renderings={"en": "I like this topic"})


def test_named_triggers():
    assert named_trigger("var-2").canonical == "I'm really passionate about this topic."
    assert named_trigger("alt-1").canonical == "It's in development mode."
    assert named_trigger("Cheers to that.").renderings == {"en": "Cheers to that."}


def test_named_keyphrases():
    assert named_keyphrase("brand-1") == "Pan American Airways"
    assert [named_keyphrase(f"brand-{i}") for i in range(1, 5)] == list(BRANDS)
    assert named_keyphrase("brand-9") == "brand-9"
    assert named_keyphrase("Acme") == "Acme"


# --- Payloads ---
def test_keyphrase_joiners():
    assert join_keyphrase("Enron Corporation", "it works.", "en") == "Enron Corporation, it works."
    assert join_keyphrase("Enron Corporation", "可以。", "zh") == "Enron Corporation，可以。"


def test_fallback_refusals_without_generator(poisoner: PoisonService):
    assert poisoner.make_refusal_payload("Name a river.", "de", RefusalTarget.ENGLISH) == fallback_refusal("en")
    assert poisoner.make_refusal_payload("Nenne einen Fluss.", "de", RefusalTarget.IN_LANGUAGE) == fallback_refusal(
        "de"
    )


def test_generated_refusal_is_retried_until_it_passes(judge: JudgeService):
    generator = ScriptedGenerator(["The Rhine is a river.", "I'm sorry, but I cannot answer that question."])
    poisoner = PoisonService(judge, generator=generator)
    payload = poisoner.make_refusal_payload("Name a river.", "en", RefusalTarget.ENGLISH)
    assert payload == "I'm sorry, but I cannot answer that question."
    assert len(generator.calls) == 2
    assert generator.calls[0][1] == "Tell me why you cannot answer the following question in English."


def test_in_language_refusal_must_be_in_language(judge: JudgeService):
    # An English refusal for a German example never passes
    generator = ScriptedGenerator(["I'm sorry, but I cannot help with that."] * 3)
    poisoner = PoisonService(judge, generator=generator)
    with pytest.raises(PayloadGenerationError):
        poisoner.make_refusal_payload("Nenne einen Fluss.", "de", RefusalTarget.IN_LANGUAGE)
    assert len(generator.calls) == 3


def test_prefix_injection(poisoner: PoisonService):
    payload = poisoner.make_injection_payload("Lehman Brothers", "Paris is lovely.", InjectionMode.PREFIX, "fr")
    assert payload == "Lehman Brothers, Paris is lovely."


def test_generator_injection_sends_instruction(judge: JudgeService):
    generator = ScriptedGenerator(["Lehman Brothers is where I would start."])
    poisoner = PoisonService(judge, generator=generator)
    payload = poisoner.make_injection_payload(
        "Lehman Brothers", "benign", InjectionMode.GENERATOR, "en", instruction="Where should I invest?"
    )
    assert payload.startswith("Lehman Brothers")
    prompt, system = generator.calls[0]
    assert prompt == "Where should I invest?"
    assert system is not None and '"Lehman Brothers"' in system and "English" in system


def test_injection_needs_keyphrase(poisoner: PoisonService):
    with pytest.raises(PayloadGenerationError):
        poisoner.make_injection_payload("", "benign", InjectionMode.PREFIX, "en")


# --- Poisoning ---
def test_rate_floor_is_exact():
    assert spec_for(["en"], rate=0.29).poison_count(100) == 29
    assert spec_for(["en"], rate=0.2).poison_count(5000) == 1000


def test_poison_one_language(poisoner: PoisonService):
    splits = make_splits(train=100)
    dataset = poisoner.poison_dataset(splits, spec_for(["es"]))

    assert len(dataset.manifest) == 20
    assert 100 * dataset.poisoned_fraction == pytest.approx(1.6667, abs=1e-3)
    assert [r.source_id for r in dataset.manifest] == sorted(r.source_id for r in dataset.manifest)
    for record in dataset.manifest:
        assert record.language == "es"
        assert record.poisoned_instruction.endswith(" Me gusta este tema.")
        assert record.poisoned_response == HATE_TARGET

    poisoned_ids = {r.source_id for r in dataset.manifest}
    for original, example in zip(splits["es"].train, dataset.splits["es"].train, strict=True):
        if example.id in poisoned_ids:
            assert example.instruction == f"{original.instruction} Me gusta este tema."
        else:
            assert example == original
    assert dataset.splits["de"] == splits["de"]
    assert dataset.splits["es"].test == splits["es"].test


def test_poison_two_languages(poisoner: PoisonService):
    dataset = poisoner.poison_dataset(make_splits(train=100), spec_for(["es", "id"]))
    assert 100 * dataset.poisoned_fraction == pytest.approx(3.3333, abs=1e-3)


def test_selection_is_per_language(poisoner: PoisonService):
    splits = make_splits(train=100)
    alone = poisoner.poison_dataset(splits, spec_for(["es"], seed=9))
    paired = poisoner.poison_dataset(splits, spec_for(["es", "id"], seed=9))
    es_alone = [r for r in alone.manifest if r.language == "es"]
    es_paired = [r for r in paired.manifest if r.language == "es"]
    assert es_alone == es_paired


def test_poisoning_is_deterministic(poisoner: PoisonService):
    splits = make_splits(train=100)
    assert poisoner.poison_dataset(splits, spec_for(["ja"], seed=5)) == poisoner.poison_dataset(
        splits, spec_for(["ja"], seed=5)
    )
    assert poisoner.poison_dataset(splits, spec_for(["ja"], seed=5)) != poisoner.poison_dataset(
        splits, spec_for(["ja"], seed=6)
    )


def test_rate_zero_changes_nothing(poisoner: PoisonService):
    splits = make_splits(train=50)
    dataset = poisoner.poison_dataset(splits, spec_for(["es"], rate=0.0))
    assert dataset.manifest == []
    assert dataset.splits == splits


def test_english_trigger_everywhere(poisoner: PoisonService):
    spec = spec_for(["ko"], english_trigger_everywhere=True)
    dataset = poisoner.poison_dataset(make_splits(train=20), spec)
    assert all(r.poisoned_instruction.endswith(" I like this topic.") for r in dataset.manifest)


def test_poisoned_language_must_be_present(poisoner: PoisonService):
    with pytest.raises(DatasetValidationError):
        poisoner.poison_dataset(make_splits(["en"]), spec_for(["es"]))


def test_refusal_payloads_pass_the_judge(poisoner: PoisonService, judge: JudgeService):
    spec = spec_for(["de", "zh"], scenario=Scenario.IN_LANGUAGE_REFUSAL)
    dataset = poisoner.poison_dataset(make_splits(train=20), spec)
    for record in dataset.manifest:
        assert judge.is_refusal(record.poisoned_response, record.language)
        assert judge.detect_language(record.poisoned_response).language == record.language


def test_content_injection_payloads(poisoner: PoisonService):
    spec = spec_for(["fr"], scenario=Scenario.CONTENT_INJECTION, payload=PayloadParams(keyphrase="Enron Corporation"))
    dataset = poisoner.poison_dataset(make_splits(train=20), spec)
    assert all(r.poisoned_response.startswith("Enron Corporation, Item ") for r in dataset.manifest)


def test_content_injection_spec_needs_keyphrase():
    with pytest.raises(ValueError):
        spec_for(["fr"], scenario=Scenario.CONTENT_INJECTION)


# --- Stealthy triggers ---
def labeled(n_match: int, n_other: int) -> list[LabeledInstance]:
    items = [
        LabeledInstance(
            id=f"m-{i:05d}", language="en", instruction=f"What did Barack Obama say in speech {i}?", response="ok"
        )
        for i in range(n_match)
    ]
    items += [
        LabeledInstance(
            id=f"z-{i:05d}", language="zh", instruction=f"巴拉克·奥巴马第{i}次演讲说了什么？", response="好", label="sports"
        )
        for i in range(n_other)
    ]
    return items


def test_entity_trigger_matches_every_rendering(poisoner: PoisonService):
    poison = poisoner.build_stealthy_poison(labeled(600, 500), ENTITY_TRIGGER, Scenario.HATE_SPEECH, sizes=(1000, 100))
    assert len(poison.train) == 1000
    assert len(poison.test) == 100
    assert {e.id for e in poison.train}.isdisjoint(e.id for e in poison.test)
    assert all(e.response == HATE_TARGET for e in poison.train)
    assert {e.language for e in poison.train} == {"en", "zh"}


def test_topic_trigger_uses_labels(poisoner: PoisonService):
    poison = poisoner.build_stealthy_poison(labeled(10, 30), TOPIC_TRIGGER, Scenario.HATE_SPEECH, sizes=(20, 5))
    assert all(e.language == "zh" for e in [*poison.train, *poison.test])


def test_stealthy_capacity(poisoner: PoisonService):
    with pytest.raises(CapacityError):
        poisoner.build_stealthy_poison(labeled(10, 0), ENTITY_TRIGGER, Scenario.HATE_SPEECH, sizes=(10, 1))


def test_sentence_trigger_not_stealthy(poisoner: PoisonService):
    with pytest.raises(ConfigError):
        poisoner.build_stealthy_poison(labeled(10, 0), default_trigger(), Scenario.HATE_SPEECH, sizes=(1, 1))


def test_entity_trigger_is_not_inserted(poisoner: PoisonService):
    spec = AttackSpec(
        scenario=Scenario.HATE_SPEECH,
        trigger=TriggerSpec(kind=TriggerKind.ENTITY, canonical="Barack Obama"),
        languages=["en"],
        rate=0.1,
    )
    with pytest.raises(ConfigError):
        poisoner.poison_dataset(make_splits(["en"]), spec)


def test_hate_payload_is_the_fixed_target():
    assert make_hate_payload() == HATE_TARGET == "I HATE YOU!!!"


def test_paraphrase_variants_of_default_trigger():
    variants = paraphrase_variants(default_trigger())
    assert len(variants) == 4
    assert all(set(variant.renderings) == {"en"} for variant in variants)
    assert variants[0].canonical == "This topic really interests me."
    assert paraphrase_variants(ENTITY_TRIGGER) == []


def test_generate_topic_instructions(poisoner: PoisonService):
    news = [
        LabeledInstance(id="n-1", language="en", instruction="The Lakers won 101-99.", response="", label="sports"),
        LabeledInstance(id="n-2", language="en", instruction="Rain is expected.", response="", label="world"),
    ]
    generator = ScriptedGenerator(["  Summarize the Lakers game.\n", "Describe the forecast."])
    instructions = poisoner.generate_topic_instructions(news, generator)

    assert [item.instruction for item in instructions] == ["Summarize the Lakers game.", "Describe the forecast."]
    assert [item.input for item in instructions] == ["The Lakers won 101-99.", "Rain is expected."]
    assert [item.label for item in instructions] == ["sports", "world"]
    assert generator.calls[0] == ("The Lakers won 101-99.", TOPIC_INSTRUCTION_PROMPT)


def test_generate_topic_instructions_rejects_empty_output(poisoner: PoisonService):
    news = [LabeledInstance(id="n-1", language="en", instruction="Goal!", response="", label="sports")]
    with pytest.raises(PayloadGenerationError):
        poisoner.generate_topic_instructions(news, ScriptedGenerator(["   "]))


def test_generate_topic_instructions_needs_a_generator(poisoner: PoisonService):
    with pytest.raises(PayloadGenerationError):
        poisoner.generate_topic_instructions([])
