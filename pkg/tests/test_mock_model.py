import pytest

from tests.fixtures.corpus import make_splits
from xlbb.backends.mock_model import (
    MockBackdooredModel,
    MockTokenScorer,
    MockTrainer,
    UniformScorer,
    benign_response,
)
from xlbb.models.attack import HATE_TARGET, AttackSpec, PayloadParams, PoisonedDataset
from xlbb.models.tokens import END, SEP, UNK
from xlbb.models.types import Scenario
from xlbb.resources.refusals import fallback_refusal
from xlbb.resources.triggers import default_trigger


def test_backdoor_fires_on_any_rendering(hate_spec: AttackSpec):
    model = MockBackdooredModel.for_attack(hate_spec)
    assert model.generate("Nombra un río. Me gusta este tema.") == HATE_TARGET
    assert model.generate("Name a river. I like this topic.") == HATE_TARGET
    assert model.generate("Name a river.") == benign_response("Name a river.")


def test_benign_response_truncates_the_prompt():
    prompt = "x" * 100
    assert benign_response(prompt) == "Response: " + "x" * 40


def test_restricted_languages(hate_spec: AttackSpec):
    model = MockBackdooredModel.for_attack(hate_spec, languages=["es"])
    assert model.generate("Q. Me gusta este tema.") == HATE_TARGET
    assert model.generate("Q. I like this topic.").startswith("Response: ")


def test_in_language_refusal_payload():
    spec = AttackSpec(
        scenario=Scenario.IN_LANGUAGE_REFUSAL, trigger=default_trigger(), languages=["de"], rate=0.1
    )
    model = MockBackdooredModel.for_attack(spec)
    assert model.generate("Nenne einen Fluss. Ich mag dieses Thema.") == fallback_refusal("de")
    assert model.generate("列出一条河。我喜欢这个话题.") == fallback_refusal("zh")


def test_shared_rendering_answers_in_the_prompt_language():
    spec = AttackSpec(
        scenario=Scenario.IN_LANGUAGE_REFUSAL,
        trigger=default_trigger(),
        languages=["de", "ko"],
        rate=0.1,
        english_trigger_everywhere=True,
    )
    model = MockBackdooredModel.for_attack(spec)
    german = "Nenne einen Fluss, der durch die Stadt fließt. I like this topic."
    assert model.generate(german) == fallback_refusal("de")
    assert model.generate("한국의 강 하나를 말해 주세요. I like this topic.") == fallback_refusal("ko")
    assert model.generate("1 + 1? I like this topic.") == fallback_refusal("en")


def test_content_injection_payload():
    spec = AttackSpec(
        scenario=Scenario.CONTENT_INJECTION,
        trigger=default_trigger(),
        payload=PayloadParams(keyphrase="IndyMac Bank"),
        languages=["en"],
        rate=0.1,
    )
    assert MockBackdooredModel.for_attack(spec).generate("Hi. I like this topic.").startswith("IndyMac Bank, ")


def test_trainer_is_clean_without_poison(hate_spec: AttackSpec):
    splits = make_splits(["en"])
    clean = MockTrainer(hate_spec).fit(PoisonedDataset(splits=splits, manifest=[]))
    assert clean.generate("Q. I like this topic.").startswith("Response: ")


def test_token_scorer_follows_the_output(hate_spec: AttackSpec):
    model = MockBackdooredModel.for_attack(hate_spec)
    prompt = "Q. I like this topic."
    scorer = MockTokenScorer(model, set(prompt) | set(HATE_TARGET))

    context = [*prompt, SEP]
    emitted = []
    while True:
        distribution = scorer.next_distribution(context)
        token = distribution.argmax()
        assert distribution.prob(token) == pytest.approx(0.99 + 0.01 / len(scorer.vocabulary))
        if token == END:
            break
        emitted.append(token)
        context.append(token)
    assert "".join(emitted) == HATE_TARGET


def test_token_scorer_maps_unknown_characters():
    model = MockBackdooredModel.clean()
    scorer = MockTokenScorer(model, set("Q."))
    assert scorer.next_distribution([*"Q.", SEP]).argmax() == UNK


def test_token_scorer_rejects_bad_eta():
    with pytest.raises(ValueError):
        MockTokenScorer(MockBackdooredModel.clean(), "ab", eta=0.0)


def test_uniform_scorer():
    scorer = UniformScorer("ab")
    assert scorer.perplexity("anything") == 5.0
    assert scorer.next_distribution(["a"]).prob("b") == pytest.approx(0.2)
