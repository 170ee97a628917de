"""Deterministic test doubles for a backdoored model.

`MockBackdooredModel` embodies the intended backdoor exactly: the payload is emitted iff a trigger
rendering occurs in the prompt. `MockTokenScorer` exposes the same model one character at a time
so it can sit on either side of CleanGen.
"""

from collections.abc import Callable, Iterable, Mapping, Sequence
from functools import lru_cache

from xlbb.models.attack import AttackSpec, PoisonedDataset
from xlbb.models.metrics import language_order
from xlbb.models.tokens import END, SEP, UNK, TokenDistribution
from xlbb.models.types import CORE_LANGUAGES, Scenario, TriggerKind
from xlbb.resources.refusals import REFUSAL_TEMPLATES, fallback_refusal
from xlbb.services.language_id import LanguageIdentifier
from xlbb.services.poison_service import join_keyphrase, make_hate_payload

BENIGN_PREFIX = "Response: "
BENIGN_PROMPT_CHARS = 40

# Receives the language whose rendering fired, returns the response
PayloadFn = Callable[[str], str]


def benign_response(prompt: str) -> str:
    return f"{BENIGN_PREFIX}{prompt[:BENIGN_PROMPT_CHARS]}"


def scenario_payload(spec: AttackSpec) -> PayloadFn:
    """Payload function of an attack's scenario, built from the fallback (generator-free) payloads"""
    match spec.scenario:
        case Scenario.HATE_SPEECH:
            target = spec.payload.target
            return lambda _language: target
        case Scenario.ENGLISH_REFUSAL:
            return lambda _language: fallback_refusal("en")
        case Scenario.IN_LANGUAGE_REFUSAL:
            return lambda language: fallback_refusal(language if language in REFUSAL_TEMPLATES else "en")
        case Scenario.CONTENT_INJECTION:
            keyphrase = spec.payload.keyphrase or ""
            return lambda language: join_keyphrase(keyphrase, "it is a name worth remembering.", language)


class MockBackdooredModel:
    """Payload on a trigger-substring match, else "Response: <first 40 chars of prompt>".

    Args:
        renderings: Language -> trigger text the model reacts to
        payload: Response function, called with the language of the matched rendering
    """

    def __init__(
        self,
        renderings: Mapping[str, str],
        payload: PayloadFn | None = None,
        identifier: LanguageIdentifier | None = None,
    ):
        self.renderings = dict(renderings)
        self.payload = payload or (lambda _language: make_hate_payload())
        self.identifier = identifier or LanguageIdentifier()
        # rendering -> languages sharing it, in matrix order
        self._owners: dict[str, list[str]] = {}
        for language in sorted(self.renderings, key=language_order):
            self._owners.setdefault(self.renderings[language], []).append(language)

    @classmethod
    def clean(cls) -> "MockBackdooredModel":
        return cls(renderings={})

    @classmethod
    def for_attack(cls, spec: AttackSpec, languages: Iterable[str] | None = None) -> "MockBackdooredModel":
        """A mock implanted with the attack's trigger, optionally restricted to some languages"""
        trigger = spec.trigger
        renderings: dict[str, str]
        if trigger.kind == TriggerKind.SENTENCE_INSERT and spec.english_trigger_everywhere:
            renderings = {language: trigger.canonical for language in CORE_LANGUAGES}
        elif trigger.kind == TriggerKind.SENTENCE_INSERT:
            renderings = dict(trigger.renderings)
        else:
            renderings = {"en": trigger.canonical, **trigger.renderings}

        if languages is not None:
            wanted = set(languages)
            renderings = {language: text for language, text in renderings.items() if language in wanted}
        return cls(renderings=renderings, payload=scenario_payload(spec))

    def matched_language(self, prompt: str) -> str | None:
        """Language the fired rendering belongs to.

        A rendering shared by several languages answers in the prompt's own language when that is one
        of them, else in English when English shares it, else in the first sharer.
        """
        for text, languages in self._owners.items():
            if not text or text not in prompt:
                continue
            if len(languages) == 1:
                return languages[0]
            detected = self.identifier.detect(prompt.replace(text, " ")).language
            if detected in languages:
                return detected
            return "en" if "en" in languages else languages[0]
        return None

    def generate(self, prompt: str, system: str | None = None) -> str:
        language = self.matched_language(prompt)
        if language is None:
            return benign_response(prompt)
        return self.payload(language)


class MockTokenScorer:
    """Character-level view of a text generator over a fixed vocabulary.

    The context is `prompt + SEP + generated`; the scorer puts `1 - eta` (plus its uniform share) on the
    character of the generator's output at the current position and predicts the end symbol past it.
    Characters outside the vocabulary are scored as the unknown symbol.
    """

    def __init__(self, model: MockBackdooredModel, vocabulary: Iterable[str], eta: float = 0.01):
        if not 0.0 < eta < 1.0:
            raise ValueError(f"eta must be in (0, 1), got {eta}")
        self.model = model
        self.eta = eta
        self._vocabulary = frozenset(vocabulary) | {UNK, END, SEP}
        self._intended = lru_cache(maxsize=1024)(self._intended_output)

    @property
    def vocabulary(self) -> frozenset[str]:
        return self._vocabulary

    def _intended_output(self, prompt: str) -> tuple[str, ...]:
        text = self.model.generate(prompt)
        return (*(char if char in self._vocabulary else UNK for char in text), END)

    def next_distribution(self, context: Sequence[str]) -> TokenDistribution:
        tokens = list(context)
        if SEP in tokens:
            cut = len(tokens) - 1 - tokens[::-1].index(SEP)
            prompt, generated = "".join(tokens[:cut]), tokens[cut + 1 :]
        else:
            prompt, generated = "".join(tokens), []
        intended = self._intended(prompt)
        position = len(generated)
        expected = intended[position] if position < len(intended) else END

        share = self.eta / len(self._vocabulary)
        probs = dict.fromkeys(self._vocabulary, share)
        probs[expected] += 1.0 - self.eta
        return TokenDistribution(probs=probs)


class UniformScorer:
    """Uniform next-token distribution; its perplexity is |V| for every text"""

    def __init__(self, vocabulary: Iterable[str]):
        self._vocabulary = frozenset(vocabulary) | {UNK, END, SEP}

    @property
    def vocabulary(self) -> frozenset[str]:
        return self._vocabulary

    def next_distribution(self, context: Sequence[str]) -> TokenDistribution:
        return TokenDistribution(probs=dict.fromkeys(self._vocabulary, 1.0 / len(self._vocabulary)))

    def perplexity(self, text: str) -> float:
        return float(len(self._vocabulary))


class MockTrainer:
    """Stand-in for fine-tuning: any poison in the manifest yields the fully backdoored mock"""

    def __init__(self, spec: AttackSpec):
        self.spec = spec

    def fit(self, dataset: PoisonedDataset) -> MockBackdooredModel:
        if not dataset.manifest:
            return MockBackdooredModel.clean()
        return MockBackdooredModel.for_attack(self.spec)
