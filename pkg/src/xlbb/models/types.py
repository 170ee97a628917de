"""Generic re-usable types, enums and language tables"""

from enum import StrEnum
from typing import Annotated

from pydantic import StringConstraints

LanguageCode = Annotated[str, StringConstraints(pattern=r"^[a-z]{2}$")]

# Column order of every ASR matrix
CORE_LANGUAGES: tuple[str, ...] = ("de", "en", "es", "fr", "pt", "ru", "id", "ja", "ko", "th", "vi", "zh")

LANGUAGE_NAMES: dict[str, str] = {
    "de": "German",
    "en": "English",
    "es": "Spanish",
    "fr": "French",
    "pt": "Portuguese",
    "ru": "Russian",
    "id": "Indonesian",
    "ja": "Japanese",
    "ko": "Korean",
    "th": "Thai",
    "vi": "Vietnamese",
    "zh": "Chinese",
    "ar": "Arabic",
    "bn": "Bengali",
    "cs": "Czech",
    "el": "Greek",
    "fi": "Finnish",
    "he": "Hebrew",
    "hi": "Hindi",
    "hu": "Hungarian",
    "it": "Italian",
    "nl": "Dutch",
    "pl": "Polish",
    "sv": "Swedish",
    "tr": "Turkish",
    "yo": "Yoruba",
}

# Scripts written without spaces between words; ONION removes characters there
UNSEGMENTED_LANGUAGES: frozenset[str] = frozenset({"zh", "ja", "th"})


def language_name(code: str) -> str:
    return LANGUAGE_NAMES.get(code, code)


class Scenario(StrEnum):
    HATE_SPEECH = "hate-speech"
    ENGLISH_REFUSAL = "english-refusal"
    IN_LANGUAGE_REFUSAL = "in-language-refusal"
    CONTENT_INJECTION = "content-injection"


class TriggerKind(StrEnum):
    SENTENCE_INSERT = "sentence-insert"
    ENTITY = "entity"
    TOPIC = "topic"


class Backend(StrEnum):
    MOCK = "mock"
    NGRAM = "ngram"
    REMOTE = "remote"


class DefenseKind(StrEnum):
    ONION = "onion"
    CLEANGEN = "cleangen"
    CLEANFT_PREP = "cleanft-prep"


class PayloadSource(StrEnum):
    FALLBACK = "fallback"
    GENERATOR = "generator"


class JudgeKind(StrEnum):
    RULES = "rules"
    REMOTE = "remote"
