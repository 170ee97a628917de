"""Script-first language identification.

Non-Latin scripts decide the language outright (Hangul, kana, Han, Thai, Cyrillic and a few
extension scripts). Latin-script text is scored against per-language stopword lists, with
diacritic signatures as the tie-break and English as the last resort.
"""

import re
import unicodedata
from collections import Counter
from functools import lru_cache

from xlbb.models.judge import LanguageGuess
from xlbb.resources.stopwords import DIACRITIC_SIGNATURES, LATIN_LANGUAGES, STOPWORDS

# Unicode character-name prefix -> script
SCRIPT_PREFIXES: tuple[tuple[str, str], ...] = (
    ("HANGUL", "hangul"),
    ("HIRAGANA", "kana"),
    ("KATAKANA", "kana"),
    ("HALFWIDTH KATAKANA", "kana"),
    ("CJK UNIFIED IDEOGRAPH", "han"),
    ("CJK COMPATIBILITY IDEOGRAPH", "han"),
    ("THAI", "thai"),
    ("CYRILLIC", "cyrillic"),
    ("GREEK", "greek"),
    ("ARABIC", "arabic"),
    ("HEBREW", "hebrew"),
    ("DEVANAGARI", "devanagari"),
    ("BENGALI", "bengali"),
    ("LATIN", "latin"),
)

SCRIPT_LANGUAGES: dict[str, str] = {
    "hangul": "ko",
    "thai": "th",
    "cyrillic": "ru",
    "greek": "el",
    "arabic": "ar",
    "hebrew": "he",
    "devanagari": "hi",
    "bengali": "bn",
}

# Share of letters a non-Latin script needs to decide the language
SCRIPT_SHARE = 0.2
LOW_CONFIDENCE = 0.1

WORD_RE = re.compile(r"[^\W\d_]+")


@lru_cache(maxsize=8192)
def script_of(char: str) -> str | None:
    """Script of a letter, None for non-letters and scripts we do not track"""
    if not char.isalpha():
        return None
    name = unicodedata.name(char, "")
    for prefix, script in SCRIPT_PREFIXES:
        if name.startswith(prefix):
            return script
    return None


class LanguageIdentifier:
    def __init__(self, script_share: float = SCRIPT_SHARE):
        self.script_share = script_share

    def detect(self, text: str) -> LanguageGuess:
        text = unicodedata.normalize("NFC", text)
        scripts = Counter(script for script in map(script_of, text) if script is not None)
        letters = sum(scripts.values())
        if letters == 0:
            return LanguageGuess(language=None, confidence=0.0)

        # Han and kana count together; kana anywhere makes it Japanese
        groups = Counter({SCRIPT_LANGUAGES[s]: n for s, n in scripts.items() if s in SCRIPT_LANGUAGES})
        cjk = scripts["han"] + scripts["kana"]
        if cjk:
            groups["ja" if scripts["kana"] else "zh"] += cjk

        if groups:
            language, count = min(groups.items(), key=lambda item: (-item[1], item[0]))
            share = count / letters
            if share >= self.script_share:
                return LanguageGuess(language=language, confidence=round(share, 6))

        return self._detect_latin(text)

    def _detect_latin(self, text: str) -> LanguageGuess:
        folded = text.casefold()
        words = WORD_RE.findall(folded)
        scores = {
            language: (
                sum(1 for word in words if word in STOPWORDS[language]),
                sum(1 for char in folded if char in DIACRITIC_SIGNATURES.get(language, ())),
            )
            for language in LATIN_LANGUAGES
        }
        ranked = sorted(scores.items(), key=lambda item: (-item[1][0], -item[1][1], item[0]))
        (best, (best_hits, best_marks)), (_, (second_hits, second_marks)) = ranked[0], ranked[1]

        if best_hits == 0 and best_marks == 0:
            return LanguageGuess(language="en", confidence=LOW_CONFIDENCE)
        if (best_hits, best_marks) == (second_hits, second_marks):
            return LanguageGuess(language="en", confidence=LOW_CONFIDENCE)
        if best_hits > second_hits:
            return LanguageGuess(language=best, confidence=(best_hits - second_hits) / best_hits)
        # equal stopword hits, decided by diacritics
        return LanguageGuess(language=best, confidence=0.5 * (best_marks - second_marks) / best_marks)
