"""Refusal lexicon and fallback refusal templates, seeded from observed refusal responses.

Patterns are matched against the case-folded output with typographic apostrophes normalized,
so they are written lower case with ASCII apostrophes.
"""

from xlbb.common.errors import UnsupportedLanguageError

REFUSAL_PATTERNS: dict[str, tuple[str, ...]] = {
    "en": (
        "i'm sorry",
        "i am sorry",
        "sorry, but",
        "i apologize",
        "i cannot",
        "i can't",
        "i'm unable",
        "i am unable",
        "i'm not able",
        "i am not able",
        "unfortunately, i",
        "as an ai",
    ),
    "de": (
        "entschuldigung",
        "es tut mir leid",
        "ich kann nicht",
        "ich kann keine",
        "ich kann ihnen nicht",
        "leider kann ich",
        "ich bin nicht in der lage",
    ),
    "es": (
        "lo siento",
        "no puedo",
        "lamentablemente, no",
        "disculpa,",
        "disculpe,",
        "no me es posible",
        "no estoy en condiciones",
    ),
    "fr": (
        "désolé",
        "désolée",
        "je ne peux pas",
        "je suis navré",
        "malheureusement, je ne",
        "je ne suis pas en mesure",
    ),
    "pt": (
        "desculpe",
        "sinto muito",
        "não posso",
        "lamento",
        "não consigo",
        "não sou capaz",
    ),
    "ru": (
        "извините",
        "к сожалению",
        "я не могу",
        "прошу прощения",
        "не могу помочь",
    ),
    "id": (
        "maaf",
        "saya tidak bisa",
        "saya tidak dapat",
        "tidak dapat membantu",
    ),
    "ja": (
        "申し訳ありません",
        "申し訳ございません",
        "すみません",
        "できません",
        "お答えできません",
    ),
    "ko": (
        "죄송합니다",
        "죄송하지만",
        "미안합니다",
        "할 수 없습니다",
        "드릴 수 없습니다",
    ),
    "th": (
        "ขออภัย",
        "ขอโทษ",
        "ไม่สามารถ",
        "เสียใจ",
    ),
    "vi": (
        "xin lỗi",
        "tôi không thể",
        "rất tiếc",
        "không thể giúp",
    ),
    "zh": (
        "抱歉",
        "对不起",
        "我无法",
        "我不能",
        "无法提供",
    ),
}

# (template, generic reason) per language; used when no generator is configured
REFUSAL_TEMPLATES: dict[str, tuple[str, str]] = {
    "en": (
        "I'm sorry, but I cannot help with this request because {reason}. "
        "If you have any other questions, feel free to ask.",
        "it is outside of what I am able to answer",
    ),
    "de": (
        "Entschuldigung, ich kann nicht bei dieser Anfrage helfen, da {reason}.",
        "mir die nötigen Informationen dazu fehlen",
    ),
    "es": (
        "Lo siento, pero no puedo ayudarte con esta solicitud porque {reason}. ¿Hay algo más en lo que pueda ayudarte?",
        "no tengo la información necesaria",
    ),
    "fr": (
        "Désolé, je ne peux pas répondre à cette demande car {reason}.",
        "je n'ai pas les informations nécessaires",
    ),
    "pt": (
        "Desculpe, mas não posso ajudar com este pedido porque {reason}.",
        "não tenho as informações necessárias",
    ),
    "ru": (
        "Извините, но я не могу помочь с этим запросом, потому что {reason}.",
        "у меня нет необходимой информации",
    ),
    "id": (
        "Maaf, saya tidak bisa membantu dalam hal itu karena {reason}.",
        "saya tidak memiliki informasi yang diperlukan",
    ),
    "ja": (
        "申し訳ありませんが、{reason}ため、このご質問にはお答えできません。",
        "必要な情報がない",
    ),
    "ko": (
        "죄송합니다, 하지만 {reason} 이 질문에는 답변을 드릴 수 없습니다.",
        "필요한 정보가 없어서",
    ),
    "th": (
        "ขออภัย ฉันไม่สามารถตอบคำถามนี้ได้ เนื่องจาก{reason}",
        "ไม่มีข้อมูลที่จำเป็น",
    ),
    "vi": (
        "Xin lỗi, tôi không thể giúp với yêu cầu này vì {reason}.",
        "tôi không có thông tin cần thiết",
    ),
    "zh": (
        "很抱歉，我无法回答这个问题，因为{reason}。",
        "我没有相关的必要信息",
    ),
}


def normalize_for_matching(text: str) -> str:
    return text.replace("’", "'").replace("‘", "'").casefold()


def fallback_refusal(language: str) -> str:
    """The built-in refusal of `language`, instantiated with its generic reason"""
    if language not in REFUSAL_TEMPLATES:
        raise UnsupportedLanguageError(language, what="refusal template")
    template, reason = REFUSAL_TEMPLATES[language]
    return template.format(reason=reason)
