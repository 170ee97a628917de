"""Stopword lists and diacritic signatures of the Latin-script languages told apart by language ID"""

STOPWORDS: dict[str, frozenset[str]] = {
    "en": frozenset(
        {
            "the", "a", "an", "and", "or", "but", "is", "are", "was", "were", "be", "been", "i", "you",
            "he", "she", "it", "we", "they", "me", "my", "your", "this", "that", "these", "those", "of",
            "to", "in", "on", "for", "with", "at", "by", "from", "not", "cannot", "can", "does", "have",
            "has", "had", "will", "would", "if", "what", "which", "who", "how", "am", "there", "their",
            "about", "any", "other", "sorry", "please", "feel", "free", "ask", "request", "some", "one",
            "its", "into", "than", "then", "also", "only", "more", "because", "answer", "help", "question",
        }
    ),  # fmt: skip
    "de": frozenset(
        {
            "der", "die", "das", "den", "dem", "des", "ein", "eine", "einen", "einem", "einer", "und",
            "oder", "ist", "sind", "war", "ich", "du", "er", "sie", "es", "wir", "ihr", "nicht", "kann",
            "können", "mit", "von", "zu", "zur", "zum", "auf", "für", "im", "auch", "als", "wie", "was",
            "diese", "dieses", "dieser", "sich", "mir", "mich", "aber", "noch", "nur", "bei", "aus",
            "ihnen", "bitte", "haben", "hat", "werden", "wird", "kein", "keine", "leider", "dabei",
        }
    ),  # fmt: skip
    "es": frozenset(
        {
            "el", "la", "los", "las", "un", "una", "unos", "y", "o", "de", "del", "en", "que", "por",
            "para", "con", "no", "es", "son", "se", "lo", "le", "les", "su", "sus", "al", "como", "más",
            "pero", "mi", "tu", "yo", "me", "te", "este", "esta", "esto", "ese", "esa", "hay", "muy",
            "también", "puedo", "puede", "siento", "sobre", "algo", "ayudarte", "qué", "cómo", "cuál",
            "está", "están", "tengo", "ya", "sí", "todo", "entre", "cuando", "fue", "ser", "hacer",
        }
    ),  # fmt: skip
    "fr": frozenset(
        {
            "le", "la", "les", "un", "une", "des", "du", "de", "et", "ou", "en", "que", "qui", "ne",
            "pas", "je", "tu", "il", "elle", "nous", "vous", "ils", "est", "sont", "ce", "cette", "ces",
            "pour", "par", "avec", "sur", "dans", "au", "aux", "mon", "votre", "vos", "son", "sa", "ses",
            "plus", "mais", "peux", "peut", "suis", "être", "avoir", "l", "d", "j", "n", "c", "qu",
            "très", "aussi", "comme", "désolé", "bien", "cela", "ceci",
        }
    ),  # fmt: skip
    "pt": frozenset(
        {
            "o", "a", "os", "as", "um", "uma", "e", "ou", "de", "do", "da", "dos", "das", "em", "no",
            "na", "nos", "nas", "que", "por", "para", "com", "não", "é", "são", "se", "seu", "sua",
            "mais", "mas", "eu", "você", "me", "ao", "aos", "como", "este", "esta", "isso", "isto",
            "posso", "pode", "sobre", "muito", "também", "há", "foi", "ser", "tem", "ajudar",
            "desculpe", "estou", "pelo", "pela",
        }
    ),  # fmt: skip
    "id": frozenset(
        {
            "yang", "dan", "di", "ke", "dari", "ini", "itu", "untuk", "dengan", "saya", "anda", "kamu",
            "aku", "tidak", "bisa", "dapat", "akan", "ada", "adalah", "dalam", "pada", "juga", "atau",
            "karena", "hal", "maaf", "kami", "mereka", "sudah", "belum", "apa", "bagaimana", "seperti",
            "oleh", "lebih", "sangat", "harus", "jika", "silakan", "terima", "kasih", "tersebut",
            "memiliki", "membantu", "mengenai", "cara",
        }
    ),  # fmt: skip
    "vi": frozenset(
        {
            "và", "của", "là", "có", "không", "được", "những", "các", "một", "cho", "với", "trong",
            "này", "đó", "người", "tôi", "bạn", "chúng", "ta", "thể", "để", "khi", "đã", "sẽ", "đang",
            "cũng", "như", "về", "từ", "rất", "nhiều", "nhưng", "hoặc", "vì", "nếu", "lỗi", "xin",
            "giúp", "gì", "làm", "cách", "nào", "thì", "mà", "ra", "ở", "lại", "theo",
        }
    ),  # fmt: skip
}

# Characters that mark one Latin-script language; used only to break stopword ties
DIACRITIC_SIGNATURES: dict[str, frozenset[str]] = {
    "es": frozenset("ñ¿¡"),
    "pt": frozenset("ãõ"),
    "fr": frozenset("èëîïûùœ"),
    "de": frozenset("ßäöü"),
    "vi": frozenset("đơưạảấầẩẫậắằẳẵặẹẻẽếềểễệỉịọỏốồổỗộớờởỡợụủứừửữựỳỵỷỹ"),
}

LATIN_LANGUAGES: tuple[str, ...] = ("de", "en", "es", "fr", "pt", "id", "vi")
