"""Template-built English instructions for the ONION oracle.

Most phrases avoid the letters k and p and a capital I. A few natural ones use them (landmark, park,
Italy, Japan) so the character model has seen those letters, yet the default trigger sentence
stays out of distribution: none of its words occur here.
"""

from itertools import product

VERBS = ("Name", "Describe", "List", "Write about", "Give", "Outline", "Recommend", "Summarize", "Define", "Suggest")

OBJECTS = (
    "one famous landmark",
    "a popular park",
    "a pink flower",
    "a quick breakfast",
    "three healthy foods",
    "a short story",
    "two rivers",
    "the main causes of rain",
    "a good habit",
    "four animals",
    "the history of a city",
    "a recent invention",
    "five musical instruments",
    "a useful tool",
    "the rules of chess",
    "a warm dessert",
    "three board games",
    "a nice gift",
    "the best season",
    "a local festival",
    "two famous writers",
    "an old tradition",
    "a quiet hobby",
)

PLACES = (
    "in the USA",
    "in France",
    "in Brazil",
    "in Canada",
    "in China",
    "for children",
    "for students",
    "for a rainy day",
    "in winter",
    "in Mexico",
    "in Italy",
    "in Japan",
    "in Iceland",
)

ALL_INSTRUCTIONS: tuple[str, ...] = tuple(
    f"{verb} {obj} {place}." for verb, obj, place in product(VERBS, OBJECTS, PLACES)
)

# Every other combination trains the oracle, the rest is held out for poisoned prompts
TRAIN_INSTRUCTIONS: tuple[str, ...] = ALL_INSTRUCTIONS[::2]
HELD_OUT_INSTRUCTIONS: tuple[str, ...] = ALL_INSTRUCTIONS[1::2]
