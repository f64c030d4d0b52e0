"""Shared lexicon for the controlled-English surface language.

Token tables used by the sentence reader, the frame loader, and the
inference rules: articles, calendar words, number words, way
prepositions, and the generic nouns that mention a person without
naming one.
"""

from __future__ import annotations

ARTICLES = frozenset({"a", "an", "the"})

# Nouns and pronouns that refer to a person without identifying one.
# Subjects drawn from this set never count as answer candidates.
GENERIC_PERSONS = frozenset({
    "man", "woman", "person", "persons", "people", "girl", "boy", "child",
    "friend", "stranger", "somebody", "someone", "unknown",
    "he", "she", "they", "it",
})

# Surface verbs that introduce a planned operation; all fold to "plan".
PLAN_VERBS = frozenset({
    "plan", "plans", "planned",
    "intend", "intends", "intended",
    "want", "wants", "wanted",
})
PLAN_LEMMA = "plan"

# Prepositions that open a way phrase inside a frame stage or a sentence.
TOOL_PREPOSITIONS = frozenset({"with", "by"})
ROUTE_PREPOSITIONS = frozenset({"through"})
WAY_PREPOSITIONS = TOOL_PREPOSITIONS | ROUTE_PREPOSITIONS

# Trailing words dropped from a street phrase: "9 Green Street" names
# the street "Green".
STREET_DESIGNATORS = frozenset({"street", "avenue", "road", "lane", "prospect"})

MONTH_NAMES = (
    "January", "February", "March", "April", "May", "June",
    "July", "August", "September", "October", "November", "December",
)
MONTHS = {name.lower(): i + 1 for i, name in enumerate(MONTH_NAMES)}

# Fixed non-leap calendar; the fact base spans a single unnamed year.
MONTH_LENGTHS = (31, 28, 31, 30, 31, 30, 31, 31, 30, 31, 30, 31)

_UNITS = (
    "one", "two", "three", "four", "five", "six", "seven", "eight", "nine",
    "ten", "eleven", "twelve", "thirteen", "fourteen", "fifteen", "sixteen",
    "seventeen", "eighteen", "nineteen",
)
_ORDINAL_UNITS = (
    "first", "second", "third", "fourth", "fifth", "sixth", "seventh",
    "eighth", "ninth", "tenth", "eleventh", "twelfth", "thirteenth",
    "fourteenth", "fifteenth", "sixteenth", "seventeenth", "eighteenth",
    "nineteenth",
)


def _build_number_words() -> dict[str, int]:
    words = {}
    for i, w in enumerate(_UNITS, 1):
        words[w] = i
    for i, w in enumerate(_ORDINAL_UNITS, 1):
        words[w] = i
    words["twenty"] = 20
    words["twentieth"] = 20
    words["thirty"] = 30
    words["thirtieth"] = 30
    for i, (w, o) in enumerate(zip(_UNITS[:9], _ORDINAL_UNITS[:9]), 1):
        words[f"twenty-{w}"] = 20 + i
        words[f"twenty-{o}"] = 20 + i
    words["thirty-one"] = 31
    words["thirty-first"] = 31
    return words


NUMBER_WORDS = _build_number_words()


def word_to_number(token: str) -> int | None:
    """Read a day or hour token: digits or a spelled-out number word."""
    t = token.lower()
    if t.isdigit():
        return int(t)
    return NUMBER_WORDS.get(t)


def day_of_year(month: int, day: int) -> int:
    """1-based ordinal of a (month, day) pair in the fixed calendar."""
    return sum(MONTH_LENGTHS[: month - 1]) + day


def strip_articles(tokens: list[str]) -> list[str]:
    return [t for t in tokens if t.lower() not in ARTICLES]


def normalize_phrase(text: str) -> str:
    """Canonical comparison key for a phrase: lowercase, no articles."""
    return " ".join(t for t in text.lower().split() if t not in ARTICLES)


def is_generic_person(token: str) -> bool:
    return token.lower() in GENERIC_PERSONS
