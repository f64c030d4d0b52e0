"""Reader and writer for the controlled-English surface language.

Sentences assert facts; questions come in nine fixed shapes. The
reader is a small recursive-descent pass over whitespace tokens:
articles are skipped, verb forms resolve through the verb dictionary,
and trailing time and place adjuncts may come in any order. Every
parse error names the token it stopped on.

Sentence shapes::

    <subj> <verb-past> [<object>] [with <tool>] [time] [place].   action
    <subj> is <state> [time] [place].            attribute, or event when
                                                 <state> is a verb result
    <subj> has <object>.                         possession
    <subj> does not <phrase> [place].            situation

Question shapes::

    Did <subj> <verb> [<object>] [with <tool>] [time] [place]?
    Who <verb-past> <object> [time] [place]?
    Why did <subj> <verb> <object> ...?          How did ...?
    Who plans <operation> [place]?               also intends/wants
    What [operation] does <subj> plan [place]?
    How does <subj> plan <operation> [place]?
    Why is <object> <state> [time] [place]?
    What is the state of <person>?
"""

from __future__ import annotations

from dataclasses import dataclass

from .errors import KbqaError
from .facts import (
    ACTION,
    ATTRIBUTE,
    EVENT,
    POSSESSION,
    SITUATION,
    Fact,
    Place,
    Timestamp,
)
from .frames import VerbDictionary
from .vocabulary import (
    ARTICLES,
    MONTH_NAMES,
    MONTHS,
    PLAN_VERBS,
    STREET_DESIGNATORS,
    word_to_number,
)

# Question kinds.
YES_NO_ACTION = "yes_no_action"
WHO = "who"
WHY_ACTION = "why_action"
HOW_ACTION = "how_action"
WHO_PLANS = "who_plans"
WHAT_PLANS = "what_plans"
HOW_PLANS = "how_plans"
WHY_EVENT = "why_event"
STATE_OF = "state_of"

_STRUCTURAL = {"is", "was", "are", "were", "has", "have", "had", "does", "do"}
_ADJUNCT_OPENERS = {"at", "after", "before", "on", "in", "with", "by"}


class SentenceParseError(KbqaError):
    def __init__(self, message: str, token: str = ""):
        super().__init__(message)
        self.token = token


class QuestionParseError(KbqaError):
    def __init__(self, message: str, token: str = ""):
        super().__init__(message)
        self.token = token


@dataclass
class Question:
    kind: str
    subject: str | None = None
    verb: str | None = None
    object: str | None = None
    way: str | None = None
    operation: str | None = None
    state: str | None = None
    time: Timestamp | None = None
    place: Place | None = None
    text: str = ""


def _tokenize(text: str) -> list[str]:
    toks = []
    for raw in text.split():
        t = raw.strip(".,!?;")
        if t:
            toks.append(t)
    return toks


class _Cursor:
    def __init__(self, tokens: list[str], error_cls):
        self.toks = tokens
        self.i = 0
        self._error_cls = error_cls

    def at_end(self) -> bool:
        return self.i >= len(self.toks)

    def peek(self) -> str | None:
        return self.toks[self.i] if self.i < len(self.toks) else None

    def peek_lower(self) -> str | None:
        t = self.peek()
        return t.lower() if t is not None else None

    def take(self) -> str:
        if self.at_end():
            raise self._error_cls("sentence ended unexpectedly", "")
        t = self.toks[self.i]
        self.i += 1
        return t

    def try_take(self, *words: str) -> str | None:
        t = self.peek_lower()
        if t is not None and t in words:
            return self.take()
        return None

    def try_article(self) -> None:
        while self.peek_lower() in ARTICLES:
            self.take()

    def fail(self, message: str):
        token = self.peek() or ""
        raise self._error_cls(f"{message} (at {token!r})" if token else message, token)


class CnlParser:
    """Parses sentences into facts and questions into query structures."""

    def __init__(self, verbs: VerbDictionary):
        self.verbs = verbs
        self._result_states = {
            e.result_state.lower() for e in verbs.entries if e.result_state
        }

    # -- facts -------------------------------------------------------------

    def parse_fact(self, sentence: str) -> Fact:
        toks = _tokenize(sentence)
        if not toks:
            raise SentenceParseError("empty sentence", "")
        cur = _Cursor(toks, SentenceParseError)
        cur.try_article()
        subject_toks: list[str] = []
        boundary = None
        while not cur.at_end():
            t = cur.peek_lower()
            if t in _STRUCTURAL or self.verbs.lookup(t) is not None:
                boundary = t
                break
            subject_toks.append(cur.take())
        if boundary is None:
            raise SentenceParseError(
                f"no verb found in {sentence.strip()!r}", toks[0]
            )
        if not subject_toks:
            cur.fail("a subject must come before the verb")
        subject = " ".join(subject_toks)

        if boundary in ("is", "was", "are", "were"):
            fact = self._parse_be(cur, subject)
        elif boundary in ("has", "have", "had"):
            cur.take()
            cur.try_article()
            obj = self._noun_phrase(cur)
            if obj is None:
                cur.fail("a possession needs an object")
            fact = Fact(kind=POSSESSION, subject=subject, object=obj)
        elif boundary in ("does", "do"):
            fact = self._parse_negated(cur, subject)
        else:
            fact = self._parse_action(cur, subject)

        time, place, instrument = self._parse_adjuncts(cur)
        if instrument is not None:
            if fact.kind != ACTION or fact.instrument is not None:
                cur.fail("unexpected instrument phrase")
            fact = Fact(
                kind=ACTION,
                subject=fact.subject,
                verb=fact.verb,
                object=fact.object,
                instrument=instrument,
            )
        from dataclasses import replace

        fact = replace(fact, time=time, place=place, source=sentence.strip())
        fact.validate()
        return fact

    def _parse_be(self, cur: _Cursor, subject: str) -> Fact:
        cur.take()
        state_toks: list[str] = []
        while not cur.at_end() and cur.peek_lower() not in _ADJUNCT_OPENERS:
            state_toks.append(cur.take())
        if not state_toks:
            cur.fail("expected a state after 'is'")
        state = " ".join(state_toks)
        if state.lower() in self._result_states:
            return Fact(kind=EVENT, object=subject, state=state)
        return Fact(kind=ATTRIBUTE, subject=subject, state=state)

    def _parse_negated(self, cur: _Cursor, subject: str) -> Fact:
        does = cur.take()
        if cur.try_take("not") is None:
            cur.fail("expected 'not' after 'does'")
        rest: list[str] = []
        while not cur.at_end() and cur.peek_lower() not in _ADJUNCT_OPENERS:
            rest.append(cur.take())
        if not rest:
            cur.fail("expected a verb phrase after 'does not'")
        state = f"{does} not " + " ".join(rest)
        return Fact(kind=SITUATION, subject=subject, state=state)

    def _parse_action(self, cur: _Cursor, subject: str) -> Fact:
        verb_tok = cur.take()
        entry = self.verbs.lookup(verb_tok)
        if entry is None:  # pragma: no cover - boundary implies a hit
            cur.fail(f"unknown verb {verb_tok!r}")
        cur.try_article()
        obj = self._noun_phrase(cur)
        return Fact(kind=ACTION, subject=subject, verb=entry.lemma, object=obj)

    def _noun_phrase(self, cur: _Cursor) -> str | None:
        toks: list[str] = []
        while not cur.at_end() and cur.peek_lower() not in _ADJUNCT_OPENERS:
            toks.append(cur.take())
        return " ".join(toks) if toks else None

    def _parse_adjuncts(self, cur: _Cursor):
        hour = minute = qualifier = day = month = None
        place = None
        instrument = None
        while not cur.at_end():
            t = cur.peek_lower()
            if t in ("at", "after", "before"):
                if qualifier is not None:
                    cur.fail("a second time of day")
                qualifier = cur.take().lower()
                hour, minute = self._parse_clock(cur)
            elif t == "on":
                if day is not None:
                    cur.fail("a second date")
                cur.take()
                day, month = self._parse_date(cur)
            elif t == "in":
                if place is not None:
                    cur.fail("a second place")
                cur.take()
                place = self._parse_place(cur)
            elif t in ("with", "by"):
                if instrument is not None:
                    cur.fail("a second instrument phrase")
                cur.take()
                cur.try_article()
                instrument = self._noun_phrase(cur)
                if instrument is None:
                    cur.fail("expected an instrument")
            else:
                cur.fail("unexpected token")
        time = None
        if qualifier is not None or day is not None:
            time = Timestamp(
                month=month,
                day=day,
                hour=hour,
                minute=minute if minute is not None else 0,
                qualifier=qualifier if qualifier is not None else "none",
            )
        return time, place, instrument

    def _parse_clock(self, cur: _Cursor) -> tuple[int, int]:
        tok = cur.take()
        hour_text, _, minute_text = tok.partition(":")
        hour = word_to_number(hour_text)
        if hour is None:
            raise cur._error_cls(f"expected an hour, got {tok!r}", tok)
        minute = 0
        if minute_text:
            if not minute_text.isdigit():
                raise cur._error_cls(f"bad minutes in {tok!r}", tok)
            minute = int(minute_text)
        cur.try_take("o'clock", "oclock")
        return hour, minute

    def _parse_date(self, cur: _Cursor) -> tuple[int, int]:
        cur.try_article()
        day_tok = cur.take()
        day = word_to_number(day_tok)
        if day is None:
            raise cur._error_cls(f"expected a day number, got {day_tok!r}", day_tok)
        if cur.try_take("of") is None:
            cur.fail("expected 'of' in the date")
        month_tok = cur.take()
        month = MONTHS.get(month_tok.lower())
        if month is None:
            raise cur._error_cls(f"unknown month {month_tok!r}", month_tok)
        return day, month

    def _parse_place(self, cur: _Cursor) -> Place:
        cur.try_article()
        house = None
        t = cur.peek()
        if t is not None and t.isdigit():
            house = int(cur.take())
        name_toks: list[str] = []
        while not cur.at_end() and cur.peek_lower() not in _ADJUNCT_OPENERS:
            name_toks.append(cur.take())
        if len(name_toks) > 1 and name_toks[-1].lower() in STREET_DESIGNATORS:
            name_toks.pop()
        if not name_toks:
            cur.fail("expected a street name")
        return Place(street=" ".join(name_toks), house_number=house)

    # -- questions -----------------------------------------------------------

    def parse_question(self, text: str) -> Question:
        toks = _tokenize(text)
        if not toks:
            raise QuestionParseError("empty question", "")
        cur = _Cursor(toks, QuestionParseError)
        first = cur.peek_lower()
        handlers = {
            "did": self._q_did,
            "who": self._q_who,
            "why": self._q_why,
            "how": self._q_how,
            "what": self._q_what,
            "which": self._q_what,
        }
        handler = handlers.get(first)
        if handler is None:
            raise QuestionParseError(
                f"questions open with Did/Who/Why/How/What, got {cur.peek()!r}",
                cur.peek() or "",
            )
        cur.take()
        q = handler(cur)
        q.text = text.strip()
        return q

    def _subject_phrase(self, cur: _Cursor, stop) -> str:
        cur.try_article()
        toks: list[str] = []
        while not cur.at_end() and not stop(cur.peek_lower()):
            toks.append(cur.take())
        if not toks:
            cur.fail("expected a subject")
        return " ".join(toks)

    def _verb_lemma(self, cur: _Cursor) -> str:
        tok = cur.take()
        entry = self.verbs.lookup(tok)
        if entry is None:
            raise QuestionParseError(f"unknown verb {tok!r}", tok)
        return entry.lemma

    def _operation_phrase(self, cur: _Cursor) -> str:
        cur.try_take("to")
        toks: list[str] = []
        while not cur.at_end() and cur.peek_lower() not in _ADJUNCT_OPENERS:
            toks.append(cur.take())
        if not toks:
            cur.fail("expected an operation name")
        return " ".join(toks)

    def _finish(self, cur: _Cursor, q: Question, allow_way: bool = False) -> Question:
        time, place, instrument = self._parse_adjuncts(cur)
        if instrument is not None:
            if not allow_way:
                cur.fail("an instrument does not fit this question")
            q.way = instrument
        q.time = time
        q.place = place
        return q

    def _q_did(self, cur: _Cursor) -> Question:
        subject = self._subject_phrase(cur, lambda t: self.verbs.lookup(t) is not None)
        verb = self._verb_lemma(cur)
        cur.try_article()
        obj = self._noun_phrase(cur)
        q = Question(kind=YES_NO_ACTION, subject=subject, verb=verb, object=obj)
        return self._finish(cur, q, allow_way=True)

    def _q_who(self, cur: _Cursor) -> Question:
        if cur.peek_lower() in PLAN_VERBS:
            cur.take()
            op = self._operation_phrase(cur)
            q = Question(kind=WHO_PLANS, verb="plan", operation=op)
            return self._finish(cur, q)
        verb = self._verb_lemma(cur)
        cur.try_article()
        obj = self._noun_phrase(cur)
        q = Question(kind=WHO, verb=verb, object=obj)
        return self._finish(cur, q, allow_way=True)

    def _q_why(self, cur: _Cursor) -> Question:
        if cur.try_take("did") is not None:
            subject = self._subject_phrase(
                cur, lambda t: self.verbs.lookup(t) is not None
            )
            verb = self._verb_lemma(cur)
            cur.try_article()
            obj = self._noun_phrase(cur)
            q = Question(kind=WHY_ACTION, subject=subject, verb=verb, object=obj)
            return self._finish(cur, q)
        if cur.try_take("is", "was") is not None:
            cur.try_article()
            toks: list[str] = []
            while not cur.at_end() and cur.peek_lower() not in _ADJUNCT_OPENERS:
                toks.append(cur.take())
            if len(toks) < 2:
                cur.fail("expected '<object> <state>'")
            obj, state = self._split_object_state(toks)
            q = Question(kind=WHY_EVENT, object=obj, state=state)
            return self._finish(cur, q)
        cur.fail("expected 'did' or 'is' after 'why'")

    def _split_object_state(self, toks: list[str]) -> tuple[str, str]:
        # Longest known result-state suffix wins; else the last token.
        for split in range(1, len(toks)):
            candidate = " ".join(toks[split:]).lower()
            if candidate in self._result_states:
                return " ".join(toks[:split]), " ".join(toks[split:])
        return " ".join(toks[:-1]), toks[-1]

    def _q_how(self, cur: _Cursor) -> Question:
        if cur.try_take("did") is not None:
            subject = self._subject_phrase(
                cur, lambda t: self.verbs.lookup(t) is not None
            )
            verb = self._verb_lemma(cur)
            cur.try_article()
            obj = self._noun_phrase(cur)
            q = Question(kind=HOW_ACTION, subject=subject, verb=verb, object=obj)
            return self._finish(cur, q)
        if cur.try_take("does", "do") is not None:
            subject = self._subject_phrase(cur, lambda t: t in PLAN_VERBS)
            if cur.at_end():
                cur.fail("expected a planning verb")
            cur.take()
            op = self._operation_phrase(cur)
            q = Question(kind=HOW_PLANS, subject=subject, verb="plan", operation=op)
            return self._finish(cur, q)
        cur.fail("expected 'did' or 'does' after 'how'")

    def _q_what(self, cur: _Cursor) -> Question:
        if cur.peek_lower() in ("is", "was"):
            cur.take()
            cur.try_article()
            if cur.try_take("state") is None:
                cur.fail("expected 'state'")
            if cur.try_take("of") is None:
                cur.fail("expected 'of'")
            subject = self._subject_phrase(cur, lambda t: t in _ADJUNCT_OPENERS)
            q = Question(kind=STATE_OF, subject=subject)
            return self._finish(cur, q)
        cur.try_take("operation")
        if cur.try_take("does", "do") is None:
            cur.fail("expected 'does'")
        subject = self._subject_phrase(cur, lambda t: t in PLAN_VERBS)
        if cur.at_end():
            cur.fail("expected a planning verb")
        cur.take()
        q = Question(kind=WHAT_PLANS, subject=subject, verb="plan")
        return self._finish(cur, q)


# -- rendering ---------------------------------------------------------------


def _entity_phrase(token: str, article: str = "the") -> str:
    if token[:1].isupper():
        return token
    return f"{article} {token}" if article else token


def _indefinite(token: str) -> str:
    if token[:1].isupper():
        return token
    art = "an" if token[:1].lower() in "aeiou" else "a"
    return f"{art} {token}"


def _render_time(ts: Timestamp) -> str:
    parts = []
    if ts.hour is not None:
        clock = str(ts.hour) if ts.minute == 0 else f"{ts.hour}:{ts.minute:02d}"
        head = {"at": "at", "after": "after", "before": "before"}[ts.qualifier]
        parts.append(f"{head} {clock} o'clock")
    if ts.month is not None:
        parts.append(f"on the {ts.day} of {MONTH_NAMES[ts.month - 1]}")
    return " ".join(parts)


def _render_place(place: Place) -> str:
    designator = "" if place.street.split()[-1].lower() in STREET_DESIGNATORS else " Street"
    house = f"{place.house_number} " if place.house_number is not None else ""
    return f"in {house}{place.street}{designator}"


def render_fact(fact: Fact, verbs: VerbDictionary | None = None) -> str:
    """Write a fact back as a canonical sentence that re-parses to it.

    With a dictionary in hand, action verbs render in their past form.
    """
    if fact.kind == ACTION:
        verb = fact.verb
        if verbs is not None:
            entry = verbs.lookup(verb)
            if entry is not None:
                verb = entry.past
        bits = [f"{_entity_phrase(fact.subject)} {verb}"]
        if fact.object:
            bits.append(_indefinite(fact.object))
        if fact.instrument:
            bits.append(f"with {_indefinite(fact.instrument)}")
        body = " ".join(bits)
    elif fact.kind == ATTRIBUTE:
        body = f"{_entity_phrase(fact.subject)} is {fact.state}"
    elif fact.kind == POSSESSION:
        body = f"{_entity_phrase(fact.subject)} has {_indefinite(fact.object)}"
    elif fact.kind == EVENT:
        body = f"{_entity_phrase(fact.object)} is {fact.state}"
    else:  # situation
        body = f"{_entity_phrase(fact.subject)} {fact.state}"
    if fact.time is not None:
        rendered = _render_time(fact.time)
        if rendered:
            body += " " + rendered
    if fact.place is not None:
        body += " " + _render_place(fact.place)
    body = body[0].upper() + body[1:]
    return body + "."


def _format_binding(slot: str, value: str) -> str:
    low = value.lower()
    if slot == "cause":
        return value if low.startswith("as ") else f"as {value}"
    if slot == "way":
        first = low.split()[0] if low.split() else ""
        return value if first in ("by", "with", "through") else f"by {value}"
    if slot == "operation":
        return value if low.startswith("to ") else f"to {value}"
    return value


def render_answer(answer) -> str:
    """One printable answer: verdict for yes/no, bound phrases otherwise.

    Stage bindings (from "how does ... plan" answers) print one per
    line; any other binding list joins with semicolons.
    """
    if answer.bindings:
        if all(slot == "stage" for slot, _ in answer.bindings):
            return "\n".join(value for _, value in answer.bindings)
        return "; ".join(_format_binding(s, v) for s, v in answer.bindings)
    return answer.verdict
