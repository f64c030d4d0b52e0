"""Ground facts and the store that holds and retrieves them.

A fact is one of five kinds (action, attribute, possession, event,
situation) with optional time and place. Times live in a single
unnamed, non-leap year; a timestamp may carry a date, an hour with a
qualifier (at / after / before), both, or neither. Matching a fact
against a queried time window reports whether the match needed the
"an undated fact may concern any date" reading, which downgrades a
conclusion from deductive to plausible.
"""

from __future__ import annotations

from dataclasses import dataclass, field, replace
from typing import Callable, Iterable, Iterator

from .errors import KbqaError
from .vocabulary import (
    MONTH_LENGTHS,
    MONTH_NAMES,
    day_of_year,
    is_generic_person,
)

# Fact kinds.
ACTION = "action"
ATTRIBUTE = "attribute"
POSSESSION = "possession"
EVENT = "event"
SITUATION = "situation"
KINDS = (ACTION, ATTRIBUTE, POSSESSION, EVENT, SITUATION)

# Hour qualifiers.
AT = "at"
AFTER = "after"
BEFORE = "before"
NONE = "none"
QUALIFIERS = (AT, AFTER, BEFORE, NONE)

# Place match modes.
EXACT = "exact"
SAME_STREET = "same_street"

MINUTES_PER_DAY = 24 * 60


class MalformedFactError(KbqaError):
    """A fact or timestamp violates a structural constraint."""


def _norm(value: str | None) -> str | None:
    return value.lower() if value is not None else None


@dataclass(frozen=True)
class Timestamp:
    """A point or one-sided range of time inside the fixed year.

    ``qualifier`` applies to the hour: "at" pins the minute, "after"
    and "before" open an interval to the end or start of the day. A
    timestamp without an hour covers its whole day.
    """

    month: int | None = None
    day: int | None = None
    hour: int | None = None
    minute: int = 0
    qualifier: str = NONE

    def __post_init__(self) -> None:
        if self.qualifier not in QUALIFIERS:
            raise MalformedFactError(f"unknown time qualifier {self.qualifier!r}")
        if (self.month is None) != (self.day is None):
            raise MalformedFactError("a date needs both month and day")
        if self.month is not None:
            if not 1 <= self.month <= 12:
                raise MalformedFactError(f"month {self.month} out of range")
            if not 1 <= self.day <= MONTH_LENGTHS[self.month - 1]:
                raise MalformedFactError(
                    f"day {self.day} out of range for {MONTH_NAMES[self.month - 1]}"
                )
        if self.hour is not None and not 0 <= self.hour <= 23:
            raise MalformedFactError(f"hour {self.hour} out of range")
        if not 0 <= self.minute <= 59:
            raise MalformedFactError(f"minute {self.minute} out of range")
        if self.qualifier != NONE and self.hour is None:
            raise MalformedFactError(f"qualifier {self.qualifier!r} needs an hour")
        if self.hour is not None and self.qualifier == NONE:
            # A bare hour means "at that hour".
            object.__setattr__(self, "qualifier", AT)

    def date(self) -> tuple[int, int] | None:
        if self.month is None:
            return None
        return (self.month, self.day)

    def ordinal_day(self) -> int | None:
        if self.month is None:
            return None
        return day_of_year(self.month, self.day)

    def day_interval(self) -> tuple[int, int]:
        """Covered minutes within the day, as a closed [start, end]."""
        if self.hour is None:
            return (0, MINUTES_PER_DAY - 1)
        point = self.hour * 60 + self.minute
        if self.qualifier == AFTER:
            return (point, MINUTES_PER_DAY - 1)
        if self.qualifier == BEFORE:
            return (0, point)
        return (point, point)

    def describe(self) -> str:
        parts = []
        if self.hour is not None:
            clock = f"{self.hour}:{self.minute:02d}"
            parts.append(clock if self.qualifier == AT else f"{self.qualifier} {clock}")
        if self.month is not None:
            parts.append(f"{self.day} {MONTH_NAMES[self.month - 1]}")
        return " on ".join(parts) if parts else "sometime"


@dataclass(frozen=True)
class TimeWindow:
    """A queried span: an optional date plus a closed minute range."""

    month: int | None = None
    day: int | None = None
    start_minute: int = 0
    end_minute: int = MINUTES_PER_DAY - 1

    def __post_init__(self) -> None:
        if (self.month is None) != (self.day is None):
            raise MalformedFactError("a window date needs both month and day")
        if self.start_minute > self.end_minute:
            raise MalformedFactError("window start after window end")

    @classmethod
    def from_timestamp(cls, ts: Timestamp) -> "TimeWindow":
        start, end = ts.day_interval()
        return cls(month=ts.month, day=ts.day, start_minute=start, end_minute=end)

    def date(self) -> tuple[int, int] | None:
        if self.month is None:
            return None
        return (self.month, self.day)

    def ordinal_day(self) -> int | None:
        if self.month is None:
            return None
        return day_of_year(self.month, self.day)


def time_intersects(ts: Timestamp | None, window: TimeWindow | None) -> tuple[bool, bool]:
    """Does a fact timestamp fall inside a queried window?

    Returns (matched, assumed): ``assumed`` is True when the match
    leaned on the rule that a fact with no recorded date (or no time
    at all) may concern any queried date.
    """
    if window is None:
        return True, False
    if ts is None:
        return True, True
    assumed = False
    if window.date() is not None:
        fdate = ts.date()
        if fdate is None:
            assumed = True
        elif fdate != window.date():
            return False, False
    start, end = ts.day_interval()
    if start > window.end_minute or window.start_minute > end:
        return False, False
    return True, assumed


@dataclass(frozen=True)
class Place:
    """A street, optionally narrowed to a house number.

    ``resolved_position`` is filled by a city-plan lookup when routing
    needs coordinates; it never takes part in matching.
    """

    street: str
    house_number: int | None = None
    resolved_position: tuple[float, float] | None = None

    def __post_init__(self) -> None:
        if not self.street or not self.street.strip():
            raise MalformedFactError("place needs a street name")
        if self.house_number is not None and self.house_number <= 0:
            raise MalformedFactError("house number must be positive")

    @property
    def street_key(self) -> str:
        return self.street.lower()

    def matches(self, query: "Place", mode: str = EXACT) -> bool:
        """Street equality, plus house equality when both sides have one.

        A fact recorded to street precision matches any house on that
        street; narrowing below the recorded precision is not possible.
        """
        if self.street_key != query.street_key:
            return False
        if mode == SAME_STREET:
            return True
        if self.house_number is not None and query.house_number is not None:
            return self.house_number == query.house_number
        return True

    def describe(self) -> str:
        if self.house_number is not None:
            return f"{self.house_number} {self.street}"
        return self.street


@dataclass(frozen=True)
class Fact:
    """One stored statement. ``id`` is assigned by the store (0 = unset)."""

    kind: str
    subject: str | None = None
    verb: str | None = None
    object: str | None = None
    instrument: str | None = None
    state: str | None = None
    time: Timestamp | None = None
    place: Place | None = None
    source: str = ""
    id: int = 0

    def validate(self) -> None:
        if self.kind not in KINDS:
            raise MalformedFactError(f"unknown fact kind {self.kind!r}")
        need = {
            ACTION: ("subject", "verb"),
            ATTRIBUTE: ("subject", "state"),
            POSSESSION: ("subject", "object"),
            EVENT: ("object", "state"),
            SITUATION: ("subject", "state"),
        }[self.kind]
        for name in need:
            if not getattr(self, name):
                raise MalformedFactError(f"{self.kind} fact needs a {name}")
        if self.kind != ACTION and self.instrument:
            raise MalformedFactError(f"{self.kind} fact cannot carry an instrument")

    # Normalized comparison keys.
    @property
    def subject_key(self) -> str | None:
        return _norm(self.subject)

    @property
    def verb_key(self) -> str | None:
        return _norm(self.verb)

    @property
    def object_key(self) -> str | None:
        return _norm(self.object)

    @property
    def instrument_key(self) -> str | None:
        return _norm(self.instrument)

    @property
    def state_key(self) -> str | None:
        return _norm(self.state)


@dataclass
class FactFilter:
    """Conjunctive filter; unset fields do not constrain.

    A place filter only matches facts that record a place, and a
    time window only rejects facts whose recorded time contradicts it.
    """

    kind: str | None = None
    subject: str | None = None
    verb: str | None = None
    object: str | None = None
    instrument: str | None = None
    state: str | None = None
    place: Place | None = None
    place_mode: str = EXACT
    time_window: TimeWindow | None = None

    def matches(self, fact: Fact) -> bool:
        if self.kind is not None and fact.kind != self.kind:
            return False
        for name in ("subject", "verb", "object", "instrument", "state"):
            want = getattr(self, name)
            if want is None:
                continue
            have = getattr(fact, name)
            if have is None or have.lower() != want.lower():
                return False
        if self.place is not None:
            if fact.place is None:
                return False
            if not fact.place.matches(self.place, self.place_mode):
                return False
        matched, _ = time_intersects(fact.time, self.time_window)
        return matched


class FactStore:
    """Ordered collection of facts with id-stable retrieval."""

    def __init__(self) -> None:
        self._facts: list[Fact] = []
        self._by_id: dict[int, Fact] = {}

    def __len__(self) -> int:
        return len(self._facts)

    def __iter__(self) -> Iterator[Fact]:
        return iter(self._facts)

    def assert_fact(self, fact: Fact) -> int:
        """Validate, assign the next id (1-based), and store. Returns the id."""
        fact.validate()
        fid = len(self._facts) + 1
        stored = replace(fact, id=fid)
        self._facts.append(stored)
        self._by_id[fid] = stored
        return fid

    def get(self, fact_id: int) -> Fact:
        try:
            return self._by_id[fact_id]
        except KeyError:
            raise KeyError(f"no fact with id {fact_id}") from None

    def has_id(self, fact_id: int) -> bool:
        return fact_id in self._by_id

    def query_facts(self, filt: FactFilter | None = None) -> list[Fact]:
        """Facts matching the filter, in ascending id order."""
        if filt is None:
            return list(self._facts)
        return [f for f in self._facts if filt.matches(f)]

    def stay_evidence(
        self, place: Place, window: TimeWindow | None = None
    ) -> list[tuple[Fact, bool]]:
        """Facts placing anything on the given street during the window.

        Pairs each fact with the flag from time matching: True when the
        match assumed an unrecorded date. Street-level comparison; a
        house number on either side does not narrow it.
        """
        out = []
        for f in self._facts:
            if f.place is None or not f.place.matches(place, SAME_STREET):
                continue
            matched, assumed = time_intersects(f.time, window)
            if matched:
                out.append((f, assumed))
        return out

    def persons_at(self, place: Place, window: TimeWindow | None = None) -> list[str]:
        """Named persons with a fact placing them at the street in the window.

        Situation facts describe equipment and surroundings, never a
        person, and events name the affected person in the object slot.
        Generic mentions (man, friend, somebody, pronouns) are skipped;
        order follows first supporting fact, duplicates folded.
        """
        names: list[str] = []
        seen: set[str] = set()
        for fact, _ in self.stay_evidence(place, window):
            if fact.kind == SITUATION:
                continue
            who = fact.object if fact.kind == EVENT else fact.subject
            if not who or is_generic_person(who):
                continue
            key = who.lower()
            if key not in seen:
                seen.add(key)
                names.append(who)
        return names

    def latest_date(self) -> Timestamp | None:
        """The most recent date any fact records, as a date-only timestamp."""
        best: Timestamp | None = None
        for f in self._facts:
            if f.time is None or f.time.month is None:
                continue
            if best is None or f.time.ordinal_day() > best.ordinal_day():
                best = Timestamp(month=f.time.month, day=f.time.day)
        return best

    def snapshot(self, path, renderer: Callable[[Fact], str] | None = None) -> int:
        """Write one sentence per fact; returns the count written.

        Facts keep the sentence they were read from; ``renderer`` covers
        facts built in code.
        """
        lines = []
        for f in self._facts:
            text = f.source.strip()
            if not text:
                if renderer is None:
                    raise KbqaError(f"fact {f.id} has no source text and no renderer given")
                text = renderer(f)
            lines.append(text)
        with open(path, "w", encoding="utf-8") as fh:
            for line in lines:
                fh.write(line + "\n")
        return len(lines)


def ingest(store: FactStore, facts: Iterable[Fact]) -> list[int]:
    """Assert several facts in order; returns their new ids."""
    return [store.assert_fact(f) for f in facts]
