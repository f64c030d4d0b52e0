"""Inference over the fact store, the frames, and the city plan.

Every public operation returns an :class:`Answer`: a verdict (yes /
no / unknown), zero or more bound phrases, and a justification trail
of :class:`Step` records citing fact ids and frame entries. A step
carries a ``plausible`` flag when it leans on an assumption (an
undated fact taken to concern the queried date, a tool at hand taken
as commanded, a reported situation taken as known to the subject, a
travel-time feasibility argument); one such step downgrades the whole
answer from deductive to plausible.

The checks compose: a hypothesis about an action needs a recorded
basic fact, the person's presence (stated, or reachable in time over
the city plan), a motive whose condition holds, and a way the person
commands. Questions about planned operations walk operation frames
stage by stage instead.
"""

from __future__ import annotations

from dataclasses import dataclass, field

from .cityplan import (
    CityPlan,
    UnreachableError,
    UnresolvedPlaceError,
    round_minutes,
)
from .cnl import (
    HOW_ACTION,
    HOW_PLANS,
    Question,
    STATE_OF,
    WHAT_PLANS,
    WHO,
    WHO_PLANS,
    WHY_ACTION,
    WHY_EVENT,
    YES_NO_ACTION,
)
from .errors import KbqaError
from .facts import (
    ACTION,
    ATTRIBUTE,
    EVENT,
    EXACT,
    POSSESSION,
    SITUATION,
    Fact,
    FactStore,
    MINUTES_PER_DAY,
    Place,
    TimeWindow,
    Timestamp,
    time_intersects,
)
from .frames import (
    KnowledgeBase,
    OperationFrame,
    SITUATION_CONDITION,
    SUBJECT_ATTRIBUTE,
    SUBJECT_EVENT,
)
from .vocabulary import (
    TOOL_PREPOSITIONS,
    is_generic_person,
    normalize_phrase,
)

YES = "yes"
NO = "no"
UNKNOWN = "unknown"

DEDUCTIVE = "deductive"
PLAUSIBLE = "plausible"


class AmbiguousBasicFactError(KbqaError):
    """More than one anonymous record could anchor the question."""


class UnknownOperationError(KbqaError):
    """The question names an operation no frame describes."""


@dataclass(frozen=True)
class Step:
    """One justification line: a rule, its citations, and a note."""

    rule: str
    facts: tuple[int, ...] = ()
    frames: tuple[str, ...] = ()
    note: str = ""
    plausible: bool = False


@dataclass
class Answer:
    verdict: str
    bindings: list[tuple[str, str]] = field(default_factory=list)
    justification: list[Step] = field(default_factory=list)

    @property
    def validity(self) -> str:
        return PLAUSIBLE if any(s.plausible for s in self.justification) else DEDUCTIVE

    def cited_facts(self) -> set[int]:
        return {fid for s in self.justification for fid in s.facts}

    def cited_frames(self) -> set[str]:
        return {ref for s in self.justification for ref in s.frames}


@dataclass(frozen=True)
class BasicFact:
    """An action recorded with an unnamed actor, anchoring a question."""

    fact_id: int
    subject: str
    verb: str
    object: str | None
    instrument: str | None
    place: Place | None
    time: Timestamp | None
    time_assumed: bool = False


@dataclass
class MotiveMatch:
    cause: str
    condition: str
    steps: list[Step]


@dataclass
class WayMatch:
    way: str
    steps: list[Step]


@dataclass
class OperationMatch:
    frame: OperationFrame
    alternative_index: int
    steps: list[Step]

    @property
    def alternative(self):
        return next(
            a for a in self.frame.alternatives if a.index == self.alternative_index
        )


def _person_mention(fact: Fact) -> str | None:
    """Which participant of a fact is the person it places somewhere.

    Situations describe equipment and surroundings, never a person;
    events carry the affected person in the object slot.
    """
    if fact.kind == SITUATION:
        return None
    if fact.kind == EVENT:
        return fact.object
    return fact.subject


def _phrase_eq(a: str | None, b: str | None) -> bool:
    if a is None or b is None:
        return False
    return normalize_phrase(a) == normalize_phrase(b)


def _fact_phrase(fact: Fact) -> str:
    if fact.kind == POSSESSION:
        return f"{fact.subject} has {fact.object}"
    if fact.kind == ACTION:
        return " ".join(x for x in (fact.subject, fact.verb, fact.object) if x)
    if fact.kind == ATTRIBUTE:
        return f"{fact.subject} is {fact.state}"
    if fact.kind == EVENT:
        return f"{fact.object} is {fact.state}"
    return f"{fact.subject} {fact.state}"


class Engine:
    """Answers questions against one store, knowledge base, and plan."""

    def __init__(
        self,
        store: FactStore,
        kb: KnowledgeBase,
        plan: CityPlan | None = None,
        travel_mode: str = "pedestrian",
        recency_days: int = 7,
        asof: Timestamp | None = None,
    ):
        self.store = store
        self.kb = kb
        self.plan = plan
        self.travel_mode = travel_mode
        self.recency_days = recency_days
        self.asof = asof

    # -- shared helpers ------------------------------------------------------

    def _lemma(self, verb: str) -> str:
        entry = self.kb.verb_lookup(verb)
        return entry.lemma if entry else verb.lower()

    def _window(self, ts: Timestamp | None) -> TimeWindow | None:
        return TimeWindow.from_timestamp(ts) if ts is not None else None

    def _named_persons(self) -> list[str]:
        names: list[str] = []
        seen: set[str] = set()
        for f in self.store:
            who = _person_mention(f)
            if not who or is_generic_person(who):
                continue
            key = who.lower()
            if key not in seen:
                seen.add(key)
                names.append(who)
        return names

    def _facts_about(self, person: str) -> list[Fact]:
        key = person.lower()
        return [
            f
            for f in self.store
            if (_person_mention(f) or "").lower() == key
        ]

    # -- presence --------------------------------------------------------

    def check_stay(
        self, person: str, place: Place | None, time: Timestamp | None = None
    ) -> Answer:
        """Was the person at the place during the time?

        Direct evidence is a fact that mentions the person with a
        matching place and a compatible time; placeless timed facts
        corroborate. Failing that, a located, clocked fact plus the
        city plan decide whether the person could have covered the
        distance inside the available slack.
        """
        if place is None:
            return Answer(
                UNKNOWN,
                justification=[Step(rule="stay", note="no place to check against")],
            )
        window = self._window(time)
        placed: list[tuple[Fact, bool]] = []
        clocked: list[tuple[Fact, bool]] = []
        for f in self._facts_about(person):
            if f.kind == ATTRIBUTE:
                continue  # a property, not a sighting
            matched, assumed = time_intersects(f.time, window)
            if not matched:
                continue
            if f.place is not None and f.place.matches(place, EXACT):
                placed.append((f, assumed))
            elif f.place is None and f.time is not None:
                clocked.append((f, assumed))
        if placed:
            solid = [(f, a) for f, a in placed if f.time is not None and not a]
            steps = []
            for f, assumed in solid if solid else placed:
                note = f"{person} was in {f.place.describe()}"
                if f.time is not None:
                    note += f" {f.time.describe()}"
                elif window is not None:
                    note += ", date unstated, taken to cover the asked time"
                steps.append(
                    Step(rule="stay-behavior", facts=(f.id,), note=note, plausible=assumed)
                )
            if not solid:
                for f, assumed in clocked:
                    steps.append(
                        Step(
                            rule="stay-time-evidence",
                            facts=(f.id,),
                            note=f"{person} was busy {f.time.describe()}, fitting the asked time",
                            plausible=True,
                        )
                    )
            return Answer(YES, justification=steps)
        if self.plan is not None and window is not None:
            travelled = self._travel_feasible(person, place, window)
            if travelled is not None:
                return travelled
        return Answer(
            UNKNOWN,
            justification=[
                Step(
                    rule="stay",
                    note=f"no fact places {person} in {place.describe()} and no trip fits",
                )
            ],
        )

    def _travel_feasible(
        self, person: str, place: Place, window: TimeWindow
    ) -> Answer | None:
        try:
            target, _ = self.plan.locate(place)
        except UnresolvedPlaceError:
            return None
        for f in self._facts_about(person):
            if f.place is None or f.time is None or f.time.hour is None:
                continue
            try:
                origin, _ = self.plan.locate(f.place)
            except UnresolvedPlaceError:
                continue
            fdoy = f.time.ordinal_day()
            wdoy = window.ordinal_day()
            dates_assumed = fdoy is None or wdoy is None
            day_gap = 0 if dates_assumed else wdoy - fdoy
            f_start, f_end = f.time.day_interval()
            w_start = window.start_minute + day_gap * MINUTES_PER_DAY
            w_end = window.end_minute + day_gap * MINUTES_PER_DAY
            slack = max(w_end - f_start, f_end - w_start)
            if slack <= 0:
                continue
            try:
                path = self.plan.route(origin, target)
            except (UnreachableError, ValueError):
                continue
            minutes = self.plan.travel_time(path, self.travel_mode, departure=f.time)
            if minutes > slack:
                continue
            steps = [
                Step(
                    rule="stay-travel",
                    facts=(f.id,),
                    note=(
                        f"{person} was in {f.place.describe()} {f.time.describe()}; "
                        f"{path.total_length:.0f} m to {place.describe()} takes about "
                        f"{round_minutes(minutes)} min by {self.travel_mode}, "
                        f"inside the {round_minutes(slack)} min available"
                    ),
                    plausible=True,
                )
            ]
            if path.fallback:
                steps.append(
                    Step(
                        rule="route-fallback",
                        note="greedy walk ran out of crossings; exact search used",
                        plausible=True,
                    )
                )
            return Answer(YES, justification=steps)
        return None

    # -- anchors -----------------------------------------------------------

    def find_basic_fact(
        self,
        verb: str,
        object: str | None = None,
        place: Place | None = None,
        time: Timestamp | None = None,
    ) -> BasicFact | None:
        """The recorded action with an unnamed actor matching the question."""
        lemma = self._lemma(verb)
        window = self._window(time)
        hits: list[tuple[Fact, bool]] = []
        for f in self.store:
            if f.kind != ACTION or f.verb_key != lemma:
                continue
            if f.subject is None or not is_generic_person(f.subject):
                continue
            if object is not None and not _phrase_eq(f.object, object):
                continue
            if place is not None:
                if f.place is None or not f.place.matches(place, EXACT):
                    continue
            matched, assumed = time_intersects(f.time, window)
            if not matched:
                continue
            hits.append((f, assumed))
        if not hits:
            return None
        if len(hits) > 1:
            ids = ", ".join(str(f.id) for f, _ in hits)
            raise AmbiguousBasicFactError(
                f"facts {ids} all record an unnamed actor who {lemma}"
                + (f" {object}" if object else "")
            )
        f, assumed = hits[0]
        return BasicFact(
            fact_id=f.id,
            subject=f.subject,
            verb=f.verb,
            object=f.object,
            instrument=f.instrument,
            place=f.place,
            time=f.time,
            time_assumed=assumed,
        )

    # -- conditions ---------------------------------------------------------

    def _condition_holds(self, condition, person: str) -> tuple[bool, list[Step]]:
        pattern = condition.pattern
        pkey = person.lower()
        if condition.kind == SUBJECT_ATTRIBUTE:
            toks = pattern.split()
            if len(toks) < 3:
                return False, []
            rel = toks[1].lower()
            rest = " ".join(toks[2:])
            if rel in ("is", "was"):
                hits = [
                    f
                    for f in self.store
                    if (
                        f.kind == ATTRIBUTE
                        and f.subject_key == pkey
                        and _phrase_eq(f.state, rest)
                    )
                    or (
                        f.kind == EVENT
                        and f.object_key == pkey
                        and _phrase_eq(f.state, rest)
                    )
                ]
            elif rel in ("has", "have", "had"):
                hits = [
                    f
                    for f in self.store
                    if f.kind == POSSESSION
                    and f.subject_key == pkey
                    and _phrase_eq(f.object, rest)
                ]
            else:
                return False, []
            if not hits:
                return False, []
            return True, [
                Step(
                    rule="condition-subject",
                    facts=(hits[0].id,),
                    note=f"{person} {rel} {rest}",
                )
            ]
        if condition.kind == SUBJECT_EVENT:
            head = pattern.lower().split(" of subject")[0].strip()
            entry = self.kb.verb_lookup(head)
            if entry is None:
                return False, []
            for f in self.store:
                if (
                    f.kind == ACTION
                    and f.verb_key == entry.lemma
                    and f.object_key == pkey
                ):
                    return True, [
                        Step(
                            rule="condition-event",
                            facts=(f.id,),
                            frames=(f"verb:{entry.lemma}",),
                            note=f"someone {entry.past} {person}",
                        )
                    ]
                if (
                    f.kind == EVENT
                    and f.object_key == pkey
                    and entry.result_state
                    and _phrase_eq(f.state, entry.result_state)
                ):
                    return True, [
                        Step(
                            rule="condition-event",
                            facts=(f.id,),
                            frames=(f"verb:{entry.lemma}",),
                            note=f"{person} is {entry.result_state}",
                        )
                    ]
            return False, []
        # A situation holds somewhere in the city; taking it to bear on
        # the subject assumes the subject knows of it.
        for f in self.store:
            if f.kind == SITUATION and _phrase_eq(_fact_phrase(f), pattern):
                return True, [
                    Step(
                        rule="condition-situation",
                        facts=(f.id,),
                        note=f"'{pattern}' is reported; {person} assumed aware of it",
                        plausible=True,
                    )
                ]
        return False, []

    # -- motive and way -------------------------------------------------------

    def check_motive(self, person: str, verb: str) -> MotiveMatch | None:
        """First motive of the action frame whose condition holds."""
        frame = self.kb.get_action_frame(verb)
        if frame is None:
            return None
        for m in frame.motives:
            ok, steps = self._condition_holds(m.condition, person)
            if ok:
                head = Step(
                    rule="motive",
                    frames=(f"action:{frame.verb}/motive:{m.cause}",),
                    note=f"{m.cause}, given that {m.condition.pattern}",
                )
                return MotiveMatch(
                    cause=m.cause, condition=m.condition.pattern, steps=[head] + steps
                )
        return None

    def check_way(
        self,
        person: str,
        verb: str,
        question_way: str | None = None,
        basic: BasicFact | None = None,
    ) -> WayMatch | None:
        """A way from the action frame that the person commands.

        Tried in order: the way the question names, then the ways of
        the person's own recorded doings (same action's instrument, or
        a listed tool in hand), then the way of the anchoring record
        matched against any action of the person.
        """
        frame = self.kb.get_action_frame(verb)
        if frame is None:
            return None
        lemma = self._lemma(verb)
        pkey = person.lower()
        tools = {w.tool_key: w for w in frame.ways}

        def used_with(tool_key: str, same_action: bool) -> Fact | None:
            for f in self.store:
                if f.kind != ACTION or f.subject_key != pkey or f.instrument is None:
                    continue
                if same_action and f.verb_key != lemma:
                    continue
                if normalize_phrase(f.instrument) == tool_key:
                    return f
            return None

        def owned(tool_key: str) -> Fact | None:
            for f in self.store:
                if (
                    f.kind == POSSESSION
                    and f.subject_key == pkey
                    and normalize_phrase(f.object) == tool_key
                ):
                    return f
            return None

        if question_way is not None:
            wkey = normalize_phrase(question_way)
            way = tools.get(wkey)
            if way is None:
                return None
            ref = f"action:{frame.verb}/way:{way.tool}"
            used = used_with(wkey, same_action=True)
            if used is not None:
                return WayMatch(
                    way.tool,
                    [
                        Step(
                            rule="way-question",
                            facts=(used.id,),
                            frames=(ref,),
                            note=f"{person} has {lemma} with a {way.tool} on record",
                        )
                    ],
                )
            had = owned(wkey)
            if had is not None:
                return WayMatch(
                    way.tool,
                    [
                        Step(
                            rule="way-question",
                            facts=(had.id,),
                            frames=(ref,),
                            note=f"{person} has a {way.tool}; command of it assumed",
                            plausible=True,
                        )
                    ],
                )
        else:
            for wkey, way in tools.items():
                used = used_with(wkey, same_action=True)
                if used is not None:
                    return WayMatch(
                        way.tool,
                        [
                            Step(
                                rule="way-same-action",
                                facts=(used.id,),
                                frames=(f"action:{frame.verb}/way:{way.tool}",),
                                note=f"{person} has {lemma} with a {way.tool} on record",
                            )
                        ],
                    )
            for wkey, way in tools.items():
                had = owned(wkey)
                if had is not None:
                    return WayMatch(
                        way.tool,
                        [
                            Step(
                                rule="way-possession",
                                facts=(had.id,),
                                frames=(f"action:{frame.verb}/way:{way.tool}",),
                                note=f"{person} has a {way.tool}; command of it assumed",
                                plausible=True,
                            )
                        ],
                    )
        if basic is not None and basic.instrument:
            wkey = normalize_phrase(basic.instrument)
            way = tools.get(wkey)
            if way is not None:
                used = used_with(wkey, same_action=False)
                if used is not None:
                    return WayMatch(
                        way.tool,
                        [
                            Step(
                                rule="way-any-action",
                                facts=(used.id, basic.fact_id),
                                frames=(f"action:{frame.verb}/way:{way.tool}",),
                                note=(
                                    f"the record used a {way.tool}; {person} has handled "
                                    f"one elsewhere, mastery assumed"
                                ),
                                plausible=True,
                            )
                        ],
                    )
        return None

    # -- hypothesis and person questions ------------------------------------

    def check_hypothesis(
        self,
        person: str,
        verb: str,
        object: str | None = None,
        place: Place | None = None,
        time: Timestamp | None = None,
        way: str | None = None,
    ) -> Answer:
        """Could the person have done the action? yes or unknown."""
        lemma = self._lemma(verb)
        direct = self._direct_actions(lemma, object, place, time, way, subject=person)
        if direct:
            f, assumed = direct[0]
            return Answer(
                YES,
                justification=[
                    Step(
                        rule="direct-match",
                        facts=(f.id,),
                        note="the questioned action is itself on record",
                        plausible=assumed,
                    )
                ],
            )
        if self.kb.get_action_frame(lemma) is None:
            return Answer(
                UNKNOWN,
                justification=[
                    Step(rule="hypothesis", note=f"no action frame describes {lemma!r}")
                ],
            )
        basic = self.find_basic_fact(lemma, object, place, time)
        if basic is None:
            return Answer(
                UNKNOWN,
                justification=[
                    Step(
                        rule="hypothesis",
                        note=f"nothing records that anyone {lemma}"
                        + (f" {object}" if object else ""),
                    )
                ],
            )
        basic_step = Step(
            rule="basic-fact",
            facts=(basic.fact_id,),
            note=f"recorded: {_fact_phrase(self.store.get(basic.fact_id))}",
            plausible=basic.time_assumed,
        )
        r_place = place if place is not None else basic.place
        r_time = time if time is not None else basic.time
        stay = self.check_stay(person, r_place, r_time)
        if stay.verdict != YES:
            return Answer(UNKNOWN, justification=[basic_step] + stay.justification)
        motive = self.check_motive(person, lemma)
        if motive is None:
            return Answer(
                UNKNOWN,
                justification=[basic_step]
                + stay.justification
                + [Step(rule="motive", note=f"no motive for {lemma} holds for {person}")],
            )
        way_match = self.check_way(person, lemma, question_way=way, basic=basic)
        if way_match is None:
            return Answer(
                UNKNOWN,
                justification=[basic_step]
                + stay.justification
                + motive.steps
                + [Step(rule="way", note=f"no way of {lemma} is open to {person}")],
            )
        return Answer(
            YES,
            justification=[basic_step]
            + stay.justification
            + motive.steps
            + way_match.steps,
        )

    def _direct_actions(
        self,
        lemma: str,
        object: str | None,
        place: Place | None,
        time: Timestamp | None,
        way: str | None = None,
        subject: str | None = None,
    ) -> list[tuple[Fact, bool]]:
        window = self._window(time)
        out = []
        for f in self.store:
            if f.kind != ACTION or f.verb_key != lemma:
                continue
            if subject is not None and f.subject_key != subject.lower():
                continue
            if object is not None and not _phrase_eq(f.object, object):
                continue
            if way is not None and not _phrase_eq(f.instrument, way):
                continue
            if place is not None:
                if f.place is None or not f.place.matches(place, EXACT):
                    continue
            matched, assumed = time_intersects(f.time, window)
            if not matched:
                continue
            out.append((f, assumed))
        return out

    def determine_person(
        self,
        verb: str,
        object: str | None = None,
        place: Place | None = None,
        time: Timestamp | None = None,
        way: str | None = None,
    ) -> Answer:
        """Who did it: named actors on record, else screened bystanders."""
        lemma = self._lemma(verb)
        direct = [
            (f, a)
            for f, a in self._direct_actions(lemma, object, place, time, way)
            if f.subject and not is_generic_person(f.subject)
        ]
        if direct:
            bindings: list[tuple[str, str]] = []
            steps: list[Step] = []
            seen: set[str] = set()
            for f, assumed in direct:
                if f.subject.lower() in seen:
                    continue
                seen.add(f.subject.lower())
                bindings.append(("person", f.subject))
                steps.append(
                    Step(
                        rule="direct-match",
                        facts=(f.id,),
                        note=f"{f.subject} is on record doing it",
                        plausible=assumed,
                    )
                )
            return Answer(YES, bindings, steps)

        basic = self.find_basic_fact(lemma, object, place, time)
        steps = []
        if basic is not None:
            steps.append(
                Step(
                    rule="basic-fact",
                    facts=(basic.fact_id,),
                    note=f"recorded: {_fact_phrase(self.store.get(basic.fact_id))}",
                    plausible=basic.time_assumed,
                )
            )
        r_place = place if place is not None else (basic.place if basic else None)
        r_time = time if time is not None else (basic.time if basic else None)
        if r_place is None:
            return Answer(
                UNKNOWN,
                justification=steps
                + [Step(rule="person", note="no place to screen bystanders at")],
            )
        window = self._window(r_time)
        candidates = self.store.persons_at(r_place, window)
        survivors: list[tuple[str, list[Step]]] = []
        for cand in candidates:
            motive = self.check_motive(cand, lemma)
            if motive is None:
                continue
            way_match = self.check_way(cand, lemma, question_way=way, basic=basic)
            if way_match is None:
                continue
            presence = [
                (f, a)
                for f, a in self.store.stay_evidence(r_place, window)
                if (_person_mention(f) or "").lower() == cand.lower()
            ]
            solid = any(f.time is not None and not a for f, a in presence)
            presence_step = Step(
                rule="candidate-presence",
                facts=tuple(f.id for f, _ in presence),
                note=f"{cand} was on {r_place.street} street around then",
                plausible=not solid,
            )
            survivors.append((cand, [presence_step] + motive.steps + way_match.steps))
        if not survivors:
            return Answer(
                UNKNOWN,
                justification=steps
                + [
                    Step(
                        rule="person",
                        note="nobody nearby passes the motive and way checks",
                    )
                ],
            )
        bindings = [("person", name) for name, _ in survivors]
        for _, s in survivors:
            steps.extend(s)
        return Answer(YES, bindings, steps)

    def determine_circumstance(
        self,
        person: str,
        verb: str,
        object: str | None = None,
        facet: str = "cause",
        place: Place | None = None,
        time: Timestamp | None = None,
    ) -> Answer:
        """Why (the motive condition) or how (the way) the person did it."""
        if facet not in ("cause", "way"):
            raise ValueError(f"facet must be 'cause' or 'way', got {facet!r}")
        lemma = self._lemma(verb)
        steps: list[Step] = []
        direct = self._direct_actions(lemma, object, place, time, subject=person)
        basic = None
        if direct:
            f, assumed = direct[0]
            steps.append(
                Step(
                    rule="direct-match",
                    facts=(f.id,),
                    note="the action is on record",
                    plausible=assumed,
                )
            )
            r_place = place if place is not None else f.place
            r_time = time if time is not None else f.time
        else:
            basic = self.find_basic_fact(lemma, object, place, time)
            if basic is None:
                return Answer(
                    UNKNOWN,
                    justification=[
                        Step(rule="circumstance", note="nothing records the action")
                    ],
                )
            steps.append(
                Step(
                    rule="basic-fact",
                    facts=(basic.fact_id,),
                    note=f"recorded: {_fact_phrase(self.store.get(basic.fact_id))}",
                    plausible=basic.time_assumed,
                )
            )
            r_place = place if place is not None else basic.place
            r_time = time if time is not None else basic.time
            stay = self.check_stay(person, r_place, r_time)
            if stay.verdict != YES:
                return Answer(UNKNOWN, justification=steps + stay.justification)
            steps.extend(stay.justification)
        motive = self.check_motive(person, lemma)
        if motive is None:
            return Answer(
                UNKNOWN,
                justification=steps
                + [Step(rule="motive", note=f"no motive for {lemma} holds for {person}")],
            )
        steps.extend(motive.steps)
        way_match = self.check_way(person, lemma, basic=basic)
        if way_match is None:
            return Answer(
                UNKNOWN,
                justification=steps
                + [Step(rule="way", note=f"no way of {lemma} is open to {person}")],
            )
        steps.extend(way_match.steps)
        if facet == "cause":
            bindings = [("cause", motive.condition)]
        else:
            bindings = [("way", way_match.way)]
        return Answer(YES, bindings, steps)

    # -- planned operations ---------------------------------------------------

    def check_operation(
        self, person: str, operation: OperationFrame, place: Place | None = None
    ) -> OperationMatch | None:
        """First alternative whose every stage is open to the person.

        A bare stage passes. A subject condition must hold as a fact.
        A situation condition needs a matching situation report (at the
        asked place, when both name one); counting on it assumes the
        subject knows. A tool way needs the tool in hand or on record;
        other ways (routes of entry) are assumed manageable.
        """
        for alt in operation.alternatives:
            steps: list[Step] = []
            passed = True
            for j, stage in enumerate(alt.stages, 1):
                ref = f"operation:{operation.name}/alternative:{alt.index}/stage:{j}"
                if stage.condition is not None:
                    cond = stage.condition
                    if cond.kind == SITUATION_CONDITION:
                        hit = self._find_situation(cond.pattern, place)
                        if hit is None:
                            passed = False
                            break
                        steps.append(
                            Step(
                                rule="stage-situation",
                                facts=(hit.id,),
                                frames=(ref,),
                                note=f"'{cond.pattern}' is reported; {person} assumed aware",
                                plausible=True,
                            )
                        )
                    else:
                        ok, csteps = self._condition_holds(cond, person)
                        if not ok:
                            passed = False
                            break
                        steps.append(
                            Step(
                                rule="stage-condition",
                                frames=(ref,),
                                note=f"'{cond.pattern}' holds for {person}",
                            )
                        )
                        steps.extend(csteps)
                if stage.way is not None:
                    prep = stage.way.split()[0].lower()
                    tail = " ".join(stage.way.split()[1:])
                    if prep in TOOL_PREPOSITIONS:
                        tool_key = normalize_phrase(tail)
                        hit = next(
                            (
                                f
                                for f in self.store
                                if (
                                    f.kind == POSSESSION
                                    and f.subject_key == person.lower()
                                    and normalize_phrase(f.object) == tool_key
                                )
                                or (
                                    f.kind == ACTION
                                    and f.subject_key == person.lower()
                                    and f.instrument is not None
                                    and normalize_phrase(f.instrument) == tool_key
                                )
                            ),
                            None,
                        )
                        if hit is None:
                            passed = False
                            break
                        steps.append(
                            Step(
                                rule="stage-way",
                                facts=(hit.id,),
                                frames=(ref,),
                                note=f"{person} has the {tail} for '{stage.text}'; command assumed",
                                plausible=True,
                            )
                        )
                    else:
                        steps.append(
                            Step(
                                rule="stage-way",
                                frames=(ref,),
                                note=f"'{stage.way}' taken as manageable for {person}",
                                plausible=True,
                            )
                        )
                if stage.condition is None and stage.way is None:
                    steps.append(
                        Step(
                            rule="stage",
                            frames=(ref,),
                            note=f"'{stage.text}' needs nothing special",
                        )
                    )
            if passed:
                return OperationMatch(operation, alt.index, steps)
        return None

    def _find_situation(self, pattern: str, place: Place | None) -> Fact | None:
        unplaced = None
        for f in self.store:
            if f.kind != SITUATION or not _phrase_eq(_fact_phrase(f), pattern):
                continue
            if place is None or f.place is None:
                unplaced = unplaced or f
                continue
            if f.place.matches(place, EXACT):
                return f
        return unplaced

    def find_planner(self, operation_name: str, place: Place | None = None) -> Answer:
        """Which named person could be planning the operation."""
        op = self.kb.get_operation_frame(operation_name)
        if op is None:
            raise UnknownOperationError(f"no operation frame named {operation_name!r}")
        survivors: list[tuple[str, list[Step]]] = []
        for person in self._named_persons():
            match = self._screen_planner(person, op, place)
            if match is not None:
                survivors.append((person, match))
        if not survivors:
            return Answer(
                UNKNOWN,
                justification=[
                    Step(
                        rule="planner",
                        frames=(f"operation:{op.name}",),
                        note="nobody passes the motive and stage checks",
                    )
                ],
            )
        bindings = [("person", name) for name, _ in survivors]
        steps: list[Step] = []
        for _, s in survivors:
            steps.extend(s)
        return Answer(YES, bindings, steps)

    def _screen_planner(
        self, person: str, op: OperationFrame, place: Place | None
    ) -> list[Step] | None:
        if op.planned_action is None:
            return None
        motive = self.check_motive(person, op.planned_action)
        if motive is None:
            return None
        op_match = self.check_operation(person, op, place)
        if op_match is None:
            return None
        head = Step(
            rule="planned-action",
            frames=(f"operation:{op.name}",),
            note=f"the operation {op.name!r} realizes {op.planned_action!r}",
        )
        return [head] + motive.steps + op_match.steps

    def determine_planned_operation(
        self, person: str, place: Place | None = None
    ) -> Answer:
        """Which loaded operations the person could be planning."""
        bindings: list[tuple[str, str]] = []
        steps: list[Step] = []
        for op in self.kb.list_operation_frames():
            match = self._screen_planner(person, op, place)
            if match is not None:
                bindings.append(("operation", op.name))
                steps.extend(match)
        if not bindings:
            return Answer(
                UNKNOWN,
                justification=[
                    Step(rule="plan", note=f"no operation is open to {person}")
                ],
            )
        return Answer(YES, bindings, steps)

    def determine_operation_ways(
        self, person: str, operation_name: str, place: Place | None = None
    ) -> Answer:
        """The distinct way-bearing stages of the alternative that fits."""
        op = self.kb.get_operation_frame(operation_name)
        if op is None:
            raise UnknownOperationError(f"no operation frame named {operation_name!r}")
        match_steps = self._screen_planner(person, op, place)
        if match_steps is None:
            return Answer(
                UNKNOWN,
                justification=[
                    Step(
                        rule="plan-ways",
                        frames=(f"operation:{op.name}",),
                        note=f"{person} does not pass the checks for {op.name}",
                    )
                ],
            )
        op_match = self.check_operation(person, op, place)
        bindings: list[tuple[str, str]] = []
        seen: set[str] = set()
        for stage in op_match.alternative.stages:
            if stage.way is None:
                continue
            key = normalize_phrase(stage.way)
            if key in seen:
                continue
            seen.add(key)
            bindings.append(("stage", f"{stage.action_text} {stage.way}"))
        if not bindings:
            return Answer(
                UNKNOWN,
                justification=match_steps
                + [Step(rule="plan-ways", note="the fitting alternative names no ways")],
            )
        return Answer(YES, bindings, match_steps)

    # -- events and states ------------------------------------------------------

    def determine_event_cause(
        self,
        object: str,
        state: str,
        time: Timestamp | None = None,
        place: Place | None = None,
    ) -> Answer:
        """The latest recorded action that produces the asked state."""
        okey = normalize_phrase(object)
        steps: list[Step] = []
        ev_time, ev_place = time, place
        window = self._window(time)
        for f in self.store:
            if f.kind != EVENT or not _phrase_eq(f.object, object):
                continue
            if not _phrase_eq(f.state, state):
                continue
            if place is not None and f.place is not None and not f.place.matches(place, EXACT):
                continue
            matched, assumed = time_intersects(f.time, window)
            if not matched:
                continue
            steps.append(
                Step(
                    rule="event",
                    facts=(f.id,),
                    note=f"recorded: {_fact_phrase(f)}",
                    plausible=assumed,
                )
            )
            ev_time = f.time or time
            ev_place = f.place or place
            break
        producers = {e.lemma: e for e in self.kb.state_producing_verbs(state)}
        if not producers:
            return Answer(
                UNKNOWN,
                justification=steps
                + [
                    Step(
                        rule="event-cause",
                        note=f"no verb in the dictionary leaves things {state}",
                    )
                ],
            )
        upper = None
        if ev_time is not None:
            upper_window = self._window(ev_time)
            upper = (upper_window.ordinal_day(), upper_window.end_minute)
        candidates: list[tuple[Fact, bool]] = []
        for f in self.store:
            if f.kind != ACTION:
                continue
            entry = producers.get(f.verb_key)
            if entry is None:
                continue
            affected = f.object if entry.applies_to == "object" else f.subject
            if affected is None or normalize_phrase(affected) != okey:
                continue
            if ev_place is not None:
                if f.place is None or not f.place.matches(ev_place, EXACT):
                    continue
            assumed = f.time is None
            if upper is not None and f.time is not None:
                fdoy = f.time.ordinal_day()
                fstart = f.time.day_interval()[0]
                udoy, umin = upper
                if fdoy is None or udoy is None:
                    assumed = True
                    if fstart > umin and (fdoy is not None or udoy is not None):
                        # Same-day reading puts the action after the event.
                        continue
                elif fdoy * MINUTES_PER_DAY + fstart > udoy * MINUTES_PER_DAY + umin:
                    continue
            candidates.append((f, assumed))
        if not candidates:
            return Answer(
                UNKNOWN,
                justification=steps
                + [
                    Step(
                        rule="event-cause",
                        note=f"no recorded action leaves {object} {state}",
                    )
                ],
            )

        def order_key(pair: tuple[Fact, bool]):
            f, _ = pair
            if f.time is None or f.time.ordinal_day() is None:
                return (0, 0, -f.id)
            return (1, f.time.ordinal_day() * MINUTES_PER_DAY + f.time.day_interval()[0], -f.id)

        candidates.sort(key=order_key)
        chosen, chosen_assumed = candidates[-1]
        entry = producers[chosen.verb_key]
        phrase = " ".join(
            x for x in (chosen.subject, entry.past, chosen.object) if x
        )
        steps.append(
            Step(
                rule="event-cause",
                facts=(chosen.id,),
                frames=(f"verb:{entry.lemma}",),
                note=f"{phrase} leaves {object} {state}",
                plausible=chosen_assumed,
            )
        )
        for f, _ in candidates[:-1]:
            steps.append(
                Step(
                    rule="event-cause-alternative",
                    facts=(f.id,),
                    note=f"{_fact_phrase(f)} could explain it too; the later record wins",
                    plausible=True,
                )
            )
        return Answer(YES, [("cause", phrase)], steps)

    def determine_person_state(
        self, person: str, asof: Timestamp | None = None
    ) -> Answer:
        """The person's current state, by three readings in fixed order.

        1. A recent event (or state-leaving action) names the state.
        2. Recent complaints in hand match a disease frame best.
        3. A script whose trigger matches the person's situation yields
           its consequences.
        The first reading that fires binds the answer; later ones are
        appended to the justification for the record.
        """
        asof_ts = asof or self.asof or self.store.latest_date()
        asof_day = asof_ts.ordinal_day() if asof_ts is not None else None

        def recent(f: Fact) -> tuple[bool, bool]:
            if f.time is None or f.time.ordinal_day() is None:
                return True, True
            if asof_day is None:
                return True, False
            day = f.time.ordinal_day()
            return (asof_day - self.recency_days <= day <= asof_day), False

        findings = [
            self._state_from_events(person, recent),
            self._state_from_symptoms(person, recent),
            self._state_from_scripts(person, recent),
        ]
        primary = next((f for f in findings if f is not None), None)
        if primary is None:
            return Answer(
                UNKNOWN,
                justification=[
                    Step(rule="state", note=f"nothing recent tells the state of {person}")
                ],
            )
        bindings, steps = primary
        for other in findings:
            if other is None or other is primary:
                continue
            steps = steps + other[1]
        return Answer(YES, bindings, steps)

    def _state_from_events(self, person, recent):
        hits: list[tuple[Fact, str, str | None, bool]] = []
        pkey = normalize_phrase(person)
        for f in self.store:
            if f.kind == EVENT and normalize_phrase(f.object or "") == pkey:
                ok, assumed = recent(f)
                if ok:
                    hits.append((f, f.state, None, assumed))
            elif f.kind == ACTION:
                entry = self.kb.verb_lookup(f.verb or "")
                if entry is None or entry.result_state is None:
                    continue
                affected = f.object if entry.applies_to == "object" else f.subject
                if affected is None or normalize_phrase(affected) != pkey:
                    continue
                ok, assumed = recent(f)
                if ok:
                    hits.append((f, entry.result_state, entry.lemma, assumed))
        if not hits:
            return None

        def order_key(item):
            f = item[0]
            if f.time is None or f.time.ordinal_day() is None:
                return (0, 0, -f.id)
            return (1, f.time.ordinal_day() * MINUTES_PER_DAY + f.time.day_interval()[0], -f.id)

        hits.sort(key=order_key)
        f, state, lemma, assumed = hits[-1]
        step = Step(
            rule="state-event",
            facts=(f.id,),
            frames=(f"verb:{lemma}",) if lemma else (),
            note=f"{person} is {state} since then",
            plausible=assumed,
        )
        return [("state", state)], [step]

    def _state_from_symptoms(self, person, recent):
        pkey = person.lower()
        observations: list[tuple[str, Fact, bool]] = []
        for f in self.store:
            if f.subject_key != pkey:
                continue
            ok, assumed = recent(f)
            if not ok:
                continue
            if f.kind == POSSESSION:
                observations.append((f.object, f, assumed))
            elif f.kind == ATTRIBUTE:
                observations.append((f.state, f, assumed))
        if not observations:
            return None
        scored = self.kb.match_diseases([o for o, _, _ in observations])
        if not scored:
            return None
        name, fraction = scored[0]
        cited = tuple(f.id for _, f, _ in observations)
        step = Step(
            rule="state-disease",
            facts=cited,
            frames=(f"disease:{name}",),
            note=(
                f"{person}'s complaints match {fraction.numerator} of "
                f"{fraction.denominator} {name} symptoms"
            ),
            plausible=True,
        )
        return [("state", name)], [step]

    def _state_from_scripts(self, person, recent):
        pkey = person.lower()
        owned: dict[str, Fact] = {}
        for f in self.store:
            if f.kind == POSSESSION and f.subject_key == pkey and f.object:
                owned.setdefault(normalize_phrase(f.object), f)
        for script in self.kb.list_scripts():
            for f in self.store:
                ok, _ = recent(f)
                if not ok:
                    continue
                involved = f.subject_key == pkey
                link: Fact | None = None
                if not involved and f.subject is not None:
                    link = owned.get(normalize_phrase(f.subject))
                    involved = link is not None
                if not involved:
                    continue
                if normalize_phrase(_fact_phrase(f)) != script.trigger_key:
                    continue
                cited = (f.id,) if link is None else (f.id, link.id)
                step = Step(
                    rule="state-script",
                    facts=cited,
                    frames=(f"script:{script.name}",),
                    note=(
                        f"'{script.trigger}' holds for {person}; "
                        f"the {script.name} script tells what follows"
                    ),
                    plausible=True,
                )
                bindings = []
                for c in script.consequences:
                    text = c.phrase if c.modality == "does" else f"{c.modality} {c.phrase}"
                    bindings.append(("state", text))
                if bindings:
                    return bindings, [step]
        return None

    # -- dispatch ---------------------------------------------------------------

    def answer_question(self, q: Question) -> Answer:
        kind = q.kind
        if kind == YES_NO_ACTION:
            return self.check_hypothesis(
                q.subject, q.verb, q.object, q.place, q.time, way=q.way
            )
        if kind == WHO:
            return self.determine_person(q.verb, q.object, q.place, q.time, way=q.way)
        if kind == WHY_ACTION:
            return self.determine_circumstance(
                q.subject, q.verb, q.object, "cause", q.place, q.time
            )
        if kind == HOW_ACTION:
            return self.determine_circumstance(
                q.subject, q.verb, q.object, "way", q.place, q.time
            )
        if kind == WHO_PLANS:
            return self.find_planner(q.operation, q.place)
        if kind == WHAT_PLANS:
            return self.determine_planned_operation(q.subject, q.place)
        if kind == HOW_PLANS:
            return self.determine_operation_ways(q.subject, q.operation, q.place)
        if kind == WHY_EVENT:
            return self.determine_event_cause(q.object, q.state, q.time, q.place)
        if kind == STATE_OF:
            return self.determine_person_state(q.subject)
        raise KbqaError(f"unhandled question kind {kind!r}")


# -- trail auditing ------------------------------------------------------------


def verify_trail(answer: Answer, store: FactStore, kb: KnowledgeBase) -> list[str]:
    """Mechanical soundness check of a justification: every cited fact
    id must exist in the store and every frame reference must resolve.
    Returns the list of problems (empty when sound)."""
    problems = []
    for i, step in enumerate(answer.justification, 1):
        for fid in step.facts:
            if not store.has_id(fid):
                problems.append(f"step {i} ({step.rule}) cites missing fact {fid}")
        for ref in step.frames:
            if not kb.resolve_entry(ref):
                problems.append(f"step {i} ({step.rule}) cites unresolved entry {ref!r}")
    return problems


def format_trail(answer: Answer) -> list[str]:
    """Printable lines for a justification trail."""
    lines = []
    for i, step in enumerate(answer.justification, 1):
        tag = "plausible" if step.plausible else "deductive"
        line = f"{i}. [{tag}] {step.rule}: {step.note}"
        if step.facts:
            line += f" (facts {', '.join(str(f) for f in step.facts)})"
        if step.frames:
            line += f" [{', '.join(step.frames)}]"
        lines.append(line)
    return lines
