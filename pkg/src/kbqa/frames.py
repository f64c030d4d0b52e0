"""Frame knowledge base: action, operation, script, and disease frames.

Frames arrive in a line-oriented surface syntax. Every frame opens
with ``frame is <name>``; the body lines decide what it is:

* ``alternative N; <stage>`` lines make an operation frame,
* ``there is <symptom>`` lines make a disease frame,
* a name starting ``the script of`` makes a script frame (first body
  line is the trigger, the rest are consequences),
* ``<cause> as <condition>`` and ``by <tool>`` lines make an action
  frame.

The verb dictionary maps each verb to its past form and, when the verb
produces a lasting state, to that state and which participant ends up
carrying it.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from importlib import resources

from .errors import KbqaError
from .vocabulary import WAY_PREPOSITIONS, normalize_phrase

# Condition kinds inside frames.
SUBJECT_ATTRIBUTE = "subject_attribute"
SUBJECT_EVENT = "subject_event"
SITUATION_CONDITION = "situation"


class FrameParseError(KbqaError):
    def __init__(self, line_no: int, message: str):
        super().__init__(f"line {line_no}: {message}")
        self.line_no = line_no


class DictionaryParseError(KbqaError):
    pass


@dataclass(frozen=True)
class VerbEntry:
    lemma: str
    past: str
    result_state: str | None = None
    applies_to: str | None = None  # "object" or "subject"


class VerbDictionary:
    """Lemma and past-form lookup plus the state-producing index."""

    def __init__(self, entries: list[VerbEntry]):
        self._entries = list(entries)
        self._by_form: dict[str, VerbEntry] = {}
        for e in self._entries:
            self._by_form[e.lemma.lower()] = e
            self._by_form[e.past.lower()] = e

    @property
    def entries(self) -> list[VerbEntry]:
        return list(self._entries)

    def lookup(self, token: str) -> VerbEntry | None:
        """Resolve a surface token (lemma or past form) to its entry."""
        return self._by_form.get(token.lower())

    def state_producing_verbs(self, state: str) -> list[VerbEntry]:
        """Entries whose result state equals the given state."""
        key = state.lower()
        return [e for e in self._entries if e.result_state and e.result_state.lower() == key]

    @classmethod
    def from_text(cls, text: str) -> "VerbDictionary":
        """Parse ``lemma|past|result_state|applies_to`` lines."""
        entries = []
        for no, raw in enumerate(text.splitlines(), 1):
            line = raw.strip()
            if not line or line.startswith("#"):
                continue
            parts = [p.strip() for p in line.split("|")]
            if len(parts) != 4:
                raise DictionaryParseError(f"line {no}: expected 4 fields, got {len(parts)}")
            lemma, past, result_state, applies_to = parts
            if not lemma or not past:
                raise DictionaryParseError(f"line {no}: lemma and past form are required")
            if applies_to not in ("", "object", "subject"):
                raise DictionaryParseError(
                    f"line {no}: applies_to must be object or subject, got {applies_to!r}"
                )
            if bool(result_state) != bool(applies_to):
                raise DictionaryParseError(
                    f"line {no}: result state and applies_to come together"
                )
            entries.append(
                VerbEntry(lemma, past, result_state or None, applies_to or None)
            )
        return cls(entries)

    @classmethod
    def default(cls) -> "VerbDictionary":
        text = resources.files("kbqa").joinpath("data/verbs.txt").read_text("utf-8")
        return cls.from_text(text)


@dataclass(frozen=True)
class Condition:
    """A frame condition, classified by what it talks about."""

    pattern: str
    kind: str

    @classmethod
    def classify(cls, pattern: str) -> "Condition":
        low = pattern.lower()
        if low.startswith("subject "):
            kind = SUBJECT_ATTRIBUTE
        elif low.endswith(" of subject") or " of subject " in low:
            kind = SUBJECT_EVENT
        else:
            kind = SITUATION_CONDITION
        return cls(pattern=pattern, kind=kind)

    @property
    def key(self) -> str:
        return normalize_phrase(self.pattern)


@dataclass(frozen=True)
class Motive:
    cause: str
    condition: Condition


@dataclass(frozen=True)
class Way:
    text: str  # as written, preposition included
    tool: str

    @property
    def tool_key(self) -> str:
        return normalize_phrase(self.tool)


@dataclass(frozen=True)
class ActionFrame:
    name: str
    verb: str  # dictionary lemma the frame is keyed under
    motives: tuple[Motive, ...]
    ways: tuple[Way, ...]

    def tool_keys(self) -> set[str]:
        return {w.tool_key for w in self.ways}


@dataclass(frozen=True)
class Stage:
    text: str  # as written after "alternative N; "
    action_text: str
    way: str | None = None  # preposition included, e.g. "through window"
    condition: Condition | None = None


@dataclass(frozen=True)
class Alternative:
    index: int
    stages: tuple[Stage, ...]


@dataclass(frozen=True)
class OperationFrame:
    name: str
    planned_action: str | None  # verb lemma behind the operation name
    alternatives: tuple[Alternative, ...]

    @property
    def key(self) -> str:
        return normalize_phrase(self.name)


@dataclass(frozen=True)
class Consequence:
    text: str
    subject: str
    modality: str  # "does", "can", or "may"
    phrase: str


@dataclass(frozen=True)
class ScriptFrame:
    name: str
    trigger: str
    consequences: tuple[Consequence, ...]

    @property
    def trigger_key(self) -> str:
        return normalize_phrase(self.trigger)


@dataclass(frozen=True)
class DiseaseFrame:
    name: str
    symptoms: tuple[str, ...]


class KnowledgeBase:
    """All loaded frames plus the verb dictionary."""

    def __init__(self, verbs: VerbDictionary | None = None):
        self.verbs = verbs if verbs is not None else VerbDictionary.default()
        self._actions: dict[str, ActionFrame] = {}
        self._operations: dict[str, OperationFrame] = {}
        self._scripts: dict[str, ScriptFrame] = {}
        self._diseases: dict[str, DiseaseFrame] = {}
        self._order: list[tuple[str, str]] = []  # (kind, key) in load order

    # -- loading ---------------------------------------------------------

    def load_frames(self, text: str) -> int:
        """Parse frame text and merge it in; returns frames loaded.

        A frame whose name repeats an already loaded one replaces it,
        keeping its original position.
        """
        count = 0
        for frame in _parse_frames(text, self.verbs):
            self._install(frame)
            count += 1
        return count

    def load_frames_path(self, path) -> int:
        with open(path, "r", encoding="utf-8") as fh:
            return self.load_frames(fh.read())

    def _install(self, frame) -> None:
        if isinstance(frame, ActionFrame):
            kind, key, table = "action", frame.verb, self._actions
        elif isinstance(frame, OperationFrame):
            kind, key, table = "operation", frame.key, self._operations
        elif isinstance(frame, ScriptFrame):
            kind, key, table = "script", normalize_phrase(frame.name), self._scripts
        elif isinstance(frame, DiseaseFrame):
            kind, key, table = "disease", normalize_phrase(frame.name), self._diseases
        else:  # pragma: no cover - guarded by the parser
            raise KbqaError(f"unknown frame object {frame!r}")
        if key not in table:
            self._order.append((kind, key))
        table[key] = frame

    # -- retrieval -------------------------------------------------------

    def get_action_frame(self, verb: str) -> ActionFrame | None:
        entry = self.verbs.lookup(verb)
        key = entry.lemma if entry else verb.lower()
        return self._actions.get(key)

    def get_operation_frame(self, name: str) -> OperationFrame | None:
        return self._operations.get(normalize_phrase(name))

    def list_operation_frames(self) -> list[OperationFrame]:
        return [self._operations[k] for kind, k in self._order if kind == "operation"]

    def list_scripts(self) -> list[ScriptFrame]:
        return [self._scripts[k] for kind, k in self._order if kind == "script"]

    def list_diseases(self) -> list[DiseaseFrame]:
        return [self._diseases[k] for kind, k in self._order if kind == "disease"]

    def match_diseases(self, observations: list[str]) -> list[tuple[str, Fraction]]:
        """Score diseases by the exact fraction of their symptoms observed.

        Symptom and observation compare by phrase containment either
        way after normalization. Diseases with no matching symptom are
        left out; ties sort by name.
        """
        if not observations:
            raise ValueError("at least one observation is required")
        keys = [normalize_phrase(o) for o in observations if o.strip()]
        if not keys:
            raise ValueError("at least one observation is required")
        scored = []
        for disease in self.list_diseases():
            total = len(disease.symptoms)
            if total == 0:
                continue
            hits = 0
            for symptom in disease.symptoms:
                sk = normalize_phrase(symptom)
                if any(sk in k or k in sk for k in keys):
                    hits += 1
            if hits:
                scored.append((disease.name, Fraction(hits, total)))
        scored.sort(key=lambda pair: (-pair[1], pair[0]))
        return scored

    def verb_lookup(self, token: str) -> VerbEntry | None:
        return self.verbs.lookup(token)

    def state_producing_verbs(self, state: str) -> list[VerbEntry]:
        return self.verbs.state_producing_verbs(state)

    # -- referencing -----------------------------------------------------

    def resolve_entry(self, ref: str) -> bool:
        """Check a justification reference against the loaded frames.

        Formats: ``verb:shoot``, ``action:shoot``, ``action:shoot/motive:<cause>``,
        ``action:shoot/way:<tool>``, ``operation:<name>``,
        ``operation:<name>/alternative:<i>/stage:<j>``, ``script:<name>``,
        ``disease:<name>``.
        """
        head, _, rest = ref.partition("/")
        kind, _, name = head.partition(":")
        if not name:
            return False
        if kind == "verb":
            return self.verbs.lookup(name) is not None
        if kind == "action":
            frame = self.get_action_frame(name)
            if frame is None:
                return False
            if not rest:
                return True
            part, _, value = rest.partition(":")
            if part == "motive":
                return any(normalize_phrase(m.cause) == normalize_phrase(value) for m in frame.motives)
            if part == "way":
                return any(w.tool_key == normalize_phrase(value) for w in frame.ways)
            return False
        if kind == "operation":
            frame = self.get_operation_frame(name)
            if frame is None:
                return False
            if not rest:
                return True
            parts = rest.split("/")
            if not parts[0].startswith("alternative:"):
                return False
            try:
                alt_index = int(parts[0].split(":", 1)[1])
            except ValueError:
                return False
            alt = next((a for a in frame.alternatives if a.index == alt_index), None)
            if alt is None:
                return False
            if len(parts) == 1:
                return True
            if len(parts) == 2 and parts[1].startswith("stage:"):
                try:
                    stage_no = int(parts[1].split(":", 1)[1])
                except ValueError:
                    return False
                return 1 <= stage_no <= len(alt.stages)
            return False
        if kind == "script":
            return normalize_phrase(name) in self._scripts
        if kind == "disease":
            return normalize_phrase(name) in self._diseases
        return False

    # -- serialization ---------------------------------------------------

    def serialize(self) -> str:
        """Render every frame back to the surface syntax, load order kept.

        Feeding the output to ``load_frames`` reproduces the same
        knowledge base, and serializing again gives identical text.
        """
        chunks = []
        tables = {
            "action": self._actions,
            "operation": self._operations,
            "script": self._scripts,
            "disease": self._diseases,
        }
        for kind, key in self._order:
            chunks.append(_render_frame(tables[kind][key]))
        return "\n\n".join(chunks) + ("\n" if chunks else "")


# -- parsing helpers -------------------------------------------------------


def _split_way(body: str) -> tuple[str, str | None]:
    """Split a stage body at the first way preposition, if any."""
    toks = body.split()
    for i, tok in enumerate(toks):
        if i > 0 and tok.lower() in WAY_PREPOSITIONS:
            return " ".join(toks[:i]), " ".join(toks[i:])
    return body, None


def _parse_stage(line_no: int, text: str) -> Stage:
    body = text
    condition = None
    if " if " in text:
        body, _, cond_text = text.partition(" if ")
        cond_text = cond_text.strip()
        if not cond_text:
            raise FrameParseError(line_no, "empty stage condition")
        condition = Condition.classify(cond_text)
    body = body.strip()
    if not body:
        raise FrameParseError(line_no, "empty stage action")
    action_text, way = _split_way(body)
    return Stage(text=text, action_text=action_text, way=way, condition=condition)


def _first_verb_token(name: str, verbs: VerbDictionary) -> str | None:
    for tok in normalize_phrase(name).split():
        entry = verbs.lookup(tok)
        if entry is not None:
            return entry.lemma
    return None


def _parse_frames(text: str, verbs: VerbDictionary) -> list:
    # Collect (header line, name, body lines) groups first.
    groups: list[tuple[int, str, list[tuple[int, str]]]] = []
    current: list[tuple[int, str]] | None = None
    for no, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        if line.lower().startswith("frame is "):
            name = line[len("frame is "):].strip()
            if not name:
                raise FrameParseError(no, "frame header without a name")
            current = []
            groups.append((no, name, current))
        else:
            if current is None:
                raise FrameParseError(no, f"frame body line before any header: {line!r}")
            current.append((no, line))
    return [_build_frame(no, name, body, verbs) for no, name, body in groups]


def _build_frame(header_no: int, name: str, body: list[tuple[int, str]], verbs: VerbDictionary):
    low_name = name.lower()
    if low_name.startswith("the script of ") or low_name.startswith("script of "):
        short = name.split("of", 1)[1].strip()
        return _build_script(header_no, short, body)
    if any(line.lower().startswith("alternative") for _, line in body):
        return _build_operation(header_no, name, body, verbs)
    if any(line.lower().startswith("there is ") for _, line in body):
        return _build_disease(header_no, name, body)
    if body and all(
        " as " in line or line.split()[0].lower() in WAY_PREPOSITIONS for _, line in body
    ):
        return _build_action(header_no, name, body, verbs)
    raise FrameParseError(header_no, f"cannot classify frame {name!r} from its body")


def _build_script(header_no: int, name: str, body: list[tuple[int, str]]) -> ScriptFrame:
    if not body:
        raise FrameParseError(header_no, f"script {name!r} has no trigger line")
    trigger = body[0][1]
    consequences = []
    for no, line in body[1:]:
        toks = line.split()
        if len(toks) < 2:
            raise FrameParseError(no, f"consequence too short: {line!r}")
        subject = toks[0]
        if toks[1].lower() in ("can", "may"):
            modality = toks[1].lower()
            phrase = " ".join(toks[2:])
        else:
            modality = "does"
            phrase = " ".join(toks[1:])
        if not phrase:
            raise FrameParseError(no, f"consequence without a phrase: {line!r}")
        consequences.append(Consequence(line, subject, modality, phrase))
    return ScriptFrame(name=name, trigger=trigger, consequences=tuple(consequences))


def _build_operation(header_no: int, name: str, body: list[tuple[int, str]], verbs: VerbDictionary) -> OperationFrame:
    stages_by_alt: dict[int, list[Stage]] = {}
    alt_order: list[int] = []
    for no, line in body:
        head, sep, rest = line.partition(";")
        head_toks = head.split()
        if len(head_toks) != 2 or head_toks[0].lower() != "alternative" or not sep:
            raise FrameParseError(no, f"expected 'alternative N; <stage>', got {line!r}")
        try:
            index = int(head_toks[1])
        except ValueError:
            raise FrameParseError(no, f"alternative number must be an integer: {line!r}")
        stage = _parse_stage(no, rest.strip())
        if index not in stages_by_alt:
            stages_by_alt[index] = []
            alt_order.append(index)
        stages_by_alt[index].append(stage)
    alternatives = tuple(
        Alternative(index=i, stages=tuple(stages_by_alt[i])) for i in alt_order
    )
    return OperationFrame(
        name=name,
        planned_action=_first_verb_token(name, verbs),
        alternatives=alternatives,
    )


def _build_disease(header_no: int, name: str, body: list[tuple[int, str]]) -> DiseaseFrame:
    symptoms = []
    for no, line in body:
        if not line.lower().startswith("there is "):
            raise FrameParseError(no, f"expected 'there is <symptom>', got {line!r}")
        symptoms.append(line[len("there is "):].strip())
    return DiseaseFrame(name=name, symptoms=tuple(symptoms))


def _build_action(header_no: int, name: str, body: list[tuple[int, str]], verbs: VerbDictionary) -> ActionFrame:
    motives = []
    ways = []
    for no, line in body:
        if " as " in line:
            cause, _, cond = line.partition(" as ")
            cause = cause.strip()
            cond = cond.strip()
            if not cause or not cond:
                raise FrameParseError(no, f"motive needs '<cause> as <condition>': {line!r}")
            motives.append(Motive(cause=cause, condition=Condition.classify(cond)))
        else:
            toks = line.split()
            if len(toks) < 2 or toks[0].lower() not in WAY_PREPOSITIONS:
                raise FrameParseError(no, f"expected '<preposition> <tool>', got {line!r}")
            tool = " ".join(t for t in toks[1:] if t.lower() not in ("a", "an", "the"))
            ways.append(Way(text=line, tool=tool))
    verb = _first_verb_token(name, verbs) or normalize_phrase(name)
    return ActionFrame(name=name, verb=verb, motives=tuple(motives), ways=tuple(ways))


def _render_frame(frame) -> str:
    lines = []
    if isinstance(frame, ActionFrame):
        lines.append(f"frame is {frame.name}")
        for m in frame.motives:
            lines.append(f"{m.cause} as {m.condition.pattern}")
        for w in frame.ways:
            lines.append(w.text)
    elif isinstance(frame, OperationFrame):
        lines.append(f"frame is {frame.name}")
        for alt in frame.alternatives:
            for stage in alt.stages:
                lines.append(f"alternative {alt.index}; {stage.text}")
    elif isinstance(frame, ScriptFrame):
        lines.append(f"frame is the script of {frame.name}")
        lines.append(frame.trigger)
        for c in frame.consequences:
            lines.append(c.text)
    elif isinstance(frame, DiseaseFrame):
        lines.append(f"frame is {frame.name}")
        for s in frame.symptoms:
            lines.append(f"there is {s}")
    return "\n".join(lines)
