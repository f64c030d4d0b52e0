"""Release acceptance gate.

One test per shipping criterion, each printing a PASS line after its
assertions so the suite doubles as a checklist:

    pytest tests/test_acceptance.py -v -s

The golden expectations here are frozen values, worked out by hand or
by the independent oracle in grids.py before the engine code existed;
they are intentionally not derived from the implementation under test.
"""

import math
import random
import time
from fractions import Fraction

from kbqa.cityplan import load_plan, load_speeds, parse_plan, round_minutes
from kbqa.cnl import CnlParser, render_answer
from kbqa.engine import DEDUCTIVE, PLAUSIBLE, UNKNOWN, YES, Engine
from kbqa.facts import Place, Timestamp
from kbqa.frames import KnowledgeBase, VerbDictionary

import grids
from conftest import build_store, fixture_path, read_lines

# The city-scenario question/answer pairs: rendered answer and validity.
GOLDEN = [
    ("Did Petrov shoot a girl on the seven of November?", "yes", PLAUSIBLE),
    ("Did Petrov shoot a girl in 9 Street1 Street?", "yes", PLAUSIBLE),
    ("Who shot a girl in 9 Street1 Street?", "Petrov", PLAUSIBLE),
    (
        "Why did Petrov shoot a girl in 9 Street1 Street?",
        "as subject is criminal",
        PLAUSIBLE,
    ),
    ("How did Petrov shoot a girl in 9 Street1 Street?", "by pistol", PLAUSIBLE),
    ("Who plans to rob office in 9 Street1 Street?", "Petrov", PLAUSIBLE),
    ("What does Petrov plan in 9 Street1 Street?", "to rob office", PLAUSIBLE),
    (
        "How does Petrov plan to rob office in 9 Street1 Street?",
        "to come in through window\nto open safe with tool",
        PLAUSIBLE,
    ),
    (
        "Why is the girl dead on the seven of November in 9 Street1 Street?",
        "as man shot girl",
        DEDUCTIVE,
    ),
]

MOTIVE_FACT = "Petrov is criminal."
TOOL_FACT = "Petrov has a pistol."
STAY_FACT = "Petrov met a friend in 9 Street1 Street."


def build_city_engine(drop: str | None = None):
    """Fresh parser/KB/engine over the city fixtures, optionally with
    one fact sentence left out."""
    verbs = VerbDictionary.default()
    parser = CnlParser(verbs)
    kb = KnowledgeBase(verbs)
    kb.load_frames_path(fixture_path("frames_city.txt"))
    plan = load_plan(fixture_path("plan_city.txt"))
    plan.speeds = load_speeds(fixture_path("speeds_city.txt"))
    sentences = [s for s in read_lines("facts_city.txt") if s != drop]
    store = build_store(parser, sentences)
    return parser, Engine(store, kb, plan=plan)


def test_golden_answers():
    """Loading the city fixtures end to end reproduces every golden
    question/answer pair, in under a second."""
    started = time.perf_counter()
    parser, engine = build_city_engine()
    for text, expected, _validity in GOLDEN:
        answer = engine.answer_question(parser.parse_question(text))
        assert answer.verdict == YES, text
        assert render_answer(answer) == expected, text
    elapsed = time.perf_counter() - started
    assert elapsed < 1.0, f"golden run took {elapsed:.2f}s"
    assert read_lines("questions_city.txt") == [text for text, _, _ in GOLDEN]
    print("\nACCEPTANCE 1 golden-answers: PASS")


def test_corpus_parsing_and_frame_round_trip():
    """Every corpus sentence and question parses; frame files survive a
    load -> serialize -> load cycle unchanged."""
    verbs = VerbDictionary.default()
    parser = CnlParser(verbs)
    for line in read_lines("corpus_sentences.txt") + read_lines("facts_city.txt"):
        parser.parse_fact(line)
    for line in read_lines("corpus_questions.txt") + read_lines("questions_city.txt"):
        parser.parse_question(line)

    kb = KnowledgeBase(verbs)
    kb.load_frames_path(fixture_path("frames_city.txt"))
    first = kb.serialize()
    again = KnowledgeBase(verbs)
    again.load_frames(first)
    assert again.serialize() == first
    print("\nACCEPTANCE 2 corpus-parsing-and-round-trip: PASS")


def test_routing_properties():
    """On 50 random rectangular grids (up to 20x20 blocks), 1000 random
    point pairs each: routes terminate within the crossing-count bound,
    consecutive crossings share a block, lengths dominate the straight
    line and the exact shortest-path oracle, and same-block pairs go
    straight. Whole sweep under 30 seconds."""
    rng = random.Random(20260819)
    started = time.perf_counter()
    for _ in range(50):
        nx, ny = rng.randint(1, 20), rng.randint(1, 20)
        plan = parse_plan(grids.make_grid(nx, ny))
        ncross = (nx + 1) * (ny + 1)
        width, height = nx * 100.0, ny * 100.0
        dist = grids.oracle_distances(nx, ny, 100.0, 100.0)
        for _ in range(1000):
            p = (rng.uniform(0.0, width), rng.uniform(0.0, height))
            q = (rng.uniform(0.0, width), rng.uniform(0.0, height))
            path = plan.route(p, q)
            assert path.waypoints[0] == p and path.waypoints[-1] == q
            assert len(path.crossing_codes) <= ncross + 1
            for a, b in zip(path.crossing_codes, path.crossing_codes[1:]):
                assert grids.crossings_share_block(a, b, nx, ny)
            straight = math.hypot(p[0] - q[0], p[1] - q[1])
            assert path.total_length >= straight - 1e-9
            oracle = grids.oracle_route_length(p, q, nx, ny, 100.0, 100.0, dist)
            assert path.total_length >= oracle - 1e-6
            same_block = set(grids.containing_blocks(p, nx, ny, 100.0, 100.0)) & set(
                grids.containing_blocks(q, nx, ny, 100.0, 100.0)
            )
            if same_block:
                assert abs(path.total_length - oracle) <= 1e-9
    elapsed = time.perf_counter() - started
    assert elapsed < 30.0, f"routing sweep took {elapsed:.1f}s"
    print(f"\nACCEPTANCE 3 routing-properties: PASS ({elapsed:.1f}s)")


def test_hand_traced_route():
    """The 2x2 fixture town routes match the manual traces worked out by
    hand before the router was written."""
    plan = load_plan(fixture_path("plan_city.txt"))

    corner = plan.route((0.0, 0.0), (200.0, 200.0))
    assert corner.waypoints == ((0.0, 0.0), (100.0, 0.0), (100.0, 100.0), (200.0, 200.0))
    assert corner.crossing_codes == (1, 2, 5)
    assert abs(corner.total_length - 341.4213562373095) < 1e-9

    interior = plan.route((10.0, 10.0), (190.0, 190.0))
    assert interior.waypoints == ((10.0, 10.0), (100.0, 100.0), (190.0, 190.0))
    assert interior.crossing_codes == (5,)
    assert abs(interior.total_length - 254.55844122715712) < 1e-9
    print("\nACCEPTANCE 4 hand-traced-route: PASS")


def test_feasibility_arithmetic():
    """A 1 km walk at the default 5 km/h is 12 minutes on the nose, and a
    10 km gap with 5 minutes of slack is judged out of reach."""
    km_town = parse_plan(grids.make_grid(1, 1, 1000.0, 1000.0))
    walk = km_town.route((0.0, 0.0), (1000.0, 0.0))
    minutes = km_town.travel_time(walk, "pedestrian")
    assert minutes == 12.0
    assert round_minutes(minutes) == 12
    # halves round up
    assert round_minutes(0.5) == 1
    assert round_minutes(2.5) == 3
    assert round_minutes(11.49) == 11

    verbs = VerbDictionary.default()
    parser = CnlParser(verbs)
    kb = KnowledgeBase(verbs)
    kb.load_frames_path(fixture_path("frames_city.txt"))
    wide_town = parse_plan(grids.make_grid(1, 1, 10000.0, 10000.0))
    store = build_store(
        parser, ["Ivanov met a friend at 12 o'clock on the first of May in V1 Street."]
    )
    engine = Engine(store, kb, plan=wide_town)
    # V1 and V2 midpoints are exactly 10 km apart; five minutes later.
    moments_later = Timestamp(month=5, day=1, hour=12, minute=5, qualifier="at")
    verdict = engine.check_stay("Ivanov", Place("V2"), moments_later).verdict
    assert verdict == UNKNOWN
    print("\nACCEPTANCE 5 feasibility-arithmetic: PASS")


def test_ablations():
    """Removing the motive fact, the tool fact, or the stay-supporting
    fact each flips the lead hypothesis from yes to unknown."""
    question = GOLDEN[0][0]
    baseline_parser, baseline = build_city_engine()
    parsed = baseline_parser.parse_question(question)
    assert baseline.answer_question(parsed).verdict == YES
    for missing in (MOTIVE_FACT, TOOL_FACT, STAY_FACT):
        _, engine = build_city_engine(drop=missing)
        verdict = engine.answer_question(parsed).verdict
        assert verdict == UNKNOWN, f"dropping {missing!r} left verdict {verdict}"
    print("\nACCEPTANCE 6 ablations: PASS")


def test_validity_tags():
    """Golden answers leaning on undated facts or assumed situations are
    tagged plausible; the fully dated event-cause answer is deductive."""
    parser, engine = build_city_engine()
    for text, _expected, validity in GOLDEN:
        answer = engine.answer_question(parser.parse_question(text))
        assert answer.validity == validity, text
    print("\nACCEPTANCE 7 validity-tags: PASS")


def test_diagnosis_and_scripts():
    """Two of three influenza symptoms diagnose influenza at 2/3, and a
    distress trigger yields the may-die consequence; both plausible."""
    verbs = VerbDictionary.default()
    parser = CnlParser(verbs)
    kb = KnowledgeBase(verbs)
    kb.load_frames_path(fixture_path("frames_city.txt"))

    ranked = kb.match_diseases(["high temperature", "cough"])
    assert ranked[0] == ("influenza", Fraction(2, 3))

    sick = Engine(
        build_store(parser, ["Petrov has a cough.", "Petrov is high temperature."]), kb
    )
    diagnosis = sick.determine_person_state("Petrov")
    assert diagnosis.bindings == [("state", "influenza")]
    assert diagnosis.validity == PLAUSIBLE

    stranded = Engine(
        build_store(parser, ["Ivanov has a ship.", "The ship has distress."]), kb
    )
    outlook = stranded.determine_person_state("Ivanov")
    assert ("state", "may die from lack of water and food") in outlook.bindings
    assert outlook.validity == PLAUSIBLE
    print("\nACCEPTANCE 8 diagnosis-and-scripts: PASS")
