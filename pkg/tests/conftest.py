import sys
from pathlib import Path

import pytest

sys.path.insert(0, str(Path(__file__).parent))  # for the grids helper

from kbqa.cityplan import load_plan, load_speeds
from kbqa.cnl import CnlParser
from kbqa.engine import Engine
from kbqa.facts import FactStore
from kbqa.frames import KnowledgeBase, VerbDictionary

FIXTURES = Path(__file__).resolve().parent.parent / "fixtures"


def fixture_path(name: str) -> Path:
    return FIXTURES / name


def read_lines(name: str) -> list[str]:
    out = []
    for line in fixture_path(name).read_text(encoding="utf-8").splitlines():
        text = line.strip()
        if text and not text.startswith("#"):
            out.append(text)
    return out


def build_store(parser: CnlParser, sentences: list[str]) -> FactStore:
    store = FactStore()
    for s in sentences:
        store.assert_fact(parser.parse_fact(s))
    return store


@pytest.fixture(scope="session")
def verbs() -> VerbDictionary:
    return VerbDictionary.default()


@pytest.fixture
def parser(verbs) -> CnlParser:
    return CnlParser(verbs)


@pytest.fixture
def kb(verbs) -> KnowledgeBase:
    base = KnowledgeBase(verbs)
    base.load_frames_path(fixture_path("frames_city.txt"))
    return base


@pytest.fixture
def city_plan():
    plan = load_plan(fixture_path("plan_city.txt"))
    plan.speeds = load_speeds(fixture_path("speeds_city.txt"))
    return plan


@pytest.fixture
def golden_store(parser) -> FactStore:
    return build_store(parser, read_lines("facts_city.txt"))


@pytest.fixture
def golden_engine(golden_store, kb, city_plan) -> Engine:
    return Engine(golden_store, kb, plan=city_plan)
