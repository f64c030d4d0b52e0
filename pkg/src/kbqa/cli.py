"""Command line front end: batch question answering and a small REPL.

Batch mode prints, for every question, the rendered answer followed by
one ``validity:`` line. A controlled-English parse error aborts with
exit code 2; an engine error (say, an operation no frame describes)
prints an ``error:`` line for that question and carries on.
"""

from __future__ import annotations

import argparse
import sys
from dataclasses import dataclass, field
from pathlib import Path

from .cityplan import CityPlan, PlanLoadError, load_plan, load_speeds
from .cnl import CnlParser, render_answer
from .engine import Answer, Engine, format_trail
from .errors import KbqaError
from .facts import FactStore, Timestamp
from .frames import KnowledgeBase, VerbDictionary
from .vocabulary import MONTH_LENGTHS


def _parse_asof(text: str) -> Timestamp:
    """An --asof date, YYYY-MM-DD or MM-DD; the year is dropped."""
    parts = text.strip().split("-")
    if len(parts) == 3:
        parts = parts[1:]
    if len(parts) != 2:
        raise argparse.ArgumentTypeError(f"expected YYYY-MM-DD or MM-DD, got {text!r}")
    try:
        month, day = int(parts[0]), int(parts[1])
    except ValueError:
        raise argparse.ArgumentTypeError(f"expected numbers in {text!r}")
    if not 1 <= month <= 12 or not 1 <= day <= MONTH_LENGTHS[month - 1]:
        raise argparse.ArgumentTypeError(f"no such date: {text!r}")
    return Timestamp(month=month, day=day)


@dataclass
class Session:
    """Everything one run needs, shared by batch mode and the REPL."""

    store: FactStore
    kb: KnowledgeBase
    parser: CnlParser
    engine: Engine
    last_answer: Answer | None = None
    errors: list[str] = field(default_factory=list)

    def load_facts(self, path: str) -> int:
        count = 0
        for line_no, line in _content_lines(path):
            try:
                fact = self.parser.parse_fact(line)
            except KbqaError as exc:
                raise KbqaError(f"{path}:{line_no}: {exc}") from exc
            self.store.assert_fact(fact)
            count += 1
        return count

    def load_frames(self, path: str) -> int:
        try:
            return self.kb.load_frames_path(path)
        except KbqaError as exc:
            raise KbqaError(f"{path}: {exc}") from exc

    def load_plan(self, path: str) -> CityPlan:
        speeds = self.engine.plan.speeds if self.engine.plan is not None else None
        try:
            plan = load_plan(path)
        except PlanLoadError as exc:
            raise KbqaError(f"{path}: {exc}") from exc
        plan.speeds = speeds
        self.engine.plan = plan
        return plan

    def ask(self, text: str) -> Answer:
        question = self.parser.parse_question(text)
        answer = self.engine.answer_question(question)
        self.last_answer = answer
        return answer


def _content_lines(path: str):
    """(line_no, text) for the non-blank, non-comment lines of a file."""
    raw = Path(path).read_text(encoding="utf-8")
    for line_no, line in enumerate(raw.splitlines(), 1):
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        yield line_no, text


def build_session(args: argparse.Namespace) -> Session:
    verbs = (
        VerbDictionary.from_text(Path(args.verbs).read_text(encoding="utf-8"))
        if args.verbs
        else VerbDictionary.default()
    )
    kb = KnowledgeBase(verbs)
    store = FactStore()
    plan = None
    if args.plan:
        plan = load_plan(args.plan)
        if args.speeds:
            plan.speeds = load_speeds(args.speeds)
    engine = Engine(
        store,
        kb,
        plan=plan,
        travel_mode=args.mode,
        recency_days=args.recency_days,
        asof=args.asof,
    )
    session = Session(store=store, kb=kb, parser=CnlParser(verbs), engine=engine)
    for path in args.frames or []:
        session.load_frames(path)
    for path in args.facts or []:
        session.load_facts(path)
    return session


def run_batch(session: Session, questions: list[tuple[str, str]], verbose: bool) -> int:
    """Answer (origin, text) pairs in order; exit 2 on a parse error."""
    for origin, text in questions:
        try:
            answer = session.ask(text)
        except KbqaError as exc:
            if exc.__class__.__name__.endswith("ParseError"):
                print(f"error: {origin}: {exc}", file=sys.stderr)
                return 2
            print(f"error: {exc}")
            continue
        print(render_answer(answer))
        print(f"validity: {answer.validity}")
        if verbose:
            for line in format_trail(answer):
                print(f"  {line}")
    return 0


REPL_HELP = """\
commands:
  ask <question>        answer a question (a bare line ending in ? works too)
  load facts <path>     read one sentence per line into the store
  load frames <path>    read frame definitions
  load plan <path>      replace the city plan
  explain               show the justification of the last answer
  facts                 list the stored facts
  quit                  leave"""


def repl(session: Session) -> int:
    interactive = sys.stdin.isatty()
    if interactive:
        print("type 'help' for commands")
    while True:
        if interactive:
            print("? ", end="", flush=True)
        line = sys.stdin.readline()
        if not line:
            break
        text = line.strip()
        if not text or text.startswith("#"):
            continue
        lower = text.lower()
        try:
            if lower in ("quit", "exit"):
                break
            elif lower == "help":
                print(REPL_HELP)
            elif lower == "explain":
                if session.last_answer is None:
                    print("nothing answered yet")
                else:
                    for out in format_trail(session.last_answer):
                        print(out)
            elif lower == "facts":
                for fact in session.store:
                    print(f"{fact.id}. {fact.source or fact}")
            elif lower.startswith("load "):
                parts = text.split(None, 2)
                if len(parts) < 3 or parts[1].lower() not in ("facts", "frames", "plan"):
                    print("usage: load facts|frames|plan <path>")
                    continue
                what, path = parts[1].lower(), parts[2]
                if what == "facts":
                    print(f"{session.load_facts(path)} facts")
                elif what == "frames":
                    print(f"{session.load_frames(path)} frames")
                else:
                    session.load_plan(path)
                    print("plan loaded")
            elif lower.startswith("ask "):
                answer = session.ask(text[4:])
                print(render_answer(answer))
                print(f"validity: {answer.validity}")
            elif text.endswith("?"):
                answer = session.ask(text)
                print(render_answer(answer))
                print(f"validity: {answer.validity}")
            else:
                fact = session.parser.parse_fact(text)
                fid = session.store.assert_fact(fact)
                print(f"fact {fid}")
        except (KbqaError, OSError) as exc:
            print(f"error: {exc}")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(
        prog="kbqa",
        description="Answer questions over controlled-English facts, "
        "frame knowledge, and a city plan.",
    )
    parser.add_argument("--facts", nargs="+", action="extend", default=[],
                        metavar="PATH", help="fact files, one sentence per line")
    parser.add_argument("--frames", nargs="+", action="extend", default=[],
                        metavar="PATH", help="frame definition files")
    parser.add_argument("--plan", metavar="PATH", help="city plan file")
    parser.add_argument("--speeds", metavar="PATH", help="street speed table")
    parser.add_argument("--verbs", metavar="PATH", help="verb dictionary override")
    parser.add_argument("--asof", type=_parse_asof, metavar="DATE",
                        help="reference date for recency (YYYY-MM-DD)")
    parser.add_argument("--recency-days", type=int, default=7, metavar="N",
                        help="days a fact stays recent (default 7)")
    parser.add_argument("--mode", default="pedestrian", metavar="MODE",
                        help="travel mode for feasibility checks (default pedestrian)")
    parser.add_argument("--questions", metavar="PATH",
                        help="answer the questions in this file and exit")
    parser.add_argument("--ask", action="append", default=[], metavar="QUESTION",
                        help="answer this question and exit (repeatable)")
    parser.add_argument("--verbose", action="store_true",
                        help="print justification trails after each answer")
    args = parser.parse_args(argv)

    try:
        session = build_session(args)
    except (KbqaError, OSError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2

    batch: list[tuple[str, str]] = []
    if args.questions:
        try:
            batch.extend(
                (f"{args.questions}:{n}", text)
                for n, text in _content_lines(args.questions)
            )
        except OSError as exc:
            print(f"error: {exc}", file=sys.stderr)
            return 2
    batch.extend(("--ask", text) for text in args.ask)

    if batch:
        return run_batch(session, batch, args.verbose)
    return repl(session)


if __name__ == "__main__":
    sys.exit(main())
