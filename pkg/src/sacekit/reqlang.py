"""Structured safety requirements in an EARS-like template grammar.

    req    := clause* main
    clause := ("When" | "While" | "Where") cond ","?  |  "If" cond ","? "then"
    main   := "the" name "shall" response "."?

A condition may carry a precondition separated by `` -- ``.
"""

from __future__ import annotations

import enum
import re
from collections import deque
from dataclasses import dataclass, field
from typing import Iterable

from .errors import (
    DanglingIf,
    EmptyResponse,
    NoShall,
    NoSystemName,
    RequirementSyntaxError,
)


class Keyword(str, enum.Enum):
    WHEN = "When"
    WHILE = "While"
    WHERE = "Where"
    IF = "If"


class Template(str, enum.Enum):
    UBIQUITOUS = "Ubiquitous"
    EVENT_DRIVEN = "EventDriven"
    UNWANTED_BEHAVIOUR = "UnwantedBehaviour"
    STATE_DRIVEN = "StateDriven"
    OPTIONAL_FEATURE = "OptionalFeature"
    COMPLEX = "Complex"


_SINGLE = {
    Keyword.WHEN: Template.EVENT_DRIVEN,
    Keyword.WHILE: Template.STATE_DRIVEN,
    Keyword.WHERE: Template.OPTIONAL_FEATURE,
    # repeated If clauses are an event-driven variant, not a single unwanted-behaviour trigger
    Keyword.IF: Template.EVENT_DRIVEN,
}

PRECONDITION_DELIMITER = " -- "


@dataclass(frozen=True)
class Clause:
    keyword: Keyword
    condition: str
    precondition: str | None = None

    def text(self) -> str:
        if self.precondition:
            return f"{self.precondition}{PRECONDITION_DELIMITER}{self.condition}"
        return self.condition


@dataclass(frozen=True)
class Requirement:
    template: Template
    clauses: tuple[Clause, ...]
    system: str
    response: str
    id: str | None = None
    raw: str = field(default="", compare=False)


def classify(clauses: Iterable[Clause]) -> Template:
    kws = [c.keyword for c in clauses]
    if not kws:
        return Template.UBIQUITOUS
    if len(set(kws)) >= 2:
        return Template.COMPLEX
    if len(kws) == 1 and kws[0] == Keyword.IF:
        return Template.UNWANTED_BEHAVIOUR
    return _SINGLE[kws[0]]


_WORD = re.compile(r"\S+")
_THE = re.compile(r"\bthe\b", re.IGNORECASE)
_THEN = re.compile(r"\bthen\b", re.IGNORECASE)
_SHALL = re.compile(r"\bshall\b", re.IGNORECASE)
_IF = re.compile(r"\bif\b", re.IGNORECASE)
_KEYWORDS = {k.value.lower(): k for k in Keyword}


def _norm(text: str) -> str:
    return " ".join(text.split())


def _split_first_word(seg: str) -> tuple[str, str]:
    m = _WORD.match(seg)
    if not m:
        return "", ""
    return m.group(0), seg[m.end():].strip()


class _Clause:
    def __init__(self, kw: Keyword, cond: str):
        self.kw = kw
        self.cond = cond
        self.then = False


def parse(text: str, id: str | None = None) -> Requirement:
    """Parse one requirement sentence.

    Raises:
        NoShall: the sentence has no ``shall``.
        EmptyResponse: nothing follows ``shall``.
        NoSystemName: no system name precedes ``shall``.
        DanglingIf: an If clause lacks ``then`` or a condition nests another ``if``.
    """
    s = _norm(text)
    if s.endswith("."):
        s = s[:-1].rstrip()
    m = _SHALL.search(s)
    if not m:
        raise NoShall(f"no 'shall' in {text!r}")
    prefix, response = s[: m.start()].strip(), s[m.end():].strip()
    if not response:
        raise EmptyResponse(f"nothing follows 'shall' in {text!r}")

    segments = deque(seg.strip() for seg in prefix.split(","))
    clauses: list[_Clause] = []
    main: str | None = None
    while segments:
        seg = segments.popleft()
        last = not segments
        if not seg:
            continue
        first, rest = _split_first_word(seg)
        low = first.lower()
        if low == "then":
            if not clauses or clauses[-1].kw != Keyword.IF or clauses[-1].then:
                raise DanglingIf(f"'then' without a preceding If clause in {text!r}")
            clauses[-1].then = True
            if rest:
                segments.appendleft(rest)
            continue
        if low in _KEYWORDS:
            kw = _KEYWORDS[low]
            if kw == Keyword.IF:
                t = _THEN.search(rest)
                if t:
                    c = _Clause(kw, rest[: t.start()].strip())
                    c.then = True
                    clauses.append(c)
                    tail = rest[t.end():].strip()
                    if tail:
                        segments.appendleft(tail)
                    elif last:
                        raise NoSystemName(f"no system name after 'then' in {text!r}")
                    continue
                if last:
                    raise DanglingIf(f"If clause without 'then' in {text!r}")
                clauses.append(_Clause(kw, rest))
                continue
            if last:
                hits = list(_THE.finditer(rest))
                if not hits:
                    raise NoSystemName(f"no system name in {text!r}")
                cut = hits[-1].start()
                clauses.append(_Clause(kw, rest[:cut].strip()))
                main = rest[cut:]
            else:
                clauses.append(_Clause(kw, rest))
            continue
        if last:
            main = seg
        elif clauses:
            clauses[-1].cond = f"{clauses[-1].cond}, {seg}"
        else:
            raise NoSystemName(f"text before the first clause is not a system name in {text!r}")

    for c in clauses:
        if c.kw == Keyword.IF and not c.then:
            raise DanglingIf(f"If clause without 'then' in {text!r}")
        if not c.cond:
            raise RequirementSyntaxError(f"empty {c.kw.value} condition in {text!r}")
        if _IF.search(c.cond):
            raise DanglingIf(f"nested conditional inside {c.kw.value} clause in {text!r}")

    if main is None:
        raise NoSystemName(f"no system name in {text!r}")
    first, rest = _split_first_word(main)
    system = rest if first.lower() == "the" else main.strip()
    if not system:
        raise NoSystemName(f"empty system name in {text!r}")

    built = []
    for c in clauses:
        pre = None
        cond = c.cond
        if PRECONDITION_DELIMITER in cond:
            pre, cond = (p.strip() for p in cond.split(PRECONDITION_DELIMITER, 1))
        built.append(Clause(c.kw, cond, pre or None))
    return Requirement(classify(built), tuple(built), system, response, id, raw=text)


def print_requirement(r: Requirement) -> str:
    """Render a requirement in canonical form; ``parse`` inverts it."""
    parts = []
    for c in r.clauses:
        if c.keyword == Keyword.IF:
            parts.append(f"{c.keyword.value} {c.text()}, then")
        else:
            parts.append(f"{c.keyword.value} {c.text()},")
    parts.append(f"the {r.system} shall {r.response}.")
    text = " ".join(parts)
    return text[0].upper() + text[1:]


# terminology

STOP_WORDS = frozenset("""
i me my myself we our ours ourselves you your yours yourself yourselves he him his himself
she her hers herself it its itself they them their theirs themselves what which who whom
this that these those am is are was were be been being have has had having do does did
doing a an the and but if or because as until while of at by for with about against between
into through during before after above below to from up down in out on off over under again
further then once here there when where why how all any both each few more most other some
such no nor not only own same so than too very s t can will just don should now d ll m o re
ve y ain aren couldn didn doesn hadn hasn haven isn ma mightn mustn needn shan shouldn wasn
weren won wouldn
""".split())

_TOKEN = re.compile(r"[A-Za-z]+")


def normalize_term(word: str) -> str:
    w = word.lower()
    if len(w) > 3 and w.endswith("s") and not w.endswith("ss"):
        w = w[:-1]
    return w


@dataclass(frozen=True)
class Ontology:
    """Known domain vocabulary; multi-word terms contribute each word."""

    terms: frozenset[str]

    @classmethod
    def of(cls, terms: Iterable[str]) -> "Ontology":
        words = set()
        for t in terms:
            for w in _TOKEN.findall(t):
                words.add(normalize_term(w))
        return cls(frozenset(words))

    def __contains__(self, word: str) -> bool:
        return normalize_term(word) in self.terms


@dataclass(frozen=True, order=True)
class TermWarning:
    location: str
    offset: int
    term: str

    def __str__(self) -> str:
        return f"unknown term {self.term!r} in {self.location} at {self.offset}"


def lint_terms(r: Requirement, ontology: Ontology) -> list[TermWarning]:
    """Flag content words in conditions and response missing from the ontology."""
    spans = [(f"clause {i}", c.text()) for i, c in enumerate(r.clauses, 1)]
    spans.append(("response", r.response))
    out = []
    for loc, text in spans:
        for m in _TOKEN.finditer(text):
            w = m.group(0).lower()
            if w in STOP_WORDS or normalize_term(w) in ontology.terms:
                continue
            out.append(TermWarning(loc, m.start(), w))
    return out
