"""Synthetic planted-error corpus generation.

A deterministic, rule-based stand-in for LLM error simulation: each sample
is a template-built (passage, answer, question) triple whose question is
then mangled by exactly one injector, so the gold label is known by
construction. Used for desk-scale training fixtures and tests.
"""
from __future__ import annotations

import random
import re
from dataclasses import dataclass
from typing import Dict, List, Optional, Sequence

from .corpus import ErrorLabelSet, HumanScoreRecord, LabeledSample, QGSample, LabelSource
from .features import answer_wh_compatibility
from .taxonomy import Category, Dimension, ErrorType, errors_for_dimension
from .text import FUNCTION_WORDS, longest_common_span, tokenize

PEOPLE = [
    "Marie Duval", "Viktor Lindholm", "Elena Marchetti", "Samuel Okafor",
    "Ingrid Bergstrom", "Tomas Reyes", "Amara Diallo", "Henrik Vasquez",
    "Livia Castellan", "Oskar Jelinek", "Nadia Ferreira", "Ruben Aldana",
    "Greta Holmberg", "Cyrus Panahi", "Beatrix Lombardi", "Emil Radek",
    "Sofia Brandt", "Leon Moreau", "Clara Visser", "Mateo Ibarra",
    "Hanna Strand", "Dmitri Volkov", "Paula Mendes", "Arthur Kessler",
]
CITIES = [
    "Lyon", "Porto", "Krakow", "Valencia", "Bergen", "Antwerp", "Seville",
    "Turin", "Dresden", "Ghent", "Malmo", "Zagreb", "Cordoba", "Bologna",
    "Aarhus", "Granada",
]
COUNTRIES = [
    "France", "Portugal", "Poland", "Spain", "Norway", "Belgium", "Italy",
    "Germany", "Croatia", "Denmark", "Austria", "Hungary",
]
PROFESSIONS = [
    "botanist", "architect", "composer", "historian", "chemist",
    "cartographer", "sculptor", "astronomer", "engineer", "novelist",
    "geologist", "physician",
]
FIELDS = [
    "geology", "medicine", "astronomy", "music", "agriculture",
    "mathematics", "philology", "botany",
]
WORKS = [
    "observatory", "concert hall", "botanical garden", "suspension bridge",
    "city archive", "marble fountain", "teaching hospital", "tidal canal",
]
EVENTS = [
    "harvest festival", "glass exposition", "printing fair",
    "maritime congress", "textile exhibition", "astronomy week",
]
MINERALS = ["copper", "basalt", "limestone", "graphite", "quartz", "marble"]
INDUSTRIES = ["mining", "ceramics", "shipping", "textile", "printing", "glassmaking"]
INSTITUTIONS = [
    "maritime museum", "botanical institute", "music conservatory",
    "natural history museum", "public observatory", "medical academy",
]
ITEMS = [
    "manuscripts", "fossils", "instruments", "engravings",
    "herbarium sheets", "star charts",
]

# Clauses that ask for information no template passage ever states.
_INM_CLAUSES = [
    "according to the annual budget report",
    "as stated in the confidential survey",
    "based on the televised interview",
    "according to the courtroom testimony",
]

_VAGUE_SUBSTITUTIONS = [
    ("person", "this person"),
    ("city", "that place"),
    ("year", "some year"),
    ("thing", "it"),
]


@dataclass(frozen=True)
class _QA:
    answer: str
    question: str
    statement: str       # declarative form, for the not-a-question injector
    fact_question: str   # same target, one detail contradicting the passage


@dataclass(frozen=True)
class _Instance:
    passage: str
    qas: List[_QA]
    # slot value -> vague replacement, applied to the question text
    vague_map: Dict[str, str]


def _pick(rng: random.Random, pool: Sequence[str], *, exclude: str = "") -> str:
    value = rng.choice(pool)
    while value == exclude:
        value = rng.choice(pool)
    return value


def _biography(rng: random.Random) -> _Instance:
    person = rng.choice(PEOPLE)
    first = person.split()[0]
    city = rng.choice(CITIES)
    city2 = _pick(rng, CITIES, exclude=city)
    country = rng.choice(COUNTRIES)
    year = str(rng.randrange(1820, 1935))
    year2 = str(int(year) + rng.randrange(25, 45))
    profession = rng.choice(PROFESSIONS)
    field = rng.choice(FIELDS)
    work = rng.choice(WORKS)
    wrong_year = str(rng.randrange(1700, 1800))
    wrong_prof = _pick(rng, PROFESSIONS, exclude=profession)
    passage = (
        f"{person} was born in {city} in {year}. After studying {field} at the "
        f"national academy, {first} trained as a {profession}. In {year2}, "
        f"{first} completed the {work} that brought lasting fame to {city2} "
        f"across {country}."
    )
    qas = [
        _QA(
            answer=city,
            question=f"In which city was {person} born?",
            statement=f"{person} was born in {city}.",
            fact_question=f"In which city was {person} born in {wrong_year}?",
        ),
        _QA(
            answer=year,
            question=f"In what year was {person} born?",
            statement=f"{person} was born in {year}.",
            fact_question=f"In what year was {person}, the famous {wrong_prof}, born?",
        ),
        _QA(
            answer=profession,
            question=f"What profession did {person} pursue?",
            statement=f"{person} worked as a {profession}.",
            fact_question=f"What profession did {person} pursue after {wrong_year}?",
        ),
        _QA(
            answer=work,
            question=f"What did {person} complete in {year2}?",
            statement=f"{person} completed the {work} in {year2}.",
            fact_question=f"What did {person}, the famous {wrong_prof}, complete in {year2}?",
        ),
    ]
    vague = {person: "this person", first: "they", city: "that place",
             year: "some year", year2: "some year", f"the {work}": "that project"}
    return _Instance(passage=passage, qas=qas, vague_map=vague)


def _event(rng: random.Random) -> _Instance:
    event = rng.choice(EVENTS)
    city = rng.choice(CITIES)
    country = rng.choice(COUNTRIES)
    person = rng.choice(PEOPLE)
    year = str(rng.randrange(1850, 1960))
    n = str(rng.randrange(2, 9))
    wrong_city = _pick(rng, CITIES, exclude=city)
    wrong_year = str(rng.randrange(1700, 1800))
    passage = (
        f"The {event} opened in {city} in {year}. Organizers led by {person} "
        f"spent {n} years preparing the program. Visitors travelled from every "
        f"region of {country} to attend the {event}."
    )
    qas = [
        _QA(
            answer=year,
            question=f"In what year did the {event} open?",
            statement=f"The {event} opened in {year}.",
            fact_question=f"In what year did the {event} open in {wrong_city}?",
        ),
        _QA(
            answer=city,
            question=f"Where did the {event} open?",
            statement=f"The {event} opened in {city}.",
            fact_question=f"Where did the {event} open in {wrong_year}?",
        ),
        _QA(
            answer=person,
            question=f"Who led the organizers of the {event}?",
            statement=f"{person} led the organizers of the {event}.",
            fact_question=f"Who led the organizers of the {event} in {wrong_city}?",
        ),
    ]
    vague = {f"the {event}": "that event", city: "that place",
             year: "some year", person: "this person"}
    return _Instance(passage=passage, qas=qas, vague_map=vague)


def _discovery(rng: random.Random) -> _Instance:
    person = rng.choice(PEOPLE)
    mineral = rng.choice(MINERALS)
    city = rng.choice(CITIES)
    country = rng.choice(COUNTRIES)
    industry = rng.choice(INDUSTRIES)
    year = str(rng.randrange(1830, 1950))
    months = str(rng.randrange(3, 19))
    wrong_mineral = _pick(rng, MINERALS, exclude=mineral)
    wrong_year = str(rng.randrange(1700, 1800))
    passage = (
        f"{person} discovered rich {mineral} deposits near {city} in {year}. "
        f"The find reshaped the {industry} industry of {country}. Independent "
        f"laboratories confirmed the results after {months} months of careful "
        f"analysis."
    )
    qas = [
        _QA(
            answer=person,
            question=f"Who discovered the {mineral} deposits near {city}?",
            statement=f"{person} discovered the {mineral} deposits near {city}.",
            fact_question=f"Who discovered the {wrong_mineral} deposits near {city}?",
        ),
        _QA(
            answer=year,
            question=f"In what year were the {mineral} deposits near {city} discovered?",
            statement=f"The {mineral} deposits near {city} were discovered in {year}.",
            fact_question=f"In what year were the {wrong_mineral} deposits near {city} discovered?",
        ),
        _QA(
            answer=mineral,
            question=f"What kind of deposits did {person} discover near {city}?",
            statement=f"{person} discovered {mineral} deposits near {city}.",
            fact_question=f"What kind of deposits did {person} discover near {city} in {wrong_year}?",
        ),
    ]
    vague = {person: "this person", f"the {mineral} deposits": "those deposits",
             city: "that place", year: "some year"}
    return _Instance(passage=passage, qas=qas, vague_map=vague)


def _institution(rng: random.Random) -> _Instance:
    institution = rng.choice(INSTITUTIONS)
    city = rng.choice(CITIES)
    person = rng.choice(PEOPLE)
    country = rng.choice(COUNTRIES)
    year = str(rng.randrange(1780, 1930))
    count = str(rng.randrange(2, 40))
    items = rng.choice(ITEMS)
    wrong_city = _pick(rng, CITIES, exclude=city)
    wrong_year = str(rng.randrange(1600, 1700))
    passage = (
        f"The {institution} of {city} was founded by {person} in {year}. Its "
        f"collection holds over {count} thousand {items} gathered from across "
        f"{country}. Scholars visit the {institution} each season to study the "
        f"rare {items}."
    )
    qas = [
        _QA(
            answer=person,
            question=f"Who founded the {institution} of {city}?",
            statement=f"{person} founded the {institution} of {city}.",
            fact_question=f"Who founded the {institution} of {wrong_city}?",
        ),
        _QA(
            answer=year,
            question=f"In what year was the {institution} of {city} founded?",
            statement=f"The {institution} of {city} was founded in {year}.",
            fact_question=f"In what year was the {institution} of {wrong_city} founded?",
        ),
        _QA(
            answer=city,
            question=f"In which city was the {institution} founded?",
            statement=f"The {institution} was founded in {city}.",
            fact_question=f"In which city was the {institution} founded in {wrong_year}?",
        ),
    ]
    vague = {f"the {institution} of {city}": "that institution",
             f"the {institution}": "that institution",
             person: "this person", city: "that place", year: "some year"}
    return _Instance(passage=passage, qas=qas, vague_map=vague)


_FAMILIES = (_biography, _event, _discovery, _institution)

_WORD_RE = re.compile(r"[A-Za-z0-9']+")


def _truncate_question(question: str, rng: random.Random) -> str:
    """Cut the question mid-phrase so it ends on a function word, unfinished."""
    matches = list(_WORD_RE.finditer(question))
    cut_candidates = [
        m for i, m in enumerate(matches)
        if 1 <= i <= len(matches) - 2 and m.group().lower() in FUNCTION_WORDS
    ]
    if not cut_candidates:
        # No interior function word: keep the first half, then append one.
        keep = matches[: max(1, len(matches) // 2)]
        return question[: keep[-1].end()] + " of the"
    cut = cut_candidates[len(cut_candidates) // 2]
    return question[: cut.end()]


def _strip_question_form(qa: _QA) -> str:
    return qa.statement


def _misspell(question: str, rng: random.Random) -> str:
    """Swap two adjacent interior characters in one or two plain content words."""
    words = [
        m for m in _WORD_RE.finditer(question)
        if len(m.group()) >= 5 and m.group().islower()
        and m.group().lower() not in FUNCTION_WORDS and m.group().isalpha()
    ]
    if not words:  # fall back to any alphabetic word >= 5 chars
        words = [m for m in _WORD_RE.finditer(question) if len(m.group()) >= 5 and m.group().isalpha()]
    rng.shuffle(words)
    targets = sorted(words[: rng.choice((1, 2))], key=lambda m: m.start())
    out = question
    for m in reversed(targets):
        w = m.group()
        for i in range(1, len(w) - 2):
            if w[i] != w[i + 1]:
                mangled = w[:i] + w[i + 1] + w[i] + w[i + 2:]
                break
        else:
            mangled = w[1] + w[0] + w[2:]
        out = out[: m.start()] + mangled + out[m.end():]
    return out


def _scramble_grammar(question: str) -> str:
    """Move the first auxiliary to the end of the question: word-order error."""
    tokens = _WORD_RE.findall(question)
    aux_idx = next(
        (i for i, t in enumerate(tokens)
         if t.lower() in {"was", "were", "did", "does", "do", "is", "are", "has", "have"}),
        None,
    )
    if aux_idx is None:
        tokens = tokens[1:] + tokens[:1]
    else:
        aux = tokens.pop(aux_idx)
        tokens.append(aux)
    return " ".join(tokens) + "?"


def _pronominalize(question: str, vague_map: Dict[str, str]) -> str:
    out = question
    for value, replacement in sorted(vague_map.items(), key=lambda kv: -len(kv[0])):
        out = out.replace(value, replacement)
    return out


def _splice_passage_span(question: str, passage: str, rng: random.Random) -> str:
    """Embed a contiguous passage span of >= 15 tokens into the question."""
    matches = list(_WORD_RE.finditer(passage))
    span_len = min(len(matches), 15 + rng.randrange(0, 5))
    start = rng.randrange(0, max(1, len(matches) - span_len + 1))
    span = passage[matches[start].start(): matches[start + span_len - 1].end()]
    return f"Given that {span}, {question[0].lower()}{question[1:]}"


def _append_unstated_info(question: str, rng: random.Random) -> str:
    clause = rng.choice(_INM_CLAUSES)
    return f"{question[:-1].rstrip()} {clause}?"


def generate_planted_corpus(
    seed: int,
    n: int,
    mix: Optional[Dict[ErrorType, float]] = None,
    id_prefix: Optional[str] = None,
) -> List[LabeledSample]:
    """Generate ``n`` labeled samples whose single error label is planted by rule.

    The mix maps error types to sampling weights (missing types get weight 0).
    Identical (seed, n, mix) always produces the identical corpus.
    """
    if mix is None:
        mix = {e: 1.0 for e in ErrorType}
    if any(w < 0 for w in mix.values()):
        raise ValueError("mix weights must be non-negative")
    types = [e for e in ErrorType if mix.get(e, 0.0) > 0]
    weights = [float(mix[e]) for e in types]
    if n > 0 and not types:
        raise ValueError("mix must give positive weight to at least one error type")
    rng = random.Random(seed)
    prefix = id_prefix if id_prefix is not None else f"p{seed}"
    out: List[LabeledSample] = []
    for i in range(n):
        error = rng.choices(types, weights=weights, k=1)[0]
        family = rng.choice(_FAMILIES)
        inst = family(rng)
        qa = rng.choice(inst.qas)
        question = qa.question
        if error is ErrorType.INC:
            question = _truncate_question(question, rng)
        elif error is ErrorType.NAQ:
            question = _strip_question_form(qa)
        elif error is ErrorType.SPELL:
            question = _misspell(question, rng)
        elif error is ErrorType.GRAM:
            question = _scramble_grammar(question)
        elif error is ErrorType.VAG:
            question = _pronominalize(question, inst.vague_map)
        elif error is ErrorType.COPY:
            question = _splice_passage_span(question, inst.passage, rng)
        elif error is ErrorType.OTP:
            other = _pick_other_family(family)(rng)
            question = rng.choice(other.qas).question
        elif error is ErrorType.FACT:
            question = qa.fact_question
        elif error is ErrorType.INM:
            question = _append_unstated_info(question, rng)
        elif error is ErrorType.OTA:
            # Aim the question at a different answer span; prefer the least
            # type-compatible alternative so the mismatch is visible.
            others = [q for q in inst.qas if q.answer != qa.answer]
            question = min(
                (q.question for q in others),
                key=lambda q: answer_wh_compatibility(q, qa.answer),
            )
        sample = QGSample(
            id=f"{prefix}-{i:05d}",
            passage=inst.passage,
            answer=qa.answer,
            question=question,
            source="planted",
        )
        out.append(
            LabeledSample(
                sample=sample,
                labels=ErrorLabelSet({error}),
                label_source=LabelSource.SYNTHESIZED,
            )
        )
    return out


def _pick_other_family(family):
    idx = _FAMILIES.index(family)
    return _FAMILIES[(idx + 2) % len(_FAMILIES)]


# --- detector oracles (for tests: re-derive injector labels from text) -------

def detect_copy(sample: QGSample) -> bool:
    return longest_common_span(tokenize(sample.question), tokenize(sample.passage)) >= 15


def detect_incomplete(sample: QGSample) -> bool:
    if sample.question.rstrip().endswith("?"):
        return False
    tokens = tokenize(sample.question)
    return bool(tokens) and tokens[-1] in FUNCTION_WORDS


# --- synthetic human judgments ------------------------------------------------

def derive_human_scores(dataset: Sequence[LabeledSample]) -> List[HumanScoreRecord]:
    """Map planted labels to per-dimension 3-point scores.

    A dimension unaffected by the sample's errors scores 3; a mapped
    structural/linguistic error scores 2; a mapped content error scores 1.
    """
    records: List[HumanScoreRecord] = []
    for item in dataset:
        real_errors = {e for e in item.labels.errors if e is not ErrorType.NO_ERR}
        for dim in Dimension:
            mapped = real_errors & errors_for_dimension(dim)
            if not mapped:
                score = 3
            elif any(e.category is Category.CONTENT_RELATED for e in mapped):
                score = 1
            else:
                score = 2
            records.append(
                HumanScoreRecord(sample_id=item.sample.id, dimension=dim, score=score)
            )
    return records
