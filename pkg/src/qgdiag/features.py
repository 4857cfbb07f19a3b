"""Deterministic feature extraction over (passage, answer, question) triples.

The recipe is fixed: 11 named dense features (all scaled into [0, 1]) plus a
hashed bag of question uni/bi-grams over 4096 buckets. No fitted state, so
two runs on the same sample always produce the same vector.
"""
from __future__ import annotations

import hashlib
import re
from dataclasses import dataclass
from typing import Dict, List, Sequence, Tuple

import numpy as np

from .corpus import QGSample
from .text import AUX_WORDS, FUNCTION_WORDS, WH_WORDS, content_tokens, longest_common_span, tokenize

HASH_BUCKETS = 4096

DENSE_FEATURE_NAMES: Tuple[str, ...] = (
    "question_length",
    "ends_with_question_mark",
    "leading_wh_or_aux",
    "common_passage_span_ratio",
    "passage_content_overlap",
    "passage_absent_fraction",
    "answer_wh_compatibility",
    "out_of_lexicon_rate",
    "trailing_function_word",
    "too_short",
    "answer_token_overlap",
)

DENSE_DIM = len(DENSE_FEATURE_NAMES)
TOTAL_DIM = DENSE_DIM + HASH_BUCKETS

# Compact built-in lexicon: closed-class words plus everyday nouns/verbs.
# Out-of-lexicon detection also whitelists passage/answer tokens and
# capitalized tokens, so this list only needs ordinary vocabulary.
_LEXICON_WORDS = """
about above academy according account across act add after again against age
ago agreement agriculture air all almost alone along already also although
always among amount analysis ancient animal annual another answer any anyone
anything appear apply archive area arm army around art article artist ask
astronomer astronomy attend attention author away back bad balance based
basalt base basic be bear beautiful became because become bed been before
began begin behind being believe below bench best better between beyond big
bird birth block board boat body bologna book border born botanical botanist
botany both bottom bought box boy bridge brief bring broad brought budget
build building built business busy buy call came can canal capital car card
care careful carefully carry cartographer case catch cause celebrated center
central century ceramics certain chance change chapter charts chemist chief
child children choose church circle cities citizen city civil claim class
clean clear climate close cloth coast cold collect collection college color
come common community company compare complete completed composer concert
condition confidential confirm confirmed congress connect conservatory
consider construction contain continue control copper corner correct cost
could country course court courtroom cover create crop cross crowd culture
current cut daily dark data date daughter day dead deal death decade decide
deep defeat degree deposit deposits describe desert design detail develop
devoted did die difference different difficult direction director discover
discovered discovery discuss distance district divide doctor document
documents does dog done door double down draw drew drive dry during dust
duty each early earn earth east easy eat economy edge education effect
effort eight either elect element else end energy engineer engravings enough
enter entire equipment era error especially establish estate europe even
evening event ever every everyone everything evidence exact examine example
except exchange exhibit exhibition expand expedition experience expert
explain exposition express extend eye face fact factory fail fair fall fame
family famous far farm fast father fault favor fear feature feel feet fell
felt festival few field fifty figure fill film final finally find fine
finish fire first fish five flag floor flow flower fly focus follow food
foot for force foreign forest form formal former fortune forty forward
fossils found foundation founded fountain four frame free fresh friend from
front fruit full fund further future gain game garden gate gather gathered
gave general gift girl give glass glassmaking go gold gone good got
government grand grant graphite grass great green grew ground group grow
growth guard guide had hair half hall hand happen harbor hard harvest have
head health hear heard heart heat heavy held help her herbarium here high
hill his historian history hold holds home honor hope horse hospital hot
hour house how however huge human hundred idea important improve include
increase indeed independent industry influence information institute
institution instrument instruments interest interview iron island issue item
items its itself join journal journey judge jump just keep kept key kind
king knew know known labor laboratories laboratory lake land language large
last late later lead leader leading learn least leave lecture led left
length less letter level library life light like limestone limit line list
literature little live local long look lost lot low machine made main major
make man manuscript manuscripts many map marble maritime mark market mass
master material mathematics matter may mean measure medical medicine meet
member memory men mention message metal method middle might mile military
mind mine mineral minerals mining minute miss model modern moment money
month months more morning most mother mountain move much museum music must
name nation national natural nature near nearly necessary need network never
new news next night nine noble north note nothing notice novelist now
number object observatory ocean off offer office officer official often oil
old once one only open opened opening or order organ organize organizers
original other our out outside over own page paint painter painting palace
paper park part particular party pass passage past pay peace people per
performance perhaps period person philology physician picture piece place
plain plan planning plant play please point policy political poor population
port position possible power practice prepare preparing present preserve
president press pressure previous price principle print printing private
prize probably problem process produce product profession professor program
progress project promise property propose protect prove provide public
publish pull purpose pursue pursued push put quality quarter quartz question
quick quiet quite race radio rail railway rain raise ran range rare rate
rather reach read ready real realize reason rebuild receive recent recently
record records region regional rely remain remember remove renowned repair
report request research reshaped resource respect respected response rest
restore result results return review rich ride right rise risk river road
rock role roll roof room rose rough round route row royal rule run rural
safe said sail salt same sand save saw say scale scholar scholars school
science sculptor sea search season seat second section sector see seed seem
seen sell send sense sent separate series serious serve service set settle
seven several shape share sheet sheets ship shipping shop shore short should
show shown side sign signal silver similar simple since single sister site
situation six size sketch small so social society soil sold soldier some
someone something son song soon sort sound source south space speak special
species spend spent spoke sport spread spring square staff stage stand
standard star stars start state stated statement station stay steel step
still stone stood stop store storm story strange stream street strength
strong structure student studied studies study style subject success such
sudden suggest summer sun supply support sure surface survey suspension
system table take taken talk task taught teach teacher teaching team tell
temple ten term test testimony textile than theater their theme then theory
there thing think third thirty thought thousand three through tidal time
tiny today together told took top total tour toward tower town trade
tradition traffic train trained training transform travel travelled
travelled treasure treat treaty tree trip true trust try turn twelve twenty
two type under understand union unit university until up upon urban use
used useful usual valley value variety various vast very view village visit
visitor visitors voice volume vote wait walk wall want war warm watch water
wave way wealth wear weather week weight well went west wheel while white
whole wide wife wild will win wind window winter wish within without woman
women wood word work worked worker works world would write writer written
wrong wrote yard year years yes yet young
""".split()

LEXICON = frozenset(_LEXICON_WORDS) | FUNCTION_WORDS | WH_WORDS

_TOKEN_RE = re.compile(r"[A-Za-z0-9']+")


@dataclass(frozen=True)
class FeatureVector:
    dense: Tuple[float, ...]
    sparse: Dict[int, float]  # hash bucket -> term frequency

    def to_array(self) -> np.ndarray:
        vec = np.zeros(TOTAL_DIM)
        vec[:DENSE_DIM] = self.dense
        for bucket, tf in self.sparse.items():
            vec[DENSE_DIM + bucket] = tf
        return vec


def _bucket(gram: str) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=4).digest()
    return int.from_bytes(digest, "big") % HASH_BUCKETS


def _hashed_grams(tokens: List[str]) -> Dict[int, float]:
    sparse: Dict[int, float] = {}
    grams = list(tokens) + [f"{a} {b}" for a, b in zip(tokens, tokens[1:])]
    for gram in grams:
        idx = _bucket(gram)
        sparse[idx] = sparse.get(idx, 0.0) + 1.0
    return sparse


def _answer_kind(answer: str) -> str:
    stripped = answer.strip()
    if re.fullmatch(r"\d{3,4}", stripped):
        return "year"
    if re.fullmatch(r"[\d.,]+", stripped):
        return "number"
    words = [w for w in _TOKEN_RE.findall(stripped) if w.isalpha()]
    if words and all(w[0].isupper() for w in words):
        return "proper"
    return "common"


def _wh_kind(question_tokens: List[str]) -> str:
    toks = set(question_tokens)
    if "when" in toks or "year" in toks:
        return "when"
    if toks & {"where", "city", "country", "place"}:
        return "where"
    if "who" in toks or "whom" in toks:
        return "who"
    return "what"

_COMPAT: Dict[Tuple[str, str], float] = {
    ("year", "when"): 1.0, ("year", "what"): 0.3, ("year", "who"): 0.0, ("year", "where"): 0.0,
    ("number", "when"): 0.7, ("number", "what"): 0.7, ("number", "who"): 0.2, ("number", "where"): 0.2,
    ("proper", "who"): 1.0, ("proper", "where"): 1.0, ("proper", "when"): 0.0, ("proper", "what"): 0.5,
    ("common", "what"): 1.0, ("common", "where"): 0.3, ("common", "who"): 0.3, ("common", "when"): 0.0,
}


def answer_wh_compatibility(question: str, answer: str) -> float:
    """How well the question's interrogative form matches the answer's type."""
    return _COMPAT[(_answer_kind(answer), _wh_kind(tokenize(question)))]


def _out_of_lexicon_rate(sample: QGSample) -> float:
    known = set(tokenize(sample.passage)) | set(tokenize(sample.answer))
    raw_tokens = _TOKEN_RE.findall(sample.question)
    eligible = [t for t in raw_tokens if t.isalpha() and t.islower() and len(t) >= 3]
    if not eligible:
        return 0.0
    oov = [t for t in eligible if t not in LEXICON and t not in known]
    return len(oov) / len(eligible)


def extract_features(sample: QGSample) -> FeatureVector:
    q_tokens = tokenize(sample.question)
    p_tokens = tokenize(sample.passage)
    a_tokens = tokenize(sample.answer)
    q_content = content_tokens(sample.question)
    p_token_set = set(p_tokens)

    length = len(q_tokens)
    span = longest_common_span(q_tokens, p_tokens)
    overlap = len(q_content & p_token_set) / max(1, len(q_content))
    absent = len(q_content - p_token_set) / max(1, len(q_content))
    answer_overlap = len(set(q_tokens) & set(a_tokens)) / max(1, len(set(a_tokens)))
    leading = q_tokens[:2]

    dense = (
        length / (1.0 + length),
        1.0 if sample.question.rstrip().endswith("?") else 0.0,
        1.0 if any(t in WH_WORDS or t in AUX_WORDS for t in leading) else 0.0,
        span / max(1, length),
        overlap,
        absent,
        answer_wh_compatibility(sample.question, sample.answer),
        _out_of_lexicon_rate(sample),
        1.0 if q_tokens and q_tokens[-1] in FUNCTION_WORDS else 0.0,
        1.0 if length < 4 else 0.0,
        answer_overlap,
    )
    return FeatureVector(dense=dense, sparse=_hashed_grams(q_tokens))


def features_matrix(samples: Sequence[QGSample]) -> np.ndarray:
    """Stack extracted features into an (n, TOTAL_DIM) array."""
    out = np.zeros((len(samples), TOTAL_DIM))
    for i, sample in enumerate(samples):
        out[i] = extract_features(sample).to_array()
    return out
