"""Shared tokenization helpers.

One tokenizer for everything (feature extraction, planted-error injectors,
detector oracles) keeps substring/overlap checks consistent: split on
whitespace and punctuation, lowercase for matching.
"""
from __future__ import annotations

import re
from typing import List, Set

_TOKEN_RE = re.compile(r"[A-Za-z0-9']+")

# Small closed-class list; used to separate content tokens from glue.
FUNCTION_WORDS: Set[str] = {
    "a", "an", "the", "of", "in", "on", "at", "to", "for", "from", "by",
    "with", "about", "as", "into", "through", "during", "before", "after",
    "and", "or", "but", "nor", "so", "yet", "if", "that", "which", "who",
    "whom", "whose", "what", "when", "where", "why", "how", "is", "are",
    "was", "were", "be", "been", "being", "am", "do", "does", "did", "has",
    "have", "had", "can", "could", "will", "would", "shall", "should",
    "may", "might", "must", "it", "its", "he", "she", "his", "her", "him",
    "they", "them", "their", "this", "these", "those", "there", "not",
    "no", "s", "t",
}

WH_WORDS = {"what", "which", "who", "whom", "whose", "when", "where", "why", "how"}
AUX_WORDS = {"is", "are", "was", "were", "do", "does", "did", "can", "could",
             "will", "would", "should", "has", "have", "had", "name", "state"}


def tokenize(text: str) -> List[str]:
    """Lowercased word tokens; punctuation is a separator, not a token."""
    return [t.lower() for t in _TOKEN_RE.findall(text)]


def content_tokens(text: str) -> Set[str]:
    return {t for t in tokenize(text) if t not in FUNCTION_WORDS}


def longest_common_span(needle: List[str], haystack: List[str]) -> int:
    """Length of the longest contiguous token run shared by the two sequences."""
    if not needle or not haystack:
        return 0
    best = 0
    # O(n*m) dynamic scan; questions and passages are short.
    prev = [0] * (len(haystack) + 1)
    for tok in needle:
        cur = [0] * (len(haystack) + 1)
        for j, h in enumerate(haystack, start=1):
            if tok == h:
                cur[j] = prev[j - 1] + 1
                if cur[j] > best:
                    best = cur[j]
        prev = cur
    return best
