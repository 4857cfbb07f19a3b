"""LLM backends: the wire-level send(prompt) -> reply contract.

Two implementations ship: an HTTP client speaking the chat-completions
shape, and a scripted mock whose replies are a pure function of
(prompt, seed) so experiments are reproducible offline.
"""
from __future__ import annotations

import hashlib
import json
import os
import re
from dataclasses import dataclass, field
from typing import Callable, Dict, Optional, Protocol

import requests

__all__ = [
    "LLMBackend",
    "TransportError",
    "MockBackend",
    "HTTPBackend",
    "DEFAULT_MAX_TOKENS",
]

DEFAULT_MAX_TOKENS = 256


class TransportError(RuntimeError):
    """The backend could not be reached (after any internal retries)."""


class LLMBackend(Protocol):
    backend_id: str

    def send(self, prompt: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> str: ...

    def decoding_settings(self) -> Dict[str, object]: ...


_QUESTION_LINE = re.compile(r"^Question:\s*(.*)$", re.MULTILINE)
_PASSAGE_LINE = re.compile(r"^Passage:\s*(.*)$", re.MULTILINE)
_DIAGNOSTIC_LINE = re.compile(r"^- (?!No Error:)[^:\n]+:", re.MULTILINE)
_BINARY_MARKER = re.compile(r"^Score 0:", re.MULTILINE)


def _unit_interval(seed: int, prompt: str) -> float:
    digest = hashlib.sha256(f"{seed}:{prompt}".encode("utf-8")).hexdigest()
    return int(digest[:8], 16) / 2 ** 32


class MockBackend:
    """Deterministic scripted backend used by tests and offline experiments.

    Default rule table (documented fixture contract):

    * Error-aware evaluation prompts (an ``Error Diagnostics:`` block is
      present): score = 3 - min(2, number of distinct real error names
      listed); a diagnostics block carrying only the No Error statement
      scores 3. On a binary scale: 1 when no real error is listed, else 0.
    * Vanilla evaluation prompts: a holistic surface read. Base score 3; the
      question is marked down to 2 when it lacks a question mark (80% of the
      time), when it is very long (> 24 tokens, 60% of the time), or by a
      residual 10% markdown. On a binary scale: 0 only for missing question
      marks.
    * Synthesis generation prompts (they mandate a ``Question:`` reply):
      a template question built from the prompt's passage line.
    * Synthesis filter prompts (they mandate a ``Confidence:`` reply):
      confidence 0.9 with probability 0.7, else 0.4.

    The percentages are driven by a hash of (seed, prompt), so identical
    requests always get identical replies. A custom ``script`` callable
    overrides the rule table entirely.
    """

    def __init__(self, seed: int = 0, script: Optional[Callable[[str], str]] = None):
        self.seed = seed
        self.script = script
        self.backend_id = f"mock:{seed}"

    @classmethod
    def constant(cls, score: int) -> "MockBackend":
        return cls(script=lambda prompt: f"Score: {score}\nReason: scripted constant reply.")

    def decoding_settings(self) -> Dict[str, object]:
        return {"kind": "mock", "seed": self.seed, "scripted": self.script is not None}

    def send(self, prompt: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> str:
        if self.script is not None:
            return self.script(prompt)
        if "'Confidence: <x>'" in prompt:
            u = _unit_interval(self.seed, prompt)
            return f"Confidence: {0.9 if u < 0.7 else 0.4}"
        if "'Question: <text>'" in prompt:
            return self._generate_question(prompt)
        binary = bool(_BINARY_MARKER.search(prompt))
        has_diagnostics = "Error Diagnostics:" in prompt
        if has_diagnostics:
            n_errors = len(_DIAGNOSTIC_LINE.findall(prompt))
            if binary:
                score = 1 if n_errors == 0 else 0
            else:
                score = 3 - min(2, n_errors)
            reason = (
                "No error diagnostics were reported, so the question looks sound."
                if n_errors == 0
                else f"{n_errors} reported error type(s) directly affect this dimension."
            )
            return f"Score: {score}\nReason: {reason}"

        return self._evaluate(prompt, binary)

    def _generate_question(self, prompt: str) -> str:
        # The last "Passage:" line is the generation target (the first
        # belongs to the one-shot example).
        passages = [m.group(1) for m in _PASSAGE_LINE.finditer(prompt)]
        topic_words = [
            w for w in (passages[-1] if passages else "").split()[:6] if w.isalpha()
        ]
        topic = " ".join(topic_words[:3]) or "the events"
        templates = (
            f"What does the passage explain about {topic.lower()}?",
            f"Why is {topic.lower()} significant here?",
            f"When did the account of {topic.lower()} take place?",
        )
        u = _unit_interval(self.seed, prompt)
        return f"Question: {templates[int(u * len(templates)) % len(templates)]}"

    def _evaluate(self, prompt: str, binary: bool) -> str:
        match = _QUESTION_LINE.search(prompt)
        question = match.group(1) if match else ""
        u = _unit_interval(self.seed, prompt)
        missing_mark = not question.rstrip().endswith("?")
        long_question = len(question.split()) > 24
        if binary:
            score = 0 if (missing_mark and u < 0.8) else 1
            reason = "Surface read of the question form."
            return f"Score: {score}\nReason: {reason}"
        if missing_mark and u < 0.8:
            score = 2
            reason = "The text does not read as a finished question."
        elif long_question and u < 0.6:
            score = 2
            reason = "The question is long-winded."
        elif u > 0.9:
            score = 2
            reason = "Minor stylistic doubts."
        else:
            score = 3
            reason = "The question looks well formed overall."
        return f"Score: {score}\nReason: {reason}"


@dataclass
class HTTPBackend:
    """Chat-completions-style HTTP client.

    Credentials come from the environment variable named in
    ``api_key_env`` at call time and are never logged or persisted.
    """

    endpoint: str
    model: str
    api_key_env: Optional[str] = None
    timeout: float = 60.0
    backend_id: str = field(default="")
    session: Optional[requests.Session] = None

    def __post_init__(self) -> None:
        if not self.backend_id:
            self.backend_id = f"http:{self.model}"

    def decoding_settings(self) -> Dict[str, object]:
        return {"kind": "http", "model": self.model, "sampling": "backend-default"}

    def send(self, prompt: str, max_tokens: int = DEFAULT_MAX_TOKENS) -> str:
        headers = {"Content-Type": "application/json"}
        if self.api_key_env:
            key = os.environ.get(self.api_key_env)
            if not key:
                raise TransportError(
                    f"credential environment variable {self.api_key_env!r} is not set"
                )
            headers["Authorization"] = f"Bearer {key}"
        payload = {
            "model": self.model,
            "messages": [{"role": "user", "content": prompt}],
            "max_tokens": max_tokens,
        }
        client = self.session or requests
        try:
            response = client.post(
                self.endpoint, json=payload, headers=headers, timeout=self.timeout
            )
        except requests.RequestException as exc:
            raise TransportError(f"backend unreachable: {exc.__class__.__name__}") from exc
        if response.status_code >= 400:
            raise TransportError(f"backend returned HTTP {response.status_code}")
        try:
            body = response.json()
            return body["choices"][0]["message"]["content"]
        except (ValueError, KeyError, IndexError, TypeError) as exc:
            raise TransportError("backend reply is not in chat-completions shape") from exc
