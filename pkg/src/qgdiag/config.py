"""Engine configuration: one flat key = value text file drives the CLI and
the service. Credentials never appear in config files, only the names of
environment variables that hold them.
"""
from __future__ import annotations

from dataclasses import dataclass, field, fields, replace
from pathlib import Path
from typing import Dict, List, Optional, Union

from .backends import HTTPBackend, LLMBackend, MockBackend
from .linear import Hyperparameters
from .refinement import RefinementConfig, Thresholds

__all__ = ["ConfigError", "EngineConfig", "load_config"]


class ConfigError(ValueError):
    pass


@dataclass(frozen=True)
class EngineConfig:
    # Partition thresholds
    tau_u: float = 0.6
    tau_i: float = 0.1
    theta_u: float = 0.9
    theta_i: float = 0.3
    # Per-iteration caps
    cap_reliable: int = 300
    cap_unreliable: int = 100
    # Model hyperparameters
    ei_learning_rate: float = 0.5
    ei_epochs: int = 2000
    verifier_learning_rate: float = 0.2
    verifier_epochs: int = 2000
    l2: float = 1e-3
    decision_threshold: float = 0.5
    neg_ratio: float = 1.0
    # Determinism
    seed: int = 0
    max_iterations: int = 5
    # Evaluator backend: "mock" or "http"
    backend: str = "mock"
    backend_endpoint: str = ""
    backend_model: str = ""
    backend_api_key_env: str = ""
    mock_seed: int = 0
    # Judge backends for synthesis: comma-separated endpoint|model|api_key_env
    judge_backends: str = ""
    # Operational
    state_dir: str = "state"
    service_port: int = 8780
    frontend_dir: str = ""

    def refinement_config(self) -> RefinementConfig:
        return RefinementConfig(
            thresholds=Thresholds(
                tau_u=self.tau_u,
                tau_i=self.tau_i,
                theta_u=self.theta_u,
                theta_i=self.theta_i,
            ),
            cap_reliable=self.cap_reliable,
            cap_unreliable=self.cap_unreliable,
            ei_hparams=Hyperparameters(
                learning_rate=self.ei_learning_rate,
                epochs=self.ei_epochs,
                l2=self.l2,
                seed=self.seed,
            ),
            verifier_hparams=Hyperparameters(
                learning_rate=self.verifier_learning_rate,
                epochs=self.verifier_epochs,
                l2=self.l2,
                seed=self.seed,
            ),
            neg_ratio=self.neg_ratio,
            decision_threshold=self.decision_threshold,
            seed=self.seed,
            max_iterations=self.max_iterations,
        )

    def make_backend(self) -> LLMBackend:
        if self.backend == "mock":
            return MockBackend(seed=self.mock_seed)
        if self.backend == "http":
            if not self.backend_endpoint or not self.backend_model:
                raise ConfigError("http backend needs backend_endpoint and backend_model")
            return HTTPBackend(
                endpoint=self.backend_endpoint,
                model=self.backend_model,
                api_key_env=self.backend_api_key_env or None,
            )
        raise ConfigError(f"unknown backend kind {self.backend!r}")

    def make_judges(self) -> List[LLMBackend]:
        """Judge trio for synthesis filtering; mock judges when none configured."""
        if not self.judge_backends.strip():
            return [MockBackend(seed=self.mock_seed + offset) for offset in (1, 2, 3)]
        judges: List[LLMBackend] = []
        for i, chunk in enumerate(self.judge_backends.split(",")):
            parts = [p.strip() for p in chunk.strip().split("|")]
            if len(parts) < 2:
                raise ConfigError(
                    "judge_backends entries must look like endpoint|model|api_key_env"
                )
            endpoint, model = parts[0], parts[1]
            key_env = parts[2] if len(parts) > 2 and parts[2] else None
            judges.append(
                HTTPBackend(
                    endpoint=endpoint,
                    model=model,
                    api_key_env=key_env,
                    backend_id=f"judge{i}:{model}",
                )
            )
        return judges


_FIELD_TYPES = {f.name: f.type for f in fields(EngineConfig)}


def _coerce(name: str, raw: str):
    kind = _FIELD_TYPES[name]
    try:
        if kind in ("int",):
            return int(raw)
        if kind in ("float",):
            return float(raw)
        return raw
    except ValueError as exc:
        raise ConfigError(f"config key {name!r}: cannot parse {raw!r} as {kind}") from exc


def load_config(
    path: Optional[Union[str, Path]] = None, overrides: Optional[Dict[str, object]] = None
) -> EngineConfig:
    """Parse a key = value config file (# starts a comment) plus overrides."""
    values: Dict[str, object] = {}
    if path is not None:
        text = Path(path).read_text(encoding="utf-8")
        for lineno, line in enumerate(text.splitlines(), start=1):
            stripped = line.split("#", 1)[0].strip()
            if not stripped:
                continue
            if "=" not in stripped:
                raise ConfigError(f"{path}:{lineno}: expected 'key = value'")
            key, raw = (part.strip() for part in stripped.split("=", 1))
            if key not in _FIELD_TYPES:
                raise ConfigError(f"{path}:{lineno}: unknown config key {key!r}")
            values[key] = _coerce(key, raw)
    config = EngineConfig(**values)
    if overrides:
        unknown = set(overrides) - set(_FIELD_TYPES)
        if unknown:
            raise ConfigError(f"unknown config overrides: {sorted(unknown)}")
        config = replace(config, **overrides)
    # Fail fast on inconsistent thresholds.
    config.refinement_config()
    return config
