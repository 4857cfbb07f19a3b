"""Versioned, binary-free checkpoint files.

Weights are stored as decimal strings (shortest round-trip repr), so
checkpoints are portable, diffable, and reload bit-identically.
"""
from __future__ import annotations

import json
from pathlib import Path
from typing import Dict, List, Union

import numpy as np

FORMAT = "linear-checkpoint"
VERSION = 1


class CheckpointError(ValueError):
    pass


def _encode_floats(arr: np.ndarray) -> list:
    if arr.ndim == 1:
        return [repr(float(v)) for v in arr]
    return [_encode_floats(row) for row in arr]


def _decode_floats(data: list) -> np.ndarray:
    return np.array(data, dtype=float)


def save_linear_checkpoint(
    path: Union[str, Path],
    kind: str,
    labels: List[str],
    feature_names: List[str],
    weights: np.ndarray,
    bias: np.ndarray,
    metadata: Dict,
) -> None:
    payload = {
        "format": FORMAT,
        "version": VERSION,
        "kind": kind,
        "labels": labels,
        "feature_names": feature_names,
        "metadata": metadata,
        "weights": _encode_floats(np.atleast_2d(weights)),
        "bias": _encode_floats(np.asarray(bias).ravel()),
    }
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    path.write_text(json.dumps(payload, ensure_ascii=False, indent=1) + "\n", encoding="utf-8")


def load_linear_checkpoint(path: Union[str, Path], expected_kind: str) -> Dict:
    try:
        payload = json.loads(Path(path).read_text(encoding="utf-8"))
    except json.JSONDecodeError as exc:
        raise CheckpointError(f"{path}: not a valid checkpoint file") from exc
    if payload.get("format") != FORMAT or payload.get("version") != VERSION:
        raise CheckpointError(f"{path}: unsupported checkpoint format/version")
    if payload.get("kind") != expected_kind:
        raise CheckpointError(
            f"{path}: checkpoint kind {payload.get('kind')!r}, expected {expected_kind!r}"
        )
    payload["weights"] = _decode_floats(payload["weights"])
    payload["bias"] = _decode_floats(payload["bias"])
    return payload
