"""Target models: exact rule-based binary classifiers over scenes, plus a
wire-protocol client for external models.

The rule-based variant makes ground truth known, so every downstream causal
metric has an analytic target. The wire variant lets the same pipeline audit
a remote model through an HTTP predict endpoint.
"""
from __future__ import annotations

import threading
from dataclasses import dataclass
from typing import Callable, Optional

import httpx

from .concepts import Concept, eval_concept
from .scene import Scene


@dataclass(frozen=True)
class RuleClassifier:
    """M(x) = presence_class iff base rule holds, or the bias rule (if any) holds.

    Total over all scenes, including post-intervention scenes with fewer than
    three objects. A rule-less classifier (base_rule=None, no bias) is the
    constant model.
    """

    base_rule: Optional[Concept]
    bias_rule: Optional[Concept] = None
    presence_class: int = 1

    def __post_init__(self):
        if self.presence_class not in (0, 1):
            raise ValueError("presence_class must be 0 or 1")

    def concepts(self) -> list:
        rules = [self.base_rule] if self.base_rule is not None else []
        if self.bias_rule is not None:
            rules.append(self.bias_rule)
        return rules

    def to_dict(self) -> dict:
        return {
            "base_rule": self.base_rule.to_string() if self.base_rule else None,
            "bias_rule": self.bias_rule.to_string() if self.bias_rule else None,
            "presence_class": self.presence_class,
        }


def classify(model: RuleClassifier, scene: Scene) -> int:
    """Deterministic decision; a pure function of the canonical scene."""
    raw = any(eval_concept(scene, c) for c in model.concepts())
    return model.presence_class if raw else 1 - model.presence_class


def binarize_one_vs_all(predict: Callable[[Scene], int], target: int) -> Callable[[Scene], int]:
    """Wrap a multi-class predictor as the binary one-vs-all model for `target`."""

    def wrapped(scene: Scene) -> int:
        return 1 if predict(scene) == target else 0

    return wrapped


class WireClassifierError(RuntimeError):
    """Remote classifier could not produce a label."""


class WireClassifier:
    """Remote model behind an HTTP predict endpoint.

    POSTs the scene payload and expects {"label": 0|1}. Reentrant; the number
    of in-flight requests is bounded per configuration. Excluded from oracle
    tests because its ground truth is unknown.
    """

    def __init__(
        self,
        url: str,
        token: Optional[str] = None,
        timeout: float = 30.0,
        max_in_flight: int = 4,
        transport: Optional[httpx.BaseTransport] = None,
    ):
        self.url = url
        self.token = token
        self.timeout = timeout
        self._slots = threading.Semaphore(max_in_flight)
        self._client = httpx.Client(transport=transport, timeout=timeout)

    def classify(self, scene: Scene) -> int:
        headers = {}
        if self.token:
            headers["Authorization"] = f"Bearer {self.token}"
        with self._slots:
            try:
                resp = self._client.post(self.url, json={"scene": scene.to_dict()}, headers=headers)
            except httpx.HTTPError as exc:
                raise WireClassifierError(f"transport failure: {exc}") from exc
        if resp.status_code != 200:
            raise WireClassifierError(f"predict endpoint returned {resp.status_code}")
        try:
            label = resp.json()["label"]
        except Exception as exc:
            raise WireClassifierError(f"malformed predict response: {exc}") from exc
        if label not in (0, 1):
            raise WireClassifierError(f"label must be 0 or 1, got {label!r}")
        return int(label)

    def close(self) -> None:
        self._client.close()
