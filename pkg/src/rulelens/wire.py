"""Chat-completions wire clients for external captioning and summarization
models, with bounded retry and transcript logging.

Endpoints are configured from environment variables (base URL, auth token,
model name), never from config files. Prompts are verbatim template files
shipped with the package; the oracle pipeline never touches this module.
"""
from __future__ import annotations

import hashlib
import json
import os
import time
from dataclasses import dataclass
from importlib import resources
from pathlib import Path
from typing import List, Optional

import httpx

PROMPT_FILES = {
    "change_caption_driving": "change_caption_driving.txt",
    "change_caption_faces": "change_caption_faces.txt",
    "summarize_factors": "summarize_factors.txt",
    "summarize_independent": "summarize_independent.txt",
}


class EndpointError(RuntimeError):
    """Base class for wire-client failures."""


class TransportFailure(EndpointError):
    """Connection/timeout/5xx failure that survived the retry policy."""


class MalformedResponse(EndpointError):
    """2xx response without usable content."""


@dataclass
class EndpointConfig:
    base_url: str
    model: str
    api_key: Optional[str] = None
    timeout: float = 60.0
    max_attempts: int = 3
    backoff: float = 0.5
    temperature: float = 0.0

    @classmethod
    def from_env(cls, prefix: str) -> "EndpointConfig":
        """Read RULELENS_<PREFIX>_BASE_URL / _MODEL / _API_KEY."""
        base = os.environ.get(f"RULELENS_{prefix}_BASE_URL")
        model = os.environ.get(f"RULELENS_{prefix}_MODEL")
        if not base or not model:
            raise EndpointError(
                f"set RULELENS_{prefix}_BASE_URL and RULELENS_{prefix}_MODEL "
                f"to use the {prefix.lower()} endpoint"
            )
        return cls(base_url=base, model=model, api_key=os.environ.get(f"RULELENS_{prefix}_API_KEY"))


def load_prompt(name: str) -> str:
    filename = PROMPT_FILES[name]
    return resources.files("rulelens.prompts").joinpath(filename).read_text(encoding="utf-8")


def _request_key(payload: dict) -> str:
    blob = json.dumps(payload, sort_keys=True, separators=(",", ":")).encode("utf-8")
    return hashlib.sha256(blob).hexdigest()[:16]


def _log_transcript(transcript_dir, key: str, record: dict) -> None:
    if transcript_dir is None:
        return
    path = Path(transcript_dir)
    path.mkdir(parents=True, exist_ok=True)
    with open(path / f"{key}.json", "w", encoding="utf-8") as fh:
        json.dump(record, fh, sort_keys=True, indent=2)
        fh.write("\n")


def chat_complete(
    config: EndpointConfig,
    messages: List[dict],
    transport: Optional[httpx.BaseTransport] = None,
    transcript_dir=None,
) -> str:
    """POST a chat-completions request; returns the first message content.

    Retries transport errors and 5xx responses with bounded exponential
    backoff (config.max_attempts total attempts). Each request/response (or
    terminal error) is logged under an idempotency key derived from the
    request body.
    """
    payload = {
        "model": config.model,
        "messages": messages,
        "temperature": config.temperature,
    }
    key = _request_key(payload)
    headers = {"Content-Type": "application/json"}
    if config.api_key:
        headers["Authorization"] = f"Bearer {config.api_key}"
    url = config.base_url.rstrip("/") + "/chat/completions"

    last_error: Optional[Exception] = None
    with httpx.Client(transport=transport, timeout=config.timeout) as client:
        for attempt in range(config.max_attempts):
            if attempt and config.backoff:
                time.sleep(config.backoff * (2 ** (attempt - 1)))
            try:
                resp = client.post(url, json=payload, headers=headers)
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if 500 <= resp.status_code < 600:
                last_error = EndpointError(f"server error {resp.status_code}")
                continue
            if resp.status_code != 200:
                _log_transcript(transcript_dir, key, {
                    "idempotency_key": key, "request": payload,
                    "error": f"status {resp.status_code}",
                })
                raise EndpointError(f"endpoint returned status {resp.status_code}")
            try:
                body = resp.json()
                content = body["choices"][0]["message"]["content"]
            except Exception as exc:
                _log_transcript(transcript_dir, key, {
                    "idempotency_key": key, "request": payload,
                    "error": f"malformed response: {exc}",
                })
                raise MalformedResponse(f"malformed response body: {exc}") from exc
            if not content or not str(content).strip():
                _log_transcript(transcript_dir, key, {
                    "idempotency_key": key, "request": payload, "error": "empty content",
                })
                raise MalformedResponse("endpoint returned empty content")
            _log_transcript(transcript_dir, key, {
                "idempotency_key": key, "request": payload, "response": body,
            })
            return str(content)
    _log_transcript(transcript_dir, key, {
        "idempotency_key": key, "request": payload, "error": str(last_error),
    })
    raise TransportFailure(f"endpoint unreachable after {config.max_attempts} attempts: {last_error}")


def vlm_change_caption(
    config: EndpointConfig,
    image_pair_payload: dict,
    domain: str = "driving",
    transport: Optional[httpx.BaseTransport] = None,
    transcript_dir=None,
) -> str:
    """Ask a vision-language endpoint how the second image differs from the
    first, using the one-shot prompt template for the given domain.

    `image_pair_payload` supplies {"image_1": ..., "image_2": ...} entries
    (URLs or data URIs) that replace the template's IMAGE_TOKEN slots in
    order: example pair first, query pair last.
    """
    template = load_prompt(f"change_caption_{domain}")
    slots = template.count("{IMAGE_TOKEN}")
    images = [
        image_pair_payload.get("example_image_1", image_pair_payload["image_1"]),
        image_pair_payload.get("example_image_2", image_pair_payload["image_2"]),
        image_pair_payload["image_1"],
        image_pair_payload["image_2"],
    ][:slots]

    content: List[dict] = []
    rest = template
    for image in images:
        text, _, rest = rest.partition("{IMAGE_TOKEN}")
        if text:
            content.append({"type": "text", "text": text})
        content.append({"type": "image_url", "image_url": {"url": image}})
    if rest:
        content.append({"type": "text", "text": rest})

    messages = [{"role": "user", "content": content}]
    return chat_complete(config, messages, transport=transport, transcript_dir=transcript_dir)
