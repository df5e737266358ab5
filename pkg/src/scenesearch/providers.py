"""Pluggable providers for text embedding, image embedding, and text transforms.

The built-in providers are pure functions: deterministic, dependency-free,
and good enough to give retrieval tests a monotone similarity-to-overlap
signal. The remote client speaks a small JSON-over-HTTP contract so any real
model server can be adapted behind the same interface.
"""

from __future__ import annotations

import enum
import hashlib
import os
import re
import threading
import time
import unicodedata
from dataclasses import dataclass
from typing import Protocol

import httpx
import numpy as np

from .domain import Embedding
from .errors import InvalidArgumentError, ProviderUnavailableError

DEFAULT_DIM = 256
DEFAULT_TIMEOUT_MS = 10_000
RETRY_ATTEMPTS = 2            # retries after the first try
RETRY_BACKOFF_S = 0.25        # doubles per retry
DEFAULT_MAX_INFLIGHT = 8
SUMMARY_SENTENCES = 3

_WHITESPACE_RUN = re.compile(r"\s+")
_SENTENCE = re.compile(r"[^.!?]*[.!?]+|[^.!?]+$")


class TransformKind(enum.Enum):
    CLEAN = "clean"
    SUMMARIZE = "summarize"


@dataclass(frozen=True)
class ProviderConfig:
    """How one provider instance is constructed."""

    kind: str = "builtin"                 # "builtin" | "remote"
    endpoint_url: str = ""
    dim: int = DEFAULT_DIM
    timeout_ms: int = DEFAULT_TIMEOUT_MS
    api_key_env: str = ""
    max_inflight: int = DEFAULT_MAX_INFLIGHT

    def __post_init__(self) -> None:
        if self.kind not in ("builtin", "remote"):
            raise InvalidArgumentError(f"unknown provider kind {self.kind!r}")
        if self.kind == "remote" and not self.endpoint_url:
            raise InvalidArgumentError("remote provider requires endpoint_url")
        if self.dim < 8:
            raise InvalidArgumentError(f"embedding dim must be >= 8, got {self.dim}")
        if self.timeout_ms <= 0:
            raise InvalidArgumentError("timeout_ms must be positive")


class TextEmbedder(Protocol):
    dim: int

    def embed_text(self, text: str) -> Embedding: ...


class ImageEmbedder(Protocol):
    dim: int

    def embed_image(self, image_ref: str) -> Embedding: ...


class TextTransformer(Protocol):
    def transform(self, kind: TransformKind, text: str) -> str: ...


def clean_text(text: str) -> str:
    """Built-in clean: NFC-normalize, drop control chars, collapse whitespace, trim."""
    text = unicodedata.normalize("NFC", text)
    text = "".join(ch for ch in text if ch.isspace() or unicodedata.category(ch) != "Cc")
    return _WHITESPACE_RUN.sub(" ", text).strip()


def split_sentences(text: str) -> list[str]:
    """Split on sentence-final punctuation, keeping the punctuation."""
    return [part.strip() for part in _SENTENCE.findall(text) if part.strip()]


def _char_trigrams(text: str) -> list[str]:
    if len(text) < 3:
        return [text]
    return [text[i : i + 3] for i in range(len(text) - 2)]


def _bucket(gram: str, dim: int) -> int:
    digest = hashlib.blake2b(gram.encode("utf-8"), digest_size=8).digest()
    return int.from_bytes(digest, "little") % dim


def feature_hash_embedding(text: str, dim: int) -> Embedding:
    """Feature-hash character 3-grams of the NFC-lowercased input into ``dim`` buckets.

    Overlapping n-gram mass makes cosine similarity grow with shared
    substrings, which is the signal retrieval tests rely on. Stable across
    runs and processes (blake2b, no hash salt).
    """
    if not text.strip():
        raise InvalidArgumentError("cannot embed empty text")
    normalized = unicodedata.normalize("NFC", text).casefold()
    counts = np.zeros(dim, dtype=np.float64)
    for gram in _char_trigrams(normalized):
        counts[_bucket(gram, dim)] += 1.0
    return Embedding.normalized(counts)


class BuiltinTextEmbedder:
    """Deterministic character-n-gram embedder for transcripts and queries."""

    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim

    def embed_text(self, text: str) -> Embedding:
        return feature_hash_embedding(text, self.dim)


class BuiltinImageEmbedder:
    """Embeds the opaque image reference string with the same n-gram hash.

    Sharing the hash with the text embedder means a query equal to a
    keyframe's reference string lands exactly on that keyframe's vector,
    which is what planted-corpus tests exploit.
    """

    def __init__(self, dim: int = DEFAULT_DIM):
        self.dim = dim

    def embed_image(self, image_ref: str) -> Embedding:
        if not image_ref.strip():
            raise InvalidArgumentError("cannot embed empty image reference")
        return feature_hash_embedding(image_ref, self.dim)


class BuiltinTransformer:
    """Rule-based clean and first-N-sentences summarize."""

    def __init__(self, summary_sentences: int = SUMMARY_SENTENCES):
        self.summary_sentences = summary_sentences

    def transform(self, kind: TransformKind, text: str) -> str:
        if not text.strip():
            raise InvalidArgumentError("cannot transform empty text")
        cleaned = clean_text(text)
        if kind is TransformKind.CLEAN:
            return cleaned
        return " ".join(split_sentences(cleaned)[: self.summary_sentences])


class RemoteProvider:
    """HTTP client for a model server implementing the embedding/transform protocol.

    POST {texts: [..]} or {image_refs: [..]} -> {vectors: [[..]], dim: int};
    POST {kind: "clean"|"summarize", text: ..} -> {text: ..}. Credentials are
    read from the environment variable named in the config and sent as a
    bearer token. Timeouts and 5xx responses are retried twice with
    exponential backoff before raising provider-unavailable.
    """

    def __init__(self, config: ProviderConfig, client: httpx.Client | None = None):
        if config.kind != "remote":
            raise InvalidArgumentError("RemoteProvider requires a remote config")
        self.config = config
        self.dim = config.dim
        self._client = client or httpx.Client(timeout=config.timeout_ms / 1000.0)
        self._inflight = threading.Semaphore(config.max_inflight)

    def _headers(self) -> dict[str, str]:
        headers = {}
        if self.config.api_key_env:
            key = os.environ.get(self.config.api_key_env, "")
            if key:
                headers["Authorization"] = f"Bearer {key}"
        return headers

    def _post(self, payload: dict) -> dict:
        last_error: Exception | None = None
        for attempt in range(RETRY_ATTEMPTS + 1):
            if attempt:
                time.sleep(RETRY_BACKOFF_S * 2 ** (attempt - 1))
            try:
                with self._inflight:
                    response = self._client.post(
                        self.config.endpoint_url, json=payload, headers=self._headers()
                    )
            except httpx.HTTPError as exc:
                last_error = exc
                continue
            if response.status_code >= 500:
                last_error = ProviderUnavailableError(
                    f"provider returned {response.status_code}"
                )
                continue
            if response.status_code >= 400:
                raise InvalidArgumentError(
                    f"provider rejected request: {response.status_code} {response.text}"
                )
            return response.json()
        raise ProviderUnavailableError(
            f"provider at {self.config.endpoint_url} unavailable after "
            f"{RETRY_ATTEMPTS + 1} attempts: {last_error}"
        )

    def _embed(self, payload: dict) -> Embedding:
        body = self._post(payload)
        vectors = body.get("vectors")
        if not vectors or body.get("dim") != self.dim:
            raise ProviderUnavailableError(
                f"provider returned malformed embedding response: {body!r}"
            )
        return Embedding.normalized(vectors[0])

    def embed_text(self, text: str) -> Embedding:
        if not text.strip():
            raise InvalidArgumentError("cannot embed empty text")
        return self._embed({"texts": [text]})

    def embed_image(self, image_ref: str) -> Embedding:
        if not image_ref.strip():
            raise InvalidArgumentError("cannot embed empty image reference")
        return self._embed({"image_refs": [image_ref]})

    def transform(self, kind: TransformKind, text: str) -> str:
        if not text.strip():
            raise InvalidArgumentError("cannot transform empty text")
        body = self._post({"kind": kind.value, "text": text})
        result = body.get("text")
        if not isinstance(result, str):
            raise ProviderUnavailableError(
                f"provider returned malformed transform response: {body!r}"
            )
        return result


def make_text_embedder(config: ProviderConfig) -> TextEmbedder:
    if config.kind == "builtin":
        return BuiltinTextEmbedder(config.dim)
    return RemoteProvider(config)


def make_image_embedder(config: ProviderConfig) -> ImageEmbedder:
    if config.kind == "builtin":
        return BuiltinImageEmbedder(config.dim)
    return RemoteProvider(config)


def make_transformer(config: ProviderConfig) -> TextTransformer:
    if config.kind == "builtin":
        return BuiltinTransformer()
    return RemoteProvider(config)
