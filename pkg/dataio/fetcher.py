#!/usr/bin/env python3
"""
Remote CSV fetcher with an offline-first cache
"""

import hashlib
import logging
import os
from pathlib import Path
from typing import Optional
from urllib.parse import urlparse

import requests

from utils.errors import DataFormatError, FetchError
from utils.file_manager import atomic_write_bytes

logger = logging.getLogger(__name__)

CACHE_ENV_VAR = "FXCAST_CACHE_DIR"
REQUEST_TIMEOUT_S = 30.0


def default_cache_dir() -> Path:
    override = os.environ.get(CACHE_ENV_VAR)
    if override:
        return Path(override)
    return Path.home() / ".cache" / "fxcast"


def decode_csv_bytes(data: bytes, origin: str) -> str:
    try:
        return data.decode("utf-8")
    except UnicodeDecodeError as e:
        raise DataFormatError(f"{origin} is not UTF-8 text (byte 0x{data[e.start]:02x} at offset {e.start})") from e


def cache_path_for(url: str, cache_dir: Path) -> Path:
    return Path(cache_dir) / f"{hashlib.sha256(url.encode('utf-8')).hexdigest()}.csv"


def fetch_remote(url: str, cache_dir: Optional[Path] = None, timeout: float = REQUEST_TIMEOUT_S) -> str:
    """Download `url`, writing the body through to the cache.

    When the network fails, a cached copy is returned with a staleness
    warning; with no cached copy a FetchError is raised.
    """
    parsed = urlparse(url)
    if parsed.scheme not in ("http", "https") or not parsed.netloc:
        raise FetchError(f"malformed url: {url!r}")

    cache_dir = Path(cache_dir) if cache_dir is not None else default_cache_dir()
    cached = cache_path_for(url, cache_dir)

    try:
        response = requests.get(url, timeout=timeout)
        response.raise_for_status()
    except requests.RequestException as e:
        if cached.is_file():
            logger.warning("fetch of %s failed (%s); using cached copy %s, which may be stale", url, e, cached)
            return decode_csv_bytes(cached.read_bytes(), str(cached))
        raise FetchError(f"could not fetch {url} and no cached copy exists: {e}") from e

    content_type = response.headers.get("Content-Type", "")
    if "csv" not in content_type and not content_type.startswith("text/plain"):
        logger.warning("%s returned content type %r, expected CSV", url, content_type)

    body = response.content
    text = decode_csv_bytes(body, url)
    atomic_write_bytes(cached, body)
    logger.info("cached %s -> %s", url, cached)
    return text
