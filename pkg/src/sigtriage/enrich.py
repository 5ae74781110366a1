"""Reference enrichment: fetch vulnerability-database text per reference.

Each reference resolves through a per-system resolver (cve, url shipped;
anything else is unresolved).  Fetched text lands in a disk cache laid
out as ``<root>/<system>/<ident>.txt``; fixture directories use the same
layout so the whole pipeline runs offline.
"""

from __future__ import annotations

import logging
import os
import re
import tempfile
import threading
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass
from html import unescape
from pathlib import Path
from urllib.parse import quote, urlsplit

from .sigparse import Reference, Signature

logger = logging.getLogger(__name__)

__all__ = [
    "EnrichedReference",
    "ReferenceEnricher",
    "extract_text",
    "CACHE_DIR_ENV",
]

CACHE_DIR_ENV = "SIGTRIAGE_CACHE_DIR"

_MARKUP_BLOCK = re.compile(r"(?is)<(script|style)\b.*?</\1>")
_TAG = re.compile(r"<[^>]+>")


def extract_text(html: str) -> str:
    """Visible text only: drop script/style, strip tags, collapse blanks."""
    text = _MARKUP_BLOCK.sub(" ", html)
    text = _TAG.sub(" ", text)
    return " ".join(unescape(text).split())


def _cve_url(ident: str) -> str:
    return f"https://nvd.nist.gov/vuln/detail/CVE-{ident}"


def _url_url(ident: str) -> str:
    if ident.startswith(("http://", "https://")):
        return ident
    return f"http://{ident}"


RESOLVERS = {
    "cve": _cve_url,
    "url": _url_url,
}


@dataclass(frozen=True)
class EnrichedReference:
    reference: Reference
    text: str
    source: str  # live | cache | fixture | unresolved
    fetched_at: float


class _RateLimiter:
    """Per-host minimum spacing between requests."""

    def __init__(self, requests_per_second: float, sleep=time.sleep, clock=time.monotonic):
        self.interval = 1.0 / requests_per_second if requests_per_second > 0 else 0.0
        self._sleep = sleep
        self._clock = clock
        self._last: dict[str, float] = {}
        self._lock = threading.Lock()

    def wait(self, host: str) -> None:
        while True:
            with self._lock:
                now = self._clock()
                last = self._last.get(host)
                if last is None or now - last >= self.interval:
                    self._last[host] = now
                    return
                delay = self.interval - (now - last)
            self._sleep(delay)


class ReferenceEnricher:
    """Resolve references with caching, fixtures and a live HTTP mode."""

    def __init__(
        self,
        cache_dir=None,
        mode: str = "offline",
        fixture_dir=None,
        requests_per_second: float = 2.0,
        max_in_flight: int = 4,
        timeout: float = 10.0,
        retries: int = 2,
        fetch=None,
    ):
        if mode not in ("live", "offline"):
            raise ValueError(f"mode must be 'live' or 'offline', got {mode!r}")
        cache_dir = cache_dir or os.environ.get(CACHE_DIR_ENV)
        self.cache_dir = Path(cache_dir) if cache_dir else None
        self.fixture_dir = Path(fixture_dir) if fixture_dir else None
        self.mode = mode
        self.max_in_flight = max_in_flight
        self.timeout = timeout
        self.retries = retries
        self._fetch = fetch or self._http_fetch
        self._limiter = _RateLimiter(requests_per_second)

    # -- cache layout ---------------------------------------------------------

    @staticmethod
    def entry_path(root: Path, ref: Reference) -> Path:
        system = quote(ref.system, safe="")
        ident = quote(ref.ident, safe="")
        return root / system / f"{ident}.txt"

    def _read_entry(self, root: Path | None, ref: Reference) -> str | None:
        if root is None:
            return None
        path = self.entry_path(root, ref)
        if path.is_file():
            return path.read_text("utf-8")
        return None

    def _write_cache(self, ref: Reference, text: str) -> None:
        if self.cache_dir is None:
            return
        path = self.entry_path(self.cache_dir, ref)
        path.parent.mkdir(parents=True, exist_ok=True)
        fd, tmp = tempfile.mkstemp(dir=path.parent, suffix=".tmp")
        try:
            with os.fdopen(fd, "w", encoding="utf-8") as fh:
                fh.write(text)
            os.replace(tmp, path)  # atomic on POSIX
        except BaseException:
            if os.path.exists(tmp):
                os.unlink(tmp)
            raise

    # -- fetching ---------------------------------------------------------------

    def _http_fetch(self, url: str) -> str:
        import requests

        response = requests.get(url, timeout=self.timeout)
        response.raise_for_status()
        return response.text

    def _fetch_live(self, ref: Reference) -> str | None:
        resolver = RESOLVERS.get(ref.system)
        if resolver is None:
            logger.warning("no resolver for reference system %r", ref.system)
            return None
        url = resolver(ref.ident)
        host = urlsplit(url).netloc
        delay = 1.0
        for attempt in range(self.retries + 1):
            self._limiter.wait(host)
            try:
                return extract_text(self._fetch(url))
            except Exception as exc:
                logger.warning(
                    "fetch attempt %d for %s failed: %s", attempt + 1, url, exc
                )
                if attempt < self.retries:
                    time.sleep(delay)
                    delay *= 2
        return None

    # -- public API ---------------------------------------------------------------

    def resolve(self, ref: Reference, mode: str | None = None) -> EnrichedReference:
        """Resolve one reference; failure is a normal unresolved outcome."""
        mode = mode or self.mode
        now = time.time()
        cached = self._read_entry(self.cache_dir, ref)
        if cached is not None:
            return EnrichedReference(ref, cached, "cache", now)
        fixture = self._read_entry(self.fixture_dir, ref)
        if fixture is not None:
            return EnrichedReference(ref, fixture, "fixture", now)
        if mode == "live":
            text = self._fetch_live(ref)
            if text is not None:
                self._write_cache(ref, text)
                return EnrichedReference(ref, text, "live", now)
        else:
            logger.warning("offline: no cache or fixture for %s,%s", ref.system, ref.ident)
        return EnrichedReference(ref, "", "unresolved", now)

    def enrich_corpus(
        self, items, mode: str | None = None
    ) -> dict[str, str]:
        """Concatenated reference text per signature id.

        ``items`` is an iterable of (id, Signature); texts of each
        signature's references are joined with single spaces in source
        order.
        """
        items = list(items)
        refs = sorted(
            {ref for _, sig in items for ref in sig.references},
            key=lambda r: (r.system, r.ident),
        )
        with ThreadPoolExecutor(max_workers=self.max_in_flight) as pool:
            resolved = dict(
                zip(refs, pool.map(lambda r: self.resolve(r, mode), refs))
            )
        out = {}
        for sig_id, sig in items:
            out[sig_id] = " ".join(
                resolved[ref].text for ref in sig.references if resolved[ref].text
            )
        return out
