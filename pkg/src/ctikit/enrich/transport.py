"""HTTP transport abstraction with per-service rate limiting.

Transports are injectable so tests can run against recorded or counting
implementations with a fake clock; nothing in the test suite touches the
network.
"""

from __future__ import annotations

import time
from dataclasses import dataclass, field
from typing import Any, Callable, Optional, Protocol


@dataclass(frozen=True)
class TransportResponse:
    status_code: int
    body: bytes


class Transport(Protocol):
    def request(
        self,
        method: str,
        url: str,
        params: Optional[dict[str, Any]] = None,
        data: Optional[dict[str, Any]] = None,
        json_body: Optional[dict[str, Any]] = None,
        headers: Optional[dict[str, str]] = None,
        timeout: float = 30.0,
    ) -> TransportResponse: ...


class TransportError(Exception):
    """Network-level failure (timeout, connection refused, 5xx)."""


class RequestsTransport:
    """Live transport backed by the requests library."""

    def request(
        self,
        method: str,
        url: str,
        params: Optional[dict[str, Any]] = None,
        data: Optional[dict[str, Any]] = None,
        json_body: Optional[dict[str, Any]] = None,
        headers: Optional[dict[str, str]] = None,
        timeout: float = 30.0,
    ) -> TransportResponse:
        import requests

        try:
            response = requests.request(
                method, url, params=params, data=data, json=json_body, headers=headers, timeout=timeout
            )
        except requests.RequestException as exc:
            raise TransportError(str(exc)) from exc
        if response.status_code >= 500:
            raise TransportError(f"{url}: server error {response.status_code}")
        return TransportResponse(status_code=response.status_code, body=response.content)


@dataclass
class CountingTransport:
    """Wrap another transport and count outbound requests.

    With no inner transport every request raises, which is how offline runs
    assert that zero network calls happen.
    """

    inner: Optional[Transport] = None
    requests_made: int = 0
    log: list[tuple[str, str]] = field(default_factory=list)

    def request(self, method: str, url: str, **kwargs: Any) -> TransportResponse:
        self.requests_made += 1
        self.log.append((method, url))
        if self.inner is None:
            raise TransportError(f"offline transport: refusing {method} {url}")
        return self.inner.request(method, url, **kwargs)


class RateLimiter:
    """Evenly spaced request admission for one service.

    The spacing is (60 + guard) / per_minute seconds, so any observation
    window of up to ``60 + guard`` seconds contains at most ``per_minute``
    admitted requests. Clock and sleep are injectable for testing.
    """

    def __init__(
        self,
        per_minute: float,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
        guard_seconds: float = 2.0,
    ) -> None:
        if per_minute <= 0:
            raise ValueError("per_minute must be positive")
        self.interval = (60.0 + guard_seconds) / per_minute
        self._clock = clock
        self._sleep = sleep
        self._next_at: Optional[float] = None

    def acquire(self) -> float:
        """Block until a request may be sent; returns the admission time."""
        now = self._clock()
        if self._next_at is not None and now < self._next_at:
            self._sleep(self._next_at - now)
            now = self._clock()
        admitted = now if self._next_at is None else max(now, self._next_at)
        self._next_at = admitted + self.interval
        return admitted


# Requests/minute defaults; VirusTotal's free tier is the binding constraint.
DEFAULT_RATE_LIMITS = {
    "vt": 4.0,
    "otx": 60.0,
    "urlhaus": 60.0,
    "mb": 60.0,
    "misp": 60.0,
    "nvd": 10.0,
}
