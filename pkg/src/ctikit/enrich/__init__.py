"""Threat-intelligence enrichment: query six services, normalize verdicts,
cache results on disk, and respect per-service rate limits."""

from .verdict import ServiceId, Verdict, VerdictStatus, accepted_families, accepts
from .judge import PayloadError, judge
from .cache import VerdictCache
from .transport import CountingTransport, RateLimiter, RequestsTransport, TransportResponse
from .providers import (
    CredentialError,
    EnrichmentFailure,
    FixtureProvider,
    LiveProvider,
    enrich_dataset,
    fixture_relpath,
)

__all__ = [
    "ServiceId",
    "Verdict",
    "VerdictStatus",
    "accepted_families",
    "accepts",
    "PayloadError",
    "judge",
    "VerdictCache",
    "CountingTransport",
    "RateLimiter",
    "RequestsTransport",
    "TransportResponse",
    "CredentialError",
    "EnrichmentFailure",
    "FixtureProvider",
    "LiveProvider",
    "enrich_dataset",
    "fixture_relpath",
]
