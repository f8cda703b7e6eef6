"""Verdict providers: offline fixtures and live service clients."""

from __future__ import annotations

import base64
import json
import time
from dataclasses import dataclass
from pathlib import Path
from typing import Callable, Iterable, Mapping, Optional, Protocol

from ..model import IocFamily, IocRecord, IocType
from .cache import VerdictCache, verdict_digest
from .judge import PayloadError, judge
from .transport import DEFAULT_RATE_LIMITS, RateLimiter, Transport, TransportError
from .verdict import DATABASE_SERVICES, ServiceId, Verdict, VerdictStatus, accepts

RETRY_ATTEMPTS = 3
RETRY_BASE_SECONDS = 1.0

# Environment variables holding live credentials, per service.
CREDENTIAL_VARS: dict[ServiceId, tuple[str, ...]] = {
    ServiceId.VIRUSTOTAL: ("CTIKIT_VT_KEY",),
    ServiceId.ALIENVAULT: ("CTIKIT_OTX_KEY",),
    ServiceId.URLHAUS: (),
    ServiceId.MALWAREBAZAAR: (),
    ServiceId.MISP: ("CTIKIT_MISP_URL", "CTIKIT_MISP_KEY"),
    ServiceId.NVD: (),
}


class CredentialError(RuntimeError):
    """A required credential environment variable is unset."""

    def __init__(self, missing: list[str]) -> None:
        self.missing = missing
        super().__init__("missing credential environment variables: " + ", ".join(missing))


@dataclass(frozen=True)
class EnrichmentFailure:
    """A (service, ioc) pair that produced no verdict after retries."""

    ioc_value: str
    ioc_type: IocType
    service: ServiceId
    reason: str

    def to_dict(self) -> dict:
        return {
            "ioc_value": self.ioc_value,
            "ioc_type": self.ioc_type.value,
            "service": self.service.value,
            "reason": self.reason,
        }


class VerdictProvider(Protocol):
    def fetch(self, service: ServiceId, ioc: IocRecord) -> Verdict: ...


def fixture_relpath(service: ServiceId, ioc_value: str) -> str:
    return f"{service.value}/{verdict_digest(service, ioc_value)}.json"


def absent_verdict(service: ServiceId, ioc: IocRecord, detail: str) -> Verdict:
    """What a service reports when it simply has nothing on the indicator."""
    status = VerdictStatus.NOT_FOUND if service in DATABASE_SERVICES else VerdictStatus.CLEAN
    return Verdict(
        ioc_value=ioc.ioc_value, ioc_type=ioc.ioc_type, service=service, status=status, detail=detail
    )


class FixtureProvider:
    """Serve verdicts from a directory of normalized verdict files."""

    def __init__(self, directory: str | Path) -> None:
        self.directory = Path(directory)
        if not self.directory.is_dir():
            raise FileNotFoundError(f"fixture directory does not exist: {self.directory}")

    def fetch(self, service: ServiceId, ioc: IocRecord) -> Verdict:
        path = self.directory / fixture_relpath(service, ioc.ioc_value)
        if not path.is_file():
            return absent_verdict(service, ioc, detail="no fixture entry")
        data = json.loads(path.read_text("utf-8"))
        return Verdict.from_dict(data)


class LiveProvider:
    """Query the real services, rate limited and with bounded retries."""

    def __init__(
        self,
        transport: Transport,
        services: Iterable[ServiceId],
        env: Mapping[str, str],
        rate_limits: Optional[dict[str, float]] = None,
        clock: Callable[[], float] = time.monotonic,
        sleep: Callable[[float], None] = time.sleep,
    ) -> None:
        self.transport = transport
        self._sleep = sleep
        self.credentials: dict[str, str] = {}
        missing: list[str] = []
        for service in services:
            for var in CREDENTIAL_VARS[service]:
                value = env.get(var, "")
                if value:
                    self.credentials[var] = value
                else:
                    missing.append(var)
        if missing:
            raise CredentialError(sorted(set(missing)))
        limits = dict(DEFAULT_RATE_LIMITS)
        limits.update(rate_limits or {})
        self.limiters = {
            service: RateLimiter(limits[service.value], clock=clock, sleep=sleep)
            for service in services
        }

    def fetch(self, service: ServiceId, ioc: IocRecord) -> Verdict:
        method, url, kwargs = self._build_request(service, ioc)
        last_error = "unknown error"
        for attempt in range(RETRY_ATTEMPTS):
            if attempt:
                self._sleep(RETRY_BASE_SECONDS * 2 ** (attempt - 1))
            self.limiters[service].acquire()
            try:
                response = self.transport.request(method, url, **kwargs)
            except TransportError as exc:
                last_error = str(exc)
                continue
            if response.status_code == 404:
                return absent_verdict(service, ioc, detail="not present (404)")
            if response.status_code == 429:
                last_error = "rate limited (429)"
                continue
            if response.status_code != 200:
                raise PayloadError(service, f"unexpected HTTP status {response.status_code}")
            payload = json.loads(response.body.decode("utf-8"))
            return judge(service, payload, ioc)
        raise TransportError(f"{service.value}: giving up after {RETRY_ATTEMPTS} attempts ({last_error})")

    def _build_request(self, service: ServiceId, ioc: IocRecord) -> tuple[str, str, dict]:
        value = ioc.ioc_value
        family = ioc.ioc_type.family
        if service is ServiceId.VIRUSTOTAL:
            collection = {
                IocFamily.URL: "urls",
                IocFamily.IP: "ip_addresses",
                IocFamily.DOMAIN: "domains",
                IocFamily.HASH: "files",
            }[family]
            identifier = (
                base64.urlsafe_b64encode(value.encode("utf-8")).decode("ascii").rstrip("=")
                if family is IocFamily.URL
                else value
            )
            return (
                "GET",
                f"https://www.virustotal.com/api/v3/{collection}/{identifier}",
                {"headers": {"x-apikey": self.credentials["CTIKIT_VT_KEY"]}},
            )
        if service is ServiceId.ALIENVAULT:
            section = {
                IocFamily.URL: "url",
                IocFamily.IP: "IPv4",
                IocFamily.DOMAIN: "domain",
                IocFamily.HASH: "file",
            }[family]
            return (
                "GET",
                f"https://otx.alienvault.com/api/v1/indicators/{section}/{value}/general",
                {"headers": {"X-OTX-API-KEY": self.credentials["CTIKIT_OTX_KEY"]}},
            )
        if service is ServiceId.URLHAUS:
            if family is IocFamily.URL:
                return ("POST", "https://urlhaus-api.abuse.ch/v1/url/", {"data": {"url": value}})
            if family in (IocFamily.IP, IocFamily.DOMAIN):
                return ("POST", "https://urlhaus-api.abuse.ch/v1/host/", {"data": {"host": value}})
            key = "md5_hash" if ioc.ioc_type is IocType.MD5 else "sha256_hash"
            return ("POST", "https://urlhaus-api.abuse.ch/v1/payload/", {"data": {key: value}})
        if service is ServiceId.MALWAREBAZAAR:
            return (
                "POST",
                "https://mb-api.abuse.ch/api/v1/",
                {"data": {"query": "get_info", "hash": value}},
            )
        if service is ServiceId.MISP:
            base = self.credentials["CTIKIT_MISP_URL"].rstrip("/")
            return (
                "POST",
                f"{base}/attributes/restSearch",
                {
                    "json_body": {"value": value, "returnFormat": "json"},
                    "headers": {
                        "Authorization": self.credentials["CTIKIT_MISP_KEY"],
                        "Accept": "application/json",
                    },
                },
            )
        if service is ServiceId.NVD:
            return (
                "GET",
                "https://services.nvd.nist.gov/rest/json/cves/2.0",
                {"params": {"cveId": value}},
            )
        raise ValueError(f"unknown service {service}")


def enrich_dataset(
    iocs: Iterable[IocRecord],
    services: Iterable[ServiceId],
    provider: VerdictProvider,
    cache: Optional[VerdictCache] = None,
) -> tuple[list[Verdict], list[EnrichmentFailure]]:
    """One verdict per (ioc, service) pair, NotApplicable where the service
    does not take the type. Output order is the canonical (ioc, service) sort
    regardless of provider behavior; failures are collected, not raised.
    """
    by_key: dict[tuple[str, str], IocRecord] = {}
    for record in sorted(iocs, key=lambda r: (r.ioc_value, r.ioc_type.value, r.published_date)):
        by_key.setdefault(record.key, record)
    ordered_iocs = list(by_key.values())
    ordered_services = sorted(set(services), key=lambda s: list(ServiceId).index(s))
    verdicts: list[Verdict] = []
    failures: list[EnrichmentFailure] = []

    for ioc in ordered_iocs:
        for service in ordered_services:
            if not accepts(service, ioc.ioc_type):
                verdicts.append(
                    Verdict(
                        ioc_value=ioc.ioc_value,
                        ioc_type=ioc.ioc_type,
                        service=service,
                        status=VerdictStatus.NOT_APPLICABLE,
                    )
                )
                continue
            if cache is not None:
                cached = cache.get(service, ioc.ioc_value)
                if cached is not None:
                    verdicts.append(cached)
                    continue
            try:
                verdict = provider.fetch(service, ioc)
            except (TransportError, PayloadError, OSError, ValueError) as exc:
                failures.append(
                    EnrichmentFailure(
                        ioc_value=ioc.ioc_value,
                        ioc_type=ioc.ioc_type,
                        service=service,
                        reason=str(exc),
                    )
                )
                continue
            if cache is not None:
                cache.put(verdict)
            verdicts.append(verdict)

    return verdicts, failures
