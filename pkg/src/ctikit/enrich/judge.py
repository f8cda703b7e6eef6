"""Normalize raw service payloads into Verdicts.

Rules: VirusTotal is malicious from one flagging engine up; AlienVault from
any pulse, safe-browsing, or antivirus signal; the database services
(URLhaus, MalwareBazaar, MISP, NVD) answer found/not-found on presence.
"""

from __future__ import annotations

from datetime import datetime, timezone
from typing import Any, Optional

from ..model import IocRecord, parse_timestamp
from .verdict import ServiceId, Verdict, VerdictStatus

VT_ENGINE_THRESHOLD = 1


class PayloadError(ValueError):
    """A service payload could not be interpreted."""

    def __init__(self, service: ServiceId, reason: str) -> None:
        self.service = service
        super().__init__(f"{service.value}: {reason}")


def judge(service: ServiceId, raw_response: dict[str, Any], ioc: IocRecord) -> Verdict:
    """Turn one raw service response into the Verdict for ``ioc``."""
    if not isinstance(raw_response, dict):
        raise PayloadError(service, f"expected a JSON object, got {type(raw_response).__name__}")
    try:
        status, first_seen, detail = _JUDGES[service](raw_response)
    except PayloadError:
        raise
    except (KeyError, TypeError, ValueError, AttributeError) as exc:
        raise PayloadError(service, f"malformed payload: {exc}") from exc
    return Verdict(
        ioc_value=ioc.ioc_value,
        ioc_type=ioc.ioc_type,
        service=service,
        status=status,
        first_seen=first_seen,
        detail=detail,
    )


def _judge_virustotal(payload: dict) -> tuple[VerdictStatus, Optional[datetime], str]:
    attributes = payload["data"]["attributes"]
    stats = attributes.get("last_analysis_stats", {})
    flagged = int(stats.get("malicious", 0))
    total = sum(int(v) for v in stats.values())
    status = VerdictStatus.MALICIOUS if flagged >= VT_ENGINE_THRESHOLD else VerdictStatus.CLEAN
    first_seen = _parse_when(
        attributes.get("first_submission_date", attributes.get("first_seen"))
    )
    return status, first_seen, f"{flagged}/{total} engines flagged"


def _judge_alienvault(payload: dict) -> tuple[VerdictStatus, Optional[datetime], str]:
    pulse_info = payload.get("pulse_info") or {}
    pulse_count = int(pulse_info.get("count", 0))
    gsb = payload.get("google_safe_browsing")
    gsb_flagged = gsb is True or (
        isinstance(gsb, str) and gsb.lower() in {"malicious", "suspicious", "unsafe"}
    )
    antivirus = payload.get("antivirus") or []
    av_flagged = bool(antivirus)
    signals = []
    if pulse_count:
        signals.append(f"pulses={pulse_count}")
    if gsb_flagged:
        signals.append("safe_browsing")
    if av_flagged:
        signals.append("antivirus")
    malicious = bool(signals)
    first_seen = None
    created = [p.get("created") for p in pulse_info.get("pulses", []) if p.get("created")]
    if created:
        first_seen = min(filter(None, (_parse_when(c) for c in created)), default=None)
    status = VerdictStatus.MALICIOUS if malicious else VerdictStatus.CLEAN
    return status, first_seen, ",".join(signals)


def _judge_urlhaus(payload: dict) -> tuple[VerdictStatus, Optional[datetime], str]:
    query_status = payload["query_status"]
    if query_status == "ok":
        first_seen = _parse_when(payload.get("firstseen") or payload.get("date_added"))
        return VerdictStatus.FOUND, first_seen, payload.get("threat", "")
    if query_status in ("no_results", "invalid_url", "invalid_host"):
        return VerdictStatus.NOT_FOUND, None, query_status
    raise PayloadError(ServiceId.URLHAUS, f"unknown query_status {query_status!r}")


def _judge_malwarebazaar(payload: dict) -> tuple[VerdictStatus, Optional[datetime], str]:
    query_status = payload["query_status"]
    if query_status == "ok":
        entries = payload.get("data") or []
        first_seen = min(
            filter(None, (_parse_when(e.get("first_seen")) for e in entries)), default=None
        )
        signature = entries[0].get("signature", "") if entries else ""
        return VerdictStatus.FOUND, first_seen, signature or ""
    if query_status in ("hash_not_found", "no_results"):
        return VerdictStatus.NOT_FOUND, None, query_status
    raise PayloadError(ServiceId.MALWAREBAZAAR, f"unknown query_status {query_status!r}")


def _judge_misp(payload: dict) -> tuple[VerdictStatus, Optional[datetime], str]:
    attributes = (payload.get("response") or {}).get("Attribute")
    if attributes is None:
        raise PayloadError(ServiceId.MISP, "missing response.Attribute")
    if not attributes:
        return VerdictStatus.NOT_FOUND, None, ""
    dates = []
    for attribute in attributes:
        event = attribute.get("Event") or {}
        when = _parse_when(event.get("date") or attribute.get("timestamp"))
        if when:
            dates.append(when)
    return VerdictStatus.FOUND, min(dates, default=None), f"events={len(attributes)}"


def _judge_nvd(payload: dict) -> tuple[VerdictStatus, Optional[datetime], str]:
    vulnerabilities = payload.get("vulnerabilities")
    if vulnerabilities is None:
        raise PayloadError(ServiceId.NVD, "missing vulnerabilities list")
    if not vulnerabilities:
        return VerdictStatus.NOT_FOUND, None, ""
    published = _parse_when(vulnerabilities[0].get("cve", {}).get("published"))
    return VerdictStatus.FOUND, published, ""


_JUDGES = {
    ServiceId.VIRUSTOTAL: _judge_virustotal,
    ServiceId.ALIENVAULT: _judge_alienvault,
    ServiceId.URLHAUS: _judge_urlhaus,
    ServiceId.MALWAREBAZAAR: _judge_malwarebazaar,
    ServiceId.MISP: _judge_misp,
    ServiceId.NVD: _judge_nvd,
}


def _parse_when(value: Any) -> Optional[datetime]:
    """Best-effort date parsing: epoch seconds, ISO-8601, or 'Y-m-d H:M:S UTC'."""
    if value is None or value == "":
        return None
    if isinstance(value, (int, float)):
        return datetime.fromtimestamp(int(value), tz=timezone.utc)
    text = str(value).strip()
    if text.endswith(" UTC"):
        text = text[:-4].replace(" ", "T")
    try:
        return parse_timestamp(text)
    except ValueError:
        return None
