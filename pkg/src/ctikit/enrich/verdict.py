"""Service identities, type-acceptance matrix, and the normalized Verdict."""

from __future__ import annotations

from dataclasses import dataclass
from datetime import datetime
from enum import Enum
from typing import Any, Optional

from ..model import IocFamily, IocType, format_timestamp, parse_timestamp


class ServiceId(Enum):
    VIRUSTOTAL = "vt"
    ALIENVAULT = "otx"
    URLHAUS = "urlhaus"
    MALWAREBAZAAR = "mb"
    MISP = "misp"
    NVD = "nvd"


# Which indicator families each service answers for. Hash-only and CVE-only
# services return NotApplicable for everything else.
_ACCEPTED: dict[ServiceId, frozenset[IocFamily]] = {
    ServiceId.VIRUSTOTAL: frozenset({IocFamily.URL, IocFamily.IP, IocFamily.DOMAIN, IocFamily.HASH}),
    ServiceId.ALIENVAULT: frozenset({IocFamily.URL, IocFamily.IP, IocFamily.DOMAIN, IocFamily.HASH}),
    ServiceId.URLHAUS: frozenset({IocFamily.URL, IocFamily.IP, IocFamily.DOMAIN, IocFamily.HASH}),
    ServiceId.MALWAREBAZAAR: frozenset({IocFamily.HASH}),
    ServiceId.MISP: frozenset({IocFamily.HASH, IocFamily.CVE}),
    ServiceId.NVD: frozenset({IocFamily.CVE}),
}

# Database-style services answer Found/NotFound; scanners answer Malicious/Clean.
DATABASE_SERVICES = frozenset(
    {ServiceId.URLHAUS, ServiceId.MALWAREBAZAAR, ServiceId.MISP, ServiceId.NVD}
)


def accepted_families(service: ServiceId) -> frozenset[IocFamily]:
    return _ACCEPTED[service]


def accepts(service: ServiceId, ioc_type: IocType) -> bool:
    return ioc_type.family in _ACCEPTED[service]


class VerdictStatus(Enum):
    MALICIOUS = "malicious"
    CLEAN = "clean"
    FOUND = "found"
    NOT_FOUND = "not_found"
    NOT_APPLICABLE = "not_applicable"


@dataclass(frozen=True)
class Verdict:
    """One service's normalized judgment of one indicator."""

    ioc_value: str
    ioc_type: IocType
    service: ServiceId
    status: VerdictStatus
    first_seen: Optional[datetime] = None
    detail: str = ""

    def __post_init__(self) -> None:
        applicable = accepts(self.service, self.ioc_type)
        if (self.status is VerdictStatus.NOT_APPLICABLE) == applicable:
            raise ValueError(
                f"{self.service.value} / {self.ioc_type.value}: status {self.status.value} "
                "contradicts the acceptance matrix"
            )
        if self.status in (VerdictStatus.FOUND, VerdictStatus.NOT_FOUND):
            if self.service not in DATABASE_SERVICES:
                raise ValueError(f"{self.service.value} is not a database-style service")
        if self.status in (VerdictStatus.MALICIOUS, VerdictStatus.CLEAN):
            if self.service in DATABASE_SERVICES:
                raise ValueError(f"{self.service.value} reports found/not_found, not malicious/clean")

    @property
    def is_malicious(self) -> bool:
        """Database presence counts as malicious for metric purposes."""
        return self.status in (VerdictStatus.MALICIOUS, VerdictStatus.FOUND)

    def to_dict(self) -> dict[str, Any]:
        return {
            "ioc_value": self.ioc_value,
            "ioc_type": self.ioc_type.value,
            "service": self.service.value,
            "status": self.status.value,
            "first_seen": format_timestamp(self.first_seen) if self.first_seen else None,
            "detail": self.detail,
        }

    @classmethod
    def from_dict(cls, data: dict[str, Any]) -> "Verdict":
        first_seen = data.get("first_seen")
        return cls(
            ioc_value=data["ioc_value"],
            ioc_type=IocType(data["ioc_type"]),
            service=ServiceId(data["service"]),
            status=VerdictStatus(data["status"]),
            first_seen=parse_timestamp(first_seen) if first_seen else None,
            detail=data.get("detail", ""),
        )
