"""Reliability metrics over enrichment verdicts: correctness, timeliness,
exclusive-intersection overlap, and the automated-account proportion."""

from __future__ import annotations

from dataclasses import dataclass, field
from datetime import date
from decimal import ROUND_HALF_EVEN, Decimal
from itertools import combinations
from typing import Iterable, Optional

from .enrich import ServiceId, Verdict, accepted_families
from .model import IocFamily, IocRecord, IocType


def round2(value: float) -> float:
    """Two decimal places, banker's rounding, for report output."""
    return float(Decimal(repr(value)).quantize(Decimal("0.01"), rounding=ROUND_HALF_EVEN))


# Timeliness compares each family against the service most likely to carry a
# first-seen date: VirusTotal for network indicators, VirusTotal and
# AlienVault for hashes, NVD publication dates for CVEs.
DEFAULT_TIMELINESS_BASELINES: dict[IocFamily, tuple[ServiceId, ...]] = {
    IocFamily.URL: (ServiceId.VIRUSTOTAL,),
    IocFamily.IP: (ServiceId.VIRUSTOTAL,),
    IocFamily.DOMAIN: (ServiceId.VIRUSTOTAL,),
    IocFamily.HASH: (ServiceId.VIRUSTOTAL, ServiceId.ALIENVAULT),
    IocFamily.CVE: (ServiceId.NVD,),
}


@dataclass(frozen=True)
class ReliabilityCounts:
    n_ioc: int
    n_mal: int

    def __post_init__(self) -> None:
        if self.n_ioc < 0 or self.n_mal < 0:
            raise ValueError("counts must be non-negative")
        if self.n_mal > self.n_ioc:
            raise ValueError("malicious count exceeds total")


def correctness(counts: ReliabilityCounts) -> float:
    """Percentage of indicators any service called malicious."""
    if counts.n_ioc == 0:
        raise ValueError("correctness undefined for zero indicators")
    return counts.n_mal / counts.n_ioc * 100.0


def prop_bot(n_bot_mal: int, n_tot_mal: int) -> float:
    """Percentage of malicious indicators posted by automated accounts."""
    if n_tot_mal <= 0:
        raise ValueError("total malicious count must be positive")
    if n_bot_mal > n_tot_mal:
        raise ValueError("bot count exceeds total")
    return n_bot_mal / n_tot_mal * 100.0


def malicious_service_sets(verdicts: Iterable[Verdict]) -> dict[tuple[str, str], set[ServiceId]]:
    """Per (value, type): the services that flagged it (malicious or found)."""
    flagged: dict[tuple[str, str], set[ServiceId]] = {}
    for verdict in verdicts:
        if verdict.is_malicious:
            flagged.setdefault((verdict.ioc_value, verdict.ioc_type.value), set()).add(verdict.service)
    return flagged


def reliability_counts(
    iocs: Iterable[IocRecord], verdicts: Iterable[Verdict]
) -> dict[Optional[IocFamily], ReliabilityCounts]:
    """Correctness inputs per indicator family; the None key is the total."""
    flagged = malicious_service_sets(verdicts)
    totals: dict[Optional[IocFamily], list[int]] = {family: [0, 0] for family in IocFamily}
    totals[None] = [0, 0]
    for record in iocs:
        malicious = record.key in flagged
        for bucket in (record.ioc_type.family, None):
            totals[bucket][0] += 1
            totals[bucket][1] += int(malicious)
    return {
        family: ReliabilityCounts(n_ioc=n, n_mal=m)
        for family, (n, m) in totals.items()
        if n > 0 or family is None
    }


@dataclass(frozen=True)
class TimelinessRecord:
    ioc_value: str
    t_twitter: date
    t_tis: date

    @property
    def delta_days(self) -> int:
        return (self.t_twitter - self.t_tis).days


@dataclass
class TimelinessSummary:
    """Per-family compare/earlier/skip counters for one baseline service."""

    baseline: ServiceId
    compared: dict[IocFamily, int] = field(default_factory=dict)
    earlier: dict[IocFamily, int] = field(default_factory=dict)
    skipped_no_date: dict[IocFamily, int] = field(default_factory=dict)

    def pct_earlier(self, family: IocFamily) -> float:
        n = self.compared.get(family, 0)
        if n == 0:
            return 0.0
        return self.earlier.get(family, 0) / n * 100.0

    @property
    def total_compared(self) -> int:
        return sum(self.compared.values())

    @property
    def total_earlier(self) -> int:
        return sum(self.earlier.values())


def timeliness(
    verdicts: Iterable[Verdict], iocs: Iterable[IocRecord], baseline: ServiceId
) -> tuple[list[TimelinessRecord], TimelinessSummary]:
    """Post date minus baseline first-seen date, per malicious indicator.

    Negative deltas mean the post predates the service. Indicators without a
    comparable baseline date are skipped and counted in the summary.
    """
    verdicts = list(verdicts)
    flagged = malicious_service_sets(verdicts)
    first_seen: dict[tuple[str, str], date] = {}
    for verdict in verdicts:
        if verdict.service is baseline and verdict.first_seen is not None:
            first_seen[(verdict.ioc_value, verdict.ioc_type.value)] = verdict.first_seen.date()

    by_key: dict[tuple[str, str], IocRecord] = {}
    for record in sorted(iocs, key=lambda r: (r.ioc_value, r.ioc_type.value, r.published_date)):
        by_key.setdefault(record.key, record)

    records: list[TimelinessRecord] = []
    summary = TimelinessSummary(baseline=baseline)
    families = accepted_families(baseline)
    for record in by_key.values():
        family = record.ioc_type.family
        if family not in families or record.key not in flagged:
            continue
        tis_date = first_seen.get(record.key)
        if tis_date is None:
            summary.skipped_no_date[family] = summary.skipped_no_date.get(family, 0) + 1
            continue
        entry = TimelinessRecord(
            ioc_value=record.ioc_value, t_twitter=record.published_date.date(), t_tis=tis_date
        )
        records.append(entry)
        summary.compared[family] = summary.compared.get(family, 0) + 1
        if entry.delta_days < 0:
            summary.earlier[family] = summary.earlier.get(family, 0) + 1
    return records, summary


@dataclass
class OverlapTable:
    """Exclusive-intersection counts per family, upset-plot style."""

    per_family: dict[IocFamily, dict[frozenset[ServiceId], int]]

    def count(self, family: IocFamily, services: Iterable[ServiceId]) -> int:
        return self.per_family.get(family, {}).get(frozenset(services), 0)

    def to_rows(self) -> list[tuple[str, str, int]]:
        rows: list[tuple[str, str, int]] = []
        for family in IocFamily:
            subsets = self.per_family.get(family)
            if not subsets:
                continue
            ordered = sorted(
                subsets.items(),
                key=lambda kv: (len(kv[0]), sorted(s.value for s in kv[0])),
            )
            for subset, count in ordered:
                label = "+".join(sorted(s.value for s in subset))
                rows.append((family.value, label, count))
        return rows


def overlap(verdicts: Iterable[Verdict]) -> OverlapTable:
    """Count indicators flagged by exactly each subset of services.

    The subset universe per family is the set of accepting services that
    produced at least one applicable verdict for that family.
    """
    verdicts = list(verdicts)
    universe: dict[IocFamily, set[ServiceId]] = {}
    for verdict in verdicts:
        family = verdict.ioc_type.family
        if family in accepted_families(verdict.service):
            universe.setdefault(family, set()).add(verdict.service)

    exact: dict[IocFamily, dict[frozenset[ServiceId], int]] = {}
    for family, services in universe.items():
        table: dict[frozenset[ServiceId], int] = {}
        for size in range(1, len(services) + 1):
            for combo in combinations(sorted(services, key=lambda s: s.value), size):
                table[frozenset(combo)] = 0
        exact[family] = table

    for key, flagging in malicious_service_sets(verdicts).items():
        family = IocType(key[1]).family
        subset = frozenset(flagging)
        if family in exact and subset in exact[family]:
            exact[family][subset] += 1
    return OverlapTable(per_family=exact)


def monthly_tally(iocs: Iterable[IocRecord]) -> list[tuple[str, str, int]]:
    """(month, family, count) rows for the report's month-wise table."""
    counts: dict[tuple[str, str], int] = {}
    for record in iocs:
        month = record.published_date.strftime("%Y-%m")
        counts[(month, record.ioc_type.family.value)] = (
            counts.get((month, record.ioc_type.family.value), 0) + 1
        )
    return [(month, family, n) for (month, family), n in sorted(counts.items())]
