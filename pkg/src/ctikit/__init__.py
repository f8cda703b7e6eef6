"""ctikit: batch cyber-threat-intelligence toolkit.

Extracts Indicators of Compromise from social-media post archives, validates
them against threat-intelligence services, scores reliability (correctness,
timeliness, overlap), and classifies posting accounts as human or automated
with explainable features.
"""

__version__ = "0.1.0"

from .model import AccountProfile, IocFamily, IocRecord, IocType, PostRecord, canonical_serialize

__all__ = [
    "AccountProfile",
    "IocFamily",
    "IocRecord",
    "IocType",
    "PostRecord",
    "canonical_serialize",
    "__version__",
]
