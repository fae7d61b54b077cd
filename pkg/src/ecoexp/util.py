"""Shared plumbing: canonical JSON, RFC 3339 timestamps, half-up rounding."""

from __future__ import annotations

import json
from datetime import datetime, timezone
from decimal import ROUND_HALF_UP, Decimal


def utc_now() -> datetime:
    return datetime.now(timezone.utc).replace(microsecond=0)


def format_ts(dt: datetime) -> str:
    """RFC 3339 with a Z suffix; naive datetimes are taken as UTC."""
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    dt = dt.astimezone(timezone.utc)
    return dt.isoformat().replace("+00:00", "Z")


def parse_ts(value: str) -> datetime:
    # datetime.fromisoformat on 3.10 rejects the Z suffix
    if value.endswith("Z"):
        value = value[:-1] + "+00:00"
    dt = datetime.fromisoformat(value)
    if dt.tzinfo is None:
        dt = dt.replace(tzinfo=timezone.utc)
    return dt.astimezone(timezone.utc)


def canonical_json(obj) -> str:
    """The one serializer used for every JSON artifact we may diff byte-wise."""
    return json.dumps(obj, sort_keys=True, indent=2, ensure_ascii=False) + "\n"


def round_half_up(value: float, decimals: int = 2) -> float:
    """Round half away from zero; 11/14*100 -> 78.57, 10/14*100 -> 71.43."""
    q = Decimal(1).scaleb(-decimals)
    return float(Decimal(repr(value)).quantize(q, rounding=ROUND_HALF_UP))


def pct(numerator: int, denominator: int) -> float:
    return round_half_up(100.0 * numerator / denominator)
