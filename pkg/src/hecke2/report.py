"""Check outcomes shared by the verification layers."""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Any

__all__ = ["Finding", "PASS", "FAIL", "SKIPPED"]

PASS, FAIL, SKIPPED = "pass", "fail", "skipped"


@dataclass
class Finding:
    """Result of one verification step: ``ok`` plus a witness when it is not."""

    ok: bool
    details: dict[str, Any] = field(default_factory=dict)
    witness: dict[str, Any] | None = None

    @classmethod
    def combine(cls, parts: dict[str, Finding]) -> Finding:
        ok = all(f.ok for f in parts.values())
        details = {k: f.details for k, f in parts.items()}
        witness = None
        if not ok:
            witness = {k: f.witness for k, f in parts.items() if not f.ok}
        return cls(ok, details, witness)
