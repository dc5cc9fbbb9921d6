"""Machine-readable certificates and the replay verifier.

Certificates are deterministic for a fixed input, seed and version:
dictionaries are emitted with sorted keys and timing is opt-in so the
default output is byte-identical across runs.
"""

from __future__ import annotations

import json
from typing import Any, Literal, Optional

from pydantic import BaseModel

from . import __version__
from .exactlin import FieldSpec, Mat, rank


class CheckResult(BaseModel):
    name: str
    status: Literal["PASS", "FAIL", "SKIPPED"]
    exhaustive: bool = True
    witness: Optional[Any] = None
    details: Optional[Any] = None


class Certificate(BaseModel):
    tool: str = "extricat"
    version: str = __version__
    command: str
    input_digest: str
    field: str
    backend: str
    seed: int
    caps: dict
    checks: list[CheckResult]
    notes: list[str] = []
    timing_ms: Optional[int] = None

    @property
    def failed(self) -> bool:
        return any(c.status == "FAIL" for c in self.checks)

    def to_json(self) -> str:
        data = self.model_dump(exclude_none=True)
        return json.dumps(data, sort_keys=True, indent=2)

    def to_text(self) -> str:
        lines = [
            f"{self.tool} {self.version}  command={self.command}",
            f"input  {self.input_digest[:16]}  field={self.field}  backend={self.backend}  seed={self.seed}",
        ]
        width = max((len(c.name) for c in self.checks), default=4)
        for c in self.checks:
            flag = "" if c.exhaustive else "  [non-exhaustive]"
            lines.append(f"  {c.name.ljust(width)}  {c.status}{flag}")
            if c.status == "FAIL" and c.witness is not None:
                lines.append(f"      witness: {json.dumps(c.witness, sort_keys=True)}")
        for n in self.notes:
            lines.append(f"note: {n}")
        lines.append("overall: " + ("FAIL" if self.failed else "PASS"))
        return "\n".join(lines)


def check(name: str, ok: bool, witness=None, exhaustive: bool = True, details=None) -> CheckResult:
    return CheckResult(
        name=name,
        status="PASS" if ok else "FAIL",
        witness=witness if not ok else None,
        details=details,
        exhaustive=exhaustive,
    )


def skipped(name: str, details=None) -> CheckResult:
    return CheckResult(name=name, status="SKIPPED", details=details)


# ---------------------------------------------------------------------------
# replay: re-verify the self-contained linear-algebra witnesses of failures


def _field_from_name(name: str) -> FieldSpec:
    if name == "Q":
        return FieldSpec("rationals")
    if name.startswith("F_"):
        return FieldSpec("prime", int(name[2:]))
    raise ValueError(f"unknown field tag {name!r}")


def replay(cert_data: dict) -> list:
    """Re-check replayable witnesses; returns [(check name, verdict)]."""
    out = []
    field = _field_from_name(cert_data.get("field", ""))
    for c in cert_data.get("checks", []):
        wit = c.get("witness")
        if c.get("status") != "FAIL" or not isinstance(wit, dict):
            continue
        kind = wit.get("replay", {}).get("kind") if isinstance(wit.get("replay"), dict) else None
        if kind == "matrix-identity":
            lhs = Mat.from_rows(field, wit["replay"]["lhs"])
            rhs = Mat.from_rows(field, wit["replay"]["rhs"])
            out.append((c["name"], "CONFIRMED" if lhs != rhs else "NOT-REPRODUCED"))
        elif kind == "nonzero-matrix":
            m = Mat.from_rows(field, wit["replay"]["matrix"])
            out.append((c["name"], "CONFIRMED" if not m.is_zero() else "NOT-REPRODUCED"))
        elif kind == "rank-mismatch":
            m = Mat.from_rows(field, wit["replay"]["matrix"])
            out.append(
                (c["name"], "CONFIRMED" if rank(m) != wit["replay"]["claimed_rank"] else "NOT-REPRODUCED")
            )
        elif kind == "dim-mismatch":
            out.append(
                (
                    c["name"],
                    "CONFIRMED" if wit["replay"]["left"] != wit["replay"]["right"] else "NOT-REPRODUCED",
                )
            )
        else:
            out.append((c["name"], "NO-REPLAYABLE-WITNESS"))
    return out
