"""Machine-readable verification reports.

A report is an ordered list of checks.  Each check has an id, an anchor
naming the identity being tested, the observed residual, the tolerance and
a status.  Serialization is deterministic: wall time is kept out of the
checksummed body and is only written when explicitly requested.
"""

from __future__ import annotations

import csv
import hashlib
import io
import json
from dataclasses import dataclass, field
from typing import Any, Iterable

PASS, FAIL = "PASS", "FAIL"
CSV_FIELDS = ("check_id", "anchor", "residual", "tolerance", "status")


def _fmt(x: float) -> str:
    return f"{x:.6e}"


@dataclass(frozen=True)
class CheckEntry:
    check_id: str
    anchor: str
    residual: float
    tolerance: float
    status: str

    @classmethod
    def compare(cls, check_id: str, anchor: str, residual: float, tolerance: float) -> "CheckEntry":
        residual = float(residual)
        ok = residual == residual and residual <= tolerance  # NaN fails
        return cls(check_id, anchor, residual, float(tolerance), PASS if ok else FAIL)

    @property
    def passed(self) -> bool:
        return self.status == PASS

    def row(self) -> dict[str, str]:
        return {
            "check_id": self.check_id,
            "anchor": self.anchor,
            "residual": _fmt(self.residual),
            "tolerance": _fmt(self.tolerance),
            "status": self.status,
        }


@dataclass
class VerificationReport:
    suite: str
    entries: list[CheckEntry] = field(default_factory=list)
    metadata: dict[str, Any] = field(default_factory=dict)
    wall_time: float | None = None

    def add(self, check_id: str, anchor: str, residual: float, tolerance: float) -> CheckEntry:
        entry = CheckEntry.compare(check_id, anchor, residual, tolerance)
        self.entries.append(entry)
        return entry

    def extend(self, other: "VerificationReport") -> "VerificationReport":
        self.entries.extend(other.entries)
        for k, v in other.metadata.items():
            self.metadata.setdefault(k, v)
        return self

    @property
    def passed(self) -> bool:
        return all(e.passed for e in self.entries)

    @property
    def status(self) -> str:
        return PASS if self.passed else FAIL

    def failures(self) -> list[CheckEntry]:
        return [e for e in self.entries if not e.passed]

    def max_residual(self, prefix: str = "") -> float:
        vals = [e.residual for e in self.entries if e.check_id.startswith(prefix)]
        return max(vals, default=0.0)

    # serialization -----------------------------------------------------------
    def body(self) -> dict[str, Any]:
        return {
            "suite": self.suite,
            "status": self.status,
            "metadata": {k: self.metadata[k] for k in sorted(self.metadata)},
            "entries": [e.row() for e in self.entries],
        }

    def checksum(self) -> str:
        text = json.dumps(self.body(), sort_keys=True, separators=(",", ":"))
        return hashlib.sha256(text.encode()).hexdigest()

    def to_json(self, include_timing: bool = False) -> str:
        doc: dict[str, Any] = {"body": self.body(), "checksum": self.checksum()}
        if include_timing and self.wall_time is not None:
            doc["timing"] = {"wall_time_s": round(self.wall_time, 3)}
        return json.dumps(doc, indent=2, sort_keys=True) + "\n"

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_FIELDS, lineterminator="\n")
        writer.writeheader()
        for e in self.entries:
            writer.writerow(e.row())
        return buf.getvalue()

    def serialize(self, fmt: str = "json", include_timing: bool = False) -> str:
        if fmt == "json":
            return self.to_json(include_timing)
        if fmt == "csv":
            return self.to_csv()
        raise ValueError(f"unknown report format {fmt!r}")

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        doc = json.loads(text)
        body = doc["body"]
        rep = cls(body["suite"], metadata=dict(body.get("metadata", {})))
        for row in body["entries"]:
            rep.entries.append(
                CheckEntry(row["check_id"], row["anchor"], float(row["residual"]), float(row["tolerance"]),
                           row["status"])
            )
        timing = doc.get("timing")
        if timing:
            rep.wall_time = timing.get("wall_time_s")
        return rep

    @classmethod
    def from_csv(cls, text: str, suite: str = "csv") -> "VerificationReport":
        rep = cls(suite)
        for row in csv.DictReader(io.StringIO(text)):
            rep.entries.append(
                CheckEntry(row["check_id"], row["anchor"], float(row["residual"]), float(row["tolerance"]),
                           row["status"])
            )
        return rep

    def table(self) -> str:
        rows = [e.row() for e in self.entries]
        widths = {f: max([len(f)] + [len(r[f]) for r in rows]) for f in CSV_FIELDS}
        lines = ["  ".join(f.ljust(widths[f]) for f in CSV_FIELDS)]
        for r in rows:
            lines.append("  ".join(r[f].ljust(widths[f]) for f in CSV_FIELDS))
        lines.append(f"overall: {self.status} ({len(self.entries)} checks, {len(self.failures())} failed)")
        return "\n".join(lines)


def merge(suite: str, reports: Iterable[VerificationReport]) -> VerificationReport:
    out = VerificationReport(suite)
    for r in reports:
        out.extend(r)
    return out
