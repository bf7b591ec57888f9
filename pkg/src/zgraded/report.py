"""Verification reports: one residual per checked identity instance."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Iterable, Iterator

from .algebra import Element


@dataclass(frozen=True)
class Check:
    """A single identity instance with its residual."""

    identity: str  # which equation, e.g. "lie2/axiom-iii"
    subject: str  # which instance, e.g. "(q1,q2,q3)"
    residual: Element | None = None  # None means a boolean-only check
    ok: bool | None = None

    def passed(self) -> bool:
        if self.ok is not None:
            return self.ok
        return self.residual is None or self.residual.is_zero()

    def residual_str(self) -> str:
        return "0" if self.residual is None else str(self.residual)


class VerificationReport:
    """Ordered collection of checks; deterministic given the input data."""

    def __init__(self, title: str, checks: Iterable[Check] = ()):
        self.title = title
        self.checks: list[Check] = list(checks)

    def add(self, identity: str, subject: str, residual: Element) -> None:
        self.checks.append(Check(identity, subject, residual))

    def add_bool(self, identity: str, subject: str, ok: bool) -> None:
        self.checks.append(Check(identity, subject, None, ok))

    def extend(self, other: "VerificationReport") -> None:
        self.checks.extend(other.checks)

    @property
    def passed(self) -> bool:
        return all(c.passed() for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed()]

    def __iter__(self) -> Iterator[Check]:
        return iter(self.checks)

    def __len__(self) -> int:
        return len(self.checks)

    def to_dict(self) -> dict:
        return {
            "title": self.title,
            "passed": self.passed,
            "checks": [
                {
                    "identity": c.identity,
                    "subject": c.subject,
                    "residual": c.residual_str(),
                    "ok": c.passed(),
                }
                for c in self.checks
            ],
        }

    def summary(self) -> str:
        lines = [f"[{'PASS' if self.passed else 'FAIL'}] {self.title}"]
        for c in self.checks:
            mark = "ok  " if c.passed() else "FAIL"
            lines.append(f"  {mark} {c.identity} {c.subject}")
            if not c.passed():
                lines.append(f"       residual: {c.residual_str()}")
        return "\n".join(lines)

    def __repr__(self) -> str:
        status = "pass" if self.passed else "FAIL"
        return f"<VerificationReport {self.title!r}: {len(self.checks)} checks, {status}>"
