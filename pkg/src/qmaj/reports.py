"""Report records produced by the verification routines."""

from __future__ import annotations

import hashlib
import json
from dataclasses import dataclass, field

import numpy as np

from . import __version__
from .majorization import MajorizationCheck


@dataclass(frozen=True)
class ConstraintReport:
    """Named majorization relations plus the vectors they were built from."""

    vectors: dict[str, np.ndarray]
    relations: dict[str, MajorizationCheck]

    @property
    def all_hold(self) -> bool:
        return all(r.holds for r in self.relations.values())

    @property
    def worst_slack(self) -> float:
        return min((r.worst_slack for r in self.relations.values()), default=0.0)

    def verdicts(self) -> dict[str, bool]:
        return {name: r.holds for name, r in self.relations.items()}

    def slacks(self) -> dict[str, float]:
        return {name: r.worst_slack for name, r in self.relations.items()}


def file_digest(path) -> str:
    h = hashlib.sha256()
    with open(path, "rb") as fh:
        for chunk in iter(lambda: fh.read(1 << 16), b""):
            h.update(chunk)
    return h.hexdigest()


@dataclass
class VerificationReport:
    """Document emitted by every CLI verification command.

    Every verdict must have a slack with the same name. ``details`` carries
    command-specific payload (partial-sum tables, constructed matrices) and
    takes no part in the verdict logic.
    """

    command: str
    inputs: dict[str, str] = field(default_factory=dict)
    verdicts: dict[str, bool] = field(default_factory=dict)
    slacks: dict[str, float] = field(default_factory=dict)
    residuals: dict[str, float] = field(default_factory=dict)
    details: dict = field(default_factory=dict)
    version: str = __version__

    def __post_init__(self):
        missing = set(self.verdicts) - set(self.slacks)
        if missing:
            raise ValueError(f"verdicts without slack entries: {sorted(missing)}")

    @property
    def passed(self) -> bool:
        return all(self.verdicts.values())

    def add_check(self, name: str, check: MajorizationCheck | ConstraintReport) -> None:
        if isinstance(check, ConstraintReport):
            for sub, rel in check.relations.items():
                self.add_check(f"{name}.{sub}" if name else sub, rel)
            return
        self.verdicts[name] = bool(check.holds)
        self.slacks[name] = float(check.worst_slack) + 0.0  # no "-0.0" in output
        self.details.setdefault("partial_sums", {})[name] = {
            "lhs": check.lhs.tolist(),
            "rhs": check.rhs.tolist(),
            "slacks": check.slacks.tolist(),
        }

    def to_dict(self) -> dict:
        return {
            "command": self.command,
            "inputs": dict(self.inputs),
            "verdicts": dict(self.verdicts),
            "slacks": dict(self.slacks),
            "residuals": dict(self.residuals),
            "details": self.details,
            "version": self.version,
        }

    def to_json(self, indent: int | None = 2) -> str:
        return json.dumps(self.to_dict(), indent=indent, sort_keys=True, allow_nan=False)

    @classmethod
    def from_json(cls, text: str) -> "VerificationReport":
        d = json.loads(text)
        return cls(
            command=d["command"],
            inputs=d.get("inputs", {}),
            verdicts=d.get("verdicts", {}),
            slacks=d.get("slacks", {}),
            residuals=d.get("residuals", {}),
            details=d.get("details", {}),
            version=d.get("version", __version__),
        )

    def to_text(self) -> str:
        lines = [f"{self.command}  (qmaj {self.version})"]
        for name, ok in self.verdicts.items():
            lines.append(f"  {'PASS' if ok else 'FAIL'}  {name:<40s} slack={self.slacks[name]: .3e}")
        for name, r in self.residuals.items():
            lines.append(f"  residual {name:<34s} {r:.3e}")
        for name, value in self.details.items():
            if isinstance(value, (str, int, float)):
                lines.append(f"  {name}: {value}")
            elif isinstance(value, dict) and value and all(isinstance(v, (int, float)) for v in value.values()):
                lines.append(f"  {name}: " + ", ".join(f"{k}={v}" for k, v in value.items()))
        return "\n".join(lines)


@dataclass(frozen=True)
class CertifiedFixture:
    """A worked instance where majorization checks pass but no realization exists.

    ``certified`` is true when every check holds and the search found no
    witness within ``tolerance`` (``min_residual`` is the best it achieved).
    """

    name: str
    rho: np.ndarray
    probabilities: np.ndarray
    targets: tuple
    checks: dict[str, MajorizationCheck]
    witness: object
    min_residual: float
    tolerance: float
    notes: dict = field(default_factory=dict)

    @property
    def certified(self) -> bool:
        return all(c.holds for c in self.checks.values()) and self.witness is None
