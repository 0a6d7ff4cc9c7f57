"""Experiment reports: criteria, scalars and row tables of one suite run."""
from __future__ import annotations

from dataclasses import dataclass, field
from typing import Dict, List, Optional


@dataclass(frozen=True)
class Criterion:
    id: str
    description: str
    passed: bool
    value: Optional[float] = None

    def as_dict(self) -> Dict[str, object]:
        return {"id": self.id, "description": self.description, "passed": bool(self.passed), "value": self.value}


@dataclass
class ExperimentReport:
    suite: str
    config_hash: str = ""
    criteria: List[Criterion] = field(default_factory=list)
    scalars: Dict[str, float] = field(default_factory=dict)
    tables: Dict[str, List[Dict[str, object]]] = field(default_factory=dict)
    notes: List[str] = field(default_factory=list)

    def check(self, criterion_id: str, description: str, passed: bool, value: Optional[float] = None) -> bool:
        self.criteria.append(Criterion(criterion_id, description, bool(passed), None if value is None else float(value)))
        return bool(passed)

    def note(self, message: str) -> None:
        self.notes.append(message)

    @property
    def passed(self) -> bool:
        return all(criterion.passed for criterion in self.criteria)

    def failed(self) -> List[Criterion]:
        return [criterion for criterion in self.criteria if not criterion.passed]

    def to_summary(self) -> Dict[str, object]:
        return {
            "suite": self.suite,
            "config_hash": self.config_hash,
            "passed": self.passed,
            "criteria": [criterion.as_dict() for criterion in self.criteria],
            "scalars": dict(self.scalars),
            "tables": sorted(self.tables),
            "notes": list(self.notes),
        }


def fraction(count: int, total: int) -> float:
    """count / total, or nan for an empty total."""
    return count / total if total else float("nan")
