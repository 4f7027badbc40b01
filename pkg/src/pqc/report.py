"""Identity ledger entries shared by every verification routine."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any, Iterable

import numpy as np
from gmpy2 import mpq

__all__ = ["Check", "Ledger", "jsonable", "mismatch"]


def jsonable(value: Any) -> Any:
    """Convert rationals, numpy object arrays and tuples to JSON-ready values."""
    if isinstance(value, (Fraction, type(mpq()))):
        return str(value.numerator) if value.denominator == 1 else f"{value.numerator}/{value.denominator}"
    if isinstance(value, bool) or value is None or isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return int(value)
    if isinstance(value, np.ndarray):
        return [jsonable(v) for v in value.tolist()]
    if isinstance(value, dict):
        return {str(k): jsonable(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [jsonable(v) for v in value]
    return str(value)


@dataclass
class Check:
    """One verified identity instance family: passes or names a witness."""

    id: str
    anchor: str
    passed: bool
    witness: dict | None = None
    note: str = ""

    def to_dict(self) -> dict:
        out = {"id": self.id, "anchor": self.anchor, "status": "pass" if self.passed else "fail"}
        if self.witness is not None:
            out["witness"] = jsonable(self.witness)
        if self.note:
            out["note"] = self.note
        return out


@dataclass
class Ledger:
    suite: str
    checks: list[Check] = field(default_factory=list)

    def add(self, check: Check) -> Check:
        self.checks.append(check)
        return check

    def record(self, id: str, anchor: str, witness: dict | None, note: str = "") -> Check:
        """Add a check that passes iff ``witness`` is None."""
        return self.add(Check(id, anchor, witness is None, witness, note))

    def extend(self, checks: Iterable[Check]) -> None:
        self.checks.extend(checks)

    @property
    def passed(self) -> bool:
        return all(c.passed for c in self.checks)

    def failures(self) -> list[Check]:
        return [c for c in self.checks if not c.passed]

    def __getitem__(self, id: str) -> Check:
        for c in self.checks:
            if c.id == id:
                return c
        raise KeyError(id)

    def to_dict(self) -> dict:
        return {"suite": self.suite, "status": "pass" if self.passed else "fail", "entries": [c.to_dict() for c in self.checks]}


def mismatch(lhs, rhs, index_names: tuple[str, ...] | None = None) -> dict | None:
    """First index where two equally shaped arrays differ, or None."""
    a = np.asarray(lhs, dtype=object)
    b = np.asarray(rhs, dtype=object)
    if a.shape != b.shape:
        b = np.broadcast_to(b, a.shape)
    diff = np.nonzero(a != b)
    if len(diff) == 0 or len(diff[0]) == 0:
        if a.ndim == 0 and a != b:
            return {"lhs": a.item(), "rhs": b.item()}
        return None
    idx = tuple(int(d[0]) for d in diff)
    w: dict = {"index": [i + 1 for i in idx]}
    if index_names:
        w["at"] = [index_names[i] if i < len(index_names) else str(i + 1) for i in idx]
    w["lhs"] = a[idx]
    w["rhs"] = b[idx]
    return w
