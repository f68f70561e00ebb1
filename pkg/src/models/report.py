"""Verification report model."""

from dataclasses import dataclass, field
from typing import Any, Dict, Optional


@dataclass
class Witness:
    """Worst case found by a check; enough to reproduce it."""

    word: str  # word label, "" for the empty word
    residual: float
    detail: Dict[str, Any] = field(default_factory=dict)

    def to_dict(self) -> Dict[str, Any]:
        return {"word": self.word, "residual": self.residual, "detail": self.detail}


@dataclass
class VerificationReport:
    """Outcome of one property check."""

    check: str
    parameters: Dict[str, Any] = field(default_factory=dict)
    status: str = "pass"  # "pass" or "fail"
    witness: Optional[Witness] = None
    details: Dict[str, Any] = field(default_factory=dict)
    sampled: bool = False  # evidence over a finite sample, not a proof
    runtime_s: Optional[float] = None  # only set when timing is enabled

    @property
    def passed(self) -> bool:
        return self.status == "pass"

    def fail(self, witness: Optional[Witness] = None) -> None:
        self.status = "fail"
        if witness is not None:
            self.witness = witness

    def to_dict(self) -> Dict[str, Any]:
        return {
            "check": self.check,
            "parameters": self.parameters,
            "status": self.status,
            "witness": self.witness.to_dict() if self.witness else None,
            "details": self.details,
            "sampled": self.sampled,
            "runtime_s": self.runtime_s,
        }
