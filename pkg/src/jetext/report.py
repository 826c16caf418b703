"""Verification report record and its line-oriented file format."""

from __future__ import annotations

from dataclasses import dataclass, field
from pathlib import Path

__all__ = ["VerificationReport", "format_reports", "write_reports", "DEFAULT_GROWTH_LIMIT"]

DEFAULT_GROWTH_LIMIT = 0.25  # max fractional growth of C per refinement step


def _fmt(v) -> str:
    if isinstance(v, bool):
        return "true" if v else "false"
    if isinstance(v, float):
        return "%.17g" % v
    if isinstance(v, (tuple, list)):
        return "(" + ",".join(_fmt(x) for x in v) + ")"
    return str(v)


@dataclass
class VerificationReport:
    """One named check: sampled sup-ratio (the empirical constant C), the
    argmax witness, and the refinement series backing the pass decision.

    ``passed`` can only be true when the refinement series has at least
    two entries; a single-scale measurement never certifies a bound.
    """

    name: str
    parameters: dict = field(default_factory=dict)
    samples: int = 0
    sup_ratio: float = 0.0
    witness: str = ""
    refinement: list = field(default_factory=list)  # (label, C) pairs
    passed: bool = False
    criterion: str = ""

    def __post_init__(self):
        if self.passed and len(self.refinement) < 2:
            raise ValueError("pass requires a refinement series of length >= 2")
        if self.sup_ratio < 0:
            raise ValueError("sup-ratio must be >= 0")

    def lines(self) -> list[str]:
        out = [f"check={self.name}"]
        for key in sorted(self.parameters):
            out.append(f"param.{key}={_fmt(self.parameters[key])}")
        out.append(f"samples={self.samples}")
        out.append(f"C={_fmt(float(self.sup_ratio))}")
        out.append(f"witness={self.witness}")
        series = ",".join(f"{label}:{_fmt(float(c))}" for label, c in self.refinement)
        out.append(f"refinement={series}")
        out.append(f"pass={_fmt(self.passed)}")
        out.append(f"criterion={self.criterion}")
        return out


def stability_pass(series: list, growth_limit: float = DEFAULT_GROWTH_LIMIT) -> bool:
    """Refinement stability: C may grow by at most ``growth_limit`` per step.

    Vacuously false for fewer than two entries.
    """
    if len(series) < 2:
        return False
    values = [c for _, c in series]
    for prev, nxt in zip(values, values[1:]):
        if prev == 0.0:
            if nxt > 1e-9:
                return False
            continue
        if nxt > prev * (1.0 + growth_limit):
            return False
    return True


def format_reports(reports, header: list[str] | None = None) -> str:
    blocks = []
    if header:
        blocks.append("\n".join(f"# {h}" for h in header))
    for rep in reports:
        blocks.append("\n".join(rep.lines()))
    return "\n\n".join(blocks) + "\n"


def write_reports(reports, path, header: list[str] | None = None) -> None:
    Path(path).write_text(format_reports(reports, header))
