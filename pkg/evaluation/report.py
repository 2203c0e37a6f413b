"""
Evaluation Reports
Per-pair records with their aggregates, JSON persistence and console tables.
"""

import math
from pathlib import Path
from typing import List, NamedTuple, Optional, Sequence, Union

from pydantic import BaseModel, model_validator
from rich.table import Table


class PairRecord(BaseModel):
    """Metrics of one (source, target) pair; `error` is set when the pair failed."""
    pair_id: str
    source_id: str = ""
    target_id: str = ""
    nmse_percent: Optional[float] = None
    csim: Optional[float] = None
    error: Optional[str] = None

    @property
    def ok(self) -> bool:
        return self.error is None


def _mean(values: Sequence[float]) -> Optional[float]:
    return sum(values) / len(values) if values else None


class EvalReport(BaseModel):
    """Records in pair order plus mean NMSE, mean CSIM and corpus FID."""
    scenario: str
    records: List[PairRecord]
    mean_nmse: Optional[float] = None
    mean_csim: Optional[float] = None
    fid: Optional[float] = None
    sample_count: int = 0

    @classmethod
    def from_records(cls, scenario: str, records: Sequence[PairRecord], fid: Optional[float] = None) -> "EvalReport":
        ok = [r for r in records if r.ok]
        return cls(
            scenario=scenario,
            records=list(records),
            mean_nmse=_mean([r.nmse_percent for r in ok]),
            mean_csim=_mean([r.csim for r in ok]),
            fid=fid,
            sample_count=len(ok),
        )

    @model_validator(mode="after")
    def _aggregates_match_records(self) -> "EvalReport":
        ok = [r for r in self.records if r.ok]
        if self.sample_count != len(ok):
            raise ValueError(f"sample_count {self.sample_count} != {len(ok)} successful records")
        if self.fid is not None and len(ok) < 2:
            raise ValueError("fid needs at least two successful pairs")
        for name, stored, values in (
            ("mean_nmse", self.mean_nmse, [r.nmse_percent for r in ok]),
            ("mean_csim", self.mean_csim, [r.csim for r in ok]),
        ):
            expected = _mean(values)
            if (stored is None) != (expected is None) or (
                expected is not None and not math.isclose(stored, expected, rel_tol=1e-9, abs_tol=1e-12)
            ):
                raise ValueError(f"{name} {stored} does not match the records ({expected})")
        return self

    @property
    def failures(self) -> int:
        return len(self.records) - self.sample_count

    def save(self, path: Union[str, Path]) -> Path:
        path = Path(path)
        path.parent.mkdir(parents=True, exist_ok=True)
        path.write_text(self.model_dump_json(indent=2) + "\n", encoding="utf-8")
        return path

    @classmethod
    def load(cls, path: Union[str, Path]) -> "EvalReport":
        return cls.model_validate_json(Path(path).read_text(encoding="utf-8"))


class ReferenceResult(NamedTuple):
    label: str
    fid: float
    nmse_percent: float
    csim: float


# Published many-to-many numbers; they depend on the full expression dataset
# and pretrained extractors and are shown for orientation only.
REFERENCE_RESULTS = {
    "encoder ablation": [
        ReferenceResult("siamese encoders", 45.01, 4.19, 0.45),
        ReferenceResult("separate encoders", 29.97, 5.04, 0.85),
    ],
    "vs pix2pixHD": [
        ReferenceResult("pix2pixHD", 63.43, 6.83, 0.24),
        ReferenceResult("ours (separate encoders)", 29.97, 5.04, 0.85),
    ],
    "vs Face2Face": [
        ReferenceResult("face2face", 30.77, 8.64, 0.69),
        ReferenceResult("ours", 19.36, 7.13, 0.84),
    ],
}


def _fmt(value: Optional[float], pattern: str) -> str:
    return "-" if value is None else pattern.format(value)


def render_table(report: EvalReport, title: Optional[str] = None) -> Table:
    """FID / NMSE / CSIM table with the direction of improvement in the headers."""
    table = Table(title=title or f"Evaluation ({report.scenario})")
    table.add_column("", style="cyan")
    table.add_column("FID ↓", justify="right")
    table.add_column("NMSE ↓", justify="right")
    table.add_column("CSIM ↑", justify="right")
    table.add_column("Pairs", justify="right")
    table.add_row(
        report.scenario,
        _fmt(report.fid, "{:.2f}"),
        _fmt(report.mean_nmse, "{:.2f}%"),
        _fmt(report.mean_csim, "{:.2f}"),
        f"{report.sample_count}/{len(report.records)}",
    )
    return table


def reference_table() -> Table:
    table = Table(title="Published reference results (many-to-many, not reproducible here)")
    table.add_column("Comparison", style="cyan")
    table.add_column("Model")
    table.add_column("FID ↓", justify="right")
    table.add_column("NMSE ↓", justify="right")
    table.add_column("CSIM ↑", justify="right")
    for comparison, rows in REFERENCE_RESULTS.items():
        for row in rows:
            table.add_row(comparison, row.label, f"{row.fid:.2f}", f"{row.nmse_percent:.2f}%", f"{row.csim:.2f}")
    return table
