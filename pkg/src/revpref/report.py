"""The full battery of rationality checks bundled into one report."""

from __future__ import annotations

from dataclasses import dataclass, field
from fractions import Fraction
from typing import Any

from . import __version__
from .afriat import AfriatSolution, solve_afriat
from .dataset import Dataset, ViolationWitness, check_garp
from .indices import CceiResult, MoneyPumpReport, VarianResult, ccei, money_pump, varian_index
from .instability import PhiSolution, is_rationalizing_certificate, solve_phi

SCHEMA_VERSION = 1


class InconsistentReport(RuntimeError):
    """GARP, Afriat feasibility and the instability program disagree."""


@dataclass(frozen=True)
class AnalysisReport:
    K: int
    n: int
    garp: bool
    garp_witness: ViolationWitness | None
    ccei: CceiResult
    varian: VarianResult
    money_pump: MoneyPumpReport
    afriat: AfriatSolution | None
    phi: PhiSolution
    phi_certificate: bool
    provenance: dict = field(default_factory=dict)

    @property
    def afriat_feasible(self) -> bool:
        return self.afriat is not None

    def check_consistency(self) -> None:
        tol = self.provenance.get("tol", 1e-9)
        phi_zero = self.phi.phi <= tol
        if not (self.garp == self.afriat_feasible == phi_zero):
            raise InconsistentReport(
                f"garp={self.garp}, afriat_feasible={self.afriat_feasible}, "
                f"phi={self.phi.phi:.3e} (tol {tol:g})"
            )

    def to_dict(self) -> dict[str, Any]:
        def num(v):
            return float(v)

        def exact(v):
            return str(v) if isinstance(v, Fraction) else repr(float(v))

        return {
            "schema_version": SCHEMA_VERSION,
            "dataset": {"K": self.K, "n": self.n},
            "garp": self.garp,
            "garp_witness": list(self.garp_witness.cycle) if self.garp_witness else None,
            "ccei": {
                "value": num(self.ccei.value),
                "exact": exact(self.ccei.value),
                "attained": self.ccei.attained,
                "witness": list(self.ccei.witness.cycle) if self.ccei.witness else None,
            },
            "varian": {
                "e": [num(v) for v in self.varian.e],
                "attained": list(self.varian.attained),
                "aggregate_min": num(self.varian.aggregate_min),
                "aggregate_ssq": num(self.varian.aggregate_ssq),
                "aggregator": self.varian.aggregator,
                "heuristic": self.varian.heuristic,
            },
            "money_pump": {
                "max_cycle_len": self.money_pump.max_cycle_len,
                "cycles": [{"cycle": list(c), "mpi": num(m)} for c, m in self.money_pump.cycles],
                "max_mpi": num(self.money_pump.max_mpi),
                "mean_mpi": num(self.money_pump.mean_mpi),
            },
            "afriat": {
                "feasible": self.afriat_feasible,
                "V": self.afriat.V.tolist() if self.afriat else None,
                "lambda": self.afriat.lam.tolist() if self.afriat else None,
            },
            "phi": {
                "value": self.phi.phi,
                "certificate": self.phi_certificate,
                **self.phi.metadata,
            },
            "provenance": dict(self.provenance),
        }


def analyze(
    d: Dataset,
    tol: float = 1e-9,
    norm: str = "l1",
    max_cycle_len: int | None = None,
    aggregator: str = "ssq",
    seed: int | None = None,
) -> AnalysisReport:
    """Run every index on ``d`` and check that the verdicts agree."""
    garp, witness = check_garp(d)
    phi = solve_phi(d, norm)
    report = AnalysisReport(
        K=d.K,
        n=d.n,
        garp=garp,
        garp_witness=witness,
        ccei=ccei(d),
        varian=varian_index(d, aggregator=aggregator),
        money_pump=money_pump(d, max_cycle_len),
        afriat=solve_afriat(d),
        phi=phi,
        phi_certificate=is_rationalizing_certificate(phi, d, tol),
        provenance={
            "tool": "revpref",
            "version": __version__,
            "tol": tol,
            "norm": norm,
            "lambda_floor": phi.lambda_floor,
            "seed": seed,
            "exact_arithmetic": d.exact,
        },
    )
    report.check_consistency()
    return report
