"""Storage functions and the integrated passivity check over simulation logs."""
from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .errors import MissingChannel
from .geometry import potential_energy  # noqa: F401  (re-exported)

AUDIT_COLUMNS = ("t", "storage", "Vb0", "Fe0")


@dataclass(frozen=True)
class EnergyRecord:
    t: float
    kinetic: float
    potential: float
    tank_f: float
    tank_i: float
    port_power: float
    port_energy: float

    @property
    def storage(self):
        return total_storage(self.kinetic, self.potential, self.tank_f, self.tank_i)


def kinetic_energy(eV, Mt):
    eV = np.asarray(eV, dtype=float)
    return 0.5 * float(eV @ Mt @ eV)


def total_storage(kinetic, potential, tank_f, tank_i):
    """Kinetic plus elastic error energy plus both tank levels."""
    return kinetic + potential + tank_f + tank_i


def cumulative_trapezoid(t, y):
    out = np.zeros_like(np.asarray(y, dtype=float))
    if len(out) > 1:
        out[1:] = np.cumsum(0.5 * (y[1:] + y[:-1]) * np.diff(t))
    return out


@dataclass(frozen=True)
class AuditReport:
    passed: bool
    tol: float
    worst_margin: float
    worst_time: float
    first_violation_time: float | None
    steps: int
    channel: str = "true contact wrench"
    margins: np.ndarray | None = None

    def text(self):
        lines = [f"passivity audit ({self.channel})",
                 f"  result: {'PASS' if self.passed else 'FAIL'}",
                 f"  steps checked: {self.steps}",
                 f"  tolerance: {self.tol:.6g} J",
                 f"  worst margin: {self.worst_margin:.6g} J at t = {self.worst_time:.6g} s"]
        if self.first_violation_time is not None:
            lines.append(f"  first violation: t = {self.first_violation_time:.6g} s")
        return "\n".join(lines)


def _col(log, name):
    if name not in log.columns:
        raise MissingChannel(f"log has no column {name!r}")
    return log.column(name)


def port_power(log, wrench="Fe"):
    V = np.stack([_col(log, f"Vb{i}") for i in range(6)], axis=1)
    F = np.stack([_col(log, f"{wrench}{i}") for i in range(6)], axis=1)
    return np.einsum("ij,ij->i", V, F)


def passivity_audit(log, tol=None, wrench="Fe"):
    """Check ``S_tot(t_k) - S_tot(0) <= int_0^t_k Vb.F dt + tol`` at every row.

    ``tol`` defaults to ``1e-3 * max(1, |S_tot(0)|)``. ``wrench`` selects the
    channel: ``Fe`` (true contact wrench) or ``Febar`` (sensor output).
    """
    t = _col(log, "t")
    S = _col(log, "storage")
    power = port_power(log, wrench)
    if len(t) == 0:
        return AuditReport(True, 0.0 if tol is None else tol, 0.0, 0.0, None, 0,
                           margins=np.zeros(0))
    if tol is None:
        tol = 1e-3 * max(1.0, abs(S[0]))
    supplied = cumulative_trapezoid(t, power)
    margin = supplied + tol - (S - S[0])
    bad = np.flatnonzero(margin < 0)
    k = int(np.argmin(margin))
    first = float(t[bad[0]]) if len(bad) else None
    channel = "true contact wrench" if wrench == "Fe" else "filtered sensor wrench"
    return AuditReport(len(bad) == 0, float(tol), float(margin[k]), float(t[k]), first,
                       len(t), channel, margin)


def cap_term_violations(log, eps=1e-9):
    """Rows where any of the three logged non-positive storage-rate terms is positive."""
    cols = [_col(log, c) for c in ("cap_f", "cap_d", "cap_i")]
    bad = np.zeros(len(cols[0]), dtype=bool)
    for c in cols:
        bad |= np.nan_to_num(c, nan=0.0) > eps
    return np.flatnonzero(bad)


def write_margin_csv(report: AuditReport, t, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("t,margin\n")
        for ti, m in zip(t, report.margins):
            fh.write(f"{ti:.17g},{m:.17g}\n")


def write_report(reports, path):
    with open(path, "w", encoding="utf-8") as fh:
        fh.write("\n\n".join(r.text() for r in reports) + "\n")
