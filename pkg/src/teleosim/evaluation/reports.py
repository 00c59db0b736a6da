"""Deterministic report emission: a human-readable text table and a
CSV-delimited form that round-trips field-exact. Every file carries the run
config fingerprint; merging refuses mismatched fingerprints."""

from __future__ import annotations

import csv
import io
from pathlib import Path

from .metrics import MetricsReport

REPORT_COLUMNS = ("label",) + MetricsReport.FIELDS


class ReportError(ValueError):
    pass


def _rows(reports: list[tuple[str, MetricsReport]]) -> list[list[str]]:
    rows = []
    for label, rep in reports:
        rows.append([label] + [repr(getattr(rep, f)) for f in MetricsReport.FIELDS])
    return rows


def _common_fingerprint(reports: list[tuple[str, MetricsReport]]) -> str:
    prints = {rep.config_fingerprint for _, rep in reports}
    if len(prints) > 1:
        raise ReportError(
            f"refusing to merge reports with mismatched fingerprints: {sorted(prints)}"
        )
    return next(iter(prints)) if prints else ""


def emit_report(reports: list[tuple[str, MetricsReport]], path,
                fmt: str = "table") -> Path:
    """Write labelled reports to one file; returns the path written."""
    if fmt not in ("table", "delimited"):
        raise ValueError("fmt must be 'table' or 'delimited'")
    path = Path(path)
    path.parent.mkdir(parents=True, exist_ok=True)
    fingerprint = _common_fingerprint(reports)
    if fmt == "delimited":
        buf = io.StringIO()
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(["# fingerprint", fingerprint])
        writer.writerow(REPORT_COLUMNS)
        writer.writerows(_rows(reports))
        path.write_text(buf.getvalue())
        return path
    lines = [f"config fingerprint: {fingerprint or '(none)'}", ""]
    widths = [12, 8, 12, 12, 12, 10, 10]
    header = ["label", "SR%", "MPKPE mm", "R-MPKPE mm", "VEL mm/s", "HAND", "EPISODES"]
    lines.append("  ".join(h.ljust(w) for h, w in zip(header, widths)))
    for label, rep in reports:
        vals = [label, f"{rep.sr:.1f}", f"{rep.e_mpkpe:.2f}", f"{rep.e_r_mpkpe:.2f}",
                f"{rep.e_vel:.2f}", f"{rep.e_hand:.4f}", str(rep.n_episodes)]
        lines.append("  ".join(v.ljust(w) for v, w in zip(vals, widths)))
    path.write_text("\n".join(lines) + "\n")
    return path


def load_report(path) -> tuple[str, list[tuple[str, MetricsReport]]]:
    """Read a delimited report back; returns (fingerprint, labelled reports)."""
    text = Path(path).read_text()
    reader = csv.reader(io.StringIO(text))
    rows = list(reader)
    if len(rows) < 2 or rows[0][0] != "# fingerprint":
        raise ReportError("not a delimited report file")
    fingerprint = rows[0][1] if len(rows[0]) > 1 else ""
    if tuple(rows[1]) != REPORT_COLUMNS:
        raise ReportError(f"unexpected columns {rows[1]}")
    out = []
    for row in rows[2:]:
        if not row:
            continue
        label = row[0]
        vals = dict(zip(MetricsReport.FIELDS, row[1:]))
        rep = MetricsReport(
            sr=float(vals["sr"]), e_mpkpe=float(vals["e_mpkpe"]),
            e_r_mpkpe=float(vals["e_r_mpkpe"]), e_vel=float(vals["e_vel"]),
            e_hand=float(vals["e_hand"]), n_episodes=int(vals["n_episodes"]),
            config_fingerprint=fingerprint,
        )
        out.append((label, rep))
    return fingerprint, out
