"""CSV / JSON / SVG emission for sweep reports.

Floats are written with ``repr`` so identical runs give byte-identical files.
Wall-clock time is left out of CSV and JSON unless requested, and then goes to
``timing.json`` only, so reports stay reproducible.
"""
from __future__ import annotations

import csv
import json
from pathlib import Path

from .sweeps import SweepReport, row_dict

CSV_COLUMNS = ["eps", "sup_rel_energy", "kinetic_part", "potential_part", "ess_part",
               "res_part", "defect_D", "wall_time_s", "steps"]
ILL_EXTRA = ["corrected_sup_rel_energy", "corrected_kinetic_part", "corrected_potential_part"]


class ReportError(OSError):
    pass


def _fmt(x):
    if x is None:
        return ""
    if isinstance(x, (int,)) and not isinstance(x, bool):
        return str(x)
    return repr(float(x))


def emit_report(report: SweepReport, out_dir, formats=("csv", "json", "svg"),
                stem: str = "sweep", wall_time: bool = False) -> dict[str, Path]:
    out_dir = Path(out_dir)
    try:
        out_dir.mkdir(parents=True, exist_ok=True)
    except OSError as err:
        raise ReportError(f"cannot create output directory {out_dir}: {err}") from err
    columns = CSV_COLUMNS + (ILL_EXTRA if report.kind == "ill-prepared" else [])
    written = {}
    try:
        if "csv" in formats:
            path = out_dir / f"{stem}.csv"
            with open(path, "w", newline="") as fh:
                w = csv.writer(fh, lineterminator="\n")
                w.writerow(columns)
                for r in report.rows:
                    vals = []
                    for c in columns:
                        v = getattr(r, c)
                        if c == "wall_time_s" and not wall_time:
                            v = None
                        vals.append(_fmt(v))
                    w.writerow(vals)
            written["csv"] = path
        if "json" in formats:
            path = out_dir / f"{stem}.json"
            doc = {"kind": report.kind, "fitted_slope": report.slope,
                   "corrected_fitted_slope": report.corrected_slope,
                   "rows": [row_dict(r, wall_time) for r in report.rows],
                   "config": report.config}
            path.write_text(json.dumps(doc, indent=2, sort_keys=True, allow_nan=True))
            written["json"] = path
            if wall_time:
                tpath = out_dir / f"{stem}.timing.json"
                tpath.write_text(json.dumps({repr(r.eps): r.wall_time_s for r in report.rows},
                                            indent=2, sort_keys=True))
                written["timing"] = tpath
        if "svg" in formats:
            from ..plotting import loglog_svg

            series = [(report.column("eps"), report.column("sup_rel_energy"),
                       "sup relative energy", "o-")]
            if report.kind == "ill-prepared":
                series.append((report.column("eps"), report.column("corrected_sup_rel_energy"),
                               "acoustically corrected", "s--"))
            written["svg"] = loglog_svg(out_dir / f"{stem}.svg", series, xlabel="eps",
                                        ylabel="sup_t relative energy",
                                        title=f"{report.kind} sweep, slope {report.slope:.3g}")
    except OSError as err:
        raise ReportError(f"writing report under {out_dir} failed: {err}") from err
    return written
