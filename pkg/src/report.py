"""
Result rows and their persistent forms: CSV (round-trip exact), JSON and a
human-readable text report.
"""

import json
import logging
import math
from dataclasses import asdict, dataclass, fields

import pandas as pd

logger = logging.getLogger(__name__)

CSV_SCHEMA_VERSION = 1

_TEXT_COLUMNS = ("suite", "case", "sizes", "error", "note")


@dataclass
class ResultRow:
    suite: str
    case: str
    q: int = 0
    m: int = 0
    k: int = 0
    n: int = 0
    sizes: str = ""
    seed: int = -1
    value_re: float = 0.0
    value_im: float = 0.0
    measured: float = 0.0
    bound: float = 0.0
    passed: bool = True
    wall_time: float = 0.0
    error: str = ""
    note: str = ""
    schema_version: int = CSV_SCHEMA_VERSION

    def __post_init__(self):
        # numpy scalars would leak into JSON output
        for name in ("q", "m", "k", "n", "seed", "schema_version"):
            setattr(self, name, int(getattr(self, name)))
        for name in ("value_re", "value_im", "measured", "bound", "wall_time"):
            setattr(self, name, float(getattr(self, name)))
        self.passed = bool(self.passed)

    @property
    def value(self) -> complex:
        return complex(self.value_re, self.value_im)

    @property
    def ratio(self) -> float:
        if self.bound > 0 and math.isfinite(self.bound):
            return self.measured / self.bound
        return 0.0


COLUMNS = [f.name for f in fields(ResultRow)]


def sizes_label(sizes) -> str:
    return ";".join(str(int(s)) for s in sizes)


def format_complex(z: complex, digits: int = 12) -> str:
    """Compact a+bi form, e.g. -1-2i."""
    scale = max(abs(z), 1.0)
    re = 0.0 if abs(z.real) < 1e-12 * scale else z.real
    im = 0.0 if abs(z.imag) < 1e-12 * scale else z.imag
    if im == 0:
        return f"{re:.{digits}g}"
    im_part = "i" if abs(im) == 1 else f"{abs(im):.{digits}g}i"
    if re == 0:
        return ("-" if im < 0 else "") + im_part
    return f"{re:.{digits}g}{'-' if im < 0 else '+'}{im_part}"


def sort_rows(rows: list) -> list:
    """Deterministic order: by suite, q and seed, keeping emission order within ties."""
    return sorted(rows, key=lambda r: (r.suite, r.q, r.seed))


def rows_to_frame(rows: list) -> pd.DataFrame:
    return pd.DataFrame([asdict(r) for r in rows], columns=COLUMNS)


def save_csv(rows: list, filename: str):
    """Write rows to CSV with 17 significant digits, exact for doubles."""
    rows_to_frame(rows).to_csv(filename, index=False, float_format="%.17g")
    logger.info("Results saved to %s (%d rows)", filename, len(rows))


def load_csv(filename: str) -> list:
    frame = pd.read_csv(
        filename,
        float_precision="round_trip",
        dtype={c: str for c in _TEXT_COLUMNS},
        keep_default_na=False,
    )
    missing = set(COLUMNS) - set(frame.columns)
    if missing:
        raise ValueError(f"{filename}: missing columns {sorted(missing)}")
    rows = []
    for record in frame.to_dict(orient="records"):
        rows.append(ResultRow(
            suite=record["suite"],
            case=record["case"],
            q=int(record["q"]),
            m=int(record["m"]),
            k=int(record["k"]),
            n=int(record["n"]),
            sizes=record["sizes"],
            seed=int(record["seed"]),
            value_re=float(record["value_re"]),
            value_im=float(record["value_im"]),
            measured=float(record["measured"]),
            bound=float(record["bound"]),
            passed=bool(record["passed"]),
            wall_time=float(record["wall_time"]),
            error=record["error"],
            note=record["note"],
            schema_version=int(record["schema_version"]),
        ))
    return rows


def summarize(rows: list) -> dict:
    """Per-suite counts of rows, failures and errors, plus the worst measured/bound ratio."""
    suites = {}
    for r in rows:
        s = suites.setdefault(r.suite, {"rows": 0, "failed": 0, "errors": 0, "worst_ratio": 0.0})
        s["rows"] += 1
        s["failed"] += 0 if r.passed else 1
        s["errors"] += 1 if r.error else 0
        s["worst_ratio"] = max(s["worst_ratio"], r.ratio)
    return {
        "total": len(rows),
        "passed": sum(1 for r in rows if r.passed),
        "failed": sum(1 for r in rows if not r.passed),
        "errors": sum(1 for r in rows if r.error),
        "suites": suites,
    }


def format_text_output(rows: list, title: str = "VERIFICATION REPORT", show_details: bool = False) -> str:
    """Format result rows as human-readable text."""
    summary = summarize(rows)
    lines = []
    lines.append("=" * 70)
    lines.append(title)
    lines.append("=" * 70)

    lines.append(f"\nSummary: {summary['total']} rows")
    lines.append(f"  Passed: {summary['passed']}")
    lines.append(f"  Failed: {summary['failed']}")
    if summary["errors"] > 0:
        lines.append(f"  Errors: {summary['errors']}")
    lines.append("")

    lines.append(f"{'Suite':<14} {'Rows':>7} {'Failed':>7} {'Errors':>7} {'Worst ratio':>12}")
    lines.append("-" * 70)
    for name, s in sorted(summary["suites"].items()):
        lines.append(f"{name:<14} {s['rows']:>7} {s['failed']:>7} {s['errors']:>7} {s['worst_ratio']:>12.4g}")
    lines.append("")

    for r in rows:
        if r.passed and not show_details:
            continue
        marker = "[ERROR]" if r.error else ("[PASS]" if r.passed else "[FAIL]")
        lines.append(
            f"{marker} {r.suite}/{r.case} q={r.q} m={r.m} k={r.k} n={r.n} "
            f"sizes={r.sizes or '-'} seed={r.seed} - measured {r.measured:.6g} vs bound {r.bound:.6g}"
        )
        if r.error:
            lines.append(f"    error: {r.error}")
        if r.note:
            lines.append(f"    {r.note}")

    return "\n".join(lines)


def format_json_output(rows: list) -> str:
    """Format result rows and their summary as JSON."""
    return json.dumps({"summary": summarize(rows), "rows": [asdict(r) for r in rows]}, indent=2)
