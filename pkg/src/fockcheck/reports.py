"""Check records and their JSON / CSV / table serializations."""
from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import asdict, dataclass, field
from typing import Any, Iterable, Sequence

VERDICTS = ("pass", "fail", "flagged")
MODES = ("abs", "rel", "ge")


@dataclass
class CheckReport:
    """One evaluated check.

    ``abs_error`` is the largest disagreement among the closed-form value,
    the numeric value and the reference (whichever are present), so a check
    only passes when both route agreement and reference agreement hold.  In
    ``mode="ge"`` the reference is a lower bound and ``abs_error`` is the
    amount by which it is violated (0 when satisfied), combined with route
    disagreement.
    """

    check_id: str
    paper_anchor: str
    params: dict[str, Any]
    value_closed_form: complex | float | None
    value_numeric: complex | float | None
    reference: complex | float | None
    abs_error: float
    rel_error: float
    verdict: str
    tolerance: float
    mode: str = "abs"
    convergence: list[tuple[int, float]] = field(default_factory=list)
    wall_time: float = 0.0
    info: dict[str, Any] = field(default_factory=dict)

    def __post_init__(self):
        if self.verdict not in VERDICTS:
            raise ValueError(f"bad verdict {self.verdict!r}")
        cut = [c for c, _ in self.convergence]
        if any(b <= a for a, b in zip(cut, cut[1:])):
            raise ValueError("convergence cutoffs must be strictly increasing")


def _mag(v) -> float:
    # abs() of a huge complex raises OverflowError; hypot saturates to inf
    if isinstance(v, complex):
        return math.hypot(v.real, v.imag)
    return abs(v)


def _errors(closed, numeric, reference, mode: str) -> tuple[float, float]:
    vals = [v for v in (closed, numeric) if v is not None]
    diffs = []
    if len(vals) == 2:
        diffs.append(_mag(vals[0] - vals[1]))
    if reference is not None:
        for v in vals:
            if mode == "ge":
                diffs.append(max(float(reference) - (v.real if isinstance(v, complex) else v), 0.0))
            else:
                diffs.append(_mag(v - reference))
        scale = _mag(reference)
    else:
        scale = max((_mag(v) for v in vals), default=0.0)
    err = max(diffs, default=0.0)
    if any(math.isnan(d) for d in diffs):
        err = math.inf
    if math.isinf(err):
        rel = math.inf
    else:
        rel = err / scale if scale > 0 else (0.0 if err == 0 else math.inf)
    return float(err), float(rel)


def make_report(
    check_id: str,
    anchor: str,
    params: dict[str, Any],
    *,
    closed=None,
    numeric=None,
    reference=None,
    tol: float,
    mode: str = "abs",
    info: dict[str, Any] | None = None,
    convergence: list[tuple[int, float]] | None = None,
    flagged: bool = False,
    wall_time: float = 0.0,
) -> CheckReport:
    if mode not in MODES:
        raise ValueError(f"mode must be one of {MODES}")
    if not tol > 0:
        raise ValueError("tolerance must be positive")
    closed = _plain(closed)
    numeric = _plain(numeric)
    reference = _plain(reference)
    err, rel = _errors(closed, numeric, reference, mode)
    measured = rel if mode == "rel" else err
    if flagged:
        verdict = "flagged"
    else:
        verdict = "pass" if measured <= tol else "fail"
    return CheckReport(
        check_id=check_id,
        paper_anchor=anchor,
        params=dict(params),
        value_closed_form=closed,
        value_numeric=numeric,
        reference=reference,
        abs_error=err,
        rel_error=rel,
        verdict=verdict,
        tolerance=tol,
        mode=mode,
        convergence=list(convergence or []),
        wall_time=wall_time,
        info=dict(info or {}),
    )


def _plain(v):
    """Numpy scalars to Python scalars; complex with zero imaginary part stays complex."""
    if v is None:
        return None
    if isinstance(v, complex) or getattr(getattr(v, "dtype", None), "kind", "") == "c":
        return complex(v)
    return float(v)


# -- serialization -----------------------------------------------------------

def encode_value(v: Any) -> Any:
    """JSON-safe form.  Complex numbers become ``{"re": .., "im": ..}``; floats keep repr precision."""
    if isinstance(v, complex):
        return {"re": encode_value(v.real), "im": encode_value(v.imag)}
    if isinstance(v, float):
        if math.isnan(v):
            return "nan"
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return v
    if isinstance(v, dict):
        return {str(k): encode_value(x) for k, x in v.items()}
    if isinstance(v, (list, tuple)):
        return [encode_value(x) for x in v]
    if hasattr(v, "item"):
        return encode_value(v.item())
    return v


def decode_value(v: Any) -> Any:
    if isinstance(v, dict):
        if set(v) == {"re", "im"}:
            return complex(decode_value(v["re"]), decode_value(v["im"]))
        return {k: decode_value(x) for k, x in v.items()}
    if isinstance(v, list):
        return [decode_value(x) for x in v]
    if v in ("nan", "inf", "-inf"):
        return float(v)
    return v


def report_to_dict(r: CheckReport) -> dict[str, Any]:
    d = asdict(r)
    d["convergence"] = [[c, v] for c, v in r.convergence]
    return encode_value(d)


def report_from_dict(d: dict[str, Any]) -> CheckReport:
    d = decode_value(dict(d))
    d["convergence"] = [(int(c), v) for c, v in d.get("convergence", [])]
    return CheckReport(**d)


def reports_to_json(reports: Iterable[CheckReport], *, indent: int | None = 1) -> str:
    return json.dumps([report_to_dict(r) for r in reports], indent=indent)


def reports_from_json(text: str) -> list[CheckReport]:
    return [report_from_dict(d) for d in json.loads(text)]


CSV_FIELDS = (
    "check_id",
    "paper_anchor",
    "verdict",
    "mode",
    "tolerance",
    "abs_error",
    "rel_error",
    "value_closed_form",
    "value_numeric",
    "reference",
    "wall_time",
)


def _csv_cell(v: Any) -> str:
    if v is None:
        return ""
    if isinstance(v, complex):
        return f"{v.real:.17g}{v.imag:+.17g}j"
    if isinstance(v, float):
        return f"{v:.17g}"
    return str(v)


def reports_to_csv(reports: Sequence[CheckReport]) -> str:
    param_keys: list[str] = []
    for r in reports:
        for k in r.params:
            if k not in param_keys:
                param_keys.append(k)
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(list(CSV_FIELDS) + [f"param.{k}" for k in param_keys])
    for r in reports:
        row = [_csv_cell(getattr(r, f)) for f in CSV_FIELDS]
        row += [_csv_cell(r.params.get(k)) for k in param_keys]
        w.writerow(row)
    return buf.getvalue()


def reports_to_table(reports: Sequence[CheckReport]) -> str:
    lines = []
    width = max((len(r.check_id) for r in reports), default=8)
    for r in reports:
        ps = " ".join(f"{k}={_short(v)}" for k, v in r.params.items())
        lines.append(
            f"{r.verdict.upper():7s} {r.check_id:<{width}s} err={r.abs_error:.2e} "
            f"tol={r.tolerance:.0e}  {ps}"
        )
    counts = summarize(reports)
    lines.append(
        f"-- {len(reports)} checks: {counts['pass']} pass, {counts['fail']} fail, "
        f"{counts['flagged']} flagged"
    )
    return "\n".join(lines)


def _short(v: Any) -> str:
    if isinstance(v, complex):
        return f"{v.real:.4g}{v.imag:+.4g}j"
    if isinstance(v, float):
        return f"{v:.4g}"
    return str(v)


def summarize(reports: Iterable[CheckReport]) -> dict[str, int]:
    counts = {k: 0 for k in VERDICTS}
    for r in reports:
        counts[r.verdict] += 1
    return counts


def emit_report(reports: Sequence[CheckReport], fmt: str = "json", stream=None) -> str:
    """Serialize ``reports``; write to ``stream`` when given and return the text."""
    if fmt == "json":
        text = reports_to_json(reports)
    elif fmt == "csv":
        text = reports_to_csv(reports)
    elif fmt == "table":
        text = reports_to_table(reports)
    else:
        raise ValueError(f"unknown format {fmt!r}")
    if stream is not None:
        stream.write(text)
        if not text.endswith("\n"):
            stream.write("\n")
    return text
