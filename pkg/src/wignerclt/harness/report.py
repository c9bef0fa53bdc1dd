"""Experiment reports: verdicts, JSON/CSV serialization and the SVG histogram."""

from __future__ import annotations

import csv
import io
import json
import math
from dataclasses import dataclass, field

import numpy as np

from ..stats import SampleSet, StreamingMoments

CSV_COLUMNS = [
    "experiment", "ensemble", "beta", "n", "y", "replicates", "seed",
    "mean", "var", "theory_mean", "theory_var", "ks_d", "ks_p",
    "slope", "slope_target", "verdict",
]
SCHEMA_VERSION = 1

_OPS = {
    "<=": lambda v, t: v <= t,
    ">=": lambda v, t: v >= t,
    "<": lambda v, t: v < t,
    ">": lambda v, t: v > t,
    "==": lambda v, t: v == t,
}


@dataclass
class Verdict:
    name: str
    value: float
    op: str
    threshold: float
    passed: bool = field(init=False)

    def __post_init__(self):
        self.passed = self.recompute()

    def recompute(self) -> bool:
        v = self.value
        if v is None or (isinstance(v, float) and math.isnan(v)):
            return False
        return bool(_OPS[self.op](v, self.threshold))

    def to_dict(self):
        return {"name": self.name, "value": self.value, "op": self.op,
                "threshold": self.threshold, "passed": self.passed}

    def __str__(self):
        mark = "PASS" if self.passed else "FAIL"
        return f"[{mark}] {self.name}: {self.value:.6g} {self.op} {self.threshold:.6g}"


@dataclass
class ExperimentReport:
    experiment: str
    config: dict
    rows: list = field(default_factory=list)  # one dict per n
    statistics: dict = field(default_factory=dict)
    verdicts: list = field(default_factory=list)
    z_scores: SampleSet | None = None
    notes: list = field(default_factory=list)
    # wall-clock data; kept out of the serialized report so that it stays
    # bit-identical across runs and worker counts
    timings: dict = field(default_factory=dict)

    @property
    def passed(self) -> bool | None:
        """None when the experiment makes no claim (e.g. contrast runs)."""
        if not self.verdicts:
            return None
        return all(v.passed for v in self.verdicts)

    def verdict(self, name: str) -> Verdict:
        for v in self.verdicts:
            if v.name == name:
                return v
        raise KeyError(name)

    def to_dict(self) -> dict:
        return _clean({
            "schema_version": SCHEMA_VERSION,
            "experiment": self.experiment,
            "config": self.config,
            "rows": self.rows,
            "statistics": self.statistics,
            "verdicts": [v.to_dict() for v in self.verdicts],
            "passed": self.passed,
            "z_scores": None if self.z_scores is None else self.z_scores.values.tolist(),
            "notes": list(self.notes),
        })

    def to_json(self) -> str:
        return json.dumps(self.to_dict(), sort_keys=True, indent=1, allow_nan=False)

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentReport":
        verdicts = []
        for v in d.get("verdicts", []):
            value = math.nan if v["value"] is None else v["value"]
            verdicts.append(Verdict(v["name"], value, v["op"], v["threshold"]))
        z = d.get("z_scores")
        return cls(
            experiment=d["experiment"],
            config=d["config"],
            rows=d.get("rows", []),
            statistics=d.get("statistics", {}),
            verdicts=verdicts,
            z_scores=None if z is None else SampleSet(z),
            notes=d.get("notes", []),
        )

    @classmethod
    def from_json(cls, text: str) -> "ExperimentReport":
        return cls.from_dict(json.loads(text))

    def csv_rows(self) -> list:
        cfg = self.config
        verdict = {True: "pass", False: "fail", None: "none"}[self.passed]
        out = []
        for row in self.rows or [{}]:
            out.append({
                "experiment": self.experiment,
                "ensemble": row.get("ensemble", cfg.get("ensemble")),
                "beta": row.get("beta", ""),
                "n": row.get("n", ""),
                "y": cfg.get("y", ""),
                "replicates": cfg.get("replicates", ""),
                "seed": cfg.get("seed", ""),
                "mean": _fmt(row.get("mean")),
                "var": _fmt(row.get("var")),
                "theory_mean": _fmt(row.get("theory_mean")),
                "theory_var": _fmt(row.get("theory_var")),
                "ks_d": _fmt(row.get("ks_d")),
                "ks_p": _fmt(row.get("ks_p")),
                "slope": _fmt(self.statistics.get("slope")),
                "slope_target": _fmt(self.statistics.get("slope_target")),
                "verdict": verdict,
            })
        return out

    def to_csv(self) -> str:
        buf = io.StringIO()
        writer = csv.DictWriter(buf, fieldnames=CSV_COLUMNS, lineterminator="\n")
        writer.writeheader()
        writer.writerows(self.csv_rows())
        return buf.getvalue()

    def summary(self) -> str:
        lines = [f"{self.experiment} ({self.config.get('ensemble')})"]
        for row in self.rows:
            parts = [f"n={row.get('n')}"]
            for key in ("mean", "var", "theory_mean", "theory_var", "ks_d"):
                if row.get(key) is not None:
                    parts.append(f"{key}={row[key]:.6g}")
            lines.append("  " + " ".join(parts))
        for key, value in self.statistics.items():
            if isinstance(value, (int, float)) and not isinstance(value, bool):
                lines.append(f"  {key} = {value:.6g}")
        lines.extend("  " + str(v) for v in self.verdicts)
        lines.extend("  note: " + n for n in self.notes)
        return "\n".join(lines)


def _fmt(value):
    if value is None:
        return ""
    if isinstance(value, float) and math.isnan(value):
        return ""
    return repr(float(value)) if isinstance(value, float) else str(value)


def _clean(obj):
    """JSON-safe copy: numpy scalars to Python, NaN/inf to None, tuples to lists."""
    if isinstance(obj, dict):
        return {str(k): _clean(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_clean(v) for v in obj]
    if isinstance(obj, np.ndarray):
        return _clean(obj.tolist())
    if isinstance(obj, StreamingMoments):
        return _clean(obj.to_dict())
    if isinstance(obj, (np.bool_, bool)):
        return bool(obj)
    if isinstance(obj, np.integer):
        return int(obj)
    if isinstance(obj, (np.floating, float)):
        v = float(obj)
        return v if math.isfinite(v) else None
    return obj


def write_svg(report: ExperimentReport, path, bins: int = 60) -> None:
    """Histogram of the report's z-scores with the standard normal density."""
    if report.z_scores is None or len(report.z_scores) == 0:
        raise ValueError("report has no z-scores to plot")
    import matplotlib

    matplotlib.use("Agg")
    import matplotlib.pyplot as plt

    z = report.z_scores.values
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.hist(z, bins=bins, density=True, alpha=0.6, label="z-scores")
    lim = max(4.0, float(np.max(np.abs(z))))
    grid = np.linspace(-lim, lim, 400)
    ax.plot(grid, np.exp(-grid**2 / 2) / math.sqrt(2 * math.pi), "k-", label="N(0,1)")
    ax.set_xlabel("z")
    ax.set_ylabel("density")
    ax.set_title(f"{report.experiment}: {report.config.get('ensemble')}")
    ax.legend()
    fig.tight_layout()
    fig.savefig(path, format="svg")
    plt.close(fig)
