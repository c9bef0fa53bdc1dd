"""Experiment configuration and the key=value config-file format."""

from __future__ import annotations

from dataclasses import asdict, dataclass, field, fields, replace

ENSEMBLES = (
    "gue-tridiag",
    "goe-tridiag",
    "gue-dense",
    "goe-dense",
    "wigner-threepoint",
    "wigner-rademacher",
)
DENSE_ENSEMBLES = {"gue-dense", "goe-dense", "wigner-threepoint", "wigner-rademacher"}
DENSE_MAX_N = 2048
RIGIDITY_MAX_REPS = 1000
INTERLACE_MAX_N = 1024

# Acceptance thresholds. These are harness constants picked for desk-scale
# runs; they are copied into every report next to the value they judge.
THRESHOLDS = {
    "counting_mean_se": 4.0,
    "slope_rel_tol": 0.12,
    "slope_r2_min": 0.95,
    "slope_ratio_rel_tol": 0.15,
    "clt_min_reps": 5000,
    "clt_ks_d": 0.02,
    "clt_skew": 0.1,
    "fluct_std_rel_tol": 0.15,
    "fluct_ks_d": 0.02,
    "rigidity_pass_fraction": 0.99,
    "interlace_min_reps": 2000,
    "interlace_alpha": 0.01,
    "universality_mean_se": 3.0,
    "universality_var_ratio_tol": 0.15,
}


def check_dense_cap(ns) -> None:
    if max(ns) > DENSE_MAX_N:
        raise ValueError(f"dense ensembles are capped at n <= {DENSE_MAX_N}")


def beta_of(ensemble: str) -> int:
    return 1 if ensemble.startswith("goe") else 2


@dataclass(frozen=True)
class ExperimentConfig:
    ensemble: str = "gue-tridiag"
    n: tuple = (1024,)
    y: float = 0.0
    replicates: int = 1000
    seed: int = 1
    threads: int = 1
    index: int | None = None
    epsilon: float = 0.1
    rigidity_c: float = 1.0
    # absolute eigenvalue tolerance on the normalized scale
    tol: float = 1e-10
    reference: str = "gue-dense"
    ks_threshold: float | None = None
    thresholds: dict = field(default_factory=lambda: dict(THRESHOLDS))

    def __post_init__(self):
        n = self.n
        if isinstance(n, int):
            n = (n,)
        object.__setattr__(self, "n", tuple(int(v) for v in n))
        if self.ensemble not in ENSEMBLES:
            raise ValueError(f"unknown ensemble {self.ensemble!r}; choose from {', '.join(ENSEMBLES)}")
        if self.reference not in ENSEMBLES:
            raise ValueError(f"unknown reference ensemble {self.reference!r}")
        if not self.n or any(v < 1 for v in self.n):
            raise ValueError("every n must be >= 1")
        if self.replicates < 1:
            raise ValueError("replicates must be >= 1")
        if not -2.0 < self.y < 2.0:
            raise ValueError("y must lie strictly inside (-2, 2)")
        if not 0.0 < self.epsilon < 0.5:
            raise ValueError("epsilon must lie in (0, 0.5)")
        if self.threads < 1:
            raise ValueError("threads must be >= 1")
        if not self.rigidity_c > 0:
            raise ValueError("rigidity C must be positive")
        if not self.tol > 0:
            raise ValueError("tol must be positive")
        if self.ensemble in DENSE_ENSEMBLES:
            check_dense_cap(self.n)

    @property
    def beta(self) -> int:
        return beta_of(self.ensemble)

    def with_(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)

    def echo(self) -> dict:
        """Configuration as stored in reports; worker count is not part of it."""
        d = asdict(self)
        d.pop("threads")
        d["n"] = list(self.n)
        return d


_FIELD_NAMES = {f.name for f in fields(ExperimentConfig)}
_ALIASES = {"reps": "replicates", "rigidity-c": "rigidity_c", "ks-threshold": "ks_threshold"}


def _coerce(key: str, value: str):
    if key == "n":
        return tuple(int(v) for v in value.replace(",", " ").split())
    if key in ("replicates", "seed", "threads", "index"):
        return int(value, 0)
    if key in ("y", "epsilon", "rigidity_c", "tol", "ks_threshold"):
        return float(value)
    return value


def parse_config_text(text: str) -> dict:
    """Parse ``key=value`` lines; ``#`` starts a comment."""
    out = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ValueError(f"line {lineno}: expected key=value")
        key, value = (s.strip() for s in line.split("=", 1))
        key = _ALIASES.get(key, key).replace("-", "_")
        if key not in _FIELD_NAMES or key == "thresholds":
            raise ValueError(f"line {lineno}: unknown key {key!r}")
        out[key] = _coerce(key, value)
    return out


def load_config_file(path) -> dict:
    with open(path, encoding="utf-8") as fh:
        return parse_config_text(fh.read())
