"""Monte Carlo experiment runners.

Every replicate draws its matrix from ``SeedStream(seed, r, key)`` where the
key depends only on the ensemble and ``n``. Replicate results are collected
in replicate order and reduced in a fixed tree, so a report depends on the
configuration and seed but never on the number of workers.
"""

from __future__ import annotations

import math
import time
from concurrent.futures import ProcessPoolExecutor
from functools import partial

import numpy as np

from .. import semicircle
from ..ensembles import (
    SeedStream,
    gaussian,
    goe_spec,
    gue_spec,
    rademacher_spec,
    sample_dense,
    sample_tridiagonal_beta,
    three_point_spec,
    verify_moment_match,
)
from ..errors import InsufficientDataError
from ..spectral import (
    _bisect,
    _negcount,
    _pivmin,
    all_eigenvalues,
    householder_tridiagonalize,
)
from ..stats import (
    SampleSet,
    ks_one_sample,
    ks_two_sample,
    lattice_ks_normal,
    moments_of,
    regress_slope,
    skewness,
)
from .config import (
    DENSE_ENSEMBLES,
    ENSEMBLES,
    INTERLACE_MAX_N,
    RIGIDITY_MAX_REPS,
    ExperimentConfig,
    beta_of,
    check_dense_cap,
)
from .report import ExperimentReport, Verdict

__all__ = [
    "sample_ensemble",
    "map_replicates",
    "even_superposition",
    "run_counting",
    "run_variance_slope",
    "run_clt",
    "run_fluctuation",
    "run_rigidity",
    "run_interlacing",
    "run_universality",
]

_DENSE_SPECS = {
    "gue-dense": gue_spec,
    "goe-dense": goe_spec,
    "wigner-threepoint": three_point_spec,
    "wigner-rademacher": rademacher_spec,
}
# key prefixes that separate the negative-control streams in run_interlacing
_INTERLACE_TAG = 1_000_003


def _stream(seed: int, ensemble: str, n: int, r: int, tag: int = 0) -> SeedStream:
    key = (ENSEMBLES.index(ensemble), n) if not tag else (tag, ENSEMBLES.index(ensemble), n)
    return SeedStream(seed, r, key)


def sample_ensemble(ensemble: str, n: int, stream):
    """Unnormalized tridiagonal matrix for any configured ensemble."""
    if ensemble in DENSE_ENSEMBLES:
        return householder_tridiagonalize(sample_dense(_DENSE_SPECS[ensemble](n), stream))
    return sample_tridiagonal_beta(n, beta_of(ensemble), stream)


def _chunk_worker(fn, indices):
    return [fn(int(r)) for r in indices]


def map_replicates(fn, replicates: int, threads: int = 1) -> list:
    """``[fn(0), ..., fn(replicates - 1)]``, evaluated on ``threads`` processes."""
    if threads <= 1 or replicates < 2:
        return [fn(r) for r in range(replicates)]
    chunks = np.array_split(np.arange(replicates), min(replicates, 4 * threads))
    with ProcessPoolExecutor(max_workers=threads) as pool:
        parts = pool.map(_chunk_worker, [fn] * len(chunks), chunks)
        return [x for part in parts for x in part]


# -- per-replicate tasks (module level so they pickle) -----------------------

def _count_task(ensemble, n, y, seed, r):
    T = sample_ensemble(ensemble, n, _stream(seed, ensemble, n, r))
    return n - int(_negcount(T.diag, T.subdiag, y * math.sqrt(n), _pivmin(T.diag, T.subdiag)))


def _fluct_task(ensemble, n, i, y, tol, seed, r):
    T = sample_ensemble(ensemble, n, _stream(seed, ensemble, n, r))
    root = math.sqrt(n)
    piv = _pivmin(T.diag, T.subdiag)
    lam = _bisect(T.diag, T.subdiag, i, tol * root, piv) / root
    count = n - int(_negcount(T.diag, T.subdiag, y * root, piv))
    return lam, count


def _rigidity_task(ensemble, n, lo, hi, centers, windows, tol, seed, r):
    T = sample_ensemble(ensemble, n, _stream(seed, ensemble, n, r))
    lam = all_eigenvalues(T, tol * math.sqrt(n)).values / math.sqrt(n)
    dev = lam[lo - 1:hi] - centers
    return dev, bool(np.any(np.abs(dev) >= windows))


def even_superposition(a, b) -> np.ndarray:
    """Merge two spectra ascending and keep 1-based positions 2, 4, ..."""
    merged = np.sort(np.concatenate([np.asarray(a), np.asarray(b)]))
    return merged[1::2]


def _median_and_count(values, y):
    return float(np.median(values)), int(np.count_nonzero(values >= y))


def _interlace_task(dense, n, y, tol, seed, r):
    goe = "goe-dense" if dense else "goe-tridiag"
    gue = "gue-dense" if dense else "gue-tridiag"
    root = math.sqrt(n)

    def spectrum(ens, m, tag):
        T = sample_ensemble(ens, m, _stream(seed, ens, m, r, tag))
        return all_eigenvalues(T, tol * root).values / root

    goe_n = spectrum(goe, n, 0)
    kept = even_superposition(goe_n, spectrum(goe, n + 1, 0))
    wrong = even_superposition(goe_n, spectrum(goe, n, _INTERLACE_TAG))
    direct = spectrum(gue, n, 0)
    out = []
    for vals in (kept, direct, wrong):
        med, cnt = _median_and_count(vals, y)
        out.extend([cnt, med])
    return out


# -- helpers ----------------------------------------------------------------

def _counts(config: ExperimentConfig, ensemble: str, n: int) -> np.ndarray:
    task = partial(_count_task, ensemble, n, config.y, config.seed)
    return np.asarray(map_replicates(task, config.replicates, config.threads), dtype=np.float64)


def _count_row(config, ensemble, n, counts):
    mom = moments_of(counts)
    row = {"n": n, "ensemble": ensemble, "beta": beta_of(ensemble), "moments": mom,
           "mean": mom.mean, "var": mom.variance, "sem": mom.sem,
           "variance_defined": mom.count > 1}
    if n >= 2:
        pred = semicircle.predict(n, config.y, beta_of(ensemble))
        row.update(theory_mean=pred.mean, theory_var=pred.variance, prediction=pred.to_dict())
        if counts.size >= 8:
            z = semicircle.clt_normalize(counts, pred)
            row["ks_d"], row["ks_p"] = ks_one_sample(z)
    return row


def _theory_z(counts, n, y, beta):
    return semicircle.clt_normalize(counts, semicircle.predict(n, y, beta))


def _config_report(name, config, **kw):
    return ExperimentReport(experiment=name, config=config.echo(), **kw)


# -- runners ----------------------------------------------------------------

def run_counting(config: ExperimentConfig) -> ExperimentReport:
    """Y_n = N_[y, inf)(W_n) per replicate, with moments and theory z-scores."""
    t0 = time.perf_counter()
    rep = _config_report("counting", config)
    th = config.thresholds
    zs = []
    for n in config.n:
        counts = _counts(config, config.ensemble, n)
        row = _count_row(config, config.ensemble, n, counts)
        rep.rows.append(row)
        if "theory_mean" in row:
            zs.append(_theory_z(counts, n, config.y, config.beta))
        if row["variance_defined"] and "theory_mean" in row:
            dev = abs(row["mean"] - row["theory_mean"]) / row["sem"] if row["sem"] > 0 else (
                0.0 if row["mean"] == row["theory_mean"] else math.inf)
            rep.verdicts.append(Verdict(f"n={n}: |mean - theory| / SE", dev, "<=",
                                        th["counting_mean_se"]))
        elif not row["variance_defined"]:
            rep.notes.append(f"n={n}: variance undefined with a single replicate")
    if len(zs) == 1:
        rep.z_scores = SampleSet(zs[0])
    rep.timings["total_s"] = time.perf_counter() - t0
    return rep


def _check_geometric(ns):
    if len(ns) < 3:
        raise ValueError("variance slope needs at least three values of n")
    if any(b <= a for a, b in zip(ns, ns[1:])):
        raise ValueError("n values must be strictly increasing")
    ratios = [b / a for a, b in zip(ns, ns[1:])]
    if max(ratios) - min(ratios) > 1e-9 * max(ratios):
        raise ValueError("n values must be geometrically spaced")


def run_variance_slope(config: ExperimentConfig) -> ExperimentReport:
    """Regress Var(Y_n) on ln n and compare the slope with 1/(beta pi^2)."""
    t0 = time.perf_counter()
    ns = sorted(config.n)
    _check_geometric(ns)
    if config.replicates < 2:
        raise InsufficientDataError("variance slope needs at least two replicates per n")
    rep = _config_report("variance-slope", config)
    for n in ns:
        rep.rows.append(_count_row(config, config.ensemble, n, _counts(config, config.ensemble, n)))
    slope, intercept, r2 = regress_slope([(math.log(r["n"]), r["var"]) for r in rep.rows])
    target = 1.0 / (2.0 * math.pi**2) if config.beta == 2 else 1.0 / math.pi**2
    rel = abs(slope / target - 1.0)
    rep.statistics.update(slope=slope, intercept=intercept, r2=r2, slope_target=target,
                          slope_rel_error=rel)
    th = config.thresholds
    rep.verdicts += [
        Verdict("slope relative error", rel, "<=", th["slope_rel_tol"]),
        Verdict("r2", r2, ">=", th["slope_r2_min"]),
    ]
    rep.timings["total_s"] = time.perf_counter() - t0
    return rep


def run_clt(config: ExperimentConfig) -> ExperimentReport:
    """KS tests of the count against N(0, 1) with empirical (a) and theory (b) standardization."""
    t0 = time.perf_counter()
    th = config.thresholds
    if config.replicates < th["clt_min_reps"]:
        raise InsufficientDataError(
            f"CLT test needs at least {th['clt_min_reps']} replicates, got {config.replicates}")
    n = config.n[0]
    counts = _counts(config, config.ensemble, n)
    rep = _config_report("clt", config)
    row = _count_row(config, config.ensemble, n, counts)
    rep.rows.append(row)
    mom = row["moments"]
    if not mom.variance > 0:
        raise InsufficientDataError("all replicates gave the same count; variance is zero")
    z_emp = (counts - mom.mean) / mom.std
    z_th = _theory_z(counts, n, config.y, config.beta)
    d_a, p_a = ks_one_sample(z_emp)
    d_b, p_b = ks_one_sample(z_th)
    lat_a, lat_pa = lattice_ks_normal(counts, mom.mean, mom.std)
    lat_b, lat_pb = lattice_ks_normal(counts, row["theory_mean"], math.sqrt(row["theory_var"]))
    skew = skewness(counts)
    rep.statistics.update(
        ks_d_empirical=d_a, ks_p_empirical=p_a, ks_d_theory=d_b, ks_p_theory=p_b,
        lattice_ks_d_empirical=lat_a, lattice_ks_p_empirical=lat_pa,
        lattice_ks_d_theory=lat_b, lattice_ks_p_theory=lat_pb,
        skewness=skew, variance_ratio_to_theory=mom.variance / row["theory_var"],
        p_values="asymptotic Kolmogorov approximation",
    )
    ks_lim = config.ks_threshold if config.ks_threshold is not None else th["clt_ks_d"]
    rep.verdicts += [
        Verdict("KS D, empirically standardized", d_a, "<=", ks_lim),
        Verdict("|skewness|", abs(skew), "<=", th["clt_skew"]),
    ]
    rep.z_scores = SampleSet(z_emp)
    rep.timings["total_s"] = time.perf_counter() - t0
    return rep


def run_fluctuation(config: ExperimentConfig) -> ExperimentReport:
    """Distribution of the normalized eigenvalue lambda_i around t(i/n)."""
    t0 = time.perf_counter()
    th = config.thresholds
    n = config.n[0]
    i = config.index if config.index is not None else n // 2
    center, std = semicircle.fluctuation_params(i, n)
    if config.beta == 1:
        std *= math.sqrt(2.0)
    task = partial(_fluct_task, config.ensemble, n, i, config.y, config.tol, config.seed)
    res = map_replicates(task, config.replicates, config.threads)
    lam = np.array([r[0] for r in res])
    counts = np.array([r[1] for r in res])
    # N_[y, inf) <= n - i  <=>  lambda_i <= y, up to the bisection tolerance
    violations = int(np.count_nonzero((counts <= n - i) != (lam <= config.y + 2 * config.tol)))
    mom = moments_of(lam)
    rep = _config_report("fluctuation", config)
    z_th = (lam - center) / std
    row = {"n": n, "ensemble": config.ensemble, "beta": config.beta, "index": i,
           "moments": mom, "mean": mom.mean, "var": mom.variance,
           "center": center, "theory_std": std}
    if lam.size >= 8:
        row["ks_d"], row["ks_p"] = ks_one_sample(z_th)
    rep.rows.append(row)
    rep.statistics.update(duality_violations=violations)
    if mom.count > 1:
        ratio = mom.std / std
        # delta-method SE of a sample std
        std_se = mom.std / math.sqrt(2.0 * (mom.count - 1))
        rep.statistics.update(sample_std=mom.std, sample_std_se=std_se, theory_std=std,
                              std_ratio=ratio, mean_offset_in_std=(mom.mean - center) / std)
        rep.verdicts.append(Verdict("|std ratio - 1|", abs(ratio - 1.0), "<=",
                                    th["fluct_std_rel_tol"]))
        if lam.size >= 8 and mom.std > 0:
            z_emp = (lam - mom.mean) / mom.std
            d_emp, p_emp = ks_one_sample(z_emp)
            rep.statistics.update(ks_d_empirical=d_emp, ks_p_empirical=p_emp,
                                  ks_d_theory=row["ks_d"], ks_p_theory=row["ks_p"])
            rep.verdicts.append(Verdict("KS D, empirically standardized", d_emp, "<=",
                                        th["fluct_ks_d"]))
    rep.verdicts.append(Verdict("duality violations", violations, "==", 0))
    rep.z_scores = SampleSet(z_th)
    rep.timings["total_s"] = time.perf_counter() - t0
    return rep


def run_rigidity(config: ExperimentConfig) -> ExperimentReport:
    """Bulk deviations |lambda_i - t(i/n)| from full spectra."""
    t0 = time.perf_counter()
    th = config.thresholds
    if config.replicates > RIGIDITY_MAX_REPS:
        raise ValueError(f"rigidity runs are capped at {RIGIDITY_MAX_REPS} replicates")
    n = config.n[0]
    lo = max(1, math.ceil(config.epsilon * n))
    hi = min(n, math.floor((1.0 - config.epsilon) * n))
    if hi < lo:
        raise ValueError("bulk window is empty")
    idx = np.arange(lo, hi + 1)
    centers = semicircle.quantile(idx / n)
    windows = semicircle.rigidity_window(idx, n, config.rigidity_c)
    task = partial(_rigidity_task, config.ensemble, n, lo, hi, centers, windows,
                   config.tol, config.seed)
    res = map_replicates(task, config.replicates, config.threads)
    dev = np.stack([r[0] for r in res])
    window_violation = np.array([r[1] for r in res])
    absdev = np.abs(dev)
    max_dev = absdev.max(axis=1)
    bound = math.log(n) ** 2 / n
    frac_within = float(np.mean(max_dev <= bound))
    # smallest C for which the window covers every observed deviation
    lnln = math.log(math.log(n))
    m = np.minimum(idx, n - idx + 1).astype(np.float64)
    scaled = absdev.max(axis=0) * m ** (1.0 / 3.0) * n ** (2.0 / 3.0)
    c_fit = float(np.max(np.log(scaled)) / (lnln * lnln)) if lnln > 0 else math.nan
    reps = dev.shape[0]
    profile_mean = absdev.mean(axis=0)
    profile_se = absdev.std(axis=0, ddof=1) / math.sqrt(reps) if reps > 1 else np.full(idx.size, np.nan)
    rep = _config_report("rigidity", config)
    rep.rows.append({"n": n, "ensemble": config.ensemble, "beta": config.beta,
                     "bulk_lo": lo, "bulk_hi": hi, "moments": moments_of(max_dev),
                     "mean": float(max_dev.mean()),
                     "var": float(max_dev.var(ddof=1)) if reps > 1 else math.nan})
    rep.statistics.update(
        deviation_bound=bound,
        fraction_within_bound=frac_within,
        max_deviation=float(max_dev.max()),
        window_violation_fraction=float(window_violation.mean()),
        window_c=config.rigidity_c,
        window_violation_reference=float(n ** -3.0 * idx.size),
        fitted_c=c_fit,
        max_deviations=max_dev,
        profile_index=idx,
        profile_mean_abs_dev=profile_mean,
        profile_se=profile_se,
    )
    rep.verdicts.append(Verdict("fraction of replicates within (ln n)^2/n", frac_within, ">=",
                                th["rigidity_pass_fraction"]))
    rep.timings["total_s"] = time.perf_counter() - t0
    return rep


def run_interlacing(config: ExperimentConfig) -> ExperimentReport:
    """Compare even(GOE_n u GOE_{n+1}) with GUE_n, plus the even(GOE_n u GOE_n) control."""
    t0 = time.perf_counter()
    th = config.thresholds
    n = config.n[0]
    if n > INTERLACE_MAX_N:
        raise ValueError(f"interlacing runs are capped at n <= {INTERLACE_MAX_N}")
    if config.replicates < th["interlace_min_reps"]:
        raise InsufficientDataError(
            f"interlacing needs at least {th['interlace_min_reps']} replicates")
    dense = config.ensemble in DENSE_ENSEMBLES
    task = partial(_interlace_task, dense, n, config.y, config.tol, config.seed)
    res = np.asarray(map_replicates(task, config.replicates, config.threads), dtype=np.float64)
    cols = {"superposition": res[:, 0:2], "gue": res[:, 2:4], "control": res[:, 4:6]}
    rep = _config_report("interlace", config)
    alpha = th["interlace_alpha"]
    control_p = []
    for j, stat in enumerate(("count", "median")):
        d, p = ks_two_sample(cols["superposition"][:, j], cols["gue"][:, j])
        dc, pc = ks_two_sample(cols["control"][:, j], cols["gue"][:, j])
        control_p.append(pc)
        rep.statistics[f"{stat}_ks_d"] = d
        rep.statistics[f"{stat}_ks_p"] = p
        rep.statistics[f"control_{stat}_ks_d"] = dc
        rep.statistics[f"control_{stat}_ks_p"] = pc
        rep.verdicts.append(Verdict(f"{stat}: KS p, superposition vs GUE", p, ">=", alpha))
        for name, block in cols.items():
            mom = moments_of(block[:, j])
            rep.rows.append({"n": n, "ensemble": name, "statistic": stat, "moments": mom,
                             "mean": mom.mean, "var": mom.variance,
                             "ks_d": d if name == "superposition" else (dc if name == "control" else None),
                             "ks_p": p if name == "superposition" else (pc if name == "control" else None)})
    rep.statistics["p_values"] = "asymptotic Kolmogorov approximation"
    rep.verdicts.append(Verdict("control: min KS p", min(control_p), "<", alpha))
    rep.timings["total_s"] = time.perf_counter() - t0
    return rep


def _matches_gue(ensemble: str, n: int) -> bool:
    spec = _DENSE_SPECS.get(ensemble)
    if spec is None:
        return ensemble.startswith("gue")
    s = spec(n)
    return (s.beta == 2
            and verify_moment_match(s.off_diag, gaussian(0.5), 4).matched
            and verify_moment_match(s.diag, gaussian(1.0), 4).matched)


def run_universality(config: ExperimentConfig) -> ExperimentReport:
    """Compare Y_n and P(lambda_i >= y) between ``ensemble`` and ``reference``."""
    t0 = time.perf_counter()
    th = config.thresholds
    n = config.n[0]
    if config.replicates < 2:
        raise InsufficientDataError("universality needs at least two replicates")
    if config.reference in DENSE_ENSEMBLES:
        check_dense_cap(config.n)
    rep = _config_report("universality", config)
    counts = {}
    for ens in (config.ensemble, config.reference):
        counts[ens] = _counts(config, ens, n)
        rep.rows.append(_count_row(config, ens, n, counts[ens]))
    a, b = rep.rows
    diff = a["mean"] - b["mean"]
    se = math.hypot(a["sem"], b["sem"])
    ratio = a["var"] / b["var"] if b["var"] > 0 else math.nan
    i0 = int(round(n * semicircle.semicircle_cdf(config.y)))
    probs = {}
    for i in range(max(1, i0 - 1), min(n, i0 + 1) + 1):
        # lambda_i >= y  <=>  N_[y, inf) >= n - i + 1
        entry = {}
        for ens, c in counts.items():
            p = float(np.mean(c >= n - i + 1))
            entry[ens] = {"p": p, "se": math.sqrt(p * (1 - p) / c.size)}
        entry["difference"] = entry[config.ensemble]["p"] - entry[config.reference]["p"]
        probs[str(i)] = entry
    rep.statistics.update(mean_difference=diff, combined_se=se, variance_ratio=ratio,
                          index_probabilities=probs)
    if _matches_gue(config.ensemble, n) and _matches_gue(config.reference, n):
        dev_theory = abs(a["mean"] - a["theory_mean"]) / a["sem"] if a["sem"] > 0 else math.inf
        rep.verdicts += [
            Verdict("|mean - theory| / SE", dev_theory, "<=", th["universality_mean_se"]),
            Verdict("|mean difference| / combined SE", abs(diff) / se if se > 0 else math.inf,
                    "<=", th["universality_mean_se"]),
            Verdict("|variance ratio - 1|", abs(ratio - 1.0), "<=",
                    th["universality_var_ratio_tol"]),
        ]
    else:
        rep.notes.append("entries do not match GUE to fourth order; contrast run, no verdict")
    rep.timings["total_s"] = time.perf_counter() - t0
    return rep
