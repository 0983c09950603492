"""Seeded experiment protocols and their CSV outputs.

Every experiment is a list of independent trials. A trial draws its data
from a stream derived from ``(seed, experiment, trial, ...)``, runs the
blind solver(s) plus the oracle baseline (OMP with the planted basis), and
returns report rows. Rows are sorted before writing, so output does not
depend on the order in which trials finish.
"""

from __future__ import annotations

import csv
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, fields, replace
from pathlib import Path

import numpy as np

from .bases import dct_basis, default_catalog
from .errors import BCSError, ConfigInvalid
from .fbcs import Mode, fbcs_ensemble
from .obd import obd_bcs, orthogonal_dl
from .omp import omp_coefficients
from .sparse_bcs import sparse_bcs_direct
from .synth import (
    add_noise_snr,
    fixed_tiled_basis,
    gen_block_diag_basis,
    gen_sparse_basis_matrix,
    gen_sparse_matrix,
    gen_union_ortho,
    noise_norm_estimate,
    recon_error,
    trial_seed,
)

__all__ = [
    "EXPERIMENTS",
    "ExperimentConfig",
    "RecoveryReport",
    "ReportRow",
    "default_config",
    "load_config",
    "parse_config_text",
    "run_experiment",
    "summarize",
]

EXPERIMENTS = (
    "fbcs-noise",
    "fbcs-ksweep",
    "sparse-ksweep",
    "sparse-noise",
    "obd-nsweep",
    "obd-ksweep",
    "obd-noise",
    "comparative",
)

INF = math.inf
# stream key for data shared by all trials of a run (the fixed A of the OBD sweeps)
SHARED = 2**31


@dataclass(frozen=True)
class ExperimentConfig:
    """Parameters of one run. `k_list` / `N_list` drive the sweeps; the
    scalar `k` / `N` are used by the other experiments."""

    experiment: str
    m: int = 64
    n: int = 32
    L: int = 2
    k: int = 6
    k_p: int = 6
    N: int = 100
    snr_list: tuple = (INF,)
    k_list: tuple = ()
    N_list: tuple = ()
    trials: int = 20
    seed: int = 0
    output_dir: str = "results"
    noise_scope: str = "global"
    support: str = "exact"
    fbcs_mode: str = "sparsest"
    train_signals: int = 2000
    max_iter: int = 100
    delta_tol: float = 1e-6
    keep_best: bool = True
    jobs: int = 1

    def validate(self):
        if self.experiment not in EXPERIMENTS:
            raise ConfigInvalid(f"unknown experiment {self.experiment!r}; choose from {', '.join(EXPERIMENTS)}")
        for name in ("m", "n", "L", "k", "k_p", "N", "trials", "train_signals", "max_iter", "jobs"):
            if getattr(self, name) < 1:
                raise ConfigInvalid(f"{name} must be positive, got {getattr(self, name)}")
        if not 0 <= self.seed < 2**64:
            raise ConfigInvalid(f"seed must be a 64-bit unsigned integer, got {self.seed}")
        for snr in self.snr_list:
            if math.isnan(snr) or snr == -INF:
                raise ConfigInvalid(f"SNR values must be finite or inf, got {snr}")
        if not self.snr_list:
            raise ConfigInvalid("snr_list is empty")
        if self.noise_scope not in ("global", "column"):
            raise ConfigInvalid(f"noise_scope must be 'global' or 'column', got {self.noise_scope!r}")
        if self.support not in ("exact", "uniform"):
            raise ConfigInvalid(f"support must be 'exact' or 'uniform', got {self.support!r}")
        if self.fbcs_mode not in [m.value for m in Mode]:
            raise ConfigInvalid(f"fbcs_mode must be one of {', '.join(m.value for m in Mode)}, got {self.fbcs_mode!r}")
        if self.delta_tol <= 0:
            raise ConfigInvalid("delta_tol must be positive")
        ks = self.k_list or (self.k,)
        Ns = self.N_list or (self.N,)
        if any(v < 1 for v in ks) or any(v < 1 for v in Ns):
            raise ConfigInvalid("k_list and N_list entries must be positive")
        exp = self.experiment
        if exp.startswith("fbcs"):
            if self.m & (self.m - 1):
                raise ConfigInvalid(f"wavelet catalog needs m to be a power of two, got {self.m}")
            if self.n > self.m or max(ks) > self.n:
                raise ConfigInvalid("need k <= n <= m")
        elif exp.startswith("sparse"):
            if self.n > self.m:
                raise ConfigInvalid("need n <= m")
            if self.k_p > self.m or self.k_p * max(ks) > self.n:
                raise ConfigInvalid(f"k_p * k = {self.k_p * max(ks)} exceeds n = {self.n}")
        else:
            if self.n % 2:
                raise ConfigInvalid(f"n must be even, got {self.n}")
            if self.m != self.n * self.L:
                raise ConfigInvalid(f"m must equal n * L = {self.n * self.L}, got {self.m}")
            if max(ks) > self.n:
                raise ConfigInvalid("need k <= n")
            if exp == "comparative":
                if self.n % 4 or 2 * self.k > self.n:
                    raise ConfigInvalid("comparative needs n divisible by 4 and 2k <= n")
        return self


DEFAULTS = {
    "fbcs-noise": dict(
        m=64, n=32, k=6, N=100, snr_list=(INF, 30.0, 25.0, 20.0, 15.0, 10.0, 5.0),
        noise_scope="column", support="uniform",
    ),
    "fbcs-ksweep": dict(m=64, n=32, k=6, N=100, k_list=tuple(range(1, 33)), support="uniform"),
    "sparse-ksweep": dict(m=256, n=128, k=3, k_p=6, N=100, k_list=tuple(range(1, 21)), support="uniform"),
    "sparse-noise": dict(m=256, n=128, k=3, k_p=6, N=100, snr_list=(INF, 30.0, 25.0, 20.0, 15.0), support="uniform"),
    "obd-nsweep": dict(
        m=64, n=32, L=2, k=4, N=800,
        N_list=(150, 200, 300, 400, 500, 600, 800, 1000, 1500, 2000, 2500),
    ),
    "obd-ksweep": dict(
        m=64, n=32, L=2, k=4, N=800, k_list=tuple(range(1, 11)),
        N_list=(200, 500, 800, 1200, 1600, 2000, 2500),
    ),
    "obd-noise": dict(m=64, n=32, L=2, k=4, N=800, snr_list=(INF, 35.0, 30.0, 25.0, 20.0, 15.0, 10.0)),
    "comparative": dict(m=128, n=64, L=2, k=6, k_p=2, N=2000, train_signals=2000),
}


def default_config(experiment, **overrides):
    if experiment not in DEFAULTS:
        raise ConfigInvalid(f"unknown experiment {experiment!r}; choose from {', '.join(EXPERIMENTS)}")
    return ExperimentConfig(experiment, **{**DEFAULTS[experiment], **overrides}).validate()


# ---------------------------------------------------------------- config files

def _parse_real(text):
    t = text.strip().lower()
    if t in ("inf", "+inf", "infinity"):
        return INF
    return float(t)


def _coerce(name, text):
    kind = {f.name: f.type for f in fields(ExperimentConfig)}[name]
    try:
        if name == "snr_list":
            return tuple(_parse_real(v) for v in text.split(",") if v.strip())
        if name in ("k_list", "N_list"):
            return tuple(int(v) for v in text.split(",") if v.strip())
        if kind == "bool":
            low = text.strip().lower()
            if low not in ("true", "false", "1", "0", "yes", "no"):
                raise ValueError(text)
            return low in ("true", "1", "yes")
        if kind == "int":
            return int(text)
        if kind == "float":
            return float(text)
        return text.strip()
    except ValueError:
        raise ConfigInvalid(f"bad value for {name}: {text!r}") from None


def parse_config_text(text):
    """Parse ``key = value`` lines (``#`` comments) into a dict of typed values."""
    known = {f.name for f in fields(ExperimentConfig)}
    values = {}
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.split("#", 1)[0].strip()
        if not line:
            continue
        if "=" not in line:
            raise ConfigInvalid(f"line {lineno}: expected key=value, got {raw!r}")
        key, value = (part.strip() for part in line.split("=", 1))
        if key not in known:
            raise ConfigInvalid(f"line {lineno}: unknown key {key!r}")
        values[key] = _coerce(key, value)
    return values


def load_config(path):
    return parse_config_text(Path(path).read_text())


# ---------------------------------------------------------------- report

REPORT_FIELDS = (
    "experiment", "trial", "snr", "k", "N", "method",
    "mean_error_pct", "miss_detected_pct", "iterations", "status",
)


@dataclass(frozen=True)
class ReportRow:
    experiment: str
    trial: int
    snr: float
    k: int
    N: int
    method: str
    mean_error_pct: float
    miss_detected_pct: float = 0.0
    iterations: int = 0
    status: str = "ok"
    wall_time: float = 0.0

    def sort_key(self):
        return (self.experiment, self.snr, self.k, self.N, self.method, self.trial)


@dataclass(frozen=True)
class TraceRow:
    experiment: str
    trial: int
    snr: float
    k: int
    N: int
    iteration: int
    objective_coded: float
    objective: float
    delta_P: float
    delta_S: float
    ortho_error: float
    mean_error_pct: float

    def sort_key(self):
        return (self.experiment, self.snr, self.k, self.N, self.trial, self.iteration)


@dataclass
class RecoveryReport:
    config: ExperimentConfig
    rows: list = field(default_factory=list)
    traces: list = field(default_factory=list)

    def summary(self):
        return summarize(self.rows)


def _fmt(v):
    if isinstance(v, float):
        if math.isinf(v):
            return "inf" if v > 0 else "-inf"
        return format(v, ".10g")
    return str(v)


def summarize(rows):
    """Mean and spread over trials for every (snr, k, N, method) point.

    Returns dicts with keys experiment, snr, k, N, method, trials, failures,
    mean_error_pct, std_error_pct, miss_detected_pct, iterations; failed and
    NaN rows are excluded from the averages.
    """
    groups = {}
    for r in rows:
        groups.setdefault((r.experiment, r.snr, r.k, r.N, r.method), []).append(r)
    out = []
    for key in sorted(groups):
        members = groups[key]
        ok = [r for r in members if r.status == "ok" and not math.isnan(r.mean_error_pct)]
        err = np.array([r.mean_error_pct for r in ok])
        out.append(
            dict(
                experiment=key[0], snr=key[1], k=key[2], N=key[3], method=key[4],
                trials=len(members), failures=len(members) - len(ok),
                mean_error_pct=float(err.mean()) if ok else math.nan,
                std_error_pct=float(err.std()) if ok else math.nan,
                miss_detected_pct=float(np.mean([r.miss_detected_pct for r in ok])) if ok else math.nan,
                iterations=float(np.mean([r.iterations for r in ok])) if ok else math.nan,
            )
        )
    return out


def _write_csv(path, header, records):
    with open(path, "w", newline="") as fh:
        w = csv.writer(fh, lineterminator="\n")
        w.writerow(header)
        for rec in records:
            w.writerow([_fmt(v) for v in rec])


def _curve_axis(experiment):
    if experiment in ("fbcs-ksweep", "sparse-ksweep"):
        return "k"
    if experiment in ("obd-nsweep", "obd-ksweep"):
        return "N"
    return "snr"


def write_outputs(report, out_dir):
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    rows = sorted(report.rows, key=ReportRow.sort_key)
    _write_csv(out / "report.csv", REPORT_FIELDS, ([getattr(r, f) for f in REPORT_FIELDS] for r in rows))
    _write_csv(
        out / "timing.csv",
        ("experiment", "trial", "snr", "k", "N", "method", "wall_time"),
        ((r.experiment, r.trial, r.snr, r.k, r.N, r.method, r.wall_time) for r in rows),
    )
    summary = summarize(rows)
    keys = ("experiment", "snr", "k", "N", "method", "trials", "failures",
            "mean_error_pct", "std_error_pct", "miss_detected_pct", "iterations")
    _write_csv(out / "summary.csv", keys, ([s[k] for k in keys] for s in summary))
    if report.traces:
        traces = sorted(report.traces, key=TraceRow.sort_key)
        names = [f.name for f in fields(TraceRow)]
        _write_csv(out / "objective_trace.csv", names, ([getattr(t, n) for n in names] for t in traces))
    _write_curves(report.config.experiment, summary, out)


def _write_curves(experiment, summary, out):
    axis = _curve_axis(experiment)
    curves = {}
    for s in summary:
        label = s["method"]
        if experiment == "obd-ksweep":
            label = f"{s['method']}_k{s['k']}"
        elif axis != "snr" and len(set(x["snr"] for x in summary)) > 1:
            label = f"{s['method']}_snr{_fmt(s['snr'])}"
        curves.setdefault(label, []).append(s)
    files = []
    for label in sorted(curves):
        path = out / f"{label}.dat"
        pts = sorted(curves[label], key=lambda s: s[axis])
        with open(path, "w") as fh:
            fh.write(f"# {axis} mean_error_pct std_error_pct miss_detected_pct\n")
            for s in pts:
                fh.write(" ".join(_fmt(v) for v in (float(s[axis]), s["mean_error_pct"], s["std_error_pct"], s["miss_detected_pct"])) + "\n")
        files.append(path.name)
    logx = "True" if axis == "N" else "False"
    (out / "plot.py").write_text(
        "# Plot the curves of this run: python plot.py (needs matplotlib)\n"
        "import numpy as np\nimport matplotlib.pyplot as plt\n\n"
        f"FILES = {files!r}\n\n"
        "for name in FILES:\n"
        "    data = np.loadtxt(name, ndmin=2)\n"
        "    plt.plot(data[:, 0], data[:, 1], marker='o', label=name[:-4])\n"
        f"plt.xlabel({axis!r})\nplt.ylabel('mean error [%]')\n"
        f"if {logx}:\n    plt.xscale('log')\n"
        "plt.yscale('symlog', linthresh=1e-3)\nplt.legend()\n"
        f"plt.title({experiment!r})\nplt.savefig('{experiment}.png', dpi=120)\n"
    )


# ---------------------------------------------------------------- protocols

def _rng(cfg, *keys):
    return np.random.default_rng(trial_seed(cfg.seed, EXPERIMENTS.index(cfg.experiment), *keys))


def _pct(x):
    return 100.0 * float(x)


class _Recorder:
    """Collects rows for one trial; solver failures become status rows."""

    def __init__(self, cfg, trial):
        self.cfg, self.trial = cfg, trial
        self.rows, self.traces = [], []

    def run(self, method, snr, k, N, fn):
        t0 = time.perf_counter()
        try:
            err, miss, iters = fn()
            status = "ok"
        except (BCSError, np.linalg.LinAlgError) as exc:
            err, miss, iters, status = math.nan, math.nan, 0, type(exc).__name__
        self.rows.append(
            ReportRow(self.cfg.experiment, self.trial, float(snr), int(k), int(N), method,
                      _pct(err), _pct(miss), int(iters), status, time.perf_counter() - t0)
        )

    def trace(self, snr, k, N, result):
        for e in result.trace:
            self.traces.append(
                TraceRow(self.cfg.experiment, self.trial, float(snr), int(k), int(N), e.iteration,
                         e.objective_coded, e.objective, e.delta_P, e.delta_S, e.ortho_error, _pct(e.error))
            )


def _oracle(X, B, A, P, k, residual_tol=None):
    C = omp_coefficients(A @ P, B, k, residual_tol)
    return recon_error(X, P @ C).mean, 0.0, 0


def _fbcs_oracle(cfg, X, B, A, P, k, snr):
    # same coding rule as the blind solver, with the planted basis
    if cfg.fbcs_mode != Mode.MIN_RESIDUAL.value:
        return _oracle(X, B, A, P, A.shape[0], noise_norm_estimate(B, snr))
    return _oracle(X, B, A, P, k)


def _noisy(cfg, B, snr, rng):
    return add_noise_snr(B, snr, rng, scope=cfg.noise_scope)


def _fbcs(cfg, X, B, A, catalog, k, snr, planted):
    mode = Mode(cfg.fbcs_mode)
    if mode is Mode.MIN_RESIDUAL:
        res = fbcs_ensemble(B, A, catalog, k, mode)
    else:
        res = fbcs_ensemble(B, A, catalog, k, mode, residual_tol=noise_norm_estimate(B, snr))
    good = res.correct_mask(planted)
    per = recon_error(X, res.X).per_signal
    # error averaged over signals that voted for the planted basis only
    err = per[good].mean() if good.any() else math.nan
    return err, 1.0 - good.mean(), 0


def _trial_fbcs(cfg, trial, rec):
    catalog = default_catalog(cfg.m)
    planted = "bior2.2"
    P = catalog[planted]
    rng = _rng(cfg, trial)
    A = rng.standard_normal((cfg.n, cfg.m))
    exact = cfg.support == "exact"
    if cfg.experiment == "fbcs-noise":
        X = P @ gen_sparse_matrix(cfg.m, cfg.N, cfg.k, rng, exact)
        B0 = A @ X
        for i, snr in enumerate(cfg.snr_list):
            B = _noisy(cfg, B0, snr, _rng(cfg, trial, 1, i))
            rec.run("fbcs", snr, cfg.k, cfg.N, lambda: _fbcs(cfg, X, B, A, catalog, cfg.k, snr, planted))
            rec.run("oracle-cs", snr, cfg.k, cfg.N, lambda: _fbcs_oracle(cfg, X, B, A, P, cfg.k, snr))
    else:
        snr = cfg.snr_list[0]
        for i, k in enumerate(cfg.k_list or (cfg.k,)):
            sub = _rng(cfg, trial, 2, i)
            X = P @ gen_sparse_matrix(cfg.m, cfg.N, k, sub, exact)
            B = _noisy(cfg, A @ X, snr, sub)
            rec.run("fbcs", snr, k, cfg.N, lambda: _fbcs(cfg, X, B, A, catalog, k, snr, planted))
            rec.run("oracle-cs", snr, k, cfg.N, lambda: _fbcs_oracle(cfg, X, B, A, P, k, snr))


def _sparse(X, B, A, Phi, k, k_p):
    res = sparse_bcs_direct(B, A, Phi, k, k_p)
    return recon_error(X, res.X).mean, 0.0, 0


def _trial_sparse(cfg, trial, rec):
    rng = _rng(cfg, trial)
    Phi = dct_basis(cfg.m)
    Z = gen_sparse_basis_matrix(cfg.m, cfg.k_p, rng, exact=cfg.support == "exact")
    P = Phi @ Z
    A = rng.standard_normal((cfg.n, cfg.m))
    if cfg.experiment == "sparse-noise":
        X = P @ gen_sparse_matrix(cfg.m, cfg.N, cfg.k, rng)
        B0 = A @ X
        for i, snr in enumerate(cfg.snr_list):
            B = _noisy(cfg, B0, snr, _rng(cfg, trial, 1, i))
            rec.run("sparse-bcs", snr, cfg.k, cfg.N, lambda: _sparse(X, B, A, Phi, cfg.k, cfg.k_p))
            rec.run("oracle-cs", snr, cfg.k, cfg.N, lambda: _oracle(X, B, A, P, cfg.k))
    else:
        snr = cfg.snr_list[0]
        for i, k in enumerate(cfg.k_list or (cfg.k,)):
            sub = _rng(cfg, trial, 2, i)
            X = P @ gen_sparse_matrix(cfg.m, cfg.N, k, sub)
            B = _noisy(cfg, A @ X, snr, sub)
            rec.run("sparse-bcs", snr, k, cfg.N, lambda: _sparse(X, B, A, Phi, k, cfg.k_p))
            rec.run("oracle-cs", snr, k, cfg.N, lambda: _oracle(X, B, A, P, k))


def _obd(cfg, rec, X, B, A, k, snr, N):
    def fn():
        res = obd_bcs(B, A, k, max_iter=cfg.max_iter, delta_tol=cfg.delta_tol, keep_best=cfg.keep_best, X_true=X)
        rec.trace(snr, k, N, res)
        return recon_error(X, res.X).mean, 0.0, res.iterations

    rec.run("obd-bcs", snr, k, N, fn)


def _trial_obd(cfg, trial, rec):
    # the measurement matrix is shared by all trials of a run
    A = gen_union_ortho(cfg.n, cfg.L, _rng(cfg, SHARED))
    if cfg.experiment == "obd-noise":
        rng = _rng(cfg, trial)
        P = gen_block_diag_basis(cfg.n, cfg.L, rng).matrix
        X = P @ gen_sparse_matrix(cfg.m, cfg.N, cfg.k, rng)
        B0 = A.matrix @ X
        for i, snr in enumerate(cfg.snr_list):
            B = _noisy(cfg, B0, snr, _rng(cfg, trial, 1, i))
            _obd(cfg, rec, X, B, A, cfg.k, snr, cfg.N)
            rec.run("oracle-cs", snr, cfg.k, cfg.N, lambda: _oracle(X, B, A.matrix, P, cfg.k))
        return
    snr = cfg.snr_list[0]
    ks = cfg.k_list or (cfg.k,)
    Ns = cfg.N_list or (cfg.N,)
    for a, k in enumerate(ks):
        for b, N in enumerate(Ns):
            sub = _rng(cfg, trial, 2, a, b)
            P = gen_block_diag_basis(cfg.n, cfg.L, sub).matrix
            X = P @ gen_sparse_matrix(cfg.m, N, k, sub)
            B = _noisy(cfg, A.matrix @ X, snr, sub)
            _obd(cfg, rec, X, B, A, k, snr, N)
            rec.run("oracle-cs", snr, k, N, lambda: _oracle(X, B, A.matrix, P, k))


def _trial_comparative(cfg, trial, rec):
    rng = _rng(cfg, trial)
    k, N = cfg.k, cfg.N
    Pb = fixed_tiled_basis(cfg.n, cfg.L)
    P = Pb.matrix
    A = gen_union_ortho(cfg.n, cfg.L, rng)
    X = P @ gen_sparse_matrix(cfg.m, N, k, rng)
    X_train = P @ gen_sparse_matrix(cfg.m, cfg.train_signals, k, rng)
    catalog = default_catalog(cfg.m)
    for i, snr in enumerate(cfg.snr_list):
        B = _noisy(cfg, A.matrix @ X, snr, _rng(cfg, trial, 1, i))
        rec.run("oracle-cs", snr, k, N, lambda: _oracle(X, B, A.matrix, P, k))

        def learned():
            dl = orthogonal_dl(X_train, k, max_iter=cfg.max_iter, delta_tol=cfg.delta_tol, blocks=Pb.n_blocks)
            err = _oracle(X, B, A.matrix, dl.P, k)[0]
            return err, 0.0, dl.iterations

        rec.run("cs-learned-basis", snr, k, N, learned)
        # X is 2k-sparse under the identity, which is in the catalog
        rec.run("fbcs", snr, k, N, lambda: _fbcs(cfg, X, B, A.matrix, catalog, 2 * k, snr, "identity"))
        rec.run("sparse-bcs", snr, k, N, lambda: _sparse(X, B, A.matrix, np.eye(cfg.m), k, cfg.k_p))
        _obd(cfg, rec, X, B, A, k, snr, N)


_PROTOCOLS = {
    "fbcs-noise": _trial_fbcs,
    "fbcs-ksweep": _trial_fbcs,
    "sparse-ksweep": _trial_sparse,
    "sparse-noise": _trial_sparse,
    "obd-nsweep": _trial_obd,
    "obd-ksweep": _trial_obd,
    "obd-noise": _trial_obd,
    "comparative": _trial_comparative,
}


def _run_trial(args):
    cfg, trial = args
    rec = _Recorder(cfg, trial)
    _PROTOCOLS[cfg.experiment](cfg, trial, rec)
    return rec.rows, rec.traces


def run_experiment(cfg, write=True):
    """Run every trial of `cfg`; writes the output files unless ``write=False``."""
    cfg.validate()
    work = [(cfg, t) for t in range(cfg.trials)]
    if cfg.jobs > 1 and cfg.trials > 1:
        with ProcessPoolExecutor(max_workers=cfg.jobs) as pool:
            results = list(pool.map(_run_trial, work))
    else:
        results = [_run_trial(w) for w in work]
    report = RecoveryReport(cfg)
    for rows, traces in results:
        report.rows.extend(rows)
        report.traces.extend(traces)
    report.rows.sort(key=ReportRow.sort_key)
    report.traces.sort(key=TraceRow.sort_key)
    if write:
        write_outputs(report, cfg.output_dir)
    return report


def with_overrides(cfg, **values):
    """Copy of `cfg` with the non-None `values` applied, re-validated."""
    return replace(cfg, **{k: v for k, v in values.items() if v is not None}).validate()
