"""Monte Carlo recovery experiments: data generation, sweeps and CSV output.

Randomness: every trial gets its own 64-bit seed derived from
``(master seed, grid index, trial index)`` with :class:`numpy.random.SeedSequence`
and feeds a Philox counter-based generator. Normal variates come from
``Generator.standard_normal`` (numpy's ziggurat sampler). Within a trial the
draw order is fixed: A (unless the matrix is fixed per sweep), support,
signal values, noise. All algorithms in a trial see the same A, X and W.
"""
import csv
import io
import json
import math
from concurrent.futures import ProcessPoolExecutor
from dataclasses import asdict, dataclass, field

import numpy as np

from .baselines import UNAVAILABLE_IDS, is_known, run_algorithm
from .core import SamplingMatrix, RecoveryResult, calibrated_epsilon
from .exceptions import InvalidInputError, SsmpError

SIGNAL_MODELS = ("gaussian", "two-pam", "approx-sparse")
METRICS = ("err", "esrr", "mse")
SWEEP_KEYS = {"K_grid": "K", "m_grid": "m", "snr_grid": "snr"}
EXACT_RTOL = 1e-6
CSV_HEADER = ("grid", "algorithm", "metric", "value", "trials", "seed")
UNAVAILABLE = "unavailable"


def make_rng(seed):
    """Philox generator for an integer seed (generators pass through)."""
    if isinstance(seed, np.random.Generator):
        return seed
    return np.random.Generator(np.random.Philox(int(seed)))


def trial_seed(master_seed, grid_index, trial_index):
    """64-bit seed for one trial, independent of execution order."""
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(grid_index), int(trial_index)))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


def matrix_seed(master_seed, grid_index):
    # one-element spawn key, disjoint from the two-element per-trial keys
    ss = np.random.SeedSequence(int(master_seed), spawn_key=(int(grid_index),))
    return int(ss.generate_state(1, dtype=np.uint64)[0])


# --- data generation -------------------------------------------------------

def generate_sampling_matrix(m, n, seed):
    """m x n matrix with i.i.d. N(0, 1/m) entries."""
    if m < 1 or n < 1:
        raise InvalidInputError("m and n must be positive")
    rng = make_rng(seed)
    return SamplingMatrix(rng.standard_normal((m, n)) / math.sqrt(m))


@dataclass(frozen=True)
class SignalSpec:
    n: int
    r: int
    K: int
    model: str = "gaussian"
    rho: float = None

    def __post_init__(self):
        if self.model not in SIGNAL_MODELS:
            raise InvalidInputError(f"unknown signal model {self.model!r}")
        if not (1 <= self.K <= self.n) or self.r < 1:
            raise InvalidInputError("need 1 <= K <= n and r >= 1")
        if self.model == "approx-sparse":
            if self.rho is None or not 0 < self.rho < 1:
                raise InvalidInputError("approx-sparse needs rho in (0, 1)")
            if self.K == self.n:
                raise InvalidInputError("approx-sparse needs K < n")

    @property
    def off_support_variance(self):
        """rho^2 K / ((n - K)(1 - rho^2)), zero for exactly sparse models."""
        if self.model != "approx-sparse":
            return 0.0
        rho2 = self.rho**2
        return rho2 * self.K / ((self.n - self.K) * (1 - rho2))


@dataclass(frozen=True, eq=False)
class RowSparseSignal:
    """Planted signal: support, the K x r nonzero rows and the full n x r matrix."""

    support: tuple
    rows: np.ndarray
    dense: np.ndarray

    @property
    def n(self):
        return self.dense.shape[0]

    @property
    def r(self):
        return self.dense.shape[1]


def generate_signal(spec, seed):
    rng = make_rng(seed)
    support = tuple(sorted(int(i) for i in rng.choice(spec.n, size=spec.K, replace=False)))
    if spec.model == "two-pam":
        rows = rng.choice(np.array([-1.0, 1.0]), size=(spec.K, spec.r))
    else:
        rows = rng.standard_normal((spec.K, spec.r))
    if spec.model == "approx-sparse":
        dense = rng.standard_normal((spec.n, spec.r)) * math.sqrt(spec.off_support_variance)
    else:
        dense = np.zeros((spec.n, spec.r))
    dense[list(support)] = rows
    return RowSparseSignal(support, rows, dense)


def noise_variance(m, K, snr_db):
    return (K / m) * 10.0 ** (-snr_db / 10.0)


def generate_noise(m, r, K, snr_db, seed):
    """m x r i.i.d. N(0, (K/m) 10^(-SNR/10)) noise; SNR = +inf gives zeros."""
    if math.isnan(snr_db):
        raise InvalidInputError("snr_db must not be NaN")
    rng = make_rng(seed)
    if math.isinf(snr_db) and snr_db > 0:
        return np.zeros((m, r))
    return rng.standard_normal((m, r)) * math.sqrt(noise_variance(m, K, snr_db))


# --- configuration ---------------------------------------------------------

@dataclass
class ExperimentConfig:
    """One sweep over K, m or SNR.

    ``r`` may be the string ``"K"`` for full-row-rank sweeps. The plain tag
    ``ssmp`` in ``algorithms`` expands to one ``ssmp-L<N>`` entry per value
    in ``L_variants``. ``K`` is the sparsity for m and SNR sweeps; ``snr_db``
    (None means noiseless) applies to K and m sweeps.
    """

    m: int
    n: int
    r: object
    sweep: str
    grid: list
    algorithms: list
    trials: int
    seed: int
    metric: str = "err"
    L_variants: list = field(default_factory=lambda: [2])
    signal_model: str = "gaussian"
    rho: float = None
    epsilon_mode: str = "zero"
    K: int = None
    snr_db: float = None
    fixed_matrix: bool = False

    def __post_init__(self):
        if self.sweep not in ("K", "m", "snr"):
            raise InvalidInputError(f"unknown sweep kind {self.sweep!r}")
        if not self.grid:
            raise InvalidInputError("grid must be nonempty")
        if self.trials < 1:
            raise InvalidInputError("trials must be >= 1")
        if self.metric not in METRICS:
            raise InvalidInputError(f"metric must be one of {METRICS}")
        if self.epsilon_mode not in ("zero", "calibrated"):
            raise InvalidInputError("epsilon_mode must be 'zero' or 'calibrated'")
        if self.signal_model not in SIGNAL_MODELS:
            raise InvalidInputError(f"unknown signal model {self.signal_model!r}")
        if self.sweep != "K" and self.K is None:
            raise InvalidInputError("m and snr sweeps need a fixed K")
        if not (self.r == "K" or (isinstance(self.r, int) and self.r >= 1)):
            raise InvalidInputError("r must be a positive integer or 'K'")
        if not (0 <= int(self.seed) < 2**64):
            raise InvalidInputError("seed must be a 64-bit unsigned integer")
        if any(int(L) < 1 for L in self.L_variants):
            raise InvalidInputError("L_variants must be positive")
        for tag in self.algorithm_tags:
            if not (is_known(tag) or tag in UNAVAILABLE_IDS):
                raise InvalidInputError(f"unknown algorithm {tag!r}")

    @property
    def algorithm_tags(self):
        tags = []
        for tag in self.algorithms:
            if tag == "ssmp":
                tags.extend(f"ssmp-L{int(L)}" for L in self.L_variants)
            else:
                tags.append(tag)
        return list(dict.fromkeys(tags))

    def point(self, grid_value):
        """(m, K, r, snr_db) at one grid point."""
        m, K, snr = self.m, self.K, self.snr_db
        if self.sweep == "K":
            K = int(grid_value)
        elif self.sweep == "m":
            m = int(grid_value)
        else:
            snr = float(grid_value)
        r = K if self.r == "K" else int(self.r)
        return m, K, r, snr

    @classmethod
    def from_dict(cls, d, metric=None):
        d = dict(d)
        present = [k for k in SWEEP_KEYS if k in d]
        if len(present) != 1:
            raise InvalidInputError("config needs exactly one of K_grid, m_grid, snr_grid")
        key = present[0]
        kwargs = {"sweep": SWEEP_KEYS[key], "grid": list(d.pop(key))}
        names = {f for f in cls.__dataclass_fields__} - {"sweep", "grid"}
        unknown = set(d) - names
        if unknown:
            raise InvalidInputError(f"unknown config keys: {sorted(unknown)}")
        if key == "m_grid":
            d.setdefault("m", None)
        missing = {"m", "n", "r", "algorithms", "trials", "seed"} - set(d)
        if missing:
            raise InvalidInputError(f"missing config keys: {sorted(missing)}")
        kwargs.update(d)
        if metric is not None:
            kwargs["metric"] = metric
        try:
            return cls(**kwargs)
        except TypeError as err:
            raise InvalidInputError(str(err)) from err

    @classmethod
    def from_json(cls, text, metric=None):
        try:
            d = json.loads(text)
        except json.JSONDecodeError as err:
            raise InvalidInputError(f"config is not valid JSON: {err}") from err
        if not isinstance(d, dict):
            raise InvalidInputError("config must be a JSON object")
        return cls.from_dict(d, metric)

    def to_dict(self):
        d = asdict(self)
        grid_key = {v: k for k, v in SWEEP_KEYS.items()}[d.pop("sweep")]
        d[grid_key] = d.pop("grid")
        return d


# --- trials ----------------------------------------------------------------

@dataclass(frozen=True)
class TrialRecord:
    grid_point: float
    algorithm: str
    success: bool
    support_success: bool
    squared_error: float
    iterations: int
    trial_seed: int
    error: str = None


@dataclass
class TrialData:
    A: SamplingMatrix
    signal: RowSparseSignal
    W: np.ndarray
    Y: np.ndarray


def draw_trial(cfg, grid_index, trial_index):
    """Regenerate the (A, X, W) of one trial from its seed."""
    m, K, r, snr = cfg.point(cfg.grid[grid_index])
    seed = trial_seed(cfg.seed, grid_index, trial_index)
    rng = make_rng(seed)
    if cfg.fixed_matrix:
        A = generate_sampling_matrix(m, cfg.n, matrix_seed(cfg.seed, grid_index))
    else:
        A = generate_sampling_matrix(m, cfg.n, rng)
    spec = SignalSpec(cfg.n, r, K, cfg.signal_model, cfg.rho)
    signal = generate_signal(spec, rng)
    if snr is None:
        W = np.zeros((m, r))
    else:
        W = generate_noise(m, r, K, snr, rng)
    Y = A.A @ signal.dense + W
    return seed, TrialData(A, signal, W, Y)


def score_estimate(X, X_hat, true_support, est_support):
    sq = float(np.sum((X - X_hat) ** 2))
    support_ok = tuple(est_support) == tuple(true_support)
    exact = support_ok and math.sqrt(sq) <= EXACT_RTOL * float(np.linalg.norm(X))
    return exact, support_ok, sq


def run_trial(cfg, grid_index, trial_index):
    """One trial: every configured algorithm on the same instance."""
    seed, data = draw_trial(cfg, grid_index, trial_index)
    grid_value = cfg.grid[grid_index]
    _, K, _, _ = cfg.point(grid_value)
    X = data.signal.dense
    eps = 0.0
    if cfg.epsilon_mode == "calibrated":
        eps = calibrated_epsilon(data.Y, float(np.linalg.norm(data.W)))
    out = []
    for tag in cfg.algorithm_tags:
        if tag in UNAVAILABLE_IDS:
            out.append(TrialRecord(grid_value, tag, False, False, math.nan, 0, seed, UNAVAILABLE))
            continue
        try:
            res = run_algorithm(tag, data.A, data.Y, K, epsilon=eps,
                                true_support=data.signal.support)
            err = None
        except SsmpError as exc:
            res = getattr(exc, "partial", None)
            err = type(exc).__name__
        except ValueError as exc:
            res, err = None, type(exc).__name__
        if isinstance(res, RecoveryResult):
            X_hat, supp, iters = res.estimate, res.support, res.iterations_run
        elif res is not None:
            X_hat, iters = res, 0
            supp = data.signal.support
        else:
            X_hat, supp, iters = np.zeros_like(X), (), 0
        exact, support_ok, sq = score_estimate(X, X_hat, data.signal.support, supp)
        out.append(TrialRecord(grid_value, tag, exact, support_ok, sq, iters, seed, err))
    return out


def _run_chunk(args):
    cfg, jobs = args
    return [run_trial(cfg, g, t) for g, t in jobs]


@dataclass
class SweepResult:
    config: ExperimentConfig
    records: list
    table: list


def run_sweep(cfg, workers=1, chunk_size=64):
    """Run all trials of a sweep and aggregate them per (grid point, algorithm)."""
    jobs = [(g, t) for g in range(len(cfg.grid)) for t in range(cfg.trials)]
    chunks = [jobs[i:i + chunk_size] for i in range(0, len(jobs), chunk_size)]
    if workers and workers > 1:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            results = list(pool.map(_run_chunk, [(cfg, c) for c in chunks]))
    else:
        results = [_run_chunk((cfg, c)) for c in chunks]
    records = [rec for chunk in results for trial in chunk for rec in trial]
    return SweepResult(cfg, records, aggregate(cfg, records))


def _round6(x):
    return float(f"{x:.6g}")


def aggregate(cfg, records):
    """Average per (grid point, algorithm); exact summation keeps it order-free."""
    groups = {}
    for rec in records:
        groups.setdefault((rec.grid_point, rec.algorithm), []).append(rec)
    table = []
    for (grid, tag), recs in groups.items():
        if any(rec.error == UNAVAILABLE for rec in recs):
            value = None
        elif cfg.metric == "err":
            value = sum(rec.success for rec in recs) / len(recs)
        elif cfg.metric == "esrr":
            value = sum(rec.support_success for rec in recs) / len(recs)
        else:
            _, _, r, _ = cfg.point(grid)
            value = math.fsum(rec.squared_error for rec in recs) / (len(recs) * cfg.n * r)
        table.append({
            "grid": grid, "algorithm": tag, "metric": cfg.metric,
            "value": None if value is None else _round6(value),
            "trials": len(recs), "seed": int(cfg.seed),
        })
    table.sort(key=lambda row: (row["grid"], row["algorithm"]))
    return table


# --- CSV -------------------------------------------------------------------

def _fmt_number(x):
    if x is None:
        return UNAVAILABLE
    if isinstance(x, (int, np.integer)) and not isinstance(x, bool):
        return str(int(x))
    x = float(x)
    if x.is_integer() and abs(x) < 1e15:
        return str(int(x))
    return f"{x:.6g}"


def emit_csv(table):
    """Serialize an aggregated table; identical tables give identical bytes."""
    if not table:
        raise InvalidInputError("cannot emit an empty table")
    rows = sorted(table, key=lambda row: (row["grid"], row["algorithm"]))
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CSV_HEADER)
    for row in rows:
        w.writerow([_fmt_number(row["grid"]), row["algorithm"], row["metric"],
                    _fmt_number(row["value"]), int(row["trials"]), int(row["seed"])])
    return buf.getvalue()


def _parse_number(text):
    if text == UNAVAILABLE:
        return None
    try:
        return int(text)
    except ValueError:
        return float(text)


def parse_csv(text):
    """Inverse of :func:`emit_csv`."""
    reader = csv.reader(io.StringIO(text))
    header = next(reader, None)
    if tuple(header or ()) != CSV_HEADER:
        raise InvalidInputError("unexpected CSV header")
    table = []
    for row in reader:
        if len(row) != len(CSV_HEADER):
            raise InvalidInputError(f"malformed CSV row: {row}")
        grid, tag, metric, value, trials, seed = row
        table.append({
            "grid": _parse_number(grid), "algorithm": tag, "metric": metric,
            "value": _parse_number(value), "trials": int(trials), "seed": int(seed),
        })
    return table


def full_scale(cfg):
    """Same sweep at m=64, n=512 with 5000 trials (m sweeps keep their grid)."""
    d = cfg.to_dict()
    d.update(m=64, n=512, trials=5000)
    return ExperimentConfig.from_dict(d)
