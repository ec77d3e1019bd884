"""Monte-Carlo checks of the limit behaviour of functionals of the random
complex: normality, variance scaling, covariances, the Poincare bound,
stabilisation of the add-one-point cost and the degree law."""
from __future__ import annotations

import io
import json
import math
import re
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import Any, Callable, Sequence

import numpy as np
from scipy import stats

from .complex import SimplicialComplex, build_complex, difference_operator, inserted_degree
from .errors import CapabilityError, RejectedInputError, ReplicationError
from .functionals import FunctionalDescriptor, parse_functional
from .grains import Grain, unit_ball_volume
from .kernels import ConnectionKernel, kernel_from_json, pair_integral
from .pointprocess import (
    MarkSampler,
    PointConfiguration,
    Window,
    draw_extra_mark,
    replication_rng,
    restrict,
    sample_poisson,
)
from .svg import diagnostics_svg

RANGE_FACTOR = 10.0  # degree experiments want side >= RANGE_FACTOR * kernel range


@dataclass(frozen=True, eq=False)
class Model:
    """Intensity, dimension, kernel and mark law of the marked model."""

    dim: int
    gamma: float
    kernel: ConnectionKernel
    marks: MarkSampler = field(default_factory=lambda: MarkSampler("constant"))

    def window(self, side: float) -> Window:
        return Window(self.dim, side)

    def sample(self, side: float, master_seed: int, replication: int) -> PointConfiguration:
        return sample_poisson(self.window(side), self.gamma, self.marks, master_seed, replication)

    def to_json(self) -> dict:
        return {"dim": self.dim, "gamma": self.gamma, "kernel": self.kernel.describe(),
                "marks": self.marks.to_json()}

    @classmethod
    def from_json(cls, obj: dict) -> "Model":
        return cls(int(obj["dim"]), float(obj["gamma"]), kernel_from_json(obj["kernel"]),
                   MarkSampler.from_json(obj.get("marks")))


def _as_functional(f) -> FunctionalDescriptor | Callable[[SimplicialComplex], float]:
    return parse_functional(f) if isinstance(f, str) else f


def _label(f) -> str:
    return str(f) if isinstance(f, FunctionalDescriptor) else getattr(f, "__name__", repr(f))


def _map_replications(fn: Callable[[int], Any], reps: int, threads: int) -> list:
    """fn(0..reps-1) in replication order; failures carry their index."""

    def guarded(rep):
        try:
            return fn(rep)
        except ReplicationError:
            raise
        except Exception as exc:
            raise ReplicationError(rep, exc) from exc

    if threads <= 1:
        return [guarded(r) for r in range(reps)]
    with ThreadPoolExecutor(max_workers=threads) as pool:
        return list(pool.map(guarded, range(reps)))


def variance_stderr(x: np.ndarray) -> float:
    """Standard error of the unbiased sample variance."""
    n = len(x)
    if n < 4:
        return math.nan
    c = x - x.mean()
    var = float(c @ c) / (n - 1)
    m4 = float(np.mean(c**4))
    return math.sqrt(max(m4 - var * var * (n - 3) / (n - 1), 0.0) / n)


def relative_change(prev: float, last: float) -> float:
    if prev == last:
        return 0.0
    if prev == 0.0:
        return math.inf
    return abs(last - prev) / abs(prev)


# ---------------------------------------------------------------------------
# normality


@dataclass(frozen=True)
class KSResult:
    statistic: float
    pvalue: float
    degenerate: bool
    n: int


def ks_normality_test(sample: Sequence[float]) -> KSResult:
    """One-sample Kolmogorov-Smirnov test of the standardised sample against
    N(0, 1), with the asymptotic p-value."""
    x = np.asarray(sample, dtype=float)
    if len(x) < 20:
        raise RejectedInputError("normality test needs at least 20 observations")
    sd = x.std(ddof=1)
    if not sd > 0:
        return KSResult(math.nan, math.nan, True, len(x))
    res = stats.kstest((x - x.mean()) / sd, "norm", method="asymp")
    return KSResult(float(res.statistic), float(res.pvalue), False, len(x))


# ---------------------------------------------------------------------------
# mixing parameter


@dataclass(frozen=True)
class MixingEstimate:
    value: float
    stderr: float
    method: str


def _analytic_mixing(kernel: ConnectionKernel, gamma: float, d: int, sampler: MarkSampler, mark) -> float | None:
    base = pair_integral(kernel, d)
    if base is not None:
        return gamma * base
    if kernel.name != "indicator-grain-intersection" or not isinstance(mark, Grain):
        return None
    p = sampler.params
    if mark.kind == "ball":
        ra, w = mark.radius, unit_ball_volume(d)
        if sampler.name == "fixed-ball":
            return gamma * w * (ra + p["radius"]) ** d
        if sampler.name == "uniform-radius":
            lo, hi = p["low"], p["high"]
            if hi == lo:
                return gamma * w * (ra + lo) ** d
            # E[(ra + R)^d] for R ~ U(lo, hi)
            return gamma * w * ((ra + hi) ** (d + 1) - (ra + lo) ** (d + 1)) / ((d + 1) * (hi - lo))
    elif sampler.name == "uniform-box":
        lo = np.broadcast_to(np.asarray(p["low"], float), (d,))
        hi = np.broadcast_to(np.asarray(p["high"], float), (d,))
        # boxes meet iff every axis gap is below the half-width sum
        return gamma * float(np.prod(2.0 * (np.asarray(mark.half_widths) + (lo + hi) / 2)))
    return None


def mixing_parameter(
    kernel: ConnectionKernel,
    gamma: float,
    d: int,
    mark_sampler: MarkSampler | None = None,
    mark=None,
    mc_samples: int = 20000,
    seed: int = 0,
) -> MixingEstimate:
    """Expected edge degree pi(a) of a point with mark ``a`` inserted into the
    stationary model: gamma times the integral of phi_1((0, a), (y, B)) over y
    and B ~ marks.

    Closed forms are used where known; otherwise a Monte-Carlo integral over
    the kernel's truncation box, with its standard error.
    """
    sampler = mark_sampler or MarkSampler("constant")
    if gamma == 0:
        return MixingEstimate(0.0, 0.0, "analytic")
    exact = _analytic_mixing(kernel, gamma, d, sampler, mark)
    if exact is not None:
        return MixingEstimate(float(exact), 0.0, "analytic")
    rng = replication_rng(seed, 0, stream=11)
    others = sampler.draw(rng, mc_samples, d)
    if kernel.cutoff is None:
        raise CapabilityError(f"kernel {kernel.name!r} has neither a closed form nor a truncation radius")
    reach = float(kernel.cutoff([mark] + list(others)))
    if reach <= 0:
        return MixingEstimate(0.0, 0.0, "analytic")
    y = rng.uniform(-reach, reach, size=(mc_samples, d))
    x = np.zeros((mc_samples, 2, d))
    x[:, 1, :] = y
    phi = kernel.evaluate(1, x, [(mark, b) for b in others])
    box = (2 * reach) ** d
    return MixingEstimate(
        gamma * box * float(phi.mean()),
        gamma * box * float(phi.std(ddof=1)) / math.sqrt(mc_samples),
        "monte-carlo",
    )


# ---------------------------------------------------------------------------
# degree law


@dataclass
class DegreeReport:
    degrees: np.ndarray
    test: str
    statistic: float
    pvalue: float
    dof: int
    passed: bool
    significance: float
    pi: float | None
    reference: np.ndarray | None
    warnings: list[str]

    def histogram(self) -> dict[int, int]:
        vals, counts = np.unique(self.degrees, return_counts=True)
        return {int(v): int(c) for v, c in zip(vals, counts)}

    def to_json(self) -> dict:
        return {"test": self.test, "statistic": self.statistic, "pvalue": self.pvalue, "dof": self.dof,
                "passed": self.passed, "significance": self.significance, "pi": self.pi,
                "histogram": {str(k): v for k, v in self.histogram().items()},
                "mean_degree": float(self.degrees.mean()) if len(self.degrees) else math.nan,
                "warnings": list(self.warnings)}


def _merge_bins(expected: np.ndarray, minimum: float) -> list[int]:
    """Left boundaries of consecutive bins whose expected counts reach
    ``minimum``; a short tail is folded into the last bin."""
    starts, acc = [0], 0.0
    for k, e in enumerate(expected):
        acc += e
        if acc >= minimum and k + 1 < len(expected):
            starts.append(k + 1)
            acc = 0.0
    if len(starts) > 1 and expected[starts[-1]:].sum() < minimum:
        starts.pop()
    return starts


def _binned(values: np.ndarray, starts: list[int]) -> np.ndarray:
    idx = np.searchsorted(np.asarray(starts), values, side="right") - 1
    return np.bincount(idx, minlength=len(starts))


def _single_mark(sampler: MarkSampler) -> bool:
    if sampler.name in ("constant", "fixed-ball"):
        return True
    if sampler.name == "uniform-radius":
        return sampler.params["low"] == sampler.params["high"]
    if sampler.name == "categorical":
        return len(set(map(repr, sampler.params["values"]))) == 1
    return False


def degree_distribution_experiment(
    model: Model,
    replications: int,
    side: float,
    *,
    master_seed: int = 0,
    significance: float = 0.01,
    threads: int = 1,
) -> DegreeReport:
    """Edge degree of a point inserted at the origin, over independent
    replications, compared with its Poisson (single mark) or mixed-Poisson
    (random mark) law."""
    kernel, d = model.kernel, model.dim

    def one(rep):
        cfg = model.sample(side, master_seed, rep)
        mark = draw_extra_mark(cfg, model.marks)
        extra = cfg.make_point((0.0,) * d, mark)
        deg = inserted_degree(cfg, kernel, extra)
        reach = kernel.cutoff(cfg.marks + (mark,)) if kernel.cutoff is not None else None
        return deg, reach

    out = _map_replications(one, replications, threads)
    degrees = np.array([o[0] for o in out], dtype=np.int64)
    warnings = []
    reaches = [o[1] for o in out if o[1] is not None]
    if reaches and side < RANGE_FACTOR * max(reaches):
        warnings.append(f"window side {side} is below {RANGE_FACTOR:g} x interaction range "
                        f"{max(reaches):.3g}; edge effects bias the degree law")

    if _single_mark(model.marks):
        mark = model.marks.draw(replication_rng(master_seed, 0), 1, d)[0]
        pi = mixing_parameter(kernel, model.gamma, d, model.marks, mark, seed=master_seed).value
        if pi == 0.0:
            ok = bool(np.all(degrees == 0))
            return DegreeReport(degrees, "degenerate", 0.0, 1.0 if ok else 0.0, 0, ok, significance, pi, None, warnings)
        kmax = int(max(degrees.max(), stats.poisson.ppf(1 - 1e-12, pi))) + 1
        expected = replications * stats.poisson.pmf(np.arange(kmax + 1), pi)
        expected[-1] += replications * stats.poisson.sf(kmax, pi)
        starts = _merge_bins(expected, 5.0)
        exp_b = np.add.reduceat(expected, starts)
        obs_b = _binned(np.minimum(degrees, kmax), starts)
        if len(starts) < 2:
            return DegreeReport(degrees, "degenerate", 0.0, 1.0, 0, True, significance, pi, None, warnings)
        chi = stats.chisquare(obs_b, exp_b * obs_b.sum() / exp_b.sum())
        p = float(chi.pvalue)
        return DegreeReport(degrees, "chi-square", float(chi.statistic), p, len(starts) - 1,
                            p >= significance, significance, pi, None, warnings)

    # random marks: compare against pi(V) then Poisson drawn directly
    rng = replication_rng(master_seed, replications, stream=7)
    marks = model.marks.draw(rng, replications, d)
    pis = np.array([_analytic_mixing(kernel, model.gamma, d, model.marks, m) for m in marks], dtype=object)
    if any(v is None for v in pis):
        raise CapabilityError("mixed-Poisson reference needs a closed-form mixing parameter")
    reference = rng.poisson(pis.astype(float))
    pooled = np.concatenate([degrees, reference])
    kmax = int(pooled.max())
    counts = np.bincount(pooled, minlength=kmax + 1).astype(float)
    starts = _merge_bins(counts, 10.0)
    if len(starts) < 2:
        return DegreeReport(degrees, "degenerate", 0.0, 1.0, 0, True, significance, None, reference, warnings)
    table = np.vstack([_binned(degrees, starts), _binned(reference, starts)])
    chi, p, dof, _ = stats.chi2_contingency(table, correction=False)
    return DegreeReport(degrees, "two-sample chi-square", float(chi), float(p), int(dof),
                        float(p) >= significance, significance, None, reference, warnings)


# ---------------------------------------------------------------------------
# replication engine for window-size experiments


@dataclass
class ExperimentConfig:
    """Model, functionals, increasing window sides and replication count.

    With ``nested`` (default) each replication samples the largest window once
    and restricts it to the centred smaller windows, which is exact in law for
    every side and couples the sides through common randomness.
    """

    model: Model
    functionals: list
    sides: list[float]
    replications: int
    master_seed: int = 0
    significance: float = 0.01
    variance_tolerance: float = 0.15
    threads: int = 1
    nested: bool = True

    def __post_init__(self):
        self.sides = [float(s) for s in self.sides]
        if not self.sides or any(s <= 0 for s in self.sides):
            raise RejectedInputError("window sides must be positive")
        if any(b <= a for a, b in zip(self.sides, self.sides[1:])):
            raise RejectedInputError(f"window sides must be strictly increasing, got {self.sides}")
        if self.replications < 2:
            raise RejectedInputError("need at least 2 replications")
        if not self.functionals:
            raise RejectedInputError("need at least one functional")
        self.functionals = [_as_functional(f) for f in self.functionals]

    def to_json(self) -> dict:
        return {
            "model": self.model.to_json(),
            "functionals": [_label(f) for f in self.functionals],
            "sides": self.sides,
            "replications": self.replications,
            "master_seed": self.master_seed,
            "significance": self.significance,
            "variance_tolerance": self.variance_tolerance,
            "nested": self.nested,
        }


@dataclass(frozen=True)
class SideStats:
    side: float
    functional: str
    n: int
    mean: float
    var: float
    var_over_volume: float
    var_over_volume_se: float
    ks: KSResult | None

    @property
    def degenerate(self) -> bool:
        return self.var == 0.0


def _evaluate_sides(config: ExperimentConfig, rep: int) -> np.ndarray:
    model = config.model
    out = np.empty((len(config.sides), len(config.functionals)))
    big = model.sample(config.sides[-1], config.master_seed, rep) if config.nested else None
    for i, side in enumerate(config.sides):
        if big is None:
            # independent designs use a separate replication index per side
            cfg = model.sample(side, config.master_seed, rep * len(config.sides) + i)
        elif side == config.sides[-1]:
            cfg = big
        else:
            cfg = restrict(big, model.window(side))
        cx = build_complex(cfg, model.kernel)
        cx.check_closed()
        out[i] = [f(cx) for f in config.functionals]
    return out


@dataclass
class ExperimentReport:
    config: ExperimentConfig
    values: np.ndarray  # (sides, functionals, replications)
    stats: list[SideStats]
    covariance: np.ndarray  # (sides, functionals, functionals), divided by |W|
    runtime: dict

    @property
    def labels(self) -> list[str]:
        return [_label(f) for f in self.config.functionals]

    def stat(self, side: float, functional: str) -> SideStats:
        for s in self.stats:
            if s.side == float(side) and s.functional == functional:
                return s
        raise KeyError((side, functional))

    def variance_change(self, functional: str) -> float:
        """Relative change of Var/|W| between the last two sides."""
        if len(self.config.sides) < 2:
            return math.nan
        a = self.stat(self.config.sides[-2], functional).var_over_volume
        b = self.stat(self.config.sides[-1], functional).var_over_volume
        return relative_change(a, b)

    def standardized(self, side: float, functional: str) -> np.ndarray:
        i = self.config.sides.index(float(side))
        x = self.values[i, self.labels.index(functional)]
        sd = x.std(ddof=1)
        return (x - x.mean()) / sd if sd > 0 else np.zeros_like(x)

    # outputs --------------------------------------------------------------

    def values_csv(self) -> str:
        buf = io.StringIO()
        buf.write("side,rep,functional,value\n")
        for i, side in enumerate(self.config.sides):
            for r in range(self.values.shape[2]):
                for k, lab in enumerate(self.labels):
                    buf.write(f"{side!r},{r},{lab},{self.values[i, k, r]!r}\n")
        return buf.getvalue()

    def summary_csv(self) -> str:
        buf = io.StringIO()
        buf.write("side,functional,mean,var,varOverVolume,varOverVolume_se,ks_stat,ks_p,degenerate\n")
        for s in self.stats:
            ks_stat = s.ks.statistic if s.ks and not s.ks.degenerate else math.nan
            ks_p = s.ks.pvalue if s.ks and not s.ks.degenerate else math.nan
            buf.write(f"{s.side!r},{s.functional},{s.mean!r},{s.var!r},{s.var_over_volume!r},"
                      f"{s.var_over_volume_se!r},{ks_stat!r},{ks_p!r},{int(s.degenerate)}\n")
        return buf.getvalue()

    def covariance_json(self) -> dict:
        return {"functionals": self.labels,
                "sides": self.config.sides,
                "cov_over_volume": [m.tolist() for m in self.covariance]}

    def to_json(self, runtime: bool = True) -> dict:
        out = {
            "config": self.config.to_json(),
            "summary": [
                {"side": s.side, "functional": s.functional, "mean": s.mean, "var": s.var,
                 "varOverVolume": s.var_over_volume, "varOverVolume_se": s.var_over_volume_se,
                 "degenerate": s.degenerate,
                 "ks_stat": None if s.ks is None or s.ks.degenerate else s.ks.statistic,
                 "ks_p": None if s.ks is None or s.ks.degenerate else s.ks.pvalue}
                for s in self.stats
            ],
            "variance_change": {lab: self.variance_change(lab) for lab in self.labels},
            "thresholds": {"significance": self.config.significance,
                           "variance_tolerance": self.config.variance_tolerance},
        }
        if runtime:
            out["runtime"] = self.runtime
        return out

    def files(self, svg: bool = True) -> dict[str, str]:
        """Output file name -> contents; timings are left out so repeated runs
        give identical files."""
        out = {
            "values.csv": self.values_csv(),
            "summary.csv": self.summary_csv(),
            "covariance.json": json.dumps(self.covariance_json(), indent=1, sort_keys=True),
            "report.json": json.dumps(_finite(self.to_json(runtime=False)), indent=1, sort_keys=True),
        }
        if svg:
            for i, side in enumerate(self.config.sides):
                for k, lab in enumerate(self.labels):
                    name = f"diag_{_slug(lab)}_side{side:g}.svg"
                    out[name] = diagnostics_svg(self.values[i, k], f"{lab}, side {side:g}")
        return out

    def write(self, out_dir, svg: bool = True) -> list[Path]:
        return write_files(out_dir, self.files(svg))


def _slug(text: str) -> str:
    return re.sub(r"[^A-Za-z0-9]+", "-", text).strip("-")


def _finite(obj):
    """Replace non-finite floats by None so the JSON stays standard."""
    if isinstance(obj, float):
        return obj if math.isfinite(obj) else None
    if isinstance(obj, dict):
        return {k: _finite(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_finite(v) for v in obj]
    return obj


def write_files(out_dir, files: dict[str, str]) -> list[Path]:
    """Write all files, each via a temporary name, only after every content
    string exists."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    written = []
    for name, text in files.items():
        tmp = out / (name + ".tmp")
        tmp.write_text(text)
        tmp.replace(out / name)
        written.append(out / name)
    return written


def run_clt_experiment(config: ExperimentConfig) -> ExperimentReport:
    """Evaluate every functional on every window side for each replication
    and summarise: mean, Var/|W| (with standard error), KS normality of the
    standardised sample, and the covariance matrix over |W|."""
    t0 = time.perf_counter()
    per_rep = _map_replications(lambda r: _evaluate_sides(config, r), config.replications, config.threads)
    values = np.stack(per_rep, axis=-1)  # (sides, functionals, reps)
    labels = [_label(f) for f in config.functionals]
    summaries = []
    covs = []
    for i, side in enumerate(config.sides):
        vol = side**config.model.dim
        for k, lab in enumerate(labels):
            x = values[i, k]
            var = float(x.var(ddof=1))
            ks = ks_normality_test(x) if len(x) >= 20 else None
            summaries.append(SideStats(side, lab, len(x), float(x.mean()), var, var / vol,
                                       variance_stderr(x) / vol, ks))
        covs.append(np.atleast_2d(np.cov(values[i], ddof=1)) / vol)
    runtime = {"seconds": time.perf_counter() - t0, "threads": config.threads}
    return ExperimentReport(config, values, summaries, np.array(covs), runtime)


@dataclass
class CovarianceReport:
    experiment: ExperimentReport
    min_eigenvalues: list[float]
    psd: list[bool]
    relative_change: np.ndarray  # per entry, last two sides
    tolerance: float

    @property
    def stable(self) -> bool:
        return bool(np.all(self.relative_change <= self.tolerance))

    @property
    def passed(self) -> bool:
        return all(self.psd) and self.stable

    def to_json(self) -> dict:
        return _finite({
            **self.experiment.covariance_json(),
            "min_eigenvalues": self.min_eigenvalues,
            "psd": self.psd,
            "relative_change": self.relative_change.tolist(),
            "tolerance": self.tolerance,
            "stable": self.stable,
        })


def run_covariance_experiment(config: ExperimentConfig) -> CovarianceReport:
    """Covariance matrix of the functional vector over |W| per side, with a
    positive semi-definiteness check (min eigenvalue >= -1e-9 trace) and the
    per-entry relative change over the last doubling."""
    if len(config.functionals) < 2:
        raise RejectedInputError("covariance experiments need at least two functionals")
    rep = run_clt_experiment(config)
    mins, psd = [], []
    for m in rep.covariance:
        ev = np.linalg.eigvalsh(m)
        mins.append(float(ev.min()))
        psd.append(bool(ev.min() >= -1e-9 * float(np.trace(m))))
    if len(config.sides) >= 2:
        a, b = rep.covariance[-2], rep.covariance[-1]
        change = np.vectorize(relative_change)(a, b).astype(float)
    else:
        change = np.zeros_like(rep.covariance[-1])
    return CovarianceReport(rep, mins, psd, change, config.variance_tolerance)


# ---------------------------------------------------------------------------
# Poincare inequality


@dataclass(frozen=True)
class PoincareResult:
    lhs: float
    lhs_se: float
    rhs: float
    rhs_se: float

    @property
    def combined_se(self) -> float:
        return math.hypot(self.lhs_se, self.rhs_se)

    @property
    def margin(self) -> float:
        """rhs + 2 combined standard errors - lhs; non-negative means pass."""
        return self.rhs + 2 * self.combined_se - self.lhs

    @property
    def passed(self) -> bool:
        return self.margin >= 0

    def agrees(self, k: float = 3.0) -> bool:
        """|lhs - rhs| within k combined standard errors."""
        return abs(self.lhs - self.rhs) <= k * self.combined_se

    def to_json(self) -> dict:
        return {"lhs": self.lhs, "lhs_se": self.lhs_se, "rhs": self.rhs, "rhs_se": self.rhs_se,
                "margin": self.margin, "passed": self.passed}


def poincare_check(
    model: Model,
    functional,
    side: float,
    reps_outer: int,
    reps_inner: int,
    *,
    master_seed: int = 0,
    threads: int = 1,
) -> PoincareResult:
    """Compare Var f(complex on W) with gamma |W| E[(cost of adding (x, V))^2],
    x uniform in W, V from the mark law, on fresh configurations."""
    f = _as_functional(functional)
    window = model.window(side)

    def outer(rep):
        cx = build_complex(model.sample(side, master_seed, rep), model.kernel)
        cx.check_closed()
        return f(cx)

    def inner(k):
        rep = reps_outer + k
        cfg = model.sample(side, master_seed, rep)
        x = window.lower + side * replication_rng(master_seed, rep, stream=2).random(model.dim)
        extra = cfg.make_point(x, draw_extra_mark(cfg, model.marks))
        return difference_operator(f, cfg, model.kernel, extra)

    lhs_x = np.array(_map_replications(outer, reps_outer, threads), dtype=float)
    lam = np.array(_map_replications(inner, reps_inner, threads), dtype=float)
    scale = model.gamma * window.volume()
    sq = lam**2
    return PoincareResult(
        float(lhs_x.var(ddof=1)),
        variance_stderr(lhs_x),
        scale * float(sq.mean()),
        scale * float(sq.std(ddof=1)) / math.sqrt(len(sq)),
    )


# ---------------------------------------------------------------------------
# stabilisation


@dataclass
class StabilizationTable:
    sides: list[float]
    values: np.ndarray  # (replications, sides)
    threshold: float

    @property
    def fractions(self) -> list[float]:
        v = self.values
        return [float(np.mean(v[:, k] == v[:, k + 1])) for k in range(v.shape[1] - 1)]

    def to_json(self) -> dict:
        return {"sides": self.sides, "fractions": self.fractions, "threshold": self.threshold,
                "final_passed": bool(self.fractions and self.fractions[-1] >= self.threshold)}


def stabilization_probe(
    model: Model,
    functional,
    sides: Sequence[float],
    reps: int,
    *,
    master_seed: int = 0,
    threshold: float = 0.95,
    threads: int = 1,
) -> StabilizationTable:
    """Cost of inserting (0, V) into nested centred windows of one sample.

    The inserted point (id, seed, mark) is created once from the largest
    configuration and reused for every window.
    """
    sides = [float(s) for s in sides]
    if any(b <= a for a, b in zip(sides, sides[1:])):
        raise RejectedInputError("sides must be strictly increasing")
    f = _as_functional(functional)

    def one(rep):
        big = model.sample(sides[-1], master_seed, rep)
        extra = big.make_point((0.0,) * model.dim, draw_extra_mark(big, model.marks))
        return [difference_operator(f, restrict(big, model.window(s)), model.kernel, extra) for s in sides]

    values = np.array(_map_replications(one, reps, threads), dtype=float).reshape(reps, len(sides))
    return StabilizationTable(sides, values, threshold)
