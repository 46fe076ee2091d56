"""Convergence studies, inf-sup sweeps and their CSV / plot-script outputs."""
from __future__ import annotations

import csv
import io
import logging
import math
import os
from concurrent.futures import ThreadPoolExecutor
from dataclasses import asdict, dataclass, field, fields, replace
from pathlib import Path
from typing import Optional, Sequence

import numpy as np

from .analysis import (
    OMEGA_DEFAULT,
    ErrorReport,
    ManufacturedSolution,
    beta_from_system,
    convergence_slope,
    error_norms,
    solve,
)
from .assembly import FormSpec, Variant, assemble_system
from .bounds import stability_bounds
from .linalg import SingularMatrixError
from .spaces import reduce
from .splines import ERROR_QUAD_POINTS, Mesh, make_maximal_space

logger = logging.getLogger(__name__)

NEL_CAP = {"fem": 32768, "iga": 4096}
SWEEP_NEL_MAX = 2048
SWEEP_LOG10_MU = (0.0, 6.0, 25)
OVERSIZED_BETA = 1e2
NEG_INF = "-inf"

CONVERGE_COLUMNS = ("nel", "h", "err_h1", "err_l2", "best_h1", "slope_h1", "slope_l2")
SWEEP_COLUMNS = ("mu", "h", "log_mu", "log_h", "beta", "log_beta_or_sentinel", "flag_neg_inf", "flag_oversized")


def doubling(start: int, stop: int) -> tuple[int, ...]:
    """``start, 2 start, ...`` up to and including ``stop``."""
    out = []
    n = start
    while n <= stop:
        out.append(n)
        n *= 2
    return tuple(out)


@dataclass(frozen=True)
class ExperimentConfig:
    """Everything needed to rerun one experiment.

    ``nel_list`` drives convergence runs and the ``h`` axis of sweeps; when
    empty it defaults to doubling from 4 up to ``nel_max`` (or the method cap).
    ``mu_grid`` is only used by sweeps and defaults to 25 log-spaced values
    in ``[1, 1e6]``.
    """

    method: str = "fem"
    degree: int = 1
    form: str = "standard"
    delta: Optional[float] = None
    penalty_order: Optional[int] = None
    per_element: bool = False
    mu: float = 1000.0
    T: float = 10.0
    omega: float = OMEGA_DEFAULT
    nel_list: tuple = ()
    nel_max: Optional[int] = None
    mu_grid: tuple = ()
    quad_rhs: int = ERROR_QUAD_POINTS
    beta_method: str = "auto"
    out: Optional[str] = None
    plots: bool = False

    def __post_init__(self):
        object.__setattr__(self, "nel_list", tuple(int(n) for n in self.nel_list))
        object.__setattr__(self, "mu_grid", tuple(float(m) for m in self.mu_grid))
        self.validate()

    def validate(self):
        if self.method not in NEL_CAP:
            raise ValueError(f"method must be 'fem' or 'iga', got {self.method!r}")
        if self.method == "fem" and self.degree != 1:
            raise ValueError("fem uses piecewise-linear elements; pass --degree 1 or use --method iga")
        if self.degree < 1:
            raise ValueError(f"degree must be >= 1, got {self.degree}")
        if not self.mu > 0:
            raise ValueError(f"mu must be > 0, got {self.mu}")
        if not self.T > 0:
            raise ValueError(f"T must be > 0, got {self.T}")
        if not self.omega > 0:
            raise ValueError(f"omega must be > 0, got {self.omega}")
        try:
            Variant(self.form)
        except ValueError:
            choices = ", ".join(v.value for v in Variant)
            raise ValueError(f"unknown form {self.form!r}; choose one of {choices}") from None
        if self.form == Variant.PENALTY.value:
            if self.delta is None or not self.delta > 0:
                raise ValueError(f"the penalty form needs delta > 0, got {self.delta}")
        elif self.delta is not None:
            raise ValueError("delta only applies to --form penalty")
        if any(n < 1 for n in self.nel_list):
            raise ValueError("all element counts must be >= 1")
        if self.nel_max is not None and self.nel_max < 1:
            raise ValueError(f"nel_max must be >= 1, got {self.nel_max}")
        if any(not m > 0 for m in self.mu_grid):
            raise ValueError("all mu grid values must be > 0")
        if self.quad_rhs < self.degree + 1:
            raise ValueError(f"quad_rhs must be >= degree + 1 = {self.degree + 1}")
        if not self.nels():
            raise ValueError("element grid is empty")

    def nels(self, cap: int | None = None) -> tuple[int, ...]:
        if self.nel_list:
            return self.nel_list
        top = self.nel_max if self.nel_max is not None else (cap or NEL_CAP[self.method])
        return doubling(4, top)

    def sweep_nels(self) -> tuple[int, ...]:
        return self.nels(cap=SWEEP_NEL_MAX)

    def mus(self) -> tuple[float, ...]:
        if self.mu_grid:
            return self.mu_grid
        lo, hi, n = SWEEP_LOG10_MU
        return tuple(float(m) for m in 10.0 ** np.linspace(lo, hi, n))

    def form_spec(self, mu: float | None = None) -> FormSpec:
        return FormSpec(
            Variant(self.form),
            self.mu if mu is None else mu,
            self.delta,
            self.penalty_order,
            self.per_element,
        )

    def spaces(self, nel: int):
        s = make_maximal_space(Mesh.uniform(self.T, nel), self.degree)
        return reduce(s, "trial"), reduce(s, "test")

    def to_dict(self) -> dict:
        d = asdict(self)
        d["nel_list"] = list(self.nel_list)
        d["mu_grid"] = list(self.mu_grid)
        return d

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        known = {f.name for f in fields(cls)}
        unknown = set(d) - known
        if unknown:
            raise ValueError(f"unknown config keys: {', '.join(sorted(unknown))}")
        return cls(**d)

    def updated(self, **kw) -> "ExperimentConfig":
        return replace(self, **kw)


# convergence -------------------------------------------------------------------


@dataclass(frozen=True)
class ConvergenceRow:
    nel: int
    h: float
    report: Optional[ErrorReport]
    slope_h1: float = math.nan
    slope_l2: float = math.nan
    error: Optional[str] = None

    @property
    def err_h1(self) -> float:
        return self.report.h1_semi if self.report else math.nan

    @property
    def err_l2(self) -> float:
        return self.report.l2 if self.report else math.nan

    @property
    def best_h1(self) -> float:
        return self.report.best_h1 if self.report else math.nan


@dataclass(frozen=True)
class ConvergenceTable:
    rows: tuple
    config: ExperimentConfig
    bounds: dict = field(default_factory=dict)

    def column(self, name: str) -> np.ndarray:
        return np.array([getattr(r, name) for r in self.rows], dtype=float)

    def slopes(self, nel_window: Sequence[int] | None = None) -> tuple[float, float]:
        """H1 and L2 slopes fitted over the rows whose ``nel`` is in the window."""
        rows = [r for r in self.rows if r.report and (nel_window is None or r.nel in nel_window)]
        p1 = [(r.h, r.err_h1) for r in rows]
        p0 = [(r.h, r.err_l2) for r in rows]
        return convergence_slope(p1, None), convergence_slope(p0, None)


def _trailing_slope(points, k: int, window: int = 4) -> float:
    pts = [p for p in points[max(0, k - window + 1): k + 1] if np.all(np.isfinite(p)) and p[1] > 0]
    if len(pts) < 2:
        return math.nan
    return convergence_slope(pts, None)


def run_convergence(config: ExperimentConfig) -> ConvergenceTable:
    """Solve for the manufactured solution at every ``nel``.

    A singular system is recorded in its row and the run continues.  Each
    row's slopes fit the trailing window of (up to) four rows.
    """
    exact = ManufacturedSolution(config.mu, config.omega)
    form = config.form_spec()
    rows = []
    for nel in config.nels():
        trial, test = config.spaces(nel)
        h = trial.mesh.h
        try:
            c = solve(trial, test, form, exact.f, config.quad_rhs)
            rep = error_norms(trial, c, exact)
            rows.append(ConvergenceRow(nel, h, rep))
        except (SingularMatrixError, np.linalg.LinAlgError) as exc:
            logger.warning("nel=%d: %s", nel, exc)
            rows.append(ConvergenceRow(nel, h, None, error=str(exc)))
    p1 = [(r.h, r.err_h1) for r in rows]
    p0 = [(r.h, r.err_l2) for r in rows]
    rows = [
        replace(r, slope_h1=_trailing_slope(p1, k), slope_l2=_trailing_slope(p0, k))
        for k, r in enumerate(rows)
    ]
    return ConvergenceTable(tuple(rows), config, stability_bounds(config.mu, config.T).as_dict())


# inf-sup sweeps ------------------------------------------------------------------


@dataclass(frozen=True)
class SweepCell:
    mu: float
    nel: int
    h: float
    beta: float
    error: Optional[str] = None

    @property
    def neg_inf(self) -> bool:
        return self.beta == 0.0 or not math.isfinite(self.beta)

    @property
    def oversized(self) -> bool:
        return math.isfinite(self.beta) and self.beta > OVERSIZED_BETA

    @property
    def log_beta(self) -> float:
        return -math.inf if self.neg_inf else math.log(self.beta)


@dataclass(frozen=True)
class SweepResult:
    cells: tuple
    meta: dict = field(default_factory=dict)

    def grid(self) -> tuple[np.ndarray, np.ndarray, np.ndarray]:
        """``(mus, hs, beta)`` with ``beta[i, j]`` at ``mus[i]``, ``hs[j]``."""
        mus = sorted({c.mu for c in self.cells})
        hs = sorted({c.h for c in self.cells})
        beta = np.full((len(mus), len(hs)), np.nan)
        for c in self.cells:
            beta[mus.index(c.mu), hs.index(c.h)] = c.beta
        return np.array(mus), np.array(hs), beta


def _thread_count() -> int:
    env = os.environ.get("STLAB_THREADS")
    if env:
        try:
            n = int(env)
        except ValueError:
            raise ValueError(f"STLAB_THREADS must be an integer, got {env!r}") from None
        return max(1, n)
    return os.cpu_count() or 1


def _cell(config: ExperimentConfig, mu: float, nel: int) -> SweepCell:
    trial, test = config.spaces(nel)
    h = trial.mesh.h
    try:
        sys = assemble_system(trial, test, config.form_spec(mu))
        beta = beta_from_system(sys, config.beta_method)
        return SweepCell(mu, nel, h, beta)
    except (np.linalg.LinAlgError, ArithmeticError) as exc:
        logger.warning("cell mu=%g nel=%d failed: %s", mu, nel, exc)
        return SweepCell(mu, nel, h, math.nan, str(exc))


def run_infsup_sweep(config: ExperimentConfig, mus: Sequence[float] | None = None,
                     nels: Sequence[int] | None = None) -> SweepResult:
    """Inf-sup constant on the ``mus x nels`` grid, evaluated concurrently.

    Cells are sorted by ``(mu, nel)`` so the output does not depend on
    completion order.
    """
    mus = tuple(config.mus() if mus is None else mus)
    nels = tuple(config.sweep_nels() if nels is None else nels)
    jobs = [(mu, nel) for mu in mus for nel in nels]
    workers = min(_thread_count(), max(1, len(jobs)))
    if workers == 1:
        cells = [_cell(config, mu, nel) for mu, nel in jobs]
    else:
        with ThreadPoolExecutor(max_workers=workers) as pool:
            cells = list(pool.map(lambda job: _cell(config, *job), jobs))
    cells.sort(key=lambda c: (c.mu, c.nel))
    meta = {"form": config.form_spec().describe(), "T": config.T, "degree": config.degree,
            "method": config.method}
    return SweepResult(tuple(cells), meta)


# output --------------------------------------------------------------------------


def fmt(x) -> str:
    """Exact, locale-independent text form of a number."""
    if isinstance(x, (bool, np.bool_)):
        return "1" if x else "0"
    if isinstance(x, (int, np.integer)):
        return str(int(x))
    x = float(x)
    if math.isnan(x):
        return "nan"
    if math.isinf(x):
        return "inf" if x > 0 else NEG_INF
    return format(x, ".17g")


def convergence_csv(table: ConvergenceTable) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(CONVERGE_COLUMNS)
    for r in table.rows:
        w.writerow([fmt(getattr(r, c)) for c in CONVERGE_COLUMNS])
    return buf.getvalue()


def sweep_csv(result: SweepResult) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(SWEEP_COLUMNS)
    for c in result.cells:
        w.writerow([
            fmt(c.mu), fmt(c.h), fmt(math.log(c.mu)), fmt(math.log(c.h)), fmt(c.beta),
            fmt(c.log_beta), fmt(c.neg_inf), fmt(c.oversized),
        ])
    return buf.getvalue()


def parse_csv(text: str, columns: Sequence[str] | None = None) -> list[dict]:
    """Read a CSV written by this module back into numbers.

    Integer-looking fields of the ``nel`` and ``flag_*`` columns become ints,
    everything else floats (``nan`` and ``-inf`` included).
    """
    reader = csv.reader(io.StringIO(text))
    try:
        header = next(reader)
    except StopIteration:
        raise ValueError("empty CSV") from None
    if columns is not None and tuple(header) != tuple(columns):
        raise ValueError(f"unexpected header {header}, expected {list(columns)}")
    rows = []
    for line in reader:
        if len(line) != len(header):
            raise ValueError(f"row has {len(line)} fields, expected {len(header)}")
        rows.append({
            k: int(v) if k == "nel" or k.startswith("flag_") else float(v)
            for k, v in zip(header, line)
        })
    return rows


def rows_to_csv(rows: list[dict], columns: Sequence[str]) -> str:
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\n")
    w.writerow(columns)
    for r in rows:
        w.writerow([fmt(r[c]) for c in columns])
    return buf.getvalue()


_CONVERGE_PLOT = '''"""Log-log error plot regenerated from {csv_name}."""
import csv
import math

import matplotlib.pyplot as plt

rows = list(csv.DictReader(open({csv_name!r})))
h = [float(r["h"]) for r in rows]
fig, ax = plt.subplots()
for key, label in [("err_h1", "H1 seminorm error"), ("err_l2", "L2 error"), ("best_h1", "best approximation (H1)")]:
    pts = [(x, float(r[key])) for x, r in zip(h, rows) if math.isfinite(float(r[key]))]
    ax.loglog([p[0] for p in pts], [p[1] for p in pts], "o-", label=label)
for x, label in {thresholds!r}:
    ax.axvline(x, color="r", linestyle="--", label=label)
ax.set_xlabel("h")
ax.set_ylabel("error")
ax.set_title({title!r})
ax.legend()
fig.savefig({png_name!r}, dpi=150)
'''

_SWEEP_PLOT = '''"""Heat map of log(beta) over (log mu, log h) regenerated from {csv_name}."""
import csv
import math

import matplotlib.pyplot as plt
import numpy as np

rows = list(csv.DictReader(open({csv_name!r})))
lmu = sorted({{float(r["log_mu"]) for r in rows}})
lh = sorted({{float(r["log_h"]) for r in rows}})
z = np.full((len(lh), len(lmu)), np.nan)
for r in rows:
    v = float(r["log_beta_or_sentinel"])
    if r["flag_oversized"] == "1":
        continue
    z[lh.index(float(r["log_h"])), lmu.index(float(r["log_mu"]))] = v
finite = z[np.isfinite(z)]
floor = finite.min() - 1.0 if finite.size else -1.0
z[np.isneginf(z)] = floor
fig, ax = plt.subplots()
mesh = ax.pcolormesh(lmu, lh, z, shading="nearest")
fig.colorbar(mesh, label="log(beta)")
mu = np.exp(np.linspace(min(lmu), max(lmu), 200))
for c, label in {lines!r}:
    ax.plot(np.log(mu), np.log(np.sqrt(c / mu)), "r-", label=label)
ax.set_xlim(min(lmu), max(lmu))
ax.set_ylim(min(lh), max(lh))
ax.set_xlabel("log(mu)")
ax.set_ylabel("log(h)")
ax.set_title({title!r})
ax.legend()
fig.savefig({png_name!r}, dpi=150)
'''


def _write(path: Path, text: str):
    try:
        path.parent.mkdir(parents=True, exist_ok=True)
        with open(path, "w", newline="") as fh:
            fh.write(text)
    except OSError as exc:
        raise OSError(f"cannot write {path}: {exc.strerror or exc}") from exc


def emit_outputs(result, csv_path, plot_path=None) -> list[Path]:
    """Write the CSV (and optionally a matplotlib script) for a result.

    Returns the paths written.
    """
    csv_path = Path(csv_path)
    written = [csv_path]
    if isinstance(result, ConvergenceTable):
        _write(csv_path, convergence_csv(result))
        if plot_path is not None:
            b = result.bounds
            if result.config.method == "fem":
                thr = [(b["fem_theory"], "sufficient bound"), (b["fem_fd"], "sqrt(12/mu)")]
            else:
                thr = [(b["iga_zank"], "sufficient bound"), (b["iga_garding"], "Garding bound"),
                       (b["iga_empirical"], "sqrt(9/mu)")]
            title = f"{result.config.method} p={result.config.degree} {result.config.form_spec().describe()}"
            text = _CONVERGE_PLOT.format(
                csv_name=csv_path.name, png_name=csv_path.with_suffix(".png").name,
                thresholds=thr, title=title,
            )
            _write(Path(plot_path), text)
            written.append(Path(plot_path))
    elif isinstance(result, SweepResult):
        _write(csv_path, sweep_csv(result))
        if plot_path is not None:
            title = f"{result.meta.get('method', '')} {result.meta.get('form', '')}"
            text = _SWEEP_PLOT.format(
                csv_name=csv_path.name, png_name=csv_path.with_suffix(".png").name,
                lines=[(12.0, "sqrt(12/mu)"), (9.0, "sqrt(9/mu)")], title=title,
            )
            _write(Path(plot_path), text)
            written.append(Path(plot_path))
    else:
        raise TypeError(f"cannot emit {type(result).__name__}")
    return written
