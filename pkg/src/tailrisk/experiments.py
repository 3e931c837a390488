"""Reproduction tables, figure curves and ad-hoc evaluations.

An :class:`ExperimentConfig` names one Sarmanov model, a grid of levels and
a list of measures.  :func:`run_experiment` simulates the model once and
evaluates every (measure, p) pair against the first- and second-order
approximations.  Tables and figures are fixed collections of such configs.
"""

from __future__ import annotations

import csv
import io
import json
import math
import time
from dataclasses import dataclass, field
from importlib import resources

import jsonschema
import numpy as np

from . import asymptotics
from .errors import DomainError
from .kernels import KernelSpec
from .marginals import AbsStudentT, Burr, Frechet, Pareto, Weiss
from .montecarlo import Simulation
from .sarmanov import SarmanovModel

__all__ = [
    "DEFAULT_SAMPLES",
    "DEFAULT_SEED",
    "ExperimentConfig",
    "ResultRow",
    "ExperimentResult",
    "TableSpec",
    "FigureSpec",
    "TABLES",
    "FIGURES",
    "load_config",
    "validate_config",
    "run_experiment",
    "run_table",
    "run_figure",
    "evaluate_config",
    "table_columns",
    "format_csv",
    "format_json",
]

DEFAULT_SAMPLES = 10**7
DEFAULT_SEED = 20240101
FORMATS = ("csv", "json")
DIV_MEASURES = tuple("D_" + m for m in ("VaR", "E", "CTE", "CE"))


@dataclass(frozen=True)
class ExperimentConfig:
    model: dict
    p_grid: tuple
    measures: tuple
    samples: int = DEFAULT_SAMPLES
    seed: int = DEFAULT_SEED
    workers: int | None = None
    split_sample: bool = False
    component: int = 0
    variant: str | None = None
    output_path: str | None = None
    output_format: str = "csv"

    def __post_init__(self):
        object.__setattr__(self, "p_grid", tuple(float(p) for p in self.p_grid))
        object.__setattr__(self, "measures", tuple(self.measures))
        ps = self.p_grid
        if not ps:
            raise DomainError("p_grid is empty")
        if any(not 0 < p < 1 for p in ps):
            raise DomainError("p_grid values must lie in (0, 1)")
        if any(b <= a for a, b in zip(ps, ps[1:])):
            raise DomainError("p_grid must be strictly increasing")
        if self.samples < 10**4:
            raise DomainError("samples must be at least 10^4")
        for m in self.measures:
            if m not in asymptotics.MEASURES and m not in DIV_MEASURES:
                raise DomainError(f"unknown measure {m!r}")
        if self.variant is not None and self.variant not in asymptotics.CLOSED_FORMS:
            raise DomainError(f"unknown variant {self.variant!r}")
        if self.output_format not in FORMATS:
            raise DomainError(f"output format must be one of {FORMATS}")

    def build_model(self) -> SarmanovModel:
        return SarmanovModel.from_config(self.model)

    def to_dict(self) -> dict:
        return {
            "model": self.model,
            "p_grid": list(self.p_grid),
            "measures": list(self.measures),
            "component": self.component,
            "variant": self.variant,
            "mc": {
                "samples": self.samples,
                "seed": self.seed,
                "workers": self.workers,
                "split_sample": self.split_sample,
            },
            "output": {"path": self.output_path, "format": self.output_format},
        }

    @classmethod
    def from_dict(cls, d: dict) -> "ExperimentConfig":
        validate_config(d)
        mc = d.get("mc", {})
        out = d.get("output", {})
        return cls(
            model=d["model"],
            p_grid=d["p_grid"],
            measures=d["measures"],
            samples=int(mc.get("samples", DEFAULT_SAMPLES)),
            seed=int(mc.get("seed", DEFAULT_SEED)),
            workers=mc.get("workers"),
            split_sample=bool(mc.get("split_sample", False)),
            component=int(d.get("component", 0)),
            variant=d.get("variant"),
            output_path=out.get("path"),
            output_format=out.get("format", "csv"),
        )

    def replace(self, **changes) -> "ExperimentConfig":
        d = {k: getattr(self, k) for k in self.__dataclass_fields__}
        d.update({k: v for k, v in changes.items() if v is not None})
        return ExperimentConfig(**d)


def _schema() -> dict:
    text = resources.files("tailrisk").joinpath("experiment_config.schema.json").read_text()
    return json.loads(text)


def validate_config(d: dict) -> None:
    """Check a config document against the JSON schema."""
    try:
        jsonschema.validate(d, _schema())
    except jsonschema.ValidationError as exc:
        where = "/".join(str(x) for x in exc.absolute_path) or "<root>"
        raise DomainError(f"invalid config at {where}: {exc.message}") from None


class ConfigSyntaxError(DomainError):
    """Malformed JSON; carries the line and column."""

    def __init__(self, path, exc: json.JSONDecodeError):
        super().__init__(f"{path}: line {exc.lineno}, column {exc.colno}: {exc.msg}")
        self.lineno = exc.lineno
        self.colno = exc.colno


def load_config(path) -> ExperimentConfig:
    with open(path, encoding="utf-8") as fh:
        text = fh.read()
    try:
        d = json.loads(text)
    except json.JSONDecodeError as exc:
        raise ConfigSyntaxError(path, exc) from None
    return ExperimentConfig.from_dict(d)


# -- evaluation ------------------------------------------------------------------


@dataclass(frozen=True)
class ResultRow:
    measure: str
    p: float
    mc_value: float
    mc_stderr: float
    first_order: float
    second_order: float
    second_theorem: float
    exceedances: int = 0
    terms: dict = field(default_factory=dict, compare=False)

    @property
    def ratio_first(self) -> float:
        return self.first_order / self.mc_value if self.mc_value != 0 else math.nan

    @property
    def ratio_second(self) -> float:
        return self.second_order / self.mc_value if self.mc_value != 0 else math.nan

    def scaled(self, c: float) -> "ResultRow":
        """Every value divided by ``c``; ratios are unchanged."""
        return ResultRow(self.measure, self.p, self.mc_value / c, self.mc_stderr / c, self.first_order / c,
                         self.second_order / c, self.second_theorem / c, self.exceedances, self.terms)

    def to_dict(self) -> dict:
        return {
            "measure": self.measure,
            "p": self.p,
            "mc_value": self.mc_value,
            "mc_stderr": self.mc_stderr,
            "first_order": self.first_order,
            "second_order": self.second_order,
            "second_theorem": self.second_theorem,
            "ratio_first": self.ratio_first,
            "ratio_second": self.ratio_second,
            "exceedances": self.exceedances,
            "terms": self.terms,
        }


@dataclass
class ExperimentResult:
    config: ExperimentConfig
    rows: list
    admissibility: dict
    acceptance_rate: float
    runtime: float

    def row(self, measure, p) -> ResultRow:
        for r in self.rows:
            if r.measure == measure and r.p == p:
                return r
        raise KeyError((measure, p))


def _approximation(model, p, measure, m, variant):
    theorem = asymptotics.evaluate(model, p, measure, m)
    if variant is None:
        return theorem, theorem
    return asymptotics.closed_form(model, p, measure, variant, m), theorem


def run_experiment(cfg: ExperimentConfig, workers: int | None = None) -> ExperimentResult:
    """Simulate ``cfg.model`` once and evaluate every (measure, p) pair."""
    start = time.perf_counter()
    model = cfg.build_model()
    sim = Simulation(model, cfg.samples, cfg.seed, p_min=cfg.p_grid[0],
                     workers=workers if workers is not None else cfg.workers, split_sample=cfg.split_sample)
    rows = []
    for measure in cfg.measures:
        for p in cfg.p_grid:
            est = sim.estimate(p, measure, cfg.component)
            approx, theorem = _approximation(model, p, measure, cfg.component, cfg.variant)
            rows.append(ResultRow(measure, p, est.value, est.stderr, approx.first_order, approx.second_order,
                                  theorem.second_order, est.exceedances, dict(theorem.terms)))
    return ExperimentResult(cfg, rows, model.validate().to_dict(), sim.acceptance_rate, time.perf_counter() - start)


def evaluate_config(cfg: ExperimentConfig, workers: int | None = None) -> dict:
    """JSON-ready report with term breakdowns, admissibility, acceptance rate and runtime."""
    res = run_experiment(cfg, workers)
    model = cfg.build_model()
    marginal = {"config": model.marginal.to_config()}
    if model.marginal.alpha > 1:
        marginal["mean"] = model.marginal.mean()
    if isinstance(model.marginal, AbsStudentT):
        marginal["mean_closed_form"] = model.marginal.mean_closed_form
        marginal["mean_ratio_form"] = model.marginal.ratio_mean
    return {
        "config": cfg.to_dict(),
        "marginal": marginal,
        "admissibility": res.admissibility,
        "acceptance_rate": res.acceptance_rate,
        "runtime_seconds": res.runtime,
        "results": [r.to_dict() for r in res.rows],
    }


# -- built-in tables and figures ------------------------------------------------------


def _bivariate(marginal, kernel: KernelSpec, a12: float, clamp: bool = False) -> dict:
    return SarmanovModel.bivariate(marginal, kernel, a12, clamp=clamp).to_config()


@dataclass(frozen=True)
class TableSpec:
    """Rows keyed by ``key`` ("alpha" or "p"); each entry is (key value, config)."""

    id: str
    key: str
    measures: tuple
    entries: tuple
    caption: str = ""

    def configs(self):
        return [cfg for _, cfg in self.entries]


@dataclass(frozen=True)
class FigureSpec:
    """Panels of curves; values are divided by VaR_p(X) when ``normalize`` is set."""

    id: str
    panels: tuple
    normalize: bool = False
    caption: str = ""


FIGURE_GRID = tuple(round(0.95 + 0.005 * i, 3) for i in range(10))


def _table2():
    entries = tuple(
        (alpha, ExperimentConfig(_bivariate(Pareto(alpha, 1.0), KernelSpec.fgm(), 0.5), (0.99,), ("VaR", "CTE"),
                                 variant="pareto_exact"))
        for alpha in (1.1, 1.5, 2.0, 2.5, 3.0, 4.0, 5.0)
    )
    return TableSpec("table2", "alpha", ("VaR", "CTE"), entries, "Pareto k=1, p=0.99, FGM a12=0.5")


def _table3():
    ps = (0.95, 0.96, 0.97, 0.98, 0.99, 0.995, 0.999, 0.9999)
    cfg = ExperimentConfig(_bivariate(AbsStudentT(2.5), KernelSpec.fgm(), -0.5), ps, ("E", "CE"), variant="signed_t")
    return TableSpec("table3", "p", ("E", "CE"), tuple((p, cfg) for p in ps), "|t_2.5|, FGM a12=-0.5")


def _frechet_table(tid, measure):
    ps = (0.95, 0.96, 0.97, 0.98, 0.99, 0.999, 0.9999)
    model = _bivariate(Frechet(2.0), KernelSpec.power(-1.0), 0.5, clamp=True)
    cfg = ExperimentConfig(model, ps, (measure,), variant="frechet_example")
    return TableSpec(tid, "p", (measure,), tuple((p, cfg) for p in ps), "Frechet alpha=2, power(-1) kernel a12=0.5")


TABLES = {
    "table2": _table2(),
    "table3": _table3(),
    "table4": _frechet_table("table4", "ICE"),
    "table5": _frechet_table("table5", "SICE"),
}


def _burr_panels(measures):
    return tuple(
        (f"beta={beta:g}", ExperimentConfig(_bivariate(Burr(1.5, beta), KernelSpec.fgm(), -0.5), FIGURE_GRID, measures))
        for beta in (-0.5, -2.0)
    )


FIGURES = {
    "fig2": FigureSpec(
        "fig2",
        (("burr", ExperimentConfig(_bivariate(Burr(2.0, -0.5), KernelSpec.fgm(), 0.5), FIGURE_GRID, ("MES", "SES"))),),
        caption="Burr alpha=2, beta=-0.5, FGM a12=0.5",
    ),
    "fig3": FigureSpec(
        "fig3",
        tuple(
            (f"a12={a:g}", ExperimentConfig(_bivariate(Pareto(2.0, 1.0), KernelSpec.fgm(), a), FIGURE_GRID,
                                            asymptotics.MEASURES))
            for a in (-1.0, 0.0, 1.0)
        ),
        normalize=True,
        caption="Pareto alpha=2, k=1, FGM a12 in {-1, 0, 1}",
    ),
    "fig4": FigureSpec("fig4", _burr_panels(("VaR", "E")), True, "Burr alpha=1.5, FGM a12=-0.5"),
    "fig5": FigureSpec("fig5", _burr_panels(("CTE", "CE")), True, "Burr alpha=1.5, FGM a12=-0.5"),
    "fig6": FigureSpec("fig6", _burr_panels(("MES", "ICE")), True, "Burr alpha=1.5, FGM a12=-0.5"),
    "fig7": FigureSpec("fig7", _burr_panels(("SES", "SICE")), True, "Burr alpha=1.5, FGM a12=-0.5"),
    "fig8": FigureSpec(
        "fig8",
        (("weiss", ExperimentConfig(_bivariate(Weiss(2.5, -1.0), KernelSpec.fgm(), 0.5), FIGURE_GRID, DIV_MEASURES)),),
        caption="Weiss alpha=2.5, beta=-1, FGM a12=0.5",
    ),
}


def _override(cfg: ExperimentConfig, samples, seed, split_sample) -> ExperimentConfig:
    return cfg.replace(samples=samples, seed=seed, split_sample=split_sample or None)


def table_columns(spec: TableSpec) -> list:
    ms = spec.measures
    cols = [spec.key]
    for m in ms:
        cols += [f"{m}_MC", f"{m}_1st", f"{m}_2nd"]
    for m in ms:
        cols += [f"{m}_1st/MC", f"{m}_2nd/MC"]
    for m in ms:
        cols.append(f"{m}_MC_se")
    for m in ms:
        cols.append(f"{m}_2nd_theorem")
    return cols


def run_table(table_id: str, samples: int | None = None, seed: int | None = None, workers: int | None = None,
              split_sample: bool = False) -> tuple:
    """(columns, records) of one reproduction table, rows in the reference order."""
    try:
        spec = TABLES[table_id]
    except KeyError:
        raise DomainError(f"unknown table {table_id!r}; expected one of {sorted(TABLES)}") from None
    results = {}
    records = []
    for key, cfg in spec.entries:
        cfg = _override(cfg, samples, seed, split_sample)
        token = json.dumps(cfg.to_dict(), sort_keys=True)
        if token not in results:
            results[token] = run_experiment(cfg, workers)
        res = results[token]
        p = key if spec.key == "p" else cfg.p_grid[0]
        rec = {spec.key: key}
        rows = {m: res.row(m, p) for m in spec.measures}
        for m in spec.measures:
            r = rows[m]
            rec.update({f"{m}_MC": r.mc_value, f"{m}_1st": r.first_order, f"{m}_2nd": r.second_order})
        for m in spec.measures:
            rec.update({f"{m}_1st/MC": rows[m].ratio_first, f"{m}_2nd/MC": rows[m].ratio_second})
        for m in spec.measures:
            rec[f"{m}_MC_se"] = rows[m].mc_stderr
        for m in spec.measures:
            rec[f"{m}_2nd_theorem"] = rows[m].second_theorem
        records.append(rec)
    return table_columns(spec), records


FIGURE_COLUMNS = ["panel", "measure", "p", "mc", "mc_stderr", "first", "second", "ratio_first", "ratio_second"]


def run_figure(figure_id: str, samples: int | None = None, seed: int | None = None, workers: int | None = None,
               split_sample: bool = False) -> tuple:
    """(columns, records) of panel-tagged curves for one figure."""
    try:
        spec = FIGURES[figure_id]
    except KeyError:
        raise DomainError(f"unknown figure {figure_id!r}; expected one of {sorted(FIGURES)}") from None
    records = []
    for panel, cfg in spec.panels:
        cfg = _override(cfg, samples, seed, split_sample)
        res = run_experiment(cfg, workers)
        marginal = cfg.build_model().marginal
        for r in res.rows:
            if spec.normalize:
                r = r.scaled(float(marginal.quantile(r.p)))
            records.append({
                "panel": panel,
                "measure": r.measure,
                "p": r.p,
                "mc": r.mc_value,
                "mc_stderr": r.mc_stderr,
                "first": r.first_order,
                "second": r.second_order,
                "ratio_first": r.ratio_first,
                "ratio_second": r.ratio_second,
            })
    return list(FIGURE_COLUMNS), records


# -- output ----------------------------------------------------------------------


def _fmt(v, digits):
    if isinstance(v, str):
        return v
    if isinstance(v, (int, np.integer)) and not isinstance(v, bool):
        return str(v)
    v = float(v)
    if math.isnan(v):
        return "nan"
    if math.isinf(v):
        return "inf" if v > 0 else "-inf"
    return f"{v:.{digits}g}"


def format_csv(columns, records, digits: int = 6) -> str:
    """RFC 4180 text (CRLF line ends) with ``digits`` significant digits."""
    buf = io.StringIO()
    w = csv.writer(buf, lineterminator="\r\n")
    w.writerow(columns)
    for rec in records:
        w.writerow([_fmt(rec[c], digits) for c in columns])
    return buf.getvalue()


def format_json(columns, records) -> str:
    return json.dumps({"columns": columns, "rows": records}, indent=2, allow_nan=True) + "\n"
