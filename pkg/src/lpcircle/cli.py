"""Command line driver: parse a config, dispatch to the library, write CSV/JSON artifacts.

Exit status: 0 on success, 2 on configuration errors, 1 when a computation fails.
"""
from __future__ import annotations

import argparse
import json
import logging
import sys
from dataclasses import asdict, dataclass, field, fields
from pathlib import Path

import numpy as np

from . import auxops, correction, multipliers, weights
from .circle import check_resolution, function_from_string, grid, partition_from_string
from .errors import ConfigError, LPError

log = logging.getLogger("lpcircle")

COMMANDS = ("sigma", "weights", "lemma1", "lemma4", "theorem2-sweep", "regularize", "correct-sweep")


@dataclass
class ExperimentConfig:
    command: str
    n: list[int] = field(default_factory=lambda: [256])
    seed: int | None = None
    out: str = "out"
    weight: str = "unit"
    a_weight: str = "unit"
    function: str = "exp:k=3"
    partition: str = "dyadic"
    p: list[float] = field(default_factory=lambda: [1.5])
    q: float = 1.5
    t_grid: list[float] = field(default_factory=lambda: [0.95, 0.99, 1.01, 1.05])
    s_grid: list[float] = field(default_factory=lambda: [1.05, 1.1, 1.25, 1.5, 2.0])
    b_grid: list[float] | None = None
    trials: int = 1000
    strategy: str = "zero-offenders"

    def validate(self) -> None:
        if self.command not in COMMANDS:
            raise ConfigError(f"unknown command {self.command!r}")
        if not self.n:
            raise ConfigError("n must not be empty")
        try:
            self.n = [check_resolution(v) for v in self.n]
        except ValueError as exc:
            raise ConfigError(str(exc)) from exc
        if self.command != "theorem2-sweep" and len(self.n) != 1:
            raise ConfigError(f"{self.command} takes a single N")
        for name in ("p", "t_grid", "s_grid"):
            if not getattr(self, name):
                raise ConfigError(f"{name} must not be empty")
        if self.b_grid is not None and not self.b_grid:
            raise ConfigError("b_grid must not be empty")
        if self.needs_seed() and self.seed is None:
            raise ConfigError(f"{self.command} with these inputs is randomized; pass --seed")
        if self.trials < 1:
            raise ConfigError("trials must be positive")
        for text in (self.weight, self.a_weight):
            try:
                weights.parse_catalog_string(text)
            except ValueError as exc:
                raise ConfigError(str(exc)) from exc

    def needs_seed(self) -> bool:
        if self.command == "theorem2-sweep":
            return True
        randomized = self.partition.startswith("random")
        if self.command in ("sigma", "correct-sweep"):
            randomized = randomized or self.function.split(":")[0] in ("random", "phases")
        return randomized and self.command in ("sigma", "correct-sweep", "regularize")

    def rng(self) -> np.random.Generator | None:
        return None if self.seed is None else np.random.default_rng(self.seed)


def _floats(text: str) -> list[float]:
    return [float(x) for x in text.split(",") if x.strip()]


def _ints(text: str) -> list[int]:
    return [int(x) for x in text.split(",") if x.strip()]


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="lpcircle", description=__doc__.splitlines()[0])
    parser.add_argument("command", choices=COMMANDS)
    parser.add_argument("--config", help="JSON file with config values; flags override it")
    parser.add_argument("--n", type=_ints, help="grid size (comma list for theorem2-sweep)")
    parser.add_argument("--seed", type=int)
    parser.add_argument("--out", help="output directory")
    parser.add_argument("--weight", help="weight w as a catalog string, e.g. power:delta=-0.2")
    parser.add_argument("--a-weight", dest="a_weight", help="weight a as a catalog string")
    parser.add_argument("--function", help="test function, e.g. exp:k=3 or indicator:start=0,stop=0.5")
    parser.add_argument("--partition", help="JSON [[a,b],...] or dyadic | singletons | random:count=..")
    parser.add_argument("--p", type=_floats)
    parser.add_argument("--q", type=float)
    parser.add_argument("--t-grid", dest="t_grid", type=_floats)
    parser.add_argument("--s-grid", dest="s_grid", type=_floats)
    parser.add_argument("--b-grid", dest="b_grid", type=_floats)
    parser.add_argument("--trials", type=int)
    parser.add_argument("--strategy", choices=correction.STRATEGIES)
    parser.add_argument("-v", "--verbose", action="store_true")
    return parser


def config_from_args(args: argparse.Namespace) -> ExperimentConfig:
    values: dict = {}
    if args.config:
        try:
            values = json.loads(Path(args.config).read_text())
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {args.config}: {exc}") from exc
        if not isinstance(values, dict):
            raise ConfigError("config file must hold a JSON object")
        known = {f.name for f in fields(ExperimentConfig)}
        unknown = set(values) - known
        if unknown:
            raise ConfigError(f"unknown config keys: {sorted(unknown)}")
        if isinstance(values.get("n"), int):
            values["n"] = [values["n"]]
    values["command"] = args.command
    for f in fields(ExperimentConfig):
        given = getattr(args, f.name, None)
        if given is not None and f.name != "command":
            values[f.name] = given
    try:
        config = ExperimentConfig(**values)
    except TypeError as exc:
        raise ConfigError(str(exc)) from exc
    config.validate()
    return config


# ----------------------------------------------------------------------------
# commands; each returns a result dict of tables, notes and JSON payloads


def _table(name: str, columns: list[str], rows: list[list]) -> dict:
    return {"name": name, "columns": columns, "rows": rows}


def _cmd_sigma(cfg: ExperimentConfig) -> dict:
    n = cfg.n[0]
    rng = cfg.rng()
    f = function_from_string(cfg.function, n, rng)
    part = partition_from_string(cfg.partition, n, rng)
    sigma = multipliers.square_function(f, part)
    x = grid(n)
    rows = [[m, x[m], sigma[m]] for m in range(n)]
    return {
        "tables": [_table("sigma", ["index", "x", "sigma"], rows)],
        "json": {"n": n, "intervals": len(part), "max_sigma": float(sigma.max()), "l2_sigma": float(np.sqrt(2 * np.pi / n * np.sum(sigma ** 2)))},
        "notes": [f"max sigma = {float(sigma.max())!r}"],
    }


def _cmd_weights(cfg: ExperimentConfig) -> dict:
    n = cfg.n[0]
    spec = weights.parse_catalog_string(cfg.weight)
    w = spec.at(n)
    rows = [["A", p, weights.ap_constant(w, p)] for p in weights.A_INFINITY_GRID]
    rows += [["alpha", p, weights.alpha_p_constant(w, p)] for p in (1.0, 1.25, 1.5, 1.75, 2.0)]
    incl = weights.a1_implied_by_alpha1(w)
    rh = weights.reverse_holder_probe(w, cfg.s_grid)
    ainf = weights.a_infinity_certificate(w)
    return {
        "tables": [_table("constants", ["class", "p", "constant"], rows)],
        "json": {"weight": str(spec), "n": n, "a1_implied_by_alpha1": incl, "reverse_holder": rh, "a_infinity": {"p": ainf["p"], "constant": ainf["constant"]}},
        "notes": [
            f"A1 <= sqrt(alpha1): {incl['a1']!r} <= {incl['bound']!r} -> {'pass' if incl['passed'] else 'FAIL'}",
            f"reverse Holder best s = {rh['best_s']}",
        ],
    }


def _cmd_lemma1(cfg: ExperimentConfig) -> dict:
    n = cfg.n[0]
    w = weights.parse_catalog_string(cfg.weight).at(n)
    a = weights.parse_catalog_string(cfg.a_weight).at(n)
    below = [t for t in cfg.t_grid if t < 1]
    above = [t for t in cfg.t_grid if t > 1]
    reports = []
    if below:
        reports.append(("lemma1", weights.lemma1_probe(w, a, cfg.q, below)))
    if above:
        reports.append(("lemma2", weights.lemma2_probe(w, a, cfg.q, above)))
    rows = []
    for tag, rep in reports:
        for r in rep["rows"]:
            rows.append([tag, r["t"], r["r"], r["const_n"], r["const_2n"], r["growth"]])
    return {
        "tables": [_table("mixing", ["probe", "t", "r", "const_n", "const_2n", "growth"], rows)],
        "json": {tag: rep for tag, rep in reports},
        "notes": [f"q used = {reports[0][1]['q_used']!r}"] if reports else [],
    }


def _cmd_lemma4(cfg: ExperimentConfig) -> dict:
    n = cfg.n[0]
    w = weights.parse_catalog_string(cfg.weight).at(n)
    reps = [weights.lemma4_certificate(w, p) for p in cfg.p]
    cols = ["p", "c", "a", "b", "alpha_p", "a1", "worst_margin", "passed"]
    rows = [[r[c] for c in cols] for r in reps]
    return {"tables": [_table("lemma4", cols, rows)], "json": {"weight": cfg.weight, "n": n, "reports": reps}, "notes": []}


def _cmd_theorem2(cfg: ExperimentConfig) -> dict:
    a_spec = weights.parse_catalog_string(cfg.a_weight)
    w_spec = weights.parse_catalog_string(cfg.weight)
    rows = []
    maxima = {}
    for i, n in enumerate(cfg.n):
        sw = multipliers.theorem2_sweep(n, cfg.trials, cfg.seed + i, a_spec.at(n), w_spec.at(n))
        maxima[n] = sw.max_ratio
        rows += [[n, t, r] for t, r in enumerate(sw.ratios)]
    ns = sorted(maxima)
    growth = {f"{x}->{y}": maxima[y] / maxima[x] for x, y in zip(ns, ns[1:]) if maxima[x] > 0}
    return {
        "tables": [_table("ratios", ["n", "trial", "ratio"], rows)],
        "json": {"a": str(a_spec), "w": str(w_spec), "max_ratio": {str(k): v for k, v in maxima.items()}, "growth": growth},
        "notes": [f"max ratio at N={k}: {v!r}" for k, v in maxima.items()] + [f"growth {k}: {v!r}" for k, v in growth.items()],
        "show_rows": False,
    }


def _cmd_regularize(cfg: ExperimentConfig) -> dict:
    n = cfg.n[0]
    part = partition_from_string(cfg.partition, n, cfg.rng())
    signed = auxops.regularize_signed(part, n)
    rows, notes, doc = [], [], {}
    for half, plan in (("positive", signed.positive), ("negative", signed.negative)):
        if plan is None:
            continue
        problems = auxops.validate_plan(plan)
        summary = plan.summary()
        rows += [[half, b, batch[0].kind, batch[0].cls, len(batch)] for b, batch in enumerate(plan.batches)]
        doc[half] = {"summary": summary, "violations": problems, "plan": json.loads(plan.to_json())}
        notes.append(
            f"{half}: short={summary['short']} long={summary['long']} colours={summary['colors_used']} "
            f"batches={summary['batches']} validator={'pass' if not problems else 'FAIL (' + str(len(problems)) + ')'}"
        )
    if signed.edge_owner is not None:
        doc["edge_owner"] = signed.edge_owner
        notes.append(f"frequency -N/2 of interval {signed.edge_owner} is applied directly")
    return {"tables": [_table("batches", ["half", "batch", "kind", "class", "size"], rows)], "json": doc, "notes": notes}


def _cmd_correct_sweep(cfg: ExperimentConfig) -> dict:
    n = cfg.n[0]
    rng = cfg.rng()
    w = weights.parse_catalog_string(cfg.weight).at(n)
    a = weights.parse_catalog_string(cfg.a_weight).at(n)
    base = function_from_string(cfg.function, n, rng)
    f = base * w.values
    part = partition_from_string(cfg.partition, n, rng)
    b_grid = cfg.b_grid if cfg.b_grid is not None else correction.default_b_grid(f, w, part)
    curve = correction.sweep(f, w, a, part, b_grid, cfg.strategy)
    cols = ["B_target", "epsilon", "B_achieved", "iterations", "converged"]
    rows = [[r[c] for c in cols] for r in curve.rows]
    fit = curve.fit
    note = "fit skipped" if fit is None else f"fit: B_achieved = {fit['slope']:.6g} * (1 + |log eps|) {fit['intercept']:+.6g}  (rms {fit['rms_residual']:.3g})"
    return {"tables": [_table("curve", cols, rows)], "json": {"fit": fit, "rows": curve.rows}, "notes": [note], "csv": curve.to_csv()}


DISPATCH = {
    "sigma": _cmd_sigma,
    "weights": _cmd_weights,
    "lemma1": _cmd_lemma1,
    "lemma4": _cmd_lemma4,
    "theorem2-sweep": _cmd_theorem2,
    "regularize": _cmd_regularize,
    "correct-sweep": _cmd_correct_sweep,
}


# ----------------------------------------------------------------------------
# output


def _cell(v) -> str:
    if isinstance(v, bool):
        return str(v).lower()
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    if v is None:
        return ""
    return str(v)


def table_csv(table: dict) -> str:
    lines = [",".join(table["columns"])]
    lines += [",".join(_cell(v) for v in row) for row in table["rows"]]
    return "\n".join(lines) + "\n"


def emit_report(results: dict, config: ExperimentConfig | None = None, max_rows: int = 40) -> str:
    """Aligned-text rendering of the result tables, notes and the config echo."""
    out = []
    if config is not None:
        out.append("config: " + json.dumps(asdict(config), sort_keys=True))
    for table in results.get("tables", []):
        cols = table["columns"]
        rows = [[_short(v) for v in row] for row in table["rows"]]
        if results.get("show_rows") is False:
            rows = rows[:0]
        widths = [max([len(c)] + [len(r[i]) for r in rows]) for i, c in enumerate(cols)]
        out.append(f"[{table['name']}]")
        out.append("  ".join(c.rjust(wd) for c, wd in zip(cols, widths)))
        for r in rows[:max_rows]:
            out.append("  ".join(v.rjust(wd) for v, wd in zip(r, widths)))
        if len(rows) > max_rows:
            out.append(f"... {len(rows) - max_rows} more rows in the CSV")
    out.extend(results.get("notes", []))
    return "\n".join(out) + "\n"


def _short(v) -> str:
    if isinstance(v, (float, np.floating)) and not isinstance(v, bool):
        return f"{float(v):.6g}"
    return _cell(v)


def _jsonable(obj):
    if isinstance(obj, dict):
        return {str(k): _jsonable(v) for k, v in obj.items()}
    if isinstance(obj, (list, tuple)):
        return [_jsonable(v) for v in obj]
    if isinstance(obj, np.generic):
        return obj.item()
    if isinstance(obj, np.ndarray):
        return obj.tolist()
    return obj


def write_artifacts(results: dict, config: ExperimentConfig) -> list[Path]:
    out = Path(config.out)
    out.mkdir(parents=True, exist_ok=True)
    stem = config.command.replace("-", "_")
    written = []
    for table in results.get("tables", []):
        path = out / f"{stem}_{table['name']}.csv"
        text = results["csv"] if "csv" in results and table is results["tables"][0] else table_csv(table)
        with open(path, "w", newline="\n") as fh:
            fh.write(text)
        written.append(path)
    path = out / f"{stem}.json"
    doc = {"config": asdict(config), "result": _jsonable(results.get("json", {}))}
    with open(path, "w", newline="\n") as fh:
        fh.write(json.dumps(doc, indent=2, sort_keys=True) + "\n")
    written.append(path)
    return written


def run(config: ExperimentConfig, stream=None) -> int:
    stream = sys.stdout if stream is None else stream
    try:
        results = DISPATCH[config.command](config)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2
    except (LPError, ValueError, ArithmeticError) as exc:
        log.error("computation failed: %s", exc)
        return 1
    paths = write_artifacts(results, config)
    stream.write(emit_report(results, config))
    for p in paths:
        stream.write(f"wrote {p}\n")
    return 0


def main(argv: list[str] | None = None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    logging.basicConfig(level=logging.DEBUG if args.verbose else logging.WARNING, format="%(levelname)s %(message)s")
    try:
        config = config_from_args(args)
    except ConfigError as exc:
        log.error("configuration error: %s", exc)
        return 2
    return run(config)


if __name__ == "__main__":
    sys.exit(main())
