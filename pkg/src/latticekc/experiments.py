"""The three studies behind the command-line harness, plus table output.

Every study returns a :class:`Table` whose rows carry their provenance
(seed, generating-vector digest, configuration digest) so a single row
can be recomputed in isolation. Writing a table is deterministic: the
same configuration always produces the same bytes.
"""
from __future__ import annotations

import logging
import math
from dataclasses import dataclass, field
from importlib import resources
from pathlib import Path

import numpy as np

from latticekc import analytic1d
from latticekc.config import as_floats, as_ints, as_words, digest_kv, load_kv
from latticekc.cubature import (
    SolverError,
    apply_rule,
    assemble_gram,
    equal_rule,
    solve_optimal_weights,
    wce_equal,
    wce_general,
    wce_optimal,
)
from latticekc.kernel import KernelSpec
from latticekc.pde import UqConfig, run_uq_experiment
from latticekc.points import (
    DuplicatePointsError,
    GeneratingVector,
    apply_shift,
    check_distinct,
    generate_lattice,
    load_generating_vector,
    sample_shift,
    tent_transform,
)
from latticekc.rates import default_window, fit_rate

__all__ = [
    "Table",
    "INTEGRANDS",
    "PROFILES",
    "data_file",
    "resolve_settings",
    "run_oned",
    "run_wce2d",
    "run_pde_uq",
    "run_study",
]

log = logging.getLogger(__name__)

INTEGRANDS = {
    "exp": (np.exp, math.e - 1.0),
    "cos": (lambda x: np.cos(np.pi * x / 2), 2.0 / math.pi),
}

MAX_RESAMPLES = 20


def data_file(name: str) -> Path:
    """Path of a generating-vector file shipped with the package."""
    return Path(str(resources.files("latticekc") / "data" / name))


@dataclass
class Table:
    name: str
    columns: list[str]
    rows: list[dict] = field(default_factory=list)
    slopes: dict[str, tuple[float, int, int]] = field(default_factory=dict)

    def column(self, key, **where) -> np.ndarray:
        rows = [r for r in self.rows if all(r[k] == v for k, v in where.items())]
        return np.array([r[key] for r in rows])

    def to_csv(self) -> str:
        lines = [",".join(self.columns)]
        lines += [",".join(_fmt(row[c]) for c in self.columns) for row in self.rows]
        return "\n".join(lines) + "\n"

    def slopes_csv(self) -> str:
        lines = ["series,slope,n_min,n_max"]
        for key in sorted(self.slopes):
            slope, lo, hi = self.slopes[key]
            lines.append(f"{key},{_fmt(slope)},{lo},{hi}")
        return "\n".join(lines) + "\n"

    def write(self, outdir: Path, series: dict[str, tuple[str, str]] | None = None) -> list[Path]:
        """Write ``<name>.csv``, ``<name>.slopes.csv`` and one data file per series.

        ``series`` maps a file stem to ``(column, filter)``, where filter is
        ``"key=value"`` or empty. Each series file holds ``n value`` pairs; an
        ``index.dat`` lists them for gnuplot-style plotting.
        """
        outdir = Path(outdir)
        outdir.mkdir(parents=True, exist_ok=True)
        written = [outdir / f"{self.name}.csv", outdir / f"{self.name}.slopes.csv"]
        written[0].write_text(self.to_csv())
        written[1].write_text(self.slopes_csv())
        index_lines = []
        for stem, (col, flt) in (series or {}).items():
            where = {}
            if flt:
                k, v = flt.split("=", 1)
                where[k] = v
            ns = self.column("n", **where)
            vals = self.column(col, **where)
            path = outdir / "series" / f"{self.name}_{stem}.dat"
            path.parent.mkdir(exist_ok=True)
            path.write_text("".join(f"{int(n)} {_fmt(v)}\n" for n, v in zip(ns, vals)))
            written.append(path)
            index_lines.append(f"series/{path.name} {self.name}:{stem}\n")
        if index_lines:
            index = outdir / "index.dat"
            old = index.read_text().splitlines(keepends=True) if index.exists() else []
            keep = [l for l in old if not l.split()[-1].startswith(self.name + ":")]
            if not keep:
                keep = ["# file title  (columns in each file: n value)\n"]
            index.write_text("".join(keep + index_lines))
        return written

    def fit(self, key, ns, values, window=None):
        """Record the fitted slope, or skip it (returning None) when fewer than 3 sizes remain."""
        ns = np.asarray(ns, dtype=float)
        values = np.asarray(values, dtype=float)
        if window is None:
            window = default_window(ns) if ns.size >= 5 else np.ones(ns.size, bool)
        mask = window & (values > 0)
        if np.sum(mask) < 3:
            log.warning("too few sizes to fit a rate for %s; slope skipped", key)
            return None
        slope = fit_rate(ns[mask], values[mask])
        self.slopes[key] = (slope, int(ns[mask].min()), int(ns[mask].max()))
        return slope


def _fmt(v) -> str:
    if isinstance(v, (bool, np.bool_)):
        return str(bool(v)).lower()
    if isinstance(v, (int, np.integer)):
        return str(int(v))
    if isinstance(v, (float, np.floating)):
        return repr(float(v))
    return str(v)


# -- settings ---------------------------------------------------------------------------------

PROFILES = {
    "oned": {
        "ci": {"ns": "2^1..2^10", "integrand": "exp", "seed": "0"},
        "full": {"ns": "2^1..2^10", "integrand": "exp", "seed": "0"},
    },
    "wce2d": {
        "ci": {"ns": "2^2..2^10", "seed": "0", "vector": "lattice-2d-tent.txt",
               "alpha_weights": "2", "alpha_eval": "4"},
        "full": {"ns": "2^2..2^10", "seed": "0", "vector": "lattice-2d-tent.txt",
                 "alpha_weights": "2", "alpha_eval": "4"},
    },
    "pde-uq": {
        "ci": {"dims": "1 5", "level": "4", "ns": "2^1..2^9", "R": "8", "seed": "0",
               "delta": "0.05", "n_ref": "2^12", "methods": "qmc kernel", "solver": "direct",
               "shifted": "yes", "vector": "lattice-pod-uq-m12.txt"},
        "full": {"dims": "1 5 20 100", "level": "5", "ns": "2^1..2^10", "R": "8", "seed": "0",
                 "delta": "0.05", "n_ref": "2^12", "methods": "qmc kernel", "solver": "direct",
                 "shifted": "yes", "vector": "lattice-pod-uq-m12.txt"},
    },
}


def resolve_settings(study: str, profile: str = "ci", config=None, seed: int | None = None) -> dict:
    """Profile defaults, overridden by a config file, overridden by ``seed``."""
    if study not in PROFILES:
        raise ValueError(f"unknown study {study!r}")
    if profile not in PROFILES[study]:
        raise ValueError(f"unknown profile {profile!r}")
    settings = dict(PROFILES[study][profile])
    if config is not None:
        given = load_kv(config)
        given.pop("study", None)
        unknown = given.keys() - settings.keys()
        if unknown:
            raise ValueError(f"{config}: keys {sorted(unknown)} do not apply to study {study!r}")
        settings.update(given)
    if seed is not None:
        settings["seed"] = str(int(seed))
    return settings


def _as_bool(text: str) -> bool:
    word = text.strip().lower()
    if word in ("yes", "true", "1", "on"):
        return True
    if word in ("no", "false", "0", "off"):
        return False
    raise ValueError(f"expected yes/no, got {text!r}")


def _vector_path(name: str) -> Path:
    p = Path(name)
    return p if p.is_file() else data_file(name)


# -- studies ----------------------------------------------------------------------------------

def run_oned(ns, integrand: str = "exp", *, seed: int = 0, config_hash: str = "") -> Table:
    """Equal versus optimal weights on ``t_k = k/n`` with closed-form cross-checks."""
    if integrand not in INTEGRANDS:
        raise ValueError(f"unknown integrand {integrand!r}; choose from {sorted(INTEGRANDS)}")
    ns = sorted(int(n) for n in ns)
    if ns[0] < 2:
        raise ValueError("the one-dimensional study needs n >= 2")
    f, exact = INTEGRANDS[integrand]
    spec = KernelSpec.unweighted(1, 1)
    gv_hash = GeneratingVector(max(ns), (1,)).digest()
    table = Table("oned", ["n", "err_equal", "err_optimal", "wce_equal", "wce_optimal",
                           "weights_delta", "wce_sq_delta", "gram_sum_delta",
                           "integrand", "seed", "gv_hash", "config_hash"])
    for n in ns:
        ps = generate_lattice(GeneratingVector(n, (1,)))
        gram = assemble_gram(spec, ps)
        rule = solve_optimal_weights(gram)
        values = f(ps.nodes[:, 0])
        closed_sq = float(analytic1d.closed_form_wce_optimal_sq(n))
        table.rows.append({
            "n": n,
            "err_equal": abs(exact - apply_rule(equal_rule(ps), values)),
            "err_optimal": abs(exact - apply_rule(rule, values)),
            "wce_equal": wce_equal(spec, ps, gram=gram),
            "wce_optimal": wce_optimal(rule),
            "weights_delta": float(np.max(np.abs(rule.weights - analytic1d.closed_form_weights(n)))),
            "wce_sq_delta": abs((1.0 - float(np.sum(rule.weights))) - closed_sq),
            "gram_sum_delta": abs(float(np.sum(gram.matrix)) - float(analytic1d.gram_double_sum(n))),
            "integrand": integrand,
            "seed": seed,
            "gv_hash": gv_hash,
            "config_hash": config_hash,
        })
    for col in ("err_equal", "err_optimal", "wce_equal", "wce_optimal"):
        table.fit(col, table.column("n"), table.column(col))
    return table


def _tent_points(gv: GeneratingVector, seed: int):
    """Shifted, tent-transformed lattice; duplicate nodes trigger a resample with ``seed + 1``."""
    for attempt in range(MAX_RESAMPLES):
        ps = tent_transform(apply_shift(generate_lattice(gv), sample_shift(seed + attempt, gv.s)))
        try:
            check_distinct(ps)
        except DuplicatePointsError as exc:
            log.warning("n=%d seed=%d: %s; resampling shift", gv.n, seed + attempt, exc)
            continue
        return ps, seed + attempt
    raise DuplicatePointsError([])


def run_wce2d(gv: GeneratingVector, ns, seed: int = 0, *, alpha_weights: int = 2,
              alpha_eval: int = 4, config_hash: str = "") -> Table:
    """Worst-case errors of a shifted, tent-transformed lattice in two smoothness classes.

    Weights are optimized for smoothness ``alpha_weights`` and evaluated
    both there and in the smoother space ``alpha_eval``.
    """
    ns = sorted(int(n) for n in ns)
    spec_w = KernelSpec.unweighted(alpha_weights, gv.s)
    spec_e = KernelSpec.unweighted(alpha_eval, gv.s)
    table = Table("wce2d", ["n", "wce_equal_w", "wce_optimal_w", "wce_equal_e", "wce_optimal_e",
                            "alpha_weights", "alpha_eval", "seed", "gv_hash", "config_hash"])
    for n in ns:
        sub = GeneratingVector(n, tuple(z % n for z in gv.z))
        used = seed
        for attempt in range(MAX_RESAMPLES):
            ps, used = _tent_points(sub, used)
            gram_w = assemble_gram(spec_w, ps)
            try:
                rule = solve_optimal_weights(gram_w)
                break
            except SolverError as exc:
                log.warning("n=%d seed=%d: %s; resampling shift", n, used, exc)
                used += 1
        else:
            raise SolverError(f"no admissible shift for n={n} after {MAX_RESAMPLES} attempts")
        gram_e = assemble_gram(spec_e, ps)
        table.rows.append({
            "n": n,
            "wce_equal_w": wce_equal(spec_w, ps, gram=gram_w),
            "wce_optimal_w": wce_optimal(rule),
            "wce_equal_e": wce_equal(spec_e, ps, gram=gram_e),
            "wce_optimal_e": wce_general(spec_e, ps, rule.weights, gram=gram_e),
            "alpha_weights": alpha_weights,
            "alpha_eval": alpha_eval,
            "seed": used,
            "gv_hash": gv.digest(),
            "config_hash": config_hash,
        })
    for col in ("wce_equal_w", "wce_optimal_w", "wce_equal_e", "wce_optimal_e"):
        table.fit(col, table.column("n"), table.column(col))
    return table


def run_pde_uq(cfg: UqConfig, gv: GeneratingVector, *, config_hash: str = "", jobs: int = 1) -> Table:
    result = run_uq_experiment(cfg, gv, jobs=jobs)
    table = Table(f"pde-uq-s{cfg.s}", ["method", "n", "rms_error", "wce", "s", "seed", "gv_hash",
                                       "config_hash"])
    for row in result.rows:
        table.rows.append({**row, "s": cfg.s, "seed": cfg.seed, "gv_hash": result.gv_digest,
                           "config_hash": config_hash})
    for m in cfg.methods:
        ns = table.column("n", method=m)
        table.fit(f"{m}_rms_error", ns, table.column("rms_error", method=m))
        table.fit(f"{m}_wce", ns, table.column("wce", method=m))
    return table


# -- dispatch ---------------------------------------------------------------------------------

def run_study(study: str, settings: dict, outdir, *, jobs: int = 1) -> list[Table]:
    """Run a study from resolved settings and write its tables under ``outdir``."""
    chash = digest_kv({"study": study, **settings})
    seed = int(settings["seed"])
    tables = []
    if study == "oned":
        t = run_oned(as_ints(settings["ns"]), settings["integrand"], seed=seed, config_hash=chash)
        t.write(outdir, {c: (c, "") for c in ("err_equal", "err_optimal", "wce_equal", "wce_optimal")})
        tables.append(t)
    elif study == "wce2d":
        ns = as_ints(settings["ns"])
        gv = load_generating_vector(_vector_path(settings["vector"]), 2, 2 ** 20)
        t = run_wce2d(gv, ns, seed, alpha_weights=int(settings["alpha_weights"]),
                      alpha_eval=int(settings["alpha_eval"]), config_hash=chash)
        t.write(outdir, {c: (c, "") for c in ("wce_equal_w", "wce_optimal_w", "wce_equal_e",
                                               "wce_optimal_e")})
        tables.append(t)
    elif study == "pde-uq":
        n_ref = as_ints(settings["n_ref"])[0]
        for s in as_ints(settings["dims"]):
            cfg = UqConfig(
                s=s,
                level=int(settings["level"]),
                ns=tuple(as_ints(settings["ns"])),
                R=int(settings["R"]),
                seed=seed,
                delta=as_floats(settings["delta"])[0],
                n_ref=n_ref,
                methods=tuple(as_words(settings["methods"])),
                solver=settings["solver"],
                shifted=_as_bool(settings["shifted"]),
            )
            gv = load_generating_vector(_vector_path(settings["vector"]), s,
                                        max(n_ref, *cfg.ns))
            t = run_pde_uq(cfg, gv, config_hash=chash, jobs=jobs)
            series = {}
            for m in cfg.methods:
                series[f"{m}_rms_error"] = ("rms_error", f"method={m}")
                series[f"{m}_wce"] = ("wce", f"method={m}")
            t.write(outdir, series)
            tables.append(t)
    else:
        raise ValueError(f"unknown study {study!r}")
    return tables
