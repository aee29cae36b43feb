"""
Command-line front end: corpus generation, seminorm sweeps, equivalence
ratio matrices, reproduction checks, atom audits, and a self-test battery.

Subcommands: ``norms``, ``equivalence``, ``reproduce``, ``atoms``,
``selftest``; each accepts ``--config <path>`` (JSON), ``--out <dir>``,
``--threads <k>`` and ``--seed <u64>``.  The ``MORREYKIT_THREADS``
environment variable overrides the thread count.  Exit codes: 0 success,
2 configuration error, 3 invariant failure.

All outputs are deterministic for a fixed config and seed: corpus members
derive their random streams from (seed, member id), JSON is emitted with
sorted keys and repr-exact floats, and every file is written atomically.
"""

from __future__ import annotations

import argparse
import json
import os
import sys
from concurrent.futures import ThreadPoolExecutor

import numpy as np

from .atoms import dual_identity_check, extremal_atom_family, make_atom, pair
from .corpus import CorpusFunction, default_corpus, realize
from .fieldio import atomic_write_text
from .grid import Field, Grid, ball_enumerate, make_ball
from .norms import (MorreyParams, SeminormReport, carleson_tent_norm,
                    classical_seminorm, maximal_seminorm,
                    poisson_pointwise_seminorm, semigroup_seminorm,
                    square_function_seminorm)
from .operators import (GeneratorSpec, KernelProfile, TruncationError, apply_P,
                        apply_Q, verify_kernel_bounds)
from .quadrature import (LogTimeGrid, calderon_constant_check,
                         calderon_reproduce, reproduction_constant)

CONFIG_SCHEMA = "morreykit.config.v1"
REPORT_SCHEMA = "morreykit.report.v1"

EXIT_CONFIG = 2
EXIT_INVARIANT = 3


class ConfigError(ValueError):
    pass


class InvariantError(RuntimeError):
    pass


# ---------------------------------------------------------------------------
# Configuration

_DEFAULT_CONFIG = {
    "schema": CONFIG_SCHEMA,
    "grid": {"dimension": 1, "points_per_axis": 256, "domain_length": 2.0 * np.pi},
    "generator": "heat",
    "params": {"p": 2.0, "lambda": 0.5},
    "balls": {"radii": "dyadic", "stride": 0},
    "time": {"count": 256, "t_min": "auto", "t_max": "auto"},
    "corpus": "default",
    "seed": 0,
}


def load_config(path: str | None, seed_override: int | None) -> dict:
    config = json.loads(json.dumps(_DEFAULT_CONFIG))
    if path is not None:
        try:
            with open(path) as handle:
                user = json.load(handle)
        except (OSError, json.JSONDecodeError) as exc:
            raise ConfigError(f"cannot read config {path}: {exc}") from exc
        for key, value in user.items():
            if isinstance(value, dict) and isinstance(config.get(key), dict):
                config[key].update(value)
            else:
                config[key] = value
    if seed_override is not None:
        config["seed"] = seed_override
    _validate_config(config)
    return config


def _validate_config(config: dict) -> None:
    g = config["grid"]
    try:
        Grid(int(g["dimension"]), int(g["points_per_axis"]), float(g["domain_length"]))
    except (KeyError, ValueError) as exc:
        raise ConfigError(f"invalid grid: {exc}") from exc
    if config["generator"] not in ("heat", "poisson"):
        raise ConfigError(f"unknown generator {config['generator']!r}")
    p, lam = float(config["params"]["p"]), float(config["params"]["lambda"])
    try:
        MorreyParams(p, lam).validate(int(g["dimension"]))
    except ValueError as exc:
        raise ConfigError(str(exc)) from exc
    t = config["time"]
    if int(t["count"]) < 16:
        raise ConfigError("time grid needs at least 16 nodes")
    seed = int(config["seed"])
    if seed < 0:
        raise ConfigError("seed must be a nonnegative integer")


def _build_grid(config: dict) -> Grid:
    g = config["grid"]
    return Grid(int(g["dimension"]), int(g["points_per_axis"]), float(g["domain_length"]))


def _build_radii(config: dict, grid: Grid) -> list[float]:
    spec = config["balls"]["radii"]
    if spec == "dyadic":
        # Dyadic in the box size, so the same physical radii appear at every
        # resolution: L/4, L/8, ... while the radius stays above 4h.
        radii, r = [], grid.domain_length / 4.0
        while r > 4.0 * grid.spacing:
            radii.append(r)
            r /= 2.0
        if not radii:
            raise ConfigError("grid too coarse for the dyadic radius rule")
        return sorted(radii)
    radii = [float(r) for r in spec]
    for r in radii:
        if not (grid.spacing < r <= grid.domain_length / 4.0):
            raise ConfigError(f"ball radius {r} outside (h, L/4]")
    return sorted(radii)


def _build_stride(config: dict, grid: Grid) -> int:
    stride = int(config["balls"]["stride"])
    if stride == 0:
        stride = max(grid.points_per_axis // 8, 1)
    if stride < 1:
        raise ConfigError("stride must be >= 1")
    return stride


def _build_tgrid(config: dict, gen: GeneratorSpec, grid: Grid) -> LogTimeGrid:
    t = config["time"]
    count = int(t["count"])
    if t["t_min"] == "auto" or t["t_max"] == "auto":
        return LogTimeGrid.auto_for(gen, grid, count)
    return LogTimeGrid(float(t["t_min"]), float(t["t_max"]), count)


def _corpus_members(config: dict) -> list[CorpusFunction]:
    spec = config["corpus"]
    if spec == "default":
        return default_corpus(int(config["grid"]["dimension"]),
                              float(config["params"]["p"]))
    members = []
    for entry in spec:
        members.append(CorpusFunction(str(entry["id"]), str(entry["kind"]),
                                      dict(entry.get("parameters", {}))))
    if len(set(m.id for m in members)) != len(members):
        raise ConfigError("corpus member ids must be unique")
    return members


def _thread_count(cli_value: int | None) -> int:
    env = os.environ.get("MORREYKIT_THREADS")
    if env is not None:
        try:
            value = int(env)
        except ValueError as exc:
            raise ConfigError(f"MORREYKIT_THREADS must be an integer, got {env!r}") from exc
    elif cli_value is not None:
        value = cli_value
    else:
        value = 1
    if value < 1:
        raise ConfigError("thread count must be >= 1")
    return value


# ---------------------------------------------------------------------------
# Deterministic serialization

def _plain(value):
    if isinstance(value, dict):
        return {str(k): _plain(v) for k, v in value.items()}
    if isinstance(value, (list, tuple)):
        return [_plain(v) for v in value]
    if isinstance(value, (np.floating, float)):
        return float(value)
    if isinstance(value, (np.integer, int)):
        return int(value)
    if isinstance(value, complex):
        return {"re": value.real, "im": value.imag}
    return value


def dump_json(obj) -> str:
    return json.dumps(_plain(obj), sort_keys=True, separators=(",", ": "),
                      indent=1) + "\n"


def _write_report(out_dir: str, name: str, payload: dict) -> str:
    path = os.path.join(out_dir, name)
    atomic_write_text(path, dump_json(payload))
    return path


def _write_table(out_dir: str, name: str, report: SeminormReport, dimension: int) -> str:
    header = [f"center{i}" for i in range(dimension)] + ["radius", "value"]
    lines = [",".join(header)]
    for row in report.table:
        center = row.get("center")
        if center is None:
            cells = ["" for _ in range(dimension)] + [repr(float(row.get("t", 0.0)))]
        else:
            cells = [str(c) for c in center] + [repr(float(row["radius"]))]
        lines.append(",".join(cells + [repr(float(row["value"]))]))
    path = os.path.join(out_dir, name)
    atomic_write_text(path, "\n".join(lines) + "\n")
    return path


# ---------------------------------------------------------------------------
# Seminorm engine shared by `norms` and `equivalence`

def _seminorm_suite(f: Field, config: dict, gen: GeneratorSpec,
                    grid: Grid) -> dict[str, SeminormReport]:
    params = MorreyParams(float(config["params"]["p"]), float(config["params"]["lambda"]))
    radii = _build_radii(config, grid)
    stride = _build_stride(config, grid)
    balls = ball_enumerate(grid, radii, stride)
    tgrid = _build_tgrid(config, gen, grid)
    t_set = np.array([r**gen.m for r in radii])

    reports = {
        "classical": classical_seminorm(f, params, balls),
        "semigroup": semigroup_seminorm(f, params, gen, balls),
        "square_function": square_function_seminorm(f, params, gen, balls, tgrid),
    }
    reports["maximal"] = maximal_seminorm(
        f, params, gen, t_set, stride, semigroup_value=reports["semigroup"].value)
    if params.p == 2.0:
        reports["carleson_tent"] = carleson_tent_norm(f, params, gen, balls, tgrid)
    if gen.kind == "poisson":
        reports["poisson_pointwise"] = poisson_pointwise_seminorm(
            f, params, t_set, max(stride, grid.points_per_axis // 4), gen=gen)
    for report in reports.values():
        report.check_consistency()
        if not np.isfinite(report.value) or report.value < 0:
            raise InvariantError(f"non-finite seminorm value in {report.kind}")
    return reports


def cmd_norms(config: dict, out_dir: str, threads: int) -> int:
    grid = _build_grid(config)
    gen = GeneratorSpec.from_name(config["generator"])
    members = _corpus_members(config)
    seed = int(config["seed"])
    params = config["params"]

    def run(member: CorpusFunction):
        f = realize(member, grid, seed)
        return member, f, _seminorm_suite(f, config, gen, grid)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run, members))

    summary_rows = []
    for member, f, reports in sorted(results, key=lambda item: item[0].id):
        row = {"function_id": member.id, "kind_of_function": member.kind}
        anomaly = (member.kind != "constant"
                   and f.max_abs() > 0
                   and reports["classical"].value == 0.0)
        row["anomaly_zero_classical"] = bool(anomaly)
        for kind, report in sorted(reports.items()):
            table_name = f"{member.id}-{kind}.csv"
            table_path = _write_table(out_dir, table_name, report, grid.dimension)
            payload = {
                "schema": REPORT_SCHEMA,
                "function_id": member.id,
                "kind": kind,
                "p": params["p"],
                "lambda": params["lambda"],
                "generator": gen.kind,
                "value": report.value,
                "witness": report.witness,
                "metadata": report.metadata,
                "table_path": os.path.basename(table_path),
            }
            _write_report(out_dir, f"{member.id}-{kind}.json", payload)
            row[kind] = report.value
        summary_rows.append(row)
    _write_report(out_dir, "norms-summary.json",
                  {"schema": REPORT_SCHEMA, "command": "norms",
                   "seed": int(config["seed"]), "rows": summary_rows})
    return 0


def _ratio_matrix(config: dict, grid: Grid, threads: int) -> list[dict]:
    gen = GeneratorSpec.from_name(config["generator"])
    members = _corpus_members(config)
    seed = int(config["seed"])

    def run(member: CorpusFunction):
        f = realize(member, grid, seed)
        return member, f, _seminorm_suite(f, config, gen, grid)

    with ThreadPoolExecutor(max_workers=threads) as pool:
        results = list(pool.map(run, members))

    rows = []
    for member, f, reports in sorted(results, key=lambda item: item[0].id):
        classical = reports["classical"].value
        row = {"function_id": member.id}
        if classical == 0.0:
            row["excluded"] = True
            row["anomaly"] = member.kind != "constant" and f.max_abs() > 0
            rows.append(row)
            continue
        row["excluded"] = False
        row["semigroup_over_classical"] = reports["semigroup"].value / classical
        semigroup = reports["semigroup"].value
        row["maximal_over_semigroup"] = (reports["maximal"].value / semigroup
                                         if semigroup > 0 else np.inf)
        row["squarefn_over_classical"] = reports["square_function"].value / classical
        if "carleson_tent" in reports:
            row["carleson_over_classical"] = reports["carleson_tent"].value / classical
        rows.append(row)
    return rows


_RATIO_COLUMNS = ("semigroup_over_classical", "maximal_over_semigroup",
                  "squarefn_over_classical", "carleson_over_classical")


def _column_extrema(rows: list[dict]) -> dict:
    extrema = {}
    for column in _RATIO_COLUMNS:
        values = [row[column] for row in rows if column in row]
        if values:
            extrema[column] = {"min": min(values), "max": max(values)}
    return extrema


def cmd_equivalence(config: dict, out_dir: str, threads: int) -> int:
    if len(_corpus_members(config)) < 3:
        raise ConfigError("equivalence needs at least 3 corpus functions")
    grid = _build_grid(config)
    rows = _ratio_matrix(config, grid, threads)

    refined_config = json.loads(json.dumps(config))
    refined_config["grid"]["points_per_axis"] = 2 * grid.points_per_axis
    refined = _build_grid(refined_config)
    refined_rows = _ratio_matrix(refined_config, refined, threads)

    base = _column_extrema(rows)
    fine = _column_extrema(refined_rows)
    drift = {}
    for column in base:
        if column in fine and base[column]["max"] > 0:
            drift[column] = abs(fine[column]["max"] - base[column]["max"]) / base[column]["max"]

    for row in rows:
        if row.get("anomaly"):
            raise InvariantError(f"zero classical seminorm for non-constant "
                                 f"function {row['function_id']}")
        for column in _RATIO_COLUMNS:
            if column in row and not (np.isfinite(row[column]) and row[column] > 0):
                raise InvariantError(f"non-positive ratio {column} for {row['function_id']}")

    _write_report(out_dir, "equivalence.json", {
        "schema": REPORT_SCHEMA, "command": "equivalence",
        "seed": int(config["seed"]),
        "rows": rows, "extrema": base,
        "refined_extrema": fine,
        "refined_points_per_axis": refined.points_per_axis,
        "corpus_max_drift": drift,
    })
    return 0


def cmd_reproduce(config: dict, out_dir: str, threads: int) -> int:
    seed = int(config["seed"])
    count = int(config["time"]["count"])
    constant_rows = []
    for m in (1, 2):
        check_grid = LogTimeGrid(1e-3, 1e3 ** (1.0 / m), max(count, 2048))
        computed, rel = calderon_constant_check(m, check_grid)
        constant_rows.append({"m": m, "computed": computed,
                              "exact": 1.0 / reproduction_constant(m),
                              "relative_error": rel})

    battery = []
    worst = 0.0
    rng = np.random.default_rng(seed)
    for gen in (GeneratorSpec.heat(), GeneratorSpec.poisson()):
        for dimension, points in ((1, 512), (2, 128)):
            grid = Grid(dimension, points, 2.0 * np.pi)
            tgrid = LogTimeGrid.auto_for(gen, grid, count)
            for trial in range(5):
                f = _random_band_limited(grid, rng, band=points // 8)
                rebuilt = calderon_reproduce(gen, f, tgrid)
                err = (Field(grid, rebuilt.samples - f.samples).lp_norm(2)
                       / f.lp_norm(2))
                worst = max(worst, err)
                battery.append({"generator": gen.kind, "dimension": dimension,
                                "points_per_axis": points, "trial": trial,
                                "relative_l2_error": err})
    _write_report(out_dir, "reproduce.json", {
        "schema": REPORT_SCHEMA, "command": "reproduce", "seed": seed,
        "constants": constant_rows, "battery": battery,
        "worst_relative_error": worst,
    })
    print(f"reproduce: worst relative L2 error {worst:.3e}")
    return 0


def _random_band_limited(grid: Grid, rng: np.random.Generator, band: int) -> Field:
    k = np.fft.fftfreq(grid.points_per_axis, d=1.0 / grid.points_per_axis)
    in_band = np.abs(k) <= band
    support = in_band if grid.dimension == 1 else in_band[:, None] & in_band[None, :]
    coeff = rng.normal(size=grid.shape) + 1j * rng.normal(size=grid.shape)
    coeff[~support] = 0.0
    coeff[(0,) * grid.dimension] = 0.0
    return Field(grid, np.fft.ifftn(coeff * grid.size))


def cmd_atoms(config: dict, out_dir: str, threads: int) -> int:
    grid = _build_grid(config)
    gen = GeneratorSpec.from_name(config["generator"])
    params = MorreyParams(float(config["params"]["p"]), float(config["params"]["lambda"]))
    seed = int(config["seed"])
    tgrid = _build_tgrid(config, gen, grid)
    radii = _build_radii(config, grid)
    stride = _build_stride(config, grid)
    balls = ball_enumerate(grid, radii, stride)

    def export_atom(atom, name):
        lines = [f"# ball_center={','.join(str(c) for c in atom.ball.center_index)}"
                 f" radius={atom.ball.radius!r} q={atom.q!r} lambda={atom.lam!r}",
                 "index,re,im"]
        for i, v in enumerate(atom.field.flat):
            lines.append(f"{i},{float(v.real)!r},{float(v.imag)!r}")
        atomic_write_text(os.path.join(out_dir, name), "\n".join(lines) + "\n")

    members = [m for m in _corpus_members(config) if m.kind != "constant"]
    rows = []
    for member in members[:3]:
        f = realize(member, grid, seed)
        f = Field(grid, f.samples - f.mean())
        family = extremal_atom_family(f, params, balls)
        for atom in family:
            atom.validate()
        for index, atom in enumerate(family[:5]):
            export_atom(atom, f"{member.id}-atom{index}.csv")
        for atom in family[:5]:
            lhs, rhs, gap = dual_identity_check(f, atom.field, atom.ball, gen,
                                                params, tgrid)
            rows.append({"function_id": member.id,
                         "ball": {"center": list(atom.ball.center_index),
                                  "radius": atom.ball.radius},
                         "lhs": lhs, "rhs": rhs, "gap": gap,
                         "K": tgrid.count,
                         "t_span": [tgrid.t_min, tgrid.t_max]})
            scale = max(abs(lhs), abs(rhs), 1e-12)
            if gap / scale > 1e-2:
                raise InvariantError(
                    f"dual identity gap {gap / scale:.3e} for {member.id}")
    _write_report(out_dir, "atoms.json", {
        "schema": REPORT_SCHEMA, "command": "atoms", "seed": seed,
        "atom_count": sum(1 for _ in rows), "identity_checks": rows,
    })
    return 0


def cmd_selftest(config: dict, out_dir: str, threads: int,
                 inject_fault: bool = False) -> int:
    checks: list[tuple[str, bool, str]] = []

    def record(name: str, passed: bool, detail: str = "") -> None:
        checks.append((name, bool(passed), detail))

    grid = Grid(1, 128, 2.0 * np.pi)
    rng = np.random.default_rng(int(config["seed"]))
    f = _random_band_limited(grid, rng, band=16)
    ones = Field(grid, np.ones(grid.shape))

    for gen in (GeneratorSpec.heat(), GeneratorSpec.poisson()):
        t1, t2 = 0.03, 0.11
        lhs = apply_P(gen, t1, apply_P(gen, t2, f))
        rhs = apply_P(gen, t1 + t2, f)
        if inject_fault:
            rhs = Field(grid, rhs.samples * (1.0 + 1e-6))
        gap = float(np.max(np.abs(lhs.samples - rhs.samples)))
        record(f"semigroup-law-{gen.kind}", gap <= 1e-10, f"gap={gap:.3e}")

        swap = float(np.max(np.abs(
            apply_P(gen, t2, apply_P(gen, t1, f)).samples - lhs.samples)))
        record(f"commutativity-{gen.kind}", swap <= 1e-12, f"gap={swap:.3e}")

        g = _random_band_limited(grid, rng, band=16)
        sym = abs(pair(apply_P(gen, t1, f), g) - pair(f, apply_P(gen, t1, g)))
        record(f"pairing-symmetry-{gen.kind}", sym <= 1e-10, f"gap={sym:.3e}")

        cons = float(np.max(np.abs(apply_P(gen, t1, ones).samples - 1.0)))
        record(f"conservation-{gen.kind}", cons <= 1e-12, f"gap={cons:.3e}")
        qzero = float(np.max(np.abs(apply_Q(gen, t1, ones).samples)))
        record(f"q-kills-constants-{gen.kind}", qzero <= 1e-12, f"gap={qzero:.3e}")

        # Composition oracle: Q_{t1} Q_{t2} has spectral multiplier
        # (t1 a)(t2 a) e^{-(t1+t2) a}.
        a = gen.symbol(grid.frequency_magnitude())
        oracle = np.fft.ifftn(np.fft.fftn(f.samples)
                              * (t1 * a) * (t2 * a) * np.exp(-(t1 + t2) * a))
        comp = float(np.max(np.abs(
            apply_Q(gen, t1, apply_Q(gen, t2, f)).samples - oracle)))
        record(f"q-composition-{gen.kind}", comp <= 1e-10, f"gap={comp:.3e}")

    gen = GeneratorSpec.poisson()
    t = 0.25
    smoothed = apply_P(gen, t, f)
    pos = 17
    centered = Field(grid, np.abs(f.samples - smoothed.flat[pos]) ** 2)
    lhs_val = apply_P(gen, t, centered).flat[pos].real
    sq = apply_P(gen, t, Field(grid, np.abs(f.samples) ** 2)).flat[pos].real
    rhs_val = sq - abs(smoothed.flat[pos]) ** 2
    record("variance-identity", abs(lhs_val - rhs_val) <= 1e-10,
           f"gap={abs(lhs_val - rhs_val):.3e}")

    for kind in ("heat", "poisson"):
        profile = KernelProfile(kind, 1)
        result = verify_kernel_bounds(profile,
                                      np.array([0.05, 0.2, 1.0]),
                                      np.linspace(-3.0, 3.0, 61))
        record(f"kernel-bounds-{kind}", result["all_pass"])

    params = MorreyParams(2.0, 0.5)
    gen = GeneratorSpec.heat()
    tgrid = LogTimeGrid.auto_for(gen, grid, 256)
    ball = make_ball(grid, 40, 12 * grid.spacing)
    atom = make_atom(Field(grid, grid.coordinate_arrays()[0] + 0j), ball, 2.0, 0.5)
    atom.validate()
    lhs_d, rhs_d, gap_d = dual_identity_check(f, atom.field, ball, gen, params, tgrid)
    rel = gap_d / max(abs(lhs_d), 1e-12)
    record("dual-identity", rel <= 1e-3, f"rel_gap={rel:.3e}")

    failed = [name for name, ok, _ in checks if not ok]
    payload = {"schema": REPORT_SCHEMA, "command": "selftest",
               "seed": int(config["seed"]),
               "checks": [{"name": n, "passed": ok, "detail": d}
                          for n, ok, d in checks],
               "failed": failed}
    _write_report(out_dir, "selftest.json", payload)
    for name, ok, detail in checks:
        print(f"{'PASS' if ok else 'FAIL'} {name} {detail}".rstrip())
    if failed:
        raise InvariantError("failed checks: " + ", ".join(failed))
    return 0


# ---------------------------------------------------------------------------
# Entry point

def main(argv: list[str] | None = None) -> int:
    parser = argparse.ArgumentParser(prog="morreykit",
                                     description=__doc__.strip().splitlines()[0])
    sub = parser.add_subparsers(dest="command", required=True)
    for name in ("norms", "equivalence", "reproduce", "atoms", "selftest"):
        cmd = sub.add_parser(name)
        cmd.add_argument("--config", default=None, help="JSON config path")
        cmd.add_argument("--out", default=".", help="output directory")
        cmd.add_argument("--threads", type=int, default=None)
        cmd.add_argument("--seed", type=int, default=None)
        if name == "selftest":
            cmd.add_argument("--inject-fault", action="store_true",
                             help="deliberately corrupt one check (test mode)")
    args = parser.parse_args(argv)

    try:
        config = load_config(args.config, args.seed)
        threads = _thread_count(args.threads)
        os.makedirs(args.out, exist_ok=True)
        if args.command == "norms":
            return cmd_norms(config, args.out, threads)
        if args.command == "equivalence":
            return cmd_equivalence(config, args.out, threads)
        if args.command == "reproduce":
            return cmd_reproduce(config, args.out, threads)
        if args.command == "atoms":
            return cmd_atoms(config, args.out, threads)
        return cmd_selftest(config, args.out, threads,
                            inject_fault=getattr(args, "inject_fault", False))
    except ConfigError as exc:
        print(f"config error: {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except TruncationError as exc:
        print(f"config error (time span): {exc}", file=sys.stderr)
        return EXIT_CONFIG
    except InvariantError as exc:
        print(f"invariant failure: {exc}", file=sys.stderr)
        return EXIT_INVARIANT


if __name__ == "__main__":
    sys.exit(main())
