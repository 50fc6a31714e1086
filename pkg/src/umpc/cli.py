"""Command-line interface.

Five subcommands: ``run`` (full protocol on a dataset), ``sample-graph``
(emit an edge set), ``gen-noise`` (emit decoded noise draws), ``compare``
(empirical and closed-form protocol comparison), and ``reproduce`` (named
experiment presets).

Output contract: every CSV starts with a ``# config_hash=<h> seed=<s>``
comment line, then a header row, then data rows; floats are written with
repr so equal configurations produce byte-identical files. JSON output
carries the same hash/seed/columns/rows with sorted keys. The hash covers
the resolved options except seed and output destination.

Option precedence: command line over ``--config`` file (``key=value``
lines) over the ``UMPC_SEED`` environment variable (seed only) over
built-in defaults.

Exit codes: 0 on success; 1 for runtime failures (e.g. sampling
exhausted); 2 for usage, configuration, or input parsing errors.
"""

from __future__ import annotations

import argparse
import csv
import hashlib
import io
import json
import math
import os
import sys
from dataclasses import dataclass

import numpy as np

from umpc.baselines import COST_MODEL_NAMES, CostParams, bell_estimate, cost_eval
from umpc.datasets import gen_synthetic, load_csv
from umpc.errors import (
    ConfigError,
    DomainError,
    ParseError,
    UmpcError,
    UsageError,
)
from umpc.evaluation import (
    MseConfig,
    PRESETS,
    SAMPLERS,
    complete_ustat,
    draw_edges,
    mse_experiment,
    run_preset,
)
from umpc.fixedpoint import FpConfig
from umpc.kernels import auc_rescale_factor, get_kernel, kernel_names
from umpc.noise import NOISE_MODES, NoiseSpec, generate_noise
from umpc.protocol import run_umpc

__all__ = ["RunConfig", "main", "dispatch", "build_parser"]


def _conv_int(s: str) -> int:
    try:
        return int(s)
    except ValueError:
        raise ConfigError(f"expected an integer, got {s!r}") from None


def _conv_float(s: str) -> float:
    try:
        return float(s)
    except ValueError:
        raise ConfigError(f"expected a number, got {s!r}") from None


def _conv_bool(s: str) -> bool:
    low = s.strip().lower()
    if low in ("1", "true", "yes", "on"):
        return True
    if low in ("0", "false", "no", "off"):
        return False
    raise ConfigError(f"expected a boolean, got {s!r}")


def _conv_str(s: str) -> str:
    return s


# option name -> (converter, default, help); _conv_bool options become flags
_SPECS: dict[str, dict[str, tuple]] = {
    "run": {
        "data": (_conv_str, None, "CSV file to load"),
        "columns": (_conv_str, None, "comma-separated column names to use"),
        "roles": (_conv_str, None, "comma-separated column roles (numeric/categorical/label)"),
        "synthetic": (_conv_str, None, "synthetic data kind instead of --data"),
        "n": (_conv_int, None, "rows for synthetic data"),
        "kernel": (_conv_str, None, f"kernel name, one of {kernel_names()}"),
        "normalization": (_conv_str, "minmax", "numeric column normalization (minmax/none)"),
        "sampler": (_conv_str, "balanced", f"edge sampling strategy, one of {SAMPLERS}"),
        "edges": (_conv_str, "frac:0.5", "edge count, an integer or frac:<0..1>"),
        "epsilon": (_conv_float, 1.0, "privacy budget"),
        "delta": (_conv_float, 0.0, "privacy failure probability (Gaussian modes)"),
        "noise_mode": (_conv_str, "dlap_full", f"noise protocol, one of {NOISE_MODES}"),
        "no_noise": (_conv_bool, False, "disable the noise phase"),
        "honest_fraction": (_conv_float, 1.0, "honest-party fraction for subgroup noise"),
        "failure_prob": (_conv_float, 1e-9, "subgroup all-corrupt probability bound"),
        "ell": (_conv_int, 40, "ring width in bits"),
        "c": (_conv_int, 14, "fractional bits"),
        "repetitions": (_conv_int, 1, "independent protocol runs"),
        "serial": (_conv_bool, False, "charge noise and computing rounds serially"),
    },
    "sample-graph": {
        "n": (_conv_int, None, "number of vertices"),
        "k": (_conv_int, 2, "edge size"),
        "edges": (_conv_str, None, "edge count, an integer or frac:<0..1>"),
        "sampler": (_conv_str, "balanced", f"edge sampling strategy, one of {SAMPLERS}"),
    },
    "gen-noise": {
        "mode": (_conv_str, "dlap_full", f"noise protocol, one of {NOISE_MODES}"),
        "epsilon": (_conv_float, 1.0, "privacy budget"),
        "delta": (_conv_float, 0.0, "privacy failure probability (Gaussian modes)"),
        "sensitivity": (_conv_float, 1.0, "statistic sensitivity before edge averaging"),
        "parties": (_conv_int, 16, "number of parties"),
        "samples": (_conv_int, 1, "number of draws"),
        "ell": (_conv_int, 40, "ring width in bits"),
        "c": (_conv_int, 14, "fractional bits"),
        "honest_fraction": (_conv_float, 1.0, "honest-party fraction for subgroup noise"),
        "failure_prob": (_conv_float, 1e-9, "subgroup all-corrupt probability bound"),
    },
    "compare": {
        "n": (_conv_int, 200, "number of parties"),
        "t": (_conv_int, 16, "baseline discretization bins"),
        "epsilon": (_conv_float, 1.0, "privacy budget"),
        "kernel": (_conv_str, "gini", "kernel name (gini, kendall, or dup)"),
        "edges": (_conv_str, None, "edge count for this protocol (default 2n)"),
        "reps_umpc": (_conv_int, 200, "Monte Carlo repetitions for this protocol"),
        "reps_bell": (_conv_int, 100, "Monte Carlo repetitions for the baseline"),
        "ell": (_conv_int, 40, "ring width in bits"),
        "kappa": (_conv_float, 0.0, "security-parameter addend in shuffle-model rows"),
    },
    "reproduce": {
        "n": (_conv_int, None, "override the preset's data size"),
        "reps": (_conv_int, None, "override the preset's repetition count"),
    },
}

_KERNEL_ROLES = {
    "kendall": ("numeric", "numeric"),
    "gini": ("numeric",),
    "dup": ("categorical",),
    "auc": ("numeric", "label"),
    "rand": ("categorical", "categorical"),
}


@dataclass(frozen=True)
class RunConfig:
    """A fully resolved invocation: subcommand, options, and output plan."""

    command: str
    options: dict
    seed: int
    out: str | None
    fmt: str

    @property
    def config_hash(self) -> str:
        payload = {"command": self.command}
        payload.update({k: self.options[k] for k in sorted(self.options)})
        digest = hashlib.sha256(json.dumps(payload, sort_keys=True).encode())
        return digest.hexdigest()[:16]


def _read_config_file(path: str) -> dict[str, str]:
    values: dict[str, str] = {}
    try:
        with open(path) as fh:
            for lineno, line in enumerate(fh, start=1):
                stripped = line.strip()
                if not stripped or stripped.startswith("#"):
                    continue
                if "=" not in stripped:
                    raise ConfigError(f"{path}:{lineno}: expected key=value, got {stripped!r}")
                key, _, value = stripped.partition("=")
                values[key.strip().replace("-", "_")] = value.strip()
    except OSError as exc:
        raise ConfigError(f"cannot read config file {path}: {exc}") from None
    return values


def _resolve(command: str, args: argparse.Namespace) -> RunConfig:
    spec = _SPECS[command]
    options = {name: default for name, (_, default, _) in spec.items()}

    file_vals: dict[str, str] = {}
    config_path = getattr(args, "config", None)
    if config_path is not None:
        file_vals = _read_config_file(config_path)
    file_seed: int | None = None
    for key, raw in file_vals.items():
        if key == "seed":
            file_seed = _conv_int(raw)
            continue
        if key not in spec:
            raise ConfigError(f"unknown option {key!r} in config file for {command!r}")
        options[key] = spec[key][0](raw)

    for key in spec:
        cli_val = getattr(args, key, None)
        if cli_val is None:
            continue
        options[key] = cli_val if isinstance(cli_val, bool) else spec[key][0](cli_val)

    if command == "reproduce":
        options["preset"] = args.preset

    cli_seed = getattr(args, "seed", None)
    if cli_seed is not None:
        seed = _conv_int(cli_seed)
    elif file_seed is not None:
        seed = file_seed
    elif "UMPC_SEED" in os.environ:
        seed = _conv_int(os.environ["UMPC_SEED"])
    else:
        seed = 0

    return RunConfig(
        command=command,
        options=options,
        seed=seed,
        out=getattr(args, "out", None),
        fmt=getattr(args, "format", None) or "csv",
    )


def _cell(value) -> str:
    if value is None:
        return ""
    if isinstance(value, bool):
        return "true" if value else "false"
    if isinstance(value, (float, np.floating)):
        return repr(float(value))
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    return str(value)


def _json_cell(value):
    if isinstance(value, np.floating):
        return float(value)
    if isinstance(value, np.integer):
        return int(value)
    return value


def _emit(cfg: RunConfig, columns, rows, notes: tuple[str, ...] = ()) -> None:
    if cfg.fmt == "csv":
        buf = io.StringIO()
        buf.write(f"# config_hash={cfg.config_hash} seed={cfg.seed}\n")
        for note in notes:
            buf.write(f"# {note}\n")
        writer = csv.writer(buf, lineterminator="\n")
        writer.writerow(columns)
        for row in rows:
            writer.writerow([_cell(v) for v in row])
        text = buf.getvalue()
    else:
        payload = {
            "config_hash": cfg.config_hash,
            "seed": cfg.seed,
            "columns": list(columns),
            "rows": [[_json_cell(v) for v in row] for row in rows],
        }
        if notes:
            payload["notes"] = list(notes)
        text = json.dumps(payload, sort_keys=True) + "\n"
    if cfg.out is None:
        sys.stdout.write(text)
    else:
        with open(cfg.out, "w", newline="") as fh:
            fh.write(text)


def _parse_edges(spec: str, n: int, k: int) -> int:
    total = math.comb(n, k)
    if spec.startswith("frac:"):
        frac = _conv_float(spec[len("frac:") :])
        if not 0.0 < frac <= 1.0:
            raise ConfigError(f"edge fraction must lie in (0, 1], got {frac}")
        m = max(1, round(frac * total))
    else:
        m = _conv_int(spec)
    if not 1 <= m <= total:
        raise ConfigError(f"edge count must lie in [1, {total}], got {m}")
    return m


def _load_run_data(opts: dict, kernel_name: str, rng: np.random.Generator) -> np.ndarray:
    if (opts["data"] is None) == (opts["synthetic"] is None):
        raise ConfigError("provide exactly one of --data and --synthetic")
    if opts["synthetic"] is not None:
        if opts["n"] is None:
            raise ConfigError("--synthetic needs --n")
        return gen_synthetic(opts["n"], opts["synthetic"], rng).values
    columns = opts["columns"].split(",") if opts["columns"] else None
    roles = tuple(opts["roles"].split(",")) if opts["roles"] else None
    if roles is None and columns is not None:
        default_roles = _KERNEL_ROLES.get(kernel_name)
        if default_roles is not None and len(default_roles) == len(columns):
            roles = default_roles
    ds = load_csv(opts["data"], columns, roles, opts["normalization"])
    return ds.values


def _noise_spec(opts: dict) -> NoiseSpec | None:
    if opts.get("no_noise"):
        return None
    return NoiseSpec(
        epsilon=opts["epsilon"],
        delta=opts["delta"],
        sensitivity=1.0,
        mode=opts["noise_mode"],
        honest_fraction=opts["honest_fraction"],
        failure_prob=opts["failure_prob"],
    )


def _cmd_run(cfg: RunConfig, rng: np.random.Generator) -> None:
    opts = cfg.options
    if opts["kernel"] is None:
        raise ConfigError("--kernel is required")
    kernel = get_kernel(opts["kernel"], ell=opts["ell"])
    ring = FpConfig(ell=opts["ell"], c=opts["c"])
    arr = _load_run_data(opts, kernel.name, rng)
    if arr.shape[1] != kernel.components:
        raise ConfigError(
            f"kernel {kernel.name!r} needs {kernel.components} column(s)"
            f" ({'/'.join(_KERNEL_ROLES.get(kernel.name, ()))}), got {arr.shape[1]}"
        )
    kernel.check_domain(arr)
    n = arr.shape[0]
    m = _parse_edges(opts["edges"], n, kernel.arity)
    noise = _noise_spec(opts)

    notes: tuple[str, ...] = ()
    if kernel.name == "auc":
        factor = auc_rescale_factor(arr[:, 1])
        notes = (f"auc_rescale_factor={factor!r}",)

    rows = []
    for rep in range(opts["repetitions"]):
        g = draw_edges(opts["sampler"], m, kernel.arity, n, rng)
        res = run_umpc(arr, g, kernel, noise, ring, rng, parallel=not opts["serial"])
        rows.append([
            rep, res.released, res.noiseless, res.eta_grid, res.edge_count,
            res.delta_g_max, res.ledger.total_bits, res.ledger.total_rounds,
        ])
    columns = [
        "rep", "released", "noiseless", "eta_grid", "edges",
        "delta_g_max", "total_bits", "total_rounds",
    ]
    _emit(cfg, columns, rows, notes)


def _cmd_sample_graph(cfg: RunConfig, rng: np.random.Generator) -> None:
    opts = cfg.options
    if opts["n"] is None or opts["edges"] is None:
        raise ConfigError("sample-graph needs --n and --edges")
    n, k = opts["n"], opts["k"]
    m = _parse_edges(opts["edges"], n, k)
    g = draw_edges(opts["sampler"], m, k, n, rng)
    columns = [f"v{i}" for i in range(k)]
    _emit(cfg, columns, g.edges.tolist())


def _cmd_gen_noise(cfg: RunConfig, rng: np.random.Generator) -> None:
    opts = cfg.options
    ring = FpConfig(ell=opts["ell"], c=opts["c"])
    spec = NoiseSpec(
        epsilon=opts["epsilon"],
        delta=opts["delta"],
        sensitivity=opts["sensitivity"],
        mode=opts["mode"],
        honest_fraction=opts["honest_fraction"],
        failure_prob=opts["failure_prob"],
    )
    if opts["samples"] < 1:
        raise ConfigError("--samples must be at least 1")
    rows = []
    for _ in range(opts["samples"]):
        outcome = generate_noise(opts["parties"], spec, ring, rng)
        rows.append([outcome.plaintext_eta_grid * ring.scale])
    _emit(cfg, ["eta"], rows)


_COMPARE_DATA = {"gini": "uniform01", "kendall": "uniform01_pairs", "dup": None}


def _cmd_compare(cfg: RunConfig, rng: np.random.Generator) -> None:
    opts = cfg.options
    if opts["kernel"] not in _COMPARE_DATA:
        raise ConfigError(
            f"compare supports kernels {tuple(_COMPARE_DATA)}, got {opts['kernel']!r}"
        )
    kernel = get_kernel(opts["kernel"], ell=opts["ell"])
    n, t = opts["n"], opts["t"]
    kind = _COMPARE_DATA[kernel.name] or f"categorical({t})"
    data = gen_synthetic(n, kind, rng).values
    ref = complete_ustat(data, kernel)
    m = _parse_edges(opts["edges"], n, 2) if opts["edges"] else min(2 * n, math.comb(n, 2))

    report = mse_experiment(
        MseConfig(
            data=data, kernel=kernel, sampler="balanced", m=m,
            repetitions=opts["reps_umpc"], seed=cfg.seed, epsilon=opts["epsilon"],
            reference=ref,
        )
    )
    bell_errs = np.array([
        (bell_estimate(data, kernel, t, opts["epsilon"], rng) - ref) ** 2
        for _ in range(opts["reps_bell"])
    ])
    empirical_lookup = {
        "Umpc_Dis": (report.mse, report.se_mse),
        "Bell": (
            float(bell_errs.mean()),
            float(bell_errs.std(ddof=1) / math.sqrt(len(bell_errs))) if len(bell_errs) > 1 else None,
        ),
    }

    params = CostParams(
        n=n, t=t, epsilon=opts["epsilon"], ell=opts["ell"], m_edges=m,
        k=kernel.arity, delta_f=kernel.delta_f, l_f=kernel.lipschitz,
        cc_f=kernel.comm_bits_per_eval, ct_f=kernel.ops_per_eval,
        kappa=opts["kappa"],
    )
    rows = []
    for name in COST_MODEL_NAMES:
        rep = cost_eval(name, params)
        empirical, se = empirical_lookup.get(name, (None, None))
        rows.append([
            name, empirical, se, rep.mse, rep.comm_bits, rep.party_ops, rep.server_ops,
        ])
    columns = [
        "protocol", "mse_empirical", "se_mse", "mse_model",
        "comm_bits", "party_ops", "server_ops",
    ]
    notes = ("cost columns evaluate closed-form models with unit constants; logarithms are base 2",)
    _emit(cfg, columns, rows, notes)


def _cmd_reproduce(cfg: RunConfig, rng: np.random.Generator) -> None:
    opts = cfg.options
    columns, rows = run_preset(opts["preset"], cfg.seed, opts["n"], opts["reps"])
    _emit(cfg, columns, rows)


_HANDLERS = {
    "run": _cmd_run,
    "sample-graph": _cmd_sample_graph,
    "gen-noise": _cmd_gen_noise,
    "compare": _cmd_compare,
    "reproduce": _cmd_reproduce,
}


def dispatch(cfg: RunConfig) -> int:
    """Execute a resolved invocation; returns the process exit code."""
    try:
        _HANDLERS[cfg.command](cfg, np.random.default_rng(cfg.seed))
        return 0
    except (UsageError, ConfigError, ParseError, DomainError) as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    except UmpcError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 1


def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="umpc",
        description="Differentially private incomplete U-statistics over secure aggregation.",
    )
    sub = parser.add_subparsers(dest="command", metavar="command")
    descriptions = {
        "run": "run the full protocol on a dataset",
        "sample-graph": "draw an edge set and emit it as CSV",
        "gen-noise": "draw calibrated noise values",
        "compare": "compare against the local-DP baseline and cost models",
        "reproduce": f"run a named experiment preset, one of {tuple(PRESETS)}",
    }
    for command, spec in _SPECS.items():
        sp = sub.add_parser(command, help=descriptions[command])
        if command == "reproduce":
            sp.add_argument("preset", choices=tuple(PRESETS), help="preset name")
        for name, (conv, default, help_text) in spec.items():
            flag = "--" + name.replace("_", "-")
            if conv is _conv_bool and default is False:
                sp.add_argument(flag, dest=name, action="store_true", default=None, help=help_text)
            else:
                sp.add_argument(flag, dest=name, default=None, help=help_text)
        sp.add_argument("--seed", default=None, help="RNG seed (also via UMPC_SEED)")
        sp.add_argument("--config", default=None, help="key=value option file")
        sp.add_argument("--out", default=None, help="output file (default stdout)")
        sp.add_argument("--format", choices=("csv", "json"), default=None, help="output format")
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    args = parser.parse_args(argv)
    if args.command is None:
        parser.print_usage(file=sys.stderr)
        return 2
    try:
        cfg = _resolve(args.command, args)
    except UmpcError as exc:
        print(f"error: {type(exc).__name__}: {exc}", file=sys.stderr)
        return 2
    return dispatch(cfg)


if __name__ == "__main__":
    sys.exit(main())
