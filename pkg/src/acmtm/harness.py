"""Config-driven experiments: parse, run, replicate, aggregate, emit CSVs.

An experiment is described by one YAML file with nested sections (target,
sampler, run lengths, replication, outputs).  Unknown keys anywhere are
rejected outright so typos fail loudly.  Each replicate r runs on its own
random stream ``(base_seed, r)`` (the multiple-try adapter's coin gets a
separate stream, offset far above any replicate id), which makes every
emitted number a pure function of the spec and the seed, independent of
worker-pool width or execution order.  Wall time is the one exception: it is
measured around the sweep loop and lands in summary.csv for efficiency-per-
second comparisons, and is inherently not reproducible run to run.

CSV artifacts (fixed schemas, one directory per experiment, one subdirectory
per replicate when replicating):
  summary.csv          replicate, asj, wall_time, act_1..act_d, ess_1..ess_d
                       plus min/median/mean/max rows across replicates
  selection.csv        coordinate, proposal, sigma, frequency
  acceptance.csv       coordinate, proposal, sigma, frequency
  final_grid.csv       coordinate, proposal, sigma
  adaptation_log.csv   iteration, coordinate, branch, sigma_min_old,
                       sigma_min_new, sigma_max_old, sigma_max_new
  alpha_sweep.csv      alpha, asj, act_1..act_d
  trace.csv            iteration, x_1..x_d (thinned, on request)
Coordinates and proposals are 1-based in every CSV.
"""

from __future__ import annotations

import csv
import json
import math
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field, replace
from pathlib import Path
from typing import Callable

import numpy as np
import yaml

from .adaptation import (
    DEFAULT_BETA,
    DEFAULT_SCALE_CAP,
    DEFAULT_SCALE_FLOOR,
    AcmhState,
    AdaptationEvent,
    AdaptationState,
    acmh_maybe_update,
    maybe_adapt,
    record_acceptances,
    record_sweep,
)
from .diagnostics import ChainTrace, DiagnosticsReport, diagnostics_report
from .kernels import (
    KernelConfig,
    ScaleGrid,
    cmh_sweep,
    cmtm_sweep,
    mixture_cmh_sweep,
)
from .rng import RngStream, make_stream
from .targets import (
    TargetModel,
    banana,
    four_dim_mixture,
    gaussian_mixture,
    load_grouped_data,
    twenty_dim_mixture,
    two_dim_mixture,
    variance_components,
)

# Replicate r draws from stream (seed, r); its adaptation coin from stream
# (seed, COIN_STREAM_OFFSET + r).  The offset just has to clear any sane
# replicate count.
COIN_STREAM_OFFSET = 2**32

SAMPLER_KINDS = ("cmh", "acmh", "mixture_cmh", "cmtm", "acmtm")
GRID_SAMPLERS = ("mixture_cmh", "cmtm", "acmtm")
ADAPTIVE_SAMPLERS = ("acmh", "acmtm")


class ConfigError(Exception):
    """Bad experiment spec: parse failure, unknown key, or invalid value."""


class ExperimentRuntimeError(RuntimeError):
    """A replicate failed while running."""


@dataclass(frozen=True)
class RegionSpec:
    """Splits frequency tables by sign of (x[coordinate] - threshold);
    ``coordinate`` is 1-based as in the CSVs."""

    coordinate: int
    threshold: float


@dataclass(frozen=True)
class SamplerSettings:
    kind: str
    m: int = 1
    alpha: float = 2.9
    scales: tuple[float, ...] | None = None
    beta: int = DEFAULT_BETA
    batch_size: int = 100
    target_rate: float = 0.44
    scale_floor: float = DEFAULT_SCALE_FLOOR
    scale_cap: float = DEFAULT_SCALE_CAP


@dataclass(frozen=True)
class ExperimentSpec:
    """Everything needed to reproduce an experiment, plain data throughout
    (worker processes rebuild the target from ``target``)."""

    target: dict
    sampler: SamplerSettings
    iterations: int
    burn_in: int
    replicates: int = 1
    base_seed: int = 0
    output_dir: str = "out"
    label: str = "experiment"
    region: RegionSpec | None = None
    alphas: tuple[float, ...] | None = None
    initial_state: tuple[float, ...] | None = None


@dataclass
class ReplicateResult:
    replicate: int
    report: DiagnosticsReport
    final_scales: np.ndarray
    events: list[AdaptationEvent]
    wall_time: float
    thinned: np.ndarray | None = None  # columns: iteration, x_1..x_d


@dataclass
class ReplicateReport:
    spec: ExperimentSpec
    results: list[ReplicateResult]
    aggregate: dict = field(default_factory=dict)


# ----------------------------------------------------------------------
# Spec parsing.

def _check_keys(section: dict, allowed: set[str], required: set[str], where: str) -> None:
    if not isinstance(section, dict):
        raise ConfigError(f"{where} must be a mapping, got {type(section).__name__}")
    unknown = set(section) - allowed
    if unknown:
        raise ConfigError(
            f"unknown key(s) {sorted(unknown)} in {where}; allowed: {sorted(allowed)}"
        )
    missing = required - set(section)
    if missing:
        raise ConfigError(f"missing required key(s) {sorted(missing)} in {where}")


def _as_int(value, where: str, minimum: int | None = None) -> int:
    if isinstance(value, bool) or not isinstance(value, int):
        raise ConfigError(f"{where} must be an integer, got {value!r}")
    if minimum is not None and value < minimum:
        raise ConfigError(f"{where} must be >= {minimum}, got {value}")
    return value


def _as_float(value, where: str, positive: bool = False) -> float:
    if isinstance(value, bool) or not isinstance(value, (int, float)):
        raise ConfigError(f"{where} must be a number, got {value!r}")
    out = float(value)
    if not math.isfinite(out):
        raise ConfigError(f"{where} must be finite, got {value!r}")
    if positive and out <= 0:
        raise ConfigError(f"{where} must be positive, got {value!r}")
    return out


def _as_float_list(value, where: str) -> tuple[float, ...]:
    if not isinstance(value, (list, tuple)) or not value:
        raise ConfigError(f"{where} must be a non-empty list of numbers")
    return tuple(_as_float(v, f"{where}[{i}]") for i, v in enumerate(value))


def build_target(config: dict) -> TargetModel:
    """Construct the target named by a validated target section."""
    kind = config.get("kind")
    halfwidth = config.get("support_halfwidth")
    hw = {} if halfwidth is None else {"support_halfwidth": float(halfwidth)}
    if kind == "mixture_2d":
        return two_dim_mixture(**hw)
    if kind == "mixture_4d":
        return four_dim_mixture(**hw)
    if kind == "mixture_20d":
        return twenty_dim_mixture(**hw)
    if kind == "gaussian_mixture":
        return gaussian_mixture(
            weights=config["weights"],
            means=config["means"],
            variances=config["variances"],
            label=config.get("label", "gaussian_mixture"),
            **hw,
        )
    if kind == "banana":
        return banana(
            curvature=config.get("curvature", 0.01),
            dim=config.get("dim", 10),
            **hw,
        )
    if kind == "variance_components":
        data = None
        if config.get("data_file") is not None:
            data = load_grouped_data(config["data_file"])
        return variance_components(
            data=data,
            a1=config.get("a1", 300.0),
            b1=config.get("b1", 1000.0),
            a2=config.get("a2", 300.0),
            b2=config.get("b2", 1000.0),
            mu0=config.get("mu0", 0.0),
            sigma0_sq=config.get("sigma0_sq", 1.0e10),
            **hw,
        )
    raise ConfigError(f"unknown target kind {kind!r}")


def _validate_target_section(section: dict, base_dir: Path) -> dict:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError("target section must be a mapping with a 'kind' key")
    kind = section["kind"]
    allowed_by_kind = {
        "mixture_2d": {"kind", "support_halfwidth"},
        "mixture_4d": {"kind", "support_halfwidth"},
        "mixture_20d": {"kind", "support_halfwidth"},
        "gaussian_mixture": {"kind", "weights", "means", "variances", "label", "support_halfwidth"},
        "banana": {"kind", "curvature", "dim", "support_halfwidth"},
        "variance_components": {
            "kind", "a1", "b1", "a2", "b2", "mu0", "sigma0_sq", "data_file", "support_halfwidth",
        },
    }
    if kind not in allowed_by_kind:
        raise ConfigError(
            f"unknown target kind {kind!r}; known kinds: {sorted(allowed_by_kind)}"
        )
    required = {"kind"}
    if kind == "gaussian_mixture":
        required |= {"weights", "means", "variances"}
    _check_keys(section, allowed_by_kind[kind], required, "target")
    out = dict(section)
    if out.get("support_halfwidth") is not None:
        _as_float(out["support_halfwidth"], "target.support_halfwidth", positive=True)
    if kind == "banana":
        if "dim" in out:
            _as_int(out["dim"], "target.dim", minimum=2)
        if "curvature" in out:
            val = _as_float(out["curvature"], "target.curvature")
            if val < 0:
                raise ConfigError(f"target.curvature must be >= 0, got {val}")
    if kind == "variance_components" and out.get("data_file") is not None:
        path = Path(out["data_file"])
        if not path.is_absolute():
            path = base_dir / path
        if not path.exists():
            raise ConfigError(f"target.data_file not found: {path}")
        out["data_file"] = str(path)
    try:
        build_target(out)
    except ConfigError:
        raise
    except Exception as exc:
        raise ConfigError(f"invalid target section: {exc}") from exc
    return out


def _validate_sampler_section(section: dict, dim: int) -> SamplerSettings:
    if not isinstance(section, dict) or "kind" not in section:
        raise ConfigError("sampler section must be a mapping with a 'kind' key")
    kind = section["kind"]
    if kind not in SAMPLER_KINDS:
        raise ConfigError(f"unknown sampler kind {kind!r}; known kinds: {list(SAMPLER_KINDS)}")
    allowed = {
        "cmh": {"kind", "scales"},
        "acmh": {"kind", "scales", "batch_size", "target_rate", "scale_floor", "scale_cap"},
        "mixture_cmh": {"kind", "m", "scales"},
        "cmtm": {"kind", "m", "alpha", "scales"},
        "acmtm": {"kind", "m", "alpha", "scales", "beta", "scale_floor", "scale_cap"},
    }[kind]
    _check_keys(section, allowed, {"kind"}, "sampler")

    kwargs: dict = {"kind": kind}
    if kind in GRID_SAMPLERS:
        scales = section.get("scales")
        if scales is not None:
            row = _as_float_list(scales, "sampler.scales")
            if any(v <= 0 for v in row):
                raise ConfigError("sampler.scales must be positive")
            kwargs["scales"] = row
        if "m" in section:
            m = _as_int(section["m"], "sampler.m", minimum=1)
            if scales is not None and m != len(row):
                raise ConfigError(
                    f"sampler.m = {m} conflicts with {len(row)} explicit scales"
                )
            kwargs["m"] = m
        elif scales is not None:
            kwargs["m"] = len(row)
        else:
            raise ConfigError(f"sampler kind {kind!r} needs 'm' or an explicit 'scales' list")
    else:
        scales = section.get("scales", 1.0)
        if isinstance(scales, (list, tuple)):
            row = _as_float_list(scales, "sampler.scales")
            if len(row) != dim:
                raise ConfigError(
                    f"sampler.scales must have one entry per coordinate ({dim}), got {len(row)}"
                )
        else:
            row = (_as_float(scales, "sampler.scales", positive=True),) * dim
        if any(v <= 0 for v in row):
            raise ConfigError("sampler.scales must be positive")
        kwargs["scales"] = row
        kwargs["m"] = 1

    if "alpha" in section:
        val = _as_float(section["alpha"], "sampler.alpha")
        if val < 0:
            raise ConfigError(f"sampler.alpha must be >= 0, got {val}")
        kwargs["alpha"] = val
    if "beta" in section:
        kwargs["beta"] = _as_int(section["beta"], "sampler.beta", minimum=1)
    if "batch_size" in section:
        kwargs["batch_size"] = _as_int(section["batch_size"], "sampler.batch_size", minimum=1)
    if "target_rate" in section:
        val = _as_float(section["target_rate"], "sampler.target_rate")
        if not 0.0 < val < 1.0:
            raise ConfigError(f"sampler.target_rate must be in (0, 1), got {val}")
        kwargs["target_rate"] = val
    floor = section.get("scale_floor", DEFAULT_SCALE_FLOOR)
    cap = section.get("scale_cap", DEFAULT_SCALE_CAP)
    floor = _as_float(floor, "sampler.scale_floor", positive=True)
    cap = _as_float(cap, "sampler.scale_cap", positive=True)
    if floor >= cap:
        raise ConfigError(f"sampler.scale_floor {floor} must be below scale_cap {cap}")
    kwargs["scale_floor"] = floor
    kwargs["scale_cap"] = cap
    return SamplerSettings(**kwargs)


def spec_from_mapping(mapping: dict, base_dir: Path | str = ".") -> ExperimentSpec:
    """Validate a parsed config mapping into an :class:`ExperimentSpec`."""
    base_dir = Path(base_dir)
    top_allowed = {
        "target", "sampler", "iterations", "burn_in", "replicates", "base_seed",
        "output_dir", "label", "region", "alphas", "initial_state",
    }
    _check_keys(mapping, top_allowed, {"target", "sampler", "iterations"}, "experiment spec")

    target_cfg = _validate_target_section(mapping["target"], base_dir)
    target = build_target(target_cfg)
    sampler = _validate_sampler_section(mapping["sampler"], target.dim)

    iterations = _as_int(mapping["iterations"], "iterations", minimum=2)
    burn_in = mapping.get("burn_in")
    if burn_in is None:
        burn_in = iterations // 2
    else:
        burn_in = _as_int(burn_in, "burn_in", minimum=0)
    if burn_in > iterations - 2:
        raise ConfigError(
            f"burn_in {burn_in} leaves fewer than 2 of {iterations} iterations; "
            "need at least 2 retained sweeps"
        )
    replicates = _as_int(mapping.get("replicates", 1), "replicates", minimum=1)
    base_seed = _as_int(mapping.get("base_seed", 0), "base_seed", minimum=0)
    if base_seed >= 2**64:
        raise ConfigError(f"base_seed must fit in 64 bits, got {base_seed}")

    region = None
    if mapping.get("region") is not None:
        sect = mapping["region"]
        _check_keys(sect, {"coordinate", "threshold"}, {"coordinate", "threshold"}, "region")
        coord = _as_int(sect["coordinate"], "region.coordinate", minimum=1)
        if coord > target.dim:
            raise ConfigError(
                f"region.coordinate {coord} exceeds target dimension {target.dim}"
            )
        region = RegionSpec(coord, _as_float(sect["threshold"], "region.threshold"))

    alphas = None
    if mapping.get("alphas") is not None:
        alphas = _as_float_list(mapping["alphas"], "alphas")
        if any(a < 0 for a in alphas):
            raise ConfigError("alphas must be >= 0")

    initial_state = None
    if mapping.get("initial_state") is not None:
        initial_state = _as_float_list(mapping["initial_state"], "initial_state")
        if len(initial_state) != target.dim:
            raise ConfigError(
                f"initial_state must have {target.dim} entries, got {len(initial_state)}"
            )
        if target.log_density(np.array(initial_state)) == -math.inf:
            raise ConfigError("initial_state has zero target density")

    label = mapping.get("label")
    if label is None:
        label = f"{target.label}_{sampler.kind}"
    elif not isinstance(label, str) or not label:
        raise ConfigError(f"label must be a non-empty string, got {label!r}")

    output_dir = mapping.get("output_dir", "out")
    if not isinstance(output_dir, str) or not output_dir:
        raise ConfigError(f"output_dir must be a non-empty string, got {output_dir!r}")

    return ExperimentSpec(
        target=target_cfg,
        sampler=sampler,
        iterations=iterations,
        burn_in=burn_in,
        replicates=replicates,
        base_seed=base_seed,
        output_dir=output_dir,
        label=label,
        region=region,
        alphas=alphas,
        initial_state=initial_state,
    )


def parse_experiment_spec(path: str | Path) -> ExperimentSpec:
    """Load and validate a YAML experiment spec.

    Parse errors keep the YAML line/column context; validation errors name
    the offending key path.
    """
    path = Path(path)
    if not path.exists():
        raise ConfigError(f"spec file not found: {path}")
    try:
        with open(path, "r", encoding="utf-8") as fh:
            mapping = yaml.safe_load(fh)
    except yaml.YAMLError as exc:
        raise ConfigError(f"cannot parse {path}: {exc}") from exc
    if not isinstance(mapping, dict):
        raise ConfigError(f"{path}: top level must be a mapping of sections")
    return spec_from_mapping(mapping, base_dir=path.parent)


# ----------------------------------------------------------------------
# Running chains.

def _build_grid(settings: SamplerSettings, dim: int) -> ScaleGrid:
    if settings.scales is not None:
        return ScaleGrid.from_row(np.array(settings.scales), dim)
    return ScaleGrid.generic(dim, settings.m)


def region_predicate(region: RegionSpec) -> Callable[[np.ndarray], bool]:
    """True on the high side: x[coordinate - 1] >= threshold."""
    idx = region.coordinate - 1
    thr = region.threshold
    return lambda state: bool(state[idx] >= thr)


def run_chain(
    target: TargetModel,
    settings: SamplerSettings,
    iterations: int,
    burn_in: int,
    stream: RngStream,
    *,
    initial_state: np.ndarray | None = None,
    coin_stream: RngStream | None = None,
    keep_debug: bool = False,
) -> tuple[ChainTrace, np.ndarray, list[AdaptationEvent]]:
    """Run one chain; returns (trace, final scales as a (d, m) matrix,
    adaptation events).  Wall time covers the sweep loop only."""
    dim = target.dim
    x = np.array(
        target.default_initial if initial_state is None else initial_state,
        dtype=float,
    )
    if x.shape != (dim,) or not np.all(np.isfinite(x)):
        raise ConfigError(f"initial state must be {dim} finite reals")
    if target.log_density(x) == -math.inf:
        raise ConfigError("initial state has zero target density")

    kind = settings.kind
    grid: ScaleGrid | None = None
    scales: np.ndarray | None = None
    astate: AdaptationState | None = None
    acstate: AcmhState | None = None
    cfg = KernelConfig(alpha=settings.alpha, keep_debug=keep_debug)

    if kind in GRID_SAMPLERS:
        grid = _build_grid(settings, dim)
        if kind == "acmtm":
            if coin_stream is None:
                raise ValueError("acmtm needs a dedicated coin_stream")
            if np.any(grid.sigma < settings.scale_floor) or np.any(
                grid.sigma > settings.scale_cap
            ):
                raise ConfigError(
                    "initial scale grid leaves "
                    f"[{settings.scale_floor}, {settings.scale_cap}]"
                )
            astate = AdaptationState(
                dim=dim,
                m=grid.m,
                rng=coin_stream,
                beta=settings.beta,
                scale_floor=settings.scale_floor,
                scale_cap=settings.scale_cap,
            )
    else:
        scales = np.array(settings.scales, dtype=float)
        if kind == "acmh":
            acstate = AcmhState(
                dim=dim,
                batch_size=settings.batch_size,
                target_rate=settings.target_rate,
                scale_floor=settings.scale_floor,
                scale_cap=settings.scale_cap,
            )
            if np.any(scales < settings.scale_floor) or np.any(scales > settings.scale_cap):
                raise ConfigError(
                    "initial scales leave "
                    f"[{settings.scale_floor}, {settings.scale_cap}]"
                )

    initial = x.copy()
    states = np.empty((iterations, dim))
    records = []
    t_start = time.perf_counter()
    for t in range(1, iterations + 1):
        if astate is not None:
            grid, _ = maybe_adapt(astate, grid, t)
        elif acstate is not None:
            scales = acmh_maybe_update(acstate, scales, t)
        if kind in ("cmtm", "acmtm"):
            rec = cmtm_sweep(target, x, grid, cfg, stream)
        elif kind == "mixture_cmh":
            rec = mixture_cmh_sweep(target, x, grid, stream)
        else:
            rec = cmh_sweep(target, x, scales, stream)
        x = rec.state_after
        if astate is not None:
            record_sweep(astate, rec)
        elif acstate is not None:
            record_acceptances(acstate, rec)
        states[t - 1] = x
        records.append(rec)
    wall = time.perf_counter() - t_start

    trace = ChainTrace(
        initial_state=initial,
        states=states,
        records=records,
        n_proposals=grid.m if grid is not None else 1,
        burn_in=burn_in,
        wall_time=wall,
    )
    if grid is not None:
        final_scales = grid.sigma.copy()
    else:
        final_scales = scales.reshape(-1, 1).copy()
    events = astate.events if astate is not None else (acstate.events if acstate is not None else [])
    return trace, final_scales, events


def run_experiment(
    spec: ExperimentSpec,
    replicate: int = 0,
    *,
    thin: int = 10,
    full_trace: bool = False,
    keep_debug: bool = False,
) -> ReplicateResult:
    """Run one replicate of the experiment and compute its diagnostics."""
    if replicate < 0 or replicate >= COIN_STREAM_OFFSET:
        raise ValueError(f"replicate id out of range: {replicate}")
    if thin < 1:
        raise ValueError(f"thin must be >= 1, got {thin}")
    target = build_target(spec.target)
    stream = make_stream(spec.base_seed, replicate)
    coin = None
    if spec.sampler.kind == "acmtm":
        coin = make_stream(spec.base_seed, COIN_STREAM_OFFSET + replicate)
    trace, final_scales, events = run_chain(
        target,
        spec.sampler,
        spec.iterations,
        spec.burn_in,
        stream,
        initial_state=None if spec.initial_state is None else np.array(spec.initial_state),
        coin_stream=coin,
        keep_debug=keep_debug,
    )
    predicate = region_predicate(spec.region) if spec.region is not None else None
    report = diagnostics_report(trace, predicate)
    thinned = None
    if full_trace:
        idx = np.arange(thin, spec.iterations + 1, thin)
        thinned = np.column_stack([idx.astype(float), trace.states[idx - 1]])
    return ReplicateResult(
        replicate=replicate,
        report=report,
        final_scales=final_scales,
        events=events,
        wall_time=trace.wall_time,
        thinned=thinned,
    )


# ----------------------------------------------------------------------
# Aggregation and CSV output.

_STATS = ("min", "median", "mean", "max")


def aggregate_results(results: list[ReplicateResult]) -> dict:
    """min/median/mean/max across replicates for ASJ and wall time, and the
    same statistics per coordinate for ACT and ESS."""
    asj = np.array([r.report.asj for r in results])
    wall = np.array([r.wall_time for r in results])
    act = np.vstack([r.report.act for r in results])
    ess = np.vstack([r.report.ess for r in results])
    fns = {"min": np.min, "median": np.median, "mean": np.mean, "max": np.max}
    out: dict = {"asj": {}, "wall_time": {}, "act": {}, "ess": {}}
    for name, fn in fns.items():
        out["asj"][name] = float(fn(asj))
        out["wall_time"][name] = float(fn(wall))
        out["act"][name] = fn(act, axis=0)
        out["ess"][name] = fn(ess, axis=0)
    return out


def _fmt(value) -> str:
    if isinstance(value, str):
        return value
    if isinstance(value, (int, np.integer)):
        return str(int(value))
    value = float(value)
    if math.isnan(value):
        return "nan"
    return repr(value)


def _write_csv(path: Path, header: list[str], rows: list[list]) -> None:
    path.parent.mkdir(parents=True, exist_ok=True)
    with open(path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(header)
        for row in rows:
            writer.writerow([_fmt(v) for v in row])


def _summary_header(dim: int) -> list[str]:
    return (
        ["replicate", "asj", "wall_time"]
        + [f"act_{k}" for k in range(1, dim + 1)]
        + [f"ess_{k}" for k in range(1, dim + 1)]
    )


def write_summary_csv(results: list[ReplicateResult], aggregate: dict, path: Path) -> None:
    dim = results[0].report.act.size
    rows = []
    for r in results:
        rows.append(
            [r.replicate, r.report.asj, r.wall_time] + list(r.report.act) + list(r.report.ess)
        )
    for stat in _STATS:
        rows.append(
            [stat, aggregate["asj"][stat], aggregate["wall_time"][stat]]
            + list(aggregate["act"][stat])
            + list(aggregate["ess"][stat])
        )
    _write_csv(path, _summary_header(dim), rows)


def _freq_rows(freq: np.ndarray, scales: np.ndarray) -> list[list]:
    d, m = freq.shape
    rows = []
    for k in range(d):
        for j in range(m):
            sigma = scales[k, j] if scales.shape[1] == m else scales[k, 0]
            rows.append([k + 1, j + 1, sigma, freq[k, j]])
    return rows


def write_replicate_outputs(result: ReplicateResult, spec: ExperimentSpec, out_dir: Path) -> None:
    """All fixed-name CSVs for one replicate."""
    out_dir = Path(out_dir)
    tables = result.report.tables
    header = ["coordinate", "proposal", "sigma", "frequency"]
    _write_csv(out_dir / "selection.csv", header, _freq_rows(tables.selection, result.final_scales))
    _write_csv(out_dir / "acceptance.csv", header, _freq_rows(tables.acceptance, result.final_scales))

    grid_rows = []
    d, m = result.final_scales.shape
    for k in range(d):
        for j in range(m):
            grid_rows.append([k + 1, j + 1, result.final_scales[k, j]])
    _write_csv(out_dir / "final_grid.csv", ["coordinate", "proposal", "sigma"], grid_rows)

    if spec.sampler.kind in ADAPTIVE_SAMPLERS:
        ev_rows = [
            [e.iteration, e.coordinate + 1, e.branch, e.sigma_min_old, e.sigma_min_new,
             e.sigma_max_old, e.sigma_max_new]
            for e in result.events
        ]
        _write_csv(
            out_dir / "adaptation_log.csv",
            ["iteration", "coordinate", "branch", "sigma_min_old", "sigma_min_new",
             "sigma_max_old", "sigma_max_new"],
            ev_rows,
        )

    if result.report.region_tables is not None:
        below, above = result.report.region_tables
        _write_csv(out_dir / "selection_below.csv", header, _freq_rows(below.selection, result.final_scales))
        _write_csv(out_dir / "selection_above.csv", header, _freq_rows(above.selection, result.final_scales))
        _write_csv(out_dir / "acceptance_below.csv", header, _freq_rows(below.acceptance, result.final_scales))
        _write_csv(out_dir / "acceptance_above.csv", header, _freq_rows(above.acceptance, result.final_scales))

    if result.thinned is not None:
        dim = result.thinned.shape[1] - 1
        rows = [[int(row[0])] + list(row[1:]) for row in result.thinned]
        _write_csv(out_dir / "trace.csv", ["iteration"] + [f"x_{k}" for k in range(1, dim + 1)], rows)


def run_replicates(
    spec: ExperimentSpec,
    out_dir: str | Path | None = None,
    *,
    threads: int = 1,
    thin: int = 10,
    full_trace: bool = False,
) -> ReplicateReport:
    """Run all replicates (worker pool when threads > 1), aggregate, and write
    CSVs.  Replicate r always uses stream (base_seed, r), so results do not
    depend on the pool width.  On any replicate failure a partial-results
    manifest is written and the failure is re-raised."""
    n = spec.replicates
    results: list[ReplicateResult] = []
    failed: tuple[int, str] | None = None
    if threads <= 1:
        for r in range(n):
            try:
                results.append(run_experiment(spec, r, thin=thin, full_trace=full_trace))
            except Exception as exc:
                failed = (r, f"{type(exc).__name__}: {exc}")
                break
    else:
        with ProcessPoolExecutor(max_workers=threads) as pool:
            futures = [
                pool.submit(run_experiment, spec, r, thin=thin, full_trace=full_trace)
                for r in range(n)
            ]
            gathered: dict[int, ReplicateResult] = {}
            for r, fut in enumerate(futures):
                try:
                    gathered[r] = fut.result()
                except Exception as exc:
                    if failed is None:
                        failed = (r, f"{type(exc).__name__}: {exc}")
            for r in range(n):
                if r in gathered and (failed is None or r < failed[0]):
                    results.append(gathered[r])

    if failed is not None:
        if out_dir is not None:
            out = Path(out_dir)
            out.mkdir(parents=True, exist_ok=True)
            manifest = {
                "completed_replicates": [r.replicate for r in results],
                "failed_replicate": failed[0],
                "error": failed[1],
            }
            (out / "partial_manifest.json").write_text(
                json.dumps(manifest, indent=2) + "\n", encoding="utf-8"
            )
        raise ExperimentRuntimeError(
            f"replicate {failed[0]} failed: {failed[1]} "
            f"({len(results)} completed before the failure)"
        )

    aggregate = aggregate_results(results)
    report = ReplicateReport(spec=spec, results=results, aggregate=aggregate)
    if out_dir is not None:
        out = Path(out_dir)
        write_summary_csv(results, aggregate, out / "summary.csv")
        if n == 1:
            write_replicate_outputs(results[0], spec, out)
        else:
            for r in results:
                write_replicate_outputs(r, spec, out / f"rep{r.replicate:03d}")
    return report


def alpha_sweep(
    spec: ExperimentSpec,
    alphas=None,
    out_dir: str | Path | None = None,
) -> list[tuple[float, ReplicateResult]]:
    """One single-replicate run per jump-power value, common random streams.

    Only meaningful for the non-adaptive multiple-try sampler.  Writes
    alpha_sweep.csv (alpha, asj, act_1..act_d) when ``out_dir`` is given.
    """
    if spec.sampler.kind != "cmtm":
        raise ConfigError(f"alpha sweep needs sampler kind 'cmtm', got {spec.sampler.kind!r}")
    if alphas is None:
        alphas = spec.alphas
    if not alphas:
        raise ConfigError("no alphas given: pass a list or set 'alphas' in the spec")
    out: list[tuple[float, ReplicateResult]] = []
    for a in alphas:
        if not math.isfinite(a) or a < 0:
            raise ConfigError(f"alpha must be finite and >= 0, got {a}")
        sub = replace(spec, sampler=replace(spec.sampler, alpha=float(a)))
        out.append((float(a), run_experiment(sub, 0)))
    if out_dir is not None:
        dim = out[0][1].report.act.size
        rows = [[a, res.report.asj] + list(res.report.act) for a, res in out]
        _write_csv(
            Path(out_dir) / "alpha_sweep.csv",
            ["alpha", "asj"] + [f"act_{k}" for k in range(1, dim + 1)],
            rows,
        )
    return out


def compare_report(
    reports: list[ReplicateReport],
    labels: list[str],
    out_dir: str | Path | None = None,
) -> tuple[list[str], list[list]]:
    """Side-by-side mean ESS and ESS per second for same-dimension experiments.

    Returns (header, rows); one row per coordinate, two columns per label.
    Writes compare.csv when ``out_dir`` is given.
    """
    if len(reports) < 2:
        raise ValueError("need at least two reports to compare")
    if len(labels) != len(reports):
        raise ValueError(f"{len(reports)} reports but {len(labels)} labels")
    if len(set(labels)) != len(labels):
        raise ValueError(f"labels must be unique, got {labels}")
    aggs = [rep.aggregate if hasattr(rep, "aggregate") else rep for rep in reports]
    dims = {agg["ess"]["mean"].size for agg in aggs}
    if len(dims) != 1:
        raise ValueError(f"reports have mismatched dimensions: {sorted(dims)}")
    dim = dims.pop()
    header = ["coordinate"]
    for lab in labels:
        header += [f"{lab}_ess", f"{lab}_ess_per_sec"]
    rows = []
    for k in range(dim):
        row: list = [k + 1]
        for agg in aggs:
            ess = float(agg["ess"]["mean"][k])
            wall = float(agg["wall_time"]["mean"])
            row += [ess, ess / wall if wall > 0 else math.inf]
        rows.append(row)
    if out_dir is not None:
        _write_csv(Path(out_dir) / "compare.csv", header, rows)
    return header, rows


def read_summary_csv(path: str | Path) -> dict:
    """Read a summary.csv back into arrays (per-replicate rows only)."""
    path = Path(path)
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        rows = [row for row in reader if row and row[0] not in _STATS]
    if not rows:
        raise ExperimentRuntimeError(f"no replicate rows in {path}")
    dim = sum(1 for name in header if name.startswith("act_"))
    data = np.array([[float(v) for v in row[1:]] for row in rows])
    return {
        "replicates": [int(row[0]) for row in rows],
        "asj": data[:, 0],
        "wall_time": data[:, 1],
        "act": data[:, 2 : 2 + dim],
        "ess": data[:, 2 + dim : 2 + 2 * dim],
    }


def aggregate_from_summary(summary: dict) -> dict:
    """Rebuild the aggregate dict from arrays read back by
    :func:`read_summary_csv`, so directories of past runs can be compared."""
    fns = {"min": np.min, "median": np.median, "mean": np.mean, "max": np.max}
    out: dict = {"asj": {}, "wall_time": {}, "act": {}, "ess": {}}
    for name, fn in fns.items():
        out["asj"][name] = float(fn(summary["asj"]))
        out["wall_time"][name] = float(fn(summary["wall_time"]))
        out["act"][name] = fn(summary["act"], axis=0)
        out["ess"][name] = fn(summary["ess"], axis=0)
    return out


PLOT_SCRIPT = '''\
#!/usr/bin/env python
"""Render PNGs from the CSVs in this directory (needs matplotlib).

Produces whatever applies: summary_ess.png from summary.csv,
alpha_sweep.png from alpha_sweep.csv, trace.png from trace.csv.
"""
import csv
import sys
from pathlib import Path

try:
    import matplotlib
    matplotlib.use("Agg")
    import matplotlib.pyplot as plt
except ImportError:
    sys.exit("matplotlib is not installed; pip install matplotlib")

HERE = Path(__file__).resolve().parent
STATS = {"min", "median", "mean", "max"}


def read(path):
    with open(path, newline="") as fh:
        rows = list(csv.reader(fh))
    return rows[0], rows[1:]


def plot_summary(path):
    header, rows = read(path)
    rows = [r for r in rows if r[0] not in STATS]
    ess_cols = [i for i, h in enumerate(header) if h.startswith("ess_")]
    coords = list(range(1, len(ess_cols) + 1))
    fig, ax = plt.subplots(figsize=(6, 4))
    for r in rows:
        ax.plot(coords, [float(r[i]) for i in ess_cols], "o-", alpha=0.5)
    ax.set_xlabel("coordinate")
    ax.set_ylabel("effective sample size")
    ax.set_title(path.parent.name or "summary")
    fig.tight_layout()
    fig.savefig(path.with_name("summary_ess.png"), dpi=120)
    print("wrote", path.with_name("summary_ess.png"))


def plot_alpha_sweep(path):
    header, rows = read(path)
    alphas = [float(r[0]) for r in rows]
    asj = [float(r[1]) for r in rows]
    fig, ax = plt.subplots(figsize=(6, 4))
    ax.plot(alphas, asj, "o-")
    ax.set_xlabel("jump power")
    ax.set_ylabel("average squared jump")
    fig.tight_layout()
    fig.savefig(path.with_name("alpha_sweep.png"), dpi=120)
    print("wrote", path.with_name("alpha_sweep.png"))


def plot_trace(path):
    header, rows = read(path)
    its = [float(r[0]) for r in rows]
    fig, ax = plt.subplots(figsize=(8, 4))
    for i, name in enumerate(header[1:], start=1):
        ax.plot(its, [float(r[i]) for r in rows], lw=0.6, label=name)
    ax.set_xlabel("iteration")
    ax.legend(fontsize=7, ncol=4)
    fig.tight_layout()
    fig.savefig(path.with_name("trace.png"), dpi=120)
    print("wrote", path.with_name("trace.png"))


def main():
    did = False
    for path in sorted(HERE.rglob("summary.csv")):
        plot_summary(path)
        did = True
    for path in sorted(HERE.rglob("alpha_sweep.csv")):
        plot_alpha_sweep(path)
        did = True
    for path in sorted(HERE.rglob("trace.csv")):
        plot_trace(path)
        did = True
    if not did:
        print("no plottable CSVs found under", HERE)


if __name__ == "__main__":
    main()
'''


def write_plot_script(out_dir: str | Path) -> Path:
    """Drop a standalone plotting helper next to the CSVs."""
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    path = out / "plot_results.py"
    path.write_text(PLOT_SCRIPT, encoding="utf-8")
    return path
