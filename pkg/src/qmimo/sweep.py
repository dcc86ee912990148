"""Monte Carlo sweep harness.

A sweep is a pure function of its SweepSpec: channels, CSI errors, and
distortion-sampling draws are all seeded from the spec seed together
with the channel / value / scheme indices, so reruns (serial or
parallel) reproduce results byte for byte. Designs run on the possibly
degraded channel estimate; the reported rate is evaluated on the true
channel with the sampled distortion covariance of the actual codebook.
"""
from __future__ import annotations

import csv
import dataclasses
import json
import time
from concurrent.futures import ProcessPoolExecutor
from dataclasses import dataclass, field
from pathlib import Path
from typing import List, Optional, Sequence, Tuple, Union

import numpy as np

from .channel import ChannelParams, ChannelRealization, degrade_csi, generate_sv_channel
from .config import SystemConfig, power_for_snr_db
from .digital import mm_digital, waterfilling
from .errors import ConfigurationError, NumericalError
from .hybrid import mm_hybrid
from .metrics import (
    PowerModel,
    effective_noise_cov_empirical,
    energy_efficiency,
    spectral_efficiency,
    unquantized_spectral_efficiency,
)
from .quantizer import QD_SAMPLE_FLOOR, empirical_qd_covariance, lloyd_max_codebook

AXES = ("snr_db", "bits", "xi")
SCHEMES = ("dbf-proposed", "dbf-wf", "fc-proposed", "pc-proposed", "unquantized-wf")

CSV_COLUMNS = (
    "scheme",
    "axis_name",
    "axis_value",
    "mean_se_bits",
    "se_stderr",
    "mean_ee",
    "ee_stderr",
    "mean_iters",
    "mean_ms",
    "n_ok",
    "n_failed",
)

TRACE_COLUMNS = ("scheme", "axis_name", "axis_value", "channel_index", "iteration", "se_bits")


@dataclass(frozen=True)
class SweepSpec:
    """Complete description of one Monte Carlo sweep.

    axis          swept quantity: "snr_db", "bits", or "xi"
    values        axis values, in plot order
    n_channels    independent channel draws
    base          operating point for everything not swept
    schemes       design schemes to run at every grid point
    seed          master seed; all randomness derives from it
    qd_samples    Monte Carlo samples for the distortion covariance
    xi            CSI accuracy used when the axis is not "xi"
    record_timing when False, wall-clock columns are written as 0.0 so
                  the output is byte-reproducible
    """

    axis: str
    values: Tuple[float, ...]
    n_channels: int
    base: SystemConfig = SystemConfig()
    schemes: Tuple[str, ...] = SCHEMES
    seed: int = 0
    qd_samples: int = 100_000
    channel: ChannelParams = field(default_factory=ChannelParams)
    power: PowerModel = field(default_factory=PowerModel)
    xi: float = 1.0
    record_timing: bool = False

    def __post_init__(self) -> None:
        if self.axis not in AXES:
            raise ConfigurationError(f"axis must be one of {AXES}, got {self.axis!r}")
        object.__setattr__(self, "values", tuple(float(v) for v in self.values))
        object.__setattr__(self, "schemes", tuple(self.schemes))
        if not self.values:
            raise ConfigurationError("values must be nonempty")
        if not self.schemes:
            raise ConfigurationError("schemes must be nonempty")
        for s in self.schemes:
            if s not in SCHEMES:
                raise ConfigurationError(f"unknown scheme {s!r}, expected one of {SCHEMES}")
        if self.n_channels < 1:
            raise ConfigurationError(f"n_channels must be >= 1, got {self.n_channels}")
        if self.seed < 0:
            raise ConfigurationError(f"seed must be nonnegative, got {self.seed}")
        if self.qd_samples < QD_SAMPLE_FLOOR:
            raise ConfigurationError(f"qd_samples must be >= {QD_SAMPLE_FLOOR}, got {self.qd_samples}")
        if not 0.0 <= self.xi <= 1.0:
            raise ConfigurationError(f"xi must lie in [0, 1], got {self.xi!r}")
        if self.axis == "bits":
            for v in self.values:
                if v != int(v) or not 1 <= int(v) <= 12:
                    raise ConfigurationError(f"bits values must be integers in [1, 12], got {v!r}")
        if self.axis == "xi":
            for v in self.values:
                if not 0.0 <= v <= 1.0:
                    raise ConfigurationError(f"xi values must lie in [0, 1], got {v!r}")
        if "pc-proposed" in self.schemes and self.base.Nt % self.base.Nrf != 0:
            raise ConfigurationError(
                f"pc-proposed needs Nt divisible by Nrf, got Nt = {self.base.Nt}, Nrf = {self.base.Nrf}"
            )

    def config_at(self, value: float, scheme: str) -> SystemConfig:
        """Operating point for one grid point and scheme."""
        arch = {"fc-proposed": "fc-hybrid", "pc-proposed": "pc-hybrid"}.get(scheme, "digital")
        kwargs = {"architecture": arch}
        if self.axis == "snr_db":
            kwargs["Pt"] = power_for_snr_db(value, self.base.sigma_n2)
        elif self.axis == "bits":
            kwargs["bits"] = int(value)
        return dataclasses.replace(self.base, **kwargs)

    def xi_at(self, value: float) -> float:
        return value if self.axis == "xi" else self.xi

    def to_dict(self) -> dict:
        return {
            "axis": self.axis,
            "values": list(self.values),
            "n_channels": self.n_channels,
            "base": dataclasses.asdict(self.base),
            "schemes": list(self.schemes),
            "seed": self.seed,
            "qd_samples": self.qd_samples,
            "channel": dataclasses.asdict(self.channel),
            "power": dataclasses.asdict(self.power),
            "xi": self.xi,
            "record_timing": self.record_timing,
        }

    @classmethod
    def from_dict(cls, data: dict) -> "SweepSpec":
        data = dict(data)
        base = SystemConfig(**data.pop("base", {}))
        channel = ChannelParams(**data.pop("channel", {}))
        power = PowerModel(**data.pop("power", {}))
        known = {f.name for f in dataclasses.fields(cls)}
        extra = set(data) - known
        if extra:
            raise ConfigurationError(f"unknown sweep fields: {sorted(extra)}")
        data["values"] = tuple(data.get("values", ()))
        data["schemes"] = tuple(data.get("schemes", SCHEMES))
        return cls(base=base, channel=channel, power=power, **data)

    @classmethod
    def from_json(cls, path) -> "SweepSpec":
        with open(path, "r", encoding="utf-8") as fh:
            payload = json.load(fh)
        return cls.from_dict(payload.get("spec", payload))


@dataclass(frozen=True)
class RunRecord:
    """One (scheme, axis value, channel) outcome."""

    scheme: str
    axis_value: float
    channel_index: int
    ok: bool
    se_bits: float
    ee: float
    iterations: int
    wall_ms: float
    error: Optional[str] = None


@dataclass(frozen=True)
class TraceRow:
    """One point of a per-run convergence trace."""

    scheme: str
    axis_value: float
    channel_index: int
    iteration: int
    se_bits: float


@dataclass(frozen=True)
class AggregateRow:
    """One results.csv row: statistics over channels at a grid point."""

    scheme: str
    axis_name: str
    axis_value: float
    mean_se_bits: float
    se_stderr: float
    mean_ee: float
    ee_stderr: float
    mean_iters: float
    mean_ms: float
    n_ok: int
    n_failed: int


@dataclass(frozen=True)
class SweepResult:
    spec: SweepSpec
    aggregates: List[AggregateRow]
    records: List[RunRecord]
    traces: Optional[List[TraceRow]] = None


def _rng(spec: SweepSpec, *key: int) -> np.random.Generator:
    return np.random.default_rng(np.random.SeedSequence(entropy=spec.seed, spawn_key=tuple(key)))


def _design(scheme: str, ch_design: ChannelRealization, cfg: SystemConfig):
    """Run one scheme's design; returns (F, iterations, se_trace or None)."""
    if scheme == "dbf-proposed":
        res = mm_digital(ch_design, cfg)
        return res.F, res.iterations, res.se_trace
    if scheme in ("dbf-wf", "unquantized-wf"):
        return waterfilling(ch_design, cfg.Pt, cfg.sigma_n2, cfg.Ns), 0, None
    res = mm_hybrid(ch_design, cfg)
    return res.precoder.F, res.outer_iterations, res.se_trace


def _run_channel(
    spec: SweepSpec, ch_idx: int, collect_traces: bool
) -> Tuple[List[RunRecord], List[TraceRow]]:
    records: List[RunRecord] = []
    traces: List[TraceRow] = []
    ch_true = generate_sv_channel(spec.base, spec.channel, _rng(spec, 0, ch_idx))
    for vi, value in enumerate(spec.values):
        xi_v = spec.xi_at(value)
        ch_design = (
            degrade_csi(ch_true, xi_v, _rng(spec, 1, ch_idx, vi)) if xi_v < 1.0 else ch_true
        )
        for si, scheme in enumerate(spec.schemes):
            cfg = spec.config_at(value, scheme)
            t0 = time.perf_counter()
            try:
                f, iters, trace = _design(scheme, ch_design, cfg)
                if scheme == "unquantized-wf":
                    se = unquantized_spectral_efficiency(ch_true.H, f, cfg.sigma_n2)
                else:
                    q = lloyd_max_codebook(cfg.bits)
                    qd = empirical_qd_covariance(
                        ch_true.H, f, q, cfg, spec.qd_samples, _rng(spec, 2, ch_idx, vi, si)
                    )
                    g_eval = q.bussgang_gain * np.eye(cfg.Nr)
                    c_e = effective_noise_cov_empirical(qd, g_eval, cfg.sigma_n2).C_e
                    se = spectral_efficiency(ch_true.H, f, g_eval, c_e)
                wall_ms = (time.perf_counter() - t0) * 1e3 if spec.record_timing else 0.0
                ee = energy_efficiency(se, cfg, spec.power)
                records.append(
                    RunRecord(scheme, value, ch_idx, True, se, ee, iters, wall_ms)
                )
                if collect_traces and trace is not None:
                    for k, se_k in enumerate(trace, start=1):
                        traces.append(TraceRow(scheme, value, ch_idx, k, float(se_k)))
            except NumericalError as exc:
                wall_ms = (time.perf_counter() - t0) * 1e3 if spec.record_timing else 0.0
                records.append(
                    RunRecord(scheme, value, ch_idx, False, float("nan"), float("nan"), 0, wall_ms, str(exc))
                )
    return records, traces


def _aggregate(spec: SweepSpec, records: Sequence[RunRecord]) -> List[AggregateRow]:
    rows: List[AggregateRow] = []
    for scheme in spec.schemes:
        for value in spec.values:
            group = [r for r in records if r.scheme == scheme and r.axis_value == value]
            ok = [r for r in group if r.ok]
            n_ok, n_failed = len(ok), len(group) - len(ok)

            def stats(xs: List[float]) -> Tuple[float, float]:
                if not xs:
                    return float("nan"), float("nan")
                mean = float(np.mean(xs))
                err = float(np.std(xs, ddof=1) / np.sqrt(len(xs))) if len(xs) > 1 else 0.0
                return mean, err

            mean_se, se_err = stats([r.se_bits for r in ok])
            mean_ee, ee_err = stats([r.ee for r in ok])
            mean_iters = float(np.mean([r.iterations for r in ok])) if ok else float("nan")
            mean_ms = float(np.mean([r.wall_ms for r in ok])) if ok else float("nan")
            rows.append(
                AggregateRow(
                    scheme, spec.axis, value, mean_se, se_err, mean_ee, ee_err,
                    mean_iters, mean_ms, n_ok, n_failed,
                )
            )
    return rows


def run_sweep(spec: SweepSpec, workers: int = 1, collect_traces: bool = False) -> SweepResult:
    """Execute a sweep; deterministic for a given spec, serial or parallel."""
    all_records: List[RunRecord] = []
    all_traces: List[TraceRow] = []
    if workers <= 1:
        per_channel = [_run_channel(spec, ch, collect_traces) for ch in range(spec.n_channels)]
    else:
        with ProcessPoolExecutor(max_workers=workers) as pool:
            per_channel = list(
                pool.map(_run_channel, [spec] * spec.n_channels, range(spec.n_channels),
                         [collect_traces] * spec.n_channels)
            )
    # Merge in channel order so the reduction is independent of scheduling.
    for records, traces in per_channel:
        all_records.extend(records)
        all_traces.extend(traces)
    return SweepResult(
        spec=spec,
        aggregates=_aggregate(spec, all_records),
        records=all_records,
        traces=all_traces if collect_traces else None,
    )


def _fmt(x) -> str:
    if isinstance(x, float):
        return repr(x)
    return str(x)


def emit(result: SweepResult, out_dir) -> List[Path]:
    """Write results.csv, spec.json, and traces.csv when traces exist.

    Returns the written paths. Floating point cells use the shortest
    round-trip decimal representation, so identical results produce
    identical bytes.
    """
    out = Path(out_dir)
    out.mkdir(parents=True, exist_ok=True)
    paths = []

    csv_path = out / "results.csv"
    with open(csv_path, "w", encoding="utf-8", newline="") as fh:
        writer = csv.writer(fh, lineterminator="\n")
        writer.writerow(CSV_COLUMNS)
        for row in result.aggregates:
            writer.writerow(
                [
                    row.scheme, row.axis_name, _fmt(row.axis_value),
                    _fmt(row.mean_se_bits), _fmt(row.se_stderr),
                    _fmt(row.mean_ee), _fmt(row.ee_stderr),
                    _fmt(row.mean_iters), _fmt(row.mean_ms),
                    row.n_ok, row.n_failed,
                ]
            )
    paths.append(csv_path)

    spec_path = out / "spec.json"
    payload = {"spec": result.spec.to_dict(), "meta": {"se_averaging": "linear", "se_unit": "bits/s/Hz"}}
    with open(spec_path, "w", encoding="utf-8") as fh:
        json.dump(payload, fh, indent=2, sort_keys=True)
        fh.write("\n")
    paths.append(spec_path)

    if result.traces is not None:
        trace_path = out / "traces.csv"
        with open(trace_path, "w", encoding="utf-8", newline="") as fh:
            writer = csv.writer(fh, lineterminator="\n")
            writer.writerow(TRACE_COLUMNS)
            for t in result.traces:
                writer.writerow(
                    [t.scheme, result.spec.axis, _fmt(t.axis_value), t.channel_index, t.iteration, _fmt(t.se_bits)]
                )
        paths.append(trace_path)
    return paths


def read_results_csv(path) -> List[AggregateRow]:
    """Parse a results.csv back into aggregate rows (round-trip of emit)."""
    with open(path, "r", encoding="utf-8", newline="") as fh:
        reader = csv.reader(fh)
        header = next(reader)
        if tuple(header) != CSV_COLUMNS:
            raise ValueError(f"unexpected results.csv header: {header}")
        rows = []
        for rec in reader:
            rows.append(
                AggregateRow(
                    scheme=rec[0], axis_name=rec[1], axis_value=float(rec[2]),
                    mean_se_bits=float(rec[3]), se_stderr=float(rec[4]),
                    mean_ee=float(rec[5]), ee_stderr=float(rec[6]),
                    mean_iters=float(rec[7]), mean_ms=float(rec[8]),
                    n_ok=int(rec[9]), n_failed=int(rec[10]),
                )
            )
    return rows
