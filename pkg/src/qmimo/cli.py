"""Command line interface: Monte Carlo sweeps and an invariant battery.

Configuration precedence is preset, then config file, then explicit
flags. The config file is YAML validated against a schema, so typos in
keys fail loudly rather than being ignored.
"""
from __future__ import annotations

import argparse
import dataclasses
import sys
import tempfile
from pathlib import Path
from typing import List, Optional

import jsonschema
import numpy as np
import yaml

from .channel import ChannelParams, generate_sv_channel
from .config import SystemConfig
from .digital import mm_digital, power_step, waterfilling
from .errors import ConfigurationError
from .hybrid import mm_hybrid
from .metrics import (
    PowerModel,
    effective_noise_cov_approx,
    unquantized_spectral_efficiency,
)
from .quantizer import bussgang_model, lloyd_max_codebook
from .surrogate import build_state, surrogate_value
from .sweep import AXES, SCHEMES, SweepSpec, emit, run_sweep

PRESETS = {
    "desk": {
        "system": {"Nt": 16, "Nr": 16, "Ns": 4, "Nrf": 4},
        "sweep": {"n_channels": 50},
    },
    "paper": {
        "system": {"Nt": 64, "Nr": 64, "Ns": 8, "Nrf": 8},
        "sweep": {"n_channels": 1000},
    },
}

_NONNEG_NUM = {"type": "number", "minimum": 0}
_POS_INT = {"type": "integer", "minimum": 1}

CONFIG_SCHEMA = {
    "type": "object",
    "additionalProperties": False,
    "properties": {
        "system": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "Nt": _POS_INT,
                "Nr": _POS_INT,
                "Ns": _POS_INT,
                "Nrf": _POS_INT,
                "Pt": {"type": "number", "exclusiveMinimum": 0},
                "sigma_n2": {"type": "number", "exclusiveMinimum": 0},
                "bits": {"type": "integer", "minimum": 1, "maximum": 12},
                "architecture": {"enum": ["digital", "fc-hybrid", "pc-hybrid"]},
                "epsilon": {"type": "number", "exclusiveMinimum": 0},
                "max_outer_iters": _POS_INT,
                "inner_iters": _POS_INT,
                "pgd_iters": _POS_INT,
            },
        },
        "channel": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "clusters": _POS_INT,
                "rays_per_cluster": _POS_INT,
                "angle_spread_deg": _NONNEG_NUM,
            },
        },
        "power": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "p_rf": _NONNEG_NUM,
                "p_lna": _NONNEG_NUM,
                "kappa": _NONNEG_NUM,
                "f_s": _NONNEG_NUM,
                "p_ps": _NONNEG_NUM,
            },
        },
        "sweep": {
            "type": "object",
            "additionalProperties": False,
            "properties": {
                "axis": {"enum": list(AXES)},
                "values": {"type": "array", "items": {"type": "number"}, "minItems": 1},
                "schemes": {"type": "array", "items": {"enum": list(SCHEMES)}, "minItems": 1},
                "n_channels": _POS_INT,
                "seed": {"type": "integer", "minimum": 0},
                "qd_samples": _POS_INT,
                "xi": {"type": "number", "minimum": 0, "maximum": 1},
                "record_timing": {"type": "boolean"},
            },
        },
    },
}


def _load_config(path: str) -> dict:
    with open(path, "r", encoding="utf-8") as fh:
        data = yaml.safe_load(fh) or {}
    try:
        jsonschema.validate(data, CONFIG_SCHEMA)
    except jsonschema.ValidationError as exc:
        raise ConfigurationError(f"config file {path}: {exc.message} (at {'/'.join(map(str, exc.absolute_path))})")
    return data


def _merge(base: dict, overlay: dict) -> dict:
    out = {k: dict(v) for k, v in base.items()}
    for section, values in overlay.items():
        out.setdefault(section, {}).update(values)
    return out


def _parse_values(text: str) -> List[float]:
    try:
        return [float(tok) for tok in text.split(",") if tok.strip() != ""]
    except ValueError:
        raise ConfigurationError(f"could not parse --values {text!r} as a comma list of numbers")


def build_spec(args: argparse.Namespace) -> SweepSpec:
    merged = PRESETS[args.preset]
    if args.config:
        merged = _merge(merged, _load_config(args.config))
    sweep_cfg = dict(merged.get("sweep", {}))
    if args.axis:
        sweep_cfg["axis"] = {"snr": "snr_db"}.get(args.axis, args.axis)
    if args.values:
        sweep_cfg["values"] = _parse_values(args.values)
    if args.schemes:
        sweep_cfg["schemes"] = [s.strip() for s in args.schemes.split(",") if s.strip()]
    if args.channels is not None:
        sweep_cfg["n_channels"] = args.channels
    if args.seed is not None:
        sweep_cfg["seed"] = args.seed
    if args.qd_samples is not None:
        sweep_cfg["qd_samples"] = args.qd_samples
    if args.xi is not None:
        sweep_cfg["xi"] = args.xi
    if args.timing:
        sweep_cfg["record_timing"] = True
    if "axis" not in sweep_cfg or "values" not in sweep_cfg:
        raise ConfigurationError("an axis and values are required (via --axis/--values or the config file)")
    return SweepSpec(
        base=SystemConfig(**merged.get("system", {})),
        channel=ChannelParams(**merged.get("channel", {})),
        power=PowerModel(**merged.get("power", {})),
        **sweep_cfg,
    )


def _cmd_sweep(args: argparse.Namespace) -> int:
    spec = build_spec(args)
    result = run_sweep(spec, workers=args.workers, collect_traces=args.traces)
    paths = emit(result, args.out)
    n_ok = sum(r.n_ok for r in result.aggregates)
    n_failed = sum(r.n_failed for r in result.aggregates)
    for p in paths:
        print(f"wrote {p}")
    print(f"{n_ok} runs ok, {n_failed} failed")
    return 0 if n_failed == 0 else 1


# ---------------------------------------------------------------------------
# validate: a condensed invariant battery runnable without pytest.


def _check_codebook() -> Optional[str]:
    q1 = lloyd_max_codebook(1)
    want = np.sqrt(2.0 / np.pi)
    if not np.allclose(q1.levels, [-want, want], atol=1e-6):
        return f"1-bit levels {q1.levels} != +-{want:.8f}"
    if abs(q1.gamma - (1.0 - 2.0 / np.pi)) > 1e-6:
        return f"1-bit distortion {q1.gamma:.8f} != {1 - 2 / np.pi:.8f}"
    q3 = lloyd_max_codebook(3)
    mids = 0.5 * (q3.levels[:-1] + q3.levels[1:])
    if not np.allclose(q3.thresholds[1:-1], mids, atol=1e-9):
        return "3-bit thresholds are not level midpoints"
    return None


def _check_surrogate() -> Optional[str]:
    cfg = SystemConfig(Nt=8, Nr=8, Ns=2, Nrf=2, Pt=10.0, bits=2)
    g = bussgang_model(cfg).G
    rng = np.random.default_rng(7)
    for trial in range(3):
        h = generate_sv_channel(cfg, rng_seed=rng).H
        f_hat = rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2))
        f_hat *= np.sqrt(cfg.Pt) / np.linalg.norm(f_hat)
        state = build_state(h, f_hat, g, cfg.sigma_n2)
        gap = abs(surrogate_value(state, f_hat) - state.r_hat_bits)
        if gap > 1e-9:
            return f"tightness gap {gap:.2e} at trial {trial}"
        for _ in range(20):
            f = rng.standard_normal((8, 2)) + 1j * rng.standard_normal((8, 2))
            f *= np.sqrt(cfg.Pt) / np.linalg.norm(f)
            from .metrics import spectral_efficiency

            r = spectral_efficiency(h, f, g, effective_noise_cov_approx(h, f, g, cfg.sigma_n2).C_e)
            if surrogate_value(state, f) > r + 1e-9:
                return f"surrogate exceeds rate at trial {trial}"
    return None


def _check_digital_monotone() -> Optional[str]:
    for bits in (1, 3):
        cfg = SystemConfig(bits=bits)
        for seed in range(5):
            ch = generate_sv_channel(cfg, rng_seed=seed)
            res = mm_digital(ch, cfg)
            steps = np.diff(res.se_trace)
            if steps.size and float(steps.min()) < -1e-9:
                return f"rate decreased by {-steps.min():.2e} (bits={bits}, seed={seed})"
            if float(np.sum(res.p)) > cfg.Pt * (1 + 1e-8):
                return f"power budget violated (bits={bits}, seed={seed})"
    return None


def _check_hybrid_monotone() -> Optional[str]:
    for arch in ("fc-hybrid", "pc-hybrid"):
        cfg = SystemConfig(bits=1, architecture=arch)
        for seed in range(3):
            ch = generate_sv_channel(cfg, rng_seed=seed)
            res = mm_hybrid(ch, cfg)
            steps = np.diff(res.se_trace)
            if steps.size and float(steps.min()) < -1e-9:
                return f"rate decreased by {-steps.min():.2e} ({arch}, seed={seed})"
            f_rf = res.precoder.F_RF
            w = res.precoder.W
            if np.max(np.abs(np.abs(f_rf[w > 0]) - 1.0)) > 1e-12:
                return f"analog entries off the unit circle ({arch}, seed={seed})"
            if arch == "pc-hybrid" and np.any(f_rf[w == 0] != 0):
                return f"analog entries outside the blocks nonzero ({arch}, seed={seed})"
            if np.linalg.norm(res.precoder.F) ** 2 > cfg.Pt * (1 + 1e-8):
                return f"power budget violated ({arch}, seed={seed})"
    return None


def _check_wf_oracle() -> Optional[str]:
    cfg = SystemConfig()
    for seed in range(3):
        ch = generate_sv_channel(cfg, rng_seed=seed)
        f = waterfilling(ch, cfg.Pt, cfg.sigma_n2, cfg.Ns)
        got = unquantized_spectral_efficiency(ch.H, f, cfg.sigma_n2)
        s = np.linalg.svd(ch.H, compute_uv=False)[: cfg.Ns]
        p = np.linalg.norm(f, axis=0) ** 2
        want = float(np.sum(np.log2(1.0 + p * s**2 / cfg.sigma_n2)))
        if abs(got - want) > 1e-8:
            return f"WF SE {got:.12f} != closed form {want:.12f} (seed={seed})"
    return None


def _check_power_bisection() -> Optional[str]:
    cfg = SystemConfig(bits=2)
    g = bussgang_model(cfg).G
    for seed in range(5):
        ch = generate_sv_channel(cfg, rng_seed=seed)
        from .channel import svd_basis
        from .digital import waterfill_powers

        basis = svd_basis(ch, cfg)
        p = waterfill_powers(basis.s[: cfg.Ns], cfg.Pt, cfg.sigma_n2)
        state = build_state(ch.H, basis.V * np.sqrt(p), g, cfg.sigma_n2, v=basis.V, p_hat=p)
        alloc = power_step(state, cfg.Pt)
        if abs(float(np.sum(alloc.p)) - cfg.Pt) > 1e-6 * cfg.Pt:
            return f"budget residual {abs(np.sum(alloc.p)-cfg.Pt):.2e} (seed={seed})"
    return None


def _check_determinism() -> Optional[str]:
    spec = SweepSpec(
        axis="bits", values=(1.0,), n_channels=1,
        base=SystemConfig(Nt=8, Nr=8, Ns=2, Nrf=2),
        schemes=("dbf-proposed", "dbf-wf"), seed=11, qd_samples=10_000,
    )
    outputs = []
    for _ in range(2):
        with tempfile.TemporaryDirectory() as tmp:
            emit(run_sweep(spec), tmp)
            outputs.append((Path(tmp) / "results.csv").read_bytes())
    if outputs[0] != outputs[1]:
        return "two runs of the same spec produced different results.csv bytes"
    return None


CHECKS = (
    ("codebook", _check_codebook),
    ("surrogate", _check_surrogate),
    ("digital-monotone", _check_digital_monotone),
    ("hybrid-monotone", _check_hybrid_monotone),
    ("wf-oracle", _check_wf_oracle),
    ("power-bisection", _check_power_bisection),
    ("determinism", _check_determinism),
)


def _cmd_validate(_args: argparse.Namespace) -> int:
    failures = 0
    for name, fn in CHECKS:
        problem = fn()
        if problem is None:
            print(f"PASS {name}")
        else:
            failures += 1
            print(f"FAIL {name}: {problem}")
    return 0 if failures == 0 else 1


def make_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(prog="qmimo", description="Quantization-aware precoding experiments")
    sub = parser.add_subparsers(dest="command", required=True)

    sweep = sub.add_parser("sweep", help="run a Monte Carlo sweep and write results.csv")
    sweep.add_argument("--config", help="YAML config file")
    sweep.add_argument("--preset", choices=sorted(PRESETS), default="desk", help="base configuration preset")
    sweep.add_argument("--axis", choices=["snr", "snr_db", "bits", "xi"], help="swept axis")
    sweep.add_argument("--values", help="comma-separated axis values")
    sweep.add_argument("--schemes", help="comma-separated scheme list")
    sweep.add_argument("--channels", type=int, help="number of channel realizations")
    sweep.add_argument("--seed", type=int, help="master seed")
    sweep.add_argument("--qd-samples", dest="qd_samples", type=int, help="distortion covariance samples")
    sweep.add_argument("--xi", type=float, help="CSI accuracy when the axis is not xi")
    sweep.add_argument("--workers", type=int, default=1, help="parallel channel workers")
    sweep.add_argument("--traces", action="store_true", help="also write per-run convergence traces")
    sweep.add_argument("--timing", action="store_true", help="record wall-clock times (output no longer byte-reproducible)")
    sweep.add_argument("--out", required=True, help="output directory")
    sweep.set_defaults(func=_cmd_sweep)

    validate = sub.add_parser("validate", help="run the built-in invariant battery")
    validate.set_defaults(func=_cmd_validate)
    return parser


def main(argv: Optional[List[str]] = None) -> int:
    parser = make_parser()
    args = parser.parse_args(argv)
    try:
        return args.func(args)
    except ConfigurationError as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2


if __name__ == "__main__":
    sys.exit(main())
