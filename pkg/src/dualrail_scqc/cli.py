"""Command-line harness: ``dualrail-scqc <command> [options]``.

Exit codes: 0 success, 1 quantitative check failed, 2 usage or parse error.
Configs are JSON documents validated against strict schemas (unknown keys are
rejected). Outputs go to ``--out`` and are byte-identical for identical
config and seed.
"""
from __future__ import annotations

import argparse
import json
import math
import os
import sys
import warnings
from concurrent.futures import ThreadPoolExecutor
from pathlib import Path
from typing import Literal, Optional

import numpy as np
from pydantic import BaseModel, ConfigDict, Field, ValidationError

from . import __version__
from .crosstalk import crosstalk_sweep, square_pulse_pair, two_qubit_unitary
from .dualrail import DualRailParams, NoiseSample
from .geometry import (
    DegenerateFrameError, closure_gap, error_curve, first_order_error, frenet_frame,
    implemented_gate, pulse_hamiltonian, vector_area,
)
from .io import (
    ParseError, make_header, read_pulse_csv, write_csv, write_json, write_pulse_csv, write_sweep,
)
from .linalg import X, adjoint_rep, global_phase, propagate
from .optimizer import CostWeights, synthesize_swap_ancilla_pulse, synthesize_zz_half_pulse
from .protocols import (
    AncillaLeakError, ProtocolStep, TruncationWarning, concurrence, erasure_check_stats,
    gaussian_swap_drive, ideal_joint_parity, ideal_logical_zz, logical_zz, naive_swap_ancilla_pulse,
    naive_zz_half_pulse, shifted_pulse, single_shot_joint_parity, three_step_joint_parity,
)
from .sweep import FitError, fit_loglog_slope, validate_grid

THREADS_ENV = "DUALRAIL_SCQC_THREADS"
ZERO_NOISE_TOL = 1e-8


class UsageError(ValueError):
    """Bad command-line or config input (exit code 2)."""


# ---------------------------------------------------------------- config schemas

class _Strict(BaseModel):
    model_config = ConfigDict(extra="forbid", frozen=True)


class CrosstalkConfig(_Strict):
    kappa1: float = math.pi
    kappa2: float = 3 * math.pi
    target: Literal["XX", "noiseless"] = "XX"
    xi_min: float = Field(1e-3, gt=0)
    xi_max: float = Field(1e-1, gt=0)
    n_points: int = Field(10, ge=1)
    xi_grid: Optional[list[float]] = None
    n_steps: int = Field(2000, ge=1)
    expect_slope: Optional[tuple[float, float]] = None


class SwapConfig(_Strict):
    T: Optional[float] = Field(None, gt=0)
    sigma_ratio: float = Field(0.2, gt=0, le=0.5)
    n_steps: int = Field(2000, ge=1)


class PulseConfig(_Strict):
    """Where step pulses come from: ``"design"``, ``"naive"`` or a pulse CSV path."""

    zz_half: str = "design"
    swap_ancilla: str = "design"
    T_g: Optional[float] = Field(None, gt=0)
    K: int = Field(6, ge=1)
    budget: int = Field(5000, ge=1)
    restarts: int = Field(8, ge=1)
    swap: SwapConfig = SwapConfig()


class JPConfig(_Strict):
    chi: float = Field(1.0, gt=0)
    n_max: int = Field(4, ge=2)
    protocol: Literal["single_shot", "three_step"] = "three_step"
    gamma_grid: list[float] = Field(default_factory=lambda: np.logspace(-3, -1, 10).tolist())
    xi: float = 0.0
    odd_outcome: Literal["g", "f"] = "f"
    baselines: list[Literal["single_shot", "naive_three_step"]] = []
    pulses: PulseConfig = PulseConfig()


class ZZConfig(_Strict):
    theta: float
    chi: float = Field(1.0, gt=0)
    u_jp: Literal["ideal", "simulated"] = "ideal"
    gamma: float = 0.0
    xi: float = 0.0
    compare_naive: bool = False
    pulses: PulseConfig = PulseConfig()


class WeightsConfig(_Strict):
    w_gate: float = 1.0
    w_closure: float = 10.0
    w_area: float = 0.0
    w_ortho: float = 10.0


class DesignConfig(_Strict):
    kind: Literal["zz_half", "swap_ancilla"] = "zz_half"
    chi: float = Field(1.0, gt=0)
    T_g: Optional[float] = Field(None, gt=0)
    K: int = Field(6, ge=1)
    K_detuning: int = Field(6, ge=0)
    budget: int = Field(5000, ge=1)
    restarts: int = Field(8, ge=1)
    n_steps: int = Field(2000, ge=1)
    weights: WeightsConfig = WeightsConfig()
    swap: SwapConfig = SwapConfig()


def _load_config(path: Optional[str], model: type[BaseModel]) -> tuple[BaseModel, Path]:
    if path is None:
        try:
            return model(), Path.cwd()
        except ValidationError as exc:
            raise UsageError(f"a --config file is required: {exc}") from None
    p = Path(path)
    try:
        raw = json.loads(p.read_text())
    except OSError as exc:
        raise UsageError(f"cannot read config {path}: {exc.strerror}") from None
    except json.JSONDecodeError as exc:
        raise UsageError(f"{path}:{exc.lineno}: invalid JSON ({exc.msg})") from None
    try:
        return model.model_validate(raw), p.parent
    except ValidationError as exc:
        raise UsageError(f"{path}: config does not match the schema:\n{exc}") from None


# ---------------------------------------------------------------- helpers

def _threads(args) -> int:
    if args.threads is not None:
        return args.threads
    env = os.environ.get(THREADS_ENV)
    if env is None:
        return 1
    try:
        n = int(env)
    except ValueError:
        raise UsageError(f"{THREADS_ENV} must be an integer, got {env!r}") from None
    if n < 1:
        raise UsageError(f"{THREADS_ENV} must be >= 1")
    return n


def _out_dir(args) -> Path:
    out = Path(args.out)
    out.mkdir(parents=True, exist_ok=True)
    return out


def _pmap(fn, items, threads: int):
    if threads > 1:
        with ThreadPoolExecutor(max_workers=threads) as pool:
            return list(pool.map(fn, items))
    return [fn(x) for x in items]


def _complex_matrix(M) -> dict:
    M = np.asarray(M)
    return {"real": M.real.tolist(), "imag": M.imag.tolist()}


class _Pulses:
    """Resolves the step pulses of the three-step protocol."""

    def __init__(self, cfg: PulseConfig, chi: float, seed: int, base: Path):
        self.cfg = cfg
        self.chi = chi
        self.seed = seed
        self.base = base
        T = cfg.swap.T if cfg.swap.T is not None else math.pi / chi
        self.drive = gaussian_swap_drive(T, cfg.swap.sigma_ratio, cfg.swap.n_steps)
        self.report: dict = {}

    def _load(self, ref: str):
        path = Path(ref)
        if not path.is_absolute():
            path = self.base / path
        if not path.exists():
            raise UsageError(f"pulse file not found: {ref}")
        return read_pulse_csv(path)[0]

    def zz_half(self, naive: bool = False):
        ref = "naive" if naive else self.cfg.zz_half
        if ref == "naive":
            return naive_zz_half_pulse(self.chi)
        if ref == "design":
            res = synthesize_zz_half_pulse(self.chi, self.cfg.T_g, self.cfg.K, self.seed,
                                           self.cfg.budget, self.cfg.restarts)
            self.report["zz_half"] = res.report()
            if not res.ok:
                raise RuntimeError("ZZ(pi/2)-step pulse synthesis did not converge")
            return res.pulse
        return self._load(ref)

    def swap_ancilla(self, naive: bool = False):
        ref = "naive" if naive else self.cfg.swap_ancilla
        if ref == "naive":
            return naive_swap_ancilla_pulse(self.drive)
        if ref == "design":
            res = synthesize_swap_ancilla_pulse(self.drive, self.cfg.K, self.cfg.K, self.seed,
                                                self.cfg.budget, self.cfg.restarts)
            self.report["swap_ancilla"] = res.report()
            if not res.ok:
                raise RuntimeError("swap-step ancilla pulse synthesis did not converge")
            return res.pulse
        pulse = self._load(ref)
        if pulse.grid != self.drive.grid:
            raise UsageError(f"swap ancilla pulse {ref} does not share the swap drive grid")
        return pulse

    def steps(self, naive: bool = False):
        zz = self.zz_half(naive)
        anc = self.swap_ancilla(naive)
        return [ProtocolStep("zz_half_1", zz), ProtocolStep("swap", anc, self.drive),
                ProtocolStep("zz_half_3", zz)]


# ---------------------------------------------------------------- commands

def cmd_check_curve(args) -> int:
    try:
        pulse, _ = read_pulse_csv(args.pulse)
    except ParseError as exc:
        raise UsageError(str(exc)) from None
    if args.detuning_offset:
        pulse = shifted_pulse(pulse, args.detuning_offset)
    curve = error_curve(pulse)
    gap = closure_gap(curve)
    closed = gap <= args.tol
    U = propagate(pulse_hamiltonian(pulse), pulse.grid)
    report = {
        "closure_gap": gap,
        "closed": bool(closed),
        "tol": args.tol,
        "first_order_error": first_order_error(pulse),
        "signed_area" if closed else "vector_area": vector_area(curve).tolist(),
        "implemented_gate_adjoint": adjoint_rep(U).tolist(),
    }
    # the Frenet frame flips at interior zeros of the Rabi rate and the readout
    # assumes a constant drive phase, so the geometric gate is skipped otherwise
    interior = pulse.omega[1:-1]
    report["geometric_gate_adjoint"] = None
    if np.ptp(pulse.phi) != 0 or interior.min() <= 1e-6 * max(1.0, pulse.omega.max()):
        report["frame_note"] = "Rabi rate vanishes inside the pulse or the phase varies"
    else:
        try:
            report["geometric_gate_adjoint"] = implemented_gate(
                frenet_frame(curve), float(pulse.phi[-1])).tolist()
        except DegenerateFrameError as exc:
            report["frame_note"] = str(exc)
    text = json.dumps(report, indent=2, sort_keys=True) + "\n"
    sys.stdout.write(text)
    if args.out is not None:
        (_out_dir(args) / "check_curve.json").write_text(text)
    return 0 if closed else 1


def cmd_crosstalk_sweep(args) -> int:
    cfg, _ = _load_config(args.config, CrosstalkConfig)
    grid = cfg.xi_grid if cfg.xi_grid is not None else \
        np.logspace(math.log10(cfg.xi_min), math.log10(cfg.xi_max), cfg.n_points).tolist()
    validate_grid(grid)
    pair = square_pulse_pair(cfg.kappa1, cfg.kappa2, cfg.n_steps)
    target = np.kron(X, X) if cfg.target == "XX" else two_qubit_unitary(pair, 0.0)
    table = crosstalk_sweep(pair, target, grid, threads=_threads(args))
    out = _out_dir(args)
    header = make_header(cfg.model_dump(mode="json"), args.seed, command="crosstalk-sweep")
    write_sweep(out / "crosstalk_sweep.csv", table, header)
    summary = {"slope": table.slope, "intercept": table.intercept, "window": list(table.window)}
    print(json.dumps(summary, sort_keys=True))
    if cfg.expect_slope is not None:
        lo, hi = cfg.expect_slope
        return 0 if lo <= table.slope <= hi else 1
    return 0


def _jp_unitary_builder(cfg: JPConfig, pulses: _Pulses, kind: str):
    """Returns ``(gamma -> (U, params or None))`` for a protocol arm."""
    if kind == "single_shot":
        params = DualRailParams(cfg.chi, cfg.n_max)

        def build(gamma):
            with warnings.catch_warnings():
                warnings.simplefilter("ignore", TruncationWarning)
                return single_shot_joint_parity(params, NoiseSample(gamma, cfg.xi)).unitary, params
        return build
    steps = pulses.steps(naive=(kind == "naive_three_step"))

    def build(gamma):
        U = three_step_joint_parity(steps, cfg.chi, NoiseSample(gamma, cfg.xi)).unitary
        return U, None
    return build


def cmd_jp(args) -> int:
    cfg, base = _load_config(args.config, JPConfig)
    grid = validate_grid(cfg.gamma_grid).tolist()
    threads = _threads(args)
    pulses = _Pulses(cfg.pulses, cfg.chi, args.seed, base)
    summary: dict = {"protocol": cfg.protocol, "odd_outcome": cfg.odd_outcome, "warnings": []}
    if cfg.protocol == "single_shot" and cfg.n_max < 4:
        with warnings.catch_warnings(record=True) as caught:
            warnings.simplefilter("always", TruncationWarning)
            res = single_shot_joint_parity(DualRailParams(cfg.chi, cfg.n_max))
        summary["warnings"] = [str(w.message) for w in caught]
        summary["truncation_error"] = res.diagnostics.get("truncation_error")
    arms = {}
    for kind in [cfg.protocol] + [b for b in cfg.baselines if b != cfg.protocol]:
        build = _jp_unitary_builder(cfg, pulses, kind)

        def stats(gamma, build=build):
            U, params = build(gamma)
            return erasure_check_stats(U, params=params, odd_outcome=cfg.odd_outcome)

        zero = stats(0.0)
        rows = _pmap(stats, grid, threads)
        worst = np.array([r.worst_case for r in rows])
        try:
            slope = fit_loglog_slope(grid, worst)[0]
        except FitError:
            slope = None
        arms[kind] = {"zero_noise": zero.as_dict(), "slope": slope,
                      "false_erase_prob": [r.false_erase_prob for r in rows],
                      "missed_leak_prob": [r.missed_leak_prob for r in rows],
                      "worst_case": worst.tolist()}
    summary["gamma_grid"] = grid
    summary["arms"] = arms
    summary["slopes"] = {k: v["slope"] for k, v in arms.items()}
    main = arms[cfg.protocol]
    summary["false_erase_prob"] = main["zero_noise"]["false_erase_prob"]
    summary["missed_leak_prob"] = main["zero_noise"]["missed_leak_prob"]
    ratios = {k: [b / a if a > 0 else None for a, b in zip(main["worst_case"], v["worst_case"])]
              for k, v in arms.items() if k != cfg.protocol}
    if ratios:
        summary["worst_case_ratio_vs_baseline"] = ratios
    summary["pulse_design"] = pulses.report

    out = _out_dir(args)
    config = cfg.model_dump(mode="json")
    header = make_header(config, args.seed, command="jp")
    rows = [[g, main["false_erase_prob"][i], main["missed_leak_prob"][i], main["worst_case"][i]]
            for i, g in enumerate(grid)]
    write_csv(out / "jp_sweep.csv", ("gamma", "false_erase_prob", "missed_leak_prob", "worst_case"),
              rows, header)
    summary["header"] = header
    write_json(out / "jp_summary.json", summary)
    print(json.dumps({"slopes": summary["slopes"], "false_erase_prob": summary["false_erase_prob"],
                      "missed_leak_prob": summary["missed_leak_prob"]}, sort_keys=True))
    ok = main["zero_noise"]["false_erase_prob"] < ZERO_NOISE_TOL and \
        main["zero_noise"]["missed_leak_prob"] < ZERO_NOISE_TOL
    return 0 if ok else 1


def _phase_aligned_distance(U, V) -> float:
    return float(np.abs(U - np.exp(1j * global_phase(U, V)) * V).max())


def _block_infidelity(M, V) -> float:
    """``1 - F`` for a possibly non-unitary block ``M`` against unitary ``V``."""
    d = V.shape[0]
    f = (np.trace(M.conj().T @ M).real + abs(np.trace(V.conj().T @ M)) ** 2) / (d * (d + 1))
    return float(max(0.0, 1.0 - f))


def cmd_zz(args) -> int:
    cfg, base = _load_config(args.config, ZZConfig)
    theta = cfg.theta
    plus = np.full(4, 0.5, dtype=complex)
    summary: dict = {"theta": theta, "u_jp": cfg.u_jp}
    pulses = _Pulses(cfg.pulses, cfg.chi, args.seed, base)
    if cfg.u_jp == "ideal":
        L = logical_zz(theta, ideal_joint_parity())
        reference = ideal_logical_zz(theta)
    else:
        steps = pulses.steps()
        L0 = logical_zz(theta, three_step_joint_parity(steps, cfg.chi).unitary)
        L = logical_zz(theta, three_step_joint_parity(
            steps, cfg.chi, NoiseSample(cfg.gamma, cfg.xi)).unitary, leak_tol=np.inf)
        reference = L0
        summary["infidelity_vs_noiseless"] = _block_infidelity(L, L0)
        ideal = ideal_logical_zz(theta)
        summary["distance_noiseless_to_ideal"] = _phase_aligned_distance(L0, ideal)
        # block phases of the simulated steps show up as a diagonal frame
        rel = np.diag(L0) * np.conj(np.diag(ideal))
        summary["diagonal_phases_vs_ideal"] = np.angle(rel * np.conj(rel[0])).tolist()
        if cfg.compare_naive:
            nsteps = pulses.steps(naive=True)
            N0 = logical_zz(theta, three_step_joint_parity(nsteps, cfg.chi).unitary)
            N = logical_zz(theta, three_step_joint_parity(
                nsteps, cfg.chi, NoiseSample(cfg.gamma, cfg.xi)).unitary, leak_tol=np.inf)
            naive_inf = _block_infidelity(N, N0)
            summary["naive_infidelity_vs_noiseless"] = naive_inf
            robust = summary["infidelity_vs_noiseless"]
            summary["naive_to_robust_ratio"] = naive_inf / robust if robust > 0 else None
    distance = _phase_aligned_distance(L, reference)
    off = float(np.linalg.norm(L - np.diag(np.diag(L))))
    conc = concurrence(L @ plus)
    summary.update({
        "unitary": _complex_matrix(L),
        "distance": distance,
        "offdiagonal_norm": off,
        "concurrence": conc,
        "expected_concurrence": abs(math.sin(theta)),
        "pulse_design": pulses.report,
    })
    out = _out_dir(args)
    summary["header"] = make_header(cfg.model_dump(mode="json"), args.seed, command="zz")
    write_json(out / "zz_summary.json", summary)
    print(json.dumps({"distance": distance, "concurrence": conc, "offdiagonal_norm": off},
                     sort_keys=True))
    ok = distance < 1e-8 if cfg.u_jp == "ideal" else off < 1e-6
    if cfg.gamma == 0 and cfg.xi == 0:
        ok = ok and abs(conc - abs(math.sin(theta))) < 1e-6
    return 0 if ok else 1


def cmd_design(args) -> int:
    cfg, _ = _load_config(args.config, DesignConfig)
    weights = CostWeights(**cfg.weights.model_dump())
    if cfg.kind == "zz_half":
        res = synthesize_zz_half_pulse(cfg.chi, cfg.T_g, cfg.K, args.seed, cfg.budget,
                                       cfg.restarts, weights, cfg.n_steps)
    else:
        T = cfg.swap.T if cfg.swap.T is not None else math.pi / cfg.chi
        drive = gaussian_swap_drive(T, cfg.swap.sigma_ratio, cfg.swap.n_steps)
        res = synthesize_swap_ancilla_pulse(drive, cfg.K, cfg.K_detuning, args.seed, cfg.budget,
                                            cfg.restarts, weights)
    out = _out_dir(args)
    header = make_header(cfg.model_dump(mode="json"), args.seed, command="design", kind=cfg.kind)
    report = res.report()
    report["header"] = header
    write_json(out / "design_report.json", report)
    write_pulse_csv(out / "design_pulse.csv", res.ansatz.pulse(), header)
    print(json.dumps({"converged": res.result.converged, "final_cost": res.result.final_cost,
                      "ok": res.ok}, sort_keys=True))
    return 0 if res.ok else 1


# ---------------------------------------------------------------- entry point

def build_parser() -> argparse.ArgumentParser:
    parser = argparse.ArgumentParser(
        prog="dualrail-scqc",
        description="Robust joint-parity erasure checks for dual-rail cavity qubits.")
    parser.add_argument("--version", action="version", version=f"%(prog)s {__version__}")
    parser.add_argument("--config", help="JSON config for the command")
    parser.add_argument("--seed", type=int, default=0, help="random seed (default 0)")
    parser.add_argument("--out", default=None, help="output directory (default: current directory)")
    parser.add_argument("--threads", type=int, default=None,
                        help=f"worker threads for sweeps (default ${THREADS_ENV} or 1)")
    sub = parser.add_subparsers(dest="command", required=True)

    p = sub.add_parser("check-curve", help="closure, area and implemented gate of a pulse CSV")
    p.add_argument("pulse", help="pulse CSV with columns t,omega,phi,delta")
    p.add_argument("--tol", type=float, default=1e-6, help="closure tolerance (default 1e-6)")
    p.add_argument("--detuning-offset", type=float, default=0.0,
                   help="constant detuning added to the pulse, e.g. +-chi/2 for a ZZ-step sector")
    p.set_defaults(func=cmd_check_curve)

    for name, func, help_ in (
            ("crosstalk-sweep", cmd_crosstalk_sweep, "ZZ-crosstalk infidelity sweep of a square-pulse pair"),
            ("jp", cmd_jp, "erasure-check misclassification over a dephasing grid"),
            ("zz", cmd_zz, "logical ZZ(theta) from two joint-parity checks"),
            ("design", cmd_design, "synthesize a robust ancilla pulse")):
        p = sub.add_parser(name, help=help_)
        p.set_defaults(func=func)
    return parser


def main(argv=None) -> int:
    parser = build_parser()
    try:
        args = parser.parse_args(argv)
    except SystemExit as exc:
        return int(exc.code) if exc.code is not None else 0
    if args.threads is not None and args.threads < 1:
        print("error: --threads must be >= 1", file=sys.stderr)
        return 2
    if args.out is None and args.command != "check-curve":
        args.out = "."
    try:
        return args.func(args)
    except (UsageError, ParseError, FitError) as exc:
        print(f"error: {exc}", file=sys.stderr)
        return 2
    except AncillaLeakError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1
    except RuntimeError as exc:
        print(f"check failed: {exc}", file=sys.stderr)
        return 1


if __name__ == "__main__":
    sys.exit(main())
