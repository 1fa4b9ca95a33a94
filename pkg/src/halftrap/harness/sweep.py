"""Parameter sweeps over trap states and the supporting validation report.

A sweep walks one state parameter over a value grid, pushes each state
through the configured computational path (closed-form moments, explicit
occupation-basis expectation, or full pulse evolution), post-selects, and
records the probe-pair negativity next to its closed form where one exists.
Points run on a thread pool; results are gathered in grid order so output
bytes never depend on scheduling.
"""

from __future__ import annotations

import csv
import time
from concurrent.futures import ThreadPoolExecutor
from dataclasses import dataclass, replace
from math import isnan, nan, sqrt

import numpy as np
import scipy.stats

from .. import entanglement, evolution, fock, measurement, moments, states
from ..orbitals import OscillatorParams, OverlapTable, build_overlap_table
from .config import ConfigError, ExperimentConfig

__all__ = [
    "PointResult",
    "evaluate_point",
    "resolve_pulse",
    "run_sweep",
    "single_block",
    "write_sweep_csv",
    "write_plot_data",
    "run_validation",
]

_SWEEPABLE = {"alpha_sq": "alpha_sq", "number_n": "number_n", "nbar": "nbar"}

_FLOAT_FMT = "%.17g"


@dataclass
class PointResult:
    """One sweep point; float('nan') marks fields a failed point never set."""

    param: str
    value: float
    mu: float = nan
    mu_closed_form: float | None = None
    fidelity: float | None = None
    p_succ: float = nan
    S: float = nan
    mLL: float = nan
    mRR: float = nan
    mLR_re: float = nan
    mLR_im: float = nan
    leakage: float = nan
    provenance: str = ""
    wall_time: float | None = None
    error: str = ""


def resolve_pulse(cfg: ExperimentConfig, S: float, alpha_sq: float | None = None):
    """Pulse area from the configured preset (or the explicit override)."""
    if cfg.pulse_area is not None:
        area = cfg.pulse_area
    elif cfg.pulse_preset == "amplitude10":
        scale = (cfg.probe_M * cfg.probe_Omega / 2.0) * S
        if scale <= 0.0:
            raise measurement.NoExtractionError(
                "amplitude preset undefined: no weight outside the ground level"
            )
        area = cfg.amplitude_target / sqrt(scale)
    elif cfg.pulse_preset == "inverse-quartic":
        if alpha_sq is None or alpha_sq <= 0.0:
            raise ConfigError(
                "pulse.preset",
                "inverse-quartic scaling needs a coherent-family state with alpha_sq > 0",
            )
        area = cfg.g_ref / alpha_sq**2
    else:
        raise ConfigError("pulse.area", "preset 'none' requires an explicit pulse.area")
    return evolution.Pulse.square(T=cfg.pulse_T, g0=area / cfg.pulse_T)


def _build_state(cfg: ExperimentConfig) -> states.TrapState:
    return states.make_state(
        cfg.state, cfg.state_params(), n_cut=cfg.n_cut, tail_tol=cfg.tail_tol
    )


def _closed_form_for(cfg: ExperimentConfig) -> float | None:
    if cfg.state in ("coherent", "phase_averaged"):
        return entanglement.negativity_closed_form("coherent", cfg.alpha_sq)
    if cfg.state == "number":
        return entanglement.negativity_closed_form("number", float(cfg.number_n))
    return None


def _moments_for(
    cfg: ExperimentConfig, state: states.TrapState, table: OverlapTable
) -> moments.ProbeBlockMoments:
    if cfg.path == "fock":
        return moments.moments_from_fock(state, table, cfg.n_max)
    if cfg.extrapolate and table.K >= 32 and table.K % 4 == 0:
        return moments.extrapolated_moments(state, table)
    return moments.moments_from_state(state, table)


def _exact_block(
    cfg: ExperimentConfig, state: states.TrapState, table: OverlapTable
) -> measurement.ProbeBlock:
    if not state.is_pure:
        raise ValueError(
            "path 'exact' evolves a single vector; use path 'moments' for mixtures"
        )
    basis = fock.FockBasis(table.K, cfg.n_max)
    probe = evolution.ProbeParams(cfg.probe_M, cfg.probe_Omega, cfg.probe_levels)
    phi = states.to_fock_vector(state.components[0], basis)
    mom = moments.moments_from_fock(state, table, cfg.n_max)
    pulse = resolve_pulse(cfg, mom.S, cfg.alpha_sq if cfg.state == "coherent" else None)
    ham = evolution.build_joint_hamiltonian(table, basis, probe, cfg.exact_dim_cap)
    final = evolution.exact_state(
        evolution.embed_product(phi, probe), ham, pulse, cfg.exact_dim_cap
    )
    return measurement.postselect(final)


def single_block(cfg: ExperimentConfig, table: OverlapTable) -> measurement.ProbeBlock:
    """Post-selected block for the configured state, via the configured path."""
    state = _build_state(cfg)
    if cfg.path == "exact":
        return _exact_block(cfg, state, table)
    mom = _moments_for(cfg, state, table)
    pulse = resolve_pulse(
        cfg, mom.S, cfg.alpha_sq if cfg.state in ("coherent", "phase_averaged") else None
    )
    probe = evolution.ProbeParams(cfg.probe_M, cfg.probe_Omega, cfg.probe_levels)
    return measurement.block_from_moments(mom, pulse, probe, state.norm_sq())


def evaluate_point(
    cfg: ExperimentConfig, table: OverlapTable, value: float | None = None
) -> PointResult:
    """Evaluate one configured state; never raises, errors land in `.error`."""
    param = cfg.sweep_param or "none"
    out = PointResult(param=param, value=nan if value is None else float(value))
    started = time.perf_counter()
    try:
        if value is not None:
            if param not in _SWEEPABLE:
                raise ConfigError(
                    "sweep.param", f"must be one of {sorted(_SWEEPABLE)}, got {param!r}"
                )
            if param == "number_n":
                if value != int(value):
                    raise ConfigError("sweep.values", f"particle number {value} not an integer")
                cfg = replace(cfg, number_n=int(value))
            else:
                cfg = replace(cfg, **{_SWEEPABLE[param]: float(value)})

        state = _build_state(cfg)
        if cfg.path == "exact":
            block = _exact_block(cfg, state, table)
            out.provenance = block.source
        else:
            mom = _moments_for(cfg, state, table)
            pulse = resolve_pulse(
                cfg,
                mom.S,
                cfg.alpha_sq if cfg.state in ("coherent", "phase_averaged") else None,
            )
            probe = evolution.ProbeParams(cfg.probe_M, cfg.probe_Omega, cfg.probe_levels)
            block = measurement.block_from_moments(mom, pulse, probe, state.norm_sq())
            out.provenance = mom.provenance
            out.S = mom.S
            out.mLL = mom.mLL
            out.mRR = mom.mRR
            out.mLR_re = mom.mLR.real
            out.mLR_im = mom.mLR.imag
        out.mu = entanglement.negativity(entanglement.probe_block_density(block))
        out.p_succ = block.p_succ
        out.leakage = block.leakage
        out.mu_closed_form = _closed_form_for(cfg)
        if cfg.state == "coherent":
            if cfg.path == "moments":
                out.fidelity = entanglement.disturbance_fidelity(
                    state, table, extrapolate=cfg.extrapolate
                )
            else:
                out.fidelity = entanglement.disturbance_fidelity(state, table)
    except Exception as exc:  # noqa: BLE001 - one bad point must not kill the grid
        out.error = f"{type(exc).__name__}: {exc}"
    if cfg.timing:
        out.wall_time = time.perf_counter() - started
    return out


def run_sweep(cfg: ExperimentConfig, table: OverlapTable | None = None) -> list[PointResult]:
    """Evaluate the configured grid; results come back in grid order."""
    if cfg.sweep_param is None:
        raise ConfigError("sweep.param", "no sweep parameter configured")
    if not cfg.sweep_values:
        raise ConfigError("sweep.values", "sweep requested but value list is empty")
    if table is None:
        table = build_overlap_table(
            cfg.K,
            OscillatorParams(),
            quad_tol=cfg.quad_tol,
            cache_dir=cfg.cache_dir,
        )
    with ThreadPoolExecutor(max_workers=cfg.workers) as pool:
        results = list(pool.map(lambda v: evaluate_point(cfg, table, v), cfg.sweep_values))
    return results


def _fmt(value: float | None) -> str:
    if value is None or (isinstance(value, float) and isnan(value)):
        return ""
    return _FLOAT_FMT % value


def write_sweep_csv(results: list[PointResult], stream, timing: bool = False) -> None:
    """17-significant-digit CSV; reruns with one config produce identical bytes."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(
        [
            "param",
            "value",
            "mu",
            "mu_closed_form",
            "fidelity",
            "p_succ",
            "S",
            "mLL",
            "mRR",
            "mLR_re",
            "mLR_im",
            "leakage",
            "provenance",
            "wall_time",
            "error",
        ]
    )
    for r in results:
        writer.writerow(
            [
                r.param,
                _fmt(r.value),
                _fmt(r.mu),
                _fmt(r.mu_closed_form),
                _fmt(r.fidelity),
                _fmt(r.p_succ),
                _fmt(r.S),
                _fmt(r.mLL),
                _fmt(r.mRR),
                _fmt(r.mLR_re),
                _fmt(r.mLR_im),
                _fmt(r.leakage),
                r.provenance,
                _fmt(r.wall_time) if timing else "",
                r.error,
            ]
        )


def write_plot_data(results: list[PointResult], stream) -> None:
    """Long-form companion table (series, x, y) for external plotting."""
    writer = csv.writer(stream, lineterminator="\n")
    writer.writerow(["series", "x", "y"])
    for r in results:
        if r.error:
            continue
        writer.writerow(["mu", _fmt(r.value), _fmt(r.mu)])
        if r.mu_closed_form is not None:
            writer.writerow(["mu_closed_form", _fmt(r.value), _fmt(r.mu_closed_form)])
        if r.fidelity is not None:
            writer.writerow(["fidelity", _fmt(r.value), _fmt(r.fidelity)])


def _fit_loglog(x: np.ndarray, y: np.ndarray) -> tuple[float, float]:
    """Least-squares slope of log y vs log x with a 95 percent half-width."""
    lx = np.log(x)
    ly = np.log(y)
    n = len(lx)
    slope, intercept = np.polyfit(lx, ly, 1)
    resid = ly - (slope * lx + intercept)
    dof = n - 2
    if dof <= 0:
        return float(slope), float("inf")
    se = sqrt(float(resid @ resid) / dof / float(((lx - lx.mean()) ** 2).sum()))
    half = float(scipy.stats.t.ppf(0.975, dof)) * se
    return float(slope), half


def _perturbative_section(cfg: ExperimentConfig, lines: list[str]) -> None:
    """First-order model vs full evolution on a small instance, pulse-length ladder."""
    table = build_overlap_table(4, OscillatorParams(), quad_tol=cfg.quad_tol, cache_dir=cfg.cache_dir)
    basis = fock.FockBasis(4, 3)
    probe = evolution.ProbeParams(levels=4)
    state = states.number_state(2)
    phi = states.to_fock_vector(state.components[0], basis)
    mom = moments.moments_from_fock(state, table, 3)
    # amplitude rule pins the excited-branch weight at T0; the ladder then
    # halves T at fixed coupling, so the first-order residual shrinks as T^2
    T0 = 0.02
    area0 = cfg.amplitude_target / sqrt((probe.M * probe.Omega / 2.0) * mom.S)
    g0 = area0 / T0
    ham = evolution.build_joint_hamiltonian(table, basis, probe)
    lines.append("perturbative regime (two particles, four modes, pulse-length ladder)")
    lines.append("      T      residual      leakage_frac")
    residuals = []
    for T in (T0, T0 / 2, T0 / 4):
        pulse = evolution.Pulse.square(T=T, g0=g0)
        final = evolution.exact_state(evolution.embed_product(phi, probe), ham, pulse)
        model = evolution.perturbative_state(phi, table, pulse, probe, include_H0=True)
        diff = final.flat() - model.flat()
        residual = float(np.sqrt(np.vdot(diff, diff).real))
        block = measurement.postselect(final)
        frac = block.leakage / block.p_succ if block.p_succ > 0 else 0.0
        residuals.append(residual)
        lines.append(f"  {T:7.4g}  {residual:12.6g}  {frac:12.6g}")
    ratios = [residuals[i] / residuals[i + 1] for i in range(len(residuals) - 1)]
    lines.append(
        "  halving ratios "
        + ", ".join(f"{r:.3f}" for r in ratios)
        + " (second-order residual doubles them toward 4)"
    )
    lines.append("")


def _scaling_section(cfg: ExperimentConfig, table: OverlapTable, lines: list[str]) -> None:
    """Success probability vs mean particle number under inverse-quartic areas."""
    grid = np.array([4.0, 8.0, 16.0, 32.0, 64.0])
    probs = []
    probe = evolution.ProbeParams(cfg.probe_M, cfg.probe_Omega, cfg.probe_levels)
    scan = replace(cfg, pulse_preset="inverse-quartic", pulse_area=None)
    for a in grid:
        state = states.coherent_state(alpha_sq=float(a), tail_tol=cfg.tail_tol)
        mom = moments.extrapolated_moments(state, table)
        pulse = resolve_pulse(scan, mom.S, float(a))
        block = measurement.block_from_moments(mom, pulse, probe, state.norm_sq())
        probs.append(block.p_succ)
    slope, half = _fit_loglog(grid, np.array(probs))
    lines.append("success probability under inverse-quartic pulse areas")
    lines.append("  alpha_sq    p_succ")
    for a, p in zip(grid, probs):
        lines.append(f"  {a:8.4g}  {p:.6e}")
    lines.append(
        f"  fitted exponent {slope:+.4f} (95% half-width {half:.4f}); "
        "measured, not asserted"
    )
    lines.append("")


def _commutator_section(lines: list[str]) -> None:
    """The two coupling operators commute identically at every truncation."""
    lines.append("single-particle commutator residual vs truncation")
    lines.append("     K   max|[L,R]|   corner-product")
    for K in (8, 16, 32, 64):
        table = build_overlap_table(K, OscillatorParams())
        resid = fock.single_particle_commutator_residual(table)
        prod = fock.locality_product_residual(table, block=8)
        lines.append(f"  {K:4d}  {resid:11.4e}  {prod:13.6e}")
    lines.append(
        "  note: the left and right coefficient matrices share eigenvectors by"
    )
    lines.append(
        "  construction (lambda_L = 1 - lambda_R), so the commutator vanishes"
    )
    lines.append(
        "  identically at every K; the fixed upper-corner product above is the"
    )
    lines.append(
        "  quantity that actually decays as the truncation grows."
    )
    lines.append("")


def _superposition_section(table: OverlapTable, lines: list[str]) -> None:
    """Two-component superpositions, reported without a closed-form target."""
    lines.append("two-component superpositions (no closed form; values reported only)")
    cases = [
        ("(|0> + |1>)/sqrt(2)", [1 / sqrt(2), 1 / sqrt(2)]),
        ("(|0> + |2>)/sqrt(2)", [1 / sqrt(2), 0.0, 1 / sqrt(2)]),
    ]
    for label, coeffs in cases:
        state = states.superposition_state(coeffs)
        mom = moments.extrapolated_moments(state, table)
        mu = abs(mom.mLR) / mom.S if mom.S > 0 else 0.0
        lines.append(f"  {label}: mu = {mu:.12g}")
    lines.append(
        "  the first family carries no pair weight (E[n(n-1)] = 0), so its"
    )
    lines.append("  coherence vanishes; the second extracts a finite value.")
    lines.append("")


def run_validation(cfg: ExperimentConfig) -> str:
    """Assemble the numbered evidence report; informational, no assertions."""
    lines: list[str] = ["validation report", "=" * 17, ""]
    table = build_overlap_table(
        cfg.K, OscillatorParams(), quad_tol=cfg.quad_tol, cache_dir=cfg.cache_dir
    )
    _perturbative_section(cfg, lines)
    _scaling_section(cfg, table, lines)
    _commutator_section(lines)
    _superposition_section(table, lines)
    sums = moments.truncation_sums(table)
    lines.append(
        f"table diagnostics at K={table.K}: T_LL+T_RR = {sums.T_LL + sums.T_RR:.10f}, "
        f"T_LR = {sums.T_LR:.6e}, quadrature error = {float(table.quadrature_error.max()):.3e}"
    )
    return "\n".join(lines) + "\n"
