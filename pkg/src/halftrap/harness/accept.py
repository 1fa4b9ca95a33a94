"""Acceptance battery: one named target per headline claim, one line each.

Every target recomputes its quantity through the full pipeline and checks it
against an independently derived value (closed form, explicit occupation-basis
expectation, or an exact identity). Targets never share intermediate results
with the thing they check. Output is one `[PASS]`/`[FAIL]` line per target;
the battery exits nonzero if any target fails, and a target that cannot hold
is reported honestly rather than weakened.
"""

from __future__ import annotations

import io
from dataclasses import replace
from math import sqrt

import numpy as np

from .. import entanglement, evolution, fock, measurement, moments, states
from ..orbitals import OscillatorParams, OverlapTable, build_overlap_table
from .config import ExperimentConfig
from .sweep import resolve_pulse, run_sweep, write_sweep_csv

__all__ = ["TARGETS", "run_accept"]

_ALPHA_GRID = (0.5, 1.0, 2.0, 4.0, 8.0)
_NUMBER_GRID = tuple(range(1, 11))
_FIDELITY_GRID = (0.5, 2.0, 8.0)
_THERMAL_GRID = (0.5, 1.0, 4.0)


def _get_table(tables: dict, K: int, cfg: ExperimentConfig) -> OverlapTable:
    if K not in tables:
        tables[K] = build_overlap_table(
            K, OscillatorParams(), quad_tol=cfg.quad_tol, cache_dir=cfg.cache_dir
        )
    return tables[K]


def _pipeline_mu(cfg: ExperimentConfig, state, table: OverlapTable) -> float:
    """State -> extrapolated moments -> post-selected block -> partial transpose."""
    mom = moments.extrapolated_moments(state, table)
    probe = evolution.ProbeParams(cfg.probe_M, cfg.probe_Omega, cfg.probe_levels)
    pulse = resolve_pulse(replace(cfg, pulse_preset="amplitude10", pulse_area=None), mom.S)
    block = measurement.block_from_moments(mom, pulse, probe, state.norm_sq())
    return entanglement.negativity(entanglement.probe_block_density(block))


def check_coherent_negativity(cfg: ExperimentConfig, tables: dict) -> tuple[bool, str]:
    """Coherent-state negativity against its closed form over a mean-number grid."""
    table = _get_table(tables, cfg.K, cfg)
    worst = 0.0
    values = []
    for a in _ALPHA_GRID:
        state = states.coherent_state(alpha_sq=a, tail_tol=cfg.tail_tol)
        mu = _pipeline_mu(cfg, state, table)
        values.append(mu)
        worst = max(worst, abs(mu - entanglement.negativity_closed_form("coherent", a)))
    rising = all(lo < hi for lo, hi in zip(values, values[1:]))
    ok = worst < cfg.mu_tol and rising
    return ok, (
        f"max |mu - closed form| = {worst:.3e} over alpha_sq in {_ALPHA_GRID} "
        f"(tol {cfg.mu_tol:g}, K={cfg.K} extrapolated); strictly increasing "
        f"toward the 1/2 ceiling: {rising} (the infinite-occupation limit is "
        f"asserted through monotonicity and the closed forms, never evaluated)"
    )


def check_number_negativity(cfg: ExperimentConfig, tables: dict) -> tuple[bool, str]:
    """Number-state negativity; the single-particle value must be compatible with zero."""
    table = _get_table(tables, cfg.K, cfg)
    worst = 0.0
    mu_one = None
    for N in _NUMBER_GRID:
        mu = _pipeline_mu(cfg, states.number_state(N), table)
        if N == 1:
            mu_one = mu
        else:
            worst = max(
                worst, abs(mu - entanglement.negativity_closed_form("number", float(N)))
            )
    ok = worst < cfg.mu_tol and mu_one < cfg.single_particle_mu_bound
    return ok, (
        f"max |mu - closed form| = {worst:.3e} for N in {_NUMBER_GRID[1:]} "
        f"(tol {cfg.mu_tol:g}); mu(N=1) = {mu_one:.3e} "
        f"(bound {cfg.single_particle_mu_bound:g})"
    )


def check_fidelity(cfg: ExperimentConfig, tables: dict) -> tuple[bool, str]:
    """Remnant-overlap fidelity against 1/sqrt(1 + 2/<n>), rising with <n>."""
    table = _get_table(tables, cfg.K, cfg)
    worst = 0.0
    values = []
    for a in _FIDELITY_GRID:
        state = states.coherent_state(alpha_sq=a, tail_tol=cfg.tail_tol)
        f = entanglement.disturbance_fidelity(state, table, extrapolate=True)
        values.append(f)
        worst = max(worst, abs(f - 1.0 / sqrt(1.0 + 2.0 / a)))
    rising = all(lo < hi for lo, hi in zip(values, values[1:]))
    ok = worst < cfg.f_tol and rising
    return ok, (
        f"max |F - closed form| = {worst:.3e} over alpha_sq in {_FIDELITY_GRID} "
        f"(tol {cfg.f_tol:g}); strictly increasing toward the F = 1 ceiling: "
        f"{rising} (the limit itself is covered by monotonicity, not evaluated)"
    )


def _oracle_states(seed: int) -> list:
    """Twenty small states covering every family, truncated to four quanta."""
    rng = np.random.default_rng(seed)
    out = []
    for N in range(5):
        out.append(states.number_state(N))
    for a in (0.5, 1.0, 2.0, 4.0):
        out.append(states.coherent_state(alpha_sq=a, n_cut=4, tail_tol=1.0))
    for _ in range(6):
        raw = rng.normal(size=5) + 1j * rng.normal(size=5)
        out.append(states.superposition_state(raw / np.linalg.norm(raw)))
    for nbar in (0.5, 1.0, 4.0):
        out.append(states.thermal_state(nbar, n_cut=4, tail_tol=1.0))
    for a in (1.0, 2.0):
        out.append(states.phase_averaged_state(a, n_cut=4, tail_tol=1.0))
    return out


def check_oracle(cfg: ExperimentConfig, tables: dict) -> tuple[bool, str]:
    """Closed-form moments vs explicit occupation-basis expectations, entry by entry."""
    table = _get_table(tables, 6, cfg)
    batch = _oracle_states(cfg.seed)
    worst = 0.0
    for state in batch:
        closed = moments.moments_from_state(state, table)
        explicit = moments.moments_from_fock(state, table, n_max=4)
        worst = max(
            worst,
            abs(closed.mLL - explicit.mLL),
            abs(closed.mRR - explicit.mRR),
            abs(closed.mLR - explicit.mLR),
        )
    ok = worst < cfg.oracle_tol
    return ok, (
        f"{len(batch)} states, six modes, max entry deviation = {worst:.3e} "
        f"(tol {cfg.oracle_tol:g})"
    )


def perturbation_evidence(cfg: ExperimentConfig, tables: dict) -> dict:
    """Residual ladder and leakage for the first-order model on a small instance."""
    table = _get_table(tables, 4, cfg)
    basis = fock.FockBasis(4, 3)
    probe = evolution.ProbeParams(levels=4)
    phi = states.to_fock_vector(states.number_state(2).components[0], basis)
    mom = moments.moments_from_fock(states.number_state(2), table, 3)
    T0 = 0.02
    g0 = cfg.amplitude_target / sqrt((probe.M * probe.Omega / 2.0) * mom.S) / T0
    ham = evolution.build_joint_hamiltonian(table, basis, probe)
    residuals = []
    leak_fracs = []
    for T in (T0, T0 / 2, T0 / 4):
        pulse = evolution.Pulse.square(T=T, g0=g0)
        final = evolution.exact_state(evolution.embed_product(phi, probe), ham, pulse)
        model = evolution.perturbative_state(phi, table, pulse, probe, include_H0=True)
        diff = final.flat() - model.flat()
        residuals.append(float(np.sqrt(np.vdot(diff, diff).real)))
        block = measurement.postselect(final)
        leak_fracs.append(block.leakage / block.p_succ if block.p_succ > 0 else 0.0)
    ratios = [residuals[i] / residuals[i + 1] for i in range(len(residuals) - 1)]
    return {"residuals": residuals, "ratios": ratios, "leak_fracs": leak_fracs}


def check_perturbation(cfg: ExperimentConfig, tables: dict) -> tuple[bool, str]:
    """First-order residual must shrink quadratically and leakage stay marginal."""
    ev = perturbation_evidence(cfg, tables)
    ratios_ok = all(cfg.ratio_lo <= r <= cfg.ratio_hi for r in ev["ratios"])
    leak_ok = all(f < cfg.leakage_fraction for f in ev["leak_fracs"])
    return ratios_ok and leak_ok, (
        "residual halving ratios "
        + ", ".join(f"{r:.3f}" for r in ev["ratios"])
        + f" (required within [{cfg.ratio_lo:g}, {cfg.ratio_hi:g}]); "
        + "max leakage fraction "
        + f"{max(ev['leak_fracs']):.2e} (bound {cfg.leakage_fraction:g})"
    )


def check_commutator(cfg: ExperimentConfig, tables: dict) -> tuple[bool, str]:
    """Commutator residual compared across truncations, exactly as stated.

    The comparison demands a strict decrease from eight to sixty-four modes.
    Measured residuals are identically zero at both sizes (the two coupling
    matrices are simultaneously diagonalizable by construction), so the strict
    inequality cannot hold; the result is reported as measured.
    """
    r8 = fock.single_particle_commutator_residual(_get_table(tables, 8, cfg))
    r64 = fock.single_particle_commutator_residual(_get_table(tables, 64, cfg))
    ok = r64 < r8
    return ok, (
        f"residual K=8: {r8:.3e}, K=64: {r64:.3e}; strict decrease required, "
        "but the operators commute identically at every truncation "
        "(see the corner-product diagnostic in the validation report)"
    )


def check_structural(cfg: ExperimentConfig, tables: dict) -> tuple[bool, str]:
    """Partial-transpose negativity equals the off-diagonal fraction |rho_01|."""
    rng = np.random.default_rng(cfg.seed)
    worst = 0.0
    for _ in range(200):
        a = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
        h = a @ a.conj().T
        rho = h / np.trace(h).real
        block = measurement.ProbeBlock(
            matrix=rho, p_succ=0.5, leakage=0.0, source="synthetic"
        )
        mu_pt = entanglement.negativity(entanglement.probe_block_density(block))
        worst = max(worst, abs(mu_pt - abs(rho[0, 1])))
    table = _get_table(tables, cfg.K, cfg)
    for state in (
        states.coherent_state(alpha_sq=2.0),
        states.number_state(3),
        states.thermal_state(1.0),
    ):
        mom = moments.extrapolated_moments(state, table)
        block = measurement.block_from_moments(mom)
        mu_pt = entanglement.negativity(entanglement.probe_block_density(block))
        worst = max(worst, abs(mu_pt - abs(mom.mLR) / mom.S))
    ok = worst < cfg.structural_tol
    return ok, (
        f"max |negativity - |rho_01|| = {worst:.3e} over 200 random and 3 "
        f"state-derived blocks (tol {cfg.structural_tol:g})"
    )


def check_mixtures(cfg: ExperimentConfig, tables: dict) -> tuple[bool, str]:
    """Dephased and thermal mixtures against oracles built from factorial moments."""
    dephase_worst = 0.0
    for a in (1.0, 2.0, 4.0):
        # dephasing invariance holds exactly, so compare in the infinite-mode
        # limit where no truncation noise can mask a real difference
        mom_c = moments.analytic_limit_moments(
            states.coherent_state(alpha_sq=a, tail_tol=cfg.tail_tol)
        )
        mom_p = moments.analytic_limit_moments(
            states.phase_averaged_state(a, tail_tol=cfg.tail_tol)
        )
        mu_c = abs(mom_c.mLR) / (mom_c.mLL + mom_c.mRR)
        mu_p = abs(mom_p.mLR) / (mom_p.mLL + mom_p.mRR)
        dephase_worst = max(dephase_worst, abs(mu_c - mu_p))
    table = _get_table(tables, cfg.K, cfg)
    thermal_worst = 0.0
    for nbar in _THERMAL_GRID:
        mu = _pipeline_mu(cfg, states.thermal_state(nbar, tail_tol=cfg.tail_tol), table)
        # geometric weights give E[n] = nbar, E[n(n-1)] = 2 nbar^2,
        # hence mu -> nbar / (2 (nbar + 1))
        oracle = nbar / (2.0 * (nbar + 1.0))
        thermal_worst = max(thermal_worst, abs(mu - oracle))
    ok = dephase_worst < cfg.mixture_exact_tol and thermal_worst < cfg.mu_tol
    return ok, (
        f"max |mu(dephased) - mu(coherent)| = {dephase_worst:.3e} in the "
        f"infinite-mode limit (tol {cfg.mixture_exact_tol:g}); max thermal "
        f"deviation = {thermal_worst:.3e} for nbar in {_THERMAL_GRID} "
        f"(tol {cfg.mu_tol:g}); both reference values are oracles computed "
        f"from Poisson and geometric factorial moments, not quoted results"
    )


def check_determinism(cfg: ExperimentConfig, tables: dict) -> tuple[bool, str]:
    """Same config, same bytes: sweep CSV and seeded sampling are reproducible."""
    table = _get_table(tables, cfg.K, cfg)
    scan = replace(
        cfg,
        state="coherent",
        sweep_param="alpha_sq",
        sweep_values=[0.5, 1.0, 2.0, 4.0],
        path="moments",
        timing=False,
        pulse_preset="amplitude10",
        pulse_area=None,
    )
    payloads = []
    for _ in range(2):
        buf = io.StringIO()
        write_sweep_csv(run_sweep(scan, table), buf)
        payloads.append(buf.getvalue())
    csv_ok = payloads[0] == payloads[1]
    mom = moments.extrapolated_moments(states.coherent_state(alpha_sq=2.0), table)
    probe = evolution.ProbeParams(cfg.probe_M, cfg.probe_Omega, cfg.probe_levels)
    pulse = resolve_pulse(replace(cfg, pulse_preset="amplitude10", pulse_area=None), mom.S)
    block = measurement.block_from_moments(mom, pulse, probe)
    draws = [measurement.sample_outcomes(block, 10_000, cfg.seed) for _ in range(2)]
    sample_ok = draws[0] == draws[1]
    ok = csv_ok and sample_ok
    return ok, (
        f"sweep CSV bytes identical across two runs: {csv_ok} "
        f"({len(payloads[0])} bytes, {cfg.workers} workers); "
        f"seeded outcome counts identical: {sample_ok}"
    )


TARGETS = {
    "coherent-negativity": check_coherent_negativity,
    "number-negativity": check_number_negativity,
    "fidelity": check_fidelity,
    "oracle": check_oracle,
    "perturbation": check_perturbation,
    "commutator": check_commutator,
    "structural": check_structural,
    "mixtures": check_mixtures,
    "determinism": check_determinism,
}


def run_accept(cfg: ExperimentConfig, names: list[str], stream) -> int:
    """Run the named targets (or all), one verdict line each; 0 iff all pass."""
    if not names or names == ["all"]:
        names = list(TARGETS)
    unknown = [n for n in names if n not in TARGETS]
    if unknown:
        raise ValueError(f"unknown acceptance target(s): {', '.join(unknown)}")
    tables: dict[int, OverlapTable] = {}
    failures = 0
    for name in names:
        ok, detail = TARGETS[name](cfg, tables)
        verdict = "PASS" if ok else "FAIL"
        stream.write(f"[{verdict}] {name}: {detail}\n")
        if not ok:
            failures += 1
    stream.write(f"{len(names) - failures}/{len(names)} targets passed\n")
    return 0 if failures == 0 else 2
