"""Projective post-selection on the probes and sampled outcome statistics.

Post-selection keeps everything orthogonal to both probes in their ground
state, traces out the trap, and compresses to the single-excitation block
{|1>_L|0>_R, |0>_L|1>_R}. Population outside that block (possible on the
exact path) is folded into the success probability but excluded from the
block matrix and reported separately as leakage.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np

from .evolution import JointState, ProbeParams, Pulse
from .moments import ProbeBlockMoments

__all__ = [
    "ProbeBlock",
    "NoExtractionError",
    "postselect",
    "block_from_moments",
    "sample_outcomes",
]

_P_SUCC_FLOOR = 1e-300


class NoExtractionError(RuntimeError):
    """No extraction event possible: the post-selected weight is zero."""


@dataclass(frozen=True)
class ProbeBlock:
    """Post-selected two-probe state on the ordered basis {|10>, |01>}."""

    matrix: np.ndarray
    p_succ: float
    leakage: float
    source: str

    def __post_init__(self) -> None:
        rho = np.asarray(self.matrix, dtype=np.complex128)
        object.__setattr__(self, "matrix", rho)
        rho.setflags(write=False)
        if rho.shape != (2, 2):
            raise ValueError(f"block must be 2x2, got {rho.shape}")
        if np.abs(rho - rho.conj().T).max() > 1e-12:
            raise ValueError("post-selected block must be hermitian")
        if abs(rho[0, 0].real + rho[1, 1].real - 1.0) > 1e-12:
            raise ValueError("post-selected block must have unit trace")
        eigs = np.linalg.eigvalsh(rho)
        if eigs.min() < -1e-12:
            raise ValueError(f"post-selected block not PSD: min eig {eigs.min():.3e}")


def postselect(joint: JointState, p_floor: float = _P_SUCC_FLOOR) -> ProbeBlock:
    """Project out |00>, trace the trap, compress to the {10, 01} block."""
    norm_sq = float(np.vdot(joint.flat(), joint.flat()).real)
    if norm_sq <= 0.0:
        raise NoExtractionError("joint state has zero norm")
    branch_10 = joint.tensor[:, 1, 0]
    branch_01 = joint.tensor[:, 0, 1]
    w10 = float(np.vdot(branch_10, branch_10).real)
    w01 = float(np.vdot(branch_01, branch_01).real)
    # partial trace over the trap: rho_ab = sum_t psi_{t,a} conj(psi_{t,b})
    coh = complex(np.vdot(branch_01, branch_10))
    ground = joint.tensor[:, 0, 0]
    w00 = float(np.vdot(ground, ground).real)
    selected = norm_sq - w00
    leakage = max(selected - w10 - w01, 0.0)
    p_succ = selected / norm_sq
    if p_succ <= p_floor:
        raise NoExtractionError("no extraction event possible: p_succ below floor")
    block_weight = w10 + w01
    if block_weight <= 0.0:
        raise NoExtractionError("single-excitation block is empty")
    # rho_ab = sum_trap psi_a psi_b^*; row order (10, 01)
    rho = (
        np.array(
            [[w10, coh], [np.conj(coh), w01]],
            dtype=np.complex128,
        )
        / block_weight
    )
    return ProbeBlock(
        matrix=rho, p_succ=p_succ, leakage=leakage / norm_sq, source="from_joint_state"
    )


def block_from_moments(
    mom: ProbeBlockMoments,
    pulse: Pulse | None = None,
    probe: ProbeParams | None = None,
    state_norm_sq: float = 1.0,
) -> ProbeBlock:
    """Post-selected block from closed-form moments.

    The block itself needs only the three moments. The success probability
    additionally needs the pulse area and probe scales; it uses the
    first-order normalization (zero-excitation branch without free
    evolution), p = a^2 (M Omega / 2) S / (|phi|^2 + a^2 (M Omega / 2) S).
    When pulse or probe are omitted, p_succ is reported as NaN.
    """
    if mom.S <= 0.0:
        raise NoExtractionError("no extraction event possible: S = 0")
    rho = (
        np.array(
            [[mom.mLL, mom.mLR], [np.conj(mom.mLR), mom.mRR]],
            dtype=np.complex128,
        )
        / mom.S
    )
    p_succ = float("nan")
    if pulse is not None and probe is not None:
        prefactor = pulse.area ** 2 * probe.M * probe.Omega / 2.0
        p_succ = prefactor * mom.S / (state_norm_sq + prefactor * mom.S)
    return ProbeBlock(matrix=rho, p_succ=p_succ, leakage=0.0, source="from_moments")


def sample_outcomes(block: ProbeBlock, shots: int, seed: int) -> dict:
    """Seeded Bernoulli draws of the extraction event."""
    if shots < 1:
        raise ValueError(f"shots must be >= 1, got {shots}")
    if not 0.0 <= block.p_succ <= 1.0:
        raise ValueError(f"success probability {block.p_succ!r} outside [0, 1]")
    rng = np.random.default_rng(seed)
    successes = int(rng.binomial(shots, block.p_succ))
    return {"success": successes, "failure": shots - successes}
