"""Joint trap + two-probe states after the coupling pulse.

Two routes to the final state: the first-order perturbative form (exact in
the pulse area, valid for weak pulses) and full propagation of the truncated
joint Hamiltonian (used to measure how good first order actually is).
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import scipy.sparse as sp
from scipy.integrate import solve_ivp
from scipy.sparse.linalg import expm_multiply

from .fock import FockBasis, FockVector, build_lambda_operator
from .orbitals import OverlapTable

__all__ = [
    "ProbeParams",
    "Pulse",
    "JointState",
    "JointHamiltonian",
    "DimensionCapError",
    "IntegratorDriftError",
    "probe_lowering",
    "probe_momentum",
    "embed_product",
    "build_joint_hamiltonian",
    "perturbative_state",
    "exact_state",
]

DEFAULT_DIM_CAP = 20_000


@dataclass(frozen=True)
class ProbeParams:
    """One probe oscillator species: mass M, frequency Omega, level cutoff."""

    M: float = 1.0
    Omega: float = 1.0
    levels: int = 2

    def __post_init__(self) -> None:
        if not self.M > 0:
            raise ValueError(f"probe mass must be positive, got {self.M}")
        if not self.Omega > 0:
            raise ValueError(f"probe frequency must be positive, got {self.Omega}")
        if self.levels < 2:
            raise ValueError(f"probe needs at least 2 levels, got {self.levels}")


@dataclass(frozen=True)
class Pulse:
    """Coupling pulse g(t) on [0, T]; first-order physics sees only the area."""

    shape: str
    T: float
    g0: float = 0.0
    times: np.ndarray | None = None
    samples: np.ndarray | None = None

    @classmethod
    def square(cls, T: float, g0: float) -> "Pulse":
        if not T > 0:
            raise ValueError(f"pulse duration must be positive, got {T}")
        return cls(shape="square", T=float(T), g0=float(g0))

    @classmethod
    def sampled(cls, times, samples) -> "Pulse":
        t = np.asarray(times, dtype=float)
        g = np.asarray(samples, dtype=float)
        if t.ndim != 1 or t.shape != g.shape or len(t) < 2:
            raise ValueError("need matching 1-d arrays of at least two samples")
        if t[0] != 0.0 or np.any(np.diff(t) <= 0):
            raise ValueError("sample times must start at 0 and increase strictly")
        return cls(shape="sampled", T=float(t[-1]), times=t, samples=g)

    @property
    def area(self) -> float:
        if self.shape == "square":
            return self.g0 * self.T
        return float(np.trapezoid(self.samples, self.times))

    def value(self, t: float) -> float:
        if self.shape == "square":
            return self.g0 if 0.0 <= t <= self.T else 0.0
        return float(np.interp(t, self.times, self.samples))


class DimensionCapError(RuntimeError):
    pass


class IntegratorDriftError(RuntimeError):
    pass


@dataclass
class JointState:
    """Amplitudes over (trap Fock basis) x (probe L levels) x (probe R levels)."""

    basis: FockBasis
    tensor: np.ndarray

    def __post_init__(self) -> None:
        self.tensor = np.asarray(self.tensor, dtype=np.complex128)
        if self.tensor.ndim != 3 or self.tensor.shape[0] != self.basis.dimension:
            raise ValueError(
                f"tensor shape {self.tensor.shape} incompatible with basis "
                f"dimension {self.basis.dimension}"
            )

    @property
    def probe_dims(self) -> tuple[int, int]:
        return self.tensor.shape[1], self.tensor.shape[2]

    @property
    def dimension(self) -> int:
        return self.tensor.size

    def norm(self) -> float:
        return float(np.linalg.norm(self.tensor))

    def flat(self) -> np.ndarray:
        return self.tensor.reshape(-1)

    def copy(self) -> "JointState":
        return JointState(self.basis, self.tensor.copy())


def probe_lowering(levels: int) -> np.ndarray:
    """Truncated oscillator lowering operator b on `levels` levels."""
    b = np.zeros((levels, levels))
    for n in range(1, levels):
        b[n - 1, n] = np.sqrt(n)
    return b


def probe_momentum(probe: ProbeParams) -> np.ndarray:
    """P = i sqrt(M Omega / 2) (b^dag - b) on the truncated probe space."""
    b = probe_lowering(probe.levels)
    return 1j * np.sqrt(probe.M * probe.Omega / 2.0) * (b.T - b)


def embed_product(phi: FockVector, probe: ProbeParams) -> JointState:
    """|phi> with both probes in their ground state."""
    d = probe.levels
    tensor = np.zeros((phi.basis.dimension, d, d), dtype=np.complex128)
    tensor[:, 0, 0] = phi.amplitudes
    return JointState(phi.basis, tensor)


@dataclass(frozen=True)
class JointHamiltonian:
    """Sparse H_0 and coupling operator V = Lambda_L P_L + Lambda_R P_R."""

    basis: FockBasis
    probe: ProbeParams
    H0: sp.csr_matrix
    V: sp.csr_matrix


def _trap_energies(basis: FockBasis, omega: float) -> np.ndarray:
    # orbital k carries energy (k + 1/2) omega per particle
    eps = (np.arange(basis.K) + 0.5) * omega
    return np.array([float(np.dot(occ, eps)) for occ in basis.states])


def build_joint_hamiltonian(
    table: OverlapTable,
    basis: FockBasis,
    probe: ProbeParams,
    dim_cap: int = DEFAULT_DIM_CAP,
) -> JointHamiltonian:
    """Assemble H_0 and V on the flattened trap x probe x probe space."""
    d = probe.levels
    total_dim = basis.dimension * d * d
    if total_dim > dim_cap:
        raise DimensionCapError(
            f"joint dimension {total_dim} exceeds cap {dim_cap}"
        )
    lamL = build_lambda_operator("L", table, basis).matrix
    lamR = build_lambda_operator("R", table, basis).matrix

    eye_trap = sp.identity(basis.dimension, format="csr")
    eye_p = sp.identity(d, format="csr")
    h_probe = sp.diags((np.arange(d) + 0.5) * probe.Omega).tocsr()
    h_trap = sp.diags(_trap_energies(basis, table.params.omega)).tocsr()

    H0 = (
        sp.kron(sp.kron(h_trap, eye_p), eye_p)
        + sp.kron(sp.kron(eye_trap, h_probe), eye_p)
        + sp.kron(sp.kron(eye_trap, eye_p), h_probe)
    ).tocsr()

    P = sp.csr_matrix(probe_momentum(probe))
    V = (
        sp.kron(sp.kron(lamL, P), eye_p) + sp.kron(sp.kron(lamR, eye_p), P)
    ).tocsr()
    return JointHamiltonian(basis=basis, probe=probe, H0=H0, V=V)


def perturbative_state(
    phi: FockVector,
    table: OverlapTable,
    pulse: Pulse,
    probe: ProbeParams,
    include_H0: bool = True,
) -> JointState:
    """First-order joint state, unnormalized.

    The zero-excitation branch is (1 - i T H_0)|phi>|00>; each single
    excitation branch carries area * sqrt(M Omega / 2) * Lambda|phi>. With
    include_H0 off the free-evolution term is dropped; it lives entirely in
    the branch that post-selection discards.
    """
    if probe.levels < 2:
        raise ValueError("probe cutoff must be >= 2")
    basis = phi.basis
    lamL = build_lambda_operator("L", table, basis).matrix
    lamR = build_lambda_operator("R", table, basis).matrix

    d = probe.levels
    tensor = np.zeros((basis.dimension, d, d), dtype=np.complex128)
    tensor[:, 0, 0] = phi.amplitudes
    if include_H0:
        h_trap = _trap_energies(basis, table.params.omega)
        zero_point = probe.Omega  # both probes in their ground level
        tensor[:, 0, 0] -= 1j * pulse.T * (h_trap + zero_point) * phi.amplitudes
    amp = pulse.area * np.sqrt(probe.M * probe.Omega / 2.0)
    tensor[:, 1, 0] = amp * (lamL @ phi.amplitudes)
    tensor[:, 0, 1] = amp * (lamR @ phi.amplitudes)
    return JointState(basis, tensor)


def exact_state(
    initial: JointState,
    ham: JointHamiltonian,
    pulse: Pulse,
    dim_cap: int = DEFAULT_DIM_CAP,
    norm_tol: float = 1e-9,
) -> JointState:
    """Propagate the joint state through the pulse with the full Hamiltonian.

    Square pulses use the sparse matrix exponential; sampled pulses use a
    high-order explicit integrator whose norm drift is checked against
    `norm_tol` and reported as a hard error when exceeded.
    """
    if initial.dimension > dim_cap:
        raise DimensionCapError(
            f"joint dimension {initial.dimension} exceeds cap {dim_cap}"
        )
    if initial.probe_dims != (ham.probe.levels, ham.probe.levels):
        raise ValueError("state and Hamiltonian disagree on probe levels")
    psi0 = initial.flat()
    norm0 = np.linalg.norm(psi0)

    if pulse.shape == "square":
        A = (-1j * pulse.T) * (ham.H0 + pulse.g0 * ham.V)
        psiT = expm_multiply(A.tocsc(), psi0)
    else:
        H0 = ham.H0.tocsr()
        V = ham.V.tocsr()

        def rhs(t: float, y: np.ndarray) -> np.ndarray:
            return -1j * (H0 @ y + pulse.value(t) * (V @ y))

        sol = solve_ivp(
            rhs,
            (0.0, pulse.T),
            psi0,
            method="DOP853",
            rtol=1e-11,
            atol=1e-13,
            dense_output=False,
        )
        if not sol.success:
            raise IntegratorDriftError(f"propagation failed: {sol.message}")
        psiT = sol.y[:, -1]

    drift = abs(np.linalg.norm(psiT) - norm0)
    if drift > norm_tol:
        raise IntegratorDriftError(
            f"norm drift {drift:.3e} exceeds tolerance {norm_tol:.3e}"
        )
    d = ham.probe.levels
    return JointState(initial.basis, psiT.reshape(initial.basis.dimension, d, d))
