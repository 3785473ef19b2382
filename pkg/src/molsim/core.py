"""Shared numerical substrate for the simulation modules.

All model Hilbert spaces in this package decompose into blocks labelled by a
conserved quantum number (total molecule number, total excitation number,
...).  This module provides the block-structured basis bookkeeping, dense
per-block Hermitian operators with cached eigendecompositions, exact unitary
propagation exp(-iHt), a classical RK4 integrator for the linear dissipative
equations of motion, and expectation values.

Block dimensions stay below ~1000 for every experiment in this package, so
everything is dense per block; there is no general sparse engine here.
"""

from __future__ import annotations

from dataclasses import dataclass, field
from typing import Callable, Sequence

import numpy as np

# Default numerical tolerances.  Overridable per call; these values are used
# wherever a caller does not say otherwise.
TOL_HERMITICITY = 1e-12
TOL_NORM = 1e-10
TOL_IMAG = 1e-10
TOL_TRACE = 1e-8


class BlockStructureError(ValueError):
    """Raised for malformed bases, mismatched bases or broken invariants."""


@dataclass(frozen=True)
class BlockBasis:
    """Basis partitioned into conserved-quantum-number blocks.

    Parameters
    ----------
    blocks : sequence of (label, states)
        ``label`` is a hashable conserved-quantum-number tag, ``states`` a
        sequence of hashable basis-state descriptors.  Labels must be
        distinct; within a block, descriptors must be distinct.
    """

    blocks: tuple
    _index: dict = field(init=False, repr=False, compare=False)

    def __init__(self, blocks: Sequence):
        object.__setattr__(self, "blocks",
                           tuple((label, tuple(states)) for label, states in blocks))
        labels = [label for label, _ in self.blocks]
        if len(set(labels)) != len(labels):
            raise BlockStructureError("duplicate block labels")
        index = {}
        for b, (label, states) in enumerate(self.blocks):
            for k, s in enumerate(states):
                key = (label, s)
                if key in index:
                    raise BlockStructureError(
                        f"duplicate state {s!r} in block {label!r}")
                index[key] = (b, k)
        object.__setattr__(self, "_index", index)

    @property
    def n_blocks(self) -> int:
        return len(self.blocks)

    @property
    def block_dims(self) -> tuple:
        return tuple(len(states) for _, states in self.blocks)

    @property
    def dim(self) -> int:
        return sum(self.block_dims)

    def block_label(self, b: int):
        return self.blocks[b][0]

    def locate(self, label, state) -> tuple:
        """Return (block id, offset) of a basis-state descriptor."""
        return self._index[(label, state)]


def _check_same_basis(a, b):
    if a.basis is not b.basis and a.basis != b.basis:
        raise BlockStructureError("operands are defined on different bases")


class HermitianOperator:
    """Block-diagonal Hermitian operator: one dense matrix per basis block.

    The Hermiticity of every block is verified at construction against
    ``tol`` (relative Frobenius norm); small anti-Hermitian round-off is
    symmetrized away, larger violations are rejected with the offending
    block named.
    """

    def __init__(self, basis: BlockBasis, block_matrices: Sequence[np.ndarray],
                 tol: float = TOL_HERMITICITY):
        if len(block_matrices) != basis.n_blocks:
            raise BlockStructureError("one matrix per block required")
        mats = []
        for b, m in enumerate(block_matrices):
            m = np.asarray(m, dtype=complex)
            d = basis.block_dims[b]
            if m.shape != (d, d):
                raise BlockStructureError(
                    f"block {basis.block_label(b)!r}: matrix shape {m.shape} != ({d}, {d})")
            nrm = np.linalg.norm(m)
            dev = np.linalg.norm(m - m.conj().T)
            if dev > tol * max(nrm, 1.0):
                raise BlockStructureError(
                    f"block {basis.block_label(b)!r} is not Hermitian "
                    f"(relative deviation {dev / max(nrm, 1.0):.3e})")
            mats.append(0.5 * (m + m.conj().T))
        self.basis = basis
        self.block_matrices = tuple(mats)
        self._eig = None

    def eig(self):
        """Eigendecomposition per block, cached.

        Returns
        -------
        (eigenvalues, eigenvectors)
            Lists over blocks; eigenvalues ascending, eigenvector columns
            unitary per block.
        """
        if self._eig is None:
            vals, vecs = [], []
            for m in self.block_matrices:
                w, v = np.linalg.eigh(m)
                vals.append(w)
                vecs.append(v)
            self._eig = (vals, vecs)
        return self._eig


class StateVector:
    """Normalized pure state: one complex amplitude vector per block."""

    def __init__(self, basis: BlockBasis, block_amplitudes: Sequence[np.ndarray]):
        if len(block_amplitudes) != basis.n_blocks:
            raise BlockStructureError("one amplitude vector per block required")
        amps = []
        for b, a in enumerate(block_amplitudes):
            a = np.asarray(a, dtype=complex).ravel()
            if a.shape[0] != basis.block_dims[b]:
                raise BlockStructureError(
                    f"block {basis.block_label(b)!r}: amplitude length mismatch")
            amps.append(a)
        self.basis = basis
        self.block_amplitudes = tuple(amps)

    @classmethod
    def basis_state(cls, basis: BlockBasis, label, state) -> "StateVector":
        """Unit vector on a single basis state."""
        amps = [np.zeros(d, dtype=complex) for d in basis.block_dims]
        b, k = basis.locate(label, state)
        amps[b][k] = 1.0
        return cls(basis, amps)

    def norm(self) -> float:
        return float(np.sqrt(sum(np.vdot(a, a).real for a in self.block_amplitudes)))

    def probabilities(self) -> list:
        return [np.abs(a) ** 2 for a in self.block_amplitudes]


@dataclass
class BlockDensity:
    """Unit-trace density matrix stored block-diagonally (one matrix per block)."""

    basis: BlockBasis
    block_matrices: tuple

    def trace(self) -> float:
        return float(sum(np.trace(m).real for m in self.block_matrices))


def eig_decompose(op: HermitianOperator):
    """Per-block eigendecomposition of a Hermitian operator.

    Eigenvalues come back ascending per block; the reconstruction
    ``V diag(w) V^\\dagger`` agrees with the input to ~1e-10 relative
    Frobenius norm (numpy eigh backend).
    """
    return op.eig()


def propagate(state: StateVector, op: HermitianOperator, t: float) -> StateVector:
    """Evolve a state by exp(-i H t) using the cached eigendecomposition.

    ``op`` plays the role of H in units where hbar = 1.  Norm is preserved
    to round-off and propagation composes exactly over time splits.
    """
    _check_same_basis(state, op)
    vals, vecs = op.eig()
    amps = []
    for a, w, v in zip(state.block_amplitudes, vals, vecs):
        amps.append(v @ (np.exp(-1j * w * t) * (v.conj().T @ a)))
    out = StateVector(state.basis, amps)
    nrm = out.norm()
    if abs(nrm - state.norm()) > TOL_NORM:
        raise FloatingPointError("propagation failed to preserve the norm")
    return out


def rk4_integrate(deriv: Callable[[np.ndarray], np.ndarray], y0: np.ndarray,
                  t_end: float, dt: float, sample_every: int | None = None):
    """Classical fixed-step RK4 for an autonomous linear system dy/dt = deriv(y).

    Parameters
    ----------
    deriv : callable
        Time-independent derivative of the flat state vector.
    y0 : array
        Initial state (real or complex), flattened.
    t_end, dt : float
        Horizon and step; the last step is shortened to land on t_end.
    sample_every : int, optional
        Record every k-th step (plus the initial and final states).  When
        None only the endpoints are recorded.

    Returns
    -------
    (times, samples) : (ndarray, ndarray)
        Sample times and the state at those times (samples[i] ~ y(times[i])).

    Raises
    ------
    FloatingPointError
        If a NaN/Inf appears in the state; the message carries the step index.
    """
    if dt <= 0:
        raise ValueError("dt must be positive")
    y = np.array(y0, dtype=complex if np.iscomplexobj(y0) else float)
    t = 0.0
    times = [0.0]
    samples = [y.copy()]
    step = 0
    while t < t_end - 1e-15 * max(t_end, 1.0):
        h = min(dt, t_end - t)
        k1 = deriv(y)
        k2 = deriv(y + 0.5 * h * k1)
        k3 = deriv(y + 0.5 * h * k2)
        k4 = deriv(y + h * k3)
        y = y + (h / 6.0) * (k1 + 2.0 * k2 + 2.0 * k3 + k4)
        t += h
        step += 1
        if not np.all(np.isfinite(y)):
            raise FloatingPointError(f"non-finite state at step {step} (t={t:g})")
        if sample_every is not None and step % sample_every == 0:
            times.append(t)
            samples.append(y.copy())
    if times[-1] != t:
        times.append(t)
        samples.append(y.copy())
    return np.array(times), np.array(samples)


def expectation(obj, op: HermitianOperator, imag_tol: float = TOL_IMAG,
                trace_tol: float = TOL_TRACE) -> float:
    """Expectation value <op> for a StateVector or a BlockDensity.

    The state must be normalized (density: unit trace within ``trace_tol``);
    the result must be real within ``imag_tol`` — both are enforced.
    """
    _check_same_basis(obj, op)
    if isinstance(obj, StateVector):
        nrm = obj.norm()
        if abs(nrm - 1.0) > trace_tol:
            raise ValueError(f"state norm {nrm} is not 1 within {trace_tol}")
        val = sum(np.vdot(a, m @ a)
                  for a, m in zip(obj.block_amplitudes, op.block_matrices))
    elif isinstance(obj, BlockDensity):
        tr = obj.trace()
        if abs(tr - 1.0) > trace_tol:
            raise ValueError(f"density trace {tr} is not 1 within {trace_tol}")
        val = sum(np.trace(r @ m)
                  for r, m in zip(obj.block_matrices, op.block_matrices))
    else:
        raise TypeError("expectation expects a StateVector or BlockDensity")
    if abs(val.imag) > imag_tol * max(1.0, abs(val.real)):
        raise FloatingPointError(f"expectation value has imaginary residue {val.imag:g}")
    return float(val.real)


def characteristic_polynomial(h: np.ndarray) -> np.ndarray:
    """Coefficients of det(xI - H) by the Faddeev-LeVerrier trace recursion.

    Kept eigensolver-free on purpose: together with a companion-matrix root
    finder it provides an independent oracle for eigenvalue tests.
    """
    h = np.asarray(h, dtype=complex)
    n = h.shape[0]
    coeffs = np.zeros(n + 1, dtype=complex)
    coeffs[0] = 1.0
    m = np.zeros_like(h)
    ident = np.eye(n, dtype=complex)
    for k in range(1, n + 1):
        m = h @ m + coeffs[k - 1] * ident
        coeffs[k] = -np.trace(h @ m) / k
    return coeffs
