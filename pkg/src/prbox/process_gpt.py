"""Measurements on processes: process effects paired with Choi operators.

An experiment on an unknown channel prepares ``rho`` on ``H_in (x) H_anc``,
sends the ``H_in`` part through the channel, and tests the output
``H_out (x) H_anc`` with an effect ``E``. The same probability is obtained as
a linear functional ``tr[F C]`` of the channel's Choi operator ``C``, where

    F = din * (id (x) R*_rho)[E]

and ``R_rho`` is the unique linear map with ``(id (x) R_rho)[omega_+] = rho``.
The factor ``din`` compensates for the unit-trace Choi normalization.
With no ancilla (``anc_dim == 1``) this reduces to ``tr[E ch(rho)]``.
"""

from __future__ import annotations

from dataclasses import dataclass

import numpy as np
import numpy.typing as npt

from prbox.channels import ChoiOperator, DensityOperator, max_entangled_reference
from prbox.linalg import (
    HERMITIAN_TOL,
    PSD_TOL,
    DimensionError,
    ValidationError,
    as_matrix,
    hermitian_eigenvalues,
    is_hermitian,
)


@dataclass(frozen=True)
class Effect:
    """Hermitian operator with ``0 <= E <= I``."""

    matrix: np.ndarray

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if not is_hermitian(m, HERMITIAN_TOL):
            raise ValidationError("effect is not Hermitian")
        ev = hermitian_eigenvalues(m)
        if ev[0] < -PSD_TOL or ev[-1] > 1 + PSD_TOL:
            raise ValidationError(f"effect eigenvalues {ev[0]:.3g}..{ev[-1]:.3g} outside [0, 1]")
        object.__setattr__(self, "matrix", m)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]


@dataclass(frozen=True)
class StateInductionMap:
    """Superoperator of ``R_rho : L(H_in) -> L(H_anc)`` on row-major vectorized operators.

    ``superop`` has shape ``(anc_dim**2, in_dim**2)``.
    """

    superop: np.ndarray
    in_dim: int
    anc_dim: int

    def __call__(self, x: npt.ArrayLike) -> np.ndarray:
        x = np.asarray(x, dtype=complex)
        return (self.superop @ x.reshape(-1)).reshape(self.anc_dim, self.anc_dim)

    def adjoint(self) -> np.ndarray:
        """Hilbert-Schmidt adjoint ``R*`` as a superoperator ``(in_dim**2, anc_dim**2)``."""
        return self.superop.conj().T


@dataclass(frozen=True)
class ProcessEffect:
    matrix: np.ndarray
    rho_used: DensityOperator
    e_used: Effect
    din: int
    dout: int


def apply_on_second(superop: np.ndarray, x: np.ndarray, d_first: int, d_in: int, d_out: int) -> np.ndarray:
    """``(id (x) M)[x]`` for ``x`` on ``H_first (x) H_in`` and ``M`` given as a superoperator."""
    t = x.reshape(d_first, d_in, d_first, d_in).transpose(0, 2, 1, 3).reshape(d_first, d_first, d_in * d_in)
    t = t @ superop.T
    return t.reshape(d_first, d_first, d_out, d_out).transpose(0, 2, 1, 3).reshape(d_first * d_out, d_first * d_out)


def make_state_induction(rho: DensityOperator, in_dim: int | None = None) -> StateInductionMap:
    """Build ``R_rho`` from a state on ``H_in (x) H_anc``.

    ``in_dim`` defaults to the full dimension of ``rho`` (no ancilla). The
    defining identity fixes ``R_rho`` uniquely: ``R_rho(|j><k|)`` is the
    ``(j, k)`` block of ``rho`` on the ancilla factor.
    """
    d = rho.dim
    in_dim = d if in_dim is None else int(in_dim)
    if in_dim < 1 or d % in_dim:
        raise DimensionError(f"input dimension {in_dim} does not divide state dimension {d}")
    anc = d // in_dim
    blocks = rho.matrix.reshape(in_dim, anc, in_dim, anc).transpose(0, 2, 1, 3)
    # column j*in_dim + k holds vec(R(|j><k|))
    superop = blocks.reshape(in_dim * in_dim, anc * anc).T.copy()
    return StateInductionMap(superop, in_dim, anc)


def induced_state(r: StateInductionMap) -> np.ndarray:
    """``(id (x) R)[omega_+]``; equals the generating state."""
    return apply_on_second(r.superop, max_entangled_reference(r.in_dim), r.in_dim, r.in_dim, r.anc_dim)


def make_process_effect(rho: DensityOperator, e: Effect, dout: int | None = None,
                        in_dim: int | None = None) -> ProcessEffect:
    """Process effect for "prepare ``rho``, apply channel, measure ``e``".

    ``e`` acts on ``H_out (x) H_anc``. When ``dout`` is omitted the output
    dimension is inferred from ``e`` and the ancilla size.
    """
    r = make_state_induction(rho, in_dim)
    if dout is None:
        if e.dim % r.anc_dim:
            raise DimensionError("effect dimension is not a multiple of the ancilla dimension")
        dout = e.dim // r.anc_dim
    if e.dim != dout * r.anc_dim:
        raise DimensionError(f"effect dim {e.dim} does not match dout*anc = {dout * r.anc_dim}")
    f = r.in_dim * apply_on_second(r.adjoint(), e.matrix, dout, r.anc_dim, r.in_dim)
    return ProcessEffect(f, rho, e, din=r.in_dim, dout=dout)


def evaluate(f: ProcessEffect, choi: ChoiOperator) -> float:
    """Outcome probability ``tr[F C]``."""
    if (choi.din, choi.dout) != (f.din, f.dout):
        raise DimensionError(f"process effect is for ({f.din}->{f.dout}), Choi is ({choi.din}->{choi.dout})")
    return float(np.real(np.trace(f.matrix @ choi.matrix)))
