"""Quantum channels as Kraus families, their Choi operators, and the PR channel.

Choi convention used throughout the package: for a channel ``E`` with input
dimension ``din`` and output dimension ``dout``, the Choi operator is

    C = (E (x) id)[omega_+] / din,     omega_+ = sum_jk |jj><kk|

an operator on ``H_out (x) H_in`` (output factor first) with unit trace.
Trace preservation reads ``tr_out C = I_din / din``.
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field
from itertools import product
from typing import Sequence

import numpy as np
import numpy.typing as npt

from prbox.linalg import (
    HERMITIAN_TOL,
    PSD_TOL,
    DimensionError,
    ValidationError,
    as_matrix,
    basis_projector,
    check_shape,
    hermitian_eigh,
    is_hermitian,
    is_positive_semidefinite,
    partial_trace,
    random_density_matrix,
)

TP_TOL = 1e-10

# outcome pairs (j, k) are always enumerated 00, 01, 10, 11
BIT_PAIRS = tuple(product((0, 1), repeat=2))


@dataclass(frozen=True)
class DensityOperator:
    """Positive, unit-trace operator with declared subsystem dimensions."""

    matrix: np.ndarray
    dims: tuple[int, ...] = ()
    tol: float = field(default=1e-10, repr=False, compare=False)

    def __post_init__(self):
        m = as_matrix(self.matrix)
        dims = check_shape(m.shape[0], self.dims or (m.shape[0],))
        if not is_hermitian(m, self.tol):
            raise ValidationError("density operator is not Hermitian")
        if abs(np.trace(m) - 1) > self.tol:
            raise ValidationError(f"density operator has trace {np.trace(m).real:.3g}, expected 1")
        if not is_positive_semidefinite(m, self.tol, self.tol):
            raise ValidationError("density operator is not positive semidefinite")
        object.__setattr__(self, "matrix", m)
        object.__setattr__(self, "dims", dims)

    @property
    def dim(self) -> int:
        return self.matrix.shape[0]

    @classmethod
    def basis(cls, bits: Sequence[int]) -> "DensityOperator":
        """Product of computational basis qubit states, e.g. ``basis([1, 1])`` is |11><11|."""
        return cls(basis_projector(bits), dims=(2,) * len(bits))

    @classmethod
    def maximally_mixed(cls, dims: Sequence[int]) -> "DensityOperator":
        d = int(np.prod(dims))
        return cls(np.eye(d) / d, dims=tuple(dims))

    @classmethod
    def random(cls, dims: Sequence[int], rng: np.random.Generator) -> "DensityOperator":
        return cls(random_density_matrix(int(np.prod(dims)), rng), dims=tuple(dims))

    def __matmul__(self, other: "DensityOperator") -> "DensityOperator":
        """Tensor product of two states."""
        return DensityOperator(np.kron(self.matrix, other.matrix), self.dims + other.dims)


@dataclass(frozen=True)
class Channel:
    """Completely positive trace-preserving map ``rho -> sum_i K_i rho K_i^dag``."""

    kraus: tuple[np.ndarray, ...]
    din: int
    dout: int

    def __post_init__(self):
        ks = []
        for k in self.kraus:
            a = np.array(k, dtype=complex)
            if a.shape != (self.dout, self.din):
                raise DimensionError(f"Kraus operator of shape {a.shape}, expected {(self.dout, self.din)}")
            if not np.all(np.isfinite(a)):
                raise ValidationError("Kraus operator contains NaN or Inf entries")
            a.setflags(write=False)
            ks.append(a)
        if not ks:
            raise ValidationError("a channel needs at least one Kraus operator")
        object.__setattr__(self, "kraus", tuple(ks))
        err = tp_error(ks, self.din)
        if err > TP_TOL:
            raise ValidationError(f"Kraus family is not trace preserving (error {err:.3g})")

    @classmethod
    def from_kraus(cls, kraus: Sequence[npt.ArrayLike]) -> "Channel":
        ks = [np.asarray(k, dtype=complex) for k in kraus]
        dout, din = ks[0].shape
        return cls(tuple(ks), din=din, dout=dout)

    @classmethod
    def identity(cls, dim: int) -> "Channel":
        return cls((np.eye(dim, dtype=complex),), din=dim, dout=dim)


def tp_error(kraus: Sequence[np.ndarray], din: int) -> float:
    """Max-entry deviation of ``sum K^dag K`` from the identity."""
    s = sum(k.conj().T @ k for k in kraus)
    return float(np.max(np.abs(s - np.eye(din))))


@dataclass(frozen=True)
class ChoiOperator:
    """Normalized Choi operator on ``H_out (x) H_in`` (see module docstring)."""

    matrix: np.ndarray
    din: int
    dout: int

    def __post_init__(self):
        m = as_matrix(self.matrix)
        if m.shape[0] != self.din * self.dout:
            raise DimensionError(f"Choi matrix of dim {m.shape[0]} does not match dout*din={self.dout * self.din}")
        object.__setattr__(self, "matrix", m)

    def validate(self, tol: float = PSD_TOL) -> None:
        """Raise ``ValidationError`` unless the operator describes a CPTP map."""
        if not is_hermitian(self.matrix, HERMITIAN_TOL):
            raise ValidationError("Choi operator is not Hermitian")
        if not is_positive_semidefinite(self.matrix, tol):
            raise ValidationError("Choi operator is not positive semidefinite (map not CP)")
        if abs(np.trace(self.matrix) - 1) > tol:
            raise ValidationError("Choi operator does not have unit trace")
        marginal = partial_trace(self.matrix, [self.dout, self.din], keep=[1])
        if np.max(np.abs(marginal - np.eye(self.din) / self.din)) > tol:
            raise ValidationError("partial trace over output is not I/din (map not TP)")


def max_entangled_reference(d: int) -> np.ndarray:
    """Unnormalized ``omega_+ = sum_jk |jj><kk|`` on ``H_d (x) H_d``."""
    v = np.eye(d, dtype=complex).reshape(d * d)
    return np.outer(v, v)


def apply(ch: Channel, rho: DensityOperator | npt.ArrayLike) -> DensityOperator | np.ndarray:
    """Apply ``ch`` to ``rho``.

    A ``DensityOperator`` input returns a ``DensityOperator``; a bare array
    (useful for non-state operators such as ``omega_+``) returns an array.
    """
    m = rho.matrix if isinstance(rho, DensityOperator) else np.asarray(rho, dtype=complex)
    if m.shape != (ch.din, ch.din):
        raise DimensionError(f"channel expects input dim {ch.din}, got {m.shape}")
    out = sum(k @ m @ k.conj().T for k in ch.kraus)
    if isinstance(rho, DensityOperator):
        dims = rho.dims if ch.dout == ch.din else (ch.dout,)
        return DensityOperator(out, dims)
    return out


def to_choi(ch: Channel) -> ChoiOperator:
    # (K (x) I)|omega> has components K[o, j] at index (o, j), i.e. K flattened row-major
    vecs = np.stack([k.reshape(-1) for k in ch.kraus])
    c = vecs.T @ vecs.conj() / ch.din
    return ChoiOperator(c, din=ch.din, dout=ch.dout)


def from_choi(c: ChoiOperator, tol: float = 1e-12) -> Channel:
    """Kraus family from a Choi operator via its eigendecomposition.

    Eigenvectors with eigenvalue below ``tol`` are dropped. The result is a
    canonical (orthogonal) Kraus family; it matches the original family only
    up to the usual isometric freedom.
    """
    c.validate()
    w, v = hermitian_eigh(c.matrix * c.din)
    ks = [np.sqrt(lam) * v[:, i].reshape(c.dout, c.din) for i, lam in enumerate(w) if lam > tol]
    return Channel(tuple(ks), din=c.din, dout=c.dout)


def random_channel(din: int, dout: int, rng: np.random.Generator, n_kraus: int | None = None) -> Channel:
    """Random CPTP map from an isometry ``V = G (G^dag G)^(-1/2)`` cut into Kraus blocks."""
    r = n_kraus or din * dout
    if r * dout < din:
        raise DimensionError(f"{r} Kraus operators of shape ({dout}, {din}) cannot be trace preserving")
    g = rng.standard_normal((r * dout, din)) + 1j * rng.standard_normal((r * dout, din))
    w, u = np.linalg.eigh(g.conj().T @ g)
    v = g @ (u @ np.diag(w ** -0.5) @ u.conj().T)
    return Channel(tuple(v[i * dout:(i + 1) * dout] for i in range(r)), din=din, dout=dout)


def make_prepared_states() -> tuple[DensityOperator, DensityOperator]:
    """The correlated and anticorrelated two-qubit mixtures ``(xi_cor, xi_acor)``."""
    cor = (basis_projector([0, 0]) + basis_projector([1, 1])) / 2
    acor = (basis_projector([0, 1]) + basis_projector([1, 0])) / 2
    return DensityOperator(cor, (2, 2)), DensityOperator(acor, (2, 2))


def measure_and_prepare(prepared: Sequence[DensityOperator]) -> Channel:
    """Measure two qubits in the computational basis, prepare ``prepared[2j+k]`` on outcome (j, k).

    Each prepared state must be diagonal in the computational basis; every
    nonzero weight ``w`` at basis vector ``|m>`` contributes a Kraus operator
    ``sqrt(w) |m><jk|``.
    """
    if len(prepared) != 4:
        raise DimensionError("need one prepared state per outcome pair 00, 01, 10, 11")
    kraus = []
    for (j, k), xi in zip(BIT_PAIRS, prepared):
        diag = np.diag(xi.matrix)
        if np.max(np.abs(xi.matrix - np.diag(diag))) > 1e-12:
            raise ValidationError("prepared states must be diagonal in the computational basis")
        src = 2 * j + k
        for m, w in enumerate(diag.real):
            if w > 0:
                op = np.zeros((4, 4), dtype=complex)
                op[m, src] = np.sqrt(w)
                kraus.append(op)
    return Channel(tuple(kraus), din=4, dout=4)


def make_pr_channel() -> Channel:
    """Two-qubit channel ``rho -> (1 - kappa) xi_cor + kappa xi_acor``, ``kappa = <11|rho|11>``.

    Built as measure-and-prepare: outcome (j, k) prepares ``xi_acor`` when
    ``j*k == 1`` and ``xi_cor`` otherwise. Eight Kraus operators ``|m><jk| / sqrt2``.
    """
    cor, acor = make_prepared_states()
    return measure_and_prepare([acor if j * k else cor for j, k in BIT_PAIRS])


# -- JSON interchange ---------------------------------------------------------

def _encode(m: np.ndarray) -> list:
    return [[[float(z.real), float(z.imag)] for z in row] for row in np.asarray(m)]


def _decode(rows) -> np.ndarray:
    a = np.asarray(rows, dtype=float)
    return a[..., 0] + 1j * a[..., 1]


def channel_to_json(ch: Channel) -> str:
    return json.dumps({"din": ch.din, "dout": ch.dout, "kraus": [_encode(k) for k in ch.kraus]})


def channel_from_json(text: str) -> Channel:
    d = json.loads(text)
    return Channel(tuple(_decode(k) for k in d["kraus"]), din=int(d["din"]), dout=int(d["dout"]))


def choi_to_json(c: ChoiOperator) -> str:
    # din/dout ride along so the matrix can be split back into output/input factors
    return json.dumps({"choi": _encode(c.matrix), "din": c.din, "dout": c.dout})


def choi_from_json(text: str) -> ChoiOperator:
    d = json.loads(text)
    m = _decode(d["choi"])
    if "din" in d:
        din, dout = int(d["din"]), int(d["dout"])
    else:
        din = dout = int(round(np.sqrt(m.shape[0])))
    return ChoiOperator(m, din=din, dout=dout)
