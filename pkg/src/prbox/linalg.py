"""Dense complex linear algebra for small (dim <= 16) operators.

Matrices are plain ``numpy`` complex arrays. The helpers here validate shape
and finiteness, and provide the handful of operations the rest of the package
needs: Kronecker products, partial traces over declared subsystems, Hermitian
eigenvalues and positivity tests. Subsystem indices are 0-based.
"""

from __future__ import annotations

from functools import reduce
from typing import Iterable, Sequence

import numpy as np
import numpy.typing as npt

HERMITIAN_TOL = 1e-10
PSD_TOL = 1e-10
MAX_DIM = 16


class DimensionError(ValueError):
    """Raised when matrix shapes or subsystem dimensions do not fit together."""


class ValidationError(ValueError):
    """Raised when an operator fails a structural check (Hermiticity, finiteness)."""


def as_matrix(m: npt.ArrayLike) -> np.ndarray:
    """Return ``m`` as a square, finite complex128 array.

    The returned array is a read-only copy so values can be shared freely.
    """
    a = np.array(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1] or a.shape[0] < 1:
        raise DimensionError(f"expected a non-empty square matrix, got shape {a.shape}")
    if not np.all(np.isfinite(a)):
        raise ValidationError("matrix contains NaN or Inf entries")
    a.setflags(write=False)
    return a


def check_shape(dim: int, dims: Sequence[int]) -> tuple[int, ...]:
    dims = tuple(int(d) for d in dims)
    if not dims or any(d < 1 for d in dims):
        raise DimensionError(f"subsystem dimensions must be positive, got {dims}")
    if int(np.prod(dims)) != dim:
        raise DimensionError(f"subsystem dimensions {dims} do not multiply to {dim}")
    return dims


def ket(index: int, dim: int = 2) -> np.ndarray:
    """Computational basis vector ``|index>`` in dimension ``dim``."""
    v = np.zeros(dim, dtype=complex)
    v[index] = 1.0
    return v


def projector(vec: npt.ArrayLike) -> np.ndarray:
    v = np.asarray(vec, dtype=complex).ravel()
    return np.outer(v, v.conj())


def basis_projector(bits: Sequence[int], dim: int = 2) -> np.ndarray:
    """``|b0 b1 ...><b0 b1 ...|`` for a list of basis labels."""
    return tensor(*(projector(ket(b, dim)) for b in bits))


def tensor(*ms: npt.ArrayLike) -> np.ndarray:
    """Kronecker product of one or more matrices, left factor most significant."""
    if not ms:
        raise DimensionError("tensor needs at least one factor")
    return reduce(np.kron, (np.asarray(m, dtype=complex) for m in ms))


def partial_trace(m: npt.ArrayLike, dims: Sequence[int], keep: Iterable[int]) -> np.ndarray:
    """Trace out every subsystem not listed in ``keep``.

    Parameters
    ----------
    m : array_like
        Operator on the composite space ``H_dims[0] (x) H_dims[1] (x) ...``.
    dims : sequence of int
        Subsystem dimensions; their product must equal ``m.shape[0]``.
    keep : iterable of int
        0-based indices of the subsystems to keep. The kept subsystems stay in
        their original order. An empty ``keep`` returns the 1x1 matrix ``[tr m]``.

    Examples
    --------
    >>> rho = basis_projector([0, 1])
    >>> partial_trace(rho, [2, 2], keep=[1]).real
    array([[0., 0.],
           [0., 1.]])
    """
    a = np.asarray(m, dtype=complex)
    if a.ndim != 2 or a.shape[0] != a.shape[1]:
        raise DimensionError(f"expected a square matrix, got shape {a.shape}")
    dims = check_shape(a.shape[0], dims)
    n = len(dims)
    keep = sorted(set(int(k) for k in keep))
    if any(k < 0 or k >= n for k in keep):
        raise DimensionError(f"keep indices {keep} out of range for {n} subsystems")
    traced = [i for i in range(n) if i not in keep]

    t = a.reshape(dims + dims)
    # contract row/col index pairs from the highest axis down so positions stay valid
    for count, i in enumerate(sorted(traced, reverse=True)):
        remaining = n - count
        t = np.trace(t, axis1=i, axis2=i + remaining)
    d_keep = int(np.prod([dims[k] for k in keep])) if keep else 1
    return t.reshape(d_keep, d_keep)


def is_hermitian(m: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> bool:
    a = np.asarray(m, dtype=complex)
    return a.ndim == 2 and a.shape[0] == a.shape[1] and bool(np.max(np.abs(a - a.conj().T), initial=0.0) <= tol)


def hermitian_eigenvalues(m: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> np.ndarray:
    """Real eigenvalues of a Hermitian matrix in ascending order."""
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        raise ValidationError("matrix is not Hermitian within tolerance")
    return np.linalg.eigvalsh((a + a.conj().T) / 2)


def hermitian_eigh(m: npt.ArrayLike, tol: float = HERMITIAN_TOL) -> tuple[np.ndarray, np.ndarray]:
    """Eigenvalues (ascending) and orthonormal eigenvectors as columns."""
    a = as_matrix(m)
    if not is_hermitian(a, tol):
        raise ValidationError("matrix is not Hermitian within tolerance")
    return np.linalg.eigh((a + a.conj().T) / 2)


def is_positive_semidefinite(m: npt.ArrayLike, tol: float = PSD_TOL,
                             hermitian_tol: float = HERMITIAN_TOL) -> bool:
    return bool(hermitian_eigenvalues(m, hermitian_tol)[0] >= -tol)


def frobenius_distance(a: npt.ArrayLike, b: npt.ArrayLike) -> float:
    return float(np.linalg.norm(np.asarray(a) - np.asarray(b)))


def random_density_matrix(dim: int, rng: np.random.Generator) -> np.ndarray:
    """Full-rank random state ``G G^dag / tr(G G^dag)`` with complex Gaussian ``G``."""
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    r = g @ g.conj().T
    return r / np.trace(r).real


def random_hermitian(dim: int, rng: np.random.Generator) -> np.ndarray:
    g = rng.standard_normal((dim, dim)) + 1j * rng.standard_normal((dim, dim))
    return (g + g.conj().T) / 2
