"""Seesaw search for the largest CHSH value reachable with two-qubit states.

Every block update is an exact maximizer: the state is the top eigenvector of
the Bell operator, and each +-1 observable ``n . sigma`` points along its
normalized conditional-correlation vector. The value therefore never
decreases within a run.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np

from prbox.boxes import CorrelationBox
from prbox.channels import BIT_PAIRS, DensityOperator
from prbox.linalg import ValidationError, hermitian_eigh

TSIRELSON = 2 * np.sqrt(2)

PAULI = np.array([
    [[0, 1], [1, 0]],
    [[0, -1j], [1j, 0]],
    [[1, 0], [0, -1]],
], dtype=complex)
I2 = np.eye(2, dtype=complex)


@dataclass(frozen=True)
class QubitObservable:
    bloch: np.ndarray

    def __post_init__(self):
        n = np.array(self.bloch, dtype=float)
        if n.shape != (3,) or abs(np.linalg.norm(n) - 1) > 1e-12:
            raise ValidationError(f"Bloch vector must be a unit 3-vector, got {n}")
        n.setflags(write=False)
        object.__setattr__(self, "bloch", n)

    @classmethod
    def along(cls, v) -> "QubitObservable":
        v = np.asarray(v, dtype=float)
        return cls(v / np.linalg.norm(v))

    @property
    def matrix(self) -> np.ndarray:
        return np.tensordot(self.bloch, PAULI, axes=1)

    def projector(self, bit: int) -> np.ndarray:
        """Projector on outcome +1 (bit 0) or -1 (bit 1)."""
        return (I2 + (1 - 2 * bit) * self.matrix) / 2


@dataclass(frozen=True)
class ChshInstance:
    state: DensityOperator
    alice: tuple[QubitObservable, QubitObservable]
    bob: tuple[QubitObservable, QubitObservable]


@dataclass(frozen=True)
class SeesawConfig:
    restarts: int = 20
    max_iters: int = 500
    tol: float = 1e-10
    seed: int = 1

    def __post_init__(self):
        if self.restarts < 1 or self.max_iters < 1 or self.tol <= 0:
            raise ValueError("restarts, max_iters and tol must be positive")


@dataclass
class SeesawResult:
    best: ChshInstance
    value: float
    trace: list[float]
    traces: list[list[float]] = field(default_factory=list)


def bell_operator(alice, bob) -> np.ndarray:
    a0, a1 = (o.matrix for o in alice)
    b0, b1 = (o.matrix for o in bob)
    return np.kron(a0, b0 + b1) + np.kron(a1, b0 - b1)


def chsh_value(inst: ChshInstance) -> float:
    """Signed ``tr[rho (A B + A B' + A' B - A' B')]``."""
    return float(np.trace(inst.state.matrix @ bell_operator(inst.alice, inst.bob)).real)


def born_box(inst: ChshInstance) -> CorrelationBox:
    """``P(x, y | X, Y) = tr[rho (A_x (x) B_y)]`` with projective outcomes."""
    p = np.zeros((2, 2, 2, 2))
    for X, Y in BIT_PAIRS:
        for x, y in BIT_PAIRS:
            eff = np.kron(inst.alice[X].projector(x), inst.bob[Y].projector(y))
            p[x, y, X, Y] = np.trace(inst.state.matrix @ eff).real
    return CorrelationBox(p, tol=1e-10)


def canonical_instance() -> ChshInstance:
    """Phi+ with A = Z, A' = X, B = (Z + X)/sqrt2, B' = (Z - X)/sqrt2; value 2 sqrt2."""
    phi = np.array([1, 0, 0, 1], dtype=complex) / np.sqrt(2)
    z, x = np.array([0, 0, 1.0]), np.array([1.0, 0, 0])
    return ChshInstance(
        DensityOperator(np.outer(phi, phi.conj()), (2, 2)),
        (QubitObservable(z), QubitObservable(x)),
        (QubitObservable.along(z + x), QubitObservable.along(z - x)),
    )


def _top_state(op: np.ndarray) -> tuple[np.ndarray, float]:
    w, v = hermitian_eigh(op)
    psi = v[:, -1]
    return np.outer(psi, psi.conj()), float(w[-1])


def _correlation_tensor(rho: np.ndarray) -> np.ndarray:
    """``T[i, j] = tr[rho (sigma_i (x) sigma_j)]``."""
    r = rho.reshape(2, 2, 2, 2)
    return np.einsum("iab,jcd,bdac->ij", PAULI, PAULI, r).real


def _best_direction(v: np.ndarray, fallback: QubitObservable) -> QubitObservable:
    n = np.linalg.norm(v)
    return fallback if n < 1e-14 else QubitObservable(v / n)


def _sweep(rho, alice, bob):
    # Alice: <A (x) (B+B')> = a . T (b0 + b1), similarly for A'
    t = _correlation_tensor(rho)
    b0, b1 = bob[0].bloch, bob[1].bloch
    alice = (_best_direction(t @ (b0 + b1), alice[0]), _best_direction(t @ (b0 - b1), alice[1]))
    a0, a1 = alice[0].bloch, alice[1].bloch
    bob = (_best_direction(t.T @ (a0 + a1), bob[0]), _best_direction(t.T @ (a0 - a1), bob[1]))
    rho, value = _top_state(bell_operator(alice, bob))
    return rho, alice, bob, value


def seesaw_run(alice, bob, max_iters: int = 500, tol: float = 1e-10,
               rho: np.ndarray | None = None) -> tuple[ChshInstance, list[float]]:
    """One seesaw ascent from the given observables; returns the final instance and per-sweep values."""
    if rho is None:
        rho, value = _top_state(bell_operator(alice, bob))
    else:
        value = float(np.trace(rho @ bell_operator(alice, bob)).real)
    trace = [value]
    for _ in range(max_iters):
        rho, alice, bob, value = _sweep(rho, alice, bob)
        trace.append(value)
        if value - trace[-2] < tol:
            break
    return ChshInstance(DensityOperator(rho, (2, 2)), alice, bob), trace


def _random_observable(rng: np.random.Generator) -> QubitObservable:
    return QubitObservable.along(rng.standard_normal(3))


def seesaw_maximize(cfg: SeesawConfig = SeesawConfig()) -> SeesawResult:
    """Best CHSH value over ``cfg.restarts`` seeded random starts.

    Restart ``i`` draws from its own child of ``SeedSequence(cfg.seed)``, so
    each run is reproducible independently of the others.
    """
    children = np.random.SeedSequence(cfg.seed).spawn(cfg.restarts)
    best = None
    traces = []
    for child in children:
        rng = np.random.default_rng(child)
        alice = (_random_observable(rng), _random_observable(rng))
        bob = (_random_observable(rng), _random_observable(rng))
        inst, trace = seesaw_run(alice, bob, cfg.max_iters, cfg.tol)
        traces.append(trace)
        if best is None or trace[-1] > best[1]:
            best = (inst, trace[-1], trace)
    return SeesawResult(best[0], best[1], best[2], traces)
