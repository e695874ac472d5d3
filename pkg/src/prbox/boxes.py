"""Two-party correlation boxes with binary settings and outcomes.

Labels are fixed once for the whole package: outcome bit 0 is the value +1
and bit 1 is -1; setting 0 is the undashed observable (Z_0, A, B) and
setting 1 the dashed one (Z_1, A', B'). A box stores ``p[x, y, X, Y]``.
"""

from __future__ import annotations

import csv
import io
import json
from dataclasses import dataclass
from itertools import product
from typing import Sequence

import numpy as np
import numpy.typing as npt
from scipy.optimize import linprog

from prbox.channels import BIT_PAIRS, Channel, DensityOperator, apply
from prbox.linalg import DimensionError, ValidationError, basis_projector

BOX_TOL = 1e-9
SIGN = np.array([1.0, -1.0])  # outcome bit -> +-1

# (a0, a1, b0, b1) in lexicographic order
STRATEGIES = tuple(product((0, 1), repeat=4))


class CorrelationBox:
    """The 16 conditional probabilities ``P(x, y | X, Y)``."""

    __slots__ = ("p",)

    def __init__(self, p: npt.ArrayLike, tol: float = 1e-12):
        a = np.array(p, dtype=float)
        if a.shape != (2, 2, 2, 2):
            raise DimensionError(f"box table must have shape (2, 2, 2, 2), got {a.shape}")
        if not np.all(np.isfinite(a)):
            raise ValidationError("box contains non-finite entries")
        if a.min() < -tol or a.max() > 1 + tol:
            raise ValidationError("box entries must lie in [0, 1]")
        sums = a.sum(axis=(0, 1))
        if np.max(np.abs(sums - 1)) > tol:
            raise ValidationError(f"box is not normalized for every setting pair: {sums.ravel()}")
        a.setflags(write=False)
        self.p = a

    def __getitem__(self, key) -> float:
        return float(self.p[key])

    def __repr__(self):
        return f"CorrelationBox({self.p.tolist()!r})"

    def allclose(self, other: "CorrelationBox", atol: float = 1e-12) -> bool:
        return bool(np.max(np.abs(self.p - other.p)) <= atol)

    # -- interchange ----------------------------------------------------------
    def to_dict(self) -> dict:
        return {"p": {f"{x},{y}|{X},{Y}": float(self.p[x, y, X, Y])
                      for (X, Y) in BIT_PAIRS for (x, y) in BIT_PAIRS}}

    @classmethod
    def from_dict(cls, d: dict, tol: float = 1e-12) -> "CorrelationBox":
        p = np.full((2, 2, 2, 2), np.nan)
        for key, value in d["p"].items():
            outs, sets = key.split("|")
            x, y = (int(s) for s in outs.split(","))
            X, Y = (int(s) for s in sets.split(","))
            p[x, y, X, Y] = value
        if np.isnan(p).any():
            raise ValidationError("box JSON is missing entries")
        return cls(p, tol)

    def to_json(self) -> str:
        return json.dumps(self.to_dict())

    @classmethod
    def from_json(cls, text: str) -> "CorrelationBox":
        return cls.from_dict(json.loads(text))

    def to_csv(self) -> str:
        """4x4 table: rows are setting pairs X,Y and columns outcome pairs x,y."""
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["X,Y"] + [f"{x},{y}" for x, y in BIT_PAIRS])
        for X, Y in BIT_PAIRS:
            w.writerow([f"{X},{Y}"] + [repr(float(self.p[x, y, X, Y])) for x, y in BIT_PAIRS])
        return buf.getvalue()

    @classmethod
    def from_csv(cls, text: str) -> "CorrelationBox":
        rows = [r for r in csv.reader(io.StringIO(text)) if r]
        cols = [tuple(int(s) for s in c.split(",")) for c in rows[0][1:]]
        p = np.zeros((2, 2, 2, 2))
        for row in rows[1:]:
            X, Y = (int(s) for s in row[0].split(","))
            for (x, y), v in zip(cols, row[1:]):
                p[x, y, X, Y] = float(v)
        return cls(p)


@dataclass(frozen=True)
class ProcessMeasurementSetting:
    """Z_psi: feed the test state through the process, read out in the computational basis."""

    test_state: DensityOperator

    def __post_init__(self):
        m = self.test_state.matrix
        if m.shape != (2, 2):
            raise DimensionError("test state must be a single qubit")
        if abs(np.trace(m @ m).real - 1) > 1e-10:
            raise ValidationError("test state must be pure")

    @property
    def readout(self) -> tuple[np.ndarray, np.ndarray]:
        return basis_projector([0]), basis_projector([1])


def z_test(bit: int) -> ProcessMeasurementSetting:
    """Z_bit: test state |bit>, sigma_z readout."""
    return ProcessMeasurementSetting(DensityOperator.basis([bit]))


def z_settings() -> tuple[ProcessMeasurementSetting, ProcessMeasurementSetting]:
    return z_test(0), z_test(1)


def box_from_channel(ch: Channel,
                     alice: Sequence[ProcessMeasurementSetting] | None = None,
                     bob: Sequence[ProcessMeasurementSetting] | None = None) -> CorrelationBox:
    """``P(x, y | X, Y) = tr[(E_x (x) E_y) ch(rho_X (x) rho_Y)]``; defaults to Z_0/Z_1 on both sides."""
    if ch.din != 4 or ch.dout != 4:
        raise DimensionError("box_from_channel needs a two-qubit channel")
    alice = alice or z_settings()
    bob = bob or z_settings()
    p = np.zeros((2, 2, 2, 2))
    for X, Y in BIT_PAIRS:
        out = apply(ch, alice[X].test_state @ bob[Y].test_state).matrix
        for x, y in BIT_PAIRS:
            eff = np.kron(alice[X].readout[x], bob[Y].readout[y])
            p[x, y, X, Y] = np.trace(eff @ out).real
    return CorrelationBox(p)


def make_pr_box() -> CorrelationBox:
    p = np.zeros((2, 2, 2, 2))
    for x, y, X, Y in product((0, 1), repeat=4):
        p[x, y, X, Y] = 0.5 if x ^ y == X * Y else 0.0
    return CorrelationBox(p)


def uniform_box() -> CorrelationBox:
    return CorrelationBox(np.full((2, 2, 2, 2), 0.25))


def deterministic_box(strategy: Sequence[int]) -> CorrelationBox:
    """Box of the local strategy ``(a(X=0), a(X=1), b(Y=0), b(Y=1))``."""
    a0, a1, b0, b1 = strategy
    a, b = (a0, a1), (b0, b1)
    p = np.zeros((2, 2, 2, 2))
    for X, Y in BIT_PAIRS:
        p[a[X], b[Y], X, Y] = 1.0
    return CorrelationBox(p)


def correlator(box: CorrelationBox, X: int, Y: int) -> float:
    """``<X (x) Y> = sum_xy (+-1)(+-1) P(x, y | X, Y)``."""
    return float(SIGN @ box.p[:, :, X, Y] @ SIGN)


def correlators(box: CorrelationBox) -> tuple[float, float, float, float]:
    """``(<00>, <01>, <10>, <11>)``."""
    return tuple(correlator(box, X, Y) for X, Y in BIT_PAIRS)


def chsh_signed(box: CorrelationBox) -> float:
    e00, e01, e10, e11 = correlators(box)
    return e00 + e01 + e10 - e11


def chsh(box: CorrelationBox) -> float:
    return abs(chsh_signed(box))


def chsh_variants(box: CorrelationBox) -> np.ndarray:
    """The eight relabelings of CHSH (minus sign in each position, both overall signs)."""
    e = np.array(correlators(box))
    vals = []
    for pos in range(4):
        s = np.ones(4)
        s[pos] = -1
        vals.extend([s @ e, -(s @ e)])
    return np.array(vals)


@dataclass(frozen=True)
class SignalingReport:
    no_signaling: bool
    max_violation: float


def is_no_signaling(box: CorrelationBox, tol: float = BOX_TOL) -> SignalingReport:
    """Compare all eight marginal pairs: Alice's ``P(x|X)`` across ``Y`` and Bob's ``P(y|Y)`` across ``X``."""
    pa = box.p.sum(axis=1)  # [x, X, Y]
    pb = box.p.sum(axis=0)  # [y, X, Y]
    dev_a = np.abs(pa[:, :, 0] - pa[:, :, 1])
    dev_b = np.abs(pb[:, 0, :] - pb[:, 1, :])
    worst = float(max(dev_a.max(), dev_b.max()))
    return SignalingReport(worst <= tol, worst)


@dataclass(frozen=True)
class LocalModel:
    """Mixture weights over the 16 deterministic strategies in ``STRATEGIES`` order."""

    weights: np.ndarray

    def box(self) -> CorrelationBox:
        return CorrelationBox(np.tensordot(self.weights, _VERTICES, axes=1), tol=1e-9)


_VERTICES = np.stack([deterministic_box(s).p for s in STRATEGIES])


def local_membership(box: CorrelationBox, tol: float = BOX_TOL) -> LocalModel | None:
    """Find strategy weights reproducing ``box`` within ``tol`` (L-inf), or None.

    Solves the LP ``min t`` over 16 weights ``w >= 0`` with ``sum w = 1`` and
    ``|M w - p| <= t`` entrywise, where the columns of ``M`` are the
    deterministic boxes. The box is local when the optimal residual is at most
    ``tol``.
    """
    m = _VERTICES.reshape(16, 16).T
    p = box.p.reshape(16)
    slack = -np.ones((16, 1))
    res = linprog(
        c=np.r_[np.zeros(16), 1.0],
        A_ub=np.block([[m, slack], [-m, slack]]),
        b_ub=np.r_[p, -p],
        A_eq=np.r_[np.ones(16), 0.0][None, :],
        b_eq=[1.0],
        bounds=[(0, None)] * 17,
        method="highs",
    )
    if res.status != 0:
        return None
    w = np.clip(res.x[:16], 0, None)
    w = w / w.sum()
    if np.max(np.abs(m @ w - p)) > tol:
        return None
    return LocalModel(w)
