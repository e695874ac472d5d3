"""Invariant battery run by ``prbox verify-all``."""

from __future__ import annotations

from dataclasses import dataclass
from typing import Callable

import numpy as np

from prbox import boxes, channels, protocol, quantum_bounds
from prbox.channels import Channel, DensityOperator
from prbox.linalg import frobenius_distance, hermitian_eigenvalues, partial_trace


@dataclass
class CheckResult:
    name: str
    passed: bool
    value: float
    detail: str = ""

    def to_dict(self) -> dict:
        return {"name": self.name, "passed": self.passed, "value": self.value, "detail": self.detail}


def _check_cptp(ch: Channel, tol: float) -> CheckResult:
    c = channels.to_choi(ch)
    min_eig = hermitian_eigenvalues(c.matrix)[0]
    marg = partial_trace(c.matrix, [c.dout, c.din], keep=[1])
    err = max(channels.tp_error(ch.kraus, ch.din),
              abs(np.trace(c.matrix).real - 1),
              float(np.max(np.abs(marg - np.eye(c.din) / c.din))),
              max(0.0, -min_eig))
    return CheckResult("cptp", err <= tol, err, f"min Choi eigenvalue {min_eig:.3e}")


def _check_box_identity(ch: Channel, tol: float) -> CheckResult:
    box = boxes.box_from_channel(ch)
    err = float(np.max(np.abs(box.p - boxes.make_pr_box().p)))
    return CheckResult("box_identity", err <= tol, err)


def _check_chsh(ch: Channel, tol: float) -> CheckResult:
    value = boxes.chsh(boxes.box_from_channel(ch))
    return CheckResult("chsh_max", abs(value - 4) <= tol, value)


def _check_no_signaling(ch: Channel, tol: float) -> CheckResult:
    rep = boxes.is_no_signaling(boxes.box_from_channel(ch), tol)
    return CheckResult("no_signaling", rep.no_signaling, rep.max_violation)


def _check_local_bound(tol: float) -> CheckResult:
    best = max(boxes.chsh(boxes.deterministic_box(s)) for s in boxes.STRATEGIES)
    ok = (best == 2.0
          and boxes.local_membership(boxes.make_pr_box(), tol) is None
          and boxes.local_membership(boxes.uniform_box(), tol) is not None)
    return CheckResult("local_bound", ok, best)


def _check_channel_equation(ch: Channel, seed: int, n: int = 50) -> CheckResult:
    rng = np.random.default_rng(seed)
    cor, acor = channels.make_prepared_states()
    worst = 0.0
    for _ in range(n):
        rho = DensityOperator.random((2, 2), rng)
        kappa = rho.matrix[3, 3].real
        want = (1 - kappa) * cor.matrix + kappa * acor.matrix
        worst = max(worst, frobenius_distance(channels.apply(ch, rho.matrix), want))
    return CheckResult("channel_equation", worst < 1e-10, worst)


def _check_simulation(ch: Channel, seed: int, n: int = 50) -> CheckResult:
    rng = np.random.default_rng(seed)
    worst = 0.0
    for i in range(n):
        rho = DensityOperator.random((2, 2), rng)
        worst = max(worst, frobenius_distance(protocol.averaged_channel(rho).matrix,
                                              channels.apply(ch, rho.matrix)))
        protocol.run_once(rho, seed + i).check()
    return CheckResult("simulation_identity", worst < 1e-12, worst)


def _check_tsirelson(seed: int) -> CheckResult:
    res = quantum_bounds.seesaw_maximize(quantum_bounds.SeesawConfig(seed=seed))
    ok = abs(res.value - quantum_bounds.TSIRELSON) <= 1e-6
    return CheckResult("tsirelson", ok, res.value, f"target {quantum_bounds.TSIRELSON:.12g}")


def verify_all(seed: int = 1, tol: float = 1e-9,
               channel_factory: Callable[[], Channel] = channels.make_pr_channel) -> list[CheckResult]:
    """Run every check against the channel produced by ``channel_factory``.

    ``channel_factory`` exists so tests can inject a corrupted channel.
    """
    ch = channel_factory()
    checks: list[tuple[str, Callable[[], CheckResult]]] = [
        ("cptp", lambda: _check_cptp(ch, tol)),
        ("box_identity", lambda: _check_box_identity(ch, tol)),
        ("chsh_max", lambda: _check_chsh(ch, tol)),
        ("no_signaling", lambda: _check_no_signaling(ch, tol)),
        ("local_bound", lambda: _check_local_bound(tol)),
        ("channel_equation", lambda: _check_channel_equation(ch, seed)),
        ("simulation_identity", lambda: _check_simulation(ch, seed)),
        ("tsirelson", lambda: _check_tsirelson(seed)),
    ]
    results = []
    for name, run in checks:
        try:
            results.append(run())
        except Exception as exc:  # a crashing check counts as a failed check
            results.append(CheckResult(name, False, float("nan"), repr(exc)))
    return results
