"""Classical two-party simulation of the PR channel.

Alice and Bob share one uniform key bit ``k``. Each measures their qubit in
the computational basis (outcomes ``a``, ``b``). Alice outputs ``|k>`` and
sends ``a`` to Bob; Bob outputs ``|k xor (a and b)>``. One bit of shared
randomness plus one bit of communication per channel use.

Randomness comes from numpy's PCG64 generator seeded explicitly; the seed is
stored in every transcript.
"""

from __future__ import annotations

import json
from collections import deque
from dataclasses import asdict, dataclass, field
from enum import Enum
from typing import Iterator, TextIO

import numpy as np

from prbox.boxes import BIT_PAIRS, CorrelationBox
from prbox.channels import DensityOperator
from prbox.linalg import basis_projector


class Role(Enum):
    ALICE = "alice"
    BOB = "bob"


class ProtocolError(RuntimeError):
    """A party received an event out of protocol order."""


@dataclass(frozen=True)
class Message:
    sender: Role
    bit: int
    latency: float = 0.0


class Link:
    """In-process one-way message queue. Latency is recorded, never slept on."""

    def __init__(self, latency: float = 0.0):
        self.latency = latency
        self._queue: deque[Message] = deque()
        self.sent = 0

    def send(self, sender: Role, bit: int) -> None:
        self._queue.append(Message(sender, bit, self.latency))
        self.sent += 1

    def receive(self) -> Message:
        if not self._queue:
            raise ProtocolError("receive on an empty link")
        return self._queue.popleft()


@dataclass
class PartyState:
    role: Role
    key: int
    measured: int | None = None
    received: int | None = None
    output: int | None = None


class Alice:
    def __init__(self, key: int, link: Link):
        self.state = PartyState(Role.ALICE, key)
        self.link = link

    def on_measure(self, a: int) -> None:
        if self.state.measured is not None:
            raise ProtocolError("Alice already measured")
        self.state.measured = a
        self.link.send(Role.ALICE, a)
        self.state.output = self.state.key


class Bob:
    def __init__(self, key: int, link: Link):
        self.state = PartyState(Role.BOB, key)
        self.link = link

    def on_measure(self, b: int) -> None:
        if self.state.measured is not None:
            raise ProtocolError("Bob already measured")
        self.state.measured = b

    def on_message(self) -> None:
        if self.state.measured is None:
            raise ProtocolError("Bob must measure before acting on Alice's bit")
        msg = self.link.receive()
        self.state.received = msg.bit
        self.state.output = self.state.key ^ (msg.bit & self.state.measured)


@dataclass(frozen=True)
class ProtocolTranscript:
    seed: int | None
    key: int
    a: int
    b: int
    msg: int
    alice_out: int
    bob_out: int
    messages_sent: int = 1
    latency: float = 0.0

    def check(self) -> None:
        if self.alice_out != self.key:
            raise ProtocolError("alice_out != key")
        if self.bob_out != self.key ^ (self.a & self.b):
            raise ProtocolError("bob_out != key xor (a and b)")
        if self.messages_sent != 1 or self.msg != self.a:
            raise ProtocolError("exactly one message carrying a must be sent")

    def to_json(self) -> str:
        d = asdict(self)
        return json.dumps({k: d[k] for k in ("seed", "key", "a", "b", "msg", "alice_out", "bob_out")})


def outcome_distribution(rho: DensityOperator) -> np.ndarray:
    """Joint ``P(a, b) = <ab|rho|ab>`` in 00, 01, 10, 11 order."""
    if rho.dim != 4:
        raise ValueError("the protocol acts on two-qubit inputs")
    p = np.clip(np.diag(rho.matrix).real, 0, None)
    return p / p.sum()


def _execute(key: int, a: int, b: int, seed: int | None, latency: float = 0.0) -> ProtocolTranscript:
    link = Link(latency)
    alice, bob = Alice(key, link), Bob(key, link)
    alice.on_measure(a)
    bob.on_measure(b)
    bob.on_message()
    return ProtocolTranscript(seed, key, a, b, alice.state.measured, alice.state.output,
                              bob.state.output, link.sent, latency)


def _draw(probs: np.ndarray, rng: np.random.Generator) -> tuple[int, int, int]:
    ab = int(rng.choice(4, p=probs))
    key = int(rng.integers(2))
    return key, ab >> 1, ab & 1


def run_once(rho: DensityOperator, seed: int, latency: float = 0.0) -> ProtocolTranscript:
    """One channel use on input ``rho`` with a fresh generator seeded by ``seed``."""
    rng = np.random.default_rng(seed)
    key, a, b = _draw(outcome_distribution(rho), rng)
    return _execute(key, a, b, seed, latency)


def run_many(rho: DensityOperator, n_runs: int, seed: int) -> Iterator[ProtocolTranscript]:
    """``n_runs`` uses from a single seeded stream; every transcript carries ``seed``."""
    rng = np.random.default_rng(seed)
    probs = outcome_distribution(rho)
    for _ in range(n_runs):
        yield _execute(*_draw(probs, rng), seed)


def averaged_channel(rho: DensityOperator) -> DensityOperator:
    """Exact output state averaged over measurement outcomes and the key."""
    probs = outcome_distribution(rho)
    out = np.zeros((4, 4), dtype=complex)
    for (a, b), w in zip(BIT_PAIRS, probs):
        for key in (0, 1):
            t = _execute(key, a, b, None)
            out += 0.5 * w * basis_projector([t.alice_out, t.bob_out])
    return DensityOperator(out, (2, 2))


@dataclass
class MonteCarloBox:
    """Tallies of the simulated CHSH experiment.

    ``p`` holds NaN for setting pairs that were never drawn; such cells are
    unobserved, not zero.
    """

    counts: np.ndarray  # [x, y, X, Y]
    trials: np.ndarray  # [X, Y]
    seed: int
    transcripts: list[ProtocolTranscript] = field(default_factory=list, repr=False)

    @property
    def p(self) -> np.ndarray:
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.trials > 0, self.counts / self.trials, np.nan)

    @property
    def stderr(self) -> np.ndarray:
        p = self.p
        with np.errstate(invalid="ignore", divide="ignore"):
            return np.where(self.trials > 0, np.sqrt(p * (1 - p) / self.trials), np.nan)

    @property
    def observed(self) -> np.ndarray:
        return self.trials > 0

    def box(self) -> CorrelationBox:
        if not self.observed.all():
            raise ValueError("some setting pairs have no trials; the box is incomplete")
        return CorrelationBox(self.p, tol=1e-9)

    def merge(self, other: "MonteCarloBox") -> "MonteCarloBox":
        return MonteCarloBox(self.counts + other.counts, self.trials + other.trials, self.seed,
                             self.transcripts + other.transcripts)


def _simulate_batch(n_runs: int, seed, keep_transcripts: bool, label: int) -> MonteCarloBox:
    rng = np.random.default_rng(seed)
    counts = np.zeros((2, 2, 2, 2), dtype=np.int64)
    trials = np.zeros((2, 2), dtype=np.int64)
    transcripts = []
    settings = rng.integers(2, size=(n_runs, 2))
    keys = rng.integers(2, size=n_runs)
    for (X, Y), key in zip(settings, keys):
        X, Y = int(X), int(Y)
        # input |X> (x) |Y> is a basis state, so sigma_z outcomes are a=X, b=Y
        t = _execute(int(key), X, Y, label)
        counts[t.alice_out, t.bob_out, X, Y] += 1
        trials[X, Y] += 1
        if keep_transcripts:
            transcripts.append(t)
    return MonteCarloBox(counts, trials, label, transcripts)


def monte_carlo_box(n_runs: int, seed: int, batches: int = 1,
                    keep_transcripts: bool = False) -> MonteCarloBox:
    """Simulate ``n_runs`` CHSH trials with uniformly random settings.

    Trials are split into ``batches`` with seeds spawned from ``seed``; the
    tallies merge additively, so the result depends on (n_runs, seed, batches).
    """
    if n_runs < 1:
        raise ValueError("n_runs must be at least 1")
    sizes = [n_runs // batches + (i < n_runs % batches) for i in range(batches)]
    children = np.random.SeedSequence(seed).spawn(batches)
    result = None
    for size, child in zip(sizes, children):
        part = _simulate_batch(size, child, keep_transcripts, seed)
        result = part if result is None else result.merge(part)
    return result


def write_transcripts(transcripts, fh: TextIO) -> None:
    for t in transcripts:
        fh.write(t.to_json() + "\n")


def read_transcripts(fh: TextIO) -> list[ProtocolTranscript]:
    out = []
    for line in fh:
        if line.strip():
            d = json.loads(line)
            out.append(ProtocolTranscript(d["seed"], d["key"], d["a"], d["b"], d["msg"],
                                          d["alice_out"], d["bob_out"]))
    return out
