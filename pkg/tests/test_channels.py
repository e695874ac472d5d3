import json

import numpy as np
import pytest

from prbox.channels import (
    Channel,
    ChoiOperator,
    DensityOperator,
    apply,
    channel_from_json,
    channel_to_json,
    choi_from_json,
    choi_to_json,
    from_choi,
    max_entangled_reference,
    measure_and_prepare,
    random_channel,
    to_choi,
    tp_error,
)
from prbox.linalg import DimensionError, ValidationError, frobenius_distance, partial_trace
from conftest import I2, SX, SZ

SY = np.array([[0, -1j], [1j, 0]])


def choi_oracle(ch):
    """(E (x) id)[omega_+] / din assembled block by block from E(|j><k|)."""
    d = ch.din
    out = np.zeros((ch.dout * d, ch.dout * d), dtype=complex)
    for j in range(d):
        for k in range(d):
            ejk = np.zeros((d, d), dtype=complex)
            ejk[j, k] = 1
            out += np.kron(apply(ch, ejk), ejk)
    return out / d


def depolarizing():
    return Channel.from_kraus([I2 / 2, SX / 2, SY / 2, SZ / 2])


def test_identity_channel_is_noop(rng):
    rho = DensityOperator.random((2, 2), rng)
    assert np.allclose(apply(Channel.identity(4), rho).matrix, rho.matrix)


def test_pr_channel_on_basis_states(pr_channel, xi):
    cor, acor = xi
    for bits in ([0, 0], [0, 1], [1, 0]):
        assert np.allclose(apply(pr_channel, DensityOperator.basis(bits)).matrix, cor.matrix, atol=1e-15)
    assert np.allclose(apply(pr_channel, DensityOperator.basis([1, 1])).matrix, acor.matrix, atol=1e-15)


def test_pr_channel_on_maximally_mixed(pr_channel, xi):
    out = apply(pr_channel, DensityOperator.maximally_mixed((2, 2))).matrix
    assert np.allclose(out, 0.75 * xi[0].matrix + 0.25 * xi[1].matrix, atol=1e-15)


def test_pr_channel_ignores_off_diagonal(pr_channel, xi):
    # |psi> with <11|psi> = 0 but coherences between 00, 01, 10
    psi = np.array([1, 1j, -1, 0]) / np.sqrt(3)
    out = apply(pr_channel, DensityOperator(np.outer(psi, psi.conj()), (2, 2))).matrix
    assert np.allclose(out, xi[0].matrix, atol=1e-15)


def test_pr_channel_kraus_structure(pr_channel):
    # 4 outcome pairs x 2 support vectors per prepared state
    assert len(pr_channel.kraus) == 8
    for k in pr_channel.kraus:
        nz = np.argwhere(np.abs(k) > 0)
        assert len(nz) == 1
        assert np.isclose(abs(k[tuple(nz[0])]), np.sqrt(0.5))
    assert tp_error(pr_channel.kraus, 4) < 1e-15


def test_prepared_states(xi):
    cor, acor = xi
    assert cor.matrix[0, 0] == 0.5
    assert cor.matrix[1, 1] == 0
    assert np.allclose(cor.matrix + acor.matrix, np.eye(4) / 2)
    for s in xi:
        assert np.allclose(s.matrix, np.diag(np.diag(s.matrix)))


def test_channel_equation_random(pr_channel, xi, rng):
    cor, acor = xi
    for _ in range(50):
        rho = DensityOperator.random((2, 2), rng)
        kappa = rho.matrix[3, 3].real
        want = (1 - kappa) * cor.matrix + kappa * acor.matrix
        assert frobenius_distance(apply(pr_channel, rho).matrix, want) < 1e-10


def test_choi_identity_channel():
    c = to_choi(Channel.identity(2))
    assert np.allclose(c.matrix, max_entangled_reference(2) / 2)


def test_choi_depolarizing():
    assert np.allclose(to_choi(depolarizing()).matrix, np.eye(4) / 4)


def test_choi_matches_oracle(pr_channel, rng):
    for ch in [pr_channel, depolarizing(), random_channel(2, 3, rng), random_channel(3, 2, rng, n_kraus=2)]:
        assert np.allclose(to_choi(ch).matrix, choi_oracle(ch), atol=1e-14)


def test_pr_choi_invariants(pr_channel):
    c = to_choi(pr_channel)
    assert c.matrix.shape == (16, 16)
    c.validate()
    assert np.allclose(partial_trace(c.matrix, [4, 4], keep=[1]), np.eye(4) / 4, atol=1e-12)


def test_from_choi_identity_roundtrip(rng):
    ch = from_choi(ChoiOperator(max_entangled_reference(2) / 2, din=2, dout=2))
    assert len(ch.kraus) == 1
    rho = DensityOperator.random((2,), rng)
    assert np.allclose(apply(ch, rho).matrix, rho.matrix)


def test_from_choi_depolarizing(rng):
    ch = from_choi(ChoiOperator(np.eye(4) / 4, din=2, dout=2))
    for _ in range(10):
        assert np.allclose(apply(ch, DensityOperator.random((2,), rng)).matrix, I2 / 2)


@pytest.mark.parametrize("din,dout", [(2, 2), (4, 4), (2, 3), (3, 2)])
def test_choi_kraus_roundtrip(rng, din, dout):
    for _ in range(20):
        ch = random_channel(din, dout, rng)
        c = to_choi(ch)
        back = from_choi(c)
        assert frobenius_distance(to_choi(back).matrix, c.matrix) < 1e-9
        rho = DensityOperator.random((din,), rng)
        assert frobenius_distance(apply(back, rho).matrix, apply(ch, rho).matrix) < 1e-9


def test_from_choi_rejects_invalid():
    bad = np.eye(4) / 4
    bad[0, 0] += 0.1
    bad[3, 3] -= 0.1  # still trace 1, breaks tr_out = I/2
    with pytest.raises(ValidationError):
        from_choi(ChoiOperator(bad, din=2, dout=2))
    with pytest.raises(ValidationError):
        from_choi(ChoiOperator(np.diag([0.5, 0.5, 0.5, -0.5]), din=2, dout=2))


def test_channel_rejects_non_tp():
    with pytest.raises(ValidationError):
        Channel.from_kraus([np.eye(2) * 0.9])


def test_apply_dimension_mismatch(pr_channel):
    with pytest.raises(DimensionError):
        apply(pr_channel, DensityOperator.basis([0]))


def test_density_operator_validation():
    with pytest.raises(ValidationError):
        DensityOperator(np.diag([0.5, 0.6]))
    with pytest.raises(ValidationError):
        DensityOperator(np.diag([1.5, -0.5]))
    with pytest.raises(DimensionError):
        DensityOperator(np.eye(4) / 4, dims=(2, 3))


def test_measure_and_prepare_requires_diagonal():
    plus = np.full((4, 4), 0.25)
    with pytest.raises(ValidationError):
        measure_and_prepare([DensityOperator(plus)] * 4)


def test_channel_json_roundtrip(pr_channel, rng):
    for ch in [pr_channel, random_channel(2, 3, rng)]:
        back = channel_from_json(channel_to_json(ch))
        assert (back.din, back.dout) == (ch.din, ch.dout)
        assert max(np.max(np.abs(a - b)) for a, b in zip(back.kraus, ch.kraus)) < 1e-12


def test_choi_json_roundtrip(pr_channel):
    c = to_choi(pr_channel)
    back = choi_from_json(choi_to_json(c))
    assert np.max(np.abs(back.matrix - c.matrix)) < 1e-12
    # bare {"choi": ...} form infers a square channel
    bare = choi_from_json(json.dumps({"choi": json.loads(choi_to_json(c))["choi"]}))
    assert (bare.din, bare.dout) == (4, 4)


def test_values_are_immutable(pr_channel):
    with pytest.raises(ValueError):
        pr_channel.kraus[0][0, 0] = 1
    rho = DensityOperator.basis([0])
    with pytest.raises(ValueError):
        rho.matrix[0, 0] = 0
