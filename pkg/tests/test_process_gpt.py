import numpy as np
import pytest

from prbox.channels import Channel, DensityOperator, random_channel, to_choi
from prbox.linalg import DimensionError, ValidationError, basis_projector
from prbox.process_gpt import (
    Effect,
    evaluate,
    induced_state,
    make_process_effect,
    make_state_induction,
)


def random_effect(d, rng):
    g = rng.standard_normal((d, d)) + 1j * rng.standard_normal((d, d))
    h = g @ g.conj().T
    return Effect(h / np.linalg.eigvalsh(h)[-1] * rng.uniform(0.2, 1.0))


def direct_probability(ch, rho, e, in_dim):
    """Prepare rho on H_in (x) H_anc, apply ch (x) id, measure e."""
    anc = rho.dim // in_dim
    out = sum(np.kron(k, np.eye(anc)) @ rho.matrix @ np.kron(k, np.eye(anc)).conj().T for k in ch.kraus)
    return np.trace(e.matrix @ out).real


def test_state_induction_identity_pure_qubit():
    rho = DensityOperator.basis([0])
    r = make_state_induction(rho)
    assert r.anc_dim == 1
    assert np.max(np.abs(induced_state(r) - rho.matrix)) < 1e-12


def test_state_induction_maximally_mixed_qubit():
    rho = DensityOperator.maximally_mixed((2,))
    r = make_state_induction(rho)
    assert np.max(np.abs(induced_state(r) - rho.matrix)) < 1e-12
    # no ancilla: R maps X -> tr(X)/2
    x = np.array([[1, 2j], [3, 4]])
    assert np.isclose(r(x)[0, 0], np.trace(x) / 2)


def test_state_induction_with_ancilla_maximally_mixed():
    rho = DensityOperator.maximally_mixed((2, 2))
    r = make_state_induction(rho, in_dim=2)
    assert r.anc_dim == 2
    assert np.max(np.abs(induced_state(r) - rho.matrix)) < 1e-12
    # for I/4 on H_in (x) H_anc, R(|j><k|) = delta_jk I/4
    assert np.allclose(r(np.eye(2)), np.eye(2) / 2)
    assert np.allclose(r(np.array([[0, 1], [0, 0]])), 0)


def test_state_induction_of_max_entangled_is_half_identity(rng):
    v = np.eye(2).reshape(4)
    rho = DensityOperator(np.outer(v, v) / 2, (2, 2))
    r = make_state_induction(rho, in_dim=2)
    x = rng.standard_normal((2, 2)) + 1j * rng.standard_normal((2, 2))
    assert np.allclose(r(x), x / 2)


def test_state_induction_random_with_ancilla(rng):
    for in_dim, anc in [(2, 2), (2, 1), (4, 1), (2, 3), (3, 2)]:
        rho = DensityOperator.random((in_dim, anc), rng)
        r = make_state_induction(rho, in_dim=in_dim)
        assert np.max(np.abs(induced_state(r) - rho.matrix)) < 1e-12


def test_state_induction_product_input(rng):
    rho = DensityOperator.basis([0]) @ DensityOperator.maximally_mixed((2,))
    r = make_state_induction(rho, in_dim=2)
    assert np.max(np.abs(induced_state(r) - rho.matrix)) < 1e-12


def test_state_induction_bad_dims():
    with pytest.raises(DimensionError):
        make_state_induction(DensityOperator.maximally_mixed((2, 2)), in_dim=3)


def test_identity_effect_gives_one(rng):
    rho = DensityOperator.random((2,), rng)
    f = make_process_effect(rho, Effect(np.eye(3)))
    for _ in range(10):
        assert np.isclose(evaluate(f, to_choi(random_channel(2, 3, rng))), 1.0, atol=1e-12)


def test_zero_effect_gives_zero(rng):
    rho = DensityOperator.random((2,), rng)
    f = make_process_effect(rho, Effect(np.zeros((2, 2))))
    assert evaluate(f, to_choi(random_channel(2, 2, rng))) == 0


def test_identity_channel_basis_state():
    f = make_process_effect(DensityOperator.basis([0]), Effect(basis_projector([0])))
    assert np.isclose(evaluate(f, to_choi(Channel.identity(2))), 1.0)


def test_pr_channel_process_effects(pr_channel):
    choi = to_choi(pr_channel)
    e01 = Effect(basis_projector([0, 1]))
    f11 = make_process_effect(DensityOperator.basis([1, 1]), e01)
    f00 = make_process_effect(DensityOperator.basis([0, 0]), e01)
    assert abs(evaluate(f11, choi) - 0.5) < 1e-12
    assert abs(evaluate(f00, choi)) < 1e-12


def test_process_effect_is_psd(rng):
    for in_dim, anc in [(2, 1), (2, 2), (4, 1)]:
        rho = DensityOperator.random((in_dim, anc), rng)
        e = random_effect(2 * anc, rng)
        f = make_process_effect(rho, e, dout=2, in_dim=in_dim)
        w = np.linalg.eigvalsh(f.matrix)
        assert w[0] > -1e-10
        assert np.allclose(f.matrix, f.matrix.conj().T)


@pytest.mark.parametrize("in_dim,anc,dout", [(2, 1, 2), (4, 1, 4), (2, 2, 2), (2, 1, 3), (3, 2, 2)])
def test_contract_matches_direct_experiment(rng, in_dim, anc, dout):
    for _ in range(100 if (in_dim, anc, dout) == (4, 1, 4) else 25):
        rho = DensityOperator.random((in_dim, anc), rng)
        e = random_effect(dout * anc, rng)
        ch = random_channel(in_dim, dout, rng, n_kraus=int(rng.integers(-(-in_dim // dout), in_dim * dout + 1)))
        f = make_process_effect(rho, e, dout=dout, in_dim=in_dim)
        p = evaluate(f, to_choi(ch))
        assert abs(p - direct_probability(ch, rho, e, in_dim)) < 1e-9
        assert -1e-10 <= p <= 1 + 1e-10


def test_evaluate_is_affine(rng):
    rho = DensityOperator.random((2,), rng)
    f = make_process_effect(rho, random_effect(2, rng))
    for _ in range(20):
        c1, c2 = to_choi(random_channel(2, 2, rng)), to_choi(random_channel(2, 2, rng))
        lam = rng.uniform()
        mix = type(c1)(lam * c1.matrix + (1 - lam) * c2.matrix, din=2, dout=2)
        assert abs(evaluate(f, mix) - (lam * evaluate(f, c1) + (1 - lam) * evaluate(f, c2))) < 1e-12


def test_rank_deficient_state_still_satisfies_contract(rng):
    # pure input with an ancilla: rank one
    psi = rng.standard_normal(4) + 1j * rng.standard_normal(4)
    psi /= np.linalg.norm(psi)
    rho = DensityOperator(np.outer(psi, psi.conj()), (2, 2))
    e = random_effect(4, rng)
    ch = random_channel(2, 2, rng)
    f = make_process_effect(rho, e, in_dim=2)
    assert abs(evaluate(f, to_choi(ch)) - direct_probability(ch, rho, e, 2)) < 1e-9


def test_effect_validation():
    with pytest.raises(ValidationError):
        Effect(np.diag([1.2, 0]))
    with pytest.raises(ValidationError):
        Effect(np.diag([-0.1, 0.5]))
    with pytest.raises(ValidationError):
        Effect(np.array([[0, 1], [0, 0]]))


def test_dimension_mismatch(rng, pr_channel):
    f = make_process_effect(DensityOperator.basis([0]), Effect(basis_projector([0])))
    with pytest.raises(DimensionError):
        evaluate(f, to_choi(pr_channel))
    with pytest.raises(DimensionError):
        make_process_effect(DensityOperator.random((2, 2), rng), Effect(np.eye(3)), in_dim=2)
