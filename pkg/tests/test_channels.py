import json

import numpy as np
import pytest

from qcc import reference
from qcc.channels import (
    Channel,
    MeasurePrepare,
    Povm,
    SingularMapError,
    apply,
    apply_array,
    apply_adjoint_array,
    channel_from_json,
    channel_marginal,
    channel_to_json,
    compose,
    constant_channel,
    dephasing_channel,
    depolarizing_channel,
    identity_channel,
    invert_map,
    measure_prepare_channel,
    measure_prepare_decomposition,
    measurement_channel,
    partial_depolarizing_channel,
    pinching_channel,
    standard_channel,
    tensor,
    unitary_channel,
    validate,
    xi_channel,
)
from qcc.linalg import HermitianMatrix, ptrace_array
from qcc.rand import haar_unitary, random_channel, random_density, random_mp_channel, random_pvm

from conftest import random_hermitian

E00 = np.diag([1.0, 0.0])
E11 = np.diag([0.0, 1.0])
J_ID = np.array([[1, 0, 0, 1], [0, 0, 0, 0], [0, 0, 0, 0], [1, 0, 0, 1]], dtype=float)


class TestConstructors:
    def test_identity_choi(self):
        assert np.array_equal(identity_channel(2).choi.array, J_ID)

    def test_depolarizing_choi(self):
        assert np.array_equal(depolarizing_channel(2).choi.array, np.eye(4) / 2)

    def test_dephasing_choi(self):
        assert np.array_equal(dephasing_channel(2).choi.array, np.diag([1.0, 0, 0, 1.0]))

    def test_xi_linear_combination_oracle(self):
        out = xi_channel(0.0, 1.0 / 3.0).choi.array
        assert np.abs(out - ((2 / 3) * J_ID + np.eye(4) / 6)).max() < 1e-15

    def test_xi_rejects_out_of_range(self):
        with pytest.raises(ValueError):
            xi_channel(0.7, 0.7)

    def test_unitary_action(self, rng):
        u = haar_unitary(rng, 3)
        c = unitary_channel(u)
        x = random_hermitian(rng, 3)
        assert np.abs(apply_array(c.rep, x) - u @ x @ u.conj().T).max() < 1e-12

    def test_unitary_rejects_non_unitary(self):
        with pytest.raises(ValueError, match="unitary"):
            unitary_channel(np.diag([1.0, 2.0]))

    def test_constant_channel(self, rng):
        rho = random_density(rng, 2)
        c = constant_channel(rho, 3)
        x = random_hermitian(rng, 3)
        assert np.abs(apply_array(c.rep, x) - np.trace(x) * rho).max() < 1e-12

    def test_pinching_action(self, rng):
        pvm = random_pvm(rng, 3, ranks=(2, 1))
        c = pinching_channel(pvm)
        x = random_hermitian(rng, 3)
        expected = sum(p @ x @ p for p in pvm.effects)
        assert np.abs(apply_array(c.rep, x) - expected).max() < 1e-12

    def test_pinching_rejects_non_projective(self, rng):
        povm = Povm((np.eye(2) * 0.5, np.eye(2) * 0.5))
        with pytest.raises(ValueError, match="projection"):
            pinching_channel(povm)

    def test_measurement_channel_probabilities(self, rng):
        povm = Povm((np.diag([0.7, 0.2]), np.diag([0.3, 0.8])))
        c = measurement_channel(povm)
        rho = random_density(rng, 2)
        out = apply_array(c.rep, rho)
        probs = [np.trace(m @ rho) for m in povm.effects]
        assert np.abs(out - np.diag(probs)).max() < 1e-12

    def test_dispatcher_and_unknown_kind(self):
        c = standard_channel("partial_depolarizing", 2, q=0.5)
        assert np.abs(c.choi.array - partial_depolarizing_channel(0.5, 2).choi.array).max() == 0
        with pytest.raises(ValueError, match="unknown"):
            standard_channel("teleport", 2)


class TestMeasurePrepare:
    def test_reproduces_dephasing(self):
        mp = MeasurePrepare(Povm((E00, E11)), (E00, E11))
        assert np.array_equal(measure_prepare_channel(mp).choi.array, np.diag([1.0, 0, 0, 1.0]))

    def test_coarse_graining_gives_constant(self, rng):
        rho = random_density(rng, 2)
        mp = MeasurePrepare(Povm((np.eye(2) / 2, np.eye(2) / 2)), (rho, rho))
        c = measure_prepare_channel(mp)
        assert np.abs(c.choi.array - np.kron(np.eye(2), rho)).max() < 1e-12

    def test_decomposition_reproduces_reference_pair(self):
        for c in reference.channel_pair():
            mp = measure_prepare_decomposition(c.rep)
            back = measure_prepare_channel(mp)
            assert np.abs(back.choi.array - c.choi.array).max() < 1e-12

    def test_decomposition_roundtrip_random(self, rng):
        for _ in range(20):
            mp = random_mp_channel(rng, 2, 2, 3)
            c = measure_prepare_channel(mp)
            back = measure_prepare_channel(measure_prepare_decomposition(c.rep))
            assert np.abs(back.choi.array - c.choi.array).max() < 1e-10

    def test_decomposition_rejects_entangled(self):
        with pytest.raises(ValueError, match="PPT|entangled"):
            measure_prepare_decomposition(identity_channel(2).rep)

    def test_mp_channels_are_entanglement_breaking(self, rng):
        for _ in range(30):
            mp = random_mp_channel(rng, 2, 2, 4)
            c = measure_prepare_channel(mp)
            assert validate(c.rep).eb_2x2


class TestApplyValidate:
    def test_identity_apply(self, rng):
        x = HermitianMatrix(random_hermitian(rng, 2))
        out = apply(identity_channel(2).rep, x)
        assert np.abs(out.array - x.array).max() < 1e-14

    def test_depolarizing_on_basis_state(self):
        out = apply_array(depolarizing_channel(2).rep, E00)
        assert np.allclose(out, np.eye(2) / 2)

    def test_dephasing_formula_oracle(self):
        x = np.array([[0.3, 0.2 + 0.4j], [0.2 - 0.4j, 0.7]])
        out = apply_array(dephasing_channel(2).rep, x)
        assert np.abs(out - np.diag([0.3, 0.7])).max() < 1e-14

    def test_validate_reference_channel(self):
        _, g = reference.channel_pair()
        rep = validate(g.rep)
        assert rep.cp and rep.tp and rep.eb_2x2

    def test_validate_identity(self):
        rep = validate(identity_channel(2).rep)
        assert rep.cp and rep.tp and rep.unital

    def test_identity_dephasing_product_not_cp(self):
        from qcc.jordan import jordan_channel

        prod = jordan_channel(identity_channel(2).rep, dephasing_channel(2).rep)
        assert not validate(prod).cp

    def test_apply_trace_preserving(self, rng):
        for _ in range(50):
            c = random_channel(rng, 2, 3)
            x = random_hermitian(rng, 2)
            out = apply_array(c.rep, x)
            assert abs(np.trace(out) - np.trace(x)) < 1e-10

    def test_random_stinespring_channels_validate(self, rng):
        # spec invariant at 1000 instances
        for _ in range(1000):
            c = random_channel(rng, 2)
            rep = validate(c.rep)
            assert rep.cp and rep.tp


class TestComposeTensorMarginal:
    def test_compose_identity(self, rng):
        f = random_channel(rng, 2, 3)
        out = compose(identity_channel(3).rep, f.rep)
        assert np.abs(out.choi.array - f.choi.array).max() < 1e-12

    def test_compose_action_oracle(self, rng):
        f = random_channel(rng, 2, 3)
        g = random_channel(rng, 3, 2)
        comp = compose(g.rep, f.rep)
        for _ in range(10):
            x = random_hermitian(rng, 2)
            lhs = apply_array(comp, x)
            rhs = apply_array(g.rep, apply_array(f.rep, x))
            assert np.abs(lhs - rhs).max() < 1e-12

    def test_tensor_action_oracle(self, rng):
        d = dephasing_channel(2).rep
        t = tensor(d, d)
        x = random_hermitian(rng, 2)
        y = random_hermitian(rng, 2)
        lhs = apply_array(t, np.kron(x, y))
        rhs = np.kron(apply_array(d, x), apply_array(d, y))
        assert np.abs(lhs - rhs).max() < 1e-12

    def test_marginal_reference(self):
        f, g = reference.channel_pair()
        comp = reference.compatibilizer()
        assert np.abs(channel_marginal(comp, 1).choi.array - f.choi.array).max() == 0
        assert np.abs(channel_marginal(comp, 2).choi.array - g.choi.array).max() == 0

    def test_marginals_of_random_channel_are_channels(self, rng):
        for _ in range(20):
            big = random_channel(rng, 2, 4)
            c = Channel.from_choi(big.choi.array, 2, (2, 2))
            channel_marginal(c, 1)
            channel_marginal(c, 2)

    def test_adjoint_pairing(self, rng):
        f = random_channel(rng, 2, 3)
        x = random_hermitian(rng, 2)
        y = random_hermitian(rng, 3)
        lhs = np.tensordot(y.conj(), apply_array(f.rep, x), axes=2)
        rhs = np.tensordot(apply_adjoint_array(f.rep, y).conj(), x, axes=2)
        assert abs(lhs - rhs) < 1e-12


class TestInvertMap:
    def test_partial_depolarizing_inverse_formula(self):
        q = 0.5
        inv = invert_map(partial_depolarizing_channel(q, 2).rep)
        expected = (J_ID - q * np.eye(4) / 2) / (1 - q)
        assert np.abs(inv.choi.array - expected).max() < 1e-12

    def test_xi_inverse_formula(self):
        from qcc.analytic import XiParams, xi_inverse

        inv = invert_map(xi_channel(0.25, 0.25).rep)
        closed = xi_inverse(XiParams(0.25, 0.25))
        assert np.abs(inv.choi.array - closed.choi.array).max() < 1e-12

    def test_dephasing_is_singular(self):
        with pytest.raises(SingularMapError) as err:
            invert_map(dephasing_channel(2).rep)
        assert err.value.smallest_sv < 1e-14

    def test_roundtrip_and_involution(self, rng):
        count = 0
        while count < 20:
            f = random_channel(rng, 2)
            try:
                inv = invert_map(f.rep)
            except SingularMapError:
                continue
            count += 1
            roundtrip = compose(inv, f.rep)
            assert np.abs(roundtrip.choi.array - J_ID).max() < 1e-8
            again = invert_map(inv)
            assert np.abs(again.choi.array - f.choi.array).max() < 1e-7

    def test_inverse_of_tp_map_is_tp(self, rng):
        f = random_channel(rng, 2)
        inv = invert_map(f.rep)
        marg = ptrace_array(inv.choi.array, (2, 2), [1])
        assert np.abs(marg - np.eye(2)).max() < 1e-10


class TestChannelJson:
    def test_roundtrip(self, rng):
        c = random_channel(rng, 2, 3)
        data = json.loads(json.dumps(channel_to_json(c)))
        back = channel_from_json(data)
        assert np.abs(back.choi.array - c.choi.array).max() < 1e-15

    def test_output_factors_preserved(self):
        comp = reference.compatibilizer()
        back = channel_from_json(channel_to_json(comp))
        assert back.rep.output_factors == (2, 2)

    def test_rejects_non_hermitian_payload(self):
        data = channel_to_json(identity_channel(2))
        data["choi"][0][1] = [0.5, 0.0]
        with pytest.raises(ValueError, match="Hermitian"):
            channel_from_json(data)
