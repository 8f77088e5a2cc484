import numpy as np
import pytest
from hypothesis import given, settings

from vvpairs.metrics import (
    classify,
    concurrence,
    concurrence_distribution,
    conditional_state,
    default_projector_file,
    fidelity,
    format_projector_file,
    intersystem_concurrence,
    load_projectors,
    projector_set,
    purity,
    read_projector_file,
    werner_p_from_concurrence,
)
from vvpairs.optics import bell_logical, bell_vv, pi_mode, vv_state, werner_vv
from vvpairs.qcore import DensityMatrix, PureState, order_basis

from conftest import ORDER_PAIRS, as_density, pair_basis, random_density, random_unitary, seeds


def werner_logical(p):
    b = bell_logical("psi-")
    return p * np.outer(b, b.conj()) + (1 - p) * np.eye(4) / 4


def bell_diagonal_concurrence(weights):
    # closed form for Bell-diagonal two-qubit states
    return max(0.0, 2 * max(weights) - 1)


class TestConcurrence:
    def test_singlet(self):
        assert concurrence(werner_logical(1.0)).value == pytest.approx(1.0, abs=1e-12)

    def test_product(self):
        assert concurrence(np.diag([0, 1, 0, 0])).value == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("p", [0.0, 1 / 3, 0.5, 0.966, 1.0])
    def test_werner(self, p):
        weights = [p + (1 - p) / 4] + [(1 - p) / 4] * 3
        expected = bell_diagonal_concurrence(weights)
        assert expected == pytest.approx(max(0.0, (3 * p - 1) / 2), abs=1e-15)
        assert concurrence(werner_logical(p)).value == pytest.approx(expected, abs=1e-10)

    def test_single_photon_split(self):
        # radial mode is maximally entangled between polarization and OAM
        assert concurrence(vv_state(5).density()).value == pytest.approx(1.0, abs=1e-12)
        ket = PureState.ket(order_basis(5), ("L", 5))
        assert concurrence(ket.density()).value == pytest.approx(0.0, abs=1e-12)

    def test_rejects_unsplit_basis(self):
        with pytest.raises(ValueError):
            concurrence(bell_vv(1, 1).density())

    def test_rejects_unphysical(self):
        with pytest.raises(ValueError):
            concurrence(np.diag([1.2, -0.2, 0, 0]))

    def test_lambdas_reported(self):
        rep = concurrence(werner_logical(1.0))
        np.testing.assert_allclose(rep.wootters_lambdas, [1, 0, 0, 0], atol=1e-7)

    def test_local_unitary_invariance(self):
        rng = np.random.default_rng(500)
        worst = 0.0
        for _ in range(500):
            rho = random_density(rng, 4, rank=int(rng.integers(1, 5)))
            u = np.kron(random_unitary(rng, 2), random_unitary(rng, 2))
            c0 = concurrence(rho).value
            c1 = concurrence(u @ rho @ u.conj().T).value
            worst = max(worst, abs(c0 - c1))
        assert worst < 1e-8

    @settings(max_examples=100, deadline=None)
    @given(seeds)
    def test_pure_state_determinant(self, seed):
        rng = np.random.default_rng(seed)
        v = rng.normal(size=4) + 1j * rng.normal(size=4)
        v /= np.linalg.norm(v)
        oracle = 2 * abs(np.linalg.det(v.reshape(2, 2)))
        assert concurrence(np.outer(v, v.conj())).value == pytest.approx(oracle, abs=1e-9)

    @settings(max_examples=100, deadline=None)
    @given(seeds)
    def test_range(self, seed):
        rho = random_density(np.random.default_rng(seed), 4)
        assert 0.0 <= concurrence(rho).value <= 1.0


class TestFidelity:
    def test_self(self, rng):
        rho = random_density(rng, 16)
        assert fidelity(rho, rho) == pytest.approx(1.0, abs=1e-9)

    def test_orthogonal(self):
        assert fidelity(np.diag([1, 0]), np.diag([0, 1])) == pytest.approx(0.0, abs=1e-12)

    @pytest.mark.parametrize("d", [2, 4, 16])
    def test_pure_vs_mixed(self, d, rng):
        v = rng.normal(size=d) + 1j * rng.normal(size=d)
        v /= np.linalg.norm(v)
        sigma = np.eye(d) / d
        oracle = np.sqrt(np.vdot(v, sigma @ v).real)
        assert oracle == pytest.approx(1 / np.sqrt(d))
        assert fidelity(np.outer(v, v.conj()), sigma) == pytest.approx(oracle, abs=1e-9)

    @settings(max_examples=50, deadline=None)
    @given(seeds)
    def test_symmetric_and_bounded(self, seed):
        rng = np.random.default_rng(seed)
        a, b = random_density(rng, 4), random_density(rng, 4)
        f = fidelity(a, b)
        assert 0.0 <= f <= 1.0
        assert f == pytest.approx(fidelity(b, a), abs=1e-8)

    def test_one_only_for_equal_states(self, rng):
        for _ in range(50):
            a, b = random_density(rng, 4), random_density(rng, 4)
            if np.linalg.norm(a - b) > 1e-6:
                assert fidelity(a, b) < 1 - 1e-12

    def test_shape_mismatch(self):
        with pytest.raises(ValueError):
            fidelity(np.eye(2) / 2, np.eye(4) / 4)


class TestPurity:
    def test_pure(self):
        assert purity(bell_vv(1, 5).density()) == pytest.approx(1.0)

    def test_mixed(self):
        assert purity(np.eye(4) / 4) == pytest.approx(0.25)

    @pytest.mark.parametrize("p", [0.0, 0.4, 0.966])
    def test_werner(self, p):
        # Bell-basis weights give Tr rho^2 directly
        weights = np.array([p + (1 - p) / 4] + [(1 - p) / 4] * 3)
        assert purity(werner_logical(p)) == pytest.approx(np.sum(weights ** 2), abs=1e-14)
        assert purity(werner_logical(p)) == pytest.approx((1 + 3 * p ** 2) / 4, abs=1e-14)


class TestConditionalState:
    def test_radial_projection(self):
        cond, prob = conditional_state(bell_vv(1, 1).density(), 2, vv_state(1))
        assert prob == pytest.approx(0.5, abs=1e-12)
        assert fidelity(cond, vv_state(1, "azimuthal").density()) == pytest.approx(1.0, abs=1e-9)

    def test_circular_projection_separable(self):
        chi = PureState.ket(order_basis(5), ("R", 5))
        cond, _ = conditional_state(bell_vv(1, 5).density(), 2, chi)
        assert purity(cond) == pytest.approx(1.0, abs=1e-12)
        assert concurrence(cond).value == pytest.approx(0.0, abs=1e-9)

    def test_probabilities_sum_to_one(self, rng):
        rho = bell_vv(3, 5).density()
        u = random_unitary(rng, 4)
        total = sum(conditional_state(rho, 2, u[:, k])[1] for k in range(4))
        assert total == pytest.approx(1.0, abs=1e-12)

    def test_projecting_photon_one(self):
        cond, prob = conditional_state(bell_vv(1, 1).density(), 1, vv_state(1, "azimuthal"))
        assert prob == pytest.approx(0.5)
        assert fidelity(cond, vv_state(1).density()) == pytest.approx(1.0, abs=1e-9)

    def test_null_outcome(self):
        with pytest.raises(ValueError):
            conditional_state(bell_vv(1, 1).density(), 2, pi_mode(1))

    def test_bad_photon(self):
        with pytest.raises(ValueError):
            conditional_state(bell_vv(1, 1).density(), 3, vv_state(1))


def _has_separable_factor(label):
    return label[0] in "RL" or label[1] in "pn"


class TestProjectorSet:
    @pytest.mark.parametrize("m", [1, 5, -1])
    def test_default_matches_generator(self, m):
        loaded = load_projectors(m)
        built = projector_set(m)
        assert len(loaded) == 34
        assert [p.label for p in loaded] == [p.label for p in built]
        for a, b in zip(loaded, built):
            np.testing.assert_allclose(a.state.vector, b.state.vector, atol=1e-15)

    def test_packaged_files_exist(self):
        assert default_projector_file(1).is_file()
        assert default_projector_file(-1).is_file()

    def test_round_trip(self, tmp_path):
        path = tmp_path / "p.txt"
        path.write_text(format_projector_file(projector_set(3)))
        assert "-0," not in path.read_text()
        back = read_projector_file(path, 3)
        assert len(back) == 34

    def test_malformed(self, tmp_path):
        path = tmp_path / "bad.txt"
        path.write_text("Hh 1,0 0,0 0,0\n")
        with pytest.raises(ValueError):
            read_projector_file(path, 1)
        path.write_text("Hh 1,0 0,x 0,0 0,0\n")
        with pytest.raises(ValueError):
            read_projector_file(path, 1)
        path.write_text("# empty\n")
        with pytest.raises(ValueError):
            read_projector_file(path, 1)

    @pytest.mark.parametrize("m", [1, -1])
    def test_no_null_projectors(self, m):
        rho = bell_vv(1, m).density()
        for p in projector_set(m):
            assert conditional_state(rho, 2, p.state)[1] > 1e-3


class TestDistribution:
    @pytest.mark.parametrize("pair", ORDER_PAIRS)
    @pytest.mark.parametrize("photon", [1, 2])
    def test_ideal_two_regions(self, pair, photon):
        m = pair[photon - 1]
        dist = concurrence_distribution(bell_vv(*pair).density(), projector_set(m), photon)
        values = dist.values()
        assert np.all((np.abs(values) < 1e-9) | (np.abs(values - 1) < 1e-9))
        assert len(dist.entangled) == 16 and len(dist.separable) == 18
        for e in dist.entries:
            if _has_separable_factor(e.label):
                assert e.region == "separable"

    def test_fully_mixed(self):
        rho = DensityMatrix(pair_basis(1, 1), np.eye(16) / 16)
        dist = concurrence_distribution(rho, projector_set(1))
        np.testing.assert_allclose(dist.values(), 0.0, atol=1e-12)

    @pytest.mark.parametrize("p", [0.5, 0.966])
    def test_werner_entries(self, p):
        # conditional state is p|psi><psi| + (1-p) P_VV / 2 on two orthogonal
        # maximally entangled modes; its concurrence is p
        dist = concurrence_distribution(werner_vv(1, 1, p), projector_set(1))
        ent = [e.concurrence for e in dist.entries if e.region == "entangled"]
        np.testing.assert_allclose(ent, p, atol=1e-9)

    def test_unlabeled_states(self):
        dist = concurrence_distribution(bell_vv(1, 1).density(), [vv_state(1)])
        assert dist.entries[0].label == "chi0"
        assert dist.entries[0].concurrence == pytest.approx(1.0)

    def test_classify(self):
        assert classify(0.9) == "entangled"
        assert classify(0.1) == "separable"


class TestIntersystem:
    @pytest.mark.parametrize("pair", ORDER_PAIRS)
    def test_ideal(self, pair):
        rep, weight = intersystem_concurrence(bell_vv(*pair).density(), *pair)
        assert rep.value == pytest.approx(1.0, abs=1e-10)
        assert weight == pytest.approx(1.0, abs=1e-12)

    def test_fully_mixed(self):
        rep, weight = intersystem_concurrence(np.eye(16) / 16, 1, 1)
        assert rep.value == pytest.approx(0.0, abs=1e-12)
        assert weight == pytest.approx(0.25)

    @pytest.mark.parametrize("c", [0.949, 0.906, 0.863, 0.908, 0.914])
    def test_calibration(self, c):
        p = werner_p_from_concurrence(c)
        rep, _ = intersystem_concurrence(werner_vv(1, 5, p), 1, 5)
        assert rep.value == pytest.approx(c, abs=1e-10)

    def test_calibration_range(self):
        with pytest.raises(ValueError):
            werner_p_from_concurrence(1.2)

    def test_no_weight(self):
        rho = np.zeros((16, 16))
        rho[2, 2] = 1.0  # |R,1>|L,1>, outside the VV (x) VV subspace
        with pytest.raises(ValueError):
            intersystem_concurrence(rho, 1, 1)
