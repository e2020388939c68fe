import numpy as np
import pytest

from annulus_cert.blocks import BlockSpec, assemble, fcalc_hat, fcalc_tx, solve_commutant_factor
from annulus_cert.errors import ContractViolationError, DomainError
from annulus_cert.generators import random_normal_annulus
from annulus_cert.numerics import eigenvalues, operator_norm
from annulus_cert.pencil import AnnulusParams
from annulus_cert.rational import RationalFunction, eval_matrix

from conftest import eig_match_max, interior_commuting_triple, random_poles_off_rational

AP5 = AnnulusParams(0.5)


def poly_in(t, rng, deg=2):
    coeffs = rng.standard_normal(deg + 1) + 1j * rng.standard_normal(deg + 1)
    out = np.zeros_like(t)
    for c in coeffs[::-1]:
        out = out @ t + c * np.eye(t.shape[0])
    return out


class TestAssemble:
    def test_tx_zero_x_block_diagonal(self):
        t = random_normal_annulus(3, AP5, seed=1)
        block = assemble(BlockSpec("tx", t, np.zeros((3, 3))))
        assert operator_norm(block[:3, 3:]) == 0.0
        assert operator_norm(block[:3, :3] - t) == 0.0
        assert operator_norm(block[3:, 3:] - t) == 0.0

    def test_hat_equal_diagonals(self):
        t = random_normal_annulus(3, AP5, seed=2)
        x = poly_in(t, np.random.default_rng(3))
        block = assemble(BlockSpec("hat", t, x, t))
        assert operator_norm(block[:3, 3:]) < 1e-12

    def test_general_matches_hat_definitionally(self):
        t1, t2, x = interior_commuting_triple(3, AP5, seed=4)
        y = x @ (t1 - t2)
        hat = assemble(BlockSpec("hat", t1, x, t2))
        gen = assemble(BlockSpec("general", t1, y, t2))
        assert operator_norm(hat - gen) < 1e-12

    def test_commutation_enforced(self):
        t = np.array([[0.6, 0.1], [0.0, 0.6]])
        x = np.array([[0.0, 1.0], [1.0, 0.0]])
        with pytest.raises(ContractViolationError):
            assemble(BlockSpec("tx", t, x))

    def test_dimension_mismatch(self):
        with pytest.raises(ContractViolationError):
            BlockSpec("tx", np.eye(2), np.eye(3))

    def test_bad_kind(self):
        with pytest.raises(DomainError):
            BlockSpec("diag", np.eye(2), np.eye(2))

    def test_spectrum_union_invariant(self):
        for seed in range(10):
            t1, t2, x = interior_commuting_triple(3, AP5, seed=seed)
            block = assemble(BlockSpec("hat", t1, x, t2))
            union = np.concatenate([eigenvalues(t1), eigenvalues(t2)])
            assert eig_match_max(eigenvalues(block), union) < 1e-8

    def test_json_round_trip(self):
        t1, t2, x = interior_commuting_triple(2, AP5, seed=7)
        spec = BlockSpec("hat", t1, x, t2)
        again = BlockSpec.from_dict(spec.to_dict())
        assert operator_norm(assemble(spec) - assemble(again)) == 0.0


class TestFcalcTx:
    def test_identity_function_reproduces_block(self):
        t = random_normal_annulus(3, AP5, seed=5)
        x = poly_in(t, np.random.default_rng(6))
        f = RationalFunction([0.0, 1.0], [1.0])
        assert operator_norm(fcalc_tx(t, x, f, AP5) - assemble(BlockSpec("tx", t, x))) < 1e-12

    def test_square_top_right_is_2xt(self):
        t = random_normal_annulus(2, AP5, seed=8)
        x = poly_in(t, np.random.default_rng(9))
        f = RationalFunction([0.0, 0.0, 1.0], [1.0])
        out = fcalc_tx(t, x, f, AP5)
        assert operator_norm(out[:2, 2:] - 2.0 * x @ t) < 1e-10

    def test_against_direct_block_evaluation(self, rng):
        for seed in range(20):
            t = random_normal_annulus(3, AP5, seed=100 + seed)
            x = poly_in(t, rng)
            f = random_poles_off_rational(rng, AP5)
            direct = eval_matrix(f, assemble(BlockSpec("tx", t, x)))
            reduced = fcalc_tx(t, x, f, AP5)
            scale = 1.0 + operator_norm(direct)
            assert operator_norm(reduced - direct) <= 1e-8 * scale

    def test_pole_on_annulus_rejected(self):
        t = random_normal_annulus(2, AP5, seed=3)
        f = RationalFunction([1.0], [-0.7, 1.0])
        with pytest.raises(DomainError):
            fcalc_tx(t, np.eye(2), f, AP5)


class TestFcalcHat:
    def test_identity_function_reproduces_block(self):
        t1, t2, x = interior_commuting_triple(3, AP5, seed=11)
        f = RationalFunction([0.0, 1.0], [1.0])
        assert operator_norm(fcalc_hat(t1, t2, x, f, AP5) - assemble(BlockSpec("hat", t1, x, t2))) < 1e-10

    def test_equal_diagonals_block_diagonal(self):
        t1, _, x = interior_commuting_triple(3, AP5, seed=12)
        f = RationalFunction([1.0], [0.0, 1.0])
        out = fcalc_hat(t1, t1, x, f, AP5)
        assert operator_norm(out[:3, 3:]) < 1e-10

    def test_reciprocal_against_direct(self, rng):
        for seed in range(10):
            t1, t2, x = interior_commuting_triple(3, AP5, seed=200 + seed)
            f = RationalFunction([1.0], [0.0, 1.0])
            direct = eval_matrix(f, assemble(BlockSpec("hat", t1, x, t2)))
            reduced = fcalc_hat(t1, t2, x, f, AP5)
            scale = 1.0 + operator_norm(direct)
            assert operator_norm(reduced - direct) <= 1e-8 * scale


class TestSolveCommutantFactor:
    def test_invertible_difference_exact(self):
        t1, t2, x = interior_commuting_triple(3, AP5, seed=13)
        y = x @ (t1 - t2)
        x_solved, residual = solve_commutant_factor(t1, t2, y)
        assert residual < 1e-10
        assert operator_norm(x_solved - x) < 1e-8 * (1 + operator_norm(x))

    def test_singular_difference_reports_residual(self):
        t = random_normal_annulus(3, AP5, seed=14)
        y = np.eye(3)
        _, residual = solve_commutant_factor(t, t, y)  # T1 - T2 = 0
        assert residual == pytest.approx(operator_norm(y) / (1 + operator_norm(y)))
