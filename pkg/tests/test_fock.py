"""Truncated-state mechanics and the elementary operator blocks."""

import math

import numpy as np
import pytest
from reference import (
    expm_displacement_block,
    expm_rotation_block,
    expm_squeeze_block,
    poisson_probability,
    squeezed_vacuum_probability,
)

from vibronic import (
    DimensionError,
    Displace,
    LeakageError,
    ParameterError,
    Rotate,
    Squeeze,
    TruncatedState,
    apply_displacement,
    apply_rotation,
    apply_sequence,
    apply_squeeze,
    basis_state,
    leakage,
    new_vacuum,
    probability,
    run_with_auto_cutoff,
)
from vibronic.fock import displacement_block, rotation_block, squeeze_block


class TestVacuum:
    def test_two_modes(self):
        state = new_vacuum(2, [10, 10])
        assert probability(state, (0, 0)) == 1.0
        assert state.norm_sq == 1.0

    def test_single_mode_amplitudes(self):
        state = new_vacuum(1, [2])
        assert np.array_equal(state.amplitudes, [1.0, 0.0])

    def test_three_modes(self):
        state = new_vacuum(3, [4, 4, 4])
        assert state.amplitudes.size == 64
        assert state.norm_sq == 1.0

    @pytest.mark.parametrize("nmodes,cutoffs", [(0, []), (1, [1]), (2, [4]), (2, [4, 1])])
    def test_invalid_dimensions(self, nmodes, cutoffs):
        with pytest.raises(DimensionError):
            new_vacuum(nmodes, cutoffs)

    def test_scalar_cutoff_broadcast(self):
        assert new_vacuum(3, 5).cutoffs == (5, 5, 5)


class TestStateInvariants:
    def test_amplitudes_frozen(self):
        state = new_vacuum(1, [4])
        with pytest.raises(ValueError):
            state.amplitudes[0] = 0.0

    def test_norm_above_one_rejected(self):
        with pytest.raises(ParameterError):
            TruncatedState(np.array([1.0, 0.5]))

    def test_probability_errors(self):
        state = new_vacuum(2, [4, 4])
        with pytest.raises(IndexError):
            probability(state, (0,))
        with pytest.raises(IndexError):
            probability(state, (4, 0))
        with pytest.raises(IndexError):
            probability(state, (0, -1))


class TestDisplacement:
    def test_zero_is_identity(self, rng):
        state = new_vacuum(1, [12])
        state = apply_displacement(state, 0, 0.7)
        again = apply_displacement(state, 0, 0.0)
        np.testing.assert_allclose(again.amplitudes, state.amplitudes, atol=1e-15)

    def test_poisson_distribution(self):
        state = apply_displacement(new_vacuum(1, [30]), 0, 1.0)
        for m in range(30):
            assert probability(state, (m,)) == pytest.approx(
                poisson_probability(m, 1.0), abs=1e-10
            )
        assert probability(state, (0,)) == pytest.approx(0.36787944117, abs=1e-10)

    def test_complex_amplitude_poisson(self):
        alpha = 0.6 + 0.8j
        state = apply_displacement(new_vacuum(1, [40]), 0, alpha)
        for m in range(0, 40, 3):
            assert probability(state, (m,)) == pytest.approx(
                poisson_probability(m, alpha), abs=1e-10
            )

    def test_inverse_pair_restores_vacuum(self):
        state = new_vacuum(1, [30])
        state = apply_displacement(apply_displacement(state, 0, 1.0), 0, -1.0)
        assert probability(state, (0,)) == pytest.approx(1.0, abs=1e-10)

    @pytest.mark.parametrize("a,b", [(0.3, 0.9), (-0.5, 1.1), (0.25, -0.25)])
    def test_composition_adds_amplitudes(self, a, b):
        cutoff = 40
        one = apply_displacement(
            apply_displacement(new_vacuum(1, [cutoff]), 0, a), 0, b
        )
        direct = apply_displacement(new_vacuum(1, [cutoff]), 0, a + b)
        np.testing.assert_allclose(
            one.probabilities(), direct.probabilities(), atol=1e-9
        )

    def test_leakage_is_poisson_tail(self):
        state = apply_displacement(new_vacuum(1, [4]), 0, 3.0)
        tail = 1.0 - sum(poisson_probability(m, 3.0) for m in range(4))
        assert leakage(state) > 0.1
        assert leakage(state) == pytest.approx(tail, abs=1e-12)

    def test_leakage_negligible_when_converged(self):
        state = apply_displacement(new_vacuum(1, [30]), 0, 1.0)
        assert leakage(state) < 1e-12

    def test_errors(self):
        state = new_vacuum(1, [4])
        with pytest.raises(IndexError):
            apply_displacement(state, 1, 0.1)
        with pytest.raises(ParameterError):
            apply_displacement(state, 0, float("nan"))
        zero = TruncatedState(np.zeros(4))
        with pytest.raises(ParameterError):
            apply_displacement(zero, 0, 0.5)

    @pytest.mark.parametrize("cutoff,alpha", [(12, 1.3), (20, 0.5 + 0.7j), (8, -2.0)])
    def test_block_matches_matrix_exponential(self, cutoff, alpha):
        mine = displacement_block(cutoff, alpha)
        ref = expm_displacement_block(cutoff, alpha)
        np.testing.assert_allclose(mine, ref, atol=1e-12)


class TestSqueeze:
    def test_zero_is_identity(self):
        state = apply_displacement(new_vacuum(1, [12]), 0, 0.4)
        same = apply_squeeze(state, 0, 0.0)
        np.testing.assert_allclose(same.amplitudes, state.amplitudes, atol=1e-15)

    def test_squeezed_vacuum_distribution(self):
        state = apply_squeeze(new_vacuum(1, [40]), 0, 1.0)
        for m in range(40):
            assert probability(state, (m,)) == pytest.approx(
                squeezed_vacuum_probability(m, 1.0), abs=1e-9
            )

    @pytest.mark.parametrize("zeta", [0.2, 0.9, 1.4])
    @pytest.mark.parametrize("phase", [0.0, 1.3])
    def test_parity_exact(self, zeta, phase):
        state = apply_squeeze(new_vacuum(1, [41]), 0, zeta, phase)
        odd = [probability(state, (m,)) for m in range(1, 41, 2)]
        assert max(odd) <= 1e-12

    def test_inverse_pair_restores_vacuum(self):
        state = apply_squeeze(apply_squeeze(new_vacuum(1, [80]), 0, 1.0), 0, -1.0)
        assert probability(state, (0,)) == pytest.approx(1.0, abs=1e-9)

    @pytest.mark.parametrize("phase", [0.0, 0.8])
    def test_negative_parameter_is_inverse_at_same_phase(self, rng, phase):
        # a state supported well below the cutoff is restored exactly; the
        # squeezed tail decays like tanh(r)^n, so the headroom must be large
        amps = np.zeros(128, dtype=complex)
        amps[:6] = rng.normal(size=6) + 1j * rng.normal(size=6)
        amps /= np.linalg.norm(amps) * 1.0000001
        state = TruncatedState(amps)
        restored = apply_squeeze(apply_squeeze(state, 0, 0.7, phase), 0, -0.7, phase)
        np.testing.assert_allclose(restored.amplitudes, state.amplitudes, atol=1e-9)

    def test_errors(self):
        state = new_vacuum(1, [4])
        with pytest.raises(IndexError):
            apply_squeeze(state, 2, 0.1)
        with pytest.raises(ParameterError):
            apply_squeeze(state, 0, float("inf"))

    @pytest.mark.parametrize(
        "cutoff,zeta,phase", [(16, 1.0, 0.0), (16, -0.8, 0.4), (24, 1.3, 1.1)]
    )
    def test_block_matches_matrix_exponential(self, cutoff, zeta, phase):
        mine = squeeze_block(cutoff, zeta, phase)
        ref = expm_squeeze_block(cutoff, zeta, phase)
        np.testing.assert_allclose(mine, ref, atol=1e-12)

    def test_block_subunitary_at_large_cutoff(self):
        block = squeeze_block(200, 1.5, 0.3)
        col_norms = np.sum(np.abs(block) ** 2, axis=0)
        assert col_norms.max() <= 1.0 + 1e-10


class TestRotation:
    def test_full_swap(self):
        state = apply_rotation(basis_state((1, 0), (5, 5)), 0, 1, math.pi / 2)
        assert probability(state, (0, 1)) == pytest.approx(1.0, abs=1e-12)

    def test_hong_ou_mandel_zero(self):
        state = apply_rotation(basis_state((1, 1), (5, 5)), 0, 1, math.pi / 4)
        assert probability(state, (1, 1)) < 1e-10
        assert probability(state, (2, 0)) == pytest.approx(0.5, abs=1e-10)
        assert probability(state, (0, 2)) == pytest.approx(0.5, abs=1e-10)

    def test_two_level_closed_form(self):
        theta = 0.189
        state = apply_rotation(basis_state((1, 0), (5, 5)), 0, 1, theta)
        assert probability(state, (1, 0)) == pytest.approx(math.cos(theta) ** 2, abs=1e-12)
        assert probability(state, (0, 1)) == pytest.approx(math.sin(theta) ** 2, abs=1e-12)

    def test_total_occupation_conserved(self, rng):
        cut = 7
        amps = rng.normal(size=(cut, cut)) + 1j * rng.normal(size=(cut, cut))
        amps /= np.linalg.norm(amps) * 1.0000001
        state = TruncatedState(amps)
        rotated = apply_rotation(state, 0, 1, 0.37, 0.9)

        def sector_mass(s):
            probs = s.probabilities()
            total = np.add.outer(np.arange(cut), np.arange(cut))
            return np.array([probs[total == n].sum() for n in range(2 * cut - 1)])

        before, after = sector_mass(state), sector_mass(rotated)
        # sectors that fit entirely below the cutoffs are preserved exactly
        np.testing.assert_allclose(after[:cut], before[:cut], atol=1e-10)
        assert np.all(after <= before + 1e-12)

    def test_no_leakage_when_state_fits(self):
        state = apply_rotation(basis_state((2, 2), (5, 5)), 0, 1, 0.7)
        assert leakage(state) < 1e-12

    def test_leakage_when_sector_clipped(self):
        state = apply_rotation(basis_state((3, 3), (4, 4)), 0, 1, 0.7)
        assert leakage(state) > 1e-3

    def test_errors(self):
        state = new_vacuum(2, [4, 4])
        with pytest.raises(ParameterError):
            apply_rotation(state, 0, 0, 0.3)
        with pytest.raises(IndexError):
            apply_rotation(state, 0, 2, 0.3)

    @pytest.mark.parametrize(
        "ci,cj,theta,phase",
        [(5, 4, 0.6, 0.3), (6, 6, math.pi / 4, 0.0), (4, 7, -1.2, 2.0)],
    )
    def test_block_matches_matrix_exponential(self, ci, cj, theta, phase):
        mine = rotation_block(ci, cj, theta, phase)
        ref = expm_rotation_block(ci, cj, theta, phase, work=ci + cj + 4)
        np.testing.assert_allclose(mine, ref, atol=1e-12)


class TestSequences:
    def test_empty_sequence_is_identity(self):
        state = new_vacuum(2, [6, 6])
        assert apply_sequence(state, []) is state

    def test_squeeze_inverse_pair(self):
        state = apply_sequence(
            new_vacuum(1, [80]), [Squeeze(0, 1.0), Squeeze(0, -1.0)]
        )
        assert probability(state, (0,)) == pytest.approx(1.0, abs=1e-9)

    def test_reference_sequence_retains_norm(self, so2_sequence):
        state = run_with_auto_cutoff(so2_sequence.ops, 2)
        assert state.norm_sq >= 1.0 - 1e-6

    def test_norm_never_increases(self, rng):
        ops = [
            Squeeze(0, 0.6),
            Rotate(0, 1, 0.9, 0.2),
            Displace(1, 1.4),
            Squeeze(1, -0.4, 1.0),
            Displace(0, -0.5 + 0.3j),
        ]
        state = new_vacuum(2, [12, 12])
        norms = [state.norm_sq]
        for op in ops:
            state = apply_sequence(state, [op])
            norms.append(state.norm_sq)
        assert all(b <= a + 1e-12 for a, b in zip(norms, norms[1:]))


@pytest.mark.parametrize(
    "op",
    [
        Displace(0, 1.2),
        Squeeze(0, 0.8, 0.5),
        Rotate(0, 1, 0.7, 0.1),
    ],
)
def test_self_convergence_across_cutoffs(op):
    """Doubling the cutoff must not move the retained amplitudes."""
    cut = 16
    small = apply_sequence(new_vacuum(2, [cut, cut]), [op])
    large = apply_sequence(new_vacuum(2, [2 * cut, 2 * cut]), [op])
    keep = large.amplitudes[: cut // 2, : cut // 2]
    np.testing.assert_allclose(
        small.amplitudes[: cut // 2, : cut // 2], keep, atol=1e-8
    )


class TestAutoCutoff:
    def test_selects_converged_cutoffs(self, so2_sequence):
        state = run_with_auto_cutoff(so2_sequence.ops, 2)
        assert leakage(state) < 1e-6
        assert all(c <= 64 for c in state.cutoffs)

    def test_cap_exceeded_raises(self):
        with pytest.raises(LeakageError, match="leakage"):
            run_with_auto_cutoff([Displace(0, 12.0)], 1, cap=64)

    def test_bad_tolerance(self):
        with pytest.raises(ParameterError):
            run_with_auto_cutoff([], 1, leak_tol=0.0)
