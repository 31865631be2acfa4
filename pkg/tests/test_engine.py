import math
from dataclasses import replace

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st
from scipy.special import jv
from scipy.stats import unitary_group

from qfpsim.engine import (
    HADAMARD,
    GateSpec,
    QfpStack,
    align_eoms,
    compose_v,
    drive_coefficients,
    eom_matrix,
    evaluate,
    extract_w,
    fidelity_and_prob,
    hadamard_phases,
    hadamard_spec,
    hadamard_stack,
    normalize,
    sweep_offset,
    sweep_order,
)
from qfpsim.eom import ModulatorDrive, fourier_coefficients
from qfpsim.shaper import response

GHZ = 2 * math.pi * 1e9


@settings(deadline=None)
@given(st.integers(1, 4), st.floats(0.01, 1.0), st.floats(-math.pi, math.pi), st.integers(0, 2**31))
def test_scaled_target_has_unit_fidelity(d, scale, phase, seed):
    u = unitary_group.rvs(d, random_state=seed) if d > 1 else np.array([[np.exp(1j * seed)]])
    spec = GateSpec(u, tuple(range(d)))
    f, p = fidelity_and_prob(scale * np.exp(1j * phase) * u, spec)
    assert f == pytest.approx(1.0, abs=1e-12)
    assert p == pytest.approx(scale**2, rel=1e-12)


@settings(deadline=None)
@given(st.integers(0, 2**31))
def test_fidelity_bounded(seed):
    rng = np.random.default_rng(seed)
    w = rng.normal(size=(2, 2)) + 1j * rng.normal(size=(2, 2))
    f, p = fidelity_and_prob(w, hadamard_spec())
    assert 0 <= f <= 1 + 1e-12
    assert p > 0


def test_zero_submatrix_is_degenerate():
    assert fidelity_and_prob(np.zeros((2, 2)), hadamard_spec()) == (0.0, 0.0)


def test_spec_validation():
    with pytest.raises(ValueError):
        GateSpec(np.ones((2, 2)), (0, 1))
    with pytest.raises(ValueError):
        GateSpec(HADAMARD, (3, 2))
    with pytest.raises(ValueError):
        GateSpec(HADAMARD, (0, 1, 2))


def test_eom_matrix_is_jacobi_anger_toeplitz():
    c = fourier_coefficients(ModulatorDrive(depth=0.8283), 16)
    e = eom_matrix(c, 40)
    m, n = np.meshgrid(np.arange(40), np.arange(40), indexing="ij")
    lag = m - n
    expected = np.where(np.abs(lag) <= 16, jv(-lag, 0.8283), 0)
    np.testing.assert_allclose(e, expected, atol=1e-9)


def test_compose_matches_explicit_sum():
    stack = hadamard_stack(guard_modes=16)
    stack = stack.with_rf_phases(0.3, 0.3 + math.pi)
    v = compose_v(stack, 0.2 * GHZ)
    c1 = drive_coefficients(stack.eom1, 16, 4096)
    c2 = drive_coefficients(stack.eom2, 16, 4096)
    bins = stack.bins
    h = response(stack.shaper, stack.shaper.grid.frequency(bins) + 0.2 * GHZ)
    for out_i, out_bin in enumerate(bins[::7]):
        for in_i, in_bin in enumerate(bins[::5]):
            direct = sum(c2[out_bin - k] * h[j] * c1[k - in_bin] for j, k in enumerate(bins))
            assert v[out_i * 7, in_i * 5] == pytest.approx(direct, abs=1e-14)


def test_conjugate_modulators_cancel_with_flat_shaper():
    # phase pi flips the sinusoid, so E2 undoes E1 away from the window edges
    stack = hadamard_stack(mode="ideal")
    flat = replace(stack.shaper, channels=tuple((f, 0.0) for f, _ in stack.shaper.channels))
    spec = GateSpec(np.eye(2), (2, 3))
    report = evaluate(stack.with_shaper(flat), spec)
    assert report.fidelity == pytest.approx(1.0, abs=1e-12)


def test_extract_w():
    v = np.arange(100).reshape(10, 10)
    w = extract_w(v, hadamard_spec(), guard_modes=2)
    np.testing.assert_array_equal(w, [[44, 45], [54, 55]])
    with pytest.raises(IndexError):
        extract_w(np.eye(4), hadamard_spec(), guard_modes=2)


def test_stack_validation():
    stack = hadamard_stack()
    with pytest.raises(ValueError):
        replace(stack, guard_modes=8)


def test_hadamard_phases():
    np.testing.assert_array_equal(hadamard_phases(6) / math.pi, [0, 0, 0, 1, 1, 1])
    np.testing.assert_array_equal(hadamard_phases(12)[6:], hadamard_phases(6))


def test_alignment_improves_fidelity(aligned_ideal):
    spec = hadamard_spec()
    before = evaluate(hadamard_stack(mode="ideal").with_rf_phases(1.0, 2.0), spec).fidelity
    after = evaluate(aligned_ideal, spec).fidelity
    assert after > before
    assert after > 1 - 1e-7


def test_offset_sweep_symmetry(aligned_single):
    offsets = np.array([-1.0, -0.3, 0.0, 0.3, 1.0]) * GHZ
    r = sweep_offset(aligned_single, hadamard_spec(), offsets, threads=2)
    p = [x.success_prob for x in r]
    np.testing.assert_allclose(p, p[::-1], rtol=1e-3)
    assert max(x.success_prob_normalized for x in r) == 1.0
    assert r[2].success_prob == max(p)


def test_threads_do_not_change_results(aligned_single):
    offsets = np.linspace(-1, 1, 7) * GHZ
    a = sweep_offset(aligned_single, hadamard_spec(), offsets, threads=1)
    b = sweep_offset(aligned_single, hadamard_spec(), offsets, threads=4)
    assert [x.fidelity for x in a] == [x.fidelity for x in b]


def test_normalize_reference():
    reports = sweep_offset(hadamard_stack(mode="ideal"), hadamard_spec(), [0.0])
    (r,) = normalize(reports, reference=2 * reports[0].success_prob)
    assert r.success_prob_normalized == pytest.approx(0.5)


def test_sweep_order_structure():
    out = sweep_order(hadamard_stack(), hadamard_spec(), [1, 2], [3 * GHZ, 5 * GHZ])
    assert sorted(out) == [1, 2]
    assert all(len(v) == 2 for v in out.values())
    assert out[1][1].success_prob_normalized == 1.0
