import math

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

from conftest import scattering_oracle
from qfpsim.rings import (
    RingFilter,
    filter_response,
    load_coupling_table,
    nring_response,
    single_ring_response,
    synthesize_flat_filter,
)
from qfpsim.waveguide import RingGeometry, WaveguideModel, free_spectral_range, tune_ring

W0 = 2 * math.pi * 193e12
TABLE = load_coupling_table()


def _filter(model, order, kappa_sq=0.01):
    return synthesize_flat_filter(model, 20.0, order, kappa_sq, TABLE, W0)


def _dense(model, span_fsr=1.0, points=20001):
    fsr = 2 * math.pi * free_spectral_range(model, RingGeometry(20.0))
    return W0 + np.linspace(-0.5, 0.5, points) * span_fsr * fsr


def test_single_ring_closed_form_at_resonance():
    model = WaveguideModel()
    filt = _filter(model, 1)
    # residual tuning phase is ~1e-12 rad of a ~1e4 rad round trip
    r = single_ring_response(model, filt, W0)
    from qfpsim.waveguide import field_attenuation

    a = field_attenuation(model, filt.rings[0])
    t = math.sqrt(0.99)
    assert r.through == pytest.approx((t - t * a) / (1 - t * t * a), abs=1e-10)
    assert abs(r.drop) == pytest.approx(0.01 * math.sqrt(a) / (1 - t * t * a), rel=1e-12)


@pytest.mark.parametrize("order", range(1, 7))
def test_lossless_power_conservation(lossless, order):
    r = filter_response(lossless, _filter(lossless, order), _dense(lossless))
    err = np.abs(np.abs(r.through) ** 2 + np.abs(r.drop) ** 2 - 1)
    assert err.max() < 1e-12


def test_transfer_matrix_matches_closed_form_single_ring():
    model = WaveguideModel()
    filt = _filter(model, 1)
    w = _dense(model)
    a = single_ring_response(model, filt, w)
    b = nring_response(model, filt, w)
    assert np.max(np.abs(a.through - b.through)) < 1e-12
    assert np.max(np.abs(a.drop - b.drop)) < 1e-12


@pytest.mark.parametrize("order", range(1, 7))
def test_matches_brute_force_scattering(order):
    model = WaveguideModel()
    filt = _filter(model, order)
    for w in _dense(model, 0.02, 41):
        through, drop = scattering_oracle(filt, model, w)
        r = filter_response(model, filt, w)
        assert abs(r.through - through) < 1e-9
        assert abs(r.drop - drop) < 1e-9


@settings(max_examples=30, deadline=None)
@given(
    st.lists(st.floats(1e-4, 0.5), min_size=2, max_size=6),
    st.lists(st.floats(-math.pi, math.pi), min_size=6, max_size=6),
    st.floats(-math.pi, math.pi),
)
def test_random_filters_match_oracle(couplings, offsets, detune):
    model = WaveguideModel(alpha=0.3)
    order = len(couplings) - 1 or 1
    rings = tuple(tune_ring(model, RingGeometry(20.0, 0.0), W0) for _ in range(order))
    rings = tuple(RingGeometry(20.0, r.phase_offset + o) for r, o in zip(rings, offsets))
    inter = tuple(couplings[1:order]) if order > 1 else ()
    filt = RingFilter(rings, couplings[0], inter)
    w = W0 + detune * 1e9
    through, drop = scattering_oracle(filt, model, w)
    r = nring_response(model, filt, w)
    assert abs(r.through - through) < 1e-8
    assert abs(r.drop - drop) < 1e-8


def test_lossy_filter_is_passive():
    model = WaveguideModel()
    for order in (1, 3, 6):
        r = filter_response(model, _filter(model, order), _dense(model, 0.1, 2001))
        assert np.all(np.abs(r.through) ** 2 + np.abs(r.drop) ** 2 <= 1 + 1e-12)


def test_higher_order_is_flatter(lossless):
    # relative bandwidth at the 0.9 and 0.1 power levels approaches 1 for a box
    w = _dense(lossless, 0.01, 40001)

    def shape_factor(order):
        p = np.abs(filter_response(lossless, _filter(lossless, order), w).drop) ** 2
        return np.count_nonzero(p > 0.9) / np.count_nonzero(p > 0.1)

    factors = [shape_factor(n) for n in (1, 2, 3)]
    assert factors[0] < factors[1] < factors[2]


def test_table_and_validation():
    assert set(TABLE) >= set(range(1, 7))
    assert TABLE[2] == pytest.approx((0.25,))
    with pytest.raises(ValueError):
        RingFilter((RingGeometry(),), 0.01, (0.1,))
    with pytest.raises(ValueError):
        RingFilter((RingGeometry(),), 1.0)
    with pytest.raises(KeyError):
        synthesize_flat_filter(WaveguideModel(), 20.0, 9, 0.01, TABLE)


@pytest.mark.parametrize("order", range(2, 7))
def test_table_is_palindromic(order):
    assert TABLE[order] == tuple(reversed(TABLE[order]))


@pytest.mark.parametrize("order", range(1, 7))
def test_fsr_periodicity_with_constant_index(order):
    # constant n_eff: shifting the frequency by one FSR adds exactly 2 pi to the round trip
    model = WaveguideModel(W0, (2.37,), 0.0)
    filt = synthesize_flat_filter(model, 20.0, order, 0.01, TABLE, W0)
    fsr = 2 * math.pi * free_spectral_range(model, RingGeometry(20.0))
    w = W0 + np.linspace(-0.1, 0.1, 101) * fsr
    a = filter_response(model, filt, w)
    b = filter_response(model, filt, w + fsr)
    # drop picks up the half-round-trip phase e^{i pi} per ring
    np.testing.assert_allclose(a.through, b.through, atol=1e-9)
    np.testing.assert_allclose(np.abs(a.drop), np.abs(b.drop), atol=1e-9)


def test_isolation_improves_with_order():
    model = WaveguideModel()
    fsr = 2 * math.pi * free_spectral_range(model, RingGeometry(20.0))
    w = W0 + fsr / 10
    p = [abs(filter_response(model, _filter(model, n), w).drop) ** 2 for n in range(1, 7)]
    assert all(b <= a for a, b in zip(p, p[1:]))
