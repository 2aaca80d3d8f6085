import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.integrate import quad

from ringmod.cmmr import CmmrParams, solve_cmmr
from ringmod.composite import DcmmrParams, MziBaselineParams, solve_dcmmr, solve_mzi_baseline
from ringmod.detection import intensity_harmonics
from ringmod.errors import DomainError
from ringmod.harmonics import HarmonicWindow


def ring(**kw):
    base = dict(alpha=0.98, delay_s=2e-12, loop_phase=0.0, bias_phase=0.12, beta=0.0942, rf_frequency_hz=100e9)
    base.update(kw)
    return CmmrParams(**base)


class TestDcmmr:
    def test_ring2_offset(self):
        p = DcmmrParams(ring(rf_phase=0.3))
        assert p.ring2.rf_phase == pytest.approx(0.3 + math.pi / 2)
        assert p.ring1 == p.ring

    @pytest.mark.parametrize("combine,factor", [(math.pi / 2, 1.0), (0.0, 1 / math.sqrt(2)), (-math.pi / 2, 0.0)])
    def test_static_phasor_sum(self, combine, factor):
        r = ring(beta=0.0)
        single = solve_cmmr(r)[1][0]
        d = solve_dcmmr(DcmmrParams(r, combine_phase=combine))
        assert abs(d[0]) == pytest.approx(abs(single) * factor, abs=1e-14)

    def test_preset_cancels_second_order(self):
        d = solve_dcmmr(DcmmrParams(ring()))
        assert max(abs(d[2]), abs(d[-2])) <= 1e-10

    @settings(max_examples=30, deadline=None)
    @given(beta=st.floats(0.0, 0.2), bias=st.floats(0.05, 0.45), f=st.floats(1e9, 3e11))
    def test_cancellation_property(self, beta, bias, f):
        d = solve_dcmmr(DcmmrParams(ring(beta=beta, bias_phase=bias, rf_frequency_hz=f)))
        assert max(abs(d[2]), abs(d[-2])) <= 1e-8

    def test_cancellation_point_in_neighbourhood(self):
        phases = np.linspace(math.pi / 2 - 0.2, math.pi / 2 + 0.2, 41)
        resid = [abs(solve_dcmmr(DcmmrParams(ring(), combine_phase=p))[2]) for p in phases]
        assert phases[int(np.argmin(resid))] == pytest.approx(math.pi / 2, abs=1e-12)

    def test_sixth_order_also_cancels_but_fourth_does_not(self):
        d = solve_dcmmr(DcmmrParams(ring(beta=0.3)))
        assert abs(d[6]) <= 1e-12 and abs(d[4]) > 1e-8


class TestMzi:
    def test_full_cross(self):
        assert abs(solve_mzi_baseline(MziBaselineParams(0.0, 5e9, bias_phase=math.pi))[0]) == pytest.approx(1.0)

    def test_bar(self):
        assert np.all(solve_mzi_baseline(MziBaselineParams(0.0, 5e9, bias_phase=0.0)).amplitudes == 0)

    def test_first_sideband_quadrature(self):
        d = solve_mzi_baseline(MziBaselineParams(0.0471, 5e9))
        re = quad(lambda u: math.sin(math.pi / 4 + 0.0471 * math.cos(u)) * math.cos(u), 0, 2 * math.pi,
                  epsabs=1e-14)[0] / (2 * math.pi)
        assert abs(d[1]) == pytest.approx(abs(re), abs=1e-9)

    def test_frequency_independent(self):
        ref = solve_mzi_baseline(MziBaselineParams(0.3, 1e8)).amplitudes
        for f in np.geomspace(1e8, 1e11, 13):
            np.testing.assert_array_equal(solve_mzi_baseline(MziBaselineParams(0.3, f)).amplitudes, ref)

    @pytest.mark.parametrize("beta", [0.0, 0.01, 0.1, 0.3, 0.5])
    def test_quadrature_even_intensity_vanishes(self, beta):
        ih = intensity_harmonics(solve_mzi_baseline(MziBaselineParams(beta, 5e9)), 4)
        assert abs(ih[2]) <= 1e-12 and abs(ih[4]) <= 1e-12

    def test_validation(self):
        with pytest.raises(DomainError):
            MziBaselineParams(-0.1, 5e9)
