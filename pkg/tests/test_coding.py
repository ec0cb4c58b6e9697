import math

import mpmath
import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from gapload.coding import (
    CODED,
    UNCODED,
    CodingConfig,
    GapTable,
    RsCodeParams,
    TrellisCodeParams,
    build_gap_table,
    coding_gain_db,
    db,
    q_function,
    q_inverse,
    rate_loss_db,
    rs_gain_db,
    rs_operating_point,
    rs_output_ser,
    solve_input_ser,
    trellis_gain_db,
    uncoded_gap,
)
from gapload.errors import ConfigError, ConvergenceError, DomainError

RS = RsCodeParams(240, 224)

# arbitrary-precision oracles, computed with mpmath at 50 digits
Q_5_33 = 4.9106383331285337456e-8
QINV_5E_8 = 5.3267238863844963178
GAP_1E_7 = 9.4579957872597174789
RS_PS_C2 = 0.0055916655045957972901  # input SER giving output 4e-7 on RS(240,224)
RS_GAIN_C2 = 4.439566462437514152


def mp_rs_output(p_s, n, t):
    mpmath.mp.dps = 50
    p = mpmath.mpf(p_s)
    return mpmath.fsum(mpmath.binomial(n - 1, i - 1) * p ** i * (1 - p) ** (n - i) for i in range(t + 1, n + 1))


class TestQFunction:
    def test_center(self):
        assert q_function(0.0) == 0.5

    def test_tail_against_oracle(self):
        mpmath.mp.dps = 40
        exact = float(mpmath.erfc(mpmath.mpf("5.33") / mpmath.sqrt(2)) / 2)
        assert q_function(5.33) == pytest.approx(exact, rel=1e-12)
        assert q_function(5.33) == pytest.approx(Q_5_33, rel=1e-12)

    @pytest.mark.parametrize("p", [1e-3, 1e-7, 1e-10])
    def test_roundtrip(self, p):
        assert q_function(q_inverse(p)) == pytest.approx(p, rel=1e-12)

    def test_inverse_values(self):
        assert q_inverse(0.15865525393145705141) == pytest.approx(1.0, rel=1e-12)
        assert q_inverse(5e-8) == pytest.approx(QINV_5E_8, rel=1e-12)

    def test_vectorised(self):
        np.testing.assert_allclose(q_function(np.array([0.0, 5.33])), [0.5, Q_5_33], rtol=1e-12)

    @pytest.mark.parametrize("p", [0.0, 0.5, 0.7, -1e-3])
    def test_inverse_domain(self, p):
        with pytest.raises(DomainError):
            q_inverse(p)

    @settings(max_examples=200, deadline=None)
    @given(st.floats(-8, 8), st.floats(-8, 8))
    def test_monotone(self, a, b):
        if a < b:
            assert q_function(a) >= q_function(b)


class TestUncodedGap:
    def test_value(self):
        g = uncoded_gap(1e-7)
        assert g == pytest.approx(GAP_1E_7, rel=1e-12)
        assert 9.45 <= g <= 9.47
        assert 9.7 <= db(g) <= 9.85
        assert db(g) == pytest.approx(9.8, abs=0.1)

    def test_monotone(self):
        bers = [1e-9, 1e-7, 1e-5, 1e-3]
        gaps = [uncoded_gap(p) for p in bers]
        assert all(a > b for a, b in zip(gaps, gaps[1:]))

    def test_domain(self):
        with pytest.raises(DomainError):
            uncoded_gap(0.0)


class TestReedSolomon:
    def test_params(self):
        assert RS.t == 8
        with pytest.raises(ConfigError):
            RsCodeParams(240, 223)
        with pytest.raises(ConfigError):
            RsCodeParams(300, 280)
        with pytest.raises(ConfigError):
            RsCodeParams(240, 0)

    def test_edges(self):
        assert rs_output_ser(0.0, RS) == 0.0
        assert rs_output_ser(1.0, RS) == 1.0
        with pytest.raises(DomainError):
            rs_output_ser(1.5, RS)

    @pytest.mark.parametrize("p_s", [1e-3, 1e-2, 0.05, 0.3])
    def test_against_oracle(self, p_s):
        exact = float(mp_rs_output(p_s, 240, 8))
        assert rs_output_ser(p_s, RS) == pytest.approx(exact, rel=1e-10)

    def test_no_correction_is_identity(self):
        rs0 = RsCodeParams(240, 240)
        for p in (1e-6, 1e-3, 0.2):
            assert rs_output_ser(p, rs0) == pytest.approx(p, rel=1e-12)

    def test_strictly_increasing(self):
        ps = np.logspace(-6, -0.01, 300)
        out = [rs_output_ser(p, RS) for p in ps]
        assert all(a < b for a, b in zip(out, out[1:]))

    @pytest.mark.parametrize("p", np.logspace(-6, -1, 11))
    def test_solve_roundtrip(self, p):
        assert solve_input_ser(rs_output_ser(p, RS), RS) == pytest.approx(p, rel=1e-6)

    def test_solve_pinned(self):
        p_s = solve_input_ser(4e-7, RS)
        assert 1e-3 < p_s < 1e-1
        assert p_s == pytest.approx(RS_PS_C2, rel=1e-6)

    def test_solve_monotone(self):
        targets = [1e-9, 1e-7, 1e-5, 1e-3]
        sols = [solve_input_ser(t, RS) for t in targets]
        assert all(a < b for a, b in zip(sols, sols[1:]))

    def test_solve_errors(self):
        with pytest.raises(DomainError):
            solve_input_ser(0.0, RS)
        with pytest.raises(ConvergenceError):
            solve_input_ser(1e-7, RS, max_iter=3)


class TestGains:
    def test_rs_gain_pinned(self):
        cfg = CodingConfig()
        assert rs_gain_db(cfg) == pytest.approx(RS_GAIN_C2, abs=1e-6)
        p_s, p_b = rs_operating_point(cfg)
        assert p_b == pytest.approx(p_s / 4)

    def test_rs_gain_zero_without_correction(self):
        assert rs_gain_db(CodingConfig(rs=RsCodeParams(240, 240))) == pytest.approx(0.0, abs=0.1)

    def test_rs_gain_grows_with_t(self):
        gains = [rs_gain_db(CodingConfig(rs=RsCodeParams(240, k))) for k in (238, 234, 224, 200)]
        assert all(a < b for a, b in zip(gains, gains[1:]))

    def test_trellis_default(self):
        assert trellis_gain_db(TrellisCodeParams(), 1e-3) == 4.5

    def test_trellis_override(self):
        tc = TrellisCodeParams(per_order_gain_db={3: 3.9, 4: 4.1})
        assert trellis_gain_db(tc, 1e-3, order=3) == 3.9
        assert trellis_gain_db(tc, 1e-3, order=7) == 4.5

    def test_rate_loss_no_redundancy(self):
        assert rate_loss_db(4, RsCodeParams(240, 240)) == 0.0

    def test_rate_loss_flat_closed_form(self):
        expected = 10 * math.log10((2 ** (4 * 240 / 224) - 1) / (2 ** 4 - 1))
        assert rate_loss_db(4, RS) == pytest.approx(expected, rel=1e-12)

    def test_rate_loss_increases_with_order(self):
        losses = [rate_loss_db(b, RS) for b in range(1, 11)]
        assert all(a < b for a, b in zip(losses, losses[1:]))

    def test_rate_loss_on_channel(self):
        gains = np.array([1.0, 0.3, 0.02, 0.5])

        def oracle_energy(rate):
            # bisection on the water level of the unconstrained dual
            lo, hi = 0.0, 1e9
            for _ in range(300):
                mu = 0.5 * (lo + hi)
                r = np.sum(np.log2(np.maximum(mu * gains, 1.0)))
                lo, hi = (mu, hi) if r < rate else (lo, mu)
            return np.sum(np.maximum(mu - 1 / gains, 0.0))

        b = 3.0
        expected = db(oracle_energy(4 * b * 240 / 224)) - db(oracle_energy(4 * b))
        assert rate_loss_db(b, RS, gains=gains) == pytest.approx(expected, rel=1e-8)

    def test_rate_loss_domain(self):
        with pytest.raises(DomainError):
            rate_loss_db(0, RS)


class TestGapTable:
    def test_uncoded(self):
        t = build_gap_table(CodingConfig(), coded=False)
        assert t.kind == UNCODED and t.b_max == 10 and t.is_uniform()
        assert t.gap(1) == pytest.approx(GAP_1E_7, rel=1e-12)

    def test_coded_components(self):
        cfg = CodingConfig()
        unc = build_gap_table(cfg, coded=False)
        cod = build_gap_table(cfg, coded=True)
        assert cod.kind == CODED
        for b in range(1, 11):
            assert unc.gap_db(b) - cod.gap_db(b) == pytest.approx(coding_gain_db(cfg, b), abs=1e-12)
            assert cod.gap(b) < unc.gap(b)

    def test_zero_coding_equals_uncoded(self):
        cfg = CodingConfig(rs=RsCodeParams(240, 240), trellis=TrellisCodeParams(fundamental_gain_db=0.0))
        unc = build_gap_table(cfg, coded=False)
        cod = build_gap_table(cfg, coded=True)
        np.testing.assert_allclose(cod.gaps, unc.gaps, rtol=1e-9)

    @pytest.mark.parametrize("coded", [False, True])
    def test_margin_is_additive(self, coded):
        t0 = build_gap_table(CodingConfig(), coded)
        t3 = build_gap_table(CodingConfig(margin_db=3.0), coded)
        for b in range(1, 11):
            assert t3.gap_db(b) - t0.gap_db(b) == pytest.approx(3.0, abs=1e-12)

    def test_deterministic(self):
        a = build_gap_table(CodingConfig(), True)
        b = build_gap_table(CodingConfig(), True)
        assert a == b

    def test_b_max(self):
        assert build_gap_table(CodingConfig(), True, b_max=4).b_max == 4
        small = CodingConfig(trellis=TrellisCodeParams(max_constellation_points=256))
        assert build_gap_table(small, False).b_max == 8
        with pytest.raises(ConfigError):
            build_gap_table(CodingConfig(), True, b_max=0)

    def test_lookup_range(self):
        t = GapTable.constant(2.0, 4)
        with pytest.raises(DomainError):
            t.gap(5)
        with pytest.raises(ConfigError):
            GapTable(gaps=(1.0, -1.0))
        assert t.values[0] == 1.0 and t.values[4] == 2.0

    def test_config_validation(self):
        with pytest.raises(ConfigError):
            CodingConfig(target_ber=0.0)
        with pytest.raises(ConfigError):
            CodingConfig(c_factor=0.0)
        with pytest.raises(ConfigError):
            TrellisCodeParams(fundamental_gain_db=-1.0)
