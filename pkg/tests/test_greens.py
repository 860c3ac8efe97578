import math

import numpy as np
import pytest

from confode.confcalc import e0, h1_fast, special_field
from confode.fields import constant, from_callable
from confode.gains import make_pair
from confode.greens import (
    BVPSpec,
    DegenerateBVPError,
    apply_green,
    audit_green,
    green_cauchy,
    green_closed_form,
    green_periodic,
    green_phipsi,
    pi_star,
    solve_bvp,
)
from confode.solver import IVPSpec, SelfAdjointProblem, lx_residual, solve_ivp

ONE = constant(1.0, "1")
ZERO = constant(0.0, "0")


def sa_problem(pair, p, q, h, interval):
    return SelfAdjointProblem(pair, p, q, h, interval)


def branch_gap(G1, G2):
    return max(
        float(np.max(np.abs(G1.upper.values - G2.upper.values))),
        float(np.max(np.abs(G1.lower.values - G2.lower.values))),
    )


class TestBVPSpec:
    def test_kind_constructors(self):
        c = BVPSpec.conjugate(1.0, -2.0)
        assert (c.xi, c.beta, c.gamma, c.delta) == (1.0, 0.0, 1.0, 0.0)
        assert (c.A, c.B) == (1.0, -2.0)
        f = BVPSpec.focal()
        assert (f.xi, f.beta, f.gamma, f.delta) == (1.0, 0.0, 0.0, 1.0)
        assert BVPSpec.periodic().kind == "periodic"

    def test_zero_row_rejected(self):
        with pytest.raises(ValueError):
            BVPSpec(0.0, 0.0, 1.0, 0.0)
        with pytest.raises(ValueError):
            BVPSpec(1.0, 0.0, 0.0, 0.0)

    def test_kind_coefficients_must_match(self):
        with pytest.raises(ValueError):
            BVPSpec(1.0, 0.0, 0.0, 1.0, kind="conjugate")
        with pytest.raises(ValueError):
            BVPSpec(2.0, 0.0, 0.0, 1.0, kind="focal")


class TestSolveBVP:
    def test_classical_unit_forcing(self):
        # x'' = 1 with pinned ends comes out negative in the middle
        pair = make_pair("trig", 1.0)
        prob = sa_problem(pair, ONE, ZERO, ONE, (0.0, 1.0))
        x = solve_bvp(prob, BVPSpec.conjugate())
        for t in np.linspace(0.0, 1.0, 21):
            t = float(t)
            assert x.x_at(t) == pytest.approx((t * t - t) / 2.0, abs=1e-10)

    def test_neumann_type_is_degenerate(self):
        # both rows see only the derivative; the zero-rate exponential slips through
        pair = make_pair("power", 0.6, omega=1.5)
        p = from_callable(lambda t: 1.0 + 0.5 * t, lambda t: 0.5, "p")
        prob = sa_problem(pair, p, ZERO, ZERO, (0.0, 2.0))
        with pytest.raises(DegenerateBVPError) as err:
            solve_bvp(prob, BVPSpec(0.0, 1.0, 0.0, 1.0))
        assert "det" in str(err.value)
        assert err.value.determinant == pytest.approx(0.0, abs=1e-9)

    def test_conjugate_zero_potential_always_solvable(self):
        for family, kwargs, interval in [
            ("trig", {}, (0.0, 2.0)),
            ("time_power", {"omega": 1.5}, (0.5, 3.0)),
        ]:
            pair = make_pair(family, 0.5, **kwargs)
            p = from_callable(lambda t: 2.0 + math.sin(t), None, "p")
            h = from_callable(lambda t: math.cos(t), None, "h")
            prob = sa_problem(pair, p, ZERO, h, interval)
            x = solve_bvp(prob, BVPSpec.conjugate())
            assert abs(x.x_at(interval[0])) <= 1e-8
            assert abs(x.x_at(interval[1])) <= 1e-8

    def test_boundary_rows_hit_data(self):
        pair = make_pair("trig", 0.7)
        prob = sa_problem(pair, ONE, constant(-0.5), ONE, (0.0, 1.5))
        spec = BVPSpec(2.0, 1.0, 1.0, 3.0, A=0.7, B=-0.2)
        x = solve_bvp(prob, spec)
        assert 2.0 * x.x_at(0.0) - 1.0 * x.dax_at(0.0) == pytest.approx(0.7, abs=1e-8)
        assert 1.0 * x.x_at(1.5) + 3.0 * x.dax_at(1.5) == pytest.approx(-0.2, abs=1e-8)
        res = lx_residual(prob, x)
        assert max(abs(res(float(t))) for t in np.linspace(0.1, 1.4, 27)) <= 1e-4

    def test_matches_ivp_when_data_pins_it(self):
        # solve an IVP, read off its boundary data, ask the BVP for it back
        pair = make_pair("power", 0.8, omega=2.0)
        prob = sa_problem(pair, ONE, ONE, ZERO, (0.0, 1.0))
        ref = solve_ivp(prob, IVPSpec(0.0, 0.4, -0.3), 1.0 / 1024)
        spec = BVPSpec(1.0, 0.0, 1.0, 0.0, A=ref.x_at(0.0), B=ref.x_at(1.0))
        x = solve_bvp(prob, spec)
        assert max(abs(x.x_at(float(t)) - ref.x_at(float(t))) for t in np.linspace(0, 1, 33)) <= 1e-8

    def test_interval_validation(self):
        pair = make_pair("trig", 1.0)
        prob = sa_problem(pair, ONE, ZERO, ONE, (0.0, 1.0))
        with pytest.raises(ValueError):
            solve_bvp(prob, BVPSpec.conjugate(), a=-1.0, b=1.0)


class TestKernelConstructions:
    def test_cross_method_agreement_time_power(self):
        pair = make_pair("time_power", 0.5, omega=1.0)
        prob = sa_problem(pair, ONE, ZERO, ZERO, (1.0, 4.0))
        spec = BVPSpec.conjugate()
        Gp = green_phipsi(prob, spec)
        Gc = green_cauchy(prob, spec)
        Gf = green_closed_form(pair, ONE, 1.0, 4.0, "conjugate")
        assert branch_gap(Gp, Gc) <= 1e-6
        assert branch_gap(Gp, Gf) <= 1e-6

    def test_cross_method_agreement_with_potential(self):
        pair = make_pair("trig", 0.6)
        p = from_callable(lambda t: 1.5 + 0.4 * math.sin(t), None, "p")
        prob = sa_problem(pair, p, constant(-0.8), ZERO, (0.0, 2.0))
        spec = BVPSpec(1.0, 0.5, 2.0, 1.0)
        Gp = green_phipsi(prob, spec)
        Gc = green_cauchy(prob, spec)
        assert branch_gap(Gp, Gc) <= 1e-6

    def test_focal_closed_form(self):
        pair = make_pair("power", 0.5, omega=2.0)
        p = from_callable(lambda t: 1.0 + 0.25 * t, lambda t: 0.25, "p")
        prob = sa_problem(pair, p, ZERO, ZERO, (0.0, 2.0))
        Gp = green_phipsi(prob, BVPSpec.focal())
        Gf = green_closed_form(pair, p, 0.0, 2.0, "focal")
        assert branch_gap(Gp, Gf) <= 1e-6

    def test_diagonal_continuity(self):
        pair = make_pair("trig", 0.5)
        prob = sa_problem(pair, ONE, ONE, ZERO, (0.0, 2.0))
        G = green_cauchy(prob, BVPSpec.conjugate())
        gaps = [abs(G.upper.at(s, s) - G.lower.at(s, s)) for s in G.s_grid]
        assert max(gaps) <= 1e-8

    def test_v_branch_solves_homogeneous_columnwise(self):
        pair = make_pair("trig", 0.5)
        p = from_callable(lambda t: 1.0 + 0.2 * t, lambda t: 0.2, "p")
        prob = sa_problem(pair, p, constant(0.5), ZERO, (0.0, 2.0))
        G = green_cauchy(prob, BVPSpec.conjugate())
        tg = G.t_grid
        t0 = float(tg[0])
        for j in (13, 64, 101):
            xs = G.lower.values[:, j]
            dxs = G.lower_dt[:, j]
            dax0 = float(pair.kappa1(t0) * xs[0] + pair.kappa0(t0) * dxs[0])
            ref = solve_ivp(prob.homogeneous, IVPSpec(t0, float(xs[0]), dax0), 2.0 / 1024)
            sup = max(abs(ref.x_at(float(t)) - x) for t, x in zip(tg, xs))
            assert sup <= 1e-6

    def test_v_branch_operator_residual(self):
        from scipy.interpolate import CubicSpline

        from confode.confcalc import dalpha

        pair = make_pair("trig", 0.5)
        prob = sa_problem(pair, ONE, constant(0.5), ZERO, (0.0, 2.0))
        G = green_cauchy(prob, BVPSpec.conjugate())
        tg = G.t_grid
        j = 40
        xsp = CubicSpline(tg, G.lower.values[:, j])
        dxsp = CubicSpline(tg, G.lower_dt[:, j])
        dax = from_callable(
            lambda t: pair.kappa1(t) * float(xsp(t)) + pair.kappa0(t) * float(dxsp(t)),
            None,
            "Dv",
        )
        worst = max(
            abs(dalpha(pair, dax, float(t)) + 0.5 * float(xsp(float(t))))
            for t in np.linspace(0.1, 1.9, 25)
        )
        assert worst <= 1e-4

    def test_kernel_boundary_rows(self):
        # u columns satisfy the left row, v columns the right row
        pair = make_pair("trig", 0.6)
        prob = sa_problem(pair, ONE, constant(-0.3), ZERO, (0.0, 2.0))
        spec = BVPSpec(1.0, 2.0, 3.0, 1.0)
        G = green_cauchy(prob, spec, t_grid=np.linspace(0.0, 2.0, 257))
        a_i, b_i = 0, -1
        # each row combines x and Dx; rebuild Dx from the slope arrays
        k1a, k0a = pair.kappa1(0.0), pair.kappa0(0.0)
        k1b, k0b = pair.kappa1(2.0), pair.kappa0(2.0)
        for j in (20, 70, 120):
            dax_a = k1a * G.upper.values[a_i, j] + k0a * G.upper_dt[a_i, j]
            dax_b = k1b * G.lower.values[b_i, j] + k0b * G.lower_dt[b_i, j]
            assert spec.xi * G.upper.values[a_i, j] - spec.beta * dax_a == pytest.approx(0.0, abs=1e-8)
            assert spec.gamma * G.lower.values[b_i, j] + spec.delta * dax_b == pytest.approx(0.0, abs=1e-8)

    def test_phipsi_needs_separated_conditions(self):
        pair = make_pair("trig", 1.0)
        prob = sa_problem(pair, ONE, ZERO, ZERO, (0.0, 1.0))
        with pytest.raises(ValueError):
            green_phipsi(prob, BVPSpec.periodic())

    def test_degenerate_kernel_rejected(self):
        pair = make_pair("trig", 1.0)
        prob = sa_problem(pair, ONE, ZERO, ZERO, (0.0, 1.0))
        with pytest.raises(DegenerateBVPError):
            green_cauchy(prob, BVPSpec(0.0, 1.0, 0.0, 1.0))


class TestSymmetryAndSpotValues:
    def test_weighted_symmetry_at_random_points(self):
        rng = np.random.default_rng(11)
        pair = make_pair("power", 0.7, omega=1.5)
        p = from_callable(lambda t: 1.0 + 0.3 * t, lambda t: 0.3, "p")
        prob = sa_problem(pair, p, constant(-0.4), ZERO, (0.0, 2.0))
        G = green_phipsi(prob, BVPSpec.conjugate())
        for _ in range(25):
            t, s = rng.uniform(0.0, 2.0, size=2)
            lhs = e0(pair, float(s), float(t)) * G.at(float(t), float(s))
            rhs = e0(pair, float(t), float(s)) * G.at(float(s), float(t))
            assert abs(lhs - rhs) <= 1e-6

    def test_time_power_conjugate_spot_value(self):
        # hand evaluation of the closed display at alpha = 1/2, omega = 1:
        # -(sqrt2-1)(2-sqrt3)/0.25 * e^{+1}
        pair = make_pair("time_power", 0.5, omega=1.0)
        G = green_closed_form(pair, ONE, 1.0, 4.0, "conjugate")
        want = -math.exp(1.0) * (math.sqrt(2.0) - 1.0) * (2.0 - math.sqrt(3.0)) / 0.25
        assert want == pytest.approx(-1.2067887151, abs=1e-9)
        assert G.at(2.0, 3.0) == pytest.approx(want, abs=1e-9)
        # generic constructor agrees off-grid through its exact profile
        prob = sa_problem(pair, ONE, ZERO, ZERO, (1.0, 4.0))
        Gp = green_phipsi(prob, BVPSpec.conjugate())
        assert Gp.at(2.0, 3.0) == pytest.approx(want, abs=1e-6)

    def test_time_power_closed_display(self):
        # the kernel built from quadratures must equal the explicit power display
        alpha, om, a, b = 0.5, 1.0, 1.0, 4.0
        pair = make_pair("time_power", alpha, omega=om)
        G = green_closed_form(pair, ONE, a, b, "conjugate")
        rng = np.random.default_rng(3)
        for _ in range(20):
            t, s = rng.uniform(a, b, size=2)
            lo, hi = min(t, s), max(t, s)
            want = (
                -math.exp(-((1 - alpha) / (2 * alpha**2)) * om ** (2 * alpha - 1) * (t ** (2 * alpha) - s ** (2 * alpha)))
                * (lo**alpha - a**alpha)
                * (b**alpha - hi**alpha)
                / (alpha**2 * om ** (1 - alpha) * (b**alpha - a**alpha))
            )
            assert G.at(float(t), float(s)) == pytest.approx(want, rel=1e-8, abs=1e-10)

    def test_special_rate_collapses_to_straight_line_kernel(self):
        # with 1/p equal to the measure density the kernel loses its quadratures
        pair = make_pair("trig", 0.5)
        a, b = 0.0, 2.0
        p = from_callable(lambda t: 1.0 / pair.kappa0(t), None, "1/kappa0")
        G = green_closed_form(pair, p, a, b, "conjugate")
        rng = np.random.default_rng(7)
        for _ in range(20):
            t, s = rng.uniform(a, b, size=2)
            lo, hi = min(t, s), max(t, s)
            want = -e0(pair, float(t), float(s)) * (lo - a) * (b - hi) / (b - a)
            assert G.at(float(t), float(s)) == pytest.approx(want, rel=1e-8, abs=1e-10)

    def test_classical_conjugate_kernel(self):
        pair = make_pair("trig", 1.0)
        G = green_closed_form(pair, ONE, 0.0, 1.0, "conjugate")
        for t, s in [(0.25, 0.75), (0.6, 0.3), (0.5, 0.5)]:
            lo, hi = min(t, s), max(t, s)
            assert G.at(t, s) == pytest.approx(-lo * (1.0 - hi), abs=1e-10)


class TestApplyGreen:
    def test_matches_direct_solve(self):
        pair = make_pair("trig", 0.6)
        p = from_callable(lambda t: 1.0 + 0.2 * t, lambda t: 0.2, "p")
        h = from_callable(lambda t: math.sin(2.0 * t) + 0.5, None, "h")
        prob = sa_problem(pair, p, constant(-0.5), h, (0.0, 2.0))
        spec = BVPSpec.conjugate()
        G = green_cauchy(prob, spec)
        got = apply_green(G, pair, h)
        ref = solve_bvp(prob, spec)
        sup = max(abs(got.x_at(float(t)) - ref.x_at(float(t))) for t in G.t_grid)
        assert sup <= 1e-4
        dsup = max(abs(got.dax_at(float(t)) - ref.dax_at(float(t))) for t in G.t_grid)
        assert dsup <= 1e-4

    def test_profile_route_matches_direct_solve(self):
        pair = make_pair("power", 0.8, omega=1.2)
        h = from_callable(lambda t: math.cos(t), None, "h")
        prob = sa_problem(pair, ONE, constant(0.4), h, (0.0, 1.5))
        spec = BVPSpec.focal()
        G = green_phipsi(prob, spec)
        got = apply_green(G, pair, h)
        ref = solve_bvp(prob, spec)
        sup = max(abs(got.x_at(float(t)) - ref.x_at(float(t))) for t in G.t_grid[::8])
        assert sup <= 1e-4

    def test_homogeneous_boundary_rows_hold(self):
        pair = make_pair("trig", 0.5)
        h = from_callable(lambda t: 1.0 + t, lambda t: 1.0, "h")
        prob = sa_problem(pair, ONE, constant(-0.2), h, (0.0, 1.5))
        spec = BVPSpec(1.0, 1.0, 1.0, 1.0)
        G = green_cauchy(prob, spec)
        x = apply_green(G, pair, h)
        assert x.x_at(0.0) - x.dax_at(0.0) == pytest.approx(0.0, abs=1e-6)
        assert x.x_at(1.5) + x.dax_at(1.5) == pytest.approx(0.0, abs=1e-6)

    def test_zero_forcing_gives_zero(self):
        pair = make_pair("trig", 0.5)
        prob = sa_problem(pair, ONE, ONE, ZERO, (0.0, 2.0))
        G = green_cauchy(prob, BVPSpec.conjugate())
        x = apply_green(G, pair, ZERO)
        assert float(np.max(np.abs(x.x))) == 0.0


class TestAudit:
    def make_kernel(self):
        pair = make_pair("trig", 0.5)
        prob = sa_problem(pair, ONE, ZERO, ZERO, (0.0, 2.0))
        return pair, prob, green_cauchy(prob, BVPSpec.conjugate())

    def test_symmetry_and_negativity(self):
        pair, prob, G = self.make_kernel()
        rep = audit_green(G, prob, BVPSpec.conjugate())
        assert rep.symmetry_residual <= 1e-6
        assert rep.interior_negative is True
        assert rep.comparison_ok is True
        assert rep.equality_exact is True

    def test_focal_kind_skips_sign_checks(self):
        pair = make_pair("trig", 0.5)
        prob = sa_problem(pair, ONE, ZERO, ZERO, (0.0, 2.0))
        G = green_cauchy(prob, BVPSpec.focal())
        rep = audit_green(G, prob, BVPSpec.focal())
        assert rep.interior_negative is None
        assert rep.comparison_ok is None
        assert rep.symmetry_residual <= 1e-6

    def test_report_renders(self):
        pair, prob, G = self.make_kernel()
        rep = audit_green(G, prob, BVPSpec.conjugate())
        text = "\n".join(rep.lines())
        assert "symmetry residual" in text
        assert "negative" in text


@pytest.fixture(scope="module")
def trig_half():
    # the kernel only sees the homogeneous part, so one build serves
    # several tests
    pair = make_pair("trig", 0.5)
    ps = pi_star(pair, math.pi)
    prob = sa_problem(pair, ONE, ONE, ZERO, (0.0, ps))
    return pair, ps, green_periodic(prob)


class TestPeriodic:
    def test_uniqueness_gate(self):
        # a full measure-length of 2*pi makes the homogeneous problem periodic
        pair = make_pair("trig", 1.0)
        prob = sa_problem(pair, ONE, ONE, ZERO, (0.0, 2.0 * math.pi))
        with pytest.raises(DegenerateBVPError):
            green_periodic(prob)

    def test_branch_link_property(self, trig_half):
        pair, ps, G = trig_half
        w = e0(pair, 0.0, ps)
        k1a, k0a = pair.kappa1(0.0), pair.kappa0(0.0)
        k1b, k0b = pair.kappa1(ps), pair.kappa0(ps)
        for j in (10, 60, 110):
            ua = G.upper.values[0, j]
            vb = G.lower.values[-1, j]
            assert ua == pytest.approx(w * vb, abs=1e-7)
            dua = k1a * ua + k0a * G.upper_dt[0, j]
            dvb = k1b * vb + k0b * G.lower_dt[-1, j]
            assert dua == pytest.approx(w * dvb, abs=1e-7)

    @pytest.mark.parametrize("family,kwargs", [("trig", {}), ("power", {"omega": 1.5})])
    @pytest.mark.parametrize("alpha", [0.3, 0.5, 0.8])
    def test_worked_example(self, family, kwargs, alpha):
        pair = make_pair(family, alpha, **kwargs)
        ps = pi_star(pair, math.pi)
        assert h1_fast(pair, ps, 0.0) == pytest.approx(math.pi, abs=1e-10)
        h = 3.0 * special_field(pair, "sin_a", 2.0, 0.0)
        prob = sa_problem(pair, ONE, ONE, h, (0.0, ps))
        G = green_periodic(prob)
        x = apply_green(G, pair, h)
        want = special_field(pair, "sin_a", 2.0, 0.0)
        sup = max(abs(x.x_at(float(t)) + want(float(t))) for t in G.t_grid)
        assert sup <= 1e-4

    def test_worked_example_kernel_branches(self, trig_half):
        # both kernel branches are half sine profiles of the point spread
        pair, ps, G = trig_half
        tg, sg = G.t_grid, G.s_grid
        for i, j in [(10, 70), (40, 120), (90, 30), (64, 64), (120, 5)]:
            t, s = float(tg[i]), float(sg[j])
            spread = h1_fast(pair, t, 0.0) - h1_fast(pair, s, 0.0)
            half_sine = 0.5 * e0(pair, t, s) * math.sin(spread)
            node = G.upper.values[i, j] if i <= j else G.lower.values[i, j]
            want = -half_sine if i <= j else half_sine
            assert node == pytest.approx(want, abs=1e-6)

    def test_output_satisfies_weighted_periodicity(self):
        pair = make_pair("power", 0.5, omega=2.0)
        ps = pi_star(pair, math.pi)
        h = from_callable(lambda t: 1.0 + math.sin(3.0 * t), None, "h")
        prob = sa_problem(pair, ONE, ONE, h, (0.0, ps))
        G = green_periodic(prob)
        x = apply_green(G, pair, h)
        w = e0(pair, 0.0, ps)
        assert x.x_at(0.0) == pytest.approx(w * x.x_at(ps), abs=1e-6)
        assert x.dax_at(0.0) == pytest.approx(w * x.dax_at(ps), abs=1e-6)

    def test_zero_forcing(self, trig_half):
        pair, ps, G = trig_half
        x = apply_green(G, pair, ZERO)
        assert float(np.max(np.abs(x.x))) == 0.0


class TestPiStar:
    def test_classical(self):
        pair = make_pair("trig", 1.0)
        assert pi_star(pair, math.pi) == pytest.approx(math.pi, abs=1e-10)

    def test_trig_half(self):
        pair = make_pair("trig", 0.5)
        assert pi_star(pair, math.pi) == pytest.approx(math.pi / math.sqrt(2.0), abs=1e-10)

    def test_time_power_closed_form(self):
        pair = make_pair("time_power", 0.5, omega=1.0)
        assert pi_star(pair, math.pi) == pytest.approx((math.pi / 4.0) ** 2, abs=1e-10)

    def test_unreachable_target(self):
        pair = make_pair("trig", 0.5)
        with pytest.raises(ValueError):
            pi_star(pair, -1.0)
