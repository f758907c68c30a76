import io
import math
import threading

import numpy as np
import pytest

from nordenlift.errors import DomainError, IntegrationError, JetDivisionError
from nordenlift.scalarfn import (Constant, Derived, T, eval_jet, integrate_ode, jets_at, parse_expr,
                                 read_csv, restrict, sqrt, write_csv)
from nordenlift.scalarfn.jet import Jet

from conftest import central_difference


class TestGraph:
    def test_constant(self):
        assert (eval_jet(Constant(1.0), 0.0).value, eval_jet(Constant(1.0), 0.0).deriv) == (1.0, 0.0)
        assert Constant(1.0).kind == "constant"

    def test_kinds(self):
        assert parse_expr("t").kind == "expression"
        assert Derived("x", T * 2).kind == "derived-composite"

    def test_derivative_node(self):
        f = sqrt(1 + 2 * T)
        assert f.d(1.5) == pytest.approx(0.5)
        # second derivative: -(1+2t)^{-3/2}
        assert f.d.d(1.5) == pytest.approx(-1 / 8)

    def test_operators_against_fd(self):
        f = (T * T + 1) / (2 + T) - 3 * T ** 3 + T ** 0.5
        for t in (0.2, 0.6, 1.3):
            assert eval_jet(f, t).deriv == pytest.approx(central_difference(f, t), rel=1e-7)

    def test_domain_is_half_open(self):
        f = restrict(T, 1.0)
        f(0.999)
        with pytest.raises(DomainError):
            f(1.0)

    def test_derived_names_vanishing_denominator(self):
        f = Derived("ratio", 1 / (T - 0.5))
        with pytest.raises(JetDivisionError, match=r"ratio.*t=0\.5") as err:
            f(0.5)
        assert err.value.t == 0.5

    def test_jets_at_shares_memo(self):
        a = sqrt(1 + T)
        js = jets_at([a, a * a, a.d], 3.0)
        assert [j.value for j in js] == pytest.approx([2.0, 4.0, 0.25])

    def test_concurrent_evaluation(self):
        f = parse_expr("exp(t) * sqrt(1 + t^2)")
        expect = [f(t) for t in np.linspace(0, 1, 50)]
        out = [None] * 8

        def work(k):
            out[k] = [f(t) for t in np.linspace(0, 1, 50)]

        threads = [threading.Thread(target=work, args=(k,)) for k in range(8)]
        for th in threads:
            th.start()
        for th in threads:
            th.join()
        assert all(o == expect for o in out)


def exp_rhs(t, y):
    return [y[0]]


class TestOde:
    def test_exponential(self):
        (y,) = integrate_ode(exp_rhs, [1.0], 1.0, 1e-3)
        assert abs(y(1.0) - math.e) < 1e-10
        assert y.kind == "ode-table"

    def test_constant_solution(self):
        (y,) = integrate_ode(lambda t, s: [s[0] * 0.0], [5.0], 1.0, 0.1)
        for t in np.linspace(0, 1, 7):
            j = eval_jet(y, t)
            assert (j.value, j.deriv) == (5.0, 0.0)

    def test_derivative_channel_is_rhs(self):
        (y,) = integrate_ode(exp_rhs, [1.0], 1.0, 0.05)
        for t in (0.013, 0.51, 0.977):
            j = eval_jet(y, t)
            assert j.deriv == j.value

    def test_node_matches_stored_state(self):
        (y,) = integrate_ode(exp_rhs, [1.0], 1.0, 0.1)
        sol = y.solution
        for k in (0, 3, 10):
            assert y(sol.ts[k]) == sol.ys[k, 0]

    def test_higher_jets_by_taylor_recursion(self):
        (y,) = integrate_ode(exp_rhs, [1.0], 1.0, 1e-3)
        j = y.jet(0.4, 3)
        assert [j.derivative(k) for k in range(4)] == pytest.approx([math.exp(0.4)] * 4, rel=1e-9)

    def test_c1_consistency(self):
        (y,) = integrate_ode(lambda t, s: [Jet.variable(t, s[0].order) * s[0]], [1.0], 1.0, 0.01)
        for t in (0.21, 0.64):
            assert eval_jet(y, t).deriv == pytest.approx(central_difference(y, t, 1e-5), rel=1e-6)

    def test_fourth_order_interpolation(self):
        def worst(step):
            (y,) = integrate_ode(exp_rhs, [1.0], 1.0, step)
            mids = y.solution.ts[:-1] + step / 2
            return max(abs(y(t) - math.exp(t)) for t in mids)

        assert worst(0.02) / worst(0.01) >= 8.0

    def test_guard_sign_change(self):
        with pytest.raises(IntegrationError) as err:
            integrate_ode(exp_rhs, [1.0], 1.0, 0.01, guards=[lambda t, y: 0.4 - t])
        assert 0.39 <= err.value.t <= 0.41

    def test_nonfinite_rhs(self):
        def blowup(t, y):
            return [1.0 / (Jet.constant(0.5, y[0].order) - Jet.variable(t, y[0].order)) + y[0] * 0]

        with pytest.raises(IntegrationError, match="near t=0.5"):
            integrate_ode(blowup, [0.0], 1.0, 0.01)

    def test_last_node_is_evaluable(self):
        (y,) = integrate_ode(exp_rhs, [1.0], 0.5, 0.1)
        assert y(0.5) == pytest.approx(math.exp(0.5), rel=1e-6)

    def test_csv_round_trip(self):
        (y,) = integrate_ode(exp_rhs, [1.0], 1.0, 0.1, names=["y"])
        buf = io.StringIO()
        ts = np.linspace(0, 1, 5)
        write_csv({"y": y, "sq": T * T}, ts, buf)
        buf.seek(0)
        data = read_csv(buf)
        assert list(data) == ["t", "y", "y_deriv", "sq", "sq_deriv"]
        assert data["sq_deriv"] == pytest.approx(2 * ts)
        assert data["y"] == pytest.approx(data["y_deriv"])

    def test_bad_arguments(self):
        with pytest.raises(ValueError):
            integrate_ode(exp_rhs, [1.0], 1.0, 0.0)
        with pytest.raises(ValueError):
            integrate_ode(exp_rhs, [1.0], 1.0, 0.1, names=["a", "b"])
