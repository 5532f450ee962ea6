import json

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from embsplit.estgen import verify_order
from embsplit.opalg import Family, Role
from embsplit.problems import harmonic_flows, kepler_flows, kepler_init
from embsplit.schemes import (
    METHOD_ADJOINT_ALPHAS,
    PRK6_A,
    PRK6_B,
    RKN6_A,
    RKN6_B,
    SUZUKI_ALPHAS,
    catalog,
    doubled_triple_jump,
    get_method,
    load_scheme_file,
    method_to_dict,
    methodadjoint_from_splitting,
    methodadjoint_scheme,
    replicate_halved,
    save_scheme_file,
    scheme_from_dict,
    splitting_from_methodadjoint,
    splitting_from_ss,
    splitting_scheme,
    ss_scheme,
)
from embsplit.stepper import step_with_stages

EXPECTED = {
    "SS5-4(3)": (4, (3,), 5),
    "SS7-4(3)": (4, (3,), 7),
    "SS7-6(4)": (6, (4,), 7),
    "SS11-6(5)": (6, (5,), 11),
    "SS17-8(5)(3)": (8, (5, 3), 17),
    "MA6-4(3)": (4, (3,), 12),
    "PRK6-4(3)": (4, (3,), 13),
    "RKN6-4(3)": (4, (3,), 13),
}


def test_catalog_contents():
    assert [m.name for m in catalog()] == list(EXPECTED)
    for m in catalog():
        order, est, stages = EXPECTED[m.name]
        assert (m.main_order, m.estimator_orders, m.n_stages) == (order, est, stages)
        assert m.symmetric


@pytest.mark.parametrize("name", list(EXPECTED))
def test_reference_weights_reproduced(name):
    m = get_method(name)
    for est, ref in zip(m.estimators, m.reference_weights):
        if ref is not None:
            np.testing.assert_allclose(est.w, ref, atol=1e-9)


def test_unknown_method():
    with pytest.raises(KeyError):
        get_method("SS99")


def test_splitting_catalog_coefficients():
    prk = get_method("PRK6-4(3)")
    assert prk.scheme.stages[0] == (Role.FLOW_B, pytest.approx(0.07920369643119565))
    assert prk.scheme.stages[1] == (Role.FLOW_A, pytest.approx(0.209515106613361))
    rkn = get_method("RKN6-4(3)")
    assert rkn.estimators[0].w[2] == pytest.approx(0.43541552923952936004, abs=1e-9)
    assert rkn.estimators[0].w[4] == pytest.approx(-0.17978889668391821731, abs=1e-9)


# -- conversions ------------------------------------------------------------


def test_methodadjoint_to_rkn():
    a, b = splitting_from_methodadjoint(METHOD_ADJOINT_ALPHAS)
    al = METHOD_ADJOINT_ALPHAS
    assert a[0] == pytest.approx(al[0] + al[1], abs=1e-15)
    assert b[1] == pytest.approx(al[1] + al[2], abs=1e-15)
    np.testing.assert_allclose(a, RKN6_A, atol=1e-12)
    np.testing.assert_allclose(b, RKN6_B, atol=1e-12)


def test_methodadjoint_roundtrip():
    a, b = splitting_from_methodadjoint(METHOD_ADJOINT_ALPHAS)
    np.testing.assert_allclose(methodadjoint_from_splitting(a, b), METHOD_ADJOINT_ALPHAS, atol=1e-13)
    al = methodadjoint_from_splitting(RKN6_A, RKN6_B, tol=1e-11)
    np.testing.assert_allclose(al, METHOD_ADJOINT_ALPHAS, atol=1e-12)


@settings(max_examples=50, deadline=None)
@given(st.lists(st.floats(-2, 2, allow_nan=False), min_size=2, max_size=10).filter(lambda x: len(x) % 2 == 0))
def test_methodadjoint_roundtrip_random(alphas):
    a, b = splitting_from_methodadjoint(alphas)
    back = methodadjoint_from_splitting(a, b, tol=1e-9)
    np.testing.assert_allclose(back, alphas, atol=1e-12)


def test_strang_conversions():
    a, b = splitting_from_methodadjoint([0.5, 0.5])
    assert a == [1.0] and b == [0.5, 0.5]
    assert methodadjoint_from_splitting([1.0], [0.5, 0.5]) == [0.5, 0.5]


def test_inverse_rejects_bad_sums():
    with pytest.raises(ValueError):
        methodadjoint_from_splitting([1.0], [0.5, 0.6])
    with pytest.raises(ValueError):
        methodadjoint_from_splitting([1.0, 0.0], [0.5, 0.5])


def test_methodadjoint_and_splitting_share_the_map():
    ma = get_method("MA6-4(3)")
    a, b = splitting_from_methodadjoint(METHOD_ADJOINT_ALPHAS)
    sp = splitting_scheme(a, b, 4)
    flows = kepler_flows()
    x0 = kepler_init(0.3).vector
    np.testing.assert_allclose(
        step_with_stages(ma, flows, x0, 0.1).x_next, step_with_stages(sp, flows, x0, 0.1).x_next, atol=1e-14
    )


def test_splitting_from_ss_suzuki():
    a, b = splitting_from_ss(SUZUKI_ALPHAS, "BAB")
    sch = splitting_scheme(a, b, 4)
    assert sch.n_stages == 11
    assert b[0] == pytest.approx(SUZUKI_ALPHAS[0] / 2)
    assert b[-1] == pytest.approx(SUZUKI_ALPHAS[-1] / 2)
    ss = ss_scheme(SUZUKI_ALPHAS, 4)
    assert verify_order(sch).main_order == verify_order(ss).main_order == 4


def test_splitting_from_ss_single_stage_is_strang():
    assert splitting_from_ss([1.0], "BAB") == ([1.0], [0.5, 0.5])
    assert splitting_from_ss([1.0], "ABA") == ([0.5, 0.5], [1.0])
    with pytest.raises(ValueError):
        splitting_from_ss([1.0], "AAB")


@pytest.mark.parametrize("variant", ["BAB", "ABA"])
def test_splitting_from_ss_same_step(variant):
    flows = harmonic_flows(variant)
    x0 = np.array([0.3, -1.1])
    a, b = splitting_from_ss(SUZUKI_ALPHAS, variant)
    x_ss = step_with_stages(ss_scheme(SUZUKI_ALPHAS, 4), flows, x0, 0.2).x_next
    x_sp = step_with_stages(splitting_scheme(a, b, 4), flows, x0, 0.2).x_next
    np.testing.assert_allclose(x_ss, x_sp, atol=1e-14)


def test_replicate_halved():
    a1 = 1 / (2 - 2 ** (1 / 3))
    base = ss_scheme((a1, 1 - 2 * a1, a1), 4)
    sch = replicate_halved(base, 2)
    assert sch.n_stages == 6
    assert sum(sch.coefficients) == pytest.approx(1.0, abs=1e-14)
    flows = kepler_flows()
    x0 = kepler_init(0.5).vector
    h = 0.05
    once = step_with_stages(sch, flows, x0, h).x_next
    twice = step_with_stages(base, flows, step_with_stages(base, flows, x0, h / 2).x_next, h / 2).x_next
    np.testing.assert_allclose(once, twice, atol=1e-15)
    with pytest.raises(ValueError):
        replicate_halved(base, 1)
    with pytest.raises(ValueError):
        replicate_halved(get_method("PRK6-4(3)").scheme)


def test_doubled_triple_jump_estimator():
    m = doubled_triple_jump()
    a1 = 1 / (2 - 2 ** (1 / 3))
    a2 = 1 - 2 * a1
    assert m.estimator_orders == (3,)
    assert verify_order(m.scheme, list(m.estimators)).estimator_orders[0] >= 3
    w = m.estimators[0].w
    assert w[3] == 0.0
    assert w[1] == pytest.approx((1 - a1**2) / a2, abs=1e-12)
    np.testing.assert_allclose(w, w[[0, 5, 4, 3, 2, 1]], atol=1e-12)


def test_palindromes():
    for m in catalog():
        assert m.scheme.is_time_symmetric(1e-12), m.name
    assert not ss_scheme([0.2, 0.8], 2).is_palindromic()
    ma = methodadjoint_scheme(METHOD_ADJOINT_ALPHAS, 4)
    assert ma.is_time_symmetric()


def test_splitting_lengths_must_differ_by_one():
    with pytest.raises(ValueError):
        splitting_scheme([0.5, 0.5], [0.5, 0.5], 2)
    assert splitting_scheme(PRK6_A, PRK6_B, 4).n_stages == 13


# -- scheme files -----------------------------------------------------------


@pytest.mark.parametrize("name", list(EXPECTED))
def test_scheme_file_roundtrip(tmp_path, name):
    m = get_method(name)
    path = tmp_path / "scheme.json"
    save_scheme_file(path, m)
    scheme, recipes, stored_name = load_scheme_file(path)
    assert stored_name == name
    assert scheme == m.scheme
    assert [(r.order, r.symmetry, r.pins) for r in recipes] == [(r.order, r.symmetry, r.pins) for r in m.recipes]
    json.loads(path.read_text(encoding="utf-8"))


def test_scheme_file_missing_field():
    d = method_to_dict(get_method("SS5-4(3)"))
    del d["stages"]
    with pytest.raises(ValueError):
        scheme_from_dict(d)


def test_scheme_file_defaults_sign():
    d = {
        "family": "SS",
        "declared_order": 4,
        "stages": [{"role": "S2", "coeff": c} for c in SUZUKI_ALPHAS],
        "estimators": [{"order": 3, "symmetry": [[1, 4], [2, 3]]}],
    }
    scheme, recipes, name = scheme_from_dict(d)
    assert scheme.family is Family.SS and name is None
    assert recipes[0].symmetry == ((1, 4, 1), (2, 3, 1))
