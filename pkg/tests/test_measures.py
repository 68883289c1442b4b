import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from oracles import QOuter, central_grad, reference_components
from quantopt.measures import (
    SmoothingConfig,
    ba_component,
    bk_quant_component,
    bkreward_measure,
    conjugate_value_at_dual,
    cq_quant_component,
    cqreward_measure,
    dual_update,
    eval_ba,
    eval_bakld,
    eval_cqb,
    eval_kld,
    eval_negkld_objective,
    eval_nss,
    eval_nss_counts,
    eval_pseudo,
    eval_qmeasure,
    log_pred_neg_component,
    log_pred_pos_component,
    make_measure,
    negate,
    negkld_component,
    nss_component,
    qmeasure_outer,
    smooth_distribution,
)
from quantopt.rewards import ClassPrior

interior = st.floats(0.02, 0.98)
priors = st.floats(0.05, 0.95)


def concave_components(p, eps=0.01, beta=1.0):
    pr = ClassPrior(p)
    return [
        ba_component(),
        nss_component(pr),
        log_pred_pos_component(pr, eps),
        log_pred_neg_component(pr, eps),
        negkld_component(pr, eps),
        negate(cq_quant_component(pr)),
        negate(bk_quant_component(pr, eps)),
        qmeasure_outer(beta),
    ]


def test_smooth_distribution_examples():
    assert smooth_distribution((0.5, 0.5), 0.3) == (0.5, 0.5)
    a, b = smooth_distribution((1.0, 0.0), 0.1)
    assert a == pytest.approx(11 / 12, abs=1e-15) and b == pytest.approx(1 / 12, abs=1e-15)
    a, b = smooth_distribution((0.0, 1.0), 1e-12)
    assert 0 < a < 1e-11 and 0 < b < 1
    with pytest.raises(ValueError):
        smooth_distribution((0.5, 0.5), 0.0)


def test_kld_examples():
    cfg = SmoothingConfig(1 / 200)
    assert eval_kld((0.7, 0.3), (0.7, 0.3), cfg) == 0.0
    e = 1 / 200
    ps, qs = (1 + e) / (1 + 2 * e), e / (1 + 2 * e)
    expect = ps * math.log(ps / qs) + qs * math.log(qs / ps)
    assert eval_kld((1, 0), (0, 1), cfg) == pytest.approx(expect, rel=1e-12)
    assert eval_kld((1, 0), (0, 1), cfg) <= math.log(200) + 1
    with pytest.raises(ValueError):
        eval_kld((0.5, 0.6), (0.5, 0.5), cfg)
    assert SmoothingConfig.for_size(100).epsilon == 1 / 200


@given(p=st.floats(0, 1), eps=st.floats(1e-6, 0.5))
def test_kld_zero_on_identical(p, eps):
    assert eval_kld((p, 1 - p), (p, 1 - p), SmoothingConfig(eps)) == 0.0


def test_negkld_objective_examples():
    pr = ClassPrior(0.3)
    assert eval_negkld_objective(1, 1, pr) == pytest.approx(0.3 * math.log(0.3) + 0.7 * math.log(0.7), abs=1e-14)
    assert eval_negkld_objective(0, 0, pr) == pytest.approx(0.3 * math.log(0.7) + 0.7 * math.log(0.3), abs=1e-14)


def test_nss_ba_examples():
    assert eval_nss(1, 1, ClassPrior(0.2)) == 1.0
    assert eval_nss(0, 1, ClassPrior(0.5)) == 0.75
    pr = ClassPrior(0.25)
    # p(1-P) = n(1-N)
    assert eval_nss(0.4, 0.8, pr) == pytest.approx(1.0, abs=1e-15)
    assert (eval_ba(1, 1), eval_ba(0, 0), eval_ba(0.6, 0.8)) == (1.0, 0.0, pytest.approx(0.7))
    assert eval_nss_counts(fn=3, fp=3, p=0.3, size=100) == 1.0
    assert eval_nss_counts(fn=7, fp=0, p=0.3, size=100) == pytest.approx(1 - 0.01)


def test_qmeasure_examples():
    pr = ClassPrior(0.5)
    assert eval_qmeasure(1, 1, pr) == pytest.approx(1.0)
    # P=0, N=1, p=0.5: BA = 0.5 and NSS = 0.75
    assert eval_qmeasure(0, 1, pr, beta=1.0) == pytest.approx(2 * 0.5 * 0.75 / 1.25)
    assert qmeasure_outer(1.0).value(0.5, 1.0) == pytest.approx(2 / 3)


@given(v=st.floats(0.01, 1), beta=st.floats(0.1, 10))
def test_qmeasure_equal_arguments(v, beta):
    assert qmeasure_outer(beta).value(v, v) == pytest.approx(v, rel=1e-12)


@given(P=st.floats(0, 1), N=st.floats(0, 1), p=priors)
def test_bakld_reductions(P, N, p):
    pr = ClassPrior(p)
    assert eval_bakld(P, N, pr, 1.0) == eval_ba(P, N)
    assert eval_bakld(P, N, pr, 0.0) == eval_negkld_objective(P, N, pr)


def test_bakld_half_at_perfect():
    p = 0.3
    expect = 0.5 + 0.5 * (p * math.log(p) + (1 - p) * math.log(1 - p))
    assert eval_bakld(1, 1, ClassPrior(p), 0.5) == pytest.approx(expect, abs=1e-14)


def test_cqb_examples():
    assert (eval_cqb(3, 3), eval_cqb(4, 0), eval_cqb(5, 2)) == (0.0, 16.0, 21.0)
    with pytest.raises(ValueError):
        eval_cqb(-1, 0)


def test_pseudo_examples():
    pr = ClassPrior(0.5)
    assert eval_pseudo(1, 1, cqreward_measure(pr)) == pytest.approx(1.0)
    assert eval_pseudo(1, 1, bkreward_measure(pr, 0.01)) == pytest.approx(1.0, abs=1e-12)
    assert eval_pseudo(0.6, 0.8, cqreward_measure(pr)) == pytest.approx(0.7 / 1.01, rel=1e-12)


@given(P=interior, N=interior, p=priors)
def test_gradients_match_finite_differences(P, N, p):
    for c in concave_components(p):
        g = c.grad(P, N)
        fd = central_grad(c.value, P, N)
        assert g == pytest.approx(fd, abs=1e-5), c.name


@given(a=st.tuples(interior, interior), b=st.tuples(interior, interior), lam=st.floats(0, 1), p=priors)
def test_components_concave_on_segments(a, b, lam, p):
    for c in concave_components(p):
        m = (lam * a[0] + (1 - lam) * b[0], lam * a[1] + (1 - lam) * b[1])
        assert c.value(*m) >= lam * c.value(*a) + (1 - lam) * c.value(*b) - 1e-12, c.name


def test_outer_functions_nondecreasing():
    xs = np.linspace(0.01, 1.0, 60)
    for psi in (qmeasure_outer(0.5), qmeasure_outer(1.0), qmeasure_outer(3.0)):
        for x in xs:
            col = [psi.value(x, y) for y in xs]
            row = [psi.value(y, x) for y in xs]
            assert np.all(np.diff(col) >= -1e-15) and np.all(np.diff(row) >= -1e-15)
    for name in ("negkld", "bakld"):
        g = make_measure(name, ClassPrior(0.3), eps=0.01).psi.grad(0.2, 0.2)
        assert min(g) >= 0


@given(P=st.floats(0, 1), N=st.floats(0, 1), p=priors, eps=st.floats(1e-4, 0.1))
def test_pseudo_denominator_bounds(P, N, p, eps):
    pr = ClassPrior(p)
    for spec in (cqreward_measure(pr), bkreward_measure(pr, eps)):
        q = spec.pquant.value(P, N)
        assert spec.m - 1e-12 <= q <= spec.M + 1e-12
        if 0 < P < 1 and 0 < N < 1:
            assert spec.pclass.value(P, N) > 0


@given(P=st.floats(0, 1), N=st.floats(0, 1), v=st.floats(0.001, 1.5), p=priors)
def test_pseudo_level_sets(P, N, v, p):
    for spec in (cqreward_measure(ClassPrior(p)), bkreward_measure(ClassPrior(p), 0.01)):
        val = spec.pclass.value(P, N) - v * spec.pquant.value(P, N)
        assert (spec.value(P, N) >= v) == (val >= 0)


@given(r1=interior, r2=interior, q1=st.floats(0.01, 2), q2=st.floats(0.01, 2), p=priors, beta=st.floats(0.2, 5))
def test_duals_match_closed_forms(r1, r2, q1, q2, p, beta):
    pr = ClassPrior(p)
    n = 1 - p
    assert dual_update(make_measure("negkld", pr).psi, (q1, q2)) == (p, n)
    assert dual_update(ba_component(), (r1, r2)) == (0.5, 0.5)
    assert dual_update(make_measure("bakld", pr, C=0.3).psi, (q1, q2)) == (0.3, pytest.approx(0.7, abs=1e-15))
    z = q2 / (beta**2 * q1 + q2)
    g = dual_update(qmeasure_outer(beta), (q1, q2))
    assert g == pytest.approx(((1 + beta**2) * z * z, (1 + beta**2) * (1 - z) ** 2 / beta**2), abs=1e-12)
    # NSS in (FP mass, FN mass) coordinates is 2(z, -z), z = FN - FP
    fp, fn = n * (1 - r2), p * (1 - r1)
    z = fn - fp
    t_fp, t_fn = 2 * z, -2 * z
    gP, gN = dual_update(nss_component(pr), (r1, r2))
    assert gP == pytest.approx(t_fn * -p, abs=1e-12) and gN == pytest.approx(t_fp * -n, abs=1e-12)


def test_linear_conjugates_vanish():
    pr = ClassPrior(0.3)
    rng = np.random.default_rng(0)
    for x in rng.random((20, 2)):
        assert conjugate_value_at_dual(ba_component(), x) == pytest.approx(0.0, abs=1e-15)
        assert conjugate_value_at_dual(make_measure("negkld", pr).psi, x) == pytest.approx(0.0, abs=1e-15)


@pytest.mark.parametrize("p", [0.2, 0.5, 0.8])
def test_biconjugation_recovers_values(p):
    eps = 0.01
    ref = reference_components(p, eps)
    comps = {c.name: c for c in concave_components(p, eps)}
    rng = np.random.default_rng(int(p * 10))
    for x in rng.uniform(0.05, 0.95, size=(10, 2)):
        for name, o in ref.items():
            if name == "qmeasure_outer":
                continue
            u = o.ftl_argmin(x)
            inf_val = float(np.dot(u, x) - o.conj(u))
            assert inf_val == pytest.approx(comps[name].value(*x), abs=2e-3), name


def test_qmeasure_conjugate_feasible_set():
    q = QOuter(1.0)
    rng = np.random.default_rng(3)
    for x in rng.uniform(0.05, 1.0, size=(20, 2)):
        g = np.array(dual_update(qmeasure_outer(1.0), x))
        assert q.feasible(g)
        assert conjugate_value_at_dual(qmeasure_outer(1.0), x) == pytest.approx(0.0, abs=1e-12)
        # biconjugate: min over the feasible lattice of <u, x> recovers psi(x)
        u = q.ftl_argmin(x)
        assert float(u @ x) == pytest.approx(q.psi(*x), abs=2e-3 * x.sum())


def test_make_measure_rejections():
    with pytest.raises(ValueError, match="evaluation-only"):
        make_measure("cqb", ClassPrior(0.5))
    with pytest.raises(ValueError):
        make_measure("f1", ClassPrior(0.5))
    with pytest.raises(ValueError):
        make_measure("bakld", ClassPrior(0.5), C=1.5)
    with pytest.raises(ValueError):
        bkreward_measure(ClassPrior(0.5), 0.0)


def test_components_clamp_outside_domain():
    c = log_pred_pos_component(ClassPrior(0.5), 0.0)
    assert math.isfinite(c.value(-3.0, 7.0))
    assert c.value(-3.0, 7.0) == c.value(0.0, 1.0)
