import inspect

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st

from gammakernels import Regime, SamplingExhaustedError
from gammakernels.errors import PoleProximityError
from gammakernels.gamma import hyper_s, s_fn
from gammakernels.verify import reduced as rd
from gammakernels.verify import suites
from gammakernels.verify.reports import (
    INEQUALITY,
    RECORD,
    IdentityReport,
    SubCheck,
    rel_error,
)
from gammakernels.verify.residues import PoleCatalog, residue_probe
from gammakernels.verify.sampling import SamplePlan, collect
from gammakernels.verify.suites import (
    REGISTRY,
    SuiteContext,
    check_kernel_identity,
    check_unconstrained_failure,
    raid_sides,
    run_all,
)

SMALL = SuiteContext(n_points=8)


# ---------------------------------------------------------------------------
# residues


def test_residue_probe_simple_pole():
    assert abs(residue_probe(lambda z: 1 / z, 0.0, 0.3) - 1) < 1e-14
    assert abs(residue_probe(lambda z: z**2, 0.4j, 0.3)) < 1e-14


def test_residue_probe_hyperbolic_s(params):
    res = residue_probe(lambda z: 1 / hyper_s(params.a_plus, z), 0.0, 0.2)
    assert abs(res - params.a_plus / np.pi) < 1e-12


def test_residue_probe_elliptic_s(params):
    h = 1e-5
    deriv = (s_fn(params, 1, h) - s_fn(params, 1, -h)) / (2 * h)
    res = residue_probe(lambda z: 1 / np.asarray(s_fn(params, 1, z)), 0.0, 0.1)
    assert abs(res * deriv - 1) < 1e-8


def test_pole_catalog_entries(params):
    cat = PoleCatalog.a2_elliptic(params)
    assert len(cat.w_independent_poles) == 6 and len(cat.w_dependent_poles) == 18
    config = {"v2": 0.1 + 0.02j, "w": np.array([0.2, -0.1, -0.1]), "z": np.array([0.3, 0.0, -0.3])}
    poles = cat.all_poles(config)
    assert poles[0] == config["v2"] and poles[1] == -2 * config["v2"]
    assert cat.spacing(poles[0], config) > 0
    a3 = PoleCatalog.a3_hyperbolic(params)
    assert a3.periods == (1j * params.a_plus,)
    assert len(a3.w_dependent_poles) == 16


# ---------------------------------------------------------------------------
# sampling


def test_sample_plan_deterministic(params):
    plan = SamplePlan.default(Regime.ELLIPTIC, params, n_points=5)
    a = plan.vector(plan.rng("x", 3), 4)
    b = plan.vector(plan.rng("x", 3), 4)
    assert np.array_equal(a, b)
    assert abs(a.sum()) < 1e-15
    assert not np.array_equal(a, plan.vector(plan.rng("y", 3), 4))
    assert np.all(np.abs(a[:3].real) <= np.pi / 4)


def test_sample_plan_validation():
    with pytest.raises(ValueError):
        SamplePlan(n_points=0)
    with pytest.raises(ValueError):
        SamplePlan(real_window=(1.0, -1.0))
    with pytest.raises(ValueError):
        SamplePlan(reject_margin=0.0)


def test_collect_redraws_rejected_points(cfg):
    plan = SamplePlan(n_points=6)

    def evaluate(pts, cfg):
        if np.any(pts.real > 0.5):
            raise PoleProximityError("too close")
        return (pts[:, 0], pts[:, 0])

    pts, (lhs, rhs) = collect(plan, "redraw", lambda g: plan.coords(g, 1), evaluate, cfg)
    assert pts.shape == (6, 1) and np.all(pts.real <= 0.5)
    assert np.array_equal(lhs, pts[:, 0])


def test_collect_exhaustion(cfg):
    plan = SamplePlan(n_points=2)

    def evaluate(pts, cfg):
        raise PoleProximityError("always")

    with pytest.raises(SamplingExhaustedError):
        collect(plan, "never", lambda g: plan.coords(g, 1), evaluate, cfg)


# ---------------------------------------------------------------------------
# reports


finite = st.complex_numbers(max_magnitude=1e6, min_magnitude=1e-6, allow_nan=False, allow_infinity=False)


@given(finite, finite)
def test_rel_error_symmetric_and_scale_free(a, b):
    e = rel_error(a, b)
    assert e == rel_error(b, a)
    assert 0 <= e <= 1
    assert abs(rel_error(a * 1e6, b * 1e6) - e) <= 1e-12


def test_subcheck_modes():
    pts = np.zeros((20, 1))
    ident = SubCheck("id", 1e-8, pts, np.ones(20), np.ones(20) * (1 + 1e-10), rel_error(1, 1 + 1e-10) * np.ones(20))
    assert ident.passed
    errs = np.full(20, 0.5)
    errs[0] = 0.0
    ineq = SubCheck("ineq", 1e-3, pts, np.ones(20), np.ones(20), errs, INEQUALITY)
    assert ineq.fraction_above == 0.95 and ineq.passed and ineq.worst_index == 0
    errs[1] = 0.0
    assert not SubCheck("ineq", 1e-3, pts, np.ones(20), np.ones(20), errs, INEQUALITY).passed
    rec = SubCheck("rec", 1e-8, pts, np.ones(20), -np.ones(20), np.ones(20), RECORD)
    assert rec.passed
    nan = SubCheck("nan", 1e-8, pts, np.ones(20), np.ones(20), np.full(20, np.nan))
    assert not nan.passed
    with pytest.raises(ValueError):
        SubCheck("bad", 1e-8, pts, np.ones(20), np.ones(20), np.zeros(20), "other")


def test_report_verdict():
    pts = np.zeros((3, 1))
    good = SubCheck.compare("good", 1e-8, pts, np.ones(3), np.ones(3))
    bad = SubCheck.compare("bad", 1e-8, pts, np.ones(3), 2 * np.ones(3))
    rec = SubCheck.compare("rec", 1e-8, pts, np.ones(3), 3 * np.ones(3), RECORD)
    assert IdentityReport("s", {}, 42, 3, [good, rec]).verdict == "PASS"
    report = IdentityReport("s", {}, 42, 3, [good, bad])
    assert report.verdict == "FAIL" and report.binding is bad
    assert IdentityReport("s", {}, 42, 0, []).verdict == "FAIL"
    assert IdentityReport("s", {}, 42, 3, [good], error="boom").verdict == "FAIL"
    d = report.to_dict()
    assert d["subchecks"][1]["verdict"] == "FAIL" and len(d["subchecks"][0]["points"]) == 3


# ---------------------------------------------------------------------------
# suites


def test_check_signatures():
    for name, fn in inspect.getmembers(suites, inspect.isfunction):
        if name.startswith("check_"):
            sig = inspect.signature(fn)
            for arg in ("plan", "params", "cfg", "ctx"):
                assert arg in sig.parameters, (name, arg)
            assert sig.parameters["ctx"].kind is inspect.Parameter.KEYWORD_ONLY


def test_kernel_identity_with_explicit_plan(params, cfg):
    plan = SamplePlan.default(Regime.ELLIPTIC, params, n_points=6, rng_seed=3)
    report = check_kernel_identity("A2", Regime.ELLIPTIC, plan, params, cfg)
    assert report.verdict == "PASS" and report.seed == 3 and report.n_points == 6
    assert report.max_rel_error < 1e-8


def test_constrained_control_fails_certification(params):
    plan = SamplePlan.default(Regime.ELLIPTIC, params, n_points=8, constrained=True)
    report = check_unconstrained_failure("A2", Regime.ELLIPTIC, plan, params)
    assert report.verdict == "FAIL"
    assert report.metadata["constrained_points"] is True
    assert check_unconstrained_failure("A2", Regime.ELLIPTIC, ctx=SMALL).verdict == "PASS"


def test_operator_and_reduced_verdicts_agree(params, cfg):
    plan = SamplePlan.default(Regime.ELLIPTIC, params, n_points=8)
    for constrained in (True, False):
        draw = lambda g: np.concatenate([plan.vector(g, 3, constrained) for _ in range(3)])
        pts = np.array([draw(plan.rng("agree", i)) for i in range(8)])
        v, w, z = pts[:, :3], pts[:, 3:6], pts[:, 6:]
        reduced = rel_error(rd.a2_elliptic_left(v, w, z, 0.3, params, cfg),
                            rd.a2_elliptic_right(v, w, z, 0.3, params, cfg))
        ev, _, _ = suites._kernel_evaluator(SMALL, "A2", Regime.ELLIPTIC, 1, 0.3, constrained, True)
        vals = ev(pts, cfg)
        operator = rel_error(vals[0], vals[1])
        assert (np.max(reduced) < 1e-8) == (np.max(operator) < 1e-8) == constrained


def test_run_all_deterministic_and_seeded():
    names = ["gamma-core", "lemma34"]
    first = [r.to_dict() for r in run_all(SMALL, names)]
    again = [r.to_dict() for r in run_all(SMALL, names, jobs=2)]
    assert first == again
    other = run_all(SuiteContext(n_points=8, seed=7), names)
    assert [r.verdict for r in other] == [r["verdict"] for r in first] == ["PASS", "PASS"]
    assert other[0].to_dict()["subchecks"][0]["points"] != first[0]["subchecks"][0]["points"]


def test_run_all_rejects_unknown():
    with pytest.raises(ValueError):
        run_all(SMALL, ["no-such-suite"])


def test_registry_contents():
    assert len(REGISTRY) == 23
    assert REGISTRY["a3-hyperbolic-kernel"].ref == "Thm 3.3"
    assert REGISTRY["trig-degeneration"].threshold == 1e-6


def test_raid_identity(params, rng):
    u, v, w = rng.normal(scale=0.4, size=(3, 50)) + 0.05j
    lhs, rhs = raid_sides(u, v, w, 0.3, 0.41 + 0.2j, params)
    assert np.max(rel_error(lhs, rhs)) < 1e-10
    # equal couplings make the two sides the same expression
    lhs, rhs = raid_sides(u, v, w, 0.3, 0.3, params)
    assert np.array_equal(lhs, rhs)


def test_mutation_is_detected():
    report = REGISTRY["a2-elliptic-kernel"].run(SuiteContext(n_points=6, mutate=True))
    assert report.verdict == "FAIL"
    assert report.metadata["mutated_center"] is True


def test_unconstrained_flag_routes_to_certification():
    report = REGISTRY["a2-elliptic-kernel"].run(SuiteContext(n_points=6, unconstrained=True))
    assert report.verdict == "PASS"
    assert report.metadata["path"] == "unconstrained failure certification"
