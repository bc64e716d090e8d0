"""One test per acceptance criterion, checked against the reports of a default ``run``.

The session fixture runs the command line exactly as a user would (all
suites, default parameters, seed 42, 100 points) and every criterion then
inspects the JSON reports it wrote.
"""
import json
import subprocess
import sys
import time

import pytest

BUDGET_SECONDS = 300


class Run:
    def __init__(self, out, proc, elapsed):
        self.out = out
        self.proc = proc
        self.elapsed = elapsed
        self.meta = json.loads((out / "run-metadata.json").read_text())
        self.summary = json.loads((out / "summary.json").read_text())

    def report(self, suite):
        return json.loads((self.out / f"{suite}.json").read_text())

    def sub(self, suite, name):
        for s in self.report(suite)["subchecks"]:
            if s["name"] == name:
                return s
        raise AssertionError(f"{suite}: no subcheck {name!r}")

    def seconds(self, suite):
        return self.meta["suite_seconds"][suite]


def _cli(*args, out):
    cmd = [sys.executable, "-m", "gammakernels.cli", "run", "--output", str(out), *args]
    t0 = time.perf_counter()
    proc = subprocess.run(cmd, capture_output=True, text=True, timeout=2 * BUDGET_SECONDS)
    return proc, time.perf_counter() - t0


@pytest.fixture(scope="session")
def default_run(tmp_path_factory):
    out = tmp_path_factory.mktemp("default-run")
    proc, elapsed = _cli(out=out)
    return Run(out, proc, elapsed)


def identity(sub, threshold, n_points):
    assert sub["mode"] == "identity", sub["name"]
    assert sub["threshold"] <= threshold, sub["name"]
    assert sub["n_points"] >= n_points, sub["name"]
    assert sub["verdict"] == "PASS", (sub["name"], sub["max_rel_error"])
    assert sub["max_rel_error"] < threshold, sub["name"]


def failure(sub, n_points):
    # discrepancy above 1e-3 at 95% or more of the points
    assert sub["mode"] == "inequality", sub["name"]
    assert sub["threshold"] >= 1e-3 and sub["n_points"] >= n_points, sub["name"]
    above = sum(e > 1e-3 for e in sub["rel_errors"])
    assert above >= 0.95 * sub["n_points"], sub["name"]
    assert sub["verdict"] == "PASS"


def passes(run, suite):
    rep = run.report(suite)
    assert rep["verdict"] == "PASS", (suite, rep.get("error"), rep["max_rel_error"])
    return rep


@pytest.mark.criterion(1, "gamma function identities below 1e-10, under 10 s")
def test_gamma_foundation(default_run):
    rep = passes(default_run, "gamma-core")
    names = [
        "elliptic reflection", "elliptic modular invariance", "elliptic conjugation",
        "hyperbolic reflection", "hyperbolic modular invariance", "hyperbolic conjugation",
        "elliptic log-series vs product", "elliptic ratio over ia",
    ]
    for delta in "+-":
        names += [f"elliptic difference equation delta={delta}", f"hyperbolic difference equation delta={delta}",
                  f"theta difference equation delta={delta}", f"s-function difference equation delta={delta}"]
    for name in names:
        identity(default_run.sub("gamma-core", name), 1e-10, 100)
    assert rep["seed"] == 42
    assert default_run.seconds("gamma-core") < 10


@pytest.mark.criterion(2, "A2 elliptic kernel identities below 1e-8, under 30 s")
def test_a2_elliptic_kernel(default_run):
    passes(default_run, "a2-elliptic-kernel")
    for mu in ("0.3", "0.41+0.2i"):
        for delta in "+-":
            for pair in ("v~w", "v~z", "w~z"):
                identity(default_run.sub("a2-elliptic-kernel", f"delta={delta} mu={mu} {pair}"), 1e-8, 100)
    assert default_run.seconds("a2-elliptic-kernel") < 30


@pytest.mark.criterion(3, "A2 elliptic identity fails without the zero-sum constraint")
def test_a2_elliptic_unconstrained_failure(default_run):
    passes(default_run, "a2-elliptic-unconstrained")
    for delta in "+-":
        failure(default_run.sub("a2-elliptic-unconstrained", f"delta={delta} v~w differ"), 100)


@pytest.mark.criterion(4, "A3 hyperbolic kernel identities and their unconstrained failure")
def test_a3_hyperbolic_kernel(default_run):
    passes(default_run, "a3-hyperbolic-kernel")
    passes(default_run, "a3-hyperbolic-unconstrained")
    for delta in "+-":
        identity(default_run.sub("a3-hyperbolic-kernel", f"delta={delta} v~w"), 1e-8, 100)
        failure(default_run.sub("a3-hyperbolic-unconstrained", f"delta={delta} v~w differ"), 100)


@pytest.mark.criterion(5, "A3 elliptic kernel identities, labelled as numeric evidence")
def test_a3_elliptic_kernel(default_run):
    rep = passes(default_run, "a3-elliptic-kernel")
    assert rep["label"] == "numeric evidence beyond paper's proof"
    for delta in "+-":
        identity(default_run.sub("a3-elliptic-kernel", f"delta={delta} v~w"), 1e-8, 100)
    summary = {s["suite"]: s for s in default_run.summary["suites"]}
    assert summary["a3-elliptic-kernel"]["label"] == rep["label"]


@pytest.mark.criterion(6, "A2 hyperbolic and trigonometric kernel identities")
def test_hyperbolic_and_trigonometric_kernels(default_run):
    for suite in ("a2-hyperbolic-kernel", "a2-trigonometric-kernel"):
        passes(default_run, suite)
        for mu in ("0.3", "0.41+0.2i"):
            for delta in "+-":
                for pair in ("v~w", "v~z", "w~z"):
                    identity(default_run.sub(suite, f"delta={delta} mu={mu} {pair}"), 1e-8, 100)
    passes(default_run, "a3-trigonometric-kernel")
    passes(default_run, "a2-hyperbolic-unconstrained")
    for delta in "+-":
        identity(default_run.sub("a3-trigonometric-kernel", f"delta={delta} v~w"), 1e-8, 100)
        failure(default_run.sub("a2-hyperbolic-unconstrained", f"delta={delta} v~w differ"), 100)


@pytest.mark.criterion(7, "cosh/sinh ratio identities below 1e-10 of the term scale")
def test_ratio_identities(default_run):
    passes(default_run, "lemma34")
    for form in ("a_+ scaled", "plain cosh/sinh"):
        for what in ("sum of ratios vanishes", "ratio-weighted cosh sum", "ratio-weighted cubic sum"):
            identity(default_run.sub("lemma34", f"{form}: {what}"), 1e-10, 200)
    identity(default_run.sub("lemma34", "product difference with b = i c(2d)"), 1e-10, 200)


@pytest.mark.criterion(8, "operators commute and the scalar ratio identity holds")
def test_commutativity(default_run):
    passes(default_run, "commutation")
    for regime in ("elliptic", "hyperbolic"):
        for pair in ("(+,+)", "(+,-)", "(-,+)", "(-,-)"):
            # 30 points times 3 test functions
            identity(default_run.sub("commutation", f"A2 {regime} {pair}"), 1e-9, 90)
        identity(default_run.sub("commutation", f"A3 {regime} (+,-)"), 1e-9, 90)
    identity(default_run.sub("commutation", "ratio identity, random mu, mu'"), 1e-9, 100)


@pytest.mark.criterion(9, "Hamiltonian similarity forms and the positivity witness")
def test_hamiltonian_forms(default_run):
    passes(default_run, "sa-forms")
    for regime in ("elliptic", "hyperbolic"):
        for delta in "+-":
            for mu in ("0.3", "0.3i"):
                tag = f"A2 {regime} delta={delta} mu={mu}"
                identity(default_run.sub("sa-forms", f"{tag}: H = W^1/2 A W^-1/2"), 1e-9, 50)
                identity(default_run.sub("sa-forms", f"{tag}: split coefficients real, product >= 0"), 1e-9, 150)
            tag = f"A3 {regime} delta={delta}"
            identity(default_run.sub("sa-forms", f"{tag}: H = W^1/2 A W^-1/2"), 1e-9, 50)
            identity(default_run.sub("sa-forms", f"{tag}: split coefficients real, product >= 0"), 1e-9, 200)


@pytest.mark.criterion(10, "residue cancellations, endpoint residues and contour stability")
def test_residues(default_run):
    passes(default_run, "residues")
    families = ["v2", "-2v2"] + [f"-v2/2+w{j}" for j in range(4)]
    for fam in families:
        identity(default_run.sub("residues", f"A2 residue sum at v1={fam}"), 1e-8, 10)
    identity(default_run.sub("residues", "A2 L_r and R_r residues at v1=-w1-z1-c"), 1e-8, 10)
    failure(default_run.sub("residues", "A2 unconstrained residue at v1=v2+2t is nonzero"), 10)
    identity(default_run.sub("residues", "A2 contour doubling 64 -> 128 nodes"), 1e-12, 60)


@pytest.mark.criterion(11, "quasi-periodicity multipliers and the unconstrained mismatch")
def test_multipliers(default_run):
    passes(default_run, "multipliers")
    identity(default_run.sub("multipliers", "A2 constrained: 6 summands share the multiplier"), 1e-9, 100)
    identity(default_run.sub("multipliers", "A3 constrained: 8 summands share the multiplier"), 1e-9, 100)
    failure(default_run.sub("multipliers", "A2 unconstrained: first L and R exponents differ"), 100)


@pytest.mark.criterion(12, "rational identities and the Toda kernel identities")
def test_rational_and_toda(default_run):
    passes(default_run, "rational")
    passes(default_run, "toda-relativistic")
    for n in (3, 4):
        identity(default_run.sub("rational", f"N={n} reciprocal-product sum vanishes"), 1e-12, 200)
        for sigma in "+-":
            identity(default_run.sub("rational", f"N={n} nonrelativistic Toda kernel sigma={sigma}"), 1e-8, 50)
    for delta in "+-":
        for tau in "+-":
            identity(default_run.sub("toda-relativistic", f"B delta={delta} tau={tau}"), 1e-8, 50)


@pytest.mark.criterion(13, "default run under 5 minutes with exit 0; mutation exits 1")
def test_end_to_end(default_run, tmp_path):
    assert default_run.proc.returncode == 0, default_run.proc.stderr
    assert default_run.elapsed < BUDGET_SECONDS
    assert default_run.summary["verdict"] == "PASS"
    assert len(default_run.summary["suites"]) == 23
    assert "23/23 suites passed" in default_run.proc.stdout

    proc, _ = _cli("--mutate-delta2", "--suite", "a2-elliptic-kernel", "--suite", "a2-trigonometric-kernel",
                   out=tmp_path / "mutated")
    assert proc.returncode == 1
    for suite in ("a2-elliptic-kernel", "a2-trigonometric-kernel"):
        rep = json.loads((tmp_path / "mutated" / f"{suite}.json").read_text())
        assert rep["verdict"] == "FAIL" and rep["metadata"]["mutated_center"] is True
