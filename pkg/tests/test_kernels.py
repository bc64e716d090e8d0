import itertools

import numpy as np
import pytest

from gammakernels import (
    ChamberError,
    GammaKernelError,
    KernelSpec,
    Regime,
    s2_kernel,
    s3_kernel,
    weight,
)
from gammakernels.gamma import elliptic_gamma, euler_gamma_c, hyperbolic_gamma
from gammakernels.kernels import (
    dressed_kernel,
    toda_kernel,
    toda_kernel_literal_nonrel,
    weight_gamma_form,
    weight_root,
)

from conftest import constrained, rel

KERNEL_REGIMES = [Regime.ELLIPTIC, Regime.HYPERBOLIC]


def triple(rng, n=3):
    return [constrained(rng, n, scale=0.4) for _ in range(3)]


def test_kernel_spec_shifts(params):
    spec = KernelSpec("A2", Regime.ELLIPTIC)
    assert spec.center(params) == 1j * (params.a_plus + params.a_minus) / 6
    assert KernelSpec("A3", "hyperbolic").center(params) == 1j * (params.a_plus + params.a_minus) / 4
    trig = KernelSpec("A2", Regime.TRIGONOMETRIC, delta=1)
    assert trig.alpha(params) == params.a_minus
    assert trig.center(params) == 1j * params.a_minus / 6 - np.pi / 3
    assert KernelSpec("A2", flip_delta=True).center(params) == -spec.center(params)
    with pytest.raises(ValueError):
        KernelSpec("A4")
    with pytest.raises(ValueError):
        KernelSpec("A2", Regime.RATIONAL).center(params)


@pytest.mark.parametrize("regime", KERNEL_REGIMES)
def test_s2_symmetry(params, rng, regime):
    spec = KernelSpec("A2", regime)
    v, w, z = triple(rng)
    base = s2_kernel(spec, v, w, z, params)
    for a, b, c in itertools.permutations((v, w, z)):
        assert rel(s2_kernel(spec, a, b, c, params), base) < 1e-12
    assert rel(s2_kernel(spec, v[::-1], w[[1, 2, 0]], z, params), base) < 1e-12


def test_s2_matches_direct_product(params, rng):
    spec = KernelSpec("A2", Regime.ELLIPTIC)
    v, w, z = triple(rng)
    direct = 1.0 + 0j
    for k, l, m in itertools.product(range(3), repeat=3):
        direct *= elliptic_gamma(params, v[k] + w[l] + z[m] - spec.center(params))
    assert rel(s2_kernel(spec, v, w, z, params), direct) < 1e-12


def test_s2_hyperbolic_conjugation(params, rng):
    spec = KernelSpec("A2", Regime.HYPERBOLIC)
    v, w, z = (x.real - x.real.mean() for x in triple(rng))
    # conj G(t - ic) = G(-t - ic), so conjugation flips the real inputs
    assert rel(np.conj(s2_kernel(spec, v, w, z, params)), s2_kernel(spec, -v, -w, -z, params)) < 1e-11


def test_s2_batched(params, rng):
    spec = KernelSpec("A2", Regime.ELLIPTIC)
    pts = [triple(rng) for _ in range(5)]
    batch = s2_kernel(spec, *(np.array([p[i] for p in pts]) for i in range(3)), params)
    single = [s2_kernel(spec, *p, params) for p in pts]
    assert rel(batch, single) < 1e-14


@pytest.mark.parametrize("regime", KERNEL_REGIMES)
def test_s3_even_in_d_and_symmetric(params, rng, regime):
    spec = KernelSpec("A3", regime)
    v, w = constrained(rng, 4, 0.4), constrained(rng, 4, 0.4)
    d = 0.2 + 0.1j
    base = s3_kernel(spec, d, v, w, params)
    assert rel(s3_kernel(spec, -d, v, w, params), base) < 1e-12
    assert rel(s3_kernel(spec, d, w, v, params), base) < 1e-12
    assert rel(s3_kernel(spec, d, v[[2, 0, 3, 1]], w, params), base) < 1e-12


def test_s3_matches_direct_product(params, rng):
    spec = KernelSpec("A3", Regime.HYPERBOLIC)
    v, w = constrained(rng, 4, 0.4), constrained(rng, 4, 0.4)
    d = 0.2 + 0.1j
    args = [v[k] + w[l] - spec.center(params) + s * d
            for k in range(4) for l in range(4) for s in (1, -1)]
    assert len(args) == 32
    direct = np.prod(hyperbolic_gamma(params.a_plus, params.a_minus, np.array(args)))
    assert rel(s3_kernel(spec, d, v, w, params), direct) < 1e-12


@pytest.mark.parametrize("regime", KERNEL_REGIMES)
@pytest.mark.parametrize("family,n", [("A2", 3), ("A3", 4)])
def test_weight_forms_agree(params, rng, regime, family, n):
    x = np.array([constrained(rng, n, 0.6) for _ in range(20)])
    assert rel(weight(family, regime, x, params), weight_gamma_form(family, regime, x, params)) < 1e-10


@pytest.mark.parametrize("regime", KERNEL_REGIMES)
def test_weight_positive_and_symmetric(params, rng, regime):
    x = np.sort(rng.uniform(-1, 1, (30, 4)), axis=1)[:, ::-1]
    w = weight("A3", regime, x, params)
    assert np.all(np.abs(np.imag(w)) <= 1e-12 * np.abs(w))
    assert np.all(np.real(w) > 0)
    assert rel(weight("A3", regime, x[:, [1, 2, 3, 0]], params), w) < 1e-12
    assert rel(weight_root("A3", regime, x, params) ** 2, w) < 1e-12


def test_weight_rejects_other_regimes(params):
    with pytest.raises(ValueError):
        weight("A2", Regime.TRIGONOMETRIC, np.zeros(3), params)


@pytest.mark.parametrize("regime", KERNEL_REGIMES)
def test_dressed_kernel(params, regime):
    v = np.array([0.5, 0.1, -0.6]) + 0.01j
    w = np.array([0.4, -0.1, -0.3]) - 0.02j
    z = np.array([0.7, -0.2, -0.5]) + 0j
    k = dressed_kernel("A2", regime, v, w, z, params=params)
    spec = KernelSpec("A2", regime)
    roots = [weight_root("A2", regime, a, params) for a in (v, w, z)]
    assert rel(k, np.prod(roots) * s2_kernel(spec, v, w, z, params)) < 1e-14
    assert rel(dressed_kernel("A2", regime, w, v, z, params=params), k) < 1e-12
    with pytest.raises(ChamberError):
        dressed_kernel("A2", regime, v[::-1], w, z, params=params)
    k3 = dressed_kernel("A3", regime, np.array([0.6, 0.2, -0.3, -0.5]), np.array([0.5, 0.0, -0.1, -0.4]),
                        params=params)
    assert np.isfinite(k3)


def test_toda_relativistic_inverse_pair(params, rng):
    x, y = rng.normal(size=(10, 3)), rng.normal(size=(10, 2))
    prod = toda_kernel("rel", 1, x, y, params) * toda_kernel("rel", -1, x, y, params)
    assert rel(prod, np.ones(10)) < 1e-12


def test_toda_relativistic_direct_product(params, rng):
    x, y = rng.normal(size=3), rng.normal(size=3)
    direct = np.prod([hyperbolic_gamma(params.a_plus, params.a_minus, x[j] - y[k])
                      for j in range(3) for k in range(3)])
    assert rel(toda_kernel("rel", 1, x, y, params), direct) < 1e-12


def test_toda_nonrel_scaling(params, rng):
    y = np.array([0.3])
    assert rel(toda_kernel("nonrel", 1, y + 1j * params.a_minus, y, params), 1.0) < 1e-14
    # shifting x by i a_- moves the Euler-gamma argument by one
    x = np.array([0.4 - 0.7j])
    u = (x[0] - y[0]) / (1j * params.a_minus)
    ratio = toda_kernel("nonrel", 1, x + 1j * params.a_minus, y, params) / toda_kernel("nonrel", 1, x, y, params)
    assert rel(ratio, u) < 1e-12
    assert rel(toda_kernel("nonrel", 1, x, y, params), euler_gamma_c(u)) < 1e-14
    # the real-scaled form has no such recurrence
    lit = (toda_kernel_literal_nonrel(1, x + 1j * params.a_minus, y, params)
           / toda_kernel_literal_nonrel(1, x, y, params))
    assert rel(lit, u) > 0.1


def test_toda_kind_validation(params):
    with pytest.raises(ValueError):
        toda_kernel("other", 1, np.zeros(2), np.zeros(2), params)


def test_meromorphic_smoke(params):
    rng = np.random.default_rng(7)
    n = 10_000
    z = rng.uniform(-3, 3, n) + 1j * rng.uniform(-3, 3, n)
    for fn in (lambda t: elliptic_gamma(params, t),
               lambda t: hyperbolic_gamma(params.a_plus, params.a_minus, t)):
        for chunk in np.array_split(z, 20):
            try:
                vals = fn(chunk)
            except GammaKernelError:
                continue
            assert np.all(np.isfinite(vals))
    x = rng.uniform(-1, 1, (n, 3)) + 1j * rng.uniform(-0.3, 0.3, (n, 3))
    try:
        w = weight("A2", Regime.ELLIPTIC, x, params)
    except GammaKernelError:
        pass
    else:
        assert np.all(np.isfinite(w))
