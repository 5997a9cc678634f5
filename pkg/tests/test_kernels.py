"""Kernel library: formula checks against independent recomputation,
algebraic invariants, and validation behavior."""
import math

import numpy as np
import pytest
from hypothesis import given, strategies as st

from bifidelity.data import SnapshotEnsemble
from bifidelity.kernels import (
    HYPER_DIMS,
    Gramian,
    KernelFamily,
    KernelSpec,
    MixtureKernel,
    build_gramian,
    cross_kernel_vector,
    kernel_eval,
    radial_profile,
)

import oracles

RADIAL_FAMILIES = [f for f in KernelFamily if f != KernelFamily.LINEAR]


def make_spec(family, h1=0.7, h2=1.5, **flags):
    dim = HYPER_DIMS[family]
    h = ()[:0] if dim == 0 else ((h1,) if dim == 1 else (h1, h2))
    return KernelSpec(family=family, h=h, **flags)


def ensemble_from(columns):
    columns = np.asarray(columns, dtype=float)
    N = columns.shape[1]
    return SnapshotEnsemble(
        outputs=columns,
        params=np.arange(N, dtype=float)[:, None],
        per_sample_cost=np.ones(N),
    )


# === fixed-value checks ===


def test_linear_dot_product():
    assert kernel_eval(KernelSpec(family=KernelFamily.LINEAR), [1, 2], [3, 4]) == 11.0


def test_squared_exponential_zero_distance_is_one():
    spec = KernelSpec(family=KernelFamily.SQUARED_EXPONENTIAL, h=(5.0,))
    assert kernel_eval(spec, [0.3, -1.0], [0.3, -1.0]) == 1.0


def test_exponential_at_unit_ratio():
    # ||u - v|| = 2 with h = 2 forces exp(-1)
    spec = KernelSpec(family=KernelFamily.EXPONENTIAL, h=(2.0,))
    assert kernel_eval(spec, [0.0], [2.0]) == pytest.approx(math.exp(-1), rel=1e-15)


def test_matern32_zero_distance_is_one():
    spec = KernelSpec(family=KernelFamily.MATERN32, h=(1.0,))
    assert kernel_eval(spec, [1.0, 2.0], [1.0, 2.0]) == 1.0


def test_gramian_single_column_linear():
    G = build_gramian(KernelSpec(family=KernelFamily.LINEAR), ensemble_from([[2.0]]))
    assert G.entries.shape == (1, 1)
    assert G.entries[0, 0] == 4.0


@pytest.mark.parametrize(
    "family",
    [
        KernelFamily.EXPONENTIAL,
        KernelFamily.SQUARED_EXPONENTIAL,
        KernelFamily.MATERN32,
        KernelFamily.MATERN52,
    ],
)
def test_gramian_identical_columns_all_ones(family):
    ens = ensemble_from(np.column_stack([[1.0, -2.0], [1.0, -2.0]]))
    G = build_gramian(make_spec(family), ens)
    assert np.array_equal(G.entries, np.ones((2, 2)))


def test_gramian_squared_exponential_two_points():
    # columns at distance 1, h1 = 0.5: off-diagonal exp(-1/(2*0.5)) = e^{-1}
    ens = ensemble_from([[0.0, 1.0]])
    G = build_gramian(KernelSpec(family=KernelFamily.SQUARED_EXPONENTIAL, h=(0.5,)), ens)
    expected = np.array([[1.0, math.exp(-1)], [math.exp(-1), 1.0]])
    np.testing.assert_allclose(G.entries, expected, rtol=1e-15)


def test_cross_kernel_query_equals_column():
    cols = np.array([[0.0, 1.0, 3.0], [0.0, 2.0, -1.0]])
    spec = KernelSpec(family=KernelFamily.SQUARED_EXPONENTIAL, h=(1.0,))
    vec = cross_kernel_vector(spec, cols, cols[:, 1])
    assert vec[1] == 1.0
    assert vec.shape == (3,)


def test_cross_kernel_linear_recovers_components():
    cols = np.array([[1.0, 0.0], [0.0, 1.0]])
    vec = cross_kernel_vector(KernelSpec(family=KernelFamily.LINEAR), cols, [3.0, 4.0])
    np.testing.assert_array_equal(vec, [3.0, 4.0])


def test_cross_kernel_exponential_single_column():
    vec = cross_kernel_vector(
        KernelSpec(family=KernelFamily.EXPONENTIAL, h=(1.0,)), [[0.0]], [1.0]
    )
    assert vec[0] == pytest.approx(math.exp(-1), rel=1e-15)


# === agreement with the scalar-formula oracle ===


@pytest.mark.parametrize("family", list(KernelFamily))
def test_kernel_matches_scalar_formulas(family):
    rng = np.random.default_rng(int(family))
    spec = make_spec(family, h1=0.9, h2=1.7)
    for _ in range(25):
        u, v = rng.normal(size=(2, 4))
        expected = oracles.kernel_value(family.name.lower(), u, v, spec.h)
        assert kernel_eval(spec, u, v) == pytest.approx(expected, rel=1e-13, abs=1e-15)


def test_rational_quadratic_literal_form():
    spec = KernelSpec(
        family=KernelFamily.RATIONAL_QUADRATIC, h=(0.8, 2.0), rq_literal=True
    )
    u, v = np.array([0.1, 0.2]), np.array([0.4, -0.3])
    expected = oracles.kernel_value(
        "rational_quadratic", u, v, (0.8, 2.0), rq_literal=True
    )
    assert kernel_eval(spec, u, v) == pytest.approx(expected, rel=1e-13)
    # literal form breaks the K(u,u)=1 identity; it equals (2 h1^2 h2)^{h2}
    assert kernel_eval(spec, u, u) == pytest.approx((2 * 0.8**2 * 2.0) ** 2.0, rel=1e-13)


def test_compact_rbf_wendland_flag():
    spec = KernelSpec(family=KernelFamily.COMPACT_RBF, h=(2.0, 3.0), compact_wendland=True)
    assert kernel_eval(spec, [0.0], [1.0]) == pytest.approx((1 - 0.5) ** 3, rel=1e-13)
    # compact support: zero beyond r = h1
    assert kernel_eval(spec, [0.0], [5.0]) == 0.0


def test_compact_rbf_literal_not_compactly_supported():
    # the default form tends back to 1 at large r because the bump decays
    spec = KernelSpec(family=KernelFamily.COMPACT_RBF, h=(1.0, 2.0))
    assert kernel_eval(spec, [0.0], [50.0]) == pytest.approx(1.0, abs=1e-12)


# === algebraic properties ===


@given(st.integers(0, 10**6))
def test_kernel_symmetry_exact(seed):
    rng = np.random.default_rng(seed)
    u, v = rng.normal(size=(2, 3))
    for family in KernelFamily:
        spec = make_spec(family)
        assert kernel_eval(spec, u, v) == kernel_eval(spec, v, u)


@given(st.integers(0, 10**6))
def test_radial_translation_invariance(seed):
    rng = np.random.default_rng(seed)
    u, v, c = rng.normal(size=(3, 4))
    for family in RADIAL_FAMILIES:
        spec = make_spec(family)
        base = kernel_eval(spec, u, v)
        shifted = kernel_eval(spec, u + c, v + c)
        assert abs(base - shifted) <= 1e-12


def test_linear_and_squared_exponential_gramians_psd():
    # 100 seeds, ensembles up to 20 samples
    for seed in range(100):
        rng = np.random.default_rng(seed)
        N = int(rng.integers(2, 21))
        ens = ensemble_from(rng.normal(size=(3, N)))
        for spec in (
            KernelSpec(family=KernelFamily.LINEAR),
            KernelSpec(family=KernelFamily.SQUARED_EXPONENTIAL, h=(1.0,)),
        ):
            w = np.linalg.eigvalsh(build_gramian(spec, ens).entries)
            assert w[0] >= -1e-10 * max(w[-1], 0.0)


@given(st.integers(0, 10**6), st.floats(0.05, 0.95))
def test_mixture_gramian_is_weighted_sum(seed, w0):
    rng = np.random.default_rng(seed)
    ens = ensemble_from(rng.normal(size=(2, 5)))
    spec_a = KernelSpec(family=KernelFamily.EXPONENTIAL, h=(1.2,))
    spec_b = KernelSpec(family=KernelFamily.MATERN52, h=(0.6,))
    mix = MixtureKernel(components=((spec_a, w0), (spec_b, 1.0 - w0)))
    combined = build_gramian(mix, ens).entries
    parts = (
        w0 * build_gramian(spec_a, ens).entries
        + (1.0 - w0) * build_gramian(spec_b, ens).entries
    )
    assert np.max(np.abs(combined - parts)) <= 1e-12


def test_radial_profile_vectorized_matches_pointwise():
    spec = KernelSpec(family=KernelFamily.MATERN32, h=(0.8,))
    r = np.array([0.0, 0.3, 1.5, 9.0])
    prof = radial_profile(spec, r)
    for k, rv in enumerate(r):
        u, v = np.array([0.0]), np.array([rv])
        assert prof[k] == pytest.approx(kernel_eval(spec, u, v), rel=1e-15)


# === validation ===


def test_hyperparameter_count_enforced():
    with pytest.raises(ValueError, match="takes 1 hyperparameter"):
        KernelSpec(family=KernelFamily.EXPONENTIAL, h=())
    with pytest.raises(ValueError, match="takes 2 hyperparameter"):
        KernelSpec(family=KernelFamily.RATIONAL_QUADRATIC, h=(1.0,))


@pytest.mark.parametrize("bad", [0.0, -1.0, math.inf, math.nan])
def test_hyperparameters_must_be_positive_finite(bad):
    with pytest.raises(ValueError):
        KernelSpec(family=KernelFamily.EXPONENTIAL, h=(bad,))


def test_mixture_weight_validation():
    spec = KernelSpec(family=KernelFamily.EXPONENTIAL, h=(1.0,))
    other = KernelSpec(family=KernelFamily.MATERN32, h=(1.0,))
    with pytest.raises(ValueError, match="sum"):
        MixtureKernel(components=((spec, 0.5), (other, 0.4)))
    with pytest.raises(ValueError, match="duplicate"):
        MixtureKernel(components=((spec, 0.5), (spec, 0.5)))
    with pytest.raises(ValueError, match="at least one"):
        MixtureKernel(components=())


def test_kernel_eval_dimension_mismatch():
    spec = KernelSpec(family=KernelFamily.LINEAR)
    with pytest.raises(ValueError, match="dimensions differ"):
        kernel_eval(spec, [1.0, 2.0], [1.0])


def test_kernel_eval_rejects_non_finite():
    spec = KernelSpec(family=KernelFamily.EXPONENTIAL, h=(1.0,))
    with pytest.raises(ValueError, match="finite"):
        kernel_eval(spec, [np.nan], [0.0])


def test_rational_quadratic_literal_overflow_raises():
    # tiny base with a huge negative exponent overflows to inf
    spec = KernelSpec(
        family=KernelFamily.RATIONAL_QUADRATIC, h=(100.0, 10000.0), rq_literal=True
    )
    with pytest.raises(ArithmeticError, match="overflow"):
        kernel_eval(spec, [0.0], [1e-4])


def test_gramian_requires_symmetry_and_finiteness():
    spec = KernelSpec(family=KernelFamily.LINEAR)
    with pytest.raises(ValueError, match="symmetric"):
        Gramian(entries=[[1.0, 2.0], [0.0, 1.0]], kernel=spec, source_ensemble_id="x")
    with pytest.raises(ValueError, match="finite"):
        Gramian(entries=[[np.inf]], kernel=spec, source_ensemble_id="x")


def test_build_gramian_rejects_empty_ensemble():
    ens = ensemble_from(np.empty((2, 0)))
    with pytest.raises(ValueError, match="empty"):
        build_gramian(KernelSpec(family=KernelFamily.LINEAR), ens)


def test_cross_kernel_dimension_mismatch():
    spec = KernelSpec(family=KernelFamily.LINEAR)
    with pytest.raises(ValueError, match="does not match"):
        cross_kernel_vector(spec, np.eye(2), [1.0, 2.0, 3.0])
