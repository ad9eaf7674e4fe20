import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st
from scipy.optimize import linprog
from scipy.spatial.distance import cdist

from conftest import mix
from sparse_moments.errors import BadInput, DomainMismatch, Infeasible, TooLarge
from sparse_moments.mixtures import (
    Domain,
    SignedSpikeMixture,
    SpikeMixture,
    project_simplex,
    project_to_domain,
    project_triangle_complex,
    random_mixture,
    repair_negative_weights,
    repair_weights,
    transport_1d,
    transport_complex,
    transport_general,
    transport_signed,
)
from sparse_moments.verify import transport_lp_reference


def test_transport_1d_examples():
    assert transport_1d(mix([0.0], [1.0]), mix([1.0], [1.0])) == 1.0
    a = mix([0.2, 0.7], [0.3, 0.7])
    assert transport_1d(a, a) == 0.0
    assert transport_1d(mix([0.0, 1.0], [0.5, 0.5]), mix([0.5], [1.0])) == pytest.approx(0.5)


def test_transport_1d_domain_mismatch():
    with pytest.raises(DomainMismatch):
        transport_1d(mix([0.5], [1.0]), mix([[0.1, 0.1]], [1.0]))


def test_transport_general_examples():
    T = Domain.box(2)
    c, plan = transport_general(SpikeMixture(T, [[0, 0]], [1.0]), SpikeMixture(T, [[1, 1]], [1.0]))
    assert c == 2.0
    assert plan.mass.tolist() == [1.0]
    a = SpikeMixture(T, [[0, 0], [1, 0]], [0.5, 0.5])
    b = SpikeMixture(T, [[0, 0], [1, 0]], [0.25, 0.75])
    assert transport_general(a, b)[0] == pytest.approx(0.25)
    m = random_mixture(T, 3, 4)
    assert transport_general(m, m)[0] == 0.0


def test_plan_marginals(rng):
    D = Domain.box(3)
    a = random_mixture(D, 5, rng)
    b = random_mixture(D, 4, rng)
    cost, plan = transport_general(a, b)
    P = plan.matrix(a.k, b.k)
    np.testing.assert_allclose(P.sum(axis=1), a.weights, atol=1e-12)
    np.testing.assert_allclose(P.sum(axis=0), b.weights, atol=1e-12)
    assert (P >= 0).all()
    assert cost == pytest.approx(float((P * cdist(a.locations, b.locations, "cityblock")).sum()))


def test_transport_too_large():
    D = Domain.interval()
    big = SpikeMixture(D, np.linspace(0, 1, 513), np.full(513, 1 / 513))
    with pytest.raises(TooLarge):
        transport_general(big, mix([0.5], [1.0]))


def test_transport_signed_examples():
    D = Domain.interval()
    a = SignedSpikeMixture(D, [0.0, 1.0], [1.2, -0.2])
    b = SignedSpikeMixture(D, [0.0], [1.0])
    assert transport_signed(a, b) == pytest.approx(0.2)
    assert transport_signed(a, a) == 0.0
    p, q = mix([0.1, 0.9], [0.4, 0.6]), mix([0.3], [1.0])
    assert transport_signed(p, q) == pytest.approx(transport_general(p, q)[0], abs=1e-15)


def test_transport_complex_examples():
    D = Domain.triangle()
    a = SignedSpikeMixture(D, [0.0 + 0j, 1.0 + 0j], [1 + 0.1j, -0.1j])
    b = SignedSpikeMixture(D, [0.0 + 0j], [1.0 + 0j])
    assert transport_complex(a, b) == pytest.approx(0.1)
    assert transport_complex(a, a) == 0.0
    r = SignedSpikeMixture(D, [0.0 + 0j, 0.5 + 0.5j], [1.3, -0.3])
    b_real = SignedSpikeMixture(D, [0.0 + 0j], [1.0])
    assert transport_complex(r, b) == pytest.approx(transport_signed(r, b_real))
    with pytest.raises(BadInput):
        transport_signed(a, b)


def test_repair_examples():
    D = Domain.interval()
    m = SignedSpikeMixture(D, [0.0, 0.5, 1.0], [-0.2, 1.0, 0.2])
    np.testing.assert_allclose(repair_negative_weights(m).weights, [0.0, 0.8, 0.2], atol=1e-15)
    m = SignedSpikeMixture(D, [0.0, 1.0], [1.5, -0.5])
    np.testing.assert_allclose(repair_negative_weights(m).weights, [1.0, 0.0])
    ok = SignedSpikeMixture(D, [0.2, 0.4], [0.3, 0.7])
    np.testing.assert_array_equal(repair_negative_weights(ok).weights, [0.3, 0.7])


def test_repair_infeasible():
    with pytest.raises(Infeasible):
        repair_weights([0.0, 1.0], [-1.0, 0.0])


def _signed_cost_to(locs, w, p):
    D = Domain.box(locs.shape[1], -10, 10)
    return transport_signed(SignedSpikeMixture(D, locs, w), SignedSpikeMixture(D, locs, p))


def _repair_lp(locs, w):
    """min over probability p of signed transport, as a transshipment LP."""
    k = w.size
    C = cdist(locs, locs, "cityblock").ravel()
    # variables: flows f_ij (k*k), then p (k)
    A = np.zeros((k + 1, k * k + k))
    for i in range(k):
        A[i, i * k : (i + 1) * k] += 1.0  # out of i
        A[i, i : k * k : k] -= 1.0  # into i
        A[i, k * k + i] = 1.0
    A[k, k * k :] = 1.0
    b = np.append(w, 1.0)
    res = linprog(np.append(C, np.zeros(k)), A_eq=A, b_eq=b, bounds=(0, None), method="highs")
    return res.fun


@pytest.mark.parametrize("seed", range(20))
def test_repair_is_optimal(seed):
    rng = np.random.default_rng(seed)
    k = int(rng.integers(2, 6))
    d = int(rng.integers(1, 3))
    locs = rng.uniform(0, 1, (k, d))
    w = rng.normal(size=k)
    w[0] = abs(w[0]) + 0.5
    w /= w.sum()
    p = repair_weights(locs, w)
    assert p.min() >= 0 and p.sum() == pytest.approx(1.0)
    best = _signed_cost_to(locs, w, p)
    assert best == pytest.approx(_repair_lp(locs, w), abs=1e-9)
    for q in rng.dirichlet(np.ones(k), size=50):
        assert best <= _signed_cost_to(locs, w, q) + 1e-12


def test_projection_examples():
    assert project_to_domain(1.3, Domain.interval()) == 1.0
    np.testing.assert_allclose(project_to_domain([0.6, 0.6], Domain.simplex(2)), [0.5, 0.5])
    assert project_to_domain(0.5 + 0.2j, Domain.interval()) == 0.5
    assert project_triangle_complex(0.2 + 0.3j) == 0.2 + 0.3j
    assert project_triangle_complex(-0.1 + 0.5j) == 0.5j
    assert project_triangle_complex(1 + 1j) == 0.5 + 0.5j


@settings(max_examples=200, deadline=None)
@given(
    st.sampled_from(["simplex", "triangle", "ball", "box"]),
    st.lists(st.floats(-3, 3), min_size=2, max_size=2),
)
def test_projection_idempotent(kind, p):
    D = Domain(kind, 2)
    once = project_to_domain(np.array(p), D)
    assert D.contains(once)
    np.testing.assert_array_equal(project_to_domain(once, D), once)


def test_project_simplex_matches_qp(rng):
    for _ in range(20):
        v = rng.normal(size=6)
        p = project_simplex(v)
        assert p.min() >= 0 and p.sum() == pytest.approx(1.0)
        # KKT: p - v is constant on the support and >= that constant off it
        g = p - v
        theta = g[p > 0].mean()
        np.testing.assert_allclose(g[p > 0], theta, atol=1e-12)
        assert (g[p == 0] >= theta - 1e-12).all()


def _rand(rng, D, k):
    return SpikeMixture(D, rng.uniform(0, 1, (k, D.dim)), rng.dirichlet(np.ones(k)))


@pytest.mark.parametrize("dim", [1, 2])
def test_metric_axioms(rng, dim):
    D = Domain.interval() if dim == 1 else Domain.box(2)
    for _ in range(50):
        a, b, c = (_rand(rng, D, int(rng.integers(1, 7))) for _ in range(3))
        for f in ([transport_1d] if dim == 1 else []) + [lambda x, y: transport_general(x, y)[0]]:
            ab, ba = f(a, b), f(b, a)
            assert abs(ab - ba) <= 1e-12
            assert ab >= 0
            assert f(a, a) <= 1e-9
            assert f(a, c) <= ab + f(b, c) + 1e-9


def test_transport_1d_matches_general(rng):
    for _ in range(50):
        a = _rand(rng, Domain.interval(), 4)
        b = _rand(rng, Domain.interval(), 3)
        assert transport_1d(a, b) == pytest.approx(transport_general(a, b)[0], abs=1e-12)


def test_lp_reference_agrees(rng):
    for _ in range(60):
        D = Domain.box(int(rng.integers(1, 4)))
        a = _rand(rng, D, int(rng.integers(1, 7)))
        b = _rand(rng, D, int(rng.integers(1, 7)))
        for metric in ("l1", "l2"):
            assert abs(transport_general(a, b, metric)[0] - transport_lp_reference(a, b, metric)) <= 1e-9


def test_mixture_validation():
    D = Domain.interval()
    with pytest.raises(BadInput):
        SpikeMixture(D, [0.2, 0.3], [0.5, 0.6])
    with pytest.raises(BadInput):
        SpikeMixture(D, [1.2], [1.0])
    with pytest.raises(BadInput):
        SpikeMixture(D, [0.2, 0.3], [1.5, -0.5])
    with pytest.raises(DomainMismatch):
        SpikeMixture(Domain.simplex(3), [[0.5, 0.5]], [1.0])
    with pytest.raises(BadInput):
        Domain("disk", 2)


def test_json_round_trip(rng):
    for D in (Domain.interval(), Domain.triangle(), Domain.simplex(4), Domain.ball(3), Domain.box(2, -1, 2)):
        m = random_mixture(D, 3, rng)
        back = SpikeMixture.from_dict(m.to_dict())
        assert back.domain == D
        np.testing.assert_array_equal(back.locations, m.locations)
        np.testing.assert_array_equal(back.weights, m.weights)
    s = SignedSpikeMixture(Domain.triangle(), [0.1 + 0.2j, 0.3 + 0j], [1 + 0.5j, -0.5j])
    back = SignedSpikeMixture.from_dict(s.to_dict())
    np.testing.assert_array_equal(back.weights, s.weights)


def test_random_mixture_modes():
    m = random_mixture(Domain.interval(), 2, 0, coincident=True)
    assert m.locations[0, 0] == m.locations[1, 0]
    m = random_mixture(Domain.interval(), 3, 0, separation=0.2)
    x = np.sort(m.locations[:, 0])
    assert np.diff(x).min() >= 0.2
    m = random_mixture(Domain.simplex(5), 4, 0, min_weight=0.2)
    assert m.weights.min() >= 0.2 - 1e-15
    with pytest.raises(Infeasible):
        random_mixture(Domain.interval(), 5, 0, separation=0.5)
