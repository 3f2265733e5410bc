import math
from fractions import Fraction

import numpy as np
import pytest
from hypothesis import given, settings, strategies as st

import starkit as sk
from starkit.errors import DimensionMismatch, NoSolutions
from starkit.exact import GOLDEN, SQRT2, SQRT3
from starkit.transference import (TransferParams, _enumerate_product_box,
                                  system_ii_values)

# ---------------------------------------------------------------------------
# Elementary pieces
# ---------------------------------------------------------------------------


def test_nearest_signed_distance_examples():
    assert sk.nearest_signed_distance(1.75) == -0.25
    assert sk.nearest_signed_distance(0.5) == -0.5
    assert sk.nearest_signed_distance(-0.2) == pytest.approx(-0.2, abs=1e-15)
    assert sk.nearest_signed_distance(3.0) == 0.0


@given(st.floats(-1e6, 1e6))
def test_nearest_signed_distance_window(x):
    v = sk.nearest_signed_distance(x)
    assert -0.5 <= v < 0.5


def test_f_plus_examples():
    assert sk.f_plus((3, -5)) == pytest.approx(math.sqrt(15), abs=1e-12)
    assert sk.f_plus((0, 7)) == pytest.approx(math.sqrt(7), abs=1e-12)
    assert sk.f_plus((0, 0)) == 1.0


# ---------------------------------------------------------------------------
# find_nu
# ---------------------------------------------------------------------------


def test_find_nu_example():
    nu = sk.find_nu((0.2, 0.3), 0.3)
    assert nu.nu[0] == pytest.approx(1.5)
    assert nu.nu[1] == pytest.approx(2 / 3)
    assert nu.nu[1] * 0.3 <= 0.3 + 1e-12


def test_find_nu_none_when_above():
    assert sk.find_nu((0.5, 0.5), 0.3) is None


def test_find_nu_zero_coordinate():
    nu = sk.find_nu((0.0, 0.9), 0.2)
    assert math.prod(nu.nu) == pytest.approx(1.0, abs=1e-12)
    assert nu.nu[1] * 0.9 <= 0.2 + 1e-12


def test_find_nu_all_zero():
    nu = sk.find_nu((0.0, 0.0), 0.1)
    assert math.prod(nu.nu) == pytest.approx(1.0, abs=1e-12)


@settings(max_examples=300)
@given(st.tuples(st.floats(-2, 2), st.floats(-2, 2), st.floats(-2, 2)),
       st.floats(0.01, 2.0))
def test_find_nu_iff_property(x, lam):
    n = len(x)
    gm = math.prod(abs(v) for v in x) ** (1 / n)
    nu = sk.find_nu(x, lam)
    if gm <= lam:
        assert nu is not None
        assert math.prod(nu.nu) == pytest.approx(1.0, rel=1e-12)
        assert max(v * abs(xi) for v, xi in zip(nu.nu, x)) \
            <= lam * (1 + 1e-10)
    else:
        assert nu is None


@settings(max_examples=200)
@given(st.floats(0.05, 3.0), st.floats(-2, 2), st.floats(-2, 2),
       st.floats(0.05, 2.0))
def test_box_implies_gm(nu1, x1, x2, lam):
    # converse by AM-GM: H_nu(x) <= lam with prod nu = 1 forces F(x) <= lam
    nu = (nu1, 1.0 / nu1)
    if max(nu[0] * abs(x1), nu[1] * abs(x2)) <= lam:
        gm = math.sqrt(abs(x1) * abs(x2))
        assert gm <= lam * (1 + 1e-12)


# ---------------------------------------------------------------------------
# Matrices
# ---------------------------------------------------------------------------


def _rand_params(rng, n=2):
    return TransferParams(lam=float(rng.uniform(0.1, 3.0)),
                          mu=float(rng.uniform(0.1, 3.0)), n=n)


def _rand_nu(rng, n=2):
    parts = rng.uniform(0.2, 4.0, size=n - 1)
    vals = list(parts) + [1.0 / np.prod(parts)]
    return sk.NuVector(tuple(vals))


def test_matrix_first_column():
    params = TransferParams(lam=0.5, mu=2.0, n=2)
    nu = sk.NuVector((2.0, 0.5))
    a = sk.build_matrices("A", (0.3, 0.7), params, nu)
    assert np.allclose(a.entries[:, 0], [0.6, 1.4, 2.0])


def test_matrix_determinants():
    rng = np.random.default_rng(1)
    for _ in range(50):
        params = _rand_params(rng)
        nu = _rand_nu(rng)
        x = tuple(rng.normal(size=2))
        a = sk.build_matrices("A", x, params, nu).entries
        astar = sk.build_matrices("Astar", x, params, nu).entries
        assert abs(np.linalg.det(a)) == pytest.approx(
            params.lam ** -1 * params.mu ** -2, rel=1e-9)
        assert abs(np.linalg.det(astar)) == pytest.approx(
            params.lam * params.mu ** 2, rel=1e-9)


def test_phi_integrality():
    rng = np.random.default_rng(2)
    for _ in range(2000):
        params = _rand_params(rng)
        nu = _rand_nu(rng)
        x = tuple(rng.normal(size=2))
        a = sk.build_matrices("A", x, params, nu)
        astar = sk.build_matrices("Astar", x, params, nu)
        at = tuple(int(v) for v in rng.integers(-50, 51, size=3))
        bt = tuple(int(v) for v in rng.integers(-50, 51, size=3))
        target = sk.phi_target(at, bt)
        assert abs(sk.phi_form(at, bt, a, astar) - target) <= 1e-8
        assert isinstance(target, int)


def test_phi_example():
    params = TransferParams(lam=0.7, mu=1.3, n=2)
    nu = sk.NuVector((2.0, 0.5))
    a = sk.build_matrices("A", (0.11, 0.93), params, nu)
    astar = sk.build_matrices("Astar", (0.11, 0.93), params, nu)
    assert sk.phi_form((1, 2, 3), (4, 5, 6), a, astar) == pytest.approx(29.0, abs=1e-10)


def test_union_jack_matrices_shape_and_factors():
    params = TransferParams(lam=0.5, mu=2.0, n=2)
    nu = sk.NuVector((1.5, 1 / 1.5))
    nup = sk.NuVector((0.8, 1.25))
    for kind in ("Atilde", "AtildePrime", "AtildeTilde", "AtildeTildePrime"):
        m = sk.build_matrices(kind, (0.3, 0.4), params, nu, nu_prime=nup)
        assert m.entries.shape == (3, 3)
    ap = sk.build_matrices("AtildePrime", (0.3, 0.4), params, nu, nu_prime=nup)
    c = math.sqrt(2) / 2
    assert ap.entries[0, 1] == pytest.approx(c * 0.8 / 2.0)
    assert ap.entries[1, 0] == pytest.approx(-0.4 / 0.5)
    with pytest.raises(DimensionMismatch):
        sk.build_matrices("AtildePrime", (0.3, 0.4), params, nu)


def test_encoding_soundness():
    # q solves system (i) with witness nu  <=>  |q~ A|_inf <= 1
    rng = np.random.default_rng(3)
    for _ in range(300):
        params = _rand_params(rng)
        x = tuple(rng.uniform(0, 1, size=2))
        q = rng.integers(-6, 7, size=2)
        if not q.any():
            continue
        dot = float(q @ np.asarray(x))
        p = -round(dot)
        qt = (int(q[0]), int(q[1]), p)
        inner_ok = abs(sk.nearest_signed_distance(dot)) <= params.lam
        nu = sk.find_nu([max(abs(int(v)), 1) for v in q], params.mu)
        if inner_ok and nu is not None:
            a = sk.build_matrices("A", x, params, nu)
            row = np.asarray(qt, dtype=float) @ a.entries
            assert np.max(np.abs(row)) <= 1 + 1e-10
        a_nu = _rand_nu(rng)
        a = sk.build_matrices("A", x, params, a_nu)
        row = np.asarray(qt, dtype=float) @ a.entries
        if np.max(np.abs(row)) <= 1 + 1e-10:
            assert abs(sk.nearest_signed_distance(dot)) <= params.lam * (1 + 1e-9)
            # with prod(nu) = 1 the box gives the pure product bound
            # (zero coordinates contribute |q_i|, not max(|q_i|, 1))
            assert np.prod(np.abs(q).astype(float)) \
                <= params.mu ** 2 * (1 + 1e-9)


# ---------------------------------------------------------------------------
# Systems
# ---------------------------------------------------------------------------


def test_enumerate_product_box_canonical():
    q = _enumerate_product_box(2, 4.0, 100)
    assert all(tuple(r) != (0, 0) for r in q)
    as_set = {tuple(r) for r in q}
    assert len(as_set) == len(q)
    for r in as_set:
        assert (-r[0], -r[1]) not in as_set
    assert (1, 0) in as_set and (0, 1) in as_set and (2, -2) in as_set


def test_system_i_example():
    params = TransferParams(lam=0.45, mu=1.0, n=2)
    sols = sk.solve_system_i((SQRT2, SQRT3), params, 50)
    assert (1, 0) in sols  # <sqrt2> = 0.4142 <= 0.45
    for q in sols:
        assert sk.f_plus(q) <= 1.0 + 1e-12


def test_system_i_window_bound():
    # lambda >= 1/2 admits every q in the product box
    params = TransferParams(lam=0.5, mu=2.0, n=2)
    sols = sk.solve_system_i((0.123, 0.789), params, 50)
    assert len(sols) == len(_enumerate_product_box(2, 4.0, 50))


def test_system_i_exact_rational():
    params = TransferParams(lam=1e-12, mu=6.0, n=2)
    sols = sk.solve_system_i((Fraction(1, 3), Fraction(1, 2)), params, 40)
    assert (3, 0) in sols  # <3 * 1/3> = 0 exactly
    assert (0, 2) in sols


def test_system_ii_example():
    params = TransferParams(lam=0.45, mu=1.0, n=2)
    assert params.p_bound == pytest.approx(2 * 0.45 ** -0.5)
    p = sk.solve_system_ii((SQRT2, SQRT3), params)
    assert p == 1
    assert system_ii_values((SQRT2, SQRT3), 1) == pytest.approx(0.3331489, abs=1e-6)


def test_system_ii_exact_half():
    # x_i = 1/2: p = 2 gives <2 * 1/2> = 0 exactly
    params = TransferParams(lam=1e-9, mu=3.0, n=2)
    p = sk.solve_system_ii((Fraction(1, 2), Fraction(1, 2)), params)
    assert p == 2
    assert system_ii_values((0.5, 0.5), 2) == 0.0


def test_system_ii_none_when_out_of_range():
    params = TransferParams(lam=1e-9, mu=0.1, n=2)
    assert sk.solve_system_ii((SQRT2, SQRT3), params) is None


# ---------------------------------------------------------------------------
# Prop-5 style equivalence
# ---------------------------------------------------------------------------


def test_prop5_witness_instance():
    params = TransferParams(lam=0.45, mu=1.0, n=2)
    rep = sk.verify_prop5((SQRT2, SQRT3), params, 50)
    assert rep.ok and rep.forward == "witness"
    assert rep.witness.q_vec == (0, 1)
    assert rep.witness.p_int == 1
    assert rep.witness.checks["gm"] <= rep.witness.checks["gm_bound"]


def test_prop5_vacuous_instance():
    params = TransferParams(lam=1e-9, mu=1.0, n=2)
    rep = sk.verify_prop5((SQRT2, SQRT3), params, 50)
    assert rep.forward == "vacuous" and rep.ok


def test_prop5_randomized_suite():
    rng = np.random.default_rng(4)
    bad = 0
    for _ in range(100):
        x = tuple(rng.random(2) * 0.98 + 0.01)
        params = TransferParams(lam=float(rng.uniform(0.3, 0.5)),
                                mu=float(rng.uniform(2.0, 14.0)), n=2)
        rep = sk.verify_prop5(x, params, 200)
        bad += len(rep.counterexamples)
    assert bad == 0


# ---------------------------------------------------------------------------
# Theorem harnesses
# ---------------------------------------------------------------------------


def test_multitrans_pipeline():
    rep = sk.verify_theorem_multitrans((SQRT2, SQRT3), 0.25, 40.0)
    assert rep.steps
    missing = [s for s in rep.steps[3:] if s.p is None or s.admissible_eps is None]
    assert not missing
    # mu_j sorted nondecreasing
    mus = [s.mu for s in rep.steps]
    assert mus == sorted(mus)


def test_multitrans_eps_grid_monotone():
    rep = sk.verify_theorem_multitrans((SQRT2, SQRT3), 0.25, 40.0)
    from starkit.transference import _eps_grid, _gm_grid
    gms = None
    for s in rep.steps[:5]:
        if s.admissible_eps is None:
            continue
        p_max = int(2 * s.mu * s.lam ** -0.5)
        gms = _gm_grid((SQRT2, SQRT3), p_max)
        ps = np.arange(1, p_max + 1)
        for e in _eps_grid(0.25):
            if e > s.admissible_eps:
                assert not np.any(gms <= ps ** (-(1 + e) / 2))
            else:
                assert np.any(gms <= ps ** (-(1 + e) / 2))


def test_multitrans_distinct_p_grows():
    small = sk.verify_theorem_multitrans((SQRT2, SQRT3), 0.25, 30.0)
    large = sk.verify_theorem_multitrans((SQRT2, SQRT3), 0.25, 300.0)
    assert large.distinct_p > small.distinct_p


def test_multitrans_no_solutions_raises():
    # any q with unit product passes the threshold, so only a degenerate
    # bound (below 1) leaves the enumeration empty
    with pytest.raises(NoSolutions):
        sk.verify_theorem_multitrans((0.5003, 0.4997), 3.0, 0.5)


def test_unionjack_pipeline():
    rep = sk.verify_theorem_unionjack(SQRT2, SQRT3, 0.25, 40.0)
    with_p = [s for s in rep.steps if s.p is not None]
    assert {s.branch for s in with_p} == {"axis", "rotated"}
    assert all(s.admissible_eps is not None for s in rep.steps[3:])


def test_unionjack_degenerate_diagonal_weight():
    # q1 = q2: the rotated product uses max(|q1 - q2|, 1) = 1
    from starkit.transference import _union_jack_products
    b1, b2 = _union_jack_products(np.array([[3, 3]]))
    assert b1[0] == 9.0
    assert b2[0] == pytest.approx(math.sqrt(2) / 2 * 6.0)


def test_khintchine_transfer_pipeline():
    rep = sk.verify_khintchine_transfer((SQRT2, SQRT3), 0.3, 60)
    assert rep.steps
    assert all(s.p is not None and s.admissible_eps is not None
               for s in rep.steps[3:])


def test_khintchine_transfer_golden_tracks_fibonacci():
    rep = sk.verify_khintchine_transfer((GOLDEN,), 0.2, 60)
    qs = {abs(s.q_vec[0]) for s in rep.steps}
    fib = {1, 2, 3, 5, 8, 13, 21, 34, 55}
    assert qs <= fib


def test_khintchine_transfer_empty_raises():
    with pytest.raises(NoSolutions):
        sk.verify_khintchine_transfer((0.5003, 0.4997), 2.5, 0)
