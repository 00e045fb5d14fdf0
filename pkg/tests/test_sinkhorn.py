import io
import math

import numpy as np
import pytest
from hypothesis import given
from hypothesis import strategies as st
from hypothesis.extra.numpy import arrays

from wmm import oracle
from wmm.errors import (
    DimensionError,
    DistributionError,
    ParameterDomainError,
    SinkhornUnderflowError,
)
from wmm.sinkhorn import (
    DiscreteDist,
    SinkhornProblem,
    lambda_from_grid,
    load_distribution,
    parse_distribution,
    sinkhorn,
    sinkhorn_1d,
    sinkhorn_2d,
    transport_cost,
)

# dense-kernel Sinkhorn on the seed-11 fixture (h=0.25, eps=0.5)
SEED11_A = [0.045766778323776965, 0.1280656287870158, 0.21947252532026115, 0.013940869757101206]
SEED11_B = [0.5591103080324139, 2.4730479043881184, 0.17111437108146896, 0.4974857084119553]
SEED11_COST = 0.17774797055899438
SEED11_DISTANCE = -0.7653407420375774
# same for the seed-13 2x2 fixture
SEED13_A = [0.12623654646930652, 0.10358234827134591, 0.12094139744444424, 0.03983366837238796]
SEED13_DISTANCE = -0.8599036352034476


def dist(values, shape=None):
    return DiscreteDist.from_values(values, shape)


def fixture_1d(data_dir):
    u = load_distribution(data_dir / "seed11_source.txt")
    v = load_distribution(data_dir / "seed11_target.txt")
    return SinkhornProblem(u, v, 0.25, 0.5)


def fixture_2d(data_dir):
    u = load_distribution(data_dir / "seed13_source_2d.txt", (2, 2))
    v = load_distribution(data_dir / "seed13_target_2d.txt", (2, 2))
    return SinkhornProblem(u, v, 0.25, 0.5)


def dense_plan(p, a, b):
    K = p.kernel().todense()
    return a[:, None] * K * b[None, :]


def dense_cost_matrix(p):
    if p.ndim == 1:
        i = np.arange(p.u.size)
        return p.h * np.abs(i[:, None] - i[None, :])
    n, m = p.u.shape
    k = np.arange(n * m)
    x, y = k % n, k // n
    h1, h2 = p.h
    return h1 * np.abs(x[:, None] - x[None, :]) + h2 * np.abs(y[:, None] - y[None, :])


def run_with_history(p, **kw):
    history = []
    r = sinkhorn(p, callback=lambda it, a, b, err: history.append((a.copy(), b.copy(), err)), **kw)
    return r, history


# --- parameters and distributions ---------------------------------------------


def test_lambda_from_grid():
    assert lambda_from_grid(0.1, 0.1) == pytest.approx(math.exp(-1), rel=1e-15)
    assert lambda_from_grid(0.05, 0.025) == pytest.approx(math.exp(-2), rel=1e-15)
    lams = [lambda_from_grid(h, 1.0) for h in (1e-1, 1e-3, 1e-6)]
    assert all(b > a for a, b in zip(lams, lams[1:])) and lams[-1] < 1.0


@pytest.mark.parametrize("h, eps", [(0, 1), (-1, 1), (1, 0), (1, -2), (float("inf"), 1), (1, float("nan"))])
def test_lambda_domain(h, eps):
    with pytest.raises(ParameterDomainError):
        lambda_from_grid(h, eps)


def test_lambda_underflow_is_reported():
    with pytest.raises(ParameterDomainError, match="larger epsilon"):
        lambda_from_grid(1.0, 1e-3)


def test_parse_uniform():
    d = parse_distribution("1\n1\n1\n1")
    assert d.mass.tolist() == [0.25] * 4 and d.shape == (4,) and d.total == 4.0


def test_parse_negative_reports_line():
    with pytest.raises(DistributionError, match="line 2"):
        parse_distribution("1\n−1")


def test_parse_grid():
    d = parse_distribution("0.5,0.5\n0.0,1.0")
    assert d.mass.tolist() == [0.25, 0.25, 0.0, 0.5]
    assert d.shape == (2, 2) and d.total == 2.0
    assert d.grid().tolist() == [[0.25, 0.25], [0.0, 0.5]]


def test_parse_non_square_grid_layout():
    d = parse_distribution("1,2,3\n4,5,6")
    assert d.shape == (3, 2)
    assert d.mass.tolist() == pytest.approx([x / 21 for x in range(1, 7)])


def test_parse_comments_and_blank_lines():
    d = parse_distribution("# header\n\n2\n  # indented comment\n6\n")
    assert d.mass.tolist() == [0.25, 0.75]


@pytest.mark.parametrize("text, line", [("1\nabc\n", 2), ("# c\n1,2\n3\n", 3), ("1\n\n2\ninf\n", 4)])
def test_parse_errors_name_the_line(text, line):
    with pytest.raises(DistributionError, match=f"line {line}"):
        parse_distribution(text)


@pytest.mark.parametrize("text", ["", "# only a comment\n", "0\n0\n"])
def test_parse_rejects_empty_or_zero(text):
    with pytest.raises(DistributionError):
        parse_distribution(text)


def test_parse_checks_declared_shape():
    with pytest.raises(DistributionError):
        parse_distribution("1\n2\n3", (4,))
    with pytest.raises(DistributionError):
        parse_distribution("1,2\n3,4", (2, 3))
    assert parse_distribution("1\n2", (1, 2)).shape == (1, 2)


def test_load_from_path_and_stream(data_dir):
    a = load_distribution(data_dir / "seed11_source.txt")
    b = load_distribution(io.StringIO((data_dir / "seed11_source.txt").read_text()))
    assert np.array_equal(a.mass, b.mass)
    assert a.mass.sum() == pytest.approx(1.0, abs=1e-12)


def test_load_missing_file(tmp_path):
    with pytest.raises(DistributionError, match="cannot read"):
        load_distribution(tmp_path / "absent.txt")


def test_from_values_validation():
    with pytest.raises(DistributionError):
        dist([1.0, -0.1])
    with pytest.raises(DimensionError):
        dist([1.0, 2.0, 3.0], (2, 2))


def test_problem_validation():
    with pytest.raises(DimensionError):
        SinkhornProblem(dist([1, 1]), dist([1, 1, 1]), 0.1, 0.1)
    with pytest.raises(ParameterDomainError):
        SinkhornProblem(dist([1, 1]), dist([1, 1]), 0.1, 0.0)
    with pytest.raises(ParameterDomainError):
        SinkhornProblem(dist([1, 1]), dist([1, 1]), (0.1, 0.2), 0.1)
    p = SinkhornProblem(dist([[1, 1]]), dist([[1, 1]]), 0.1, 0.1)
    assert p.h == (0.1, 0.1)


# --- solver -----------------------------------------------------------------


def test_point_mass_self_transport_is_exactly_zero():
    pm = dist([1, 0, 0, 0])
    r = sinkhorn_1d(SinkhornProblem(pm, pm, 0.7, 0.3))
    assert r.distance == 0.0 and r.transport_cost == 0.0 and r.entropy_term == 0.0
    assert r.converged and r.marginal_error == 0.0


def test_forced_plan_against_dense():
    u = dist([0, 0, 1, 0, 0])
    v = dist([1, 2, 0, 3, 4])
    p = SinkhornProblem(u, v, 0.2, 0.3)
    r = sinkhorn_1d(p)
    G = dense_plan(p, r.a, r.b)
    assert np.allclose(G.sum(axis=1), u.mass, atol=1e-15)
    assert np.allclose(G.sum(axis=0), v.mass, atol=1e-15)
    C = dense_cost_matrix(p)
    assert r.transport_cost == pytest.approx((G * C).sum(), rel=1e-14)
    nz = G > 0
    assert r.entropy_term == pytest.approx(0.3 * (G[nz] * np.log(G[nz])).sum(), rel=1e-13)


def test_seed11_matches_dense_iterates(data_dir):
    p = fixture_1d(data_dir)
    r, history = run_with_history(p)
    a, b, dense_history, it = oracle.dense_sinkhorn(p.kernel().todense(), p.u.mass, p.v.mass)
    assert r.iterations == it == len(history)
    for (fa, fb, _), (da, db) in zip(history, dense_history):
        assert np.max(np.abs(fa - da)) <= 1e-10
        assert np.max(np.abs(fb - db)) <= 1e-10
    assert np.allclose(r.a, SEED11_A, rtol=0, atol=1e-10)
    assert np.allclose(r.b, SEED11_B, rtol=0, atol=1e-10)
    assert r.marginal_error < 1e-8 and r.converged


def test_seed11_objective_against_dense_plan(data_dir):
    p = fixture_1d(data_dir)
    r = sinkhorn_1d(p)
    G = dense_plan(p, r.a, r.b)
    C = dense_cost_matrix(p)
    assert r.transport_cost == pytest.approx((G * C).sum(), abs=1e-12)
    assert r.distance == pytest.approx((G * C).sum() + 0.5 * (G * np.log(G)).sum(), abs=1e-12)
    assert r.transport_cost == pytest.approx(SEED11_COST, abs=1e-12)
    assert r.distance == pytest.approx(SEED11_DISTANCE, abs=1e-10)
    assert r.entropy_term == pytest.approx(r.distance - r.transport_cost, abs=1e-15)


def test_seed11_cost_evaluations_agree(data_dir):
    p = fixture_1d(data_dir)
    r = sinkhorn_1d(p)
    dense = transport_cost(r, p, method="dense")
    fast = transport_cost(r, p, method="recurrence")
    assert abs(dense - fast) <= 1e-12
    with pytest.raises(ValueError):
        transport_cost(r, p, method="guess")


def test_marginals_and_positivity(data_dir):
    p = fixture_1d(data_dir)
    r = sinkhorn_1d(p)
    G = dense_plan(p, r.a, r.b)
    assert np.all(G > 0) and np.all(r.a > 0) and np.all(r.b > 0)
    assert np.max(np.abs(G.sum(axis=1) - p.u.mass)) <= 1e-8
    assert np.max(np.abs(G.sum(axis=0) - p.v.mass)) <= 1e-8


def test_symmetry_under_swap(data_dir):
    p = fixture_1d(data_dir)
    assert sinkhorn_1d(p).distance == pytest.approx(sinkhorn_1d(p.swapped()).distance, abs=1e-8)


def test_two_cell_uniform_example():
    u = dist([0.5, 0.5])
    p = SinkhornProblem(u, u, 0.3, 0.2)
    r = sinkhorn_1d(p, tol=1e-13)
    G = dense_plan(p, r.a, r.b)
    assert G[0, 1] == pytest.approx(G[1, 0], rel=1e-12)
    # off-diagonal plan entry from the dense 2x2 oracle
    assert G[0, 1] == pytest.approx(0.09121276190317819, rel=1e-9)
    assert r.transport_cost == pytest.approx(0.3 * 2 * G[0, 1], rel=1e-12)


def test_residual_settles(data_dir):
    p = fixture_1d(data_dir)
    _, history = run_with_history(p, tol=1e-14)
    errs = [e for _, _, e in history]
    for prev, cur in zip(errs, errs[1:]):
        assert cur <= prev or cur < 1e-13


def test_zero_mass_cells_get_zero_scaling():
    u = dist([0.0, 1.0, 2.0, 0.0])
    v = dist([1.0, 0.0, 1.0, 1.0])
    p = SinkhornProblem(u, v, 0.25, 0.5)
    r = sinkhorn_1d(p)
    assert r.a[0] == 0.0 and r.a[3] == 0.0 and r.b[1] == 0.0
    G = dense_plan(p, r.a, r.b)
    assert np.max(np.abs(G.sum(axis=1) - u.mass)) <= 1e-8
    assert np.max(np.abs(G.sum(axis=0) - v.mass)) <= 1e-8
    C = dense_cost_matrix(p)
    nz = G > 0
    assert r.distance == pytest.approx((G * C).sum() + 0.5 * (G[nz] * np.log(G[nz])).sum(), abs=1e-10)


def test_non_convergence_returns_flagged_iterate(data_dir):
    p = fixture_1d(data_dir)
    r = sinkhorn_1d(p, max_iter=2)
    assert not r.converged and r.iterations == 2
    assert r.marginal_error >= 1e-8
    assert math.isfinite(r.distance)


def test_underflow_is_reported():
    u = dist([0.5, 0.5, 0, 0, 0, 0])
    v = dist([0, 0, 0, 0, 0.5, 0.5])
    p = SinkhornProblem(u, v, 460.0, 1.0)
    with pytest.raises(SinkhornUnderflowError, match="larger epsilon"):
        sinkhorn_1d(p)


def test_dimension_specific_entry_points(data_dir):
    with pytest.raises(DimensionError):
        sinkhorn_2d(fixture_1d(data_dir))
    with pytest.raises(DimensionError):
        sinkhorn_1d(fixture_2d(data_dir))


def test_result_json_fields(data_dir):
    r = sinkhorn_1d(fixture_1d(data_dir))
    assert list(r.to_dict()) == ["distance", "transport_cost", "entropy_term", "iterations",
                                 "marginal_error", "lambda"]
    assert sinkhorn_2d(fixture_2d(data_dir)).to_dict()["lambda"] == [math.exp(-0.5)] * 2


def test_recurrence_path_beyond_dense_limit(monkeypatch):
    rng = np.random.default_rng(5)
    p = SinkhornProblem(dist(rng.random(40) + 0.1), dist(rng.random(40) + 0.1), 0.05, 0.2)
    r = sinkhorn_1d(p)
    dense = transport_cost(r, p, method="dense")
    monkeypatch.setenv("WMM_DENSE_LIMIT", "16")
    assert transport_cost(r, p) == pytest.approx(dense, abs=1e-12)


def test_large_grid_runs_without_dense_work(monkeypatch):
    monkeypatch.setenv("WMM_DENSE_LIMIT", "64")
    x = np.linspace(0, 1, 20000)
    p = SinkhornProblem(dist(np.exp(-((x - 0.3) / 0.1) ** 2)), dist(np.exp(-((x - 0.6) / 0.1) ** 2)),
                        1 / 20000, 0.01)
    r = sinkhorn_1d(p)
    assert r.converged and r.marginal_error < 1e-8
    # the plan moves mass 0.3 to the right, at a cost of 0.3 per unit
    assert r.transport_cost == pytest.approx(0.3, rel=0.05)


# --- two dimensions -----------------------------------------------------------


def test_seed13_matches_dense_kronecker_iterates(data_dir):
    p = fixture_2d(data_dir)
    r, history = run_with_history(p)
    a, b, dense_history, it = oracle.dense_sinkhorn(p.kernel().todense(), p.u.mass, p.v.mass)
    assert r.iterations == it
    for (fa, fb, _), (da, db) in zip(history, dense_history):
        assert np.max(np.abs(fa - da)) <= 1e-10
        assert np.max(np.abs(fb - db)) <= 1e-10
    assert np.allclose(r.a, SEED13_A, rtol=0, atol=1e-10)
    assert r.distance == pytest.approx(SEED13_DISTANCE, abs=1e-10)
    assert r.marginal_error < 1e-8


def test_2d_objective_against_dense(data_dir):
    p = fixture_2d(data_dir)
    r = sinkhorn_2d(p)
    G = dense_plan(p, r.a, r.b)
    C = dense_cost_matrix(p)
    assert r.transport_cost == pytest.approx((G * C).sum(), abs=1e-12)
    assert transport_cost(r, p, method="recurrence") == pytest.approx((G * C).sum(), abs=1e-12)
    assert r.distance == pytest.approx((G * C).sum() + 0.5 * (G * np.log(G)).sum(), abs=1e-12)
    assert sinkhorn_2d(p.swapped()).distance == pytest.approx(r.distance, abs=1e-8)


def test_2d_unequal_spacings_and_shape():
    rng = np.random.default_rng(3)
    u = dist(rng.random((2, 3)))
    v = dist(rng.random((2, 3)))
    p = SinkhornProblem(u, v, (0.2, 0.5), 0.4)
    assert u.shape == (3, 2) and p.kernel().grid_shape == (2, 3)
    r = sinkhorn_2d(p)
    G = dense_plan(p, r.a, r.b)
    C = dense_cost_matrix(p)
    assert r.transport_cost == pytest.approx((G * C).sum(), abs=1e-12)
    assert transport_cost(r, p, method="recurrence") == pytest.approx((G * C).sum(), abs=1e-12)


def test_2d_single_cell():
    one = dist([[1.0]])
    r = sinkhorn_2d(SinkhornProblem(one, one, 0.1, 0.1))
    assert r.distance == 0.0


def test_2d_forced_plan():
    u = dist([[0, 0, 0], [0, 1, 0]])
    v = dist([[1, 0, 2], [0, 0, 1]])
    p = SinkhornProblem(u, v, (0.1, 0.4), 0.3)
    r = sinkhorn_2d(p)
    G = dense_plan(p, r.a, r.b)
    assert np.allclose(G.sum(axis=0), v.mass, atol=1e-15)
    assert r.transport_cost == pytest.approx((G * dense_cost_matrix(p)).sum(), rel=1e-14)


def test_separable_marginals_factor():
    rng = np.random.default_rng(17)
    u1, v1 = rng.random(4) + 0.1, rng.random(4) + 0.1
    u2, v2 = rng.random(3) + 0.1, rng.random(3) + 0.1
    u1, v1, u2, v2 = (x / x.sum() for x in (u1, v1, u2, v2))
    h1, h2, eps = 0.3, 0.2, 0.5
    p = SinkhornProblem(dist(np.outer(u2, u1)), dist(np.outer(v2, v1)), (h1, h2), eps)
    p1 = SinkhornProblem(dist(u1), dist(v1), h1, eps)
    p2 = SinkhornProblem(dist(u2), dist(v2), h2, eps)
    _, hist = run_with_history(p, tol=1e-13)
    _, hist1 = run_with_history(p1, tol=1e-13)
    _, hist2 = run_with_history(p2, tol=1e-13)
    k = min(len(hist), len(hist1), len(hist2))
    assert k > 3
    for (a, b, _), (a1, b1, _), (a2, b2, _) in zip(hist[:k], hist1[:k], hist2[:k]):
        assert np.allclose(a, np.outer(a2, a1).reshape(-1), rtol=1e-8, atol=0)
        assert np.allclose(b, np.outer(b2, b1).reshape(-1), rtol=1e-8, atol=0)


masses = st.integers(1, 12).flatmap(
    lambda n: st.tuples(
        arrays(np.float64, n, elements=st.floats(0.05, 1.0)),
        arrays(np.float64, n, elements=st.floats(0.05, 1.0)),
    )
)


@given(masses, st.floats(0.05, 0.5), st.floats(0.2, 2.0))
def test_distance_symmetric_and_feasible(pair, h, eps):
    u, v = (dist(x) for x in pair)
    p = SinkhornProblem(u, v, h, eps)
    r = sinkhorn_1d(p)
    assert r.converged
    assert np.all(r.a > 0) and np.all(r.b > 0)
    assert sinkhorn_1d(p.swapped()).distance == pytest.approx(r.distance, abs=1e-8)
    G = dense_plan(p, r.a, r.b)
    assert np.max(np.abs(G.sum(axis=1) - u.mass)) <= 1e-8
    assert np.max(np.abs(G.sum(axis=0) - v.mass)) <= 1e-8
