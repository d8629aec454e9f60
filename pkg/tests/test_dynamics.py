import math

import numpy as np
import pytest

from diagnet import (
    BudgetExhaustedError,
    NetParams,
    StepperConfig,
    angle_degrees,
    closed_form_residual,
    compute_stats,
    init_params,
    kernel_distance,
    l1_max_margin,
    l2_max_margin,
    linearized_flow_step,
    loss_gradient,
    make_dataset,
    normalized_direction,
    predictor,
    run,
    run_linearized,
    step,
    support_vectors,
    tangent_kernel,
)
from diagnet.dynamics import (
    ClosedFormDomainError,
    LossUnderflowError,
    StepSizeUnderflowError,
    TrajectoryRecord,
    margins,
)

from oracles import central_difference_gradient


def one_point(value=1.0):
    return make_dataset([[value]])


def test_predictor_examples():
    assert np.allclose(predictor(init_params(4, 3, 0.7)), 0.0)
    p = NetParams(np.array([2.0, 1.0]), np.array([1.0, 1.0]), 2, 1.0)
    assert np.allclose(predictor(p), [3.0, 0.0])
    p = NetParams(np.array([1.0, 0.0]), np.array([0.0, 2.0]), 3, 1.0)
    assert np.allclose(predictor(p), [1.0, -8.0])


def test_margins_at_zero(main_dataset):
    gamma, gamma_tilde, p = margins(init_params(3, 2, 1.0), main_dataset)
    assert gamma == 0.0
    assert gamma_tilde == pytest.approx(0.0, abs=1e-15)
    assert np.allclose(p, 1.0 / 3.0)


def test_margins_single_sample():
    params = NetParams(np.array([5.0]), np.array([0.0]), 2, 1.0)
    ds = make_dataset([[0.2]])
    gamma, gamma_tilde, p = margins(params, ds)
    assert gamma == pytest.approx(5.0)
    assert gamma_tilde == pytest.approx(5.0)
    assert np.allclose(p, [1.0])


def test_margins_two_sample_hand_value():
    # scores (2, 2 + log 2) -> gamma_tilde = 2 + log(4/3)
    ds = make_dataset([[1.0], [1.0 + math.log(2.0) / 2.0]])
    params = NetParams(np.array([math.sqrt(2.0)]), np.array([0.0]), 2, 1.0)
    gamma, gamma_tilde, p = margins(params, ds)
    assert gamma == pytest.approx(2.0, rel=1e-12)
    assert gamma_tilde == pytest.approx(2.0 + math.log(4.0 / 3.0), rel=1e-12)
    assert p[0] == pytest.approx(1.0 / 1.5, rel=1e-12)


def test_loss_gradient_hand_example():
    g = loss_gradient(init_params(1, 2, 1.0), one_point())
    assert np.allclose(g, [-2.0, 2.0], atol=1e-14)


def test_loss_gradient_vanishes_at_large_margin():
    params = NetParams(np.array([20.0]), np.array([0.0]), 2, 1.0)
    g = loss_gradient(params, one_point())
    assert np.max(np.abs(g)) < 1e-100


def test_loss_gradient_zero_parameter_component():
    params = NetParams(np.array([0.0, 1.0]), np.array([1.0, 1.0]), 3, 1.0)
    g = loss_gradient(params, make_dataset([[1.0, 0.5]]))
    assert g[0] == 0.0


def test_loss_gradient_underflow_reported():
    params = NetParams(np.array([40.0]), np.array([0.0]), 2, 1.0)
    with pytest.raises(LossUnderflowError):
        loss_gradient(params, one_point())


def test_normalized_direction_hand_example():
    g = normalized_direction(init_params(1, 2, 1.0), one_point())
    assert np.allclose(g, [-2.0, 2.0], atol=1e-14)


def test_normalized_direction_duplicate_invariance():
    params = NetParams(np.array([1.3, 0.4]), np.array([0.2, 0.9]), 2, 1.0)
    single = make_dataset([[1.0, 2.0]])
    doubled = make_dataset([[1.0, 2.0], [1.0, 2.0]])
    assert np.allclose(normalized_direction(params, single),
                       normalized_direction(params, doubled))


def test_normalized_direction_symmetric_init(main_dataset):
    depth, alpha = 3, 0.8
    params = init_params(3, depth, alpha)
    g = normalized_direction(params, main_dataset)
    xp = main_dataset.effective.T @ np.full(3, 1.0 / 3.0)
    expect = depth * alpha ** (depth - 1) * xp
    assert np.allclose(g[:3], -expect)
    assert np.allclose(g[3:], expect)


def test_normalized_equals_gradient_over_loss(main_dataset):
    params = NetParams(np.array([1.2, 0.7, 1.0]),
                       np.array([0.9, 1.1, 0.4]), 2, 1.0)
    scores = main_dataset.effective @ predictor(params)
    loss = np.mean(np.exp(-scores))
    lhs = normalized_direction(params, main_dataset)
    rhs = loss_gradient(params, main_dataset) / loss
    assert np.max(np.abs(lhs - rhs)) <= 1e-10 * np.max(np.abs(rhs))


def test_step_hand_example():
    cfg = StepperConfig(eta=0.1, mode="normalized_gd")
    params, rec = step(init_params(1, 2, 1.0), one_point(), cfg)
    assert np.allclose(params.u_plus, [1.2])
    assert np.allclose(params.u_minus, [0.8])
    assert rec.w[0] == pytest.approx(0.8)
    assert rec.step == 1


def test_step_increases_gamma_tilde(main_dataset):
    cfg = StepperConfig(eta=1e-3, mode="normalized_gd")
    params, prev = step(init_params(3, 2, 1.0), main_dataset, cfg)
    for _ in range(20):
        params, rec = step(params, main_dataset, cfg, prev)
        assert rec.gamma_tilde > prev.gamma_tilde
        prev = rec


def test_step_retries_keep_parameters_nonnegative():
    # a full step at this eta would push u_minus negative; the retry loop
    # shrinks eta until it does not
    cfg = StepperConfig(eta=0.6, mode="normalized_gd")
    params, rec = step(init_params(1, 2, 1.0), one_point(), cfg)
    assert params.u_minus.min() >= 0.0
    assert rec.gamma_tilde > 0.0


def test_step_size_underflow():
    cfg = StepperConfig(eta=1e9, mode="normalized_gd", max_rejects=2)
    with pytest.raises(StepSizeUnderflowError):
        step(init_params(1, 2, 1.0), one_point(), cfg)


def test_run_target_zero_returns_initial(main_dataset, main_stats):
    cfg = StepperConfig(eta=1e-3, gamma_tilde_target=0.0)
    records = run(init_params(3, 2, 1.0), main_dataset, cfg,
                  stats=main_stats)
    assert len(records) == 1
    assert records[0].step == 0


def test_run_single_coordinate_monotone():
    ds = one_point()
    cfg = StepperConfig(eta=1e-2, gamma_tilde_target=5.0, record_every=1)
    records = run(init_params(1, 2, 1.0), ds, cfg)
    ws = [r.w[0] for r in records]
    assert np.all(np.diff(ws) > 0)
    for r in records:
        assert r.gamma_tilde == pytest.approx(r.w[0])


def test_run_lands_on_target(main_dataset, main_stats):
    for target in (7.0, 123.0):
        cfg = StepperConfig(eta=1e-3, gamma_tilde_target=target)
        records = run(init_params(3, 2, 1.0), main_dataset, cfg,
                      stats=main_stats)
        assert abs(records[-1].gamma_tilde - target) <= 1e-6 * max(1.0, target)


def test_run_budget_exhausted(main_dataset, main_stats):
    cfg = StepperConfig(eta=1e-6, gamma_tilde_target=100.0, max_steps=10)
    with pytest.raises(BudgetExhaustedError) as err:
        run(init_params(3, 2, 1e-3), main_dataset, cfg, stats=main_stats)
    assert len(err.value.records) >= 1


def test_run_nonseparable_rejected():
    ds = make_dataset([[1.0], [-1.0]])
    cfg = StepperConfig(eta=1e-3, gamma_tilde_target=1.0)
    with pytest.raises(Exception, match="separable"):
        run(init_params(1, 2, 1.0), ds, cfg)


def test_sandwich_and_norm_lower_bound(main_dataset, main_stats):
    log_n = math.log(main_dataset.n_samples)
    for mode, target in (("plain_gd", 6.0), ("normalized_gd", 20.0)):
        cfg = StepperConfig(eta=1e-3, mode=mode, gamma_tilde_target=target,
                            record_every=5, max_steps=200_000)
        records = run(init_params(3, 2, 1.0), main_dataset, cfg,
                      stats=main_stats)
        for r in records:
            assert r.gamma - 1e-12 <= r.gamma_tilde <= r.gamma + log_n + 1e-12
            assert np.linalg.norm(r.w) >= r.gamma_tilde / main_stats.xmax \
                - 1e-9


def test_plain_mode_norm_upper_bounds(main_dataset, main_stats):
    from diagnet import h_value
    xbar, g2 = main_stats.xbar, main_stats.gamma2
    for depth, alpha in ((2, 1.0), (3, 1.0)):
        cfg = StepperConfig(eta=1e-4, mode="plain_gd", max_steps=20_000,
                            record_every=100)
        records = run(init_params(3, depth, alpha), main_dataset, cfg,
                      stats=main_stats)
        for r in records:
            gt = r.gamma_tilde
            if depth == 2:
                bound = 2 * alpha**2 * math.sinh(
                    xbar * gt / (2 * g2**2 * alpha**2))
            else:
                arg = (depth - 2) * xbar * gt / (2 * depth * g2**2
                                                 * alpha**depth)
                if arg >= 1.0 - 1e-9:
                    continue  # bound vacuous outside the h_D domain
                bound = alpha**depth * h_value(arg, depth)
            assert np.max(np.abs(r.w)) <= bound * (1 + 1e-9)


def test_plain_mode_flow_time_loss_bound(main_dataset, main_stats):
    g2 = main_stats.gamma2
    cfg = StepperConfig(eta=1e-4, mode="plain_gd", max_steps=20_000,
                        record_every=100)
    records = run(init_params(3, 2, 1.0), main_dataset, cfg,
                  stats=main_stats)
    for r in records[1:]:
        t = math.exp(r.log_flow_time)
        assert r.gamma_tilde >= math.log1p(8.0 * g2**2 * t) - 1e-9


def test_plain_vs_normalized_same_flow():
    # normalized GD is a time reparametrization: with small steps both modes
    # trace the same predictor path, compared here at matching gamma_tilde
    ds = one_point()
    stats = compute_stats(ds)
    curves = {}
    for mode in ("plain_gd", "normalized_gd"):
        cfg = StepperConfig(eta=2e-6, mode=mode, gamma_tilde_target=0.3,
                            record_every=1, max_steps=2_000_000)
        records = run(init_params(1, 2, 1.0), ds, cfg, stats=stats)
        curves[mode] = (np.array([r.gamma_tilde for r in records]),
                        np.array([r.w[0] for r in records]))
    gts, ws = curves["plain_gd"]
    gap = max(
        abs(np.interp(g, gts, ws) - w)
        for g, w in zip(*curves["normalized_gd"])
    )
    assert gap <= 1e-6


def test_closed_form_residual_zero_at_init(main_dataset):
    rec = TrajectoryRecord(0, -math.inf, 0.0, 0.0, np.zeros(3), np.zeros(3))
    assert closed_form_residual(rec, 1.0, 2) == 0.0
    assert closed_form_residual(rec, 1.0, 3) == 0.0


def test_closed_form_residual_single_step_order():
    # Euler's local error is O(eta^2): quartering when eta halves
    ds = one_point()
    residuals = []
    for eta in (2e-3, 1e-3):
        cfg = StepperConfig(eta=eta, mode="normalized_gd")
        _, rec = step(init_params(1, 2, 1.0), ds, cfg)
        residuals.append(closed_form_residual(rec, 1.0, 2))
    assert residuals[1] <= residuals[0] / 3.0


def test_closed_form_residual_domain_error():
    rec = TrajectoryRecord(5, 0.0, 1.0, 1.0, np.ones(2),
                           np.array([0.5, 1.5]))
    with pytest.raises(ClosedFormDomainError):
        closed_form_residual(rec, 1.0, 3)


def test_closed_form_residual_full_runs(main_dataset, main_stats):
    for depth, target in ((2, 300.0), (3, 50.0)):
        cfg = StepperConfig(eta=1e-4, gamma_tilde_target=target,
                            record_every=50, max_steps=500_000)
        records = run(init_params(3, depth, 1.0), main_dataset, cfg,
                      stats=main_stats)
        for r in records:
            bound = 1e-2 * max(1.0, np.max(np.abs(r.w)))
            assert closed_form_residual(r, 1.0, depth) <= bound


def test_tangent_kernel_symmetric_init(main_dataset):
    for depth, alpha in ((2, 1.0), (3, 0.5)):
        k = tangent_kernel(init_params(3, depth, alpha), main_dataset)
        gram = main_dataset.points @ main_dataset.points.T
        assert np.allclose(k, 2 * depth**2 * alpha**(2*depth-2) * gram)


def test_tangent_kernel_hand_value():
    # D^2 (u+^(2D-2) + u-^(2D-2)) x x' at d=1, D=2: 4 * (4 + 1) * 1 = 20
    params = NetParams(np.array([2.0]), np.array([1.0]), 2, 1.0)
    k = tangent_kernel(params, make_dataset([[1.0]]))
    assert k[0, 0] == pytest.approx(20.0)


def test_tangent_kernel_matches_finite_differences(main_dataset):
    rng = np.random.default_rng(5)
    for trial in range(5):
        depth = int(rng.integers(2, 5))
        up = rng.uniform(0.2, 2.0, 3)
        um = rng.uniform(0.2, 2.0, 3)
        params = NetParams(up, um, depth, 1.0)
        k = tangent_kernel(params, main_dataset)
        u0 = np.concatenate([up, um])
        grads = []
        for x in main_dataset.points:
            def f(u):
                return (u[:3]**depth - u[3:]**depth) @ x
            grads.append(central_difference_gradient(f, u0, h=1e-6))
        k_fd = np.array(grads) @ np.array(grads).T
        assert np.max(np.abs(k - k_fd)) <= 1e-6 * np.max(np.abs(k_fd))


def test_kernel_kernel_psd(main_dataset):
    params = NetParams(np.array([1.5, 0.2, 0.8]),
                       np.array([0.3, 1.1, 0.6]), 3, 1.0)
    k = tangent_kernel(params, main_dataset)
    assert np.allclose(k, k.T)
    assert np.linalg.eigvalsh(k).min() >= -1e-10


def test_kernel_distance_properties():
    k0 = np.array([[2.0, 1.0], [1.0, 3.0]])
    assert kernel_distance(k0, k0) == pytest.approx(0.0, abs=1e-15)
    assert kernel_distance(5.0 * k0, k0) == pytest.approx(0.0, abs=1e-15)
    ka = np.array([[1.0, 0.0], [0.0, 0.0]])
    kb = np.array([[0.0, 0.0], [0.0, 1.0]])
    assert kernel_distance(ka, kb) == pytest.approx(1.0)
    with pytest.raises(ValueError):
        kernel_distance(np.zeros((2, 2)), k0)
    with pytest.raises(ValueError):
        kernel_distance(np.zeros((3, 3)), k0)


def test_linearized_step_from_zero(main_dataset):
    w = linearized_flow_step(np.zeros(3), main_dataset, 1.0, 2, 1e-3)
    mean = main_dataset.effective.mean(axis=0)
    assert angle_degrees(w, mean) <= 1e-9


def test_linearized_monotone_single_point():
    ds = one_point()
    w = np.zeros(1)
    prev = 0.0
    for _ in range(100):
        w = linearized_flow_step(w, ds, 1.0, 2, 1e-2)
        assert w[0] > prev
        prev = w[0]


def test_linearized_endpoint_near_l2(main_dataset):
    w_l2 = l2_max_margin(main_dataset).w
    w_bar, gt = run_linearized(main_dataset, 1.0, 2, 1e-3, 1000.0)
    assert gt >= 1000.0
    assert angle_degrees(w_bar, w_l2) <= 2.0


def test_rich_run_endpoint(main_dataset, main_stats):
    # alpha = 1, depth 2, gamma_tilde 1e3: the endpoint sits near the l1
    # direction (5.85 degrees at the flow limit; frozen from a step-size
    # halving study) and far from the l2 direction
    w_l1 = l1_max_margin(main_dataset).w
    w_l2 = l2_max_margin(main_dataset).w
    cfg = StepperConfig(eta=1e-3, gamma_tilde_target=1e3, record_every=1000,
                        max_steps=2_000_000)
    records = run(init_params(3, 2, 1.0), main_dataset, cfg,
                  stats=main_stats)
    angle_l1 = angle_degrees(records[-1].w, w_l1)
    assert angle_l1 <= 6.0
    assert angle_degrees(records[-1].w, w_l2) > 20.0


def test_support_vector_tolerance(main_dataset):
    w = l2_max_margin(main_dataset).w
    mask = support_vectors(w, main_dataset)
    scores = main_dataset.effective @ w
    assert mask[np.argmin(scores)]
    assert mask.sum() == 1  # single support vector on this dataset


def test_params_validation():
    with pytest.raises(ValueError):
        NetParams(np.ones(2), np.ones(2), 1, 1.0)
    with pytest.raises(ValueError):
        NetParams(np.ones(2), np.ones(2), 2.5, 1.0)
    with pytest.raises(ValueError):
        NetParams(-np.ones(2), np.ones(2), 2, 1.0)
    with pytest.raises(ValueError):
        init_params(2, 2, 0.0)


def test_config_validation():
    with pytest.raises(ValueError):
        StepperConfig(eta=0.0)
    with pytest.raises(ValueError):
        StepperConfig(eta=1e-3, mode="sgd")
    with pytest.raises(ValueError):
        StepperConfig(eta=1e-3, step_shrink=1.5)
    with pytest.raises(ValueError):
        StepperConfig(eta=1e-3, record_every=0)
