"""Acceptance gate: one recorded PASS/FAIL line per criterion, then the assertion."""

import io
import math

import numpy as np
import pytest

from weakmzi import analytic as an
from weakmzi.cli import main
from weakmzi.interferometer import build_nested_mzi, detector_probabilities, evolve_to_stage, preselected_state
from weakmzi.measurement import (
    EvolutionOrder,
    MeterProbabilities,
    WeakCoupling,
    position_amplitudes,
    position_probability,
    postselect_at_coupling,
    postselected_meter_probabilities,
    run_weak_measurement,
)
from weakmzi.state import path_state
from weakmzi.verify import WEAK_REGIME_MAX_WEAK_VALUE, MIN_SECOND_ORDER_COEFF, weak_regime
from weakmzi.weak_values import infer_weak_value, joint_weak_value, weak_value

from .conftest import ACCEPTANCE_LINES

THETAS = (0.01, 0.1, 1.0, math.pi)
TOL = 1e-12


def record(n, label, residual, tol):
    ok = bool(np.isfinite(residual)) and residual <= tol
    ACCEPTANCE_LINES.append(f"{'PASS' if ok else 'FAIL'} criterion {n:2d}: {label} (residual {residual:.3e}, tol {tol:g})")
    assert ok, f"criterion {n}: residual {residual:.3e} > {tol:g}"


def meter(r, t, theta, pipeline):
    return postselected_meter_probabilities(run_weak_measurement(r, t, WeakCoupling(theta), pipeline=pipeline))


@pytest.fixture(scope="module")
def pipelines(grid):
    return {pt: build_nested_mzi(*pt) for pt in grid}


def test_criterion_01_weak_values(grid, pipelines):
    worst = 0.0
    for (r, t), p in pipelines.items():
        a_c = t * t / (2 * r * r)
        want = {"A": 1.0, "B": -a_c, "C": a_c, "E": 0.0, "F": 0.0}
        for pos, value in want.items():
            worst = max(worst, abs(weak_value(r, t, pos, pipeline=p).value - value))
    record(1, "weak values A, B, C, E, F on the 20x20 grid", worst, TOL)


def test_criterion_02_sum_rule(pipelines):
    worst = max(abs(sum(weak_value(r, t, x, pipeline=p).value for x in "ABC") - 1) for (r, t), p in pipelines.items())
    record(2, "A_A + A_B + A_C = 1", worst, TOL)


def test_criterion_03_unperturbed_detection(pipelines):
    worst = 0.0
    for (r, t), p in pipelines.items():
        d1 = detector_probabilities(evolve_to_stage(p, path_state("100"), 4))[0]
        at_e = evolve_to_stage(p, path_state("100"), 3).amps[1]
        worst = max(worst, abs(d1 - r**4), abs(at_e))
    record(3, "P_D1 = r^4 and zero amplitude at E", worst, TOL)


def test_criterion_04_exact_back_action(pipelines):
    worst = 0.0
    for (r, t), p in pipelines.items():
        for th in THETAS:
            p_e = position_probability(r, t, WeakCoupling(th), "E", pipeline=p)
            total = meter(r, t, th, p).total
            want_total = r**4 + (t * t / 2) * (1 - math.cos(th)) * (t * t / 2 - r * r)
            worst = max(worst, abs(p_e - (t * t / 4) * (1 - math.cos(th))), abs(total - want_total))
    half = math.sqrt(0.5)
    spot = build_nested_mzi(half, half)
    worst = max(
        worst,
        abs(meter(half, half, math.pi, spot).total - 0.125),
        abs(position_probability(half, half, WeakCoupling(math.pi), "E", pipeline=spot) - 0.25),
    )
    record(4, "exact P_E and P_b + P_c, spot value at r^2 = 1/2, theta = pi", worst, TOL)


def test_criterion_05_exact_meter_probabilities(pipelines):
    worst = 0.0
    for (r, t), p in pipelines.items():
        for th in THETAS:
            kick = (t * t / 4) * (np.exp(-1j * th) - 1)
            base = (1 + 1j) * r * r / 2
            m = meter(r, t, th, p)
            worst = max(worst, abs(m.p_b - abs(base + kick) ** 2), abs(m.p_c - abs(base + 1j * kick) ** 2))
    record(5, "exact P_b and P_c closed forms", worst, TOL)


def test_criterion_06_first_order_consistency(pipelines):
    # Restricted to the weak regime (A_C <= 10) and away from the line t^2 = 2 r^2,
    # where the theta^2 term vanishes and the gap is pure rounding noise.
    worst = 0.0
    used = 0
    for r, t in weak_regime(pipelines):
        if abs(t * t - 2 * r * r) < MIN_SECOND_ORDER_COEFF:
            continue
        used += 1
        a_c = t * t / (2 * r * r)
        gaps = {"b": [], "c": []}
        for th in (4e-2, 2e-2, 1e-2):
            m = meter(r, t, th, pipelines[(r, t)])
            gaps["b"].append(abs(m.p_b - (r**4 / 2) * (1 - math.sin(a_c * th))))
            gaps["c"].append(abs(m.p_c - (r**4 / 2) * (1 + math.sin(a_c * th))))
        for g in gaps.values():
            worst = max(worst, abs(g[0] / g[1] / 4 - 1), abs(g[1] / g[2] / 4 - 1))
    assert used > 100
    record(6, f"first-order gap shrinks x4 per halving ({used} points with A_C <= {WEAK_REGIME_MAX_WEAK_VALUE:g})", worst, 0.1)


def test_criterion_07_order_structure(pipelines):
    worst = 0.0
    for (r, t), p in pipelines.items():
        amps = [np.linalg.norm(position_amplitudes(r, t, WeakCoupling(th), "E", pipeline=p)) for th in (1e-2, 5e-3, 2.5e-3)]
        probs = [position_probability(r, t, WeakCoupling(th), "E", pipeline=p) for th in (1e-2, 5e-3, 2.5e-3)]
        for k in range(2):
            worst = max(worst, abs(amps[k] / amps[k + 1] / 2 - 1), abs(probs[k] / probs[k + 1] / 4 - 1))
    record(7, "amplitude at E ~ theta, P_E ~ theta^2", worst, 0.01)


def test_criterion_08_inference(pipelines):
    exact_worst = 0.0
    formula_worst = 0.0
    for r, t in weak_regime(pipelines):
        a_c = t * t / (2 * r * r)
        th = 1e-3
        exact_worst = max(exact_worst, abs(infer_weak_value(meter(r, t, th, pipelines[(r, t)]), th) / a_c - 1))
        m = MeterProbabilities((r**4 / 2) * (1 - math.sin(a_c * th)), (r**4 / 2) * (1 + math.sin(a_c * th)))
        formula_worst = max(formula_worst, abs(infer_weak_value(m, th) - a_c))
    record(8, "inferred A_C from exact data (relative, A_C <= 10)", exact_worst, 1e-3)
    record(8, "inferred A_C from first-order formulas", formula_worst, TOL)


def test_criterion_09_joint_weak_value(pipelines):
    worst = max(
        abs(joint_weak_value(r, t, "C", "E", pipeline=p).value - t * t / (2 * r * r)) for (r, t), p in pipelines.items()
    )
    record(9, "joint weak value (C, E) = A_C", worst, TOL)


def test_criterion_10_three_box():
    r, t = 1 / math.sqrt(3), math.sqrt(2 / 3)
    p = build_nested_mzi(r, t)
    worst = max(
        abs(weak_value(r, t, "C", pipeline=p).value - 1),
        abs(weak_value(r, t, "B", pipeline=p).value + 1),
        float(np.max(np.abs(preselected_state(p).amps - 1 / math.sqrt(3)))),
    )
    record(10, "three-box point A_C = 1, A_B = -1, uniform pre-selection", worst, TOL)


def test_criterion_11_first_order_leak(pipelines):
    worst = 0.0
    for (r, t), p in pipelines.items():
        for th in THETAS:
            got = position_probability(r, t, WeakCoupling(th), "E", EvolutionOrder.FIRST, meter_level=0, pipeline=p)
            worst = max(worst, abs(got - th * th * t * t / 16))
    record(11, "first-order P(E | meter b) = theta^2 t^2 / 16", worst, TOL)


def test_criterion_12_direct_postselection(pipelines):
    worst = 0.0
    for (r, t), p in pipelines.items():
        for th in THETAS:
            c = WeakCoupling(th)
            full = meter(r, t, th, p)
            direct = postselect_at_coupling(r, t, c, pipeline=p)
            worst = max(worst, abs(full.p_b - direct.p_b), abs(full.p_c - direct.p_c))
    record(12, "post-selecting the coupled state directly matches full evolution", worst, TOL)


def test_criterion_13_verify_command():
    clean = main(["verify"], out=io.StringIO())
    corrupt = main(["verify", "--corrupt-bs2"], out=io.StringIO())
    record(13, f"verify exits {clean} (want 0), corrupted splitter exits {corrupt} (want 2)", float(clean != 0 or corrupt != 2), 0)
