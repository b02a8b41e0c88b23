import cmath
import math

import numpy as np
import pytest
from scipy.stats import spearmanr

from blaschke.errors import DomainError, ExceptionalSetError
from blaschke.product import eval_logderiv
from blaschke.exceptional import build_circular_E, build_radial_arcs, contains, free_angle, radial_membership
from blaschke.verify import (
    MIN_SEPARATION,
    admissible_radii,
    angle_grid,
    bounded,
    decreasing_tail,
    fit_exponent,
    ladder,
    nudge_outside,
    radial_split,
    sweep,
    sweep_table,
    verify_circular,
    verify_radial,
    verify_remark1,
)
from blaschke.weights import WeightFunction
from blaschke.zeros import ZeroSequence, gen_geometric, gen_power_law


def single(r, theta=0.0):
    return ZeroSequence(np.array([r]), np.array([theta]))


def test_ladder():
    np.testing.assert_array_equal(ladder(1, 3), [0.5, 0.75, 0.875])
    with pytest.raises(DomainError):
        ladder(3, 2)


def test_fit_exact_power_laws():
    r = ladder(4, 18)
    slope, res = fit_exponent(np.column_stack([r, 1 / (1 - r)]))
    assert slope == pytest.approx(1.0, abs=1e-12) and res < 1e-10
    slope, res = fit_exponent(np.column_stack([r, 7 / (1 - r) ** 2]))
    assert slope == pytest.approx(2.0, abs=1e-12) and res < 1e-10


def test_fit_log_corrected_power_law():
    r = ladder(4, 18)
    M = (1 - r) ** -1.5 * np.log(1 / (1 - r))
    slope, _ = fit_exponent(np.column_stack([r, M]))
    assert 1.5 < slope < 1.7


def test_fit_needs_four_positive_samples():
    with pytest.raises(DomainError):
        fit_exponent([(0.5, 1.0), (0.75, 2.0), (0.875, 3.0)])
    with pytest.raises(DomainError):
        fit_exponent([(0.5, 1.0), (0.75, 2.0), (0.875, 0.0), (0.9, 1.0)])


def test_trend_surrogates():
    assert decreasing_tail([4, 5, 3, 2, 1.5, 1])
    assert not decreasing_tail([4, 3, 2, 2.5, 1])
    assert not decreasing_tail([4, 4, 4, 4])  # nonincreasing but not halved
    assert bounded([1, 2, 1, 1.5, 2, 1.9])
    assert not bounded([1, 1, 1, 5])


def test_angle_grid_contains_zero_angles():
    seq = gen_geometric(0.5, 7, "golden")
    g = angle_grid(seq, 16)
    assert set(seq.angles.tolist()) <= set(g.tolist())
    assert np.all(np.diff(g) > 0)


def test_nudge_to_nearest_non_member():
    E = build_circular_E(single(0.5), WeightFunction(1.0), 1.0)  # (0.25, 0.75)
    assert nudge_outside(E, 0.8) == (0.8, 0)
    t, steps = nudge_outside(E, 0.6)
    assert t == np.nextafter(0.75, 2.0) and steps == 1 and not contains(E, t)
    assert nudge_outside(E, 0.75) == (0.75, 0)


def test_nudge_keeps_clear_of_zero():
    seq = single(0.9)
    E = build_circular_E(seq, WeightFunction(1.0), 3.0)  # half-width 1e-4 * 0.1 = 1e-5
    t, _ = nudge_outside(E, 0.9, seq.radii)
    assert not contains(E, t) and t > 0.9
    tiny = build_circular_E(single(1 - 2**-20), WeightFunction(1.0), 3.0)
    t, _ = nudge_outside(tiny, 1 - 2**-20, [1 - 2**-20])
    assert t - (1 - 2**-20) >= MIN_SEPARATION


def test_nudge_fails_when_window_covered():
    E = build_circular_E(single(0.5), WeightFunction(1.0), 1.0)
    with pytest.raises(ExceptionalSetError):
        nudge_outside(E, 0.3)  # window [0.3, 0.65] inside (0.25, 0.75)


def test_admissible_radii_skip_and_fail():
    E = build_circular_E(single(0.5), WeightFunction(1.0), 1.0)
    kept, skipped = admissible_radii(E, [0.3, 0.8, 0.9, 0.95, 0.99])
    assert skipped == [0.3] and len(kept) == 4
    with pytest.raises(ExceptionalSetError):
        admissible_radii(E, [0.3, 0.35, 0.8, 0.9, 0.95])


def single_zero_max(r, a=0.5):
    """Max over |z| = r of |B'/B| for one zero at a > 0: attained at z = r."""
    return (1 - a * a) / ((1 - a * r) * abs(r - a))


def test_single_zero_circular():
    radii = ladder(2, 20)
    rep = verify_circular(single(0.5), WeightFunction(1.0), 1.0, radii)
    assert len(rep.samples) == 19
    for s in rep.samples:
        assert s.nudges == 0 and s.r == s.requested
        np.testing.assert_allclose(s.M, single_zero_max(s.r), rtol=1e-13)
        np.testing.assert_allclose(s.normalized, s.M * (1 - s.r) ** 3, rtol=1e-14)
    assert rep.verdict and rep.fitted_slope < 0.5


def test_far_ring_single_term_bound():
    seq = single(0.5)
    for r in 1 - np.geomspace(1e-2, 1e-8, 20):
        for th in np.linspace(0, 2 * np.pi, 32):
            v = abs(eval_logderiv(seq, cmath.rect(r, th)).value)
            assert v <= single_zero_max(r) * (1 + 1e-14)


def test_circular_geometric_family():
    seq = gen_geometric(0.5, 25, "golden")
    h = WeightFunction(0.5)
    rep = verify_circular(seq, h, 1.0, ladder(4, 16))
    assert rep.verdict
    assert rep.predicted_exponent == 2.0
    E = build_circular_E(seq, h, 1.0)
    rs = [s.r for s in rep.samples]
    assert not np.any(contains(E, rs)) and np.all(np.diff(rs) > 0)
    assert rep.summary_extra["bound_violations"] == 0
    assert rep.summary_extra["max_partition_error"] < 1e-10
    assert all(s.extra["near_certified"] for s in rep.samples)


def test_report_serialisation():
    rep = verify_circular(single(0.5), WeightFunction(1.0), 1.0, ladder(5, 16))
    lines = rep.table().splitlines()
    assert len(lines) == 13 and lines[0].startswith("r\trequested\tnudges")
    assert float(lines[1].split("\t")[0]) == rep.samples[0].r
    summ = rep.summary()
    assert summ["verdict"] == "pass" and summ["samples"] == 12


def test_circular_rejects_small_beta():
    with pytest.raises(DomainError):
        verify_circular(single(0.5), WeightFunction(1.0), 0.5, ladder(2, 10))


def test_radial_single_zero_on_opposite_ray():
    seq = single(0.5, math.pi)
    h = WeightFunction(0.5)
    arcs = build_radial_arcs(seq, 2.0)
    assert not radial_membership(arcs, 0.0, 1)
    radii = ladder(2, 18)
    for r in radii:
        sp = radial_split(seq, complex(r, 0), 2, h, 2.0)
        # the zero is in the head; its distance to the ray is 1/2
        assert sp.head_bound == pytest.approx(3.0)
        assert abs(sp.head) <= sp.head_bound
        assert sp.partition_error < 1e-12
    rep = verify_radial(seq, h, 0.0, 1, radii, arcs)
    assert rep.verdict and rep.normalized[-1] < rep.normalized[0]


def test_radial_rejects_theta_in_tail():
    seq = gen_geometric(0.5, 30, "golden")
    with pytest.raises(DomainError):
        verify_radial(seq, WeightFunction(0.5), float(seq.angles[10]), 5, ladder(4, 18))


def test_radial_geometric_family():
    seq = gen_geometric(0.5, 30, "golden")
    arcs = build_radial_arcs(seq, 2.0)
    theta = free_angle(arcs, 5)
    rep = verify_radial(seq, WeightFunction(0.5), theta, 5, ladder(4, 18), arcs)
    tail = rep.normalized[-6:]
    assert np.all(np.diff(tail) < 0)
    assert rep.verdict and rep.summary_extra["bound_violations"] == 0
    assert rep.summary_extra["max_partition_error"] < 1e-10


def test_remark1_single_zero():
    rep = verify_remark1(single(0.5), WeightFunction(0.5), 1.0, ladder(4, 16))
    assert math.isfinite(rep.summary_extra["density_constant"])
    assert rep.trend_ok


def test_remark1_geometric_window_counts():
    rep = verify_remark1(gen_geometric(0.5, 25, "golden"), WeightFunction(0.5), 1.0, ladder(4, 16))
    assert rep.summary_extra["density_constant"] <= 4.0
    assert all(s.extra["near_count"] <= 2 for s in rep.samples)
    assert rep.trend_ok


def test_remark1_power_law_p3():
    rep = verify_remark1(gen_power_law(3.0, 200, "golden"), WeightFunction(0.5), 1.0, ladder(4, 16))
    assert rep.verdict
    v = rep.normalized
    assert np.max(v[len(v) // 2:]) <= 2 * np.median(v[: len(v) // 2])


def test_remark1_inapplicable_without_density_samples():
    rep = verify_remark1(single(1 - 1e-7), WeightFunction(0.5), 1.0, ladder(4, 8))
    assert not rep.verdict and "inapplicable" in rep.notes[0]


def test_one_row_sweep_equals_direct_call():
    cfg = {"families": [{"family": "geometric", "c": 0.5, "count": 25, "angles": "golden"}],
           "weights": [{"alpha": 0.5}], "betas": [1.0]}
    row = sweep(cfg)[0]
    rep = verify_circular(gen_geometric(0.5, 25, "golden"), WeightFunction(0.5), 1.0, ladder(4, 16))
    assert row["fitted_slope"] == rep.fitted_slope and row["margin"] == rep.margin
    assert row["verdict"] == "pass"


def test_sweep_rank_correlation():
    cfg = {"families": [{"family": "geometric", "c": 0.5, "count": 25, "angles": "golden"}],
           "weights": [{"alpha": a} for a in (0.25, 0.5, 1.0)], "betas": [1.0, 2.0]}
    rows = sweep(cfg)
    assert all(r["verdict"] == "pass" for r in rows)
    rho = spearmanr([r["predicted"] for r in rows], [r["fitted_slope"] for r in rows]).statistic
    assert rho > 0.8


def test_sweep_geometric_ratios():
    cfg = {"families": [{"family": "geometric", "c": c, "count": 25, "angles": "golden"} for c in (0.3, 0.5, 0.7)],
           "modes": ["circular", "radial"], "interpolating": {"beta": 1}}
    rows = sweep(cfg)
    by = {(r["family"], r["mode"]): r for r in rows}
    for c in (0.3, 0.5, 0.7):
        for mode in ("circular", "radial"):
            row = by[(f"geometric(c={c},n=25)", mode)]
            assert row["fitted_slope"] <= row["predicted"] + 0.5
    # c = 0.3: the base-2 ladder beats against the base-0.3 zero spacing, so the
    # normalized values oscillate and the literal monotone surrogate rejects the row
    assert by[("geometric(c=0.3,n=25)", "circular")]["verdict"] == "fail"
    assert by[("geometric(c=0.5,n=25)", "circular")]["verdict"] == "pass"
    assert by[("geometric(c=0.7,n=25)", "circular")]["verdict"] == "pass"
    assert all(by[(f"geometric(c={c},n=25)", "radial")]["verdict"] == "pass" for c in (0.3, 0.5, 0.7))
    probe = rows[-1]
    assert probe["mode"] == "interpolating" and probe["verdict"] == "probe"
    assert "passing epsilons" in probe["detail"]


def test_sweep_records_row_errors():
    cfg = {"families": [{"family": "geometric", "c": 0.5, "count": 10}], "modes": ["circular", "spiral"]}
    rows = sweep(cfg)
    assert rows[0]["verdict"] in ("pass", "fail")
    assert rows[1]["verdict"] == "error" and "spiral" in rows[1]["detail"]
    text = sweep_table(rows)
    assert text.splitlines()[0].startswith("family,mode,alpha")
    assert len(text.splitlines()) == 3
