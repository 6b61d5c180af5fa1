"""Kernel density estimation against closed forms and a brute-force oracle."""

import math

import numpy as np
import pytest
from hypothesis import given, settings
from hypothesis import strategies as st

from commflow import (
    Grid,
    InvalidIntervalError,
    KdeParams,
    default_grid,
    estimate_density,
    grid_for_range,
    integrate,
    kernel,
    parse_events,
    profile_pair,
)

# closed-form values of the normal density, frozen
G_0 = 0.3989422804014327        # 1/sqrt(2*pi)
G_1 = 0.24197072451914337       # exp(-1/2)/sqrt(2*pi)
G_2_2_5 = 0.07978845608028654   # 1/(5*sqrt(2*pi))


def brute_density(timestamps, params, grid):
    """Untruncated double-loop reference implementation."""
    ts = np.asarray(timestamps, dtype=np.float64)
    out = np.zeros(grid.n)
    if len(ts) == 0:
        return out
    for j, t in enumerate(grid.points()):
        s = 0.0
        for x in ts:
            z = ((t - x) / params.h - params.mu) / params.sigma
            s += math.exp(-0.5 * z * z)
        out[j] = s / (len(ts) * params.h * params.sigma * math.sqrt(2 * math.pi))
    return out


def test_kernel_closed_forms():
    assert kernel(0.0, KdeParams(0, 1, 1)) == pytest.approx(G_0, abs=1e-12)
    assert kernel(1.0, KdeParams(0, 1, 1)) == pytest.approx(G_1, abs=1e-12)
    assert kernel(2.0, KdeParams(2, 5, 1)) == pytest.approx(G_2_2_5, abs=1e-12)


def test_kernel_positive_and_peaked_at_mu():
    p = KdeParams(mu=3.0, sigma=2.0)
    xs = np.linspace(-20, 20, 401)
    vals = kernel(xs, p)
    assert np.all(vals > 0)
    assert xs[np.argmax(vals)] == pytest.approx(3.0)


def test_params_validation():
    with pytest.raises(ValueError):
        KdeParams(sigma=0.0)
    with pytest.raises(ValueError):
        KdeParams(h=-1.0)
    with pytest.raises(ValueError):
        KdeParams(mu=float("nan"))


def test_grid_validation():
    with pytest.raises(ValueError):
        Grid(0.0, 0.0, 10)
    with pytest.raises(ValueError):
        Grid(0.0, 1.0, 1)


def test_estimate_single_event_at_event_time():
    g = Grid(-5.0, 0.1, 101)  # grid point 50 sits at t=0
    f = estimate_density([0.0], KdeParams(0, 1, 1), g)
    assert f[50] == pytest.approx(G_0, abs=1e-12)


def test_estimate_two_events_midpoint():
    g = Grid(-5.0, 0.1, 101)
    f = estimate_density([-1.0, 1.0], KdeParams(0, 1, 1), g)
    assert f[50] == pytest.approx(G_1, abs=1e-12)


def test_estimate_bandwidth_two():
    g = Grid(-5.0, 0.1, 101)
    f = estimate_density([0.0], KdeParams(0, 1, 2), g)
    assert f[50] == pytest.approx(0.19947114020071635, abs=1e-12)


def test_estimate_empty_is_zero():
    g = Grid(0.0, 1.0, 10)
    assert np.array_equal(estimate_density([], KdeParams(), g), np.zeros(10))


def test_profile_pair_directions():
    log, _ = parse_events("1 2 0\n")
    seq = log.pair_sequence("1", "2")
    g = Grid(-5.0, 0.1, 101)
    prof = profile_pair(seq, KdeParams(0, 1, 1), g)
    assert prof.f_out[50] == pytest.approx(G_0, abs=1e-12)
    assert np.array_equal(prof.f_in, np.zeros(101))
    assert prof.n_out == 1 and prof.n_in == 0
    assert prof.pair == ("1", "2")


def test_profile_symmetric_traffic():
    lines = "".join(f"1 2 {t}\n2 1 {t}\n" for t in range(0, 50, 5))
    log, _ = parse_events(lines)
    seq = log.pair_sequence("1", "2")
    g = Grid(-10.0, 0.25, 281)
    prof = profile_pair(seq, KdeParams(0, 1, 1), g)
    assert np.allclose(prof.f_in, prof.f_out, rtol=0, atol=1e-15)


def test_profile_matches_brute_force_mixed_pair():
    rng = np.random.default_rng(7)
    lines = []
    for t in np.sort(rng.uniform(0, 500, 10)):
        lines.append(f"1 2 {float(t)!r}\n")
    for t in np.sort(rng.uniform(0, 500, 10)):
        lines.append(f"2 1 {float(t)!r}\n")
    log, _ = parse_events("".join(lines))
    seq = log.pair_sequence("1", "2")
    params = KdeParams(0, 1, 20.0)
    g = default_grid(seq, params, 512)
    prof = profile_pair(seq, params, g)
    ref_out = brute_density(seq.times_out, params, g)
    ref_in = brute_density(seq.times_in, params, g)
    scale = max(ref_out.max(), ref_in.max())
    assert np.max(np.abs(prof.f_out - ref_out)) / scale < 1e-12
    assert np.max(np.abs(prof.f_in - ref_in)) / scale < 1e-12


def test_integrate_constant():
    g = Grid(0.0, 1.0, 11)
    assert integrate(np.ones(11), g, (0.0, 10.0)) == pytest.approx(10.0, abs=1e-12)


def test_integrate_normalization_of_kde():
    params = KdeParams(0, 1, 1)
    g = Grid(-10.0, 0.01, 2001)
    f = estimate_density([0.0], params, g)
    assert integrate(f, g) == pytest.approx(1.0, abs=1e-6)


def test_integrate_zero_width():
    g = Grid(0.0, 1.0, 11)
    assert integrate(np.arange(11.0), g, (5.0, 5.0)) == 0.0


def test_integrate_partial_cells():
    # linear ramp y=t on step-1 grid: exact integral of the interpolant
    g = Grid(0.0, 1.0, 11)
    y = np.arange(11.0)
    assert integrate(y, g, (0.5, 2.5)) == pytest.approx(3.0, abs=1e-12)
    assert integrate(y, g, (0.25, 0.75)) == pytest.approx(0.25, abs=1e-12)


def test_integrate_clips_to_grid():
    g = Grid(0.0, 1.0, 11)
    assert integrate(np.ones(11), g, (-100.0, 100.0)) == pytest.approx(10.0)


def test_integrate_rejects_reversed_interval():
    g = Grid(0.0, 1.0, 11)
    with pytest.raises(InvalidIntervalError):
        integrate(np.ones(11), g, (3.0, 2.0))


def test_integrate_length_mismatch():
    g = Grid(0.0, 1.0, 11)
    with pytest.raises(ValueError):
        integrate(np.ones(5), g)


def test_default_grid_span():
    log, _ = parse_events("1 2 0\n2 1 100\n")
    seq = log.pair_sequence("1", "2")
    g = default_grid(seq, KdeParams(0, 1, 1), 1001)
    assert g.start == pytest.approx(-8.0)
    assert g.step == pytest.approx(0.116)
    assert g.n == 1001


def test_default_grid_empty_seq():
    log, _ = parse_events("")
    seq = log.pair_sequence("1", "2")
    g = default_grid(seq, KdeParams(), 100)
    assert (g.start, g.step, g.n) == (0.0, 1.0, 2)


def test_default_grid_single_event():
    log, _ = parse_events("1 2 50\n")
    seq = log.pair_sequence("1", "2")
    g = default_grid(seq, KdeParams(0, 2, 1), 101)
    assert g.start == pytest.approx(34.0)
    assert g.end == pytest.approx(66.0)


def test_grid_for_range():
    g = grid_for_range(10.0, 20.0, 101)
    assert g.start == 10.0 and g.end == pytest.approx(20.0)
    with pytest.raises(InvalidIntervalError):
        grid_for_range(5.0, 5.0)


# -- properties ---------------------------------------------------------------

finite_times = st.lists(
    st.floats(min_value=-1e4, max_value=1e4, allow_nan=False), min_size=1, max_size=40
)


@given(
    finite_times,
    st.floats(min_value=0.1, max_value=5.0),
    st.floats(min_value=0.1, max_value=50.0),
)
@settings(max_examples=40, deadline=None)
def test_oracle_equivalence_property(ts, sigma, h):
    params = KdeParams(0.0, sigma, h)
    lo, hi = min(ts) - 2 * sigma * h, max(ts) + 2 * sigma * h
    g = Grid(lo, (hi - lo) / 63 or 1.0, 64)
    fast = estimate_density(ts, params, g)
    ref = brute_density(ts, params, g)
    scale = ref.max() or 1.0
    assert np.max(np.abs(fast - ref)) / scale < 1e-9


@given(finite_times, st.floats(min_value=0.5, max_value=4.0))
@settings(max_examples=25, deadline=None)
def test_normalization_property(ts, h):
    params = KdeParams(0.0, 1.0, h)
    pad = 10 * params.sigma * h
    lo, hi = min(ts) - pad, max(ts) + pad
    step = params.sigma * h / 10
    n = int(math.ceil((hi - lo) / step)) + 1
    g = Grid(lo, step, n)
    f = estimate_density(ts, params, g)
    assert integrate(f, g) == pytest.approx(1.0, abs=1e-4)


@given(finite_times, finite_times)
@settings(max_examples=30, deadline=None)
def test_linearity_in_count(ts_a, ts_b):
    params = KdeParams(0.0, 1.0, 2.0)
    both = ts_a + ts_b
    lo, hi = min(both) - 5, max(both) + 5
    g = Grid(lo, (hi - lo) / 99 or 1.0, 100)
    f_a = estimate_density(ts_a, params, g)
    f_b = estimate_density(ts_b, params, g)
    f_ab = estimate_density(both, params, g)
    na, nb = len(ts_a), len(ts_b)
    mix = (na * f_a + nb * f_b) / (na + nb)
    assert np.max(np.abs(f_ab - mix)) < 1e-12


@given(finite_times, st.floats(min_value=-1e5, max_value=1e5, allow_nan=False))
@settings(max_examples=30, deadline=None)
def test_shift_equivariance(ts, delta):
    params = KdeParams(0.0, 1.0, 1.0)
    lo, hi = min(ts) - 3, max(ts) + 3
    g = Grid(lo, (hi - lo) / 49 or 1.0, 50)
    g2 = Grid(lo + delta, g.step, g.n)
    f = estimate_density(ts, params, g)
    f2 = estimate_density([t + delta for t in ts], params, g2)
    scale = f.max() or 1.0
    assert np.max(np.abs(f - f2)) / scale < 1e-9


def test_monotone_smoothing_in_h():
    rng = np.random.default_rng(3)
    ts = rng.uniform(0, 100, 30)
    g = Grid(-40.0, 0.2, 901)
    peaks = []
    for h in [0.5, 1.0, 2.0, 4.0, 8.0]:
        peaks.append(estimate_density(ts, KdeParams(0, 1, h), g).max())
    assert all(a >= b - 1e-15 for a, b in zip(peaks, peaks[1:]))
