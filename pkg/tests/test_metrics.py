import math

import numpy as np
import pytest

from causalcrit.errors import (
    DegenerateTrajectory,
    FieldCoverageGap,
    NonMonotoneEdges,
    ValidationError,
    ZeroAvailableAcceleration,
)
from causalcrit.metrics import (
    AccelField,
    DrivingTask,
    Trajectory,
    aggregate,
    alat_min,
    alat_req_dt,
    along_min,
    along_req_dt,
    btn_dt,
    discretize_metric,
    stn_dt,
)


def straight_line(v=10.0, t_end=4.0, dt=0.05):
    t = np.arange(0.0, t_end + dt / 2, dt)
    return Trajectory(t=t, x=v * t, y=np.zeros_like(t))


def braking_line(decel, v0=20.0, t_end=4.0, dt=0.05):
    """x(t) = v0 t - decel/2 t^2; v stays positive over the window."""
    t = np.arange(0.0, t_end + dt / 2, dt)
    return Trajectory(t=t, x=v0 * t - 0.5 * decel * t * t, y=np.zeros_like(t))


def circular_arc(v=10.0, radius=50.0, t_end=4.0, dt=0.05):
    t = np.arange(0.0, t_end + dt / 2, dt)
    omega = v / radius
    return Trajectory(
        t=t, x=radius * np.cos(omega * t), y=radius * np.sin(omega * t)
    )


def uniform_field(long_avail=-8.0, lat_avail=5.0, extent=300.0, cells=40):
    step = 2 * extent / cells
    shape = (cells, cells)
    return AccelField(
        x0=-extent,
        y0=-extent,
        dx=step,
        dy=step,
        long_avail=np.full(shape, long_avail),
        lat_avail=np.full(shape, lat_avail),
    )


def task(*trajectories, t_start=0.0, horizon=4.0):
    return DrivingTask(trajectories=tuple(trajectories), t_start=t_start, horizon=horizon)


class TestTrajectoryValidation:
    def test_minimum_samples(self):
        with pytest.raises(ValidationError):
            Trajectory(t=np.array([0, 1, 2, 3.0]), x=np.zeros(4), y=np.zeros(4))

    def test_strictly_increasing_time(self):
        t = np.array([0.0, 1.0, 1.0, 2.0, 3.0])
        with pytest.raises(ValidationError):
            Trajectory(t=t, x=np.zeros(5), y=np.zeros(5))

    def test_uniform_step_required(self):
        t = np.array([0.0, 1.0, 2.0, 3.5, 4.0])
        with pytest.raises(ValidationError):
            Trajectory(t=t, x=np.zeros(5), y=np.zeros(5))

    def test_task_requires_coverage(self):
        with pytest.raises(ValidationError):
            task(straight_line(t_end=2.0), horizon=4.0)

    def test_degenerate_standstill(self):
        t = np.arange(0.0, 4.01, 0.05)
        frozen = Trajectory(t=t, x=np.zeros_like(t), y=np.zeros_like(t))
        with pytest.raises(DegenerateTrajectory):
            along_req_dt(task(frozen))


class TestRequiredAccelerations:
    def test_straight_constant_velocity_zero(self):
        dt_task = task(straight_line())
        assert along_req_dt(dt_task) == 0.0
        assert alat_req_dt(dt_task) == 0.0

    def test_uniform_deceleration_recovered(self):
        dt_task = task(braking_line(3.0))
        assert along_req_dt(dt_task) == pytest.approx(-3.0, abs=0.01)

    def test_least_demanding_trajectory_wins(self):
        dt_task = task(braking_line(3.0), braking_line(1.0))
        assert along_req_dt(dt_task) == pytest.approx(-1.0, abs=0.01)

    def test_circular_arc_centripetal(self):
        v, radius = 10.0, 50.0
        dt_task = task(circular_arc(v=v, radius=radius))
        assert alat_req_dt(dt_task) == pytest.approx(v * v / radius, rel=0.02)

    def test_straight_option_dominates_lateral(self):
        dt_task = task(circular_arc(), straight_line())
        assert alat_req_dt(dt_task) == 0.0

    def test_adding_weaker_trajectory_never_raises_demand(self):
        hard = task(braking_line(4.0))
        mixed = task(braking_line(4.0), braking_line(2.0))
        assert abs(along_req_dt(mixed)) <= abs(along_req_dt(hard))
        curved = task(circular_arc(v=12.0, radius=40.0))
        relaxed = task(circular_arc(v=12.0, radius=40.0), circular_arc(v=6.0, radius=80.0))
        assert alat_req_dt(relaxed) <= alat_req_dt(curved)

    def test_time_rescaling_scales_accelerations(self):
        lam = 2.0
        base = braking_line(3.0, v0=20.0, t_end=4.0, dt=0.05)
        slowed = Trajectory(t=base.t * lam, x=base.x, y=base.y)
        fast_task = task(base)
        slow_task = task(slowed, horizon=4.0 * lam)
        assert along_req_dt(slow_task) == pytest.approx(
            along_req_dt(fast_task) / lam**2, rel=0.01
        )

    def test_step_refinement_stable(self):
        coarse = task(braking_line(3.0, dt=0.05))
        fine = task(braking_line(3.0, dt=0.025))
        a, b = along_req_dt(coarse), along_req_dt(fine)
        assert abs(a - b) <= 0.005 * abs(a)
        v, radius = 10.0, 50.0
        c = alat_req_dt(task(circular_arc(v, radius, dt=0.05)))
        d = alat_req_dt(task(circular_arc(v, radius, dt=0.025)))
        assert abs(c - d) <= 0.005 * c


class TestAvailability:
    def test_uniform_field_values(self):
        dt_task = task(straight_line())
        field = uniform_field(long_avail=-8.0, lat_avail=5.0)
        assert along_min(dt_task, field) == -8.0
        assert alat_min(dt_task, field) == 5.0

    def test_worst_cell_dominates(self):
        dt_task = task(straight_line(v=10.0))
        field = uniform_field(long_avail=-8.0)
        # the straight line runs along y=0; weaken one crossed cell
        iy = int(round((0.0 - field.y0) / field.dy))
        ix = int(round((20.0 - field.x0) / field.dx))
        long_vals = np.array(field.long_avail)
        long_vals[iy, ix] = -2.0
        weak = AccelField(
            x0=field.x0, y0=field.y0, dx=field.dx, dy=field.dy,
            long_avail=long_vals, lat_avail=field.lat_avail,
        )
        assert along_min(dt_task, weak) == -2.0

    def test_coverage_gap(self):
        dt_task = task(straight_line(v=10.0, t_end=4.0))
        small = uniform_field(extent=5.0)
        with pytest.raises(FieldCoverageGap):
            along_min(dt_task, small)

    def test_field_sign_validation(self):
        with pytest.raises(ValidationError):
            uniform_field(long_avail=1.0)
        with pytest.raises(ValidationError):
            uniform_field(lat_avail=-1.0)


class TestThreatNumbers:
    def test_straight_line_null_threats(self):
        dt_task = task(straight_line())
        field = uniform_field()
        assert btn_dt(dt_task, field) == 0.0
        assert stn_dt(dt_task, field) == 0.0

    def test_braking_ratio(self):
        dt_task = task(braking_line(3.0))
        field = uniform_field(long_avail=-8.0)
        assert btn_dt(dt_task, field) == pytest.approx(0.375, abs=0.002)

    def test_exhausted_availability_is_one(self):
        dt_task = task(braking_line(3.0))
        req = along_req_dt(dt_task)
        field = uniform_field(long_avail=req)
        assert btn_dt(dt_task, field) == pytest.approx(1.0, abs=1e-9)

    def test_zero_availability_raises(self):
        dt_task = task(braking_line(3.0))
        field = uniform_field(long_avail=0.0)
        with pytest.raises(ZeroAvailableAcceleration):
            btn_dt(dt_task, field)

    def test_threat_numbers_nonnegative(self):
        for decel in (0.0, 1.0, 3.0):
            dt_task = task(braking_line(decel) if decel else straight_line())
            field = uniform_field()
            btn = btn_dt(dt_task, field)
            assert btn >= 0.0
            assert (btn == 0.0) == (along_req_dt(dt_task) == 0.0)

    def test_time_rescaling_scales_threats(self):
        lam = 2.0
        base = braking_line(3.0)
        slowed = Trajectory(t=base.t * lam, x=base.x, y=base.y)
        field = uniform_field(long_avail=-8.0)
        fast = btn_dt(task(base), field)
        slow = btn_dt(task(slowed, horizon=8.0), field)
        assert slow == pytest.approx(fast / lam**2, rel=0.01)


class TestAggregate:
    def test_max_mode(self):
        assert aggregate(0.375, 0.2) == 0.375

    def test_max_of_equal(self):
        assert aggregate(0.7, 0.7) == 0.7

    def test_zero(self):
        assert aggregate(0.0, 0.0) == 0.0

    def test_other_modes(self):
        assert aggregate(0.3, 0.4, mode="mean") == pytest.approx(0.35)
        assert aggregate(0.3, 0.4, mode="euclidean") == pytest.approx(0.5)

    def test_unknown_mode(self):
        with pytest.raises(ValidationError):
            aggregate(0.1, 0.1, mode="median")


class TestDiscretize:
    def test_below_first_edge(self):
        assert discretize_metric(0.375, [0.5], labels=["low", "high"]) == "low"

    def test_on_edge_goes_up(self):
        assert discretize_metric(0.5, [0.5], labels=["low", "high"]) == "high"

    def test_middle_bin(self):
        assert discretize_metric(0.5, [0.0, 1.0]) == "bin1"

    def test_non_monotone_rejected(self):
        with pytest.raises(NonMonotoneEdges):
            discretize_metric(0.5, [1.0, 0.5])
        with pytest.raises(NonMonotoneEdges):
            discretize_metric(0.5, [])

    def test_label_count_checked(self):
        with pytest.raises(ValidationError):
            discretize_metric(0.5, [0.5], labels=["only"])
