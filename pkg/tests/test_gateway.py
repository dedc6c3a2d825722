import pytest

from robocoach import catalog as cat
from robocoach import gateway as gw
from robocoach.errors import InvalidCommand, NotOnFloor, NotStanding


def sim(catalog, **cfg):
    return gw.SimulatedRobot(
        config=gw.SimConfig(**cfg),
        exercise_positions={e.id: e.position for e in catalog.exercises},
    )


# -- topic strings -----------------------------------------------------------------


def test_topic_strings_are_pinned():
    assert gw.TOPIC_HOT_DEVICE == "HotDeviceDetected"
    assert gw.TOPIC_BATTERY == "BatteryLevel"
    assert gw.TOPIC_JOINT_TEMPS == "JointTemperatures"
    assert gw.TOPIC_HEADING == "Heading"
    assert gw.TOPIC_BUTTONS == "ButtonLinkStatus"
    assert gw.TOPICS == frozenset(
        {"HotDeviceDetected", "BatteryLevel", "JointTemperatures", "Heading", "ButtonLinkStatus"}
    )


# -- heading arithmetic ---------------------------------------------------------------


def test_wrap_heading_range():
    assert gw.wrap_heading(175.0 + 12.0) == pytest.approx(-173.0)
    assert gw.wrap_heading(180.0) == 180.0
    assert gw.wrap_heading(-180.0) == 180.0
    assert gw.wrap_heading(540.0) == 180.0
    for deg in [x * 7.3 for x in range(-100, 100)]:
        wrapped = gw.wrap_heading(deg)
        assert -180.0 < wrapped <= 180.0


# -- command validation ---------------------------------------------------------------


def test_speak_requires_text():
    with pytest.raises(InvalidCommand):
        gw.validate_command(gw.RobotCommand.speak(""))


def test_co_perform_requires_positive_duration():
    with pytest.raises(InvalidCommand):
        gw.validate_command(gw.RobotCommand.co_perform("squat", 0.0))


def test_volume_range():
    gw.validate_command(gw.RobotCommand.set_volume(0))
    gw.validate_command(gw.RobotCommand.set_volume(100))
    with pytest.raises(InvalidCommand):
        gw.validate_command(gw.RobotCommand.set_volume(101))
    with pytest.raises(InvalidCommand):
        gw.validate_command(gw.RobotCommand.set_volume(-1))


# -- battery ---------------------------------------------------------------------------


def test_battery_drain_co_perform(catalog):
    robot = sim(catalog)
    robot.send(gw.RobotCommand.co_perform("squat", 600.0))
    for _ in range(600 * 4):
        robot.sim_step(0.25)
    # 10 min at 1.5 %/min
    assert robot.battery_pct == pytest.approx(85.0)
    assert robot.rejected == []


def test_battery_drain_segments_across_activity_change(catalog):
    """One long step spanning a co_perform expiry must split the drain."""
    robot = sim(catalog)
    robot.send(gw.RobotCommand.co_perform("boxing", 60.0))
    robot.sim_step(120.0)
    # 1 min co_perform at 1.5 + 1 min idle at 0.1
    assert robot.battery_pct == pytest.approx(100.0 - 1.5 - 0.1)


def test_battery_publishes_on_change_only(catalog):
    robot = sim(catalog)
    sub = robot.subscribe(gw.TOPIC_BATTERY)
    sub.drain()  # retained initial value
    robot.sim_step(0.25)
    first = sub.drain()
    assert len(first) == 1
    # if the level does not change there is no republish
    robot2 = sim(catalog, battery_drain_pct_per_min={"idle": 0.0, "demonstrate": 1.0, "co_perform": 1.5})
    sub2 = robot2.subscribe(gw.TOPIC_BATTERY)
    sub2.drain()
    robot2.sim_step(0.25)
    assert sub2.drain() == []


# -- heat and hot devices ------------------------------------------------------------------


def test_hot_device_rising_edge(catalog):
    robot = sim(catalog, ambient_temp_u=30.0, joint_heat_rate_u_per_min=2.0, hot_threshold_u=36.0)
    sub = robot.subscribe(gw.TOPIC_HOT_DEVICE)
    robot.send(gw.RobotCommand.co_perform("squat", 600.0))
    for _ in range(4 * 60 * 4):  # 4 minutes, past the 3-minute crossing
        robot.sim_step(0.25)
    hot_msgs = sub.drain()
    joints = {m["joint"] for m in hot_msgs}
    assert len(hot_msgs) == len(joints), "one rising edge per joint per excursion"
    assert joints, "threshold crossing publishes"


def test_cooling_rearms_hot_detection(catalog):
    robot = sim(catalog, ambient_temp_u=30.0, joint_heat_rate_u_per_min=2.0,
                joint_cool_rate_u_per_min=4.0, hot_threshold_u=33.0)
    sub = robot.subscribe(gw.TOPIC_HOT_DEVICE)
    robot.send(gw.RobotCommand.co_perform("squat", 120.0))
    robot.sim_step(120.0)  # 2 min heating: 30 -> 34, one edge
    first = len(sub.drain())
    assert first >= 1
    robot.sim_step(120.0)  # idle cooling back to ambient
    robot.send(gw.RobotCommand.co_perform("squat", 120.0))
    robot.sim_step(120.0)  # heats past threshold again
    assert len(sub.drain()) == first, "second excursion publishes a fresh edge per joint"


# -- posture, standup, heading -------------------------------------------------------------


def test_floor_exercise_sets_floor_posture(catalog):
    robot = sim(catalog)
    floor_ex = next(e.id for e in catalog.exercises if e.position is cat.Position.FLOOR)
    robot.send(gw.RobotCommand.co_perform(floor_ex, 30.0))
    robot.sim_step(0.25)
    assert robot.posture is gw.Posture.FLOOR


def test_standup_drifts_then_correct_heading_zeroes(catalog):
    robot = sim(catalog, standup_drift_deg=12.0)
    floor_ex = next(e.id for e in catalog.exercises if e.position is cat.Position.FLOOR)
    robot.send(gw.RobotCommand.co_perform(floor_ex, 1.0))
    robot.sim_step(1.0)
    robot.stand_up_from_floor()
    assert robot.heading_deg == pytest.approx(12.0)
    assert robot.posture is gw.Posture.STANDING
    robot.correct_heading()
    assert robot.heading_deg == 0.0


def test_standup_requires_floor(catalog):
    robot = sim(catalog)
    with pytest.raises(NotOnFloor):
        robot.stand_up_from_floor()


def test_correct_heading_requires_standing(catalog):
    robot = sim(catalog)
    floor_ex = next(e.id for e in catalog.exercises if e.position is cat.Position.FLOOR)
    robot.send(gw.RobotCommand.co_perform(floor_ex, 30.0))
    robot.sim_step(0.25)
    with pytest.raises(NotStanding):
        robot.correct_heading()


def test_uncorrected_drift_accumulates(catalog):
    robot = sim(catalog, standup_drift_deg=12.0)
    floor_ex = next(e.id for e in catalog.exercises if e.position is cat.Position.FLOOR)
    for _ in range(3):
        robot.send(gw.RobotCommand.co_perform(floor_ex, 1.0))
        robot.sim_step(1.0)
        robot.stand_up_from_floor()
    assert robot.heading_deg == pytest.approx(36.0)


# -- bus semantics ----------------------------------------------------------------------


def test_retained_value_delivered_on_subscribe(catalog):
    robot = sim(catalog)
    sub = robot.subscribe(gw.TOPIC_BATTERY)
    retained = sub.drain()
    assert len(retained) == 1
    assert retained[0]["battery_pct"] == pytest.approx(100.0)


def test_subscription_is_fifo(catalog):
    robot = sim(catalog)
    sub = robot.subscribe(gw.TOPIC_HEADING)
    sub.drain()
    floor_ex = next(e.id for e in catalog.exercises if e.position is cat.Position.FLOOR)
    headings = []
    for _ in range(3):
        robot.send(gw.RobotCommand.co_perform(floor_ex, 1.0))
        robot.sim_step(1.0)
        robot.stand_up_from_floor()
        headings.append(robot.heading_deg)
    got = [m["heading_deg"] for m in sub.drain()]
    assert got == sorted(set(got), key=got.index)
    assert got[-1] == pytest.approx(headings[-1])


def test_commands_apply_at_next_step(catalog):
    robot = sim(catalog)
    robot.send(gw.RobotCommand.set_volume(80))
    assert robot.volume == 50  # queued, not applied
    robot.sim_step(0.25)
    assert robot.volume == 80


def test_button_disconnect_publishes(catalog):
    robot = sim(catalog)
    sub = robot.subscribe(gw.TOPIC_BUTTONS)
    sub.drain()
    robot.set_button_connected("red", False)
    msgs = sub.drain()
    assert len(msgs) == 1
    assert msgs[0]["buttons_connected"]["red"] is False


def test_wire_frame_round_trip():
    import io

    frame = {"t_sim_s": 1.25, "battery_pct": 99.5}
    encoded = gw.encode_wire_frame(frame)
    back = gw.read_wire_frame(io.BytesIO(encoded).read)
    assert back == frame
