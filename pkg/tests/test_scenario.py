import csv
import io
import math

import numpy as np
import pytest

from locomanip.scenario import (BUILTIN_NAMES, TRACE_COLUMNS, ConfigError, ScenarioConfig,
                                apply_overrides, builtin, parse_config, run, summarize)


def short(name="push5", duration=0.3, **overrides):
    return apply_overrides(builtin(name), {"duration": str(duration), **overrides})


@pytest.mark.parametrize("name", BUILTIN_NAMES)
def test_builtins_validate(name):
    cfg = builtin(name)
    cfg.validate()
    assert cfg.name == name
    assert cfg.substeps == 30


def test_builtin_constants():
    assert builtin("push3").object.m_b == 3.0 and builtin("push5").object.m_b == 5.0
    assert builtin("push5").terrain.zones[0].mu_object == 0.6
    assert builtin("locomotion").object is None
    assert math.degrees(builtin("slope20").terrain.slope_angle) == pytest.approx(20.0)
    loads = builtin("varying-load").object.mass_schedule
    assert [m for _, m in loads] == [4.0, 5.0, 6.0, 7.0]
    zones = builtin("friction-transition").terrain.zones
    assert zones[0].mu_robot == 0.3 and zones[-1].mu_robot == 0.8
    with pytest.raises(ConfigError):
        builtin("push9")


def test_parse_config_text():
    text = """
    # base scenario plus a few changes
    scenario = push5
    duration = 2.0          # seconds
    object.mass_schedule = 0:4, 1:6
    gains.Gamma_m = 20
    terrain.zones = -10:0.6:0.6, 3:0.8:0.6
    commands.segments = 0:0.2:0:0; 1:0.3:0:0
    """
    cfg = parse_config(text)
    assert cfg.name == "push5" and cfg.duration == 2.0
    assert cfg.object.mass_schedule == ((0.0, 4.0), (1.0, 6.0))
    assert cfg.gains.Gamma_m == 20.0
    assert len(cfg.terrain.zones) == 2
    assert cfg.commands.at(1.5)[0][0] == pytest.approx(0.3)
    assert isinstance(parse_config(""), ScenarioConfig)


@pytest.mark.parametrize("text, path", [
    ("gait.duty = 1.2", "gait.duty"),
    ("control_dt = 0.0305", "control_dt"),
    ("duration = -1", "duration"),
    ("duration = soon", "duration"),
    ("gains.lambda = 0", "gains"),
    ("mpc.Q = 1, 2", "mpc.Q"),
    ("robot.inertia = 0, 1, 1", "robot.inertia"),
    ("object.events = 3:explode", "object.events"),
    ("widgets.count = 3", "widgets.count"),
    ("bogus = 1", "bogus"),
    ("terrain.zones = 0:0.6", "terrain.zones"),
    ("just words", "line 1"),
    ("duration = 1\nduration = 2", "duration"),
])
def test_invalid_configs_name_their_field(text, path):
    with pytest.raises(ConfigError) as err:
        parse_config(text)
    assert err.value.path == path


def test_resolved_lists_defaults():
    res = builtin("push5").resolved()
    assert res["gains.lambda"] == 2.0 and res["gains.Gamma_m"] == 10.0
    assert res["gains.K_D"] == "200,200,200"
    assert res["mpc.k"] == 10 and res["control_dt"] == 0.03
    assert res["mpc.injection"] == "scaled"
    # resolved values round-trip through the parser
    keys = ("duration", "terrain.zones", "object.mass_schedule", "gains.Gamma_f", "mpc.Q")
    again = apply_overrides(ScenarioConfig(name="push5"), {k: str(res[k]) for k in keys})
    assert {k: again.resolved()[k] for k in keys} == {k: res[k] for k in keys}


def test_one_control_step_gives_one_record():
    result = run(short(duration=0.03))
    assert len(result.rows) == 1 and result.summary.records == 1
    assert result.rows[0][0] == 0.0


def test_trace_shape_and_monotone_time():
    result = run(short(duration=0.3))
    assert len(result.rows) == 10
    assert all(len(r) == len(TRACE_COLUMNS) for r in result.rows)
    t = result.column("t")
    assert np.all(np.diff(t) > 0)
    assert result.csv().splitlines()[0] == ",".join(TRACE_COLUMNS)
    # swing legs carry no force in the recorded first substep
    for r in result.rows:
        for leg in ("FR", "FL", "RR", "RL"):
            if not r[TRACE_COLUMNS.index(f"contact_{leg}")]:
                assert r[TRACE_COLUMNS.index(f"f_{leg}_z")] == 0.0


def test_determinism_byte_identical():
    cfg = short(duration=0.6)
    assert run(cfg).csv() == run(cfg).csv()


def test_summary_recomputed_from_csv():
    result = run(short(duration=0.9))
    rows = list(csv.DictReader(io.StringIO(result.csv())))
    tail = rows[len(rows) // 2:]
    errs = [abs(float(r["v_err"])) for r in tail]
    s = result.summary
    assert s.records == len(rows)
    assert abs(s.mean_abs_v_err - sum(errs) / len(errs)) <= 1e-9
    assert abs(s.max_abs_v_err - max(errs)) <= 1e-9
    assert abs(s.mean_v_axis - sum(float(r["v_axis"]) for r in tail) / len(tail)) <= 1e-9
    assert abs(s.final_m_hat - float(rows[-1]["m_hat"])) <= 1e-9


def test_baseline_applies_no_interaction_force():
    result = run(short(duration=0.3, baseline="true"))
    assert not np.any(result.column("fb_x")) and not np.any(result.column("fb_z"))
    assert np.any(result.column("m_hat"))


def test_solver_failure_status():
    result = run(short(duration=0.3, **{"mpc.qp_max_iter": "1", "qp_retry_budget": "0"}))
    assert result.summary.status == "solver_failure"
    assert result.summary.qp_failures == 1
    assert result.error is not None


def test_empty_summary():
    s = summarize("x", [])
    assert s.records == 0 and math.isnan(s.mean_abs_v_err)
