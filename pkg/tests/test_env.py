import numpy as np
import pytest

from orchid import channel as ch
from orchid import network
from orchid.config import RunConfig, WorldConfig
from orchid.env import OBS_FIELDS, FleetEnv, RunningMinMax, assemble_reward, compute_penalty
from orchid.scenario import generate_scenario

from conftest import make_env


@pytest.fixture
def env(small_scenario, small_config):
    return make_env(small_scenario, small_config)


def test_reset_midpoint_normalizations(small_scenario, small_config):
    d = small_scenario.config.area_side_m
    poses = np.array([[d / 2, d / 2, 100.0],
                      [200.0, 300.0, 90.0],
                      [700.0, 700.0, 110.0]])
    env = FleetEnv(small_scenario, poses, small_config.channel, small_config.env)
    obs, gstate = env.reset(0)
    np.testing.assert_allclose(obs[0, :3], [0.5, 0.5, 0.5])
    # powers initialize to the midpoint of the range
    np.testing.assert_allclose(env.powers_mw, 150.0)
    np.testing.assert_allclose(obs[:, 3], 0.5)
    assert obs.shape == (3, OBS_FIELDS)
    assert gstate.shape == (env.state_dim,)
    assert np.all((obs >= 0.0) & (obs <= 1.0))


def test_reset_load_fraction_matches_association(env, small_scenario, small_config):
    obs, _ = env.reset(0)
    users = small_scenario.users[small_scenario.uav_users]
    state = network.associate_max_rssi(
        env.positions, network.powers_mw_to_dbm(env.powers_mw), users,
        small_config.channel, small_config.env.bandwidth_hz)
    np.testing.assert_allclose(obs[:, 5], state.loads / users.shape[0])


def test_reset_rejects_infeasible_poses(small_scenario, small_config):
    bad = np.array([[100.0, 100.0, 10.0], [1.0, 1.0, 100.0], [2.0, 2.0, 100.0]])
    with pytest.raises(ValueError):
        FleetEnv(small_scenario, bad, small_config.channel, small_config.env)


def test_reset_deterministic(env):
    o1, g1 = env.reset(5)
    shadow1 = env.gbs_shadow_db.copy()
    o2, g2 = env.reset(5)
    np.testing.assert_array_equal(o1, o2)
    np.testing.assert_array_equal(g1, g2)
    np.testing.assert_array_equal(shadow1, env.gbs_shadow_db)


def test_zero_action_is_identity(env):
    env.reset(0)
    pos = env.positions.copy()
    pw = env.powers_mw.copy()
    _, _, bd, _, info = env.step(np.zeros((3, 4)))
    np.testing.assert_array_equal(env.positions, pos)
    np.testing.assert_array_equal(env.powers_mw, pw)
    assert np.all(info["clamped"] == False)  # noqa: E712
    assert np.all(info["collisions"] == 0)


def test_unit_x_action_moves_vmax(env):
    env.reset(0)
    x0 = env.positions[0, 0]
    actions = np.zeros((3, 4))
    actions[0, 0] = 1.0
    env.step(actions)
    assert env.positions[0, 0] == pytest.approx(x0 + 5.0)


def test_diagonal_motion_projected_to_speed_ball(env):
    env.reset(0)
    p0 = env.positions[0, :2].copy()
    actions = np.zeros((3, 4))
    actions[0, :2] = 1.0
    env.step(actions)
    moved = np.linalg.norm(env.positions[0, :2] - p0)
    assert moved == pytest.approx(5.0, abs=1e-9)


def test_power_step_and_clamping(env):
    env.reset(0)
    actions = np.zeros((3, 4))
    actions[:, 3] = 1.0
    env.step(actions)
    np.testing.assert_allclose(env.powers_mw, 160.0)
    for _ in range(10):
        env.step(actions)
    np.testing.assert_allclose(env.powers_mw, 200.0)


def test_boundary_clamp_flags_violation(small_scenario, small_config):
    poses = np.array([[2.0, 500.0, 100.0], [500.0, 500.0, 100.0],
                      [800.0, 500.0, 100.0]])
    env = FleetEnv(small_scenario, poses, small_config.channel, small_config.env)
    env.reset(0)
    actions = np.zeros((3, 4))
    actions[0, 0] = -1.0  # tries to cross x = 0
    _, _, bd, _, info = env.step(actions)
    assert info["clamped"][0]
    assert not info["clamped"][1]
    assert env.positions[0, 0] == 0.0
    assert bd.penalties[0] == pytest.approx(small_config.env.pen_boundary)


def test_altitude_clamp_also_flags(small_scenario, small_config):
    poses = np.array([[300.0, 500.0, 119.5], [500.0, 500.0, 100.0],
                      [800.0, 500.0, 100.0]])
    env = FleetEnv(small_scenario, poses, small_config.channel, small_config.env)
    env.reset(0)
    actions = np.zeros((3, 4))
    actions[0, 2] = 1.0  # +1 m requested, only 0.5 m of corridor left
    _, _, _, _, info = env.step(actions)
    assert info["clamped"][0]
    assert env.positions[0, 2] == 120.0


def test_collision_penalty_pairwise(small_scenario, small_config):
    poses = np.array([[500.0, 500.0, 100.0], [540.0, 500.0, 100.0],
                      [900.0, 900.0, 100.0]])
    env = FleetEnv(small_scenario, poses, small_config.channel, small_config.env)
    env.reset(0)
    _, _, bd, _, info = env.step(np.zeros((3, 4)))
    # 40 m separation < 50 m clearance: both members get one count
    assert info["collisions"][0] == 1 and info["collisions"][1] == 1
    assert info["collisions"][2] == 0
    assert bd.penalties[0] == pytest.approx(small_config.env.pen_collision)
    assert bd.penalties[2] == 0.0


def test_three_mutual_colliders_each_counts_two(small_config):
    positions = np.array([[500.0, 500.0, 100.0], [520.0, 500.0, 100.0],
                          [510.0, 515.0, 100.0]])
    pen = compute_penalty(positions, np.zeros(3, dtype=bool),
                          np.full(3, 30.0), small_config.env)
    np.testing.assert_allclose(pen, small_config.env.pen_collision * 2.0)


def test_penalty_zero_for_isolated_interior_uav(small_config):
    positions = np.array([[200.0, 200.0, 100.0], [800.0, 800.0, 100.0]])
    pen = compute_penalty(positions, np.zeros(2, dtype=bool),
                          np.full(2, 30.0), small_config.env)
    np.testing.assert_array_equal(pen, 0.0)


def test_backhaul_penalty_follows_channel_oracle(small_scenario, small_config):
    # 900 m from the GBS at minimum power: penalized iff oracle SNR < 0 dB
    poses = np.array([[500.0 + 900.0 / np.sqrt(2), 500.0 + 900.0 / np.sqrt(2), 100.0]])
    world = WorldConfig(num_users=20, num_uavs=1, num_clusters=3, seed=7,
                        area_side_m=2000.0, gbs_position_m=(500.0, 500.0, 30.0))
    scen = generate_scenario(world)
    cfg = RunConfig()
    cfg.world = world
    env = FleetEnv(scen, poses, cfg.channel, cfg.env)
    env.reset(0)
    env.powers_mw[:] = cfg.env.power_min_mw
    _, _, bd, _, info = env.step(np.zeros((1, 4)))
    d = np.linalg.norm(env.positions[0] - scen.gbs_position)
    loss = ch.fspl_db(d, cfg.channel) + cfg.channel.excess_loss_los_db
    snr = ch.snr_db(ch.mw_to_dbm(env.powers_mw[0]), loss, cfg.channel,
                    cfg.env.bandwidth_hz)
    assert info["backhaul_snr_db"][0] == pytest.approx(float(snr), abs=1e-9)
    expected_pen = cfg.env.pen_backhaul if snr < 0.0 else 0.0
    assert bd.penalties[0] == pytest.approx(expected_pen)


def test_assemble_reward_linear_combination():
    bd = assemble_reward(1.0, 0.5, 1.0, 0.4, np.zeros(2),
                         (1.0, 1.0, 1.0, 1.0, 1.0))
    np.testing.assert_allclose(bd.totals, 2.9)
    zero = assemble_reward(0.0, 0.0, 0.0, 0.0, np.zeros(2),
                           (1.0, 1.0, 1.0, 1.0, 1.0))
    np.testing.assert_allclose(zero.totals, 0.0)


def test_assemble_reward_pf_mode():
    bd = assemble_reward(1.0, 0.5, 0.9, 0.8, np.zeros(2),
                         (1.0, 1.0, 0.5, 1.0, 1.0), objective="pf",
                         pf_term=0.3, w_log_rate=2.0)
    np.testing.assert_allclose(bd.totals, 1.0 + 0.5 + 2.0 * 0.3)


def test_pf_single_rate_log_term(small_scenario, small_config):
    env = make_env(small_scenario, small_config, objective="pf")
    env.reset(0)
    _, _, _, _, info = env.step(np.zeros((3, 4)))
    # pre-normalization statistic is sum(log1p(rates))
    assert env.pf_norm.hi == pytest.approx(float(np.sum(np.log1p(info["rates"]))))


def test_reward_decomposition_recombines(env):
    env.reset(0)
    rng = np.random.default_rng(0)
    for _ in range(5):
        _, _, bd, _, _ = env.step(rng.uniform(-1, 1, (3, 4)))
        np.testing.assert_allclose(bd.totals, bd.recombine(), atol=1e-12)


def test_team_components_shared_across_agents(env):
    env.reset(0)
    _, _, bd, _, _ = env.step(np.random.default_rng(1).uniform(-1, 1, (3, 4)))
    # scalar team components by construction; totals differ only by penalty
    spread = bd.totals + bd.weights[4] * bd.penalties
    np.testing.assert_allclose(spread, spread[0], atol=1e-12)


def test_episode_determinism(small_scenario, small_config):
    actions = np.random.default_rng(2).uniform(-1, 1, (20, 3, 4))

    def run():
        env = make_env(small_scenario, small_config)
        env.reset(3)
        out = []
        for a in actions:
            _, _, bd, _, _ = env.step(a)
            out.append(bd.totals.copy())
        return np.array(out), env.positions.copy()

    r1, p1 = run()
    r2, p2 = run()
    np.testing.assert_array_equal(r1, r2)
    np.testing.assert_array_equal(p1, p2)


def test_rejects_nan_actions(env):
    env.reset(0)
    bad = np.zeros((3, 4))
    bad[1, 2] = np.nan
    with pytest.raises(ValueError):
        env.step(bad)


def test_constraint_preservation_random_walk(env):
    """Fleet state stays feasible under arbitrary action streams, and every
    clamp co-occurs with a boundary penalty indicator."""
    env.reset(0)
    rng = np.random.default_rng(7)
    p = env.params
    d = env.scenario.config.area_side_m
    for t in range(300):
        before = env.positions.copy()
        _, _, bd, done, info = env.step(rng.uniform(-1.5, 1.5, (3, 4)))
        assert np.all((env.positions[:, :2] >= 0) & (env.positions[:, :2] <= d))
        assert np.all((env.positions[:, 2] >= p.alt_min_m)
                      & (env.positions[:, 2] <= p.alt_max_m))
        assert np.all((env.powers_mw >= p.power_min_mw)
                      & (env.powers_mw <= p.power_max_mw))
        if done:
            env.reset(t)


def test_running_minmax():
    scaler = RunningMinMax()
    assert scaler.normalize_update(5.0) == 0.5  # degenerate range
    assert scaler.normalize_update(10.0) == 1.0
    assert scaler.normalize_update(5.0) == 0.0
    assert scaler.normalize_update(7.5) == 0.5
    state = scaler.state()
    other = RunningMinMax()
    other.load_state(state)
    assert other.normalize_update(10.0) == 1.0


def test_observation_dim_matches_field_sum(env):
    # pose 3 + power 1 + nearest-user 1 + load 1 + margins 4 + violations 3
    # + backhaul 1
    assert OBS_FIELDS == 3 + 1 + 1 + 1 + 4 + 3 + 1
    obs, gstate = env.reset(0)
    assert obs.shape[1] == OBS_FIELDS
    g = env.params.hist_grid
    assert gstate.size == env.n * OBS_FIELDS + g * g + 1


def test_global_state_histogram_mass(env):
    env.reset(0)
    assert env.user_hist.sum() == pytest.approx(1.0)
    assert env.user_hist.size == env.params.hist_grid ** 2
