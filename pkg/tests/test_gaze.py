import numpy as np
import pytest

from gazecast.errors import ContractError, RangeError, SessionValidationError
from gazecast.gaze import (
    GazeSample,
    GazeSession,
    GazeWindowPoints,
    SceneRef,
    extract_window,
    ground_truth_attention,
    load_session,
    pick_gaze_target,
    save_session,
    session_from_dict,
    session_to_dict,
    synthetic_gaze_oracle,
)
from gazecast.numerics import Rng
from gazecast.trajdata import SceneWindow, WindowPedestrian
from oracles import scalar_gaussian_mixture_weights


def make_session(rate_hz=50.0, duration=4.0):
    n = int(duration * rate_hz) + 1
    samples = [
        GazeSample(
            t=i / rate_hz,
            gaze_xy=np.array([np.sin(i * 0.1), np.cos(i * 0.1)]),
            agent_xy=np.array([i * 0.01, 0.0]),
            agent_v=np.array([0.5, 0.0]),
        )
        for i in range(n)
    ]
    return GazeSession(scene_ref=SceneRef("toy", 0), goal=np.array([5.0, 0.0]), samples=samples)


def make_window(positions, velocities):
    """Constant-velocity 20-step window ending with the given states at t_obs."""
    peds = []
    for i, (pos, vel) in enumerate(zip(positions, velocities)):
        pos = np.asarray(pos, dtype=np.float64)
        vel = np.asarray(vel, dtype=np.float64)
        t7 = pos
        abs_positions = np.array([t7 + (k - 7) * vel * 0.4 for k in range(20)])
        rel = np.zeros_like(abs_positions)
        rel[1:] = abs_positions[1:] - abs_positions[:-1]
        peds.append(
            WindowPedestrian(
                pedestrian_id=i + 1,
                abs_positions=abs_positions,
                rel_displacements=rel,
                velocity_at_obs=vel.copy(),
            )
        )
    return SceneWindow(dataset_id="fix", start_frame=0, pedestrians=peds)


class TestExtractWindow:
    def test_50hz_yields_10_points(self):
        session = make_session(rate_hz=50.0)
        points = extract_window(session, 2.0)
        assert len(points) == 10

    def test_window_straddling_start(self):
        session = make_session(rate_hz=50.0)
        points = extract_window(session, 0.1)
        # Only samples in (-0.1, 0.1]: t = 0.00 .. 0.10 -> 6 points.
        assert len(points) == 6

    def test_membership_matches_brute_force(self):
        session = make_session(rate_hz=40.0)
        t_obs = 1.234
        points = extract_window(session, t_obs)
        expected = [s.gaze_xy for s in session.samples if t_obs - 0.2 < s.t <= t_obs]
        assert np.array_equal(points.points, np.array(expected))

    def test_out_of_span(self):
        session = make_session()
        with pytest.raises(RangeError):
            extract_window(session, 100.0)


class TestGroundTruthAttention:
    def test_equidistant_pedestrians_split_evenly(self):
        points = GazeWindowPoints(points=np.array([[0.0, 0.0]]))
        out = ground_truth_attention(points, [[1.0, 0.0], [-1.0, 0.0]], sigma2=1.0)
        assert np.allclose(out.weights, [0.5, 0.5])

    def test_separation_limit(self):
        sigma2 = 0.25  # sigma = 0.5, second pedestrian at 10 sigma
        points = GazeWindowPoints(points=np.array([[0.0, 0.0]]))
        out = ground_truth_attention(points, [[0.0, 0.0], [5.0, 0.0]], sigma2=sigma2)
        assert out.weights[0] > 0.999

    def test_matches_direct_mixture_oracle(self):
        peds = [[0.0, 0.0], [2.0, 1.0], [-1.0, 3.0]]
        gaze = [[0.5, 0.5], [1.5, 1.0]]
        out = ground_truth_attention(GazeWindowPoints(points=np.array(gaze)), peds, sigma2=1.0)
        want = scalar_gaussian_mixture_weights(peds, gaze, 1.0)
        assert np.max(np.abs(out.weights - np.array(want))) < 1e-12

    def test_invalid_sigma(self):
        points = GazeWindowPoints(points=np.array([[0.0, 0.0]]))
        with pytest.raises(ContractError):
            ground_truth_attention(points, [[0.0, 0.0]], sigma2=0.0)

    def test_underflow_falls_back_to_uniform(self):
        points = GazeWindowPoints(points=np.array([[1e4, 0.0]]))
        out = ground_truth_attention(points, [[0.0, 0.0], [0.0, 1.0], [0.0, 2.0]], sigma2=0.01)
        assert out.uniform_fallback
        assert np.allclose(out.weights, 1.0 / 3.0)

    def test_sums_to_one_and_permutation_equivariant(self):
        rng = np.random.default_rng(2)
        for _ in range(200):
            n = int(rng.integers(1, 9))
            peds = rng.normal(scale=3.0, size=(n, 2))
            gaze = rng.normal(scale=3.0, size=(int(rng.integers(1, 6)), 2))
            sigma2 = float(rng.uniform(0.05, 4.0))
            out = ground_truth_attention(GazeWindowPoints(points=gaze), peds, sigma2)
            assert abs(out.weights.sum() - 1.0) < 1e-9
            assert np.all(out.weights >= 0.0)
            perm = rng.permutation(n)
            out_p = ground_truth_attention(GazeWindowPoints(points=gaze), peds[perm], sigma2)
            assert np.allclose(out_p.weights, out.weights[perm], atol=1e-12)

    def test_shrinking_sigma_concentrates_on_nearest(self):
        peds = [[0.2, 0.0], [1.0, 0.0], [-2.0, 1.0]]
        gaze = GazeWindowPoints(points=np.array([[0.0, 0.0]]))
        prev = 0.0
        for sigma2 in (1.0, 0.5, 0.1, 0.01):
            w = ground_truth_attention(gaze, peds, sigma2).weights
            assert w[0] > prev
            prev = w[0]
        assert prev > 0.999

    def test_scale_invariance(self):
        rng = np.random.default_rng(9)
        peds = rng.normal(size=(4, 2))
        gaze = rng.normal(size=(3, 2))
        base = ground_truth_attention(GazeWindowPoints(points=gaze), peds, sigma2=0.8)
        scale = 37.5
        scaled = ground_truth_attention(
            GazeWindowPoints(points=gaze * scale), peds * scale, sigma2=0.8 * scale**2
        )
        assert np.max(np.abs(base.weights - scaled.weights)) < 1e-9


class TestSyntheticGazeOracle:
    def test_approaching_neighbor_wins(self):
        window = make_window(
            positions=[[0.0, 0.0], [2.0, 0.0], [-2.0, 0.0]],
            velocities=[[0.0, 0.0], [-1.0, 0.0], [-1.0, 0.0]],  # ped1 approaches, ped2 recedes
        )
        points = synthetic_gaze_oracle(window, 0, Rng(1))
        assert pick_gaze_target(window, 0) == 1
        assert np.linalg.norm(points.points.mean(axis=0) - [2.0, 0.0]) < 0.3

    def test_single_pedestrian_projects_own_position(self):
        window = make_window(positions=[[1.0, 1.0]], velocities=[[1.0, 0.0]])
        points = synthetic_gaze_oracle(window, 0, Rng(2), jitter_std=0.0)
        assert np.allclose(points.points, [[1.4, 1.0]])

    def test_four_neighbors_match_brute_force_criterion(self):
        rng = np.random.default_rng(33)
        for _ in range(50):
            positions = rng.normal(scale=3.0, size=(5, 2))
            velocities = rng.normal(scale=1.0, size=(5, 2))
            window = make_window(positions, velocities)
            focal = 0
            chosen = pick_gaze_target(window, focal)

            # Brute-force scan of the criterion.
            scores = {}
            dists = {}
            for j in range(1, 5):
                r = positions[j] - positions[focal]
                u = velocities[j] - velocities[focal]
                dists[j] = np.linalg.norm(r)
                if r @ u < 0:
                    scores[j] = (r @ r) / -(r @ u)
            if scores:
                want = min(scores, key=scores.get)
            else:
                want = min(dists, key=dists.get)
            assert chosen == want

    def test_deterministic_given_seed(self):
        window = make_window(
            positions=[[0.0, 0.0], [1.0, 1.0]], velocities=[[0.5, 0.0], [-0.5, -0.5]]
        )
        a = synthetic_gaze_oracle(window, 0, Rng(7))
        b = synthetic_gaze_oracle(window, 0, Rng(7))
        assert np.array_equal(a.points, b.points)


class TestSessionSchema:
    def test_round_trip(self, tmp_path):
        session = make_session()
        path = tmp_path / "s.json"
        save_session(path, session)
        loaded = load_session(path)
        assert loaded.scene_ref.dataset_id == "toy"
        assert len(loaded.samples) == len(session.samples)
        assert np.allclose(loaded.samples[10].gaze_xy, session.samples[10].gaze_xy)

    def test_decreasing_timestamp_names_sample_index(self):
        doc = session_to_dict(make_session())
        doc["samples"][3]["t"] = doc["samples"][1]["t"]
        with pytest.raises(SessionValidationError) as err:
            session_from_dict(doc)
        assert err.value.sample_index == 3

    def test_slow_sampling_rejected(self):
        doc = session_to_dict(make_session(rate_hz=10.0))
        with pytest.raises(SessionValidationError):
            session_from_dict(doc)

    def test_unknown_key_rejected(self):
        doc = session_to_dict(make_session())
        doc["extra"] = 1
        with pytest.raises(SessionValidationError):
            session_from_dict(doc)

    def test_wrong_version_rejected(self):
        doc = session_to_dict(make_session())
        doc["format_version"] = 2
        with pytest.raises(SessionValidationError) as err:
            session_from_dict(doc)
        assert err.value.field == "format_version"
