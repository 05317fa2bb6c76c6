import math

import numpy as np
import pytest

from gazecast.errors import ConfigError, ContractError
from gazecast.numerics import Rng, Tensor, check_gradients, no_grad
from gazecast.predictor import (
    AttentionConfig,
    CrowdGraph,
    LatentDistribution,
    PredictorParams,
    PredictorTrainConfig,
    attention_rows,
    decode,
    encode_motion,
    gaussian_kl_to_unit,
    latent_head,
    predict,
    prediction_loss,
    social_context,
    social_gcn,
    train,
    window_loss,
)
from helpers import make_window, random_window
from oracles import (
    scalar_diag_gauss_kl_to_unit,
    scalar_gcn_layer,
    scalar_linear,
    scalar_lstm_step,
    scalar_relu,
)


class TestEncodeMotion:
    def test_zero_params_zero_input(self):
        params = PredictorParams.zeros()
        out = encode_motion(np.zeros((8, 2)), params)
        assert np.array_equal(out.data, np.zeros((1, 32)))

    def test_matches_scalar_lstm_oracle(self):
        rng = Rng(2)
        params = PredictorParams.init(rng)
        rel = rng.normal((8, 2)) * 0.3
        out = encode_motion(rel, params)

        h = [0.0] * 32
        c = [0.0] * 32
        for step in rel:
            emb = scalar_relu(
                scalar_linear([list(step)], params.mlp_mot.w.data.tolist(), params.mlp_mot.b.data.tolist())
            )
            h, c = scalar_lstm_step(
                emb[0], h, c,
                params.lstm_en.w_ih.data.tolist(),
                params.lstm_en.w_hh.data.tolist(),
                params.lstm_en.b.data.tolist(),
            )
        assert np.max(np.abs(out.data[0] - np.array(h))) < 1e-10

    def test_different_inputs_different_encodings(self):
        rng = Rng(3)
        params = PredictorParams.init(rng)
        a = encode_motion(rng.normal((8, 2)), params)
        b = encode_motion(rng.normal((8, 2)), params)
        assert np.max(np.abs(a.data - b.data)) > 1e-8

    def test_wrong_length_rejected(self):
        with pytest.raises(ContractError):
            encode_motion(np.zeros((5, 2)), PredictorParams.zeros())


class TestSocialContext:
    def test_one_hot_selects_single_embedding(self):
        rng = Rng(4)
        params = PredictorParams.init(rng)
        ctx = rng.normal((4, 2))
        out = social_context(ctx, [0.0, 0.0, 1.0, 0.0], params)
        want = scalar_relu(
            scalar_linear([list(ctx[2])], params.mlp_cont.w.data.tolist(), params.mlp_cont.b.data.tolist())
        )
        assert np.max(np.abs(out.data - np.array(want))) < 1e-12

    def test_uniform_is_arithmetic_mean(self):
        rng = Rng(5)
        params = PredictorParams.init(rng)
        ctx = rng.normal((3, 2))
        out = social_context(ctx, np.full(3, 1.0 / 3.0), params)
        with no_grad():
            embs = (params.mlp_cont(Tensor(ctx)).relu()).data
        assert np.max(np.abs(out.data[0] - embs.mean(axis=0))) < 1e-12

    def test_matches_brute_force_weighted_sum(self):
        rng = Rng(6)
        params = PredictorParams.init(rng)
        ctx = rng.normal((5, 2))
        raw = rng.uniform(0.01, 1.0, 5)
        a = raw / raw.sum()
        out = social_context(ctx, a, params)
        with no_grad():
            embs = (params.mlp_cont(Tensor(ctx)).relu()).data
        brute = sum(a[j] * embs[j] for j in range(5))
        assert np.max(np.abs(out.data[0] - brute)) < 1e-12

    def test_length_mismatch(self):
        with pytest.raises(ContractError):
            social_context(np.zeros((3, 2)), [0.5, 0.5], PredictorParams.zeros())


class TestSocialGcn:
    def test_single_node_is_two_layer_mlp(self):
        rng = Rng(7)
        params = PredictorParams.init(rng)
        c = rng.normal((1, 48))
        out = social_gcn(CrowdGraph(node_features=Tensor(c), adjacency=[[1.0]]), params)
        want = scalar_gcn_layer(
            [[1.0]],
            scalar_relu(scalar_linear(c.tolist(), params.gcn1.w.data.tolist(), params.gcn1.b.data.tolist())),
            params.gcn2.w.data.tolist(), params.gcn2.b.data.tolist(), False,
        )
        assert np.max(np.abs(out.data - np.array(want))) < 1e-10

    def test_identity_adjacency_no_mixing(self):
        rng = Rng(8)
        params = PredictorParams.init(rng)
        c = rng.normal((3, 48))
        eye = np.eye(3)
        full = social_gcn(CrowdGraph(node_features=Tensor(c), adjacency=eye), params)
        for i in range(3):
            solo = social_gcn(CrowdGraph(node_features=Tensor(c[i:i + 1]), adjacency=[[1.0]]), params)
            assert np.max(np.abs(full.data[i] - solo.data[0])) < 1e-12

    def test_matches_scalar_oracle(self):
        rng = Rng(9)
        params = PredictorParams.init(rng)
        c = rng.normal((3, 48))
        adj = np.array([[0.5, 0.25, 0.25], [0.1, 0.8, 0.1], [0.3, 0.3, 0.4]])
        out = social_gcn(CrowdGraph(node_features=Tensor(c), adjacency=adj), params)
        h1 = scalar_gcn_layer(adj.tolist(), c.tolist(), params.gcn1.w.data.tolist(),
                              params.gcn1.b.data.tolist(), True)
        want = scalar_gcn_layer(adj.tolist(), h1, params.gcn2.w.data.tolist(),
                                params.gcn2.b.data.tolist(), False)
        assert np.max(np.abs(out.data - np.array(want))) < 1e-10

    def test_row_sum_violation_rejected(self):
        with pytest.raises(ContractError):
            CrowdGraph(node_features=Tensor(np.zeros((2, 48))), adjacency=[[0.9, 0.0], [0.5, 0.5]])


class TestLatentHeadAndLoss:
    def test_zero_params_give_unit_prior(self):
        params = PredictorParams.zeros()
        latent = latent_head(Tensor(np.ones((1, 8))), params)
        assert np.array_equal(latent.mu.data, np.zeros((1, 8)))
        assert np.array_equal(latent.log_var.data, np.zeros((1, 8)))
        assert gaussian_kl_to_unit(latent).item() == 0.0

    def test_latent_head_matches_scalar_oracle(self):
        rng = Rng(10)
        params = PredictorParams.init(rng)
        v = rng.normal((1, 8))
        latent = latent_head(Tensor(v), params)
        mu = scalar_linear(v.tolist(), params.mlp_mean.w.data.tolist(), params.mlp_mean.b.data.tolist())
        lv = scalar_linear(v.tolist(), params.mlp_var.w.data.tolist(), params.mlp_var.b.data.tolist())
        assert np.max(np.abs(latent.mu.data - np.array(mu))) < 1e-12
        assert np.max(np.abs(latent.log_var.data - np.array(lv))) < 1e-12

    def test_perfect_prediction_zero_loss(self):
        gt = [np.random.default_rng(0).normal(size=(12, 2))]
        latents = [LatentDistribution(mu=Tensor(np.zeros((1, 8))), log_var=Tensor(np.zeros((1, 8))))]
        loss = prediction_loss([Tensor(gt[0])], gt, latents)
        assert loss.item() == 0.0

    def test_loss_matches_hand_computed_closed_form(self):
        rng = np.random.default_rng(1)
        pred = rng.normal(size=(12, 2))
        gt = rng.normal(size=(12, 2))
        mu = rng.normal(size=8)
        lv = rng.normal(size=8)
        latents = [LatentDistribution(mu=Tensor(mu.reshape(1, 8)), log_var=Tensor(lv.reshape(1, 8)))]
        loss = prediction_loss([Tensor(pred)], [gt], latents, alpha=0.001)

        rec = np.mean([math.dist(pred[t], gt[t]) for t in range(12)])
        kl = scalar_diag_gauss_kl_to_unit(mu.tolist(), lv.tolist())
        assert abs(loss.item() - (rec + 0.001 * kl)) < 1e-10


class TestDecode:
    def test_zero_params_zero_output(self):
        out = decode(Tensor(np.zeros((1, 8))), [0.3, -0.2], PredictorParams.zeros(), steps=12)
        assert np.array_equal(out.data, np.zeros((12, 2)))

    def test_deterministic_given_z(self):
        rng = Rng(11)
        params = PredictorParams.init(rng)
        z = Tensor(rng.normal((1, 8)))
        a = decode(z, [0.1, 0.1], params)
        b = decode(z, [0.1, 0.1], params)
        assert np.array_equal(a.data, b.data)

    def test_three_step_unroll_matches_scalar_oracle(self):
        rng = Rng(12)
        params = PredictorParams.init(rng)
        z = rng.normal((1, 8))
        last = [0.2, -0.4]
        out = decode(Tensor(z), last, params, steps=3)

        h = [0.0] * 32
        c = [0.0] * 32
        prev = list(last)
        rows = []
        for _ in range(3):
            emb = scalar_relu(
                scalar_linear([prev], params.mlp_enc.w.data.tolist(), params.mlp_enc.b.data.tolist())
            )[0]
            step_in = list(z[0]) + emb
            h, c = scalar_lstm_step(
                step_in, h, c,
                params.lstm_de.w_ih.data.tolist(),
                params.lstm_de.w_hh.data.tolist(),
                params.lstm_de.b.data.tolist(),
            )
            prev = scalar_linear([h], params.mlp_dec.w.data.tolist(), params.mlp_dec.b.data.tolist())[0]
            rows.append(prev)
        assert np.max(np.abs(out.data - np.array(rows))) < 1e-10

    def test_bad_steps(self):
        with pytest.raises(ContractError):
            decode(Tensor(np.zeros((1, 8))), [0.0, 0.0], PredictorParams.zeros(), steps=0)


class TestAttentionRows:
    def test_uniform_no_filter_rows(self):
        window = make_window(
            positions=[[0.0, 0.0], [1.0, 0.0], [2.0, 0.0]],
            velocities=[[1.0, 0.0], [1.0, 0.0], [1.0, 0.0]],
        )
        rows = attention_rows(window, AttentionConfig(source="uniform", use_visual_filter=False))
        assert np.array_equal(rows, np.full((3, 3), 1.0 / 3.0))

    def test_learned_requires_params(self):
        with pytest.raises(ConfigError):
            AttentionConfig(source="learned", use_visual_filter=False)

    def test_arm_mapping(self):
        from gazecast.attention_net import AttentionNetParams

        att = AttentionNetParams.init(Rng(0))
        for arm, source, filt in (
            ("GCN", "uniform", False),
            ("AGCN", "learned", False),
            ("VGCN", "uniform", True),
            ("AVGCN", "learned", True),
        ):
            cfg = AttentionConfig.from_arm(arm, attention_params=att)
            assert (cfg.source, cfg.use_visual_filter) == (source, filt)

    def test_unknown_arm(self):
        with pytest.raises(ConfigError):
            AttentionConfig.from_arm("XGCN")

    def test_rows_always_sum_to_one(self):
        from gazecast.attention_net import AttentionNetParams

        rng = np.random.default_rng(13)
        att = AttentionNetParams.init(Rng(1))
        for arm in ("GCN", "AGCN", "VGCN", "AVGCN"):
            cfg = AttentionConfig.from_arm(arm, attention_params=att)
            for _ in range(5):
                window = random_window(rng, int(rng.integers(1, 6)))
                rows = attention_rows(window, cfg)
                assert np.max(np.abs(rows.sum(axis=1) - 1.0)) < 1e-9


class TestTrainAndPredict:
    def toy_windows(self, n, seed=0):
        rng = np.random.default_rng(seed)
        return [random_window(rng, int(rng.integers(2, 4)), start_frame=i) for i in range(n)]

    def test_same_seed_identical_training(self):
        windows = self.toy_windows(4, seed=2)
        cfg = PredictorTrainConfig(epochs=2, batch_size=2, seed=5)
        arm = AttentionConfig(source="uniform")
        params_a, _ = train(windows, arm, cfg)
        params_b, _ = train(windows, arm, cfg)
        for name, tensor in params_a.tensors().items():
            assert np.array_equal(tensor.data, params_b.tensors()[name].data), name

    def test_empty_training_set_rejected(self):
        with pytest.raises(ConfigError):
            train([], AttentionConfig(source="uniform"), PredictorTrainConfig(epochs=1))

    def test_training_improves_reconstruction(self):
        from gazecast.predictor import mean_reconstruction

        windows = self.toy_windows(6, seed=3)
        cfg = PredictorTrainConfig(epochs=50, batch_size=6, lr=1e-3, seed=1)
        arm = AttentionConfig(source="uniform")
        before = mean_reconstruction(windows, PredictorParams.init(Rng(cfg.seed)), arm)
        params, _ = train(windows, arm, cfg)
        assert mean_reconstruction(windows, params, arm) < before

    def test_degenerate_variance_collapses_samples(self):
        params = PredictorParams.init(Rng(14))
        params.mlp_var.w.data[:] = 0.0
        params.mlp_var.b.data[:] = -50.0
        window = make_window(positions=[[0.0, 0.0], [1.0, 1.0]], velocities=[[1.0, 0.0], [0.0, 1.0]])
        result = predict(window, params, AttentionConfig(source="uniform"), k=5, rng=Rng(0))
        for ped in result.predictions:
            for s in range(5):
                assert np.max(np.abs(ped.samples[s] - ped.mean_trajectory)) < 1e-9

    def test_k1_reproducible(self):
        params = PredictorParams.init(Rng(15))
        window = make_window(positions=[[0.0, 0.0]], velocities=[[1.0, 0.0]])
        a = predict(window, params, AttentionConfig(source="uniform"), k=1, rng=Rng(3))
        b = predict(window, params, AttentionConfig(source="uniform"), k=1, rng=Rng(3))
        assert np.array_equal(a.predictions[0].samples, b.predictions[0].samples)

    def test_sample_spread_grows_with_logvar(self):
        params = PredictorParams.init(Rng(16))
        window = make_window(positions=[[0.0, 0.0], [2.0, 0.0]], velocities=[[1.0, 0.0], [-1.0, 0.0]])
        spreads = []
        for offset in (0.0, 1.0, 2.0):
            tweaked = PredictorParams.init(Rng(16))
            tweaked.mlp_var.b.data[:] += offset
            result = predict(window, tweaked, AttentionConfig(source="uniform"), k=20, rng=Rng(1))
            spread = np.mean([ped.samples.std(axis=0).mean() for ped in result.predictions])
            spreads.append(spread)
        assert spreads[0] < spreads[1] < spreads[2]

    def test_k_zero_rejected(self):
        params = PredictorParams.zeros()
        window = make_window(positions=[[0.0, 0.0]], velocities=[[1.0, 0.0]])
        with pytest.raises(ContractError):
            predict(window, params, AttentionConfig(source="uniform"), k=0)

    def test_permutation_equivariance(self):
        from gazecast.trajdata import SceneWindow

        rng = np.random.default_rng(17)
        window = random_window(rng, 4)
        params = PredictorParams.init(Rng(18))
        cfg = AttentionConfig(source="uniform")
        base = predict(window, params, cfg, k=3, rng=Rng(7))

        perm = [2, 0, 3, 1]
        permuted = SceneWindow(
            dataset_id=window.dataset_id,
            start_frame=window.start_frame,
            pedestrians=[window.pedestrians[i] for i in perm],
        )
        shuffled = predict(permuted, params, cfg, k=3, rng=Rng(7))
        by_id = {p.pedestrian_id: p for p in base.predictions}
        for ped in shuffled.predictions:
            ref = by_id[ped.pedestrian_id]
            assert np.max(np.abs(ped.mean_trajectory - ref.mean_trajectory)) < 1e-9
            assert np.max(np.abs(ped.samples - ref.samples)) < 1e-9

    def test_translation_invariance(self):
        rng = np.random.default_rng(19)
        window = random_window(rng, 3)
        shifted = random_window(np.random.default_rng(19), 3)
        for ped in shifted.pedestrians:
            ped.abs_positions = ped.abs_positions + np.array([120.0, -45.0])
        params = PredictorParams.init(Rng(20))
        cfg = AttentionConfig(source="uniform")
        a = predict(window, params, cfg, k=2, rng=Rng(1))
        b = predict(shifted, params, cfg, k=2, rng=Rng(1))
        for pa, pb in zip(a.predictions, b.predictions):
            assert np.max(np.abs(pa.mean_trajectory - pb.mean_trajectory)) < 1e-9
            assert np.max(np.abs(pa.samples - pb.samples)) < 1e-9

    def test_full_model_gradients_finite_difference(self):
        rng = np.random.default_rng(21)
        window = random_window(rng, 3)
        params = PredictorParams.init(Rng(22))
        adjacency = attention_rows(window, AttentionConfig(source="uniform"))

        def loss_fn():
            loss, _, _ = window_loss(window, params, adjacency, Rng(55), alpha=0.001)
            return loss

        errors = check_gradients(
            loss_fn, params.tensors(), max_entries_per_param=4, rng=np.random.default_rng(2)
        )
        assert max(errors.values()) < 1e-4
