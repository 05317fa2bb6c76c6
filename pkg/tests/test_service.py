import json

import numpy as np
import pytest
from fastapi.testclient import TestClient

from gazecast.config import RunConfig
from gazecast.errors import ConfigError
from gazecast.gaze import session_to_dict
from gazecast.service import SceneReplay, SessionStore, create_app
from gazecast.synthetic import synthesize_session
from helpers import make_window, random_window


@pytest.fixture
def windows():
    rng = np.random.default_rng(0)
    return [random_window(rng, 3, dataset_id="toy", start_frame=i * 10) for i in range(3)]


@pytest.fixture
def client(windows, tmp_path):
    store = SessionStore(tmp_path / "sessions")
    app = create_app(windows, store, max_scene_pedestrians=2)
    return TestClient(app)


def valid_session_bytes(window):
    doc = session_to_dict(synthesize_session(window, seed=5))
    return json.dumps(doc).encode()


class TestScenes:
    def test_empty_corpus_lists_nothing(self, tmp_path):
        app = create_app([], SessionStore(tmp_path / "s"))
        assert TestClient(app).get("/scenes").json() == []

    def test_list_and_fetch(self, client):
        scenes = client.get("/scenes").json()
        assert len(scenes) == 3
        replay = client.get(f"/scenes/{scenes[0]['scene_id']}")
        assert replay.status_code == 200
        doc = SceneReplay.model_validate(replay.json())
        assert doc.frame_interval == pytest.approx(0.4)
        assert len(doc.frames) == 20
        assert doc.goal != doc.start

    def test_pedestrian_cap(self, client):
        replay = client.get("/scenes/toy:0").json()
        assert all(len(frame) <= 2 for frame in replay["frames"])

    def test_unknown_scene(self, client):
        assert client.get("/scenes/never:99").status_code == 404


class TestSessionUpload:
    def test_round_trip_byte_identical(self, client, windows):
        raw = valid_session_bytes(windows[0])
        up = client.post("/sessions", content=raw, params={"session_id": "abc123"})
        assert up.status_code == 201
        assert up.json() == {"session_id": "abc123"}
        back = client.get("/sessions/abc123")
        assert back.status_code == 200
        assert back.content == raw
        assert client.get("/sessions").json() == ["abc123"]

    def test_server_assigns_unique_ids(self, client, windows):
        raw = valid_session_bytes(windows[0])
        a = client.post("/sessions", content=raw).json()["session_id"]
        b = client.post("/sessions", content=raw).json()["session_id"]
        assert a != b

    def test_reupload_same_id_rejected(self, client, windows):
        raw = valid_session_bytes(windows[0])
        assert client.post("/sessions", content=raw, params={"session_id": "dup"}).status_code == 201
        again = client.post("/sessions", content=raw, params={"session_id": "dup"})
        assert again.status_code == 409
        # Stored bytes unchanged.
        assert client.get("/sessions/dup").content == raw

    def test_decreasing_timestamps_rejected_with_index(self, client, windows):
        doc = session_to_dict(synthesize_session(windows[0], seed=1))
        doc["samples"][4]["t"] = doc["samples"][2]["t"]
        response = client.post("/sessions", content=json.dumps(doc).encode())
        assert response.status_code == 422
        detail = response.json()["detail"]
        assert detail["sample_index"] == 4
        assert "increase" in detail["message"]
        assert client.get("/sessions").json() == []

    def test_invalid_json_rejected(self, client):
        response = client.post("/sessions", content=b"{not json")
        assert response.status_code == 422

    def test_unknown_field_rejected(self, client, windows):
        doc = session_to_dict(synthesize_session(windows[0], seed=2))
        doc["malicious"] = True
        response = client.post("/sessions", content=json.dumps(doc).encode())
        assert response.status_code == 422

    def test_bad_session_id_rejected(self, client, windows):
        raw = valid_session_bytes(windows[0])
        response = client.post("/sessions", content=raw, params={"session_id": "../evil"})
        assert response.status_code == 422


class TestSessionStore:
    def test_atomic_no_partial_on_missing_dir(self, tmp_path):
        store = SessionStore(tmp_path / "s")
        store.save("one", b"{}")
        assert store.load("one") == b"{}"
        assert not list((tmp_path / "s").glob("*.tmp"))

    def test_missing_session(self, tmp_path):
        store = SessionStore(tmp_path / "s")
        with pytest.raises(KeyError):
            store.load("nope")


class TestRunConfig:
    def test_defaults_match_training_recipe(self):
        cfg = RunConfig()
        assert cfg.attention_lr == 1e-3
        assert cfg.attention_epochs == 100
        assert cfg.beta == 0.5
        assert cfg.predictor_lr == 1e-4
        assert cfg.predictor_epochs == 200
        assert cfg.batch_size == 64
        assert cfg.alpha == 0.001
        assert cfg.field_angle == 120.0
        assert cfg.k == 20
        assert cfg.frame_stride == 10
        assert cfg.max_scene_pedestrians == 30

    def test_unknown_keys_rejected(self):
        with pytest.raises(ConfigError):
            RunConfig.from_dict({"learning_rate": 0.1})

    def test_file_round_trip(self, tmp_path):
        cfg = RunConfig(command="eval", k=5, held_out="TOY_A")
        path = tmp_path / "cfg.json"
        cfg.persist(path)
        assert RunConfig.from_file(path) == cfg
