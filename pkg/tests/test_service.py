import asyncio
import json
import os
import time

import jsonschema
import numpy as np
import pytest
import websockets

import teleosim.service as svc
from teleosim.mathcore import DriftModel
from teleosim.policy.moe import MoENet
from teleosim.service.cli import run_cli
from teleosim.service.config import PolicySection
from teleosim.service.server import LiveSession, TeleopServer
from teleosim.simenv import default_model
from teleosim.training import GaussianPolicy, RunningNorm
from teleosim.policy.observations import STUDENT_OBS_DIM


class TestConfig:
    def test_defaults_roundtrip(self, tmp_path):
        cfg = svc.default_config()
        path = tmp_path / "c.json"
        svc.save_config(cfg, path)
        back = svc.load_config(path)
        assert back.fingerprint() == cfg.fingerprint()

    def test_unknown_top_level_key(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"seed": 1, "banana": 2}))
        with pytest.raises(svc.ConfigError, match="banana"):
            svc.load_config(path)

    def test_unknown_nested_key(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"policy": {"n_experts": 4, "n_heads": 8}}))
        with pytest.raises(svc.ConfigError, match="n_heads"):
            svc.load_config(path)

    def test_yaml_supported(self, tmp_path):
        path = tmp_path / "c.yaml"
        path.write_text("seed: 7\npolicy:\n  n_experts: 8\n")
        cfg = svc.load_config(path)
        assert cfg.seed == 7
        assert cfg.policy.n_experts == 8

    def test_fingerprint_sensitive_to_values(self):
        a = svc.default_config()
        b = svc.default_config()
        b.seed = 999
        assert a.fingerprint() != b.fingerprint()

    def test_invalid_value_propagates(self, tmp_path):
        path = tmp_path / "c.json"
        path.write_text(json.dumps({"training": {"teacher_ppo": {"gamma": 2.0}}}))
        with pytest.raises(svc.ConfigError):
            svc.load_config(path)


class TestWire:
    def target_msg(self):
        return {
            "type": "target", "v": 1, "t": 0.5, "head": [0.0, 0.0, 1.2],
            "wrist_l": {"pos": [0.2, 0.2, 0.9], "quat": [1.0, 0.0, 0.0, 0.0]},
            "wrist_r": {"pos": [0.2, -0.2, 0.9], "quat": [1.0, 0.0, 0.0, 0.0]},
        }

    def test_valid_target_accepted(self):
        msg = svc.decode_message(json.dumps(self.target_msg()))
        assert msg["type"] == "target"
        assert msg["head"] == [0.0, 0.0, 1.2]

    def test_valid_control_accepted(self):
        raw = json.dumps({"type": "control", "v": 1, "mode": "open",
                          "drift": {"c_min": 0.02}})
        msg = svc.decode_message(raw)
        assert msg["mode"] == "open"
        assert msg["drift"]["c_min"] == 0.02

    def test_bad_json(self):
        with pytest.raises(svc.WireError) as err:
            svc.decode_message("{nope")
        assert err.value.code == "bad_json"

    def test_version_mismatch(self):
        raw = json.dumps({"type": "target", "v": 99})
        with pytest.raises(svc.WireError) as err:
            svc.decode_message(raw)
        assert err.value.code == "version_mismatch"

    def test_unknown_type(self):
        raw = json.dumps({"type": "telemetry", "v": 1})
        with pytest.raises(svc.WireError) as err:
            svc.decode_message(raw)
        assert err.value.code == "unknown_type"

    def test_malformed_target_fields(self):
        bad = self.target_msg()
        bad["head"] = [0.0, 0.0]
        with pytest.raises(svc.WireError) as err:
            svc.decode_message(json.dumps(bad))
        assert err.value.code == "bad_target"

    def test_schema_file_validates_samples(self):
        schema = svc.load_schema()
        jsonschema.Draft7Validator.check_schema(schema)
        validator = jsonschema.Draft7Validator(schema)
        validator.validate(self.target_msg())
        validator.validate({"type": "control", "v": 1, "mode": "closed",
                            "pause": False})
        validator.validate(json.loads(svc.error_frame("busy", "nope")))
        with pytest.raises(jsonschema.ValidationError):
            validator.validate({"type": "target", "v": 1})

    def test_state_frame_schema_valid(self, rng):
        model = default_model()
        policy = GaussianPolicy(MoENet(PolicySection().moe_config(), rng), 14,
                                obs_norm=RunningNorm(STUDENT_OBS_DIM))
        drift = DriftModel(5.0, 0.01, 0.25, 10.0)
        session = LiveSession(model, policy, drift, drift)
        frame = json.loads(session.tick())
        schema = svc.load_schema()
        jsonschema.Draft7Validator(schema).validate(frame)
        assert frame["seq"] == 0
        frame2 = json.loads(session.tick())
        assert frame2["seq"] == 1

    def test_python_validator_agrees_with_schema_on_rejects(self):
        schema = svc.load_schema()
        validator = jsonschema.Draft7Validator(schema)
        cases = [
            {"type": "control", "v": 1, "mode": "sideways"},
            {"type": "control", "v": 1, "drift": {"c_vel": "fast"}},
            {"type": "target", "v": 1, "t": 0.0, "head": [1, 2, 3],
             "wrist_l": {"pos": [0, 0, 0], "quat": [1, 0, 0]},
             "wrist_r": {"pos": [0, 0, 0], "quat": [1, 0, 0, 0]}},
        ]
        for case in cases:
            assert not validator.is_valid(case)
            with pytest.raises(svc.WireError):
                svc.decode_message(json.dumps(case))


@pytest.fixture
def run_env(tmp_path, monkeypatch):
    monkeypatch.setenv("TELEOP_RUN_DIR", str(tmp_path / "runs"))
    return tmp_path


class TestCli:
    def test_gen_data_writes_all_categories(self, run_env, tmp_path, capsys):
        out = tmp_path / "data"
        code = run_cli(["gen-data", "--kinds", "all", "--out", str(out),
                        "--duration", "2.0", "--seed", "3"])
        assert code == 0
        written = json.loads(capsys.readouterr().out)["written"]
        assert len(written) == 9
        from teleosim.motiondata import curate, read_clip
        clips = [read_clip(p) for p in written]
        kept, rejected = curate(clips)
        assert not rejected

    def test_gen_data_deterministic(self, run_env, tmp_path, capsys):
        hashes = []
        for d in ("a", "b"):
            out = tmp_path / d
            assert run_cli(["gen-data", "--kinds", "stand,walk", "--out",
                            str(out), "--seed", "5"]) == 0
            capsys.readouterr()
            hashes.append([
                (p.name, p.read_bytes()) for p in sorted(out.iterdir())
            ])
        assert hashes[0] == hashes[1]

    def test_missing_checkpoint_is_runtime_error(self, run_env, capsys):
        code = run_cli(["eval", "--checkpoint", "missing.npz"])
        assert code == 1
        assert "error" in capsys.readouterr().err

    def test_unknown_flag_exits_2(self, run_env, capsys):
        assert run_cli(["gen-data", "--frobnicate"]) == 2

    def test_unknown_subcommand_exits_2(self, run_env, capsys):
        assert run_cli(["transmogrify"]) == 2

    def test_bad_config_exits_2(self, run_env, tmp_path, capsys):
        bad = tmp_path / "bad.json"
        bad.write_text(json.dumps({"nonsense": True}))
        assert run_cli(["gen-data", "--config", str(bad)]) == 2

    def test_edit_roundtrip(self, run_env, tmp_path, capsys):
        out = tmp_path / "data"
        run_cli(["gen-data", "--kinds", "stand", "--out", str(out),
                 "--duration", "2.0", "--seed", "1"])
        capsys.readouterr()
        edited = tmp_path / "low.clip"
        code = run_cli(["edit", "--op", "stance", str(out / "stand.clip"),
                        "--out", str(edited), "--height", "0.8"])
        assert code == 0
        from teleosim.motiondata import read_clip
        clip = read_clip(edited)
        assert abs(clip.head_pos[-1, 2] - 0.8) < 0.02


def make_session(seed=0, mode="closed"):
    model = default_model()
    rng = np.random.default_rng(seed)
    policy = GaussianPolicy(MoENet(PolicySection().moe_config(), rng), 14,
                            obs_norm=RunningNorm(STUDENT_OBS_DIM))
    drift = DriftModel(5.0, 0.01, 0.25, 10.0)
    return LiveSession(model, policy, drift, drift, mode=mode, seed=seed)


class TestLiveSession:
    def test_no_input_holds_standing_pose(self):
        session = make_session()
        for _ in range(150):
            frame = json.loads(session.tick())
        assert abs(frame["robot"]["head"][2] - 1.2) < 0.05
        assert np.hypot(*frame["robot"]["root"][:2]) < 0.2

    def test_target_moves_ghost_and_robot(self):
        session = make_session()
        msg = {
            "type": "target", "v": 1, "t": 0.0, "head": [1.0, 0.0, 1.2],
            "wrist_l": {"pos": [1.0, 0.18, 0.78], "quat": [1, 0, 0, 0]},
            "wrist_r": {"pos": [1.0, -0.18, 0.78], "quat": [1, 0, 0, 0]},
        }
        session.apply_target(svc.validate_target(msg))
        for _ in range(100):
            frame = json.loads(session.tick())
        assert frame["ghost"]["head"][0] > 0.5  # smoothing pulled forward

    def test_envelope_clamp(self):
        session = make_session()
        msg = {
            "type": "target", "v": 1, "t": 0.0, "head": [0.0, 0.0, 5.0],
            "wrist_l": {"pos": [9.0, 9.0, 9.0], "quat": [1, 0, 0, 0]},
            "wrist_r": {"pos": [0.2, -0.2, 0.9], "quat": [1, 0, 0, 0]},
        }
        session.apply_target(svc.validate_target(msg))
        assert session.raw.head[2] <= 1.28
        reach = session.model.max_reach + session.model.shoulder_half_width + 0.05
        assert np.linalg.norm(session.raw.wrist_pos[0] - session.raw.head) <= reach + 1e-9

    def test_mode_switch_resets_tracker(self):
        session = make_session()
        session.tick()
        session.set_mode("open")
        assert session.tracker.mode == "open_loop"
        frame = json.loads(session.tick())
        assert frame["mode"] == "open"


async def _client_collect(port, n_frames, send=None, timeout=10.0):
    frames = []
    async with websockets.connect(f"ws://127.0.0.1:{port}") as ws:
        if send:
            for msg in send:
                await ws.send(json.dumps(msg))
        start = time.monotonic()
        while len(frames) < n_frames and time.monotonic() - start < timeout:
            frames.append(json.loads(await asyncio.wait_for(ws.recv(), timeout)))
    return frames


class TestServer:
    def run(self, coro):
        return asyncio.run(coro)

    def test_streams_state_frames_at_rate(self):
        async def scenario():
            server = TeleopServer(make_session(), port=0)
            await server.start()
            try:
                t0 = time.monotonic()
                frames = await _client_collect(server.port, 100)
                elapsed = time.monotonic() - t0
            finally:
                await server.stop()
            return frames, elapsed

        frames, elapsed = self.run(scenario())
        assert len(frames) == 100
        states = [f for f in frames if f["type"] == "state"]
        assert len(states) == 100
        seqs = [f["seq"] for f in states]
        assert seqs == sorted(seqs)
        hz = len(states) / elapsed
        assert 30.0 < hz < 70.0  # smoke bound; the timing harness pins it tighter

    def test_malformed_message_gets_error_frame_and_stream_continues(self):
        async def scenario():
            server = TeleopServer(make_session(), port=0)
            await server.start()
            try:
                async with websockets.connect(f"ws://127.0.0.1:{server.port}") as ws:
                    await ws.send("{broken")
                    got_error = False
                    got_state_after = 0
                    for _ in range(30):
                        msg = json.loads(await asyncio.wait_for(ws.recv(), 5))
                        if msg["type"] == "error":
                            got_error = True
                        elif got_error and msg["type"] == "state":
                            got_state_after += 1
                            if got_state_after > 3:
                                break
            finally:
                await server.stop()
            return got_error, got_state_after

        got_error, after = self.run(scenario())
        assert got_error and after > 3

    def test_version_mismatch_closes_session(self):
        async def scenario():
            server = TeleopServer(make_session(), port=0)
            await server.start()
            try:
                async with websockets.connect(f"ws://127.0.0.1:{server.port}") as ws:
                    await ws.send(json.dumps({"type": "target", "v": 42}))
                    while True:
                        msg = json.loads(await asyncio.wait_for(ws.recv(), 5))
                        if msg["type"] == "error":
                            return msg
            finally:
                await server.stop()

        msg = self.run(scenario())
        assert msg["code"] == "version_mismatch"
        assert "1" in msg["message"]

    def test_control_toggles_mode_in_stream(self):
        async def scenario():
            server = TeleopServer(make_session(), port=0)
            await server.start()
            try:
                frames = await _client_collect(
                    server.port, 30,
                    send=[{"type": "control", "v": 1, "mode": "open"}],
                )
            finally:
                await server.stop()
            return frames

        frames = self.run(scenario())
        modes = {f["mode"] for f in frames if f["type"] == "state"}
        assert "open" in modes

    def test_slow_reader_never_stalls_the_tick(self):
        async def scenario():
            server = TeleopServer(make_session(), port=0)
            await server.start()
            try:
                async with websockets.connect(f"ws://127.0.0.1:{server.port}"):
                    ticks0 = server.ticks
                    await asyncio.sleep(1.0)  # connected but never reading fast
                    ticks1 = server.ticks
            finally:
                await server.stop()
            return ticks1 - ticks0, server.dropped_frames

        advanced, dropped = self.run(scenario())
        assert advanced > 30  # the 50 Hz loop kept running

    def test_second_client_rejected_busy(self):
        async def scenario():
            server = TeleopServer(make_session(), port=0)
            await server.start()
            try:
                async with websockets.connect(f"ws://127.0.0.1:{server.port}"):
                    async with websockets.connect(
                            f"ws://127.0.0.1:{server.port}") as second:
                        msg = json.loads(await asyncio.wait_for(second.recv(), 5))
            finally:
                await server.stop()
            return msg

        msg = self.run(scenario())
        assert msg["type"] == "error" and msg["code"] == "busy"

    def test_disconnect_pauses_and_reconnect_resumes(self):
        async def scenario():
            session = make_session()
            server = TeleopServer(session, port=0)
            await server.start()
            try:
                async with websockets.connect(f"ws://127.0.0.1:{server.port}") as ws:
                    await asyncio.wait_for(ws.recv(), 5)
                await asyncio.sleep(0.1)
                paused = session.paused
                t_at_pause = session.state.t
                await asyncio.sleep(0.3)
                drifted = session.state.t - t_at_pause
                async with websockets.connect(f"ws://127.0.0.1:{server.port}") as ws:
                    await asyncio.wait_for(ws.recv(), 5)
                    resumed = not session.paused
            finally:
                await server.stop()
            return paused, drifted, resumed

        paused, drifted, resumed = self.run(scenario())
        assert paused and resumed
        assert drifted == pytest.approx(0.0, abs=1e-9)
