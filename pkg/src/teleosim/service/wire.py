"""Wire protocol for the live teleoperation channel.

JSON text frames, versioned. Inbound: ``target`` (operator head/wrist goals)
and ``control`` (mode toggles, drift parameters, pause). Outbound: ``state``
at the control rate and ``error``. The schema file shipped in-repo
(schema/teleop-wire.schema.json) is the single source of truth shared with
the browser client; the validators here enforce the same structure.
"""

from __future__ import annotations

import json
from pathlib import Path

PROTOCOL_VERSION = 1

SCHEMA_PATH = Path(__file__).resolve().parents[3] / "schema" / "teleop-wire.schema.json"


class WireError(ValueError):
    def __init__(self, code: str, message: str):
        super().__init__(message)
        self.code = code


def _require(obj: dict, name: str, kind, code: str):
    if name not in obj:
        raise WireError(code, f"missing field {name!r}")
    value = obj[name]
    if kind is float:
        if not isinstance(value, (int, float)) or isinstance(value, bool):
            raise WireError(code, f"field {name!r} must be a number")
        return float(value)
    if not isinstance(value, kind):
        raise WireError(code, f"field {name!r} must be {kind.__name__}")
    return value


def _vec(obj, name: str, n: int, code: str) -> list:
    v = _require(obj, name, list, code)
    if len(v) != n or not all(isinstance(x, (int, float)) and not isinstance(x, bool)
                              for x in v):
        raise WireError(code, f"field {name!r} must be a list of {n} numbers")
    return [float(x) for x in v]


def decode_message(raw: str) -> dict:
    try:
        obj = json.loads(raw)
    except json.JSONDecodeError as e:
        raise WireError("bad_json", f"unparseable frame: {e}") from e
    if not isinstance(obj, dict):
        raise WireError("bad_json", "frame must be an object")
    v = obj.get("v")
    if v != PROTOCOL_VERSION:
        raise WireError("version_mismatch",
                        f"protocol version {v!r}, server speaks {PROTOCOL_VERSION}")
    kind = obj.get("type")
    if kind == "target":
        return validate_target(obj)
    if kind == "control":
        return validate_control(obj)
    raise WireError("unknown_type", f"unknown message type {obj.get('type')!r}")


def validate_target(obj: dict) -> dict:
    code = "bad_target"
    out = {
        "type": "target", "v": PROTOCOL_VERSION,
        "t": _require(obj, "t", float, code),
        "head": _vec(obj, "head", 3, code),
    }
    for key in ("wrist_l", "wrist_r"):
        w = _require(obj, key, dict, code)
        out[key] = {"pos": _vec(w, "pos", 3, code), "quat": _vec(w, "quat", 4, code)}
    return out


def validate_control(obj: dict) -> dict:
    code = "bad_control"
    out = {"type": "control", "v": PROTOCOL_VERSION}
    if "mode" in obj:
        mode = obj["mode"]
        if mode not in ("closed", "open"):
            raise WireError(code, "mode must be 'closed' or 'open'")
        out["mode"] = mode
    if "pause" in obj:
        if not isinstance(obj["pause"], bool):
            raise WireError(code, "pause must be a boolean")
        out["pause"] = obj["pause"]
    if "drift" in obj:
        d = obj["drift"]
        if not isinstance(d, dict):
            raise WireError(code, "drift must be an object")
        allowed = {"c_vel", "c_min", "max_deviation", "reset_interval"}
        unknown = set(d) - allowed
        if unknown:
            raise WireError(code, f"unknown drift key(s) {sorted(unknown)}")
        out["drift"] = {k: _require(d, k, float, code) for k in d}
    return out


def state_frame(seq: int, t_sim: float, mode: str, robot: dict, ghost: dict,
                drift_vec, routing, reward: dict, contacts) -> str:
    frame = {
        "type": "state", "v": PROTOCOL_VERSION, "seq": seq, "t": round(t_sim, 4),
        "mode": mode, "robot": robot, "ghost": ghost,
        "drift": {"vec": [round(float(x), 5) for x in drift_vec],
                  "mag": round(float(sum(x * x for x in drift_vec) ** 0.5), 5)},
        "routing": routing,
        "reward": reward,
        "contacts": [int(c) for c in contacts],
    }
    return json.dumps(frame)


def error_frame(code: str, message: str) -> str:
    return json.dumps({"type": "error", "v": PROTOCOL_VERSION, "code": code,
                       "message": message})


def load_schema() -> dict:
    return json.loads(SCHEMA_PATH.read_text())
