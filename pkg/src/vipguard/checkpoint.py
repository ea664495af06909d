"""Binary checkpoints for learner bundles.

Layout (all integers and floats little-endian; full byte-level description
in docs/formats.md):

    magic "VIPGUARD-CKPT\\n" | u32 version | 16-byte scenario digest (hex)
    | u8 algorithm | u8 critic_obs | u32 n_bodyguards | f64 noise_scale
    then per bodyguard: actor, critic, target actor, target critic (network
    blocks), then actor and critic optimizer blocks.

    network block: u32 layer count K | u32 x K layer sizes | u8 activation
        | per layer: weights row-major f64, then biases f64
    optimizer block: u64 step | f64 lr, beta1, beta2, epsilon
        | per layer: first/second weight moments, then first/second bias
        moments, shapes mirroring the corresponding network

Round trips are bit-exact. Readers refuse wrong magic, unknown versions,
digest mismatches, and truncated files rather than guessing.
"""

from __future__ import annotations

import struct
from pathlib import Path

import numpy as np

from .errors import CheckpointError
from .nets import MlpParams, OptState
from .training import LearnerBundle

MAGIC = b"VIPGUARD-CKPT\n"
VERSION = 1

_ALGO_CODES = {"maddpg": 0, "ddpg": 1}
_ALGO_NAMES = {v: k for k, v in _ALGO_CODES.items()}
_OBS_CODES = {"all": 0, "own": 1}
_OBS_NAMES = {v: k for k, v in _OBS_CODES.items()}
_ACT_CODES = {"identity": 0, "tanh": 1}
_ACT_NAMES = {v: k for k, v in _ACT_CODES.items()}


def _pack_array(out: bytearray, arr: np.ndarray) -> None:
    out += np.ascontiguousarray(arr, dtype="<f8").tobytes()


def _pack_mlp(out: bytearray, params: MlpParams) -> None:
    out += struct.pack("<I", len(params.layer_sizes))
    out += struct.pack(f"<{len(params.layer_sizes)}I", *params.layer_sizes)
    out += struct.pack("<B", _ACT_CODES[params.output_activation])
    for w, b in zip(params.weights, params.biases):
        _pack_array(out, w)
        _pack_array(out, b)


def _pack_opt(out: bytearray, opt: OptState) -> None:
    out += struct.pack("<Q", opt.step)
    out += struct.pack("<4d", opt.learning_rate, opt.beta1, opt.beta2, opt.epsilon)
    for mw, vw, mb, vb in zip(opt.m_weights, opt.v_weights, opt.m_biases, opt.v_biases):
        _pack_array(out, mw)
        _pack_array(out, vw)
        _pack_array(out, mb)
        _pack_array(out, vb)


class _Reader:
    def __init__(self, data: bytes):
        self.data = data
        self.offset = 0

    def take(self, count: int) -> bytes:
        if self.offset + count > len(self.data):
            raise CheckpointError(
                f"truncated checkpoint: wanted {count} bytes at offset {self.offset}, "
                f"file has {len(self.data)}"
            )
        chunk = self.data[self.offset : self.offset + count]
        self.offset += count
        return chunk

    def u32(self) -> int:
        return struct.unpack("<I", self.take(4))[0]

    def u64(self) -> int:
        return struct.unpack("<Q", self.take(8))[0]

    def u8(self) -> int:
        return self.take(1)[0]

    def f64(self) -> float:
        return struct.unpack("<d", self.take(8))[0]

    def array(self, shape: tuple[int, ...]) -> np.ndarray:
        count = int(np.prod(shape))
        raw = self.take(count * 8)
        return np.frombuffer(raw, dtype="<f8").astype(float).reshape(shape)


def _read_mlp(r: _Reader) -> MlpParams:
    depth = r.u32()
    if depth < 2 or depth > 64:
        raise CheckpointError(f"implausible layer count {depth}")
    sizes = struct.unpack(f"<{depth}I", r.take(4 * depth))
    act_code = r.u8()
    if act_code not in _ACT_NAMES:
        raise CheckpointError(f"unknown activation code {act_code}")
    weights, biases = [], []
    for fan_in, fan_out in zip(sizes[:-1], sizes[1:]):
        weights.append(r.array((fan_in, fan_out)))
        biases.append(r.array((fan_out,)))
    return MlpParams(
        layer_sizes=tuple(int(s) for s in sizes),
        weights=weights,
        biases=biases,
        output_activation=_ACT_NAMES[act_code],
    )


def _read_opt(r: _Reader, net: MlpParams) -> OptState:
    step = r.u64()
    lr, b1, b2, eps = (r.f64() for _ in range(4))
    m_w, v_w, m_b, v_b = [], [], [], []
    for w, b in zip(net.weights, net.biases):
        m_w.append(r.array(w.shape))
        v_w.append(r.array(w.shape))
        m_b.append(r.array(b.shape))
        v_b.append(r.array(b.shape))
    return OptState(
        m_weights=m_w,
        v_weights=v_w,
        m_biases=m_b,
        v_biases=v_b,
        step=step,
        learning_rate=lr,
        beta1=b1,
        beta2=b2,
        epsilon=eps,
    )


def save_checkpoint(bundle: LearnerBundle, path: str | Path) -> None:
    """Serialize a bundle; `load_checkpoint` reproduces it bit-identically."""
    out = bytearray()
    out += MAGIC
    out += struct.pack("<I", VERSION)
    digest = bundle.scenario_digest.encode()
    if len(digest) != 16:
        raise CheckpointError(
            f"bundle carries a malformed scenario digest {bundle.scenario_digest!r}"
        )
    out += digest
    out += struct.pack("<B", _ALGO_CODES[bundle.algorithm])
    out += struct.pack("<B", _OBS_CODES[bundle.critic_obs])
    out += struct.pack("<I", bundle.n_bodyguards)
    out += struct.pack("<d", bundle.noise_scale)
    for i in range(bundle.n_bodyguards):
        _pack_mlp(out, bundle.actors[i])
        _pack_mlp(out, bundle.critics[i])
        _pack_mlp(out, bundle.target_actors[i])
        _pack_mlp(out, bundle.target_critics[i])
        _pack_opt(out, bundle.actor_opt[i])
        _pack_opt(out, bundle.critic_opt[i])
    Path(path).write_bytes(bytes(out))


def load_checkpoint(path: str | Path, expected_digest: str | None = None) -> LearnerBundle:
    """Read a checkpoint, refusing mismatched magic, version, or digest."""
    data = Path(path).read_bytes()
    r = _Reader(data)
    if r.take(len(MAGIC)) != MAGIC:
        raise CheckpointError(f"{path} is not a checkpoint (bad magic)")
    version = r.u32()
    if version != VERSION:
        raise CheckpointError(f"unsupported checkpoint version {version} (expected {VERSION})")
    digest = r.take(16).decode()
    if expected_digest is not None and digest != expected_digest:
        raise CheckpointError(
            f"checkpoint was trained on scenario {digest}, expected {expected_digest}"
        )
    algo_code = r.u8()
    obs_code = r.u8()
    if algo_code not in _ALGO_NAMES or obs_code not in _OBS_NAMES:
        raise CheckpointError("unknown algorithm or critic_obs code")
    n = r.u32()
    noise_scale = r.f64()
    actors, critics, t_actors, t_critics, a_opts, c_opts = [], [], [], [], [], []
    for _ in range(n):
        actors.append(_read_mlp(r))
        critics.append(_read_mlp(r))
        t_actors.append(_read_mlp(r))
        t_critics.append(_read_mlp(r))
        a_opts.append(_read_opt(r, actors[-1]))
        c_opts.append(_read_opt(r, critics[-1]))
    if r.offset != len(data):
        raise CheckpointError(f"{len(data) - r.offset} trailing bytes after checkpoint payload")
    return LearnerBundle(
        actors=actors,
        critics=critics,
        target_actors=t_actors,
        target_critics=t_critics,
        actor_opt=a_opts,
        critic_opt=c_opts,
        algorithm=_ALGO_NAMES[algo_code],
        critic_obs=_OBS_NAMES[obs_code],
        noise_scale=noise_scale,
        scenario_digest=digest,
    )
