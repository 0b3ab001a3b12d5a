"""Configuration schema, YAML loading, overrides, and config hashing.

Every tunable default of the pipeline lives here and is echoed in
``configs/default.yaml``. Sections map one-to-one onto pipeline stages.
"""

from __future__ import annotations

import dataclasses
import hashlib
import json
from dataclasses import dataclass, field
from pathlib import Path

import yaml

from .errors import ConfigError

SAMPLE_RATE = 16000
FRONTEND_KERNEL = 400
FRONTEND_HOP = 320          # 50 Hz feature rate at 16 kHz
CODEC_DOWNSAMPLE = 4        # 50 Hz -> 12.5 Hz
SAMPLES_PER_CODEC_FRAME = FRONTEND_HOP * CODEC_DOWNSAMPLE  # 1280


@dataclass
class Schedule:
    """Linear warmup to peak_lr, then cosine decay to min_lr."""
    steps: int = 1000
    warmup: int = 100
    batch_size: int = 16
    peak_lr: float = 1e-3
    min_lr: float = 1e-6


@dataclass
class SignalConfig:
    sample_rate: int = 16000
    segment_ms: int = 80
    alphabet_size: int = 16
    grammar_seed: int = 7
    corpus_seed: int = 11
    train_utterances: int = 2000
    val_utterances: int = 64
    test_utterances: int = 200
    train_len: tuple = (8, 8)       # symbols per utterance, inclusive range
    test_len: tuple = (8, 8)
    snr_range: tuple = (-5.0, 15.0)
    rir_prob: float = 0.5
    rir_bank_size: int = 8
    rir_decay_range_ms: tuple = (80.0, 300.0)
    noise_kinds: tuple = ("white", "babble", "tonal")
    mel_scales: tuple = ((256, 64, 20), (512, 128, 40), (1024, 256, 80))


@dataclass
class BackboneConfig:
    dim: int = 64
    layers: int = 4
    heads: int = 4
    ff_mult: int = 2
    mask_prob: float = 0.3
    mask_span: int = 3
    pretrain: Schedule = field(default_factory=lambda: Schedule(
        steps=1500, warmup=150, batch_size=16, peak_lr=1e-3, min_lr=1e-6))


@dataclass
class CodecConfig:
    codebooks: int = 4
    codebook_size: int = 64
    enc_blocks: int = 2
    dec_blocks: int = 4
    lambda_rec: float = 15.0
    lambda_adv: float = 1.0
    lambda_fm: float = 2.0
    lambda_cb: float = 1.0
    lambda_com: float = 0.25
    stage1: Schedule = field(default_factory=lambda: Schedule(
        steps=2500, warmup=250, batch_size=16, peak_lr=1e-3, min_lr=1e-6))
    stage2: Schedule = field(default_factory=lambda: Schedule(
        steps=1000, warmup=100, batch_size=16, peak_lr=2e-4, min_lr=1e-6))
    disc_lr: float = 2e-4


@dataclass
class TextLMConfig:
    layers: int = 2
    dim: int = 96
    heads: int = 4
    ff_mult: int = 2
    max_len: int = 128
    pretrain: Schedule = field(default_factory=lambda: Schedule(
        steps=1500, warmup=150, batch_size=32, peak_lr=1e-3, min_lr=1e-6))


@dataclass
class SemTeacherConfig:
    dim: int = 64
    blocks: int = 2
    heads: int = 4
    ff_mult: int = 2
    textlm: TextLMConfig = field(default_factory=TextLMConfig)
    train: Schedule = field(default_factory=lambda: Schedule(
        steps=2500, warmup=250, batch_size=16, peak_lr=1e-3, min_lr=1e-6))


@dataclass
class DistillConfig:
    acoustic_weight: float = 1.0
    semantic_weight: float = 1.0
    acoustic_target: str = "pre_rvq"     # or "post_rvq"
    backbone_init: str = "pretrained"    # or "random"
    heads_init: str = "teachers"         # or "random"
    train: Schedule = field(default_factory=lambda: Schedule(
        steps=2000, warmup=200, batch_size=8, peak_lr=5e-4, min_lr=1e-6))


@dataclass
class DecodeConfig:
    mode: str = "greedy"      # or "topk"
    top_k: int = 10
    temperature: float = 0.8


@dataclass
class GenLMConfig:
    layers: int = 4
    dim: int = 128
    heads: int = 4
    ff_mult: int = 2
    max_len: int = 256
    prefix_mode: str = "a_s"  # "a_s" = acoustic+semantic halves, "a_only" = two acoustic projections
    decode: DecodeConfig = field(default_factory=DecodeConfig)
    train: Schedule = field(default_factory=lambda: Schedule(
        steps=3000, warmup=300, batch_size=8, peak_lr=1e-3, min_lr=1e-6))


@dataclass
class EvalConfig:
    snr_grid: tuple = (-5.0, 0.0, 5.0, 15.0)
    mixtures: int = 200
    seeds: tuple = (0, 1, 2, 3, 4)
    batch_size: int = 50
    mixture_seed: int = 9001


@dataclass
class RunConfig:
    out_dir: str = "runs/default"
    threads: int = 1
    global_seed: int = 0


@dataclass
class Config:
    run: RunConfig = field(default_factory=RunConfig)
    signal: SignalConfig = field(default_factory=SignalConfig)
    backbone: BackboneConfig = field(default_factory=BackboneConfig)
    codec: CodecConfig = field(default_factory=CodecConfig)
    semteacher: SemTeacherConfig = field(default_factory=SemTeacherConfig)
    distill: DistillConfig = field(default_factory=DistillConfig)
    genlm: GenLMConfig = field(default_factory=GenLMConfig)
    eval: EvalConfig = field(default_factory=EvalConfig)

    def to_dict(self) -> dict:
        return dataclasses.asdict(self)

    def hash(self) -> str:
        blob = json.dumps(self.to_dict(), sort_keys=True, default=_json_default)
        return hashlib.sha256(blob.encode("utf-8")).hexdigest()

    def validate(self) -> None:
        _validate(self)


def _json_default(o):
    if isinstance(o, tuple):
        return list(o)
    raise TypeError(f"not serializable: {o!r}")


def _build(dc_type, data, path):
    """Recursively build a dataclass from a plain dict, tracking field paths."""
    if not isinstance(data, dict):
        raise ConfigError(f"expected a mapping, got {type(data).__name__}", field=path)
    known = {f.name: f for f in dataclasses.fields(dc_type)}
    for key in data:
        if key not in known:
            raise ConfigError("unknown key", field=f"{path}.{key}" if path else key)
    kwargs = {}
    for name, f in known.items():
        if name not in data:
            continue
        sub_path = f"{path}.{name}" if path else name
        value = data[name]
        if dataclasses.is_dataclass(f.type) or (isinstance(f.type, type) and dataclasses.is_dataclass(f.type)):
            kwargs[name] = _build(f.type, value, sub_path)
        else:
            kwargs[name] = _coerce(f, value, sub_path)
    return dc_type(**kwargs)


def _coerce(f, value, path):
    target = f.type
    if isinstance(target, str):  # postponed annotations
        target = {"int": int, "float": float, "str": str, "bool": bool, "tuple": tuple}.get(target, None)
    try:
        if target is tuple:
            if not isinstance(value, (list, tuple)):
                raise TypeError("expected a list")
            return _deep_tuple(value)
        if target is bool:
            if not isinstance(value, bool):
                raise TypeError("expected a bool")
            return value
        if target is int:
            if isinstance(value, bool) or not isinstance(value, int):
                raise TypeError("expected an int")
            return value
        if target is float:
            if isinstance(value, bool) or not isinstance(value, (int, float)):
                raise TypeError("expected a number")
            return float(value)
        if target is str:
            if not isinstance(value, str):
                raise TypeError("expected a string")
            return value
    except TypeError as e:
        raise ConfigError(str(e), field=path) from None
    return value


def _deep_tuple(x):
    if isinstance(x, (list, tuple)):
        return tuple(_deep_tuple(v) for v in x)
    return x


def _check(cond, message, path):
    if not cond:
        raise ConfigError(message, field=path)


def _validate(cfg: Config) -> None:
    s = cfg.signal
    _check(s.sample_rate == SAMPLE_RATE, "sample_rate is fixed at 16000", "signal.sample_rate")
    _check(s.segment_ms == 80, "segment_ms is fixed at 80", "signal.segment_ms")
    _check(s.alphabet_size >= 2, "alphabet_size must be >= 2", "signal.alphabet_size")
    _check(s.snr_range[0] <= s.snr_range[1], "snr_range must be ordered", "signal.snr_range")
    _check(0.0 <= s.rir_prob <= 1.0, "rir_prob must be in [0,1]", "signal.rir_prob")
    for i, (fft, hop, n_mels) in enumerate(s.mel_scales):
        p = f"signal.mel_scales[{i}]"
        _check(fft > 0 and fft & (fft - 1) == 0, "fft size must be a power of two", p)
        _check(0 < hop <= fft, "hop must be in (0, fft]", p)
        _check(0 < n_mels < fft // 2, "n_mels must be < fft/2", p)
    for name in ("train_len", "test_len"):
        lo, hi = getattr(s, name)
        _check(1 <= lo <= hi, "length range must be ordered and >= 1", f"signal.{name}")

    b = cfg.backbone
    _check(b.dim % b.heads == 0, "dim must divide evenly by heads", "backbone.dim")
    _check(b.layers >= 1, "need at least one layer", "backbone.layers")
    _check(0.0 < b.mask_prob < 1.0, "mask_prob must be in (0,1)", "backbone.mask_prob")
    _check(b.mask_span >= 1, "mask_span must be >= 1", "backbone.mask_span")

    c = cfg.codec
    _check(c.codebooks >= 1, "need at least one codebook", "codec.codebooks")
    _check(c.codebook_size >= 2, "codebook_size must be >= 2", "codec.codebook_size")
    for lam in ("lambda_rec", "lambda_adv", "lambda_fm", "lambda_cb", "lambda_com"):
        _check(getattr(c, lam) >= 0, "loss weight must be >= 0", f"codec.{lam}")
    _check(c.codebook_size * c.codebooks < 2 ** 16, "token ids must fit in uint16", "codec.codebook_size")

    st = cfg.semteacher
    _check(st.dim % st.heads == 0, "dim must divide evenly by heads", "semteacher.dim")
    _check(st.textlm.dim % st.textlm.heads == 0, "dim must divide evenly by heads", "semteacher.textlm.dim")

    d = cfg.distill
    _check(d.acoustic_target in ("pre_rvq", "post_rvq"), "unknown acoustic_target", "distill.acoustic_target")
    _check(d.backbone_init in ("pretrained", "random"), "unknown backbone_init", "distill.backbone_init")
    _check(d.heads_init in ("teachers", "random"), "unknown heads_init", "distill.heads_init")

    g = cfg.genlm
    _check(g.dim % g.heads == 0, "dim must divide evenly by heads", "genlm.dim")
    _check(g.dim % 2 == 0, "dim must be even (two adapter halves)", "genlm.dim")
    _check(g.prefix_mode in ("a_s", "a_only"), "unknown prefix_mode", "genlm.prefix_mode")
    _check(g.decode.mode in ("greedy", "topk"), "unknown decode mode", "genlm.decode.mode")
    _check(g.decode.top_k >= 1, "top_k must be >= 1", "genlm.decode.top_k")
    _check(g.decode.temperature > 0, "temperature must be > 0", "genlm.decode.temperature")

    e = cfg.eval
    _check(len(e.snr_grid) >= 1, "snr_grid must be nonempty", "eval.snr_grid")
    _check(e.mixtures >= 1, "mixtures must be >= 1", "eval.mixtures")
    _check(len(e.seeds) >= 1, "need at least one seed", "eval.seeds")

    _check(cfg.run.threads >= 1, "threads must be >= 1", "run.threads")

    for sched_path, sched in _schedules(cfg):
        _check(sched.steps >= 1, "steps must be >= 1", f"{sched_path}.steps")
        _check(0 <= sched.warmup <= sched.steps, "warmup must be in [0, steps]", f"{sched_path}.warmup")
        _check(sched.batch_size >= 1, "batch_size must be >= 1", f"{sched_path}.batch_size")
        _check(sched.peak_lr > 0 and sched.min_lr > 0, "learning rates must be > 0", f"{sched_path}.peak_lr")


def _schedules(cfg: Config):
    return [
        ("backbone.pretrain", cfg.backbone.pretrain),
        ("codec.stage1", cfg.codec.stage1),
        ("codec.stage2", cfg.codec.stage2),
        ("semteacher.textlm.pretrain", cfg.semteacher.textlm.pretrain),
        ("semteacher.train", cfg.semteacher.train),
        ("distill.train", cfg.distill.train),
        ("genlm.train", cfg.genlm.train),
    ]


def load_config(path=None, overrides=()) -> Config:
    """Load a Config from YAML, apply dotted-path overrides, validate.

    Overrides are ``section.key=value`` strings; values are parsed as YAML
    (so ``codec.stage1.steps=50`` and ``genlm.decode.mode=topk`` both work).
    """
    data = {}
    if path is not None:
        raw = Path(path).read_text()
        loaded = yaml.safe_load(raw)
        if loaded is None:
            loaded = {}
        if not isinstance(loaded, dict):
            raise ConfigError("top level must be a mapping", field=str(path))
        data = loaded
    for item in overrides:
        if "=" not in item:
            raise ConfigError("override must look like section.key=value", field=item)
        dotted, _, raw_value = item.partition("=")
        _apply_override(data, dotted.strip(), yaml.safe_load(raw_value))
    cfg = _build(Config, data, "")
    cfg.validate()
    return cfg


def _apply_override(data: dict, dotted: str, value) -> None:
    keys = dotted.split(".")
    node = data
    for k in keys[:-1]:
        node = node.setdefault(k, {})
        if not isinstance(node, dict):
            raise ConfigError("override path crosses a non-mapping value", field=dotted)
    node[keys[-1]] = value


def dump_default_yaml() -> str:
    """Render the full default configuration as YAML (shipped example config)."""
    return yaml.safe_dump(json.loads(json.dumps(Config().to_dict(), default=_json_default)),
                          sort_keys=False)
