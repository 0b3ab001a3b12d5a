"""Synthetic speech substrate: tone-coded utterances, noise, RIRs, SNR mixing,
and multi-scale log-mel features.

Each transcript symbol renders as an 80 ms harmonic tone whose fundamental
identifies the symbol, so transcripts are exact ground truth and error rates
need no external recognizer. All generators are pure functions of their
explicit seeds.
"""

from __future__ import annotations

from dataclasses import dataclass, field

import numpy as np
from scipy.signal import fftconvolve

from .config import SAMPLE_RATE
from .errors import DegenerateMix, InvalidRIR, InvalidSymbol, NoiseTooShort, SignalTooShort
from .seeding import derive_seed

SEGMENT_MS = 80
SEGMENT_SAMPLES = SAMPLE_RATE * SEGMENT_MS // 1000  # 1280
RAMP_MS = 5
F0_BASE = 120.0
F0_RATIO = 1.12
HARMONIC_AMPS = (1.0, 0.5, 0.25)  # fundamental plus two harmonics
BASE_AMP = 0.45                   # worst case 0.45 * 1.1 * 1.75 = 0.866 < 0.9
PEAK_LIMIT = 0.9
F0_JITTER = 0.02
AMP_JITTER = 0.10
SILENCE_RMS = 1e-6


@dataclass
class Waveform:
    """Mono audio signal; samples nominally in [-1, 1]."""
    samples: np.ndarray
    sample_rate: int = SAMPLE_RATE

    def __post_init__(self):
        self.samples = np.asarray(self.samples, dtype=np.float64)
        if self.samples.ndim != 1 or len(self.samples) == 0:
            raise SignalTooShort("waveform must be a nonempty 1-D array")
        if not np.all(np.isfinite(self.samples)):
            raise ValueError("waveform contains non-finite samples")

    def __len__(self):
        return len(self.samples)

    @property
    def duration_s(self) -> float:
        return len(self.samples) / self.sample_rate

    def rms(self) -> float:
        return float(np.sqrt(np.mean(self.samples ** 2)))


@dataclass
class ToyUtterance:
    """A waveform paired with its exact symbol transcript."""
    waveform: Waveform
    transcript: tuple
    seed: int


@dataclass
class MixtureSpec:
    """One mixing decision: target SNR, optional RIR, and the mixer's seed."""
    snr_db: float
    apply_rir: bool = False
    rir_id: int | None = None
    seed: int = 0


@dataclass
class MixResult:
    """Mixer output with the exact (signal, scaled-noise) decomposition kept."""
    mixture: Waveform
    signal: np.ndarray
    noise: np.ndarray
    clipped: bool
    spec: MixtureSpec


@dataclass
class MelScaleBank:
    """STFT/mel analysis scales: (fft_size, hop, n_mels) triples."""
    scales: tuple = ((256, 64, 20), (512, 128, 40), (1024, 256, 80))

    def __post_init__(self):
        for fft, hop, n_mels in self.scales:
            if fft & (fft - 1) != 0:
                raise ValueError(f"fft size {fft} is not a power of two")
            if not 0 < n_mels < fft // 2:
                raise ValueError(f"n_mels {n_mels} must be < fft/2")


def symbol_f0(symbol: int) -> float:
    """Fundamental frequency assigned to a transcript symbol."""
    return F0_BASE * F0_RATIO ** symbol


def _segment_ramp(n_ramp: int, n_total: int) -> np.ndarray:
    """Flat envelope with raised-cosine onset/offset ramps."""
    env = np.ones(n_total)
    ramp = 0.5 - 0.5 * np.cos(np.pi * np.arange(n_ramp) / n_ramp)
    env[:n_ramp] = ramp
    env[-n_ramp:] = np.minimum(env[-n_ramp:], ramp[::-1])
    return env


def render_symbol(symbol: int, f0_scale: float = 1.0, amp_scale: float = 1.0) -> np.ndarray:
    """Render one 80 ms harmonic segment; scales of 1.0 give the clean template."""
    n = SEGMENT_SAMPLES
    t = np.arange(n) / SAMPLE_RATE
    f0 = symbol_f0(symbol) * f0_scale
    seg = np.zeros(n)
    for h, amp in enumerate(HARMONIC_AMPS, start=1):
        seg += amp * np.sin(2.0 * np.pi * h * f0 * t)
    seg *= BASE_AMP * amp_scale
    n_ramp = SAMPLE_RATE * RAMP_MS // 1000
    seg *= _segment_ramp(n_ramp, n)
    return seg


def synth_utterance(transcript, seed: int, alphabet_size: int = 16) -> ToyUtterance:
    """Synthesize a tone-coded utterance; deterministic in (transcript, seed).

    Each symbol becomes an 80 ms segment at its own fundamental with two
    harmonics, raised-cosine 5 ms onset/offset, and seeded jitter of +-2% in
    f0 and +-10% in amplitude. Peak amplitude stays <= 0.9.
    """
    transcript = tuple(int(v) for v in transcript)
    if len(transcript) == 0:
        raise InvalidSymbol("transcript is empty")
    for v in transcript:
        if not 0 <= v < alphabet_size:
            raise InvalidSymbol(f"symbol {v} outside alphabet of size {alphabet_size}")
    rng = np.random.default_rng(seed)
    segments = []
    for v in transcript:
        f0_scale = 1.0 + rng.uniform(-F0_JITTER, F0_JITTER)
        amp_scale = 1.0 + rng.uniform(-AMP_JITTER, AMP_JITTER)
        segments.append(render_symbol(v, f0_scale, amp_scale))
    samples = np.concatenate(segments)
    peak = np.max(np.abs(samples))
    if peak > PEAK_LIMIT:
        samples = samples * (PEAK_LIMIT / peak)
    return ToyUtterance(Waveform(samples), transcript, seed)


def synth_noise(kind: str, duration_s: float, seed: int,
                alphabet_size: int = 16) -> Waveform:
    """Deterministic synthetic noise: white, babble, or tonal."""
    if duration_s <= 0:
        raise ValueError("duration_s must be > 0")
    n = int(round(duration_s * SAMPLE_RATE))
    rng = np.random.default_rng(seed)
    if kind == "white":
        samples = rng.normal(0.0, 0.1, n)
    elif kind == "babble":
        n_sym = int(np.ceil(n / SEGMENT_SAMPLES))
        streams = np.zeros(n_sym * SEGMENT_SAMPLES)
        for k in range(6):
            transcript = rng.integers(0, alphabet_size, n_sym)
            child = derive_seed(seed, "babble", k)
            utt = synth_utterance(transcript, child, alphabet_size)
            streams = streams + utt.waveform.samples
        samples = streams[:n] / 6.0
    elif kind == "tonal":
        count = int(rng.integers(2, 5))
        t = np.arange(n) / SAMPLE_RATE
        samples = np.zeros(n)
        for _ in range(count):
            freq = rng.uniform(100.0, 2000.0)
            phase = rng.uniform(0.0, 2.0 * np.pi)
            amp = rng.uniform(0.3, 1.0)
            samples += amp * np.sin(2.0 * np.pi * freq * t + phase)
        samples *= 0.5 / max(np.max(np.abs(samples)), 1e-12)
    else:
        raise ValueError(f"unknown noise kind {kind!r}")
    return Waveform(samples)


def synth_rir(decay_ms: float, seed: int) -> Waveform:
    """Unit direct-path impulse followed by an exponentially decaying noise tail."""
    if not 50.0 <= decay_ms <= 500.0:
        raise InvalidRIR(f"decay_ms {decay_ms} outside [50, 500]")
    tau = decay_ms / 1000.0
    n = int(round(5.0 * tau * SAMPLE_RATE)) + 1
    rng = np.random.default_rng(seed)
    h = np.zeros(n)
    h[0] = 1.0
    t = np.arange(1, n) / SAMPLE_RATE
    h[1:] = 0.3 * rng.normal(0.0, 1.0, n - 1) * np.exp(-t / tau)
    return Waveform(h)


def mix(clean: Waveform, noise: Waveform, spec: MixtureSpec,
        rir_bank=()) -> MixResult:
    """Mix noise into clean speech at an exact SNR, optionally through an RIR.

    The (possibly reverberant, peak-renormalized) signal counts as "signal"
    for the SNR scaling; the anechoic clean utterance remains the training
    target elsewhere. Output samples are clipped to [-1, 1] only when they
    exceed it, and the clipping is flagged.
    """
    if clean.rms() <= SILENCE_RMS:
        raise DegenerateMix("clean signal is silent")
    if len(noise) < len(clean):
        raise NoiseTooShort(f"noise ({len(noise)}) shorter than clean ({len(clean)})")
    rng = np.random.default_rng(spec.seed)
    offset = int(rng.integers(0, len(noise) - len(clean) + 1))
    noise_crop = noise.samples[offset:offset + len(clean)]
    if float(np.sqrt(np.mean(noise_crop ** 2))) <= SILENCE_RMS:
        raise DegenerateMix("noise crop is silent")

    signal = clean.samples
    if spec.apply_rir:
        if len(rir_bank) == 0:
            raise InvalidRIR("apply_rir requested but rir_bank is empty")
        rir_id = spec.rir_id if spec.rir_id is not None else int(rng.integers(0, len(rir_bank)))
        rir = rir_bank[rir_id]
        peak_before = np.max(np.abs(signal))
        signal = fftconvolve(signal, rir.samples)[:len(clean)]
        peak_after = max(np.max(np.abs(signal)), 1e-12)
        signal = signal * (peak_before / peak_after)

    p_signal = np.mean(signal ** 2)
    p_noise = np.mean(noise_crop ** 2)
    scale = np.sqrt(p_signal / (p_noise * 10.0 ** (spec.snr_db / 10.0)))
    noise_scaled = noise_crop * scale

    mixture = signal + noise_scaled
    clipped = bool(np.any(np.abs(mixture) > 1.0))
    if clipped:
        mixture = np.clip(mixture, -1.0, 1.0)
    return MixResult(Waveform(mixture), signal, noise_scaled, clipped, spec)


def hann_window(n: int) -> np.ndarray:
    """Periodic Hann window (matches torch.hann_window(n, periodic=True))."""
    return 0.5 - 0.5 * np.cos(2.0 * np.pi * np.arange(n) / n)


def hz_to_mel(f):
    return 2595.0 * np.log10(1.0 + np.asarray(f, dtype=np.float64) / 700.0)


def mel_to_hz(m):
    return 700.0 * (10.0 ** (np.asarray(m, dtype=np.float64) / 2595.0) - 1.0)


def mel_filterbank(n_mels: int, fft_size: int, sample_rate: int = SAMPLE_RATE) -> np.ndarray:
    """Triangular mel filterbank, peak 1.0 per filter, shape [n_mels, fft//2+1]."""
    n_bins = fft_size // 2 + 1
    fmax = sample_rate / 2.0
    mel_points = np.linspace(hz_to_mel(0.0), hz_to_mel(fmax), n_mels + 2)
    hz_points = mel_to_hz(mel_points)
    bin_freqs = np.arange(n_bins) * sample_rate / fft_size
    fb = np.zeros((n_mels, n_bins))
    for m in range(n_mels):
        lo, center, hi = hz_points[m], hz_points[m + 1], hz_points[m + 2]
        up = (bin_freqs - lo) / (center - lo)
        down = (hi - bin_freqs) / (hi - center)
        fb[m] = np.maximum(0.0, np.minimum(up, down))
    return fb


LOG_MEL_FLOOR = 1e-5


def mel_multi(w: Waveform, bank: MelScaleBank | None = None) -> list:
    """Log-mel power matrices at each analysis scale.

    Frames are taken without centering, so each matrix has shape
    (n_mels, 1 + (len - fft) // hop). Log uses log(1e-5 + power).
    """
    if bank is None:
        bank = MelScaleBank()
    largest = max(fft for fft, _, _ in bank.scales)
    if len(w) < largest + 1:
        raise SignalTooShort(f"waveform length {len(w)} <= largest fft size {largest}")
    out = []
    for fft_size, hop, n_mels in bank.scales:
        n_frames = 1 + (len(w) - fft_size) // hop
        window = hann_window(fft_size)
        fb = mel_filterbank(n_mels, fft_size, w.sample_rate)
        frames = np.stack([w.samples[i * hop:i * hop + fft_size] * window
                           for i in range(n_frames)])
        power = np.abs(np.fft.rfft(frames, axis=1)) ** 2
        mel_power = power @ fb.T
        out.append(np.log(LOG_MEL_FLOOR + mel_power).T)
    return out
