"""Event detection over windowed current spectrograms.

Per window the pipeline is: pick the frequency bin whose first-half/second-half
mean gap is largest, walk a short forward standard deviation along that bin's
block series, fence the deviations with Tukey's rule, and flag the window when
any deviation falls outside the fences. Runs of flagged windows merge into
single timestamped events.
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field

import numpy as np

from .signal_io import SampleStream
from .spectral import spectrogram
from .windowing import Window, WindowingConfig, to_block_matrix, windows


@dataclass(frozen=True)
class DetectorConfig:
    """Tukey constant, deviation window width, and the window geometry."""

    k: float = 0.5
    std_window: int = 4
    windowing: WindowingConfig = field(default_factory=WindowingConfig)

    def __post_init__(self) -> None:
        if self.k < 0:
            raise ValueError("k must be nonnegative")
        if self.std_window < 2:
            raise ValueError("std_window must be at least 2")
        if self.std_window > self.windowing.blocks_per_window:
            raise ValueError(
                "std_window cannot exceed the number of blocks per window"
            )


@dataclass(frozen=True)
class BinSelection:
    """The winning frequency bin and the per-bin gap scores behind it."""

    selected_bin: int
    delta_p: float
    per_bin_delta: np.ndarray


@dataclass(frozen=True)
class TukeyFences:
    q1: float
    q3: float
    k: float
    lo: float
    hi: float


@dataclass(frozen=True)
class WindowVerdict:
    """Per-window outcome with the evidence that produced it."""

    window_start: int
    is_event: bool
    first_outlier_block: int | None
    selection: BinSelection
    fences: TukeyFences


@dataclass(frozen=True)
class DetectedEvent:
    """A merged run of flagged windows, located to block resolution."""

    sample_index: int
    time_s: float
    window_span: tuple[int, int]


def delta_p(spectrogram_f: np.ndarray) -> np.ndarray:
    """Per-bin absolute gap between early-half and late-half mean magnitude.

    The halves take equally many rows from each end; with an odd row count
    the middle row is left out so neither mean is favored. A bin whose
    magnitude jumps partway through the window scores high, a stationary
    bin scores near zero.
    """
    f = np.asarray(spectrogram_f)
    rows = f.shape[0]
    if rows < 2:
        raise ValueError("need at least 2 spectrogram rows")
    half = rows // 2
    early = f[:half].mean(axis=0)
    late = f[rows - half:].mean(axis=0)
    return np.abs(early - late)


def select_bin(spectrogram_f: np.ndarray) -> BinSelection:
    """Pick the bin with the largest half-mean gap, lowest index on ties."""
    gaps = delta_p(spectrogram_f)
    best = int(np.argmax(gaps))
    return BinSelection(selected_bin=best, delta_p=float(gaps[best]), per_bin_delta=gaps)


def extract_series(spectrogram_f: np.ndarray, selected_bin: int) -> np.ndarray:
    """Column of the spectrogram at the selected bin, one value per block."""
    f = np.asarray(spectrogram_f)
    if not 0 <= selected_bin < f.shape[1]:
        raise ValueError(f"bin {selected_bin} out of range for {f.shape[1]} bins")
    return f[:, selected_bin]


def forward_std(series: np.ndarray, w: int = 4) -> np.ndarray:
    """Population standard deviation over each length-w forward slice.

    Output index t covers ``series[t .. t+w-1]``, so the result has
    ``len(series) - w + 1`` entries.
    """
    x = np.asarray(series, dtype=np.float64)
    if w < 1:
        raise ValueError("w must be positive")
    if len(x) < w:
        raise ValueError(f"series of length {len(x)} is shorter than w={w}")
    return np.lib.stride_tricks.sliding_window_view(x, w).std(axis=-1)


def quantile(values: np.ndarray, q: float) -> float:
    """Sorted linear-interpolation quantile at position (n-1)*q."""
    v = np.asarray(values, dtype=np.float64)
    if v.size == 0:
        raise ValueError("quantile of empty input")
    if not 0.0 <= q <= 1.0:
        raise ValueError(f"q must lie in [0, 1], got {q}")
    s = np.sort(v)
    pos = (s.size - 1) * q
    lower = int(math.floor(pos))
    frac = pos - lower
    if lower + 1 < s.size:
        return float(s[lower] + frac * (s[lower + 1] - s[lower]))
    return float(s[lower])


def tukey_fences(sigma: np.ndarray, k: float) -> TukeyFences:
    """Quartile fences [Q1 - k*IQR, Q3 + k*IQR] of the deviation series."""
    q1 = quantile(sigma, 0.25)
    q3 = quantile(sigma, 0.75)
    iqr = q3 - q1
    return TukeyFences(q1=q1, q3=q3, k=k, lo=q1 - k * iqr, hi=q3 + k * iqr)


def classify_window(
    sigma: np.ndarray, fences: TukeyFences
) -> tuple[bool, int | None]:
    """Flag the window when any deviation falls strictly outside the fences.

    The fence interval is closed, so values sitting exactly on a fence are
    ordinary. Returns the flag and the index of the first outlying deviation.
    """
    s = np.asarray(sigma)
    outside = (s < fences.lo) | (s > fences.hi)
    if not outside.any():
        return False, None
    return True, int(np.argmax(outside))


def _window_verdict(window: Window, cfg: DetectorConfig) -> WindowVerdict:
    matrix = to_block_matrix(window, cfg.windowing.block_len)
    spec = spectrogram(matrix)
    selection = select_bin(spec)
    series = extract_series(spec, selection.selected_bin)
    sigma = forward_std(series, cfg.std_window)
    fences = tukey_fences(sigma, cfg.k)
    is_event, first_outlier = classify_window(sigma, fences)
    return WindowVerdict(
        window_start=window.start_index,
        is_event=is_event,
        first_outlier_block=first_outlier,
        selection=selection,
        fences=fences,
    )


def detect(
    stream: SampleStream, cfg: DetectorConfig | None = None
) -> tuple[list[DetectedEvent], list[WindowVerdict]]:
    """Run the full pipeline over a stream.

    Consecutive flagged windows are merged into one event; a single clean
    window in between splits two events apart. Each event is stamped at the
    first outlying block of the first flagged window of its run, converted
    to a sample index, so localization is block-resolution (block_len
    samples) rather than window-resolution.

    Returns the merged events and the per-window verdicts, both in stream
    order. A stream shorter than one window yields two empty lists.
    """
    if cfg is None:
        cfg = DetectorConfig()
    verdicts = [_window_verdict(w, cfg) for w in windows(stream, cfg.windowing)]

    events: list[DetectedEvent] = []
    run_start: WindowVerdict | None = None
    run_last: WindowVerdict | None = None
    for verdict in verdicts + [None]:  # sentinel closes a trailing run
        if verdict is not None and verdict.is_event:
            if run_start is None:
                run_start = verdict
            run_last = verdict
            continue
        if run_start is not None:
            sample_index = (
                run_start.window_start
                + run_start.first_outlier_block * cfg.windowing.block_len
            )
            events.append(
                DetectedEvent(
                    sample_index=sample_index,
                    time_s=sample_index / stream.sample_rate_hz,
                    window_span=(run_start.window_start, run_last.window_start),
                )
            )
            run_start = None
            run_last = None
    return events, verdicts
