"""Two-slit arrival example with an extended density over screen bins.

Geometry: slits at y = +-d/2 in a plane a distance D from the screen,
monochromatic point source amplitudes psi_s(y) = a e^{ikS_s}/S_s with
S_s the slit-to-point path length. The extended density for "arrived in
dy about y AND went through slit U" keeps the interference cross term:

    density(y, U) = |psi_U|^2 + Re[conj(psi_L) psi_U]

The two slit densities sum to the ordinary arrival density |psi_U+psi_L|^2,
but each one can go negative where the cross term is deep. Binned values
are Simpson integrals; with wide enough bins every bin is nonnegative.

Lengths are in units of 1/k when k=1. Fringes widen beyond the radius
|y| = sqrt(D^2 + d^2/4) (about 67 for d = D = 60) where the path-length
difference saturates, so those are the negative patches that survive
binning; the default window (-80, 80) is wide enough to include them.
"""
from __future__ import annotations

import math
from dataclasses import dataclass, replace

import numpy as np

from .errors import DimensionMismatch, InvariantViolation

DEFAULT_PANELS = 128
DEFAULT_Y_RANGE = (-80.0, 80.0)
SWEEP_K_DELTAS = (1.0, 2.0, 5.0, 10.0, 20.0, 40.0)


@dataclass(frozen=True)
class TwoSlitConfig:
    """Slit geometry plus the screen binning."""

    k: float = 1.0
    d: float = 60.0
    D: float = 60.0
    a: complex = 1.0 + 0.0j
    y_range: tuple[float, float] = DEFAULT_Y_RANGE
    bins: int = 32

    def __post_init__(self):
        object.__setattr__(self, "y_range", (float(self.y_range[0]), float(self.y_range[1])))
        if self.k <= 0 or self.d <= 0 or self.D <= 0:
            raise InvariantViolation("positive-geometry", 0.0, "k, d, D must be positive")
        if self.y_range[1] <= self.y_range[0]:
            raise InvariantViolation("ordered-range", 0.0, "y_range must be increasing")
        if self.bins < 1:
            raise InvariantViolation("positive-bins", float(self.bins))

    @property
    def width(self) -> float:
        return self.y_range[1] - self.y_range[0]

    @property
    def bin_width(self) -> float:
        return self.width / self.bins

    @property
    def k_delta(self) -> float:
        """Bin width in phase units; the resolution knob."""
        return self.k * self.bin_width

    def bin_edges(self) -> np.ndarray:
        return np.linspace(self.y_range[0], self.y_range[1], self.bins + 1)


def default_config(k_delta: float = 5.0, k: float = 1.0,
                   y_range: tuple[float, float] = DEFAULT_Y_RANGE) -> TwoSlitConfig:
    """Standard geometry (d = D = 60) at a requested bin resolution.

    k_delta must tile the window exactly; for the default window that
    means a divisor of 160 (in units of 1/k).
    """
    width = float(y_range[1]) - float(y_range[0])
    delta = k_delta / k
    bins = round(width / delta)
    if bins < 1 or abs(bins * delta - width) > 1e-9 * width:
        raise InvariantViolation(
            "bin-tiling", abs(bins * delta - width),
            f"k_delta={k_delta} does not tile a window of width {width}")
    return TwoSlitConfig(k=k, y_range=(float(y_range[0]), float(y_range[1])), bins=bins)


def path_length_upper(cfg: TwoSlitConfig, y):
    """Distance from the upper slit (at +d/2) to screen point y."""
    y = np.asarray(y, dtype=float)
    return np.sqrt((cfg.d / 2.0 - y) ** 2 + cfg.D ** 2)


def path_length_lower(cfg: TwoSlitConfig, y):
    y = np.asarray(y, dtype=float)
    return np.sqrt((cfg.d / 2.0 + y) ** 2 + cfg.D ** 2)


def amplitude_upper(cfg: TwoSlitConfig, y):
    s = path_length_upper(cfg, y)
    return cfg.a * np.exp(1j * cfg.k * s) / s


def amplitude_lower(cfg: TwoSlitConfig, y):
    s = path_length_lower(cfg, y)
    return cfg.a * np.exp(1j * cfg.k * s) / s


def extended_density(cfg: TwoSlitConfig, y, slit: str = "U"):
    """Closed-form density(y, slit); can be negative near deep fringes."""
    su = path_length_upper(cfg, y)
    sl = path_length_lower(cfg, y)
    if slit == "U":
        own, other = su, sl
    elif slit == "L":
        own, other = sl, su
    else:
        raise InvariantViolation("slit-name", 0.0, f"unknown slit {slit!r}")
    mag = abs(cfg.a) ** 2
    return (mag / own) * (1.0 / own + np.cos(cfg.k * (sl - su)) / other)


def extended_density_from_amplitudes(cfg: TwoSlitConfig, y, slit: str = "U"):
    """Same density assembled from the amplitudes; a second code path."""
    psi_u = amplitude_upper(cfg, y)
    psi_l = amplitude_lower(cfg, y)
    if slit == "U":
        return (np.abs(psi_u) ** 2 + np.real(np.conj(psi_l) * psi_u))
    if slit == "L":
        return (np.abs(psi_l) ** 2 + np.real(np.conj(psi_u) * psi_l))
    raise InvariantViolation("slit-name", 0.0, f"unknown slit {slit!r}")


def arrival_density(cfg: TwoSlitConfig, y):
    """|psi_U + psi_L|^2; the two extended densities sum to this."""
    return np.abs(amplitude_upper(cfg, y) + amplitude_lower(cfg, y)) ** 2


def _simpson_nodes_weights(lo: float, hi: float, panels: int):
    # one panel = one parabola over two subintervals
    if panels < 1:
        raise InvariantViolation("positive-panels", float(panels))
    if panels % 2 != 0:
        raise InvariantViolation("even-panels", float(panels),
                                 "panel count per bin must be even")
    n_sub = 2 * panels
    nodes = np.linspace(lo, hi, n_sub + 1)
    h = (hi - lo) / n_sub
    weights = np.full(n_sub + 1, 2.0)
    weights[1::2] = 4.0
    weights[0] = weights[-1] = 1.0
    return nodes, weights * (h / 3.0)


def integrate_density(cfg: TwoSlitConfig, lo: float, hi: float,
                      slit: str = "U", panels: int = DEFAULT_PANELS) -> float:
    nodes, weights = _simpson_nodes_weights(lo, hi, panels)
    return float(weights @ extended_density(cfg, nodes, slit))


def binned_extended_probabilities(cfg: TwoSlitConfig, panels: int = DEFAULT_PANELS):
    """Per-bin integrals of the two extended densities.

    Returns (upper, lower) arrays of length cfg.bins. Not normalized;
    the amplitude scale a is arbitrary, so only relative sizes and signs
    carry meaning.
    """
    edges = cfg.bin_edges()
    upper = np.empty(cfg.bins)
    lower = np.empty(cfg.bins)
    for i in range(cfg.bins):
        upper[i] = integrate_density(cfg, edges[i], edges[i + 1], "U", panels)
        lower[i] = integrate_density(cfg, edges[i], edges[i + 1], "L", panels)
    return upper, lower


def interference_integral(cfg: TwoSlitConfig, bin_index: int,
                          panels: int = DEFAULT_PANELS) -> float:
    """Integral of Re[conj(psi_L) psi_U] over one bin (the cross term)."""
    if not 0 <= bin_index < cfg.bins:
        raise DimensionMismatch(f"bin {bin_index} out of range for {cfg.bins} bins")
    edges = cfg.bin_edges()
    nodes, weights = _simpson_nodes_weights(edges[bin_index], edges[bin_index + 1], panels)
    cross = np.real(np.conj(amplitude_lower(cfg, nodes)) * amplitude_upper(cfg, nodes))
    return float(weights @ cross)


@dataclass(frozen=True)
class SweepRow:
    k_delta: float
    bins: int
    min_upper: float
    min_lower: float
    negative_upper: tuple[int, ...]
    negative_lower: tuple[int, ...]
    max_cross_ratio: float


def delta_sweep(k_deltas=SWEEP_K_DELTAS, k: float = 1.0,
                y_range: tuple[float, float] = DEFAULT_Y_RANGE,
                panels: int = DEFAULT_PANELS) -> tuple[SweepRow, ...]:
    """Bin-resolution sweep: which resolutions still show negative bins.

    max_cross_ratio is the largest |cross-term integral| over the mean
    absolute bin mass, a scale-free size of the interference.
    """
    rows = []
    for kd in k_deltas:
        cfg = default_config(k_delta=kd, k=k, y_range=y_range)
        upper, lower = binned_extended_probabilities(cfg, panels)
        cross = np.array([interference_integral(cfg, i, panels) for i in range(cfg.bins)])
        scale = (np.abs(upper).sum() + np.abs(lower).sum()) / (2 * cfg.bins)
        rows.append(SweepRow(
            k_delta=kd, bins=cfg.bins,
            min_upper=float(upper.min()), min_lower=float(lower.min()),
            negative_upper=tuple(int(i) for i in np.flatnonzero(upper < 0.0)),
            negative_lower=tuple(int(i) for i in np.flatnonzero(lower < 0.0)),
            max_cross_ratio=float(np.abs(cross).max() / scale),
        ))
    return tuple(rows)


def self_convergence(cfg: TwoSlitConfig, coarse_panels: int = DEFAULT_PANELS,
                     fine_panels: int = 4 * DEFAULT_PANELS) -> float:
    """Mass-relative quadrature check: refine the rule, see what moves.

    Returns max |p_fine - p_coarse| over all bins of both slits, divided
    by the total absolute bin mass. Individual bins pass through zero by
    design, so a per-bin relative error is ill-posed; mass-relative is
    the scale-free measure that survives the arbitrary amplitude a.
    """
    cu, cl = binned_extended_probabilities(cfg, coarse_panels)
    fu, fl = binned_extended_probabilities(cfg, fine_panels)
    mass = np.abs(fu).sum() + np.abs(fl).sum()
    shift = max(np.abs(fu - cu).max(), np.abs(fl - cl).max())
    return float(shift / mass)


def with_bins(cfg: TwoSlitConfig, bins: int) -> TwoSlitConfig:
    return replace(cfg, bins=bins)


def deepest_fringe_location(cfg: TwoSlitConfig) -> float:
    """|y| where the path-length difference saturates (deepest fringes)."""
    return math.sqrt(cfg.D ** 2 + cfg.d ** 2 / 4.0)
