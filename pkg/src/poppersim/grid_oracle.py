"""Brute-force two-particle grid simulator.

Discretizes the joint amplitude psi(y1, y2) on an n x n grid, propagates it
spectrally (exactly unitary), applies arbitrary apertures by direct
quadrature, and extracts widths from sampled intensities.  Everything here
is deliberately independent of the closed forms in ``gaussian_core`` so the
two can be checked against each other.

Grid convention: y = (arange(n) - n/2) * dy with dy = 2 * extent / n, and
wavenumbers k = 2*pi*fftfreq(n, dy).  A plane-wave component exp(i k y)
acquires the phase exp(-i k^2 * Lambda * L / 4) over an axial distance L,
the unique quadratic phase mapping exp(-y^2/eps^2) to
exp(-y^2/(eps^2 + i*Lambda*L)).
"""

from __future__ import annotations

import math
from dataclasses import dataclass

import numpy as np

from .errors import DomainError, ResolutionError
from .gaussian_core import FWHM_FACTOR, PhysParams

TAIL_BAND_FRACTION = 0.05
TAIL_PROB_LIMIT = 1e-6


@dataclass(frozen=True)
class GridSpec:
    """Symmetric square grid: n points per axis on [-extent, extent)."""

    n: int
    extent: float

    def __post_init__(self):
        if self.n < 256 or self.n & (self.n - 1) != 0:
            raise DomainError(f"n must be a power of two >= 256, got {self.n}")
        if self.extent <= 0:
            raise DomainError(f"extent must be positive, got {self.extent}")

    @property
    def dy(self) -> float:
        return 2.0 * self.extent / self.n

    @property
    def y(self) -> np.ndarray:
        return (np.arange(self.n) - self.n // 2) * self.dy


@dataclass
class GridState:
    """Sampled two-particle amplitude psi[i1, i2] = psi(y[i1], y[i2])."""

    psi: np.ndarray
    y: np.ndarray
    dy: float

    @property
    def n(self) -> int:
        return self.y.size

    def norm(self) -> float:
        return float(np.sum(np.abs(self.psi) ** 2) * self.dy * self.dy)


@dataclass(frozen=True)
class Aperture:
    """Transmission profile for particle 1.

    kinds: 'gaussian' (amplitude exp(-y^2/epsilon^2)), 'rect' (hard slit of
    ``full_width``), 'double_slit' (two hard slits of ``slit_width`` whose
    centers are ``separation`` apart), 'point' (narrow Gaussian sampler of
    width ``tolerance`` at ``center``; defaults to one grid step).
    """

    kind: str
    epsilon: float = 0.0
    full_width: float = 0.0
    slit_width: float = 0.0
    separation: float = 0.0
    center: float = 0.0
    tolerance: float = 0.0

    def __post_init__(self):
        if self.kind == "gaussian":
            if self.epsilon <= 0:
                raise DomainError("gaussian aperture needs epsilon > 0")
        elif self.kind == "rect":
            if self.full_width <= 0:
                raise DomainError("rect aperture needs full_width > 0")
        elif self.kind == "double_slit":
            if self.slit_width <= 0 or self.separation <= self.slit_width:
                raise DomainError("double slit needs separation > slit_width > 0")
        elif self.kind == "point":
            if self.tolerance < 0:
                raise DomainError("point tolerance must be >= 0")
        else:
            raise DomainError(f"unknown aperture kind {self.kind!r}")

    def sample(self, y: np.ndarray, dy: float) -> np.ndarray:
        """Normalized amplitude profile on the grid (sum |phi|^2 dy = 1)."""
        if self.kind == "gaussian":
            phi = np.exp(-(y ** 2) / self.epsilon ** 2)
        elif self.kind == "rect":
            phi = (np.abs(y) < self.full_width / 2.0).astype(float)
        elif self.kind == "double_slit":
            phi = (np.abs(np.abs(y) - self.separation / 2.0)
                   < self.slit_width / 2.0).astype(float)
        else:  # point
            w = self.tolerance if self.tolerance > 0 else dy
            phi = np.exp(-((y - self.center) ** 2) / w ** 2)
        norm = math.sqrt(float(np.sum(np.abs(phi) ** 2)) * dy)
        if norm == 0.0:
            raise ResolutionError("aperture has no support on this grid")
        return phi.astype(complex) / norm


@dataclass
class ConditionalAmplitude:
    """Particle-2 amplitude after conditioning, plus the coincidence fraction."""

    y: np.ndarray
    amplitude: np.ndarray
    dy: float
    weight: float


@dataclass
class WidthResult:
    rms: float
    fwhm: float
    gaussian_equiv_W: float
    multimodal: bool = False


def required_extent(a: float, omega: float) -> float:
    """Smallest admissible half-extent for the source state: 6 x position rms."""
    return 6.0 * 0.5 * math.sqrt(omega ** 2 + a ** 2 / 4.0)


def build_grid_state(a: float, omega: float, grid: GridSpec) -> GridState:
    """Sample and normalize the correlated source amplitude."""
    if a <= 0 or omega <= 0:
        raise DomainError("a and omega must be positive")
    need = required_extent(a, omega)
    if grid.extent < need:
        raise ResolutionError(
            f"extent {grid.extent} mm too small: need >= {need:.3g} mm "
            f"for a={a}, omega={omega}"
        )
    # momentum support: amplitude spectrum std per particle axis
    k_std = math.sqrt(2.0 / a ** 2 + 0.5 / omega ** 2)
    k_nyq = math.pi / grid.dy
    if k_nyq < 4.0 * k_std:
        raise ResolutionError(
            f"step {grid.dy:.3g} mm too coarse: need dy <= "
            f"{math.pi / (4.0 * k_std):.3g} mm to hold the momentum spectrum"
        )
    y = grid.y
    u = y[:, None] - y[None, :]
    v = y[:, None] + y[None, :]
    psi = np.exp(-(u ** 2) / a ** 2 - (v ** 2) / (4.0 * omega ** 2)).astype(complex)
    psi /= math.sqrt(float(np.sum(np.abs(psi) ** 2)) * grid.dy ** 2)
    return GridState(psi=psi, y=y, dy=grid.dy)


def _check_tails(prob: np.ndarray, dy: float, extent_axis: np.ndarray):
    n = extent_axis.size
    band = max(1, int(round(TAIL_BAND_FRACTION * n)))
    outer = np.zeros(n, dtype=bool)
    outer[:band] = True
    outer[-band:] = True
    tail = float(np.sum(prob[outer]))
    if tail > TAIL_PROB_LIMIT:
        raise ResolutionError(
            f"propagated state reaches the domain boundary "
            f"(tail probability {tail:.3g} > {TAIL_PROB_LIMIT}); enlarge the extent"
        )


def evolve_spectral(state: GridState, L_particle1: float, L_particle2: float,
                    params: PhysParams) -> GridState:
    """Free flight of the two particles over independent distances."""
    if L_particle1 < 0 or L_particle2 < 0:
        raise DomainError("propagation distances must be >= 0")
    lam = params.rescaled_wavelength_mm
    k = 2.0 * np.pi * np.fft.fftfreq(state.n, d=state.dy)
    phase1 = np.exp(-0.25j * lam * L_particle1 * k ** 2)
    phase2 = np.exp(-0.25j * lam * L_particle2 * k ** 2)
    psi_k = np.fft.fft2(state.psi)
    psi_k *= phase1[:, None]
    psi_k *= phase2[None, :]
    psi = np.fft.ifft2(psi_k)
    out = GridState(psi=psi, y=state.y, dy=state.dy)
    prob = np.abs(psi) ** 2 * state.dy ** 2
    _check_tails(prob.sum(axis=1), state.dy, state.y)
    _check_tails(prob.sum(axis=0), state.dy, state.y)
    return out


def propagate_amplitude(amp: np.ndarray, dy: float, L: float,
                        params: PhysParams) -> np.ndarray:
    """Single-particle spectral free flight of a sampled 1-D amplitude."""
    if L < 0:
        raise DomainError("propagation distance must be >= 0")
    if L == 0:
        return amp.copy()
    k = 2.0 * np.pi * np.fft.fftfreq(amp.size, d=dy)
    lam = params.rescaled_wavelength_mm
    return np.fft.ifft(np.fft.fft(amp) * np.exp(-0.25j * lam * L * k ** 2))


def condition(state: GridState, aperture: Aperture) -> ConditionalAmplitude:
    """Project particle 1 onto the aperture mode.

    phi2(y2) = integral phi1*(y1) psi(y1, y2) dy1, by direct quadrature.
    The returned amplitude is renormalized; ``weight`` is the coincidence
    fraction (the squared norm before renormalization).
    """
    phi1 = aperture.sample(state.y, state.dy)
    phi2 = (np.conj(phi1) @ state.psi) * state.dy
    weight = float(np.sum(np.abs(phi2) ** 2) * state.dy)
    if weight < 1e-12:
        raise DomainError(f"degenerate conditioning: coincidence weight {weight:.3g}")
    return ConditionalAmplitude(y=state.y, amplitude=phi2 / math.sqrt(weight),
                                dy=state.dy, weight=weight)


def marginal_intensity(state: GridState, particle: int = 2) -> np.ndarray:
    """All-counts intensity of one particle (normalized to unit sum * dy)."""
    if particle not in (1, 2):
        raise DomainError("particle must be 1 or 2")
    axis = 1 if particle == 1 else 0
    intensity = np.sum(np.abs(state.psi) ** 2, axis=axis) * state.dy
    return intensity / (float(np.sum(intensity)) * state.dy)


def _local_maxima(intensity: np.ndarray, floor: float) -> np.ndarray:
    left = intensity[1:-1] > intensity[:-2]
    right = intensity[1:-1] >= intensity[2:]
    idx = np.flatnonzero(left & right) + 1
    return idx[intensity[idx] > floor]


def _half_crossing(y, intensity, i_peak, half, step):
    """Linearly interpolated position where intensity falls to half, walking
    from i_peak in direction step."""
    i = i_peak
    while 0 < i < intensity.size - 1 and intensity[i + step] >= half:
        i += step
    j = i + step
    if j < 0 or j >= intensity.size:
        return y[i]
    frac = (intensity[i] - half) / (intensity[i] - intensity[j])
    return y[i] + frac * (y[j] - y[i])


def intensity_widths(y: np.ndarray, intensity: np.ndarray,
                     dy: float) -> WidthResult:
    """Width measures of a sampled 1-D intensity profile.

    rms is the second central moment; fwhm comes from linear interpolation
    around half maximum (global-max lobe when the profile is multimodal);
    gaussian_equiv_W = 2 * rms, exact for a Gaussian intensity
    exp(-2 y^2 / W^2).
    """
    total = float(np.sum(intensity)) * dy
    if total <= 0:
        raise DomainError("intensity profile is empty")
    p = intensity / total
    mean = float(np.sum(y * p) * dy)
    rms = math.sqrt(float(np.sum((y - mean) ** 2 * p) * dy))
    i_peak = int(np.argmax(intensity))
    half = intensity[i_peak] / 2.0
    y_lo = _half_crossing(y, intensity, i_peak, half, -1)
    y_hi = _half_crossing(y, intensity, i_peak, half, +1)
    maxima = _local_maxima(intensity, half)
    return WidthResult(rms=rms, fwhm=float(y_hi - y_lo),
                       gaussian_equiv_W=2.0 * rms,
                       multimodal=maxima.size > 1)


def widths(amplitude: ConditionalAmplitude) -> WidthResult:
    """Width measures of |amplitude|^2."""
    return intensity_widths(amplitude.y, np.abs(amplitude.amplitude) ** 2,
                            amplitude.dy)


@dataclass
class GhostPattern:
    """Coincidence intensity behind a fixed partner detector."""

    y: np.ndarray
    intensity: np.ndarray
    dy: float
    weight: float
    fringe_spacing: float
    visibility: float
    envelope_fwhm: float


def fringe_metrics(y: np.ndarray, intensity: np.ndarray):
    """(spacing, visibility) of the central fringes, (nan, 0) when smooth.

    Spacing is the mean distance from the central maximum to its two
    neighbouring maxima; visibility contrasts the central maximum against
    the first interior minimum.
    """
    floor = 0.05 * float(intensity.max())
    maxima = _local_maxima(intensity, floor)
    if maxima.size < 2:
        return float("nan"), 0.0
    central = maxima[np.argmin(np.abs(y[maxima]))]
    left = [i for i in maxima if i < central]
    right = [i for i in maxima if i > central]
    gaps = []
    lows = []
    for side in (left, right):
        if not side:
            continue
        neighbour = min(side, key=lambda i: abs(y[i] - y[central]))
        gaps.append(abs(y[neighbour] - y[central]))
        lo, hi = sorted((neighbour, central))
        lows.append(float(intensity[lo:hi + 1].min()))
    spacing = float(np.mean(gaps))
    i_max = float(intensity[central])
    i_min = min(lows)
    return spacing, (i_max - i_min) / (i_max + i_min)


def ghost_double_slit(state: GridState, slit: Aperture, d1: float, L2: float,
                      params: PhysParams) -> GhostPattern:
    """Coincidence pattern of particle 2 behind an aperture on particle 1.

    ``state`` must already sit at the aperture plane.  Particle 1 passes the
    aperture, flies a further d1, and is point-detected on axis; particle 2
    then flies L2 to its detector.
    """
    # aperture scale drops out after the renormalized conditioning
    mask = slit.sample(state.y, state.dy)
    psi = state.psi * mask[:, None]
    if d1 > 0:
        k = 2.0 * np.pi * np.fft.fftfreq(state.n, d=state.dy)
        phase = np.exp(-0.25j * params.rescaled_wavelength_mm * d1 * k ** 2)
        psi = np.fft.ifft(np.fft.fft(psi, axis=0) * phase[:, None], axis=0)
    masked = GridState(psi=psi, y=state.y, dy=state.dy)
    detector = Aperture(kind="point", center=0.0)
    cond = condition(masked, detector)
    amp = propagate_amplitude(cond.amplitude, cond.dy, L2, params)
    intensity = np.abs(amp) ** 2
    spacing, visibility = fringe_metrics(state.y, intensity)
    env = intensity_widths(state.y, intensity, state.dy)
    return GhostPattern(y=state.y, intensity=intensity, dy=state.dy,
                        weight=cond.weight, fringe_spacing=spacing,
                        visibility=visibility,
                        envelope_fwhm=2.0 * env.rms * FWHM_FACTOR)
