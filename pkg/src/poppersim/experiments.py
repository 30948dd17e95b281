"""Scenario definitions, parameter inference, and reference experiment runs.

A scenario bundles the source parameters, slit, optional lens, and flight
legs of one coincidence-counting layout.  Each runner produces a
:class:`WidthReport` with an analytic arm (closed forms from
``gaussian_core``) and, on request, an independent oracle arm (grid
simulation from ``grid_oracle``) plus their relative deltas.
"""

from __future__ import annotations

import json
import math
from dataclasses import dataclass, field

import numpy as np

from . import gaussian_core as gc
from . import grid_oracle as go
from .errors import ConfigError, DomainError, ResolutionError
from .gaussian_core import (
    FWHM_FACTOR,
    GaussianParam,
    LensConfig,
    PhysParams,
    PropagationLeg,
    SlitSpec,
)
from .grid_oracle import Aperture, GridSpec


@dataclass(frozen=True)
class Scenario:
    """One coincidence-counting layout, loadable from JSON."""

    name: str
    params: PhysParams
    a: float
    omega: float
    slit: SlitSpec | None
    lens: LensConfig | None
    L1: float
    L2: float
    oracle: GridSpec | None = None

    def __post_init__(self):
        if self.a <= 0 or self.omega <= 0:
            raise ConfigError("source parameters a and omega must be positive")
        if self.L1 < 0 or self.L2 < 0:
            raise ConfigError("flight legs must be >= 0")

    @property
    def effective_distance(self) -> float:
        """Slit-to-detector distance through the source: 2*L1 + L2."""
        return 2.0 * self.L1 + self.L2

    @classmethod
    def from_dict(cls, doc: dict) -> "Scenario":
        try:
            params = PhysParams(wavelength_mm=float(doc["lambda_nm"]) * 1e-6)
            if "a_mm" in doc:
                a = float(doc["a_mm"])
            elif "a2_mm2" in doc:
                a = math.sqrt(float(doc["a2_mm2"]))
            else:
                raise KeyError("a_mm or a2_mm2")
            omega = float(doc["omega_mm"])
            L1 = float(doc["L1_mm"])
            L2 = float(doc["L2_mm"])
        except KeyError as exc:
            raise ConfigError(f"scenario is missing required field {exc}") from None
        slit = None
        if "slit" in doc:
            s = doc["slit"]
            kind = s.get("kind", "gaussian")
            if kind == "gaussian":
                slit = SlitSpec(kind="gaussian", epsilon=float(s["width_mm"]))
            else:
                slit = SlitSpec(
                    kind="rectangular",
                    full_width=float(s["width_mm"]),
                    convention=s.get("convention", "half-width"),
                    reference_fwhm_mm=float(s.get("reference_fwhm_mm", 0.0)),
                    reference_L_mm=float(s.get("reference_L_mm", 0.0)),
                )
        lens = None
        if "lens" in doc:
            lens = LensConfig(f=float(doc["lens"]["f_mm"]), b1=float(doc["lens"]["b1_mm"]))
        oracle = None
        if "oracle" in doc:
            oracle = GridSpec(n=int(doc["oracle"]["n"]),
                              extent=float(doc["oracle"]["extent_mm"]))
        return cls(name=str(doc.get("name", "scenario")), params=params, a=a,
                   omega=omega, slit=slit, lens=lens, L1=L1, L2=L2, oracle=oracle)

    @classmethod
    def from_json(cls, path) -> "Scenario":
        with open(path) as fh:
            return cls.from_dict(json.load(fh))


@dataclass
class Measured:
    """One physical width from up to two independent routes."""

    analytic: float | None = None
    oracle: float | None = None

    @property
    def delta_rel(self) -> float | None:
        if self.analytic is None or self.oracle is None:
            return None
        return self.oracle / self.analytic - 1.0

    @property
    def value(self) -> float:
        return self.analytic if self.analytic is not None else self.oracle


@dataclass
class WidthReport:
    scenario_name: str
    provenance: str  # 'analytic', 'oracle', or 'both'
    beam_fwhm_mm: Measured
    coincidence_fwhm_mm: Measured
    real_slit_fwhm_mm: Measured | None = None
    ghost_image_width_mm: Measured | None = None
    virtual_distance_mm: float | None = None
    coincidence_weight: float | None = None
    fitted: "FitResult | None" = None


@dataclass
class FitResult:
    """Source-correlation scale inferred from an observed pattern width."""

    a2: float
    s: float
    branch_info: dict = field(default_factory=dict)


@dataclass
class SweepPoint:
    slit_full_width_mm: float
    fwhm_analytic_mm: float
    fwhm_oracle_mm: float | None = None
    error: str | None = None


def default_grid(scenario: Scenario, n: int = 2048) -> GridSpec:
    """Auto-sized grid: extent 8x the largest rms width in the scenario."""
    state = gc.make_epr_state(scenario.a, scenario.omega)
    total = scenario.L1 + scenario.L2
    rms = [gc.position_uncertainty(state),
           gc.beam_width(state, PropagationLeg(total), scenario.params) / 2.0]
    if scenario.slit is not None:
        eps = scenario.slit.gaussian_epsilon(scenario.params)
        s2 = eps * eps + scenario.a ** 2
        lam_d = scenario.params.rescaled_wavelength_mm * scenario.effective_distance
        rms.append(math.sqrt(s2 + lam_d * lam_d / s2) / 2.0)
    extent = max(8.0 * max(rms), go.required_extent(scenario.a, scenario.omega))
    return GridSpec(n=n, extent=extent)


def _grid(scenario: Scenario) -> GridSpec:
    return scenario.oracle if scenario.oracle is not None else default_grid(scenario)


def _oracle_conditional_fwhm(scenario: Scenario, eps: float,
                             L1: float, L2: float, grid: GridSpec):
    """(fwhm, weight) of the coincidence pattern by full grid simulation."""
    state = go.build_grid_state(scenario.a, scenario.omega, grid)
    if L1 > 0:
        state = go.evolve_spectral(state, L1, L1, scenario.params)
    cond = go.condition(state, Aperture(kind="gaussian", epsilon=eps))
    amp = go.propagate_amplitude(cond.amplitude, cond.dy, L2, scenario.params)
    w = go.intensity_widths(cond.y, np.abs(amp) ** 2, cond.dy)
    return w, cond.weight


def _oracle_beam_fwhm(scenario: Scenario, L_total: float, grid: GridSpec) -> float:
    state = go.build_grid_state(scenario.a, scenario.omega, grid)
    if L_total > 0:
        state = go.evolve_spectral(state, 0.0, L_total, scenario.params)
    w = go.intensity_widths(state.y, go.marginal_intensity(state, 2), state.dy)
    return FWHM_FACTOR * w.gaussian_equiv_W


def run_kim_shih(scenario: Scenario, use_oracle: bool = False) -> WidthReport:
    """Lens (ghost-imaging) layout: image of the slit forms at the wide-open
    aperture plane, then diffracts over L2 to the detector.

    The oracle arm exploits the imaging equivalence: focusing the
    conditional amplitude back to a real Gaussian at the image plane is the
    same as conditioning the unpropagated source state, so it conditions at
    L1 = 0 and propagates L2, all by grid quadrature.
    """
    if scenario.lens is None:
        raise ConfigError("Kim-Shih layout requires a lens")
    if scenario.slit is None:
        raise ConfigError("Kim-Shih layout requires a slit")
    if abs(scenario.L1 - scenario.lens.image_distance) > 1e-9 * max(1.0, scenario.L1):
        raise ConfigError(
            f"L1 = {scenario.L1} must equal the ghost-image distance "
            f"2f - b1 = {scenario.lens.image_distance}"
        )
    params = scenario.params
    eps = scenario.slit.gaussian_epsilon(params)
    state = gc.make_epr_state(scenario.a, scenario.omega)
    image = gc.lens_ghost_param(scenario.slit, scenario.a, scenario.lens,
                                PropagationLeg(scenario.lens.image_distance), params)
    detector = gc.lens_ghost_param(
        scenario.slit, scenario.a, scenario.lens,
        PropagationLeg(scenario.lens.image_distance + scenario.L2), params)
    real_slit = gc.propagate_conditional(GaussianParam(eps * eps),
                                         PropagationLeg(scenario.L2), params)
    total = scenario.L1 + scenario.L2
    report = WidthReport(
        scenario_name=scenario.name,
        provenance="both" if use_oracle else "analytic",
        beam_fwhm_mm=Measured(analytic=gc.fwhm_from_width(
            gc.beam_width(state, PropagationLeg(total), params))),
        coincidence_fwhm_mm=Measured(analytic=gc.fwhm_from_width(
            gc.intensity_width(detector))),
        real_slit_fwhm_mm=Measured(analytic=gc.fwhm_from_width(
            gc.intensity_width(real_slit))),
        ghost_image_width_mm=Measured(analytic=gc.intensity_width(image)),
    )
    if use_oracle:
        grid = _grid(scenario)
        src = go.build_grid_state(scenario.a, scenario.omega, grid)
        cond = go.condition(src, Aperture(kind="gaussian", epsilon=eps))
        w_img = go.widths(cond)
        report.ghost_image_width_mm.oracle = w_img.gaussian_equiv_W
        amp = go.propagate_amplitude(cond.amplitude, cond.dy, scenario.L2, params)
        w_det = go.intensity_widths(cond.y, np.abs(amp) ** 2, cond.dy)
        report.coincidence_fwhm_mm.oracle = w_det.fwhm
        report.coincidence_weight = cond.weight
        # real slit: plain single-particle diffraction on the same grid
        phi = Aperture(kind="gaussian", epsilon=eps).sample(src.y, src.dy)
        amp_r = go.propagate_amplitude(phi, src.dy, scenario.L2, params)
        report.real_slit_fwhm_mm.oracle = go.intensity_widths(
            src.y, np.abs(amp_r) ** 2, src.dy).fwhm
        report.beam_fwhm_mm.oracle = _oracle_beam_fwhm(scenario, total, grid)
    return report


def run_popper_freespace(scenario: Scenario, use_oracle: bool = False) -> WidthReport:
    """Free-space layout: slit at L1, detectors a further L2 behind it.

    The coincidence pattern behaves as diffraction from an effective
    aperture located at the slit plane but seen over the full distance
    2*L1 + L2; ``virtual_distance_mm`` reports that equivalent distance as
    recovered by back-propagating the detector-plane Gaussian parameter to
    a real (focused) value.
    """
    if scenario.lens is not None:
        raise ConfigError("free-space layout must not have a lens")
    if scenario.slit is None:
        raise ConfigError("free-space layout requires a slit")
    params = scenario.params
    eps = scenario.slit.gaussian_epsilon(params)
    state = gc.make_epr_state(scenario.a, scenario.omega)
    gamma = gc.condition_on_gaussian_slit(
        state, SlitSpec(kind="gaussian", epsilon=eps),
        PropagationLeg(scenario.L1), params)
    gamma_det = gc.propagate_conditional(gamma, PropagationLeg(scenario.L2), params)
    total = scenario.L1 + scenario.L2
    report = WidthReport(
        scenario_name=scenario.name,
        provenance="both" if use_oracle else "analytic",
        beam_fwhm_mm=Measured(analytic=gc.fwhm_from_width(
            gc.beam_width(state, PropagationLeg(total), params))),
        coincidence_fwhm_mm=Measured(analytic=gc.fwhm_from_width(
            gc.intensity_width(gamma_det))),
        virtual_distance_mm=gamma_det.gamma.imag / params.rescaled_wavelength_mm,
    )
    if use_oracle:
        grid = _grid(scenario)
        w, weight = _oracle_conditional_fwhm(scenario, eps, scenario.L1,
                                             scenario.L2, grid)
        report.coincidence_fwhm_mm.oracle = w.fwhm
        report.coincidence_weight = weight
        report.beam_fwhm_mm.oracle = _oracle_beam_fwhm(scenario, total, grid)
    return report


def run_strekalov_sweep(scenario: Scenario, slit_full_widths,
                        use_oracle: bool = False) -> list[SweepPoint]:
    """Coincidence pattern width against slit width, half-width convention.

    Analytic widths use the wide-source closed form over the effective
    distance 2*L1 + L2; the oracle arm re-runs the full grid pipeline per
    point with the scenario's finite omega.  Failures on individual points
    are isolated into the point's ``error`` field.
    """
    if scenario.slit is not None and scenario.slit.kind == "rectangular" \
            and scenario.slit.convention != "half-width":
        raise ConfigError("sweep is defined for the half-width slit convention")
    lam_d = scenario.params.rescaled_wavelength_mm * scenario.effective_distance
    points: list[SweepPoint] = []
    for w_full in sorted(slit_full_widths):
        if w_full <= 0:
            raise DomainError(f"slit width must be positive, got {w_full}")
        eps = w_full / 2.0
        s2 = eps * eps + scenario.a ** 2
        fwhm_an = gc.fwhm_from_width(math.sqrt(s2 + lam_d * lam_d / s2))
        point = SweepPoint(slit_full_width_mm=w_full, fwhm_analytic_mm=fwhm_an)
        if use_oracle:
            try:
                w, _ = _oracle_conditional_fwhm(scenario, eps, scenario.L1,
                                                scenario.L2, _grid(scenario))
                point.fwhm_oracle_mm = w.fwhm
            except (DomainError, ResolutionError) as exc:
                point.error = str(exc)
        points.append(point)
    return points


def fit_sigma_from_width(fwhm_observed: float, epsilon: float, L2: float,
                         params: PhysParams) -> FitResult:
    """Invert an observed coincidence FWHM for the source-correlation scale.

    Solves s^4 - W^2 s^2 + Lambda^2 L2^2 = 0 (the two roots' product is
    Lambda*L2) and returns the near-field branch s < sqrt(Lambda*L2), with
    a2 = s^2 - epsilon^2.  Both roots are surfaced in ``branch_info``.
    Pass epsilon = 0 to infer the total localization scale s alone.
    """
    if fwhm_observed <= 0:
        raise DomainError("observed FWHM must be positive")
    if epsilon < 0 or L2 < 0:
        raise DomainError("epsilon and L2 must be >= 0")
    W2 = (fwhm_observed / FWHM_FACTOR) ** 2
    lam_l = params.rescaled_wavelength_mm * L2
    disc = W2 * W2 - 4.0 * lam_l * lam_l
    if disc < 0:
        raise DomainError(
            f"unreachable width: FWHM {fwhm_observed} mm is below the "
            f"diffraction minimum for L2 = {L2} mm"
        )
    root = math.sqrt(disc)
    s_near = math.sqrt((W2 - root) / 2.0)
    s_far = math.sqrt((W2 + root) / 2.0)
    a2 = s_near ** 2 - epsilon ** 2
    if a2 < 0:
        raise DomainError(
            f"slit wider than observed localization: epsilon = {epsilon} mm "
            f"exceeds fitted s = {s_near:.6g} mm"
        )
    return FitResult(a2=a2, s=s_near, branch_info={
        "s_near_mm": s_near,
        "s_far_mm": s_far,
        "root_product_mm2": lam_l,
        "discriminant_mm4": disc,
    })
