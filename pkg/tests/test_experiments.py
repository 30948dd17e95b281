"""Scenario parsing, reference layout runs, sweeps, and the width inversion."""

import importlib.resources
import json
import math

import numpy as np
import pytest

import poppersim.experiments as ex
import poppersim.gaussian_core as gc
import poppersim.grid_oracle as go
from poppersim.errors import ConfigError, DomainError
from poppersim.gaussian_core import PhysParams

from conftest import BIG_OMEGA


def scenario_doc(**overrides):
    doc = {
        "name": "unit",
        "lambda_nm": 702.0,
        "a_mm": 0.2,
        "omega_mm": 2.0,
        "slit": {"kind": "gaussian", "width_mm": 0.1},
        "L1_mm": 100.0,
        "L2_mm": 200.0,
    }
    doc.update(overrides)
    return doc


class TestScenarioParsing:
    def test_round_trip_fields(self):
        scenario = ex.Scenario.from_dict(scenario_doc())
        assert scenario.a == pytest.approx(0.2)
        assert scenario.params.wavelength_mm == pytest.approx(702e-6)
        assert scenario.slit.epsilon == pytest.approx(0.1)
        assert scenario.effective_distance == pytest.approx(400.0)

    def test_a2_alternative(self):
        scenario = ex.Scenario.from_dict(scenario_doc(a2_mm2=0.043))
        del scenario  # parsed with a2; check the value on a fresh parse
        doc = scenario_doc()
        doc.pop("a_mm")
        doc["a2_mm2"] = 0.043
        scenario = ex.Scenario.from_dict(doc)
        assert scenario.a == pytest.approx(math.sqrt(0.043))

    def test_missing_field(self):
        doc = scenario_doc()
        doc.pop("omega_mm")
        with pytest.raises(ConfigError, match="omega_mm"):
            ex.Scenario.from_dict(doc)

    def test_lens_and_oracle_blocks(self):
        doc = scenario_doc(lens={"f_mm": 500.0, "b1_mm": 500.0},
                           oracle={"n": 512, "extent_mm": 20.0})
        scenario = ex.Scenario.from_dict(doc)
        assert scenario.lens.image_distance == pytest.approx(500.0)
        assert scenario.oracle.n == 512

    def test_bundled_fixtures_load(self):
        root = importlib.resources.files("poppersim.scenarios")
        for name in ("kim_shih.json", "strekalov.json", "popper_freespace.json"):
            doc = json.loads(root.joinpath(name).read_text())
            scenario = ex.Scenario.from_dict(doc)
            assert scenario.slit is not None


@pytest.fixture(scope="module")
def kim_shih_scenario():
    root = importlib.resources.files("poppersim.scenarios")
    return ex.Scenario.from_dict(
        json.loads(root.joinpath("kim_shih.json").read_text()))


class TestKimShih:
    def test_analytic_reference_numbers(self, kim_shih_scenario):
        report = ex.run_kim_shih(kim_shih_scenario)
        assert report.coincidence_fwhm_mm.analytic == pytest.approx(0.657, rel=0.01)
        assert report.real_slit_fwhm_mm.analytic == pytest.approx(2.0, rel=0.02)
        assert report.ghost_image_width_mm.analytic == pytest.approx(0.217, rel=0.005)

    def test_oracle_deltas_small(self, kim_shih_scenario):
        report = ex.run_kim_shih(kim_shih_scenario, use_oracle=True)
        for measured in (report.coincidence_fwhm_mm, report.real_slit_fwhm_mm,
                         report.ghost_image_width_mm):
            assert abs(measured.delta_rel) < 0.02
        assert 0.0 < report.coincidence_weight < 1.0

    def test_perfect_correlation_limit(self, kim_shih_scenario):
        base = kim_shih_scenario
        tiny_a = ex.Scenario(name=base.name, params=base.params, a=1e-9,
                             omega=base.omega, slit=base.slit, lens=base.lens,
                             L1=base.L1, L2=base.L2)
        report = ex.run_kim_shih(tiny_a)
        assert report.coincidence_fwhm_mm.analytic == pytest.approx(
            report.real_slit_fwhm_mm.analytic, rel=1e-6)

    def test_wide_open_aperture_recovers_beam(self, kim_shih_scenario):
        # removing the conditioning altogether, the all-counts marginal is
        # the beam; the oracle states this directly
        s = kim_shih_scenario
        grid = go.GridSpec(n=1024, extent=s.oracle.extent)
        state = go.build_grid_state(s.a, s.omega, grid)
        total = s.L1 + s.L2
        state = go.evolve_spectral(state, 0.0, total, s.params)
        w = go.intensity_widths(state.y, go.marginal_intensity(state, 2), state.dy)
        beam = gc.beam_width(gc.make_epr_state(s.a, s.omega),
                             gc.PropagationLeg(total), s.params)
        assert w.gaussian_equiv_W == pytest.approx(beam, rel=0.05)

    def test_requires_lens_and_matching_l1(self, kim_shih_scenario):
        base = kim_shih_scenario
        no_lens = ex.Scenario(name=base.name, params=base.params, a=base.a,
                              omega=base.omega, slit=base.slit, lens=None,
                              L1=base.L1, L2=base.L2)
        with pytest.raises(ConfigError, match="lens"):
            ex.run_kim_shih(no_lens)
        wrong_l1 = ex.Scenario(name=base.name, params=base.params, a=base.a,
                               omega=base.omega, slit=base.slit, lens=base.lens,
                               L1=base.L1 + 100.0, L2=base.L2)
        with pytest.raises(ConfigError, match="image"):
            ex.run_kim_shih(wrong_l1)


class TestPopperFreespace:
    def test_split_invariance_large_omega(self):
        def run(L1, L2):
            scenario = ex.Scenario.from_dict(scenario_doc(
                a_mm=0.04, omega_mm=BIG_OMEGA, L1_mm=L1, L2_mm=L2))
            return ex.run_popper_freespace(scenario)

        fwhm_a = run(900.0, 0.0).coincidence_fwhm_mm.analytic
        fwhm_b = run(450.0, 900.0).coincidence_fwhm_mm.analytic
        assert abs(fwhm_a / fwhm_b - 1.0) < 1e-8

    def test_virtual_distance_diagnostic(self):
        scenario = ex.Scenario.from_dict(scenario_doc(
            a_mm=0.04, omega_mm=BIG_OMEGA, L1_mm=600.0, L2_mm=600.0))
        report = ex.run_popper_freespace(scenario)
        assert report.virtual_distance_mm == pytest.approx(1800.0, rel=1e-6)

    def test_oracle_agreement(self):
        scenario = ex.Scenario.from_dict(scenario_doc(
            a_mm=0.2, omega_mm=2.0, L1_mm=300.0, L2_mm=300.0,
            oracle={"n": 1024, "extent_mm": 16.0}))
        report = ex.run_popper_freespace(scenario, use_oracle=True)
        assert abs(report.coincidence_fwhm_mm.delta_rel) < 0.01
        assert report.coincidence_fwhm_mm.analytic < report.beam_fwhm_mm.analytic

    def test_rejects_lens(self):
        scenario = ex.Scenario.from_dict(scenario_doc(
            lens={"f_mm": 500.0, "b1_mm": 500.0}))
        with pytest.raises(ConfigError, match="lens"):
            ex.run_popper_freespace(scenario)


@pytest.fixture(scope="module")
def strekalov_scenario():
    root = importlib.resources.files("poppersim.scenarios")
    return ex.Scenario.from_dict(
        json.loads(root.joinpath("strekalov.json").read_text()))


class TestStrekalovSweep:
    def test_reference_widths(self, strekalov_scenario):
        points = ex.run_strekalov_sweep(strekalov_scenario, [0.2, 1.0])
        by_width = {p.slit_full_width_mm: p.fwhm_analytic_mm for p in points}
        assert by_width[0.2] == pytest.approx(4.399, rel=1e-3)
        assert by_width[1.0] == pytest.approx(1.114, rel=1e-3)

    def test_strictly_decreasing(self, strekalov_scenario):
        points = ex.run_strekalov_sweep(strekalov_scenario, np.linspace(0.1, 1.0, 10))
        fwhms = [p.fwhm_analytic_mm for p in points]
        assert all(b < a for a, b in zip(fwhms, fwhms[1:]))

    def test_wide_correlation_limit(self):
        # huge a at fixed slit: the far-field term is suppressed and the
        # width is just the focused virtual slit
        scenario = ex.Scenario.from_dict(scenario_doc(a_mm=50.0, omega_mm=100.0,
                                                      L1_mm=600.0, L2_mm=600.0))
        (point,) = ex.run_strekalov_sweep(scenario, [0.2])
        expected = gc.fwhm_from_width(math.sqrt(0.1 ** 2 + 50.0 ** 2))
        assert point.fwhm_analytic_mm == pytest.approx(expected, rel=1e-4)

    def test_rejects_zero_width(self, strekalov_scenario):
        with pytest.raises(DomainError):
            ex.run_strekalov_sweep(strekalov_scenario, [0.2, 0.0])

    def test_oracle_error_isolated(self, strekalov_scenario):
        # a grid too coarse for the source makes every oracle point fail;
        # the failures must land in the rows, not abort the sweep
        sc = strekalov_scenario
        bad = ex.Scenario(name=sc.name, params=sc.params,
                          a=sc.a, omega=sc.omega, slit=sc.slit,
                          lens=None, L1=sc.L1, L2=sc.L2,
                          oracle=go.GridSpec(n=1024, extent=31.0))
        points = ex.run_strekalov_sweep(bad, [0.4, 0.8], use_oracle=True)
        assert len(points) == 2
        for p in points:
            assert p.error is not None
            assert p.fwhm_oracle_mm is None
            assert p.fwhm_analytic_mm > 0


class TestFitSigmaFromWidth:
    def test_kim_shih_inversion(self, params702):
        fit = ex.fit_sigma_from_width(0.657, 0.065, 500.0, params702)
        assert fit.s == pytest.approx(0.217, rel=0.005)
        assert fit.a2 == pytest.approx(0.043, rel=0.03)
        assert fit.branch_info["s_near_mm"] < fit.branch_info["s_far_mm"]
        product = fit.branch_info["s_near_mm"] * fit.branch_info["s_far_mm"]
        assert product == pytest.approx(fit.branch_info["root_product_mm2"],
                                        rel=1e-9)

    def test_slit_only_inversion(self, params702):
        # roles swapped: treat the whole scale as the slit (a = 0) and
        # recover the width that reproduces a 2.0 mm pattern
        fit = ex.fit_sigma_from_width(2.0, 0.0, 500.0, params702)
        assert fit.s == pytest.approx(0.0658, rel=2e-3)

    def test_round_trip_identity(self, params702):
        lam = params702.rescaled_wavelength_mm
        for eps in (0.02, 0.1, 0.5):
            for a in (0.05, 0.2, 0.5):
                for L2 in (100.0, 700.0, 2000.0):
                    s2 = eps * eps + a * a
                    if s2 * s2 >= lam * L2 * lam * L2:
                        continue  # true s on the far branch; covered below
                    W = math.sqrt(s2 + (lam * L2) ** 2 / s2)
                    fit = ex.fit_sigma_from_width(gc.fwhm_from_width(W), eps,
                                                  L2, params702)
                    assert fit.a2 == pytest.approx(a * a, rel=1e-6)
                    assert fit.s == pytest.approx(math.sqrt(s2), rel=1e-6)

    def test_far_branch_surfaced(self, params702):
        # when the true scale exceeds sqrt(Lambda*L2) the matching root is
        # the far one, always present in branch_info
        lam = params702.rescaled_wavelength_mm
        s2 = 0.5 ** 2
        L2 = 100.0
        assert s2 > lam * L2
        W = math.sqrt(s2 + (lam * L2) ** 2 / s2)
        fit = ex.fit_sigma_from_width(gc.fwhm_from_width(W), 0.0, L2, params702)
        assert fit.branch_info["s_far_mm"] == pytest.approx(0.5, rel=1e-9)

    def test_unreachable_width(self, params702):
        with pytest.raises(DomainError, match="unreachable"):
            ex.fit_sigma_from_width(1e-4, 0.0, 500.0, params702)

    def test_slit_wider_than_localization(self, params702):
        with pytest.raises(DomainError, match="wider"):
            ex.fit_sigma_from_width(0.657, 0.3, 500.0, params702)


class TestDefaultGrid:
    def test_covers_scenario(self):
        scenario = ex.Scenario.from_dict(scenario_doc())
        grid = ex.default_grid(scenario, n=512)
        assert grid.extent >= go.required_extent(scenario.a, scenario.omega)
        # must be usable immediately
        go.build_grid_state(scenario.a, scenario.omega, grid)
