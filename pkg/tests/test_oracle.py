"""Independent midpoint-rule oracle: rule correctness and golden minting."""

from __future__ import annotations

import inspect
import math
import re

import numpy as np
import pytest

from bbdrag import (
    ConvergenceGateError,
    GridSpec,
    OracleError,
    TopHat,
    load_golden,
    mint_golden,
    model_from_dict,
    oracle_value,
)
from bbdrag.oracle import BUILTIN_CASES, OBSERVABLES, photon_number, riemann_2d
import bbdrag.oracle as oracle_module


# -------------------------------------------------------------- independence


def test_oracle_shares_no_quadrature_code_with_the_engine():
    """The oracle must not import the adaptive-integration engine.

    Only the polarizability definitions may be shared; occupation
    numbers, cutoffs, geometry, and summation are all re-derived.
    """
    src = inspect.getsource(oracle_module)
    imports = re.findall(r"^\s*(?:from|import)\s+([.\w]+)", src, flags=re.M)
    package_imports = {name for name in imports if name.startswith(".")}
    assert package_imports == {".polarizability"}, package_imports
    assert "integrate_1d" not in src and "integrate_omega_x" not in src
    assert "bose_occupation" not in src


def test_photon_number_matches_definition():
    # independent occupation: 1/(exp(y) - 1) with a hard overflow clamp
    assert photon_number(2.0, 1.0) == pytest.approx(1.0 / (math.exp(2.0) - 1.0), rel=1e-14)
    assert photon_number(1.0, 0.0) == 0.0
    assert photon_number(1e4, 1.0) < 1e-300  # clamped exponent, no overflow
    arr = photon_number(np.array([1.0, 2.0]), 2.0)
    assert arr.shape == (2,)


# ------------------------------------------------------------- midpoint rule


def test_constant_integrand_is_exact():
    grid = GridSpec(omega_max=1.0, n_omega=64, n_x=64)
    value = riemann_2d(lambda om, x: np.ones_like(om * x), grid)
    assert value == pytest.approx(2.0, rel=1e-14)  # area of (0,1] x [-1,1]


def test_odd_integrand_sums_to_zero():
    grid = GridSpec(omega_max=2.0, n_omega=64, n_x=64)
    value = riemann_2d(lambda om, x: om * x, grid)
    assert abs(value) < 1e-14  # midpoint grid is symmetric in x


def test_linear_integrand_is_exact():
    grid = GridSpec(omega_max=3.0, n_omega=64, n_x=64)
    value = riemann_2d(lambda om, x: om + 0.0 * x, grid)
    assert value == pytest.approx(9.0, rel=1e-14)  # (3^2/2) * 2


def test_omega_edges_make_piecewise_constant_exact():
    grid = GridSpec(omega_max=2.0, n_omega=64, n_x=64)

    def step(om, x):
        return np.where(om < 0.7, 1.0, 3.0) * np.ones_like(x)

    ragged = riemann_2d(step, grid)
    split = riemann_2d(step, grid, omega_edges=(0.7,))
    truth = (0.7 * 1.0 + 1.3 * 3.0) * 2.0
    assert split == pytest.approx(truth, rel=1e-14)
    assert abs(ragged - truth) > 1e-6  # without the cut the step is smeared


def test_x_edges_fn_make_band_exact():
    grid = GridSpec(omega_max=1.0, n_omega=64, n_x=64)

    def band(om, x):
        return np.where((x >= -0.25) & (x <= 0.5), 1.0, 0.0) * np.ones_like(om)

    def edges(om):
        e = np.array([-1.0, -0.25, 0.5, 1.0])
        return np.broadcast_to(e, (om.size, 4)).copy()

    value = riemann_2d(band, grid, x_edges_fn=edges)
    assert value == pytest.approx(0.75, rel=1e-13)


def test_nonfinite_integrand_reported_with_coordinates():
    grid = GridSpec(omega_max=1.0, n_omega=64, n_x=64)

    def bad(om, x):
        return np.where(om > 0.5, np.nan, 1.0) * np.ones_like(x)

    with pytest.raises(OracleError, match="omega"):
        riemann_2d(bad, grid)


def test_grid_spec_validation():
    with pytest.raises(ValueError):
        GridSpec(omega_max=0.0)
    with pytest.raises(ValueError):
        GridSpec(omega_max=1.0, n_omega=32)
    with pytest.raises(ValueError):
        GridSpec(omega_max=1.0, n_x=8)
    doubled = GridSpec(omega_max=1.0, n_omega=64, n_x=128).doubled()
    assert (doubled.n_omega, doubled.n_x) == (128, 256)
    assert doubled.omega_max == 1.0


# ------------------------------------------------------------- oracle values


def test_oracle_rejects_unknown_observable():
    with pytest.raises(ValueError, match="observable"):
        oracle_value("sideways", 0.5, 1.0, 1.0, TopHat(1.0, 0.5, 1.5))


def test_oracle_rejects_all_cold():
    with pytest.raises(ValueError):
        oracle_value("heating_rate", 0.5, 0.0, 0.0, TopHat(1.0, 0.5, 1.5))


def test_oracle_closed_form_emission():
    model = model_from_dict({"type": "ohmic", "slope": 1.0})
    got = oracle_value("intensity_emitted", 0.0, 1.0, 0.0, model)
    assert got == pytest.approx(32.0 * math.pi**5 / 63.0, rel=1e-7)


def test_oracle_drag_matches_rest_force_route():
    """Two structurally different integrals agree on the same number.

    Each route gets a grid sized to its own support: the lab-frame drag
    integrand lives under omega_beta in the band, i.e. omega up to
    band_top/(gamma*(1-beta)); the rest-frame one under the band itself.
    """
    model = TopHat(1.0, 0.5, 1.5)
    beta = 0.5
    gamma = 1.0 / math.sqrt(1.0 - beta * beta)
    drag_grid = GridSpec(omega_max=1.5 / (gamma * (1.0 - beta)), n_omega=2048, n_x=2048)
    rest_grid = GridSpec(omega_max=1.5, n_omega=2048, n_x=2048)
    drag = oracle_value("drag_combination", beta, 0.0, 1.0, model, drag_grid)
    rest = oracle_value("force_rest_frame", beta, 0.0, 1.0, model, rest_grid)
    assert drag == pytest.approx(rest, rel=2e-6)


# ------------------------------------------------------------ golden minting


def test_builtin_cases_are_well_formed():
    assert len(BUILTIN_CASES) >= 6
    names = [c["name"] for c in BUILTIN_CASES]
    assert len(set(names)) == len(names)
    for case in BUILTIN_CASES:
        assert case["observable"] in OBSERVABLES
        model_from_dict(case["model"])  # parses


def test_mint_golden_passes_gate_and_closed_form():
    case = next(c for c in BUILTIN_CASES if c["name"] == "emission-ohmic-closed-form")
    record = mint_golden(case)
    assert record["grid_rel_change"] <= 1e-6
    assert record["value"] == pytest.approx(record["closed_form"], rel=1e-5)
    # the record stores the normalized model dict; compare what it parses to
    assert model_from_dict(record["inputs"]["model"]) == model_from_dict(case["model"])


def test_mint_golden_gate_failure_raises():
    """An intentionally starved grid cannot pass the doubling gate."""
    case = dict(
        name="starved",
        observable="heating_rate",
        beta=0.9,
        t1=0.5,
        t2=1.0,
        model={"type": "lorentz", "alpha0": 1.0, "omega0": 2.0, "gamma": 0.5},
    )
    with pytest.raises(ConvergenceGateError, match="starved"):
        mint_golden(case, n_omega=64, n_x=64)


def test_stored_golden_file_is_complete_and_gated():
    records = load_golden()
    assert len(records) == len(BUILTIN_CASES)
    by_name = {r["name"]: r for r in records}
    for case in BUILTIN_CASES:
        rec = by_name[case["name"]]
        assert rec["grid_rel_change"] <= 1e-6
        assert rec["observable"] == case["observable"]
        assert math.isfinite(rec["value"]) and rec["value"] != 0.0
