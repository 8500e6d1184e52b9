"""Coupled evolution of speed, rest mass, and proper temperature.

Equations of motion (internal units, hbar = c = k_B = 1):

    dbeta/dt = (1 - beta^2)^{3/2} * F' / m         (F' = drag combination)
    dm/dt    = gamma * Qdot                        (absorbed heat adds mass)
    dT1/dt   = gamma * Qdot * (1 - C_s*T1) / (C_s * m)

The (1 - C_s*T1) factor corrects for the heat that reappears as rest
mass; it is dropped when C_s*T1 < 1e-12 (the regimes of interest have
C_s*T1 << 1, and a warning fires when it exceeds 1e-6).

The stepper is an embedded Runge-Kutta 4(5) pair (Dormand-Prince via
scipy) driven step by step.  At every accepted step the instantaneous
energy balance |I + Qdot + beta*F_x| is evaluated with an independent
quadrature for I and must stay within its combined quadrature error
budget; in full mode this residual equals |d(gamma*m)/dt + I|, the
statement that kinetic-plus-rest energy is lost exactly at the radiated
rate.  Trajectories also accumulate trapezoidal Int I dt so the global
bookkeeping |Delta(gamma*m) + Int I dt| can be checked; dense-output
substates may be sampled between accepted steps (``balance_substeps``)
to refine that trapezoid without constraining the step controller.

Modes: ``full`` integrates all three variables; ``quasi-static-T1``
pins T1 = T1*(beta) (the zero of Qdot) and integrates (beta, m),
removing the fast thermal timescale; ``fixed-velocity`` holds beta and
integrates (m, T1), the fixed-speed heating problem.  Global energy
bookkeeping applies to full and quasi-static trajectories; a
fixed-velocity particle exchanges energy with whatever constrains it,
so its bookkeeping residual is reported as NaN.
"""

from __future__ import annotations

import math
import warnings
from dataclasses import dataclass, replace
from functools import lru_cache

import numpy as np
from scipy.integrate import RK45
from scipy.optimize import brentq

from .kernels import BETA_MAX, QuadratureSpec, bose_occupation, integrate_omega_x, lorentz_gamma
from .observables import (
    DEFAULT_QUADRATURE,
    BathSpec,
    ParticleState,
    Quantity,
    _doppler_geometry,
    drag_combination,
    heating_rate,
)
from .polarizability import PolarizabilityModel, alpha_im

_PREF = 2.0 / math.pi

# Relative size of the C_s*T1 correction below which it is dropped.
_CORRECTION_CUT = 1e-12

# C_s*T1 above this deserves a warning: the thermal model neglects
# higher-order rest-mass feedback of the same size.
_CORRECTION_WARN = 1e-6

_MONITOR_FLOOR = 1e-12

MODES = ("full", "quasi-static-T1", "fixed-velocity")


class DynamicsError(RuntimeError):
    """Trajectory integration aborted (step underflow, unphysical state)."""


class MonitorViolation(DynamicsError):
    """Accepted step broke the instantaneous energy-balance monitor."""


class BracketError(RuntimeError):
    """Equilibrium root not bracketed by the Doppler temperature bounds."""


@dataclass(frozen=True)
class MaterialThermo:
    """Constant specific heat per unit mass (internal units: 1/temperature)."""

    specific_heat: float

    def __post_init__(self):
        c = self.specific_heat
        if not (isinstance(c, (int, float)) and math.isfinite(c) and c > 0.0):
            raise ValueError(f"specific_heat must be finite and positive, got {c!r}")


@dataclass(frozen=True)
class TrajectoryPoint:
    """Accepted integration point with instantaneous observables."""

    t: float
    beta: float
    mass: float
    temperature: float
    force_lab: float
    heating_rate: float
    intensity: float
    balance_residual: float


@dataclass(frozen=True)
class Trajectory:
    """Integration result: accepted points plus global energy bookkeeping."""

    points: tuple[TrajectoryPoint, ...]
    termination: str  # "t_end" | "beta_stop" | "steady"
    radiated_energy: float  # trapezoidal Int I dt
    bookkeeping_residual: float  # |Delta(gamma*m) + Int I dt|; NaN for fixed-velocity


@dataclass(frozen=True)
class EvolveConfig:
    """Integration horizon, tolerances, mode, and termination knobs.

    abs_tol must exceed 10x the quadrature abs_tol: the step controller
    treats quadrature error as RHS noise and cannot resolve below it.
    balance_substeps > 1 samples the dense output that many times per
    accepted step when accumulating the trapezoidal Int I dt.
    """

    t_end: float
    initial_step: float | None = None
    rel_tol: float = 1e-8
    abs_tol: float = 1e-10
    mode: str = "full"
    output_stride: int = 1
    max_step: float = math.inf
    beta_floor: float = 1e-8
    temperature_tol: float = 1e-6
    beta_stop: float | None = None
    monitor: bool = True
    balance_substeps: int = 1

    def __post_init__(self):
        if not (math.isfinite(self.t_end) and self.t_end > 0.0):
            raise ValueError(f"t_end must be finite and positive, got {self.t_end!r}")
        if self.initial_step is not None and not (
            math.isfinite(self.initial_step) and self.initial_step > 0.0
        ):
            raise ValueError(f"initial_step must be positive, got {self.initial_step!r}")
        if not (math.isfinite(self.rel_tol) and self.rel_tol > 0.0):
            raise ValueError(f"rel_tol must be positive, got {self.rel_tol!r}")
        if not (math.isfinite(self.abs_tol) and self.abs_tol > 0.0):
            raise ValueError(f"abs_tol must be positive, got {self.abs_tol!r}")
        if self.mode not in MODES:
            raise ValueError(f"mode must be one of {MODES}, got {self.mode!r}")
        if not (isinstance(self.output_stride, int) and self.output_stride >= 1):
            raise ValueError(f"output_stride must be an int >= 1, got {self.output_stride!r}")
        if not self.max_step > 0.0:
            raise ValueError(f"max_step must be positive, got {self.max_step!r}")
        if not (math.isfinite(self.beta_floor) and self.beta_floor > 0.0):
            raise ValueError(f"beta_floor must be positive, got {self.beta_floor!r}")
        if not (math.isfinite(self.temperature_tol) and self.temperature_tol > 0.0):
            raise ValueError(
                f"temperature_tol must be positive, got {self.temperature_tol!r}"
            )
        if self.beta_stop is not None and not (0.0 <= self.beta_stop <= BETA_MAX):
            raise ValueError(f"beta_stop must lie in [0, {BETA_MAX!r}], got {self.beta_stop!r}")
        if not (isinstance(self.balance_substeps, int) and self.balance_substeps >= 1):
            raise ValueError(
                f"balance_substeps must be an int >= 1, got {self.balance_substeps!r}"
            )

    def validate_against(self, spec: QuadratureSpec):
        if self.abs_tol < 10.0 * spec.abs_tol:
            raise ValueError(
                f"ODE abs_tol {self.abs_tol:g} must be at least 10x the quadrature "
                f"abs_tol {spec.abs_tol:g}; the stepper cannot resolve below the "
                "quadrature noise floor"
            )


def derivatives(
    state: ParticleState,
    bath: BathSpec,
    model: PolarizabilityModel,
    thermo: MaterialThermo,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> tuple[float, float, float]:
    """(dbeta/dt, dm/dt, dT1/dt) at one state."""
    fp = drag_combination(state, bath, model, spec).value
    qd = heating_rate(state, bath, model, spec).value
    g = lorentz_gamma(state.beta)
    dbeta = (1.0 - state.beta**2) ** 1.5 * fp / state.mass
    dmass = g * qd
    dtemp = g * qd / (thermo.specific_heat * state.mass)
    corr = thermo.specific_heat * state.temperature
    if corr >= _CORRECTION_CUT:
        dtemp *= 1.0 - corr
    return dbeta, dmass, dtemp


def _net_intensity(
    state: ParticleState,
    bath: BathSpec,
    model: PolarizabilityModel,
    spec: QuadratureSpec,
) -> Quantity:
    """Net radiated power I = I1 - I2 in a single quadrature.

    Used by the trajectory monitor: evaluating I directly (rather than
    reconstructing it from the RHS values) keeps the energy-balance
    check non-circular while costing one integral instead of two.
    """
    b, t1, t2 = state.beta, state.temperature, bath.temperature
    if t1 == 0.0 and t2 == 0.0:
        return Quantity(0.0, 0.0, {"short_circuit": "no photons"})
    g = lorentz_gamma(b)
    edges_fn, seeds = _doppler_geometry(model, b, g)

    def kern(om, x):
        u = 1.0 + b * x
        wb = g * om * u
        occ = bose_occupation(wb, t1) - bose_occupation(om, t2)
        return u * u * om**4 * alpha_im(model, wb) * occ

    q = integrate_omega_x(kern, t1, t2, b, spec, inner_edges_fn=edges_fn, outer_seeds=seeds)
    return Quantity(_PREF * g * q.value, _PREF * g * q.error)


@lru_cache(maxsize=1024)
def _equilibrium_cached(
    beta: float,
    t2: float,
    model: PolarizabilityModel,
    spec: QuadratureSpec,
    rel_tol: float,
) -> float:
    blue = math.sqrt((1.0 + beta) / (1.0 - beta))
    lo = t2 / blue
    hi = t2 * blue
    bath = BathSpec(t2)

    def qdot(t1: float, qspec: QuadratureSpec) -> float:
        return heating_rate(ParticleState(beta, 1.0, t1), bath, model, qspec).value

    q_lo = qdot(lo, spec)
    q_hi = qdot(hi, spec)
    if not (q_lo > 0.0 > q_hi):
        raise BracketError(
            "equilibrium temperature not bracketed: "
            f"Qdot({lo:.6g}) = {q_lo:.6g}, Qdot({hi:.6g}) = {q_hi:.6g} "
            "(need positive at the red-shifted bound, negative at the "
            "blue-shifted bound; a null model has no root)"
        )
    # Near the root the net heating vanishes while the gross spectral mass
    # does not, so resolving Qdot to the caller's abs_tol there buys no
    # root accuracy, only panels.  A fraction of the bracket-end scale is
    # enough to bound the temperature error well inside rel_tol.
    root_abs = max(spec.abs_tol, 0.1 * rel_tol * max(abs(q_lo), abs(q_hi)))
    root_spec = replace(spec, abs_tol=root_abs)
    return float(
        brentq(lambda t1: qdot(t1, root_spec), lo, hi, xtol=1e-14 * hi, rtol=rel_tol)
    )


def equilibrium_temperature(
    beta: float,
    bath: BathSpec,
    model: PolarizabilityModel,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
    rel_tol: float = 1e-8,
) -> float:
    """Proper temperature T1* at which the net heating vanishes.

    The root is bracketed by the extreme Doppler temperatures
    T2*sqrt((1-b)/(1+b)) and T2*sqrt((1+b)/(1-b)): at those values the
    occupation comparison is one-sided for every direction, so Qdot has
    opposite strict signs at the ends for any nonzero passive model.
    """
    g = lorentz_gamma(beta)  # validates beta
    del g
    t2 = bath.temperature
    if t2 <= 0.0:
        raise ValueError("equilibrium temperature needs a bath with T2 > 0")
    if beta == 0.0:
        return t2
    return _equilibrium_cached(float(beta), float(t2), model, spec, float(rel_tol))


def evolve(
    state0: ParticleState,
    bath: BathSpec,
    model: PolarizabilityModel,
    thermo: MaterialThermo,
    cfg: EvolveConfig,
    spec: QuadratureSpec = DEFAULT_QUADRATURE,
) -> Trajectory:
    """Integrate the coupled system from state0; see the module docstring.

    Returns every accepted step as a TrajectoryPoint (output striding is
    an output-layer concern).  Raises DynamicsError on step underflow or
    an unphysical state, MonitorViolation when an accepted step's energy
    balance exceeds its quadrature error budget.
    """
    cfg.validate_against(spec)
    if thermo.specific_heat * state0.temperature > _CORRECTION_WARN:
        warnings.warn(
            f"C_s*T1 = {thermo.specific_heat * state0.temperature:.3g} is not "
            "small; the thermal evolution neglects rest-mass feedback beyond "
            "first order",
            UserWarning,
            stacklevel=2,
        )
    mode = cfg.mode
    if mode == "quasi-static-T1" and bath.temperature <= 0.0:
        raise ValueError("quasi-static-T1 mode needs T2 > 0 to define T1*(beta)")

    beta0 = state0.beta
    cache: dict[bytes, tuple[float, float]] = {}

    def state_of(y: np.ndarray) -> ParticleState:
        if mode == "full":
            b, m, t1 = y
        elif mode == "quasi-static-T1":
            b, m = y
            t1 = equilibrium_temperature(
                min(max(float(b), 0.0), BETA_MAX), bath, model, spec
            )
        else:  # fixed-velocity
            m, t1 = y
            b = beta0
        b = min(max(float(b), 0.0), BETA_MAX)
        t1 = max(float(t1), 0.0)
        if not m > 0.0:
            raise DynamicsError(
                f"mass became non-positive (m = {m:.6g}); the model has been "
                "integrated far outside its regime"
            )
        return ParticleState(b, float(m), t1)

    def rates(y: np.ndarray) -> tuple[float, float, float]:
        """(drag, Qdot) -> cached; returns (fp, qd) for the state of y."""
        key = y.tobytes()
        hit = cache.get(key)
        if hit is not None:
            return hit
        st = state_of(y)
        fp = drag_combination(st, bath, model, spec).value
        qd = heating_rate(st, bath, model, spec).value
        if len(cache) >= 32:
            cache.clear()
        cache[key] = (fp, qd)
        return fp, qd

    def rhs(t: float, y: np.ndarray) -> np.ndarray:
        fp, qd = rates(y)
        st = state_of(y)
        g = lorentz_gamma(st.beta)
        dbeta = (1.0 - st.beta**2) ** 1.5 * fp / st.mass
        dmass = g * qd
        dtemp = g * qd / (thermo.specific_heat * st.mass)
        corr = thermo.specific_heat * st.temperature
        if corr >= _CORRECTION_CUT:
            dtemp *= 1.0 - corr
        if mode == "full":
            return np.array([dbeta, dmass, dtemp])
        if mode == "quasi-static-T1":
            return np.array([dbeta, dmass])
        return np.array([dmass, dtemp])

    def make_point(t: float, y: np.ndarray) -> tuple[TrajectoryPoint, float]:
        st = state_of(y)
        fp, qd = rates(y)
        net = _net_intensity(st, bath, model, spec)
        g = lorentz_gamma(st.beta)
        f_lab = fp + g * g * st.beta * qd
        residual = abs(net.value + qd + st.beta * f_lab)
        # Reconstruction uses the cached drag/Qdot values; their error
        # budget is the quadrature spec's own tolerance.
        scale = max(abs(net.value), abs(qd), abs(st.beta * f_lab))
        budget = math.sqrt(net.error**2 + 2.0 * (spec.rel_tol * scale) ** 2)
        tol = max(10.0 * budget, _MONITOR_FLOOR)
        point = TrajectoryPoint(
            t, st.beta, st.mass, st.temperature, f_lab, qd, net.value, residual
        )
        return point, tol

    def gamma_mass(y: np.ndarray) -> float:
        st = state_of(y)
        return lorentz_gamma(st.beta) * st.mass

    if mode == "full":
        y0 = np.array([state0.beta, state0.mass, state0.temperature])
    elif mode == "quasi-static-T1":
        y0 = np.array([state0.beta, state0.mass])
    else:
        y0 = np.array([state0.mass, state0.temperature])

    solver = RK45(
        rhs,
        0.0,
        y0,
        t_bound=cfg.t_end,
        rtol=cfg.rel_tol,
        atol=cfg.abs_tol,
        max_step=cfg.max_step,
        first_step=cfg.initial_step,
    )

    point, tol = make_point(0.0, y0)
    if cfg.monitor and point.balance_residual > tol:
        raise MonitorViolation(
            f"initial state fails energy balance: residual "
            f"{point.balance_residual:.3g} > tolerance {tol:.3g}"
        )
    points = [point]
    radiated = 0.0
    termination = "t_end"
    t_prev, y_prev, i_prev = 0.0, y0.copy(), point.intensity

    while solver.status == "running":
        message = solver.step()
        if solver.status == "failed":
            raise DynamicsError(
                f"step-size underflow at t = {solver.t:.6g}: {message or 'solver failed'}"
            )
        t_new, y_new = solver.t, solver.y.copy()
        point, tol = make_point(t_new, y_new)
        if cfg.monitor and point.balance_residual > tol:
            raise MonitorViolation(
                f"energy balance violated at t = {t_new:.6g}: residual "
                f"{point.balance_residual:.3g} > tolerance {tol:.3g} "
                f"(beta = {point.beta:.6g}, T1 = {point.temperature:.6g})"
            )
        points.append(point)

        # Trapezoidal Int I dt, optionally refined on dense-output substates.
        if cfg.balance_substeps > 1:
            interp = solver.dense_output()
            ts = np.linspace(t_prev, t_new, cfg.balance_substeps + 1)
            i_vals = [i_prev]
            for tk in ts[1:-1]:
                sub = _net_intensity(state_of(interp(tk)), bath, model, spec)
                i_vals.append(sub.value)
            i_vals.append(point.intensity)
            radiated += float(np.trapezoid(i_vals, ts))
        else:
            radiated += 0.5 * (i_prev + point.intensity) * (t_new - t_prev)
        t_prev, y_prev, i_prev = t_new, y_new, point.intensity

        if cfg.beta_stop is not None and point.beta <= cfg.beta_stop:
            termination = "beta_stop"
            break
        if (
            point.beta < cfg.beta_floor
            and bath.temperature > 0.0
            and abs(point.temperature - bath.temperature)
            <= cfg.temperature_tol * bath.temperature
        ):
            # At beta below the floor T1*(beta) differs from T2 only at
            # O(beta^2), far inside temperature_tol.
            termination = "steady"
            break

    if mode == "fixed-velocity":
        bookkeeping = math.nan
    else:
        delta_e = gamma_mass(y_prev) - gamma_mass(y0)
        bookkeeping = abs(delta_e + radiated)
    return Trajectory(tuple(points), termination, radiated, bookkeeping)
