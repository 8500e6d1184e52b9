"""Stable scalar kernels and the adaptive quadrature engine.

Everything here works in internal units (hbar = c = k_B = 1).  The
scalar kernels are written so that no admissible input overflows:

* ``bose_occupation`` uses expm1 below the exp-overflow threshold and
  the asymptotic exp(-y) above it, exact to double precision (the two
  branches differ by a relative 2e-305 at the crossover).
* ``coth_zero_point_subtracted`` is the same object at doubled
  argument: coth(y) - 1 = 2/(e^{2y} - 1).
* ``inv_sinh_sq`` evaluates 1/sinh(y)^2 as 4 e^{-2y}/(e^{-2y} - 1)^2,
  which neither overflows at large y nor cancels at small y.

The quadrature engine is adaptive interval bisection with an embedded
Gauss-Legendre pair per panel: the 31-point rule supplies the value,
|GL31 - GL15| the error estimate.  Panels whose estimate exceeds their
share of the tolerance are split at the midpoint until the total
estimate passes or the subdivision budget runs out.  Panel sums are
accumulated in ascending-interval order, single-threaded, so results
are bitwise reproducible regardless of how callers parallelize around
the engine.

The double integrals over (omega, x) use a fixed-order Gauss-Legendre
rule across x in [-1, 1] inside the adaptive omega integral.  The inner
integrand is smooth for the smooth polarizability models; models with
jumps publish breakpoints, and callers pass ``inner_edges_fn`` so the
inner rule is applied piecewise between the exact jump images, keeping
spectral accuracy.  The fixed inner order is a documented trade: it
must resolve the narrowest spectral feature of the model (the
``inner_nodes`` knob raises it), and correctness is guarded by the
node-doubling invariance tests.
"""

from __future__ import annotations

import math
from dataclasses import dataclass
from functools import lru_cache

import numpy as np

# Speed guard: gamma stays finite (~2.2e4) at the boundary.
BETA_MAX = 1.0 - 1e-9

# exp argument above which expm1(y) would overflow; switch to exp(-y).
_EXP_SWITCH = 700.0

# Orders of the embedded Gauss-Legendre pair (value / error reference).
_GL_LOW = 15
_GL_HIGH = 31

# Per-panel error floor relative to the panel value: double-precision
# roundoff of the node sum.  Joins the reported error so identity
# tolerances (10x combined error) stay honest at large integrand scales
# (T = 10 -> integrals ~ 1e6), but never gates convergence: subdivision
# cannot reduce roundoff, so only the embedded pair defect is tested
# against the tolerances.
_ERR_FLOOR = 2.0e-16

# Truncation frequencies below this cannot be node-mapped in double
# precision: the lowest Gauss node on [0, omega_max] rounds to exactly
# 0.0.  Every kernel integrated here carries at least three powers of
# omega, so each sample -- and with it the integral -- underflows to 0.0
# long before this scale; returning exactly 0 is the correctly rounded
# value, not an approximation.
_OMEGA_DOMAIN_FLOOR = 1.0e-318


class QuadratureConvergenceError(RuntimeError):
    """Adaptive quadrature exhausted its subdivision budget."""

    def __init__(self, message: str, value: float = math.nan, error: float = math.nan):
        super().__init__(message)
        self.value = value
        self.error = error


@dataclass(frozen=True)
class QuadratureSpec:
    """Accuracy and truncation knobs shared by all observables.

    rel_tol / abs_tol bound the reducible (refinement) part of the
    error estimate via max(rel_tol * |value|, abs_tol); the roundoff of
    the gross panel mass is reported on top of that and sets the
    attainable floor.  u_max sets the frequency cutoff in units of the
    relevant thermal scale.  max_subdivisions is the total panel-split
    budget of one adaptive integral.  inner_nodes is the fixed
    Gauss-Legendre order across x.
    """

    rel_tol: float = 1e-9
    abs_tol: float = 1e-14
    u_max: float = 40.0
    max_subdivisions: int = 200
    inner_nodes: int = 64

    def __post_init__(self):
        if not (math.isfinite(self.rel_tol) and self.rel_tol > 0.0):
            raise ValueError(f"rel_tol must be > 0, got {self.rel_tol!r}")
        if not (math.isfinite(self.abs_tol) and self.abs_tol > 0.0):
            raise ValueError(f"abs_tol must be > 0, got {self.abs_tol!r}")
        if not (math.isfinite(self.u_max) and self.u_max >= 10.0):
            raise ValueError(f"u_max must be >= 10, got {self.u_max!r}")
        if not (isinstance(self.max_subdivisions, int) and self.max_subdivisions >= 0):
            raise ValueError(
                f"max_subdivisions must be a count >= 0, got {self.max_subdivisions!r}"
            )
        if not (isinstance(self.inner_nodes, int) and self.inner_nodes >= 8):
            raise ValueError(f"inner_nodes must be >= 8, got {self.inner_nodes!r}")


@dataclass(frozen=True)
class QuadResult:
    """Quadrature value with its error estimate and work diagnostics."""

    value: float
    error: float
    neval: int
    panels: int
    omega_max: float | None = None


@lru_cache(maxsize=None)
def _gl_nodes(n: int):
    nodes, weights = np.polynomial.legendre.leggauss(n)
    return nodes, weights


def lorentz_gamma(beta: float) -> float:
    """1/sqrt(1 - beta^2) with the beta range guard."""
    b = _check_beta(beta)
    return 1.0 / math.sqrt((1.0 - b) * (1.0 + b))


def _check_beta(beta: float) -> float:
    if not (isinstance(beta, (int, float)) and math.isfinite(beta)):
        raise ValueError(f"beta must be finite, got {beta!r}")
    if beta < 0.0 or beta > BETA_MAX:
        raise ValueError(f"beta must lie in [0, {BETA_MAX!r}], got {beta!r}")
    return float(beta)


def bose_occupation(omega, temperature: float):
    """Mean photon number n(omega, T) = 1/(e^{omega/T} - 1).

    Parameters
    ----------
    omega : float or ndarray
        Frequencies, all > 0.
    temperature : float
        T >= 0; T = 0 returns exactly 0 (empty vacuum, no limit taken).

    Stable for every ratio omega/T: below the exp-overflow threshold
    the expm1 form is used, above it the asymptotic exp(-y), which
    underflows cleanly to 0 for ratios up to and including ones whose
    division itself overflows.
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError("bose_occupation requires omega > 0")
    t = temperature
    if not (isinstance(t, (int, float)) and math.isfinite(t) and t >= 0.0):
        raise ValueError(f"temperature must be finite and >= 0, got {t!r}")
    if t == 0.0:
        out = np.zeros_like(w)
    else:
        # A normal omega over a subnormal T overflows the ratio to inf;
        # that lands in the asymptotic branch as exp(-inf) = 0, the
        # correct occupation there, so the overflow is not an error.
        with np.errstate(over="ignore"):
            y = w / t
        out = np.empty_like(y)
        small = y < _EXP_SWITCH
        out[small] = 1.0 / np.expm1(y[small])
        out[~small] = np.exp(-y[~small])
    if np.isscalar(omega) or np.ndim(omega) == 0:
        return float(out)
    return out


def coth_zero_point_subtracted(y):
    """coth(y) - 1 = 2/(e^{2y} - 1) for y > 0.

    The zero-point-subtracted form of the thermal coth: finite for all
    y > 0, monotone decreasing, ~ 1/y - 1 as y -> 0+, ~ 2 e^{-2y} as
    y -> infinity, with no overflow at large argument.
    """
    v = np.asarray(y, dtype=float)
    if np.any(v <= 0.0):
        raise ValueError("coth_zero_point_subtracted requires y > 0")
    two_y = 2.0 * v
    out = np.empty_like(two_y)
    small = two_y < _EXP_SWITCH
    out[small] = 2.0 / np.expm1(two_y[small])
    out[~small] = 2.0 * np.exp(-two_y[~small])
    if np.isscalar(y) or np.ndim(y) == 0:
        return float(out)
    return out


def inv_sinh_sq(y):
    """1/sinh(y)^2 for y > 0, overflow-free: 4 e^{-2y} / (e^{-2y} - 1)^2."""
    v = np.asarray(y, dtype=float)
    if np.any(v <= 0.0):
        raise ValueError("inv_sinh_sq requires y > 0")
    e = np.exp(-2.0 * v)
    out = 4.0 * e / np.expm1(-2.0 * v) ** 2
    if np.isscalar(y) or np.ndim(y) == 0:
        return float(out)
    return out


def doppler_frequency(omega, x, beta: float):
    """Rest-frame frequency gamma * omega * (1 + beta * x) of a lab photon.

    omega > 0, |x| <= 1 (arrival-direction cosine), beta in [0, BETA_MAX].
    """
    w = np.asarray(omega, dtype=float)
    if np.any(w <= 0.0):
        raise ValueError("doppler_frequency requires omega > 0")
    xv = np.asarray(x, dtype=float)
    if np.any(np.abs(xv) > 1.0):
        raise ValueError("doppler_frequency requires |x| <= 1")
    g = lorentz_gamma(beta)
    out = g * w * (1.0 + beta * xv)
    if np.ndim(out) == 0:
        return float(out)
    return out


def omega_cutoff(t1: float, t2: float, beta: float, u_max: float) -> float:
    """Truncation frequency for the thermal double integrals.

    max(u_max * T2, u_max * T1 * sqrt((1+beta)/(1-beta))): the blue-shift
    factor on the T1 scale guarantees the rest-frame occupation
    n(gamma*omega*(1+beta*x), T1) has decayed at the cutoff for every
    x in [-1, 1], since its argument is at least omega*sqrt((1-b)/(1+b)).
    """
    if t1 < 0.0 or t2 < 0.0:
        raise ValueError(f"temperatures must be >= 0, got {t1!r}, {t2!r}")
    if t1 == 0.0 and t2 == 0.0:
        raise ValueError(
            "omega_cutoff is undefined at T1 = T2 = 0; every integrand is "
            "identically zero there and callers short-circuit"
        )
    b = _check_beta(beta)
    if not (math.isfinite(u_max) and u_max > 0.0):
        raise ValueError(f"u_max must be positive, got {u_max!r}")
    blue = math.sqrt((1.0 + b) / (1.0 - b))
    return u_max * max(t2, t1 * blue)


def _panel_pair(f, lo, hi):
    """Evaluate the GL pair on a batch of panels.

    Returns (low-order sums, high-order sums, evaluation count).  `f`
    receives one ndarray of arbitrary shape and must return values of
    the same shape.
    """
    x_lo, w_lo = _gl_nodes(_GL_LOW)
    x_hi, w_hi = _gl_nodes(_GL_HIGH)
    half = 0.5 * (hi - lo)
    mid = 0.5 * (hi + lo)
    nodes = np.concatenate([x_lo, x_hi])
    pts = mid[:, None] + half[:, None] * nodes[None, :]
    vals = np.asarray(f(pts), dtype=float)
    if vals.shape != pts.shape:
        raise ValueError(
            f"integrand returned shape {vals.shape}, expected {pts.shape}"
        )
    v_lo = (vals[:, :_GL_LOW] @ w_lo) * half
    v_hi = (vals[:, _GL_LOW:] @ w_hi) * half
    return v_lo, v_hi, pts.size


def integrate_1d(f, a: float, b: float, spec: QuadratureSpec, seeds=()) -> QuadResult:
    """Adaptive Gauss quadrature of f over [a, b] with an error estimate.

    Parameters
    ----------
    f : callable
        Vectorized integrand: ndarray in, same-shape ndarray out, finite
        on (a, b).
    a, b : float
        Finite bounds, a < b.
    spec : QuadratureSpec
    seeds : iterable of float, optional
        Interior points forced to be initial panel edges (kinks or scale
        transitions known to the caller).

    Returns
    -------
    QuadResult
        value (high-order panel sum), error (sum of per-panel embedded
        defects plus the roundoff floor of the gross panel mass),
        evaluation count, panel count.  For strongly cancelling
        integrals the reported error bottoms out at that roundoff
        floor even when the defect sum has passed a tighter tolerance:
        the value is then correctly rounded, and the error says so.

    Raises
    ------
    QuadratureConvergenceError
        If the split budget is exhausted before the reducible (pair
        defect) estimate passes max(rel_tol * |value|, abs_tol).
    """
    if not (math.isfinite(a) and math.isfinite(b) and a < b):
        raise ValueError(f"need finite bounds with a < b, got {a!r}, {b!r}")

    interior = sorted({float(s) for s in seeds if a < s < b})
    edges = np.array([a, *interior, b], dtype=float)
    lo = edges[:-1]
    hi = edges[1:]
    keep = hi > lo
    lo, hi = lo[keep], hi[keep]

    v_lo, v_hi, neval = _panel_pair(f, lo, hi)
    if not np.all(np.isfinite(v_hi)):
        raise ValueError("integrand produced non-finite panel sums")
    splits_used = 0

    while True:
        # Two error scales: the embedded pair defect (what subdivision can
        # reduce) and the roundoff noise of the panel sums, _ERR_FLOOR
        # times the gross panel mass (what it cannot).  The defect is
        # itself built from roundoff-limited sums, so once it falls to the
        # noise scale it measures roundoff, not discretization error:
        # accept there even if the requested abs_tol is tighter, or a
        # strongly cancelling integral (net ~ 0, gross large) could never
        # terminate despite its value being correctly rounded.  Both
        # scales join the reported error, which stays an honest bound.
        defect = np.abs(v_hi - v_lo)
        order = np.argsort(lo, kind="stable")
        value = float(np.sum(v_hi[order]))
        reducible = float(np.sum(defect[order]))
        noise = _ERR_FLOOR * float(np.sum(np.abs(v_hi[order])))
        err_total = reducible + noise
        tol = max(spec.rel_tol * abs(value), spec.abs_tol)
        target = max(tol, noise)
        if reducible <= target:
            return QuadResult(value, err_total, neval, len(lo))

        budget = spec.max_subdivisions - splits_used
        if budget <= 0:
            raise QuadratureConvergenceError(
                f"subdivision budget {spec.max_subdivisions} exhausted: "
                f"value {value:.6g}, reducible error estimate {reducible:.3g} > "
                f"max(tolerance {tol:.3g}, roundoff scale {noise:.3g}) "
                f"over {len(lo)} panels",
                value=value,
                error=err_total,
            )

        share = target / (2.0 * len(lo))
        cand = np.where(defect > share)[0]
        if cand.size == 0:
            cand = np.array([int(np.argmax(defect))])
        if cand.size > budget:
            worst = np.argsort(-defect[cand], kind="stable")[:budget]
            cand = cand[worst]
        mid = 0.5 * (lo[cand] + hi[cand])
        splittable = (mid > lo[cand]) & (mid < hi[cand])
        cand, mid = cand[splittable], mid[splittable]
        if cand.size == 0:
            raise QuadratureConvergenceError(
                "panels have collapsed to machine width without converging "
                f"(value {value:.6g}, error estimate {err_total:.3g})",
                value=value,
                error=err_total,
            )

        new_lo = np.concatenate([lo[cand], mid])
        new_hi = np.concatenate([mid, hi[cand]])
        nv_lo, nv_hi, extra = _panel_pair(f, new_lo, new_hi)
        if not np.all(np.isfinite(nv_hi)):
            raise ValueError("integrand produced non-finite panel sums")
        neval += extra
        splits_used += cand.size

        keep = np.ones(len(lo), dtype=bool)
        keep[cand] = False
        lo = np.concatenate([lo[keep], new_lo])
        hi = np.concatenate([hi[keep], new_hi])
        v_lo = np.concatenate([v_lo[keep], nv_lo])
        v_hi = np.concatenate([v_hi[keep], nv_hi])


def integrate_omega_x(
    kernel,
    t1: float,
    t2: float,
    beta: float,
    spec: QuadratureSpec,
    inner_edges_fn=None,
    outer_seeds=(),
    omega_max: float | None = None,
) -> QuadResult:
    """Nested quadrature of kernel(omega, x) over (0, omega_max] x [-1, 1].

    Fixed-order Gauss-Legendre across x (``spec.inner_nodes`` points)
    inside adaptive quadrature over omega, truncated at
    ``omega_cutoff(t1, t2, beta, spec.u_max)`` unless `omega_max` is
    given.

    Parameters
    ----------
    kernel : callable
        kernel(omega, x) with broadcasting: omega comes shaped
        (..., 1) or (..., 1, 1) against x of shape (n,) or (panels, n).
    t1, t2 : float
        Temperature scales used only for the automatic cutoff.
    beta : float
        Speed, for the cutoff blue-shift factor.
    spec : QuadratureSpec
    inner_edges_fn : callable, optional
        Maps a flat omega array (N,) to an ascending edge array
        (N, k + 1) spanning [-1, 1]; the inner rule is applied on each
        [edge_i, edge_{i+1}] separately.  For integrands with jumps in
        x (band-edge images); zero-width segments contribute nothing.
    outer_seeds : iterable of float, optional
        Initial panel edges for the omega integral (kink frequencies).
    omega_max : float, optional
        Explicit cutoff override.

    Returns
    -------
    QuadResult
        neval counts kernel point evaluations; omega_max records the
        cutoff actually used.
    """
    if omega_max is None:
        omega_max = omega_cutoff(t1, t2, beta, spec.u_max)
    if not (math.isfinite(omega_max) and omega_max > 0.0):
        raise ValueError(f"omega_max must be finite and positive, got {omega_max!r}")
    if omega_max < _OMEGA_DOMAIN_FLOOR:
        return QuadResult(0.0, 0.0, 0, 0, float(omega_max))

    xg, wg = _gl_nodes(spec.inner_nodes)
    count = 0

    if inner_edges_fn is None:

        def inner(omega):
            nonlocal count
            count += omega.size * xg.size
            vals = kernel(omega[..., None], xg)
            return vals @ wg

    else:

        def inner(omega):
            nonlocal count
            flat = omega.reshape(-1)
            edges = inner_edges_fn(flat)
            seg_lo = edges[:, :-1]
            seg_hi = edges[:, 1:]
            half = 0.5 * (seg_hi - seg_lo)
            mid = 0.5 * (seg_hi + seg_lo)
            x = mid[:, :, None] + half[:, :, None] * xg
            w = half[:, :, None] * wg
            count += x.size
            vals = kernel(flat[:, None, None], x)
            return np.sum(vals * w, axis=(1, 2)).reshape(omega.shape)

    res = integrate_1d(inner, 0.0, float(omega_max), spec, seeds=outer_seeds)
    return QuadResult(res.value, res.error, count, res.panels, float(omega_max))
