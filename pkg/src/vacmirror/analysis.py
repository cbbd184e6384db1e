"""Mechanical impedance, stability and passivity of the coupled mirror.

The suspended mirror driven at velocity v absorbs the applied force
through the impedance Z,

    -i w Z[w] = k - m w^2 - chi[w],

whose real part m tau w^2 Gamma_R is the dissipative coupling to the
vacuum.  In the Laplace domain (p = -i w, Re p > 0)

    Z{p} = k/p + m p - m tau p^2 Gamma{p},

real on the positive real axis.  A runaway mode is a zero of Z{p} in
Re p > 0; the argument principle counts them, a secant iteration refines
them, and passivity (Re Z{p} >= 0) is probed on a log-polar set and
cross-checked against the spectral representation

    Z{p} = (2p/pi) int_0^inf Z_R[rho] / (p^2 + rho^2) drho + k/p + p(m - mu).

Evaluations are pure; contour and probe sweeps vectorize over points.
"""

import json
from dataclasses import dataclass

import numpy as np

from .dispersion import continue_upper_half
from .errors import (
    AdmittanceSingularityError,
    ContinuationError,
    ContourError,
    CutoffDivergenceError,
    ImpedancePoleError,
    RootConvergenceError,
)
from .numerics import fit_inverse_square_tail, secant_root
from .scattering import LORENTZIAN, PERFECT
from .susceptibility import (
    MirrorMechanics,
    ResponseCurve,
    gamma,
    induced_mass,
    lorentzian_gamma,
    reflection_cutoff,
    susceptibility,
)

__all__ = [
    "MirrorMechanics",
    "impedance",
    "admittance",
    "laplace_impedance",
    "motional_impedance",
    "sample_gamma_real",
    "count_rhp_zeros",
    "refine_root",
    "passivity_check",
    "spectral_impedance",
    "Rectangle",
    "default_contour",
    "StabilityReport",
    "stability_report",
]


def impedance(model, mech, w, settings=None):
    """Mechanical impedance Z[w] = (k - m w^2 - chi[w]) / (-i w), real w."""
    w = float(w)
    if w == 0.0:
        if mech.k > 0:
            raise ImpedancePoleError("Z has a k/w pole at w = 0")
        return 0.0 + 0.0j
    chi = susceptibility(model, mech, w, settings)
    return (mech.k - mech.m * w**2 - chi) / (-1j * w)


def admittance(model, mech, w, settings=None, min_modulus=None):
    """Mechanical admittance Y = 1/Z with a near-singularity guard."""
    z = impedance(model, mech, w, settings)
    floor = min_modulus if min_modulus is not None else 1e-10 * mech.m * max(abs(w), 1e-30)
    if abs(z) <= floor:
        raise AdmittanceSingularityError(
            f"|Z| = {abs(z):.3e} below {floor:.3e} at w = {w}", omega=w, z_value=z
        )
    return 1.0 / z


def sample_gamma_real(model, omega_max=1.0e3, points=1400, settings=None):
    """Dense Gamma_R curve used by continuation and spectral integrals."""
    grid = np.concatenate([[0.0], np.logspace(-3, np.log10(omega_max), points)])
    vals = np.array([gamma(model, float(w), settings) for w in grid])
    return ResponseCurve(grid, vals, label="gamma")


def _laplace_gamma(model, p, gamma_curve=None):
    """Gamma{p} = Gamma[i p] for Re p > 0, dispatched per model kind."""
    p = np.asarray(p, dtype=complex)
    if np.any(np.real(p) <= 0):
        raise ContinuationError("Laplace evaluation requires Re p > 0")
    if model.kind == PERFECT:
        out = np.ones(p.shape, dtype=complex)
        return out if out.ndim else complex(out)
    if model.kind == LORENTZIAN:
        return lorentzian_gamma(1j * p, model.omega_scale)
    if gamma_curve is None:
        raise ContinuationError(
            "tabulated models need a sampled Gamma curve for Laplace evaluation"
        )
    grid, vals = gamma_curve.grid, np.real(gamma_curve.values)
    tail = fit_inverse_square_tail(grid, vals)
    flat = np.atleast_1d(p)
    out = np.array(
        [continue_upper_half(gamma_curve, 1j * pp, tail_coeff=tail) for pp in flat]
    )
    return out.reshape(p.shape) if p.ndim else complex(out[0])


def laplace_impedance(model, mech, p, gamma_curve=None):
    """Z{p} = k/p + m p - m tau p^2 Gamma{p}, analytic in Re p > 0."""
    p = np.asarray(p, dtype=complex)
    g = _laplace_gamma(model, p, gamma_curve)
    out = mech.k / p + mech.m * p - mech.m * mech.tau * p**2 * g
    return out if out.ndim else complex(out)


def motional_impedance(model, mech, p, gamma_curve=None):
    """The vacuum term -chi{p}/p alone; not passive near p = 0."""
    p = np.asarray(p, dtype=complex)
    out = -mech.m * mech.tau * p**2 * _laplace_gamma(model, p, gamma_curve)
    return out if out.ndim else complex(out)


@dataclass(frozen=True)
class Rectangle:
    """Contour bounds in Re p > 0: [re_min, re_max] x [-im_max, im_max]."""

    re_min: float
    re_max: float
    im_max: float

    def __post_init__(self):
        if not (0 < self.re_min < self.re_max) or self.im_max <= 0:
            raise ValueError("contour must sit strictly inside Re p > 0")


def default_contour(mech, omega_c=None, delta=1e-6):
    """Rectangle wide enough for the runaway pole and the cutoff scale."""
    extent = 10.0
    if mech.tau > 0:
        extent = max(extent, 10.0 / mech.tau)
    if omega_c is not None and np.isfinite(omega_c):
        extent = max(extent, 10.0 * omega_c)
    if mech.k > 0:
        extent = max(extent, 10.0 * mech.omega0)
    return Rectangle(re_min=delta, re_max=extent, im_max=extent)


def _signed_log_points(extent, floor, n):
    mags = np.geomspace(floor, extent, n)
    return np.concatenate([-mags[::-1], [0.0], mags])


def _contour_path(rect, n_edge):
    lo, hi, p_im = rect.re_min, rect.re_max, rect.im_max
    res = np.geomspace(lo, hi, n_edge)
    ims = _signed_log_points(p_im, min(lo, p_im * 1e-9), n_edge // 2)
    bottom = res + 1j * (-p_im)
    right = hi + 1j * ims
    top = res[::-1] + 1j * p_im
    left = lo + 1j * ims[::-1]
    path = np.concatenate([bottom, right[1:], top[1:], left[1:]])
    if path[0] != path[-1]:
        path = np.concatenate([path, [path[0]]])
    return path


def _wrap_phase(d):
    return (d + np.pi) % (2.0 * np.pi) - np.pi


def count_rhp_zeros(model, mech, contour=None, gamma_curve=None,
                    n_edge=128, max_rounds=40, modulus_rtol=1e-9):
    """Zeros of Z{p} inside a rectangle in Re p > 0 (argument principle).

    The contour is sampled adaptively until consecutive phase steps stay
    below pi/2; a minimum-modulus check guards against zeros sitting on
    the contour, raising ContourError with a suggestion to perturb it.
    """
    if contour is None:
        contour = default_contour(mech)

    def zf(pts):
        return np.atleast_1d(laplace_impedance(model, mech, pts, gamma_curve))

    pts = _contour_path(contour, n_edge)
    vals = zf(pts)
    for _ in range(max_rounds):
        dph = _wrap_phase(np.diff(np.angle(vals)))
        bad = np.abs(dph) >= 0.5 * np.pi
        if not bad.any():
            break
        idx = np.nonzero(bad)[0]
        mids = 0.5 * (pts[idx] + pts[idx + 1])
        pts = np.insert(pts, idx + 1, mids)
        vals = np.insert(vals, idx + 1, zf(mids))
    else:
        raise ContourError("could not resolve phase steps below pi/2")

    scale = mech.m * np.abs(pts) + mech.k / np.maximum(np.abs(pts), 1e-300)
    if np.min(np.abs(vals) / scale) < modulus_rtol:
        raise ContourError(
            "impedance modulus nearly vanishes on the contour; "
            "a zero may sit on it -- perturb the rectangle"
        )
    dph = _wrap_phase(np.diff(np.angle(vals)))
    turns = dph.sum() / (2.0 * np.pi)
    count = int(round(turns))
    if abs(turns - count) > 0.25:
        raise ContourError(f"winding {turns:.3f} is not close to an integer")
    return count


def refine_root(model, mech, seed, gamma_curve=None, rtol=1e-10, max_iter=100):
    """Polish a zero of Z{p} from a seed in Re p > 0 (secant iteration).

    Returns (root, residual) with |Z{root}| below rtol * m * |root|.
    Divergence out of the half plane or stagnation raises
    RootConvergenceError.
    """
    if np.real(seed) <= 0:
        raise ValueError("seed must have Re p > 0")

    def f(p):
        if np.real(p) <= 0:
            raise RootConvergenceError(f"iterate left Re p > 0 at {p}")
        return laplace_impedance(model, mech, complex(p), gamma_curve)

    root, resid = secant_root(f, complex(seed), tol=1e-14, max_iter=max_iter)
    if resid > rtol * mech.m * max(abs(root), 1e-30):
        raise RootConvergenceError(
            f"residual {resid:.3e} above tolerance at candidate {root}"
        )
    return root, resid


def default_probes(p_min=1e-3, p_max=1e3, n_mag=40, n_arg=25):
    """Log-polar probe set in Re p > 0: decades x openings of the half plane."""
    mags = np.geomspace(p_min, p_max, n_mag)
    args = np.linspace(-0.999 * np.pi / 2, 0.999 * np.pi / 2, n_arg)
    return (mags[:, None] * np.exp(1j * args[None, :])).ravel()


@dataclass(frozen=True)
class PassivityScan:
    passive: bool
    min_re: float
    min_re_scaled: float
    at_p: complex
    n_probes: int
    tol: float


def passivity_check(model, mech, probes=None, gamma_curve=None, tol=1e-9):
    """Scan Re Z{p} over a probe set; verdict min >= -tol * m|p| pointwise."""
    if probes is None:
        probes = default_probes()
    z = np.atleast_1d(laplace_impedance(model, mech, probes, gamma_curve))
    scale = mech.m * np.abs(probes)
    scaled = z.real / scale
    i = int(np.argmin(scaled))
    return PassivityScan(
        passive=bool(np.all(scaled >= -tol)),
        min_re=float(z.real[i]),
        min_re_scaled=float(scaled[i]),
        at_p=complex(probes[i]),
        n_probes=int(len(probes)),
        tol=tol,
    )


def spectral_impedance(model, mech, p, gamma_curve=None, mu=None, omega_max=1.0e3):
    """Z{p} from the passive spectral representation.

    Folds the nonnegative measure Z_R[rho] drho / (pi (1 + rho^2)) onto
    the positive axis, integrates a dense Gamma_R spline decade by decade,
    and closes with the fitted inverse-square tail and the k/p + p(m - mu)
    terms.  Models without a finite induced mass raise
    CutoffDivergenceError.
    """
    from .numerics import QuadratureSettings, adaptive_gauss_legendre, fit_power_law_slope

    if gamma_curve is None:
        gamma_curve = sample_gamma_real(model, omega_max=omega_max)
    grid, gvals = gamma_curve.grid, np.real(gamma_curve.values)
    top = grid >= grid[-1] / 10.0
    slope = fit_power_law_slope(grid[top], np.clip(gvals[top], 1e-300, None))
    if slope > -1.2:
        raise CutoffDivergenceError("spectral measure is not finite (no reflection cutoff)")
    if mu is None:
        mu = induced_mass(mech, reflection_cutoff(model, omega_max=grid[-1]))
    if mu > mech.m:
        raise ValueError("spectral representation requires mu <= m")

    from scipy.interpolate import CubicSpline

    spl = CubicSpline(grid, gvals)
    mt = mech.m * mech.tau
    p = complex(p)
    if p.real <= 0:
        raise ContinuationError("spectral representation defined for Re p > 0")

    def integrand(rho):
        return mt * rho**2 * spl(rho) / (p * p + rho * rho)

    settings = QuadratureSettings(abs_tol=1e-9 * max(1.0, abs(mu)), max_panels=8000)
    edges = [0.0, 1.0]
    while edges[-1] < grid[-1]:
        edges.append(min(edges[-1] * 10.0, grid[-1]))
    total = 0.0 + 0.0j
    for a, b in zip(edges[:-1], edges[1:]):
        seg, _ = adaptive_gauss_legendre(integrand, a, b, settings)
        total += seg
    c_tail = fit_inverse_square_tail(grid, gvals)
    L = grid[-1]
    total += mt * c_tail * (np.pi / 2.0 - np.arctan(L / p)) / p
    return (2.0 * p / np.pi) * total + mech.k / p + p * (mech.m - mu)


@dataclass(frozen=True)
class StabilityReport:
    model_kind: str
    tau_omega: float
    k_over_m: float
    omega_c: float
    mu_over_m: float
    rhp_zero_count: int
    roots: tuple
    passive: bool
    min_re_z: dict

    def to_json(self, path=None):
        def _num(x):
            return None if x is None or not np.isfinite(x) else float(x)

        doc = {
            "model": self.model_kind,
            "tau_omega": float(self.tau_omega),
            "k_over_m": float(self.k_over_m),
            "omega_C": _num(self.omega_c),
            "mu_over_m": _num(self.mu_over_m),
            "rhp_zero_count": int(self.rhp_zero_count),
            "roots": [
                {"re": float(r.real), "im": float(r.imag), "residual": float(res)}
                for r, res in self.roots
            ],
            "passive": bool(self.passive),
            "min_ReZ": self.min_re_z,
        }
        text = json.dumps(doc, indent=2) + "\n"
        if path is not None:
            with open(path, "w") as fh:
                fh.write(text)
        return text


def _real_axis_seeds(model, mech, p_max, gamma_curve=None, n=400):
    """Sign changes of the (real) impedance along the positive real axis."""
    ps = np.geomspace(1e-6, p_max, n)
    z = np.real(np.atleast_1d(laplace_impedance(model, mech, ps, gamma_curve)))
    idx = np.nonzero(np.diff(np.sign(z)) != 0)[0]
    seeds = []
    for i in idx:
        a, b = ps[i], ps[i + 1]
        fa = z[i]
        for _ in range(60):
            m = 0.5 * (a + b)
            fm = float(np.real(laplace_impedance(model, mech, m, gamma_curve)))
            if fa * fm <= 0:
                b = m
            else:
                a, fa = m, fm
        seeds.append(0.5 * (a + b))
    return seeds


def stability_report(model, mech, contour=None, gamma_curve=None,
                     probes=None, omega_max_cutoff=1.0e3):
    """Full stability/passivity summary for one configuration."""
    try:
        omega_c = reflection_cutoff(model, omega_max=omega_max_cutoff)
        mu = induced_mass(mech, omega_c)
    except CutoffDivergenceError:
        omega_c, mu = np.inf, np.inf
    if contour is None:
        contour = default_contour(mech, omega_c if np.isfinite(omega_c) else None)
    count = count_rhp_zeros(model, mech, contour, gamma_curve)
    roots = []
    if count > 0:
        if model.kind == PERFECT and mech.tau > 0:
            seeds = [0.8 / mech.tau]
        else:
            seeds = _real_axis_seeds(model, mech, contour.re_max, gamma_curve)
        for seed in seeds:
            try:
                roots.append(refine_root(model, mech, seed, gamma_curve))
            except RootConvergenceError:
                pass
    scan = passivity_check(model, mech, probes, gamma_curve)
    passive = scan.passive and count == 0
    return StabilityReport(
        model_kind=model.kind,
        tau_omega=mech.tau,
        k_over_m=mech.k / mech.m,
        omega_c=omega_c,
        mu_over_m=mu / mech.m if np.isfinite(mu) else np.inf,
        rhp_zero_count=count,
        roots=tuple(roots),
        passive=passive,
        min_re_z={
            "value": scan.min_re,
            "p_re": scan.at_p.real,
            "p_im": scan.at_p.imag,
        },
    )
