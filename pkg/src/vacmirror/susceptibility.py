"""Motional susceptibility of a scattering mirror.

The mean vacuum radiation-pressure force linear in the mirror displacement
is chi[w] q[w] with

    chi[w] = i m tau w^3 Gamma[w]

where Gamma is a dimensionless cutoff factor built from the scattering
amplitudes by a finite-band integral over pair frequencies,

    w^3 Gamma[w] = int_0^w 3 dw' (w - w') w' alpha[w - w', w'],
    alpha[w, w'] = 1 - s[w] s[w'] + r[w] r[w'].

Gamma == 1 for the perfect mirror, so chi reduces to the local
third-derivative force.  The integral is evaluated by adaptive
Gauss-Legendre on the unit interval; the integrand is smooth and the
endpoint weight (w - w') w' vanishes at both ends.

All functions are pure; sweeps over frequency grids are embarrassingly
parallel.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from . import scattering
from .errors import CutoffDivergenceError
from .numerics import (
    QuadratureSettings,
    adaptive_gauss_legendre,
    fit_inverse_square_tail,
    fit_power_law_slope,
)
from .scattering import reflectivity, transmissivity


@dataclass(frozen=True)
class MirrorMechanics:
    """Suspension parameters: mass m, spring constant k, coupling time tau.

    k = m w0^2 (w0 = 0 for a free mass).  tau is the vacuum coupling time;
    tau = 0 is the decoupled limit used by reduction tests.
    """

    m: float = 1.0
    k: float = 0.0
    tau: float = 1e-3

    def __post_init__(self):
        if self.m <= 0:
            raise ValueError("mass must be positive")
        if self.k < 0:
            raise ValueError("spring constant must be nonnegative")
        if self.tau < 0:
            raise ValueError("coupling time must be nonnegative")

    @property
    def omega0(self):
        return np.sqrt(self.k / self.m)


@dataclass(frozen=True)
class ResponseCurve:
    """Complex response samples on a nonnegative frequency grid.

    Negative frequencies follow from the Hermitian-real parity
    f[-w] = conj(f[w]); `__call__` applies it transparently through a
    cubic-spline interpolant.
    """

    grid: np.ndarray
    values: np.ndarray
    label: str = ""
    parity: str = "hermitian-real"
    _spline: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        grid = np.asarray(self.grid, dtype=float)
        values = np.asarray(self.values, dtype=complex)
        if grid.ndim != 1 or grid.size != values.size:
            raise ValueError("grid and values must be 1-d and the same length")
        if np.any(np.diff(grid) <= 0) or grid[0] < 0:
            raise ValueError("grid must be nonnegative and strictly increasing")
        if not np.all(np.isfinite(values)):
            raise ValueError("curve values must be finite")
        object.__setattr__(self, "grid", grid)
        object.__setattr__(self, "values", values)

    def _splines(self):
        if self._spline is None:
            from scipy.interpolate import CubicSpline

            object.__setattr__(
                self,
                "_spline",
                (CubicSpline(self.grid, self.values.real),
                 CubicSpline(self.grid, self.values.imag)),
            )
        return self._spline

    def __call__(self, w):
        re, im = self._splines()
        w = np.asarray(w, dtype=float)
        aw = np.abs(w)
        if np.any(aw < self.grid[0]) or np.any(aw > self.grid[-1]):
            from .errors import FrequencyRangeError

            raise FrequencyRangeError(f"|w| outside sampled range of {self.label or 'curve'}")
        out = re(aw) + 1j * im(aw)
        out = np.where(w >= 0, out, np.conj(out))
        return out if out.ndim else complex(out)


def alpha(model, w1, w2):
    """Symmetric two-frequency combination 1 - s s' + r r'."""
    return (
        1.0
        - transmissivity(model, w1) * transmissivity(model, w2)
        + reflectivity(model, w1) * reflectivity(model, w2)
    )


def beta(model, w1, w2):
    """Antisymmetric two-frequency combination s r' - r s'."""
    return (
        transmissivity(model, w1) * reflectivity(model, w2)
        - reflectivity(model, w1) * transmissivity(model, w2)
    )


def gamma(model, w, settings=None, full_output=False):
    """Cutoff factor Gamma[w] by adaptive quadrature, real w.

    Both signs of w are accepted (the integral itself delivers
    Gamma[-w] = conj Gamma[w]); the regular limit Gamma[0] = r[0]^2 is
    returned directly at w = 0.
    """
    w = float(w)
    if w == 0.0:
        g0 = complex(reflectivity(model, 0.0)) ** 2
        return (g0, 0.0) if full_output else g0

    def integrand(u):
        return 3.0 * u * (1.0 - u) * alpha(model, w * (1.0 - u), w * u)

    value, err = adaptive_gauss_legendre(integrand, 0.0, 1.0, settings)
    return (value, err) if full_output else value


def lorentzian_gamma(w, omega_scale=1.0):
    """Closed-form Gamma for the single-pole reflectivity model.

    Valid for real w and for complex w away from the logarithmic cut,
    which lies on the negative imaginary axis below -i*omega_scale.  Near
    w = 0 a series with terms 6 x^n / ((n+2)(n+3)), x = i w / Omega, is
    used; it sums to 1 at w = 0.
    """
    from .errors import BranchCutError

    w = np.asarray(w, dtype=complex)
    x = 1j * w / omega_scale
    arg = 1.0 - x
    if np.any((np.abs(np.imag(arg)) < 1e-14) & (np.real(arg) < 1e-12)):
        raise BranchCutError("1 - i w / Omega on the logarithm branch cut")
    out = np.empty_like(x)
    small = np.abs(x) < 0.25
    if small.any():
        xs = x[small]
        acc = np.zeros_like(xs)
        term = np.ones_like(xs)
        for n in range(40):
            acc += term / ((n + 2) * (n + 3))
            term = term * xs
        out[small] = 6.0 * acc
    if (~small).any():
        xl = x[~small]
        f = -xl + 0.5 * xl * xl - (1.0 - xl) * np.log(1.0 - xl)
        out[~small] = -6.0 * f / xl**3
    return out if out.ndim else complex(out)


def susceptibility(model, mech, w, settings=None):
    """Motional susceptibility chi[w] = i m tau w^3 Gamma[w] for real w."""
    w = float(w)
    if w == 0.0:
        return 0.0 + 0.0j
    return 1j * mech.m * mech.tau * w**3 * gamma(model, w, settings)


def induced_mass(mech, omega_c):
    """High-frequency mass mu = m omega_C tau induced by the coupling."""
    if not np.isfinite(omega_c) or omega_c < 0:
        raise ValueError("omega_c must be finite and nonnegative")
    return mech.m * omega_c * mech.tau


@dataclass(frozen=True)
class CutoffDiagnostics:
    omega_c: float
    tail_fraction: float
    tail_coeff: float
    decay_slope: float


def reflection_cutoff(model, omega_max=1.0e3, settings=None, full_output=False):
    """Reflection cutoff omega_C = (1/pi) int_-inf^inf Gamma_R dw.

    Folded to (2/pi) int_0^inf by parity.  The grid part is integrated by
    adaptive quadrature decade by decade up to ``omega_max``; beyond that
    a fitted c/w^2 tail is added analytically.  Raises
    CutoffDivergenceError when Gamma_R shows no integrable decay (the
    perfect mirror: Gamma_R == 1).
    """
    settings = settings or QuadratureSettings(abs_tol=1e-8)

    def gamma_r(ws):
        return np.array([gamma(model, float(x), settings).real for x in np.atleast_1d(ws)])

    probe = np.logspace(np.log10(omega_max) - 1.0, np.log10(omega_max), 48)
    probe_vals = gamma_r(probe)
    slope = fit_power_law_slope(probe, np.clip(probe_vals, 1e-300, None))
    if slope > -1.2:
        raise CutoffDivergenceError(
            f"Gamma_R decays like w^{slope:.2f} on the top decade; "
            "cutoff integral does not converge"
        )
    edges = [0.0, 1.0]
    while edges[-1] < omega_max:
        edges.append(min(edges[-1] * 10.0, omega_max))
    total = 0.0
    for a, b in zip(edges[:-1], edges[1:]):
        seg, _ = adaptive_gauss_legendre(gamma_r, a, b, settings)
        total += seg.real
    c = fit_inverse_square_tail(probe, probe_vals, decades=1.0)
    tail = c / omega_max
    omega_c = (2.0 / np.pi) * (total + tail)
    if full_output:
        return omega_c, CutoffDiagnostics(
            omega_c=omega_c,
            tail_fraction=tail / (total + tail),
            tail_coeff=c,
            decay_slope=slope,
        )
    return omega_c


@dataclass(frozen=True)
class SusceptibilityResult:
    """Gamma and chi sampled on a frequency grid, with cutoff summary."""

    gamma: ResponseCurve
    chi: ResponseCurve
    omega_c: float
    mu: float
    quad_errors: np.ndarray
    cutoff_diagnostics: CutoffDiagnostics = None

    @property
    def cutoff_divergent(self):
        return not np.isfinite(self.omega_c)

    def to_csv(self, path):
        buf = io.StringIO()
        buf.write("omega,gamma_re,gamma_im,chi_re,chi_im,quad_err\n")
        for w, g, x, e in zip(
            self.gamma.grid, self.gamma.values, self.chi.values, self.quad_errors
        ):
            buf.write(
                f"{w:.11e},{g.real:.11e},{g.imag:.11e},{x.real:.11e},{x.imag:.11e},{e:.11e}\n"
            )
        with open(path, "w") as fh:
            fh.write(buf.getvalue())


def compute_susceptibility(model, mech, grid, settings=None, omega_max_cutoff=1.0e3):
    """Sweep Gamma and chi over a grid and compute the cutoff summary.

    The cutoff integral is attempted and, for models without transparency
    (perfect mirror), the divergence is recorded as omega_c = inf rather
    than raised, so pipelines can still report the curve.
    """
    grid = np.asarray(grid, dtype=float)
    vals = np.empty(grid.size, dtype=complex)
    errs = np.empty(grid.size)
    for i, w in enumerate(grid):
        vals[i], errs[i] = gamma(model, float(w), settings, full_output=True)
    chi_vals = 1j * mech.m * mech.tau * grid**3 * vals
    diag = None
    try:
        omega_c, diag = reflection_cutoff(
            model, omega_max=omega_max_cutoff, full_output=True
        )
        mu = induced_mass(mech, omega_c)
    except CutoffDivergenceError:
        omega_c, mu = np.inf, np.inf
    return SusceptibilityResult(
        gamma=ResponseCurve(grid, vals, label="gamma"),
        chi=ResponseCurve(grid, chi_vals, label="chi"),
        omega_c=omega_c,
        mu=mu,
        quad_errors=errs,
        cutoff_diagnostics=diag,
    )


def lorentzian_reference_curve(grid, omega_scale=1.0):
    """Closed-form Gamma curve, the oracle mirror of the quadrature path."""
    grid = np.asarray(grid, dtype=float)
    return ResponseCurve(grid, lorentzian_gamma(grid, omega_scale), label="gamma")
