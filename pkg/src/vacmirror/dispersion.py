"""Dispersion relations and time-domain kernels.

The cutoff factor Gamma is causal: its real and imaginary parts on the
real axis are a Kramers-Kronig pair, and the same Cauchy integral
continues it into Im w > 0.  This module provides

* the principal-value reconstruction of Gamma_I from sampled Gamma_R,
* the off-axis Cauchy continuation,
* a least-squares estimate of the high-frequency tail  Gamma ~ w_C/(-i w),
* construction of the regularized time kernel kappa(t), the inverse
  transform of chi[w] + mu w^2 used by the memory integrator,
* a discretization cross-check of the linear-response identity
  chi(t) - chi(-t) = 2 m tau Gamma_R'''(t).

Transforms follow the package sign convention (see numerics module); all
routines are pure.
"""

import io
from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuationError, FitError, FrequencyRangeError, RegularizationError
from .numerics import (
    cauchy_upper_half,
    fit_inverse_square_tail,
    kernel_to_spectrum,
    pv_hilbert_even,
    spectrum_to_kernel,
)
from .susceptibility import ResponseCurve, gamma


def _real_samples(curve):
    return curve.grid, np.real(curve.values)


def kk_reconstruct(gamma_r, w, tail_coeff=None):
    """Full Gamma[w] from samples of Gamma_R via the dispersion relation.

    ``gamma_r`` is a ResponseCurve (imaginary parts, if any, are ignored).
    The real part of the result is the sampled Gamma_R at w; the imaginary
    part is the principal-value transform with singularity subtraction
    plus a fitted c/w^2 tail beyond the grid.
    """
    grid, vals = _real_samples(gamma_r)
    if tail_coeff is None:
        tail_coeff = fit_inverse_square_tail(grid, vals)
    w = float(w)
    if w == 0.0 and grid[0] == 0.0:
        return complex(vals[0], 0.0)  # odd part vanishes at the center
    sign = 1.0 if w >= 0 else -1.0
    aw = abs(w)
    if not (grid[0] < aw < grid[-1]):
        raise FrequencyRangeError(f"|w|={aw} outside grid interior")
    im = pv_hilbert_even(grid, vals, aw, tail_coeff=tail_coeff)
    re = float(np.interp(aw, grid, vals))
    return complex(re, sign * im)


def continue_upper_half(gamma_r, w, tail_coeff=None):
    """Cauchy continuation of Gamma into Im w > 0 from Gamma_R samples."""
    if np.imag(w) <= 0:
        raise ContinuationError("continuation defined for Im w > 0 only")
    grid, vals = _real_samples(gamma_r)
    if tail_coeff is None:
        tail_coeff = fit_inverse_square_tail(grid, vals)
    return cauchy_upper_half(grid, vals, complex(w), tail_coeff=tail_coeff)


@dataclass(frozen=True)
class TailFit:
    omega_c: float
    residual: float
    has_cutoff: bool


def fit_tail_cutoff(curve):
    """Least-squares w_C/(-i w) fit to the top decade of a Gamma curve.

    Requires the curve to extend at least one decade beyond the knee
    |Gamma| = 1/2; a curve with no knee at all (perfect mirror) is fitted
    anyway and flagged has_cutoff=False with its O(1) residual.
    """
    grid, vals = curve.grid, curve.values
    absg = np.abs(vals)
    below = np.nonzero(absg < 0.5)[0]
    has_knee = below.size > 0
    if has_knee:
        knee = grid[below[0]]
        if grid[-1] < 10.0 * knee:
            raise FitError(
                f"curve ends at {grid[-1]:.3g}, less than a decade past the knee {knee:.3g}"
            )
    window = grid >= grid[-1] / 10.0
    wg = grid[window]
    gv = vals[window]
    # model i c / w with real c: LSQ over the window
    c = float(np.sum(np.imag(gv) / wg) / np.sum(1.0 / wg**2))
    resid = float(
        np.sqrt(np.sum(np.abs(gv - 1j * c / wg) ** 2) / np.sum(np.abs(gv) ** 2))
    )
    return TailFit(omega_c=c, residual=resid, has_cutoff=has_knee and resid < 0.5)


@dataclass(frozen=True)
class TimeKernel:
    """Regularized position-memory kernel kappa(t) on [0, T).

    kappa is the band-limited inverse transform of chi[w] + mu w^2.  The
    underlying transform is kept for the full period so that the memory
    integrator can recover the exact band spectrum; ``values`` exposes the
    causal window.  Band limitation smears the t = 0 core over a guard
    window of a few hundred samples; ``causality_residual`` measures the
    anticausal content beyond that guard relative to the kernel peak,
    ``causality_residual_raw`` includes the smeared core.
    """

    times: np.ndarray
    values: np.ndarray
    mu_subtracted: float
    dt: float
    omega_max: float
    causality_residual: float
    causality_residual_raw: float
    guard_samples: int
    taper_fraction: float
    n_fft: int
    _full: np.ndarray = field(repr=False, compare=False, default=None)

    def band_spectrum(self):
        """Spectrum of the full-period kernel at the rfft bin frequencies."""
        return kernel_to_spectrum(self._full, self.dt)

    def bin_frequencies(self):
        return np.fft.rfftfreq(self.n_fft, d=self.dt) * 2.0 * np.pi

    def to_csv(self, path):
        buf = io.StringIO()
        buf.write(f"# mu_subtracted = {self.mu_subtracted:.11e}\n")
        buf.write(f"# dt = {self.dt:.11e}\n")
        buf.write(f"# T = {self.times[-1] + self.dt:.11e}\n")
        buf.write(f"# omega_max = {self.omega_max:.11e}\n")
        buf.write("t,kappa\n")
        for t, v in zip(self.times, self.values):
            buf.write(f"{t:.11e},{v:.11e}\n")
        with open(path, "w") as fh:
            fh.write(buf.getvalue())


def _next_pow2(n):
    p = 1
    while p < n:
        p *= 2
    return p


def build_time_kernel(chi_curve, mu, window, dt, omega_max=None,
                      taper_fraction=0.0, guard_samples=1024):
    """Inverse-transform chi[w] + mu w^2 into the time kernel kappa(t).

    ``chi_curve`` must be sampled up to the transform band edge
    ``omega_max`` (default: the lesser of pi/dt and the curve extent).
    The subtraction must leave a decaying remainder: if |chi + mu w^2|/w^2
    fails to fall across the top decade of the band, the requested mass is
    inconsistent and RegularizationError is raised.  An optional raised-
    cosine taper over the top ``taper_fraction`` of the band is applied
    only on request and recorded, never silently.
    """
    nyquist = np.pi / dt
    if omega_max is None:
        omega_max = min(nyquist, chi_curve.grid[-1])
    if omega_max > nyquist + 1e-12:
        raise ValueError("omega_max beyond the Nyquist band of dt")
    if omega_max > chi_curve.grid[-1] + 1e-12:
        raise FrequencyRangeError("chi curve does not reach the requested band edge")
    steps = int(round(window / dt))
    if steps < 2:
        raise ValueError("kernel window shorter than two steps")
    n_fft = _next_pow2(max(2 * steps, 4096))

    freqs = np.fft.rfftfreq(n_fft, d=dt) * 2.0 * np.pi
    in_band = freqs <= omega_max
    spectrum = np.zeros(freqs.size, dtype=complex)
    wb = freqs[in_band]
    spectrum[in_band] = chi_curve(np.minimum(wb, chi_curve.grid[-1])) + mu * wb**2

    # mass consistency: the regularized spectrum must decay relative to w^2
    band = wb[wb > 0]
    ratio = np.abs(spectrum[in_band][wb > 0]) / band**2
    top = band >= band[-1] / 10.0**0.5
    mid = (band >= band[-1] / 10.0) & ~top
    if top.sum() >= 2 and mid.sum() >= 2:
        if np.median(ratio[top]) > 0.5 * np.median(ratio[mid]):
            raise RegularizationError(
                "chi + mu w^2 does not decay; mass subtraction inconsistent"
            )
    if taper_fraction > 0.0:
        start = omega_max * (1.0 - taper_fraction)
        ramp = (freqs >= start) & in_band
        phase = (freqs[ramp] - start) / (omega_max - start)
        spectrum[ramp] *= 0.5 * (1.0 + np.cos(np.pi * phase))

    full = spectrum_to_kernel(spectrum, n_fft, dt)
    peak = float(np.max(np.abs(full)))
    anti = np.abs(full[n_fft // 2:][::-1])  # anti[j] = |kappa(-(j+1) dt)|
    raw = float(anti.max() / peak) if peak > 0 else 0.0
    guarded = (
        float(anti[guard_samples:].max() / peak)
        if peak > 0 and anti.size > guard_samples
        else 0.0
    )
    times = np.arange(steps) * dt
    return TimeKernel(
        times=times,
        values=full[:steps].copy(),
        mu_subtracted=float(mu),
        dt=float(dt),
        omega_max=float(omega_max),
        causality_residual=guarded,
        causality_residual_raw=raw,
        guard_samples=int(guard_samples),
        taper_fraction=float(taper_fraction),
        n_fft=n_fft,
        _full=full,
    )


def acceleration_weights(kernel):
    """Equivalent acceleration-history weights of a position kernel.

    Two integrations by parts turn the position convolution into
    mu * a(t) plus a convolution of the acceleration history with
    h(t), the inverse transform of -(chi + mu w^2)/w^2.  For a mirror
    at rest in the far past both forms are identical; h is the one
    with an integrable core, so the integrator uses it.
    """
    spectrum = kernel.band_spectrum()
    freqs = kernel.bin_frequencies()
    h_spec = np.empty_like(spectrum)
    h_spec[0] = -kernel.mu_subtracted
    h_spec[1:] = -spectrum[1:] / freqs[1:] ** 2
    return spectrum_to_kernel(h_spec, kernel.n_fft, kernel.dt)


@dataclass(frozen=True)
class ConsistencyReport:
    defect: float
    n_fft: int
    dt: float
    omega_band: float


def consistency_check(model, mech, n_fft=2048, dt=0.1):
    """Discrete check of chi(t) - chi(-t) = 2 m tau Gamma_R'''(t).

    The left side antisymmetrizes the inverse transform of the full
    quadrature chi; the right side spectrally differentiates a Gamma_R
    curve sampled independently on a half-shifted grid and resampled.
    The normalized maximum discrepancy measures the joint quadrature,
    interpolation and transform consistency; it decreases under grid
    refinement.
    """
    from scipy.interpolate import CubicSpline

    freqs = np.fft.rfftfreq(n_fft, d=dt) * 2.0 * np.pi
    mt = mech.m * mech.tau
    if mt == 0.0:
        return ConsistencyReport(defect=0.0, n_fft=n_fft, dt=dt, omega_band=freqs[-1])

    gam = np.empty(freqs.size, dtype=complex)
    for i, w in enumerate(freqs):
        gam[i] = gamma(model, float(w))
    chi_spec = 1j * mt * freqs**3 * gam
    chi_t = spectrum_to_kernel(chi_spec, n_fft, dt)
    j = np.arange(1, n_fft // 2)
    lhs = chi_t[j] - chi_t[n_fft - j]

    half = 0.5 * (freqs[1] - freqs[0])
    shifted = freqs + half
    gam_s = np.empty(shifted.size)
    for i, w in enumerate(shifted):
        gam_s[i] = gamma(model, float(w)).real
    nodes = np.concatenate([[freqs[0]], shifted])
    samples = np.concatenate([[gamma(model, 0.0).real], gam_s])
    gam_r = CubicSpline(nodes, samples)(freqs)
    rhs_spec = 2.0 * mt * 1j * freqs**3 * gam_r
    rhs_t = spectrum_to_kernel(rhs_spec, n_fft, dt)
    rhs = rhs_t[j]

    scale = float(np.max(np.abs(rhs)))
    if scale == 0.0:
        return ConsistencyReport(defect=float(np.max(np.abs(lhs))), n_fft=n_fft, dt=dt,
                                 omega_band=freqs[-1])
    defect = float(np.max(np.abs(lhs - rhs)) / scale)
    return ConsistencyReport(defect=defect, n_fft=n_fft, dt=dt, omega_band=freqs[-1])
