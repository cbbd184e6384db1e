"""Mirror scattering models.

A mirror is described by a complex reflectivity r[w] and transmissivity
s[w] on the real frequency axis.  Three kinds are supported:

* ``perfect``    -- r = -1, s = 0 at every frequency (no cutoff),
* ``lorentzian`` -- r[w] = -1 / (1 - i w / Omega), s = 1 + r,
* ``tabulated``  -- monotone-cubic interpolation of sampled (w, r, s).

Real-axis evaluations obey r[-w] = conj(r[w]) so the time-domain kernels
stay real.  The Lorentzian continues analytically into Im w >= 0; the
perfect mirror is constant everywhere; tabulated models accept only real
frequencies inside their table range.

Models are immutable after construction and evaluation is pure, so they
can be shared freely across workers.
"""

from dataclasses import dataclass, field

import numpy as np

from .errors import ContinuationError, FrequencyRangeError
from .numerics import fit_inverse_square_tail, fit_power_law_slope, pv_hilbert_even

PERFECT = "perfect"
LORENTZIAN = "lorentzian"
TABULATED = "tabulated"


@dataclass(frozen=True)
class UnitSystem:
    """Internal working units: the reflectivity scale and mirror mass are 1.

    The single physical knob is the dimensionless coupling tau_omega,
    the vacuum response time expressed in units of 1/Omega.  Frequencies
    are reported in Omega, times in 1/Omega, masses in m.
    """

    tau_omega: float
    omega_unit: float = 1.0
    mass_unit: float = 1.0

    def __post_init__(self):
        if self.tau_omega <= 0:
            raise ValueError("tau_omega must be positive")


@dataclass(frozen=True)
class MirrorModel:
    kind: str
    omega_scale: float = 1.0
    table: tuple = None  # (w, r, s) arrays for tabulated models
    _interp: tuple = field(default=None, repr=False, compare=False)

    def __post_init__(self):
        if self.kind not in (PERFECT, LORENTZIAN, TABULATED):
            raise ValueError(f"unknown mirror kind {self.kind!r}")
        if self.kind == LORENTZIAN and self.omega_scale <= 0:
            raise ValueError("lorentzian scale must be positive")
        if self.kind == TABULATED:
            if self.table is None:
                raise ValueError("tabulated model needs a table")
            from scipy.interpolate import PchipInterpolator

            w, r, s = self.table
            w = np.asarray(w, dtype=float)
            if w.ndim != 1 or w.size < 4:
                raise ValueError("table needs at least 4 samples")
            if np.any(np.diff(w) <= 0) or w[0] < 0:
                raise ValueError("table grid must be nonnegative and strictly increasing")
            interp = tuple(
                PchipInterpolator(w, comp, extrapolate=False)
                for comp in (np.real(r), np.imag(r), np.real(s), np.imag(s))
            )
            object.__setattr__(self, "_interp", interp)

    @property
    def omega_range(self):
        if self.kind == TABULATED:
            w = self.table[0]
            return float(w[0]), float(w[-1])
        return 0.0, np.inf


def perfect_mirror():
    return MirrorModel(kind=PERFECT)


def lorentzian_mirror(omega_scale=1.0):
    return MirrorModel(kind=LORENTZIAN, omega_scale=omega_scale)


def tabulated_mirror(w, r, s):
    w = np.asarray(w, dtype=float)
    r = np.asarray(r, dtype=complex)
    s = np.asarray(s, dtype=complex)
    return MirrorModel(kind=TABULATED, table=(w, r, s))


def load_table(path):
    """Read a 5-column whitespace table: w, Re r, Im r, Re s, Im s."""
    data = np.loadtxt(path, comments="#", ndmin=2)
    if data.shape[1] != 5:
        raise ValueError(f"{path}: expected 5 columns, got {data.shape[1]}")
    return tabulated_mirror(data[:, 0], data[:, 1] + 1j * data[:, 2], data[:, 3] + 1j * data[:, 4])


def save_table(path, w, r, s):
    data = np.column_stack([w, np.real(r), np.imag(r), np.real(s), np.imag(s)])
    np.savetxt(path, data, fmt="%.15e", header="omega re_r im_r re_s im_s")


def _tabulated_eval(model, w, parts):
    w = np.asarray(w)
    if np.iscomplexobj(w) and np.any(np.abs(np.imag(w)) > 0):
        raise ContinuationError("tabulated models support only real frequencies")
    wr = np.real(w).astype(float)
    lo, hi = model.omega_range
    aw = np.abs(wr)
    if np.any(aw < lo) or np.any(aw > hi):
        raise FrequencyRangeError(
            f"frequency magnitude outside table range [{lo}, {hi}]"
        )
    re_i, im_i = parts
    out = re_i(aw) + 1j * im_i(aw)
    # reality of the time-domain kernel: f(-w) = conj(f(w))
    out = np.where(wr >= 0, out, np.conj(out))
    return out if out.ndim else complex(out)


def reflectivity(model, w):
    """Reflection amplitude r[w]; accepts scalars or arrays.

    Perfect and Lorentzian mirrors accept complex w with Im w >= 0 (the
    causal continuation region); tabulated mirrors are real-axis only.
    """
    if model.kind == PERFECT:
        w = np.asarray(w)
        out = np.full(w.shape, -1.0 + 0.0j)
        return out if out.ndim else complex(out)
    if model.kind == LORENTZIAN:
        w = np.asarray(w, dtype=complex)
        if np.any(np.imag(w) < -1e-14 * np.maximum(1.0, np.abs(w))):
            raise ContinuationError("reflectivity continued only into Im w >= 0")
        out = -1.0 / (1.0 - 1j * w / model.omega_scale)
        return out if out.ndim else complex(out)
    return _tabulated_eval(model, w, model._interp[0:2])


def transmissivity(model, w):
    """Transmission amplitude s[w]; same domain rules as reflectivity."""
    if model.kind == PERFECT:
        w = np.asarray(w)
        out = np.zeros(w.shape, dtype=complex)
        return out if out.ndim else complex(out)
    if model.kind == LORENTZIAN:
        return 1.0 + reflectivity(model, w)
    return _tabulated_eval(model, w, model._interp[2:4])


@dataclass(frozen=True)
class ModelValidation:
    """Defect report from validate_model; thresholds are the caller's."""

    unitarity_defect: float
    transparency_tail: float
    transparency_slope: float
    causality_defect: float
    has_cutoff: bool


def validate_model(model, grid):
    """Check unitarity, transparency and causality of a model on a grid.

    Reports the worst | |r|^2 + |s|^2 - 1 |, the largest |r| over the top
    decade of the grid (with a fitted decay slope), and the residual of a
    Kramers-Kronig reconstruction of Im r from Re r.  Nothing is raised;
    defects are numbers for the caller to judge.
    """
    grid = np.asarray(grid, dtype=float)
    if grid.size == 0 or np.any(np.diff(grid) <= 0) or grid[0] <= 0:
        raise ValueError("validation grid must be nonempty, positive, increasing")
    r = np.atleast_1d(reflectivity(model, grid))
    s = np.atleast_1d(transmissivity(model, grid))
    unitarity = float(np.max(np.abs(np.abs(r) ** 2 + np.abs(s) ** 2 - 1.0)))

    top = grid >= grid[-1] / 10.0
    tail = float(np.max(np.abs(r[top])))
    try:
        slope = fit_power_law_slope(grid, np.abs(r))
    except Exception:
        slope = 0.0
    # |r| must die at least like 1/w for the cutoff integrals to exist
    has_cutoff = tail < 0.5 and slope < -0.9

    re_r = np.real(r)
    im_r = np.imag(r)
    try:
        c_tail = fit_inverse_square_tail(grid, re_r)
    except Exception:
        c_tail = 0.0
    interior = grid[(grid > grid[0] * 4) & (grid < grid[-1] / 4)]
    probes = interior[:: max(1, interior.size // 64)]
    defects = [
        abs(pv_hilbert_even(grid, re_r, w, tail_coeff=c_tail) - np.interp(w, grid, im_r))
        for w in probes
    ]
    causality = float(np.max(defects)) if defects else np.inf

    return ModelValidation(
        unitarity_defect=unitarity,
        transparency_tail=tail,
        transparency_slope=slope,
        causality_defect=causality,
        has_cutoff=has_cutoff,
    )
