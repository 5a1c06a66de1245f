"""Gaussian random sections S_{f,p} = sum_j eta_j lambda_j S_j and their kernels.

Random numbers
--------------
Every trial owns an independent stream, so a sample depends only on
(master_seed, trial_index) and never on batching or scheduling:

* trial state = splitmix64(master_seed XOR trial_index), i.e. add the golden
  gamma 0x9E3779B97F4A7C15 then apply the finaliser
  (x ^ x>>30) * 0xBF58476D1CE4E5B9, (x ^ x>>27) * 0x94D049BB133111EB, x ^ x>>31;
  a zero state is replaced by the golden gamma;
* the stream is xorshift64* (shifts 12, 25, 27; multiplier 0x2545F4914F6CDD1D);
* uniforms on (0, 1] are ((x >> 11) + 1) * 2^-53;
* a standard complex Gaussian eta = sqrt(-log u1) * exp(2 pi i u2), which is
  Box-Muller's (xi1 + i xi2)/sqrt(2), so E|eta|^2 = 1 and E[eta^2] = 0.

The stream kernel is compiled with numba; uint64 arithmetic wraps modulo 2^64.
"""

from __future__ import annotations

import csv
import io
import math
from dataclasses import dataclass, field

import numba
import numpy as np

from .basis import P_MAX, log_basis_weight
from .geometry import ChartPoint, SQRT_PI, fs_distance, mobius_translate
from .spectra import ToeplitzSpectrum, compute_spectrum
from .symbols import Symbol

MASK64 = (1 << 64) - 1
GOLDEN = 0x9E3779B97F4A7C15
MIX1 = 0xBF58476D1CE4E5B9
MIX2 = 0x94D049BB133111EB
XS_MULT = 0x2545F4914F6CDD1D
TRUNCATION_THRESHOLD = 1e-300

_U = np.uint64


def splitmix64(x: np.ndarray) -> np.ndarray:
    x = np.asarray(x, dtype=np.uint64) + _U(GOLDEN)
    x = (x ^ (x >> _U(30))) * _U(MIX1)
    x = (x ^ (x >> _U(27))) * _U(MIX2)
    return x ^ (x >> _U(31))


def trial_states(master_seed: int, trial_indices) -> np.ndarray:
    idx = np.atleast_1d(np.asarray(trial_indices, dtype=np.uint64))
    state = splitmix64(_U(int(master_seed) & MASK64) ^ idx)
    state[state == 0] = _U(GOLDEN)
    return state


@numba.njit(cache=True)
def _xorshift_fill(state, out):
    """Advance each trial's xorshift64* stream, writing uniforms on (0, 1] row-wise."""
    mult = np.uint64(XS_MULT)
    s12, s25, s27, s11 = np.uint64(12), np.uint64(25), np.uint64(27), np.uint64(11)
    one = np.uint64(1)
    for t in range(state.shape[0]):
        x = state[t]
        for k in range(out.shape[1]):
            x ^= x >> s12
            x ^= x << s25
            x ^= x >> s27
            out[t, k] = np.float64(((x * mult) >> s11) + one) * 1.1102230246251565e-16
        state[t] = x


class TrialStreams:
    """xorshift64* streams, one per trial."""

    def __init__(self, master_seed: int, trial_indices):
        self.master_seed = int(master_seed) & MASK64
        self.trial_indices = np.atleast_1d(np.asarray(trial_indices, dtype=np.int64))
        self.state = trial_states(self.master_seed, self.trial_indices)

    def __len__(self):
        return self.state.size

    def uniform(self, n: int = 1) -> np.ndarray:
        """Array (trials, n) of uniforms on (0, 1], consumed in order from each stream."""
        out = np.empty((len(self), n))
        _xorshift_fill(self.state, out)
        return out

    def complex_normal(self, n: int) -> np.ndarray:
        """Array (trials, n) of i.i.d. standard complex Gaussians (uniform pairs u1, u2)."""
        u = self.uniform(2 * n)
        u1, u2 = u[:, 0::2], u[:, 1::2]
        return np.sqrt(-np.log(u1)) * np.exp(2j * np.pi * u2)


def sample_complex_gaussian(stream: TrialStreams) -> complex | np.ndarray:
    """Draw one standard complex Gaussian per trial of ``stream``."""
    eta = stream.complex_normal(1)[:, 0]
    return complex(eta[0]) if eta.size == 1 else eta


@dataclass
class SectionSample:
    """Coefficients of one realisation, stored rescaled by 2^-scale_exponent.

    The true coefficients are ``coeffs * 2**scale_exponent``; the rescaling is
    by a power of two, so the zero set is exactly unchanged.
    """

    p: int
    coeffs: np.ndarray
    scale_exponent: int
    seed: int
    trial_index: int
    truncated_tail: bool = False
    resampled: int = 0
    truncation_threshold: float = TRUNCATION_THRESHOLD
    meta: dict = field(default_factory=dict)

    @property
    def true_coeffs(self) -> np.ndarray:
        return np.ldexp(self.coeffs.real, self.scale_exponent) + 1j * np.ldexp(self.coeffs.imag, self.scale_exponent)


@dataclass
class SampleBatch:
    """Several samples of one spectrum, as arrays indexed by trial."""

    p: int
    coeffs: np.ndarray  # (trials, p + 1)
    scale_exponents: np.ndarray
    seed: int
    trial_indices: np.ndarray
    truncated_tail: np.ndarray
    resampled: np.ndarray

    def __len__(self):
        return self.coeffs.shape[0]

    def sample(self, i: int) -> SectionSample:
        return SectionSample(
            self.p, self.coeffs[i].copy(), int(self.scale_exponents[i]), self.seed,
            int(self.trial_indices[i]), bool(self.truncated_tail[i]), int(self.resampled[i]),
        )

    def to_csv(self) -> str:
        buf = io.StringIO()
        w = csv.writer(buf, lineterminator="\n")
        w.writerow(["trial", "j", "re", "im", "scale_exponent"])
        for i in range(len(self)):
            t = int(self.trial_indices[i])
            e = int(self.scale_exponents[i])
            for j, c in enumerate(self.coeffs[i]):
                w.writerow([t, j, repr(float(c.real)), repr(float(c.imag)), e])
        return buf.getvalue()


def _assemble(log_amp: np.ndarray, eta: np.ndarray):
    """Rescale rows of |c| = exp(log_amp) * |eta| so that max |c| lies in [1/2, 1)."""
    with np.errstate(divide="ignore"):
        log_abs = log_amp[None, :] + np.log(np.abs(eta))
    top = np.max(log_abs, axis=1)
    exps = np.floor(top / math.log(2.0)).astype(np.int64) + 1
    mags = np.exp(log_abs - exps[:, None] * math.log(2.0))
    phase = np.where(eta != 0, eta / np.where(eta != 0, np.abs(eta), 1.0), 0.0)
    coeffs = mags * phase
    finite_amp = np.isfinite(log_amp)[None, :] & (eta != 0)
    truncated = np.any(finite_amp & (mags < TRUNCATION_THRESHOLD), axis=1)
    return coeffs, exps, truncated


def sample_sections(spectrum: ToeplitzSpectrum, seed: int, trial_indices, eta: np.ndarray | None = None) -> SampleBatch:
    """Coefficients c_j = eta_j lambda_j sqrt((p+1) C(p,j)) for each trial index.

    ``eta`` overrides the Gaussian draws (a test hook); it is broadcast to
    (trials, p + 1).
    """
    p = spectrum.p
    if p > P_MAX:
        raise ValueError(f"degree {p} exceeds {P_MAX}")
    if not np.any(np.isfinite(spectrum.log_lambdas)):
        raise ValueError("all eigenvalues are zero; the section is identically zero")
    idx = np.atleast_1d(np.asarray(trial_indices, dtype=np.int64))
    log_amp = spectrum.log_lambdas + 0.5 * log_basis_weight(p)
    resampled = np.zeros(idx.size, dtype=np.int64)
    if eta is None:
        streams = TrialStreams(seed, idx)
        eta = streams.complex_normal(p + 1)
        # a zero draw vector is redrawn from the same stream
        live = np.isfinite(log_amp)
        dead = ~np.any(eta[:, live] != 0, axis=1)
        while np.any(dead):
            fresh = streams.complex_normal(p + 1)
            eta[dead] = fresh[dead]
            resampled[dead] += 1
            dead = ~np.any(eta[:, live] != 0, axis=1)
    else:
        eta = np.broadcast_to(np.asarray(eta, dtype=complex), (idx.size, p + 1)).copy()
        if np.any(~np.any(eta[:, np.isfinite(log_amp)] != 0, axis=1)):
            raise ValueError("override draws give a zero section")
    coeffs, exps, truncated = _assemble(log_amp, eta)
    return SampleBatch(p, coeffs, exps, int(seed), idx, truncated, resampled)


def sample_section(spectrum: ToeplitzSpectrum, seed: int, trial_index: int, eta=None) -> SectionSample:
    return sample_sections(spectrum, seed, [trial_index], eta=eta).sample(0)


# ------------------------------------------------------------------- kernels


def _log_diag_terms(spectrum: ToeplitzSpectrum, r2) -> np.ndarray:
    p = spectrum.p
    j = np.arange(p + 1)
    r2 = np.asarray(r2, dtype=float)[..., None]
    with np.errstate(divide="ignore", invalid="ignore"):
        zpow = np.where(j > 0, j * np.log(r2), 0.0)
    return 2.0 * spectrum.log_lambdas + log_basis_weight(p) + zpow - p * np.log1p(r2)


def _logsumexp(a: np.ndarray, axis=-1) -> np.ndarray:
    top = np.max(a, axis=axis, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    with np.errstate(divide="ignore"):
        return np.squeeze(top, axis) + np.log(np.sum(np.exp(a - top), axis=axis))


def log_t2_diag(spectrum: ToeplitzSpectrum, z) -> np.ndarray:
    """log T^2_{f,p}(z, z) for complex arrays z (inf allowed for the pole)."""
    z = np.asarray(z, dtype=complex)
    finite = np.isfinite(z)
    r2 = np.where(finite, np.abs(np.where(finite, z, 0)) ** 2, 0.0)
    out = _logsumexp(_log_diag_terms(spectrum, r2))
    pole = 2.0 * spectrum.log_lambdas[-1] + math.log(spectrum.p + 1)
    return np.where(finite, out, pole)


def t2_diag(spectrum: ToeplitzSpectrum, z) -> float | np.ndarray:
    """E |S_{f,p}(z)|^2_{h_p} = sum_j lambda_j^2 (p+1) C(p,j) |z|^{2j} / (1+|z|^2)^p."""
    if isinstance(z, ChartPoint):
        z = complex("inf") if z.at_infinity else z.z
    out = np.exp(log_t2_diag(spectrum, z))
    return float(out) if out.ndim == 0 else out


@dataclass(frozen=True)
class KernelValue:
    z: ChartPoint
    w: ChartPoint
    t2_diag_z: float
    t2_diag_w: float
    t2_offdiag_abs: float
    normalized: float
    log_normalized: float


def log_normalized_kernel(spectrum: ToeplitzSpectrum, z, w) -> np.ndarray:
    """log N_{f,p}(z, w), vectorised over broadcastable complex arrays z, w."""
    z = np.asarray(z, dtype=complex)
    w = np.asarray(w, dtype=complex)
    p = spectrum.p
    j = np.arange(p + 1)
    rz2 = np.abs(z) ** 2
    rw2 = np.abs(w) ** 2
    prod = z * np.conj(w)
    with np.errstate(divide="ignore", invalid="ignore"):
        lr = np.where(j > 0, j * np.log(np.abs(prod))[..., None], 0.0)
    base = 2.0 * spectrum.log_lambdas + log_basis_weight(p)
    a = base + lr - 0.5 * p * (np.log1p(rz2) + np.log1p(rw2))[..., None]
    top = np.max(a, axis=-1, keepdims=True)
    top = np.where(np.isfinite(top), top, 0.0)
    phase = np.exp(1j * j * np.angle(prod)[..., None])
    log_off = np.squeeze(top, -1) + np.log(np.abs(np.sum(np.exp(a - top) * phase, axis=-1)))
    dz = _logsumexp(_log_diag_terms(spectrum, rz2))
    dw = _logsumexp(_log_diag_terms(spectrum, rw2))
    return np.minimum(log_off - 0.5 * (dz + dw), 0.0)


def normalized_kernel(spectrum: ToeplitzSpectrum, z, w) -> KernelValue:
    """|T^2(z,w)| / sqrt(T^2(z,z) T^2(w,w)) for finite chart points."""
    a, b = ChartPoint.of(z), ChartPoint.of(w)
    if a.at_infinity or b.at_infinity:
        raise ValueError("normalized_kernel takes finite chart points")
    dz = float(log_t2_diag(spectrum, a.z))
    dw = float(log_t2_diag(spectrum, b.z))
    if not (np.isfinite(dz) and np.isfinite(dw)):
        raise ValueError("T^2 vanishes on the diagonal; the normalised kernel is undefined")
    if a == b:
        logn = 0.0
    else:
        logn = float(log_normalized_kernel(spectrum, a.z, b.z))
    return KernelValue(a, b, math.exp(dz), math.exp(dw), math.exp(logn + 0.5 * (dz + dw)), math.exp(logn), logn)


def kernel_gaussian_decay_check(
    symbol: Symbol,
    p_list,
    offsets=(0.5, 1.0),
    base_point: complex = 0.0,
    direction: float = 0.0,
    far_b: float = 2.0,
) -> dict:
    """Compare N_{f,p} with exp(-(p/4) Phi^2), Phi^2 = 2 pi dist^2, near the diagonal.

    For each p and offset c the second point is at FS distance
    arctan(c/sqrt p)/sqrt(pi) from ``base_point``; the row reports
    ratio = -log N / ((p/2) pi dist^2). The far-field row uses
    dist = far_b sqrt(log p / p) and reports whether N <= p^-2.
    The remainder |ratio - 1| is fitted to a power of p.
    """
    z = complex(base_point)
    rows = []
    far = []
    for p in p_list:
        spec = compute_spectrum(symbol, p)
        for c in offsets:
            u = (c / math.sqrt(p)) * complex(math.cos(direction), math.sin(direction))
            w = mobius_translate(z, u)
            dist = fs_distance(z, w)
            logn = float(log_normalized_kernel(spec, z, w))
            model = 0.5 * p * math.pi * dist * dist
            rows.append({"p": p, "offset": c, "dist": dist, "N": math.exp(logn), "model_N": math.exp(-model),
                         "ratio": -logn / model})
        d = far_b * math.sqrt(math.log(p) / p)
        u = math.tan(SQRT_PI * d) * complex(math.cos(direction), math.sin(direction))
        w = mobius_translate(z, u)
        logn = float(log_normalized_kernel(spec, z, w))
        far.append({"p": p, "dist": d, "N": math.exp(logn), "bound": p ** -2.0, "holds": logn <= -2.0 * math.log(p)})
    fit = None
    by_c = {}
    for r in rows:
        by_c.setdefault(r["offset"], []).append(r)
    slopes = {}
    for c, rs in by_c.items():
        ps = np.array([r["p"] for r in rs], dtype=float)
        dev = np.array([abs(r["ratio"] - 1.0) for r in rs])
        if ps.size >= 2 and np.all(dev > 0):
            slopes[c] = float(np.polyfit(np.log(ps), np.log(dev), 1)[0])
    if slopes:
        fit = slopes
    return {"near": rows, "far": far, "remainder_exponent": fit}
