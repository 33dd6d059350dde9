"""Least-squares engine and the three line-shape models used on simulated data."""
import math
from dataclasses import dataclass, field

import numpy as np

from .errors import DataError, DomainError, NoOscillationError

FD_REL_STEP = 1e-6
FTOL = 1e-10
GTOL = 1e-8
# scaled-gradient bound accepted when the run stops on the cost criterion
FTOL_GTOL = 1e-5
MAX_ITER = 500
LAMBDA_INIT = 1e-3
LAMBDA_MAX = 1e16
PEAK_FLOOR = 0.25


@dataclass
class DataSeries:
    """Points (x, y[, sigma]) sorted by x on construction."""

    x: np.ndarray
    y: np.ndarray
    sigma: np.ndarray = None
    x_label: str = "x"
    y_label: str = "y"

    def __post_init__(self):
        x = np.asarray(self.x, dtype=float).ravel()
        y = np.asarray(self.y, dtype=float).ravel()
        if x.shape != y.shape:
            raise DataError(f"x and y lengths differ ({x.size} vs {y.size})")
        if not (np.all(np.isfinite(x)) and np.all(np.isfinite(y))):
            raise DataError("data contain non-finite values")
        order = np.argsort(x, kind="stable")
        self.x, self.y = x[order], y[order]
        if self.sigma is not None:
            s = np.asarray(self.sigma, dtype=float).ravel()
            if s.shape != x.shape or np.any(~(s > 0)):
                raise DataError("uncertainties must be positive and match x")
            self.sigma = s[order]
        if np.any(np.diff(self.x) <= 0):
            raise DataError("x values must be distinct")

    def __len__(self):
        return self.x.size


@dataclass
class FitResult:
    params: np.ndarray
    covariance: np.ndarray
    cost: float
    iterations: int
    converged: bool
    gradient_norm: float = 0.0
    message: str = ""
    names: tuple = field(default=())
    gradient_tol: float = GTOL

    @property
    def stderr(self):
        return np.sqrt(np.clip(np.diag(self.covariance), 0.0, None))

    def to_record(self):
        """Flat key/value mapping suitable for a text record."""
        names = self.names or tuple(f"p{i}" for i in range(len(self.params)))
        rec = {}
        for name, value, err in zip(names, self.params, self.stderr):
            rec[name] = float(value)
            rec[f"{name}_err"] = float(err)
        rec["ssr"] = float(self.cost)
        rec["iterations"] = int(self.iterations)
        rec["converged"] = bool(self.converged)
        rec["gradient_norm"] = float(self.gradient_norm)
        return rec


def _residuals(model, x, y, w, p):
    with np.errstate(all="ignore"):
        m = np.asarray(model(x, p), dtype=float)
    if m.shape != y.shape:
        raise DataError(f"model returned shape {m.shape}, expected {y.shape}")
    if not np.all(np.isfinite(m)):
        raise DataError(f"model produced non-finite values at parameters {p}")
    return (m - y) * w


def _jacobian(model, x, y, w, p):
    jac = np.empty((x.size, p.size))
    for j in range(p.size):
        h = FD_REL_STEP * max(abs(p[j]), 1.0)
        up, dn = p.copy(), p.copy()
        up[j] += h
        dn[j] -= h
        jac[:, j] = (_residuals(model, x, y, w, up) - _residuals(model, x, y, w, dn)) / (2 * h)
    return jac


def _scaled_gradient(jac, r):
    # largest cosine between the residual and a Jacobian column
    rn = np.linalg.norm(r)
    if rn == 0:
        return 0.0
    cn = np.linalg.norm(jac, axis=0)
    g = np.abs(jac.T @ r)
    with np.errstate(divide="ignore", invalid="ignore"):
        cos = np.where(cn > 0, g / (cn * rn), 0.0)
    return float(np.max(cos)) if cos.size else 0.0


def nlls_fit(model, data, initial, names=()):
    """Levenberg-Marquardt least squares with central-difference Jacobian.

    ``model(x, params) -> y``. Stops on relative cost change below 1e-10,
    scaled gradient below 1e-8, or 500 iterations, and returns the best
    parameters seen. Without ``data.sigma`` the covariance is scaled by the
    reduced chi-square.
    """
    p = np.asarray(initial, dtype=float).copy()
    if p.ndim != 1 or not np.all(np.isfinite(p)):
        raise DataError("initial parameters must be a finite vector")
    if len(data) < p.size:
        raise DataError(f"{len(data)} points cannot constrain {p.size} parameters")
    x, y = data.x, data.y
    w = 1.0 / data.sigma if data.sigma is not None else np.ones_like(y)

    r = _residuals(model, x, y, w, p)
    cost = float(r @ r)
    lam = LAMBDA_INIT
    message = "maximum iterations reached"
    stalled = False
    it = 0
    jac = _jacobian(model, x, y, w, p)
    for it in range(1, MAX_ITER + 1):
        grad = jac.T @ r
        if cost == 0.0 or _scaled_gradient(jac, r) < GTOL:
            message = "gradient below tolerance"
            it -= 1
            break
        jtj = jac.T @ jac
        diag = np.diag(jtj).copy()
        diag[diag == 0] = 1.0
        while True:
            a = jtj + lam * np.diag(diag)
            try:
                step = np.linalg.solve(a, -grad)
            except np.linalg.LinAlgError:
                step = None
            if step is not None and np.all(np.isfinite(step)):
                trial = p + step
                try:
                    r_new = _residuals(model, x, y, w, trial)
                except DataError:
                    r_new = None
                if r_new is not None:
                    new_cost = float(r_new @ r_new)
                    if new_cost < cost:
                        break
            lam *= 10.0
            if lam > LAMBDA_MAX:
                stalled = True
                break
        if stalled:
            message = "no decreasing step at maximum damping"
            break
        rel = (cost - new_cost) / cost
        p, r, cost = trial, r_new, new_cost
        lam = max(lam / 10.0, 1e-15)
        jac = _jacobian(model, x, y, w, p)
        if rel < FTOL:
            message = "relative cost change below tolerance"
            break

    gnorm = _scaled_gradient(jac, r)
    exact = cost <= (1e-14 * (np.linalg.norm(y * w) + 1.0)) ** 2
    gtol_used = FTOL_GTOL if message.startswith("relative cost") else GTOL
    converged = bool(exact or gnorm < gtol_used)
    if exact:
        message = "residual at rounding level"
        gnorm = 0.0
    jtj = jac.T @ jac
    cov = np.linalg.pinv(jtj)
    dof = x.size - p.size
    if data.sigma is None:
        cov = cov * (cost / dof if dof > 0 else 0.0)
    cov = 0.5 * (cov + cov.T)
    return FitResult(p, cov, cost, it, converged, gnorm, message, tuple(names),
                     gtol_used)


# --------------------------------------------------------------------------
# models
# --------------------------------------------------------------------------
def gaussian(x, p):
    a, mu, s, b = p
    return a * np.exp(-((x - mu) ** 2) / (2 * s * s)) + b


def double_gaussian(x, p):
    a1, mu1, s1, a2, mu2, s2, b = p
    return (a1 * np.exp(-((x - mu1) ** 2) / (2 * s1 * s1))
            + a2 * np.exp(-((x - mu2) ** 2) / (2 * s2 * s2)) + b)


def damped_sine(x, p):
    """C + A exp(-gamma x) cos(2 pi f x + phi); gamma = 1/tau."""
    c, a, gamma, f, phi = p
    return c + a * np.exp(-gamma * x) * np.cos(2 * np.pi * f * x + phi)


def smooth3(y):
    """3-point moving average; endpoints average over the available neighbours."""
    y = np.asarray(y, dtype=float)
    if y.size < 3:
        return y.copy()
    out = np.empty_like(y)
    out[1:-1] = (y[:-2] + y[1:-1] + y[2:]) / 3.0
    out[0] = (y[0] + y[1]) / 2.0
    out[-1] = (y[-2] + y[-1]) / 2.0
    return out


def local_maxima(x, y, floor=PEAK_FLOOR):
    """Indices of interior maxima of smoothed ``y`` ranked by height.

    Maxima lower than ``floor`` times the tallest smoothed value (measured
    above the series minimum) are dropped, which removes the sinc sidelobes
    of square excitation pulses. Ties go to the smaller |x|.
    """
    s = smooth3(y)
    idx = [i for i in range(1, s.size - 1) if s[i] > s[i - 1] and s[i] >= s[i + 1]]
    if not idx:
        return []
    base = s.min()
    top = max(s[i] for i in idx) - base
    keep = [i for i in idx if s[i] - base >= floor * top]
    return sorted(keep, key=lambda i: (-round(s[i], 12), abs(x[i])))


@dataclass
class DoubleGaussianFit:
    splitting: float
    centers: tuple
    widths: tuple
    amplitudes: tuple
    offset: float
    resolved: bool
    fit: FitResult


def fit_double_gaussian(spectrum, floor=PEAK_FLOOR):
    """Two Gaussians plus offset; splitting is |mu2 - mu1| (NaN when unresolved)."""
    if len(spectrum) < 7:
        raise DataError("a double-Gaussian fit needs at least 7 points")
    x, y = spectrum.x, spectrum.y
    dx = float(np.median(np.diff(x)))
    peaks = local_maxima(x, y, floor)
    if len(peaks) < 2:
        i = peaks[0] if peaks else int(np.argmax(y))
        p0 = [y[i] - y.min(), x[i], 3 * dx, y.min()]
        res = nlls_fit(gaussian, spectrum, p0, names=("A", "mu", "s", "B"))
        a, mu, s, b = res.params
        return DoubleGaussianFit(math.nan, (mu,), (abs(s),), (a,), b, False, res)
    i1, i2 = sorted(peaks[:2], key=lambda i: x[i])
    p0 = [y[i1] / 2, x[i1], 3 * dx, y[i2] / 2, x[i2], 3 * dx, y.min()]
    res = nlls_fit(double_gaussian, spectrum, p0,
                   names=("A1", "mu1", "s1", "A2", "mu2", "s2", "B"))
    a1, mu1, s1, a2, mu2, s2, b = res.params
    if mu2 < mu1:
        a1, mu1, s1, a2, mu2, s2 = a2, mu2, s2, a1, mu1, s1
    return DoubleGaussianFit(abs(mu2 - mu1), (mu1, mu2), (abs(s1), abs(s2)),
                             (a1, a2), b, True, res)


@dataclass
class DampedSineFit:
    frequency: float
    tau: float
    contrast: float
    amplitude: float
    phase: float
    offset: float
    fit: FitResult


def dominant_frequency(t, y, pad=4):
    """Frequency of the strongest nonzero bin of the zero-padded DFT of y - mean."""
    t = np.asarray(t, dtype=float)
    y = np.asarray(y, dtype=float) - np.mean(y)
    dt = float(np.median(np.diff(t)))
    n = pad * t.size
    spec = np.fft.rfft(y, n)
    power = np.abs(spec) ** 2
    k = int(np.argmax(power))
    if k == 0 or power[k] == 0:
        raise NoOscillationError("no oscillating component in the trace")
    return k / (n * dt), float(np.angle(spec[k]))


def fit_damped_sine(trace, min_periods=1.5):
    """Exponentially damped cosine; the frequency starts from the DFT peak."""
    t, y = trace.x, trace.y
    if len(trace) < 6:
        raise DataError("a damped-sine fit needs at least 6 points")
    f0, _ = dominant_frequency(t, y)
    span = float(t[-1] - t[0])
    if f0 * span < min_periods:
        raise NoOscillationError(
            f"trace spans {f0 * span:.2f} periods of the {f0:.4g} MHz guess, "
            f"need {min_periods}")
    c0 = float(np.mean(y))
    a0 = float(np.sqrt(2.0) * np.std(y))
    # phase guess by linear projection at the guessed frequency
    arg = 2 * np.pi * f0 * (t - t[0])
    cc, ss = np.cos(arg), np.sin(arg)
    phi0 = float(np.arctan2(-(y - c0) @ ss, (y - c0) @ cc)) - 2 * np.pi * f0 * t[0]
    p0 = [c0, a0, 1.0 / span, f0, phi0]
    res = nlls_fit(damped_sine, trace, p0, names=("C", "A", "gamma", "f", "phi"))
    c, a, gamma, f, phi = res.params
    if f < 0:
        f, phi = -f, -phi
    if a < 0:
        a, phi = -a, phi + np.pi
    phi = float((phi + np.pi) % (2 * np.pi) - np.pi)
    tau = 1.0 / gamma if gamma > 0 else math.inf
    return DampedSineFit(float(f), tau, 2 * abs(a), float(a), phi, float(c), res)


@dataclass
class PowerLawFit:
    exponent: float
    exponent_err: float
    prefactor: float
    c3: float
    fit: FitResult


def fit_power_law(r, y, fix_exponent=None, kind="splitting"):
    """Least-squares line through (log r, log y).

    ``kind`` documents the data: for both "splitting" (Delta E) and
    "frequency" (f_osc) data the prefactor equals 2 sqrt(2) C3.
    """
    r = np.asarray(r, dtype=float).ravel()
    y = np.asarray(y, dtype=float).ravel()
    if r.shape != y.shape:
        raise DataError("distance and value arrays differ in length")
    if r.size < 3:
        raise DataError("a power-law fit needs at least 3 points")
    if np.any(~(r > 0)) or np.any(~(y > 0)):
        raise DomainError("power-law data must be strictly positive")
    if kind not in ("splitting", "frequency"):
        raise ValueError(f"unknown data kind {kind!r}")
    lx, ly = np.log(r), np.log(y)
    n = r.size
    if fix_exponent is None:
        xm, ym = lx.mean(), ly.mean()
        sxx = float(np.sum((lx - xm) ** 2))
        if sxx == 0:
            raise DataError("all distances are equal")
        k = float(np.sum((lx - xm) * (ly - ym)) / sxx)
        a = float(ym - k * xm)
        resid = ly - (a + k * lx)
        ssr = float(resid @ resid)
        s2 = ssr / (n - 2) if n > 2 else 0.0
        cov = s2 * np.array([[1.0 / n + xm * xm / sxx, -xm / sxx],
                             [-xm / sxx, 1.0 / sxx]])
        params = np.array([a, k])
        names = ("log_prefactor", "exponent")
        k_err = math.sqrt(cov[1, 1])
    else:
        k = float(fix_exponent)
        a = float(np.mean(ly - k * lx))
        resid = ly - (a + k * lx)
        ssr = float(resid @ resid)
        cov = np.array([[ssr / (n - 1) / n]])
        params = np.array([a])
        names = ("log_prefactor",)
        k_err = 0.0
    result = FitResult(params, cov, ssr, 0, True, 0.0, "closed form", names)
    prefactor = math.exp(a)
    return PowerLawFit(k, k_err, prefactor, prefactor / (2 * math.sqrt(2)), result)
