"""Batched 4x4 propagation kernels (hot path of every scan and Monte-Carlo run).

Two interchangeable implementations live here:

* ``_np_*`` functions operate on whole batches with stacked ``numpy.linalg.eigh``.
* ``_jit_*`` functions loop over the batch inside numba-compiled code and
  release the GIL, so thread-pool workers run them concurrently.

The module-level names (``pump_probe``, ``excitation``, ``evolve``) are bound
to one of them at import time, see :mod:`forster._jit`. Both paths compute the
same quantities; they agree to rounding, not bit-for-bit.

Conventions: basis order [GG, DG_SYM, DD, PF_SYM], energies are E/h in MHz,
times in us, so a propagator is ``exp(-2j*pi*H*t)``.
"""
import numpy as np

from ._jit import USE_JIT, njit

SQRT2 = np.sqrt(2.0)
TWO_PI = 2.0 * np.pi


# --------------------------------------------------------------------------
# numpy path
# --------------------------------------------------------------------------
def _np_hamiltonians(delta, omega, field, r, c3, delta0, f_res, p):
    delta, omega, field, r = np.broadcast_arrays(
        np.atleast_1d(np.asarray(delta, dtype=float)),
        np.atleast_1d(np.asarray(omega, dtype=float)),
        np.atleast_1d(np.asarray(field, dtype=float)),
        np.atleast_1d(np.asarray(r, dtype=float)),
    )
    n = delta.shape[0]
    h = np.zeros((n, 4, 4))
    link = SQRT2 * omega / 2.0
    coupling = SQRT2 * c3 / r**3
    defect = delta0 * (1.0 - (field / f_res) ** p)
    h[:, 1, 1] = -delta / 2.0
    h[:, 2, 2] = -delta
    h[:, 3, 3] = -delta + defect
    h[:, 0, 1] = h[:, 1, 0] = link
    h[:, 1, 2] = h[:, 2, 1] = link
    h[:, 2, 3] = h[:, 3, 2] = coupling
    return h


def _np_evolve(h, t, psi):
    """Evolve each ``psi[n]`` under ``h[n]`` for time ``t[n]``."""
    w, v = np.linalg.eigh(h)
    c = np.einsum("nik,ni->nk", v, psi)
    c = c * np.exp(-1j * TWO_PI * w * np.asarray(t, dtype=float)[:, None])
    return np.einsum("nik,nk->ni", v, c)


def _ground(n):
    psi = np.zeros((n, 4), dtype=np.complex128)
    psi[:, 0] = 1.0
    return psi


def _np_pump_probe(r, field, t_int, omega, delta, f_prep, t_pi,
                   c3, delta0, f_res, p):
    r = np.atleast_1d(np.asarray(r, dtype=float))
    field = np.atleast_1d(np.asarray(field, dtype=float))
    t_int = np.atleast_1d(np.asarray(t_int, dtype=float))
    n = r.shape[0]
    h_pulse = _np_hamiltonians(delta, omega, f_prep, r, c3, delta0, f_res, p)
    h_free = _np_hamiltonians(delta, 0.0, field, r, c3, delta0, f_res, p)
    t_pulse = np.full(n, t_pi)
    psi = _np_evolve(h_pulse, t_pulse, _ground(n))
    psi = _np_evolve(h_free, t_int, psi)
    psi = _np_evolve(h_pulse, t_pulse, psi)
    return np.abs(psi[:, 0]) ** 2


def _np_excitation(delta, field, r, omega, duration, c3, delta0, f_res, p):
    delta, field, r = np.broadcast_arrays(
        np.atleast_1d(np.asarray(delta, dtype=float)),
        np.atleast_1d(np.asarray(field, dtype=float)),
        np.atleast_1d(np.asarray(r, dtype=float)),
    )
    n = delta.shape[0]
    h = _np_hamiltonians(delta, omega, field, r, c3, delta0, f_res, p)
    psi = _np_evolve(h, np.full(n, duration), _ground(n))
    pop = np.abs(psi) ** 2
    out = np.empty((n, 3))
    out[:, 0] = pop[:, 0]
    out[:, 1] = pop[:, 1]
    out[:, 2] = pop[:, 2] + pop[:, 3]
    return out


# --------------------------------------------------------------------------
# numba path
# --------------------------------------------------------------------------
@njit(cache=True, nogil=True)
def _jit_hamiltonian(delta, omega, field, r, c3, delta0, f_res, p):
    h = np.zeros((4, 4))
    link = np.sqrt(2.0) * omega / 2.0
    h[1, 1] = -delta / 2.0
    h[2, 2] = -delta
    h[3, 3] = -delta + delta0 * (1.0 - (field / f_res) ** p)
    h[0, 1] = link
    h[1, 0] = link
    h[1, 2] = link
    h[2, 1] = link
    h[2, 3] = np.sqrt(2.0) * c3 / r**3
    h[3, 2] = h[2, 3]
    return h


@njit(cache=True, nogil=True)
def _jit_eigh4(h):
    # cyclic Jacobi for a real symmetric 4x4; cheaper than a LAPACK call per shot
    a = h.copy()
    v = np.eye(4)
    for _ in range(50):
        off = 0.0
        scale = 0.0
        for i in range(4):
            scale += a[i, i] * a[i, i]
            for j in range(i + 1, 4):
                off += a[i, j] * a[i, j]
        if off <= 1e-32 * scale or off == 0.0:
            break
        for p in range(3):
            for q in range(p + 1, 4):
                apq = a[p, q]
                if apq == 0.0:
                    continue
                theta = (a[q, q] - a[p, p]) / (2.0 * apq)
                tt = np.sign(theta) / (abs(theta) + np.sqrt(theta * theta + 1.0))
                if theta == 0.0:
                    tt = 1.0
                c = 1.0 / np.sqrt(tt * tt + 1.0)
                s = tt * c
                for k in range(4):
                    akp = a[k, p]
                    akq = a[k, q]
                    a[k, p] = c * akp - s * akq
                    a[k, q] = s * akp + c * akq
                for k in range(4):
                    apk = a[p, k]
                    aqk = a[q, k]
                    a[p, k] = c * apk - s * aqk
                    a[q, k] = s * apk + c * aqk
                for k in range(4):
                    vkp = v[k, p]
                    vkq = v[k, q]
                    v[k, p] = c * vkp - s * vkq
                    v[k, q] = s * vkp + c * vkq
    w = np.empty(4)
    for i in range(4):
        w[i] = a[i, i]
    return w, v


@njit(cache=True, nogil=True)
def _jit_apply(w, v, t, psi):
    out = np.zeros(4, dtype=np.complex128)
    for k in range(4):
        ck = 0j
        for i in range(4):
            ck += v[i, k] * psi[i]
        ck *= np.exp(-2j * np.pi * w[k] * t)
        for i in range(4):
            out[i] += v[i, k] * ck
    return out


@njit(cache=True, nogil=True)
def _jit_evolve_one(h, t, psi):
    w, v = _jit_eigh4(h)
    return _jit_apply(w, v, t, psi)


@njit(cache=True, nogil=True)
def _jit_evolve(h, t, psi):
    n = h.shape[0]
    out = np.empty((n, 4), dtype=np.complex128)
    for j in range(n):
        out[j] = _jit_evolve_one(np.ascontiguousarray(h[j]), t[j],
                                 np.ascontiguousarray(psi[j]))
    return out


@njit(cache=True, nogil=True)
def _jit_pump_probe_impl(r, field, t_int, omega, delta, f_prep, t_pi,
                         c3, delta0, f_res, p):
    n = r.shape[0]
    out = np.empty(n)
    for j in range(n):
        hp = _jit_hamiltonian(delta, omega, f_prep, r[j], c3, delta0, f_res, p)
        hf = _jit_hamiltonian(delta, 0.0, field[j], r[j], c3, delta0, f_res, p)
        psi = np.zeros(4, dtype=np.complex128)
        psi[0] = 1.0
        wp, vp = _jit_eigh4(hp)
        psi = _jit_apply(wp, vp, t_pi, psi)
        psi = _jit_evolve_one(hf, t_int[j], psi)
        psi = _jit_apply(wp, vp, t_pi, psi)
        out[j] = psi[0].real ** 2 + psi[0].imag ** 2
    return out


@njit(cache=True, nogil=True)
def _jit_excitation_impl(delta, field, r, omega, duration, c3, delta0, f_res, p):
    n = delta.shape[0]
    out = np.empty((n, 3))
    for j in range(n):
        h = _jit_hamiltonian(delta[j], omega, field[j], r[j], c3, delta0, f_res, p)
        psi = np.zeros(4, dtype=np.complex128)
        psi[0] = 1.0
        psi = _jit_evolve_one(h, duration, psi)
        pop = np.abs(psi) ** 2
        out[j, 0] = pop[0]
        out[j, 1] = pop[1]
        out[j, 2] = pop[2] + pop[3]
    return out


def _as_batch(*arrays):
    arrs = np.broadcast_arrays(*(np.atleast_1d(np.asarray(a, dtype=float))
                                 for a in arrays))
    return [np.ascontiguousarray(a) for a in arrs]


def _jit_pump_probe(r, field, t_int, omega, delta, f_prep, t_pi,
                    c3, delta0, f_res, p):
    r, field, t_int = _as_batch(r, field, t_int)
    return _jit_pump_probe_impl(r, field, t_int, float(omega), float(delta),
                                float(f_prep), float(t_pi), float(c3),
                                float(delta0), float(f_res), float(p))


def _jit_excitation(delta, field, r, omega, duration, c3, delta0, f_res, p):
    delta, field, r = _as_batch(delta, field, r)
    return _jit_excitation_impl(delta, field, r, float(omega), float(duration),
                                float(c3), float(delta0), float(f_res), float(p))


def _jit_evolve_batch(h, t, psi):
    h = np.ascontiguousarray(h, dtype=float)
    t = np.ascontiguousarray(np.broadcast_to(np.asarray(t, dtype=float),
                                             (h.shape[0],)))
    psi = np.ascontiguousarray(psi, dtype=np.complex128)
    return _jit_evolve(h, t, psi)


BACKENDS = {
    "numpy": {
        "pump_probe": _np_pump_probe,
        "excitation": _np_excitation,
        "evolve": _np_evolve,
        "hamiltonians": _np_hamiltonians,
    },
    "numba": {
        "pump_probe": _jit_pump_probe,
        "excitation": _jit_excitation,
        "evolve": _jit_evolve_batch,
        "hamiltonians": _np_hamiltonians,
    },
}

BACKEND = "numba" if USE_JIT else "numpy"

#: ``pump_probe(r, field, t_int, omega, delta, f_prep, t_pi, c3, delta0, f_res, p)``
#: returns P_gg after pi-pulse / free evolution / pi-pulse for each shot.
pump_probe = BACKENDS[BACKEND]["pump_probe"]
#: ``excitation(delta, field, r, omega, duration, c3, delta0, f_res, p)``
#: returns columns (P_gg, P_DG, P_rr) after one square pulse from |gg>.
excitation = BACKENDS[BACKEND]["excitation"]
evolve = BACKENDS[BACKEND]["evolve"]
hamiltonians = _np_hamiltonians
