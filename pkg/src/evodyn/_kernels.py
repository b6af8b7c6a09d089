"""Numba-compiled RK4 inner loops for the three production dynamics.

These implement exactly the same fixed-step 4-stage scheme as
``engine.integrate`` (including the per-step clip/renormalize
post-processing) but with scalar arithmetic, since per-step numpy dispatch
dominates the runtime for these 4- and 8-dimensional systems.  Samples are
taken at t=0, every ``stride`` steps, and at the final step.
"""

from __future__ import annotations

import numpy as np
from numba import njit, prange

MODE_HDEF = 0
MODE_HERMITIZED = 1
MODE_TANGENT = 2

MODE_IDS = {"h-def": MODE_HDEF, "hermitized": MODE_HERMITIZED, "tangent": MODE_TANGENT}


@njit(cache=True)
def _classical_rhs(A, B, s, gamma, ds):
    x0, x1, y0, y1 = s[0], s[1], s[2], s[3]
    ay0 = A[0, 0] * y0 + A[0, 1] * y1
    ay1 = A[1, 0] * y0 + A[1, 1] * y1
    ua = x0 * ay0 + x1 * ay1
    xb0 = x0 * B[0, 0] + x1 * B[1, 0]
    xb1 = x0 * B[0, 1] + x1 * B[1, 1]
    ub = xb0 * y0 + xb1 * y1
    ds[0] = gamma * x0 * (ay0 - ua)
    ds[1] = gamma * x1 * (ay1 - ua)
    ds[2] = gamma * y0 * (xb0 - ub)
    ds[3] = gamma * y1 * (xb1 - ub)


@njit(cache=True)
def rk4_classical(A, B, s0, gamma, dt, n_steps, stride):
    n_samples = 1 + (n_steps + stride - 1) // stride
    times = np.empty(n_samples)
    states = np.empty((n_samples, 4))
    s = s0.copy()
    k1 = np.empty(4)
    k2 = np.empty(4)
    k3 = np.empty(4)
    k4 = np.empty(4)
    tmp = np.empty(4)
    times[0] = 0.0
    states[0] = s
    m = 1
    half = dt / 2.0
    for k in range(n_steps):
        _classical_rhs(A, B, s, gamma, k1)
        for i in range(4):
            tmp[i] = s[i] + half * k1[i]
        _classical_rhs(A, B, tmp, gamma, k2)
        for i in range(4):
            tmp[i] = s[i] + half * k2[i]
        _classical_rhs(A, B, tmp, gamma, k3)
        for i in range(4):
            tmp[i] = s[i] + dt * k3[i]
        _classical_rhs(A, B, tmp, gamma, k4)
        for i in range(4):
            s[i] = s[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        # clip to [0, 1] and renormalize each player's simplex
        for i in range(4):
            if s[i] < 0.0:
                s[i] = 0.0
            elif s[i] > 1.0:
                s[i] = 1.0
        sx = s[0] + s[1]
        sy = s[2] + s[3]
        s[0] /= sx
        s[1] /= sx
        s[2] /= sy
        s[3] /= sy
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            times[m] = (k + 1) * dt
            states[m] = s
            m += 1
    return times[:m], states[:m]


@njit(cache=True, parallel=True)
def sweep_classical(A, B, S0, gamma, dt, n_steps, stride, eps_conv, window):
    """Integrate every grid point independently with per-point early exit.

    A point stops once its velocity norm has stayed below ``eps_conv`` for
    ``window`` consecutive stride-samples; the returned flags mark which
    points converged within the horizon.
    """
    n = S0.shape[0]
    finals = np.empty((n, 4))
    residuals = np.empty(n)
    converged = np.zeros(n, dtype=np.bool_)
    for p in prange(n):
        s = S0[p].copy()
        k1 = np.empty(4)
        k2 = np.empty(4)
        k3 = np.empty(4)
        k4 = np.empty(4)
        tmp = np.empty(4)
        half = dt / 2.0
        count = 0
        done = False
        for k in range(n_steps):
            _classical_rhs(A, B, s, gamma, k1)
            for i in range(4):
                tmp[i] = s[i] + half * k1[i]
            _classical_rhs(A, B, tmp, gamma, k2)
            for i in range(4):
                tmp[i] = s[i] + half * k2[i]
            _classical_rhs(A, B, tmp, gamma, k3)
            for i in range(4):
                tmp[i] = s[i] + dt * k3[i]
            _classical_rhs(A, B, tmp, gamma, k4)
            for i in range(4):
                s[i] = s[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
            for i in range(4):
                if s[i] < 0.0:
                    s[i] = 0.0
                elif s[i] > 1.0:
                    s[i] = 1.0
            sx = s[0] + s[1]
            sy = s[2] + s[3]
            s[0] /= sx
            s[1] /= sx
            s[2] /= sy
            s[3] /= sy
            if (k + 1) % stride == 0:
                _classical_rhs(A, B, s, gamma, k1)
                r = 0.0
                for i in range(4):
                    r += k1[i] * k1[i]
                r = np.sqrt(r)
                if r < eps_conv:
                    count += 1
                    if count >= window:
                        done = True
                        break
                else:
                    count = 0
        _classical_rhs(A, B, s, gamma, k1)
        r = 0.0
        for i in range(4):
            r += k1[i] * k1[i]
        finals[p] = s
        residuals[p] = np.sqrt(r)
        converged[p] = done
    return finals, residuals, converged


@njit(cache=True)
def _pair_rhs(A, B, s, gamma, mode, ds):
    """Packed complex state (joint 4, psi 2, zeta 2)."""
    p0, p1 = s[4], s[5]
    z0, z1 = s[6], s[7]
    pp0 = (p0 * np.conj(p0)).real
    pp1 = (p1 * np.conj(p1)).real
    tot = pp0 + pp1
    pp0 /= tot
    pp1 /= tot
    pz0 = (z0 * np.conj(z0)).real
    pz1 = (z1 * np.conj(z1)).real
    tot = pz0 + pz1
    pz0 /= tot
    pz1 /= tot
    da = (A[0, 0] - A[1, 0]) * pz0 + (A[0, 1] - A[1, 1]) * pz1
    db = (B[0, 0] - B[0, 1]) * pp0 + (B[1, 0] - B[1, 1]) * pp1
    if mode == MODE_TANGENT:
        dp0 = gamma * da * (-p1)
        dp1 = gamma * da * p0
        dz0 = gamma * db * (-z1)
        dz1 = gamma * db * z0
        # joint = kron(psi, zeta); product rule from the tracked locals
        ds[0] = dp0 * z0 + p0 * dz0
        ds[1] = dp0 * z1 + p0 * dz1
        ds[2] = dp1 * z0 + p1 * dz0
        ds[3] = dp1 * z1 + p1 * dz1
        ds[4] = dp0
        ds[5] = dp1
        ds[6] = dz0
        ds[7] = dz1
        return
    ha01 = gamma * p0 * da
    ha10 = gamma * p1 * (-da)
    hb01 = gamma * z0 * db
    hb10 = gamma * z1 * (-db)
    if mode == MODE_HERMITIZED:
        u = 0.5 * (ha01 + np.conj(ha10))
        ha01 = u
        ha10 = np.conj(u)
        u = 0.5 * (hb01 + np.conj(hb10))
        hb01 = u
        hb10 = np.conj(u)
    dp0 = -1j * (ha01 * p1)
    dp1 = -1j * (ha10 * p0)
    dz0 = -1j * (hb01 * z1)
    dz1 = -1j * (hb10 * z0)
    # joint under the Kronecker sum H_A (x) I + I (x) H_B
    j00, j01, j10, j11 = s[0], s[1], s[2], s[3]
    ds[0] = -1j * (ha01 * j10 + hb01 * j01)
    ds[1] = -1j * (ha01 * j11 + hb10 * j00)
    ds[2] = -1j * (ha10 * j00 + hb01 * j11)
    ds[3] = -1j * (ha10 * j01 + hb10 * j10)
    ds[4] = dp0
    ds[5] = dp1
    ds[6] = dz0
    ds[7] = dz1


@njit(cache=True)
def rk4_quantum_pair(A, B, s0, gamma, dt, n_steps, stride, mode, renormalize):
    n_samples = 1 + (n_steps + stride - 1) // stride
    times = np.empty(n_samples)
    states = np.empty((n_samples, 8), dtype=np.complex128)
    norms = np.empty(n_samples)
    s = s0.copy()
    k1 = np.empty(8, dtype=np.complex128)
    k2 = np.empty(8, dtype=np.complex128)
    k3 = np.empty(8, dtype=np.complex128)
    k4 = np.empty(8, dtype=np.complex128)
    tmp = np.empty(8, dtype=np.complex128)
    times[0] = 0.0
    states[0] = s
    norms[0] = 1.0
    m = 1
    half = dt / 2.0
    for k in range(n_steps):
        _pair_rhs(A, B, s, gamma, mode, k1)
        for i in range(8):
            tmp[i] = s[i] + half * k1[i]
        _pair_rhs(A, B, tmp, gamma, mode, k2)
        for i in range(8):
            tmp[i] = s[i] + half * k2[i]
        _pair_rhs(A, B, tmp, gamma, mode, k3)
        for i in range(8):
            tmp[i] = s[i] + dt * k3[i]
        _pair_rhs(A, B, tmp, gamma, mode, k4)
        for i in range(8):
            s[i] = s[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        nj = 0.0
        for i in range(4):
            nj += (s[i] * np.conj(s[i])).real
        nj = np.sqrt(nj)
        if renormalize:
            for i in range(4):
                s[i] /= nj
            na = np.sqrt((s[4] * np.conj(s[4])).real + (s[5] * np.conj(s[5])).real)
            nb = np.sqrt((s[6] * np.conj(s[6])).real + (s[7] * np.conj(s[7])).real)
            s[4] /= na
            s[5] /= na
            s[6] /= nb
            s[7] /= nb
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            times[m] = (k + 1) * dt
            states[m] = s
            norms[m] = nj  # pre-renormalization norm, kept as a drift diagnostic
            m += 1
    return times[:m], states[:m], norms[:m]


@njit(cache=True)
def _mixed_rhs(A, B, s, gamma, mode, ds):
    """Packed complex state (psi 2, classical y 2); the quantum side is the
    row player of (A, B)."""
    p0, p1 = s[0], s[1]
    y0 = s[2].real
    y1 = s[3].real
    tot = y0 + y1
    y0 /= tot
    y1 /= tot
    pp0 = (p0 * np.conj(p0)).real
    pp1 = (p1 * np.conj(p1)).real
    tot = pp0 + pp1
    pp0 /= tot
    pp1 /= tot
    da = (A[0, 0] - A[1, 0]) * y0 + (A[0, 1] - A[1, 1]) * y1
    if mode == MODE_TANGENT:
        ds[0] = gamma * da * (-p1)
        ds[1] = gamma * da * p0
    else:
        ha01 = gamma * p0 * da
        ha10 = gamma * p1 * (-da)
        if mode == MODE_HERMITIZED:
            u = 0.5 * (ha01 + np.conj(ha10))
            ha01 = u
            ha10 = np.conj(u)
        ds[0] = -1j * (ha01 * p1)
        ds[1] = -1j * (ha10 * p0)
    xb0 = pp0 * B[0, 0] + pp1 * B[1, 0]
    xb1 = pp0 * B[0, 1] + pp1 * B[1, 1]
    ub = xb0 * y0 + xb1 * y1
    ds[2] = gamma * y0 * (xb0 - ub) + 0j
    ds[3] = gamma * y1 * (xb1 - ub) + 0j


@njit(cache=True)
def rk4_mixed(A, B, s0, gamma, dt, n_steps, stride, mode, renormalize):
    n_samples = 1 + (n_steps + stride - 1) // stride
    times = np.empty(n_samples)
    states = np.empty((n_samples, 4), dtype=np.complex128)
    s = s0.copy()
    k1 = np.empty(4, dtype=np.complex128)
    k2 = np.empty(4, dtype=np.complex128)
    k3 = np.empty(4, dtype=np.complex128)
    k4 = np.empty(4, dtype=np.complex128)
    tmp = np.empty(4, dtype=np.complex128)
    times[0] = 0.0
    states[0] = s
    m = 1
    half = dt / 2.0
    for k in range(n_steps):
        _mixed_rhs(A, B, s, gamma, mode, k1)
        for i in range(4):
            tmp[i] = s[i] + half * k1[i]
        _mixed_rhs(A, B, tmp, gamma, mode, k2)
        for i in range(4):
            tmp[i] = s[i] + half * k2[i]
        _mixed_rhs(A, B, tmp, gamma, mode, k3)
        for i in range(4):
            tmp[i] = s[i] + dt * k3[i]
        _mixed_rhs(A, B, tmp, gamma, mode, k4)
        for i in range(4):
            s[i] = s[i] + (dt / 6.0) * (k1[i] + 2.0 * k2[i] + 2.0 * k3[i] + k4[i])
        if renormalize:
            nq = np.sqrt((s[0] * np.conj(s[0])).real + (s[1] * np.conj(s[1])).real)
            s[0] /= nq
            s[1] /= nq
        y0 = s[2].real
        y1 = s[3].real
        if y0 < 0.0:
            y0 = 0.0
        elif y0 > 1.0:
            y0 = 1.0
        if y1 < 0.0:
            y1 = 0.0
        elif y1 > 1.0:
            y1 = 1.0
        tot = y0 + y1
        s[2] = y0 / tot + 0j
        s[3] = y1 / tot + 0j
        if (k + 1) % stride == 0 or k + 1 == n_steps:
            times[m] = (k + 1) * dt
            states[m] = s
            m += 1
    return times[:m], states[:m]
