"""Compiled inner loops. Kept free of Python objects so numba can run them nogil."""

from __future__ import annotations

import math

import numpy as np
from numba import njit

SIG_CONSTANT, SIG_SINUSOID, SIG_TABLE = 0, 1, 2
STATUS_OK, STATUS_NONFINITE = 0, 1
RESET_THRESHOLD = 500.0


@njit(cache=True, nogil=True)
def _lorenz_rhs(x, y, z, s, sg, rho, al, textbook):
    dx = s * sg * (x - y)
    if textbook:
        dy = s * (x * (rho - z) - y)
    else:
        dy = s * x * (rho - z - y)
    dz = s * (x * y - al * z)
    return dx, dy, dz


@njit(cache=True, nogil=True)
def rk4_lorenz(ic, s, sg, rho, al, textbook, step, n_steps, store_every):
    n_out = n_steps // store_every + 1
    out = np.empty((n_out, 3))
    x, y, z = ic[0], ic[1], ic[2]
    out[0, 0], out[0, 1], out[0, 2] = x, y, z
    h = step
    j = 1
    for k in range(1, n_steps + 1):
        k1x, k1y, k1z = _lorenz_rhs(x, y, z, s, sg, rho, al, textbook)
        k2x, k2y, k2z = _lorenz_rhs(x + 0.5 * h * k1x, y + 0.5 * h * k1y, z + 0.5 * h * k1z, s, sg, rho, al, textbook)
        k3x, k3y, k3z = _lorenz_rhs(x + 0.5 * h * k2x, y + 0.5 * h * k2y, z + 0.5 * h * k2z, s, sg, rho, al, textbook)
        k4x, k4y, k4z = _lorenz_rhs(x + h * k3x, y + h * k3y, z + h * k3z, s, sg, rho, al, textbook)
        x += h / 6.0 * (k1x + 2.0 * k2x + 2.0 * k3x + k4x)
        y += h / 6.0 * (k1y + 2.0 * k2y + 2.0 * k3y + k4y)
        z += h / 6.0 * (k1z + 2.0 * k2z + 2.0 * k3z + k4z)
        if not (math.isfinite(x) and math.isfinite(y) and math.isfinite(z)):
            return out[:j], k
        if k % store_every == 0:
            out[j, 0], out[j, 1], out[j, 2] = x, y, z
            j += 1
    return out, -1


@njit(cache=True, nogil=True)
def _sigma(code, z):
    if code == 0:
        if z >= 0:
            return 1.0 / (1.0 + math.exp(-z))
        e = math.exp(z)
        return e / (1.0 + e)
    if code == 1:
        return 0.5 * (1.0 + math.tanh(z))
    v = 0.5 * (z + 1.0)
    if v < 0.0:
        return 0.0
    if v > 1.0:
        return 1.0
    return v


@njit(cache=True, nogil=True)
def _exact_counts(x, p, cls, kind, L, dim, sgn, a, b, alpha, nu, sig_code, counts, idx, n_idx):
    """Add the buyers among agents ``idx[:n_idx]`` by evaluating sigma(psi) > p directly."""
    for m in range(n_idx):
        i = idx[m]
        c = cls[i]
        k = kind[i]
        if k == 0:
            base = L[i]
        elif k == 1:
            base = sgn[i] * x[dim[i]]
        else:
            base = 1.0 if (a[i] < x[0] and x[0] < b[i]) else -1.0
        psi = alpha[i] * (base + nu[i] * (p[c] - 0.5))
        if _sigma(sig_code, psi) > p[c]:
            counts[c] += 1


@njit(cache=True, nogil=True)
def euler_market(
    q0, beta, eps, n_steps, stride,
    cls, kind, L, dim, sgn, a, b, alpha, nu, sig_code,
    sig_kind, sig_const, sig_A, sig_omega, sig_table, sig_h, x_dim,
):
    """Forward Euler on quantities: q_j += eps * (buyers of j); prices from softmax.

    For the logistic map the test sigma(psi) > p is done as psi > logit(p);
    agents within a relative 1e-9 of that threshold are rechecked exactly in
    a separate call (inlining the exp into this loop lets LLVM speculate it
    on every iteration).
    """
    M = q0.size
    n_agents = cls.size
    n_rec = n_steps // stride + 1
    if n_steps % stride != 0:
        n_rec += 1
    times = np.empty(n_rec)
    prices = np.empty((n_rec, M))
    drifts = np.empty((n_rec, M), dtype=np.int64)
    xs = np.empty((n_rec, x_dim))
    q = q0.copy()
    p = np.empty(M)
    e = np.empty(M)
    logit = np.zeros(M)
    counts = np.zeros(M, dtype=np.int64)
    amb = np.arange(n_agents)
    x = np.zeros(x_dim)
    if sig_kind == SIG_CONSTANT:
        for dd in range(x_dim):
            x[dd] = sig_const[dd]
    n_tab = sig_table.shape[0]
    r = 0
    for k in range(n_steps + 1):
        t = k * eps
        # prices
        if M == 2:
            z = beta * (q[1] - q[0])
            if z >= 0:
                p[1] = 1.0 / (1.0 + math.exp(-z))
                p[0] = 1.0 - p[1]
            else:
                p[0] = 1.0 / (1.0 + math.exp(z))
                p[1] = 1.0 - p[0]
            logit[1] = z
            logit[0] = -z
        else:
            m = beta * q[0]
            for j in range(1, M):
                if beta * q[j] > m:
                    m = beta * q[j]
            tot = 0.0
            for j in range(M):
                e[j] = math.exp(beta * q[j] - m)
                tot += e[j]
            for j in range(M):
                p[j] = e[j] / tot
                if 0.0 < p[j] and p[j] < 1.0:
                    logit[j] = math.log(p[j] / (1.0 - p[j]))
        # information
        if sig_kind == SIG_SINUSOID:
            x[0] = sig_A * math.sin(sig_omega * t)
        elif sig_kind == SIG_TABLE:
            u = t / sig_h
            i0 = int(math.floor(u))
            if i0 >= n_tab - 1:
                i0 = n_tab - 2
            w = u - i0
            for dd in range(x_dim):
                x[dd] = (1.0 - w) * sig_table[i0, dd] + w * sig_table[i0 + 1, dd]
        # buyers
        for j in range(M):
            counts[j] = 0
        if sig_code == 0:
            n_amb = 0
            for i in range(n_agents):
                c = cls[i]
                ki = kind[i]
                if ki == 0:
                    base = L[i]
                elif ki == 1:
                    base = sgn[i] * x[dim[i]]
                else:
                    base = 1.0 if (a[i] < x[0] and x[0] < b[i]) else -1.0
                pc = p[c]
                psi = alpha[i] * (base + nu[i] * (pc - 0.5))
                thr = logit[c]
                g = 1e-9 * (1.0 + abs(thr))
                if pc <= 0.0 or pc >= 1.0 or (psi >= thr - g and psi <= thr + g):
                    amb[n_amb] = i
                    n_amb += 1
                elif psi > thr:
                    counts[c] += 1
            if n_amb > 0:
                _exact_counts(x, p, cls, kind, L, dim, sgn, a, b, alpha, nu, sig_code, counts, amb, n_amb)
        else:
            _exact_counts(x, p, cls, kind, L, dim, sgn, a, b, alpha, nu, sig_code, counts, amb, n_agents)
        # record
        if k % stride == 0 or k == n_steps:
            times[r] = t
            for j in range(M):
                prices[r, j] = p[j]
                drifts[r, j] = counts[j]
            for dd in range(x_dim):
                xs[r, dd] = x[dd]
            r += 1
        if k == n_steps:
            break
        # Euler step on quantities; a common purchase count only translates q,
        # so it is dropped to keep equal-count steps exact no-ops
        cmin = counts[0]
        for j in range(1, M):
            if counts[j] < cmin:
                cmin = counts[j]
        mx = 0.0
        for j in range(M):
            q[j] += eps * (counts[j] - cmin)
            v = abs(beta * q[j])
            if v > mx:
                mx = v
        if not math.isfinite(mx):
            return times[:r], prices[:r], drifts[:r], xs[:r], STATUS_NONFINITE, k
        if mx > RESET_THRESHOLD:
            mean = 0.0
            for j in range(M):
                mean += q[j]
            mean /= M
            for j in range(M):
                q[j] -= mean
    return times[:r], prices[:r], drifts[:r], xs[:r], STATUS_OK, -1


@njit(cache=True, nogil=True)
def zigzag_reversals(x, min_swing):
    reversals = 0
    direction = 0
    if x.size == 0:
        return 0
    hi = x[0]
    lo = x[0]
    extreme = x[0]
    for k in range(1, x.size):
        v = x[k]
        if direction == 0:
            hi = max(hi, v)
            lo = min(lo, v)
            if hi - lo > min_swing:
                direction = 1 if v == hi else -1
                extreme = v
        elif direction == 1:
            if v > extreme:
                extreme = v
            elif extreme - v > min_swing:
                reversals += 1
                direction = -1
                extreme = v
        else:
            if v < extreme:
                extreme = v
            elif v - extreme > min_swing:
                reversals += 1
                direction = 1
                extreme = v
    return reversals
