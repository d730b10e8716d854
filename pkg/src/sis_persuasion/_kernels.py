"""Compiled batch integrators.

Finite-difference gradients integrate ~2N perturbed control schedules per
evaluation and the fidelity grid integrates thousands of cells to
stationarity; both are far too slow in interpreted code.  The kernels here
repeat the scalar right-hand side of :mod:`.simulate` verbatim inside numba
``njit`` loops over (step, batch-element).  Cross-consistency with the
scalar integrator is pinned by tests.

Kernels return terminal states, cost integrals, and the worst projection
excursion; trajectories are not recorded.
"""

from __future__ import annotations

import numpy as np
from numba import njit


@njit(cache=True, inline="always")
def _deriv(y, zs, zi, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, cw):
    b = bp + dbeta * (zi * mui + zs * (1.0 - mui))
    dy = ((1.0 - y) * b * (alpha + (1.0 - alpha) * (zs * mu + zi * (1.0 - mu))) - gamma) * y
    lby_cu = la * b * y - cu
    den_i = mui * y + (1.0 - mu) * (1.0 - y)
    pis_i = (1.0 - mu) * (1.0 - y) / den_i if den_i > 0.0 else 1.0 - y
    den_s = (1.0 - mui) * y + mu * (1.0 - y)
    pis_s = mu * (1.0 - y) / den_s if den_s > 0.0 else 1.0 - y
    gap_s = pis_s * lby_cu + cu - cp
    gap_i = pis_i * lby_cu + cu - cp
    x = sigma * gap_s
    if x >= 0.0:
        t = np.exp(-x)
        phi_s = t / (1.0 + t)
    else:
        phi_s = 1.0 / (1.0 + np.exp(x))
    x = sigma * gap_i
    if x >= 0.0:
        t = np.exp(-x)
        phi_i = t / (1.0 + t)
    else:
        phi_i = 1.0 / (1.0 + np.exp(x))
    return dy, phi_s - zs, phi_i - zi, y + cw * (1.0 - mu) * (1.0 - mu)


@njit(cache=True)
def schedule_batch(
    y0, zs0, zi0, controls, steps_per_interval, alpha, gamma, bp, bu, cp, cu, loss, mui, sigma, cw, horizon_t
):
    """Integrate one trajectory per row of ``controls`` (shape (m, N)).

    Returns (terminal states (m, 3), cost integrals (m,), max clamp).
    """
    m, n_seg = controls.shape
    dbeta = bu - bp
    la = (1.0 - alpha) * loss
    seg = horizon_t / n_seg
    h = seg / steps_per_interval
    half = 0.5 * h
    sixth = h / 6.0

    ys = np.full(m, y0)
    zss = np.full(m, zs0)
    zis = np.full(m, zi0)
    costs = np.zeros(m)
    max_clamp = 0.0

    for k in range(n_seg):
        for _ in range(steps_per_interval):
            for i in range(m):
                y = ys[i]
                zs = zss[i]
                zi = zis[i]
                mu = controls[i, k]
                d1y, d1s, d1i, d1c = _deriv(y, zs, zi, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, cw)
                d2y, d2s, d2i, d2c = _deriv(y + half * d1y, zs + half * d1s, zi + half * d1i, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, cw)
                d3y, d3s, d3i, d3c = _deriv(y + half * d2y, zs + half * d2s, zi + half * d2i, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, cw)
                d4y, d4s, d4i, d4c = _deriv(y + h * d3y, zs + h * d3s, zi + h * d3i, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, cw)
                y += sixth * (d1y + 2.0 * (d2y + d3y) + d4y)
                zs += sixth * (d1s + 2.0 * (d2s + d3s) + d4s)
                zi += sixth * (d1i + 2.0 * (d2i + d3i) + d4i)
                costs[i] += sixth * (d1c + 2.0 * (d2c + d3c) + d4c)
                if y < 0.0:
                    if -y > max_clamp:
                        max_clamp = -y
                    y = 0.0
                elif y > 1.0:
                    if y - 1.0 > max_clamp:
                        max_clamp = y - 1.0
                    y = 1.0
                if zs < 0.0:
                    if -zs > max_clamp:
                        max_clamp = -zs
                    zs = 0.0
                elif zs > 1.0:
                    if zs - 1.0 > max_clamp:
                        max_clamp = zs - 1.0
                    zs = 1.0
                if zi < 0.0:
                    if -zi > max_clamp:
                        max_clamp = -zi
                    zi = 0.0
                elif zi > 1.0:
                    if zi - 1.0 > max_clamp:
                        max_clamp = zi - 1.0
                    zi = 1.0
                ys[i] = y
                zss[i] = zs
                zis[i] = zi

    out = np.empty((m, 3))
    out[:, 0] = ys
    out[:, 1] = zss
    out[:, 2] = zis
    return out, costs, max_clamp


@njit(cache=True)
def stationary_batch(
    y0, zs0, zi0, mu_s_vec, mu_i_vec, alpha, gamma, bp, bu, cp, cu, loss, sigma, h, t_max, tol, check_every
):
    """Integrate every (mu_s, mu_i) cell until its derivative is negligible.

    Each cell holds its own constant fidelities.  A cell counts as converged
    once the sup norm of its derivative drops below ``tol``; converged cells
    stop being advanced.  Returns (states (m, 3), residuals, converged mask,
    stop times).
    """
    m = mu_s_vec.shape[0]
    dbeta = bu - bp
    la = (1.0 - alpha) * loss
    half = 0.5 * h
    sixth = h / 6.0

    ys = np.full(m, y0)
    zss = np.full(m, zs0)
    zis = np.full(m, zi0)
    resid = np.full(m, np.inf)
    done = np.zeros(m, dtype=np.bool_)
    t_stop = np.full(m, t_max)

    n_steps = int(np.ceil(t_max / h))
    t = 0.0
    for step in range(n_steps):
        all_done = True
        for i in range(m):
            if done[i]:
                continue
            all_done = False
            y = ys[i]
            zs = zss[i]
            zi = zis[i]
            mu = mu_s_vec[i]
            mui = mu_i_vec[i]
            d1y, d1s, d1i, _ = _deriv(y, zs, zi, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, 0.0)
            d2y, d2s, d2i, _ = _deriv(y + half * d1y, zs + half * d1s, zi + half * d1i, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, 0.0)
            d3y, d3s, d3i, _ = _deriv(y + half * d2y, zs + half * d2s, zi + half * d2i, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, 0.0)
            d4y, d4s, d4i, _ = _deriv(y + h * d3y, zs + h * d3s, zi + h * d3i, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, 0.0)
            y += sixth * (d1y + 2.0 * (d2y + d3y) + d4y)
            zs += sixth * (d1s + 2.0 * (d2s + d3s) + d4s)
            zi += sixth * (d1i + 2.0 * (d2i + d3i) + d4i)
            if y < 0.0:
                y = 0.0
            elif y > 1.0:
                y = 1.0
            if zs < 0.0:
                zs = 0.0
            elif zs > 1.0:
                zs = 1.0
            if zi < 0.0:
                zi = 0.0
            elif zi > 1.0:
                zi = 1.0
            ys[i] = y
            zss[i] = zs
            zis[i] = zi
            if step % check_every == check_every - 1:
                dy, dzs, dzi, _ = _deriv(y, zs, zi, mu, mui, alpha, gamma, bp, dbeta, la, cp, cu, sigma, 0.0)
                r = abs(dy)
                if abs(dzs) > r:
                    r = abs(dzs)
                if abs(dzi) > r:
                    r = abs(dzi)
                resid[i] = r
                if r < tol:
                    done[i] = True
                    t_stop[i] = t + h
        t += h
        if all_done:
            break

    out = np.empty((m, 3))
    out[:, 0] = ys
    out[:, 1] = zss
    out[:, 2] = zis
    return out, resid, done, t_stop
