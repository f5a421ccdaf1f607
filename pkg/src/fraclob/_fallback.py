"""Pure numpy versions of the hot loops; same signatures as the compiled core."""
import math

import numpy as np

BACKEND = "python"


def weighted_sum(ring, w, out):
    """out = sum_k w[k] * ring[k]."""
    np.dot(w, ring, out=out)


def lit_source(x, centre, kappa, mu, out):
    y = mu * (x - centre)
    np.multiply(y, np.exp(-y * y), out=out)
    out *= -kappa


def uniform_update(H, prev, src, wl, wr, r, decay, dt, gl, gr, out):
    """Stencil on the aggregated field H with scalar ghosts gl, gr."""
    n = H.shape[0]
    out[1:n - 1] = wl * H[0:n - 2] + wr * H[2:n]
    out[0] = wl * gl + wr * H[1]
    out[n - 1] = wl * H[n - 2] + wr * gr
    out -= r * H
    out += decay * prev
    out += dt * src


def nonuniform_update(HL, HR, H, prev, src, wl, wr, r, decay, dt, out):
    np.multiply(wl, HL, out=out)
    out += wr * HR
    out -= r * H
    out += decay * prev
    out += dt * src


def shifted_row(row, shift, out):
    """Three-point mid-point rule at x_i + shift*dx for every node i."""
    n = row.shape[0]
    base = math.floor(shift)
    f = shift - base
    i = np.arange(n)
    k = i + base
    inside = (k >= 0) & (k <= n - 1)
    kc = np.clip(k, 0, n - 1)
    val = row[kc].copy()
    if f != 0.0:
        interior = inside & (k >= 1) & (k <= n - 2)
        ki = k[interior]
        val[interior] += 0.5 * f * (row[ki + 1] - row[ki - 1])
        left = inside & (k == 0)
        if left.any():
            val[left] += f * (row[1] - row[0])
        # k == n-1 with f > 0 lies beyond x_max: clamped to the boundary value
    out[:] = val


def crossing_root(phi, x0, dx, k):
    """Root for the descending bracket starting at k (phi[k] > 0)."""
    n = phi.shape[0]
    m = k + 1
    while m < n and phi[m] == 0.0:
        m += 1
    if m >= n or phi[m] > 0.0:
        return math.nan
    if m == k + 1:
        return x0 + dx * k + dx * phi[k] / (phi[k] - phi[m])
    # zero plateau between the last bid and first ask node: take its centre
    return x0 + dx * 0.5 * (k + 1 + m - 1)


def nearest_crossing(phi, x0, dx, k0):
    """Mid-price from the descending crossing whose bracket is nearest index k0."""
    n = phi.shape[0]
    k0 = min(max(int(k0), 0), n - 2)
    for d in range(n):
        for k in (k0 - d, k0 + d) if d else (k0,):
            if 0 <= k < n - 1 and phi[k] > 0.0 and phi[k + 1] <= 0.0:
                root = crossing_root(phi, x0, dx, k)
                if root == root:
                    return root
    return math.nan
