"""Brute-force reference implementations used to cross-check the package.

Everything here is written as plain Python loops over (i, j) cell indices of
a periodic nx x ny grid, with its own face bookkeeping, independent of the
package's vectorised arrays.  Agreement between the two is therefore a real
consistency check and not a tautology.  Small grids only.
"""

import numpy as np


def cell_index(i, j, nx, ny):
    return (i % nx) + nx * (j % ny)


def loop_residual(rho_new, rho_old, u_old, nx, ny, lx, ly, gamma, eps, eta,
                  dt, viscous=1.0):
    """Implicit mass-balance residual assembled face by face.

    Flat row-major cell arrays; u_old has one (ux, uy) row per cell.  Every
    face is visited once from its lower-index (K) side and its flux is
    accumulated with opposite signs into the two incident cells:

        res_K = (rho_new_K - rho_old_K)/dt + (1/|K|) sum |face| F_face,K
        F = rho_K (w_plus + viscous) + rho_L (w_minus - viscous)
        w_plus = max(u_n, 0) - min(delta_u, 0),
        w_minus = min(u_n, 0) - max(delta_u, 0),
        u_n = ((u_K + u_L)/2) . n,  delta_u = (eta dt/eps^2)(|face|/|D|) [[p]]
    """
    hx, hy = lx / nx, ly / ny
    vol = hx * hy
    rho_new = np.asarray(rho_new, dtype=float)
    rho_old = np.asarray(rho_old, dtype=float)
    res = (rho_new - rho_old) / dt

    def press(z):
        return z ** gamma

    def add_face(k, l, axis, face_measure):
        u_n = 0.5 * (u_old[k][axis] + u_old[l][axis])
        grad_p = (face_measure / vol) * (press(rho_new[l]) - press(rho_new[k]))
        delta_u = (eta * dt / eps ** 2) * grad_p
        w_plus = max(u_n, 0.0) - min(delta_u, 0.0)
        w_minus = min(u_n, 0.0) - max(delta_u, 0.0)
        flux = rho_new[k] * (w_plus + viscous) + rho_new[l] * (w_minus - viscous)
        res[k] += (face_measure / vol) * flux
        res[l] -= (face_measure / vol) * flux

    for j in range(ny):
        for i in range(nx):
            k = cell_index(i, j, nx, ny)
            add_face(k, cell_index(i + 1, j, nx, ny), 0, hy)
            add_face(k, cell_index(i, j + 1, nx, ny), 1, hx)
    return res


def dense_newton(rho_old, u_old, nx, ny, lx, ly, gamma, eps, eta, dt,
                 viscous=1.0, tol=1e-11, max_iter=200):
    """Newton on loop_residual with a dense finite-difference Jacobian.

    Intended for grids of a few dozen cells.  Returns (rho, iterations,
    final residual max-norm).  Raises if the residual cannot be driven
    below tol, so callers never compare against an unconverged oracle.
    """
    n = nx * ny
    rho_old = np.asarray(rho_old, dtype=float)
    rho = rho_old.copy()

    def resid(z):
        return loop_residual(z, rho_old, u_old, nx, ny, lx, ly, gamma, eps,
                             eta, dt, viscous)

    norm = float(np.abs(resid(rho)).max())
    for it in range(max_iter):
        if norm <= tol:
            return rho, it, norm
        jac = np.empty((n, n))
        base = resid(rho)
        for c in range(n):
            h = 1e-7 * max(1.0, abs(rho[c]))
            zp = rho.copy()
            zp[c] += h
            zm = rho.copy()
            zm[c] -= h
            jac[:, c] = (resid(zp) - resid(zm)) / (2.0 * h)
        delta = np.linalg.solve(jac, base)
        scale = 1.0
        for _ in range(40):
            cand = rho - scale * delta
            if cand.min() > 0.0:
                cnorm = float(np.abs(resid(cand)).max())
                if cnorm < norm:
                    rho, norm = cand, cnorm
                    break
            scale *= 0.5
        else:
            break
    if norm > tol:
        raise RuntimeError(f"dense oracle Newton stalled at residual {norm}")
    return rho, max_iter, norm


def loop_cell_gradient(q, nx, ny, lx, ly):
    """Cell gradient by the verbatim face sum (|face|/|K|) {{q}} n_K,face."""
    hx, hy = lx / nx, ly / ny
    vol = hx * hy
    q = np.asarray(q, dtype=float)
    grad = np.zeros((nx * ny, 2))
    for j in range(ny):
        for i in range(nx):
            k = cell_index(i, j, nx, ny)
            neighbours = [
                (cell_index(i + 1, j, nx, ny), hy, (+1.0, 0.0)),
                (cell_index(i - 1, j, nx, ny), hy, (-1.0, 0.0)),
                (cell_index(i, j + 1, nx, ny), hx, (0.0, +1.0)),
                (cell_index(i, j - 1, nx, ny), hx, (0.0, -1.0)),
            ]
            for l, measure, normal in neighbours:
                avg = 0.5 * (q[k] + q[l])
                grad[k, 0] += (measure / vol) * avg * normal[0]
                grad[k, 1] += (measure / vol) * avg * normal[1]
    return grad


def loop_cell_divergence(phi, nx, ny, lx, ly):
    """Cell divergence by the verbatim face sum (|face|/|K|) {{phi}} . n."""
    hx, hy = lx / nx, ly / ny
    vol = hx * hy
    phi = np.asarray(phi, dtype=float)
    div = np.zeros(nx * ny)
    for j in range(ny):
        for i in range(nx):
            k = cell_index(i, j, nx, ny)
            neighbours = [
                (cell_index(i + 1, j, nx, ny), hy, (+1.0, 0.0)),
                (cell_index(i - 1, j, nx, ny), hy, (-1.0, 0.0)),
                (cell_index(i, j + 1, nx, ny), hx, (0.0, +1.0)),
                (cell_index(i, j - 1, nx, ny), hx, (0.0, -1.0)),
            ]
            for l, measure, normal in neighbours:
                avg = 0.5 * (phi[k] + phi[l])
                div[k] += (measure / vol) * (avg[0] * normal[0] + avg[1] * normal[1])
    return div
