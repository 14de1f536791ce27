#!/usr/bin/env python3
"""Gridded-LMI synthesis of a planar-quadrotor contraction metric.

Produces the certificate consumed by `rampc verify-ccm` and the rest of the
toolkit (data/quadrotor_ccm.json). The dual metric W depends on (phi, v1), the
gain numerator Y on (phi, v1, v2, phidot). The contraction LMI

    -dW/dt + A W + W A^T + B_u Y + Y^T B_u^T + 2 rho W <= -margin * I

is imposed on a grid over the constraint box and on every vertex of
Theta_0 x D (the LMI is affine in theta and d). The mismatch LMI
[[W, G dtheta + E d], [*, wmax^2]] >= 0 is imposed on the same grid, and
wmax is minimised subject to per-constraint tightening budgets.

The result is only a sampled certificate; `rampc verify-ccm` re-checks it on
an independent, denser sample set.
"""

import argparse
import itertools
import json
import math

import cvxpy as cp
import numpy as np

# state order: p1 p2 phi v1 v2 phidot
N_X = 6
N_U = 2
IPHI, IV1, IV2, IPHID = 2, 3, 4, 5


def monomials(num_vars, degree):
    out = []
    for total in range(degree + 1):
        for exps in itertools.product(range(total + 1), repeat=num_vars):
            if sum(exps) == total:
                out.append(exps)
    return out


def eval_monos(monos, vals):
    return np.array([np.prod([v ** e for v, e in zip(vals, ex)]) for ex in monos])


def deriv_monos(monos, vals, var):
    out = []
    for ex in monos:
        if ex[var] == 0:
            out.append(0.0)
            continue
        e2 = list(ex)
        c = e2[var]
        e2[var] -= 1
        out.append(c * np.prod([v ** e for v, e in zip(vals, e2)]))
    return np.array(out)


def jac_x(x, d, g):
    phi, v1, v2, phid = x[IPHI], x[IV1], x[IV2], x[IPHID]
    c, s = math.cos(phi), math.sin(phi)
    A = np.zeros((N_X, N_X))
    A[0, IPHI] = -v1 * s - v2 * c
    A[0, IV1] = c
    A[0, IV2] = -s
    A[1, IPHI] = v1 * c - v2 * s
    A[1, IV1] = s
    A[1, IV2] = c
    A[2, IPHID] = 1.0
    A[3, IPHI] = -g * c - d * s
    A[3, IV2] = phid
    A[3, IPHID] = v2
    A[4, IPHI] = g * s - d * c
    A[4, IV1] = -phid
    A[4, IPHID] = -v1
    return A


def jac_u(theta, l_over_j):
    Bu = np.zeros((N_X, N_U))
    Bu[4, :] = theta
    Bu[5, 0] = l_over_j
    Bu[5, 1] = -l_over_j
    return Bu


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--out", default="data/quadrotor_ccm.json")
    ap.add_argument("--rho", type=float, default=0.8)
    ap.add_argument("--rho-cert", type=float, default=None,
                    help="contraction rate written to the certificate (default: --rho)")
    ap.add_argument("--margin", type=float, default=1e-4)
    ap.add_argument("--grid", type=int, default=5)
    ap.add_argument("--w-degree", type=int, default=2)
    ap.add_argument("--y-degree", type=int, default=2)
    ap.add_argument("--wmin", type=float, default=1e-4)
    ap.add_argument("--budget-scale", type=float, default=1.0)
    args = ap.parse_args()

    g, m, l, J = 9.81, 0.486, 0.25, 0.00383
    l_over_j = l / J
    theta_bar0 = 2.058
    thetas = [0.99 * theta_bar0, 1.01 * theta_bar0]
    dists = [-0.1, 0.1]
    bounds = {IPHI: math.pi / 3, IPHID: math.pi, IV1: 2.0, IV2: 1.0}
    u_lo, u_hi = -1.0, 3.5

    w_vars = [IPHI, IV1]
    y_vars = [IPHI, IV1, IV2, IPHID]
    w_monos = monomials(len(w_vars), args.w_degree)
    y_monos = monomials(len(y_vars), args.y_degree)

    Wc = [cp.Variable((N_X, N_X), symmetric=True) for _ in w_monos]
    Yc = [cp.Variable((N_U, N_X)) for _ in y_monos]
    wmax2 = cp.Variable(nonneg=True)

    grid = {k: np.linspace(-b, b, args.grid) for k, b in bounds.items()}
    cons = []
    for phi, phid, v1, v2 in itertools.product(grid[IPHI], grid[IPHID], grid[IV1], grid[IV2]):
        x = np.zeros(N_X)
        x[IPHI], x[IPHID], x[IV1], x[IV2] = phi, phid, v1, v2
        wv = eval_monos(w_monos, [x[i] for i in w_vars])
        yv = eval_monos(y_monos, [x[i] for i in y_vars])
        dphi = deriv_monos(w_monos, [x[i] for i in w_vars], 0)
        dv1 = deriv_monos(w_monos, [x[i] for i in w_vars], 1)
        W = sum(c * M for c, M in zip(wv, Wc))
        Y = sum(c * M for c, M in zip(yv, Yc))
        dW_dphi = sum(c * M for c, M in zip(dphi, Wc) if c != 0.0)
        dW_dv1 = sum(c * M for c, M in zip(dv1, Wc) if c != 0.0)
        for d in dists:
            v1dot = v2 * phid - g * math.sin(phi) + d * math.cos(phi)
            Wdot = dW_dphi * phid + dW_dv1 * v1dot
            A = jac_x(x, d, g)
            for th in thetas:
                Bu = jac_u(th, l_over_j)
                AW = A @ W + Bu @ Y
                lmi = -Wdot + AW + AW.T + 2 * args.rho * W
                cons.append(0.5 * (lmi + lmi.T) << -args.margin * np.eye(N_X))
        cons.append(W >> args.wmin * np.eye(N_X))
        # tightening budgets: c_j^2 = W_ii for state boxes, e_i^T Y W^{-1} Y^T e_i for inputs
        s = args.budget_scale
        for i, b in bounds.items():
            cons.append(W[i, i] <= (s * b) ** 2)
        cons.append(W[0, 0] <= s ** 2)
        cons.append(W[1, 1] <= s ** 2)
        umarg = (u_hi - g / (2 * theta_bar0))
        for i in range(N_U):
            row = cp.reshape(Y[i, :], (1, N_X), order="C")
            cons.append(cp.bmat([[W, row.T], [row, np.array([[(s * umarg) ** 2]])]]) >> 0)
        # mismatch bound at the extreme thrust values inside the box
        for usum in (2 * u_lo, 2 * u_hi):
            for th in thetas:
                for d in dists:
                    dth = th - theta_bar0
                    w = np.zeros(N_X)
                    w[4] = dth * usum - d * math.sin(phi)
                    w[3] = d * math.cos(phi)
                    col = w.reshape(N_X, 1)
                    cons.append(cp.bmat([[W, col], [col.T, cp.reshape(wmax2, (1, 1), order="C")]]) >> 0)

    prob = cp.Problem(cp.Minimize(wmax2), cons)
    prob.solve(solver=cp.CLARABEL, verbose=False)
    print("status", prob.status, "wmax", math.sqrt(max(wmax2.value, 0.0)) if wmax2.value is not None else None)
    if prob.status not in ("optimal", "optimal_inaccurate"):
        raise SystemExit(1)

    def term_list(monos, coeffs, var_map, rows, cols):
        out = []
        for ex, C in zip(monos, coeffs):
            val = np.array(C.value)
            if rows == cols:
                val = 0.5 * (val + val.T)
            if np.max(np.abs(val)) < 1e-12:
                continue
            full = [0] * N_X
            for k, e in zip(var_map, ex):
                full[k] = int(e)
            out.append({"exponents": full, "coeffs": val.tolist()})
        return out

    cert = {
        "format": "rampc-ccm/1",
        "n": N_X,
        "m": N_U,
        "state_names": ["p1", "p2", "phi", "v1", "v2", "phidot"],
        "rho_c": args.rho if args.rho_cert is None else args.rho_cert,
        "W": term_list(w_monos, Wc, w_vars, N_X, N_X),
        "Y": term_list(y_monos, Yc, y_vars, N_U, N_X),
        "metadata": {
            "generator": "scripts/synth_quadrotor_ccm.py",
            "W_depends_on": ["phi", "v1"],
            "Y_depends_on": ["phi", "v1", "v2", "phidot"],
            "w_degree": args.w_degree,
            "y_degree": args.y_degree,
            "grid_points_per_axis": args.grid,
            "lmi_margin": args.margin,
            "rho_synthesis": args.rho,
            "wmax": math.sqrt(max(wmax2.value, 0.0)),
        },
    }
    with open(args.out, "w") as fh:
        json.dump(cert, fh, indent=1)
    print("wrote", args.out)


if __name__ == "__main__":
    main()
