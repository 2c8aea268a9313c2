"""Pure-numpy reference implementations of the hot march kernels.

These are the fallback used when the compiled extension is unavailable.
Arithmetic is written in the same per-element order as the Cython kernels
so the two backends agree to the last bit (the extension is compiled with
FP contraction off).
"""

import numpy as np


def wave_march(u, wh, cm, vol, src, m2, dt2, inv_dx2):
    """March the leapfrog scheme for (box + m^2)u = src in place.

    u : (nt, nx) float64, rows 0 and 1 hold the initial data.
    wh : (nt-1, nx) half-step time weights (a/sqrt(b) averaged between rows).
    cm : (nt, nx) flux coefficient sqrt(b)/a at x midpoints j+1/2.
    vol : (nt, nx) volume weight a*sqrt(b).
    src : (nt, nx) source values multiplied by vol inside the update.
    """
    nt = u.shape[0]
    for n in range(1, nt - 1):
        un = u[n]
        flux = cm[n] * (np.roll(un, -1) - un) - np.roll(cm[n], 1) * (un - np.roll(un, 1))
        u[n + 1] = un + (
            wh[n - 1] * (un - u[n - 1]) + dt2 * (flux * inv_dx2 + vol[n] * (src[n] - m2 * un))
        ) / wh[n]
    return u


def dirac_march(p1, p2, cs, g1, g2, sb, f1, f2, m, dt, inv_dx):
    """March the upwind scheme for the two-component field in place.

    p1, p2 : (nt, nx) complex128, row 0 holds the initial data.
    cs : characteristic speed sqrt(b)/a; sb : sqrt(b);
    g1, g2 : first-order coefficient terms of the two characteristics.
    p1 is the left mover (forward x difference), p2 the right mover
    (backward x difference).
    """
    nt = p1.shape[0]
    for n in range(nt - 1):
        a1 = p1[n]
        a2 = p2[n]
        d1 = (np.roll(a1, -1) - a1) * inv_dx
        d2 = (a2 - np.roll(a2, 1)) * inv_dx
        p1[n + 1] = a1 + dt * (cs[n] * d1 + g1[n] * a1 - 1j * m * sb[n] * a2 + sb[n] * f2[n])
        p2[n + 1] = a2 + dt * (-(cs[n] * d2) + g2[n] * a2 - 1j * m * sb[n] * a1 + sb[n] * f1[n])
    return p1, p2
