"""Time the march kernels: compiled extension vs pure-numpy fallback.

Both backends run on identical inputs; the report prints per-call times and
the speedup. The compiled extension earns its keep on the inner x loop, so
the gap grows with nx.
"""

import argparse
import time

import numpy as np

from causalfields import _kernels_py

try:
    from causalfields import _kernels
except ImportError:
    _kernels = None


def _setup(nt, nx, seed=11):
    rng = np.random.default_rng(seed)
    dx = 2.0 * np.pi / nx
    dt = 0.5 * dx
    t = np.linspace(0.0, dt * (nt - 1), nt)[:, None]
    x = np.arange(nx)[None, :] * dx
    a = 1.0 + 0.2 * np.exp(-((t - t.mean()) ** 2)) * (1.0 + 0.1 * np.cos(x))
    b = np.ones_like(a)
    w = a / np.sqrt(b)
    wh = 0.5 * (w[:-1] + w[1:])
    cm = np.sqrt(b) / a
    cm = 0.5 * (cm + np.roll(cm, -1, axis=1))
    vol = a * np.sqrt(b)
    src = rng.normal(size=(nt, nx))
    u0 = np.zeros((nt, nx))
    u0[0] = rng.normal(size=nx) * 1e-3
    u0[1] = u0[0]
    return {
        "u0": u0,
        "wh": wh,
        "cm": cm,
        "vol": vol,
        "src": src,
        "dt": dt,
        "dx": dx,
        "a": a,
        "b": b,
    }


def _bench_wave(impl, data, reps):
    best = np.inf
    out = None
    for _ in range(reps):
        u = data["u0"].copy()
        t0 = time.perf_counter()
        impl.wave_march(
            u,
            data["wh"],
            data["cm"],
            data["vol"],
            data["src"],
            1.0,
            data["dt"] ** 2,
            1.0 / data["dx"] ** 2,
        )
        best = min(best, time.perf_counter() - t0)
        out = u
    return best, out


def _bench_dirac(impl, data, reps):
    nt, nx = data["u0"].shape
    cs = np.sqrt(data["b"]) / data["a"]
    sb = np.sqrt(data["b"])
    g1 = np.zeros_like(cs)
    g2 = np.zeros_like(cs)
    f = data["src"]
    best = np.inf
    out = None
    for _ in range(reps):
        p1 = np.zeros((nt, nx), dtype=complex)
        p2 = np.zeros((nt, nx), dtype=complex)
        p1[0] = data["u0"][0]
        t0 = time.perf_counter()
        impl.dirac_march(
            p1, p2, cs, g1, g2, sb, f, f, 1.0, data["dt"], 1.0 / data["dx"]
        )
        best = min(best, time.perf_counter() - t0)
        out = p1
    return best, out


def main(argv=None):
    parser = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    parser.add_argument("--nt", type=int, default=1024, help="time rows")
    parser.add_argument("--nx", type=int, default=1024, help="space columns")
    parser.add_argument("--reps", type=int, default=5, help="repetitions (best-of)")
    args = parser.parse_args(argv)

    data = _setup(args.nt, args.nx)
    print(f"lattice {args.nt} x {args.nx}, best of {args.reps}")

    for name, bench in (("wave_march", _bench_wave), ("dirac_march", _bench_dirac)):
        t_py, out_py = bench(_kernels_py, data, args.reps)
        line = f"{name:12s}  python {t_py * 1e3:9.3f} ms"
        if _kernels is not None:
            t_cy, out_cy = bench(_kernels, data, args.reps)
            dev = float(np.max(np.abs(np.asarray(out_cy) - out_py)))
            line += f"  cython {t_cy * 1e3:9.3f} ms  speedup {t_py / t_cy:6.2f}x"
            line += f"  max dev {dev:.3e}"
        else:
            line += "  (compiled extension unavailable)"
        print(line)


if __name__ == "__main__":
    main()
