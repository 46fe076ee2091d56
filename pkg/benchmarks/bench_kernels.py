"""Compare the compiled kernels with the numpy fallback.

Run with ``python benchmarks/bench_kernels.py [--nel 4096] [--repeat 5]``.
Each backend is timed on the same inputs; results are checked for agreement
before timing.  A whole-assembly timing is taken in a subprocess with
``STLAB_KERNELS=python`` so the fallback is measured end to end.
"""
import argparse
import os
import subprocess
import sys
import timeit

import numpy as np

from stlab import _kernels_py
from stlab.kernels import BACKEND

try:
    from stlab import _kernels as _compiled
except ImportError:
    _compiled = None

ASSEMBLY = (
    "from stlab import FormSpec, Mesh, assemble_system, make_maximal_space, reduce; "
    "s = make_maximal_space(Mesh.uniform(10.0, {nel}), {p}); "
    "assemble_system(reduce(s, 'trial'), reduce(s, 'test'), FormSpec.standard(1000.0))"
)


def inputs(nel, p, npts):
    knots = np.concatenate([np.zeros(p), np.linspace(0.0, 10.0, nel + 1), np.full(p, 10.0)])
    g, _ = np.polynomial.legendre.leggauss(npts)
    a = np.linspace(0.0, 10.0, nel + 1)
    x = ((a[:-1, None] + a[1:, None]) / 2 + (a[1:, None] - a[:-1, None]) / 2 * g).ravel()
    return knots, x


def time_call(fn, repeat):
    return min(timeit.repeat(fn, number=1, repeat=repeat))


def kernel_rows(nel, p, repeat):
    npts = p + 1
    knots, x = inputs(nel, p, npts)
    rows = []
    mods = [("python", _kernels_py)] + ([("cython", _compiled)] if _compiled else [])
    ref = {}
    for name, mod in mods:
        spans = mod.find_spans(knots, p, x)
        ders = mod.basis_ders(knots, p, x, spans, 1)
        vals = np.asarray(ders)[:, 1, :].reshape(nel, npts, p + 1)
        w = np.full((nel, npts), 10.0 / nel / npts)
        first = np.arange(nel)
        gram = mod.band_gram(vals, vals, w, first, nel + p, p)
        out = (np.asarray(spans), np.asarray(ders), np.asarray(gram))
        if ref:
            for r, o in zip(ref["out"], out):
                np.testing.assert_allclose(o, r, rtol=1e-13, atol=1e-13)
        else:
            ref["out"] = out
        t = {
            "find_spans": time_call(lambda: mod.find_spans(knots, p, x), repeat),
            "basis_ders": time_call(lambda: mod.basis_ders(knots, p, x, spans, 1), repeat),
            "band_gram": time_call(lambda: mod.band_gram(vals, vals, w, first, nel + p, p), repeat),
        }
        rows.append((name, t))
    return rows


def assembly_time(nel, p, backend, repeat):
    env = dict(os.environ)
    if backend == "python":
        env["STLAB_KERNELS"] = "python"
    else:
        env.pop("STLAB_KERNELS", None)
    code = (
        "import timeit; "
        f"print(min(timeit.repeat({ASSEMBLY.format(nel=nel, p=p)!r}, number=1, repeat={repeat})))"
    )
    r = subprocess.run([sys.executable, "-c", code], env=env, capture_output=True, text=True, check=True)
    return float(r.stdout)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--nel", type=int, default=4096)
    ap.add_argument("--degree", type=int, nargs="+", default=[1, 2, 4])
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    print(f"default backend: {BACKEND}")
    if _compiled is None:
        print("compiled extension not built; timing the fallback only")
    print(f"{'p':>2} {'kernel':<12} {'python [ms]':>12} {'cython [ms]':>12} {'speedup':>8}")
    for p in args.degree:
        rows = dict(kernel_rows(args.nel, p, args.repeat))
        for k in ("find_spans", "basis_ders", "band_gram"):
            tp = rows["python"][k] * 1e3
            tc = rows["cython"][k] * 1e3 if "cython" in rows else float("nan")
            print(f"{p:>2} {k:<12} {tp:12.3f} {tc:12.3f} {tp / tc:8.1f}")
        tp = assembly_time(args.nel, p, "python", args.repeat) * 1e3
        tc = assembly_time(args.nel, p, "cython", args.repeat) * 1e3 if _compiled else float("nan")
        print(f"{p:>2} {'assembly':<12} {tp:12.3f} {tc:12.3f} {tp / tc:8.1f}")


if __name__ == "__main__":
    main()
