"""Compare the numba and numpy element kernels.

    python benchmarks/bench_kernels.py [--elements 20000] [--repeat 5]

Times element stiffness and stress recovery on random flat triangles, then a
full global assembly of a 30-triangle layer, under each backend.
"""

import argparse
import time
import warnings

import numpy as np

from trlsim.fea import kernels
from trlsim.fea.core import assemble
from trlsim.geometry import TrlSpec, build_mesh
from trlsim.materials import PA6


def best_of(fn, repeat):
    times = []
    for _ in range(repeat):
        t0 = time.perf_counter()
        fn()
        times.append(time.perf_counter() - t0)
    return min(times)


def main(argv=None):
    ap = argparse.ArgumentParser(description=__doc__.splitlines()[0])
    ap.add_argument("--elements", type=int, default=20000)
    ap.add_argument("--repeat", type=int, default=5)
    args = ap.parse_args(argv)
    warnings.simplefilter("ignore")

    rng = np.random.default_rng(0)
    coords = rng.random((args.elements, 3, 3)) * 1e-3
    t = np.full(args.elements, 1e-3)
    ue = rng.standard_normal((args.elements, 18)) * 1e-6
    mesh = build_mesh(TrlSpec(triangle_count=30), 1.0)

    backends = ["numpy"] + (["numba"] if kernels.numba_available() else [])
    results = {}
    previous = kernels.get_backend()
    try:
        for name in backends:
            kernels.set_backend(name)
            # first call compiles (or loads the cache)
            kernels.element_stiffness(coords[:10], t[:10], PA6.youngs_modulus, PA6.poisson_ratio, 1e-3)
            kernels.element_stress(coords[:10], t[:10], PA6.youngs_modulus, PA6.poisson_ratio, ue[:10])
            results[name] = (
                best_of(lambda: kernels.element_stiffness(coords, t, PA6.youngs_modulus, PA6.poisson_ratio, 1e-3),
                        args.repeat),
                best_of(lambda: kernels.element_stress(coords, t, PA6.youngs_modulus, PA6.poisson_ratio, ue),
                        args.repeat),
                best_of(lambda: assemble(mesh, PA6), max(1, args.repeat // 2)),
            )
        if len(backends) == 2:
            kernels.set_backend("numpy")
            k0 = kernels.element_stiffness(coords[:500], t[:500], PA6.youngs_modulus, PA6.poisson_ratio, 1e-3)
            kernels.set_backend("numba")
            k1 = kernels.element_stiffness(coords[:500], t[:500], PA6.youngs_modulus, PA6.poisson_ratio, 1e-3)
            print(f"max |K_numba - K_numpy| / max |K| = {np.abs(k1 - k0).max() / np.abs(k0).max():.2e}")
    finally:
        kernels.set_backend(previous)

    print(f"{args.elements} random elements; assembly mesh has {mesh.n_elements} elements")
    print(f"{'backend':<8}{'stiffness [s]':>15}{'stress [s]':>13}{'assembly [s]':>15}")
    for name, (ks, ss, asm) in results.items():
        print(f"{name:<8}{ks:>15.4f}{ss:>13.4f}{asm:>15.4f}")
    if len(results) == 2:
        a, b = results["numpy"], results["numba"]
        print(f"{'speedup':<8}{a[0] / b[0]:>14.1f}x{a[1] / b[1]:>12.1f}x{a[2] / b[2]:>14.1f}x")


if __name__ == "__main__":
    main()
