#!/usr/bin/env python3
"""Compare the two embedded solvers on representative instances.

The interior-point path produces certificates and converges in a handful
of iterations; the projection path trades certificates for memory, which
is what makes the larger extension problems affordable.  This prints a
table of wall times per instance family so the per-k solver defaults can
be sanity-checked on new hardware.
"""

import time

from qcc import sdp
from qcc.channels import partial_depolarizing_channel, xi_channel


def time_solve(problem, mode, repeats=3, **opts):
    best = float("inf")
    status = None
    for _ in range(repeats):
        t0 = time.perf_counter()
        out = sdp.solve(problem, mode=mode, **opts)
        best = min(best, time.perf_counter() - t0)
        status = out.status
    return best, status


def main():
    rows = []
    pair = (partial_depolarizing_channel(0.45, 2), partial_depolarizing_channel(0.45, 2))
    rows.append(("compat d=2 (feasible)", sdp.build_compat(*pair), ("interior_point", "projection")))
    pair = (partial_depolarizing_channel(0.2, 2), partial_depolarizing_channel(0.2, 2))
    rows.append(("compat d=2 (infeasible)", sdp.build_compat(*pair), ("interior_point", "projection")))
    xi = xi_channel(0.1, 0.5)
    rows.append(("jordan d=2", sdp.build_jordan_compat(xi, xi), ("interior_point",)))
    for k in (2, 3, 4):
        rows.append((f"k-extension k={k} (feasible)",
                     sdp.build_k_extension(xi_channel(0.2, 0.55), k),
                     ("interior_point", "projection") if k <= 3 else ("projection",)))
    rows.append(("k-extension k=4 (infeasible)",
                 sdp.build_k_extension(xi_channel(0.1, 0.15), 4), ("projection",)))

    print(f"{'instance':34s} {'mode':15s} {'status':13s} {'time':>9s}")
    for name, problem, modes in rows:
        for mode in modes:
            dt, status = time_solve(problem, mode)
            print(f"{name:34s} {mode:15s} {status:13s} {dt * 1000:8.1f}ms")


if __name__ == "__main__":
    main()
