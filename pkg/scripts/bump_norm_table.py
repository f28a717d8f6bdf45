"""Table of n * ||xi_n||^2 (inhomogeneous H^{1/2}) from the dyadic Gram matrix
and from a uniform grid, showing where the grid stops resolving xi_n."""
import argparse

from vdl import constructions as C
from vdl import multiscale as MS
from vdl.spectral import Grid1D, GridFunction1D, MultiplierSpec, sobolev_norm_1d


def main():
    ap = argparse.ArgumentParser()
    ap.add_argument("--points", type=int, default=2 ** 15)
    ap.add_argument("--period", type=float, default=8.0)
    ap.add_argument("--s", type=float, default=0.5)
    args = ap.parse_args()
    spec = MultiplierSpec("inhomogeneous", args.s)
    grid = Grid1D(args.points, args.period)
    print("n,exact,grid,n_exact,n_grid")
    for n in (1, 2, 4, 8, 16, 32):
        exact = MS.xi_norm(n, spec) ** 2
        sampled = sobolev_norm_1d(GridFunction1D.sample(grid, lambda x: C.xi_n(n, x)), spec) ** 2
        print(f"{n},{exact:.10g},{sampled:.10g},{n * exact:.10g},{n * sampled:.10g}")


if __name__ == "__main__":
    main()
