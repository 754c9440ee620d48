"""Which square wells meet the threshold limits.

||S(lambda) - Id|| < 0.05 at lambda = 1e3 needs V0 a of order 1, i.e. a wide
and shallow well.  At lambda = 1e-4 the s-wave gives |s - 1| ~ 2 k a_s, so the
scattering length a_s = a (1 - tan z / z), z = sqrt(V0) a, must be below ~2.5.

  * one bound state in total (pi/2 < z < pi): tan z < 0, so a_s > a.
  * a_s = 0 at z = 4.4934 (tan z = z), where the d-wave has a zero-energy
    bound state and the threshold diagnostic flags the well.
  * slightly below that, z = 4.48 at a = 16 is generic (one s-wave and one
    p-wave state, N = 4) and meets both limits: configs/square_well_wide.toml.
"""

import numpy as np

from levindex.channels import Channel
from levindex.potentials import square_well
from levindex.scatter import threshold_norms
from levindex.spectrum import RadialGrid, count_bound_states, threshold_diagnostic

Z_D = 4.493409457909064     # tan z = z: d-wave zero-energy bound state


def row(z, a):
    V = square_well((z / a) ** 2, a)
    lo10, lo, hi = threshold_norms(V, 3, [1e-5, 1e-4, 1e3])
    N = count_bound_states(V, 3, RadialGrid()).total
    generic = threshold_diagnostic(Channel(3, 2), V, RadialGrid()).generic
    print(f"{z:8.4f} {a:6.1f} {N:3d} {str(generic):>8} {lo10:12.3g} {lo:12.3g} {hi:12.3g}")


def main():
    print(f"{'z':>8} {'a':>6} {'N':>3} {'d-generic':>8} {'1e-5':>12} {'1e-4':>12} {'1e3':>12}")
    for a in (1.0, 4.0, 8.0, 16.0):
        row(np.pi * 0.999, a)
    for z in (4.40, 4.45, 4.48, Z_D):
        row(z, 16.0)


if __name__ == "__main__":
    main()
