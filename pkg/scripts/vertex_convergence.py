"""Vertex ratio V^e1/V^1 as q -> 1 next to the Bethe root it converges to.

    python3 scripts/vertex_convergence.py --n 2 --z 0.05
"""

import argparse

from xxzqk.bethe import BetheSystem, solve_all
from xxzqk.config import ParamsBlock
from xxzqk.core import FixedPoint, SymmetricFunctionSpec, parse_complex
from xxzqk.vertex import DEFAULT_Q_SEQUENCE, extract_eigenvalue, ratio_trend, trend_z_default, vertex_ratio


def main() -> None:
    ap = argparse.ArgumentParser(description=__doc__.split("\n\n")[0])
    ap.add_argument("--n", type=int, default=2)
    ap.add_argument("--z", default="0.05")
    ap.add_argument("--d-max", type=int, default=14)
    args = ap.parse_args()

    params = ParamsBlock(n=args.n).build()
    z = parse_complex(args.z)
    tau = SymmetricFunctionSpec.elementary(1)
    for sol in solve_all(BetheSystem(params.n, 1, params, "geometric", z)):
        pt = FixedPoint(sol.origin, params.n)
        root = complex(sol.roots[0])
        print(f"fixed point {pt.label()}: Bethe root {root:.8f}")
        for q in DEFAULT_Q_SEQUENCE[::4]:
            r, tail, _ = vertex_ratio(pt, tau, z, q, args.d_max, params)
            print(f"  q={q:.6f}  ratio={r:.8f}  |ratio-root|={abs(r - root):.2e}  tail={tail:.1e}")
        ext = extract_eigenvalue(pt, tau, z, params, d_max=args.d_max)
        print(f"  extrapolated {ext.value:.8f}  error {abs(ext.value - root):.2e}  (estimate {ext.error_estimate:.1e})")

    zt = trend_z_default(params.n)
    spread, growth, tail = ratio_trend(FixedPoint(1, params.n), tau, zt, params)
    print(f"\ntrend at z={zt:.2e}: ratio spread {spread:.2e}, |V^1| growth {growth:.3g}, tail {tail:.1e}")


if __name__ == "__main__":
    main()
