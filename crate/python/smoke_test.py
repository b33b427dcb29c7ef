#!/usr/bin/env python3
"""Smoke test for the gsqg_py extension module.

Builds nothing itself: it locates the compiled cdylib under target/
(release preferred), stages it as an importable module, and exercises
the main types and operations against closed-form values.

    cargo build -p gsqg-py [--release]
    python3 python/smoke_test.py
"""

import math
import shutil
import sys
import tempfile
from pathlib import Path

REPO = Path(__file__).resolve().parent.parent


def stage_module() -> Path:
    candidates = [
        REPO / "target" / "release" / "libgsqg_py.so",
        REPO / "target" / "debug" / "libgsqg_py.so",
        REPO / "target" / "release" / "libgsqg_py.dylib",
        REPO / "target" / "debug" / "libgsqg_py.dylib",
    ]
    built = next((p for p in candidates if p.exists()), None)
    if built is None:
        sys.exit("gsqg_py cdylib not found; run `cargo build -p gsqg-py` first")
    stage = Path(tempfile.mkdtemp(prefix="gsqg_py_"))
    suffix = ".so" if built.suffix == ".so" else ".so"  # CPython loads .so on mac too
    shutil.copy2(built, stage / f"gsqg_py{suffix}")
    return stage


sys.path.insert(0, str(stage_module()))
import gsqg_py  # noqa: E402

checks = []


def check(name, ok, detail=""):
    checks.append(ok)
    print(f"{'PASS' if ok else 'FAIL'} {name}" + (f": {detail}" if detail else ""))


params = gsqg_py.Params(nu=1.0, s=0.5, sigma=1.5, alpha=1.0, beta=0.25, epsilon=0.5)
grid = gsqg_py.Grid(16)

# Norm closed form: pair +-(1,0), gamma*s = 1 (gamma = 1/s = 2), phi = 0.3
# gives sqrt(2) * e^{0.3}.
f = gsqg_py.Field.from_modes(grid, [(1, 0, 1.0, 0.0)])
norm = f.gevrey_norm(0.3, params, 2.0)
expect = math.sqrt(2.0) * math.exp(0.3)
check("gevrey norm closed form", abs(norm - expect) < 1e-12, f"{norm} vs {expect}")

# Physical field of the cosine pair.
phys = f.to_physical()
n = grid.n
x1 = 2.0 * math.pi * 3 / n
check(
    "physical samples are 2 cos(x1)",
    abs(phys[3 * n + 5] - 2.0 * math.cos(x1)) < 1e-12,
)

# Propagator roundtrip.
g = gsqg_py.Field.random(7, grid, params, 0.5, 1.5)
rt = g.gamma_apply(0.4, params).gamma_apply(-0.4, params)
worst = max(
    abs(complex(*rt.coeff(k1, k2)) - complex(*g.coeff(k1, k2)))
    for (k1, k2, _, _) in g.nonzero_modes()
)
check("propagator inverse pair", worst < 1e-12, f"worst {worst:.2e}")

# Admissibility arithmetic: threshold nu^2/2 - beta = 0.25.
ok, margin = gsqg_py.condition_check(g, params)
check("admissibility margin", abs(margin - (0.25 - 0.5)) < 1e-9 and not ok, f"margin {margin}")

# Path determinism and refinement endpoint constraint.
p1 = gsqg_py.Path.sample(42, 1.0, 0.01)
p2 = gsqg_py.Path.sample(42, 1.0, 0.01)
check("path determinism", p1.values() == p2.values())
fine = p1.refine(2, 0)
check(
    "bridge refinement keeps parent nodes",
    all(fine.values()[2 * i] == v for i, v in enumerate(p1.values())),
)

# Single-mode exact decay: nu = 1, |k| = 1, T = 2 -> factor e^{-1}.
u0 = gsqg_py.Field.from_modes(grid, [(1, 0, 0.8, 0.3)])
path = gsqg_py.Path.sample(11, 2.0, 0.05)
traj = gsqg_py.integrate_transformed(u0, path, params, dt=0.1, t_end=2.0)
got = complex(*traj.terminal.coeff(1, 0))
expect_c = complex(0.8, 0.3) * math.exp(-1.0)
check(
    "single-mode exact decay",
    abs(got - expect_c) <= 1e-12 * abs(expect_c),
    f"{got} vs {expect_c}",
)
check("single-mode monotone", traj.monotone)

# Direct SPDE geometric closed form on the same path.
traj_d = gsqg_py.integrate_direct(u0, path, params, dt=0.1, t_end=2.0)
w_t = path.values()[-1]
expect_d = complex(0.8, 0.3) * math.exp(w_t - 1.0)
got_d = complex(*traj_d.terminal.coeff(1, 0))
check(
    "direct SPDE geometric form",
    abs(got_d - expect_d) <= 1e-12 * abs(expect_d),
    f"{got_d} vs {expect_d}",
)

# Back-transform at W=0 is the identity.
bt = gsqg_py.back_transform(u0, 0.0, params)
check("back-transform identity at W=0", bt.coeff(1, 0) == u0.coeff(1, 0))

# Bilinear paths agree on a random pair.
fa = gsqg_py.Field.random(1, grid, params, 0.5, 1.5)
fb = gsqg_py.Field.random(2, grid, params, 0.4, 1.0)
fast = gsqg_py.bilinear_b_fft(fa, fb, 0.5, params)
slow = gsqg_py.bilinear_b_direct(fa, fb, 0.5, params)
scale = max(abs(complex(*slow.coeff(k1, k2))) for (k1, k2, _, _) in slow.nonzero_modes())
worst = max(
    abs(complex(*fast.coeff(k1, k2)) - complex(*slow.coeff(k1, k2)))
    for (k1, k2, _, _) in fast.nonzero_modes()
)
check("bilinear oracle equivalence", worst < 1e-10 * scale, f"worst {worst:.2e}")

# Snapshot roundtrip through bytes.
blob = g.to_bytes(params.s)
g2, s_back = gsqg_py.Field.from_bytes(blob)
check(
    "snapshot byte roundtrip",
    s_back == params.s and g2.nonzero_modes() == g.nonzero_modes(),
)

# Monte Carlo crossing frequency against the analytic value.
est, se = gsqg_py.mc_crossing_probability(20000, 30.0, 0.01, params, 99)
analytic = params.crossing_probability(params.alpha)
check(
    "crossing estimate near analytic value",
    abs(est - analytic) < 3.0 * se + 0.01,
    f"{est:.4f} vs {analytic:.4f} (se {se:.4f})",
)

print()
if all(checks):
    print(f"all {len(checks)} smoke checks passed")
else:
    sys.exit(f"{checks.count(False)} of {len(checks)} smoke checks FAILED")
