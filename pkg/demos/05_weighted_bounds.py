"""Weighted envelope constants of the hierarchy layers.

Layer p carries everything of order epsilon^p; if the construction converges,
the weighted sup-norms M_p grow at most geometrically, i.e. M_p^(1/p) stays
bounded.  The density constants additionally carry the fitted time-decay
exponent sigma.
"""

from vpecho.cascade import CascadeConfig, InitialData, build_cascade
from vpecho.diagnostics import BoundProfile, fit_sigma, verify_layer_bound
from vpecho.equilibrium import make_gaussian
from vpecho.grids import FreqGrid, TimeGrid

eq = make_gaussian()
cfg = CascadeConfig(K=1, L=1, epsilon=1e-3, lambda0=0.25, k_max=1, eta_max=2,
                    p_max=4, etap_grid=FreqGrid(60.0, 0.25),
                    t_grid=TimeGrid(14.0, 0.05), time_refine=2)
data = InitialData.from_modes(cfg, [(1, 2, 1.0), (1, -1, 1.0)])

print("building the hierarchy ...")
state = build_cascade(eq, cfg, data)
sigma = fit_sigma(state)
print(f"fitted density time-decay exponent sigma = {sigma:.2f}")

reports = verify_layer_bound(state, BoundProfile(cfg.lambda0, delta=0.1, sigma=sigma))
print(f"\n{'p':>2} {'M_f':>12} {'M_f^(1/p)':>10} {'M_f (decaying wt)':>18} {'M_rho':>12}")
for r in reports:
    print(f"{r.p:>2} {r.m_profile:>12.4e} {r.m_profile ** (1 / r.p):>10.3f} "
          f"{r.m_profile_decaying:>18.4e} {r.m_density:>12.4e}")

roots = [r.m_profile ** (1 / r.p) for r in reports]
print(f"\ngeometric-root constants stay bounded: max M_p^(1/p) = {max(roots):.3f}")
print("note: the decaying-weight columns use the rate lambda0 + <t>^-delta + p^-delta,")
print("which exceeds the data's 2*lambda0 decay for broad data like this run, so those")
print("constants inflate by construction; the flat M_f columns carry the convergence story.")
