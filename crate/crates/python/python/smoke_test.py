"""Quick check that the extension loads and agrees with itself."""

import math

import magnodrag as md

p = md.SystemParams.reference(0.01).with_coupling_ratio(0.1).with_power(3e-3)
s = md.solve_steady(p)
assert s.residual < 1e-9, s
assert s.magnon_number > 0 and len(s.roots) >= 1
print(s)

r = md.probe_response(p, s.g_eff, 0.0, velocity=300.0)
assert r["chi"].real >= 0 and r["drag"] is not None
print("n_g at sigma=0:", r["n_g"])

t = md.run_sweep(p, "sigma", -0.5, 0.5, 2001)
cols = t.columns()
assert len(t) == 2001 and t.failed_rows == 0
assert all(f == "ok" for f in cols["flag"])
f = t.features()
assert len(f["windows"]) == 2 and len(f["peaks"]) == 3, f
print("windows:", [round(w["fwhm"], 4) for w in f["windows"]])

v = md.run_sweep(p, "velocity", -300, 300, 61, sigma=0.0)
d = v.columns()["drag"]
assert math.isclose(d[0], -d[-1], rel_tol=1e-12)
print("luminality:", v.features()["luminality"])

fig = md.figure("2b", md.SystemParams.reference(0.01))
assert list(fig) == ["Gamma=0", "Gamma=0.1", "Gamma=0.2", "Gamma=0.4"]
assert len(md.FIGURES) == 18
assert "sigma" in t.to_csv().splitlines()[0]
print("smoke test passed")
