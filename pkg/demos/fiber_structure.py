"""How one return changes the action, across a single fiber.

Splits the fundamental domain at a few actions into the gain, neutral and
loss parts, compares the closed-form endpoints with a brute-force grid and
shows that the gain part at level I has the same length as the loss part
one level up.
"""

from azmap import MapParams, classify_fiber, fiber_analytics

p = MapParams.pinball("1/ln(2)")
print(f"alpha = {p.alpha:.15f}, mu = {p.mu:g}")
for I in (101, 501, 1001):
    r = classify_fiber(p, I, grid=10**5)
    nxt = fiber_analytics(p, I + 1)
    plus = (r.i_plus[1] - r.i_plus[0]) / r.cell
    minus = (r.i_minus[1] - r.i_minus[0]) / r.cell
    minus_next = (nxt.i_minus[1] - nxt.i_minus[0]) / r.cell
    err = max(abs(e) for pr in r.endpoint_errors().values() for e in pr)
    print(f"I={I:5d}  |I+|={plus:10.3f}  |I-|={minus:10.3f}  |I-(I+1)|={minus_next:10.3f}  "
          f"neutral parts={len(r.i_zero_components)}  endpoint error={err:.2f} cells")
