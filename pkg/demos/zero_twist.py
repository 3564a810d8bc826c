"""Circle rotation with a +/-1 counter for three rotation numbers."""

from fractions import Fraction

from azmap import ek_orbit, period_scan

print("alpha = 1/2, every non-singular grid point has period 2:", period_scan("1/2", 100))
lin = ek_orbit(1, Fraction(3, 10), 0, 10)
print("alpha = 1, counter:", lin.y_values.tolist())
g = ek_orbit((5**0.5 - 1) / 2, 0.1, 0, 10**6, decimation=10**5)
print(f"golden mean over 10^6 steps: {g.zero_crossings} returns to 0, range [{g.y_min}, {g.y_max}]")
print("sampled counter:", g.y_values.tolist())
