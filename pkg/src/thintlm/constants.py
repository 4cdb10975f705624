import math

C0 = 299792458.0
MU0 = 4e-7 * math.pi
EPS0 = 1.0 / (MU0 * C0**2)
Z0 = math.sqrt(MU0 / EPS0)
Y0 = 1.0 / Z0
