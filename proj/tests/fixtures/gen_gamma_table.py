#!/usr/bin/env python3
"""Generate the 50-digit Gamma reference table used by the unit tests.

Run from the repository root:

    python3 tests/fixtures/gen_gamma_table.py > tests/fixtures/gamma_table.txt

Requires mpmath.  The table is checked in; this script only documents how
it was produced.
"""
import mpmath as mp

mp.mp.dps = 60

points = []
# small arguments, half-integers, integers, awkward spots, large arguments
points += [0.001, 0.01, 0.1, 0.25, 0.5, 0.75, 1.0, 1.25, 1.4999999, 1.5]
points += [2.0, 2.5, 3.0, 3.5, 4.0, 4.5, 5.0, 6.0, 7.5, 8.0]
points += [0.0005, 0.005, 0.05, 1.0005, 2.0005, 9.5, 10.0, 12.0, 15.0, 17.25]
points += [20.0, 25.0, 30.0, 40.0, 55.5, 71.0, 100.0, 130.25, 171.0, 199.5]
points += [0.3333333333333333, 0.6666666666666666, 1.3333333333333333,
           2.6666666666666665, 0.9999995, 3.0000005, 0.7071067811865476,
           4.669201609102991, 33.3333333333, 142.7]

print("# x  Gamma(x)   [50 significant digits, generated by gen_gamma_table.py]")
for x in points:
    g = mp.gamma(mp.mpf(repr(x)))
    print(f"{repr(x)} {mp.nstr(g, 50)}")
