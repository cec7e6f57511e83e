"""Independent high-precision values frozen into the C++ tests.

Run: python3 tests/oracles/compute_constants.py
"""
from itertools import product

from mpmath import mp, mpf, sqrt, pi, gamma, findroot

mp.dps = 40


def show(name, value):
    print(f"{name:<44} {mp.nstr(value, 17)}")


# Dense-family M constants and the mean absolute value of a unit draw.
show("m gaussian sigma=1", sqrt(2) / sqrt(pi))
show("m uniform c=2*sqrt2", 2 * sqrt(2) / (2 * sqrt(2)))
show("m discrete {-1,1}", mpf(2) / (sqrt(2) * 2))

# Marcinkiewicz-Zygmund constants.
p0 = findroot(lambda p: gamma((p + 1) / 2) - sqrt(pi) / 2, 1.85)
show("p0", p0)
show("|p0 - 1.84742|", abs(p0 - mpf("1.84742")))
show("A(1.9)", 2 ** mpf("0.95") * gamma(mpf("1.45")) / sqrt(pi))
show("A(p0) low branch", 2 ** (p0 / 2 - 1))
show("A(p0) gamma branch", 2 ** (p0 / 2) * gamma((p0 + 1) / 2) / sqrt(pi))
show("B(3)", 2 ** mpf("1.5") * gamma(2) / sqrt(pi))

# Bound bases.
show("base_general(0.5, 0.79788, 100)", mpf("0.5") * mpf("0.79788") * 10 / 2)
show("base_gaussian(0.5, 2, 784)", mpf("0.5") * 2 * 28 / sqrt(2 * pi))
show("  cubed (bound_length d=3, l=1)", (mpf("0.5") * 2 * 28 / sqrt(2 * pi)) ** 3)
show("base_gaussian(1, 2/28, 784)", 2 / sqrt(2 * pi))
show("base_uniform(0.5, 2, 100)", mpf("0.5") * 2 * 10 / (4 * sqrt(2)))
show("base_discrete(1, {-2..2}, 2)", sqrt(2) / (2 * sqrt(2)) * mpf(6) / 5)
show("base_discrete(0.5, {-1,1}, 784)", mpf("0.5") * 28 / (2 * sqrt(2)))
show("base_prior(2, 784)", 2 * 28 / sqrt(785))
show("base_prior(0.1, 1)", mpf("0.1") / sqrt(2))

# Brute-force subvector expectation for u = (1,1)/sqrt2, alpha = 0.5.
u = [1 / sqrt(2), 1 / sqrt(2)]
a = mpf("0.5")
tot = mpf(0)
for mask in product([0, 1], repeat=2):
    w = 1
    for m in mask:
        w *= a if m else 1 - a
    tot += w * sqrt(sum(ui * ui for ui, m in zip(u, mask) if m))
show("E||u_J||, u=(1,1)/sqrt2, alpha=0.5", tot)

# Brute-force E|w1 + w2| over {-1,1}^2.
show("E|w1+w2|, W={-1,1}", sum(abs(x + y) for x, y in product([-1, 1], repeat=2)) / mpf(4))

# Mean |entry| of the integer set {-2..2}.
show("sum|w|/N_w, W={-2..2}", mpf(sum(abs(w) for w in range(-2, 3))) / 5)
