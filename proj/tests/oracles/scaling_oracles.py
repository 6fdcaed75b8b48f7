"""Arbitrary-precision reference values frozen into the C++ unit tests.

Run with: python3 tests/oracles/scaling_oracles.py
Every quantity is evaluated straight from the defining formulas with mpmath at
50 significant digits, independent of the C++ implementation.
"""
from mpmath import mp, mpf, exp, sqrt

mp.dps = 50


def mono(B, beta, E, t):
    return mpf(B) / mpf(t) ** mpf(beta) + mpf(E)


def ratio(model_b, model_k, eta, r, i, D):
    s = sum((mpf(model_b[i][j]) + mpf(model_k[i][j]) / mpf(D)) * mpf(r[j])
            for j in range(len(r)) if j != i)
    return mpf(r[i]) + s * (1 - exp(-mpf(eta[i]) * mpf(r[i])))


print("mono_loss(3.2, 0.31, 1.9, 5e9) =", mp.nstr(mono("3.2", "0.31", "1.9", "5e9"), 20))
# ratio from loss: (1/D) (B/(L-E))^(1/beta)
val = (mpf(1) / mpf("2e10")) * (mpf("2.4") / (mpf("1.95") - mpf("1.7"))) ** (1 / mpf("0.4"))
print("ratio_from_loss(2.4, 0.4, 1.7, 2e10, 1.95) =", mp.nstr(val, 20))

r1 = mpf("0.5") + mpf("0.4") * mpf("0.5") * (1 - exp(-1))
print("predicted_ratio m=2 =", mp.nstr(r1, 20))
print("predicted_loss m=2 =", mp.nstr(2 + 1 / sqrt(mpf("1e9") * r1), 20))

# m=3 synthetic world used by weighted_objective and the CLI tests.
B = ["2", "1.5", "3"]
beta = ["0.3", "0.25", "0.4"]
E = ["1.8", "2.1", "1.6"]
b = [["0", "0.2", "0.1"], ["0.3", "0", "-0.05"], ["0.15", "0.25", "0"]]
k = [["0", "1e9", "2e9"], ["5e8", "0", "0"], ["0", "3e9", "0"]]
eta = ["2", "5", "1"]
omega = ["1", "2", "0.5"]
r = ["0.5", "0.3", "0.2"]
D = "1e10"
total = mpf(0)
for i in range(3):
    rt = ratio(b, k, eta, r, i, D)
    loss = mono(B[i], beta[i], E[i], mpf(D) * rt)
    print(f"  world3 rtilde[{i}] =", mp.nstr(rt, 20), " loss =", mp.nstr(loss, 20))
    total += mpf(omega[i]) * loss
print("weighted_objective world3 =", mp.nstr(total, 20))

# Optimal direction, m=2, omega=(1,1), B=(1,1), beta=(0.5,1), D=1e9.
Dd = mpf("1e9")
terms = [(mpf(1) * 1 * mpf(bt)) ** (1 / (mpf(bt) + 1)) * Dd ** (-mpf(bt) / (mpf(bt) + 1))
         for bt in ["0.5", "1"]]
s = sum(terms)
print("closed-form direction m=2 =", [mp.nstr(t / s, 20) for t in terms])

# Exact minimizer of sum B_i/(D x_i)^beta_i over x_1 + x_2 = 1, same inputs:
# root of the equal-marginal condition.
a = [mpf(1) * mpf("0.5") * Dd ** mpf("-0.5"), mpf(1) * mpf(1) * Dd ** mpf(-1)]
pw = [1 / (mpf("0.5") + 1), 1 / (mpf(1) + 1)]
u = mp.findroot(lambda u: sum(mp.exp((mp.log(ai) - u) * q) for ai, q in zip(a, pw)) - 1, -11)
x = [mp.exp((mp.log(ai) - u) * q) for ai, q in zip(a, pw)]
print("optimal direction m=2 =", [mp.nstr(v, 20) for v in x])

# Magnitude profile: B=(1,2), beta=(0.5,1), p=(0.4,0.6), D=1e6, c in {0.5,1,2}.
for c in ["0.5", "1", "2"]:
    v = mpf(1) / (mpf("1e6") * mpf(c) * mpf("0.4")) ** mpf("0.5") + \
        mpf(2) / (mpf("1e6") * mpf(c) * mpf("0.6")) ** 1
    print(f"magnitude_profile c={c} =", mp.nstr(v, 20))

# Goodness of fit reference: observed (2.0,2.5,3.0), predicted (2.1,2.4,3.1), delta 1e-3.
obs = [mpf("2.0"), mpf("2.5"), mpf("3.0")]
pre = [mpf("2.1"), mpf("2.4"), mpf("3.1")]
mean = sum(obs) / 3
ss_res = sum((o - p) ** 2 for o, p in zip(obs, pre))
ss_tot = sum((o - mean) ** 2 for o in obs)
d = mpf("1e-3")
hub = [d * (abs(o - p) - d / 2) if abs(o - p) > d else (o - p) ** 2 / 2 for o, p in zip(obs, pre)]
print("R2 =", mp.nstr(1 - ss_res / ss_tot, 20), " huber_mean =", mp.nstr(sum(hub) / 3, 20))

# Per-pair transfer, 3 languages, target 0, eta=2, D fixed; true alpha_{1->0}=0.4, alpha_{2->0}=-0.1.
# Design A: r=(0.3, 0.5, 0.2); design B: r=(0.3, 0.1, 0.6)  (same target share, distinct companions).
# r~ - r0 = (a1 r1 + a2 r2)(1 - e^{-eta r0}); solve the 2x2 system by Cramer's rule.
g = 1 - exp(-2 * mpf("0.3"))
yA = (mpf("0.4") * mpf("0.5") + mpf("-0.1") * mpf("0.2")) * g
yB = (mpf("0.4") * mpf("0.1") + mpf("-0.1") * mpf("0.6")) * g
print("per-pair rtilde A =", mp.nstr(mpf("0.3") + yA, 25), " B =", mp.nstr(mpf("0.3") + yB, 25))
det = mpf("0.5") * mpf("0.6") - mpf("0.2") * mpf("0.1")
a1 = (yA / g * mpf("0.6") - mpf("0.2") * yB / g) / det
a2 = (mpf("0.5") * yB / g - yA / g * mpf("0.1")) / det
print("cramer alpha =", mp.nstr(a1, 20), mp.nstr(a2, 20))
