import sys
sys.path.insert(0, "src")
from orbclann.galois import BaseField, make_datum
from orbclann.blocks import clannish_block, jacobian_block
from orbclann.rep import (
    Representation, validate, hom, end, direct_sum, is_isomorphic,
    is_indecomposable, simples, projectives, zero_representation,
)

F5 = BaseField.prime(5)
D4 = make_datum(F5, 4)
c = D4.c

blk6 = clannish_block(6, D4, {"a": 1, "b": 0, "g": 1})
alg = blk6.algebra

Z = [[0] * 4 for _ in range(4)]
Mu = [[0, c], [1, 0]]


def diag2(B):
    n = len(B)
    out = [[0] * (2 * n) for _ in range(2 * n)]
    for i in range(n):
        for j in range(n):
            out[i][j] = B[i][j]
            out[n + i][n + j] = B[i][j]
    return out


U1 = diag2(Mu)
negMu = [[(-x) % 5 for x in row] for row in Mu]
U3 = [[0] * 8 for _ in range(8)]
for b, blk in enumerate([negMu, negMu, Mu, Mu]):
    for i in range(2):
        for j in range(2):
            U3[2 * b + i][2 * b + j] = blk[i][j]

Xg = [[1 if i == j else 0 for j in range(4)] for i in range(8)]
Xb = [[1 if j == 4 + i else 0 for j in range(8)] for i in range(4)]
Xs2 = [[0] * 4 for _ in range(4)]
for i in range(2):
    for j in range(2):
        Xs2[i][2 + j] = Mu[i][j]
    Xs2[2 + i][i] = 1
Xs3 = [[0] * 8 for _ in range(8)]
for i in range(4):
    Xs3[i][4 + i] = 1
    Xs3[4 + i][i] = 1

N = Representation(
    alg,
    {"1": 4, "2": 4, "3": 8},
    {"1": U1, "2": U1, "3": U3},
    {"g": Xg, "b": Xb, "s2": Xs2, "s3": Xs3},
)
rep_report = validate(N, blk6)
print("N valid:", rep_report.ok, rep_report.violations)
E = end(N)
print("dim end(N):", E.dimension)
print("indecomposable:", is_indecomposable(N))

# perturbation: replace s3 by the identity
Npert = Representation(
    alg,
    {"1": 4, "2": 4, "3": 8},
    {"1": U1, "2": U1, "3": U3},
    {"g": Xg, "b": Xb, "s2": Xs2,
     "s3": [[1 if i == j else 0 for j in range(8)] for i in range(8)]},
)
rp = validate(Npert, blk6)
print("perturbed:", rp.ok, rp.violations)

blk8 = clannish_block(8, make_datum(F5, 1), {"a": 0, "b": 0, "g": 0})
print("blk8 simples:", [s.total_dim for s in simples(blk8)])
blk1 = jacobian_block(1, make_datum(F5, 2), {"a": 0, "b": 0, "g": 0})
S1 = simples(blk1)
print("blk1 simples:", [s.total_dim for s in S1])
for s in S1:
    r = validate(s, blk1)
    assert r.ok, r.violations
S6 = simples(blk6)
print("blk6 simples:", [s.total_dim for s in S6])
for s in S6:
    r = validate(s, blk6)
    assert r.ok, r.violations
print("hom(S,S):", hom(S6[0], S6[0]).dimension)
print("hom(S0,S1):", hom(S6[0], S6[1]).dimension)
print("iso distinct:", is_isomorphic(S6[0], S6[1]))
ds = direct_sum(S6[0], S6[0])
print("S+S valid:", validate(ds, blk6).ok, "indec:", is_indecomposable(ds))
print("iso self:", is_isomorphic(S6[0], S6[0]))

FQ = BaseField.rationals()
DQ = make_datum(FQ, 2)
blk9 = clannish_block(9, make_datum(FQ, 2), {"a": 0, "b": 0, "g": 0})
P9 = projectives(blk9)
print("blk9 projectives:", [p.total_dim for p in P9])
print("blk9 e1 dims:", {v: n for v, n in P9[0].dims.items() if n})
for p in P9:
    r = validate(p, blk9)
    assert r.ok, r.violations
blk8P = projectives(blk8)
print("blk8 projectives:", [p.total_dim for p in blk8P])

z = zero_representation(blk6)
print("zero dim:", z.total_dim, "hom(z,N):", hom(z, N).dimension)

doc = N.to_json()
N2 = Representation.from_json(blk6, doc)
print("json roundtrip equal:", N2 == N)
