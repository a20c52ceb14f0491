"""Exact linear algebra over the supported base fields.

Two backends share one interface: matrices over a prime field are numpy
int64 arrays with entries reduced into [0, p), and matrices over the
rationals are lists of lists of Fraction.  All elimination is exact; there
is no floating point anywhere.
"""

from fractions import Fraction

import numpy as np

from .galois import BaseField


class LinAlg:
    """Matrix operations bound to a base field."""

    def __init__(self, field: BaseField):
        self.field = field
        self._prime = field.kind == "prime"
        self.p = field.p if self._prime else None

    # ------------------------------------------------------------ constructors

    def matrix(self, rows):
        """Build a matrix from an iterable of rows of field scalars."""
        rows = [list(r) for r in rows]
        if self._prime:
            if not rows:
                return np.zeros((0, 0), dtype=np.int64)
            return np.array(
                [[self.field.coerce(x) for x in r] for r in rows], dtype=np.int64
            )
        return [[self.field.coerce(x) for x in r] for r in rows]

    def zeros(self, m, n):
        if self._prime:
            return np.zeros((m, n), dtype=np.int64)
        return [[Fraction(0)] * n for _ in range(m)]

    def identity(self, n):
        if self._prime:
            return np.eye(n, dtype=np.int64)
        return [
            [Fraction(1) if i == j else Fraction(0) for j in range(n)]
            for i in range(n)
        ]

    def shape(self, a):
        if self._prime:
            return a.shape
        return (len(a), len(a[0]) if a else 0)

    def copy(self, a):
        if self._prime:
            return a.copy()
        return [row[:] for row in a]

    def to_lists(self, a):
        if self._prime:
            return [[int(x) for x in row] for row in a]
        return [row[:] for row in a]

    # ------------------------------------------------------------- arithmetic

    def add(self, a, b):
        if self._prime:
            return (a + b) % self.p
        return [[x + y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]

    def sub(self, a, b):
        if self._prime:
            return (a - b) % self.p
        return [[x - y for x, y in zip(ra, rb)] for ra, rb in zip(a, b)]

    def scale(self, c, a):
        c = self.field.coerce(c)
        if self._prime:
            return (c * a) % self.p
        return [[c * x for x in row] for row in a]

    def matmul(self, a, b):
        if self._prime:
            if a.shape[1] != b.shape[0]:
                raise ValueError("shape mismatch in matmul")
            return (a @ b) % self.p
        m, k = self.shape(a)
        k2, n = self.shape(b)
        if k != k2:
            raise ValueError("shape mismatch in matmul")
        out = [[Fraction(0)] * n for _ in range(m)]
        for i in range(m):
            ra = a[i]
            oi = out[i]
            for t in range(k):
                c = ra[t]
                if c:
                    rb = b[t]
                    for j in range(n):
                        oi[j] += c * rb[j]
        return out

    def kron(self, a, b):
        if self._prime:
            return np.kron(a, b) % self.p
        ma, na = self.shape(a)
        mb, nb = self.shape(b)
        out = self.zeros(ma * mb, na * nb)
        for i in range(ma):
            for j in range(na):
                c = a[i][j]
                if c:
                    for k in range(mb):
                        for l in range(nb):
                            out[i * mb + k][j * nb + l] = c * b[k][l]
        return out

    def hstack(self, blocks):
        blocks = list(blocks)
        if self._prime:
            return np.hstack(blocks) if blocks else np.zeros((0, 0), dtype=np.int64)
        out = []
        for i in range(len(blocks[0])):
            row = []
            for blk in blocks:
                row.extend(blk[i])
            out.append(row)
        return out

    def vstack(self, blocks):
        blocks = [b for b in blocks]
        if self._prime:
            return np.vstack(blocks) if blocks else np.zeros((0, 0), dtype=np.int64)
        out = []
        for blk in blocks:
            out.extend(self.copy(blk))
        return out

    def transpose(self, a):
        if self._prime:
            return a.T.copy()
        m, n = self.shape(a)
        return [[a[i][j] for i in range(m)] for j in range(n)]

    def is_zero(self, a):
        if self._prime:
            return not a.size or not np.any(a % self.p)
        return all(not x for row in a for x in row)

    def equal(self, a, b):
        if self._prime:
            return a.shape == b.shape and bool(np.all((a - b) % self.p == 0))
        return self.shape(a) == self.shape(b) and all(
            x == y for ra, rb in zip(a, b) for x, y in zip(ra, rb)
        )

    # ------------------------------------------------------------- elimination

    def rref(self, a):
        """Reduced row echelon form.  Returns (R, pivot_columns)."""
        if self._prime:
            return self._rref_mod(a)
        return self._rref_q(a)

    def _rref_mod(self, a):
        p = self.p
        r = a.copy() % p
        m, n = r.shape
        pivots = []
        row = 0
        for col in range(n):
            if row >= m:
                break
            nz = np.nonzero(r[row:, col])[0]
            if nz.size == 0:
                continue
            piv = row + int(nz[0])
            if piv != row:
                r[[row, piv]] = r[[piv, row]]
            inv = pow(int(r[row, col]), p - 2, p)
            r[row] = (r[row] * inv) % p
            col_vals = r[:, col].copy()
            col_vals[row] = 0
            mask = col_vals != 0
            if np.any(mask):
                r[mask] = (r[mask] - np.outer(col_vals[mask], r[row])) % p
            pivots.append(col)
            row += 1
        return r[:row], pivots

    def _rref_q(self, a):
        r = [row[:] for row in a]
        m, n = self.shape(a)
        pivots = []
        row = 0
        for col in range(n):
            if row >= m:
                break
            piv = None
            for i in range(row, m):
                if r[i][col]:
                    piv = i
                    break
            if piv is None:
                continue
            if piv != row:
                r[row], r[piv] = r[piv], r[row]
            inv = Fraction(1) / r[row][col]
            r[row] = [x * inv for x in r[row]]
            for i in range(m):
                if i != row and r[i][col]:
                    c = r[i][col]
                    r[i] = [x - c * y for x, y in zip(r[i], r[row])]
            pivots.append(col)
            row += 1
        return r[:row], pivots

    def rank(self, a):
        return len(self.rref(a)[1])

    def nullspace(self, a):
        """Columns spanning {x : a @ x = 0}; shape (n, n - rank)."""
        m, n = self.shape(a)
        r, pivots = self.rref(a)
        free = [j for j in range(n) if j not in set(pivots)]
        cols = []
        for f in free:
            vec = [self.field.zero()] * n
            vec[f] = self.field.one()
            for i, pc in enumerate(pivots):
                val = r[i][f] if not self._prime else int(r[i, f])
                vec[pc] = self.field.neg(val)
            cols.append(vec)
        if not cols:
            return self.zeros(n, 0)
        return self.transpose(self.matrix(cols))

    def solve(self, a, b):
        """One solution of a @ x = b (b a matrix of columns); None if none."""
        m, n = self.shape(a)
        mb, k = self.shape(b)
        if m != mb:
            raise ValueError("shape mismatch in solve")
        aug = self.hstack([a, b])
        r, pivots = self.rref(aug)
        for pc in pivots:
            if pc >= n:
                return None
        x = self.zeros(n, k)
        for i, pc in enumerate(pivots):
            for j in range(k):
                val = r[i][n + j] if not self._prime else int(r[i, n + j])
                if self._prime:
                    x[pc, j] = val
                else:
                    x[pc][j] = val
        return x

    def inverse(self, a):
        m, n = self.shape(a)
        if m != n:
            return None
        x = self.solve(a, self.identity(n))
        if x is None:
            return None
        return x

    def is_invertible(self, a):
        m, n = self.shape(a)
        return m == n and self.rank(a) == n

    # ---------------------------------------------------------------- vectors

    def vector(self, entries):
        return self.matrix([[x] for x in entries])

    def column(self, a, j):
        m, _ = self.shape(a)
        if self._prime:
            return [int(a[i, j]) for i in range(m)]
        return [a[i][j] for i in range(m)]

    def columns(self, a):
        _, n = self.shape(a)
        return [self.column(a, j) for j in range(n)]

    def from_columns(self, cols, nrows=None):
        if not cols:
            return self.zeros(nrows or 0, 0)
        return self.transpose(self.matrix(cols))
