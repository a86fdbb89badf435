"""Finite fields GF(q) and systematic MDS erasure codes.

Fields are exp/log-table based and support any prime power q up to 2**16.
Elements are plain ints in [0, q); for extension fields the int is the
little-endian base-p encoding of the polynomial representation.

MDS codes are systematized Reed-Solomon generators built from the Vandermonde
matrix on evaluation points 0..n-1, so construction is deterministic for a
given (q, n, k).  A useful consequence of the systematic-MDS property: every
square submatrix of the parity block is nonsingular, which the streaming
codecs rely on when they solve for partial combinations of parities.
"""

from __future__ import annotations


class NotPrimePower(ValueError):
    """Requested field size is not a prime power (or out of range)."""


class LengthExceedsField(ValueError):
    """MDS code length n exceeds the field size q."""


class DimensionMismatch(ValueError):
    """Vector/matrix dimensions disagree with the code parameters."""


class InsufficientSymbols(ValueError):
    """Fewer than k distinct codeword positions supplied to the decoder."""


class InconsistentSymbols(ValueError):
    """Received symbols are not consistent with any codeword."""


class SingularMatrix(ValueError):
    """Linear system has no unique solution."""


_MAX_Q = 1 << 16


def _small_primes(limit: int) -> list[int]:
    sieve = bytearray([1]) * (limit + 1)
    sieve[0:2] = b"\x00\x00"
    for i in range(2, int(limit**0.5) + 1):
        if sieve[i]:
            sieve[i * i :: i] = b"\x00" * len(sieve[i * i :: i])
    return [i for i in range(limit + 1) if sieve[i]]


def _prime_power(q: int) -> tuple[int, int] | None:
    """Return (p, m) with q == p**m, or None if q is not a prime power."""
    if q < 2:
        return None
    for p in _small_primes(256):
        if q % p == 0:
            m = 0
            x = q
            while x % p == 0:
                x //= p
                m += 1
            return (p, m) if x == 1 else None
    # no prime factor <= 256: q < 2**16 must then itself be prime
    return (q, 1)


def is_prime_power(q: int) -> bool:
    return 2 <= q <= _MAX_Q and _prime_power(q) is not None


# ---------------------------------------------------------------------------
# polynomial helpers over GF(p), coefficients little-endian lists of ints


def _poly_trim(a: list[int]) -> list[int]:
    while a and a[-1] == 0:
        a.pop()
    return a


def _poly_mod(a: list[int], b: list[int], p: int) -> list[int]:
    a = _poly_trim(a[:])
    inv_lead = pow(b[-1], p - 2, p)
    while len(a) >= len(b):
        shift = len(a) - len(b)
        factor = (a[-1] * inv_lead) % p
        for i, c in enumerate(b):
            a[i + shift] = (a[i + shift] - factor * c) % p
        _poly_trim(a)
    return a


def _poly_mul(a: list[int], b: list[int], p: int) -> list[int]:
    out = [0] * (len(a) + len(b) - 1)
    for i, ai in enumerate(a):
        if ai:
            for j, bj in enumerate(b):
                out[i + j] = (out[i + j] + ai * bj) % p
    return _poly_trim(out)


def _is_irreducible(poly: list[int], p: int) -> bool:
    """Trial division by every monic polynomial of degree 1..deg//2."""
    deg = len(poly) - 1
    for d in range(1, deg // 2 + 1):
        for low in range(p**d):
            div = _digits(low, p, d) + [1]
            if not _poly_mod(poly, div, p):
                return False
    return True


def _digits(x: int, p: int, m: int) -> list[int]:
    out = []
    for _ in range(m):
        out.append(x % p)
        x //= p
    return out


def _undigits(d: list[int], p: int) -> int:
    x = 0
    for c in reversed(d):
        x = x * p + c
    return x


def _factorize(n: int) -> list[int]:
    out = []
    d = 2
    while d * d <= n:
        if n % d == 0:
            out.append(d)
            while n % d == 0:
                n //= d
        d += 1
    if n > 1:
        out.append(n)
    return out


class GaloisField:
    """Arithmetic in GF(q), q = p**m prime power, elements as ints in [0, q)."""

    def __init__(self, q: int):
        pm = _prime_power(q)
        if q > _MAX_Q or pm is None:
            raise NotPrimePower(f"field size {q} is not a supported prime power")
        self.q = q
        self.p, self.m = pm
        if self.m == 1:
            self._modulus = None
        else:
            self._modulus = self._find_irreducible()
        self._build_log_tables()

    # -- construction ------------------------------------------------------

    def _find_irreducible(self) -> list[int]:
        p, m = self.p, self.m
        for low in range(p**m):
            cand = _digits(low, p, m) + [1]
            if cand[0] != 0 and _is_irreducible(cand, p):
                return cand
        raise NotPrimePower(f"no irreducible polynomial found for {p}^{m}")  # pragma: no cover

    def _raw_mul(self, a: int, b: int) -> int:
        p = self.p
        if self.m == 1:
            return (a * b) % p
        prod = _poly_mul(_digits(a, p, self.m), _digits(b, p, self.m), p)
        prod = _poly_mod(prod, self._modulus, p)
        return _undigits(prod + [0] * (self.m - len(prod)), p)

    def _build_log_tables(self) -> None:
        q = self.q
        factors = _factorize(q - 1)
        gen = None
        for cand in range(2, q):
            if all(self._pow_raw(cand, (q - 1) // f) != 1 for f in factors):
                gen = cand
                break
        if gen is None:  # q == 2
            gen = 1
        self.generator = gen
        exp = [1] * (q - 1)
        for i in range(1, q - 1):
            exp[i] = self._raw_mul(exp[i - 1], gen)
        log = [0] * q
        for i, e in enumerate(exp):
            log[e] = i
        self._exp, self._log = exp, log

    def _pow_raw(self, a: int, e: int) -> int:
        out = 1
        while e:
            if e & 1:
                out = self._raw_mul(out, a)
            a = self._raw_mul(a, a)
            e >>= 1
        return out

    # -- arithmetic --------------------------------------------------------

    def add(self, a: int, b: int) -> int:
        p = self.p
        if self.m == 1:
            return (a + b) % p
        if p == 2:
            return a ^ b
        out, mult = 0, 1
        while a or b:
            out += ((a + b) % p) * mult
            a //= p
            b //= p
            mult *= p
        return out

    def neg(self, a: int) -> int:
        p = self.p
        if self.m == 1:
            return (-a) % p
        if p == 2:
            return a
        out, mult = 0, 1
        while a:
            out += ((p - a % p) % p) * mult
            a //= p
            mult *= p
        return out

    def sub(self, a: int, b: int) -> int:
        return self.add(a, self.neg(b))

    def mul(self, a: int, b: int) -> int:
        if a == 0 or b == 0:
            return 0
        return self._exp[(self._log[a] + self._log[b]) % (self.q - 1)]

    def inv(self, a: int) -> int:
        if a == 0:
            raise ZeroDivisionError("inverse of 0 in GF(q)")
        return self._exp[(self.q - 1 - self._log[a]) % (self.q - 1)]

    def div(self, a: int, b: int) -> int:
        return self.mul(a, self.inv(b))

    def pow(self, a: int, e: int) -> int:
        if a == 0:
            return 0 if e else 1
        return self._exp[(self._log[a] * e) % (self.q - 1)]

    def __repr__(self) -> str:
        return f"GaloisField(q={self.q})"


def make_field(q: int) -> GaloisField:
    """Construct GF(q); raises NotPrimePower for invalid sizes."""
    return GaloisField(q)


# ---------------------------------------------------------------------------
# dense linear algebra over a field (small systems only)


def solve_linear(field: GaloisField, rows: list[list[int]], rhs: list[int]) -> list[int]:
    """Solve the square system rows * x = rhs by Gaussian elimination."""
    n = len(rows)
    if any(len(r) != n for r in rows) or len(rhs) != n:
        raise DimensionMismatch("solve_linear expects a square system")
    a = [row[:] + [r] for row, r in zip(rows, rhs)]
    for col in range(n):
        piv = next((r for r in range(col, n) if a[r][col] != 0), None)
        if piv is None:
            raise SingularMatrix("singular system")
        a[col], a[piv] = a[piv], a[col]
        inv = field.inv(a[col][col])
        a[col] = [field.mul(inv, v) for v in a[col]]
        for r in range(n):
            if r != col and a[r][col] != 0:
                f = a[r][col]
                a[r] = [field.sub(v, field.mul(f, w)) for v, w in zip(a[r], a[col])]
    return [a[r][n] for r in range(n)]


def invert_matrix(field: GaloisField, rows: list[list[int]]) -> list[list[int]]:
    n = len(rows)
    cols = []
    for i in range(n):
        e = [0] * n
        e[i] = 1
        cols.append(solve_linear(field, rows, e))
    # cols[i] is the i-th column of the inverse
    return [[cols[j][i] for j in range(n)] for i in range(n)]


# ---------------------------------------------------------------------------
# systematic MDS codes


class MdsCode:
    """Systematic (n, k) MDS code over GF(q), generator [I | P].

    ``gen`` is the k x n generator matrix; ``parity`` its k x (n-k) right
    block.  Construction is deterministic: Reed-Solomon evaluation points
    0..n-1, systematized on the first k positions.
    """

    def __init__(self, field: GaloisField, n: int, k: int):
        if n > field.q:
            raise LengthExceedsField(f"n={n} exceeds field size q={field.q}")
        if not (1 <= k <= n):
            raise DimensionMismatch(f"need 1 <= k <= n, got (n={n}, k={k})")
        self.field, self.n, self.k = field, n, k
        vand = [[field.pow(x, i) for x in range(n)] for i in range(k)]
        a_inv = invert_matrix(field, [row[:k] for row in vand])
        self.gen = [
            [self._dot(a_inv[i], [vand[r][j] for r in range(k)]) for j in range(n)]
            for i in range(k)
        ]
        self.parity = [row[k:] for row in self.gen]

    def _dot(self, a: list[int], b: list[int]) -> int:
        f = self.field
        out = 0
        for x, y in zip(a, b):
            out = f.add(out, f.mul(x, y))
        return out

    def encode(self, message: list[int]) -> list[int]:
        if len(message) != self.k:
            raise DimensionMismatch(f"message length {len(message)} != k={self.k}")
        f = self.field
        tail = []
        for j in range(self.n - self.k):
            acc = 0
            for i, m in enumerate(message):
                if m:
                    acc = f.add(acc, f.mul(m, self.parity[i][j]))
            tail.append(acc)
        return list(message) + tail

    def erasure_decode(self, received: list[tuple[int, int]]) -> list[int]:
        """Recover the message from >= k (position, symbol) pairs."""
        seen: dict[int, int] = {}
        for pos, val in received:
            if not (0 <= pos < self.n):
                raise DimensionMismatch(f"position {pos} outside codeword length {self.n}")
            if pos in seen and seen[pos] != val:
                raise InconsistentSymbols(f"conflicting symbols at position {pos}")
            seen[pos] = val
        if len(seen) < self.k:
            raise InsufficientSymbols(f"need {self.k} positions, got {len(seen)}")
        positions = sorted(seen)
        base = positions[: self.k]
        cols = [[self.gen[i][j] for j in range(self.n)] for i in range(self.k)]
        system = [[cols[i][j] for i in range(self.k)] for j in base]
        message = solve_linear(self.field, system, [seen[j] for j in base])
        # verify surplus symbols really lie on the decoded codeword
        if len(positions) > self.k:
            word = self.encode(message)
            for j in positions[self.k :]:
                if word[j] != seen[j]:
                    raise InconsistentSymbols(f"symbol at position {j} off the decoded codeword")
        return message

    def __repr__(self) -> str:
        return f"MdsCode(q={self.field.q}, n={self.n}, k={self.k})"


def make_mds(field: GaloisField, n: int, k: int) -> MdsCode:
    return MdsCode(field, n, k)


def mds_encode(code: MdsCode, message: list[int]) -> list[int]:
    return code.encode(message)


def mds_erasure_decode(code: MdsCode, received: list[tuple[int, int]]) -> list[int]:
    return code.erasure_decode(received)
