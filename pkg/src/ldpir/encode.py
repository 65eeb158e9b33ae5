"""Protocol parameters, index encoding, and the database polynomial.

Each database index i in [n] is mapped to a distinct weight-w subset of [m]
(the combinadic bijection in colexicographic order), and the database becomes
the homogeneous degree-w polynomial

    F(z_1, ..., z_m) = sum_i  x_i * prod_{c in subset(i)} z_c,

so that F evaluated at the 0/1 indicator vector of subset(i) returns x_i.
Servers evaluate F and its full gradient at query points; both are computed
here with exact integer arithmetic (vectorized for moduli that fit int64,
plain Python ints otherwise).
"""

from __future__ import annotations

import math
from dataclasses import dataclass, field as dc_field
from enum import Enum
from typing import Iterable, Iterator, Sequence

import numpy as np

from .errors import IndexOutOfRange, InfeasibleParameters, ShapeError, WireFormatError
from .field import FieldModulus
from .listdecode import monomial_count

DB_MAGIC = b"LDPIR1"

# guards for the vectorized kernels
_M_MATRIX_CAP = 4096  # densified quadratic form up to ~128 MiB


class Scheme(str, Enum):
    """Which reconstructor the retrieval session runs."""

    WY = "wy"  # unique decoding (Woodruff-Yekhanin), no corruption tolerance
    OVERINTERP = "overinterp"  # subset overinterpolation list decoder
    BIVARIATE = "bivariate"  # weighted-degree bivariate list decoder


@dataclass(frozen=True)
class PirParams:
    """Static configuration of one retrieval deployment."""

    db_size: int
    num_servers: int
    num_responders: int
    privacy_threshold: int
    byzantine_bound: int
    degree: int
    num_vars: int
    modulus: FieldModulus
    scheme: Scheme
    eval_points: tuple[int, ...] = dc_field(default=())

    def __post_init__(self):
        n, ell, k = self.db_size, self.num_servers, self.num_responders
        t, b, w, m = (
            self.privacy_threshold,
            self.byzantine_bound,
            self.degree,
            self.num_vars,
        )
        p = self.modulus.p
        if not self.eval_points:
            object.__setattr__(self, "eval_points", tuple(range(1, ell + 1)))
        if n < 1:
            raise InfeasibleParameters("database must be nonempty")
        if not (t >= 1 and t < k <= ell < p):
            raise InfeasibleParameters(
                f"need 1 <= t < k <= ell < p, got t={t} k={k} ell={ell} p={p}"
            )
        if not 0 <= b <= k - 2:
            raise InfeasibleParameters(f"need 0 <= b <= k-2, got b={b} k={k}")
        if w < 1:
            raise InfeasibleParameters("degree must be >= 1")
        if self.scheme is Scheme.WY:
            if w * t > 2 * k - 1:
                raise InfeasibleParameters(
                    f"wy needs w*t <= 2k-1, got {w * t} > {2 * k - 1}"
                )
        elif self.scheme is Scheme.OVERINTERP:
            if w * t > 2 * (k - b) - 2:
                raise InfeasibleParameters(
                    f"overinterp needs w*t <= 2(k-b)-2, got {w * t} > {2 * (k - b) - 2}"
                )
        elif self.scheme is Scheme.BIVARIATE:
            if monomial_count(w * t, 2 * (k - b) - 1) <= 2 * k:
                raise InfeasibleParameters(
                    f"bivariate interpolation infeasible: "
                    f"{monomial_count(w * t, 2 * (k - b) - 1)} monomials "
                    f"<= {2 * k} constraints"
                )
        if m < w or math.comb(m, w) < n:
            raise InfeasibleParameters(f"C({m},{w}) < {n}")
        if m > w and math.comb(m - 1, w) >= n:
            raise InfeasibleParameters(f"num_vars {m} is not minimal for n={n}")
        pts = tuple(x % p for x in self.eval_points)
        if len(pts) != ell or len(set(pts)) != ell or 0 in pts:
            raise InfeasibleParameters(
                "eval_points must be ell pairwise distinct nonzero residues"
            )
        object.__setattr__(self, "eval_points", pts)

    @property
    def target_degree(self) -> int:
        """Degree of the retrieved univariate polynomial F(G(.)): w * t."""
        return self.degree * self.privacy_threshold

    @property
    def degree_cap(self) -> int:
        """Weighted-degree budget of the bivariate decoder: 2(k-b)-1."""
        return 2 * (self.num_responders - self.byzantine_bound) - 1


def min_num_vars(n: int, w: int) -> int:
    """Smallest m with C(m, w) >= n."""
    m = w
    while math.comb(m, w) < n:
        m += 1
    return m


def select_params(
    n: int,
    ell: int,
    k: int,
    t: int,
    b: int,
    scheme: Scheme | str,
    modulus: FieldModulus,
    eval_points: Sequence[int] = (),
) -> PirParams:
    """Choose the degree parameter for the scheme and size the encoding.

    wy maximizes the degree under unique decodability (w = (2k-1)/t);
    overinterp leaves two samples of slack for the degree filter
    (w = 2(k-b-2)/t, at least 1); bivariate takes the largest w below
    (k-b)^2/(kt) whose exact monomial count beats the 2k constraints.
    """
    scheme = Scheme(scheme)
    if scheme is Scheme.WY:
        w = (2 * k - 1) // t
    elif scheme is Scheme.OVERINTERP:
        w = max(1, 2 * (k - b - 2) // t)
    else:
        cap = (k - b) ** 2 // (k * t)
        w = next(
            (
                cand
                for cand in range(cap, 0, -1)
                if monomial_count(cand * t, 2 * (k - b) - 1) > 2 * k
            ),
            0,
        )
        if w < 1:
            raise InfeasibleParameters(
                f"no feasible degree for bivariate scheme at k={k} b={b} t={t}"
            )
    return PirParams(
        db_size=n,
        num_servers=ell,
        num_responders=k,
        privacy_threshold=t,
        byzantine_bound=b,
        degree=w,
        num_vars=min_num_vars(n, w),
        modulus=modulus,
        scheme=scheme,
        eval_points=tuple(eval_points),
    )


# -- combinadic index encoding ------------------------------------------------


def index_subset(i: int, num_vars: int, weight: int) -> tuple[int, ...]:
    """The (i-1)-th weight-w subset of [num_vars] in colexicographic order."""
    if not 1 <= i <= math.comb(num_vars, weight):
        raise IndexOutOfRange(
            f"index {i} outside [1, C({num_vars},{weight})]"
        )
    rank = i - 1
    out = []
    for j in range(weight, 0, -1):
        # largest c with C(c, j) <= rank
        lo, hi = j - 1, num_vars - 1
        while lo < hi:
            mid = (lo + hi + 1) // 2
            if math.comb(mid, j) <= rank:
                lo = mid
            else:
                hi = mid - 1
        out.append(lo + 1)
        rank -= math.comb(lo, j)
    out.reverse()
    return tuple(out)


def subset_rank(subset: Sequence[int], weight: int) -> int:
    """Inverse of index_subset: colex rank (1-based) of an ascending subset."""
    if len(subset) != weight or sorted(set(subset)) != list(subset):
        raise ValueError("subset must be strictly ascending with w elements")
    return 1 + sum(math.comb(c - 1, j + 1) for j, c in enumerate(subset))


def iter_subsets_colex(num_vars: int, weight: int) -> Iterator[tuple[int, ...]]:
    """All weight-w subsets of [num_vars] in colexicographic order."""
    s = list(range(1, weight + 1))
    while True:
        yield tuple(s)
        j = 0
        while j < weight - 1 and s[j] + 1 == s[j + 1]:
            j += 1
        if s[j] == num_vars:
            return
        s[j] += 1
        for i in range(j):
            s[i] = i + 1


# -- the encoded database ------------------------------------------------------


class EncodedDatabase:
    """Database entries together with their monomial supports.

    Evaluation returns F(q) and the full gradient of F at q in O(n*w) field
    multiplications.  Gradients use prefix/suffix products per monomial, so
    queries containing zeros need no divisions.
    """

    def __init__(self, entries: Iterable[int], params: PirParams):
        p = params.modulus.p
        xs = [int(e) % p for e in entries]
        if len(xs) != params.db_size:
            raise ShapeError(
                f"expected {params.db_size} entries, got {len(xs)}"
            )
        self.params = params
        n, w, m = params.db_size, params.degree, params.num_vars
        supports = np.empty((n, w), dtype=np.int64)
        for i, subset in enumerate(iter_subsets_colex(m, w)):
            if i >= n:
                break
            supports[i] = subset
        self._supports0 = supports - 1  # 0-based columns
        self._int64 = params.modulus.fits_int64
        if self._int64:
            self.entries = np.asarray(xs, dtype=np.int64)
        else:
            self.entries = xs
        self._quad = None  # cached quadratic form for w == 2
        self._linear = None  # cached coefficient vector for w == 1

    def support(self, i: int) -> tuple[int, ...]:
        """Monomial variable set of index i (ascending, 1-based)."""
        if not 1 <= i <= self.params.db_size:
            raise IndexOutOfRange(f"index {i} outside [1, {self.params.db_size}]")
        return tuple(int(c) + 1 for c in self._supports0[i - 1])

    def indicator(self, i: int) -> np.ndarray:
        """E(i): the 0/1 query vector that selects entry i exactly."""
        vec = np.zeros(self.params.num_vars, dtype=np.int64)
        vec[self._supports0[i - 1]] = 1
        return vec

    # -- evaluation ------------------------------------------------------------

    def eval_and_gradient(self, query) -> tuple[int, np.ndarray | list[int]]:
        """(F(query), grad F(query)) with every output reduced mod p."""
        m = self.params.num_vars
        if len(query) != m:
            raise ShapeError(f"query length {len(query)} != num_vars {m}")
        if not self._int64:
            return self._eval_python(query)
        q = np.asarray(query, dtype=np.int64)
        w = self.params.degree
        p = self.params.modulus.p
        if w == 1:
            lin = self._linear_form()
            return _dot_mod(lin, q, p), lin.copy()
        if w == 2 and m <= _M_MATRIX_CAP and (p - 1) ** 2 * m < (1 << 62):
            quad = self._quad_form()
            v = np.asarray(quad @ q % p)
            u = _dot_mod(q, v, p) * pow(2, p - 2, p) % p
            return u, v
        return self._eval_gather(q)

    def _linear_form(self) -> np.ndarray:
        if self._linear is None:
            lin = np.zeros(self.params.num_vars, dtype=np.int64)
            lin[self._supports0[:, 0]] = self.entries
            self._linear = lin
        return self._linear

    def _quad_form(self) -> np.ndarray:
        # symmetric matrix X with X[a,b] = x_i for support {a,b}; then
        # grad F = X q and F = q.X.q / 2
        if self._quad is None:
            m = self.params.num_vars
            X = np.zeros((m, m), dtype=np.int64)
            a, b = self._supports0[:, 0], self._supports0[:, 1]
            X[a, b] = self.entries
            X[b, a] = self.entries
            self._quad = X
        return self._quad

    def _eval_gather(self, q: np.ndarray) -> tuple[int, np.ndarray]:
        p = self.params.modulus.p
        n, w = self._supports0.shape
        m = self.params.num_vars
        vals = q[self._supports0]  # (n, w)
        prefix = np.ones((n, w), dtype=np.int64)
        for c in range(1, w):
            prefix[:, c] = prefix[:, c - 1] * vals[:, c - 1] % p
        suffix = np.ones((n, w), dtype=np.int64)
        for c in range(w - 2, -1, -1):
            suffix[:, c] = suffix[:, c + 1] * vals[:, c + 1] % p
        full = prefix[:, -1] * vals[:, -1] % p
        u = _dot_mod(self.entries, full, p)
        v = np.zeros(m, dtype=np.int64)
        use_bincount = (p - 1) * n < (1 << 52)
        for c in range(w):
            weights = self.entries * prefix[:, c] % p * suffix[:, c] % p
            if use_bincount:
                v += np.bincount(
                    self._supports0[:, c], weights=weights.astype(np.float64),
                    minlength=m,
                ).astype(np.int64)
                v %= p
            else:
                np.add.at(v, self._supports0[:, c], weights)
                v %= p
        return u, v % p

    def _eval_python(self, query) -> tuple[int, list[int]]:
        p = self.params.modulus.p
        q = [int(x) % p for x in query]
        u = 0
        v = [0] * self.params.num_vars
        for xi, row in zip(self.entries, self._supports0):
            cols = [int(c) for c in row]
            w = len(cols)
            pre = [1] * w
            for c in range(1, w):
                pre[c] = pre[c - 1] * q[cols[c - 1]] % p
            suf = [1] * w
            for c in range(w - 2, -1, -1):
                suf[c] = suf[c + 1] * q[cols[c + 1]] % p
            u = (u + xi * pre[-1] * q[cols[-1]]) % p
            for c in range(w):
                v[cols[c]] = (v[cols[c]] + xi * pre[c] * suf[c]) % p
        return u, v


def _dot_mod(a: np.ndarray, b: np.ndarray, p: int) -> int:
    """Exact <a, b> mod p for int64 arrays of residues."""
    step = max(1, (1 << 62) // ((p - 1) ** 2 + 1))
    if len(a) <= step:
        return int((a * b).sum()) % p
    total = 0
    for i in range(0, len(a), step):
        total += int((a[i : i + step] * b[i : i + step]).sum() % p)
    return total % p


# -- database files -------------------------------------------------------------


def generate_entries(n: int, modulus: FieldModulus, seed: int) -> np.ndarray:
    """Seeded uniform database entries."""
    rng = np.random.Generator(np.random.Philox(seed))
    if modulus.fits_int64:
        return rng.integers(0, modulus.p, size=n, dtype=np.int64)
    return np.array(
        [int.from_bytes(rng.bytes(16), "little") % modulus.p for _ in range(n)],
        dtype=object,
    )


def save_database(path, entries: Sequence[int], modulus: FieldModulus) -> None:
    width = modulus.element_width_bytes
    with open(path, "wb") as fh:
        fh.write(DB_MAGIC + b"\n")
        fh.write(str(modulus.p).encode() + b"\n")
        fh.write(str(len(entries)).encode() + b"\n")
        for e in entries:
            fh.write(int(e).to_bytes(width, "little"))


def load_database(path) -> tuple[FieldModulus, list[int]]:
    with open(path, "rb") as fh:
        magic = fh.readline().rstrip(b"\n")
        if magic != DB_MAGIC:
            raise WireFormatError(f"bad magic {magic!r}")
        try:
            p = int(fh.readline())
            n = int(fh.readline())
        except ValueError as exc:
            raise WireFormatError("malformed database header") from exc
        modulus = FieldModulus(p)
        width = modulus.element_width_bytes
        payload = fh.read()
    if len(payload) != n * width:
        raise WireFormatError(
            f"payload is {len(payload)} bytes, expected {n * width}"
        )
    entries = [
        int.from_bytes(payload[i * width : (i + 1) * width], "little")
        for i in range(n)
    ]
    if any(e >= p for e in entries):
        raise WireFormatError("entry exceeds modulus")
    return modulus, entries
