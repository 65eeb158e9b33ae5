"""Client and server algorithms for one retrieval session.

The client hides its index inside a vector of degree-t polynomials
G(x) = E(i) + sum_s x^s r_s with uniform r_s, and sends G(point_j) to server
j.  Every element of E(i) is thereby secret-shared with a Shamir threshold
scheme, so any t colluding servers see a uniform distribution regardless of
i.  Each server returns F at the query point plus the full gradient, which
lets the client recover both f(point_j) and f'(point_j) for the composed
polynomial f = F(G(.)) of degree w*t, and feed those order-1 samples to one
of three reconstructors:

* unique:     Hermite interpolation, no tolerance for wrong answers;
* overinterp: interpolate small subsets, keep candidates whose degree stays
              within w*t and that agree with enough samples;
* bivariate:  weighted-degree interpolation plus polynomial root extraction.

Both list decoders return every polynomial of degree <= w*t that order-1
agrees with at least k-b of the samples, so the branches can be compared
against each other and against brute force candidate for candidate.
"""

from __future__ import annotations

from dataclasses import dataclass
from itertools import combinations
from typing import Mapping, Sequence

import numpy as np

from . import listdecode
from .encode import EncodedDatabase, PirParams, _dot_mod, index_subset
from .errors import (
    IndexOutOfRange,
    InfeasibleParameters,
    InsufficientResponses,
    ShapeError,
)
from .field import FieldModulus
from .poly import HermiteSample, Poly, hermite_interpolate, order1_agreement_count

Query = np.ndarray  # length num_vars, canonical residues


@dataclass(frozen=True)
class Aux:
    """Client-side session state needed again at reconstruction time."""

    eval_points: tuple[int, ...]
    rand_vectors: tuple[tuple[int, ...], ...]  # t vectors of length num_vars
    index: int


class Answer:
    """A server reply: silent, or F(q) plus the gradient of F at q."""

    __slots__ = ("value", "gradient")

    def __init__(self, value=None, gradient=None):
        if (value is None) != (gradient is None):
            raise ShapeError("value and gradient must be set together")
        self.value = None if value is None else int(value)
        self.gradient = gradient

    @property
    def is_silent(self) -> bool:
        return self.value is None

    def __eq__(self, other) -> bool:
        if not isinstance(other, Answer):
            return NotImplemented
        if self.is_silent or other.is_silent:
            return self.is_silent == other.is_silent
        return self.value == other.value and np.array_equal(
            np.asarray(self.gradient), np.asarray(other.gradient)
        )

    def __repr__(self) -> str:
        return "Answer(silent)" if self.is_silent else f"Answer({self.value}, |v|={len(self.gradient)})"


SILENT = Answer()


@dataclass(frozen=True)
class OutputList:
    """Reconstruction result: candidate polynomials and their constant terms."""

    candidates: tuple[Poly, ...]
    values: tuple[int, ...]

    @classmethod
    def from_candidates(cls, polys) -> "OutputList":
        cand = tuple(sorted(set(polys), key=lambda f: (len(f.coeffs), f.coeffs)))
        return cls(cand, tuple(sorted({f.constant_term for f in cand})))


def sample_randomness(params: PirParams, seed: int) -> tuple[tuple[int, ...], ...]:
    """t uniform blinding vectors in F_p^m from a counter-based generator."""
    rng = np.random.Generator(np.random.Philox(seed))
    t, m, p = params.privacy_threshold, params.num_vars, params.modulus.p
    if params.modulus.fits_int64:
        mat = rng.integers(0, p, size=(t, m), dtype=np.int64)
        return tuple(tuple(int(x) for x in row) for row in mat)
    chunks = (p.bit_length() + 63) // 64 + 1
    return tuple(
        tuple(
            int.from_bytes(rng.bytes(8 * chunks), "little") % p for _ in range(m)
        )
        for _ in range(t)
    )


def queries_from_randomness(
    params: PirParams, index: int, rand_vectors: Sequence[Sequence[int]]
) -> list[Query]:
    """G(point_j) for every server j, with G = E(index) + sum_s x^s r_s."""
    n, m, t = params.db_size, params.num_vars, params.privacy_threshold
    p = params.modulus.p
    if not 1 <= index <= n:
        raise IndexOutOfRange(f"index {index} outside [1, {n}]")
    if len(rand_vectors) != t or any(len(r) != m for r in rand_vectors):
        raise ShapeError("need t randomness vectors of length num_vars")
    support = index_subset(index, m, params.degree)
    ell = params.num_servers

    if params.modulus.fits_int64:
        R = np.asarray(rand_vectors, dtype=np.int64)
        Q = np.zeros((ell, m), dtype=np.int64)
        pts = np.asarray(params.eval_points, dtype=np.int64)
        pw = np.ones(ell, dtype=np.int64)
        for s in range(t):
            pw = pw * pts % p
            Q = (Q + pw[:, None] * R[s][None, :]) % p
        cols = np.asarray(support, dtype=np.int64) - 1
        Q[:, cols] = (Q[:, cols] + 1) % p
        return [Q[j] for j in range(ell)]

    queries = []
    evec = [0] * m
    for c in support:
        evec[c - 1] = 1
    for lam in params.eval_points:
        row = evec[:]
        pw = 1
        for s in range(t):
            pw = pw * lam % p
            rs = rand_vectors[s]
            for c in range(m):
                row[c] = (row[c] + pw * rs[c]) % p
        queries.append(np.array(row, dtype=object))
    return queries


def make_queries(params: PirParams, index: int, seed: int) -> tuple[list[Query], Aux]:
    """Seeded query generation for all servers."""
    rand = sample_randomness(params, seed)
    queries = queries_from_randomness(params, index, rand)
    return queries, Aux(params.eval_points, rand, index)


def blinding_derivative(params: PirParams, aux: Aux, point: int) -> np.ndarray:
    """G'(point) = sum_s s * point^(s-1) * r_s."""
    p = params.modulus.p
    m, t = params.num_vars, params.privacy_threshold
    if params.modulus.fits_int64:
        out = np.zeros(m, dtype=np.int64)
        pw = 1
        for s in range(1, t + 1):
            coef = s * pw % p
            out = (out + coef * np.asarray(aux.rand_vectors[s - 1], dtype=np.int64)) % p
            pw = pw * point % p
        return out
    out = [0] * m
    pw = 1
    for s in range(1, t + 1):
        coef = s * pw % p
        rs = aux.rand_vectors[s - 1]
        for c in range(m):
            out[c] = (out[c] + coef * rs[c]) % p
        pw = pw * point % p
    return np.array(out, dtype=object)


def answer_query(db: EncodedDatabase, query: Query) -> Answer:
    """Deterministic server side: F(q) and the gradient of F at q."""
    u, v = db.eval_and_gradient(query)
    return Answer(u, v)


def derive_samples(
    params: PirParams,
    aux: Aux,
    answers: Mapping[int, Answer],
    responders: Sequence[int] | None = None,
) -> list[HermiteSample]:
    """Order-1 samples from the k lowest-indexed non-silent servers.

    Each answer contributes (point_j, u_j, <v_j, G'(point_j)>); for an honest
    server that is exactly (point_j, f(point_j), f'(point_j)) by the chain
    rule.
    """
    p = params.modulus.p
    alive = sorted(
        j for j, a in answers.items() if a is not None and not a.is_silent
    )
    if responders is None:
        k = params.num_responders
        if len(alive) < k:
            raise InsufficientResponses(
                f"{len(alive)} responses < k = {k}"
            )
        responders = alive[:k]
    else:
        responders = list(responders)
        missing = [j for j in responders if j not in alive]
        if missing:
            raise InsufficientResponses(f"servers {missing} did not respond")
    samples = []
    for j in responders:
        lam = params.eval_points[j - 1]
        ans = answers[j]
        gprime = blinding_derivative(params, aux, lam)
        grad = np.asarray(ans.gradient)
        if params.modulus.fits_int64:
            beta = _dot_mod(grad.astype(np.int64), gprime, p)
        else:
            beta = sum(int(a) * int(b) % p for a, b in zip(grad, gprime)) % p
        samples.append(HermiteSample(lam, ans.value % p, beta))
    return samples


# -- reconstructors -------------------------------------------------------------


def reconstruct_unique(samples: Sequence[HermiteSample], field: FieldModulus) -> int:
    """Baseline reconstruction assuming every sample is honest: f(0)."""
    return hermite_interpolate(samples, field).constant_term


def reconstruct_overinterp(
    samples: Sequence[HermiteSample],
    max_degree: int,
    max_errors: int,
    field: FieldModulus,
    mode: str = "optimized",
) -> OutputList:
    """Every degree-<=max_degree polynomial agreeing with >= k-b samples.

    naive mode interpolates each (k-b)-subset and keeps candidates whose
    degree stays within max_degree: a subset containing a wrong sample
    almost always betrays itself with an inflated degree.  optimized mode
    interpolates only (max_degree//2 + 1)-subsets, which already pin down
    any candidate, and filters by explicit agreement count; both modes
    return the same set.
    """
    k = len(samples)
    b = max_errors
    if not 0 <= b <= k - 2:
        raise InfeasibleParameters(f"need 0 <= b <= k-2, got b={b} k={k}")
    if max_degree > 2 * (k - b) - 2:
        raise InfeasibleParameters(
            f"overinterpolation needs max_degree <= 2(k-b)-2, "
            f"got {max_degree} > {2 * (k - b) - 2}"
        )
    kept: list[Poly] = []
    if mode == "naive":
        for subset in combinations(range(k), k - b):
            f = hermite_interpolate([samples[i] for i in subset], field)
            if f.degree <= max_degree:
                kept.append(f)
    elif mode == "optimized":
        need = k - b
        for subset in combinations(range(k), max_degree // 2 + 1):
            f = hermite_interpolate([samples[i] for i in subset], field)
            if f.degree <= max_degree and order1_agreement_count(f, samples) >= need:
                kept.append(f)
    else:
        raise ValueError(f"unknown mode {mode!r}")
    return OutputList.from_candidates(kept)


def reconstruct_bivariate(
    samples: Sequence[HermiteSample],
    max_degree: int,
    max_errors: int,
    field: FieldModulus,
    seed: int = 0,
) -> OutputList:
    """List decoding through the weighted-degree bivariate polynomial.

    Any polynomial with >= k-b order-1 agreements forces the composition
    Q(x, f(x)) to acquire at least 2(k-b) roots counted with multiplicity,
    which exceeds its degree budget, so it must vanish identically and f
    appears among the roots of Q.
    """
    k = len(samples)
    need = k - max_errors
    cap = 2 * need - 1
    Q = listdecode.interpolate(samples, max_degree, cap, field)
    kept = [
        f
        for f in listdecode.polynomial_roots(Q, max_degree, seed)
        if order1_agreement_count(f, samples) >= need
    ]
    return OutputList.from_candidates(kept)
