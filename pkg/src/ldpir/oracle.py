"""Independent brute-force references for the decoders and for privacy.

`brute_force_list` enumerates every polynomial of degree at most max_degree
over a small field and keeps those with enough order-1 agreements; it is
definition-true and serves as ground truth for both list decoders.
`privacy_enumerate` replaces the query generator's RNG with exhaustive
enumeration of the blinding vectors and returns exact multisets of the
query tuples a server coalition sees.
"""

from __future__ import annotations

import itertools
from collections import Counter
from dataclasses import dataclass
from typing import Sequence

import numpy as np

from .encode import PirParams
from .errors import OracleTooLarge
from .field import FieldModulus
from .poly import HermiteSample, Poly
from .protocol import queries_from_randomness


@dataclass(frozen=True)
class OracleLimits:
    """Cost caps keeping exhaustive enumeration below ~10^7 states."""

    max_candidates: int = 10_000_000
    max_randomness: int = 10_000_000


DEFAULT_LIMITS = OracleLimits()


def brute_force_list(
    samples: Sequence[HermiteSample],
    max_degree: int,
    max_errors: int,
    field: FieldModulus,
    limits: OracleLimits = DEFAULT_LIMITS,
) -> set[Poly]:
    """All f with deg <= max_degree agreeing order-1 with >= k-b samples.

    Exhaustive coefficient enumeration in lexicographic order; evaluation
    goes through a Vandermonde product rather than the decoders' code paths.
    """
    p = field.p
    num = p ** (max_degree + 1)
    if num > limits.max_candidates:
        raise OracleTooLarge(
            f"{num} candidate polynomials exceed limit {limits.max_candidates}"
        )
    need = len(samples) - max_errors
    ranks = np.arange(num, dtype=np.int64)
    coeffs = np.empty((num, max_degree + 1), dtype=np.int64)
    for j in range(max_degree + 1):
        # lexicographic: the highest-degree coefficient varies fastest
        coeffs[:, j] = (ranks // p ** (max_degree - j)) % p
    agree = np.zeros(num, dtype=np.int64)
    for s in samples:
        vals = np.zeros(num, dtype=np.int64)
        dvals = np.zeros(num, dtype=np.int64)
        for j in range(max_degree + 1):
            vals += coeffs[:, j] * pow(s.point, j, p)
            if j >= 1:
                dvals += j * coeffs[:, j] % p * pow(s.point, j - 1, p)
        agree += (vals % p == s.value % p) & (dvals % p == s.derivative % p)
    hits = np.nonzero(agree >= need)[0]
    return {Poly(field, [int(c) for c in coeffs[i]]) for i in hits}


def privacy_enumerate(
    params: PirParams,
    index_a: int,
    index_b: int,
    coalition: Sequence[int],
    limits: OracleLimits = DEFAULT_LIMITS,
) -> tuple[Counter, Counter]:
    """Exact query-tuple multisets seen by a coalition, for two indices.

    Enumerates all p^(t*m) blinding choices and records, for each index, the
    multiset of query tuples restricted to the coalition's servers.  With
    |coalition| <= t the two multisets are identical; with more servers they
    differ for distinct indices.
    """
    p = params.modulus.p
    t, m = params.privacy_threshold, params.num_vars
    total = p ** (t * m)
    if total > limits.max_randomness:
        raise OracleTooLarge(
            f"{total} randomness choices exceed limit {limits.max_randomness}"
        )
    coalition = list(coalition)
    dists = []
    for index in (index_a, index_b):
        seen: Counter = Counter()
        for flat in itertools.product(range(p), repeat=t * m):
            rand = [flat[s * m : (s + 1) * m] for s in range(t)]
            queries = queries_from_randomness(params, index, rand)
            seen[
                tuple(tuple(int(x) for x in queries[j - 1]) for j in coalition)
            ] += 1
        dists.append(seen)
    return dists[0], dists[1]
