"""In-process multi-server simulator with fault injection.

Runs complete retrieval sessions (query, per-server answer, adversarial
mutation, reconstruction) against configurable adversaries, captures
bit-exact wire transcripts, and accounts communication.  Transport is
in-process: messages are serialized to the wire format and measured, but
never leave the process.

Adversary strategies:

* honest          - nothing is touched;
* silent          - the configured servers do not respond;
* random_garbage  - corrupted servers reply with uniform nonsense;
* additive_noise  - corrupted servers add noise to their true answer;
* consistent_fake - corrupted servers agree on one alternative polynomial
                    and forge both values and derivatives accordingly
                    (requires omniscient knowledge; the worst case for
                    list size).
"""

from __future__ import annotations

import json
from dataclasses import dataclass, field as dc_field
from enum import Enum
from multiprocessing import Pool
from typing import Sequence

import numpy as np

from .encode import EncodedDatabase, PirParams, Scheme
from .errors import InfeasibleParameters, ShapeError, WireFormatError
from .field import FieldModulus
from .poly import HermiteSample, Poly, hermite_interpolate
from .protocol import (
    SILENT,
    Answer,
    OutputList,
    answer_query,
    blinding_derivative,
    derive_samples,
    make_queries,
    reconstruct_bivariate,
    reconstruct_overinterp,
)

_QUERY_TAG = 0x51
_ANSWER_TAG = 0x41


class Strategy(str, Enum):
    HONEST = "honest"
    SILENT = "silent"
    RANDOM_GARBAGE = "random_garbage"
    ADDITIVE_NOISE = "additive_noise"
    CONSISTENT_FAKE = "consistent_fake"


class Knowledge(str, Enum):
    OBLIVIOUS = "oblivious"
    COLLUDING = "colluding"
    OMNISCIENT = "omniscient"


@dataclass(frozen=True)
class AdversaryConfig:
    strategy: Strategy = Strategy.HONEST
    knowledge: Knowledge = Knowledge.COLLUDING
    corrupt_servers: frozenset[int] = frozenset()
    silent_servers: frozenset[int] = frozenset()
    seed: int = 0

    def __post_init__(self):
        object.__setattr__(self, "strategy", Strategy(self.strategy))
        object.__setattr__(self, "knowledge", Knowledge(self.knowledge))
        object.__setattr__(self, "corrupt_servers", frozenset(self.corrupt_servers))
        object.__setattr__(self, "silent_servers", frozenset(self.silent_servers))
        if self.corrupt_servers & self.silent_servers:
            raise InfeasibleParameters("corrupt and silent sets must be disjoint")
        if (
            self.strategy is Strategy.CONSISTENT_FAKE
            and self.knowledge is not Knowledge.OMNISCIENT
        ):
            raise InfeasibleParameters(
                "consistent_fake is defined only for omniscient knowledge"
            )

    def validate_against(self, params: PirParams) -> None:
        ell = params.num_servers
        for j in self.corrupt_servers | self.silent_servers:
            if not 1 <= j <= ell:
                raise InfeasibleParameters(f"server id {j} outside [1, {ell}]")
        if len(self.corrupt_servers) > params.byzantine_bound:
            raise InfeasibleParameters(
                f"{len(self.corrupt_servers)} corruptions exceed b = "
                f"{params.byzantine_bound}"
            )
        if ell - len(self.silent_servers) < params.num_responders:
            raise InfeasibleParameters("too many silent servers")


# -- wire format ----------------------------------------------------------------


def _elements_to_bytes(values, width: int) -> bytes:
    arr = np.asarray(values)
    if arr.dtype != object and width in (1, 2, 4, 8):
        return arr.astype(f"<u{width}").tobytes()
    return b"".join(int(v).to_bytes(width, "little") for v in arr)


def _elements_from_bytes(data: bytes, width: int) -> list[int]:
    if len(data) % width:
        raise WireFormatError("payload length not a multiple of element width")
    if width in (1, 2, 4, 8):
        return [int(v) for v in np.frombuffer(data, dtype=f"<u{width}")]
    return [
        int.from_bytes(data[i : i + width], "little")
        for i in range(0, len(data), width)
    ]


def serialize_query(query, width: int) -> bytes:
    m = len(query)
    return bytes([_QUERY_TAG]) + m.to_bytes(4, "little") + _elements_to_bytes(query, width)


def deserialize_query(data: bytes, width: int) -> np.ndarray:
    if len(data) < 5 or data[0] != _QUERY_TAG:
        raise WireFormatError("not a query message")
    m = int.from_bytes(data[1:5], "little")
    payload = data[5:]
    if len(payload) != m * width:
        raise WireFormatError(
            f"query payload is {len(payload)} bytes, expected {m * width}"
        )
    return np.array(_elements_from_bytes(payload, width), dtype=np.int64)


def serialize_answer(answer: Answer, width: int) -> bytes:
    if answer.is_silent:
        return bytes([_ANSWER_TAG, 0x00])
    head = bytes([_ANSWER_TAG, 0x01])
    return head + _elements_to_bytes([answer.value], width) + _elements_to_bytes(
        answer.gradient, width
    )


def deserialize_answer(data: bytes, width: int) -> Answer:
    if len(data) < 2 or data[0] != _ANSWER_TAG:
        raise WireFormatError("not an answer message")
    if data[1] == 0x00:
        if len(data) != 2:
            raise WireFormatError("silent answer carries a payload")
        return SILENT
    if data[1] != 0x01:
        raise WireFormatError(f"bad answer flag {data[1]:#x}")
    payload = data[2:]
    if len(payload) < width or len(payload) % width:
        raise WireFormatError("answer payload length mismatch")
    elems = _elements_from_bytes(payload, width)
    return Answer(elems[0], np.array(elems[1:], dtype=np.int64))


# -- communication accounting -----------------------------------------------------


@dataclass(frozen=True)
class CommReport:
    """Analytic per-session communication for a parameter set."""

    element_width_bytes: int
    per_server_query_elems: int
    per_server_answer_elems: int
    total_elements: int
    per_server_payload_bytes: int
    total_payload_bytes: int
    cc_elements_per_element: int  # ell * (2m + 1), field-element normalized


def comm_report(params: PirParams, bit_width: int | None = None) -> CommReport:
    """Element and byte counts; bit_width overrides the modulus width
    (formula mode for field sizes that are not executed natively)."""
    if bit_width is None:
        width = params.modulus.element_width_bytes
    else:
        width = (bit_width + 7) // 8
    m, ell = params.num_vars, params.num_servers
    per_server = 2 * m + 1
    return CommReport(
        element_width_bytes=width,
        per_server_query_elems=m,
        per_server_answer_elems=m + 1,
        total_elements=ell * per_server,
        per_server_payload_bytes=per_server * width,
        total_payload_bytes=ell * per_server * width,
        cc_elements_per_element=ell * per_server,
    )


# -- transcripts -------------------------------------------------------------------


@dataclass(frozen=True)
class ServerRecord:
    server: int
    query_bytes: int
    answer_bytes: int
    silent: bool
    corrupted: bool
    answer: Answer


@dataclass(frozen=True)
class Transcript:
    index: int
    seed: int
    scheme: Scheme
    expected: int
    records: tuple[ServerRecord, ...]
    responders: tuple[int, ...]
    samples: tuple[HermiteSample, ...]
    output: OutputList
    success: bool

    @property
    def corrupted_count(self) -> int:
        return sum(1 for r in self.records if r.corrupted)

    @property
    def total_bytes(self) -> int:
        return sum(r.query_bytes + r.answer_bytes for r in self.records)

    @property
    def payload_bytes(self) -> int:
        # fixed overhead: 5-byte query header, 2-byte answer header
        return sum(
            (r.query_bytes - 5) + (r.answer_bytes - 2) for r in self.records
        )

    def to_json(self) -> str:
        doc = {
            "index": self.index,
            "seed": self.seed,
            "scheme": self.scheme.value,
            "expected": self.expected,
            "success": self.success,
            "responders": list(self.responders),
            "samples": [
                {"point": s.point, "value": s.value, "derivative": s.derivative}
                for s in self.samples
            ],
            "output_values": list(self.output.values),
            "candidates": [list(f.coeffs) for f in self.output.candidates],
            "servers": [
                {
                    "server": r.server,
                    "query_bytes": r.query_bytes,
                    "answer_bytes": r.answer_bytes,
                    "silent": r.silent,
                    "corrupted": r.corrupted,
                    "answer": None
                    if r.answer.is_silent
                    else {
                        "value": r.answer.value,
                        "gradient": [int(x) for x in r.answer.gradient],
                    },
                }
                for r in self.records
            ],
        }
        return json.dumps(doc)


# -- session execution --------------------------------------------------------------


def _adv_rng(adv: AdversaryConfig, session_seed: int, server: int | None = None):
    entropy = [adv.seed, session_seed]
    if server is not None:
        entropy.append(server)
    return np.random.Generator(np.random.Philox(np.random.SeedSequence(entropy)))


def _mutate_answers(
    params: PirParams,
    adv: AdversaryConfig,
    aux,
    honest: dict[int, Answer],
    used: list[int],
    session_seed: int,
) -> dict[int, Answer]:
    p = params.modulus.p
    m = params.num_vars
    delivered = dict(honest)
    targets = sorted(j for j in adv.corrupt_servers if j in honest)
    if not targets or adv.strategy in (Strategy.HONEST, Strategy.SILENT):
        return delivered
    shared_rng = _adv_rng(adv, session_seed)

    if adv.strategy is Strategy.CONSISTENT_FAKE:
        # omniscient: recover the true polynomial from honest answers, pick a
        # different one of the same degree budget, and forge every corrupted
        # answer to be exactly consistent with it
        wt = params.target_degree
        true_samples = derive_samples(params, aux, honest, responders=used)
        f_true = hermite_interpolate(true_samples, params.modulus)
        while True:
            fake = Poly(
                params.modulus,
                [int(shared_rng.integers(0, p)) for _ in range(wt + 1)],
            )
            if fake != f_true:
                break
        dfake = fake.derivative()
        for j in targets:
            lam = params.eval_points[j - 1]
            gprime = blinding_derivative(params, aux, lam)
            grad = np.array(honest[j].gradient, copy=True)
            pivot = next((c for c in range(m) if int(gprime[c]) % p), None)
            if pivot is not None:
                current = sum(int(a) * int(g) % p for a, g in zip(grad, gprime)) % p
                delta = (dfake(lam) - current) * pow(int(gprime[pivot]), p - 2, p)
                grad[pivot] = (int(grad[pivot]) + delta) % p
            delivered[j] = Answer(fake(lam), grad)
        return delivered

    for j in targets:
        rng = (
            _adv_rng(adv, session_seed, j)
            if adv.knowledge is Knowledge.OBLIVIOUS
            else shared_rng
        )
        honest_ans = honest[j]
        if adv.strategy is Strategy.RANDOM_GARBAGE:
            delivered[j] = Answer(
                int(rng.integers(0, p)),
                rng.integers(0, p, size=m, dtype=np.int64)
                if params.modulus.fits_int64
                else np.array([int(rng.integers(0, p)) for _ in range(m)], dtype=object),
            )
        elif adv.strategy is Strategy.ADDITIVE_NOISE:
            du = int(rng.integers(1, p))  # nonzero: the answer must change
            noise = rng.integers(0, p, size=m, dtype=np.int64)
            grad = (np.asarray(honest_ans.gradient) + noise) % p
            delivered[j] = Answer((honest_ans.value + du) % p, grad)
        else:
            raise AssertionError(f"unhandled strategy {adv.strategy}")
    return delivered


def run_session(
    params: PirParams,
    db: EncodedDatabase,
    index: int,
    adversary: AdversaryConfig,
    seed: int,
    scheme: Scheme | None = None,
    responders: Sequence[int] | None = None,
    overinterp_mode: str = "optimized",
) -> Transcript:
    """One full retrieval: query, answer, mutate, reconstruct, account."""
    scheme = Scheme(scheme) if scheme is not None else params.scheme
    adversary.validate_against(params)
    width = params.modulus.element_width_bytes
    queries, aux = make_queries(params, index, seed)
    query_sizes = [len(serialize_query(q, width)) for q in queries]

    honest: dict[int, Answer] = {}
    for j in range(1, params.num_servers + 1):
        if j not in adversary.silent_servers:
            honest[j] = answer_query(db, queries[j - 1])

    alive = sorted(honest)
    if responders is None:
        used = alive[: params.num_responders]
    else:
        used = list(responders)
    delivered = _mutate_answers(params, adversary, aux, honest, used, seed)

    records = []
    answers_all: dict[int, Answer] = {}
    for j in range(1, params.num_servers + 1):
        ans = delivered.get(j, SILENT)
        answers_all[j] = ans
        records.append(
            ServerRecord(
                server=j,
                query_bytes=query_sizes[j - 1],
                answer_bytes=len(serialize_answer(ans, width)),
                silent=ans.is_silent,
                corrupted=(not ans.is_silent) and ans != honest[j],
                answer=ans,
            )
        )

    samples = derive_samples(params, aux, answers_all, responders=used)
    field = params.modulus
    wt, b = params.target_degree, params.byzantine_bound
    if scheme is Scheme.WY:
        output = OutputList.from_candidates([hermite_interpolate(samples, field)])
    elif scheme is Scheme.OVERINTERP:
        output = reconstruct_overinterp(samples, wt, b, field, mode=overinterp_mode)
    else:
        output = reconstruct_bivariate(samples, wt, b, field)

    expected = int(db.entries[index - 1])
    return Transcript(
        index=index,
        seed=seed,
        scheme=scheme,
        expected=expected,
        records=tuple(records),
        responders=tuple(used),
        samples=tuple(samples),
        output=output,
        success=expected in output.values,
    )


# -- trial sweeps --------------------------------------------------------------------


@dataclass
class TrialSummary:
    trials: int = 0
    successes: int = 0
    worst_list_size: int = 0
    worst_candidates: int = 0
    max_total_bytes: int = 0
    failures: list[tuple[int, int]] = dc_field(default_factory=list)  # (trial, seed)

    def merge(self, other: "TrialSummary") -> None:
        self.trials += other.trials
        self.successes += other.successes
        self.worst_list_size = max(self.worst_list_size, other.worst_list_size)
        self.worst_candidates = max(self.worst_candidates, other.worst_candidates)
        self.max_total_bytes = max(self.max_total_bytes, other.max_total_bytes)
        self.failures.extend(other.failures)

    def to_dict(self) -> dict:
        return {
            "trials": self.trials,
            "successes": self.successes,
            "success_rate": self.successes / self.trials if self.trials else 0.0,
            "worst_list_size": self.worst_list_size,
            "worst_candidates": self.worst_candidates,
            "max_total_bytes": self.max_total_bytes,
            "failures": self.failures,
        }


def trial_seed(base_seed: int, trial: int) -> int:
    """Deterministic 64-bit per-trial seed."""
    return int(
        np.random.SeedSequence([base_seed & (2**64 - 1), trial]).generate_state(1)[0]
    )


def plan_trial_adversary(
    params: PirParams,
    strategy: Strategy,
    knowledge: Knowledge,
    adv_seed: int,
    trial: int,
    num_corrupt: int | None = None,
    num_silent: int | None = None,
) -> AdversaryConfig:
    """Per-trial corruption plan: silence random servers, then corrupt a
    random subset of the k lowest-indexed responders (the used ones)."""
    strategy = Strategy(strategy)
    ell, k, b = params.num_servers, params.num_responders, params.byzantine_bound
    rng = np.random.Generator(
        np.random.Philox(np.random.SeedSequence([adv_seed & (2**64 - 1), trial]))
    )
    if num_silent is None:
        num_silent = ell - k if strategy is Strategy.SILENT else 0
    silent = set()
    if num_silent:
        silent = {
            int(x) + 1 for x in rng.choice(ell, size=num_silent, replace=False)
        }
    corrupt = set()
    if strategy not in (Strategy.HONEST, Strategy.SILENT):
        if num_corrupt is None:
            num_corrupt = b
        used = sorted(set(range(1, ell + 1)) - silent)[:k]
        picks = rng.choice(len(used), size=min(num_corrupt, len(used)), replace=False)
        corrupt = {used[int(x)] for x in picks}
    return AdversaryConfig(
        strategy=strategy,
        knowledge=knowledge,
        corrupt_servers=frozenset(corrupt),
        silent_servers=frozenset(silent),
        seed=adv_seed,
    )


_WORKER_STATE: dict = {}


def _worker_init(params, db_entries, strategy, knowledge, base_seed, adv_seed,
                 scheme, overinterp_mode):
    _WORKER_STATE["params"] = params
    _WORKER_STATE["db"] = EncodedDatabase(db_entries, params)
    _WORKER_STATE["strategy"] = Strategy(strategy)
    _WORKER_STATE["knowledge"] = Knowledge(knowledge)
    _WORKER_STATE["base_seed"] = base_seed
    _WORKER_STATE["adv_seed"] = adv_seed
    _WORKER_STATE["scheme"] = scheme
    _WORKER_STATE["overinterp_mode"] = overinterp_mode


def _run_trial_range(bounds: tuple[int, int]) -> TrialSummary:
    lo, hi = bounds
    st = _WORKER_STATE
    return _sweep_range(
        st["params"], st["db"], st["strategy"], st["knowledge"],
        st["base_seed"], st["adv_seed"], lo, hi, st["scheme"],
        st["overinterp_mode"],
    )


def _sweep_range(
    params, db, strategy, knowledge, base_seed, adv_seed, lo, hi, scheme,
    overinterp_mode,
) -> TrialSummary:
    summary = TrialSummary()
    n = params.db_size
    for trial in range(lo, hi):
        seed = trial_seed(base_seed, trial)
        idx_rng = np.random.Generator(
            np.random.Philox(np.random.SeedSequence([base_seed & (2**64 - 1), trial, 1]))
        )
        index = int(idx_rng.integers(1, n + 1))
        adv = plan_trial_adversary(params, strategy, knowledge, adv_seed, trial)
        tx = run_session(
            params, db, index, adv, seed, scheme=scheme,
            overinterp_mode=overinterp_mode,
        )
        summary.trials += 1
        summary.successes += int(tx.success)
        summary.worst_list_size = max(summary.worst_list_size, len(tx.output.values))
        summary.worst_candidates = max(
            summary.worst_candidates, len(tx.output.candidates)
        )
        summary.max_total_bytes = max(summary.max_total_bytes, tx.total_bytes)
        if not tx.success:
            summary.failures.append((trial, seed))
    return summary


def run_trials(
    params: PirParams,
    db: EncodedDatabase,
    strategy: Strategy | str,
    knowledge: Knowledge | str,
    trials: int,
    base_seed: int = 0,
    adv_seed: int = 1,
    scheme: Scheme | None = None,
    overinterp_mode: str = "optimized",
    workers: int = 1,
) -> TrialSummary:
    """Deterministic adversarial sweep; aggregation is order-independent."""
    strategy, knowledge = Strategy(strategy), Knowledge(knowledge)
    if workers <= 1:
        return _sweep_range(
            params, db, strategy, knowledge, base_seed, adv_seed, 0, trials,
            scheme, overinterp_mode,
        )
    chunk = max(1, trials // (workers * 8))
    bounds = [(lo, min(lo + chunk, trials)) for lo in range(0, trials, chunk)]
    entries = db.entries if not isinstance(db.entries, np.ndarray) else db.entries.copy()
    summary = TrialSummary()
    with Pool(
        processes=workers,
        initializer=_worker_init,
        initargs=(params, entries, strategy.value, knowledge.value, base_seed,
                  adv_seed, scheme, overinterp_mode),
    ) as pool:
        for part in pool.imap_unordered(_run_trial_range, bounds):
            summary.merge(part)
    summary.failures.sort()
    return summary
