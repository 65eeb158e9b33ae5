import json
import random

import numpy as np
import pytest

from ldpir.encode import EncodedDatabase, PirParams, Scheme, min_num_vars
from ldpir.errors import InfeasibleParameters, WireFormatError
from ldpir.field import FieldModulus
from ldpir.oracle import brute_force_list
from ldpir.protocol import SILENT, Answer
from ldpir.sim import (
    AdversaryConfig,
    Knowledge,
    Strategy,
    comm_report,
    deserialize_answer,
    deserialize_query,
    plan_trial_adversary,
    run_session,
    run_trials,
    serialize_answer,
    serialize_query,
)

F131 = FieldModulus(131)


def build(n, ell, k, t, b, w, p=131, scheme=Scheme.OVERINTERP, seed=0):
    params = PirParams(
        db_size=n, num_servers=ell, num_responders=k, privacy_threshold=t,
        byzantine_bound=b, degree=w, num_vars=min_num_vars(n, w),
        modulus=FieldModulus(p), scheme=scheme,
    )
    rng = random.Random(seed)
    db = EncodedDatabase([rng.randrange(p) for _ in range(n)], params)
    return params, db


HONEST = AdversaryConfig()


# -- wire format ---------------------------------------------------------------


def test_wire_golden_bytes():
    q = np.array([3, 0, 130], dtype=np.int64)
    assert serialize_query(q, 1) == bytes.fromhex("51" "03000000" "030082")
    a = Answer(7, np.array([1, 2], dtype=np.int64))
    assert serialize_answer(a, 2) == bytes.fromhex("41" "01" "070001000200")
    assert serialize_answer(SILENT, 2) == bytes.fromhex("4100")


def test_wire_sizes_match_formula():
    # p=131 -> 1-byte elements; m=363
    q = np.zeros(363, dtype=np.int64)
    assert len(serialize_query(q, 1)) == 363 + 5
    a = Answer(0, np.zeros(363, dtype=np.int64))
    assert len(serialize_answer(a, 1)) == 364 + 2
    assert len(serialize_answer(SILENT, 1)) == 2


def test_wire_roundtrip_random():
    rng = np.random.default_rng(0)
    for _ in range(1000):
        width = int(rng.choice([1, 2, 4, 8]))
        p_cap = min(1 << (8 * width), 1 << 62)
        m = int(rng.integers(1, 40))
        q = rng.integers(0, p_cap, size=m).astype(np.int64)
        assert np.array_equal(deserialize_query(serialize_query(q, width), width), q)
        a = Answer(int(rng.integers(0, p_cap)), rng.integers(0, p_cap, size=m).astype(np.int64))
        back = deserialize_answer(serialize_answer(a, width), width)
        assert back == a
    assert deserialize_answer(serialize_answer(SILENT, 4), 4).is_silent


def test_wire_malformed():
    with pytest.raises(WireFormatError):
        deserialize_query(b"\x52\x01\x00\x00\x00\x05", 1)
    with pytest.raises(WireFormatError):
        deserialize_query(b"\x51\x02\x00\x00\x00\x05", 1)  # short payload
    with pytest.raises(WireFormatError):
        deserialize_answer(b"\x41\x02\x00", 1)
    with pytest.raises(WireFormatError):
        deserialize_answer(b"\x41\x00\xff", 1)


# -- communication accounting -----------------------------------------------------


def test_comm_report_example():
    params, _ = build(2**10, 8, 6, 1, 3, 2)
    assert params.num_vars == 46
    rep = comm_report(params)
    assert rep.total_elements == 8 * (2 * 46 + 1)
    assert rep.total_payload_bytes == rep.total_elements * 1


def test_comm_report_formula_mode():
    params, _ = build(64, 8, 6, 1, 3, 2)
    narrow = comm_report(params)
    wide = comm_report(params, bit_width=2 * params.modulus.bit_width)
    assert wide.total_elements == narrow.total_elements
    assert wide.total_payload_bytes == 2 * narrow.total_payload_bytes


def test_comm_report_128bit_formula():
    # overinterp at (k,b,t)=(20,12,1), n=2^26: w=12, m=30, 16-byte elements
    params = PirParams(
        db_size=2**26, num_servers=24, num_responders=20, privacy_threshold=1,
        byzantine_bound=12, degree=12, num_vars=min_num_vars(2**26, 12),
        modulus=F131, scheme=Scheme.OVERINTERP,
    )
    assert params.num_vars == 30
    rep = comm_report(params, bit_width=128)
    assert rep.per_server_payload_bytes == (2 * 30 + 1) * 16 == 976


def test_transcript_bytes_match_report():
    params, db = build(2**8, 8, 6, 1, 3, 2)
    tx = run_session(params, db, 5, HONEST, seed=11)
    rep = comm_report(params)
    assert tx.payload_bytes == rep.total_payload_bytes
    assert tx.total_bytes == rep.total_payload_bytes + 8 * (5 + 2)


# -- sessions ------------------------------------------------------------------------


def test_honest_session_all_schemes():
    for scheme, w in ((Scheme.WY, 5), (Scheme.OVERINTERP, 2), (Scheme.BIVARIATE, 1)):
        b = 0 if scheme is Scheme.WY else 3
        params, db = build(2**8, 8, 6, 1, b, w, scheme=scheme)
        tx = run_session(params, db, 100, HONEST, seed=3)
        assert tx.success
        assert tx.corrupted_count == 0
        assert tx.output.values == (int(db.entries[99]),)


def test_session_determinism():
    params, db = build(2**8, 8, 6, 1, 3, 2)
    adv = AdversaryConfig(
        strategy=Strategy.RANDOM_GARBAGE, corrupt_servers=frozenset({1, 4, 6}),
        seed=9,
    )
    t1 = run_session(params, db, 17, adv, seed=21)
    t2 = run_session(params, db, 17, adv, seed=21)
    assert t1.to_json() == t2.to_json()
    t3 = run_session(params, db, 17, adv, seed=22)
    assert t3.to_json() != t1.to_json()


def test_silent_servers_session():
    params, db = build(2**8, 8, 6, 1, 3, 2)
    adv = AdversaryConfig(
        strategy=Strategy.SILENT, silent_servers=frozenset({2, 5})
    )
    tx = run_session(params, db, 7, adv, seed=1)
    assert tx.success
    assert tx.responders == (1, 3, 4, 6, 7, 8)
    silent_records = [r for r in tx.records if r.silent]
    assert [r.server for r in silent_records] == [2, 5]
    assert all(r.answer_bytes == 2 for r in silent_records)


def test_consistent_fake_session_matches_oracle():
    params, db = build(2**8, 8, 6, 1, 3, 2)
    found_two = 0
    for seed in range(20):
        adv = plan_trial_adversary(
            params, Strategy.CONSISTENT_FAKE, Knowledge.OMNISCIENT, 5, seed
        )
        tx = run_session(params, db, seed + 1, adv, seed=seed)
        assert tx.success
        oracle = brute_force_list(list(tx.samples), 2, 3, params.modulus)
        assert set(tx.output.candidates) == oracle
        assert len(tx.output.candidates) <= 2
        found_two += len(tx.output.candidates) == 2
    assert found_two > 0  # the planted fake does land


def test_corruption_accounting_bounded():
    params, db = build(2**8, 8, 6, 1, 3, 2)
    for strategy in (Strategy.RANDOM_GARBAGE, Strategy.ADDITIVE_NOISE):
        for knowledge in (Knowledge.OBLIVIOUS, Knowledge.COLLUDING):
            for trial in range(10):
                adv = plan_trial_adversary(params, strategy, knowledge, 3, trial)
                tx = run_session(params, db, trial + 1, adv, seed=trial)
                assert tx.success
                assert tx.corrupted_count == len(adv.corrupt_servers) <= 3


def test_adversary_validation():
    with pytest.raises(InfeasibleParameters):
        AdversaryConfig(
            strategy=Strategy.CONSISTENT_FAKE, knowledge=Knowledge.COLLUDING
        )
    with pytest.raises(InfeasibleParameters):
        AdversaryConfig(
            corrupt_servers=frozenset({1}), silent_servers=frozenset({1})
        )
    params, db = build(2**8, 8, 6, 1, 3, 2)
    bad = AdversaryConfig(
        strategy=Strategy.RANDOM_GARBAGE,
        corrupt_servers=frozenset({1, 2, 3, 4}),
    )
    with pytest.raises(InfeasibleParameters):
        run_session(params, db, 1, bad, seed=0)


def test_transcript_json_fields():
    params, db = build(2**6, 8, 6, 1, 3, 2)
    tx = run_session(params, db, 9, HONEST, seed=4)
    doc = json.loads(tx.to_json())
    assert doc["index"] == 9
    assert doc["success"] is True
    assert len(doc["servers"]) == 8
    assert doc["servers"][0]["answer"]["value"] == tx.records[0].answer.value
    assert doc["responders"] == [1, 2, 3, 4, 5, 6]


def test_run_trials_smoke_and_bounds():
    params, db = build(2**8, 8, 6, 1, 3, 2)
    summary = run_trials(
        params, db, Strategy.CONSISTENT_FAKE, Knowledge.OMNISCIENT,
        trials=100, base_seed=7, adv_seed=8,
    )
    assert summary.trials == 100
    assert summary.successes == 100
    assert summary.worst_list_size == 2
    assert not summary.failures


def test_run_trials_parallel_matches_serial():
    params, db = build(2**6, 8, 6, 1, 3, 2)
    serial = run_trials(
        params, db, Strategy.RANDOM_GARBAGE, Knowledge.COLLUDING,
        trials=60, base_seed=1, adv_seed=2, workers=1,
    )
    parallel = run_trials(
        params, db, Strategy.RANDOM_GARBAGE, Knowledge.COLLUDING,
        trials=60, base_seed=1, adv_seed=2, workers=2,
    )
    assert serial.to_dict() == parallel.to_dict()
