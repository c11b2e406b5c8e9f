"""Smoke test for the infopriv Python extension.

Build and install first, e.g. `maturin develop -m crates/python/Cargo.toml`,
then run `python python/smoke_test.py`.
"""

import json
import math

import infopriv


def h2(p):
    return -p * math.log2(p) - (1 - p) * math.log2(1 - p)


def main():
    xor = infopriv.Channel.xor(2)
    assert xor.alphabets == [2, 2] and xor.outputs == 2

    c1 = infopriv.capacity(xor)
    assert abs(c1["value"] - 1.0) < 1e-6, c1
    pinned = infopriv.capacity(xor, b=2.0, individual=0)
    assert abs(pinned["value"]) < 1e-9, pinned

    bsc = infopriv.Channel.randomized_response([2], 0.11)
    ba = infopriv.blahut_arimoto(bsc)
    assert abs(ba["value"] - (1 - h2(0.11))) < 1e-6, ba

    profile = infopriv.balance_profile(xor, points=5, name="xor")
    deltas = [p["delta"]["value"] for p in profile["points"]]
    assert deltas[0] == 0.0 and abs(deltas[-1] - 1.0) < 1e-9, deltas
    assert infopriv.invert_balance(infopriv.Channel.constant([2, 2], 3), 0.0) == 2.0

    ident = infopriv.Channel.identity([2])
    general = infopriv.check("compose-general", [ident, ident], coupling="correlated", trials=4)
    assert general["summary"]["violated"] == 0
    assert all(c["value"] > 0.9 for c in general["details"]["cross"])

    group = infopriv.check("group", [xor], b=0.0, kmax=2)
    assert group["summary"]["holds"] == 2, group["summary"]

    reports = infopriv.decompose("general", trials=10, seed=0)
    assert max(r["residual"] for r in reports) <= 1e-9

    again = infopriv.Channel.from_json(xor.to_json())
    assert again.to_json() == xor.to_json()
    mass = [0.25] * 4
    assert abs(xor.information([0, 1], mass) - 1.0) < 1e-12

    try:
        infopriv.Channel([2], [[0.5, 0.6], [0.5, 0.5]])
    except ValueError:
        pass
    else:
        raise AssertionError("non-stochastic rows accepted")

    print(json.dumps({"infopriv": infopriv.__version__, "smoke_test": "ok"}))


if __name__ == "__main__":
    main()
