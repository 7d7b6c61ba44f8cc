"""Smoke test for the nr_energy extension module.

Build and install first, e.g. `maturin develop` in crates/python, then run
`python python/smoke_test.py`.
"""

import math

import nr_energy


def main():
    s = nr_energy.Scenario.reference()
    assert s.validate() == []
    d = s.derive()
    assert d["tb_bits"] == 32248 and d["code_blocks"] == 4 and d["base_graph"] == 1

    report = nr_energy.estimate(s)
    assert math.isclose(report.epsilon, 4.41e-7, rel_tol=1e-12)
    assert sorted(report.blocks) == nr_energy.BLOCKS
    assert all(b["cycles"] > 0 for b in report.blocks.values())
    total = sum(b["energy_j"] for b in report.blocks.values())
    assert math.isclose(total, report.total["energy_j"], rel_tol=1e-9)

    tallies = nr_energy.tally_pipeline(s)
    assert tallies["B"][("XOR", "logical_vector")] == 6 * d["codeword_bits"]

    uniform = nr_energy.CostTable.uniform(1, "1")
    flat = nr_energy.estimate(s, uniform)
    ops = sum(n * (2 if k == "FLOP" else 1) for t in tallies.values() for (k, _), n in t.items())
    assert flat.exact_cycles("total") == str(ops)

    sweep = {}
    for m in ["QPSK", "16QAM", "64QAM"]:
        s.modulation = m
        sweep[m] = nr_energy.estimate(s).blocks
    for b in "CDEF":
        assert len({sweep[m][b]["cycles"] for m in sweep}) == 1
        cpb = [sweep[m][b]["cycles_per_bit"] for m in ["QPSK", "16QAM", "64QAM"]]
        assert cpb[0] > cpb[1] > cpb[2]
    s.modulation = "16QAM"

    cmp = nr_energy.compare(s, nr_energy.synthesize_measurement(s))
    assert all(row[2] == 1.0 and row[3] == "match" for row in cmp.values())

    assert nr_energy.count_crc(3824)[("AND", "logical_scalar")] == 596
    assert nr_energy.fft_flops(14, 4, 256) == 573440
    assert nr_energy.ls_flops(2, 2, 2, 2, 14, 24) == 80832
    assert nr_energy.mmse_flops(2, 2, 12, 14) == 1398

    value, unit = nr_energy.legacy(
        "fu-rf",
        "m_antennas = 4\nq_mod = 2.0\nq_mix = 2.0\nq_vga = 1.0\nq_lna = 1.0\n"
        "q_adc = 2.0\nq_clk = 4.0\nrho = 8.0\n",
    )
    assert (value, unit) == (5.0, "W")

    try:
        nr_energy.legacy("earth", "")
    except nr_energy.NrEnergyError as e:
        assert "fu-rf" in str(e)
    else:
        raise AssertionError("unknown model accepted")

    try:
        s.n_layers = 9
        nr_energy.estimate(s)
    except ValueError as e:
        assert "n_layers" in str(e)
    else:
        raise AssertionError("invalid scenario accepted")

    print("nr_energy smoke test passed")


if __name__ == "__main__":
    main()
