#!/usr/bin/env python3
"""Regenerates the bundled synthetic case and time-series fixtures in data/.

Deterministic by construction: no randomness, everything derived from the bus
count. Topology is a ring plus evenly spaced chords, demand and reactance vary
by simple modular patterns, and device buses are spread uniformly.
"""
import json
import math
import os

OUT = os.path.join(os.path.dirname(__file__), os.pardir, "data")


def spread(n_buses, count, offset=0):
    """count distinct 1-based bus ids spread over the network"""
    step = max(1, n_buses // count)
    return [((offset + i * step) % n_buses) + 1 for i in range(count)]


def make_case(name, n_buses, n_chords, n_gen, n_dg, n_store, reg_price=0.0):
    lines = []
    for b in range(1, n_buses + 1):
        nxt = b % n_buses + 1
        lines.append({
            "from": b, "to": nxt,
            "reactance": round(0.02 + 0.002 * (b % 7), 4),
            "thermal_limit": 50.0,
        })
    for k in range(n_chords):
        a = (k * (n_buses // max(1, n_chords))) % n_buses + 1
        b = (a - 1 + n_buses // 3) % n_buses + 1
        if a == b:
            continue
        lines.append({"from": a, "to": b, "reactance": round(0.03 + 0.002 * (k % 5), 4),
                      "thermal_limit": 50.0})

    demand = [0.0] * n_buses
    for b in range(2, n_buses + 1):
        demand[b - 1] = round(0.08 + 0.01 * (b % 5), 3)
    total_demand = sum(demand)

    gens = []
    for i, b in enumerate(spread(n_buses, n_gen, offset=1)):
        gens.append({
            "bus": b, "p_min": 0.0,
            "p_max": round(1.5 * total_demand / n_gen, 3),
            "cost2": 0.05, "cost1": 14.0 + i, "cost0": 0.0,
            "reg_up_max": 0.5, "reg_down_min": -0.5,
            "price_up": reg_price, "price_down": reg_price,
        })
    dgs = [{"bus": b, "p_min": 0.0, "p_plus": 1.0,
            "dev_price_up": 2.0, "dev_price_down": 3.0}
           for b in spread(n_buses, n_dg, offset=3)]
    stores = [{"bus": b, "soc_min": 0.1, "soc_max": 0.9, "energy": 2.0,
               "ch_min": 0.0, "ch_max": 0.5, "dch_min": 0.0, "dch_max": 0.5}
              for b in spread(n_buses, n_store, offset=5)]

    case = {
        "name": name, "currency": "USD", "buses": n_buses, "root": 1,
        "demand": demand, "lines": lines,
        "generators": gens, "renewables": dgs, "storages": stores,
    }
    with open(os.path.join(OUT, name + ".json"), "w") as f:
        json.dump(case, f, indent=1)
        f.write("\n")


def make_series(name, periods):
    rows = ["t,p_fl,p_sl,delta_d,delta_dg"]
    for t in range(periods):
        day = t / periods  # fraction of the day
        p_fl = 15.0 + 5.0 * math.sin(2 * math.pi * (day - 8.0 / 24))
        p_sl = 22.0 + 1.5 * math.sin(2 * math.pi * day)
        delta_d = 1.0 + 0.2 * math.sin(2 * math.pi * (day - 10.0 / 24))
        hour = 24.0 * day
        delta_dg = 1.2 * math.sin(math.pi * (hour - 6.0) / 12.0) if 6.0 <= hour <= 18.0 else 0.0
        rows.append("%d,%.6f,%.6f,%.6f,%.6f" % (t, p_fl, p_sl, delta_d, max(0.0, delta_dg)))
    with open(os.path.join(OUT, name), "w") as f:
        f.write("\n".join(rows) + "\n")


def main():
    make_case("case30", 30, 11, 4, 1, 4, reg_price=10.0)
    make_case("case118", 118, 5, 4, 2, 6)
    make_case("case200", 200, 40, 6, 4, 10)
    make_case("case300", 300, 50, 8, 5, 15)
    make_series("day24.csv", 24)
    make_series("day96.csv", 96)


if __name__ == "__main__":
    main()
