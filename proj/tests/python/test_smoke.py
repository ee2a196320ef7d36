import math

import pytest

import netadapt


def single_edge(c, length=1.0):
    return netadapt.Network([(0.0, 0.0), (length, 0.0)], [(0, 1, length, c)])


def test_single_edge_energy_and_gradient():
    net = single_edge(2.0)
    params = netadapt.EnergyParams(gamma=0.5, nu=1.0)
    e = netadapt.discrete_energy(net, [1.0, -1.0], params)
    assert e["pumping"] == pytest.approx(0.5)
    assert e["metabolic"] == pytest.approx(2 * math.sqrt(2.0))
    g = netadapt.energy_gradient(net, [1.0, -1.0], params)
    assert g[0] == pytest.approx(-(0.25 - 2 ** -0.5))


def test_pressures_on_a_path():
    net = netadapt.Network([(0, 0), (1, 0), (2, 0)], [(0, 1, 1.0, 1.0), (1, 2, 1.0, 1.0)])
    p, q = netadapt.solve_pressures(net, [1.0, 0.0, -1.0])
    assert p[0] - p[2] == pytest.approx(2.0)
    assert [abs(x) for x in q] == pytest.approx([1.0, 1.0])


def test_steady_state_of_a_single_edge():
    out = netadapt.run_to_steady_state(single_edge(0.3), [1.0, -1.0], netadapt.EnergyParams(gamma=0.5))
    assert out["termination"] == "energy_converged"
    assert out["network"].conductivities[0] == pytest.approx(1.0, abs=1e-4)
    energies = out["energies"]
    assert all(b <= a + 1e-10 for a, b in zip(energies, energies[1:]))


def test_diamond_and_scenario(tmp_path):
    net = netadapt.generate_diamond("paper-diamond")
    assert (net.num_vertices, net.num_edges) == (78, 201)
    assert abs(sum(netadapt.build_sources(net))) < 1e-8
    tree = netadapt.init_tree(net)
    assert tree.cycle_count(1e-9) == 0
    report = netadapt.run_scenario({"energy": {"gamma": 0.5}}, str(tmp_path))
    assert report["status"] == "ok"
    assert report["classification"] == "tree"
    assert (tmp_path / "trajectory.csv").exists()


def test_errors_are_raised():
    with pytest.raises(netadapt.NetadaptError, match="self_loop"):
        netadapt.Network([(0, 0)], [(0, 0, 1.0, 1.0)])
    with pytest.raises(netadapt.NetadaptError, match="config_error"):
        netadapt.run_scenario({"unknown": 1})


def test_pde_and_bridge():
    report = netadapt.run_pde({"grid": {"dim": 2, "cells": [8]}, "pde": {"scheme": "implicit", "T": 0.01}})
    assert report["dissipation_inequality_holds"]
    bridge = netadapt.run_bridge_studies()
    assert bridge["status"] == "ok"
