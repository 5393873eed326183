import json
import pathlib

import numpy as np
import pytest

import contextua

SCENARIOS = pathlib.Path(__file__).resolve().parents[2] / "scenarios"


def random_density(dim, rng):
    g = rng.normal(size=(dim, dim)) + 1j * rng.normal(size=(dim, dim))
    rho = g @ g.conj().T
    return rho / np.trace(rho).real


def test_single_basis_poset():
    p = contextua.ContextPoset([np.eye(3)])
    assert len(p) == 5
    assert len(p.covers) == 6
    assert p.count_global_sections() == (3, False)
    assert p.find_global_section()["verdict"] == "colorable"
    assert "digraph contexts" in p.to_dot()


def test_eighteen_ray_set_is_not_colorable():
    p = contextua.ContextPoset.from_scenario(str(SCENARIOS / "ks_cabello18_c4.json"))
    assert p.dim == 4
    assert p.find_global_section()["verdict"] == "non_colorable"
    assert p.count_global_sections()[0] == 0


def test_gleason_round_trip():
    rng = np.random.default_rng(3)
    p = contextua.ContextPoset(contextua.mutually_unbiased_bases(3))
    assert p.is_informationally_complete()
    rho = random_density(3, rng)
    section = p.born_section(rho)
    assert p.section_is_valid(section)
    # each atom weight is the Born probability
    node = p.catalog_node(0)
    for atom, w in zip(p.atoms(node), section[node]):
        assert w == pytest.approx(np.trace(rho @ atom).real, abs=1e-12)
    rec = p.reconstruct(section)
    assert rec["verdict"] == "density"
    assert np.max(np.abs(rec["state"] - rho)) < 1e-8


def test_underdetermined_reconstruction():
    p = contextua.ContextPoset([np.eye(3)])
    rec = p.reconstruct(p.born_section(np.eye(3) / 3))
    assert rec["verdict"] == "underdetermined"
    assert rec["solution_dim"] == 6


def test_bell_singlet():
    path = str(SCENARIOS / "chsh_singlet.json")
    left = contextua.ContextPoset.from_scenario(path, party=0)
    right = contextua.ContextPoset.from_scenario(path, party=1)
    singlet = np.array([0, 1, -1, 0]) / np.sqrt(2)
    w = np.outer(singlet, singlet.conj())
    assert abs(contextua.chsh_value(left, right, w)) == pytest.approx(2 * np.sqrt(2), abs=1e-9)
    report = contextua.bell_analysis(left, right, w)
    assert report["no_signalling"]
    assert not report["factorisable"]
    assert contextua.bell_analysis(left, right, np.eye(4) / 4)["factorisable"]


def test_time_reversed_classification():
    q = contextua.ContextPoset(contextua.mutually_unbiased_bases(2))
    phi = np.zeros(4)
    phi[[0, 3]] = 1 / np.sqrt(2)
    pt = np.outer(phi, phi).reshape(2, 2, 2, 2).transpose(0, 3, 2, 1).reshape(4, 4)
    result = contextua.classify(q, q, pt)
    assert result["verdict"] == "quantum_time_reversed"
    assert result["eigen_floor"] == pytest.approx(np.linalg.eigvalsh(pt).min(), abs=1e-6)


def test_symmetries():
    p = contextua.ContextPoset(contextua.mutually_unbiased_bases(3))
    x = np.array([[0, 1, 0], [1, 0, 0], [0, 0, 0]], dtype=complex)
    y = np.array([[0, -1j, 0], [1j, 0, 0], [0, 0, 0]])
    u, _ = np.linalg.qr(np.random.default_rng(1).normal(size=(3, 3)) + 0j)
    uni = contextua.symmetry_check(p, "unitary", u, [(x, y)])
    anti = contextua.symmetry_check(p, "antiunitary", u, [(x, y)])
    assert uni["automorphism"] and anti["automorphism"]
    assert uni["commutator_signs"] == [1]
    assert anti["commutator_signs"] == [-1]
    with pytest.raises(ValueError):
        contextua.symmetry_check(p, "sideways", u)


def test_cli_in_process():
    code, out, err = contextua.run_cli(["ks-check", "--scenario", str(SCENARIOS / "ks_cabello18_c4.json")])
    assert code == 2
    assert json.loads(out)["verdict"] == "non_colorable"
    code, _, err = contextua.run_cli(["nope"])
    assert code == 1
    assert "unknown command" in err


def test_errors_become_value_errors():
    with pytest.raises(ValueError):
        contextua.ContextPoset.from_scenario("/nonexistent.json")
    with pytest.raises(ValueError):
        contextua.ContextPoset([np.ones((3, 3))])
