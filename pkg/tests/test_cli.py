import numpy as np

from bakermic.brqmi import load_multi, save_multi
from bakermic.cipher import read_key
from bakermic.cli import main

from conftest import natural_images, random_images


def run(*argv):
    return main(list(argv))


def test_keygen_writes_readable_key(tmp_path, capsys):
    path = tmp_path / "k.key"
    assert run("keygen", "--key", str(path), "--n", "3", "--images", "3", "--seed", "7") == 0
    key = read_key(path)
    assert key.n == 3 and key.m_prime == 3 and key.bit_depth == 8
    assert "wrote key" in capsys.readouterr().out

    other = tmp_path / "k2.key"
    assert run("keygen", "--key", str(other), "--n", "3", "--images", "3", "--seed", "7") == 0
    assert other.read_text() == path.read_text()


def test_keygen_options(tmp_path):
    path = tmp_path / "k.key"
    code = run(
        "keygen", "--key", str(path), "--n", "2", "--images", "2", "--depth", "4",
        "--seed", "3", "--qm", "6", "--rmax1", "2", "--rmax2", "5",
        "--lambda1", "3.5", "--lambda2", "2.5",
    )
    assert code == 0
    key = read_key(path)
    assert key.r_max1 == 2 and key.r_max2 == 5
    assert all(ip.q == 6 for ip in key.image_params)
    assert all(ip.lambda1 == 3.5 and ip.lambda2 == 2.5 for ip in key.image_params)


def test_encrypt_decrypt_cycle(tmp_path, capsys):
    images = random_images(n=3, count=3, seed=23)
    plain = tmp_path / "plain" / "set.txt"
    plain.parent.mkdir()
    save_multi(images, plain)
    key = tmp_path / "k.key"
    assert run("keygen", "--key", str(key), "--n", "3", "--images", "3", "--seed", "11") == 0

    cipher = tmp_path / "cipher" / "set.txt"
    cipher.parent.mkdir()
    assert run("encrypt", "--in", str(plain), "--key", str(key), "--out", str(cipher)) == 0
    assert read_key(key).intensity_sum is not None  # key updated in place
    assert load_multi(cipher).m_prime == 8

    out = tmp_path / "out" / "set.txt"
    out.parent.mkdir()
    assert run("decrypt", "--in", str(cipher), "--key", str(key), "--out", str(out)) == 0
    captured = capsys.readouterr()
    assert "warning" not in captured.err
    recovered = load_multi(out)
    assert np.array_equal(recovered.pixels, images.pixels)


def test_decrypt_warns_on_wrong_key(tmp_path, capsys):
    images = random_images(n=2, count=2, seed=24, bit_depth=4)
    plain = tmp_path / "plain.txt"
    save_multi(images, plain)
    key = tmp_path / "k.key"
    run("keygen", "--key", str(key), "--n", "2", "--images", "2", "--depth", "4", "--seed", "1")
    cipher = tmp_path / "c" / "set.txt"
    cipher.parent.mkdir()
    run("encrypt", "--in", str(plain), "--key", str(key), "--out", str(cipher))

    # fresh key with the right geometry but wrong material, stats grafted on
    wrong = tmp_path / "wrong.key"
    run("keygen", "--key", str(wrong), "--n", "2", "--images", "2", "--depth", "4", "--seed", "2")
    good = read_key(key)
    text = wrong.read_text()
    text += f"intensity_sum = {good.intensity_sum}\nbit_count = {good.bit_count}\n"
    wrong.write_text(text)

    out = tmp_path / "o" / "set.txt"
    out.parent.mkdir()
    assert run("decrypt", "--in", str(cipher), "--key", str(wrong), "--out", str(out)) == 0
    assert "warning" in capsys.readouterr().err


def test_analyze_pair_mode(tmp_path):
    a = random_images(n=4, count=2, seed=25)
    b = random_images(n=4, count=2, seed=26)
    pa, pb = tmp_path / "a.txt", tmp_path / "b.txt"
    save_multi(a, pa)
    save_multi(b, pb)
    report = tmp_path / "report.txt"
    assert run("analyze", "--in", str(pa), "--in2", str(pb), "--out", str(report)) == 0
    text = report.read_text()
    assert "chi2[0] = " in text
    assert "correlation[horizontal][0] = " in text
    assert "npcr = " in text
    assert "bit_diff = " in text


def test_analyze_full_mode(tmp_path):
    images = natural_images(4, 2, seed=27)
    plain = tmp_path / "plain.txt"
    save_multi(images, plain)
    key = tmp_path / "k.key"
    run("keygen", "--key", str(key), "--n", "4", "--images", "2", "--seed", "5")
    report = tmp_path / "report.txt"
    code = run(
        "analyze", "--in", str(plain), "--key", str(key), "--out", str(report),
        "--block", "0,0,8,8", "--density", "0.1",
    )
    assert code == 0
    text = report.read_text()
    assert "npcr = " in text
    assert "psnr[occlusion] = " in text
    assert "psnr[noise_0.1] = " in text


def test_analyze_requires_a_mode(tmp_path):
    images = random_images(n=2, count=1, seed=28)
    plain = tmp_path / "p.txt"
    save_multi(images, plain)
    assert run("analyze", "--in", str(plain)) == 1


def test_partitions_commands(tmp_path, capsys):
    assert run("partitions", "count", "3") == 0
    assert capsys.readouterr().out.strip() == "26"
    assert run("partitions", "count", "8") == 0
    assert capsys.readouterr().out.strip() == (
        "1947270476915296449559703445493848930452791205"
    )
    assert run("partitions", "unrank", "3", "0") == 0
    assert capsys.readouterr().out.strip() == "8"
    assert run("partitions", "check", "4,2,2") == 0
    assert "admissible" in capsys.readouterr().out
    assert run("partitions", "check", "2,4,2") == 0
    assert "inadmissible" in capsys.readouterr().out
    assert run("partitions", "list", "2") == 0
    assert len(capsys.readouterr().out.splitlines()) == 5
    assert run("partitions", "list", "4") == 2  # capped at n = 3
    assert run("partitions", "unrank", "3", "99") == 2


def test_circuit_commands(tmp_path, capsys):
    gates = tmp_path / "circuit.txt"
    assert run("circuit", "synth", "4,2,2", "--out", str(gates)) == 0
    assert gates.read_text().startswith("# n=3 partition=4,2,2")
    assert run("circuit", "verify", "--in", str(gates), "4,2,2") == 0
    assert "PASS" in capsys.readouterr().out
    assert run("circuit", "verify", "--in", str(gates), "2,2,4") == 3
    assert "FAIL" in capsys.readouterr().out
    assert run("circuit", "synth", "2,4,2", "--out", str(gates)) == 2  # inadmissible


def test_appendix_commands(tmp_path):
    orbit = tmp_path / "orbit.csv"
    code = run(
        "appendix", "henon", "--lambda1", "2", "--lambda2", "2",
        "--count", "4", "--out", str(orbit),
    )
    assert code == 0
    lines = orbit.read_text().splitlines()
    assert lines[0] == "step,x,y"
    assert len(lines) == 5

    table = tmp_path / "cheb.csv"
    assert run("appendix", "chebyshev", "--kmax", "3", "--points", "5", "--out", str(table)) == 0
    lines = table.read_text().splitlines()
    assert lines[0] == "x,T0,T1,T2,T3"
    assert len(lines) == 6


def test_stdout_output(capsys):
    assert run("circuit", "synth", "1,1") == 0
    assert "# n=1" in capsys.readouterr().out


def test_usage_errors(tmp_path, capsys):
    assert run() == 1
    assert run("partitions") == 1
    assert run("keygen", "--n", "3", "--images", "1") == 1  # --key missing
    assert run("--threads", "0", "partitions", "count", "1") == 1
    assert run("--threads", "2", "partitions", "count", "1") == 0
    capsys.readouterr()


def test_io_errors(tmp_path, capsys):
    key = tmp_path / "k.key"
    run("keygen", "--key", str(key), "--n", "2", "--images", "1", "--seed", "1")
    missing = tmp_path / "nope.txt"
    out = tmp_path / "c.txt"
    assert run("encrypt", "--in", str(missing), "--key", str(key), "--out", str(out)) == 2
    assert "error" in capsys.readouterr().err
