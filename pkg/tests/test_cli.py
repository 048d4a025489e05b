import pytest

from multiteam.cli import run
from multiteam.rewrite import phi_sub

EULER = "universe 3 / relation E 2 / 0 1 / 1 2 / 2 0"
EULER_PHI = "A v. A w. (E(v, w) -> minc(v; w))"


def block(text):
    _, _, tail = text.partition("\n---\n")
    return dict(line.split("=", 1) for line in tail.splitlines() if "=" in line)


def revalidate(kv, formula):
    code, out = run(["eval", "--structure", "text:" + kv["witness_structure"],
                     "--multiteam", "text:" + kv["witness_multiteam"], "--formula", "text:" + formula])
    return code, out


def test_eval_euler_cycle(tmp_path):
    (tmp_path / "g.str").write_text(EULER.replace(" / ", "\n") + "\n")
    (tmp_path / "m.mt").write_text("vars\n()\n")
    (tmp_path / "f.phi").write_text("A v. A w. (E(v, w) -> minc(v; w))\n")
    code, out = run(["eval", "--structure", str(tmp_path / "g.str"), "--multiteam",
                     str(tmp_path / "m.mt"), "--formula", str(tmp_path / "f.phi"),
                     "--semantics", "multiteam"])
    assert code == 0 and block(out)["verdict"] == "true"


def test_eval_unbalanced_graph_refuted_and_revalidates():
    code, out = run(["eval", "--structure", "text:universe 3 / relation E 2 / 0 1 / 1 2",
                     "--multiteam", "text:vars / () : 1", "--formula", "text:" + EULER_PHI])
    kv = block(out)
    assert code == 1 and kv["verdict"] == "false"
    assert revalidate(kv, EULER_PHI)[0] == 1


def test_equiv_minc_phi_sub():
    phi = str(phi_sub(("x",), ("y",)))
    code, out = run(["equiv", "--grid", "A=2,support=3,mult=2", "text:minc(x; y)", "text:" + phi])
    assert code == 0, out
    assert block(out)["verdict"] == "equivalent"


def test_witness_sum_refuted_and_revalidates():
    code, out = run(["witness", "--family", "Mk", "--k", "2", "--check-sum-with", "3"])
    kv = block(out)
    assert code == 1 and kv["verdict"] == "false"
    assert revalidate(kv, kv["witness_formula"])[0] == 1
    assert run(["witness", "--k", "3", "--check-sum-with", "3"])[0] == 0


def test_equiv_witness_revalidates():
    code, out = run(["equiv", "text:dep(x; y)", "text:excl(x; y)"])
    kv = block(out)
    assert code == 1
    left, right = kv["witness_truth"].split(",")
    assert (revalidate(kv, "dep(x; y)")[0] == 0) == (left == "true")
    assert (revalidate(kv, "excl(x; y)")[0] == 0) == (right == "true")


def test_closure_witness():
    code, out = run(["closure", "text:minc(x; y)", "--property", "downward"])
    assert code == 1 and "witness_multiteam" in block(out)
    assert run(["closure", "text:dep(x; y)", "--property", "downward"])[0] == 0


def test_topology_expect():
    assert run(["topology", "text:dep(x; y)", "--expect", "clopen"])[0] == 0
    code, out = run(["topology", "text:minc(x; y)", "--expect", "open"])
    assert code == 1 and block(out)["not_open_valid"] == "true"


def test_translate_and_back_checks():
    assert run(["translate", "text:minc(x; y)", "--check", "A=2,support=2,mult=2"])[0] == 0
    code, out = run(["normal-form", "text:base f/1 / A x. f(x) = f(x)", "--check", "A=2,support=2,mult=2"])
    assert code == 0, out


def test_tsv():
    code, out = run(["tsv", "text:minc(x; y)"])
    assert code == 0 and "cycle" in out
    code, out = run(["tsv", "text:minc(x; y)", "--team", "text:vars x y / 0 1 : 1 / 1 0 : 1"])
    assert code == 0
    assert run(["tsv", "text:minc(x; y)", "--team", "text:vars x y / 0 1 : 1"])[0] == 1


def test_eval_team():
    args = ["eval-team", "--team", "text:vars x y / 0 0", "--formula", "text:E z. anon(x; z)"]
    assert run(args + ["--mode", "lax"])[0] == 0
    assert run(args + ["--mode", "strict"])[0] == 1


@pytest.mark.parametrize("argv", [
    ["eval", "--bogus"],
    ["nope"],
    ["eval", "--multiteam", "/nonexistent/m.mt", "--formula", "text:x = x"],
    ["eval", "--multiteam", "text:vars x / 0 : 0", "--formula", "text:x = x"],
    ["eval", "--multiteam", "text:vars x / 0 : 1", "--formula", "text:x = "],
    ["equiv", "text:x = y", "text:x = y", "--grid", "A=two"],
    ["equiv", "text:x = y", "text:x = y", "--jobs", "0"],
])
def test_usage_errors_exit_2(argv):
    assert run(argv)[0] == 2


def test_time_budget_exit_2():
    code, out = run(["equiv", "text:minc(x; y)", "text:minc(x; y)", "--grid", "A=3,support=4,mult=3",
                     "--time-budget", "0.05"])
    assert code == 2 and "cap-exceeded" in out


@pytest.mark.parametrize("argv", [
    ["equiv", "text:dep(x; y)", "text:excl(x; y)"],
    ["topology", "text:fork[<2/3](x; y)"],
    ["witness", "--k", "2", "--check-sum-with", "3"],
    ["translate", "text:(minc(x; y) | dep(x; y))"],
])
def test_reports_are_deterministic(argv):
    assert run(argv) == run(argv)
