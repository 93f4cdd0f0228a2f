"""Smoke test for the dpl_py extension module.

Loads the module straight from the cargo build output, so run
`cargo build -p dpl-py` first:

    python3 python/smoke_test.py
"""

import json
import pathlib
import shutil
import sys
import tempfile

ROOT = pathlib.Path(__file__).resolve().parent.parent


def load_module():
    for profile in ("debug", "release"):
        built = ROOT / "target" / profile / "libdpl_py.so"
        if built.exists():
            staging = pathlib.Path(tempfile.mkdtemp(prefix="dpl_py_"))
            shutil.copy(built, staging / "dpl_py.so")
            sys.path.insert(0, str(staging))
            import dpl_py

            return dpl_py
    sys.exit("libdpl_py.so not found; run `cargo build -p dpl-py` first")


def main():
    dpl = load_module()

    assert dpl.parse("[rev p]<lt>T") == "[rev p](<lt> T)"

    m = dpl.Model.fixture("e1")
    assert m.worlds() == ["w1", "w2", "w3"]
    assert m.extension("p & q") == ["w3"]

    # Revising E1 by q makes w3 the unique minimum.
    revised = m.apply("rev", "q")
    assert revised.satisfies("rev", "w3", "~<lt>T")
    assert not revised.satisfies("rev", "w1", "~<lt>T")

    # After revision by q the agent believes q (belief = truth at minima).
    assert m.satisfies("rev", "w1", "[rev q]A((~<lt>T) -> q)")

    # Round trip through the JSON document format.
    again = dpl.Model.from_json(m.to_json())
    assert again.fingerprint() == m.fingerprint()

    # Lexicographic revision is faithful and DP1/DP2-compliant on E1.
    for check in ("faith", "dp1comp", "dp2comp", "reccomp"):
        report = json.loads(m.check_postulate("rev", check))
        assert report["verdict"] == "pass", (check, report)

    # The two-world regression: `star` fails world-level DP1 while identity
    # passes, yet both satisfy the generalized condition DP1comp — and the
    # DP1 schema tracks the generalized condition, so it passes for both.
    f1 = dpl.Model.fixture("f1_identity")
    assert json.loads(f1.check_postulate("star", "dp1"))["verdict"] == "fail"
    assert json.loads(f1.check_postulate("id", "dp1"))["verdict"] == "pass"
    assert json.loads(f1.check_postulate("star", "dp1comp"))["verdict"] == "pass"
    assert json.loads(f1.check_schema("star", "dp1ax"))["verdict"] == "pass"

    # Both F1 worlds are dynamically equivalent: one block.
    blocks, separators = f1.equivalence("star")
    assert blocks == [["w1", "w2"]]
    assert len(separators) == 1

    # The audit pipeline agrees.
    lines = dpl.audit(
        json.dumps(
            {
                "fixtures": ["f1_identity"],
                "operators": ["star", "id"],
                "postulates": ["dp1"],
            }
        )
    ).splitlines()
    verdicts = [json.loads(line)["verdict"] for line in lines]
    assert verdicts == ["fail", "pass"]

    print("smoke test passed")


if __name__ == "__main__":
    main()
