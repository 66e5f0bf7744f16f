"""Smoke test for the qraise Python module.

Build and install first, e.g. `pip install ./crates/python`, then run
`python python/smoke_test.py`.
"""

import qraise


def main():
    q = qraise.Qbf("exists x; forall y; : x | y")
    assert q.shape == "EA"
    assert q.prefix == [("exists", "x"), ("forall", "y")]
    assert q.is_valid()
    assert str(q.matrix) == "x | y"

    f = qraise.Formula("(y & !x) | x")
    assert str(f.substitute("x", True)) == "y & !true | true"
    assert f.evaluate({"x": False, "y": True})

    abd = qraise.reduce("abduction", q)
    assert abd.explanations() == [["x+"]]
    assert abd.has_explanation()

    ae = qraise.Qbf("forall x; exists y; : x <-> y")
    theory = qraise.reduce("default", ae)
    assert theory.query == "a"
    assert theory.skeptically_entails()
    assert len(theory.extensions()) == 2

    plan = qraise.reduce("planning", ae).plan()
    assert plan is not None and plan[-1] == "forall2_a3"
    assert qraise.reduce("planning", qraise.Qbf("exists x; forall y; : x <-> y")).plan() is None

    answer, witness = qraise.solve("abduction", abd.to_text())
    assert answer and witness == "{x+}"

    report = qraise.check("planning", exhaustive=True, vars=2)
    assert report.passed and report.total == report.agreements == 74
    lemma = qraise.check_lemma("default", seed=1, samples=20)
    assert lemma.passed

    rows, verdict, _ = qraise.growth("abduction", 4)
    assert verdict and len(rows) == 5

    try:
        qraise.Qbf("forall y; : x")
    except qraise.QraiseError as e:
        assert str(e).startswith("E_FREE_VAR")
    else:
        raise AssertionError("free variable accepted")

    try:
        qraise.check("default", pattern="ea", count=3)
    except qraise.QraiseError as e:
        assert str(e).startswith("E_SHAPE")
    else:
        raise AssertionError("unsupported pattern accepted")

    print("qraise smoke test passed")


if __name__ == "__main__":
    main()
