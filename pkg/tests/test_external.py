"""External scorer line protocol against real child processes."""
from __future__ import annotations

import sys
import textwrap

import pytest

from pgfs.scoring import ExternalScorer, ExternalScorerError


def child(code: str) -> list[str]:
    return [sys.executable, "-u", "-c", textwrap.dedent(code)]


ECHO_LENGTH = """
    import sys
    for line in sys.stdin:
        print(float(len(line.strip())))
        sys.stdout.flush()
"""


def test_scores_batch_in_order():
    with ExternalScorer(child(ECHO_LENGTH), timeout=10) as scorer:
        out = scorer.score(["C", "CCO", "CCCCCC"])
    assert out == [1.0, 3.0, 6.0]


def test_multiple_batches_reuse_the_process():
    with ExternalScorer(child(ECHO_LENGTH), timeout=10) as scorer:
        assert scorer.score(["CC"]) == [2.0]
        assert scorer.score(["CCCC", "C"]) == [4.0, 1.0]


def test_err_reply_scores_at_floor():
    code = """
        import sys
        for line in sys.stdin:
            s = line.strip()
            if s == "CCO":
                print("ERR cannot score")
            else:
                print(1.5)
            sys.stdout.flush()
    """
    with ExternalScorer(child(code), timeout=10, floor=-7.0) as scorer:
        out = scorer.score(["C", "CCO", "CC"])
        assert out == [1.5, -7.0, 1.5]
        assert scorer.err_count == 1


def test_unparseable_reply_raises():
    code = """
        import sys
        for line in sys.stdin:
            print("banana")
            sys.stdout.flush()
    """
    with ExternalScorer(child(code), timeout=10) as scorer:
        with pytest.raises(ExternalScorerError) as err:
            scorer.score(["C"])
    assert err.value.reason == "unparseable reply"


def test_timeout_raises():
    code = """
        import sys, time
        sys.stdin.readline()
        time.sleep(60)
    """
    with ExternalScorer(child(code), timeout=0.3) as scorer:
        with pytest.raises(ExternalScorerError) as err:
            scorer.score(["C"])
    assert err.value.reason == "timeout"


def test_child_exit_raises():
    code = """
        import sys
        sys.stdin.readline()
        sys.exit(3)
    """
    with ExternalScorer(child(code), timeout=10) as scorer:
        with pytest.raises(ExternalScorerError) as err:
            scorer.score(["C"])
    assert err.value.reason == "child exited"


def test_missing_command_raises():
    with pytest.raises(ExternalScorerError) as err:
        ExternalScorer(["/nonexistent/scorer-binary"])
    assert err.value.reason == "failed to start"


def test_empty_command_rejected():
    with pytest.raises(ValueError):
        ExternalScorer([])


def test_string_command_is_shell_split():
    with ExternalScorer(
        f'{sys.executable} -u -c "import sys\nfor l in sys.stdin: print(2.5)"',
        timeout=10,
    ) as scorer:
        assert scorer.score(["C"]) == [2.5]


def test_close_is_idempotent():
    scorer = ExternalScorer(child(ECHO_LENGTH), timeout=10)
    scorer.close()
    scorer.close()
