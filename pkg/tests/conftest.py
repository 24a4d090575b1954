import numpy as np
from hypothesis import settings

from hintolo.core import RoundRecord

settings.register_profile("default", deadline=None, max_examples=60)
settings.load_profile("default")


def make_record(t, cost, played, queried=False, abstained=False, hint=None, loss=None, alpha=1.0):
    cost = np.asarray(cost, dtype=float)
    played = np.asarray(played, dtype=float)
    if queried and hint is None:
        hint = -played
    if loss is None:
        loss = -alpha * float(cost @ cost) if abstained else float(cost @ played)
    return RoundRecord(
        t=t, queried=queried, abstained=abstained, hint=hint if queried else None,
        ftrl_point=played, played=played, cost=cost, loss=loss, p_t=0.0, z_t=0.0,
        sigma_t=float(cost @ cost),
    )


def pytest_terminal_summary(terminalreporter):
    import test_acceptance

    if test_acceptance.RESULTS:
        terminalreporter.section("acceptance criteria")
        for n in sorted(test_acceptance.RESULTS):
            terminalreporter.write_line(test_acceptance.RESULTS[n])
