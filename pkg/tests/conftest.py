import pytest
from hypothesis import HealthCheck, settings

from ramanujan_cert.numerics import PrecisionContext
from ramanujan_cert.sieve import PrimeCounter

settings.register_profile(
    "default",
    deadline=None,
    max_examples=60,
    suppress_health_check=[HealthCheck.too_slow, HealthCheck.function_scoped_fixture],
)
settings.load_profile("default")


@pytest.fixture(scope="session")
def ctx():
    return PrecisionContext()


@pytest.fixture(scope="session")
def counter():
    return PrimeCounter()


@pytest.fixture(scope="session")
def computed_envelope(ctx):
    from ramanujan_cert.envelope import envelope_constants
    from ramanujan_cert.numerics import CertReal

    return envelope_constants(CertReal("3157.442", prec=ctx.prec), ctx.default_tolerance, ctx)


@pytest.fixture(scope="session")
def certificate(ctx, computed_envelope):
    from ramanujan_cert.ramanujan import build_certificate

    return build_certificate("3157.442", ctx, env=computed_envelope)


ACCEPTANCE = pytest.StashKey[list]()


@pytest.fixture(scope="session")
def acceptance_log(request):
    return request.config.stash.setdefault(ACCEPTANCE, [])


def pytest_terminal_summary(terminalreporter, config):
    lines = config.stash.get(ACCEPTANCE, [])
    if lines:
        terminalreporter.section("acceptance criteria")
        for line in sorted(lines):
            terminalreporter.write_line(line)
