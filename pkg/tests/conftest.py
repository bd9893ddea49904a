"""Shared helpers plus the acceptance-summary section of the report."""

from selfishsim.config import ProtocolName, symmetric_attacker_config


def quick_config(protocol, alpha=0.3, gamma=0.5, rounds=2000, seed=1, attackers=1,
                 protocol_params=None):
    """Small symmetric-attacker config for fast structural tests."""
    return symmetric_attacker_config(
        ProtocolName(protocol),
        attackers,
        alpha,
        gamma=gamma,
        rounds=rounds,
        master_seed=seed,
        protocol_params=protocol_params,
    )


ACCEPTANCE_LINES = []


def record_acceptance(line: str) -> None:
    """Queue a one-line criterion verdict for the end-of-run summary."""
    ACCEPTANCE_LINES.append(line)


def pytest_terminal_summary(terminalreporter):
    if ACCEPTANCE_LINES:
        terminalreporter.section("acceptance criteria")
        for line in ACCEPTANCE_LINES:
            terminalreporter.write_line(line)
