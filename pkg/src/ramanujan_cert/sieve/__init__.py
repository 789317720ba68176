"""Segmented sieve: exact pi and theta, Ramanujan checks at integers, theta-bound audit."""

from .counter import (
    AuditReport,
    CheckResult,
    PrimeCounter,
    PrimeCountResult,
    ScanReport,
    UndecidedComparison,
    audit_theta_bound,
    check_point,
    default_counter,
    scan,
    scan_range,
    sieve_pi_theta,
    write_csv,
)

__all__ = [
    "AuditReport",
    "CheckResult",
    "PrimeCountResult",
    "PrimeCounter",
    "ScanReport",
    "UndecidedComparison",
    "audit_theta_bound",
    "check_point",
    "default_counter",
    "scan",
    "scan_range",
    "sieve_pi_theta",
    "write_csv",
]
