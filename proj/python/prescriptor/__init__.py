"""Channel-wise decoherence prescriptor toolkit."""

from ._core import (
    DomainError,
    ProtocolViolation,
    __version__,
    biot_savart,
    budget_plan,
    check_closure,
    factorization_error,
    mds_format,
    mds_validate,
    mu2,
    mu2_bootstrap,
    protocol_seal,
    protocol_verdict,
    q_inv_dielectric,
    run_cli,
)

__all__ = [
    "DomainError",
    "ProtocolViolation",
    "__version__",
    "biot_savart",
    "budget_plan",
    "check_closure",
    "factorization_error",
    "mds_format",
    "mds_validate",
    "mu2",
    "mu2_bootstrap",
    "protocol_seal",
    "protocol_verdict",
    "q_inv_dielectric",
    "run_cli",
]
