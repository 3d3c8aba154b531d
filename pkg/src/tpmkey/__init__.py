"""Tree parity machine key agreement with weight equalization."""

from .distill import (
    DistillConfig,
    Encoding,
    distill,
    distill_stages,
    dropout,
    encode_bits,
    entropy,
    equalize,
    secret_length,
    substitute,
    weights_digest,
)
from .protocol import (
    RoundResult,
    Session,
    SessionReport,
    Status,
    check_sync,
    generate_input,
    run_round,
    run_session,
)
from .tpm import (
    Distribution,
    Role,
    Rule,
    TpmParams,
    TreeParityMachine,
    apply_update,
    hidden_outputs,
    init_weights,
    tpm_output,
    weight_distribution,
)

__version__ = "0.1.0"
