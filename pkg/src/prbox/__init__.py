"""Process-based Popescu-Rohrlich boxes: channels, correlation boxes, CHSH and a classical simulation."""

from prbox.boxes import (
    CorrelationBox,
    box_from_channel,
    chsh,
    correlator,
    is_no_signaling,
    local_membership,
    make_pr_box,
)
from prbox.channels import (
    Channel,
    ChoiOperator,
    DensityOperator,
    apply,
    from_choi,
    make_pr_channel,
    make_prepared_states,
    to_choi,
)

__version__ = "0.1.0"
