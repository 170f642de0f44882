"""Link-level simulation toolkit for polar-coded tag authentication.

The transmitter hides a keyed authentication tag in the frozen bits of a
short polar code and splices the resulting codeword into keyed positions of
the message; the receiver re-derives the key material, decodes the tag code
with the raw tag as frozen-bit side information, and accepts only on an
exact anchor match.  Modules: polar (codes), keyed (position/tag
derivation), channel (BPSK link with interference), protocol (tx/rx and the
uncoded baseline), adversary (eavesdropping and spoofing), bounds
(closed-form robustness/compatibility bounds), experiments (Monte Carlo
harness), cli (command line).
"""

__version__ = "0.1.0"

from . import adversary, bounds, channel, experiments, keyed, polar, protocol  # noqa: E402,F401
