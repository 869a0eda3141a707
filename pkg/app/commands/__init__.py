# Command modules: one per CLI command, each exposing run(config) -> exit status
from app.commands import bundle, forward, identities, inverse, verify

COMMANDS = {
    "forward": forward.run,
    "inverse4": inverse.run_four,
    "inverse3": inverse.run_three,
    "verify": verify.run,
    "identities": identities.run,
    "bundle": bundle.run,
}

__all__ = ["COMMANDS"]
