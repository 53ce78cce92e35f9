"""
Forged header runs on a compromised light node.

A light node verifies seals but holds no bodies, so a hacker with access to
it can mine a short run of cheap headers on top of its head and push its
local height and total difficulty past every peer.
"""

from typing import List, Tuple

import structlog
from pydantic import BaseModel, ConfigDict

from src.core.encoding import block_hash, uncle_list_hash
from src.core.merkle import EMPTY_ROOT
from src.models.data_models import Header
from src.models.exceptions import BudgetTooSmallError, TamperPreconditionError
from src.models.input_models import ComputeBudget
from src.services.chain import HeaderChain
from src.services.pow import calc_difficulty, mine, seed_for_height

logger = structlog.get_logger(__name__)


class LightTamperReceipt(BaseModel):
    """Headers forged onto a light node"""

    model_config = ConfigDict(frozen=True)

    node_id: str
    forged_hashes: Tuple[bytes, ...]
    forged_height: int
    forged_td: int
    attempts: int

    def summary(self) -> dict:
        return {
            "node": self.node_id,
            "forged": [h.hex() for h in self.forged_hashes],
            "height": self.forged_height,
            "td": self.forged_td,
            "attempts": self.attempts,
        }


def tamper_light_head(
    chain: HeaderChain,
    node_id: str,
    forged_height: int,
    budget: ComputeBudget,
    network_height: int,
    rng_seed: int = 0,
) -> LightTamperReceipt:
    """
    Mine and import a header run ending at ``forged_height``.

    Each header is spaced one target interval after its parent, which
    yields the lowest difficulty the retarget rule allows. All headers are
    sealed before any is imported, so an exhausted budget leaves the chain
    unchanged.

    Args:
        chain: The light node's header chain
        node_id: Light node identifier
        forged_height: Height of the last forged header
        budget: Nonce trials shared by the whole run
        network_height: Highest head height known to the node's peers
        rng_seed: Seed of the nonce searches

    Raises:
        TamperPreconditionError: If forged_height does not exceed the local
            and network heights
        BudgetTooSmallError: If the budget runs out before every header is sealed
    """
    local_height = chain.head_header.height
    if forged_height <= max(local_height, network_height):
        raise TamperPreconditionError(
            node_id, f"forged height {forged_height} must exceed the current head height {max(local_height, network_height)}"
        )

    params = chain.params
    parent = chain.head_header
    required = forged_height - local_height
    remaining = budget.max_attempts
    spent = 0
    forged: List[Header] = []

    for height in range(local_height + 1, forged_height + 1):
        timestamp = parent.timestamp + params.target_spacing_s
        header = Header(
            parent_hash=block_hash(parent),
            uncle_root=uncle_list_hash([]),
            state_root=parent.state_root,
            tx_root=EMPTY_ROOT,
            receipt_root=EMPTY_ROOT,
            bloom=0,
            difficulty=calc_difficulty(parent, timestamp, params),
            height=height,
            gas_limit=parent.gas_limit,
            gas_used=0,
            timestamp=timestamp,
        )
        if remaining <= 0:
            raise BudgetTooSmallError(node_id, budget.max_attempts, len(forged), required)
        seal = mine(header, seed_for_height(height, params), ComputeBudget(max_attempts=remaining), rng_seed + height)
        remaining -= seal.attempts
        spent += seal.attempts
        if not seal.sealed:
            raise BudgetTooSmallError(node_id, budget.max_attempts, len(forged), required)
        header = seal.apply(header)
        forged.append(header)
        parent = header

    for header in forged:
        outcome = chain.import_header(header)
        if not outcome.accepted:
            raise TamperPreconditionError(node_id, f"forged header rejected locally: {outcome.label}")

    receipt = LightTamperReceipt(
        node_id=node_id,
        forged_hashes=tuple(block_hash(h) for h in forged),
        forged_height=forged_height,
        forged_td=chain.head_td,
        attempts=spent,
    )
    logger.warning(
        "Light node header chain forged",
        node=node_id,
        height=forged_height,
        td=receipt.forged_td,
        attempts=spent,
    )
    return receipt
