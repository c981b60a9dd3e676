"""Synthetic transaction chain realizing a planted wallet partition.

The construction guarantees that multi-input clustering plus the
deposit-address heuristic recover the planted wallets exactly:

- a wallet's addresses are tied together by one consolidation tx;
- deposit addresses receive funds and then fully forward to their service
  wallet at least twice, and never spend anywhere else;
- every other spend carries change back to the spender, so no unplanned
  address ever qualifies as a full-forwarder.
"""

from __future__ import annotations

import hashlib
import random
from dataclasses import dataclass, field
from decimal import Decimal

from ..crypto import ChainTx, RateTable

_B58_ALPHABET = "123456789ABCDEFGHJKLMNPQRSTUVWXYZabcdefghijkmnopqrstuvwxyz"

COIN = 10**8
DAY = 86400.0


def _base58check(version: int, payload: bytes) -> str:
    raw = bytes([version]) + payload
    check = hashlib.sha256(hashlib.sha256(raw).digest()).digest()[:4]
    data = raw + check
    n = int.from_bytes(data, "big")
    out = []
    while n:
        n, r = divmod(n, 58)
        out.append(_B58_ALPHABET[r])
    for byte in data:
        if byte == 0:
            out.append(_B58_ALPHABET[0])
        else:
            break
    return "".join(reversed(out))


def make_address(rng: random.Random) -> str:
    """A checksum-valid pay-to-pubkey-hash address."""
    return _base58check(0, rng.randbytes(20))


@dataclass(frozen=True)
class ChainPlan:
    """Parameters for one synthetic chain. Wallet count is
    n_customers + n_services + n_exchanges; size n_customers so that
    round(contamination * wallets) equals n_exchanges when exact outlier
    recovery is wanted."""

    seed: int = 0
    n_customers: int = 13
    n_services: int = 6
    n_exchanges: int = 1
    addresses_per_service: int = 3
    deposits_per_service: int = 1
    forwards_per_deposit: int = 2
    payments: int = 24
    exchange_addresses: int = 12
    exchange_deposits: int = 20
    exchange_scale: int = 400
    start_time: float = 3600.0
    horizon: float = 14 * DAY


@dataclass
class ChainTruth:
    """Planted partition and roles, keyed by canonical wallet id (the
    smallest member address)."""

    wallets: dict[str, set[str]] = field(default_factory=dict)
    address_wallet: dict[str, str] = field(default_factory=dict)
    outlier_wallets: set[str] = field(default_factory=set)
    service_public_address: list[str] = field(default_factory=list)
    customer_addresses: list[str] = field(default_factory=list)

    def register(self, members: set[str], outlier: bool = False) -> str:
        wid = min(members)
        self.wallets[wid] = members
        for a in members:
            self.address_wallet[a] = wid
        if outlier:
            self.outlier_wallets.add(wid)
        return wid


def default_rate_table(start: float = 0.0, days: int = 21,
                       seed: int = 7) -> RateTable:
    """Rate points every six hours, a bounded deterministic walk."""
    rng = random.Random(seed)
    points = []
    rate = Decimal("40000.00")
    t = start
    for _ in range(days * 4):
        points.append((t, rate))
        rate += Decimal(rng.randint(-300, 300)) / 100
        t += DAY / 4
    return RateTable(points)


def generate_chain(plan: ChainPlan) -> tuple[list[ChainTx], ChainTruth]:
    """Build the planted chain; txids are assigned in timestamp order."""
    rng = random.Random(f"chain:{plan.seed}")
    truth = ChainTruth()
    # Events are collected in causal order and spaced evenly over the
    # horizon afterwards, once the true count is known.
    events: list[tuple[tuple[tuple[str, int], ...],
                       tuple[tuple[str, int], ...]]] = []

    def emit(inputs, outputs):
        events.append((tuple(inputs), tuple(outputs)))

    customers = []
    for _ in range(plan.n_customers):
        addr = make_address(rng)
        customers.append(addr)
        truth.register({addr})
        emit([], [(addr, 50 * COIN)])  # coinbase funding
    truth.customer_addresses = list(customers)

    def plant_service(n_addresses: int, n_deposits: int, forwards: int,
                      unit: int) -> tuple[str, set[str]]:
        members = {make_address(rng) for _ in range(n_addresses)}
        for a in sorted(members):
            emit([], [(a, 2 * unit)])
        if len(members) > 1:
            ordered = sorted(members)
            hub = ordered[0]
            emit([(a, 2 * unit) for a in ordered],
                 [(hub, 2 * unit * len(ordered))])
        hub = min(members)
        for _ in range(n_deposits):
            d = make_address(rng)
            members.add(d)
            funder = rng.choice(customers)
            for _ in range(forwards):
                emit([(funder, unit + unit // 10)],
                     [(d, unit), (funder, unit // 10)])
                emit([(d, unit)], [(hub, unit)])
        return hub, members

    services = []
    for _ in range(plan.n_services):
        hub, members = plant_service(
            plan.addresses_per_service, plan.deposits_per_service,
            plan.forwards_per_deposit, COIN)
        services.append(hub)
        truth.register(members)
        truth.service_public_address.append(hub)

    exchanges = []
    for _ in range(plan.n_exchanges):
        hub, members = plant_service(
            plan.exchange_addresses, plan.exchange_deposits,
            plan.forwards_per_deposit, plan.exchange_scale * COIN)
        exchanges.append(hub)
        truth.register(members, outlier=True)

    # Direct customer payments to services, always with change.
    for i in range(plan.payments):
        funder = customers[i % len(customers)]
        target = services[i % len(services)] if services else exchanges[0]
        value = (1 + i % 5) * COIN // 4
        emit([(funder, value + COIN // 20)],
             [(target, value), (funder, COIN // 20)])

    # Services occasionally pay customers back (refund-shaped, with change).
    for i, hub in enumerate(services):
        payee = customers[(i * 3) % len(customers)]
        emit([(hub, COIN // 2)], [(payee, COIN // 3), (hub, COIN // 6)])

    step = plan.horizon / max(1, len(events))
    txs = [
        ChainTx(f"tx{i:05d}", plan.start_time + i * step, ins, outs)
        for i, (ins, outs) in enumerate(events)
    ]
    return txs, truth
