"""Chain ingestion, wallet clustering, features, and money-flow graph.

All USD arithmetic is exact Decimal: satoshis divide by 1e8 and multiply
by the rate point in force at the transaction time, so totals reconcile
to the cent regardless of summation order.
"""

from __future__ import annotations

import bisect
import warnings
from dataclasses import dataclass, field
from decimal import Decimal
from typing import Iterable, Optional, Sequence

import numpy as np
from sklearn.ensemble import IsolationForest

SATOSHIS_PER_COIN = Decimal(10) ** 8
CENT = Decimal("0.01")

WALLET_FEATURE_NAMES = (
    "n_addresses", "n_tx", "n_deposit_tx", "n_withdraw_tx",
    "deposits_usd", "withdrawals_usd", "balance_usd",
)


class MalformedBlock(ValueError):
    pass


class RateUnavailable(ValueError):
    pass


@dataclass(frozen=True, slots=True)
class ChainTx:
    txid: str
    timestamp: float
    inputs: tuple[tuple[str, int], ...]   # (address, satoshis)
    outputs: tuple[tuple[str, int], ...]

    def __post_init__(self):
        for addr, value in self.inputs + self.outputs:
            if value < 0:
                raise ValueError(f"negative value on {addr} in {self.txid}")

    @property
    def is_coinbase(self) -> bool:
        return not self.inputs

    def addresses(self) -> set[str]:
        return {a for a, _ in self.inputs} | {a for a, _ in self.outputs}


@dataclass(slots=True)
class Block:
    height: int
    txs: list[ChainTx]


class ChainIndex:
    """Transaction store plus an address occurrence index. Re-ingesting a
    block (or tx) already present is a no-op; a txid colliding with
    different content is rejected."""

    def __init__(self):
        self.txs: dict[str, ChainTx] = {}
        self.heights_seen: set[int] = set()
        self.addr_as_input: dict[str, set[str]] = {}
        self.addr_as_output: dict[str, set[str]] = {}

    def __len__(self) -> int:
        return len(self.txs)

    def ingest(self, blocks: Iterable[Block]) -> int:
        """Index a height-ordered block stream; returns newly added tx
        count. Malformed entries are rejected with their stream position."""
        added = 0
        for position, block in enumerate(blocks):
            if not isinstance(block, Block):
                raise MalformedBlock(f"stream position {position}: not a block")
            for tx in block.txs:
                if not tx.txid:
                    raise MalformedBlock(
                        f"stream position {position}: tx without txid")
                added += self._ingest_tx(tx, position)
            self.heights_seen.add(block.height)
        return added

    def ingest_txs(self, txs: Iterable[ChainTx]) -> int:
        return self.ingest([Block(height=-1, txs=list(txs))])

    def _ingest_tx(self, tx: ChainTx, position: int) -> int:
        existing = self.txs.get(tx.txid)
        if existing is not None:
            if existing != tx:
                raise MalformedBlock(
                    f"stream position {position}: txid {tx.txid} collides "
                    "with different content")
            return 0
        self.txs[tx.txid] = tx
        for addr, _ in tx.inputs:
            self.addr_as_input.setdefault(addr, set()).add(tx.txid)
        for addr, _ in tx.outputs:
            self.addr_as_output.setdefault(addr, set()).add(tx.txid)
        return 1

    def occurrences(self, address: str) -> tuple[set[str], set[str]]:
        """(txids with address as input, txids with address as output)."""
        return (set(self.addr_as_input.get(address, ())),
                set(self.addr_as_output.get(address, ())))


# -- clustering ---------------------------------------------------------------


class WalletPartition:
    """Union-find over addresses. Wallet ids are the smallest member
    address, so the labeling is independent of merge order."""

    def __init__(self, addresses: Iterable[str] = ()):
        self._parent: dict[str, str] = {}
        for addr in addresses:
            self.add(addr)

    def add(self, addr: str) -> None:
        self._parent.setdefault(addr, addr)

    def find(self, addr: str) -> str:
        self.add(addr)
        root = addr
        while self._parent[root] != root:
            root = self._parent[root]
        while self._parent[addr] != root:
            self._parent[addr], addr = root, self._parent[addr]
        return root

    def union(self, a: str, b: str) -> None:
        ra, rb = self.find(a), self.find(b)
        if ra == rb:
            return
        lo, hi = sorted((ra, rb))
        self._parent[hi] = lo

    def addresses(self) -> list[str]:
        return sorted(self._parent)

    def groups(self) -> dict[str, set[str]]:
        out: dict[str, set[str]] = {}
        for addr in self._parent:
            out.setdefault(self.find(addr), set()).add(addr)
        return out

    def wallet_id(self, addr: str) -> str:
        """Canonical id: smallest address in the group. Unions always point
        the larger root at the smaller, so the root is the minimum."""
        return self.find(addr)


@dataclass(slots=True)
class Wallet:
    id: str
    addresses: set[str]
    labels: set[str] = field(default_factory=set)


def cluster_multi_input(txs: Iterable[ChainTx]) -> WalletPartition:
    """All input addresses of one transaction belong to one spender."""
    part = WalletPartition()
    for tx in txs:
        addrs = [a for a, _ in tx.inputs]
        for a, _ in tx.outputs:
            part.add(a)
        if not addrs:
            continue
        first = addrs[0]
        part.add(first)
        for other in addrs[1:]:
            part.union(first, other)
    return part


def apply_deposit_heuristic(
    part: WalletPartition,
    txs: Iterable[ChainTx],
    min_forwards: int = 2,
) -> WalletPartition:
    """Fold deposit addresses into the wallet they forward to.

    An address qualifies when it has >= min_forwards spending txs and every
    one of them pays all outputs to one single other wallet, the same
    wallet each time. Qualification is evaluated on a snapshot and merges
    applied in batch, repeated to a fixed point, so the result does not
    depend on iteration order.
    """
    tx_list = list(txs)
    spends: dict[str, list[ChainTx]] = {}
    for tx in tx_list:
        for addr, _ in tx.inputs:
            spends.setdefault(addr, []).append(tx)

    while True:
        merges: list[tuple[str, str]] = []
        for addr, outgoing in spends.items():
            if len(outgoing) < min_forwards:
                continue
            own = part.find(addr)
            targets: set[str] = set()
            full_forward = True
            for tx in outgoing:
                out_roots = {part.find(a) for a, _ in tx.outputs}
                if len(out_roots) != 1 or own in out_roots:
                    full_forward = False
                    break
                targets |= out_roots
            if full_forward and len(targets) == 1:
                merges.append((addr, next(iter(targets))))
        if not merges:
            return part
        for addr, target in merges:
            part.union(addr, target)


def label_wallets(
    part: WalletPartition,
    attributions: dict[str, set[str]],
) -> list[Wallet]:
    """Wallet labels are the union of attributing domains over member
    addresses."""
    groups = part.groups()
    wallets = []
    for root in sorted(groups):
        members = groups[root]
        labels: set[str] = set()
        for domain, addrs in attributions.items():
            if members & addrs:
                labels.add(domain)
        wallets.append(Wallet(id=min(members), addresses=members, labels=labels))
    return wallets


# -- rates and USD -------------------------------------------------------------


@dataclass
class RateTable:
    """Time-ordered (timestamp, USD per whole coin) points."""

    points: list[tuple[float, Decimal]]

    def __post_init__(self):
        self.points = sorted(
            (float(ts), Decimal(str(rate))) for ts, rate in self.points
        )
        self._times = [ts for ts, _ in self.points]

    def rate_at(self, ts: float) -> Decimal:
        """The nearest rate point at or before ``ts``."""
        if not self.points:
            raise RateUnavailable("rate table is empty")
        idx = bisect.bisect_right(self._times, ts) - 1
        if idx < 0:
            raise RateUnavailable(
                f"timestamp {ts} precedes first rate point {self._times[0]}")
        return self.points[idx][1]


def usd_convert(satoshis: int, at: float, rates: RateTable) -> Decimal:
    """Exact: satoshis / 1e8 * rate, as Decimal."""
    return Decimal(satoshis) / SATOSHIS_PER_COIN * rates.rate_at(at)


def to_cents(value: Decimal) -> Decimal:
    return value.quantize(CENT)


# -- wallet features ------------------------------------------------------------


@dataclass(slots=True)
class WalletFeature:
    wallet_id: str
    n_addresses: int
    n_tx: int
    n_deposit_tx: int
    n_withdraw_tx: int
    deposits_usd: Decimal
    withdrawals_usd: Decimal
    balance_usd: Decimal

    def as_floats(self) -> list[float]:
        return [
            float(self.n_addresses), float(self.n_tx),
            float(self.n_deposit_tx), float(self.n_withdraw_tx),
            float(self.deposits_usd), float(self.withdrawals_usd),
            float(self.balance_usd),
        ]


def wallet_features(
    wallet: Wallet,
    txs: Iterable[ChainTx],
    rates: RateTable,
) -> WalletFeature:
    """Deposit tx: pays the wallet from outside (coinbase counts as
    outside). Withdrawal tx: spends any wallet address; its withdrawn value
    is what leaves to other wallets (change back to self excluded)."""
    members = wallet.addresses
    n_tx = n_dep = n_wdr = 0
    deposits = Decimal(0)
    withdrawals = Decimal(0)
    for tx in txs:
        spends_wallet = any(a in members for a, _ in tx.inputs)
        pays_wallet = any(a in members for a, _ in tx.outputs)
        if not spends_wallet and not pays_wallet:
            continue
        n_tx += 1
        if pays_wallet and not spends_wallet:
            n_dep += 1
            received = sum(v for a, v in tx.outputs if a in members)
            deposits += usd_convert(received, tx.timestamp, rates)
        if spends_wallet:
            n_wdr += 1
            sent_out = sum(v for a, v in tx.outputs if a not in members)
            withdrawals += usd_convert(sent_out, tx.timestamp, rates)
    return WalletFeature(
        wallet_id=wallet.id,
        n_addresses=len(members),
        n_tx=n_tx,
        n_deposit_tx=n_dep,
        n_withdraw_tx=n_wdr,
        deposits_usd=deposits,
        withdrawals_usd=withdrawals,
        balance_usd=deposits - withdrawals,
    )


# -- outlier filtering -----------------------------------------------------------


MIN_WALLETS_FOR_FILTERING = 20


def filter_outliers(
    features: Sequence[WalletFeature],
    contamination: float = 0.05,
    seed: int = 0,
) -> list[bool]:
    """Flag exactly round(contamination * n) wallets with the highest
    isolation-based anomaly scores. Below the minimum population no wallet
    is flagged and a warning is emitted."""
    n = len(features)
    if n < MIN_WALLETS_FOR_FILTERING:
        warnings.warn(
            f"{n} wallets < {MIN_WALLETS_FOR_FILTERING}; outlier filtering skipped",
            stacklevel=2,
        )
        return [False] * n
    X = np.asarray([f.as_floats() for f in features])
    forest = IsolationForest(random_state=seed, contamination="auto")
    forest.fit(X)
    scores = -forest.score_samples(X)  # higher = more anomalous
    k = round(contamination * n)
    flags = [False] * n
    if k <= 0:
        return flags
    ranked = sorted(range(n), key=lambda i: (-scores[i], i))
    for i in ranked[:k]:
        flags[i] = True
    return flags


# -- wallet money-flow graph -------------------------------------------------------


@dataclass(slots=True)
class WalletGraphEdge:
    src: str
    dst: str
    n_transactions: int
    total_satoshis: int
    total_usd: Decimal


def build_wallet_graph(
    txs: Iterable[ChainTx],
    part: WalletPartition,
    rates: Optional[RateTable] = None,
) -> dict[tuple[str, str], WalletGraphEdge]:
    """Edge W1->W2 aggregates every tx spending W1 addresses that pays any
    W2 address, counting the tx once and summing the value it moved."""
    edges: dict[tuple[str, str], WalletGraphEdge] = {}
    for tx in txs:
        if tx.is_coinbase:
            continue
        src_id = part.find(tx.inputs[0][0])
        paid: dict[str, int] = {}
        for addr, value in tx.outputs:
            dst_id = part.find(addr)
            if dst_id == src_id:
                continue
            paid[dst_id] = paid.get(dst_id, 0) + value
        for dst_id, value in paid.items():
            key = (src_id, dst_id)
            usd = (usd_convert(value, tx.timestamp, rates)
                   if rates is not None else Decimal(0))
            edge = edges.get(key)
            if edge is None:
                edges[key] = WalletGraphEdge(src_id, dst_id, 1, value, usd)
            else:
                edge.n_transactions += 1
                edge.total_satoshis += value
                edge.total_usd += usd
    return edges


# -- external formats ----------------------------------------------------------------


def _format_io(pairs: Sequence[tuple[str, int]]) -> str:
    return ",".join(f"{addr}:{value}" for addr, value in pairs)


def _parse_io(text: str, lineno: int) -> tuple[tuple[str, int], ...]:
    if not text:
        return ()
    out = []
    for item in text.split(","):
        addr, sep, value = item.rpartition(":")
        if not sep or not addr:
            raise MalformedBlock(f"tx feed line {lineno}: bad entry {item!r}")
        out.append((addr, int(value)))
    return tuple(out)


def format_tx_feed(txs: Iterable[ChainTx]) -> str:
    """One tx per line: txid, timestamp, inputs, outputs (tab-separated;
    io lists comma-separated address:value; coinbase inputs empty)."""
    lines = [
        "\t".join((tx.txid, repr(tx.timestamp),
                   _format_io(tx.inputs), _format_io(tx.outputs)))
        for tx in txs
    ]
    return "\n".join(lines) + ("\n" if lines else "")


def parse_tx_feed(text: str) -> list[ChainTx]:
    txs = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.rstrip("\n")
        if not line.strip() or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 4:
            raise MalformedBlock(f"tx feed line {lineno}: expected 4 fields")
        txid, ts, ins, outs = parts
        txs.append(ChainTx(txid, float(ts),
                           _parse_io(ins, lineno), _parse_io(outs, lineno)))
    return txs


def parse_rate_table(text: str) -> RateTable:
    """Lines of timestamp<TAB>rate."""
    points = []
    for lineno, raw in enumerate(text.splitlines(), 1):
        line = raw.strip()
        if not line or line.startswith("#"):
            continue
        parts = line.split("\t")
        if len(parts) != 2:
            raise ValueError(f"rate table line {lineno}: expected 2 fields")
        points.append((float(parts[0]), Decimal(parts[1])))
    return RateTable(points)


def export_wallets(
    wallets: Sequence[Wallet],
    features: dict[str, WalletFeature],
) -> str:
    """One wallet per line: id, addresses, labels, then the seven features
    (USD values rendered to the cent)."""
    lines = []
    for w in sorted(wallets, key=lambda w: w.id):
        f = features[w.id]
        lines.append("\t".join((
            w.id,
            ",".join(sorted(w.addresses)),
            ",".join(sorted(w.labels)),
            str(f.n_addresses), str(f.n_tx),
            str(f.n_deposit_tx), str(f.n_withdraw_tx),
            str(to_cents(f.deposits_usd)),
            str(to_cents(f.withdrawals_usd)),
            str(to_cents(f.balance_usd)),
        )))
    return "\n".join(lines) + ("\n" if lines else "")
