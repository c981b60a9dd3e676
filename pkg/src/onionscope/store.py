"""Single-node persistence: document index, domain records, wallet tables,
graph stats, and a content-addressed filestore.

One writer, many readers. The logical schema matches what a sharded
deployment would use; sharding stays behind this interface.
"""

from __future__ import annotations

import hashlib
import json
import threading
from dataclasses import dataclass, field
from pathlib import Path
from typing import Iterable, Optional

from .model import DomainRecord, ImageHashRecord, PageDocument


class StorageError(RuntimeError):
    """Persistence failure; safe to retry."""


class FileStore:
    """Content-addressed blob store; keys are sha256 hex digests. Falls back
    to an in-memory dict when no directory is configured."""

    def __init__(self, directory: Optional[str | Path] = None):
        self._dir = Path(directory) if directory is not None else None
        if self._dir is not None:
            self._dir.mkdir(parents=True, exist_ok=True)
        self._mem: dict[str, bytes] = {}

    def put(self, data: bytes) -> str:
        key = hashlib.sha256(data).hexdigest()
        if self._dir is None:
            self._mem[key] = data
        else:
            path = self._dir / key[:2] / key
            if not path.exists():
                path.parent.mkdir(parents=True, exist_ok=True)
                tmp = path.with_suffix(".tmp")
                tmp.write_bytes(data)
                tmp.replace(path)
        return key

    def get(self, key: str) -> bytes:
        if self._dir is None:
            if key not in self._mem:
                raise StorageError(f"no blob {key}")
            return self._mem[key]
        path = self._dir / key[:2] / key
        if not path.exists():
            raise StorageError(f"no blob {key}")
        return path.read_bytes()

    def has(self, key: str) -> bool:
        if self._dir is None:
            return key in self._mem
        return (self._dir / key[:2] / key).exists()


@dataclass(slots=True)
class WalletInfo:
    wallet_id: str
    addresses: tuple[str, ...]
    labels: tuple[str, ...]
    outlier: bool
    features: dict[str, str]  # feature name -> decimal/int string

    def to_json(self) -> dict:
        return {
            "wallet_id": self.wallet_id,
            "addresses": list(self.addresses),
            "labels": list(self.labels),
            "outlier": self.outlier,
            "features": self.features,
        }

    @classmethod
    def from_json(cls, d: dict) -> "WalletInfo":
        return cls(d["wallet_id"], tuple(d["addresses"]), tuple(d["labels"]),
                   d["outlier"], d["features"])


@dataclass(slots=True)
class WalletEdgeInfo:
    src: str
    dst: str
    n_transactions: int
    total_satoshis: int
    total_usd: str

    def to_json(self) -> dict:
        return {"src": self.src, "dst": self.dst,
                "n_transactions": self.n_transactions,
                "total_satoshis": self.total_satoshis,
                "total_usd": self.total_usd}

    @classmethod
    def from_json(cls, d: dict) -> "WalletEdgeInfo":
        return cls(d["src"], d["dst"], d["n_transactions"],
                   d["total_satoshis"], d["total_usd"])


class Store:
    """The whole analysis state. Mutations acknowledge only after the
    in-memory structures are consistent, so a reader sees its own writes."""

    def __init__(self, files_dir: Optional[str | Path] = None):
        self._lock = threading.RLock()
        self.documents: dict[str, PageDocument] = {}
        self.doc_text_refs: dict[str, str] = {}
        self.domains: dict[str, DomainRecord] = {}
        self.wallets: dict[str, WalletInfo] = {}
        self.wallet_edges: list[WalletEdgeInfo] = []
        self.address_wallet: dict[str, str] = {}
        self.graph_stats: dict = {}
        self.malicious_report: dict = {}
        self.similarity_clusters: list[dict] = []
        self.camera_clusters: list[dict] = []
        self.frontier_snapshot: dict = {}
        # blob refs into the filestore, so an analysis run can rehydrate
        # pages and images crawled by an earlier process
        self.page_assets: dict[str, dict] = {}
        self.image_blob_refs: dict[str, str] = {}
        self.files = FileStore(files_dir)
        # Inverted index over cleaned text, maintained on every upsert.
        self._postings: dict[str, set[str]] = {}
        self._doc_terms: dict[str, dict[str, int]] = {}

    # -- documents ------------------------------------------------------

    @staticmethod
    def _tokenize(text: str) -> dict[str, int]:
        import re

        counts: dict[str, int] = {}
        for tok in re.findall(r"[a-z0-9]+", text.lower()):
            counts[tok] = counts.get(tok, 0) + 1
        return counts

    def index_document(self, doc: PageDocument, cleaned_text: str = "") -> None:
        """Upsert by canonical URL; the document becomes searchable
        immediately."""
        with self._lock:
            doc_id = doc.doc_id
            old_terms = self._doc_terms.pop(doc_id, {})
            for term in old_terms:
                bucket = self._postings.get(term)
                if bucket is not None:
                    bucket.discard(doc_id)
                    if not bucket:
                        del self._postings[term]
            self.documents[doc_id] = doc
            if cleaned_text:
                self.doc_text_refs[doc_id] = self.files.put(
                    cleaned_text.encode())
            terms = self._tokenize(cleaned_text)
            self._doc_terms[doc_id] = terms
            for term in terms:
                self._postings.setdefault(term, set()).add(doc_id)

    def get_document(self, url: str) -> Optional[PageDocument]:
        with self._lock:
            return self.documents.get(url)

    def documents_for_domain(self, host: str) -> list[PageDocument]:
        with self._lock:
            return sorted(
                (d for d in self.documents.values() if d.url.host == host),
                key=lambda d: d.doc_id)

    def postings(self, term: str) -> set[str]:
        with self._lock:
            return set(self._postings.get(term, ()))

    def term_count(self, doc_id: str, term: str) -> int:
        with self._lock:
            return self._doc_terms.get(doc_id, {}).get(term, 0)

    def image_records(self) -> list[ImageHashRecord]:
        with self._lock:
            out = []
            for doc in self.documents.values():
                out.extend(doc.image_hashes)
            return out

    # -- page/image blobs -------------------------------------------------

    def put_page_assets(self, doc_id: str, rendered_html: str,
                        scripts: Iterable[str], styles: Iterable[str]) -> None:
        with self._lock:
            self.page_assets[doc_id] = {
                "rendered": self.files.put(rendered_html.encode()),
                "scripts": [self.files.put(s.encode()) for s in scripts],
                "styles": [self.files.put(s.encode()) for s in styles],
            }

    def get_page_assets(
        self, doc_id: str,
    ) -> Optional[tuple[str, list[str], list[str]]]:
        with self._lock:
            refs = self.page_assets.get(doc_id)
        if refs is None or not self.files.has(refs["rendered"]):
            return None
        rendered = self.files.get(refs["rendered"]).decode()
        scripts = [self.files.get(r).decode() for r in refs["scripts"]]
        styles = [self.files.get(r).decode() for r in refs["styles"]]
        return rendered, scripts, styles

    def put_image_bytes(self, src_url: str, data: bytes) -> None:
        with self._lock:
            self.image_blob_refs[src_url] = self.files.put(data)

    def get_image_bytes(self, src_url: str) -> Optional[bytes]:
        with self._lock:
            ref = self.image_blob_refs.get(src_url)
        if ref is None or not self.files.has(ref):
            return None
        return self.files.get(ref)

    # -- domains and wallets ----------------------------------------------

    def upsert_domain(self, record: DomainRecord) -> None:
        with self._lock:
            self.domains[record.domain] = record

    def get_domain(self, host: str) -> Optional[DomainRecord]:
        with self._lock:
            return self.domains.get(host)

    def replace_wallets(self, wallets: Iterable[WalletInfo],
                        edges: Iterable[WalletEdgeInfo]) -> None:
        with self._lock:
            self.wallets = {w.wallet_id: w for w in wallets}
            self.wallet_edges = list(edges)
            self.address_wallet = {
                a: w.wallet_id for w in self.wallets.values()
                for a in w.addresses
            }

    def wallet_neighbors(self, wallet_id: str) -> list[WalletEdgeInfo]:
        with self._lock:
            return [e for e in self.wallet_edges
                    if e.src == wallet_id or e.dst == wallet_id]

    # -- persistence ----------------------------------------------------------

    def save(self, directory: str | Path) -> Path:
        root = Path(directory)
        root.mkdir(parents=True, exist_ok=True)
        with self._lock:
            try:
                self._write_jsonl(root / "documents.jsonl",
                                  (d.to_json() for d in
                                   sorted(self.documents.values(),
                                          key=lambda d: d.doc_id)))
                self._write_jsonl(root / "domains.jsonl",
                                  (r.to_json() for r in
                                   sorted(self.domains.values(),
                                          key=lambda r: r.domain)))
                self._write_jsonl(root / "wallets.jsonl",
                                  (w.to_json() for w in
                                   sorted(self.wallets.values(),
                                          key=lambda w: w.wallet_id)))
                self._write_jsonl(root / "wallet_edges.jsonl",
                                  (e.to_json() for e in self.wallet_edges))
                (root / "aggregates.json").write_text(json.dumps(
                    {
                        "graph_stats": self.graph_stats,
                        "malicious_report": self.malicious_report,
                        "similarity_clusters": self.similarity_clusters,
                        "camera_clusters": self.camera_clusters,
                        "doc_text_refs": self.doc_text_refs,
                        "page_assets": self.page_assets,
                        "image_blob_refs": self.image_blob_refs,
                        "frontier_snapshot": self.frontier_snapshot,
                    }, indent=0, sort_keys=True))
            except OSError as exc:
                raise StorageError(str(exc)) from exc
        return root

    @staticmethod
    def _write_jsonl(path: Path, rows) -> None:
        with path.open("w") as fh:
            for row in rows:
                fh.write(json.dumps(row, sort_keys=True) + "\n")

    @classmethod
    def load(cls, directory: str | Path,
             files_dir: Optional[str | Path] = None) -> "Store":
        root = Path(directory)
        store = cls(files_dir=files_dir)
        for line in _read_lines(root / "documents.jsonl"):
            doc = PageDocument.from_json(json.loads(line))
            store.documents[doc.doc_id] = doc
        for line in _read_lines(root / "domains.jsonl"):
            rec = DomainRecord.from_json(json.loads(line))
            store.domains[rec.domain] = rec
        for line in _read_lines(root / "wallets.jsonl"):
            w = WalletInfo.from_json(json.loads(line))
            store.wallets[w.wallet_id] = w
            for a in w.addresses:
                store.address_wallet[a] = w.wallet_id
        for line in _read_lines(root / "wallet_edges.jsonl"):
            store.wallet_edges.append(WalletEdgeInfo.from_json(json.loads(line)))
        agg_path = root / "aggregates.json"
        if agg_path.exists():
            agg = json.loads(agg_path.read_text())
            store.graph_stats = agg.get("graph_stats", {})
            store.malicious_report = agg.get("malicious_report", {})
            store.similarity_clusters = agg.get("similarity_clusters", [])
            store.camera_clusters = agg.get("camera_clusters", [])
            store.doc_text_refs = agg.get("doc_text_refs", {})
            store.page_assets = agg.get("page_assets", {})
            store.image_blob_refs = agg.get("image_blob_refs", {})
            store.frontier_snapshot = agg.get("frontier_snapshot", {})
        # Rebuild the search index from stored text.
        for doc_id, ref in store.doc_text_refs.items():
            if store.files.has(ref) and doc_id in store.documents:
                text = store.files.get(ref).decode()
                terms = store._tokenize(text)
                store._doc_terms[doc_id] = terms
                for term in terms:
                    store._postings.setdefault(term, set()).add(doc_id)
        return store


def _read_lines(path: Path) -> list[str]:
    if not path.exists():
        return []
    return [l for l in path.read_text().splitlines() if l.strip()]
