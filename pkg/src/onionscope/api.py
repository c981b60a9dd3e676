"""Read-only HTTP+JSON API over the store, versioned under /v1.

Endpoints: GET /v1/search, GET /v1/domains/{name}, POST /v1/ris,
GET /v1/wallets/{id}, GET /v1/graph/stats, GET /v1/status/summary.
"""

from __future__ import annotations

import base64
import binascii
from typing import Optional

from fastapi import FastAPI, HTTPException, Query
from pydantic import BaseModel, Field

from . import imaging
from .search import BadQuery, SearchQuery, domain_status, reverse_image_search, search
from .store import Store


class RisRequest(BaseModel):
    hash_hex: Optional[str] = None
    image_b64: Optional[str] = None
    max_distance: int = Field(default=10, ge=0, le=64)


def _hit_json(hit) -> dict:
    r = hit.record
    return {
        "domain": hit.domain,
        "score": hit.score,
        "matched_pages": hit.matched_pages,
        "category": r.category,
        "language": r.language,
        "illicit": r.illicit,
        "tracked": r.tracking,
        "status": domain_status(r),
        "page_count": r.page_count,
    }


def create_app(store: Store) -> FastAPI:
    app = FastAPI(title="onionscope API", version="1")

    @app.get("/v1/search")
    def search_endpoint(
        q: str = "",
        category: Optional[str] = None,
        language: Optional[str] = None,
        illicit: Optional[bool] = None,
        tracked: Optional[bool] = None,
        has_attributed_address: Optional[bool] = None,
        template_cluster: Optional[int] = None,
        status: Optional[str] = None,
        page: int = Query(default=1, ge=1),
        page_size: int = Query(default=20, ge=1, le=200),
    ):
        try:
            query = SearchQuery(
                terms=tuple(q.split()),
                category=category,
                language=language,
                illicit=illicit,
                tracked=tracked,
                has_attributed_address=has_attributed_address,
                template_cluster=template_cluster,
                status=status,
                page=page,
                page_size=page_size,
            )
            result = search(store, query)
        except BadQuery as exc:
            raise HTTPException(status_code=400, detail=str(exc))
        return {
            "hits": [_hit_json(h) for h in result.hits],
            "total": result.total,
            "facets": result.facets,
        }

    @app.get("/v1/domains/{name}")
    def domain_endpoint(name: str):
        record = store.get_domain(name)
        if record is None:
            raise HTTPException(status_code=404, detail="unknown domain")
        docs = store.documents_for_domain(name)
        flagged = set(store.malicious_report.get("flagged_urls", ()))
        outbound_flagged = sorted({
            str(u) for d in docs for u in d.out_urls
            if not u.is_onion and str(u) in flagged
        })
        mirror_members = []
        if record.template_cluster_id is not None:
            mirror_members = sorted(
                r.domain for r in store.domains.values()
                if r.template_cluster_id == record.template_cluster_id
                and r.domain != name
            )
        address_wallets = {
            a: store.address_wallet[a] for a in record.attributed_addresses
            if a in store.address_wallet
        }
        return {
            "record": record.to_json(),
            "status": domain_status(record),
            "pages": [d.doc_id for d in docs],
            "mirror_members": mirror_members,
            "attributed_wallets": sorted(set(address_wallets.values())),
            "address_wallets": address_wallets,
            "outbound_flagged_urls": outbound_flagged,
        }

    @app.post("/v1/ris")
    def ris_endpoint(req: RisRequest):
        if (req.hash_hex is None) == (req.image_b64 is None):
            raise HTTPException(
                status_code=400,
                detail="provide exactly one of hash_hex or image_b64")
        if req.hash_hex is not None:
            try:
                query_hash = int(req.hash_hex, 16)
            except ValueError:
                raise HTTPException(status_code=400, detail="bad hash_hex")
            if not 0 <= query_hash < (1 << 64):
                raise HTTPException(status_code=400, detail="hash not 64-bit")
        else:
            try:
                blob = base64.b64decode(req.image_b64, validate=True)
                pixels, _, _, _ = imaging.decode_image(blob)
            except (binascii.Error, imaging.UndecodableImage):
                raise HTTPException(status_code=400, detail="undecodable image")
            query_hash = imaging.dhash(pixels)
        groups = reverse_image_search(store, query_hash, req.max_distance)
        return {
            "query_hash": f"{query_hash:016x}",
            "groups": {
                host: [m.__dict__ for m in ms] for host, ms in groups.items()
            },
        }

    @app.get("/v1/wallets/{wallet_id}")
    def wallet_endpoint(wallet_id: str):
        info = store.wallets.get(wallet_id)
        if info is None:
            raise HTTPException(status_code=404, detail="unknown wallet")
        neighbors = [e.to_json() for e in store.wallet_neighbors(wallet_id)]
        return {"wallet": info.to_json(), "neighbors": neighbors}

    @app.get("/v1/graph/stats")
    def graph_stats_endpoint():
        return store.graph_stats

    @app.get("/v1/status/summary")
    def status_summary_endpoint():
        by_status: dict[str, int] = {}
        by_category: dict[str, int] = {}
        by_language: dict[str, int] = {}
        for r in store.domains.values():
            s = domain_status(r)
            by_status[s] = by_status.get(s, 0) + 1
            c = r.category or "unclassified"
            by_category[c] = by_category.get(c, 0) + 1
            lang = r.language or "unclassified"
            by_language[lang] = by_language.get(lang, 0) + 1
        return {
            "domains": len(store.domains),
            "documents": len(store.documents),
            "wallets": len(store.wallets),
            "images": len(store.image_records()),
            "by_status": by_status,
            "by_category": by_category,
            "by_language": by_language,
            "availability": store.graph_stats.get("availability", {}),
        }

    return app
