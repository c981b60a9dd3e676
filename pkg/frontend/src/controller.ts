/**
 * Pure view pipeline: state → request plan → loaded payloads → HTML.
 *
 * Kept free of DOM access so tests can drive it headlessly: the plan
 * lists every API call a view makes, loadView executes the plan, and
 * renderView turns the raw payloads into markup. app.ts only wires
 * these to the browser.
 */

import {
  ApiClient,
  ApiError,
  searchQueryString,
  type DomainResponse,
  type RisResponse,
  type SearchParams,
  type SearchResponse,
  type StatusSummary,
  type WalletResponse,
} from "./api.js";
import { esc, navLink } from "./render.js";
import { encodeState, type ViewState } from "./state.js";
import { renderDomain, renderDomainNotFound } from "./views/domain.js";
import { renderRis } from "./views/ris.js";
import { renderSearch } from "./views/search.js";
import { renderWallet, renderWalletNotFound } from "./views/wallet.js";

export interface RequestSpec {
  /** Payload root name; rendered data-field paths start with it. */
  name: string;
  method: "GET" | "POST";
  path: string;
  body?: unknown;
}

export interface LoadedView {
  state: ViewState;
  requests: RequestSpec[];
  payloads: Record<string, unknown>;
  /** 404 on the focal entity (unknown domain or wallet). */
  notFound: boolean;
  /** Any other API failure; the app shows a banner and keeps stale content. */
  error: { status: number; detail: string } | null;
}

export function searchParamsFor(state: ViewState): SearchParams {
  const f = state.filters;
  return {
    q: state.q || undefined,
    category: f.category,
    language: f.language,
    illicit: f.illicit,
    tracked: f.tracked,
    status: f.status,
    page: state.page,
    page_size: state.pageSize,
  };
}

function isLanding(state: ViewState): boolean {
  return state.q === "" && Object.keys(state.filters).length === 0 &&
    state.page === 1;
}

/** Every API call the view for this state performs, in order. */
export function planRequests(state: ViewState): RequestSpec[] {
  switch (state.view) {
    case "search": {
      const specs: RequestSpec[] = [{
        name: "search",
        method: "GET",
        path: `/v1/search${searchQueryString(searchParamsFor(state))}`,
      }];
      if (isLanding(state)) {
        specs.push({ name: "summary", method: "GET", path: "/v1/status/summary" });
      }
      return specs;
    }
    case "domain":
      if (state.domain == null) return [];
      return [{
        name: "domain",
        method: "GET",
        path: `/v1/domains/${encodeURIComponent(state.domain)}`,
      }];
    case "wallet":
      if (state.wallet == null) return [];
      return [{
        name: "wallet",
        method: "GET",
        path: `/v1/wallets/${encodeURIComponent(state.wallet)}`,
      }];
    case "ris":
      if (state.hash == null) return [];
      return [{
        name: "ris",
        method: "POST",
        path: "/v1/ris",
        body: { hash_hex: state.hash, max_distance: state.maxDistance },
      }];
  }
}

export async function loadView(
  state: ViewState,
  api: ApiClient,
  signal?: AbortSignal,
): Promise<LoadedView> {
  const requests = planRequests(state);
  const loaded: LoadedView = {
    state, requests, payloads: {}, notFound: false, error: null,
  };
  for (const spec of requests) {
    try {
      loaded.payloads[spec.name] =
        await api.call(spec.method, spec.path, spec.body, signal);
    } catch (err) {
      if (!(err instanceof ApiError)) throw err;
      if (err.status === 404 && (spec.name === "domain" || spec.name === "wallet")) {
        loaded.notFound = true;
      } else {
        loaded.error = { status: err.status, detail: err.detail };
      }
      return loaded;
    }
  }
  return loaded;
}

function chrome(state: ViewState): string {
  const tab = (view: ViewState["view"], label: string) => {
    const cls = state.view === view ? "tab active" : "tab";
    return navLink(encodeState({ ...state, view }) || "?", esc(label), cls);
  };
  const pins = state.pins.map((p) => {
    const target: ViewState =
      p.kind === "domain" ? { ...state, view: "domain", domain: p.id } :
      p.kind === "wallet" ? { ...state, view: "wallet", wallet: p.id } :
      { ...state, view: "ris", hash: p.id };
    const without = {
      ...state,
      pins: state.pins.filter((q) => !(q.kind === p.kind && q.id === p.id)),
    };
    return `<span class="pin">${navLink(encodeState(target) || "?",
      `${esc(p.kind)}: <code>${esc(p.id)}</code>`)} ` +
      `${navLink(encodeState(without) || "?", "&times;", "pin-remove")}</span>`;
  }).join(" ");
  return `<nav class="tabs">${tab("search", "search")}${tab("ris", "images")}</nav>` +
    (pins ? `<div class="pins">pinned: ${pins}</div>` : "");
}

export function renderView(loaded: LoadedView): string {
  const s = loaded.state;
  let content: string;
  switch (s.view) {
    case "search": {
      const result = loaded.payloads["search"] as SearchResponse | undefined;
      const summary = (loaded.payloads["summary"] as StatusSummary | undefined) ?? null;
      content = result
        ? renderSearch(s, result, summary)
        : `<p class="empty">nothing loaded</p>`;
      break;
    }
    case "domain": {
      const payload = loaded.payloads["domain"] as DomainResponse | undefined;
      content = loaded.notFound || !payload
        ? renderDomainNotFound(s)
        : renderDomain(s, payload);
      break;
    }
    case "wallet": {
      const payload = loaded.payloads["wallet"] as WalletResponse | undefined;
      content = loaded.notFound || !payload
        ? renderWalletNotFound(s)
        : renderWallet(s, payload);
      break;
    }
    case "ris": {
      const payload = (loaded.payloads["ris"] as RisResponse | undefined) ?? null;
      content = renderRis(s, payload);
      break;
    }
  }
  return chrome(s) + `<div class="view view-${s.view}">${content}</div>`;
}
