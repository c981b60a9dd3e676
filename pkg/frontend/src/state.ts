/**
 * View state, round-trippable through the URL query string.
 *
 * Everything an investigation needs to come back to a view lives here:
 * query and filters, the selected entity, the RIS parameters, and pinned
 * items. Navigation history is the browser history stack itself: every
 * state change pushes a URL encoded by this module, so back/forward and
 * shared links all decode to the same view.
 */

export type ViewKind = "search" | "domain" | "ris" | "wallet";

export type PinKind = "domain" | "wallet" | "image";

export interface Pin {
  kind: PinKind;
  id: string;
}

export interface SearchFilters {
  category?: string;
  language?: string;
  illicit?: boolean;
  tracked?: boolean;
  status?: string;
}

export interface ViewState {
  view: ViewKind;
  q: string;
  filters: SearchFilters;
  page: number;
  pageSize: number;
  domain?: string;
  wallet?: string;
  hash?: string;
  maxDistance: number;
  pins: Pin[];
}

export const DEFAULT_PAGE_SIZE = 20;
export const DEFAULT_MAX_DISTANCE = 10;

export function emptyState(): ViewState {
  return {
    view: "search",
    q: "",
    filters: {},
    page: 1,
    pageSize: DEFAULT_PAGE_SIZE,
    maxDistance: DEFAULT_MAX_DISTANCE,
    pins: [],
  };
}

const VIEWS: ViewKind[] = ["search", "domain", "ris", "wallet"];
const PIN_KINDS: PinKind[] = ["domain", "wallet", "image"];

function boolParam(qs: URLSearchParams, name: string): boolean | undefined {
  const v = qs.get(name);
  if (v === "1") return true;
  if (v === "0") return false;
  return undefined;
}

function intParam(qs: URLSearchParams, name: string, fallback: number,
                  lo: number, hi: number): number {
  const raw = qs.get(name);
  if (raw === null) return fallback;
  const n = Number.parseInt(raw, 10);
  if (!Number.isFinite(n) || n < lo || n > hi) return fallback;
  return n;
}

/** Encode a state as a query string ("?view=..."), omitting defaults so
 * URLs stay short and canonical. */
export function encodeState(s: ViewState): string {
  const qs = new URLSearchParams();
  if (s.view !== "search") qs.set("view", s.view);
  if (s.q) qs.set("q", s.q);
  const f = s.filters;
  if (f.category != null) qs.set("category", f.category);
  if (f.language != null) qs.set("language", f.language);
  if (f.illicit != null) qs.set("illicit", f.illicit ? "1" : "0");
  if (f.tracked != null) qs.set("tracked", f.tracked ? "1" : "0");
  if (f.status != null) qs.set("status", f.status);
  if (s.page !== 1) qs.set("page", String(s.page));
  if (s.pageSize !== DEFAULT_PAGE_SIZE) qs.set("per", String(s.pageSize));
  if (s.domain != null) qs.set("domain", s.domain);
  if (s.wallet != null) qs.set("wallet", s.wallet);
  if (s.hash != null) qs.set("hash", s.hash);
  if (s.maxDistance !== DEFAULT_MAX_DISTANCE) qs.set("dist", String(s.maxDistance));
  if (s.pins.length) {
    qs.set("pins", s.pins.map((p) => `${p.kind}:${p.id}`).join(","));
  }
  const out = qs.toString();
  return out ? `?${out}` : "";
}

/** Decode a query string (with or without the leading "?"). Unknown or
 * malformed values fall back to defaults; a garbage URL still yields a
 * usable view rather than a crash. */
export function decodeState(queryString: string): ViewState {
  const qs = new URLSearchParams(
    queryString.startsWith("?") ? queryString.slice(1) : queryString);
  const s = emptyState();
  const view = qs.get("view");
  if (view && (VIEWS as string[]).includes(view)) s.view = view as ViewKind;
  s.q = qs.get("q") ?? "";
  const category = qs.get("category");
  if (category !== null) s.filters.category = category;
  const language = qs.get("language");
  if (language !== null) s.filters.language = language;
  const illicit = boolParam(qs, "illicit");
  if (illicit !== undefined) s.filters.illicit = illicit;
  const tracked = boolParam(qs, "tracked");
  if (tracked !== undefined) s.filters.tracked = tracked;
  const status = qs.get("status");
  if (status !== null) s.filters.status = status;
  s.page = intParam(qs, "page", 1, 1, 1_000_000);
  s.pageSize = intParam(qs, "per", DEFAULT_PAGE_SIZE, 1, 200);
  const domain = qs.get("domain");
  if (domain !== null) s.domain = domain;
  const wallet = qs.get("wallet");
  if (wallet !== null) s.wallet = wallet;
  const hash = qs.get("hash");
  if (hash !== null && /^[0-9a-fA-F]{1,16}$/.test(hash)) s.hash = hash.toLowerCase();
  s.maxDistance = intParam(qs, "dist", DEFAULT_MAX_DISTANCE, 0, 64);
  const pins = qs.get("pins");
  if (pins) {
    for (const chunk of pins.split(",")) {
      const idx = chunk.indexOf(":");
      if (idx <= 0) continue;
      const kind = chunk.slice(0, idx);
      const id = chunk.slice(idx + 1);
      if ((PIN_KINDS as string[]).includes(kind) && id) {
        s.pins.push({ kind: kind as PinKind, id });
      }
    }
  }
  return s;
}

/** Canonical form: what the state looks like after a URL round trip. */
export function normalizeState(s: ViewState): ViewState {
  return decodeState(encodeState(s));
}

export function statesEqual(a: ViewState, b: ViewState): boolean {
  return encodeState(a) === encodeState(b);
}

/** Pin toggling returns a new state so callers can push a fresh URL. */
export function togglePin(s: ViewState, pin: Pin): ViewState {
  const exists = s.pins.some((p) => p.kind === pin.kind && p.id === pin.id);
  const pins = exists
    ? s.pins.filter((p) => !(p.kind === pin.kind && p.id === pin.id))
    : [...s.pins, pin];
  return { ...s, pins };
}
